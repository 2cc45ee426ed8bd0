//! Reporting: hand-rolled SVG line plots with ±1-std bands, and a
//! markdown report assembled *only* from result CSVs on disk.
//!
//! Rendering is a pure function of the input files: no timestamps, no
//! environment lookups, fixed palette and layout — rerunning over the
//! same CSVs reproduces every output byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::{read_results_csv, ResultRow};

/// Fixed series palette (color-blind-friendly hues).
const PALETTE: [&str; 6] = ["#0072b2", "#d55e00", "#009e73", "#cc79a7", "#e69f00", "#56b4e9"];

/// Canvas geometry shared by all plots.
const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 64.0;
const MR: f64 = 18.0;
const MT: f64 = 40.0;
const MB: f64 = 48.0;

/// One plotted series: label and `(x, mean, std)` points.
pub struct PlotSeries {
    pub label: String,
    pub points: Vec<(f64, f64, f64)>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Fixed-precision coordinate formatting keeps the SVG byte-stable.
fn c(v: f64) -> String {
    format!("{v:.2}")
}

/// Tick labels: trim trailing zeros from a 4-decimal rendering.
fn tick_label(v: f64) -> String {
    let mut s = format!("{v:.4}");
    while s.contains('.') && (s.ends_with('0') || s.ends_with('.')) {
        s.pop();
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// Render a line plot with a ±1-std band per series.
///
/// Errors if no series has any point (an empty plot has no meaningful
/// scale).
pub fn line_plot_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[PlotSeries],
) -> Result<String> {
    let mut xs: Vec<f64> = Vec::new();
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, m, sd) in &s.points {
            xs.push(x);
            ymin = ymin.min(m - sd);
            ymax = ymax.max(m + sd);
        }
    }
    if xs.is_empty() {
        return Err(Error::Invalid(format!("plot '{title}' has no data points")));
    }
    let (mut xmin, mut xmax) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if xmin == xmax {
        xmin -= 1.0;
        xmax += 1.0;
    }
    if ymin == ymax {
        ymin -= 1.0;
        ymax += 1.0;
    }
    let ypad = 0.06 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    let sx = |x: f64| ML + (x - xmin) / (xmax - xmin) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"Helvetica,Arial,sans-serif\">\n"
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" fill=\"#222\">{}</text>\n",
        c(W / 2.0),
        esc(title)
    );

    // Horizontal grid and y ticks.
    for i in 0..=4 {
        let y = ymin + (ymax - ymin) * i as f64 / 4.0;
        let py = sy(y);
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            c(ML),
            c(py),
            c(W - MR),
            c(py)
        );
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\" fill=\"#444\">{}</text>\n",
            c(ML - 6.0),
            c(py + 4.0),
            tick_label(y)
        );
    }
    // X ticks at unique data positions.
    let mut xticks = xs.clone();
    xticks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xticks.dedup();
    for &x in &xticks {
        let px = sx(x);
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            c(px),
            c(MT),
            c(px),
            c(H - MB)
        );
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\" fill=\"#444\">{}</text>\n",
            c(px),
            c(H - MB + 16.0),
            tick_label(x)
        );
    }
    // Axes.
    let _ = write!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#222\" stroke-width=\"1.5\"/>\n",
        c(ML),
        c(MT),
        c(ML),
        c(H - MB)
    );
    let _ = write!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#222\" stroke-width=\"1.5\"/>\n",
        c(ML),
        c(H - MB),
        c(W - MR),
        c(H - MB)
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" fill=\"#222\">{}</text>\n",
        c((ML + W - MR) / 2.0),
        c(H - 10.0),
        esc(x_label)
    );
    let _ = write!(
        svg,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" fill=\"#222\" \
         transform=\"rotate(-90 16 {})\">{}</text>\n",
        c((MT + H - MB) / 2.0),
        c((MT + H - MB) / 2.0),
        esc(y_label)
    );

    // Bands, lines, markers.
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let mut pts = s.points.clone();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if pts.len() > 1 {
            let mut band = String::new();
            for &(x, m, sd) in &pts {
                let _ = write!(band, "{},{} ", c(sx(x)), c(sy(m + sd)));
            }
            for &(x, m, sd) in pts.iter().rev() {
                let _ = write!(band, "{},{} ", c(sx(x)), c(sy(m - sd)));
            }
            let _ = write!(
                svg,
                "<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.15\" stroke=\"none\"/>\n",
                band.trim_end(),
                color
            );
            let mut line = String::new();
            for &(x, m, _) in &pts {
                let _ = write!(line, "{},{} ", c(sx(x)), c(sy(m)));
            }
            let _ = write!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                line.trim_end(),
                color
            );
        }
        for &(x, m, _) in &pts {
            let _ = write!(
                svg,
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n",
                c(sx(x)),
                c(sy(m)),
                color
            );
        }
    }
    // Legend.
    let mut lx = ML + 10.0;
    let ly = MT - 8.0;
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let _ = write!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
            c(lx),
            c(ly - 9.0),
            color
        );
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#222\">{}</text>\n",
            c(lx + 14.0),
            c(ly),
            esc(&s.label)
        );
        lx += 14.0 + 7.0 * (s.label.len() as f64) + 18.0;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// How one sweep kind is plotted: file suffix, metrics sharing the
/// axes, y-axis label, and table decimals.
struct PlotGroup {
    suffix: &'static str,
    metrics: &'static [&'static str],
    y_label: &'static str,
}

struct SweepLayout {
    kind: &'static str,
    file: &'static str,
    heading: &'static str,
    x_label: &'static str,
    decimals: usize,
    groups: &'static [PlotGroup],
}

const LAYOUTS: [SweepLayout; 6] = [
    SweepLayout {
        kind: "gamma",
        file: "gamma.csv",
        heading: "Overlap sweep",
        x_label: "shared share of decisive channels",
        decimals: 2,
        groups: &[
            PlotGroup {
                suffix: "acc",
                metrics: &["teacher_acc", "nokd_acc", "kd_acc"],
                y_label: "test accuracy (%)",
            },
            PlotGroup {
                suffix: "gap",
                metrics: &["kd_minus_nokd"],
                y_label: "distillation gain (points)",
            },
        ],
    },
    SweepLayout {
        kind: "alpha",
        file: "alpha.csv",
        heading: "Teacher-exclusive sweep",
        x_label: "teacher-exclusive share",
        decimals: 2,
        groups: &[
            PlotGroup {
                suffix: "acc",
                metrics: &["teacher_acc", "nokd_acc", "kd_acc"],
                y_label: "test accuracy (%)",
            },
            PlotGroup {
                suffix: "gap",
                metrics: &["kd_minus_nokd"],
                y_label: "distillation gain (points)",
            },
        ],
    },
    SweepLayout {
        kind: "table2",
        file: "table2.csv",
        heading: "Headline comparison",
        x_label: "shared share of decisive channels",
        decimals: 2,
        groups: &[PlotGroup {
            suffix: "acc",
            metrics: &["teacher_acc", "mg_teacher_acc", "nokd_acc", "kd_acc", "mg_kd_acc"],
            y_label: "test accuracy (%)",
        }],
    },
    SweepLayout {
        kind: "nullify",
        file: "nullify.csv",
        heading: "Nullification sweep",
        x_label: "nullified share of teacher channels",
        decimals: 2,
        groups: &[PlotGroup {
            suffix: "acc",
            metrics: &["acc_general", "acc_random", "acc_specific"],
            y_label: "distilled test accuracy (%)",
        }],
    },
    SweepLayout {
        kind: "rank_eval",
        file: "rank_eval.csv",
        heading: "Channel-ranking evaluation",
        x_label: "shared share of decisive channels",
        decimals: 4,
        groups: &[PlotGroup {
            suffix: "fs",
            metrics: &["fs_accuracy"],
            y_label: "feature-selection accuracy",
        }],
    },
    SweepLayout {
        kind: "ablate_m",
        file: "ablate_m.csv",
        heading: "Permutation-repeat ablation",
        x_label: "permutation repeats per channel",
        decimals: 4,
        groups: &[
            PlotGroup {
                suffix: "acc",
                metrics: &["mg_kd_acc"],
                y_label: "distilled test accuracy (%)",
            },
            PlotGroup {
                suffix: "var",
                metrics: &["salience_rerun_var"],
                y_label: "salience rerun variance",
            },
        ],
    },
];

/// Canonical results file name for a sweep kind (what the CLI writes by
/// default and what the report looks for).
pub fn canonical_results_file(sweep_kind: &str) -> Option<&'static str> {
    LAYOUTS.iter().find(|l| l.kind == sweep_kind).map(|l| l.file)
}

fn unique_in_order<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for it in items {
        if !out.iter().any(|o| o == it) {
            out.push(it.to_string());
        }
    }
    out
}

fn stat_cell(rows: &[ResultRow], point: &str, metric: &str, decimals: usize) -> String {
    match rows.iter().find(|r| r.point == point && r.metric == metric) {
        Some(r) => format!("{:.*} ± {:.*}", decimals, r.mean, decimals, r.std),
        None => "—".to_string(),
    }
}

/// Render the SVG plots for one sweep's rows as `(file name, content)`
/// pairs.
pub fn render_sweep_plots(sweep_kind: &str, rows: &[ResultRow]) -> Result<Vec<(String, String)>> {
    let layout = LAYOUTS
        .iter()
        .find(|l| l.kind == sweep_kind)
        .ok_or_else(|| Error::Invalid(format!("unknown sweep kind '{sweep_kind}'")))?;
    let points = unique_in_order(rows.iter().map(|r| r.point.as_str()));
    let mut out = Vec::new();
    for group in layout.groups {
        let mut series = Vec::new();
        for &metric in group.metrics {
            let mut pts = Vec::new();
            for p in &points {
                if let Some(r) = rows.iter().find(|r| r.point == *p && r.metric == metric) {
                    let x = p.parse::<f64>().map_err(|_| {
                        Error::Invalid(format!("point label '{p}' is not numeric"))
                    })?;
                    pts.push((x, r.mean, r.std));
                }
            }
            if !pts.is_empty() {
                series.push(PlotSeries { label: metric.to_string(), points: pts });
            }
        }
        if series.is_empty() {
            continue;
        }
        let svg = line_plot_svg(layout.heading, layout.x_label, group.y_label, &series)?;
        out.push((format!("{}_{}.svg", layout.kind, group.suffix), svg));
    }
    Ok(out)
}

fn md_section(layout: &SweepLayout, rows: &[ResultRow], plot_files: &[String]) -> String {
    let mut md = String::new();
    let _ = writeln!(md, "## {}\n", layout.heading);
    let points = unique_in_order(rows.iter().map(|r| r.point.as_str()));
    let metrics = unique_in_order(rows.iter().map(|r| r.metric.as_str()));
    let n_seeds = rows.first().map(|r| r.n_seeds).unwrap_or(0);
    let _ = writeln!(md, "Mean ± sample std over {n_seeds} seeds.\n");
    let _ = writeln!(md, "| point | {} |", metrics.join(" | "));
    let _ = writeln!(md, "|---:|{}", "---:|".repeat(metrics.len()));
    for p in &points {
        let cells: Vec<String> =
            metrics.iter().map(|m| stat_cell(rows, p, m, layout.decimals)).collect();
        let _ = writeln!(md, "| {} | {} |", p, cells.join(" | "));
    }
    md.push('\n');
    for f in plot_files {
        let _ = writeln!(md, "![{}]({})\n", f.trim_end_matches(".svg"), f);
    }
    md
}

/// Certificate summary appended to the report when `certificates.csv`
/// is present.
fn certificates_section(path: &Path) -> Result<String> {
    let (header, rows) = crate::csvio::read_csv(path)?;
    let expected: Vec<String> =
        crate::theory::CERTIFICATE_HEADER.iter().map(|s| s.to_string()).collect();
    if header != expected {
        return Err(Error::Invalid(format!(
            "{} is not a certificate file: unexpected header",
            path.display()
        )));
    }
    let mut held = 0usize;
    let mut worst_slack = f64::INFINITY;
    let mut worst_seed = 0u64;
    for (i, row) in rows.iter().enumerate() {
        let ctx = format!("{}:{}", path.display(), i + 2);
        let seed = crate::csvio::parse_f64(&row[0], &ctx)? as u64;
        let bound = crate::csvio::parse_f64(&row[6], &ctx)?;
        let risk_cf = crate::csvio::parse_f64(&row[7], &ctx)?;
        let risk_tr = crate::csvio::parse_f64(&row[8], &ctx)?;
        let holds = row[10] == "1";
        if holds {
            held += 1;
        }
        let slack = bound - risk_cf.max(risk_tr);
        if slack < worst_slack {
            worst_slack = slack;
            worst_seed = seed;
        }
    }
    let mut md = String::new();
    let _ = writeln!(md, "## Bound certificates\n");
    let _ = writeln!(md, "- instances: {}", rows.len());
    let _ = writeln!(md, "- certified (all inequalities hold): {held}/{}", rows.len());
    if rows.is_empty() {
        md.push('\n');
        return Ok(md);
    }
    let _ = writeln!(
        md,
        "- tightest slack (bound minus worst risk): {:.6} at seed {}",
        worst_slack, worst_seed
    );
    md.push('\n');
    Ok(md)
}

/// Assemble `report.md` (plus one SVG per plot group) from the
/// canonical CSV files present in `dir`. Returns the files written.
/// Errors if `dir` contains none of the expected inputs.
pub fn render_report(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut md = String::from("# Crossmodal distillation lab report\n\n");
    let mut found = false;
    let mut sources: Vec<String> = Vec::new();
    for layout in &LAYOUTS {
        let csv = dir.join(layout.file);
        if !csv.exists() {
            continue;
        }
        found = true;
        sources.push(layout.file.to_string());
        let rows = read_results_csv(&csv)?;
        if rows.iter().any(|r| r.sweep_kind != layout.kind) {
            return Err(Error::Invalid(format!(
                "{} mixes sweep kinds; expected only '{}'",
                csv.display(),
                layout.kind
            )));
        }
        let plots = render_sweep_plots(layout.kind, &rows)?;
        let mut plot_files = Vec::new();
        for (name, svg) in plots {
            let path = dir.join(&name);
            std::fs::write(&path, svg)?;
            plot_files.push(name);
            written.push(path);
        }
        md.push_str(&md_section(layout, &rows, &plot_files));
    }
    let cert_path = dir.join("certificates.csv");
    if cert_path.exists() {
        found = true;
        sources.push("certificates.csv".to_string());
        md.push_str(&certificates_section(&cert_path)?);
    }
    if !found {
        return Err(Error::Invalid(format!(
            "no result files found in {} (expected {} or certificates.csv)",
            dir.display(),
            LAYOUTS.map(|l| l.file).join(", ")
        )));
    }
    let _ = writeln!(md, "---\n\nAssembled from: {}.", sources.join(", "));
    let report_path = dir.join("report.md");
    std::fs::write(&report_path, md)?;
    written.push(report_path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::write_results_csv;

    fn fake_rows() -> Vec<ResultRow> {
        let mut rows = Vec::new();
        for (p, t, n, k) in [
            ("0.0000", 72.0, 55.0, 52.0),
            ("0.5000", 72.1, 55.2, 58.0),
            ("1.0000", 71.9, 55.1, 58.5),
        ] {
            for (metric, mean) in [
                ("teacher_acc", t),
                ("nokd_acc", n),
                ("kd_acc", k),
                ("kd_minus_nokd", k - n),
            ] {
                rows.push(ResultRow {
                    sweep_kind: "gamma".to_string(),
                    point: p.to_string(),
                    metric: metric.to_string(),
                    mean,
                    std: 1.5,
                    n_seeds: 10,
                });
            }
        }
        rows
    }

    #[test]
    fn svg_is_well_formed_and_deterministic() {
        let series = vec![
            PlotSeries { label: "kd_acc".into(), points: vec![(0.0, 52.0, 1.0), (1.0, 58.0, 2.0)] },
            PlotSeries { label: "nokd_acc".into(), points: vec![(0.0, 55.0, 1.0), (1.0, 55.0, 1.0)] },
        ];
        let a = line_plot_svg("t", "x", "y", &series).unwrap();
        let b = line_plot_svg("t", "x", "y", &series).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
        assert!(a.contains("<polyline"));
        assert!(a.contains("<polygon"), "the ±1 std band is a polygon");
        assert!(a.contains("kd_acc"));
        assert_eq!(a.matches("<circle").count(), 4);
    }

    #[test]
    fn single_point_series_still_renders() {
        let series =
            vec![PlotSeries { label: "m".into(), points: vec![(2.0, 5.0, 0.0)] }];
        let svg = line_plot_svg("t", "x", "y", &series).unwrap();
        assert!(svg.contains("<circle"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn empty_plot_is_an_error() {
        assert!(line_plot_svg("t", "x", "y", &[]).is_err());
    }

    #[test]
    fn labels_are_escaped() {
        let series =
            vec![PlotSeries { label: "a<b&c".into(), points: vec![(0.0, 1.0, 0.0)] }];
        let svg = line_plot_svg("x<y", "x", "y", &series).unwrap();
        assert!(svg.contains("a&lt;b&amp;c"));
        assert!(svg.contains("x&lt;y"));
        assert!(!svg.contains("a<b"));
    }

    #[test]
    fn report_renders_sections_plots_and_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        write_results_csv(dir.path().join("gamma.csv"), &fake_rows()).unwrap();
        let written = render_report(dir.path()).unwrap();
        let names: Vec<String> = written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().to_string())
            .collect();
        assert!(names.contains(&"report.md".to_string()));
        assert!(names.contains(&"gamma_acc.svg".to_string()));
        assert!(names.contains(&"gamma_gap.svg".to_string()));
        let md = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
        assert!(md.contains("## Overlap sweep"));
        assert!(md.contains("| 0.5000 |"));
        assert!(md.contains("72.10 ± 1.50"));
        assert!(md.contains("![gamma_acc](gamma_acc.svg)"));
        let first: Vec<(String, Vec<u8>)> = written
            .iter()
            .map(|p| (p.display().to_string(), std::fs::read(p).unwrap()))
            .collect();
        render_report(dir.path()).unwrap();
        for (path, bytes) in first {
            assert_eq!(bytes, std::fs::read(&path).unwrap(), "{path} changed between renders");
        }
    }

    #[test]
    fn report_without_inputs_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = render_report(dir.path()).unwrap_err();
        assert!(err.to_string().contains("no result files"));
    }

    #[test]
    fn certificate_section_summarizes_holds() {
        use crate::theory::{Certificate, write_certificates_csv};
        let dir = tempfile::tempdir().unwrap();
        let certs: Vec<Certificate> = (0..3)
            .map(|i| Certificate {
                seed: i,
                n: 20,
                gamma: 0.0,
                lambda: 2.0,
                epsilon: 0.5,
                epsilon_star: 1.0,
                bound: 2.4,
                risk_closed_form: 0.2,
                risk_trained: 0.19,
                matrix_lemma_lhs: 0.8,
                holds: true,
                gd_converged: true,
            })
            .collect();
        write_certificates_csv(dir.path().join("certificates.csv"), &certs).unwrap();
        render_report(dir.path()).unwrap();
        let md = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
        assert!(md.contains("certified (all inequalities hold): 3/3"));
        assert!(md.contains("instances: 3"));
    }

    #[test]
    fn canonical_names_cover_every_sweep() {
        for kind in ["gamma", "alpha", "table2", "nullify", "rank_eval", "ablate_m"] {
            assert!(canonical_results_file(kind).is_some());
        }
        assert!(canonical_results_file("bogus").is_none());
    }
}
