//! Assemble sweep outputs into a single Markdown report with charts.
//!
//! The report renderer scans a directory for the canonical result files
//! (gamma.csv, alpha.csv, table2.csv, nullify.csv, rank_eval.csv,
//! ablate_m.csv, certificates.csv), renders an SVG chart per metric
//! group, and writes a report.md that embeds the summary tables and
//! links the charts. This example produces two small result sets into a
//! scratch directory and renders the report from them.
//!
//! Takes a few seconds. Run with: `cargo run --example report`

use std::path::PathBuf;

use mfh_lab::config::Config;
use mfh_lab::experiments::{run_gamma_sweep, run_theorem_mc, write_results_csv};
use mfh_lab::report::render_report;
use mfh_lab::theory::write_certificates_csv;

fn out_dir() -> PathBuf {
    let dir = std::env::temp_dir().join("mfh-lab-examples").join("report");
    std::fs::create_dir_all(&dir).expect("create output directory");
    dir
}

fn main() -> mfh_lab::Result<()> {
    let dir = out_dir();

    // A reduced overlap sweep and a reduced certificate run: enough for
    // the renderer to have two different sections to typeset.
    let cfg = Config {
        n_seeds: 4,
        gamma_overlaps: vec![0, 4, 10],
        theorem_instances: 10,
        ..Config::default()
    };
    println!("running a reduced overlap sweep and certificate run ...");
    write_results_csv(dir.join("gamma.csv"), &run_gamma_sweep(&cfg)?)?;
    write_certificates_csv(dir.join("certificates.csv"), &run_theorem_mc(&cfg)?)?;

    let written = render_report(&dir)?;
    println!("report rendered:");
    for p in &written {
        println!("  {}", p.display());
    }

    let md = std::fs::read_to_string(dir.join("report.md")).map_err(mfh_lab::Error::from)?;
    let preview: Vec<&str> = md.lines().take(12).collect();
    println!("\nfirst lines of report.md:\n---\n{}\n---", preview.join("\n"));
    Ok(())
}
