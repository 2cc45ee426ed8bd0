//! Seeded experiment runners: each sweep maps a grid of geometry points
//! to per-seed replicates, trains the relevant models, and aggregates
//! mean and sample standard deviation per metric into result rows.
//!
//! Determinism contract: every random draw comes from a named substream
//! of the master seed, seeds are processed independently and collected
//! in seed order, and result CSVs are byte-identical across reruns of
//! the same configuration. Data substreams are keyed by `(DATA, seed)`
//! alone — *not* by the sweep point — so every point of a sweep sees the
//! same underlying draws and differs only through geometry (common
//! random numbers; columns move together, never from resampling noise).
//!
//! Accuracy-style metrics are reported in percent; the ranking
//! feature-selection score and the salience rerun variance are plain
//! fractions.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::kd::{distill, teacher_soft_targets};
use crate::linalg::Mat;
use crate::model::{evaluate, train_ce, GdOptions, Model, ModelKind};
use crate::mvd::{
    build_alpha_point, build_gamma_point, build_nullify_point, build_ranking_point,
    build_table2_point, draw_delta, gamma_of, sample, DeltaLaw, MultimodalDataset, MvdSpec,
};
use crate::ranking::{
    apply_nullify, fs_accuracy, ground_truth_plan, joint_train, make_nullify_plan,
    rank_features, NullifyMode,
};
use crate::rng::{stage, substream};
use crate::theory::{verify_bound, Certificate};

/// One aggregated line of a sweep: a metric at a grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub sweep_kind: String,
    pub point: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub n_seeds: usize,
}

/// Column order of every results CSV.
pub const RESULTS_HEADER: [&str; 6] = ["sweep_kind", "point", "metric", "mean", "std", "n_seeds"];

/// Mean and *sample* standard deviation (n − 1 denominator; zero when
/// fewer than two values).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Write result rows in the pinned column order.
pub fn write_results_csv<P: AsRef<Path>>(path: P, rows: &[ResultRow]) -> Result<()> {
    use crate::csvio::fmt_f64;
    let out = rows.iter().map(|r| {
        vec![
            r.sweep_kind.clone(),
            r.point.clone(),
            r.metric.clone(),
            fmt_f64(r.mean),
            fmt_f64(r.std),
            r.n_seeds.to_string(),
        ]
    });
    crate::csvio::write_csv(path, &RESULTS_HEADER, out)
}

/// Read result rows back (used by the report stage).
pub fn read_results_csv<P: AsRef<Path>>(path: P) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let (header, rows) = crate::csvio::read_csv(path)?;
    if header != RESULTS_HEADER.map(String::from).to_vec() {
        return Err(Error::Invalid(format!(
            "{} is not a results file: unexpected header {:?}",
            path.display(),
            header
        )));
    }
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let ctx = format!("{}:{}", path.display(), i + 2);
            Ok(ResultRow {
                sweep_kind: r[0].clone(),
                point: r[1].clone(),
                metric: r[2].clone(),
                mean: crate::csvio::parse_f64(&r[3], &ctx)?,
                std: crate::csvio::parse_f64(&r[4], &ctx)?,
                n_seeds: crate::csvio::parse_usize(&r[5], &ctx)?,
            })
        })
        .collect()
}

/// Run-metadata sidecar written next to every output file.
#[derive(Serialize)]
pub struct RunMeta<'a> {
    pub command: &'a str,
    pub master_seed: u64,
    pub version: &'a str,
    /// `null` while the run is in flight; filled in on completion.
    pub wall_time_seconds: Option<f64>,
    pub config: &'a Config,
}

/// Sidecar path for an output file: the extension becomes `meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

/// Write (or rewrite) the sidecar. Call once before computing with
/// `wall_time_seconds = None`, and again after with the measured time;
/// the sidecar is deliberately excluded from byte-identity guarantees.
pub fn write_sidecar(out: &Path, command: &str, cfg: &Config, wall: Option<f64>) -> Result<()> {
    let meta = RunMeta {
        command,
        master_seed: cfg.master_seed,
        version: crate::VERSION,
        wall_time_seconds: wall,
        config: cfg,
    };
    let text = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::Invalid(format!("cannot serialize run metadata: {e}")))?;
    std::fs::write(sidecar_path(out), text + "\n")?;
    Ok(())
}

/// Thread pool honoring the `jobs` setting (zero means one per core).
fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Invalid(format!("cannot build thread pool: {e}")))
}

/// Train/test splits for one seed, drawn from the `(DATA, seed)`
/// substream: the induced distribution at a seed is shared by every
/// sweep point with the same dimensions and draw counts.
struct Splits {
    train: MultimodalDataset,
    test: MultimodalDataset,
}

fn draw_splits(
    spec: &MvdSpec,
    law: DeltaLaw,
    master: u64,
    seed: u64,
    n_train: usize,
    n_test: usize,
) -> Result<Splits> {
    let mut rng = substream(master, &[stage::DATA, seed]);
    let delta = draw_delta(law, spec.d, &mut rng);
    let train = sample(spec, &delta, n_train, &mut rng)?;
    let test = sample(spec, &delta, n_test, &mut rng)?;
    Ok(Splits { train, test })
}

fn percent(acc: f64) -> f64 {
    100.0 * acc
}

/// Teacher on modality a, independent student, and distilled student on
/// modality b; test accuracies in percent.
struct KdTrio {
    teacher: f64,
    nokd: f64,
    kd: f64,
}

fn kd_trio(splits: &Splits, rho: f64, opts: &GdOptions) -> Result<KdTrio> {
    let tr = &splits.train;
    let te = &splits.test;
    let (teacher, _) = train_ce(
        &Model::new(ModelKind::Logistic, tr.xa.cols(), true),
        &tr.xa,
        &tr.y,
        opts,
    );
    let soft = teacher_soft_targets(&teacher, &tr.xa);
    let (nokd, _) = train_ce(
        &Model::new(ModelKind::Logistic, tr.xb.cols(), true),
        &tr.xb,
        &tr.y,
        opts,
    );
    let (kd, _) = distill(
        &Model::new(ModelKind::Logistic, tr.xb.cols(), true),
        &tr.xb,
        &tr.y,
        &soft,
        rho,
        opts,
    )?;
    Ok(KdTrio {
        teacher: percent(evaluate(&teacher, &te.xa, &te.y)),
        nokd: percent(evaluate(&nokd, &te.xb, &te.y)),
        kd: percent(evaluate(&kd, &te.xb, &te.y)),
    })
}

fn push_stats(
    rows: &mut Vec<ResultRow>,
    sweep_kind: &str,
    point: &str,
    metric: &str,
    values: &[f64],
) {
    let (mean, std) = mean_std(values);
    rows.push(ResultRow {
        sweep_kind: sweep_kind.to_string(),
        point: point.to_string(),
        metric: metric.to_string(),
        mean,
        std,
        n_seeds: values.len(),
    });
}

/// Shared body of the two Gaussian sweeps: run the teacher/student trio
/// over every `(spec, point_label)` pair.
fn kd_sweep(
    cfg: &Config,
    sweep_kind: &str,
    points: &[(MvdSpec, String)],
) -> Result<Vec<ResultRow>> {
    let opts = cfg.gd_options();
    let pool = pool(cfg.jobs)?;
    let mut rows = Vec::new();
    for (spec, label) in points {
        let trios: Vec<KdTrio> = pool.install(|| {
            (0..cfg.n_seeds as u64)
                .into_par_iter()
                .map(|seed| {
                    let splits = draw_splits(
                        spec,
                        DeltaLaw::StandardNormal,
                        cfg.master_seed,
                        seed,
                        cfg.n_train,
                        cfg.n_test,
                    )?;
                    kd_trio(&splits, cfg.rho, &opts)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let teacher: Vec<f64> = trios.iter().map(|t| t.teacher).collect();
        let nokd: Vec<f64> = trios.iter().map(|t| t.nokd).collect();
        let kd: Vec<f64> = trios.iter().map(|t| t.kd).collect();
        let gap: Vec<f64> = trios.iter().map(|t| t.kd - t.nokd).collect();
        push_stats(&mut rows, sweep_kind, label, "teacher_acc", &teacher);
        push_stats(&mut rows, sweep_kind, label, "nokd_acc", &nokd);
        push_stats(&mut rows, sweep_kind, label, "kd_acc", &kd);
        push_stats(&mut rows, sweep_kind, label, "kd_minus_nokd", &gap);
    }
    Ok(rows)
}

/// Overlap sweep: fixed decisive mass, shared share moving from zero to
/// one. Metrics: `teacher_acc`, `nokd_acc`, `kd_acc`, `kd_minus_nokd`.
pub fn run_gamma_sweep(cfg: &Config) -> Result<Vec<ResultRow>> {
    let points = cfg
        .gamma_overlaps
        .iter()
        .map(|&ov| {
            let spec = build_gamma_point(ov)?;
            let label = format!("{:.4}", gamma_of(&spec)?);
            Ok((spec, label))
        })
        .collect::<Result<Vec<_>>>()?;
    kd_sweep(cfg, "gamma", &points)
}

/// Teacher-exclusive sweep: the student's channels stay fixed while the
/// teacher gains channels the student never sees.
pub fn run_alpha_sweep(cfg: &Config) -> Result<Vec<ResultRow>> {
    let points = cfg
        .alpha_totals
        .iter()
        .map(|&d_total| {
            let spec = build_alpha_point(d_total)?;
            let label = format!("{:.4}", crate::mvd::alpha_of(&spec)?);
            Ok((spec, label))
        })
        .collect::<Result<Vec<_>>>()?;
    kd_sweep(cfg, "alpha", &points)
}

/// Headline comparison: plain teacher, role-informed teacher retrained
/// on the nullified view, independent student, and both distilled
/// students, at three overlap levels.
pub fn run_table2(cfg: &Config) -> Result<Vec<ResultRow>> {
    let opts = cfg.gd_options();
    let pool = pool(cfg.jobs)?;
    let mut rows = Vec::new();
    for &shared in &cfg.table2_shared {
        let spec = build_table2_point(shared)?;
        let label = format!("{:.4}", gamma_of(&spec)?);
        let outcomes: Vec<[f64; 5]> = pool.install(|| {
            (0..cfg.n_seeds as u64)
                .into_par_iter()
                .map(|seed| {
                    let splits = draw_splits(
                        &spec,
                        DeltaLaw::StandardNormal,
                        cfg.master_seed,
                        seed,
                        cfg.n_train,
                        cfg.n_test,
                    )?;
                    let tr = &splits.train;
                    let te = &splits.test;
                    let (teacher, _) = train_ce(
                        &Model::new(ModelKind::Logistic, tr.xa.cols(), true),
                        &tr.xa,
                        &tr.y,
                        &opts,
                    );
                    // Role-informed teacher: keep only the channels both
                    // modalities share, retrain from scratch on that view.
                    let plan = ground_truth_plan(&tr.roles_a, &tr.xa);
                    let xa_mg_tr = apply_nullify(&tr.xa, &plan);
                    let xa_mg_te = apply_nullify(&te.xa, &plan);
                    let (mg_teacher, _) = train_ce(
                        &Model::new(ModelKind::Logistic, xa_mg_tr.cols(), true),
                        &xa_mg_tr,
                        &tr.y,
                        &opts,
                    );
                    let (nokd, _) = train_ce(
                        &Model::new(ModelKind::Logistic, tr.xb.cols(), true),
                        &tr.xb,
                        &tr.y,
                        &opts,
                    );
                    let soft = teacher_soft_targets(&teacher, &tr.xa);
                    let (kd, _) = distill(
                        &Model::new(ModelKind::Logistic, tr.xb.cols(), true),
                        &tr.xb,
                        &tr.y,
                        &soft,
                        cfg.rho,
                        &opts,
                    )?;
                    let soft_mg = teacher_soft_targets(&mg_teacher, &xa_mg_tr);
                    let (mg_kd, _) = distill(
                        &Model::new(ModelKind::Logistic, tr.xb.cols(), true),
                        &tr.xb,
                        &tr.y,
                        &soft_mg,
                        cfg.rho,
                        &opts,
                    )?;
                    Ok([
                        percent(evaluate(&teacher, &te.xa, &te.y)),
                        percent(evaluate(&mg_teacher, &xa_mg_te, &te.y)),
                        percent(evaluate(&nokd, &te.xb, &te.y)),
                        percent(evaluate(&kd, &te.xb, &te.y)),
                        percent(evaluate(&mg_kd, &te.xb, &te.y)),
                    ])
                })
                .collect::<Result<Vec<_>>>()
        })?;
        for (i, metric) in
            ["teacher_acc", "mg_teacher_acc", "nokd_acc", "kd_acc", "mg_kd_acc"]
                .iter()
                .enumerate()
        {
            let vals: Vec<f64> = outcomes.iter().map(|o| o[i]).collect();
            push_stats(&mut rows, "table2", &label, metric, &vals);
        }
    }
    Ok(rows)
}

/// Nullification sweep: rank the teacher's channels once per seed, then
/// distill (soft labels only by default) from the teacher masked by
/// general / random / specific plans over the ratio grid.
pub fn run_nullify_sweep(cfg: &Config) -> Result<Vec<ResultRow>> {
    let opts = cfg.gd_options();
    let spec = build_nullify_point();
    let pool = pool(cfg.jobs)?;
    // Per seed: accuracy per (mode, ratio).
    let per_seed: Vec<Vec<[f64; 3]>> = pool.install(|| {
        (0..cfg.n_seeds as u64)
            .into_par_iter()
            .map(|seed| {
                let splits = draw_splits(
                    &spec,
                    DeltaLaw::BoundedSym,
                    cfg.master_seed,
                    seed,
                    cfg.n_train,
                    cfg.n_test,
                )?;
                let tr = &splits.train;
                let te = &splits.test;
                let (teacher, _) = train_ce(
                    &Model::new(ModelKind::Logistic, tr.xa.cols(), true),
                    &tr.xa,
                    &tr.y,
                    &opts,
                );
                let (joint, _) = joint_train(&tr.xa, &tr.xb, &tr.y, &opts)?;
                let sal = rank_features(
                    &joint,
                    &tr.xa,
                    &tr.xb,
                    cfg.perm_repeats,
                    cfg.master_seed,
                    0,
                )?;
                let mut accs = Vec::with_capacity(cfg.nullify_ratios.len());
                for (ri, &ratio) in cfg.nullify_ratios.iter().enumerate() {
                    let general =
                        make_nullify_plan(NullifyMode::General, Some(&sal), ratio, &tr.xa, None)?;
                    let mut plan_rng =
                        substream(cfg.master_seed, &[stage::PLAN, seed, ri as u64]);
                    let random = make_nullify_plan(
                        NullifyMode::Random,
                        None,
                        ratio,
                        &tr.xa,
                        Some(&mut plan_rng),
                    )?;
                    let specific =
                        make_nullify_plan(NullifyMode::Specific, Some(&sal), ratio, &tr.xa, None)?;
                    let mut lane = [0.0; 3];
                    for (li, plan) in [&general, &random, &specific].into_iter().enumerate() {
                        let soft = teacher.predict_proba(&apply_nullify(&tr.xa, plan));
                        let (student, _) = distill(
                            &Model::new(ModelKind::Logistic, tr.xb.cols(), true),
                            &tr.xb,
                            &tr.y,
                            &soft,
                            cfg.nullify_rho,
                            &opts,
                        )?;
                        lane[li] = percent(evaluate(&student, &te.xb, &te.y));
                    }
                    accs.push(lane);
                }
                Ok(accs)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut rows = Vec::new();
    for (ri, &ratio) in cfg.nullify_ratios.iter().enumerate() {
        let label = format!("{ratio:.2}");
        for (li, metric) in ["acc_general", "acc_random", "acc_specific"].iter().enumerate() {
            let vals: Vec<f64> = per_seed.iter().map(|s| s[ri][li]).collect();
            push_stats(&mut rows, "nullify", &label, metric, &vals);
        }
    }
    Ok(rows)
}

/// Ranking evaluation: how well permutation salience recovers the
/// ground-truth shared channels, as a feature-selection accuracy
/// (fraction in `[0, 1]`) per overlap geometry.
pub fn run_ranking_eval(cfg: &Config) -> Result<Vec<ResultRow>> {
    let opts = cfg.gd_options();
    let pool = pool(cfg.jobs)?;
    let mut rows = Vec::new();
    for &(k, c) in &cfg.ranking_specs {
        let spec = build_ranking_point(k, c)?;
        let label = format!("{:.4}", gamma_of(&spec)?);
        let scores: Vec<f64> = pool.install(|| {
            (0..cfg.n_seeds as u64)
                .into_par_iter()
                .map(|seed| {
                    let mut rng = substream(cfg.master_seed, &[stage::DATA, seed]);
                    let delta = draw_delta(DeltaLaw::BoundedSym, spec.d, &mut rng);
                    let train = sample(&spec, &delta, cfg.ranking_n_train, &mut rng)?;
                    let (joint, _) = joint_train(&train.xa, &train.xb, &train.y, &opts)?;
                    let sal = rank_features(
                        &joint,
                        &train.xa,
                        &train.xb,
                        cfg.perm_repeats,
                        cfg.master_seed,
                        0,
                    )?;
                    Ok(fs_accuracy(&sal, &train.roles_a))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        push_stats(&mut rows, "rank_eval", &label, "fs_accuracy", &scores);
    }
    Ok(rows)
}

/// Permutation-repeat ablation at the nullification geometry: distilled
/// accuracy through the general-keeping mask at ratio one half, plus the
/// channel-salience variance across three fresh rankings, per repeat
/// count `M`.
pub fn run_permutation_ablation(cfg: &Config) -> Result<Vec<ResultRow>> {
    let opts = cfg.gd_options();
    let spec = build_nullify_point();
    let ratio = 0.5;
    let salts: [u64; 3] = [1, 2, 3];
    let pool = pool(cfg.jobs)?;
    // Per seed, per M: (masked-distillation accuracy, rerun variance).
    let per_seed: Vec<Vec<(f64, f64)>> = pool.install(|| {
        (0..cfg.n_seeds as u64)
            .into_par_iter()
            .map(|seed| {
                let splits = draw_splits(
                    &spec,
                    DeltaLaw::BoundedSym,
                    cfg.master_seed,
                    seed,
                    cfg.n_train,
                    cfg.n_test,
                )?;
                let tr = &splits.train;
                let te = &splits.test;
                let (teacher, _) = train_ce(
                    &Model::new(ModelKind::Logistic, tr.xa.cols(), true),
                    &tr.xa,
                    &tr.y,
                    &opts,
                );
                let (joint, _) = joint_train(&tr.xa, &tr.xb, &tr.y, &opts)?;
                let mut lane = Vec::with_capacity(cfg.ablate_m_grid.len());
                for &m in &cfg.ablate_m_grid {
                    let sal =
                        rank_features(&joint, &tr.xa, &tr.xb, m, cfg.master_seed, 0)?;
                    let plan = make_nullify_plan(
                        NullifyMode::General,
                        Some(&sal),
                        ratio,
                        &tr.xa,
                        None,
                    )?;
                    let soft = teacher.predict_proba(&apply_nullify(&tr.xa, &plan));
                    let (student, _) = distill(
                        &Model::new(ModelKind::Logistic, tr.xb.cols(), true),
                        &tr.xb,
                        &tr.y,
                        &soft,
                        cfg.nullify_rho,
                        &opts,
                    )?;
                    let acc = percent(evaluate(&student, &te.xb, &te.y));
                    // Rerun variance: re-rank with fresh permutation salts
                    // and average the per-channel sample variance.
                    let reruns: Vec<crate::ranking::SaliencyVector> = salts
                        .iter()
                        .map(|&salt| {
                            rank_features(&joint, &tr.xa, &tr.xb, m, cfg.master_seed, salt)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let d = tr.xa.cols();
                    let mut var_sum = 0.0;
                    for j in 0..d {
                        let vals: Vec<f64> = reruns.iter().map(|s| s.values[j]).collect();
                        let (_, sd) = mean_std(&vals);
                        var_sum += sd * sd;
                    }
                    lane.push((acc, var_sum / d as f64));
                }
                Ok(lane)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut rows = Vec::new();
    for (mi, &m) in cfg.ablate_m_grid.iter().enumerate() {
        let label = m.to_string();
        let accs: Vec<f64> = per_seed.iter().map(|s| s[mi].0).collect();
        let vars: Vec<f64> = per_seed.iter().map(|s| s[mi].1).collect();
        push_stats(&mut rows, "ablate_m", &label, "mg_kd_acc", &accs);
        push_stats(&mut rows, "ablate_m", &label, "salience_rerun_var", &vars);
    }
    Ok(rows)
}

/// Monte-Carlo bound verification: random well-conditioned instances
/// with no shared channels, one certificate each.
pub fn run_theorem_mc(cfg: &Config) -> Result<Vec<Certificate>> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let pool = pool(cfg.jobs)?;
    pool.install(|| {
        (0..cfg.theorem_instances as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(cfg.master_seed, &[stage::THEOREM, i]);
                let d1 = rng.gen_range(4..=10usize);
                let d2 = rng.gen_range(4..=10usize);
                let n = 2 * d1.max(d2) + rng.gen_range(0..8usize);
                let xa = Mat::from_fn(n, d1, |_, _| rng.sample(StandardNormal));
                let xb = Mat::from_fn(n, d2, |_, _| rng.sample(StandardNormal));
                let theta_t: Vec<f64> =
                    (0..d1).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                verify_bound(i, &xa, &xb, &theta_t, 0.0)
            })
            .collect::<Result<Vec<_>>>()
    })
}

/// Generate one dataset for the `gen` front end: builder by name, plus
/// the point parameters each builder needs.
pub fn build_named_point(builder: &str, point: &[usize]) -> Result<(MvdSpec, DeltaLaw)> {
    match (builder, point) {
        ("gamma", [ov]) => Ok((build_gamma_point(*ov)?, DeltaLaw::StandardNormal)),
        ("alpha", [d_total]) => Ok((build_alpha_point(*d_total)?, DeltaLaw::StandardNormal)),
        ("table2", [shared]) => Ok((build_table2_point(*shared)?, DeltaLaw::StandardNormal)),
        ("ranking", [k, c]) => Ok((build_ranking_point(*k, *c)?, DeltaLaw::BoundedSym)),
        ("nullify", []) => Ok((build_nullify_point(), DeltaLaw::BoundedSym)),
        ("gamma" | "alpha" | "table2", _) => Err(Error::Config(format!(
            "builder '{builder}' takes exactly one point parameter"
        ))),
        ("ranking", _) => {
            Err(Error::Config("builder 'ranking' takes two point parameters: k c".to_string()))
        }
        ("nullify", _) => {
            Err(Error::Config("builder 'nullify' takes no point parameters".to_string()))
        }
        _ => Err(Error::Config(format!(
            "unknown builder '{builder}' (expected gamma, alpha, table2, ranking, or nullify)"
        ))),
    }
}

/// Draw one dataset from a named builder with the `(DATA, seed)`
/// substream; returns the dataset alongside its geometry.
pub fn generate_dataset(
    builder: &str,
    point: &[usize],
    n: usize,
    master: u64,
    seed: u64,
) -> Result<(MvdSpec, MultimodalDataset)> {
    let (spec, law) = build_named_point(builder, point)?;
    let mut rng = substream(master, &[stage::DATA, seed]);
    let delta = draw_delta(law, spec.d, &mut rng);
    let ds = sample(&spec, &delta, n, &mut rng)?;
    Ok((spec, ds))
}
