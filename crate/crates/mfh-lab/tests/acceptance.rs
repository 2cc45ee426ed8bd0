//! Acceptance suite: every headline guarantee of the laboratory, checked
//! end to end at its documented tolerance.
//!
//! Each test runs one experiment with the default configuration, evaluates
//! its stated bands, prints exactly one `[PASS]`/`[FAIL]` line (visible
//! with `--nocapture`), and enforces the wall-clock budget where one is
//! stated. Run with `cargo test --test acceptance`.

use std::time::Instant;

use mfh_lab::config::Config;
use mfh_lab::experiments::{
    generate_dataset, run_alpha_sweep, run_gamma_sweep, run_nullify_sweep, run_ranking_eval,
    run_table2, run_theorem_mc, ResultRow,
};
use mfh_lab::linalg::Mat;
use mfh_lab::losses::{kd_loss, softmax_rows};
use mfh_lab::model::{blended_dlogits, Model, ModelKind};
use mfh_lab::mvd::write_dataset_csv;
use mfh_lab::ranking::{apply_nullify, NullifyPlan};
use mfh_lab::theory::{epsilon_star, lemma_l, lemma_l_max, CERT_SLACK};

/// Look up the mean of one `(point, metric)` cell.
fn mean_of(rows: &[ResultRow], point: &str, metric: &str) -> f64 {
    rows.iter()
        .find(|r| r.point == point && r.metric == metric)
        .unwrap_or_else(|| panic!("missing row {point}/{metric}"))
        .mean
}

/// Look up the std of one `(point, metric)` cell.
fn std_of(rows: &[ResultRow], point: &str, metric: &str) -> f64 {
    rows.iter()
        .find(|r| r.point == point && r.metric == metric)
        .unwrap_or_else(|| panic!("missing row {point}/{metric}"))
        .std
}

/// Print the single verdict line and panic on any failed check or a blown
/// budget. `budget` is in seconds; `None` means no stated budget.
fn conclude(label: &str, started: Instant, budget: Option<f64>, mut fails: Vec<String>) {
    let elapsed = started.elapsed().as_secs_f64();
    if let Some(b) = budget {
        if elapsed >= b {
            fails.push(format!("runtime {elapsed:.1} s exceeds the {b:.0} s budget"));
        }
    }
    if fails.is_empty() {
        println!("[PASS] {label} ({elapsed:.1} s)");
    } else {
        println!("[FAIL] {label} ({elapsed:.1} s): {}", fails.join("; "));
        panic!("{label}: {}", fails.join("; "));
    }
}

#[test]
fn a1_table2_reproduction_and_ordering() {
    let started = Instant::now();
    let cfg = Config::default();
    let rows = run_table2(&cfg).expect("table2 sweep");
    let mut fails = Vec::new();

    // Mid-overlap row: five means, each within +/- 2.0 accuracy points of
    // its reference value.
    let targets =
        [("teacher_acc", 89.62), ("mg_teacher_acc", 73.41), ("nokd_acc", 67.64), ("kd_acc", 67.86), ("mg_kd_acc", 70.25)];
    for (metric, want) in targets {
        let got = mean_of(&rows, "0.5000", metric);
        if (got - want).abs() > 2.0 {
            fails.push(format!("{metric} = {got:.2}, outside {want} +/- 2.0"));
        }
    }

    // Ordering in every row: masked-teacher distillation beats plain
    // distillation, which at least matches no distillation.
    for point in ["0.2500", "0.5000", "0.7500"] {
        let nokd = mean_of(&rows, point, "nokd_acc");
        let kd = mean_of(&rows, point, "kd_acc");
        let mg_kd = mean_of(&rows, point, "mg_kd_acc");
        if !(mg_kd > kd && kd >= nokd) {
            fails.push(format!(
                "ordering broken at {point}: mg_kd {mg_kd:.2}, kd {kd:.2}, nokd {nokd:.2}"
            ));
        }
    }

    conclude("a1 shared-channel table reproduction", started, Some(60.0), fails);
}

#[test]
fn a2_overlap_sweep_monotonicity_and_endpoint_gap() {
    let started = Instant::now();
    let cfg = Config::default();
    let rows = run_gamma_sweep(&cfg).expect("overlap sweep");
    let mut fails = Vec::new();
    let grid = ["0.0000", "0.1111", "0.2500", "0.4286", "0.6667", "1.0000"];

    // Student accuracy rises with overlap: monotone nondecreasing up to at
    // most one inversion smaller than one pooled std.
    let kd: Vec<f64> = grid.iter().map(|p| mean_of(&rows, p, "kd_acc")).collect();
    let pooled = (grid.iter().map(|p| std_of(&rows, p, "kd_acc").powi(2)).sum::<f64>()
        / grid.len() as f64)
        .sqrt();
    let inversions: Vec<f64> =
        kd.windows(2).filter(|w| w[1] < w[0]).map(|w| w[0] - w[1]).collect();
    if inversions.len() > 1 {
        fails.push(format!("{} inversions in the student curve {kd:?}", inversions.len()));
    } else if inversions.iter().any(|&v| v >= pooled) {
        fails.push(format!(
            "inversion {:.2} is not smaller than one pooled std {pooled:.2}",
            inversions[0]
        ));
    }

    // Full-overlap endpoint: distillation gain within 2.1 +/- 1.5 points.
    let gap = mean_of(&rows, "1.0000", "kd_minus_nokd");
    if (gap - 2.1).abs() > 1.5 {
        fails.push(format!("full-overlap gain {gap:.2} outside 2.1 +/- 1.5"));
    }

    // The teacher never sees the varying modality, so its accuracy must be
    // flat across the grid (spread of means at most 2 points).
    let teacher: Vec<f64> = grid.iter().map(|p| mean_of(&rows, p, "teacher_acc")).collect();
    let spread = teacher.iter().cloned().fold(f64::MIN, f64::max)
        - teacher.iter().cloned().fold(f64::MAX, f64::min);
    if spread > 2.0 {
        fails.push(format!("teacher spread {spread:.2} exceeds 2 points"));
    }

    conclude("a2 overlap sweep trend", started, Some(60.0), fails);
}

#[test]
fn a3_decisive_share_sweep_teacher_rises_student_flat() {
    let started = Instant::now();
    let cfg = Config::default();
    let rows = run_alpha_sweep(&cfg).expect("decisive-share sweep");
    let mut fails = Vec::new();
    let grid = ["0.0000", "0.2308", "0.4118", "0.6000", "0.8000"];

    // Teacher accuracy strictly increases across the five points.
    let teacher: Vec<f64> = grid.iter().map(|p| mean_of(&rows, p, "teacher_acc")).collect();
    if !teacher.windows(2).all(|w| w[1] > w[0]) {
        fails.push(format!("teacher curve not strictly increasing: {teacher:?}"));
    }

    // The student gains nothing from a stronger teacher once the shared
    // channels are fixed: right endpoint at most 0.5 points above the left.
    let kd_lo = mean_of(&rows, "0.0000", "kd_acc");
    let kd_hi = mean_of(&rows, "0.8000", "kd_acc");
    if kd_hi > kd_lo + 0.5 {
        fails.push(format!("student {kd_hi:.2} at the right endpoint exceeds {kd_lo:.2} + 0.5"));
    }

    conclude("a3 decisive-share sweep trend", started, Some(60.0), fails);
}

#[test]
fn a4_feature_ranking_accuracy() {
    let started = Instant::now();
    let cfg = Config::default();
    let rows = run_ranking_eval(&cfg).expect("ranking eval");
    let mut fails = Vec::new();

    for row in rows.iter().filter(|r| r.metric == "fs_accuracy") {
        if row.mean < 0.95 {
            fails.push(format!("fs_accuracy {:.3} at point {} below 0.95", row.mean, row.point));
        }
    }

    conclude("a4 feature-ranking accuracy", started, Some(120.0), fails);
}

#[test]
fn a5_nullify_ordering_and_sweet_spot() {
    let started = Instant::now();
    let cfg = Config::default();
    let rows = run_nullify_sweep(&cfg).expect("nullify sweep");
    let mut fails = Vec::new();

    // At half removal the three strategies separate cleanly, each gap at
    // least 2 accuracy points.
    let spec = mean_of(&rows, "0.50", "acc_specific");
    let rand = mean_of(&rows, "0.50", "acc_random");
    let gen = mean_of(&rows, "0.50", "acc_general");
    if rand - spec < 2.0 {
        fails.push(format!("random {rand:.2} does not beat specific {spec:.2} by 2 points"));
    }
    if gen - rand < 2.0 {
        fails.push(format!("general {gen:.2} does not beat random {rand:.2} by 2 points"));
    }

    // Removing general channels has an interior sweet spot: some interior
    // ratio does at least as well as both endpoints.
    let end_lo = mean_of(&rows, "0.00", "acc_general");
    let end_hi = mean_of(&rows, "0.90", "acc_general");
    let interior = ["0.25", "0.50", "0.75"]
        .iter()
        .map(|p| mean_of(&rows, p, "acc_general"))
        .fold(f64::MIN, f64::max);
    if !(interior >= end_lo && interior >= end_hi) {
        fails.push(format!(
            "no interior sweet spot: best interior {interior:.2} vs endpoints {end_lo:.2}/{end_hi:.2}"
        ));
    }

    conclude("a5 nullification ordering and sweet spot", started, Some(120.0), fails);
}

#[test]
fn a6_risk_bound_certificates() {
    let started = Instant::now();
    let cfg = Config::default();
    let certs = run_theorem_mc(&cfg).expect("certificate run");
    let mut fails = Vec::new();

    if certs.len() != 100 {
        fails.push(format!("expected 100 instances, got {}", certs.len()));
    }
    for c in &certs {
        let slack = CERT_SLACK * (1.0 + c.bound.abs());
        let eps_slack = CERT_SLACK * (1.0 + c.epsilon_star.abs());
        if !c.holds
            || c.risk_trained > c.bound + slack
            || c.risk_closed_form > c.bound + slack
            || c.matrix_lemma_lhs > c.epsilon_star + eps_slack
        {
            fails.push(format!(
                "instance {} not certified: trained {:.3e} / closed {:.3e} vs bound {:.3e}, \
                 lhs {:.3e} vs eps* {:.3e}",
                c.seed, c.risk_trained, c.risk_closed_form, c.bound, c.matrix_lemma_lhs,
                c.epsilon_star
            ));
            break;
        }
    }

    conclude("a6 risk-bound certificates", started, Some(120.0), fails);
}

/// Independent maximizer for the link-divergence envelope: dense scan over
/// the band followed by golden-section refinement.
fn brute_force_envelope(eps: f64) -> f64 {
    let g = |a: f64| lemma_l(a + eps, a);
    let mut best_a = 0.0f64;
    let mut best = g(0.0);
    let mut a = -30.0f64;
    while a <= 30.0 {
        let v = g(a);
        if v > best {
            best = v;
            best_a = a;
        }
        a += 1e-3;
    }
    let (mut lo, mut hi) = (best_a - 2e-3, best_a + 2e-3);
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - gr * (hi - lo);
    let mut d = lo + gr * (hi - lo);
    for _ in 0..200 {
        if g(c) > g(d) {
            hi = d;
            d = c;
            c = hi - gr * (hi - lo);
        } else {
            lo = c;
            c = d;
            d = lo + gr * (hi - lo);
        }
    }
    g(0.5 * (lo + hi))
}

#[test]
fn a7_envelope_matches_brute_force() {
    let started = Instant::now();
    let mut fails = Vec::new();

    for eps in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let closed = lemma_l_max(eps).expect("envelope value");
        let brute = brute_force_envelope(eps);
        if (closed - brute).abs() > 1e-9 {
            fails.push(format!(
                "envelope({eps}) = {closed:.15} disagrees with brute force {brute:.15}"
            ));
        }
    }
    if lemma_l_max(0.0).expect("envelope at zero") != 0.0 {
        fails.push("envelope(0) is not exactly zero".to_string());
    }

    conclude("a7 divergence-envelope oracle", started, None, fails);
}

// ---------------------------------------------------------------------------
// a8: module invariants under a property-based harness, 100 cases each.
// ---------------------------------------------------------------------------

use proptest::prelude::*;
use proptest::test_runner::{
    Config as PropConfig, RngAlgorithm, TestCaseError, TestRng, TestRunner,
};

/// Run one invariant for 100 seeded cases; push a message on failure.
fn run_invariant<S: Strategy>(
    label: &str,
    strategy: S,
    body: impl Fn(S::Value) -> Result<(), TestCaseError>,
    fails: &mut Vec<String>,
) {
    let mut runner = TestRunner::new_with_rng(
        PropConfig { cases: 100, failure_persistence: None, ..PropConfig::default() },
        TestRng::from_seed(RngAlgorithm::ChaCha, &[59u8; 32]),
    );
    if let Err(e) = runner.run(&strategy, body) {
        fails.push(format!("{label}: {e}"));
    }
}

/// Normalize a flat positive vector into an `n x k` row-stochastic matrix.
fn rows_to_probs(n: usize, k: usize, raw: &[f64]) -> Mat {
    Mat::from_fn(n, k, |r, c| {
        let row = &raw[r * k..(r + 1) * k];
        row[c] / row.iter().sum::<f64>()
    })
}

type GradCase = (usize, usize, usize, Vec<f64>, Vec<f64>, Vec<usize>, Vec<f64>, f64);

fn grad_case() -> impl Strategy<Value = GradCase> {
    (2usize..=5, 3usize..=8, 0usize..=2).prop_flat_map(|(d, n, kind_sel)| {
        let classes = if kind_sel == 2 { 3 } else { 2 };
        let n_params = if kind_sel == 0 { d + 1 } else { (d + 1) * classes };
        (
            Just(d),
            Just(n),
            Just(kind_sel),
            prop::collection::vec(-1.0..1.0f64, n_params),
            prop::collection::vec(-1.5..1.5f64, n * d),
            prop::collection::vec(0..classes, n),
            prop::collection::vec(0.05..1.0f64, n * classes),
            0.0..=1.0f64,
        )
    })
}

fn check_gradient((d, n, kind_sel, params, xdata, y, praw, rho): GradCase) -> Result<(), TestCaseError> {
    let classes = if kind_sel == 2 { 3 } else { 2 };
    let kind =
        if kind_sel == 0 { ModelKind::Logistic } else { ModelKind::Softmax { classes } };
    let x = Mat::from_vec(n, d, xdata);
    let teacher = rows_to_probs(n, classes, &praw);
    let mut model = Model::new(kind, d, true);
    model.set_params(&params);

    let probs = model.predict_proba(&x);
    let dz = blended_dlogits(&model, &probs, Some(&teacher), &y, rho);
    let analytic = model.grad_from_dlogits(&x, &dz);

    let mut probe = model.clone();
    for (i, &p) in params.iter().enumerate() {
        let h = 1e-5 * (1.0 + p.abs());
        let mut theta = params.clone();
        theta[i] = p + h;
        probe.set_params(&theta);
        let above = kd_loss(&probe.predict_proba(&x), &teacher, &y, rho);
        theta[i] = p - h;
        probe.set_params(&theta);
        let below = kd_loss(&probe.predict_proba(&x), &teacher, &y, rho);
        let fd = (above - below) / (2.0 * h);
        let scale = analytic[i].abs().max(fd.abs()).max(1.0);
        prop_assert!(
            (analytic[i] - fd).abs() <= 1e-4 * scale,
            "param {i}: analytic {} vs finite difference {fd}",
            analytic[i]
        );
    }
    Ok(())
}

type AffinityCase = (usize, Vec<f64>, Vec<f64>, Vec<usize>, f64, f64, f64);

fn affinity_case() -> impl Strategy<Value = AffinityCase> {
    (2usize..=8).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(0.05..1.0f64, n * 2),
            prop::collection::vec(0.05..1.0f64, n * 2),
            prop::collection::vec(0..2usize, n),
            0.0..=1.0f64,
            0.0..=1.0f64,
            0.0..=1.0f64,
        )
    })
}

fn check_affinity((n, sraw, traw, y, r1, r2, t): AffinityCase) -> Result<(), TestCaseError> {
    let student = rows_to_probs(n, 2, &sraw);
    let teacher = rows_to_probs(n, 2, &traw);
    let mix = t * r1 + (1.0 - t) * r2;
    let lhs = kd_loss(&student, &teacher, &y, mix);
    let rhs = t * kd_loss(&student, &teacher, &y, r1)
        + (1.0 - t) * kd_loss(&student, &teacher, &y, r2);
    prop_assert!(
        (lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()),
        "objective not affine in the blend weight: {lhs} vs {rhs}"
    );
    Ok(())
}

type NullifyCase = (usize, usize, Vec<f64>, Vec<bool>, Vec<f64>);

fn nullify_case() -> impl Strategy<Value = NullifyCase> {
    (1usize..=8, 1usize..=6).prop_flat_map(|(n, d)| {
        (
            Just(n),
            Just(d),
            prop::collection::vec(-3.0..3.0f64, n * d),
            prop::collection::vec(any::<bool>(), d),
            prop::collection::vec(-3.0..3.0f64, d),
        )
    })
}

fn check_nullify_idempotent((n, d, data, mask, repl): NullifyCase) -> Result<(), TestCaseError> {
    let x = Mat::from_vec(n, d, data);
    let plan = NullifyPlan { nullified: mask, replacement: repl };
    let once = apply_nullify(&x, &plan);
    let twice = apply_nullify(&once, &plan);
    prop_assert!(
        once.data() == twice.data(),
        "re-applying a nullification plan changed the data"
    );
    Ok(())
}

fn builder_case() -> impl Strategy<Value = (&'static str, Vec<usize>)> {
    prop_oneof![
        (0usize..=5).prop_map(|i| ("gamma", vec![2 * i])),
        (10usize..=50).prop_map(|d| ("alpha", vec![d])),
        (1usize..=20).prop_map(|s| ("table2", vec![s])),
        (2usize..=14).prop_flat_map(|k| {
            let lo = if 2 * k > 25 { 2 * k - 25 } else { 1 };
            (lo..=k).prop_map(move |c| ("ranking", vec![k, c]))
        }),
        Just(("nullify", Vec::new())),
    ]
}

type DeterminismCase = ((&'static str, Vec<usize>), u64, u64, usize);

fn check_determinism(
    ((builder, point), master, seed, n): DeterminismCase,
) -> Result<(), TestCaseError> {
    let dir = tempfile::tempdir().map_err(|e| TestCaseError::fail(e.to_string()))?;
    let mut bytes = Vec::new();
    for name in ["first.csv", "second.csv"] {
        let (_, ds) = generate_dataset(builder, &point, n, master, seed)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let path = dir.path().join(name);
        write_dataset_csv(&ds, &path).map_err(|e| TestCaseError::fail(e.to_string()))?;
        bytes.push(std::fs::read(&path).map_err(|e| TestCaseError::fail(e.to_string()))?);
    }
    prop_assert!(
        bytes[0] == bytes[1],
        "repeated generation of {builder} {point:?} differs byte-for-byte"
    );
    Ok(())
}

type ShiftCase = (usize, usize, Vec<f64>, Vec<f64>);

fn shift_case() -> impl Strategy<Value = ShiftCase> {
    (1usize..=6, 2usize..=4).prop_flat_map(|(n, k)| {
        (
            Just(n),
            Just(k),
            prop::collection::vec(-15.0..15.0f64, n * k),
            prop::collection::vec(-25.0..25.0f64, n),
        )
    })
}

fn check_shift_invariance((n, k, zdata, shifts): ShiftCase) -> Result<(), TestCaseError> {
    let z = Mat::from_vec(n, k, zdata);
    let shifted = Mat::from_fn(n, k, |r, c| z.at(r, c) + shifts[r]);
    let p = softmax_rows(&z);
    let q = softmax_rows(&shifted);
    for r in 0..n {
        for c in 0..k {
            prop_assert!(
                (p.at(r, c) - q.at(r, c)).abs() <= 1e-12,
                "row shift moved a probability: {} vs {}",
                p.at(r, c),
                q.at(r, c)
            );
        }
    }
    Ok(())
}

fn check_epsilon_star_homogeneity(
    (lambda, gamma, eps, c): (f64, f64, f64, f64),
) -> Result<(), TestCaseError> {
    let scaled = epsilon_star(lambda, gamma, c * eps);
    let linear = c * epsilon_star(lambda, gamma, eps);
    prop_assert!(
        (scaled - linear).abs() <= 1e-12 * scaled.abs().max(linear.abs()).max(1e-300),
        "discrepancy measure not homogeneous: {scaled} vs {linear}"
    );
    Ok(())
}

#[test]
fn a8_property_invariants() {
    let started = Instant::now();
    let mut fails = Vec::new();

    run_invariant("gradient vs finite difference", grad_case(), check_gradient, &mut fails);
    run_invariant("objective affine in blend weight", affinity_case(), check_affinity, &mut fails);
    run_invariant("nullification idempotent", nullify_case(), check_nullify_idempotent, &mut fails);
    run_invariant(
        "repeated runs byte-identical",
        (builder_case(), any::<u64>(), any::<u64>(), 5usize..40),
        check_determinism,
        &mut fails,
    );
    run_invariant("softmax shift invariance", shift_case(), check_shift_invariance, &mut fails);
    run_invariant(
        "discrepancy measure homogeneous",
        (1.0..50.0f64, 0.0..0.999f64, 1e-6..1e3f64, 1e-3..1e3f64),
        check_epsilon_star_homogeneity,
        &mut fails,
    );

    conclude("a8 property invariants (100 cases each)", started, Some(120.0), fails);
}
