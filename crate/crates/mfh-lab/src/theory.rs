//! The distillation-risk bound: per-sample comparison loss, its
//! worst-case envelope, conditioning and discrepancy estimates, the
//! closed-form logit-matching student, and end-to-end certificates.
//!
//! Data enters as row-major splits (one sample per row); internally the
//! theory works with the transposed views `Z = X^T` whose columns are
//! samples. The certificate checks, on one instance:
//!
//! * the trained student's empirical dis-risk is at most the bound,
//! * the closed-form student's dis-risk is at most the bound,
//! * the projection residual (matrix-lemma left side) is at most the
//!   discrepancy envelope `eps_star`,
//!
//! each with an absolute slack of `1e-9`, and that the student's
//! gradient descent actually converged.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, chol_solve, spd_extreme_norms, spectral_norm, Mat};
use crate::model::{gd_core, GdOptions, TrainReport};

/// Absolute slack applied to every certificate inequality.
pub const CERT_SLACK: f64 = 1e-9;

/// Stable softplus `ln(1 + e^x)`.
fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else if x < -30.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// Per-sample comparison loss between a student logit `b` and a teacher
/// logit `a`: the KL divergence from the teacher's Bernoulli to the
/// student's, `KL(Bern(sigma(a)) || Bern(sigma(b)))`.
///
/// Evaluated in logit space for stability:
/// `p*(sp(-b) - sp(-a)) + (1-p)*(sp(b) - sp(a))` with `p = sigma(a)`
/// and `sp` the softplus. Always nonnegative; exactly zero at `b == a`.
pub fn lemma_l(b: f64, a: f64) -> f64 {
    let p = 1.0 / (1.0 + (-a).exp());
    let val = p * (softplus(-b) - softplus(-a)) + (1.0 - p) * (softplus(b) - softplus(a));
    // Guard against -1e-17-style drift: the quantity is a KL divergence.
    val.max(0.0)
}

/// Worst case of [`lemma_l`] over all teacher logits when the student
/// logit is allowed to drift by at most `eps`:
/// `sup_a max_{|b-a| <= eps} l(b, a)`.
///
/// Closed form `u - 1 - ln(u)` with `u = eps / (1 - e^{-eps})`; the
/// series `eps^2 / 8` is used below `1e-6` where the closed form loses
/// precision to cancellation. Zero at `eps = 0`, increasing in `eps`.
pub fn lemma_l_max(eps: f64) -> Result<f64> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::Invalid(format!(
            "the drift radius must be finite and nonnegative, got {eps}"
        )));
    }
    if eps < 1e-6 {
        return Ok(eps * eps / 8.0);
    }
    let u = eps / (-(-eps).exp_m1());
    Ok(u - 1.0 - u.ln())
}

/// The distillation-risk bound for `n` samples at drift radius
/// `eps_star`: `n * lemma_l_max(eps_star)`.
pub fn bound_value(n: usize, eps_star: f64) -> Result<f64> {
    Ok(n as f64 * lemma_l_max(eps_star)?)
}

/// Conditioning constant of the pair of splits: the largest of the
/// spectral norms of both channel Gram matrices `Z^u Z^{uT} = X^{uT} X^u`
/// and of their inverses. Errors if either Gram is singular.
pub fn estimate_lambda(xa: &Mat, xb: &Mat) -> Result<f64> {
    let mut lambda = 0.0f64;
    for x in [xa, xb] {
        let gram = x.gram_cols();
        let (norm, inv_norm) = spd_extreme_norms(&gram)?;
        lambda = lambda.max(norm).max(inv_norm);
    }
    Ok(lambda)
}

/// Raw modality discrepancy scaled by the share of non-general content:
/// `||Z^{aT} Z^a - Z^{bT} Z^b|| / (1 - gamma)` where `Z^{uT} Z^u = X^u
/// X^{uT}` is the n-by-n sample Gram of each split.
///
/// At `gamma = 1` the scaling is undefined; the difference must then
/// already be zero (up to `1e-9`), and the discrepancy is zero.
pub fn estimate_epsilon(xa: &Mat, xb: &Mat, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Invalid(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    if xa.rows() != xb.rows() {
        return Err(Error::Invalid(
            "both splits must hold the same samples".to_string(),
        ));
    }
    let ga = xa.gram_rows();
    let gb = xb.gram_rows();
    let diff = Mat::from_fn(ga.rows(), ga.cols(), |r, c| ga.at(r, c) - gb.at(r, c));
    let raw = spectral_norm(&diff)?;
    if gamma == 1.0 {
        if raw > 1e-9 {
            return Err(Error::numerical(
                "estimate_epsilon",
                format!(
                    "fully shared splits must have matching sample Grams, \
                     but the difference has norm {raw:e}"
                ),
            ));
        }
        return Ok(0.0);
    }
    Ok(raw / (1.0 - gamma))
}

/// Drift envelope implied by conditioning `lambda`, overlap `gamma`, and
/// discrepancy `eps`: `lambda^{3/2} (lambda^2 + 1) (1 - gamma) eps`.
/// Linear (degree one homogeneous) in `eps`.
pub fn epsilon_star(lambda: f64, gamma: f64, eps: f64) -> f64 {
    lambda.powf(1.5) * (lambda * lambda + 1.0) * (1.0 - gamma) * eps
}

/// The logit-matching student in closed form:
/// `theta_s = (Z^b Z^{bT})^{-1} Z^b Z^{aT} theta_t`, the least-squares
/// solution matching the student's logits to the teacher's on the
/// training samples.
pub fn closed_form_student(xa: &Mat, xb: &Mat, theta_t: &[f64]) -> Result<Vec<f64>> {
    if theta_t.len() != xa.cols() {
        return Err(Error::Invalid(
            "teacher weights must match the teacher split width".to_string(),
        ));
    }
    if xa.rows() != xb.rows() {
        return Err(Error::Invalid(
            "both splits must hold the same samples".to_string(),
        ));
    }
    let teacher_logits = xa.mul_vec(theta_t);
    let rhs = xb.tr_mul_vec(&teacher_logits);
    let gram = xb.gram_cols();
    crate::linalg::solve_spd(&gram, &rhs)
}

/// Left side of the matrix lemma: the spectral norm of
/// `Z^{bT} (Z^b Z^{bT})^{-1} Z^b Z^{aT} - Z^{aT}`, i.e. the residual of
/// projecting the teacher split onto the student split's column space.
pub fn matrix_lemma_lhs(xa: &Mat, xb: &Mat) -> Result<f64> {
    if xa.rows() != xb.rows() {
        return Err(Error::Invalid(
            "both splits must hold the same samples".to_string(),
        ));
    }
    let gram = xb.gram_cols();
    let chol = cholesky(&gram)?;
    let n = xa.rows();
    let mut resid = Mat::zeros(n, xa.cols());
    for j in 0..xa.cols() {
        let col: Vec<f64> = (0..n).map(|r| xa.at(r, j)).collect();
        let w = xb.tr_mul_vec(&col);
        let s = chol_solve(&chol, &w);
        let proj = xb.mul_vec(&s);
        for r in 0..n {
            resid.set(r, j, proj[r] - col[r]);
        }
    }
    spectral_norm(&resid)
}

/// Empirical dis-risk of a student against a teacher: the *sum* over
/// samples of the per-sample comparison loss between the student logit
/// on `x_i^b` and the teacher logit on `x_i^a`.
pub fn empirical_dis_risk(theta_s: &[f64], theta_t: &[f64], xa: &Mat, xb: &Mat) -> f64 {
    assert_eq!(xa.rows(), xb.rows());
    let student_logits = xb.mul_vec(theta_s);
    let teacher_logits = xa.mul_vec(theta_t);
    student_logits
        .iter()
        .zip(&teacher_logits)
        .map(|(&b, &a)| lemma_l(b, a))
        .sum()
}

/// Train the logit-matching student by gradient descent on the *mean*
/// dis-risk (same minimizer as the sum; better-scaled gradients), from a
/// zero, bias-free initialization.
pub fn train_dis_risk(
    theta_t: &[f64],
    xa: &Mat,
    xb: &Mat,
    opts: &GdOptions,
) -> (Vec<f64>, TrainReport) {
    let n = xa.rows() as f64;
    let teacher_logits = xa.mul_vec(theta_t);
    let teacher_probs: Vec<f64> =
        teacher_logits.iter().map(|&a| 1.0 / (1.0 + (-a).exp())).collect();
    let eval = |theta: &[f64]| {
        let student_logits = xb.mul_vec(theta);
        let loss = student_logits
            .iter()
            .zip(&teacher_logits)
            .map(|(&b, &a)| lemma_l(b, a))
            .sum::<f64>()
            / n;
        let dlogit: Vec<f64> = student_logits
            .iter()
            .zip(&teacher_probs)
            .map(|(&b, &p)| (1.0 / (1.0 + (-b).exp()) - p) / n)
            .collect();
        (loss, xb.tr_mul_vec(&dlogit))
    };
    gd_core(vec![0.0; xb.cols()], opts, eval)
}

/// Default optimizer settings for the certificate's student training:
/// tight gradient tolerance, generous iteration budget.
pub fn certificate_gd_options() -> GdOptions {
    GdOptions { tol: 1e-8, max_iters: 50_000, ..GdOptions::default() }
}

/// Everything measured while checking the bound on one instance.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub seed: u64,
    pub n: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub epsilon_star: f64,
    pub bound: f64,
    pub risk_closed_form: f64,
    pub risk_trained: f64,
    pub matrix_lemma_lhs: f64,
    /// All three inequalities hold (with [`CERT_SLACK`]) *and* the
    /// student's gradient descent converged.
    pub holds: bool,
    /// Whether the student's gradient descent reported convergence;
    /// recorded separately so a failed `holds` can be attributed.
    pub gd_converged: bool,
}

/// Check the bound end to end on one instance.
///
/// `theta_t` is normalized to unit length first (a zero vector is
/// rejected). `gamma` is the instance's ground-truth overlap ratio.
pub fn verify_bound(
    seed: u64,
    xa: &Mat,
    xb: &Mat,
    theta_t: &[f64],
    gamma: f64,
) -> Result<Certificate> {
    if xa.rows() == 0 || xa.rows() != xb.rows() {
        return Err(Error::Invalid(
            "both splits must hold the same, positive number of samples".to_string(),
        ));
    }
    if theta_t.len() != xa.cols() {
        return Err(Error::Invalid(
            "teacher weights must match the teacher split width".to_string(),
        ));
    }
    let norm = crate::linalg::norm2(theta_t);
    if norm <= 0.0 {
        return Err(Error::Invalid("teacher weights must be nonzero".to_string()));
    }
    let theta_t: Vec<f64> = theta_t.iter().map(|&v| v / norm).collect();

    let n = xa.rows();
    let lambda = estimate_lambda(xa, xb)?;
    let epsilon = estimate_epsilon(xa, xb, gamma)?;
    let eps_star = epsilon_star(lambda, gamma, epsilon);
    let bound = bound_value(n, eps_star)?;

    let theta_closed = closed_form_student(xa, xb, &theta_t)?;
    let risk_closed_form = empirical_dis_risk(&theta_closed, &theta_t, xa, xb);

    let (theta_gd, report) = train_dis_risk(&theta_t, xa, xb, &certificate_gd_options());
    let risk_trained = empirical_dis_risk(&theta_gd, &theta_t, xa, xb);

    let lhs = matrix_lemma_lhs(xa, xb)?;

    let holds = risk_trained <= bound + CERT_SLACK
        && risk_closed_form <= bound + CERT_SLACK
        && lhs <= eps_star + CERT_SLACK
        && report.converged;

    Ok(Certificate {
        seed,
        n,
        gamma,
        lambda,
        epsilon,
        epsilon_star: eps_star,
        bound,
        risk_closed_form,
        risk_trained,
        matrix_lemma_lhs: lhs,
        holds,
        gd_converged: report.converged,
    })
}

/// Column order of the certificate CSV.
pub const CERTIFICATE_HEADER: [&str; 11] = [
    "seed",
    "n",
    "gamma",
    "lambda",
    "epsilon",
    "epsilon_star",
    "bound",
    "risk_closed_form",
    "risk_trained",
    "matrix_lemma_lhs",
    "holds",
];

/// Write certificates as CSV in the pinned column order; `holds` is
/// encoded as `1`/`0`.
pub fn write_certificates_csv<P: AsRef<std::path::Path>>(
    path: P,
    certs: &[Certificate],
) -> Result<()> {
    use crate::csvio::fmt_f64;
    let rows = certs.iter().map(|c| {
        vec![
            c.seed.to_string(),
            c.n.to_string(),
            fmt_f64(c.gamma),
            fmt_f64(c.lambda),
            fmt_f64(c.epsilon),
            fmt_f64(c.epsilon_star),
            fmt_f64(c.bound),
            fmt_f64(c.risk_closed_form),
            fmt_f64(c.risk_trained),
            fmt_f64(c.matrix_lemma_lhs),
            u8::from(c.holds).to_string(),
        ]
    });
    crate::csvio::write_csv(path, &CERTIFICATE_HEADER, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stage, substream};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian_mat(rows: usize, cols: usize, rng: &mut impl Rng) -> Mat {
        Mat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    /// Independent check of the envelope: maximize the per-sample loss
    /// at drift exactly `eps` over a dense grid of teacher logits, then
    /// refine with golden-section search.
    fn brute_force_max(eps: f64) -> f64 {
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
    fn per_sample_loss_hand_values() {
        // KL(Bern(sigma(0)) || Bern(sigma(1))) computed independently.
        assert!((lemma_l(1.0, 0.0) - 0.12011450695827755).abs() < 1e-12);
        assert_eq!(lemma_l(3.7, 3.7), 0.0);
        assert!(lemma_l(-2.0, 2.0) > 0.0);
        // Huge logits must not overflow into NaN.
        assert!(lemma_l(500.0, -500.0).is_finite());
    }

    #[test]
    fn envelope_hand_values_and_edge_cases() {
        assert_eq!(lemma_l_max(0.0).unwrap(), 0.0);
        assert!((lemma_l_max(1.0).unwrap() - 0.12330156148224453).abs() < 1e-12);
        assert!((bound_value(200, 1.0).unwrap() - 24.660312296448904).abs() < 1e-9);
        assert!(lemma_l_max(-0.1).is_err());
        assert!(lemma_l_max(f64::NAN).is_err());
        // Monotone over a grid.
        let mut prev = 0.0;
        for i in 1..=60 {
            let v = lemma_l_max(i as f64 * 0.1).unwrap();
            assert!(v > prev);
            prev = v;
        }
        // Series and closed form agree near the switch point.
        let series = 1e-6f64 * 1e-6 / 8.0;
        let closed = {
            let eps = 1.0000001e-6f64;
            let u = eps / (-(-eps).exp_m1());
            u - 1.0 - u.ln()
        };
        assert!((series - closed).abs() < 1e-16);
    }

    #[test]
    fn envelope_matches_brute_force_search() {
        for eps in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let closed = lemma_l_max(eps).unwrap();
            let brute = brute_force_max(eps);
            assert!(
                (closed - brute).abs() <= 1e-9,
                "eps {eps}: closed {closed} vs brute {brute}"
            );
        }
    }

    #[test]
    fn drift_envelope_is_linear_in_discrepancy() {
        let base = epsilon_star(3.0, 0.25, 0.7);
        for c in [0.0, 0.5, 2.0, 1e6] {
            let scaled = epsilon_star(3.0, 0.25, c * 0.7);
            assert!((scaled - c * base).abs() <= 1e-12 * base.max(scaled).max(1.0));
        }
    }

    #[test]
    fn identical_splits_give_zero_bound_that_holds() {
        let mut rng = substream(11, &[stage::THEOREM, 0]);
        let x = gaussian_mat(24, 6, &mut rng);
        let theta: Vec<f64> = (0..6).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let cert = verify_bound(0, &x, &x, &theta, 1.0).unwrap();
        assert_eq!(cert.epsilon, 0.0);
        assert_eq!(cert.epsilon_star, 0.0);
        assert_eq!(cert.bound, 0.0);
        assert!(cert.risk_closed_form <= 1e-12);
        assert!(cert.risk_trained <= CERT_SLACK);
        assert!(cert.matrix_lemma_lhs <= 1e-9);
        assert!(cert.holds, "a realizable instance must certify");
        // Same splits under gamma = 0 scale a zero discrepancy by one.
        let cert0 = verify_bound(0, &x, &x, &theta, 0.0).unwrap();
        assert!(cert0.epsilon <= 1e-12);
    }

    #[test]
    fn gamma_one_with_differing_splits_is_a_numerical_error() {
        let mut rng = substream(12, &[stage::THEOREM, 0]);
        let xa = gaussian_mat(20, 5, &mut rng);
        let xb = gaussian_mat(20, 5, &mut rng);
        let err = estimate_epsilon(&xa, &xb, 1.0).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn closed_form_student_is_the_logit_least_squares_solution() {
        let mut rng = substream(13, &[stage::THEOREM, 0]);
        let xa = gaussian_mat(30, 4, &mut rng);
        let xb = gaussian_mat(30, 7, &mut rng);
        let theta_t: Vec<f64> = (0..4).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let theta_s = closed_form_student(&xa, &xb, &theta_t).unwrap();
        // First-order condition: X^{bT} (X^b theta_s - X^a theta_t) = 0.
        let resid: Vec<f64> = xb
            .mul_vec(&theta_s)
            .iter()
            .zip(&xa.mul_vec(&theta_t))
            .map(|(s, t)| s - t)
            .collect();
        let grad = xb.tr_mul_vec(&resid);
        assert!(crate::linalg::norm_inf(&grad) < 1e-9);
    }

    #[test]
    fn projection_residual_stays_under_the_envelope() {
        // The matrix lemma, checked on fresh random instances.
        for trial in 0..100u64 {
            let mut rng = substream(14, &[stage::THEOREM, trial]);
            let d1 = rng.gen_range(4..=10usize);
            let d2 = rng.gen_range(4..=10usize);
            let n = 2 * d1.max(d2) + rng.gen_range(0..8usize);
            let xa = gaussian_mat(n, d1, &mut rng);
            let xb = gaussian_mat(n, d2, &mut rng);
            let lambda = estimate_lambda(&xa, &xb).unwrap();
            let eps = estimate_epsilon(&xa, &xb, 0.0).unwrap();
            let envelope = epsilon_star(lambda, 0.0, eps);
            let lhs = matrix_lemma_lhs(&xa, &xb).unwrap();
            assert!(
                lhs <= envelope + CERT_SLACK,
                "trial {trial}: residual {lhs} exceeds envelope {envelope}"
            );
        }
    }

    #[test]
    fn trained_risk_descends_to_the_closed_form_level() {
        let mut rng = substream(15, &[stage::THEOREM, 0]);
        let xa = gaussian_mat(26, 5, &mut rng);
        let xb = gaussian_mat(26, 8, &mut rng);
        let mut theta_t: Vec<f64> =
            (0..5).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = crate::linalg::norm2(&theta_t);
        for v in &mut theta_t {
            *v /= norm;
        }
        let (theta_gd, report) = train_dis_risk(&theta_t, &xa, &xb, &certificate_gd_options());
        assert!(report.converged, "the instance is smooth and tiny; GD must converge");
        let trained = empirical_dis_risk(&theta_gd, &theta_t, &xa, &xb);
        let closed = closed_form_student(&xa, &xb, &theta_t).unwrap();
        let closed_risk = empirical_dis_risk(&closed, &theta_t, &xa, &xb);
        // The logit matcher is not the risk minimizer, so GD may land
        // strictly below it, never meaningfully above.
        assert!(trained <= closed_risk + 1e-6, "trained {trained} vs closed {closed_risk}");
    }

    #[test]
    fn certificate_csv_is_pinned_and_readable() {
        let mut rng = substream(16, &[stage::THEOREM, 0]);
        let x = gaussian_mat(18, 4, &mut rng);
        let theta: Vec<f64> = (0..4).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let cert = verify_bound(42, &x, &x, &theta, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("certs.csv");
        write_certificates_csv(&path, &[cert.clone()]).unwrap();
        let (header, rows) = crate::csvio::read_csv(&path).unwrap();
        assert_eq!(header, CERTIFICATE_HEADER.map(String::from).to_vec());
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0][0], "42");
        assert_eq!(rows[0][1], "18");
        assert_eq!(rows[0][10], "1");
        // Re-writing produces identical bytes.
        let first = std::fs::read(&path).unwrap();
        write_certificates_csv(&path, &[cert]).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
    }

    #[test]
    fn verify_bound_rejects_malformed_inputs() {
        let mut rng = substream(17, &[stage::THEOREM, 0]);
        let xa = gaussian_mat(12, 3, &mut rng);
        let xb = gaussian_mat(12, 4, &mut rng);
        assert!(verify_bound(0, &xa, &xb, &[1.0, 0.0], 0.0).is_err());
        assert!(verify_bound(0, &xa, &xb, &[0.0, 0.0, 0.0], 0.0).is_err());
        let x_short = gaussian_mat(9, 4, &mut rng);
        assert!(verify_bound(0, &xa, &x_short, &[1.0, 0.0, 0.0], 0.0).is_err());
    }
}
