//! Numerically stable losses on probability matrices.
//!
//! All losses operate on `n x K` matrices of class probabilities (rows sum
//! to one) and use a hard clamp at [`PROB_CLAMP`] inside every logarithm,
//! so exactly-zero probabilities never produce infinities. The distillation
//! objective is an affine blend of hard-label cross-entropy and the KL
//! divergence from the reference (teacher) distribution to the student.

use crate::linalg::Mat;

/// Lower clamp applied to probabilities inside logarithms.
pub const PROB_CLAMP: f64 = 1e-12;

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Row-wise softmax with max-shift stabilization.
///
/// Shifting each row by its maximum leaves the result invariant
/// analytically and keeps every exponent non-positive numerically.
pub fn softmax_rows(logits: &Mat) -> Mat {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for x in row.iter_mut() {
            *x = (*x - m).exp();
            sum += *x;
        }
        for x in row.iter_mut() {
            *x /= sum;
        }
    }
    out
}

#[inline]
fn ln_clamped(p: f64) -> f64 {
    p.max(PROB_CLAMP).ln()
}

/// Mean cross-entropy of hard labels under predicted probabilities:
/// `-(1/n) * sum_i ln p_i[y_i]`, with the clamp inside the log.
pub fn ce_loss(probs: &Mat, y: &[usize]) -> f64 {
    assert_eq!(probs.rows(), y.len(), "one label per row");
    let n = y.len().max(1) as f64;
    let mut total = 0.0;
    for (r, &label) in y.iter().enumerate() {
        total -= ln_clamped(probs.at(r, label));
    }
    total / n
}

/// Mean row-wise KL divergence `KL(p_ref || q)`.
///
/// Terms with `p_ref = 0` contribute zero (the usual `0 ln 0 = 0`
/// convention); `q` is clamped inside its logarithm.
pub fn kl_div(p_ref: &Mat, q: &Mat) -> f64 {
    assert_eq!(p_ref.rows(), q.rows(), "row counts must agree");
    assert_eq!(p_ref.cols(), q.cols(), "class counts must agree");
    let n = p_ref.rows().max(1) as f64;
    let mut total = 0.0;
    for r in 0..p_ref.rows() {
        for (pk, qk) in p_ref.row(r).iter().zip(q.row(r)) {
            if *pk > 0.0 {
                total += pk * (ln_clamped(*pk) - ln_clamped(*qk));
            }
        }
    }
    total / n
}

/// Distillation objective: `rho * CE(y, student) + (1 - rho) * KL(teacher || student)`.
///
/// The teacher distribution is the KL reference; `rho = 1` recovers plain
/// supervised training and `rho = 0` pure distillation. The objective is
/// affine in `rho` by construction.
pub fn kd_loss(student_probs: &Mat, teacher_probs: &Mat, y: &[usize], rho: f64) -> f64 {
    rho * ce_loss(student_probs, y) + (1.0 - rho) * kl_div(teacher_probs, student_probs)
}

/// Classification accuracy under argmax decoding; ties go to the lowest
/// class index.
pub fn accuracy(probs: &Mat, y: &[usize]) -> f64 {
    assert_eq!(probs.rows(), y.len(), "one label per row");
    if y.is_empty() {
        return 0.0;
    }
    let mut correct = 0usize;
    for (r, &label) in y.iter().enumerate() {
        let row = probs.row(r);
        let mut best = 0usize;
        for (k, &p) in row.iter().enumerate() {
            if p > row[best] {
                best = k;
            }
        }
        if best == label {
            correct += 1;
        }
    }
    correct as f64 / y.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sigmoid_hand_value() {
        // sigma(ln 3) = 3/4 exactly.
        assert!(close(sigmoid(3.0f64.ln()), 0.75, 1e-15));
        assert!(close(sigmoid(0.0), 0.5, 1e-15));
        // Stability at extremes: no NaN, saturates cleanly.
        assert_eq!(sigmoid(800.0), 1.0);
        assert_eq!(sigmoid(-800.0), 0.0);
    }

    #[test]
    fn ce_hand_value() {
        // Single sample, p(correct) = 0.75: loss = -ln 0.75 ~= 0.287682.
        let probs = Mat::from_vec(1, 2, vec![0.25, 0.75]);
        assert!(close(ce_loss(&probs, &[1]), -(0.75f64.ln()), 1e-15));
        assert!(close(ce_loss(&probs, &[1]), 0.2876820724517809, 1e-12));
    }

    #[test]
    fn kl_hand_value() {
        // KL((0.8, 0.2) || (0.5, 0.5)) = 0.8 ln 1.6 + 0.2 ln 0.4 ~= 0.192745.
        let p = Mat::from_vec(1, 2, vec![0.8, 0.2]);
        let q = Mat::from_vec(1, 2, vec![0.5, 0.5]);
        let expect = 0.8 * (0.8f64 / 0.5).ln() + 0.2 * (0.2f64 / 0.5).ln();
        assert!(close(kl_div(&p, &q), expect, 1e-15));
        assert!(close(kl_div(&p, &q), 0.19274475702175742, 1e-12));
    }

    #[test]
    fn kd_composition_hand_value() {
        // rho = 0.5 blend of the two hand values above.
        let student = Mat::from_vec(1, 2, vec![0.25, 0.75]);
        let teacher = Mat::from_vec(1, 2, vec![0.8, 0.2]);
        let ce = -(0.75f64.ln());
        let kl = 0.8 * (0.8f64 / 0.25).ln() + 0.2 * (0.2f64 / 0.75).ln();
        let expect = 0.5 * ce + 0.5 * kl;
        assert!(close(kd_loss(&student, &teacher, &[1], 0.5), expect, 1e-15));
    }

    #[test]
    fn zero_probability_is_clamped_not_infinite() {
        let probs = Mat::from_vec(1, 2, vec![1.0, 0.0]);
        let loss = ce_loss(&probs, &[1]);
        assert!(loss.is_finite(), "clamp must prevent infinities");
        assert!(close(loss, -(PROB_CLAMP.ln()), 1e-9));
        // Zero reference mass contributes exactly zero to KL.
        let p = Mat::from_vec(1, 2, vec![1.0, 0.0]);
        let q = Mat::from_vec(1, 2, vec![1.0, 0.0]);
        assert_eq!(kl_div(&p, &q), 0.0);
    }

    #[test]
    fn kl_is_nonnegative_and_zero_on_self() {
        let p = Mat::from_vec(2, 3, vec![0.2, 0.3, 0.5, 0.6, 0.3, 0.1]);
        assert!(close(kl_div(&p, &p), 0.0, 1e-15));
        let q = Mat::from_vec(2, 3, vec![0.3, 0.3, 0.4, 0.2, 0.5, 0.3]);
        assert!(kl_div(&p, &q) > 0.0);
    }

    #[test]
    fn accuracy_breaks_ties_toward_lowest_class() {
        let probs = Mat::from_vec(2, 3, vec![0.4, 0.4, 0.2, 0.1, 0.2, 0.7]);
        // Row 0 ties classes 0 and 1: predicted class must be 0.
        assert_eq!(accuracy(&probs, &[0, 2]), 1.0);
        assert_eq!(accuracy(&probs, &[1, 2]), 0.5);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let logits = Mat::from_vec(2, 3, vec![1.0, 2.0, 3.0, -5.0, 0.0, 5.0]);
        let p = softmax_rows(&logits);
        for r in 0..2 {
            let s: f64 = p.row(r).iter().sum();
            assert!(close(s, 1.0, 1e-12));
        }
    }
}
