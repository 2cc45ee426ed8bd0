//! Knowledge distillation: students trained against a blend of hard
//! labels and a teacher's soft predictions.
//!
//! The objective is `rho * CE(y, student) + (1 - rho) * KL(teacher || student)`
//! with the teacher as the KL reference and no temperature scaling. The
//! teacher enters only through its predicted probabilities, which the
//! caller computes up front ([`teacher_soft_targets`]) — so the teacher is
//! never mutated by distillation, and masked or otherwise transformed
//! teachers plug in by supplying their own probability matrix.
//!
//! `rho = 0.5` is the default for the Gaussian sweeps; `rho = 0` (pure
//! distillation, no label supervision) is the regime for the
//! nullification studies.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::losses::kd_loss;
use crate::model::{blended_dlogits, gd_core, GdOptions, Model, TrainReport};

/// Teacher probabilities on a split: the soft targets students distill
/// from. Provided for symmetry; equivalent to `teacher.predict_proba(x)`.
pub fn teacher_soft_targets(teacher: &Model, x: &Mat) -> Mat {
    teacher.predict_proba(x)
}

/// Concatenate the two modalities column-wise for a multimodal
/// (joint-input) teacher.
pub fn concat_modalities(xa: &Mat, xb: &Mat) -> Mat {
    xa.concat_cols(xb)
}

/// Train a student against the blended objective by full-batch GD.
///
/// `student_init` is the initialization (not modified); `teacher_probs`
/// must have one row per training sample and as many columns as the
/// student has classes. `rho` must lie in `[0, 1]`.
pub fn distill(
    student_init: &Model,
    x_student: &Mat,
    y: &[usize],
    teacher_probs: &Mat,
    rho: f64,
    opts: &GdOptions,
) -> Result<(Model, TrainReport)> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Invalid(format!("rho must lie in [0, 1], got {rho}")));
    }
    if teacher_probs.rows() != x_student.rows() {
        return Err(Error::Invalid(format!(
            "teacher probabilities have {} rows but the student split has {}",
            teacher_probs.rows(),
            x_student.rows()
        )));
    }
    if teacher_probs.cols() != student_init.n_classes() {
        return Err(Error::Invalid(format!(
            "teacher probabilities have {} classes but the student has {}",
            teacher_probs.cols(),
            student_init.n_classes()
        )));
    }
    let eval = |params: &[f64]| {
        let mut m = student_init.clone();
        m.set_params(params);
        let probs = m.predict_proba(x_student);
        let loss = kd_loss(&probs, teacher_probs, y, rho);
        let dz = blended_dlogits(&m, &probs, Some(teacher_probs), y, rho);
        (loss, m.grad_from_dlogits(x_student, &dz))
    };
    let (params, report) = gd_core(student_init.params().to_vec(), opts, eval);
    let mut out = student_init.clone();
    out.set_params(&params);
    Ok((out, report))
}
