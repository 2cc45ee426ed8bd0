//! Channel salience via crossmodal alignment, and channel nullification.
//!
//! Two single-modality branches are trained *jointly* to agree with the
//! labels and with each other: the objective is the sum of both branches'
//! cross-entropies plus an alignment distance, the mean squared difference
//! between their probability vectors, all with unit weight. Salience of a
//! modality-a channel is then measured by breaking it: permute the channel
//! across samples and record how much the alignment distance grows. A
//! channel both branches rely on (a *general* channel) misaligns them when
//! broken; a channel only one branch sees barely moves the distance.
//!
//! Salience scores are averaged over `M` independent permutations and
//! normalized to a maximum of one. Nullification plans then remove the
//! lowest-salience channels (to isolate general content), the highest
//! (to destroy it), or a uniform random subset, replacing each removed
//! channel by its training-split mean.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::losses::ce_loss;
use crate::model::{evaluate, gd_core, GdOptions, Model, ModelKind, TrainReport};
use crate::mvd::Role;
use crate::rng::{stage, substream};

/// The two branch models produced by joint training.
#[derive(Clone, Debug)]
pub struct JointModels {
    /// Branch on modality a.
    pub f1: Model,
    /// Branch on modality b.
    pub f2: Model,
}

/// Mean squared difference between two probability matrices (summed over
/// classes, averaged over samples) — the alignment distance.
pub fn dist_mse(p1: &Mat, p2: &Mat) -> f64 {
    assert_eq!(p1.rows(), p2.rows());
    assert_eq!(p1.cols(), p2.cols());
    let n = p1.rows().max(1) as f64;
    let mut total = 0.0;
    for r in 0..p1.rows() {
        for (a, b) in p1.row(r).iter().zip(p2.row(r)) {
            let d = a - b;
            total += d * d;
        }
    }
    total / n
}

/// Jointly train logistic branches on the two modalities.
///
/// Objective: `Dist(f1(xa), f2(xb)) + CE(y, f1(xa)) + CE(y, f2(xb))`,
/// each term with weight one, minimized by the shared GD loop over the
/// concatenation of both branches' parameters (zero-initialized, hence
/// deterministic).
pub fn joint_train(
    xa: &Mat,
    xb: &Mat,
    y: &[usize],
    opts: &GdOptions,
) -> Result<(JointModels, TrainReport)> {
    if xa.rows() != xb.rows() || xa.rows() != y.len() {
        return Err(Error::Invalid(
            "joint training needs aligned modalities and labels".to_string(),
        ));
    }
    let f1 = Model::new(ModelKind::Logistic, xa.cols(), true);
    let f2 = Model::new(ModelKind::Logistic, xb.cols(), true);
    let n1 = f1.params().len();
    let n = y.len() as f64;
    let eval = |params: &[f64]| {
        let mut m1 = f1.clone();
        m1.set_params(&params[..n1]);
        let mut m2 = f2.clone();
        m2.set_params(&params[n1..]);
        let p1 = m1.predict_proba(xa);
        let p2 = m2.predict_proba(xb);
        let loss = dist_mse(&p1, &p2) + ce_loss(&p1, y) + ce_loss(&p2, y);
        // d/dz of the alignment term for the single-logit branches:
        // per sample, Dist contributes 2*sum_k (p1k - p2k)^2 / n with
        // p1 = [1-s1, s1], so dDist/ds1 = 4 (s1 - s2) / n and the chain
        // through the logit multiplies by s1(1-s1).
        let dz1 = Mat::from_fn(p1.rows(), 1, |r, _| {
            let s1 = p1.at(r, 1);
            let s2 = p2.at(r, 1);
            let align = 4.0 * (s1 - s2) * s1 * (1.0 - s1) / n;
            let hard = (s1 - (y[r] == 1) as usize as f64) / n;
            align + hard
        });
        let dz2 = Mat::from_fn(p2.rows(), 1, |r, _| {
            let s1 = p1.at(r, 1);
            let s2 = p2.at(r, 1);
            let align = -4.0 * (s1 - s2) * s2 * (1.0 - s2) / n;
            let hard = (s2 - (y[r] == 1) as usize as f64) / n;
            align + hard
        });
        let mut grad = m1.grad_from_dlogits(xa, &dz1);
        grad.extend(m2.grad_from_dlogits(xb, &dz2));
        (loss, grad)
    };
    let init: Vec<f64> = f1.params().iter().chain(f2.params()).copied().collect();
    let (params, report) = gd_core(init, opts, eval);
    let mut m1 = f1;
    let mut m2 = f2;
    m1.set_params(&params[..n1]);
    m2.set_params(&params[n1..]);
    Ok((JointModels { f1: m1, f2: m2 }, report))
}

/// Normalized per-channel salience scores for the ranked modality.
#[derive(Clone, Debug)]
pub struct SaliencyVector {
    /// One score per channel, in `[0, 1]`; the maximum is exactly 1 unless
    /// every score is zero.
    pub values: Vec<f64>,
    /// Set when every raw score was zero (degenerate branches); the
    /// values are then all zeros and ordering is meaningless.
    pub all_zero: bool,
}

/// Rank modality-a channels by permutation salience.
///
/// For channel `i` and repeat `m`, column `i` of `xa` is shuffled across
/// samples with the substream keyed by `(master, PERM, salt, i, m)`, and
/// the alignment distance between the (fixed) branch outputs is recorded;
/// the score of channel `i` is the mean over the `M` repeats, normalized
/// by the maximum over channels. `m_repeats` must be positive.
pub fn rank_features(
    joint: &JointModels,
    xa: &Mat,
    xb: &Mat,
    m_repeats: usize,
    master: u64,
    salt: u64,
) -> Result<SaliencyVector> {
    if m_repeats == 0 {
        return Err(Error::Invalid("m_repeats must be positive".to_string()));
    }
    let p2 = joint.f2.predict_proba(xb);
    let n = xa.rows();
    let mut raw = vec![0.0; xa.cols()];
    let mut shuffled = xa.clone();
    for (i, slot) in raw.iter_mut().enumerate() {
        let original: Vec<f64> = (0..n).map(|r| xa.at(r, i)).collect();
        let mut total = 0.0;
        for m in 0..m_repeats {
            let mut rng = substream(master, &[stage::PERM, salt, i as u64, m as u64]);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            for (r, &src) in perm.iter().enumerate() {
                shuffled.set(r, i, original[src]);
            }
            let p1 = joint.f1.predict_proba(&shuffled);
            total += dist_mse(&p1, &p2);
        }
        *slot = total / m_repeats as f64;
        for (r, &v) in original.iter().enumerate() {
            shuffled.set(r, i, v);
        }
    }
    let max = raw.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Ok(SaliencyVector { values: vec![0.0; raw.len()], all_zero: true });
    }
    for v in &mut raw {
        *v /= max;
    }
    Ok(SaliencyVector { values: raw, all_zero: false })
}

/// Which channels a nullification plan removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NullifyMode {
    /// Remove the *lowest*-salience channels, keeping the general core.
    General,
    /// Remove the *highest*-salience channels, destroying the general core.
    Specific,
    /// Remove a uniform random subset.
    Random,
}

impl NullifyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NullifyMode::General => "general",
            NullifyMode::Specific => "specific",
            NullifyMode::Random => "random",
        }
    }
}

/// A concrete nullification plan over the channels of one modality.
#[derive(Clone, Debug, PartialEq)]
pub struct NullifyPlan {
    /// Per channel: whether it is nullified.
    pub nullified: Vec<bool>,
    /// Per channel: the value that replaces it when nullified (the
    /// training-split mean of that channel).
    pub replacement: Vec<f64>,
}

impl NullifyPlan {
    /// Indices of nullified channels, ascending.
    pub fn channels(&self) -> Vec<usize> {
        (0..self.nullified.len()).filter(|&j| self.nullified[j]).collect()
    }

    /// Number of nullified channels.
    pub fn count(&self) -> usize {
        self.nullified.iter().filter(|&&b| b).count()
    }

    /// Write as CSV rows `channel, nullified, replacement_value`.
    pub fn save_csv<P: AsRef<std::path::Path>>(&self, path: P) -> Result<()> {
        let rows = (0..self.nullified.len()).map(|j| {
            vec![
                j.to_string(),
                u8::from(self.nullified[j]).to_string(),
                crate::csvio::fmt_f64(self.replacement[j]),
            ]
        });
        crate::csvio::write_csv(path, &["channel", "nullified", "replacement_value"], rows)
    }
}

/// Number of channels a ratio removes: `round(ratio * d)`, half away from
/// zero.
pub fn nullify_count(ratio: f64, d: usize) -> usize {
    (ratio * d as f64 + 0.5).floor() as usize
}

/// Build a nullification plan for the channels of `x_train`.
///
/// The count is `round(ratio * d)`. Mode `General` removes the channels
/// with the smallest salience (ties broken toward the lower index),
/// `Specific` the largest (same tie rule), `Random` a uniform subset
/// without replacement drawn from `rng`. Replacement values are the
/// training-split column means.
pub fn make_nullify_plan(
    mode: NullifyMode,
    saliency: Option<&SaliencyVector>,
    ratio: f64,
    x_train: &Mat,
    rng: Option<&mut dyn rand::RngCore>,
) -> Result<NullifyPlan> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::Invalid(format!("ratio must lie in [0, 1], got {ratio}")));
    }
    let d = x_train.cols();
    let count = nullify_count(ratio, d);
    let selected: Vec<usize> = match mode {
        NullifyMode::General | NullifyMode::Specific => {
            let sal = saliency.ok_or_else(|| {
                Error::Invalid("ranked nullification modes need a saliency vector".to_string())
            })?;
            if sal.values.len() != d {
                return Err(Error::Invalid(format!(
                    "saliency has {} entries but the split has {d} channels",
                    sal.values.len()
                )));
            }
            let mut order: Vec<usize> = (0..d).collect();
            match mode {
                // Ascending salience, ties toward the lower index.
                NullifyMode::General => order.sort_by(|&a, &b| {
                    sal.values[a].partial_cmp(&sal.values[b]).unwrap().then(a.cmp(&b))
                }),
                // Descending salience, ties toward the lower index.
                _ => order.sort_by(|&a, &b| {
                    sal.values[b].partial_cmp(&sal.values[a]).unwrap().then(a.cmp(&b))
                }),
            }
            order.truncate(count);
            order
        }
        NullifyMode::Random => {
            let rng = rng.ok_or_else(|| {
                Error::Invalid("random nullification needs a generator".to_string())
            })?;
            let mut all: Vec<usize> = (0..d).collect();
            // Partial Fisher-Yates: the first `count` entries after the
            // loop are a uniform subset without replacement.
            for i in 0..count.min(d) {
                let j = rng.gen_range(i..d);
                all.swap(i, j);
            }
            all.truncate(count);
            all
        }
    };
    let mut nullified = vec![false; d];
    for &j in &selected {
        nullified[j] = true;
    }
    Ok(NullifyPlan { nullified, replacement: x_train.col_means() })
}

/// Plan that keeps exactly the ground-truth general channels, removing
/// every specific and noise channel (used by the role-informed teacher).
pub fn ground_truth_plan(roles: &[Role], x_train: &Mat) -> NullifyPlan {
    assert_eq!(roles.len(), x_train.cols());
    let nullified: Vec<bool> = roles.iter().map(|&r| r != Role::General).collect();
    NullifyPlan { nullified, replacement: x_train.col_means() }
}

/// Apply a plan to a split: nullified columns are overwritten by their
/// stored replacement values. Pure and idempotent.
pub fn apply_nullify(x: &Mat, plan: &NullifyPlan) -> Mat {
    assert_eq!(x.cols(), plan.nullified.len(), "plan width must match the split");
    let mut out = x.clone();
    for j in 0..x.cols() {
        if plan.nullified[j] {
            let v = plan.replacement[j];
            for r in 0..x.rows() {
                out.set(r, j, v);
            }
        }
    }
    out
}

/// A teacher composed with a nullification plan: predictions are made on
/// the nullified view of the input. The wrapped model is never modified.
#[derive(Clone, Debug)]
pub struct MaskedTeacher {
    pub model: Model,
    pub plan: NullifyPlan,
}

/// Wrap a teacher so its inputs pass through the plan first.
pub fn masked_teacher(teacher: &Model, plan: &NullifyPlan) -> MaskedTeacher {
    MaskedTeacher { model: teacher.clone(), plan: plan.clone() }
}

impl MaskedTeacher {
    /// Probabilities on the nullified view of `x`.
    pub fn predict_proba(&self, x: &Mat) -> Mat {
        self.model.predict_proba(&apply_nullify(x, &self.plan))
    }

    /// Accuracy on the nullified view of `x`.
    pub fn evaluate(&self, x: &Mat, y: &[usize]) -> f64 {
        evaluate(&self.model, &apply_nullify(x, &self.plan), y)
    }
}

/// Feature-selection accuracy of a saliency vector against ground-truth
/// roles: channels are ranked by salience (descending, ties toward the
/// lower index), the top `k` are predicted general where `k` is the true
/// general count, and the score is `(TP + TN) / d`.
pub fn fs_accuracy(saliency: &SaliencyVector, roles: &[Role]) -> f64 {
    let d = roles.len();
    assert_eq!(saliency.values.len(), d, "one salience score per channel");
    let k = roles.iter().filter(|&&r| r == Role::General).count();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        saliency.values[b].partial_cmp(&saliency.values[a]).unwrap().then(a.cmp(&b))
    });
    let mut correct = 0usize;
    for (rank, &j) in order.iter().enumerate() {
        let predicted_general = rank < k;
        let is_general = roles[j] == Role::General;
        if predicted_general == is_general {
            correct += 1;
        }
    }
    correct as f64 / d.max(1) as f64
}
