//! Classifier models with a flat-parameter interface, and the shared
//! full-batch gradient-descent loop.
//!
//! Three model kinds cover the laboratory's needs: a binary logistic
//! regressor (one logit), a softmax-linear classifier, and a one-hidden-
//! layer rectifier network. All expose their parameters as a single flat
//! `Vec<f64>` so training, finite-difference checks, and serialization can
//! be model-agnostic.
//!
//! The GD loop is deterministic full-batch descent with a persistent step:
//! it starts at `lr`, halves on a loss increase (at most 30 times per
//! iteration), and tolerates float-noise plateaus by accepting candidates
//! within `1e-12 * (1 + |loss|)` of the current loss. The returned model is
//! the best-loss iterate seen, so the final training loss never exceeds
//! the initial one.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::csvio;
use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Mat};
use crate::losses::{accuracy, ce_loss, sigmoid, softmax_rows};

/// Model architecture selector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Binary logistic regression: a single logit, probabilities
    /// `[1 - sigma(z), sigma(z)]`.
    Logistic,
    /// Linear softmax classifier with `classes` outputs.
    Softmax { classes: usize },
    /// One-hidden-layer rectifier network with softmax output.
    Mlp1 { hidden: usize, classes: usize },
}

/// A classifier with flat parameter storage.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    kind: ModelKind,
    d_in: usize,
    bias: bool,
    params: Vec<f64>,
}

impl Model {
    /// Number of parameters for a given shape.
    fn param_count(kind: &ModelKind, d_in: usize, bias: bool) -> usize {
        let b = usize::from(bias);
        match kind {
            ModelKind::Logistic => d_in + b,
            ModelKind::Softmax { classes } => (d_in + b) * classes,
            ModelKind::Mlp1 { hidden, classes } => {
                (d_in + b) * hidden + (hidden + b) * classes
            }
        }
    }

    /// Zero-initialized model. Linear models train fine from zero; the
    /// hidden-layer kind needs [`Model::new_seeded`] to break symmetry.
    pub fn new(kind: ModelKind, d_in: usize, bias: bool) -> Model {
        let params = vec![0.0; Self::param_count(&kind, d_in, bias)];
        Model { kind, d_in, bias, params }
    }

    /// Model with seeded-normal initialization (standard deviation 0.1)
    /// for the hidden-layer kind; linear kinds stay zero-initialized so
    /// training is deterministic regardless of the generator.
    pub fn new_seeded(kind: ModelKind, d_in: usize, bias: bool, rng: &mut impl Rng) -> Model {
        let mut model = Model::new(kind, d_in, bias);
        if matches!(model.kind, ModelKind::Mlp1 { .. }) {
            for p in &mut model.params {
                let z: f64 = rng.sample(StandardNormal);
                *p = 0.1 * z;
            }
        }
        model
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn has_bias(&self) -> bool {
        self.bias
    }

    /// Number of classes this model distinguishes.
    pub fn n_classes(&self) -> usize {
        match &self.kind {
            ModelKind::Logistic => 2,
            ModelKind::Softmax { classes } => *classes,
            ModelKind::Mlp1 { classes, .. } => *classes,
        }
    }

    /// Number of raw logits the model produces per sample.
    pub fn n_logits(&self) -> usize {
        match &self.kind {
            ModelKind::Logistic => 1,
            ModelKind::Softmax { classes } => *classes,
            ModelKind::Mlp1 { classes, .. } => *classes,
        }
    }

    /// Flat parameter vector.
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Replace the flat parameter vector (length must match).
    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.params.len(), "parameter count mismatch");
        self.params.copy_from_slice(params);
    }

    /// Hidden activations for the hidden-layer kind: `relu(x W1 + b1)`.
    fn hidden_acts(&self, x: &Mat, hidden: usize) -> Mat {
        let b = usize::from(self.bias);
        let w1 = &self.params[..(self.d_in + b) * hidden];
        Mat::from_fn(x.rows(), hidden, |r, h| {
            let mut z = 0.0;
            for (j, &xv) in x.row(r).iter().enumerate() {
                z += xv * w1[j * hidden + h];
            }
            if self.bias {
                z += w1[self.d_in * hidden + h];
            }
            z.max(0.0)
        })
    }

    /// Raw logits, `n x n_logits`.
    pub fn logits(&self, x: &Mat) -> Mat {
        assert_eq!(x.cols(), self.d_in, "input width must match model");
        let b = usize::from(self.bias);
        match &self.kind {
            ModelKind::Logistic => Mat::from_fn(x.rows(), 1, |r, _| {
                let mut z = crate::linalg::dot(x.row(r), &self.params[..self.d_in]);
                if self.bias {
                    z += self.params[self.d_in];
                }
                z
            }),
            ModelKind::Softmax { classes } => {
                let k = *classes;
                Mat::from_fn(x.rows(), k, |r, c| {
                    let mut z = 0.0;
                    for (j, &xv) in x.row(r).iter().enumerate() {
                        z += xv * self.params[j * k + c];
                    }
                    if self.bias {
                        z += self.params[self.d_in * k + c];
                    }
                    z
                })
            }
            ModelKind::Mlp1 { hidden, classes } => {
                let h = self.hidden_acts(x, *hidden);
                let k = *classes;
                let w2 = &self.params[(self.d_in + b) * hidden..];
                Mat::from_fn(x.rows(), k, |r, c| {
                    let mut z = 0.0;
                    for (j, &hv) in h.row(r).iter().enumerate() {
                        z += hv * w2[j * k + c];
                    }
                    if self.bias {
                        z += w2[hidden * k + c];
                    }
                    z
                })
            }
        }
    }

    /// Class probabilities, `n x n_classes`.
    pub fn predict_proba(&self, x: &Mat) -> Mat {
        let z = self.logits(x);
        match &self.kind {
            ModelKind::Logistic => Mat::from_fn(x.rows(), 2, |r, c| {
                let p = sigmoid(z.at(r, 0));
                if c == 1 {
                    p
                } else {
                    1.0 - p
                }
            }),
            _ => softmax_rows(&z),
        }
    }

    /// Parameter gradient given the loss gradient with respect to the raw
    /// logits (`n x n_logits`).
    pub fn grad_from_dlogits(&self, x: &Mat, dz: &Mat) -> Vec<f64> {
        assert_eq!(dz.rows(), x.rows());
        assert_eq!(dz.cols(), self.n_logits());
        let b = usize::from(self.bias);
        let mut grad = vec![0.0; self.params.len()];
        match &self.kind {
            ModelKind::Logistic => {
                for r in 0..x.rows() {
                    let g = dz.at(r, 0);
                    if g == 0.0 {
                        continue;
                    }
                    for (j, &xv) in x.row(r).iter().enumerate() {
                        grad[j] += g * xv;
                    }
                    if self.bias {
                        grad[self.d_in] += g;
                    }
                }
            }
            ModelKind::Softmax { classes } => {
                let k = *classes;
                for r in 0..x.rows() {
                    for (j, &xv) in x.row(r).iter().enumerate() {
                        if xv == 0.0 {
                            continue;
                        }
                        for c in 0..k {
                            grad[j * k + c] += xv * dz.at(r, c);
                        }
                    }
                    if self.bias {
                        for c in 0..k {
                            grad[self.d_in * k + c] += dz.at(r, c);
                        }
                    }
                }
            }
            ModelKind::Mlp1 { hidden, classes } => {
                let (hn, k) = (*hidden, *classes);
                let h = self.hidden_acts(x, hn);
                let w1_len = (self.d_in + b) * hn;
                let w2 = &self.params[w1_len..];
                let (g1, g2) = grad.split_at_mut(w1_len);
                for r in 0..x.rows() {
                    // Output layer.
                    for (j, &hv) in h.row(r).iter().enumerate() {
                        for c in 0..k {
                            g2[j * k + c] += hv * dz.at(r, c);
                        }
                    }
                    if self.bias {
                        for c in 0..k {
                            g2[hn * k + c] += dz.at(r, c);
                        }
                    }
                    // Backprop through the rectifier (derivative 0 at the kink).
                    for (j, &hv) in h.row(r).iter().enumerate() {
                        if hv <= 0.0 {
                            continue;
                        }
                        let mut dh = 0.0;
                        for c in 0..k {
                            dh += dz.at(r, c) * w2[j * k + c];
                        }
                        if dh == 0.0 {
                            continue;
                        }
                        for (i, &xv) in x.row(r).iter().enumerate() {
                            g1[i * hn + j] += dh * xv;
                        }
                        if self.bias {
                            g1[self.d_in * hn + j] += dh;
                        }
                    }
                }
            }
        }
        grad
    }

    /// Serialize as `tensor_name, index, value` rows.
    pub fn save_csv<P: AsRef<std::path::Path>>(&self, path: P) -> Result<()> {
        let mut rows = Vec::with_capacity(self.params.len());
        for (name, slice) in self.tensors() {
            for (i, &v) in slice.iter().enumerate() {
                rows.push(vec![name.to_string(), i.to_string(), csvio::fmt_f64(v)]);
            }
        }
        csvio::write_csv(path, &["tensor_name", "index", "value"], rows)
    }

    /// Load parameters saved by [`Model::save_csv`] into a model of the
    /// same shape. Every tensor must be present and completely filled.
    pub fn load_csv<P: AsRef<std::path::Path>>(template: &Model, path: P) -> Result<Model> {
        let (header, rows) = csvio::read_csv(&path)?;
        if header != ["tensor_name", "index", "value"] {
            return Err(Error::Config(format!(
                "unexpected model CSV header: {}",
                header.join(",")
            )));
        }
        let mut model = template.clone();
        let spans: Vec<(String, std::ops::Range<usize>)> = model.tensor_spans();
        let mut filled = vec![false; model.params.len()];
        for (line, row) in rows.iter().enumerate() {
            let ctx = format!("model CSV line {}", line + 2);
            let name = &row[0];
            let idx = csvio::parse_usize(&row[1], &ctx)?;
            let value = csvio::parse_f64(&row[2], &ctx)?;
            let span = spans
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| Error::Config(format!("{ctx}: unknown tensor '{name}'")))?;
            let range = span.1.clone();
            if idx >= range.len() {
                return Err(Error::Config(format!(
                    "{ctx}: index {idx} out of bounds for tensor '{name}' of size {}",
                    range.len()
                )));
            }
            model.params[range.start + idx] = value;
            filled[range.start + idx] = true;
        }
        if let Some(missing) = filled.iter().position(|&f| !f) {
            return Err(Error::Config(format!(
                "model CSV is incomplete: flat parameter {missing} never set"
            )));
        }
        Ok(model)
    }

    /// Named tensors as `(name, slice)` pairs, in canonical order.
    fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        self.tensor_spans()
            .into_iter()
            .map(|(name, range)| {
                let slice = &self.params[range];
                let name: &'static str = match name.as_str() {
                    "w" => "w",
                    "w1" => "w1",
                    "w2" => "w2",
                    _ => unreachable!(),
                };
                (name, slice)
            })
            .collect()
    }

    fn tensor_spans(&self) -> Vec<(String, std::ops::Range<usize>)> {
        let b = usize::from(self.bias);
        match &self.kind {
            ModelKind::Logistic | ModelKind::Softmax { .. } => {
                vec![("w".to_string(), 0..self.params.len())]
            }
            ModelKind::Mlp1 { hidden, .. } => {
                let w1_len = (self.d_in + b) * hidden;
                vec![
                    ("w1".to_string(), 0..w1_len),
                    ("w2".to_string(), w1_len..self.params.len()),
                ]
            }
        }
    }
}

/// Options for the full-batch gradient-descent loop.
#[derive(Clone, Debug, PartialEq)]
pub struct GdOptions {
    /// Base step size; also the persistent step's starting value.
    pub lr: f64,
    /// Iteration cap (accepted steps).
    pub max_iters: usize,
    /// Convergence threshold on the infinity norm of the gradient.
    pub tol: f64,
    /// Probability clamp used inside the losses (documented default 1e-12;
    /// the losses use their module-level clamp — this field records it in
    /// configs and run metadata).
    pub prob_clamp: f64,
}

impl Default for GdOptions {
    fn default() -> Self {
        GdOptions { lr: 0.1, max_iters: 5000, tol: 1e-6, prob_clamp: 1e-12 }
    }
}

/// Outcome of a GD run.
#[derive(Clone, Debug)]
pub struct TrainReport {
    /// Accepted steps taken.
    pub iters: usize,
    /// Whether the gradient tolerance was met within the iteration cap.
    pub converged: bool,
    pub initial_loss: f64,
    pub final_loss: f64,
    /// Step size at exit (persists across iterations, halved on rejects).
    pub final_step: f64,
}

/// Core descent loop over a flat parameter vector.
///
/// `eval` returns `(loss, gradient)` at a parameter vector. Candidates are
/// accepted when their loss does not exceed the current loss beyond float
/// noise (`1e-12 * (1 + |loss|)`); on rejection the persistent step halves,
/// and after 30 consecutive rejections the loop stops. The best-loss
/// iterate is returned, which makes "final loss <= initial loss" exact.
pub fn gd_core(
    init: Vec<f64>,
    opts: &GdOptions,
    eval: impl Fn(&[f64]) -> (f64, Vec<f64>),
) -> (Vec<f64>, TrainReport) {
    let (mut loss, mut grad) = eval(&init);
    let mut params = init;
    let initial_loss = loss;
    let mut best_params = params.clone();
    let mut best_loss = loss;
    let mut step = opts.lr;
    let mut iters = 0;
    let mut converged = false;
    for _ in 0..opts.max_iters {
        if norm_inf(&grad) <= opts.tol {
            converged = true;
            break;
        }
        let mut accepted = false;
        for _ in 0..=30 {
            let cand: Vec<f64> =
                params.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
            let (cand_loss, cand_grad) = eval(&cand);
            if cand_loss <= loss + 1e-12 * (1.0 + loss.abs()) {
                params = cand;
                loss = cand_loss;
                grad = cand_grad;
                accepted = true;
                if loss < best_loss {
                    best_loss = loss;
                    best_params.copy_from_slice(&params);
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        iters += 1;
    }
    if !converged && norm_inf(&grad) <= opts.tol {
        converged = true;
    }
    (
        best_params,
        TrainReport { iters, converged, initial_loss, final_loss: best_loss, final_step: step },
    )
}

/// Gradient of the blended objective with respect to the raw logits, for
/// probabilities `p`, per-sample teacher probabilities `t` (may be `None`
/// when `rho = 1`), hard labels `y`, and blend weight `rho`.
///
/// For the single-logit kind this is `(rho (p - y) + (1-rho)(p - t)) / n`
/// on the positive-class probability; for softmax kinds the same formula
/// applies per class with one-hot `y`.
///
/// Combined with [`Model::grad_from_dlogits`] this yields the exact
/// parameter gradient of the blended objective, which downstream checks
/// compare against finite differences.
pub fn blended_dlogits(
    model: &Model,
    probs: &Mat,
    teacher: Option<&Mat>,
    y: &[usize],
    rho: f64,
) -> Mat {
    let n = y.len() as f64;
    match model.n_logits() {
        1 => Mat::from_fn(probs.rows(), 1, |r, _| {
            let p = probs.at(r, 1);
            let hard = p - (y[r] == 1) as usize as f64;
            let soft = teacher.map_or(0.0, |t| p - t.at(r, 1));
            (rho * hard + (1.0 - rho) * soft) / n
        }),
        k => Mat::from_fn(probs.rows(), k, |r, c| {
            let p = probs.at(r, c);
            let hard = p - f64::from(y[r] == c);
            let soft = teacher.map_or(0.0, |t| p - t.at(r, c));
            (rho * hard + (1.0 - rho) * soft) / n
        }),
    }
}

/// Train a model on hard labels by full-batch GD on the mean cross-entropy.
///
/// Returns the trained model and a report. The input model is the
/// initialization and is not modified.
pub fn train_ce(init: &Model, x: &Mat, y: &[usize], opts: &GdOptions) -> (Model, TrainReport) {
    let eval = |params: &[f64]| {
        let mut m = init.clone();
        m.set_params(params);
        let probs = m.predict_proba(x);
        let loss = ce_loss(&probs, y);
        let dz = blended_dlogits(&m, &probs, None, y, 1.0);
        (loss, m.grad_from_dlogits(x, &dz))
    };
    let (params, report) = gd_core(init.params().to_vec(), opts, eval);
    let mut out = init.clone();
    out.set_params(&params);
    (out, report)
}

/// Accuracy of a model on a labeled set (argmax decoding, ties to the
/// lowest class index).
pub fn evaluate(model: &Model, x: &Mat, y: &[usize]) -> f64 {
    accuracy(&model.predict_proba(x), y)
}
