//! Synthetic multimodal Gaussian data with controllable channel overlap.
//!
//! A latent factor vector `x* ~ N(0, I_d)` carries the label:
//! `y = 1` iff `<delta, x*> > 0` (ties go to class 0) for a direction
//! `delta` drawn once per dataset. Each modality observes fresh Gaussian
//! noise in every channel, except that channels indexed by its decisive
//! set (`J1` for modality a, `J2` for modality b) are overwritten by the
//! latent coordinates with the *same index* — so shared indices are
//! bit-identical across modalities.
//!
//! Channel roles follow from the index sets: a channel of modality a is
//! *general* if its index is in `J1 ∩ J2` (both modalities observe it),
//! *specific* if in `J1 \ J2` (only this modality observes it), and
//! *noise* otherwise. Latent coordinates outside `J1 ∪ J2` influence the
//! label but are observed by neither modality; they act as label noise
//! and cap the reachable accuracy.
//!
//! Overlap statistics are exact rationals of set sizes:
//! `gamma = |J1 ∩ J2| / |J1 ∪ J2|` measures how much of the decisive
//! information is shared, and `alpha = 1 - |J2| / |J1 ∪ J2|`
//! (resp. `beta` with `J1`) how much modality b (resp. a) misses.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::csvio;
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Role of an observed channel within its modality.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// Decisive and observed by both modalities.
    General,
    /// Decisive and observed only by this modality.
    Specific,
    /// Pure noise: carries no label information.
    Noise,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::General => "general",
            Role::Specific => "specific",
            Role::Noise => "noise",
        }
    }
}

/// Distribution of the label direction `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaLaw {
    /// Each component standard normal.
    StandardNormal,
    /// Each component `sign * U(0.5, 1.5)`: zero-mean and symmetric, with
    /// magnitude bounded away from zero so every decisive channel carries
    /// a rankable amount of label information.
    BoundedSym,
}

/// Draw a label direction of length `d` from the given law.
pub fn draw_delta(law: DeltaLaw, d: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..d)
        .map(|_| match law {
            DeltaLaw::StandardNormal => rng.sample::<f64, _>(StandardNormal),
            DeltaLaw::BoundedSym => {
                let mag: f64 = rng.gen_range(0.5..1.5);
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                sign * mag
            }
        })
        .collect()
}

/// Geometry of a synthetic multimodal dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MvdSpec {
    /// Channels in modality a.
    pub d1: usize,
    /// Channels in modality b.
    pub d2: usize,
    /// Latent factor dimension.
    pub d: usize,
    /// Decisive latent indices observed by modality a.
    pub j1: Vec<usize>,
    /// Decisive latent indices observed by modality b.
    pub j2: Vec<usize>,
}

impl MvdSpec {
    /// Validate the geometry: index sets must be strictly increasing,
    /// within the latent dimension, the latent dimension must fit inside
    /// both modalities (same-index copy), and at least one latent
    /// coordinate must be decisive.
    pub fn validate(&self) -> Result<()> {
        if self.d > self.d1.min(self.d2) {
            return Err(Error::Invalid(format!(
                "latent dimension d={} must not exceed min(d1, d2) = {} for same-index channel copy",
                self.d,
                self.d1.min(self.d2)
            )));
        }
        for (name, set) in [("j1", &self.j1), ("j2", &self.j2)] {
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Invalid(format!(
                    "index set {name} must be strictly increasing"
                )));
            }
            if set.last().is_some_and(|&m| m >= self.d) {
                return Err(Error::Invalid(format!(
                    "index set {name} exceeds the latent dimension {}",
                    self.d
                )));
            }
        }
        if self.union_size() == 0 {
            return Err(Error::Invalid(
                "J1 and J2 are both empty: no decisive coordinates".to_string(),
            ));
        }
        Ok(())
    }

    pub fn intersection_size(&self) -> usize {
        self.j1.iter().filter(|j| self.j2.binary_search(j).is_ok()).count()
    }

    pub fn union_size(&self) -> usize {
        self.j1.len() + self.j2.len() - self.intersection_size()
    }

    /// Roles of modality-a channels, indexed by channel.
    pub fn roles_a(&self) -> Vec<Role> {
        (0..self.d1).map(|j| self.role_of(j, &self.j1, &self.j2)).collect()
    }

    /// Roles of modality-b channels, indexed by channel.
    pub fn roles_b(&self) -> Vec<Role> {
        (0..self.d2).map(|j| self.role_of(j, &self.j2, &self.j1)).collect()
    }

    fn role_of(&self, j: usize, own: &[usize], other: &[usize]) -> Role {
        if own.binary_search(&j).is_ok() {
            if other.binary_search(&j).is_ok() {
                Role::General
            } else {
                Role::Specific
            }
        } else {
            Role::Noise
        }
    }
}

/// Shared-information ratio `|J1 ∩ J2| / |J1 ∪ J2|`, exact in the sense
/// that it is computed from integer set sizes.
pub fn gamma_of(spec: &MvdSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.intersection_size() as f64 / spec.union_size() as f64)
}

/// Fraction of decisive information missed by modality b:
/// `1 - |J2| / |J1 ∪ J2|`.
pub fn alpha_of(spec: &MvdSpec) -> Result<f64> {
    spec.validate()?;
    Ok(1.0 - spec.j2.len() as f64 / spec.union_size() as f64)
}

/// Fraction of decisive information missed by modality a:
/// `1 - |J1| / |J1 ∪ J2|`.
pub fn beta_of(spec: &MvdSpec) -> Result<f64> {
    spec.validate()?;
    Ok(1.0 - spec.j1.len() as f64 / spec.union_size() as f64)
}

/// A sampled dataset: per-modality observations, labels, and channel roles.
#[derive(Clone, Debug)]
pub struct MultimodalDataset {
    pub xa: Mat,
    pub xb: Mat,
    pub y: Vec<usize>,
    pub roles_a: Vec<Role>,
    pub roles_b: Vec<Role>,
}

impl MultimodalDataset {
    pub fn n(&self) -> usize {
        self.y.len()
    }
}

/// Draw `n` samples from the spec's generative process.
///
/// Consumption order from `rng` is fixed and documented (latent factors
/// row-major, then modality-a noise, then modality-b noise), so the
/// latent block can be regenerated independently for bit-identity checks.
pub fn sample(spec: &MvdSpec, delta: &[f64], n: usize, rng: &mut impl Rng) -> Result<MultimodalDataset> {
    spec.validate()?;
    if delta.len() != spec.d {
        return Err(Error::Invalid(format!(
            "delta length {} does not match latent dimension {}",
            delta.len(),
            spec.d
        )));
    }
    let xs = Mat::from_fn(n, spec.d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut xa = Mat::from_fn(n, spec.d1, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut xb = Mat::from_fn(n, spec.d2, |_, _| rng.sample::<f64, _>(StandardNormal));
    for r in 0..n {
        for &j in &spec.j1 {
            xa.set(r, j, xs.at(r, j));
        }
        for &j in &spec.j2 {
            xb.set(r, j, xs.at(r, j));
        }
    }
    let y: Vec<usize> = (0..n)
        .map(|r| usize::from(crate::linalg::dot(xs.row(r), delta) > 0.0))
        .collect();
    Ok(MultimodalDataset { xa, xb, y, roles_a: spec.roles_a(), roles_b: spec.roles_b() })
}

/// Gamma-sweep geometry: `d1=25, d2=50, d=20`, ten decisive channels per
/// modality (`J1 = {0..9}`, `J2 = {10-overlap..19-overlap}`), so
/// `gamma = overlap / (20 - overlap)` walks {0, 1/9, 1/4, 3/7, 2/3, 1} as
/// `overlap` walks {0, 2, 4, 6, 8, 10}. The label direction for this
/// builder is standard normal.
pub fn build_gamma_point(overlap: usize) -> Result<MvdSpec> {
    if !(overlap <= 10 && overlap % 2 == 0) {
        return Err(Error::Invalid(format!(
            "overlap must be one of {{0, 2, 4, 6, 8, 10}}, got {overlap}"
        )));
    }
    let spec = MvdSpec {
        d1: 25,
        d2: 50,
        d: 20,
        j1: (0..10).collect(),
        j2: (10 - overlap..20 - overlap).collect(),
    };
    spec.validate()?;
    Ok(spec)
}

/// Alpha-sweep geometry: both modalities have 50 channels, the latent
/// dimension is fixed at 50, modality b always observes `J2 = {0..9}`,
/// and modality a observes a growing prefix `J1 = {0..d_total-1}`, so
/// `alpha = 1 - 10/d_total` while `beta = 0`. Latent coordinates beyond
/// `d_total` stay hidden from both modalities and act as label noise that
/// shrinks as the teacher modality waxes — this keeps the teacher's
/// accuracy strictly informative about `d_total` (a latent dimension tied
/// to `d_total` would make trained accuracy invariant across points by
/// rotation symmetry).
pub fn build_alpha_point(d_total: usize) -> Result<MvdSpec> {
    if !(10..=50).contains(&d_total) {
        return Err(Error::Invalid(format!(
            "d_total must lie in 10..=50, got {d_total}"
        )));
    }
    let spec = MvdSpec {
        d1: 50,
        d2: 50,
        d: 50,
        j1: (0..d_total).collect(),
        j2: (0..10).collect(),
    };
    spec.validate()?;
    Ok(spec)
}

/// Five-column-table geometry: `d1=25, d2=50, d=21`, the teacher modality
/// observes `J1 = {0..19}`, the student modality a nested prefix
/// `J2 = {0..shared-1}` (so `gamma = shared/20` exactly and `beta = 0`),
/// and one latent coordinate stays hidden from both modalities. The
/// hidden coordinate pins the well-trained teacher near 90% while the
/// nested prefix controls how much of its knowledge the student can see.
pub fn build_table2_point(shared: usize) -> Result<MvdSpec> {
    if !(1..=20).contains(&shared) {
        return Err(Error::Invalid(format!(
            "shared channel count must lie in 1..=20, got {shared}"
        )));
    }
    let spec = MvdSpec {
        d1: 25,
        d2: 50,
        d: 21,
        j1: (0..20).collect(),
        j2: (0..shared).collect(),
    };
    spec.validate()?;
    Ok(spec)
}

/// Feature-ranking geometry family parameterized by the per-modality
/// decisive count `k` and the shared count `c`: `J1 = {0..k-1}`,
/// `J2 = {k-c..2k-c-1}`, latent dimension `2k-c` (every latent coordinate
/// is decisive for some modality), `d1=25, d2=50`. `gamma = c/(2k-c)`.
pub fn build_ranking_point(k: usize, c: usize) -> Result<MvdSpec> {
    if c == 0 || c > k {
        return Err(Error::Invalid(format!(
            "shared count c={c} must satisfy 1 <= c <= k={k}"
        )));
    }
    let d = 2 * k - c;
    if d > 25 {
        return Err(Error::Invalid(format!(
            "ranking geometry needs 2k-c <= 25 to fit modality a, got {d}"
        )));
    }
    let spec = MvdSpec { d1: 25, d2: 50, d, j1: (0..k).collect(), j2: (k - c..d).collect() };
    spec.validate()?;
    Ok(spec)
}

/// Nullification-sweep geometry: the teacher modality is all-decisive —
/// `d1 = d = 16`, `J1 = {0..15}` (8 specific channels {0..7} and 8 general
/// {8..15}), student modality `d2=50` with `J2 = {8..15}`. With no noise
/// channels in the teacher modality, the low-salience pool is exactly the
/// specific set, so ranked nullification sweeps cleanly from "remove
/// specifics" to "remove generals" as the ratio grows.
pub fn build_nullify_point() -> MvdSpec {
    MvdSpec { d1: 16, d2: 50, d: 16, j1: (0..16).collect(), j2: (8..16).collect() }
}

/// Write a dataset as CSV: `sample_id, y, a_0.., b_0..` plus a roles
/// sidecar `<stem>.roles.csv` with rows `modality, channel, role`.
pub fn write_dataset_csv<P: AsRef<std::path::Path>>(ds: &MultimodalDataset, path: P) -> Result<()> {
    let path = path.as_ref();
    let d1 = ds.xa.cols();
    let d2 = ds.xb.cols();
    let mut header: Vec<String> = vec!["sample_id".into(), "y".into()];
    header.extend((0..d1).map(|j| format!("a_{j}")));
    header.extend((0..d2).map(|j| format!("b_{j}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..ds.n()).map(|r| {
        let mut row = Vec::with_capacity(2 + d1 + d2);
        row.push(r.to_string());
        row.push(ds.y[r].to_string());
        row.extend(ds.xa.row(r).iter().map(|&v| csvio::fmt_f64(v)));
        row.extend(ds.xb.row(r).iter().map(|&v| csvio::fmt_f64(v)));
        row
    });
    csvio::write_csv(path, &header_refs, rows)?;
    let roles_path = roles_sidecar_path(path);
    let role_rows = ds
        .roles_a
        .iter()
        .enumerate()
        .map(|(j, role)| vec!["a".to_string(), j.to_string(), role.as_str().to_string()])
        .chain(
            ds.roles_b
                .iter()
                .enumerate()
                .map(|(j, role)| vec!["b".to_string(), j.to_string(), role.as_str().to_string()]),
        );
    csvio::write_csv(roles_path, &["modality", "channel", "role"], role_rows)
}

/// Path of the roles sidecar for a dataset CSV.
pub fn roles_sidecar_path(path: &std::path::Path) -> std::path::PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_default();
    path.with_file_name(format!("{stem}.roles.csv"))
}

/// Read back a dataset written by [`write_dataset_csv`] (without roles).
pub fn read_dataset_csv<P: AsRef<std::path::Path>>(path: P) -> Result<(Mat, Mat, Vec<usize>)> {
    let path = path.as_ref();
    let (header, rows) = csvio::read_csv(path)?;
    if header.len() < 2 || header[0] != "sample_id" || header[1] != "y" {
        return Err(Error::Config(format!(
            "{}: expected dataset header starting with sample_id,y",
            path.display()
        )));
    }
    let d1 = header.iter().filter(|h| h.starts_with("a_")).count();
    let d2 = header.iter().filter(|h| h.starts_with("b_")).count();
    if 2 + d1 + d2 != header.len() {
        return Err(Error::Config(format!("{}: unrecognized dataset columns", path.display())));
    }
    let n = rows.len();
    let mut xa = Mat::zeros(n, d1);
    let mut xb = Mat::zeros(n, d2);
    let mut y = Vec::with_capacity(n);
    for (r, row) in rows.iter().enumerate() {
        let ctx = format!("{} line {}", path.display(), r + 2);
        y.push(csvio::parse_usize(&row[1], &ctx)?);
        for j in 0..d1 {
            xa.set(r, j, csvio::parse_f64(&row[2 + j], &ctx)?);
        }
        for j in 0..d2 {
            xb.set(r, j, csvio::parse_f64(&row[2 + d1 + j], &ctx)?);
        }
    }
    Ok((xa, xb, y))
}
