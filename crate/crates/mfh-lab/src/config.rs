//! Run configuration: a fail-closed JSON file with complete defaults.
//!
//! Every field has a default, so an empty object `{}` is a valid config;
//! unknown fields are rejected (typos must not silently fall back to
//! defaults), and parse errors carry the line and column.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GdOptions;

/// Optimizer settings as they appear in config files.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GdConfig {
    /// Initial step size of the halving line search.
    pub lr: f64,
    /// Iteration budget.
    pub max_iters: usize,
    /// Convergence tolerance on the gradient's max-norm.
    pub tol: f64,
}

impl Default for GdConfig {
    fn default() -> Self {
        let o = GdOptions::default();
        GdConfig { lr: o.lr, max_iters: o.max_iters, tol: o.tol }
    }
}

impl GdConfig {
    pub fn to_options(&self) -> GdOptions {
        GdOptions { lr: self.lr, max_iters: self.max_iters, tol: self.tol, ..GdOptions::default() }
    }
}

/// Full experiment configuration.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Master seed; one knob reseeds every stream in the run.
    pub master_seed: u64,
    /// Seeds per sweep point (independent replicates).
    pub n_seeds: usize,
    /// Training samples per replicate in the Gaussian sweeps.
    pub n_train: usize,
    /// Held-out samples per replicate.
    pub n_test: usize,
    /// Mixing weight of the hard-label term in the distillation loss
    /// used by the Gaussian sweeps.
    pub rho: f64,
    /// Mixing weight used by the nullification studies (pure soft-label
    /// distillation by default).
    pub nullify_rho: f64,
    /// Training samples per replicate in the ranking studies.
    pub ranking_n_train: usize,
    /// Permutation repeats per channel when ranking.
    pub perm_repeats: usize,
    /// Overlap sizes for the overlap sweep (shared channels out of 10
    /// per side).
    pub gamma_overlaps: Vec<usize>,
    /// Teacher channel counts for the teacher-exclusive sweep.
    pub alpha_totals: Vec<usize>,
    /// Shared channel counts for the headline comparison (out of 20
    /// decisive channels).
    pub table2_shared: Vec<usize>,
    /// Nullified-channel ratios for the nullification sweep.
    pub nullify_ratios: Vec<f64>,
    /// `(k, c)` geometry pairs for the ranking evaluation: each side
    /// has `k` decisive channels, `c` of them shared.
    pub ranking_specs: Vec<(usize, usize)>,
    /// Permutation-repeat counts for the ablation.
    pub ablate_m_grid: Vec<usize>,
    /// Instances for the bound verification run.
    pub theorem_instances: usize,
    /// Optimizer settings shared by all training stages.
    pub gd: GdConfig,
    /// Worker threads for seed-parallel sweeps; zero means one per core.
    pub jobs: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            master_seed: 59,
            n_seeds: 10,
            n_train: 200,
            n_test: 1000,
            rho: 0.5,
            nullify_rho: 0.0,
            ranking_n_train: 1000,
            perm_repeats: 5,
            gamma_overlaps: vec![0, 2, 4, 6, 8, 10],
            alpha_totals: vec![10, 13, 17, 25, 50],
            table2_shared: vec![5, 10, 15],
            nullify_ratios: vec![0.0, 0.25, 0.5, 0.75, 0.9],
            ranking_specs: vec![(10, 5), (12, 8), (10, 8), (14, 12)],
            ablate_m_grid: vec![1, 2, 5, 10, 20],
            theorem_instances: 100,
            gd: GdConfig::default(),
            jobs: 0,
        }
    }
}

impl Config {
    /// Sanity checks beyond what serde enforces.
    pub fn validate(&self) -> Result<()> {
        fn bail(msg: String) -> Result<()> {
            Err(Error::Config(msg))
        }
        if self.n_seeds == 0 {
            return bail("n_seeds must be positive".to_string());
        }
        if self.n_train == 0 || self.n_test == 0 || self.ranking_n_train == 0 {
            return bail("sample counts must be positive".to_string());
        }
        if !(0.0..=1.0).contains(&self.rho) || !(0.0..=1.0).contains(&self.nullify_rho) {
            return bail(format!(
                "mixing weights must lie in [0, 1], got rho {} and nullify_rho {}",
                self.rho, self.nullify_rho
            ));
        }
        if self.perm_repeats == 0 {
            return bail("perm_repeats must be positive".to_string());
        }
        if self.gamma_overlaps.is_empty()
            || self.alpha_totals.is_empty()
            || self.table2_shared.is_empty()
            || self.nullify_ratios.is_empty()
            || self.ranking_specs.is_empty()
            || self.ablate_m_grid.is_empty()
        {
            return bail("every sweep grid must be nonempty".to_string());
        }
        for &r in &self.nullify_ratios {
            if !(0.0..=1.0).contains(&r) {
                return bail(format!("nullify ratios must lie in [0, 1], got {r}"));
            }
        }
        if self.gd.lr <= 0.0 || self.gd.max_iters == 0 || self.gd.tol <= 0.0 {
            return bail("optimizer settings must be positive".to_string());
        }
        if self.theorem_instances == 0 {
            return bail("theorem_instances must be positive".to_string());
        }
        Ok(())
    }

    /// Optimizer options derived from the config.
    pub fn gd_options(&self) -> GdOptions {
        self.gd.to_options()
    }
}

/// Load a config file, failing closed: unknown fields, malformed JSON,
/// and out-of-range values are all errors (exit code 2 at the CLI).
pub fn load_config<P: AsRef<std::path::Path>>(path: P) -> Result<Config> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    let cfg: Config = serde_json::from_str(&text).map_err(|e| {
        Error::Config(format!(
            "config {}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_yields_defaults() {
        let cfg: Config = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.master_seed, 59);
        assert_eq!(cfg.n_seeds, 10);
        assert_eq!(cfg.n_train, 200);
        assert_eq!(cfg.n_test, 1000);
        assert_eq!(cfg.rho, 0.5);
        assert_eq!(cfg.nullify_rho, 0.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_fields_are_rejected_with_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, "{\n  \"master_sead\": 3\n}").unwrap();
        let err = load_config(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("master_sead"), "message names the bad field: {msg}");
        assert!(msg.contains(":2:"), "message carries the line: {msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn malformed_json_reports_line_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, "{\n  \"n_seeds\": 5,\n}").unwrap();
        let err = load_config(&path).unwrap_err();
        assert!(err.to_string().contains(":3:"), "trailing comma is on line 3: {err}");
    }

    #[test]
    fn out_of_range_values_fail_validation() {
        let cfg = Config { rho: 1.5, ..Config::default() };
        assert!(cfg.validate().is_err());
        let cfg = Config { n_seeds: 0, ..Config::default() };
        assert!(cfg.validate().is_err());
        let cfg = Config { nullify_ratios: vec![0.5, -0.1], ..Config::default() };
        assert!(cfg.validate().is_err());
        let cfg = Config { ablate_m_grid: vec![], ..Config::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = Config {
            master_seed: 99,
            rho: 0.25,
            gamma_overlaps: vec![0, 10],
            gd: GdConfig { lr: 0.05, max_iters: 123, tol: 1e-7 },
            ..Config::default()
        };
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: Config = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let cfg: Config =
            serde_json::from_str("{\"n_seeds\": 3, \"gd\": {\"max_iters\": 70}}").unwrap();
        assert_eq!(cfg.n_seeds, 3);
        assert_eq!(cfg.gd.max_iters, 70);
        assert_eq!(cfg.gd.lr, GdConfig::default().lr);
        assert_eq!(cfg.n_train, 200);
    }
}
