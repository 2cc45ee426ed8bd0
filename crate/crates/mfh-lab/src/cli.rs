//! Command-line front end.
//!
//! Subcommands: `gen`, `sweep-gamma`, `sweep-alpha`, `table2`,
//! `sweep-nullify`, `rank-eval`, `ablate-m`, `verify-bound`, `report`.
//!
//! Shared flags: `--config <FILE>` (JSON, fail-closed), `--seed <N>`
//! (master seed; beats the `MFHLAB_SEED` environment variable, which
//! beats the config file), `--out <PATH>`, `--jobs <N>`, and `--plot`.
//!
//! Exit codes: `0` success, `2` configuration or usage error, `3`
//! numerical failure (the failing stage is named in the message).

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::{load_config, Config};
use crate::error::{Error, Result};
use crate::experiments::{
    generate_dataset, run_alpha_sweep, run_gamma_sweep, run_nullify_sweep,
    run_permutation_ablation, run_ranking_eval, run_table2, run_theorem_mc, write_results_csv,
    write_sidecar, ResultRow,
};
use crate::report::{render_report, render_sweep_plots};

#[derive(Parser, Debug)]
#[command(
    name = "mfh-lab",
    version = crate::VERSION,
    about = "Numerical laboratory for crossmodal knowledge distillation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON config file; every field has a default, unknown fields are
    /// rejected
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed (highest precedence; then MFHLAB_SEED, then the
    /// config file)
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (CSV for sweeps and gen, directory for report)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads for seed-parallel sweeps (0 = one per core)
    #[arg(long)]
    jobs: Option<usize>,
    /// Also render SVG plots next to the output CSV
    #[arg(long)]
    plot: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate one dataset CSV (plus a channel-role sidecar)
    Gen {
        #[command(flatten)]
        common: Common,
        /// Geometry family: gamma, alpha, table2, ranking, or nullify
        #[arg(long)]
        builder: String,
        /// Point parameters for the builder (e.g. `--point 4`,
        /// `--point 12,8`); nullify takes none
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        point: Vec<usize>,
        /// Number of samples
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Which replicate's draws to reproduce (sweeps use 0, 1, ...)
        #[arg(long, default_value_t = 0)]
        replicate: u64,
    },
    /// Sweep the shared share of decisive channels
    SweepGamma {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the teacher-exclusive share
    SweepAlpha {
        #[command(flatten)]
        common: Common,
    },
    /// Headline five-model comparison at three overlap levels
    Table2 {
        #[command(flatten)]
        common: Common,
    },
    /// Distill through general/random/specific channel masks
    SweepNullify {
        #[command(flatten)]
        common: Common,
    },
    /// Score permutation salience against ground-truth channel roles
    RankEval {
        #[command(flatten)]
        common: Common,
    },
    /// Ablate the permutation repeat count
    AblateM {
        #[command(flatten)]
        common: Common,
    },
    /// Verify the distillation-risk bound on random instances
    VerifyBound {
        #[command(flatten)]
        common: Common,
    },
    /// Assemble report.md and plots from result CSVs in a directory
    Report {
        #[command(flatten)]
        common: Common,
    },
}

/// Master-seed precedence: explicit flag, then environment, then the
/// config file's value. A present-but-unparsable environment variable
/// is a configuration error, not a silent fallback.
fn resolve_seed(flag: Option<u64>, env: Option<&str>, from_config: u64) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(raw) = env {
        return raw.trim().parse().map_err(|_| {
            Error::Config(format!("MFHLAB_SEED must be an unsigned integer, got '{raw}'"))
        });
    }
    Ok(from_config)
}

/// Load the config (or defaults) and apply flag/environment overrides.
fn effective_config(common: &Common) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => Config::default(),
    };
    let env = std::env::var("MFHLAB_SEED").ok();
    cfg.master_seed = resolve_seed(common.seed, env.as_deref(), cfg.master_seed)?;
    if let Some(jobs) = common.jobs {
        cfg.jobs = jobs;
    }
    Ok(cfg)
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}

/// Shared driver for the six sweep subcommands: sidecar first (null
/// wall time), compute, CSV, optional plots, sidecar again with the
/// measured time.
fn run_sweep(
    common: &Common,
    command_name: &str,
    sweep_kind: &str,
    runner: impl FnOnce(&Config) -> Result<Vec<ResultRow>>,
) -> Result<()> {
    let cfg = effective_config(common)?;
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(crate::report::canonical_results_file(sweep_kind).unwrap_or("results.csv")));
    ensure_parent(&out)?;
    write_sidecar(&out, command_name, &cfg, None)?;
    let start = Instant::now();
    let rows = runner(&cfg)?;
    write_results_csv(&out, &rows)?;
    if common.plot {
        let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
        for (name, svg) in render_sweep_plots(sweep_kind, &rows)? {
            std::fs::write(dir.join(&name), svg)?;
            println!("wrote {}", dir.join(&name).display());
        }
    }
    write_sidecar(&out, command_name, &cfg, Some(start.elapsed().as_secs_f64()))?;
    println!("wrote {} ({} rows)", out.display(), rows.len());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { common, builder, point, n, replicate } => {
            let cfg = effective_config(&common)?;
            let out = common.out.clone().unwrap_or_else(|| PathBuf::from("dataset.csv"));
            ensure_parent(&out)?;
            write_sidecar(&out, "gen", &cfg, None)?;
            let start = Instant::now();
            let (_, ds) = generate_dataset(&builder, &point, n, cfg.master_seed, replicate)?;
            crate::mvd::write_dataset_csv(&ds, &out)?;
            write_sidecar(&out, "gen", &cfg, Some(start.elapsed().as_secs_f64()))?;
            println!(
                "wrote {} ({} samples) and {}",
                out.display(),
                n,
                crate::mvd::roles_sidecar_path(&out).display()
            );
            Ok(())
        }
        Command::SweepGamma { common } => {
            run_sweep(&common, "sweep-gamma", "gamma", run_gamma_sweep)
        }
        Command::SweepAlpha { common } => {
            run_sweep(&common, "sweep-alpha", "alpha", run_alpha_sweep)
        }
        Command::Table2 { common } => run_sweep(&common, "table2", "table2", run_table2),
        Command::SweepNullify { common } => {
            run_sweep(&common, "sweep-nullify", "nullify", run_nullify_sweep)
        }
        Command::RankEval { common } => {
            run_sweep(&common, "rank-eval", "rank_eval", run_ranking_eval)
        }
        Command::AblateM { common } => {
            run_sweep(&common, "ablate-m", "ablate_m", run_permutation_ablation)
        }
        Command::VerifyBound { common } => {
            let cfg = effective_config(&common)?;
            let out =
                common.out.clone().unwrap_or_else(|| PathBuf::from("certificates.csv"));
            ensure_parent(&out)?;
            write_sidecar(&out, "verify-bound", &cfg, None)?;
            let start = Instant::now();
            let certs = run_theorem_mc(&cfg)?;
            crate::theory::write_certificates_csv(&out, &certs)?;
            write_sidecar(&out, "verify-bound", &cfg, Some(start.elapsed().as_secs_f64()))?;
            let held = certs.iter().filter(|c| c.holds).count();
            println!("wrote {} ({held}/{} certified)", out.display(), certs.len());
            Ok(())
        }
        Command::Report { common } => {
            let cfg = effective_config(&common)?;
            let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir)?;
            let marker = dir.join("report.md");
            write_sidecar(&marker, "report", &cfg, None)?;
            let start = Instant::now();
            let written = render_report(&dir)?;
            write_sidecar(&marker, "report", &cfg, Some(start.elapsed().as_secs_f64()))?;
            for path in &written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

/// Parse `std::env::args`, run, and translate errors into exit codes.
pub fn run_from_env() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_subcommand_parses() {
        for args in [
            vec!["mfh-lab", "gen", "--builder", "gamma", "--point", "4"],
            vec!["mfh-lab", "gen", "--builder", "ranking", "--point", "12,8", "--n", "50"],
            vec!["mfh-lab", "sweep-gamma", "--seed", "9"],
            vec!["mfh-lab", "sweep-alpha", "--jobs", "2"],
            vec!["mfh-lab", "table2", "--plot"],
            vec!["mfh-lab", "sweep-nullify"],
            vec!["mfh-lab", "rank-eval"],
            vec!["mfh-lab", "ablate-m"],
            vec!["mfh-lab", "verify-bound", "--out", "c.csv"],
            vec!["mfh-lab", "report", "--out", "runs"],
        ] {
            Cli::try_parse_from(&args).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        }
    }

    #[test]
    fn unknown_flags_are_rejected() {
        assert!(Cli::try_parse_from(["mfh-lab", "sweep-gamma", "--bogus"]).is_err());
        assert!(Cli::try_parse_from(["mfh-lab", "nonsense"]).is_err());
        assert!(Cli::try_parse_from(["mfh-lab"]).is_err());
    }

    #[test]
    fn seed_precedence_is_flag_env_config() {
        assert_eq!(resolve_seed(Some(3), Some("5"), 7).unwrap(), 3);
        assert_eq!(resolve_seed(None, Some("5"), 7).unwrap(), 5);
        assert_eq!(resolve_seed(None, Some(" 12 "), 7).unwrap(), 12);
        assert_eq!(resolve_seed(None, None, 7).unwrap(), 7);
        let err = resolve_seed(None, Some("junk"), 7).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("MFHLAB_SEED"));
    }

    #[test]
    fn gen_point_accepts_comma_separated_pairs() {
        let cli = Cli::try_parse_from([
            "mfh-lab", "gen", "--builder", "ranking", "--point", "10,5",
        ])
        .unwrap();
        match cli.command {
            Command::Gen { point, builder, n, replicate, .. } => {
                assert_eq!(builder, "ranking");
                assert_eq!(point, vec![10, 5]);
                assert_eq!(n, 200);
                assert_eq!(replicate, 0);
            }
            _ => panic!("expected gen"),
        }
    }
}
