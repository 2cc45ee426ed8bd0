//! Which teacher channels may be destroyed without hurting the student?
//!
//! The saliency ranking from the permutation test sorts the teacher's
//! channels by how much the cross-modality agreement depends on them.
//! This sweep then nullifies (replaces by the training mean) a growing
//! fraction of channels under three strategies before distilling:
//! the *general* strategy removes the channels the ranking marks least
//! salient, *specific* removes the most salient ones, and *random*
//! removes a seeded uniform draw. Pure distillation (no label term) makes
//! the student fully dependent on what survives in the teacher.
//!
//! Takes roughly fifteen seconds. Run with:
//! `cargo run --example nullify_sweep`

use std::path::PathBuf;

use mfh_lab::config::Config;
use mfh_lab::experiments::{run_nullify_sweep, write_results_csv};
use mfh_lab::report::render_sweep_plots;

fn out_dir() -> PathBuf {
    let dir = std::env::temp_dir().join("mfh-lab-examples").join("nullify_sweep");
    std::fs::create_dir_all(&dir).expect("create output directory");
    dir
}

fn main() -> mfh_lab::Result<()> {
    let cfg = Config::default();
    println!("nullification sweep ({} seeds, pure distillation) ...", cfg.n_seeds);
    let rows = run_nullify_sweep(&cfg)?;

    let cell = |point: &str, metric: &str| {
        let r = rows.iter().find(|r| r.point == point && r.metric == metric).unwrap();
        format!("{:5.1} ± {:3.1}", r.mean, r.std)
    };
    println!("\n{:>6}  {:>12}  {:>12}  {:>12}", "ratio", "general", "random", "specific");
    for point in ["0.00", "0.25", "0.50", "0.75", "0.90"] {
        println!(
            "{:>6}  {:>12}  {:>12}  {:>12}",
            point,
            cell(point, "acc_general"),
            cell(point, "acc_random"),
            cell(point, "acc_specific"),
        );
    }
    println!("\nreading: removing low-salience channels is harmless (the general curve");
    println!("even peaks at an interior ratio -- masking distractors helps); removing");
    println!("the most salient channels collapses the student toward chance.");

    let dir = out_dir();
    write_results_csv(dir.join("nullify.csv"), &rows)?;
    for (name, svg) in render_sweep_plots("nullify", &rows)? {
        std::fs::write(dir.join(&name), svg).map_err(mfh_lab::Error::from)?;
        println!("wrote {}", dir.join(&name).display());
    }
    println!("wrote {}", dir.join("nullify.csv").display());
    Ok(())
}
