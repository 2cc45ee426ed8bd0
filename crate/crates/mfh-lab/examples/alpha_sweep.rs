//! A stronger teacher does not make a better student.
//!
//! Here the student's channels are frozen (it always sees the same ten
//! decisive coordinates) while the teacher's decisive share grows: at the
//! left end the teacher sees only those same ten coordinates, at the
//! right end it sees five times as many. Teacher accuracy climbs steeply
//! -- but the distilled student is flat to slightly worse, because the
//! extra decisive information lives in channels the student cannot
//! observe. What transfers through distillation is the shared part, not
//! teacher strength.
//!
//! Takes roughly ten seconds. Run with: `cargo run --example alpha_sweep`

use std::path::PathBuf;

use mfh_lab::config::Config;
use mfh_lab::experiments::{run_alpha_sweep, write_results_csv};
use mfh_lab::report::render_sweep_plots;

fn out_dir() -> PathBuf {
    let dir = std::env::temp_dir().join("mfh-lab-examples").join("alpha_sweep");
    std::fs::create_dir_all(&dir).expect("create output directory");
    dir
}

fn main() -> mfh_lab::Result<()> {
    let cfg = Config::default();
    println!("sweeping the teacher's decisive share ({} seeds) ...", cfg.n_seeds);
    let rows = run_alpha_sweep(&cfg)?;

    let cell = |point: &str, metric: &str| {
        let r = rows.iter().find(|r| r.point == point && r.metric == metric).unwrap();
        format!("{:5.1} ± {:3.1}", r.mean, r.std)
    };
    println!("\n{:>7}  {:>12}  {:>12}  {:>12}", "share", "teacher", "no distill", "distilled");
    for point in ["0.0000", "0.2308", "0.4118", "0.6000", "0.8000"] {
        println!(
            "{:>7}  {:>12}  {:>12}  {:>12}",
            point,
            cell(point, "teacher_acc"),
            cell(point, "nokd_acc"),
            cell(point, "kd_acc"),
        );
    }
    println!("\nreading: left to right the teacher gains ~30 accuracy points while the");
    println!("distilled student stays within half a point of where it started.");

    let dir = out_dir();
    write_results_csv(dir.join("alpha.csv"), &rows)?;
    for (name, svg) in render_sweep_plots("alpha", &rows)? {
        std::fs::write(dir.join(&name), svg).map_err(mfh_lab::Error::from)?;
        println!("wrote {}", dir.join(&name).display());
    }
    println!("wrote {}", dir.join("alpha.csv").display());
    Ok(())
}
