//! Finding the shared channels without being told where they are.
//!
//! Two logistic branches are trained jointly -- one per modality, tied by
//! an agreement penalty on their predicted distributions -- and then each
//! teacher channel is scored by permutation: shuffle that channel across
//! samples and measure how much the cross-modality agreement degrades.
//! Channels the two modalities share should dominate the ranking. The
//! evaluation scores the ranking against the ground-truth roles on four
//! geometries; a small single-draw demo then shows the saliency scores
//! next to the true roles.
//!
//! Takes roughly twenty seconds. Run with:
//! `cargo run --example ranking_eval`

use std::path::PathBuf;

use mfh_lab::config::Config;
use mfh_lab::experiments::{generate_dataset, run_ranking_eval, write_results_csv};
use mfh_lab::ranking::{fs_accuracy, joint_train, rank_features};

fn out_dir() -> PathBuf {
    let dir = std::env::temp_dir().join("mfh-lab-examples").join("ranking_eval");
    std::fs::create_dir_all(&dir).expect("create output directory");
    dir
}

fn main() -> mfh_lab::Result<()> {
    let cfg = Config::default();
    println!(
        "feature-selection accuracy over {} geometries, {} seeds ...",
        cfg.ranking_specs.len(),
        cfg.n_seeds
    );
    let rows = run_ranking_eval(&cfg)?;
    println!("\n{:>8}  {:>14}", "overlap", "fs accuracy");
    for r in &rows {
        println!("{:>8}  {:>6.3} ± {:5.3}", r.point, r.mean, r.std);
    }

    // Single-draw demo on the (k=10, c=5) geometry: 15 decisive teacher
    // channels, of which the last 5 are shared with the student modality.
    let (spec, ds) = generate_dataset("ranking", &[10, 5], cfg.ranking_n_train, 59, 0)?;
    let (joint, report) = joint_train(&ds.xa, &ds.xb, &ds.y, &cfg.gd_options())?;
    let saliency = rank_features(&joint, &ds.xa, &ds.xb, cfg.perm_repeats, 59, 0)?;
    let roles = spec.roles_a();
    println!(
        "\nsingle draw (k=10, c=5), joint training converged: {} ({} iterations)",
        report.converged, report.iters
    );
    println!("{:>8}  {:>9}  {:>8}", "channel", "saliency", "role");
    let mut order: Vec<usize> = (0..saliency.values.len()).collect();
    order.sort_by(|&i, &j| saliency.values[j].partial_cmp(&saliency.values[i]).unwrap());
    for &i in order.iter().take(8) {
        println!("{:>8}  {:>9.4}  {:>8}", i, saliency.values[i], roles[i].as_str());
    }
    let acc = fs_accuracy(&saliency, &roles);
    println!("top-|shared| hit rate against the true roles: {acc:.3}");

    let dir = out_dir();
    write_results_csv(dir.join("rank_eval.csv"), &rows)?;
    println!("wrote {}", dir.join("rank_eval.csv").display());
    Ok(())
}
