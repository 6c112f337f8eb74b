//! Runs the attack matrix on synthetic trajectories and prints the result table.
//!
//! cargo run --release -p trajmark --example synthetic_matrix -- [count] [seed]

use trajmark::attack::AttackTable;
use trajmark::eval::{run_experiment, synth_trajectories, ExperimentConfig};
use trajmark::watermark::{WatermarkParams, DEFAULT_TAU};

fn main() -> trajmark::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let dataset = synth_trajectories(count, 256, seed)?;
    let cfg = ExperimentConfig {
        dataset_id: "synthetic".into(),
        watermark: WatermarkParams::default(),
        attacks: AttackTable::default(),
        tau: DEFAULT_TAU,
        master_seed: seed,
    };
    let report = run_experiment(&dataset, &cfg)?;
    print!("{}", report.table());
    for a in &report.attacks {
        println!(
            "{:<7} ncc {:.3}  dist {:>5.2} m  fallbacks {:>3}  dropped {}",
            a.label(),
            a.mean_ncc,
            a.mean_distance_m,
            a.fallbacks,
            a.dropped
        );
    }
    println!(
        "embed distance mean {:.2} m max {:.2} m; {:.1} s",
        report.mean_embed_distance_m, report.max_embed_distance_m, report.duration_s
    );
    Ok(())
}
