//! A configuration written inline, run as a seeded multi-trial ensemble on
//! several workers, with its aggregate statistics.
//!
//! cargo run --release --example ensemble_runner

use replicator_swarm::experiment::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"
name = "cyclic-ssa"
fidelity = "ssa"
t_end = 50.0
dt = 0.05
trials = 8
seed = 2024

[model]
kind = "example2"
mu = 0.001

[reference]
fractions0 = [0.1, 0.2, 0.4, 0.3]

[initial]
counts = [10, 20, 40, 30]

[control]
mode = "on"
gains = { kind = "example2", alpha = 0.1 }
"#;

fn main() -> replicator_swarm::Result<()> {
    let config = ExperimentConfig::from_toml_str(CONFIG)?;
    let report = run_experiment(&config, Some(4))?;
    println!("config hash {}, {:.3} s", report.config_hash, report.wall_clock.as_secs_f64());
    for t in &report.trials {
        println!("seed {} stream {}: {} events, mean rmse {:.4}", t.seed, t.stream, t.switches, t.mean_rmse);
    }
    let agg = &report.aggregate;
    for k in (0..agg.times.len()).step_by(200) {
        println!("t = {:5.1}  mean {:.3?}  std {:.3?}", agg.times[k], agg.mean[k], agg.std[k]);
    }

    // Same seed, one worker: identical numbers.
    let again = run_experiment(&config, Some(1))?;
    assert_eq!(again.rmse, report.rmse);
    Ok(())
}
