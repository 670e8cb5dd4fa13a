//! Run a shipped preset and write its files.
//!
//! cargo run --release --example run_preset -- fig3b out/fig3b

use std::path::PathBuf;

use replicator_swarm::experiment::{preset, preset_names, run_experiment, write_outputs};

fn main() -> replicator_swarm::Result<()> {
    let mut args = std::env::args().skip(1);
    let Some(name) = args.next() else {
        eprintln!("usage: run_preset NAME [DIR]; presets: {}", preset_names().collect::<Vec<_>>().join(", "));
        return Ok(());
    };
    let dir = args.next().map_or_else(|| PathBuf::from("out").join(&name), PathBuf::from);
    let config = preset(&name)?;
    let report = run_experiment(&config, None)?;
    for path in write_outputs(&report, &config, &dir)? {
        println!("{}", path.display());
    }
    println!("mean rmse per task {:.4?}", report.rmse);
    Ok(())
}
