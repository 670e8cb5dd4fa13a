//! Integrate a reference trajectory and write it as CSV.
//!
//! cargo run --example reference_trajectory -- out.csv

use std::fs::File;
use std::io::{self, BufWriter};

use replicator_swarm::ensemble::{Example1Rates, PayoffMatrix, PopulationVector};
use replicator_swarm::odeint::{integrate, TrajectoryMeta};

fn main() -> replicator_swarm::Result<()> {
    let k = PayoffMatrix::example1(Example1Rates::new(2.0, 0.2, 1.5, 0.4))?;
    let y0 = PopulationVector::new(vec![0.2, 0.2, 0.6])?;
    let meta = TrajectoryMeta::new("example1", "k10=2;k12=0.2;k20=1.5;k21=0.4");
    let traj = integrate(&k, &y0, 0.01, 100.0, meta)?;
    let stats = traj.stats();
    eprintln!("{} samples, {} renormalizations, max drift {:.1e}", traj.len(), stats.renormalizations, stats.max_drift);
    eprintln!("Y(50) = {:?}", traj.sample(50.0)?.as_ref());

    match std::env::args().nth(1) {
        Some(path) => traj.write_csv(BufWriter::new(File::create(path)?), &[], None)?,
        None => traj.write_csv(io::stdout().lock(), &[], None)?,
    }
    Ok(())
}
