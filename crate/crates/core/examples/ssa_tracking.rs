//! Jump-process runs with fixed rates and with the tracking controller,
//! compared on RMSE against the same reference.
//!
//! cargo run --example ssa_tracking

use replicator_swarm::ensemble::{Example1Rates, FeedbackGains, PayoffMatrix, PopulationVector};
use replicator_swarm::experiment::tracking_error;
use replicator_swarm::odeint::{integrate, TrajectoryMeta};
use replicator_swarm::ssa::{self, CountVector, RateSource, RunOptions};

fn main() -> replicator_swarm::Result<()> {
    let reference_model = PayoffMatrix::example1(Example1Rates::new(2.0, 0.2, 1.5, 0.4))?;
    let y0 = PopulationVector::new(vec![0.2, 0.2, 0.6])?;
    let reference = integrate(&reference_model, &y0, 0.01, 100.0, TrajectoryMeta::new("reference", ""))?;

    let counts = CountVector::new(vec![2, 50, 50])?;
    let rates = PayoffMatrix::example1(Example1Rates::new(0.004, 0.0004, 0.003, 0.0008))?;
    let gains = FeedbackGains::example1(0.03, 0.003, 0.0225, 0.006)?;

    let open = RateSource::Constant(&rates);
    let closed = RateSource::Feedback { gains: &gains, reference: &reference };
    let mut opts = RunOptions::new(100.0);
    for (label, source) in [("fixed rates", open), ("controlled", closed)] {
        opts.max_hold = matches!(source, RateSource::Feedback { .. }).then_some(0.1);
        for trial in 0..3 {
            let log = ssa::run(&source, &counts, &opts, 7, trial)?;
            let traj = log.to_trajectory(reference.times(), TrajectoryMeta::default())?;
            let rmse = tracking_error(&traj, &reference)?;
            println!(
                "{label:<11} trial {trial}: {:5} events, final counts {:?}, rmse {:.4?}",
                log.events.len(),
                log.final_counts(),
                rmse
            );
        }
    }
    Ok(())
}
