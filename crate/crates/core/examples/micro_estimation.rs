//! Agents in an 18 x 18 arena under the tracking controller, with global
//! counts versus counts within a sensing radius.
//!
//! cargo run --release --example micro_estimation

use replicator_swarm::ensemble::{Example1Rates, FeedbackGains, PayoffMatrix, PopulationVector};
use replicator_swarm::experiment::tracking_error;
use replicator_swarm::micro::{
    run_micro, Arena, Boundary, EncounterSearch, Estimation, Interaction, MicroConfig, MicroParams,
};
use replicator_swarm::odeint::{integrate, TrajectoryMeta};
use replicator_swarm::ssa::CountVector;

fn main() -> replicator_swarm::Result<()> {
    let k = PayoffMatrix::example1(Example1Rates::new(2.0, 0.2, 1.5, 0.4))?;
    let y0 = PopulationVector::new(vec![0.2, 0.2, 0.6])?;
    let reference = integrate(&k, &y0, 0.05, 100.0, TrajectoryMeta::new("reference", ""))?;

    for (label, estimation, radius) in [
        ("global counts", Estimation::Centralized, 0.0),
        ("radius 10", Estimation::Distributed, 10.0),
        ("radius 5", Estimation::Distributed, 5.0),
        ("radius 2", Estimation::Distributed, 2.0),
    ] {
        let config = MicroConfig {
            params: MicroParams {
                arena: Arena::new(18.0, 18.0)?,
                interaction: Interaction::Feedback(FeedbackGains::example1(2.0, 0.2, 1.5, 0.4)?),
                estimation,
                relative_speed: None,
                boundary: Boundary::QuarterTurn,
                search: EncounterSearch::Grid,
                extinction_guard: true,
            },
            counts0: CountVector::new(vec![2, 25, 25])?,
            speed: 1.0,
            sensing_radius: radius,
            dt: 0.05,
            t_end: 100.0,
            sample_every: 1,
            record_snapshots: false,
        };
        let run = run_micro(&config, Some(&reference), 1, 0)?;
        let rmse = tracking_error(&run.trajectory, &reference)?;
        println!("{label:<13} {:5} switches, rmse {:.4?}", run.encounters.len(), rmse);
    }
    Ok(())
}
