//! Sweep the cyclic payoff's mu through zero and watch the oscillation
//! settle onto a limit cycle once the uniform point loses stability.
//!
//! cargo run --example hopf_sweep

use replicator_swarm::ensemble::{PayoffMatrix, PopulationVector};
use replicator_swarm::experiment::{sweep, ModelSpec};
use replicator_swarm::odeint::{integrate, TrajectoryMeta};

fn main() -> replicator_swarm::Result<()> {
    let sw = sweep(&ModelSpec::Example2 { mu: 0.0, rate: 1.0 }, "mu", -0.1, 0.1, 21)?;
    for row in &sw.rows {
        println!("mu = {:+.3}  pair real part = {:+.5}  {}", row.value, row.pair_real.unwrap_or(f64::NAN), row.classification);
    }
    println!("sign change at mu = {:?}", sw.crossings);

    let y0 = PopulationVector::new(vec![0.1, 0.2, 0.4, 0.3])?;
    for mu in [-0.05, 0.05] {
        let traj = integrate(&PayoffMatrix::example2(mu), &y0, 0.01, 400.0, TrajectoryMeta::default())?;
        let tail: Vec<f64> = traj.states().iter().skip(30_000).map(|s| s[0]).collect();
        let hi = tail.iter().cloned().fold(f64::MIN, f64::max);
        let lo = tail.iter().cloned().fold(f64::MAX, f64::min);
        println!("mu = {mu:+}: Y_1 range over t in [300, 400] = {:.4}", hi - lo);
    }
    Ok(())
}
