//! Payoff matrices, the replicator field and the tracking controller.
//!
//! cargo run --example replicator_field

use replicator_swarm::ensemble::{
    controlled_rhs, feedback_rate, replicator_rhs, Example1Rates, FeedbackGains, PayoffMatrix,
};

fn main() -> replicator_swarm::Result<()> {
    let k = PayoffMatrix::example1(Example1Rates::new(2.0, 0.2, 1.5, 0.4))?;
    println!("three-task payoff:\n{}", k.matrix());
    let y = [0.2, 0.2, 0.6];
    println!("dY/dt at {y:?} = {:?}", replicator_rhs(&k, &y)?);

    let cyclic = PayoffMatrix::example2(0.05);
    println!("cyclic payoff (mu = 0.05):\n{}", cyclic.matrix());
    println!("dY/dt at uniform = {:?}", replicator_rhs(&cyclic, &[0.25; 4])?);

    // Rate of one controlled channel: positive below target, negative above.
    for current in [0.1, 0.2, 0.4] {
        println!("alpha = 2, target 0.2, current {current}: k = {:+.3}", feedback_rate(2.0, 0.2, current)?);
    }

    let gains = FeedbackGains::example1(2.0, 0.2, 1.5, 0.4)?;
    let target = [0.2, 0.2, 0.6];
    println!("controlled field at the target   = {:?}", controlled_rhs(&gains, &target, &target)?);
    println!("controlled field off the target  = {:?}", controlled_rhs(&gains, &target, &[0.4, 0.3, 0.3])?);
    Ok(())
}
