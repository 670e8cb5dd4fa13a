//! Fixed points, linearization spectra and classification.
//!
//! cargo run --example equilibria

use replicator_swarm::ensemble::{example2_spectrum, Example1Rates};
use replicator_swarm::experiment::{analyze, format_report, ModelSpec};

fn main() -> replicator_swarm::Result<()> {
    let rates = Example1Rates::new(2.0, 0.2, 1.5, 0.4);
    let ex1 = ModelSpec::Example1 { k10: rates.k10, k12: rates.k12, k20: rates.k20, k21: rates.k21 };
    for r in analyze(&ex1, None)? {
        print!("{}", format_report(&r));
    }

    for mu in [-0.1, 0.0, 0.01] {
        println!("\ncyclic payoff, mu = {mu}");
        for r in analyze(&ModelSpec::Example2 { mu, rate: 1.0 }, None)? {
            print!("{}", format_report(&r));
        }
        println!("closed form    = {:?}", example2_spectrum(mu));
    }
    Ok(())
}
