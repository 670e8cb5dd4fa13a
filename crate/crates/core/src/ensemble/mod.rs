//! Task graphs, payoff matrices, the replicator field with its feedback
//! variant, and equilibrium analysis.

mod dynamics;
mod equilibrium;
mod graph;
mod payoff;
mod population;

pub use dynamics::{controlled_rhs, feedback_matrix, feedback_rate, jacobian, replicator_into, replicator_rhs};
pub use equilibrium::{
    analyze_point, classify, coexistence_example1, eigenvalues, equilibrium_example1, equilibrium_example2,
    example2_spectrum, leading_pair, Classification, EquilibriumReport, HOPF_REAL_BOUND, ZERO_REAL_TOL,
};
pub use graph::TaskGraph;
pub use payoff::{Example1Rates, FeedbackGains, PayoffMatrix};
pub use population::{PopulationVector, SIMPLEX_TOL};
