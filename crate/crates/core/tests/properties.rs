use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;

use replicator_swarm::ensemble::{
    controlled_rhs, replicator_rhs, FeedbackGains, PayoffMatrix, PopulationVector, TaskGraph,
};
use replicator_swarm::micro::{interaction_radius, interaction_radius_controlled, Arena};
use replicator_swarm::odeint::{integrate, TrajectoryMeta};
use replicator_swarm::ssa::{self, CountVector, JumpMeanField, RateSource, RunOptions};

fn simplex(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01..1.0f64, m).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

fn payoff(m: usize) -> impl Strategy<Value = PayoffMatrix> {
    prop::collection::vec(-2.0..2.0f64, m * m).prop_map(move |v| {
        let mut k = DMatrix::from_row_slice(m, m, &v);
        k.fill_diagonal(0.0);
        PayoffMatrix::new(TaskGraph::complete(m).unwrap(), k).unwrap()
    })
}

fn sized() -> impl Strategy<Value = (PayoffMatrix, Vec<f64>)> {
    (2usize..6).prop_flat_map(|m| (payoff(m), simplex(m)))
}

proptest! {
    #[test]
    fn replicator_field_is_tangent_to_the_simplex((k, y) in sized()) {
        let dy = replicator_rhs(&k, &y).unwrap();
        prop_assert!(dy.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn vertices_are_fixed(k in (2usize..6).prop_flat_map(payoff), pick in 0usize..6) {
        let m = k.dim();
        let v = PopulationVector::vertex(m, pick % m);
        let dy = replicator_rhs(&k, &v).unwrap();
        prop_assert!(dy.iter().all(|d| d.abs() < 1e-15));
    }

    #[test]
    fn controlled_field_vanishes_on_the_reference(y in simplex(4), alpha in 0.0..3.0f64) {
        let g = FeedbackGains::uniform(4, alpha).unwrap();
        let dy = controlled_rhs(&g, &y, &y).unwrap();
        prop_assert!(dy.iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn simplex_is_preserved_by_integration((k, y) in sized()) {
        let y0 = PopulationVector::new(y).unwrap();
        let traj = integrate(&k, &y0, 0.01, 5.0, TrajectoryMeta::default()).unwrap();
        for s in traj.states() {
            prop_assert!((s.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(s.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn radius_grows_with_rate_and_shrinks_with_speed_and_counts(
        k in 1e-4..0.1f64, v in 0.1..4.0f64, ni in 1u32..40, nj in 1u32..40,
    ) {
        let a = Arena::new(18.0, 18.0).unwrap();
        let r = interaction_radius(&a, k, v, ni, nj).unwrap();
        prop_assert!(r <= a.radius_cap());
        prop_assert!(interaction_radius(&a, 2.0 * k, v, ni, nj).unwrap() >= r);
        prop_assert!(interaction_radius(&a, k, 2.0 * v, ni, nj).unwrap() <= r);
        prop_assert!(interaction_radius(&a, k, v, ni + 1, nj).unwrap() <= r);
        prop_assert!(interaction_radius(&a, k, v, ni, nj + 1).unwrap() <= r);
    }

    #[test]
    fn controlled_radius_is_homogeneous_in_the_error(err in 0.1..5.0f64, nj in 1u32..30) {
        let a = Arena::new(100.0, 100.0).unwrap();
        let (r1, _) = interaction_radius_controlled(&a, 0.01, 10.0 + err, 10.0, nj, 2.0).unwrap();
        let (r2, _) = interaction_radius_controlled(&a, 0.01, 10.0 + 2.0 * err, 10.0, nj, 2.0).unwrap();
        prop_assert!((r2 / r1 - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ssa_conserves_and_guards(seed in any::<u64>(), c in prop::collection::vec(1u32..30, 4)) {
        let k = PayoffMatrix::example2_scaled(0.01, 0.05).unwrap();
        let counts = CountVector::new(c).unwrap();
        let n = counts.total();
        let log = ssa::run(&RateSource::Constant(&k), &counts, &RunOptions::new(20.0), seed, 0).unwrap();
        let mut last = 0.0;
        for e in &log.events {
            prop_assert!(e.t > last);
            last = e.t;
            prop_assert_eq!(e.counts.iter().sum::<u32>(), n);
            prop_assert!(e.counts.iter().all(|&x| x >= 1));
        }
    }
}

/// Ensemble mean of the jump process against its mean-field ODE
/// (`dY_i = N Y_i [(K Y)_i - (K^T Y)_i]`). The mean-field limit is exact
/// to O(1/N), so the bound is three standard errors plus 1/N.
#[test]
fn ssa_mean_matches_mean_field() {
    let k = PayoffMatrix::example2_scaled(0.002, 0.05).unwrap();
    let counts = CountVector::new(vec![40, 80, 160, 120]).unwrap();
    let n = counts.total();
    let t_end = 2.0;
    let mut opts = RunOptions::new(t_end);
    opts.extinction_guard = false;
    let runs = 400;
    let mut samples: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(runs)).collect();
    for seed in 0..runs as u64 {
        let log = ssa::run(&RateSource::Constant(&k), &counts, &opts, 17, seed).unwrap();
        for (i, &c) in log.counts_at(t_end).iter().enumerate() {
            samples[i].push(f64::from(c) / f64::from(n));
        }
    }
    let field = JumpMeanField { rates: &k, population: n };
    let y0 = PopulationVector::from_counts(counts.as_slice()).unwrap();
    let mf = integrate(&field, &y0, 0.001, t_end, TrajectoryMeta::default()).unwrap();
    let want = mf.states().last().unwrap();
    let mut moved: f64 = 0.0;
    for (i, s) in samples.iter().enumerate() {
        let mean = s.iter().sum::<f64>() / runs as f64;
        let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs as f64 - 1.0);
        let se = (var / runs as f64).sqrt();
        moved = moved.max((want[i] - y0[i]).abs() / se);
        assert!(
            (mean - want[i]).abs() <= 3.0 * se + 1.0 / f64::from(n),
            "task {i}: ssa mean {mean}, mean field {}, se {se}",
            want[i]
        );
    }
    // the comparison means something only if the state actually moved
    assert!(moved > 10.0, "largest move is {moved} standard errors");
}

#[test]
fn replicator_and_mean_field_agree_for_antisymmetric_rates() {
    let k = PayoffMatrix::example2_scaled(0.01, 0.0).unwrap();
    let anti = k.matrix() - k.matrix().transpose();
    let anti = PayoffMatrix::new(TaskGraph::complete(4).unwrap(), anti * 0.5).unwrap();
    let field = JumpMeanField { rates: &anti, population: 1 };
    let y = [0.1, 0.2, 0.4, 0.3];
    let mut mf = [0.0; 4];
    replicator_swarm::odeint::VectorField::eval(&field, 0.0, &y, &mut mf).unwrap();
    let rep = replicator_rhs(&anti, &y).unwrap();
    for (a, b) in mf.iter().zip(&rep) {
        assert_abs_diff_eq!(a / 2.0, *b, epsilon = 1e-15);
    }
}
