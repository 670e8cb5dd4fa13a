//! Tracking error and ensemble statistics on a common time grid.

use crate::error::{Error, Result};
use crate::odeint::Trajectory;

/// Per-task RMSE of `traj` against `reference`, evaluated at the reference
/// grid points that fall inside `traj`'s time range (linear interpolation
/// between `traj` samples).
pub fn tracking_error(traj: &Trajectory, reference: &Trajectory) -> Result<Vec<f64>> {
    if traj.dim() != reference.dim() {
        return Err(Error::Dimension { expected: reference.dim(), got: traj.dim() });
    }
    let (lo, hi) = (traj.t_start(), traj.t_end());
    let mut sums = vec![0.0; traj.dim()];
    let mut row = vec![0.0; traj.dim()];
    let mut n = 0usize;
    for (t, want) in reference.times().iter().zip(reference.states()) {
        if *t < lo || *t > hi {
            continue;
        }
        traj.sample_into(*t, &mut row)?;
        for ((s, y), w) in sums.iter_mut().zip(&row).zip(want) {
            *s += (y - w).powi(2);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Range { t: reference.t_start(), start: lo, end: hi });
    }
    Ok(sums.into_iter().map(|s| (s / n as f64).sqrt()).collect())
}

/// Pointwise mean and sample standard deviation of trajectories sharing a
/// grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub times: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    /// Zero for a single trial.
    pub std: Vec<Vec<f64>>,
}

pub fn aggregate(trials: &[Trajectory]) -> Result<Aggregate> {
    let first = trials
        .first()
        .ok_or_else(|| Error::DegenerateInput("no trajectories to aggregate".into()))?;
    for t in trials {
        if t.times() != first.times() || t.dim() != first.dim() {
            return Err(Error::DegenerateInput("trajectories do not share a grid".into()));
        }
    }
    let n = trials.len() as f64;
    let m = first.dim();
    let mut mean = Vec::with_capacity(first.len());
    let mut std = Vec::with_capacity(first.len());
    for k in 0..first.len() {
        let mut mu = vec![0.0; m];
        for t in trials {
            for (a, y) in mu.iter_mut().zip(&t.states()[k]) {
                *a += y;
            }
        }
        mu.iter_mut().for_each(|a| *a /= n);
        let mut var = vec![0.0; m];
        if trials.len() > 1 {
            for t in trials {
                for ((v, y), a) in var.iter_mut().zip(&t.states()[k]).zip(&mu) {
                    *v += (y - a).powi(2);
                }
            }
            var.iter_mut().for_each(|v| *v = (*v / (n - 1.0)).sqrt());
        }
        mean.push(mu);
        std.push(var);
    }
    Ok(Aggregate { times: first.times().to_vec(), mean, std })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odeint::TrajectoryMeta;
    use approx::assert_abs_diff_eq;

    fn traj(times: &[f64], rows: &[[f64; 2]]) -> Trajectory {
        Trajectory::new(times.to_vec(), rows.iter().map(|r| r.to_vec()).collect(), TrajectoryMeta::default()).unwrap()
    }

    #[test]
    fn identical_is_zero_and_offset_is_offset() {
        let a = traj(&[0.0, 1.0, 2.0], &[[0.5, 0.5], [0.3, 0.7], [0.2, 0.8]]);
        assert_eq!(tracking_error(&a, &a).unwrap(), vec![0.0, 0.0]);
        let b = traj(&[0.0, 1.0, 2.0], &[[0.6, 0.4], [0.4, 0.6], [0.3, 0.7]]);
        let e = tracking_error(&b, &a).unwrap();
        assert_abs_diff_eq!(e[0], 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(e[1], 0.1, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_ranges_are_an_error() {
        let a = traj(&[0.0, 1.0], &[[0.5, 0.5], [0.5, 0.5]]);
        let b = traj(&[2.0, 3.0], &[[0.5, 0.5], [0.5, 0.5]]);
        assert!(matches!(tracking_error(&b, &a), Err(Error::Range { .. })));
    }

    #[test]
    fn interpolates_onto_the_reference_grid() {
        let coarse = traj(&[0.0, 2.0], &[[0.0, 1.0], [1.0, 0.0]]);
        let fine = traj(&[0.0, 1.0, 2.0], &[[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]]);
        assert_abs_diff_eq!(tracking_error(&coarse, &fine).unwrap()[0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn aggregate_mean_and_std() {
        let a = traj(&[0.0, 1.0], &[[0.2, 0.8], [0.4, 0.6]]);
        let b = traj(&[0.0, 1.0], &[[0.4, 0.6], [0.4, 0.6]]);
        let agg = aggregate(&[a.clone(), b]).unwrap();
        assert_abs_diff_eq!(agg.mean[0][0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(agg.std[0][0], 0.02_f64.sqrt(), epsilon = 1e-15);
        assert_eq!(agg.std[1], vec![0.0, 0.0]);
        assert_eq!(aggregate(&[a]).unwrap().std[0], vec![0.0, 0.0]);
    }
}
