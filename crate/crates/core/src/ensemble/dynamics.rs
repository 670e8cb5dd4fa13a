//! Replicator vector field, the trajectory-tracking collaboration rate and
//! the analytic Jacobian.

use nalgebra::DMatrix;

use super::payoff::{FeedbackGains, PayoffMatrix};
use crate::error::{Error, Result};

/// `dY_i = Y_i [ (K Y)_i - Y^T K Y ]`.
pub fn replicator_rhs(k: &PayoffMatrix, y: &[f64]) -> Result<Vec<f64>> {
    check_dim(k.dim(), y.len())?;
    let mut out = vec![0.0; y.len()];
    replicator_into(k.matrix(), y, &mut out);
    Ok(out)
}

/// Allocation-free replicator evaluation on a raw rate matrix.
pub fn replicator_into(k: &DMatrix<f64>, y: &[f64], out: &mut [f64]) {
    let m = y.len();
    let mut mean = 0.0;
    for i in 0..m {
        let mut ky = 0.0;
        for j in 0..m {
            ky += k[(i, j)] * y[j];
        }
        out[i] = ky;
        mean += y[i] * ky;
    }
    for i in 0..m {
        out[i] = y[i] * (out[i] - mean);
    }
}

/// Feedback collaboration rate `alpha (y_star / y - 1)`.
///
/// Positive values drive task-`j` robots into task `i`; negative values
/// reverse the switch.
pub fn feedback_rate(alpha: f64, y_star: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::DegeneratePopulation { task: 0, value: y });
    }
    Ok(alpha * (y_star / y - 1.0))
}

/// Matrix of feedback rates at the current state. Row `i` depends only on
/// the error of task `i`.
pub fn feedback_matrix(alpha: &FeedbackGains, y_star: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    let m = alpha.dim();
    check_dim(m, y.len())?;
    check_dim(m, y_star.len())?;
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        if !(y[i] > 0.0) {
            return Err(Error::DegeneratePopulation { task: i, value: y[i] });
        }
        for j in 0..m {
            let a = alpha.get(i, j);
            if a != 0.0 {
                k[(i, j)] = feedback_rate(a, y_star[i], y[i])?;
            }
        }
    }
    Ok(k)
}

/// Replicator dynamics with every rate replaced by its feedback value.
pub fn controlled_rhs(alpha: &FeedbackGains, y_star: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let k = feedback_matrix(alpha, y_star, y)?;
    let mut out = vec![0.0; y.len()];
    replicator_into(&k, y, &mut out);
    Ok(out)
}

/// Analytic Jacobian of the replicator field:
/// `J_il = delta_il [(KY)_i - Y^T K Y] + Y_i [K_il - (KY)_l - (K^T Y)_l]`.
pub fn jacobian(k: &PayoffMatrix, y: &[f64]) -> Result<DMatrix<f64>> {
    check_dim(k.dim(), y.len())?;
    let km = k.matrix();
    let yv = nalgebra::DVector::from_column_slice(y);
    let ky = km * &yv;
    let kty = km.transpose() * &yv;
    let mean = yv.dot(&ky);
    let m = y.len();
    Ok(DMatrix::from_fn(m, m, |i, l| {
        let diag = if i == l { ky[i] - mean } else { 0.0 };
        diag + y[i] * (km[(i, l)] - ky[l] - kty[l])
    }))
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::payoff::Example1Rates;
    use crate::ensemble::population::PopulationVector;
    use approx::assert_abs_diff_eq;

    fn ex1() -> PayoffMatrix {
        PayoffMatrix::example1(Example1Rates::new(2.0, 0.2, 1.5, 0.4)).unwrap()
    }

    // Term-by-term expansion of the three-task field, written out by hand.
    fn ex1_expanded(r: Example1Rates, y: &[f64]) -> [f64; 3] {
        let Example1Rates { k10, k12, k20, k21 } = r;
        let cubic = k20 * y[0] * y[2] - k10 * y[0] * y[1] + (k12 - k21) * y[1] * y[2];
        [
            y[0] * cubic,
            y[1] * (k10 * y[0] - k12 * y[2] + cubic),
            y[2] * (k21 * y[1] - k20 * y[0] + cubic),
        ]
    }

    #[test]
    fn example1_matches_expanded_form() {
        let y = [0.2, 0.2, 0.6];
        let got = replicator_rhs(&ex1(), &y).unwrap();
        let want = ex1_expanded(Example1Rates::new(2.0, 0.2, 1.5, 0.4), &y);
        for i in 0..3 {
            assert_abs_diff_eq!(got[i], want[i], epsilon = 1e-15);
        }
        assert_abs_diff_eq!(got[0], 0.0152, epsilon = 1e-15);
        assert_abs_diff_eq!(got[1], 0.0712, epsilon = 1e-15);
        assert_abs_diff_eq!(got[2], -0.0864, epsilon = 1e-15);
        assert_abs_diff_eq!(got.iter().sum::<f64>(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn uniform_point_is_fixed_for_example2() {
        for mu in [-0.3, 0.0, 0.01, 0.7] {
            let d = replicator_rhs(&PayoffMatrix::example2(mu), &PopulationVector::uniform(4)).unwrap();
            assert!(d.iter().all(|v| v.abs() < 1e-14), "{d:?}");
        }
    }

    #[test]
    fn vertices_are_exact_fixed_points() {
        let k = ex1();
        for v in 0..3 {
            let d = replicator_rhs(&k, &PopulationVector::vertex(3, v)).unwrap();
            assert_eq!(d, vec![0.0; 3]);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(replicator_rhs(&ex1(), &[0.5, 0.5]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn feedback_rate_values() {
        assert_abs_diff_eq!(feedback_rate(2.0, 0.3, 0.2).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(feedback_rate(0.5, 0.1, 0.4).unwrap(), -0.375, epsilon = 1e-15);
        assert_eq!(feedback_rate(3.0, 0.25, 0.25).unwrap(), 0.0);
        assert!(matches!(feedback_rate(1.0, 0.2, 0.0), Err(Error::DegeneratePopulation { .. })));
    }

    // Brute-force evaluation of the substituted dynamics:
    // dY_i = sum_j a_ij (Y*_i - Y_i) Y_j - Y_i sum_{p,l} a_pl (Y*_p - Y_p) Y_l
    fn controlled_brute(a: &FeedbackGains, ys: &[f64], y: &[f64]) -> Vec<f64> {
        let m = y.len();
        let mut mean = 0.0;
        for p in 0..m {
            for l in 0..m {
                mean += a.get(p, l) * (ys[p] - y[p]) * y[l];
            }
        }
        (0..m)
            .map(|i| (0..m).map(|j| a.get(i, j) * (ys[i] - y[i]) * y[j]).sum::<f64>() - y[i] * mean)
            .collect()
    }

    #[test]
    fn controlled_rhs_matches_error_form() {
        let a = FeedbackGains::example1(0.03, 0.003, 0.0225, 0.006).unwrap();
        let ys = [0.2, 0.2, 0.6];
        let y = [0.1, 0.5, 0.4];
        let got = controlled_rhs(&a, &ys, &y).unwrap();
        let want = controlled_brute(&a, &ys, &y);
        for i in 0..3 {
            assert_abs_diff_eq!(got[i], want[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn controlled_rhs_pushes_toward_reference() {
        let a = FeedbackGains::uniform(4, 1.0).unwrap();
        let ys = [0.25, 0.25, 0.25, 0.25];
        // task 2 is far below its reference, the rest slightly above
        let y = [0.3, 0.3, 0.1, 0.3];
        let got = controlled_rhs(&a, &ys, &y).unwrap();
        let want = controlled_brute(&a, &ys, &y);
        assert!(got[2] > 0.0);
        assert_eq!(got[2].signum(), want[2].signum());
        assert_abs_diff_eq!(got.iter().sum::<f64>(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn controlled_rhs_zero_cases() {
        let a = FeedbackGains::uniform(3, 0.7).unwrap();
        let y = [0.2, 0.3, 0.5];
        assert!(controlled_rhs(&a, &y, &y).unwrap().iter().all(|v| *v == 0.0));
        let zero = FeedbackGains::uniform(3, 0.0).unwrap();
        assert!(controlled_rhs(&zero, &[0.1, 0.1, 0.8], &y).unwrap().iter().all(|v| *v == 0.0));
        assert!(controlled_rhs(&a, &y, &[0.0, 0.5, 0.5]).is_err());
    }

    fn fd_jacobian(k: &PayoffMatrix, y: &[f64], h: f64) -> DMatrix<f64> {
        let m = y.len();
        DMatrix::from_fn(m, m, |i, l| {
            let mut yp = y.to_vec();
            let mut ym = y.to_vec();
            yp[l] += h;
            ym[l] -= h;
            (replicator_rhs(k, &yp).unwrap()[i] - replicator_rhs(k, &ym).unwrap()[i]) / (2.0 * h)
        })
    }

    #[test]
    fn jacobian_matches_central_differences() {
        for (k, y) in [
            (ex1(), vec![0.2, 0.2, 0.6]),
            (ex1(), vec![0.0, -1.0, 2.0]),
            (PayoffMatrix::example2(0.01), vec![0.1, 0.2, 0.4, 0.3]),
        ] {
            let j = jacobian(&k, &y).unwrap();
            let fd = fd_jacobian(&k, &y, 1e-6);
            assert!((&j - &fd).norm() <= 1e-6 * j.norm().max(1.0));
        }
    }

    #[test]
    fn jacobian_at_a_vertex() {
        // At e_0 the only nonzero row is row 0; the diagonal carries the
        // invasion rates K_i0 of the other tasks.
        let k = ex1();
        let j = jacobian(&k, &PopulationVector::vertex(3, 0)).unwrap();
        assert_eq!(j[(1, 1)], k.get(1, 0));
        assert_eq!(j[(2, 2)], k.get(2, 0));
        assert_eq!(j[(1, 0)], 0.0);
        assert_eq!(j[(2, 1)], 0.0);
    }
}
