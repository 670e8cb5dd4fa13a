//! Equilibria, linearization spectra and their classification.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use super::dynamics::{jacobian, replicator_rhs};
use super::payoff::{Example1Rates, PayoffMatrix};
use crate::error::{Error, Result};

/// Real parts smaller than this in magnitude count as zero.
pub const ZERO_REAL_TOL: f64 = 1e-9;
/// Upper bound on the real part of a conjugate pair that still counts as a
/// small-amplitude Hopf candidate.
pub const HOPF_REAL_BOUND: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Center,
    Stable,
    HopfCandidate,
    Unstable,
    Degenerate,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Center => "center",
            Classification::Stable => "stable",
            Classification::HopfCandidate => "hopf-candidate",
            Classification::Unstable => "unstable",
            Classification::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    /// May leave the simplex; see `valid`.
    pub point: Vec<f64>,
    #[serde(serialize_with = "serialize_complex")]
    pub eigenvalues: Vec<Complex64>,
    pub classification: Classification,
    /// All components within `[0, 1]`.
    pub valid: bool,
    /// Max-norm of the replicator field at `point`.
    pub residual: f64,
}

/// Linearizes the replicator field of `k` at `point` and classifies it.
pub fn analyze_point(k: &PayoffMatrix, point: &[f64]) -> Result<EquilibriumReport> {
    let residual = replicator_rhs(k, point)?
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let eigenvalues = eigenvalues(&jacobian(k, point)?);
    let classification = classify(&eigenvalues);
    let valid = point.iter().all(|&v| (0.0..=1.0).contains(&v));
    Ok(EquilibriumReport { point: point.to_vec(), eigenvalues, classification, valid, residual })
}

/// Eigenvalues of a real square matrix, sorted by real then imaginary part.
pub fn eigenvalues(j: &nalgebra::DMatrix<f64>) -> Vec<Complex64> {
    let mut ev: Vec<Complex64> = j.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

/// The boundary point `[0, k12/(k12-k21), k21/(k21-k12)]` of the three-task
/// payoff, linearized in the full state space.
///
/// For positive rates one of the last two components is negative, so the
/// report is usually marked invalid; it is returned anyway so parameter
/// scans can look for valid regimes.
pub fn equilibrium_example1(rates: Example1Rates) -> Result<EquilibriumReport> {
    let Example1Rates { k12, k21, .. } = rates;
    if k12 == k21 {
        return Err(Error::SingularEquilibrium(format!("k12 = k21 = {k12}")));
    }
    let point = [0.0, k12 / (k12 - k21), k21 / (k21 - k12)];
    analyze_point(&PayoffMatrix::example1(rates)?, &point)
}

/// Interior coexistence point of the three-task payoff. Dividing the last
/// two fractions by the first maps the field onto a predator–prey system
/// whose fixed point is `(k20/k21, k10/k12)`.
pub fn coexistence_example1(rates: Example1Rates) -> Result<EquilibriumReport> {
    let Example1Rates { k10, k12, k20, k21 } = rates;
    let x1 = k20 / k21;
    let x2 = k10 / k12;
    let total = 1.0 + x1 + x2;
    let point = [1.0 / total, x1 / total, x2 / total];
    analyze_point(&PayoffMatrix::example1(rates)?, &point)
}

/// The uniform point of the four-task cyclic payoff.
pub fn equilibrium_example2(mu: f64) -> Result<EquilibriumReport> {
    analyze_point(&PayoffMatrix::example2(mu), &[0.25; 4])
}

/// Closed-form spectrum at the uniform point of the cyclic payoff:
/// `{(mu-1)/4, (mu-i)/4, (mu+i)/4, (-1-mu)/4}`.
pub fn example2_spectrum(mu: f64) -> [Complex64; 4] {
    [
        Complex64::new((-1.0 + mu) / 4.0, 0.0),
        Complex64::new(mu / 4.0, -0.25),
        Complex64::new(mu / 4.0, 0.25),
        Complex64::new((-1.0 - mu) / 4.0, 0.0),
    ]
}

/// Splits a spectrum into conjugate pairs (nonzero imaginary part, one
/// representative with positive imaginary part each) and the rest.
fn conjugate_pairs(ev: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut used = vec![false; ev.len()];
    let mut pairs = Vec::new();
    for a in 0..ev.len() {
        if used[a] || ev[a].im <= ZERO_REAL_TOL {
            continue;
        }
        let partner = (0..ev.len()).find(|&b| {
            !used[b]
                && b != a
                && (ev[b].re - ev[a].re).abs() <= 1e-7 * (1.0 + ev[a].norm())
                && (ev[b].im + ev[a].im).abs() <= 1e-7 * (1.0 + ev[a].norm())
        });
        if let Some(b) = partner {
            used[a] = true;
            used[b] = true;
            pairs.push(ev[a]);
        }
    }
    let rest = ev.iter().zip(&used).filter(|(_, u)| !**u).map(|(e, _)| *e).collect();
    (pairs, rest)
}

/// Threshold rules, applied in order: center, stable, hopf-candidate,
/// unstable, degenerate.
pub fn classify(ev: &[Complex64]) -> Classification {
    let any_positive = ev.iter().any(|e| e.re > ZERO_REAL_TOL);
    let (pairs, rest) = conjugate_pairs(ev);

    if pairs.iter().any(|p| p.re.abs() < ZERO_REAL_TOL) && !any_positive {
        return Classification::Center;
    }
    if !ev.is_empty() && ev.iter().all(|e| e.re < -ZERO_REAL_TOL) {
        return Classification::Stable;
    }
    let hopf = pairs.iter().enumerate().any(|(a, p)| {
        p.re > 0.0
            && p.re < HOPF_REAL_BOUND
            && rest.iter().all(|e| e.re < 0.0)
            && pairs.iter().enumerate().all(|(b, q)| a == b || q.re < 0.0)
    });
    if hopf {
        return Classification::HopfCandidate;
    }
    if any_positive {
        return Classification::Unstable;
    }
    Classification::Degenerate
}

/// Conjugate pair with the largest real part, if any.
pub fn leading_pair(ev: &[Complex64]) -> Option<Complex64> {
    conjugate_pairs(ev).0.into_iter().max_by(|a, b| a.re.total_cmp(&b.re))
}

fn serialize_complex<S: serde::Serializer>(ev: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(ev.len()))?;
    for e in ev {
        seq.serialize_element(&[e.re, e.im])?;
    }
    seq.end()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&[c(0.0, 0.0), c(0.0, 0.4619), c(0.0, -0.4619)]), Classification::Center);
        assert_eq!(
            classify(&[c(-0.2475, 0.0), c(0.0025, 0.25), c(0.0025, -0.25), c(-0.2525, 0.0)]),
            Classification::HopfCandidate
        );
        assert_eq!(classify(&[c(-1.0, 0.0), c(-2.0, 0.0)]), Classification::Stable);
        assert_eq!(classify(&[c(0.4, 0.0), c(0.4, 0.0), c(0.4, 0.0)]), Classification::Unstable);
        assert_eq!(classify(&[c(0.3, 0.1), c(0.3, -0.1), c(-1.0, 0.0)]), Classification::Unstable);
        assert_eq!(classify(&[c(0.0, 0.0), c(-1.0, 0.0)]), Classification::Degenerate);
    }

    #[test]
    fn example1_boundary_point() {
        let rep = equilibrium_example1(Example1Rates::new(2.0, 0.2, 1.5, 0.4)).unwrap();
        assert_abs_diff_eq!(rep.point[0], 0.0);
        assert_abs_diff_eq!(rep.point[1], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rep.point[2], 2.0, epsilon = 1e-15);
        assert!(!rep.valid);
        assert!(rep.residual <= 1e-12);
        // Full-state linearization at this point (frozen from a symbolic
        // computation): a triple eigenvalue k12 k21 / (k21 - k12) = 0.4.
        for e in &rep.eigenvalues {
            assert_abs_diff_eq!(e.re, 0.4, epsilon = 1e-6);
            assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-6);
        }
        assert_eq!(rep.classification, Classification::Unstable);
    }

    #[test]
    fn example1_singular_when_rates_match() {
        assert!(matches!(
            equilibrium_example1(Example1Rates::new(1.0, 0.3, 1.0, 0.3)),
            Err(Error::SingularEquilibrium(_))
        ));
    }

    #[test]
    fn example1_coexistence_point_is_a_center() {
        let rates = Example1Rates::new(2.0, 0.2, 1.5, 0.4);
        let rep = coexistence_example1(rates).unwrap();
        assert!(rep.valid);
        assert!(rep.residual < 1e-15);
        assert_eq!(rep.classification, Classification::Center);
        // +-i sqrt(k10 k20) k12 k21 / (k10 k21 + k12 k20 + k12 k21), from the
        // symbolic linearization.
        let w = (2.0_f64 * 1.5).sqrt() * 0.2 * 0.4 / (2.0 * 0.4 + 0.2 * 1.5 + 0.2 * 0.4);
        let pair = leading_pair(&rep.eigenvalues).unwrap();
        assert_abs_diff_eq!(pair.im, w, epsilon = 1e-9);
        assert_abs_diff_eq!(pair.re, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn example2_uniform_spectrum() {
        for mu in [-0.1, 0.0, 0.01, 0.05] {
            let rep = equilibrium_example2(mu).unwrap();
            let want = example2_spectrum(mu);
            let mut want = want.to_vec();
            want.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            for (g, w) in rep.eigenvalues.iter().zip(&want) {
                assert_abs_diff_eq!(g.re, w.re, epsilon = 1e-9);
                assert_abs_diff_eq!(g.im, w.im, epsilon = 1e-9);
            }
        }
        assert_eq!(equilibrium_example2(-0.1).unwrap().classification, Classification::Stable);
        assert_eq!(equilibrium_example2(0.01).unwrap().classification, Classification::HopfCandidate);
        assert_eq!(equilibrium_example2(0.0).unwrap().classification, Classification::Center);
    }
}
