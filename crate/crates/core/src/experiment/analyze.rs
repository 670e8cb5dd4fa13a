//! Equilibrium reports and one-parameter sweeps for configured models.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use super::config::ModelSpec;
use crate::ensemble::{
    analyze_point, classify, coexistence_example1, equilibrium_example1, equilibrium_example2, leading_pair,
    Classification, EquilibriumReport, Example1Rates, ZERO_REAL_TOL,
};
use crate::error::{Error, Result};

/// A labelled equilibrium report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedReport {
    pub label: String,
    #[serde(flatten)]
    pub report: EquilibriumReport,
}

/// Reports for the model's known equilibria, or for `point` when given.
///
/// The three-task example yields its boundary formula point and its
/// interior coexistence point; the cyclic example its uniform point.
/// Custom models need an explicit point.
pub fn analyze(model: &ModelSpec, point: Option<&[f64]>) -> Result<Vec<NamedReport>> {
    let named = |label: &str, report| NamedReport { label: label.into(), report };
    if let Some(p) = point {
        if p.len() != model.dim() {
            return Err(Error::Dimension { expected: model.dim(), got: p.len() });
        }
        return Ok(vec![named("given", analyze_point(&model.payoff()?, p)?)]);
    }
    match model {
        ModelSpec::Example1 { k10, k12, k20, k21 } => {
            let rates = Example1Rates::new(*k10, *k12, *k20, *k21);
            Ok(vec![
                named("formula", equilibrium_example1(rates)?),
                named("coexistence", coexistence_example1(rates)?),
            ])
        }
        ModelSpec::Example2 { mu, rate } if *rate == 1.0 => Ok(vec![named("uniform", equilibrium_example2(*mu)?)]),
        ModelSpec::Example2 { .. } => Ok(vec![named("uniform", analyze_point(&model.payoff()?, &[0.25; 4])?)]),
        ModelSpec::Custom { .. } => Err(Error::Config(vec!["point: required for a custom model".into()])),
    }
}

fn fmt_complex(e: &Complex64) -> String {
    if e.im == 0.0 {
        format!("{:.9}", e.re)
    } else {
        format!("{:.9}{:+.9}i", e.re, e.im)
    }
}

/// Human-readable block for one report.
pub fn format_report(r: &NamedReport) -> String {
    let mut s = String::new();
    let p = &r.report;
    let point: Vec<String> = p.point.iter().map(|v| format!("{v:.9}")).collect();
    let ev: Vec<String> = p.eigenvalues.iter().map(fmt_complex).collect();
    let _ = writeln!(s, "[{}]", r.label);
    let _ = writeln!(s, "point          = [{}]", point.join(", "));
    let _ = writeln!(s, "residual       = {:.3e}", p.residual);
    let _ = writeln!(s, "eigenvalues    = [{}]", ev.join(", "));
    let _ = writeln!(s, "classification = {}", p.classification);
    let _ = writeln!(s, "valid          = {}", p.valid);
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub point: Vec<f64>,
    #[serde(serialize_with = "pairs")]
    pub eigenvalues: Vec<Complex64>,
    pub classification: Classification,
    /// Real part of the leading conjugate pair.
    pub pair_real: Option<f64>,
}

fn pairs<S: serde::Serializer>(ev: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(ev.len()))?;
    for e in ev {
        seq.serialize_element(&[e.re, e.im])?;
    }
    seq.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
    /// Parameter values where the leading pair's real part changes sign
    /// (exact zeros, or linear interpolation between rows).
    pub crossings: Vec<f64>,
}

/// Sweeps one parameter over `steps` evenly spaced values in `[from, to]`.
///
/// `mu` (and `rate`) for the cyclic example; `k10`, `k12`, `k20`, `k21` for
/// the three-task example, analyzed at its coexistence point.
pub fn sweep(model: &ModelSpec, parameter: &str, from: f64, to: f64, steps: usize) -> Result<Sweep> {
    let mut errs = Vec::new();
    if steps < 2 {
        errs.push(format!("steps: need at least 2, got {steps}"));
    }
    if !(from.is_finite() && to.is_finite()) {
        errs.push("range: bounds must be finite".to_string());
    }
    let known: &[&str] = match model {
        ModelSpec::Example1 { .. } => &["k10", "k12", "k20", "k21"],
        ModelSpec::Example2 { .. } => &["mu", "rate"],
        ModelSpec::Custom { .. } => &[],
    };
    if !known.contains(&parameter) {
        errs.push(format!("param: unknown parameter `{parameter}` for {} (known: {known:?})", model.label()));
    }
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }

    let mut rows = Vec::with_capacity(steps);
    for s in 0..steps {
        let value = from + (to - from) * s as f64 / (steps - 1) as f64;
        let mut m = model.clone();
        match (&mut m, parameter) {
            (ModelSpec::Example1 { k10, .. }, "k10") => *k10 = value,
            (ModelSpec::Example1 { k12, .. }, "k12") => *k12 = value,
            (ModelSpec::Example1 { k20, .. }, "k20") => *k20 = value,
            (ModelSpec::Example1 { k21, .. }, "k21") => *k21 = value,
            (ModelSpec::Example2 { mu, .. }, "mu") => *mu = value,
            (ModelSpec::Example2 { rate, .. }, "rate") => *rate = value,
            _ => unreachable!("parameter checked above"),
        }
        let report = match &m {
            ModelSpec::Example1 { k10, k12, k20, k21 } => {
                coexistence_example1(Example1Rates::new(*k10, *k12, *k20, *k21))?
            }
            _ => analyze(&m, None)?.remove(0).report,
        };
        rows.push(SweepRow {
            value,
            pair_real: leading_pair(&report.eigenvalues).map(|p| p.re),
            classification: classify(&report.eigenvalues),
            eigenvalues: report.eigenvalues,
            point: report.point,
        });
    }
    let crossings = crossings(&rows);
    Ok(Sweep { parameter: parameter.to_string(), rows, crossings })
}

fn crossings(rows: &[SweepRow]) -> Vec<f64> {
    let zero = |x: f64| x.abs() < ZERO_REAL_TOL;
    let mut out = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        let Some(a) = row.pair_real else { continue };
        if zero(a) {
            out.push(row.value);
            continue;
        }
        let Some(next) = rows.get(k + 1) else { continue };
        let Some(b) = next.pair_real else { continue };
        if !zero(b) && a.signum() != b.signum() {
            out.push(row.value + (next.value - row.value) * a / (a - b));
        }
    }
    out
}

/// `value,classification,pair_real,eig_1_re,eig_1_im,...`
pub fn format_sweep_csv(sweep: &Sweep) -> String {
    let mut s = String::new();
    let m = sweep.rows.first().map_or(0, |r| r.eigenvalues.len());
    let _ = write!(s, "{},classification,pair_real", sweep.parameter);
    for i in 1..=m {
        let _ = write!(s, ",eig_{i}_re,eig_{i}_im");
    }
    let _ = writeln!(s);
    for r in &sweep.rows {
        let pr = r.pair_real.map_or(String::new(), |v| v.to_string());
        let _ = write!(s, "{},{},{}", r.value, r.classification, pr);
        for e in &r.eigenvalues {
            let _ = write!(s, ",{},{}", e.re, e.im);
        }
        let _ = writeln!(s);
    }
    let crossings: Vec<String> = sweep.crossings.iter().map(|c| c.to_string()).collect();
    let _ = writeln!(s, "# crossings={}", crossings.join(";"));
    s
}
