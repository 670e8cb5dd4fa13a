//! Fixed-step RK4 integration of population dynamics on the simplex and the
//! resulting [`Trajectory`] type, which doubles as the reference `Y*(t)` for
//! the controllers.

use std::io::{self, Write};

use serde::Serialize;

use crate::ensemble::{controlled_rhs, replicator_into, FeedbackGains, PayoffMatrix, PopulationVector, SIMPLEX_TOL};
use crate::error::{Error, Result};

/// Drift of `sum(y)` from 1 beyond which a step is renormalized.
pub const RENORM_THRESHOLD: f64 = 1e-12;

/// A (possibly time-dependent) vector field on the simplex.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

impl VectorField for PayoffMatrix {
    fn dim(&self) -> usize {
        PayoffMatrix::dim(self)
    }

    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        replicator_into(self.matrix(), y, dy);
        Ok(())
    }
}

/// Replicator dynamics under the tracking controller, with `Y*` read from a
/// reference trajectory.
pub struct ControlledField<'a> {
    pub gains: &'a FeedbackGains,
    pub reference: &'a Trajectory,
}

impl VectorField for ControlledField<'_> {
    fn dim(&self) -> usize {
        self.gains.dim()
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let y_star = self.reference.sample(t)?;
        dy.copy_from_slice(&controlled_rhs(self.gains, &y_star, y)?);
        Ok(())
    }
}

/// Wraps a closure `(t, y, dy)` as a field.
pub struct FnField<F> {
    pub dim: usize,
    pub f: F,
}

impl<F> VectorField for FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        (self.f)(t, y, dy)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub model: String,
    pub params: String,
}

impl TrajectoryMeta {
    pub fn new(model: impl Into<String>, params: impl Into<String>) -> Self {
        Self { model: model.into(), params: params.into() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct IntegrationStats {
    /// Steps after which the state was clamped or rescaled back onto the
    /// simplex.
    pub renormalizations: usize,
    /// Largest `|sum(y) - 1|` seen after any step, before renormalization.
    pub max_drift: f64,
}

/// Population fractions on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    meta: TrajectoryMeta,
    stats: IntegrationStats,
}

impl Trajectory {
    /// Checks that times are strictly increasing on a uniform grid and that
    /// every state lies on the simplex.
    pub fn new(times: Vec<f64>, states: Vec<Vec<f64>>, meta: TrajectoryMeta) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::Parameter(format!(
                "trajectory needs matching, nonempty times and states ({} vs {})",
                times.len(),
                states.len()
            )));
        }
        let m = states[0].len();
        if times.len() > 1 {
            let dt = times[1] - times[0];
            for (k, w) in times.windows(2).enumerate() {
                if !(w[1] > w[0]) {
                    return Err(Error::Parameter(format!("times not strictly increasing at index {}", k + 1)));
                }
                let expected = times[0] + (k + 1) as f64 * dt;
                if (w[1] - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                    return Err(Error::Parameter(format!("time grid is not uniform at index {}", k + 1)));
                }
            }
        }
        for (k, s) in states.iter().enumerate() {
            if s.len() != m {
                return Err(Error::Dimension { expected: m, got: s.len() });
            }
            let sum: f64 = s.iter().sum();
            if (sum - 1.0).abs() > SIMPLEX_TOL || s.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::Parameter(format!("state {k} is not on the simplex")));
            }
        }
        Ok(Self { times, states, meta, stats: IntegrationStats::default() })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn meta(&self) -> &TrajectoryMeta {
        &self.meta
    }

    pub fn stats(&self) -> IntegrationStats {
        self.stats
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    /// Grid spacing (0 for a single-point trajectory).
    pub fn dt(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }

    /// Linear interpolation between bracketing grid states; exact on grid
    /// points.
    pub fn sample(&self, t: f64) -> Result<PopulationVector> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(t, &mut out)?;
        Ok(PopulationVector::from_vec_unchecked(out))
    }

    pub fn sample_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let (start, end) = (self.t_start(), self.t_end());
        if !(t >= start && t <= end) {
            return Err(Error::Range { t, start, end });
        }
        // first index with time > t
        let hi = self.times.partition_point(|&x| x <= t);
        let lo = hi - 1;
        if self.times[lo] == t || hi == self.times.len() {
            out.copy_from_slice(&self.states[lo]);
            return Ok(());
        }
        let w = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        for ((o, a), b) in out.iter_mut().zip(&self.states[lo]).zip(&self.states[hi]) {
            *o = a + w * (b - a);
        }
        Ok(())
    }

    /// Delimited-text export: a `# model=..., params=...` header (plus
    /// `extra` fields), a column row, then one row per grid point. With a
    /// `reference`, its values at the same times are appended as `Ystar_i`.
    pub fn write_csv<W: Write>(
        &self,
        mut w: W,
        extra: &[(&str, String)],
        reference: Option<&Trajectory>,
    ) -> io::Result<()> {
        write!(w, "# model={}, params={}", self.meta.model, self.meta.params)?;
        for (k, v) in extra {
            write!(w, ", {k}={v}")?;
        }
        writeln!(w)?;
        write!(w, "t")?;
        for i in 1..=self.dim() {
            write!(w, ",Y_{i}")?;
        }
        if reference.is_some() {
            for i in 1..=self.dim() {
                write!(w, ",Ystar_{i}")?;
            }
        }
        writeln!(w)?;
        let mut ref_row = vec![0.0; self.dim()];
        for (t, s) in self.times.iter().zip(&self.states) {
            write!(w, "{t}")?;
            for v in s {
                write!(w, ",{v}")?;
            }
            if let Some(r) = reference {
                r.sample_into(*t, &mut ref_row)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
                for v in &ref_row {
                    write!(w, ",{v}")?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Classic fourth-order Runge–Kutta with fixed step `dt` from `t = 0` to
/// `t_end` (which must be a whole number of steps).
///
/// After each step negative components are clamped to zero and the state
/// is rescaled to sum 1 if it drifted by more than [`RENORM_THRESHOLD`].
pub fn integrate<F: VectorField + ?Sized>(
    field: &F,
    y0: &PopulationVector,
    dt: f64,
    t_end: f64,
    meta: TrajectoryMeta,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= dt && t_end.is_finite()) {
        return Err(Error::Parameter(format!("t_end = {t_end} must be at least dt = {dt}")));
    }
    let m = field.dim();
    if y0.dim() != m {
        return Err(Error::Dimension { expected: m, got: y0.dim() });
    }
    let steps = (t_end / dt).round();
    if (steps * dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return Err(Error::Parameter(format!("t_end = {t_end} is not a multiple of dt = {dt}")));
    }
    let steps = steps as usize;

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut stats = IntegrationStats::default();
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut tmp = vec![0.0; m];
    times.push(0.0);
    states.push(y.clone());

    for n in 0..steps {
        let t = n as f64 * dt;
        field.eval(t, &y, &mut k1)?;
        axpy(&y, 0.5 * dt, &k1, &mut tmp);
        field.eval(t + 0.5 * dt, &tmp, &mut k2)?;
        axpy(&y, 0.5 * dt, &k2, &mut tmp);
        field.eval(t + 0.5 * dt, &tmp, &mut k3)?;
        axpy(&y, dt, &k3, &mut tmp);
        field.eval(t + dt, &tmp, &mut k4)?;
        for i in 0..m {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = (n + 1) as f64 * dt;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { time: t_next });
        }
        let drift = (y.iter().sum::<f64>() - 1.0).abs();
        stats.max_drift = stats.max_drift.max(drift);
        let clamped = y.iter().any(|v| *v < 0.0);
        if clamped {
            y.iter_mut().for_each(|v| *v = v.max(0.0));
        }
        let sum: f64 = y.iter().sum();
        if clamped || (sum - 1.0).abs() > RENORM_THRESHOLD {
            if !(sum > 0.0) {
                return Err(Error::Divergence { time: t_next });
            }
            y.iter_mut().for_each(|v| *v /= sum);
            stats.renormalizations += 1;
        }
        times.push(t_next);
        states.push(y.clone());
    }

    Ok(Trajectory { times, states, meta, stats })
}

fn axpy(y: &[f64], a: f64, x: &[f64], out: &mut [f64]) {
    for ((o, yi), xi) in out.iter_mut().zip(y).zip(x) {
        *o = yi + a * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Example1Rates;
    use approx::assert_abs_diff_eq;

    fn meta() -> TrajectoryMeta {
        TrajectoryMeta::new("test", "")
    }

    #[test]
    fn uniform_start_stays_put_for_example2() {
        let k = PayoffMatrix::example2(0.05);
        let traj = integrate(&k, &PopulationVector::uniform(4), 0.01, 20.0, meta()).unwrap();
        for s in traj.states() {
            for v in s {
                assert_abs_diff_eq!(*v, 0.25, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn controlled_with_constant_reference_is_constant() {
        let y0 = PopulationVector::new(vec![0.2, 0.2, 0.6]).unwrap();
        let reference = Trajectory::new(vec![0.0, 10.0], vec![y0.to_vec(), y0.to_vec()], meta()).unwrap();
        let gains = FeedbackGains::example1(2.0, 0.2, 1.5, 0.4).unwrap();
        let field = ControlledField { gains: &gains, reference: &reference };
        let traj = integrate(&field, &y0, 0.1, 10.0, meta()).unwrap();
        assert!(traj.states().iter().all(|s| s == &y0.to_vec()));
    }

    #[test]
    fn example2_reference_conserves_mass() {
        let k = PayoffMatrix::example2(0.01);
        let y0 = PopulationVector::new(vec![0.1, 0.2, 0.4, 0.3]).unwrap();
        let traj = integrate(&k, &y0, 0.01, 100.0, meta()).unwrap();
        assert_eq!(traj.len(), 10_001);
        assert!(traj.stats().max_drift <= 1e-9);
        assert_eq!(traj.stats().renormalizations, 0);
        // It oscillates: Y_1 rises well above its start and comes back down.
        let y1: Vec<f64> = traj.states().iter().map(|s| s[0]).collect();
        let max = y1.iter().cloned().fold(f64::MIN, f64::max);
        let min = y1.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max > 0.4 && min < 0.11, "{min} {max}");
    }

    #[test]
    fn rk4_is_fourth_order() {
        let k = PayoffMatrix::example1(Example1Rates::new(2.0, 0.2, 1.5, 0.4)).unwrap();
        let y0 = PopulationVector::new(vec![0.2, 0.2, 0.6]).unwrap();
        let end = |dt: f64| integrate(&k, &y0, dt, 20.0, meta()).unwrap().states().last().unwrap().clone();
        let fine = end(0.2 / 8.0);
        let err = |y: Vec<f64>| y.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let order = (err(end(0.2)) / err(end(0.1))).log2();
        assert!(order >= 3.9, "observed order {order}");
    }

    #[test]
    fn sample_interpolates() {
        let traj = Trajectory::new(
            vec![0.0, 1.0, 2.0],
            vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]],
            meta(),
        )
        .unwrap();
        assert_eq!(&*traj.sample(1.0).unwrap(), &[0.5, 0.5]);
        assert_eq!(&*traj.sample(2.0).unwrap(), &[0.0, 1.0]);
        assert_eq!(&*traj.sample(0.5).unwrap(), &[0.75, 0.25]);
        assert!(matches!(traj.sample(2.5), Err(Error::Range { .. })));
        assert!(traj.sample(-0.1).is_err());
    }

    #[test]
    fn integrate_rejects_bad_steps() {
        let k = PayoffMatrix::example2(0.0);
        let y0 = PopulationVector::uniform(4);
        assert!(integrate(&k, &y0, 0.0, 1.0, meta()).is_err());
        assert!(integrate(&k, &y0, 0.3, 1.0, meta()).is_err());
        assert!(integrate(&k, &y0, 1.0, 0.5, meta()).is_err());
    }

    #[test]
    fn divergence_reports_time() {
        let blowup = FnField {
            dim: 2,
            f: |t: f64, _y: &[f64], dy: &mut [f64]| {
                let v = if t > 0.25 { f64::INFINITY } else { 0.0 };
                dy.fill(v);
                Ok(())
            },
        };
        let err = integrate(&blowup, &PopulationVector::uniform(2), 0.1, 1.0, meta()).unwrap_err();
        assert!(matches!(err, Error::Divergence { time } if (time - 0.3).abs() < 1e-12), "{err}");
    }

    #[test]
    fn csv_header_and_columns() {
        let traj = Trajectory::new(vec![0.0, 0.5], vec![vec![0.5, 0.5], vec![0.25, 0.75]], TrajectoryMeta::new("example2", "mu=0.01")).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, &[("seed", "3".into())], Some(&traj)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# model=example2, params=mu=0.01, seed=3");
        assert_eq!(lines.next().unwrap(), "t,Y_1,Y_2,Ystar_1,Ystar_2");
        assert_eq!(lines.next().unwrap(), "0,0.5,0.5,0.5,0.5");
    }
}
