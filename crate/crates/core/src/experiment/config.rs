//! TOML experiment configuration.
//!
//! ```toml
//! name = "fig2b"
//! fidelity = "ssa"          # ode | ssa | micro
//! t_end = 100.0
//! dt = 0.01
//! trials = 5
//! seed = 1
//!
//! [model]                   # rates driving the uncontrolled run
//! kind = "example1"         # example1 | example2 | custom
//! k10 = 0.004
//! k12 = 0.0004
//! k20 = 0.003
//! k21 = 0.0008
//!
//! [reference]               # desired trajectory; defaults to model + initial
//! fractions0 = [0.2, 0.2, 0.6]
//! model = { kind = "example1", k10 = 2.0, k12 = 0.2, k20 = 1.5, k21 = 0.4 }
//!
//! [initial]                 # counts, or fractions plus n
//! counts = [2, 50, 50]
//!
//! [control]
//! mode = "on"               # off | on
//! gains = { kind = "example1", a10 = 0.03, a12 = 0.003, a20 = 0.0225, a21 = 0.006 }
//!
//! [estimation]              # micro only
//! mode = "distributed"      # centralized | distributed
//! radius = 5.0
//!
//! [arena]                   # micro only
//! width = 18.0
//! height = 18.0
//! speed = 1.0
//! boundary = "quarter-turn" # quarter-turn | specular
//!
//! [ssa]
//! extinction_guard = true
//! max_hold = 0.1            # rate re-evaluation horizon under control
//!
//! [output]
//! path = "out/fig2b"
//! format = "csv"            # csv | json
//! snapshots = false
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensemble::{Example1Rates, FeedbackGains, PayoffMatrix, PopulationVector};
use crate::error::{Error, Result};
use crate::micro::{Arena, Boundary, Estimation};
use crate::ssa::CountVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fidelity {
    Ode,
    Ssa,
    Micro,
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fidelity::Ode => "ode",
            Fidelity::Ssa => "ssa",
            Fidelity::Micro => "micro",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Example1 { k10: f64, k12: f64, k20: f64, k21: f64 },
    Example2 {
        mu: f64,
        /// Scale of the unit cyclic rates (count-scale runs use e.g. 0.01).
        #[serde(default = "one")]
        rate: f64,
    },
    Custom { matrix: Vec<Vec<f64>> },
}

fn one() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn payoff(&self) -> Result<PayoffMatrix> {
        match self {
            ModelSpec::Example1 { k10, k12, k20, k21 } => PayoffMatrix::example1(Example1Rates::new(*k10, *k12, *k20, *k21)),
            ModelSpec::Example2 { mu, rate } => PayoffMatrix::example2_scaled(*rate, *mu),
            ModelSpec::Custom { matrix } => PayoffMatrix::from_rows(matrix),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Example1 { .. } => 3,
            ModelSpec::Example2 { .. } => 4,
            ModelSpec::Custom { matrix } => matrix.len(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ModelSpec::Example1 { .. } => "example1",
            ModelSpec::Example2 { .. } => "example2",
            ModelSpec::Custom { .. } => "custom",
        }
    }

    /// `k=v` list used in file headers (`;`-separated to stay CSV-safe).
    pub fn params_string(&self) -> String {
        match self {
            ModelSpec::Example1 { k10, k12, k20, k21 } => format!("k10={k10};k12={k12};k20={k20};k21={k21}"),
            ModelSpec::Example2 { mu, rate } => format!("mu={mu};rate={rate}"),
            ModelSpec::Custom { matrix } => {
                let rows: Vec<String> = matrix
                    .iter()
                    .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
                    .collect();
                format!("matrix={}", rows.join("|"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GainsSpec {
    Example1 { a10: f64, a12: f64, a20: f64, a21: f64 },
    /// The same gain on every cyclic edge `(i, i+1)` of four tasks.
    Example2 { alpha: f64 },
    Custom { matrix: Vec<Vec<f64>> },
}

impl GainsSpec {
    pub fn gains(&self) -> Result<FeedbackGains> {
        match self {
            GainsSpec::Example1 { a10, a12, a20, a21 } => FeedbackGains::example1(*a10, *a12, *a20, *a21),
            GainsSpec::Example2 { alpha } => FeedbackGains::example2(*alpha),
            GainsSpec::Custom { matrix } => FeedbackGains::from_rows(matrix),
        }
    }

    pub fn params_string(&self) -> String {
        match self {
            GainsSpec::Example1 { a10, a12, a20, a21 } => format!("a10={a10};a12={a12};a20={a20};a21={a21}"),
            GainsSpec::Example2 { alpha } => format!("alpha={alpha}"),
            GainsSpec::Custom { matrix } => format!("alpha={matrix:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    /// Defaults to the experiment model.
    #[serde(default)]
    pub model: Option<ModelSpec>,
    /// Defaults to the initial fractions.
    #[serde(default)]
    pub fractions0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default)]
    pub counts: Option<Vec<u32>>,
    #[serde(default)]
    pub fractions: Option<Vec<f64>>,
    /// Population size paired with `fractions`.
    #[serde(default)]
    pub n: Option<u32>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlMode {
    #[default]
    Off,
    On,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSpec {
    #[serde(default)]
    pub mode: ControlMode,
    #[serde(default)]
    pub gains: Option<GainsSpec>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimationMode {
    #[default]
    Centralized,
    Distributed,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationSpec {
    #[serde(default)]
    pub mode: EstimationMode,
    #[serde(default)]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundarySpec {
    #[default]
    QuarterTurn,
    Specular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArenaSpec {
    #[serde(default = "eighteen")]
    pub width: f64,
    #[serde(default = "eighteen")]
    pub height: f64,
    #[serde(default = "one")]
    pub speed: f64,
    /// Overrides the pairwise relative speed in the radius formulas.
    #[serde(default)]
    pub relative_speed: Option<f64>,
    #[serde(default)]
    pub boundary: BoundarySpec,
}

fn eighteen() -> f64 {
    18.0
}

impl Default for ArenaSpec {
    fn default() -> Self {
        Self { width: 18.0, height: 18.0, speed: 1.0, relative_speed: None, boundary: BoundarySpec::QuarterTurn }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsaSpec {
    #[serde(default = "yes")]
    pub extinction_guard: bool,
    /// Longest interval over which rates are held without an event; only
    /// used under control, where rates depend on time.
    #[serde(default)]
    pub max_hold: Option<f64>,
    #[serde(default)]
    pub max_events: Option<usize>,
}

fn yes() -> bool {
    true
}

impl Default for SsaSpec {
    fn default() -> Self {
        Self { extinction_guard: true, max_hold: None, max_events: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Per-step agent states for micro runs (large).
    #[serde(default)]
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub fidelity: Fidelity,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "one_trial")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelSpec,
    #[serde(default)]
    pub reference: Option<ReferenceSpec>,
    pub initial: InitialSpec,
    #[serde(default)]
    pub control: ControlSpec,
    #[serde(default)]
    pub estimation: EstimationSpec,
    #[serde(default)]
    pub arena: ArenaSpec,
    #[serde(default)]
    pub ssa: SsaSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one_trial() -> usize {
    1
}

/// Everything a run needs, built and checked.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub payoff: PayoffMatrix,
    pub gains: Option<FeedbackGains>,
    pub reference_model: PayoffMatrix,
    pub reference_y0: PopulationVector,
    pub y0: PopulationVector,
    /// Present for ssa and micro.
    pub counts0: Option<CountVector>,
    pub arena: Arena,
    pub estimation: Estimation,
    pub sensing_radius: f64,
    pub boundary: Boundary,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(vec![e.message().to_string()]))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Short SHA-256 of the canonical serialization, written into headers.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }

    pub fn controlled(&self) -> bool {
        self.control.mode == ControlMode::On
    }

    /// Checks every field and builds the model objects. All problems are
    /// reported together in one [`Error::Config`].
    pub fn resolve(&self) -> Result<Resolved> {
        let mut errs: Vec<String> = Vec::new();
        let mut bad = |field: &str, msg: String| errs.push(format!("{field}: {msg}"));

        if !(self.dt > 0.0 && self.dt.is_finite()) {
            bad("dt", format!("must be positive, got {}", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            bad("t_end", format!("must be positive, got {}", self.t_end));
        } else if self.dt > 0.0 {
            let steps = (self.t_end / self.dt).round();
            if steps < 1.0 || (steps * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(1.0) {
                bad("t_end", format!("{} is not a positive multiple of dt = {}", self.t_end, self.dt));
            }
        }
        if self.trials == 0 {
            bad("trials", "must be at least 1".into());
        }

        let payoff = self.model.payoff().map_err(|e| bad("model", e.to_string())).ok();
        let m = self.model.dim();

        let gains = match (self.control.mode, &self.control.gains) {
            (ControlMode::Off, _) => None,
            (ControlMode::On, None) => {
                bad("control.gains", "required when control is on".into());
                None
            }
            (ControlMode::On, Some(g)) => match g.gains() {
                Ok(g) if g.dim() != m => {
                    bad("control.gains", format!("has {} tasks, model has {m}", g.dim()));
                    None
                }
                Ok(g) => Some(g),
                Err(e) => {
                    bad("control.gains", e.to_string());
                    None
                }
            },
        };

        let counts0 = match (&self.initial.counts, &self.initial.fractions, self.initial.n) {
            (Some(_), Some(_), _) => {
                bad("initial", "give counts or fractions, not both".into());
                None
            }
            (Some(c), None, n) => {
                let total: u32 = c.iter().sum();
                if n.is_some_and(|n| n != total) {
                    bad("initial.n", format!("{} does not match the counts total {total}", n.unwrap_or(0)));
                }
                CountVector::new(c.clone()).map_err(|e| bad("initial.counts", e.to_string())).ok()
            }
            (None, Some(y), Some(n)) => match PopulationVector::new(y.clone()) {
                Ok(y) => CountVector::from_fractions(&y, n).map_err(|e| bad("initial", e.to_string())).ok(),
                Err(e) => {
                    bad("initial.fractions", e.to_string());
                    None
                }
            },
            (None, Some(_), None) => {
                if self.fidelity != Fidelity::Ode {
                    bad("initial.n", "required with fractions for ssa and micro".into());
                }
                None
            }
            (None, None, _) => {
                bad("initial", "needs counts or fractions".into());
                None
            }
        };
        if let Some(c) = &counts0 {
            if c.dim() != m {
                bad("initial.counts", format!("has {} tasks, model has {m}", c.dim()));
            }
            if c.total() == 0 {
                bad("initial.counts", "total population is zero".into());
            }
            if self.fidelity != Fidelity::Ode && self.ssa.extinction_guard && c.min() == 0 {
                bad("initial.counts", "every task needs at least one robot under the extinction guard".into());
            }
            if self.controlled() && c.min() == 0 {
                bad("initial.counts", "feedback rates need every task populated".into());
            }
        }
        let y0 = match (&self.initial.fractions, &counts0) {
            (Some(y), _) => PopulationVector::new(y.clone()).ok(),
            (None, Some(c)) if c.total() > 0 => PopulationVector::from_counts(c.as_slice()).ok(),
            _ => None,
        };
        if let Some(y) = &y0 {
            if y.dim() != m {
                bad("initial.fractions", format!("has {} tasks, model has {m}", y.dim()));
            }
        }

        let reference = self.reference.clone().unwrap_or(ReferenceSpec { model: None, fractions0: None });
        let reference_model = match &reference.model {
            None => payoff.clone(),
            Some(spec) => match spec.payoff() {
                Ok(k) if k.dim() != m => {
                    bad("reference.model", format!("has {} tasks, model has {m}", k.dim()));
                    None
                }
                Ok(k) => Some(k),
                Err(e) => {
                    bad("reference.model", e.to_string());
                    None
                }
            },
        };
        let reference_y0 = match &reference.fractions0 {
            None => y0.clone(),
            Some(y) => match PopulationVector::new(y.clone()) {
                Ok(y) if y.dim() != m => {
                    bad("reference.fractions0", format!("has {} tasks, model has {m}", y.dim()));
                    None
                }
                Ok(y) => Some(y),
                Err(e) => {
                    bad("reference.fractions0", e.to_string());
                    None
                }
            },
        };

        let arena = Arena::new(self.arena.width, self.arena.height).map_err(|e| bad("arena", e.to_string())).ok();
        let mut sensing_radius = 0.0;
        if self.fidelity == Fidelity::Micro {
            if !(self.arena.speed >= 0.0 && self.arena.speed.is_finite()) {
                bad("arena.speed", format!("must be nonnegative, got {}", self.arena.speed));
            }
            if let Some(v) = self.arena.relative_speed {
                if !(v > 0.0 && v.is_finite()) {
                    bad("arena.relative_speed", format!("must be positive, got {v}"));
                }
            }
            if let Some(c) = &counts0 {
                if (c.total() as usize) < m {
                    bad("initial.counts", format!("{} robots cannot cover {m} tasks", c.total()));
                }
            }
            match (self.estimation.mode, self.estimation.radius) {
                (EstimationMode::Distributed, Some(r)) if r > 0.0 => sensing_radius = r,
                (EstimationMode::Distributed, Some(r)) => bad("estimation.radius", format!("must be positive, got {r}")),
                (EstimationMode::Distributed, None) => bad("estimation.radius", "required for distributed estimation".into()),
                (EstimationMode::Centralized, _) => {}
            }
        } else if self.estimation.mode == EstimationMode::Distributed {
            bad("estimation.mode", format!("distributed estimation needs fidelity micro, not {}", self.fidelity));
        }
        if let Some(h) = self.ssa.max_hold {
            if !(h > 0.0 && h.is_finite()) {
                bad("ssa.max_hold", format!("must be positive, got {h}"));
            }
        }

        if !errs.is_empty() {
            return Err(Error::Config(errs));
        }
        Ok(Resolved {
            payoff: payoff.expect("checked"),
            gains,
            reference_model: reference_model.expect("checked"),
            reference_y0: reference_y0.expect("checked"),
            y0: y0.expect("checked"),
            counts0,
            arena: arena.expect("checked"),
            estimation: match self.estimation.mode {
                EstimationMode::Centralized => Estimation::Centralized,
                EstimationMode::Distributed => Estimation::Distributed,
            },
            sensing_radius,
            boundary: match self.arena.boundary {
                BoundarySpec::QuarterTurn => Boundary::QuarterTurn,
                BoundarySpec::Specular => Boundary::Specular,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        fidelity = "ode"
        t_end = 1.0
        dt = 0.1
        [model]
        kind = "example2"
        mu = 0.05
        [initial]
        fractions = [0.1, 0.2, 0.4, 0.3]
    "#;

    #[test]
    fn minimal_config_resolves() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.trials, 1);
        assert_eq!(cfg.arena, ArenaSpec::default());
        let r = cfg.resolve().unwrap();
        assert_eq!(r.payoff, PayoffMatrix::example2(0.05));
        assert_eq!(r.reference_y0.as_ref(), &[0.1, 0.2, 0.4, 0.3]);
        assert!(r.counts0.is_none());
    }

    #[test]
    fn all_offending_fields_are_listed() {
        let mut cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        cfg.dt = 0.0;
        cfg.trials = 0;
        cfg.control.mode = ControlMode::On;
        cfg.fidelity = Fidelity::Ssa;
        let Err(Error::Config(errs)) = cfg.resolve() else { panic!("expected a config error") };
        for field in ["dt", "trials", "control.gains", "initial.n"] {
            assert!(errs.iter().any(|e| e.starts_with(field)), "{field} missing from {errs:?}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = format!("{MINIMAL}\nbogus = 1\n");
        assert!(matches!(ExperimentConfig::from_toml_str(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn round_trip_and_hash() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        let mut other = cfg.clone();
        other.seed = 7;
        assert_ne!(cfg.hash(), other.hash());
    }
}
