//! Multi-trial execution on a worker pool.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::{ExperimentConfig, Fidelity, Resolved};
use super::metrics::{aggregate, tracking_error, Aggregate};
use crate::error::{Error, Result};
use crate::micro::{self, EncounterSearch, Interaction, MicroConfig, MicroParams, MicroRun};
use crate::odeint::{integrate, ControlledField, Trajectory, TrajectoryMeta};
use crate::ssa::{self, EventLog, RateSource, Termination};

/// Rate re-evaluation horizon for controlled jump processes when the
/// config does not set one.
pub const DEFAULT_MAX_HOLD: f64 = 0.1;

/// Raw output of one trial, kept for file export.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialDetail {
    Ode,
    Ssa(EventLog),
    Micro(MicroRun),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    /// RNG stream within the master seed (equal to the trial index).
    pub stream: u64,
    /// Fractions on the reference grid.
    pub trajectory: Trajectory,
    pub rmse: Vec<f64>,
    /// RMSE averaged over tasks.
    pub mean_rmse: f64,
    /// Task switches (SSA events or micro encounters).
    pub switches: usize,
    pub detail: TrialDetail,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub name: String,
    pub fidelity: Fidelity,
    pub config_hash: String,
    pub reference: Trajectory,
    pub trials: Vec<TrialResult>,
    pub aggregate: Aggregate,
    /// Per-task RMSE averaged over trials.
    pub rmse: Vec<f64>,
    pub wall_clock: Duration,
}

impl RunReport {
    pub fn seeds(&self) -> Vec<(u64, u64)> {
        self.trials.iter().map(|t| (t.seed, t.stream)).collect()
    }

    /// Mean over trials of the task-averaged RMSE.
    pub fn mean_rmse(&self) -> f64 {
        self.trials.iter().map(|t| t.mean_rmse).sum::<f64>() / self.trials.len() as f64
    }
}

/// Worker count: explicit, or the machine's available parallelism.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Header label for trajectories produced by `config`.
pub fn trajectory_meta(config: &ExperimentConfig) -> TrajectoryMeta {
    let mut params = config.model.params_string();
    if let (true, Some(g)) = (config.controlled(), &config.control.gains) {
        params.push(';');
        params.push_str(&g.params_string());
    }
    let model = format!("{}-{}", config.model.label(), config.fidelity);
    TrajectoryMeta::new(model, params)
}

/// Desired trajectory on the `dt` grid over `[0, t_end]`.
pub fn reference_trajectory(config: &ExperimentConfig, resolved: &Resolved) -> Result<Trajectory> {
    let meta = TrajectoryMeta::new(
        "reference",
        config
            .reference
            .as_ref()
            .and_then(|r| r.model.as_ref())
            .unwrap_or(&config.model)
            .params_string(),
    );
    integrate(&resolved.reference_model, &resolved.reference_y0, config.dt, config.t_end, meta)
}

fn run_trial(config: &ExperimentConfig, resolved: &Resolved, reference: &Trajectory, trial: usize) -> Result<TrialResult> {
    let seed = config.seed;
    let stream = trial as u64;
    let meta = trajectory_meta(config);
    let (trajectory, switches, detail) = match config.fidelity {
        Fidelity::Ode => {
            let traj = match &resolved.gains {
                Some(gains) => integrate(&ControlledField { gains, reference }, &resolved.y0, config.dt, config.t_end, meta)?,
                None => integrate(&resolved.payoff, &resolved.y0, config.dt, config.t_end, meta)?,
            };
            (traj, 0, TrialDetail::Ode)
        }
        Fidelity::Ssa => {
            let source = match &resolved.gains {
                Some(gains) => RateSource::Feedback { gains, reference },
                None => RateSource::Constant(&resolved.payoff),
            };
            let mut opts = ssa::RunOptions::new(config.t_end);
            opts.extinction_guard = config.ssa.extinction_guard;
            opts.max_hold = config.ssa.max_hold.or(resolved.gains.as_ref().map(|_| DEFAULT_MAX_HOLD));
            if let Some(n) = config.ssa.max_events {
                opts.max_events = n;
            }
            let counts0 = resolved.counts0.as_ref().expect("ssa has counts");
            let log = ssa::run(&source, counts0, &opts, seed, stream)?;
            if log.termination == Termination::Stalled {
                return Err(Error::Stalled { time: log.end_time });
            }
            let traj = log.to_trajectory(reference.times(), meta)?;
            (traj, log.events.len(), TrialDetail::Ssa(log))
        }
        Fidelity::Micro => {
            let interaction = match &resolved.gains {
                Some(g) => Interaction::Feedback(g.clone()),
                None => Interaction::Rates(resolved.payoff.clone()),
            };
            let mc = MicroConfig {
                params: MicroParams {
                    arena: resolved.arena,
                    interaction,
                    estimation: resolved.estimation,
                    relative_speed: config.arena.relative_speed,
                    boundary: resolved.boundary,
                    search: EncounterSearch::Grid,
                    extinction_guard: config.ssa.extinction_guard,
                },
                counts0: resolved.counts0.clone().expect("micro has counts"),
                speed: config.arena.speed,
                sensing_radius: resolved.sensing_radius,
                dt: config.dt,
                t_end: config.t_end,
                sample_every: 1,
                record_snapshots: config.output.snapshots,
            };
            let run = micro::run_micro(&mc, Some(reference), seed, stream)?;
            let mut states = Vec::with_capacity(reference.len());
            for &t in reference.times() {
                states.push(run.trajectory.sample(t)?.into_inner());
            }
            let traj = Trajectory::new(reference.times().to_vec(), states, meta)?;
            (traj, run.encounters.len(), TrialDetail::Micro(run))
        }
    };
    let rmse = tracking_error(&trajectory, reference)?;
    let mean_rmse = rmse.iter().sum::<f64>() / rmse.len() as f64;
    Ok(TrialResult { trial, seed, stream, trajectory, rmse, mean_rmse, switches, detail })
}

/// Builds the reference, runs every trial on a pool of `workers` threads
/// (default: available parallelism) and collects results in trial order.
/// Results do not depend on the worker count.
pub fn run_experiment(config: &ExperimentConfig, workers: Option<usize>) -> Result<RunReport> {
    let started = Instant::now();
    let resolved = config.resolve()?;
    let reference = reference_trajectory(config, &resolved)?;
    let workers = workers.unwrap_or_else(default_workers).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start {workers} workers: {e}")))?;
    let results: Vec<Result<TrialResult>> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|k| run_trial(config, &resolved, &reference, k))
            .collect()
    });
    let mut trials = Vec::with_capacity(results.len());
    for (k, r) in results.into_iter().enumerate() {
        trials.push(r.map_err(|e| Error::Trial { trial: k, source: Box::new(e) })?);
    }
    let trajectories: Vec<Trajectory> = trials.iter().map(|t| t.trajectory.clone()).collect();
    let aggregate = aggregate(&trajectories)?;
    let m = reference.dim();
    let mut rmse = vec![0.0; m];
    for t in &trials {
        for (a, e) in rmse.iter_mut().zip(&t.rmse) {
            *a += e / trials.len() as f64;
        }
    }
    Ok(RunReport {
        name: config.name.clone().unwrap_or_else(|| config.model.label().to_string()),
        fidelity: config.fidelity,
        config_hash: config.hash(),
        reference,
        trials,
        aggregate,
        rmse,
        wall_clock: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ode_config() -> ExperimentConfig {
        ExperimentConfig::from_toml_str(
            r#"
            fidelity = "ode"
            t_end = 10.0
            dt = 0.01
            [model]
            kind = "example1"
            k10 = 2.0
            k12 = 0.2
            k20 = 1.5
            k21 = 0.4
            [initial]
            fractions = [0.2, 0.2, 0.6]
            "#,
        )
        .unwrap()
    }

    #[test]
    fn ode_against_itself_has_zero_error() {
        let rep = run_experiment(&ode_config(), Some(1)).unwrap();
        assert_eq!(rep.trials.len(), 1);
        assert_eq!(rep.rmse, vec![0.0; 3]);
    }

    #[test]
    fn controlled_ode_tracks_from_a_different_start() {
        let mut cfg = ode_config();
        cfg.initial.fractions = Some(vec![0.4, 0.3, 0.3]);
        cfg.reference = Some(super::super::config::ReferenceSpec { model: None, fractions0: Some(vec![0.2, 0.2, 0.6]) });
        let open = run_experiment(&cfg, Some(1)).unwrap();
        cfg.control.mode = super::super::config::ControlMode::On;
        cfg.control.gains = Some(super::super::config::GainsSpec::Example1 { a10: 2.0, a12: 0.2, a20: 1.5, a21: 0.4 });
        let closed = run_experiment(&cfg, Some(1)).unwrap();
        assert!(closed.mean_rmse() < open.mean_rmse());
    }

    #[test]
    fn ssa_stall_is_reported_with_trial_index() {
        let mut cfg = ode_config();
        cfg.fidelity = Fidelity::Ssa;
        cfg.initial = super::super::config::InitialSpec { counts: Some(vec![1, 1, 1]), fractions: None, n: None };
        cfg.trials = 2;
        let err = run_experiment(&cfg, Some(2)).unwrap_err();
        assert!(matches!(err, Error::Trial { trial: 0, .. }));
        assert!(err.is_runtime());
    }
}
