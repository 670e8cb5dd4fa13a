//! File export for a finished run. Everything is written by the calling
//! thread after all trials complete.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, OutputFormat};
use super::runner::{RunReport, TrialDetail};
use crate::error::Result;
use crate::odeint::Trajectory;
use crate::VERSION;

#[derive(Serialize)]
struct TrajectoryJson<'a> {
    model: &'a str,
    params: &'a str,
    seed: u64,
    trial: Option<usize>,
    version: &'a str,
    config: &'a str,
    t: &'a [f64],
    y: &'a [Vec<f64>],
    #[serde(skip_serializing_if = "Option::is_none")]
    ystar: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct TrialSummary<'a> {
    trial: usize,
    seed: u64,
    stream: u64,
    rmse: &'a [f64],
    mean_rmse: f64,
    switches: usize,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    name: &'a str,
    fidelity: String,
    version: &'a str,
    config: &'a str,
    seed: u64,
    trials: Vec<TrialSummary<'a>>,
    rmse: &'a [f64],
    mean_rmse: f64,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_trajectory(
    path: &Path,
    format: OutputFormat,
    traj: &Trajectory,
    reference: Option<&Trajectory>,
    seed: u64,
    trial: Option<usize>,
    config_hash: &str,
) -> Result<()> {
    let mut w = create(path)?;
    match format {
        OutputFormat::Csv => {
            let mut extra = vec![("seed", seed.to_string())];
            if let Some(k) = trial {
                extra.push(("trial", k.to_string()));
            }
            extra.push(("version", VERSION.to_string()));
            extra.push(("config", config_hash.to_string()));
            traj.write_csv(&mut w, &extra, reference)?;
        }
        OutputFormat::Json => {
            let ystar = match reference {
                Some(r) => Some(traj.times().iter().map(|&t| r.sample(t).map(|p| p.into_inner())).collect::<Result<Vec<_>>>()?),
                None => None,
            };
            let doc = TrajectoryJson {
                model: &traj.meta().model,
                params: &traj.meta().params,
                seed,
                trial,
                version: VERSION,
                config: config_hash,
                t: traj.times(),
                y: traj.states(),
                ystar,
            };
            serde_json::to_writer(&mut w, &doc).map_err(std::io::Error::from)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes trial, reference, aggregate, per-trial event and report files
/// into `dir` and returns their paths.
///
/// * `trial_NNN.{csv,json}`: fractions and reference on the reference grid
/// * `reference.{csv,json}`
/// * `aggregate.csv`: `t,mean_Y_i..,std_Y_i..`
/// * `events_NNN.csv` (ssa) or `encounters_NNN.csv` (micro), plus
///   `snapshots_NNN.csv` when requested
/// * `report.json` and the resolved `config.toml`
///
/// Contents depend only on the config and seed; wall-clock time is not
/// written.
pub fn write_outputs(report: &RunReport, config: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let format = config.output.format;
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let hash = &report.config_hash;
    let mut written = Vec::new();

    for t in &report.trials {
        let p = dir.join(format!("trial_{:03}.{ext}", t.trial));
        write_trajectory(&p, format, &t.trajectory, Some(&report.reference), t.seed, Some(t.trial), hash)?;
        written.push(p);
        match &t.detail {
            TrialDetail::Ode => {}
            TrialDetail::Ssa(log) => {
                let p = dir.join(format!("events_{:03}.csv", t.trial));
                let mut w = create(&p)?;
                log.write_csv(&mut w, &[("trial", t.trial.to_string()), ("config", hash.clone())])?;
                w.flush()?;
                written.push(p);
            }
            TrialDetail::Micro(run) => {
                let p = dir.join(format!("encounters_{:03}.csv", t.trial));
                let mut w = create(&p)?;
                run.write_encounters_csv(&mut w)?;
                w.flush()?;
                written.push(p);
                if config.output.snapshots {
                    let p = dir.join(format!("snapshots_{:03}.csv", t.trial));
                    let mut w = create(&p)?;
                    run.write_snapshots_csv(&mut w)?;
                    w.flush()?;
                    written.push(p);
                }
            }
        }
    }

    let p = dir.join(format!("reference.{ext}"));
    write_trajectory(&p, format, &report.reference, None, config.seed, None, hash)?;
    written.push(p);

    let p = dir.join("aggregate.csv");
    let mut w = create(&p)?;
    let meta = report.trials[0].trajectory.meta();
    writeln!(
        w,
        "# model={}, params={}, trials={}, seed={}, version={VERSION}, config={hash}",
        meta.model,
        meta.params,
        report.trials.len(),
        config.seed
    )?;
    let m = report.reference.dim();
    write!(w, "t")?;
    for i in 1..=m {
        write!(w, ",mean_Y_{i}")?;
    }
    for i in 1..=m {
        write!(w, ",std_Y_{i}")?;
    }
    writeln!(w)?;
    let agg = &report.aggregate;
    for ((t, mean), std) in agg.times.iter().zip(&agg.mean).zip(&agg.std) {
        write!(w, "{t}")?;
        for v in mean.iter().chain(std) {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    written.push(p);

    let p = dir.join("report.json");
    let doc = ReportJson {
        name: &report.name,
        fidelity: report.fidelity.to_string(),
        version: VERSION,
        config: hash,
        seed: config.seed,
        trials: report
            .trials
            .iter()
            .map(|t| TrialSummary {
                trial: t.trial,
                seed: t.seed,
                stream: t.stream,
                rmse: &t.rmse,
                mean_rmse: t.mean_rmse,
                switches: t.switches,
            })
            .collect(),
        rmse: &report.rmse,
        mean_rmse: report.mean_rmse(),
    };
    let mut w = create(&p)?;
    serde_json::to_writer_pretty(&mut w, &doc).map_err(std::io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    written.push(p);

    let p = dir.join("config.toml");
    fs::write(&p, config.to_toml_string())?;
    written.push(p);
    Ok(written)
}

/// Reads back the `Y_i` columns of a trajectory CSV written by
/// [`write_outputs`] (comment lines skipped, header row used for width).
pub fn read_trajectory_csv(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap_or_default();
    let m = header.split(',').filter(|c| c.starts_with("Y_")).count();
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for line in lines {
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| crate::Error::DegenerateInput(format!("{}: {e}", path.display())))?;
        times.push(vals[0]);
        rows.push(vals[1..=m].to_vec());
    }
    Ok((times, rows))
}
