//! Command-line front end: run configured experiments and presets, analyze
//! equilibria, sweep parameters.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use replicator_swarm::experiment::{
    self, analyze, format_report, format_sweep_csv, sweep, ExperimentConfig, Fidelity, ModelSpec, OutputFormat,
};
use replicator_swarm::{Error, Result};

#[derive(Parser)]
#[command(name = "swarmctl", version, about = "Replicator-dynamics task-switching experiments")]
struct Cli {
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of trials (overrides the config).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output directory (default: config output.path, else out/<name>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Trajectory file format; for analyze and sweep, csv means text.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Example1,
    Example2,
    Custom,
}

#[derive(clap::Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Model parameter, e.g. `mu=0.05` or `k12=0.3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Custom payoff rows, `;`-separated, e.g. `0,1;-1,0`.
    #[arg(long)]
    matrix: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Deterministic replicator trajectories.
    Ode {
        #[arg(long)]
        config: PathBuf,
    },
    /// Gillespie simulation of the jump process.
    Ssa {
        #[arg(long)]
        config: PathBuf,
    },
    /// Agent simulation in a 2D arena.
    Micro {
        #[arg(long)]
        config: PathBuf,
    },
    /// Equilibria, eigenvalues and their classification.
    Analyze {
        #[command(flatten)]
        model: ModelArgs,
        /// Candidate point, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Option<Vec<f64>>,
    },
    /// Classification over a range of one parameter.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        param: String,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 21)]
        steps: usize,
    },
    /// Run a shipped configuration; `list` shows them, `--print` dumps one.
    Preset {
        name: String,
        #[arg(long)]
        print: bool,
    },
}

fn parse_model(args: &ModelArgs) -> Result<ModelSpec> {
    let mut errs = Vec::new();
    let mut model = match args.model {
        ModelKind::Example1 => ModelSpec::Example1 { k10: 2.0, k12: 0.2, k20: 1.5, k21: 0.4 },
        ModelKind::Example2 => ModelSpec::Example2 { mu: 0.01, rate: 1.0 },
        ModelKind::Custom => {
            let rows: std::result::Result<Vec<Vec<f64>>, _> = args
                .matrix
                .as_deref()
                .unwrap_or_default()
                .split(';')
                .filter(|r| !r.trim().is_empty())
                .map(|r| r.split(',').map(|v| v.trim().parse::<f64>()).collect())
                .collect();
            match rows {
                Ok(rows) if !rows.is_empty() => ModelSpec::Custom { matrix: rows },
                Ok(_) => return Err(Error::Config(vec!["matrix: required for a custom model".into()])),
                Err(e) => return Err(Error::Config(vec![format!("matrix: {e}")])),
            }
        }
    };
    for kv in &args.set {
        let Some((key, value)) = kv.split_once('=') else {
            errs.push(format!("set: expected KEY=VALUE, got `{kv}`"));
            continue;
        };
        let Ok(v) = value.trim().parse::<f64>() else {
            errs.push(format!("set.{key}: not a number: `{value}`"));
            continue;
        };
        match (&mut model, key.trim()) {
            (ModelSpec::Example1 { k10, .. }, "k10") => *k10 = v,
            (ModelSpec::Example1 { k12, .. }, "k12") => *k12 = v,
            (ModelSpec::Example1 { k20, .. }, "k20") => *k20 = v,
            (ModelSpec::Example1 { k21, .. }, "k21") => *k21 = v,
            (ModelSpec::Example2 { mu, .. }, "mu") => *mu = v,
            (ModelSpec::Example2 { rate, .. }, "rate") => *rate = v,
            (_, key) => errs.push(format!("set.{key}: unknown parameter for {}", model_label(args.model))),
        }
    }
    if errs.is_empty() {
        Ok(model)
    } else {
        Err(Error::Config(errs))
    }
}

fn model_label(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Example1 => "example1",
        ModelKind::Example2 => "example2",
        ModelKind::Custom => "custom",
    }
}

fn run_config(cli: &Cli, mut config: ExperimentConfig, fidelity: Option<Fidelity>) -> Result<()> {
    if let Some(f) = fidelity {
        if f != config.fidelity {
            log::info!("running {} config at fidelity {f}", config.fidelity);
        }
        config.fidelity = f;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(n) = cli.trials {
        config.trials = n;
    }
    if let Some(f) = cli.format {
        config.output.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| config.output.path.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(config.name.as_deref().unwrap_or(config.model.label())));
    config.output.path = Some(dir.clone());

    let report = experiment::run_experiment(&config, cli.workers)?;
    let files = experiment::write_outputs(&report, &config, &dir)?;
    println!("{} ({}, {} trial(s), seed {})", report.name, report.fidelity, report.trials.len(), config.seed);
    for t in &report.trials {
        let rmse: Vec<String> = t.rmse.iter().map(|v| format!("{v:.4}")).collect();
        println!("  trial {:3}: rmse [{}] mean {:.4}, {} switches", t.trial, rmse.join(", "), t.mean_rmse, t.switches);
    }
    let rmse: Vec<String> = report.rmse.iter().map(|v| format!("{v:.4}")).collect();
    println!("  mean rmse per task [{}], overall {:.4}", rmse.join(", "), report.mean_rmse());
    println!("  wall clock {:.3} s, {} files in {}", report.wall_clock.as_secs_f64(), files.len(), dir.display());
    Ok(())
}

fn json(cli: &Cli) -> bool {
    matches!(cli.format, Some(Format::Json))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ode { config } => run_config(cli, ExperimentConfig::from_path(config)?, Some(Fidelity::Ode)),
        Command::Ssa { config } => run_config(cli, ExperimentConfig::from_path(config)?, Some(Fidelity::Ssa)),
        Command::Micro { config } => run_config(cli, ExperimentConfig::from_path(config)?, Some(Fidelity::Micro)),
        Command::Analyze { model, point } => {
            let spec = parse_model(model)?;
            let reports = analyze(&spec, point.as_deref())?;
            if json(cli) {
                println!("{}", serde_json::to_string_pretty(&reports).expect("reports serialize"));
            } else {
                for r in &reports {
                    print!("{}", format_report(r));
                }
            }
            Ok(())
        }
        Command::Sweep { model, param, from, to, steps } => {
            let spec = parse_model(model)?;
            let sw = sweep(&spec, param, *from, *to, *steps)?;
            if json(cli) {
                println!("{}", serde_json::to_string_pretty(&sw).expect("sweep serializes"));
            } else {
                print!("{}", format_sweep_csv(&sw));
            }
            Ok(())
        }
        Command::Preset { name, print } => {
            if name == "list" {
                for n in experiment::preset_names() {
                    println!("{n}");
                }
                return Ok(());
            }
            if *print {
                print!("{}", experiment::preset_source(name)?);
                return Ok(());
            }
            run_config(cli, experiment::preset(name)?, None)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() {
                2
            } else if e.is_runtime() {
                3
            } else {
                1
            })
        }
    }
}
