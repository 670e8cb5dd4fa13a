use thiserror::Error;

/// Errors produced by model construction, integration and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("degenerate population: task {task} has fraction {value}")]
    DegeneratePopulation { task: usize, value: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("singular equilibrium: {0}")]
    SingularEquilibrium(String),

    #[error("integration diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("no event can fire at t = {time} (total propensity is zero)")]
    Stalled { time: f64 },

    #[error("time {t} outside [{start}, {end}]")]
    Range { t: f64, start: f64, end: f64 },

    #[error("configuration error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures that happen while a run is in progress
    /// (divergence or a stalled jump process), as opposed to bad input.
    pub fn is_runtime(&self) -> bool {
        match self {
            Error::Divergence { .. } | Error::Stalled { .. } => true,
            Error::Trial { source, .. } => source.is_runtime(),
            _ => false,
        }
    }

    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::Parameter(_) | Error::Dimension { .. } => true,
            Error::Trial { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
