//! Batch front end for the `lcspg` solvers: parse a model, run one command,
//! export regions, strategies, traces and statistics.

use std::path::PathBuf;

use thiserror::Error;

pub mod artifacts;
mod model;
mod run;

pub use artifacts::{export_artifacts, Artifact, Manifest, ManifestEntry};
pub use model::{parse_model, parse_model_str, Model};
pub use run::{run_command, Outcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    SolveFinite,
    SolveLcs,
    /// With `random`, checks that many generated games instead of the input.
    CheckOracle {
        random: Option<usize>,
    },
    /// `start` is a configuration literal; the default is the first control
    /// with empty channels at a player move.
    Simulate {
        start: Option<String>,
    },
    /// `config` is a configuration literal, or a state id for explicit games.
    Member {
        config: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SolveFinite => "solve-finite",
            Command::SolveLcs => "solve-lcs",
            Command::CheckOracle { .. } => "check-oracle",
            Command::Simulate { .. } => "simulate",
            Command::Member { .. } => "member",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    /// Replaces the top color as the rank of the lower parity result.
    pub rank: Option<u32>,
    pub lambda: Option<f64>,
    pub seed: u64,
    pub ceiling: Option<usize>,
    pub runs: usize,
    pub steps: u64,
    pub window: u64,
    /// Artifacts are written only when set.
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command, input: Option<PathBuf>) -> Self {
        RunConfig {
            command,
            input,
            rank: None,
            lambda: None,
            seed: 0,
            ceiling: None,
            runs: lcspg::sim::DEFAULT_RUNS,
            steps: lcspg::sim::DEFAULT_STEPS,
            window: lcspg::sim::DEFAULT_WINDOW,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l < 1.0) {
                return Err(CliError::Validation {
                    field: "lambda".into(),
                    message: format!("{l} is not in (0, 1)"),
                });
            }
        }
        let counts = [
            ("runs", self.runs as u64),
            ("steps", self.steps),
            ("window", self.window),
            ("ceiling", self.ceiling.unwrap_or(1) as u64),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(CliError::Usage(format!("--{name} must be positive")));
            }
        }
        if let Command::CheckOracle { random: Some(0) } = self.command {
            return Err(CliError::Usage("--random must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}:{column}: {message}")]
    Syntax {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("solver failed: {0}")]
    Solver(String),
}

impl CliError {
    /// 1 for solver failures, 2 for bad input or usage.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(_) => 1,
            _ => 2,
        }
    }
}
