use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lcspg::sim::{DEFAULT_RUNS, DEFAULT_STEPS, DEFAULT_WINDOW};
use lcspg_cli::{run_command, Command, RunConfig};

/// Solvers for stochastic parity games and lossy channel system games.
#[derive(Parser)]
#[command(name = "lcspg", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// Top rank of the parity scheme; defaults to the largest color.
    #[arg(long, global = true)]
    rank: Option<u32>,
    /// Message loss probability, replacing the one in the model.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Stage limit for every symbolic fixpoint.
    #[arg(long, global = true)]
    ceiling: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_STEPS)]
    steps: u64,
    /// Trailing steps whose top color decides a sampled run.
    #[arg(long, global = true, default_value_t = DEFAULT_WINDOW)]
    window: u64,
    /// Directory for artifacts and their manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Sub {
    /// Winning regions and strategies of an explicit game.
    SolveFinite { input: PathBuf },
    /// Winning regions and regular strategies of a channel system.
    SolveLcs { input: PathBuf },
    /// Cross-check a model, or random games, against the oracles.
    CheckOracle {
        input: Option<PathBuf>,
        /// Check this many random 5-state games instead of a model.
        #[arg(long)]
        random: Option<usize>,
    },
    /// Sample runs under the synthesized strategies.
    Simulate {
        input: PathBuf,
        /// Start configuration, as control:bit:w1#w2.
        #[arg(long)]
        start: Option<String>,
    },
    /// Region membership of one configuration or state.
    Member {
        input: PathBuf,
        #[arg(long)]
        config: String,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("LCSPG_LOG")).init();
    let cli = Cli::parse();
    let (command, input) = match cli.command {
        Sub::SolveFinite { input } => (Command::SolveFinite, Some(input)),
        Sub::SolveLcs { input } => (Command::SolveLcs, Some(input)),
        Sub::CheckOracle { input, random } => (Command::CheckOracle { random }, input),
        Sub::Simulate { input, start } => (Command::Simulate { start }, Some(input)),
        Sub::Member { input, config } => (Command::Member { config }, Some(input)),
    };
    let config = RunConfig {
        rank: cli.rank,
        lambda: cli.lambda,
        seed: cli.seed,
        ceiling: cli.ceiling,
        runs: cli.runs,
        steps: cli.steps,
        window: cli.window,
        out: cli.out,
        ..RunConfig::new(command, input)
    };
    match run_command(&config) {
        Ok(outcome) => {
            // A closed stdout (e.g. piped into `head`) is not an error.
            let mut stdout = std::io::stdout().lock();
            for line in &outcome.lines {
                let _ = writeln!(stdout, "{line}");
            }
            if let (Some(m), Some(dir)) = (&outcome.manifest, &config.out) {
                let _ = writeln!(
                    stdout,
                    "wrote {} files to {}",
                    m.files.len() + 1,
                    dir.display()
                );
            }
            for v in &outcome.violations {
                eprintln!("violation: {v}");
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
