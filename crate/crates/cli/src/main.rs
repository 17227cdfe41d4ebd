//! `stabreg` command-line experiment runner.
//!
//! Exit codes: 0 success, 1 runtime or check failure, 2 usage error (and an
//! inconclusive lemma report).

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stabreg::par::Execution;

use crate::config::{ExperimentConfig, Method};

#[derive(Parser, Debug)]
#[command(name = "stabreg", version, about = "Uniformly stable optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the epoch wrapper around a base optimizer and write its trace.
    RunConvex(CommonArgs),
    /// Run regularized mirror descent and write its trace.
    RunMirror(CommonArgs),
    /// Estimate uniform stability at each checkpoint for one sample size.
    Stability(CommonArgs),
    /// Run the numerical lemma checks.
    Verify(CommonArgs),
    /// Stability estimates over several sample sizes, compared with theory.
    Sweep(CommonArgs),
}

/// Flags shared by every command. Values given here override the config
/// file.
#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default `out/<command>`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Print the resolved plan without running anything.
    #[arg(long)]
    dry_run: bool,
    /// Run trials one at a time instead of on the thread pool.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// `T_max` for the wrapper, `T` for mirror descent.
    #[arg(long)]
    steps: Option<usize>,
    /// Distance bound `D`.
    #[arg(long, allow_hyphen_values = true)]
    dist_bound: Option<f64>,
    /// Fixed mirror-descent regularization.
    #[arg(long)]
    lambda: Option<f64>,
    /// Algorithm for `stability` and `sweep`.
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    pool_size: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<usize>>,
    /// Sample sizes for `sweep`.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    /// Dimensions for `verify`; pass an empty string for none.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    sizes: Option<Vec<String>>,
    /// Flip the sign of the Bregman divergence in the three-point check.
    #[arg(long)]
    sabotage: bool,
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "convex" => Ok(Method::Convex),
        "mirror" => Ok(Method::Mirror),
        "constant" => Ok(Method::Constant),
        other => Err(format!(
            "unknown method {other:?} (expected convex, mirror or constant)"
        )),
    }
}

/// Bad input: exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// How a command ended, before it becomes an exit code.
pub enum Outcome {
    Success,
    /// A check ran and failed.
    CheckFailed,
    Inconclusive,
}

impl CommonArgs {
    fn resolve(&self, command: &str) -> Result<(ExperimentConfig, PathBuf), UsageError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| UsageError(format!("reading {}: {e}", path.display())))?;
                ExperimentConfig::from_toml(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = self.n {
            cfg.problem.n = v;
        }
        if let Some(v) = self.d {
            cfg.problem.d = v;
        }
        if let Some(v) = self.steps {
            cfg.algorithm.steps = v;
        }
        if let Some(v) = self.dist_bound {
            cfg.algorithm.dist_bound = Some(v);
        }
        if let Some(v) = self.lambda {
            cfg.algorithm.lambda = Some(v);
        }
        if let Some(v) = self.method {
            cfg.algorithm.method = v;
        }
        if let Some(v) = self.trials {
            cfg.harness.trials = v;
        }
        if let Some(v) = self.pool_size {
            cfg.harness.pool_size = v;
        }
        if let Some(v) = &self.checkpoints {
            cfg.harness.checkpoints = v.clone();
        }
        if let Some(v) = &self.ns {
            cfg.harness.ns = v.clone();
        }
        if let Some(v) = &self.sizes {
            cfg.harness.sizes = v
                .iter()
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse().map_err(|_| UsageError(format!("invalid size {s:?}"))))
                .collect::<Result<_, _>>()?;
        }
        if self.sabotage {
            cfg.harness.sabotage = true;
        }
        let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out").join(command));
        Ok((cfg, out))
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::RunConvex(a) => ("run-convex", a),
        Command::RunMirror(a) => ("run-mirror", a),
        Command::Stability(a) => ("stability", a),
        Command::Verify(a) => ("verify", a),
        Command::Sweep(a) => ("sweep", a),
    };
    let result = args.resolve(name).map_err(anyhow::Error::from).and_then(|(cfg, out)| {
        let ctx = commands::Context {
            cfg,
            out,
            dry_run: args.dry_run,
            exec: args.execution(),
        };
        match cli.command {
            Command::RunConvex(_) => commands::run_convex(&ctx),
            Command::RunMirror(_) => commands::run_mirror(&ctx),
            Command::Stability(_) => commands::stability(&ctx),
            Command::Verify(_) => commands::verify(&ctx),
            Command::Sweep(_) => commands::sweep(&ctx),
        }
    });
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Ok(Outcome::Inconclusive) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
