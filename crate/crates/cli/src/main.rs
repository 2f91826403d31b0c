use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::debug;
use serde::Serialize;

mod commands;
mod error;
mod input;
mod suites;

use error::{CliError, CliResult};
use suites::{Suite, SuiteConfig};

const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Reduce,
    Trig,
    Oracle,
}

/// Output format plus the worker pool every command runs inside.
pub struct Runtime {
    pub format: Format,
    pool: rayon::ThreadPool,
}

impl Runtime {
    fn new(format: Format, workers: Option<usize>) -> CliResult<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Io(format!("worker pool: {e}")))?;
        Ok(Self { format, pool })
    }

    pub fn install<R: Send>(&self, op: impl FnOnce() -> R + Send) -> R {
        self.pool.install(op)
    }
}

#[derive(Debug, Parser)]
#[command(name = "polyflow", version, about = "Real-root solving by translation-invariant evolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Worker threads for batch work; defaults to the core count.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find the real roots of one polynomial or a batch.
    Solve {
        /// File path, `-` for stdin, or an inline JSON/CSV payload.
        #[arg(long)]
        input: Option<String>,
        #[arg(long, value_enum, default_value_t = Method::Reduce)]
        method: Method,
        /// Root-event tolerance of the evolution.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Evolve one polynomial down to the first root and report the trace.
    Evolve {
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Integrate a dynamics job given as JSON.
    Simulate {
        #[arg(long)]
        input: Option<String>,
        /// Conservation audit tolerance; exceeding it is an error.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Directory for trajectory.csv and report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a randomized property suite and print a JSON report.
    Verify {
        /// vieta, invariants, theorem24, euler-shift, trig, elliptic or dynamics.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Number of random instances.
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        drift_tol: f64,
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
    /// Complex roots by simultaneous iteration.
    #[command(hide = true)]
    OracleSolve {
        #[arg(long)]
        input: Option<String>,
    },
}

fn run(cli: Cli) -> CliResult<String> {
    let rt = Runtime::new(cli.format, cli.workers)?;
    debug!("{:?}", cli.command);
    match cli.command {
        Command::Solve {
            input,
            method,
            tol,
            steps,
        } => commands::run_solve(&rt, input.as_deref(), method, tol, steps),
        Command::Evolve { input, tol, steps } => commands::run_evolve(&rt, input.as_deref(), tol, steps),
        Command::Simulate {
            input,
            tol,
            steps,
            out,
        } => commands::run_simulate(&rt, input.as_deref(), tol, steps, out.as_deref()),
        Command::Verify {
            suite,
            seed,
            size,
            drift_tol,
            degree,
        } => {
            let suite: Suite = suite.parse()?;
            let cfg = SuiteConfig {
                seed,
                size,
                drift_tol,
                degree,
            };
            let report = suites::run(&rt, suite, &cfg)?;
            let text = serde_json::to_string_pretty(&report)?;
            if report.pass {
                Ok(text)
            } else {
                Err(CliError::ChecksFailed {
                    failed: report.properties.iter().filter(|p| !p.pass).count(),
                    total: report.properties.len(),
                    output: text,
                })
            }
        }
        Command::OracleSolve { input } => commands::run_oracle_solve(input.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("POLYFLOW_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let Some(out) = e.output() {
                println!("{out}");
            }
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
