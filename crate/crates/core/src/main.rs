use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use hipea::cli::{
    self, emit_report, load_problem, run_job, AlgorithmChoice, JobOptions, ModeKind, ReportFormat, SolveReport,
};
use hipea::extraction::experiment_count_bounds;

#[derive(Parser)]
#[command(name = "hipea", version, about = "Simulated iterative phase estimation linear solvers")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file (or a built-in fixture name) and write a report.
    Solve {
        problem: String,
        #[arg(long)]
        algorithm: Option<AlgorithmChoice>,
        /// Compute outcome probabilities exactly.
        #[arg(long, conflicts_with = "shots")]
        exact: bool,
        /// Sample this many shots per experiment and iteration.
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n_top: Option<usize>,
        /// JSON report path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV table path for the experiment logs.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Run experiments on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Write a built-in problem file.
    Fixture {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print experiment-count bounds for the parallel controller.
    Estimate {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n_top: u32,
    },
}

fn print_summary(report: &SolveReport) {
    for run in &report.runs {
        if let Some(h) = &run.hipea {
            eprintln!(
                "{}: {} eigenvalues, {} experiments, {} qubits, epsilon {:.3e}",
                run.algorithm,
                h.pairs.len(),
                h.resources.experiments,
                h.resources.qubits,
                h.epsilon
            );
        }
        if let Some(h) = &run.hhl {
            eprintln!(
                "{}: normalized difference {:.3e}, success probability {:.4}, |x| = {:.4} not recoverable",
                run.algorithm, h.normalized_difference, h.result.success_probability, h.reference_norm
            );
        }
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
}

#[allow(clippy::too_many_arguments)]
fn solve(
    problem: &str,
    algorithm: Option<AlgorithmChoice>,
    exact: bool,
    shots: Option<u64>,
    seed: Option<u64>,
    n_top: Option<usize>,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
    serial: bool,
) -> i32 {
    let mut spec = match load_problem(problem) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("error: {e}");
            return cli::EXIT_VALIDATION;
        }
    };
    if let Some(a) = algorithm {
        spec.algorithm = a;
    }
    if exact {
        spec.mode = ModeKind::Exact;
    }
    if let Some(s) = shots {
        spec.mode = ModeKind::Sampled;
        spec.shots = s;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(k) = n_top {
        spec.n_top = k;
    }
    if let Err(e) = spec.check_limits() {
        eprintln!("error: {e}");
        return cli::EXIT_VALIDATION;
    }

    let report = match run_job(&spec, &JobOptions { parallel: !serial }) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return cli::EXIT_RUNTIME;
        }
    };
    let written = (|| -> anyhow::Result<()> {
        match &out {
            Some(path) => {
                emit_report(&report, ReportFormat::Json, path).with_context(|| format!("writing {}", path.display()))?;
            }
            None => print!("{}", report.to_json()),
        }
        if let Some(path) = &csv {
            emit_report(&report, ReportFormat::Csv, path).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    })();
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return cli::EXIT_RUNTIME;
    }
    print_summary(&report);
    if report.has_ambiguity() {
        cli::EXIT_AMBIGUOUS
    } else {
        cli::EXIT_OK
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let args = Args::parse();
    let code = match args.command {
        Command::Solve { problem, algorithm, exact, shots, seed, n_top, out, csv, serial } => {
            solve(&problem, algorithm, exact, shots, seed, n_top, out, csv, serial)
        }
        Command::Fixture { name, out } => match cli::problem::builtin(&name) {
            None => {
                eprintln!("error: unknown fixture {name:?}");
                cli::EXIT_VALIDATION
            }
            Some(file) => match out {
                None => {
                    print!("{}", file.to_json());
                    cli::EXIT_OK
                }
                Some(path) => match std::fs::write(&path, file.to_json()) {
                    Ok(()) => cli::EXIT_OK,
                    Err(e) => {
                        eprintln!("error: writing {}: {e}", path.display());
                        cli::EXIT_RUNTIME
                    }
                },
            },
        },
        Command::Estimate { n, m, n_top } => {
            if n_top == 0 || m == 0 || n_top > 63 {
                eprintln!("error: m and n_top must be positive");
                cli::EXIT_VALIDATION
            } else {
                let (min, max) = experiment_count_bounds(n, m, n_top);
                println!("min {min}");
                println!("max {max}");
                cli::EXIT_OK
            }
        }
    };
    ExitCode::from(code as u8)
}
