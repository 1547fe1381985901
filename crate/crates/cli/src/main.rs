use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use arbpack::corpus::Profile;
use arbpack_cli::commands::{check, corpus, corpus_report, replay, solve, CorpusOptions};
use arbpack_cli::format::{InstanceFile, ResultFile};
use arbpack_cli::CliError;
use clap::{Parser, Subcommand};

/// Exit status: 0 solution or condition holds, 1 infeasible or violated,
/// 2 bad input or internal error.
#[derive(Parser)]
#[command(
    name = "arbpack",
    version,
    about = "Arborescence completion and branching packing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one condition on an instance.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        condition: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance, writing a solution or a certificate.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        /// Overrides the instance's "mode".
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild a result from its step log.
    Replay {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare solvers, condition checkers and brute force on random instances.
    Corpus {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long = "max-v", default_value_t = 4)]
        max_v: usize,
        /// sparse, tight or dense; all three in rotation when absent.
        #[arg(long)]
        profile: Option<String>,
        /// Brute-force search nodes per instance.
        #[arg(long, default_value_t = 20_000_000)]
        budget: u64,
        /// Negate a condition checker to confirm the harness notices.
        #[arg(long)]
        mutate: bool,
    },
}

fn read_instance(path: &PathBuf) -> Result<InstanceFile, CliError> {
    InstanceFile::parse(&fs::read_to_string(path)?)
}

fn emit(result: ResultFile, out: Option<&PathBuf>) -> ExitCode {
    let text = result.to_json();
    let written = match out {
        Some(p) => fs::write(p, &text).map_err(CliError::from),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if let Some(m) = &result.message {
        eprintln!("error: {m}");
    }
    ExitCode::from(result.exit_code() as u8)
}

fn run(command: Command) -> ExitCode {
    let (result, out) = match command {
        Command::Check {
            input,
            condition,
            out,
        } => (
            read_instance(&input).and_then(|i| check(&i, &condition)),
            out,
        ),
        Command::Solve { input, mode, out } => (
            read_instance(&input).and_then(|i| solve(&i, mode.as_deref())),
            out,
        ),
        Command::Replay {
            input,
            solution,
            out,
        } => {
            let r = read_instance(&input).and_then(|i| {
                let prev = ResultFile::parse(&fs::read_to_string(&solution)?)?;
                replay(&i, &prev)
            });
            (r, out)
        }
        Command::Corpus {
            seed,
            count,
            max_v,
            profile,
            budget,
            mutate,
        } => {
            let profile = match profile.as_deref().map(|p| Profile::from_name(p).ok_or(p)) {
                None => None,
                Some(Ok(p)) => Some(p),
                Some(Err(p)) => {
                    eprintln!("error: unknown profile \"{p}\"");
                    return ExitCode::from(2);
                }
            };
            let rows = corpus(&CorpusOptions {
                seed,
                count,
                max_v,
                profile,
                budget,
                corrupt_checker: mutate,
            });
            print!("{}", corpus_report(&rows));
            let ok = rows.iter().all(|(_, t)| t.passed());
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    let result = result.unwrap_or_else(|e| ResultFile::error(e.to_string()));
    emit(result, out.as_ref())
}

fn main() -> ExitCode {
    run(Cli::parse().command)
}
