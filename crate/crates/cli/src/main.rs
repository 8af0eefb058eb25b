mod bounds;
mod experiment;
mod input;
mod oracle;
mod simulate;
mod transition;
mod validity;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Simulate, bound and validate mode changes of global multiprocessor
/// real-time systems.
#[derive(Debug, Parser)]
#[command(name = "modeswitch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Schedule a synchronous job set under a fixed priority assignment.
    Simulate(simulate::Args),
    /// Evaluate an idle-instant or makespan bound.
    Bounds(bounds::Args),
    /// Run the SM-MSO and AM-MSO validity tests on an application.
    Validity(validity::Args),
    /// Exact or sampled maximum makespan over priority assignments.
    Oracle(oracle::Args),
    /// Simulate a mode transition described by a scenario file.
    Transition(transition::Args),
    /// Measure the accuracy of the uniform makespan bounds over a speed grid.
    Experiment(experiment::Args),
}

/// Outcome of a successful command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A check ran and failed (invalid application, missed deadline, …).
    Invalid,
}

/// The reader of a pipe went away, as with `| head`.
fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .filter_map(|e| e.downcast_ref::<std::io::Error>())
        .any(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate::run(args),
        Command::Bounds(args) => bounds::run(args),
        Command::Validity(args) => validity::run(args),
        Command::Oracle(args) => oracle::run(args),
        Command::Transition(args) => transition::run(args),
        Command::Experiment(args) => experiment::run(args),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Invalid) => ExitCode::from(1),
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
