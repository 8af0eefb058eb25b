use std::path::PathBuf;

use anyhow::Result;
use modeswitch::simkernel::{schedule, segments_csv};

use crate::input::{describe_order, emit, priority, Format, Workload};
use crate::Status;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    workload: Workload,
    /// Job priorities, highest first, counted from 1.
    #[arg(long, value_delimiter = ',')]
    order: Vec<usize>,
    /// Write the schedule segments as CSV (`-` for stdout).
    #[arg(long)]
    segments: Option<PathBuf>,
    #[command(flatten)]
    format: Format,
}

pub fn run(args: Args) -> Result<Status> {
    let (jobs, platform) = args.workload.load()?;
    let prio = priority(&args.order, &jobs)?;
    let result = schedule(&jobs, &platform, &prio)?;
    let fmt = args.format;
    println!("order: {}", describe_order(prio.order()));
    println!("makespan: {}", fmt.value(&result.makespan));
    println!("idle instants: {}", fmt.list(&result.idle_instants));
    for (job, finish) in &result.completion {
        println!("J{}: start {} finish {}", job + 1, fmt.value(&result.start[job]), fmt.value(finish));
    }
    if let Some(path) = &args.segments {
        emit(path, &segments_csv(&result.segments, fmt.csv_places()))?;
    }
    Ok(Status::Ok)
}
