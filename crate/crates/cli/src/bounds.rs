use anyhow::{bail, Result};
use clap::ValueEnum;
use modeswitch::bounds::{
    ident_fjp_idle_bounds, ident_fjp_idle_bounds_legacy, ident_ftp_idle_bounds, lambda_pi, unif_fjp_trace,
    unif_ftp_idle_table, unsound,
};
use modeswitch::{JobSet, Platform, TimeValue};

use crate::input::{describe_order, priority, Format, Workload};
use crate::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Flavor {
    /// Identical CPUs, any job priorities.
    IdentFjp,
    /// Identical CPUs, any job priorities, original looser vector.
    IdentFjpLegacy,
    /// Identical CPUs, priorities from `--order`.
    IdentFtp,
    /// Uniform CPUs, any job priorities.
    UnifFjp,
    /// Uniform CPUs, priorities from `--order`.
    UnifFtp,
    /// Naive transplant of the identical formula; NOT a bound.
    UnifFjpNaive,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_enum)]
    flavor: Flavor,
    #[command(flatten)]
    workload: Workload,
    /// Job priorities for the FTP flavors, highest first, counted from 1.
    #[arg(long, value_delimiter = ',')]
    order: Vec<usize>,
    /// Print `k,maxidle` CSV instead of text.
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    format: Format,
}

fn identical_speed(platform: &Platform) -> Result<TimeValue> {
    if !platform.is_identical() {
        bail!("this flavor needs identical CPUs");
    }
    Ok(platform.slowest().clone())
}

pub fn run(args: Args) -> Result<Status> {
    let (jobs, platform) = args.workload.load()?;
    let fmt = args.format;
    let m = platform.m();
    let sorted = jobs.sorted_ascending();
    let ordered = |jobs: &JobSet| -> Result<JobSet> {
        let prio = priority(&args.order, jobs)?;
        println!("order: {}", describe_order(prio.order()));
        Ok(jobs.in_priority_order(&prio)?)
    };
    let (idle, extra): (Vec<TimeValue>, Vec<(&str, TimeValue)>) = match args.flavor {
        Flavor::IdentFjp => (ident_fjp_idle_bounds(&sorted, m)?.scaled(&identical_speed(&platform)?.recip()).values, vec![]),
        Flavor::IdentFjpLegacy => {
            (ident_fjp_idle_bounds_legacy(&sorted, m)?.scaled(&identical_speed(&platform)?.recip()).values, vec![])
        }
        Flavor::IdentFtp => {
            let speed = identical_speed(&platform)?;
            (ident_ftp_idle_bounds(&ordered(&jobs)?, m).scaled(&speed.recip()).values, vec![])
        }
        Flavor::UnifFjp => {
            let trace = unif_fjp_trace(&sorted, &platform)?;
            if !args.csv {
                println!("minidle: {}", fmt.list(&trace.minidle));
            }
            let ms_min = trace.ms_min();
            (
                trace.maxidle,
                vec![("ms1", trace.ms1), ("ms2", trace.ms2), ("ms3", trace.ms3), ("ms_min", ms_min), ("lambda", lambda_pi(&platform))],
            )
        }
        Flavor::UnifFtp => (unif_ftp_idle_table(&ordered(&jobs)?, &platform).final_idle().values, vec![]),
        Flavor::UnifFjpNaive => {
            let value = unsound::unif_fjp_ms0_naive(&sorted, &platform)?;
            println!("warning: unif-fjp-naive is not an upper bound on the makespan");
            println!("ms0: {}", fmt.value(&value));
            return Ok(Status::Ok);
        }
    };
    if args.csv {
        println!("k,maxidle");
        for (k, v) in idle.iter().enumerate() {
            println!("{},{}", k + 1, fmt.cell(v));
        }
        return Ok(Status::Ok);
    }
    println!("maxidle: {}", fmt.list(&idle));
    for (name, value) in &extra {
        println!("{name}: {}", fmt.value(value));
    }
    let makespan = extra.iter().find(|(n, _)| *n == "ms_min").map_or_else(|| idle[m - 1].clone(), |(_, v)| v.clone());
    println!("makespan: {}", fmt.value(&makespan));
    Ok(Status::Ok)
}
