use std::io::{self, BufWriter, Write};

use anyhow::Result;
use modeswitch::oracle::{exact_max, for_each_assignment, sample_permutations, sampled_max, Extremum, DEFAULT_LIMIT};
use modeswitch::simkernel::schedule;
use modeswitch::{PriorityAssignment, TimeValue};

use crate::input::{describe_order, Format, Workload};
use crate::Status;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    workload: Workload,
    /// Enumerate all n! assignments (the default).
    #[arg(long, conflicts_with = "samples")]
    exhaustive: bool,
    /// Evaluate this many seeded random assignments instead.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest job count accepted for exhaustive search.
    #[arg(long, default_value_t = DEFAULT_LIMIT)]
    limit: usize,
    /// Print one `rank,assignment,makespan` CSV line per assignment.
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    format: Format,
}

pub fn run(args: Args) -> Result<Status> {
    let (jobs, platform) = args.workload.load()?;
    let fmt = args.format;
    if args.csv {
        let mut out = BufWriter::new(io::stdout().lock());
        writeln!(out, "rank,assignment,makespan")?;
        let mut row = |rank: u64, order: &[usize], makespan: &TimeValue| -> io::Result<()> {
            let order: Vec<String> = order.iter().map(|j| (j + 1).to_string()).collect();
            writeln!(out, "{rank},{},{}", order.join(">"), fmt.cell(makespan))
        };
        match args.samples {
            None => {
                let mut failure = Ok(());
                for_each_assignment(&jobs, &platform, args.limit, |rank, assignment, idle| {
                    if failure.is_ok() {
                        failure = row(rank, assignment.order(), idle.last().expect("m ≥ 1"));
                    }
                })?;
                failure?;
            }
            Some(samples) => {
                for (i, perm) in sample_permutations(jobs.len(), samples, args.seed).iter().enumerate() {
                    let prio = PriorityAssignment::new(perm.iter().map(|&p| jobs.jobs()[p].id).collect());
                    row(i as u64, prio.order(), &schedule(&jobs, &platform, &prio)?.makespan)?;
                }
            }
        }
        out.flush()?;
        return Ok(Status::Ok);
    }
    let result = match args.samples {
        None => exact_max(&jobs, &platform, args.limit)?,
        Some(samples) => sampled_max(&jobs, &platform, samples, args.seed),
    };
    let show = |label: &str, e: &Extremum| println!("{label}: {} via {}", fmt.value(&e.value), describe_order(e.assignment.order()));
    if result.is_lower_bound() {
        println!("mode: sampled ({} assignments, seed {}); maxima are lower bounds", result.assignments_evaluated, args.seed);
    } else {
        println!("mode: exhaustive ({} assignments)", result.assignments_evaluated);
    }
    show("max makespan", &result.max_makespan);
    show("min makespan", &result.min_makespan);
    for (k, (hi, lo)) in result.max_idle.iter().zip(&result.min_idle).enumerate() {
        show(&format!("max idle_{}", k + 1), hi);
        show(&format!("min idle_{}", k + 1), lo);
    }
    Ok(Status::Ok)
}
