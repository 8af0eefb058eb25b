use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use modeswitch::protocols::{
    run_multimode, run_scenario, trace_csv, PhaseKind, Protocol, RunOptions, ScenarioDoc, TaggedSegment,
    TransitionReport, TransitionScenario,
};
use modeswitch::TimeValue;

use crate::input::{emit, Format};
use crate::Status;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Scenario file: an application plus `mcr_schedule` and optionally
    /// `rem_jobs`, `source` and `horizon`.
    #[arg(long)]
    scenario: PathBuf,
    /// `sm-mso` or `am-mso`.
    #[arg(long, default_value = "sm-mso")]
    protocol: Protocol,
    /// Scale every execution time by this factor in (0, 1].
    #[arg(long)]
    exec_scale: Option<TimeValue>,
    /// Write the labelled trace as CSV (`-` for stdout).
    #[arg(long)]
    segments: Option<PathBuf>,
    #[command(flatten)]
    format: Format,
}

fn print_report(report: &TransitionReport, fmt: &Format) {
    println!(
        "transition: mode {} -> mode {} requested at {}",
        report.from + 1,
        report.to + 1,
        fmt.value(&report.mcr_time)
    );
    for (k, offset) in report.enable_offsets.iter().enumerate() {
        println!("  task {} enabled at {} (+{})", k + 1, fmt.value(&report.enable_time(k)), fmt.value(offset));
    }
    println!("  end: {} (length {})", fmt.value(&report.transition_end), fmt.value(&report.length()));
    println!("  rem-job deadline misses: {}", report.remjob_deadline_misses.len());
    println!("  transition deadline misses: {}", report.transition_deadline_misses.len());
    for miss in &report.transition_deadline_misses {
        println!(
            "    task {} enabled at {} after its deadline {}",
            miss.task + 1,
            fmt.value(&miss.enabled_at),
            fmt.value(&miss.deadline)
        );
    }
    if report.protocol == Protocol::AmMso {
        println!("  new-mode job deadline misses: {}", report.newmode_job_deadline_misses.len());
    }
}

pub fn run(args: Args) -> Result<Status> {
    let text = fs::read_to_string(&args.scenario).with_context(|| format!("reading {}", args.scenario.display()))?;
    let doc = ScenarioDoc::parse(&text).with_context(|| format!("parsing {}", args.scenario.display()))?;
    let (app, platform) = doc.system.clone().into_system()?;
    let fmt = args.format;
    let mut opts = RunOptions::new(args.protocol).with_initial_mode(doc.source);
    if let Some(scale) = &args.exec_scale {
        anyhow::ensure!(scale.is_positive() && *scale <= TimeValue::one(), "--exec-scale must lie in (0, 1]");
        opts = opts.with_exec(modeswitch::protocols::ExecTime::Scaled(scale.clone()));
    }
    println!("protocol: {}", args.protocol);

    if let (Some(horizon), None) = (&doc.horizon, &doc.rem_jobs) {
        let trace = run_multimode(&app, &platform, &doc.mcr_schedule, horizon.clone(), &opts)?;
        for phase in &trace.phases {
            let what = match phase.kind {
                PhaseKind::Steady { mode } => format!("steady mode {}", mode + 1),
                PhaseKind::Transition { from, to } => format!("transition {} -> {}", from + 1, to + 1),
            };
            println!("phase: {what} from {} to {}", fmt.value(&phase.start), fmt.value(&phase.end));
        }
        for report in &trace.transitions {
            print_report(report, &fmt);
        }
        println!("steady-state deadline misses: {}", trace.steady_misses.len());
        if let Some(path) = &args.segments {
            let tagged: Vec<TaggedSegment> = trace
                .segments
                .iter()
                .map(|s| {
                    let job = &trace.jobs[s.job];
                    TaggedSegment {
                        mode: job.mode,
                        task: job.task,
                        index: job.index,
                        rem: job.rem_of.is_some(),
                        cpu: s.cpu,
                        start: s.start.clone(),
                        end: s.end.clone(),
                    }
                })
                .collect();
            emit(path, &trace_csv(&tagged, fmt.csv_places()))?;
        }
        return Ok(if trace.total_misses() == 0 { Status::Ok } else { Status::Invalid });
    }

    let mcr = doc.mcr_schedule.first().context("scenario needs at least one entry in mcr_schedule")?;
    let scenario = match &doc.rem_jobs {
        Some(rem_jobs) => TransitionScenario {
            app,
            platform,
            source: doc.source,
            target: mcr.target,
            mcr_time: mcr.time.clone(),
            rem_jobs: rem_jobs.clone(),
        },
        None => TransitionScenario::critical(app, platform, doc.source, mcr.target, mcr.time.clone()),
    };
    let report = run_scenario(&scenario, &opts)?;
    print_report(&report, &fmt);
    if let Some(path) = &args.segments {
        emit(path, &trace_csv(&report.trace, fmt.csv_places()))?;
    }
    Ok(if report.miss_count() == 0 { Status::Ok } else { Status::Invalid })
}
