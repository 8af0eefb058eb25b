//! Schedules of synchronous job sets under global fixed-priority dispatch.
//!
//! Identical platforms use weakly work-conserving dispatch and uniform
//! platforms strongly work-conserving dispatch. Both run on the same
//! [`Machine`], which the protocol runtime also drives with asynchronous
//! releases.

mod machine;

use std::collections::BTreeMap;
use std::fmt::Write as _;

pub use machine::{Completion, Dispatch, Machine, Segment};

use crate::error::ModelError;
use crate::model::{JobSet, Platform, PriorityAssignment};
use crate::time::TimeValue;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleResult {
    pub start: BTreeMap<usize, TimeValue>,
    pub completion: BTreeMap<usize, TimeValue>,
    /// `idle_instants[k - 1]` is the first instant from which at least `k`
    /// CPUs stay idle.
    pub idle_instants: Vec<TimeValue>,
    pub makespan: TimeValue,
    /// Last instant each CPU executed work, indexed by CPU.
    pub cpu_idle_from: Vec<TimeValue>,
    pub segments: Vec<Segment>,
}

/// Dispatch used for a platform: weak on identical CPUs, strong otherwise.
pub fn dispatch_for(platform: &Platform) -> Dispatch {
    if platform.is_identical() {
        Dispatch::Weak
    } else {
        Dispatch::Strong
    }
}

/// Schedule of `jobs` on `m` unit-speed CPUs.
pub fn schedule_identical(jobs: &JobSet, m: usize, prio: &PriorityAssignment) -> Result<ScheduleResult, ModelError> {
    prio.check_against(jobs)?;
    Ok(run(jobs, vec![TimeValue::one(); m], Dispatch::Weak, prio, true))
}

/// Schedule of `jobs` on a uniform platform with strongly work-conserving
/// dispatch.
pub fn schedule_uniform(
    jobs: &JobSet,
    platform: &Platform,
    prio: &PriorityAssignment,
) -> Result<ScheduleResult, ModelError> {
    prio.check_against(jobs)?;
    Ok(run(jobs, platform.speeds().to_vec(), Dispatch::Strong, prio, true))
}

/// Dispatches to the identical or uniform scheduler according to the platform.
pub fn schedule(jobs: &JobSet, platform: &Platform, prio: &PriorityAssignment) -> Result<ScheduleResult, ModelError> {
    prio.check_against(jobs)?;
    Ok(run(jobs, platform.speeds().to_vec(), dispatch_for(platform), prio, true))
}

/// Makespan and idle instants only; the caller guarantees `prio` matches.
pub(crate) fn idle_profile(jobs: &JobSet, platform: &Platform, prio: &[usize]) -> Vec<TimeValue> {
    let mut machine: Machine<usize> =
        Machine::new(platform.speeds().to_vec(), dispatch_for(platform), TimeValue::zero()).without_segments();
    let rank = ranks(jobs, prio);
    for (idx, job) in jobs.jobs().iter().enumerate() {
        machine.release(job.id, rank[idx], job.work.clone());
    }
    while !machine.is_idle() {
        machine.advance(None);
    }
    let mut idle = machine.last_busy().to_vec();
    idle.sort();
    idle
}

fn ranks(jobs: &JobSet, prio: &[usize]) -> Vec<usize> {
    jobs.jobs()
        .iter()
        .map(|j| prio.iter().position(|&id| id == j.id).expect("job listed in priority order"))
        .collect()
}

fn run(
    jobs: &JobSet,
    speeds: Vec<TimeValue>,
    dispatch: Dispatch,
    prio: &PriorityAssignment,
    keep_segments: bool,
) -> ScheduleResult {
    let mut machine: Machine<usize> = Machine::new(speeds, dispatch, TimeValue::zero());
    if !keep_segments {
        machine = machine.without_segments();
    }
    let mut start = BTreeMap::new();
    let mut completion = BTreeMap::new();
    let rank = ranks(jobs, prio.order());
    for (idx, job) in jobs.jobs().iter().enumerate() {
        if let Some(done) = machine.release(job.id, rank[idx], job.work.clone()) {
            start.insert(done.job, done.start);
            completion.insert(done.job, done.finish);
        }
    }
    while !machine.is_idle() {
        for done in machine.advance(None) {
            start.insert(done.job, done.start);
            completion.insert(done.job, done.finish);
        }
    }
    let cpu_idle_from = machine.last_busy().to_vec();
    let mut idle = cpu_idle_from.clone();
    idle.sort();
    let makespan = idle.last().cloned().unwrap_or_default();
    let mut segments = machine.take_segments();
    segments.sort_by(|a, b| a.start.cmp(&b.start).then(a.cpu.cmp(&b.cpu)));
    ScheduleResult {
        start,
        completion,
        idle_instants: idle,
        makespan,
        cpu_idle_from,
        segments,
    }
}

/// Idle instants of a finished schedule, `idle_1 ≤ … ≤ idle_m`.
pub fn idle_instants(result: &ScheduleResult) -> Vec<TimeValue> {
    result.idle_instants.clone()
}

/// `job,cpu,start,end` rows with 1-based job and CPU numbers.
pub fn segments_csv(segments: &[Segment], places: Option<usize>) -> String {
    let render = |t: &TimeValue| match places {
        Some(p) => t.to_decimal(p),
        None => t.to_string(),
    };
    let mut out = String::from("job,cpu,start,end\n");
    for s in segments {
        let _ = writeln!(out, "{},{},{},{}", s.job + 1, s.cpu + 1, render(&s.start), render(&s.end));
    }
    out
}
