//! Design-time validity tests for both transition protocols.

use std::fmt;

use crate::bounds::{
    critical_rem_job_set_ordered, ident_fjp_idle_bounds, ident_fjp_makespan, ident_ftp_idle_bounds, lambda_pi,
    unif_fjp_idle_upper, unif_fjp_ms_min, unif_ftp_idle_table,
};
use crate::error::ProtocolError;
use crate::model::{Application, Mode, Platform, Scheduler, Task};
use crate::protocols::Protocol;
use crate::time::TimeValue;

/// A sufficient steady-state schedulability test: `true` only if `tasks`,
/// run under `scheduler` on CPUs of the given speeds, never miss a deadline.
pub trait SchedTest: Sync {
    fn schedulable(&self, cpus: &[TimeValue], scheduler: &Scheduler, tasks: &[Task]) -> bool;
}

impl<F> SchedTest for F
where
    F: Fn(&[TimeValue], &Scheduler, &[Task]) -> bool + Sync,
{
    fn schedulable(&self, cpus: &[TimeValue], scheduler: &Scheduler, tasks: &[Task]) -> bool {
        self(cpus, scheduler, tasks)
    }
}

/// [`default_sched_test`] as a [`SchedTest`].
#[derive(Debug, Clone, Copy, Default)]
pub struct DensityTest;

impl SchedTest for DensityTest {
    fn schedulable(&self, cpus: &[TimeValue], scheduler: &Scheduler, tasks: &[Task]) -> bool {
        default_sched_test(cpus, scheduler, tasks)
    }
}

/// Density-based test for global scheduling on the CPUs `cpus`.
///
/// * At most one task per CPU: accepted when the densest task fits the
///   slowest of the `n` fastest CPUs.
/// * EDF: `Σδ ≤ S − λ·δmax`, with `S` the total speed and `λ` the
///   heterogeneity of the CPU set.
/// * Fixed task priorities: only deadline-monotonic orders are accepted, with
///   `Σδ' ≤ m/2·(1 − δ'max) + δ'max` on densities `δ' = δ / s_1`.
pub fn default_sched_test(cpus: &[TimeValue], scheduler: &Scheduler, tasks: &[Task]) -> bool {
    if tasks.is_empty() {
        return true;
    }
    if cpus.is_empty() {
        return false;
    }
    let mut speeds = cpus.to_vec();
    speeds.sort();
    let fastest = speeds.last().expect("non-empty");
    let densities: Vec<TimeValue> = tasks.iter().map(Task::density).collect();
    let dmax = densities.iter().max().expect("non-empty").clone();
    if dmax > *fastest {
        return false;
    }
    if let Scheduler::Unsupported(_) = scheduler {
        return false;
    }
    if tasks.len() <= speeds.len() && dmax <= speeds[speeds.len() - tasks.len()] {
        return true;
    }
    let total: TimeValue = densities.iter().sum();
    match scheduler {
        Scheduler::Edf => {
            let platform = Platform::new(speeds.clone()).expect("speeds are positive and sorted");
            total <= platform.total_speed() - lambda_pi(&platform) * &dmax
        }
        Scheduler::FixedTask(order) => {
            if !is_deadline_monotonic(order, tasks) {
                return false;
            }
            let s1 = &speeds[0];
            let m = TimeValue::from(speeds.len());
            let scaled_total = &total / s1;
            let scaled_max = &dmax / s1;
            let one = TimeValue::one();
            let half = TimeValue::ratio(1, 2);
            scaled_max <= one && scaled_total <= &m * half * (&one - &scaled_max) + scaled_max
        }
        Scheduler::Unsupported(_) => false,
    }
}

/// Whether `order`, restricted to `tasks`, lists relative deadlines in
/// non-decreasing order.
fn is_deadline_monotonic(order: &[usize], tasks: &[Task]) -> bool {
    let deadlines: Vec<&TimeValue> = order
        .iter()
        .filter_map(|id| tasks.iter().find(|t| t.id == *id).map(|t| &t.deadline))
        .collect();
    deadlines.len() == tasks.len() && deadlines.windows(2).all(|w| w[0] <= w[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid,
    Unsupported,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Valid => "valid",
            Verdict::Invalid => "invalid",
            Verdict::Unsupported => "unsupported",
        })
    }
}

/// Outcome for one ordered pair of modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairReport {
    pub from: usize,
    pub to: usize,
    pub bound_name: String,
    /// Makespan bound of the source mode's critical rem-job set.
    pub bound: Option<TimeValue>,
    /// Smallest transition deadline of the target mode, with its task.
    pub binding_deadline: Option<(usize, TimeValue)>,
    /// Smallest gap between a task's transition deadline and its enablement
    /// bound; negative when invalid.
    pub slack: Option<TimeValue>,
    pub verdict: Verdict,
    /// AM-MSO only: upper bound on each target task's enable offset.
    pub enable_bounds: Vec<TimeValue>,
    /// AM-MSO only: the task whose deadline was breached.
    pub failing_task: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityReport {
    pub protocol: Protocol,
    pub pairs: Vec<PairReport>,
    pub verdict: Verdict,
}

impl ValidityReport {
    fn from_pairs(protocol: Protocol, pairs: Vec<PairReport>) -> Self {
        let verdict = if pairs.iter().any(|p| p.verdict == Verdict::Invalid) {
            Verdict::Invalid
        } else if pairs.iter().any(|p| p.verdict == Verdict::Unsupported) {
            Verdict::Unsupported
        } else {
            Verdict::Valid
        };
        ValidityReport { protocol, pairs, verdict }
    }

    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }
}

/// Idle-instant bounds of a mode's critical rem-job set, with their name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeBounds {
    pub name: &'static str,
    /// Bounds on `idle_1 … idle_m`; the last entry bounds the makespan.
    pub idle: Vec<TimeValue>,
    pub makespan: TimeValue,
}

/// Bounds used for transitions out of `mode`, or `None` when its scheduler
/// has no applicable analysis.
pub fn mode_bounds(mode: &Mode, platform: &Platform) -> Option<ModeBounds> {
    let m = platform.m();
    if matches!(mode.scheduler, Scheduler::Unsupported(_)) {
        return None;
    }
    if mode.is_empty() {
        let name = if mode.scheduler.is_fixed_task() { "ftp" } else { "fjp" };
        return Some(ModeBounds { name, idle: vec![TimeValue::zero(); m], makespan: TimeValue::zero() });
    }
    let jobs = critical_rem_job_set_ordered(mode).expect("non-empty mode");
    let identical = platform.is_identical();
    let unit = platform.slowest().recip();
    let bounds = match (&mode.scheduler, identical) {
        (Scheduler::FixedTask(_), true) => {
            let idle = ident_ftp_idle_bounds(&jobs, m).scaled(&unit).values;
            ModeBounds { name: "identical-ftp", makespan: idle[m - 1].clone(), idle }
        }
        (Scheduler::FixedTask(_), false) => {
            let idle = unif_ftp_idle_table(&jobs, platform).final_idle().values;
            ModeBounds { name: "uniform-ftp", makespan: idle[m - 1].clone(), idle }
        }
        (_, true) => {
            let idle = ident_fjp_idle_bounds(&jobs, m).expect("sorted").scaled(&unit).values;
            let makespan = ident_fjp_makespan(&jobs, m).expect("sorted") * &unit;
            ModeBounds { name: "identical-fjp", idle, makespan }
        }
        (_, false) => {
            let makespan = unif_fjp_ms_min(&jobs, platform).expect("sorted");
            let idle = unif_fjp_idle_upper(&jobs, platform)
                .expect("sorted")
                .values
                .into_iter()
                .map(|v| TimeValue::min_of(&v, &makespan).clone())
                .collect();
            ModeBounds { name: "uniform-fjp", idle, makespan }
        }
    };
    Some(bounds)
}

fn deadlines(app: &Application, from: usize, to: usize) -> Result<&[TimeValue], ProtocolError> {
    match app.transition_deadlines(from, to) {
        Some(d) if d.len() == app.modes[to].len() => Ok(d),
        _ => Err(ProtocolError::MissingTransitionDeadlines { from, to }),
    }
}

fn binding(ds: &[TimeValue]) -> Option<(usize, TimeValue)> {
    ds.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).map(|(k, d)| (k, d.clone()))
}

fn unsupported_pair(from: usize, to: usize, name: String, ds: &[TimeValue]) -> PairReport {
    PairReport {
        from,
        to,
        bound_name: format!("unsupported scheduler `{name}`"),
        bound: None,
        binding_deadline: binding(ds),
        slack: None,
        verdict: Verdict::Unsupported,
        enable_bounds: Vec::new(),
        failing_task: None,
    }
}

/// Every rem-job must finish before the earliest transition deadline of any
/// target mode.
pub fn validity_smmso(app: &Application, platform: &Platform) -> Result<ValidityReport, ProtocolError> {
    let mut pairs = Vec::new();
    for (i, j) in app.mode_pairs() {
        let ds = deadlines(app, i, j)?;
        let Some(bounds) = mode_bounds(&app.modes[i], platform) else {
            pairs.push(unsupported_pair(i, j, app.modes[i].scheduler.name(), ds));
            continue;
        };
        let bind = binding(ds);
        let slack = bind.as_ref().map(|(_, d)| d - &bounds.makespan);
        let pass = slack.as_ref().is_none_or(|s| !s.is_negative());
        pairs.push(PairReport {
            from: i,
            to: j,
            bound_name: bounds.name.to_string(),
            bound: Some(bounds.makespan.clone()),
            binding_deadline: bind,
            slack,
            verdict: if pass { Verdict::Valid } else { Verdict::Invalid },
            enable_bounds: vec![bounds.makespan.clone(); app.modes[j].len()],
            failing_task: None,
        });
    }
    Ok(ValidityReport::from_pairs(Protocol::SmMso, pairs))
}

/// Target tasks of `to` sorted by transition deadline, ties by task id.
pub fn scan_order(app: &Application, from: usize, to: usize) -> Result<Vec<usize>, ProtocolError> {
    let ds = deadlines(app, from, to)?;
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.sort_by(|&a, &b| ds[a].cmp(&ds[b]).then(a.cmp(&b)));
    Ok(order)
}

/// Replays the AM-MSO enablement walk against idle-instant bounds: CPUs
/// join slowest first, one per bound, and each still-disabled task must have
/// a transition deadline no earlier than the current bound.
pub fn validity_ammso(
    app: &Application,
    platform: &Platform,
    sched_test: &dyn SchedTest,
) -> Result<ValidityReport, ProtocolError> {
    let mut pairs = Vec::new();
    for (i, j) in app.mode_pairs() {
        let ds = deadlines(app, i, j)?;
        let Some(bounds) = mode_bounds(&app.modes[i], platform) else {
            pairs.push(unsupported_pair(i, j, app.modes[i].scheduler.name(), ds));
            continue;
        };
        let target = &app.modes[j];
        let mut disabled = scan_order(app, i, j)?;
        let mut enabled: Vec<Task> = Vec::new();
        let mut enable_bounds: Vec<Option<TimeValue>> = vec![None; target.len()];
        let mut avail: Vec<TimeValue> = Vec::new();
        let mut failing = None;
        'walk: for k in 0..platform.m() {
            avail.push(platform.speed(k).clone());
            let limit = &bounds.idle[k];
            let mut idx = 0;
            while idx < disabled.len() {
                let task = disabled[idx];
                if ds[task] < *limit {
                    failing = Some(task);
                    break 'walk;
                }
                let mut candidate = enabled.clone();
                candidate.push(target.tasks[task].clone());
                if sched_test.schedulable(&avail, &target.scheduler, &candidate) {
                    enabled = candidate;
                    enable_bounds[task] = Some(limit.clone());
                    disabled.remove(idx);
                } else {
                    idx += 1;
                }
            }
        }
        let enable_bounds: Vec<TimeValue> = enable_bounds
            .into_iter()
            .map(|b| b.unwrap_or_else(|| bounds.makespan.clone()))
            .collect();
        let slack = if let Some(task) = failing {
            let k = bounds.idle.iter().position(|b| ds[task] < *b).expect("breach found");
            Some(&ds[task] - &bounds.idle[k])
        } else {
            ds.iter().zip(&enable_bounds).map(|(d, b)| d - b).min()
        };
        pairs.push(PairReport {
            from: i,
            to: j,
            bound_name: bounds.name.to_string(),
            bound: Some(bounds.makespan.clone()),
            binding_deadline: binding(ds),
            slack,
            verdict: if failing.is_some() { Verdict::Invalid } else { Verdict::Valid },
            enable_bounds,
            failing_task: failing,
        });
    }
    Ok(ValidityReport::from_pairs(Protocol::AmMso, pairs))
}
