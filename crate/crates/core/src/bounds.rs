//! Closed-form bounds on idle instants and makespans.
//!
//! FJP bounds hold for every priority assignment and expect jobs sorted by
//! non-decreasing processing time. FTP results are exact for the given
//! assignment and expect jobs listed highest priority first. Identical-CPU
//! functions assume unit speed; divide by the speed for faster CPUs.

use std::fmt;

use crate::error::BoundsError;
use crate::model::{JobSet, Mode, Platform, PriorityAssignment, Scheduler};
use crate::time::TimeValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundFlavor {
    IdenticalFjpLegacy,
    IdenticalFjp,
    IdenticalFtp,
    UniformFjp,
    UniformFtp,
}

impl fmt::Display for BoundFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundFlavor::IdenticalFjpLegacy => "identical-fjp-legacy",
            BoundFlavor::IdenticalFjp => "identical-fjp",
            BoundFlavor::IdenticalFtp => "identical-ftp",
            BoundFlavor::UniformFjp => "uniform-fjp",
            BoundFlavor::UniformFtp => "uniform-ftp",
        })
    }
}

/// Upper bounds `maxidle_1 ≤ … ≤ maxidle_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdleBoundVector {
    pub flavor: BoundFlavor,
    pub values: Vec<TimeValue>,
}

impl IdleBoundVector {
    /// 1-based access, matching `idle_k`.
    pub fn maxidle(&self, k: usize) -> &TimeValue {
        &self.values[k - 1]
    }

    pub fn makespan(&self) -> &TimeValue {
        self.values.last().expect("at least one CPU")
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: &TimeValue) -> IdleBoundVector {
        IdleBoundVector {
            flavor: self.flavor,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

fn sorted_times(jobs: &JobSet) -> Result<Vec<TimeValue>, BoundsError> {
    if !jobs.is_sorted_ascending() {
        return Err(BoundsError::Unsorted);
    }
    Ok(jobs.times())
}

/// Prepends zero-length jobs until there are at least `m`.
fn padded(mut times: Vec<TimeValue>, m: usize) -> Vec<TimeValue> {
    if times.len() < m {
        let mut pad = vec![TimeValue::zero(); m - times.len()];
        pad.append(&mut times);
        return pad;
    }
    times
}

/// Upper bounds on every idle instant of `m` unit-speed CPUs, valid for any
/// priority assignment.
pub fn ident_fjp_idle_bounds(jobs: &JobSet, m: usize) -> Result<IdleBoundVector, BoundsError> {
    let c = padded(sorted_times(jobs)?, m);
    let n = c.len();
    let values = if n == m {
        c.clone()
    } else {
        let total: TimeValue = c.iter().sum();
        let mm = TimeValue::from(m);
        (1..=m)
            .map(|k| (&total + TimeValue::from(k - 1) * &c[n - m + k - 1]) / &mm)
            .collect()
    };
    Ok(IdleBoundVector { flavor: BoundFlavor::IdenticalFjp, values })
}

/// The older, looser variant of [`ident_fjp_idle_bounds`]: for each `k`, the
/// maximum over every window of `m - k + 1` consecutive jobs.
pub fn ident_fjp_idle_bounds_legacy(jobs: &JobSet, m: usize) -> Result<IdleBoundVector, BoundsError> {
    let c = padded(sorted_times(jobs)?, m);
    let n = c.len();
    let values = if n == m {
        c.clone()
    } else {
        let total: TimeValue = c.iter().sum();
        let mm = TimeValue::from(m);
        (1..=m)
            .map(|k| {
                let width = m - k + 1;
                let width_tv = TimeValue::from(width);
                (0..=n - m + k - 1)
                    .map(|i| {
                        let window: TimeValue = c[i..i + width].iter().sum();
                        (&total - &window) / &mm + &window / &width_tv
                    })
                    .max()
                    .expect("non-empty range")
            })
            .collect()
    };
    Ok(IdleBoundVector { flavor: BoundFlavor::IdenticalFjpLegacy, values })
}

/// Makespan upper bound on `m` unit-speed CPUs for any priority assignment.
pub fn ident_fjp_makespan(jobs: &JobSet, m: usize) -> Result<TimeValue, BoundsError> {
    let c = sorted_times(jobs)?;
    let Some((last, rest)) = c.split_last() else {
        return Ok(TimeValue::zero());
    };
    if c.len() <= m {
        return Ok(last.clone());
    }
    Ok(rest.iter().sum::<TimeValue>() / TimeValue::from(m) + last)
}

/// Work executed by each CPU after the first `i` jobs have been dispatched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessedWorkMatrix {
    /// `columns[i][k - 1]` is the work done on CPU `k` by jobs `1..=i`.
    columns: Vec<Vec<TimeValue>>,
}

impl ProcessedWorkMatrix {
    /// 1-based CPU `k`, job count `i`.
    pub fn get(&self, k: usize, i: usize) -> &TimeValue {
        &self.columns[i][k - 1]
    }

    pub fn column(&self, i: usize) -> &[TimeValue] {
        &self.columns[i]
    }

    pub fn last_column(&self) -> &[TimeValue] {
        self.columns.last().expect("column zero always exists")
    }

    pub fn job_count(&self) -> usize {
        self.columns.len() - 1
    }
}

/// Each job, in priority order, goes to the CPU with the least processed work,
/// preferring the highest index on ties.
pub fn ident_ftp_processed_work(jobs: &JobSet, m: usize) -> ProcessedWorkMatrix {
    let mut columns = Vec::with_capacity(jobs.len() + 1);
    let mut load = vec![TimeValue::zero(); m];
    columns.push(load.clone());
    for job in jobs.jobs() {
        let least = load.iter().min().expect("m ≥ 1").clone();
        let k = (0..m).rev().find(|&k| load[k] == least).expect("minimum exists");
        load[k] = &load[k] + &job.work;
        columns.push(load.clone());
    }
    ProcessedWorkMatrix { columns }
}

/// Exact idle instants on `m` unit-speed CPUs for jobs listed by priority.
pub fn ident_ftp_idle_bounds(jobs: &JobSet, m: usize) -> IdleBoundVector {
    let mut values = ident_ftp_processed_work(jobs, m).last_column().to_vec();
    values.sort();
    IdleBoundVector { flavor: BoundFlavor::IdenticalFtp, values }
}

/// Lower bounds on every idle instant of a uniform platform, valid for any
/// priority assignment.
pub fn unif_fjp_idle_lower(jobs: &JobSet, platform: &Platform) -> Result<Vec<TimeValue>, BoundsError> {
    let m = platform.m();
    let c = padded(sorted_times(jobs)?, m);
    let n = c.len();
    let total_speed = platform.total_speed();
    let mut prefix = TimeValue::zero();
    let mut prefixes = Vec::with_capacity(n + 1);
    prefixes.push(prefix.clone());
    for ci in &c {
        prefix = &prefix + ci;
        prefixes.push(prefix.clone());
    }
    Ok((1..=m).map(|k| &prefixes[n - m + k] / &total_speed).collect())
}

/// Upper bounds on every idle instant of a uniform platform, valid for any
/// priority assignment. The last entry is the makespan bound `ms1`.
pub fn unif_fjp_idle_upper(jobs: &JobSet, platform: &Platform) -> Result<IdleBoundVector, BoundsError> {
    let lower = unif_fjp_idle_lower(jobs, platform)?;
    let total = jobs.total_work();
    let mut drained = TimeValue::zero();
    let mut values = Vec::with_capacity(platform.m());
    for k in 0..platform.m() {
        values.push((&total - &drained) / platform.cumulative_speed(k));
        drained = &drained + &lower[k] * platform.speed(k);
    }
    Ok(IdleBoundVector { flavor: BoundFlavor::UniformFjp, values })
}

pub fn unif_fjp_ms1(jobs: &JobSet, platform: &Platform) -> Result<TimeValue, BoundsError> {
    Ok(unif_fjp_idle_upper(jobs, platform)?.makespan().clone())
}

/// Intermediate quantities of the uniform FJP makespan bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformBoundTrace {
    pub minidle: Vec<TimeValue>,
    pub maxidle: Vec<TimeValue>,
    /// `k_factors[j]` for `j = 0..n`.
    pub k_factors: Vec<TimeValue>,
    /// `h_factors[j]` for `j = 0..n`.
    pub h_factors: Vec<TimeValue>,
    /// 1-based CPU minimizing `s_i / (s_1 + … + s_i)`.
    pub x: usize,
    pub ms1: TimeValue,
    pub ms2: TimeValue,
    pub ms3: TimeValue,
}

impl UniformBoundTrace {
    pub fn ms_min(&self) -> TimeValue {
        [&self.ms1, &self.ms2, &self.ms3].into_iter().min().expect("three values").clone()
    }
}

pub fn unif_fjp_trace(jobs: &JobSet, platform: &Platform) -> Result<UniformBoundTrace, BoundsError> {
    let c = padded(sorted_times(jobs)?, platform.m());
    let n = c.len();
    let minidle = unif_fjp_idle_lower(jobs, platform)?;
    let maxidle = unif_fjp_idle_upper(jobs, platform)?.values;
    let s1 = platform.slowest();
    let sm = platform.fastest();
    let total_speed = platform.total_speed();

    let k_ratio = TimeValue::one() - s1 / sm;
    let k_factors: Vec<TimeValue> = (0..n).map(|j| k_ratio.pow(j as u32)).collect();

    let mut prefix_speed = TimeValue::zero();
    let mut best: Option<(TimeValue, usize, TimeValue)> = None;
    for (i, s) in platform.speeds().iter().enumerate() {
        prefix_speed = &prefix_speed + s;
        let ratio = s / &prefix_speed;
        if best.as_ref().is_none_or(|(r, _, _)| ratio < *r) {
            best = Some((ratio, i, prefix_speed.clone()));
        }
    }
    let (x_ratio, x_idx, x_prefix) = best.expect("m ≥ 1");
    let sx = platform.speed(x_idx);
    let h_ratio = TimeValue::one() - &x_ratio;
    let h_factors: Vec<TimeValue> = (0..n).map(|j| h_ratio.pow(j as u32)).collect();

    let mut before = TimeValue::zero();
    let mut sum2 = TimeValue::zero();
    let mut sum3 = TimeValue::zero();
    let spill2 = s1 / &total_speed;
    let spill3 = sx * sm / (&total_speed * &x_prefix);
    for (i, ci) in c.iter().enumerate() {
        let rest = n - 1 - i;
        sum2 = sum2 + (ci + &before * &spill2) * &k_factors[rest];
        sum3 = sum3 + (ci + &before * &spill3) * &h_factors[rest];
        before = &before + ci;
    }
    Ok(UniformBoundTrace {
        ms1: maxidle.last().expect("m ≥ 1").clone(),
        ms2: sum2 / sm,
        ms3: sum3 / sm,
        minidle,
        maxidle,
        k_factors,
        h_factors,
        x: x_idx + 1,
    })
}

pub fn unif_fjp_ms2(jobs: &JobSet, platform: &Platform) -> Result<TimeValue, BoundsError> {
    Ok(unif_fjp_trace(jobs, platform)?.ms2)
}

pub fn unif_fjp_ms3(jobs: &JobSet, platform: &Platform) -> Result<TimeValue, BoundsError> {
    Ok(unif_fjp_trace(jobs, platform)?.ms3)
}

/// The tightest of the three uniform FJP makespan bounds.
pub fn unif_fjp_ms_min(jobs: &JobSet, platform: &Platform) -> Result<TimeValue, BoundsError> {
    Ok(unif_fjp_trace(jobs, platform)?.ms_min())
}

/// Formulas kept for demonstration only. They do not bound anything.
pub mod unsound {
    use super::*;

    /// The identical-CPU makespan formula transplanted to uniform CPUs. It
    /// can fall below the real makespan and must never be used in a test.
    pub fn unif_fjp_ms0_naive(jobs: &JobSet, platform: &Platform) -> Result<TimeValue, BoundsError> {
        let c = sorted_times(jobs)?;
        let Some((last, rest)) = c.split_last() else {
            return Ok(TimeValue::zero());
        };
        Ok(rest.iter().sum::<TimeValue>() / platform.total_speed() + last / platform.fastest())
    }
}

/// An instant in the uniform FTP table; `Never` is the sentinel beyond the
/// fastest CPU and only takes part in comparisons.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Instant {
    At(TimeValue),
    Never,
}

/// Idle instants of a uniform platform after each job of an FTP order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformFtpIdleTable {
    /// `rows[i][j - 1]` is `idle_j` after the first `i` jobs.
    rows: Vec<Vec<TimeValue>>,
}

impl UniformFtpIdleTable {
    /// 1-based CPU `j`, job count `i`.
    pub fn get(&self, j: usize, i: usize) -> &TimeValue {
        &self.rows[i][j - 1]
    }

    pub fn row(&self, i: usize) -> &[TimeValue] {
        &self.rows[i]
    }

    pub fn final_idle(&self) -> IdleBoundVector {
        IdleBoundVector {
            flavor: BoundFlavor::UniformFtp,
            values: self.rows.last().expect("row zero always exists").clone(),
        }
    }

    pub fn makespan(&self) -> &TimeValue {
        self.rows.last().and_then(|r| r.last()).expect("m ≥ 1")
    }
}

/// Builds the idle-instant table one job at a time, highest priority first.
///
/// Each new job has lower priority than every job already placed, so it only
/// runs on CPU `j` once all faster-indexed positions below `j` have drained.
/// If it completes before reaching CPU `j`, `idle_j` is unchanged.
pub fn unif_ftp_idle_table(jobs: &JobSet, platform: &Platform) -> UniformFtpIdleTable {
    let m = platform.m();
    let mut rows = Vec::with_capacity(jobs.len() + 1);
    let mut idle = vec![TimeValue::zero(); m];
    rows.push(idle.clone());
    for job in jobs.jobs() {
        let c = &job.work;
        let prev = idle.clone();
        let at = |j: usize| if j < m { Instant::At(prev[j].clone()) } else { Instant::Never };
        // Work the job can execute on CPUs 1..j-1 before CPU j frees up.
        let mut reach = vec![TimeValue::zero(); m + 1];
        for j in 1..m {
            reach[j] = &reach[j - 1] + (&prev[j] - &prev[j - 1]) * platform.speed(j - 1);
        }
        for j in (0..m).rev() {
            let current = Instant::At(prev[j].clone());
            if current == at(j + 1) {
                continue;
            }
            let outlasts_j = match at(j + 1) {
                Instant::At(next) => *c >= &reach[j] + (&next - &prev[j]) * platform.speed(j),
                Instant::Never => false,
            };
            if outlasts_j {
                idle[j] = prev[j + 1].clone();
            } else if *c <= reach[j] {
                idle[j] = prev[j].clone();
            } else {
                idle[j] = &prev[j] + (c - &reach[j]) / platform.speed(j);
            }
        }
        rows.push(idle.clone());
    }
    UniformFtpIdleTable { rows }
}

/// One job per task with processing time equal to its WCET; job ids are
/// task ids, listed in task order.
pub fn critical_rem_job_set(mode: &Mode) -> Result<JobSet, BoundsError> {
    if mode.is_empty() {
        return Err(BoundsError::EmptyMode);
    }
    Ok(JobSet::from_times(&mode.tasks.iter().map(|t| t.wcet.clone()).collect::<Vec<_>>())
        .expect("task ids are distinct"))
}

/// The critical set arranged for the mode's bounds: by priority under fixed
/// task priorities, shortest first otherwise.
pub fn critical_rem_job_set_ordered(mode: &Mode) -> Result<JobSet, BoundsError> {
    let jobs = critical_rem_job_set(mode)?;
    match &mode.scheduler {
        Scheduler::FixedTask(order) => Ok(jobs
            .in_priority_order(&PriorityAssignment::new(order.clone()))
            .expect("priority order covers every task")),
        _ => Ok(jobs.sorted_ascending()),
    }
}

/// Heterogeneity of a platform: `max_j (s_1 + … + s_{j-1}) / s_j`.
pub fn lambda_pi(platform: &Platform) -> TimeValue {
    let mut before = TimeValue::zero();
    let mut best = TimeValue::zero();
    for s in platform.speeds() {
        let v = &before / s;
        if v > best {
            best = v;
        }
        before = &before + s;
    }
    best
}
