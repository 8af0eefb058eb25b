//! Run-time behavior of the SM-MSO and AM-MSO transition protocols.
//!
//! A single event loop drives periodic releases, mode change requests and
//! transitions. During a transition the jobs left over from the old mode
//! (rem-jobs) outrank every new-mode job; within each group the group's own
//! scheduler decides.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::ProtocolError;
use crate::model::{Application, Platform, Scheduler, SystemDoc, Task};
use crate::simkernel::{dispatch_for, Completion, Machine, Segment};
use crate::time::TimeValue;
use crate::validity::{scan_order, DensityTest, SchedTest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Enables every new-mode task once the last rem-job completes.
    SmMso,
    /// Enables new-mode tasks on CPUs freed by rem-jobs as soon as a
    /// schedulability test admits them.
    AmMso,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::SmMso => "SM-MSO",
            Protocol::AmMso => "AM-MSO",
        })
    }
}

impl std::str::FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "sm" | "smmso" => Ok(Protocol::SmMso),
            "am" | "ammso" => Ok(Protocol::AmMso),
            _ => Err(format!("unknown protocol `{s}` (expected sm-mso or am-mso)")),
        }
    }
}

/// Execution time of each released job.
#[derive(Clone, Default)]
pub enum ExecTime {
    #[default]
    Wcet,
    /// WCET times a factor in `(0, 1]`.
    Scaled(TimeValue),
    /// `f(mode, task, job index)`, clamped to `[0, WCET]`.
    Custom(Arc<dyn Fn(usize, usize, u64) -> TimeValue + Send + Sync>),
}

impl fmt::Debug for ExecTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecTime::Wcet => f.write_str("Wcet"),
            ExecTime::Scaled(s) => write!(f, "Scaled({s})"),
            ExecTime::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Order in which AM-MSO scans disabled target tasks; defaults to
/// non-decreasing transition deadline.
pub type ScanOrderFn = Arc<dyn Fn(&Application, usize, usize) -> Vec<usize> + Send + Sync>;

#[derive(Clone)]
pub struct RunOptions<'a> {
    pub protocol: Protocol,
    pub sched_test: &'a dyn SchedTest,
    pub exec: ExecTime,
    /// Mode active at time zero in [`run_multimode`].
    pub initial_mode: usize,
    pub scan_order: Option<ScanOrderFn>,
}

impl RunOptions<'static> {
    pub fn new(protocol: Protocol) -> Self {
        RunOptions { protocol, sched_test: &DensityTest, exec: ExecTime::Wcet, initial_mode: 0, scan_order: None }
    }
}

impl<'a> RunOptions<'a> {
    pub fn with_sched_test<'b>(self, sched_test: &'b dyn SchedTest) -> RunOptions<'b>
    where
        'a: 'b,
    {
        RunOptions { sched_test, ..self }
    }

    pub fn with_exec(mut self, exec: ExecTime) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_initial_mode(mut self, mode: usize) -> Self {
        self.initial_mode = mode;
        self
    }

    pub fn with_scan_order(mut self, order: ScanOrderFn) -> Self {
        self.scan_order = Some(order);
        self
    }
}

/// A job of the old mode still pending at the MCR.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemJob {
    pub task: usize,
    pub remaining: TimeValue,
    /// Absolute deadline.
    pub deadline: TimeValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionScenario {
    pub app: Application,
    pub platform: Platform,
    pub source: usize,
    pub target: usize,
    pub mcr_time: TimeValue,
    pub rem_jobs: Vec<RemJob>,
}

impl TransitionScenario {
    /// Every task of the source mode has a full job pending at the MCR.
    pub fn critical(app: Application, platform: Platform, source: usize, target: usize, mcr_time: TimeValue) -> Self {
        let rem_jobs = app.modes[source]
            .tasks
            .iter()
            .map(|t| RemJob { task: t.id, remaining: t.wcet.clone(), deadline: &mcr_time + &t.deadline })
            .collect();
        TransitionScenario { app, platform, source, target, mcr_time, rem_jobs }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let modes = self.app.modes.len();
        for mode in [self.source, self.target] {
            if mode >= modes {
                return Err(ProtocolError::UnknownMode(mode));
            }
        }
        let source = &self.app.modes[self.source];
        for rj in &self.rem_jobs {
            let task = source
                .tasks
                .get(rj.task)
                .ok_or(ProtocolError::UnknownTask { mode: self.source, task: rj.task })?;
            if rj.remaining > task.wcet || rj.remaining.is_negative() {
                return Err(ProtocolError::RemainingAboveWcet { task: rj.task, remaining: rj.remaining.clone() });
            }
            if rj.deadline < self.mcr_time {
                return Err(ProtocolError::DeadlineBeforeMcr { task: rj.task });
            }
        }
        Ok(())
    }
}

/// A job that completed after its deadline, or was unfinished when its
/// deadline passed (`finish` is `None`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Miss {
    pub mode: usize,
    pub task: usize,
    pub release: TimeValue,
    pub deadline: TimeValue,
    pub finish: Option<TimeValue>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMiss {
    pub task: usize,
    /// Absolute transition deadline.
    pub deadline: TimeValue,
    pub enabled_at: TimeValue,
}

/// A trace segment labelled with the job it belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSegment {
    pub mode: usize,
    pub task: usize,
    /// Per-task job number within the run.
    pub index: u64,
    pub rem: bool,
    pub cpu: usize,
    pub start: TimeValue,
    pub end: TimeValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionReport {
    pub protocol: Protocol,
    pub from: usize,
    pub to: usize,
    /// Time of the latest MCR of this transition.
    pub mcr_time: TimeValue,
    /// Time of the MCR that started the transition.
    pub started_at: TimeValue,
    /// Enable instant of each target task relative to `mcr_time`.
    pub enable_offsets: Vec<TimeValue>,
    pub transition_end: TimeValue,
    pub remjob_deadline_misses: Vec<Miss>,
    pub transition_deadline_misses: Vec<TransitionMiss>,
    /// Misses of new-mode jobs released before the transition ended.
    pub newmode_job_deadline_misses: Vec<Miss>,
    pub trace: Vec<TaggedSegment>,
}

impl TransitionReport {
    pub fn enable_time(&self, task: usize) -> TimeValue {
        &self.mcr_time + &self.enable_offsets[task]
    }

    pub fn first_enablement(&self) -> Option<TimeValue> {
        self.enable_offsets.iter().min().map(|o| &self.mcr_time + o)
    }

    pub fn length(&self) -> TimeValue {
        &self.transition_end - &self.started_at
    }

    pub fn miss_count(&self) -> usize {
        self.remjob_deadline_misses.len()
            + self.transition_deadline_misses.len()
            + self.newmode_job_deadline_misses.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Steady { mode: usize },
    Transition { from: usize, to: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phase {
    pub kind: PhaseKind,
    pub start: TimeValue,
    pub end: TimeValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobRecord {
    pub mode: usize,
    pub task: usize,
    pub index: u64,
    pub release: TimeValue,
    pub deadline: TimeValue,
    pub work: TimeValue,
    pub start: Option<TimeValue>,
    pub finish: Option<TimeValue>,
    /// Transition during which this job was a rem-job.
    pub rem_of: Option<usize>,
    /// Transition during which this new-mode job was released.
    pub released_during: Option<usize>,
}

/// Everything observed in a multi-mode run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultimodeTrace {
    pub phases: Vec<Phase>,
    pub transitions: Vec<TransitionReport>,
    pub steady_misses: Vec<Miss>,
    pub jobs: Vec<JobRecord>,
    /// Segments keyed by index into `jobs`.
    pub segments: Vec<Segment>,
    pub horizon: TimeValue,
}

impl MultimodeTrace {
    pub fn total_misses(&self) -> usize {
        self.steady_misses.len() + self.transitions.iter().map(TransitionReport::miss_count).sum::<usize>()
    }

    /// Distinct release instants, in order.
    pub fn release_instants(&self) -> Vec<TimeValue> {
        let set: BTreeSet<&TimeValue> = self.jobs.iter().map(|j| &j.release).collect();
        set.into_iter().cloned().collect()
    }
}

/// A mode change request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mcr {
    pub time: TimeValue,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Rank {
    Fixed { task_rank: usize, release: TimeValue, seq: usize },
    Deadline { deadline: TimeValue, release: TimeValue, task: usize, seq: usize },
}

/// Layer 0 holds rem-jobs, layer 1 the current mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct JobKey {
    layer: u8,
    rank: Rank,
}

struct Releaser {
    mode: usize,
    task: usize,
    next: TimeValue,
}

struct Ongoing {
    report: usize,
    from: usize,
    to: usize,
    mcr: TimeValue,
    rem: BTreeSet<usize>,
    avail: usize,
    disabled: Vec<usize>,
    enabled: Vec<usize>,
    first_enable: Option<TimeValue>,
    offsets: Vec<Option<TimeValue>>,
}

struct Runtime<'a> {
    app: &'a Application,
    platform: &'a Platform,
    opts: &'a RunOptions<'a>,
    ranks: Vec<Option<Vec<usize>>>,
    machine: Machine<JobKey>,
    jobs: Vec<JobRecord>,
    counters: HashMap<(usize, usize), u64>,
    releasers: Vec<Releaser>,
    steady_mode: Option<usize>,
    ongoing: Option<Ongoing>,
    reports: Vec<TransitionReport>,
    trace_until: Vec<Option<TimeValue>>,
    steady_misses: Vec<Miss>,
    phases: Vec<Phase>,
    phase_start: TimeValue,
    horizon: Option<TimeValue>,
    stop_after_transition: bool,
}

impl<'a> Runtime<'a> {
    fn new(
        app: &'a Application,
        platform: &'a Platform,
        opts: &'a RunOptions<'a>,
        start: TimeValue,
    ) -> Result<Self, ProtocolError> {
        for (i, mode) in app.modes.iter().enumerate() {
            if let Scheduler::Unsupported(name) = &mode.scheduler {
                return Err(ProtocolError::UnsupportedScheduler { mode: i, name: name.clone() });
            }
        }
        Ok(Runtime {
            app,
            platform,
            opts,
            ranks: app.modes.iter().map(|m| m.priority_ranks()).collect(),
            machine: Machine::new(platform.speeds().to_vec(), dispatch_for(platform), start.clone()),
            jobs: Vec::new(),
            counters: HashMap::new(),
            releasers: Vec::new(),
            steady_mode: None,
            ongoing: None,
            reports: Vec::new(),
            trace_until: Vec::new(),
            steady_misses: Vec::new(),
            phases: Vec::new(),
            phase_start: start,
            horizon: None,
            stop_after_transition: false,
        })
    }

    fn now(&self) -> TimeValue {
        self.machine.now().clone()
    }

    fn key(&self, mode: usize, task: usize, release: &TimeValue, deadline: &TimeValue, seq: usize, layer: u8) -> JobKey {
        let rank = match &self.ranks[mode] {
            Some(ranks) => Rank::Fixed { task_rank: ranks[task], release: release.clone(), seq },
            None => Rank::Deadline { deadline: deadline.clone(), release: release.clone(), task, seq },
        };
        JobKey { layer, rank }
    }

    fn exec_time(&self, task: &Task, mode: usize, index: u64) -> TimeValue {
        match &self.opts.exec {
            ExecTime::Wcet => task.wcet.clone(),
            ExecTime::Scaled(f) => &task.wcet * f,
            ExecTime::Custom(f) => {
                let c = f(mode, task.id, index);
                if c.is_negative() {
                    TimeValue::zero()
                } else {
                    TimeValue::min_of(&c, &task.wcet).clone()
                }
            }
        }
    }

    /// Adds a job to the machine; returns its record id.
    fn add_job(&mut self, mode: usize, task: usize, work: TimeValue, release: TimeValue, deadline: TimeValue, layer: u8) {
        let counter = self.counters.entry((mode, task)).or_insert(0);
        let index = *counter;
        *counter += 1;
        let id = self.jobs.len();
        let key = self.key(mode, task, &release, &deadline, id, layer);
        let released_during = self.ongoing.as_ref().map(|o| o.report);
        self.jobs.push(JobRecord {
            mode,
            task,
            index,
            release,
            deadline,
            work: work.clone(),
            start: None,
            finish: None,
            rem_of: None,
            released_during,
        });
        if let Some(done) = self.machine.release(id, key, work) {
            self.complete(done);
        }
    }

    fn release_due(&mut self) {
        let now = self.now();
        if self.horizon.as_ref().is_some_and(|h| now >= *h) {
            return;
        }
        let mut i = 0;
        while i < self.releasers.len() {
            if self.releasers[i].next == now {
                let (mode, task) = (self.releasers[i].mode, self.releasers[i].task);
                let spec = self.app.modes[mode].tasks[task].clone();
                self.releasers[i].next = &now + &spec.period;
                let index = *self.counters.get(&(mode, task)).unwrap_or(&0);
                let work = self.exec_time(&spec, mode, index);
                self.add_job(mode, task, work, now.clone(), &now + &spec.deadline, 1);
            }
            i += 1;
        }
    }

    fn record_miss(&mut self, id: usize) {
        let job = &self.jobs[id];
        let miss = Miss {
            mode: job.mode,
            task: job.task,
            release: job.release.clone(),
            deadline: job.deadline.clone(),
            finish: job.finish.clone(),
        };
        if let Some(r) = job.rem_of {
            self.reports[r].remjob_deadline_misses.push(miss);
        } else if let Some(r) = job.released_during {
            self.reports[r].newmode_job_deadline_misses.push(miss);
        } else {
            self.steady_misses.push(miss);
        }
    }

    fn complete(&mut self, done: Completion) {
        let id = done.job;
        self.jobs[id].start = Some(done.start);
        self.jobs[id].finish = Some(done.finish.clone());
        if done.finish > self.jobs[id].deadline {
            self.record_miss(id);
        }
        let was_rem = self.ongoing.as_mut().is_some_and(|o| o.rem.remove(&id));
        if was_rem {
            self.on_rem_done();
        }
    }

    fn on_rem_done(&mut self) {
        let Some(ongoing) = &self.ongoing else { return };
        let r = ongoing.rem.len();
        if self.opts.protocol == Protocol::AmMso {
            self.grow_available(self.platform.m().saturating_sub(r));
        }
        if r == 0 {
            self.finish_transition();
        }
    }

    /// Adds the slowest CPUs not yet available, one at a time, scanning the
    /// disabled tasks after each.
    fn grow_available(&mut self, target: usize) {
        while self.ongoing.as_ref().is_some_and(|o| o.avail < target) {
            self.ongoing.as_mut().expect("checked").avail += 1;
            self.scan();
        }
    }

    fn scan(&mut self) {
        let ongoing = self.ongoing.as_ref().expect("scan during a transition");
        let target = &self.app.modes[ongoing.to];
        let cpus = &self.platform.speeds()[..ongoing.avail];
        let mut enabled: Vec<Task> = ongoing.enabled.iter().map(|&k| target.tasks[k].clone()).collect();
        let mut newly = Vec::new();
        for &k in &ongoing.disabled {
            enabled.push(target.tasks[k].clone());
            if self.opts.sched_test.schedulable(cpus, &target.scheduler, &enabled) {
                newly.push(k);
            } else {
                enabled.pop();
            }
        }
        for k in newly {
            self.enable(k);
        }
    }

    fn enable(&mut self, task: usize) {
        let now = self.now();
        let ongoing = self.ongoing.as_mut().expect("enable during a transition");
        ongoing.disabled.retain(|&k| k != task);
        ongoing.enabled.push(task);
        ongoing.offsets[task] = Some(&now - &ongoing.mcr);
        ongoing.first_enable.get_or_insert_with(|| now.clone());
        self.releasers.push(Releaser { mode: ongoing.to, task, next: now });
    }

    fn push_phase(&mut self, kind: PhaseKind) {
        let now = self.now();
        self.phases.push(Phase { kind, start: self.phase_start.clone(), end: now.clone() });
        self.phase_start = now;
    }

    fn scan_list(&self, from: usize, to: usize) -> Result<Vec<usize>, ProtocolError> {
        match &self.opts.scan_order {
            Some(f) => Ok(f(self.app, from, to)),
            None => scan_order(self.app, from, to),
        }
    }

    fn start_transition(&mut self, from: usize, to: usize) -> Result<(), ProtocolError> {
        let disabled = self.scan_list(from, to)?;
        let now = self.now();
        if let Some(mode) = self.steady_mode.take() {
            self.push_phase(PhaseKind::Steady { mode });
        }
        self.releasers.clear();
        let report = self.reports.len();
        let mut rem = BTreeSet::new();
        self.machine.rekey(|id, key| {
            rem.insert(id);
            JobKey { layer: 0, rank: key.rank.clone() }
        });
        for &id in &rem {
            self.jobs[id].rem_of = Some(report);
        }
        let n_to = self.app.modes[to].len();
        self.reports.push(TransitionReport {
            protocol: self.opts.protocol,
            from,
            to,
            mcr_time: now.clone(),
            started_at: now.clone(),
            enable_offsets: Vec::new(),
            transition_end: now.clone(),
            remjob_deadline_misses: Vec::new(),
            transition_deadline_misses: Vec::new(),
            newmode_job_deadline_misses: Vec::new(),
            trace: Vec::new(),
        });
        self.trace_until.push(None);
        self.ongoing = Some(Ongoing {
            report,
            from,
            to,
            mcr: now,
            rem,
            avail: 0,
            disabled,
            enabled: Vec::new(),
            first_enable: None,
            offsets: vec![None; n_to],
        });
        self.on_rem_done();
        Ok(())
    }

    fn retarget(&mut self, to: usize) -> Result<(), ProtocolError> {
        let from = self.ongoing.as_ref().expect("retarget during a transition").from;
        let disabled = self.scan_list(from, to)?;
        let now = self.now();
        let n_to = self.app.modes[to].len();
        let ongoing = self.ongoing.as_mut().expect("checked");
        let avail = ongoing.avail;
        ongoing.to = to;
        ongoing.mcr = now.clone();
        ongoing.disabled = disabled;
        ongoing.enabled.clear();
        ongoing.offsets = vec![None; n_to];
        ongoing.avail = 0;
        let report = &mut self.reports[ongoing.report];
        report.to = to;
        report.mcr_time = now;
        if self.opts.protocol == Protocol::AmMso {
            self.grow_available(avail);
        }
        Ok(())
    }

    fn handle_mcr(&mut self, target: usize) -> Result<(), ProtocolError> {
        if target >= self.app.modes.len() {
            return Err(ProtocolError::UnknownMode(target));
        }
        if let Some(ongoing) = &self.ongoing {
            if self.opts.protocol == Protocol::AmMso {
                if let Some(since) = &ongoing.first_enable {
                    return Err(ProtocolError::Lockout { time: self.now(), since: since.clone() });
                }
            }
            return self.retarget(target);
        }
        let current = self.steady_mode.expect("either steady or in transition");
        if current == target {
            return Ok(());
        }
        self.start_transition(current, target)
    }

    fn finish_transition(&mut self) {
        let disabled = self.ongoing.as_ref().map(|o| o.disabled.clone()).unwrap_or_default();
        for task in disabled {
            self.enable(task);
        }
        let ongoing = self.ongoing.take().expect("finishing a transition");
        let now = self.now();
        let deadlines = self.app.transition_deadlines(ongoing.from, ongoing.to);
        let report = &mut self.reports[ongoing.report];
        report.transition_end = now.clone();
        report.enable_offsets = ongoing.offsets.into_iter().map(|o| o.expect("every task enabled")).collect();
        if let Some(ds) = deadlines {
            for (task, (offset, d)) in report.enable_offsets.iter().zip(ds).enumerate() {
                if offset > d {
                    report.transition_deadline_misses.push(TransitionMiss {
                        task,
                        deadline: &ongoing.mcr + d,
                        enabled_at: &ongoing.mcr + offset,
                    });
                }
            }
        }
        self.phases.push(Phase {
            kind: PhaseKind::Transition { from: ongoing.from, to: ongoing.to },
            start: self.phase_start.clone(),
            end: now.clone(),
        });
        self.phase_start = now.clone();
        self.steady_mode = Some(ongoing.to);
        if self.stop_after_transition {
            let last = self
                .jobs
                .iter()
                .filter(|j| j.released_during == Some(ongoing.report))
                .map(|j| j.deadline.clone())
                .max()
                .map_or(now.clone(), |d| d.max(now.clone()));
            let end = last;
            self.trace_until[ongoing.report] = Some(end.clone());
            self.horizon = Some(end);
        } else {
            self.trace_until[ongoing.report] = Some(now);
        }
    }

    fn run(&mut self, mcrs: &[Mcr]) -> Result<(), ProtocolError> {
        let mut pending = mcrs.iter().peekable();
        loop {
            self.release_due();
            while let Some(mcr) = pending.peek() {
                if mcr.time > self.now() {
                    break;
                }
                if mcr.time < self.now() {
                    return Err(ProtocolError::UnsortedMcrs);
                }
                self.handle_mcr(mcr.target)?;
                pending.next();
                self.release_due();
            }
            let now = self.now();
            if self.horizon.as_ref().is_some_and(|h| now >= *h) {
                break;
            }
            let mut next: Option<TimeValue> = self.releasers.iter().map(|r| r.next.clone()).min();
            for candidate in [pending.peek().map(|m| m.time.clone()), self.horizon.clone()].into_iter().flatten() {
                next = Some(match next {
                    Some(n) => n.min(candidate),
                    None => candidate,
                });
            }
            if next.is_none() && self.machine.is_idle() {
                break;
            }
            for done in self.machine.advance(next.as_ref()) {
                self.complete(done);
            }
        }
        self.close_out();
        Ok(())
    }

    /// Jobs whose deadline has passed without completing are misses.
    fn close_out(&mut self) {
        let now = self.now();
        let late: Vec<usize> = (0..self.jobs.len())
            .filter(|&id| self.jobs[id].finish.is_none() && self.jobs[id].deadline <= now && self.machine.is_active(id))
            .collect();
        for id in late {
            self.record_miss(id);
        }
        if let Some(mode) = self.steady_mode {
            self.push_phase(PhaseKind::Steady { mode });
        }
    }

    fn finish(mut self) -> MultimodeTrace {
        let horizon = self.now();
        let segments = self.machine.take_segments();
        for (r, until) in self.trace_until.iter().enumerate() {
            let report = &mut self.reports[r];
            let until = until.clone().unwrap_or_else(|| horizon.clone());
            report.trace = segments
                .iter()
                .filter(|s| s.end > report.started_at && s.start < until)
                .map(|s| {
                    let job = &self.jobs[s.job];
                    TaggedSegment {
                        mode: job.mode,
                        task: job.task,
                        index: job.index,
                        rem: job.rem_of == Some(r),
                        cpu: s.cpu,
                        start: s.start.clone().max(report.started_at.clone()),
                        end: TimeValue::min_of(&s.end, &until).clone(),
                    }
                })
                .collect();
            report.trace.sort_by(|a, b| a.start.cmp(&b.start).then(a.cpu.cmp(&b.cpu)));
        }
        MultimodeTrace {
            phases: self.phases,
            transitions: self.reports,
            steady_misses: self.steady_misses,
            jobs: self.jobs,
            segments,
            horizon,
        }
    }
}

/// Runs one transition from explicit rem-jobs until every new-mode job
/// released during the transition has reached its deadline.
pub fn run_scenario(sc: &TransitionScenario, opts: &RunOptions) -> Result<TransitionReport, ProtocolError> {
    sc.validate()?;
    let mut rt = Runtime::new(&sc.app, &sc.platform, opts, sc.mcr_time.clone())?;
    rt.stop_after_transition = true;
    let source = &sc.app.modes[sc.source];
    for rj in &sc.rem_jobs {
        let natural = &rj.deadline - &source.tasks[rj.task].deadline;
        let release = TimeValue::min_of(&natural, &sc.mcr_time).clone();
        rt.add_job(sc.source, rj.task, rj.remaining.clone(), release, rj.deadline.clone(), 1);
    }
    rt.start_transition(sc.source, sc.target)?;
    rt.run(&[])?;
    let trace = rt.finish();
    Ok(trace.transitions.into_iter().next().expect("one transition"))
}

pub fn run_smmso(sc: &TransitionScenario) -> Result<TransitionReport, ProtocolError> {
    run_scenario(sc, &RunOptions::new(Protocol::SmMso))
}

pub fn run_ammso(sc: &TransitionScenario, sched_test: &dyn SchedTest) -> Result<TransitionReport, ProtocolError> {
    run_scenario(sc, &RunOptions::new(Protocol::AmMso).with_sched_test(sched_test))
}

/// Runs the application from time zero in `opts.initial_mode` with
/// synchronous periodic releases, applying each MCR at its instant, until
/// `horizon`.
pub fn run_multimode(
    app: &Application,
    platform: &Platform,
    mcr_schedule: &[Mcr],
    horizon: TimeValue,
    opts: &RunOptions,
) -> Result<MultimodeTrace, ProtocolError> {
    if mcr_schedule.windows(2).any(|w| w[0].time > w[1].time) {
        return Err(ProtocolError::UnsortedMcrs);
    }
    let initial = opts.initial_mode;
    if initial >= app.modes.len() {
        return Err(ProtocolError::UnknownMode(initial));
    }
    let mut rt = Runtime::new(app, platform, opts, TimeValue::zero())?;
    rt.horizon = Some(horizon);
    rt.steady_mode = Some(initial);
    for task in &app.modes[initial].tasks {
        rt.releasers.push(Releaser { mode: initial, task: task.id, next: TimeValue::zero() });
    }
    rt.run(mcr_schedule)?;
    Ok(rt.finish())
}

/// CSV of a tagged trace: `mode,task,job,kind,cpu,start,end`, 1-based
/// numbering.
pub fn trace_csv(trace: &[TaggedSegment], places: Option<usize>) -> String {
    use std::fmt::Write as _;
    let render = |t: &TimeValue| match places {
        Some(p) => t.to_decimal(p),
        None => t.to_string(),
    };
    let mut out = String::from("mode,task,job,kind,cpu,start,end\n");
    for s in trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.mode + 1,
            s.task + 1,
            s.index + 1,
            if s.rem { "rem" } else { "new" },
            s.cpu + 1,
            render(&s.start),
            render(&s.end)
        );
    }
    out
}

/// Scenario file: an application document plus MCRs and optional rem-jobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioDoc {
    #[serde(flatten)]
    pub system: SystemDoc,
    #[serde(default)]
    pub source: usize,
    #[serde(default)]
    pub mcr_schedule: Vec<Mcr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rem_jobs: Option<Vec<RemJob>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<TimeValue>,
}

impl ScenarioDoc {
    pub fn parse(json: &str) -> Result<Self, crate::error::ModelError> {
        serde_json::from_str(json).map_err(|e| crate::error::ModelError::Document(e.to_string()))
    }
}
