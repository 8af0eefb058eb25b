//! Tasks, modes, applications, platforms and synchronous job sets.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::time::TimeValue;

/// A sporadic task with constrained deadline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    /// Index of the task within its mode.
    pub id: usize,
    pub wcet: TimeValue,
    pub deadline: TimeValue,
    pub period: TimeValue,
}

impl Task {
    pub fn new(id: usize, wcet: TimeValue, deadline: TimeValue, period: TimeValue) -> Self {
        Task { id, wcet, deadline, period }
    }

    /// `C / min(D, T)`.
    pub fn density(&self) -> TimeValue {
        &self.wcet / TimeValue::min_of(&self.deadline, &self.period)
    }
}

/// The scheduler a mode runs under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scheduler {
    /// Fixed task priorities; task ids listed highest priority first.
    FixedTask(Vec<usize>),
    /// Fixed job priorities by earliest absolute deadline.
    Edf,
    /// A rule this crate can neither simulate nor bound.
    Unsupported(String),
}

impl Scheduler {
    pub fn name(&self) -> String {
        match self {
            Scheduler::FixedTask(_) => "ftp".into(),
            Scheduler::Edf => "edf".into(),
            Scheduler::Unsupported(name) => name.clone(),
        }
    }

    pub fn is_fixed_task(&self) -> bool {
        matches!(self, Scheduler::FixedTask(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mode {
    pub tasks: Vec<Task>,
    pub scheduler: Scheduler,
}

impl Mode {
    pub fn new(tasks: Vec<Task>, scheduler: Scheduler) -> Self {
        Mode { tasks, scheduler }
    }

    /// Builds a mode from `(C, D, T)` triples, numbering tasks in order.
    pub fn from_params(params: &[(TimeValue, TimeValue, TimeValue)], scheduler: Scheduler) -> Self {
        let tasks = params
            .iter()
            .enumerate()
            .map(|(id, (c, d, t))| Task::new(id, c.clone(), d.clone(), t.clone()))
            .collect();
        Mode { tasks, scheduler }
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Position of each task in the fixed priority order (0 = highest).
    pub fn priority_ranks(&self) -> Option<Vec<usize>> {
        let Scheduler::FixedTask(order) = &self.scheduler else {
            return None;
        };
        let mut ranks = vec![usize::MAX; self.tasks.len()];
        for (rank, &task) in order.iter().enumerate() {
            if task < ranks.len() {
                ranks[task] = rank;
            }
        }
        Some(ranks)
    }

    /// The longest period of the mode.
    pub fn max_period(&self) -> TimeValue {
        self.tasks.iter().map(|t| t.period.clone()).max().unwrap_or_default()
    }
}

/// A multi-mode application with one transition deadline per
/// (source mode, target mode, target task).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Application {
    pub modes: Vec<Mode>,
    transition_deadlines: BTreeMap<(usize, usize), Vec<TimeValue>>,
}

impl Application {
    pub fn new(modes: Vec<Mode>) -> Self {
        Application { modes, transition_deadlines: BTreeMap::new() }
    }

    /// Sets the deadlines of every task of `to` when leaving `from`.
    pub fn set_transition_deadlines(&mut self, from: usize, to: usize, deadlines: Vec<TimeValue>) {
        self.transition_deadlines.insert((from, to), deadlines);
    }

    pub fn with_transition_deadlines(mut self, from: usize, to: usize, deadlines: Vec<TimeValue>) -> Self {
        self.set_transition_deadlines(from, to, deadlines);
        self
    }

    /// Deadlines of the tasks of `to` relative to an MCR issued in `from`.
    pub fn transition_deadlines(&self, from: usize, to: usize) -> Option<&[TimeValue]> {
        self.transition_deadlines.get(&(from, to)).map(Vec::as_slice)
    }

    pub fn transition_deadline(&self, from: usize, to: usize, task: usize) -> Option<&TimeValue> {
        self.transition_deadlines(from, to).and_then(|d| d.get(task))
    }

    /// Smallest deadline over every target mode and task reachable from `from`.
    pub fn min_transition_deadline(&self, from: usize) -> Option<(usize, usize, &TimeValue)> {
        (0..self.modes.len())
            .filter(|&to| to != from)
            .filter_map(|to| {
                let ds = self.transition_deadlines(from, to)?;
                ds.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).map(|(k, d)| (to, k, d))
            })
            .min_by(|a, b| a.2.cmp(b.2))
    }

    /// Ordered pairs of distinct modes.
    pub fn mode_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let x = self.modes.len();
        (0..x).flat_map(move |i| (0..x).filter(move |&j| j != i).map(move |j| (i, j)))
    }
}

/// CPU speeds, slowest first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Platform {
    speeds: Vec<TimeValue>,
}

impl Platform {
    pub fn new(speeds: Vec<TimeValue>) -> Result<Self, ModelError> {
        if speeds.is_empty() {
            return Err(ModelError::EmptyPlatform);
        }
        if let Some(s) = speeds.iter().find(|s| !s.is_positive()) {
            return Err(ModelError::NonPositiveSpeed(s.clone()));
        }
        if speeds.windows(2).any(|w| w[0] > w[1]) {
            return Err(ModelError::UnsortedSpeeds);
        }
        Ok(Platform { speeds })
    }

    /// Sorts the speeds before validating them.
    pub fn from_unsorted(mut speeds: Vec<TimeValue>) -> Result<Self, ModelError> {
        speeds.sort();
        Platform::new(speeds)
    }

    pub fn from_integers(speeds: &[i64]) -> Result<Self, ModelError> {
        Platform::new(speeds.iter().map(|&s| TimeValue::from_integer(s)).collect())
    }

    /// `m` unit-speed CPUs.
    pub fn identical(m: usize) -> Self {
        assert!(m >= 1, "a platform needs at least one CPU");
        Platform { speeds: vec![TimeValue::one(); m] }
    }

    pub fn m(&self) -> usize {
        self.speeds.len()
    }

    pub fn speeds(&self) -> &[TimeValue] {
        &self.speeds
    }

    /// Speed of the CPU at 0-based `index`.
    pub fn speed(&self, index: usize) -> &TimeValue {
        &self.speeds[index]
    }

    pub fn slowest(&self) -> &TimeValue {
        &self.speeds[0]
    }

    pub fn fastest(&self) -> &TimeValue {
        &self.speeds[self.speeds.len() - 1]
    }

    pub fn is_identical(&self) -> bool {
        self.speeds.windows(2).all(|w| w[0] == w[1])
    }

    /// Sum of the speeds of CPUs `from..m` (0-based), i.e. the capacity of
    /// the `m - from` fastest CPUs.
    pub fn cumulative_speed(&self, from: usize) -> TimeValue {
        self.speeds[from..].iter().sum()
    }

    pub fn total_speed(&self) -> TimeValue {
        self.cumulative_speed(0)
    }

    /// The platform extended with one more CPU.
    pub fn with_extra_cpu(&self, speed: TimeValue) -> Result<Self, ModelError> {
        let mut speeds = self.speeds.clone();
        speeds.push(speed);
        Platform::from_unsorted(speeds)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub id: usize,
    pub work: TimeValue,
}

/// Synchronous jobs, all released at time zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JobSet {
    jobs: Vec<Job>,
}

impl JobSet {
    pub fn new(jobs: Vec<Job>) -> Result<Self, ModelError> {
        let mut seen = HashSet::new();
        for job in &jobs {
            if !seen.insert(job.id) {
                return Err(ModelError::DuplicateJob(job.id));
            }
            if job.work.is_negative() {
                return Err(ModelError::NegativeWork(job.id));
            }
        }
        Ok(JobSet { jobs })
    }

    /// Jobs numbered `0..n` in the given order.
    pub fn from_times(times: &[TimeValue]) -> Result<Self, ModelError> {
        JobSet::new(
            times
                .iter()
                .enumerate()
                .map(|(id, c)| Job { id, work: c.clone() })
                .collect(),
        )
    }

    pub fn from_integers(times: &[i64]) -> Result<Self, ModelError> {
        JobSet::from_times(&times.iter().map(|&c| TimeValue::from_integer(c)).collect::<Vec<_>>())
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn times(&self) -> Vec<TimeValue> {
        self.jobs.iter().map(|j| j.work.clone()).collect()
    }

    pub fn total_work(&self) -> TimeValue {
        self.jobs.iter().map(|j| &j.work).sum()
    }

    pub fn is_sorted_ascending(&self) -> bool {
        self.jobs.windows(2).all(|w| w[0].work <= w[1].work)
    }

    /// Stable sort by processing time, shortest first.
    pub fn sorted_ascending(&self) -> JobSet {
        let mut jobs = self.jobs.clone();
        jobs.sort_by(|a, b| a.work.cmp(&b.work));
        JobSet { jobs }
    }

    /// The jobs rearranged so that position 0 holds the highest priority.
    pub fn in_priority_order(&self, prio: &PriorityAssignment) -> Result<JobSet, ModelError> {
        prio.check_against(self)?;
        let jobs = prio
            .order()
            .iter()
            .map(|id| self.jobs.iter().find(|j| j.id == *id).cloned().expect("checked"))
            .collect();
        Ok(JobSet { jobs })
    }

    /// The same ids with shorter or equal processing times.
    pub fn with_times(&self, times: &[TimeValue]) -> Result<JobSet, ModelError> {
        assert_eq!(times.len(), self.jobs.len());
        JobSet::new(
            self.jobs
                .iter()
                .zip(times)
                .map(|(j, c)| Job { id: j.id, work: c.clone() })
                .collect(),
        )
    }
}

/// A strict total order over job ids, highest priority first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PriorityAssignment {
    order: Vec<usize>,
}

impl PriorityAssignment {
    pub fn new(order: Vec<usize>) -> Self {
        PriorityAssignment { order }
    }

    /// Jobs `0..n` in index order.
    pub fn identity(n: usize) -> Self {
        PriorityAssignment { order: (0..n).collect() }
    }

    /// Job ids in the order they appear in `jobs`.
    pub fn as_listed(jobs: &JobSet) -> Self {
        PriorityAssignment { order: jobs.jobs().iter().map(|j| j.id).collect() }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn check_against(&self, jobs: &JobSet) -> Result<(), ModelError> {
        let ids: HashSet<usize> = jobs.jobs().iter().map(|j| j.id).collect();
        let listed: HashSet<usize> = self.order.iter().copied().collect();
        if self.order.len() != jobs.len() || listed.len() != self.order.len() || ids != listed {
            return Err(ModelError::NotAPermutation);
        }
        Ok(())
    }
}

/// One breach of a structural invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Lists every structural problem with an application on a platform.
pub fn validate_application(app: &Application, platform: &Platform) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |location: String, message: &str| {
        out.push(Violation { location, message: message.to_string() })
    };
    if app.modes.is_empty() {
        push("application".into(), "no modes");
    }
    let speeds = platform.speeds();
    if speeds.windows(2).any(|w| w[0] > w[1]) {
        push("platform".into(), "speeds must be non-decreasing");
    }
    if speeds.iter().any(|s| !s.is_positive()) {
        push("platform".into(), "speeds must be positive");
    }
    for (i, mode) in app.modes.iter().enumerate() {
        if mode.len() < platform.m() {
            push(format!("mode {i}"), "Assumption 4: m ≤ n_i");
        }
        for (k, task) in mode.tasks.iter().enumerate() {
            let at = format!("mode {i} task {k}");
            if task.id != k {
                push(at.clone(), "task id must equal its index");
            }
            if !task.wcet.is_positive() {
                push(at.clone(), "C > 0 fails");
            }
            if task.wcet > task.deadline {
                push(at.clone(), "C ≤ D fails");
            }
            if task.deadline > task.period {
                push(at.clone(), "D ≤ T fails");
            }
        }
        if let Scheduler::FixedTask(order) = &mode.scheduler {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted != (0..mode.len()).collect::<Vec<_>>() {
                push(format!("mode {i}"), "priority order must be a permutation of the tasks");
            }
        }
    }
    for (i, j) in app.mode_pairs() {
        let at = format!("transition {i}->{j}");
        match app.transition_deadlines(i, j) {
            None => push(at, "missing transition deadlines"),
            Some(ds) => {
                if ds.len() != app.modes[j].len() {
                    push(at.clone(), "one transition deadline per target task required");
                }
                if ds.iter().any(TimeValue::is_negative) {
                    push(at, "transition deadlines must be non-negative");
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskDoc {
    #[serde(rename = "C")]
    pub wcet: TimeValue,
    #[serde(rename = "D")]
    pub deadline: TimeValue,
    #[serde(rename = "T")]
    pub period: TimeValue,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchedulerDoc {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeDoc {
    pub tasks: Vec<TaskDoc>,
    pub scheduler: SchedulerDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlatformDoc {
    pub speeds: Vec<TimeValue>,
}

/// On-disk form of an application and its platform. Transition deadline
/// keys are `"i->j"` with 0-based mode indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDoc {
    pub modes: Vec<ModeDoc>,
    #[serde(default)]
    pub transition_deadlines: BTreeMap<String, Vec<TimeValue>>,
    pub platform: PlatformDoc,
}

impl SystemDoc {
    pub fn parse(json: &str) -> Result<Self, ModelError> {
        serde_json::from_str(json).map_err(|e| ModelError::Document(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn into_system(self) -> Result<(Application, Platform), ModelError> {
        let modes = self
            .modes
            .into_iter()
            .map(|m| {
                let scheduler = match (m.scheduler.kind.to_ascii_lowercase().as_str(), m.scheduler.order) {
                    ("ftp", Some(order)) => Scheduler::FixedTask(order),
                    ("ftp", None) => Scheduler::FixedTask((0..m.tasks.len()).collect()),
                    ("edf" | "fjp", _) => Scheduler::Edf,
                    (other, _) => Scheduler::Unsupported(other.to_string()),
                };
                let tasks = m
                    .tasks
                    .into_iter()
                    .enumerate()
                    .map(|(id, t)| Task::new(id, t.wcet, t.deadline, t.period))
                    .collect();
                Mode { tasks, scheduler }
            })
            .collect();
        let mut app = Application::new(modes);
        for (key, deadlines) in self.transition_deadlines {
            let (from, to) = parse_pair(&key)?;
            app.set_transition_deadlines(from, to, deadlines);
        }
        let platform = Platform::new(self.platform.speeds)?;
        Ok((app, platform))
    }

    pub fn from_system(app: &Application, platform: &Platform) -> Self {
        let modes = app
            .modes
            .iter()
            .map(|m| ModeDoc {
                tasks: m
                    .tasks
                    .iter()
                    .map(|t| TaskDoc {
                        wcet: t.wcet.clone(),
                        deadline: t.deadline.clone(),
                        period: t.period.clone(),
                    })
                    .collect(),
                scheduler: match &m.scheduler {
                    Scheduler::FixedTask(order) => SchedulerDoc { kind: "ftp".into(), order: Some(order.clone()) },
                    other => SchedulerDoc { kind: other.name(), order: None },
                },
            })
            .collect();
        let transition_deadlines = app
            .transition_deadlines
            .iter()
            .map(|((i, j), d)| (format!("{i}->{j}"), d.clone()))
            .collect();
        SystemDoc {
            modes,
            transition_deadlines,
            platform: PlatformDoc { speeds: platform.speeds().to_vec() },
        }
    }
}

fn parse_pair(key: &str) -> Result<(usize, usize), ModelError> {
    let bad = || ModelError::Document(format!("transition key `{key}` is not of the form \"i->j\""));
    let (a, b) = key.split_once("->").ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(n: i64) -> TimeValue {
        TimeValue::from_integer(n)
    }

    pub(crate) fn table_one_mode() -> Mode {
        let params: Vec<_> = [40, 20, 40, 60].iter().map(|&c| (tv(c), tv(120), tv(120))).collect();
        Mode::from_params(&params, Scheduler::FixedTask(vec![0, 1, 2, 3]))
    }

    #[test]
    fn table_one_mode_is_clean() {
        let app = Application::new(vec![table_one_mode()]);
        assert!(validate_application(&app, &Platform::identical(2)).is_empty());
    }

    #[test]
    fn wcet_above_deadline_is_reported() {
        let mode = Mode::from_params(&[(tv(10), tv(5), tv(20))], Scheduler::Edf);
        let v = validate_application(&Application::new(vec![mode]), &Platform::identical(1));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].message, "C ≤ D fails");
    }

    #[test]
    fn too_few_tasks_for_the_platform() {
        let mode = Mode::from_params(&[(tv(1), tv(5), tv(5))], Scheduler::Edf);
        let v = validate_application(&Application::new(vec![mode]), &Platform::identical(2));
        assert_eq!(v[0].message, "Assumption 4: m ≤ n_i");
    }

    #[test]
    fn missing_and_short_transition_deadlines() {
        let app = Application::new(vec![table_one_mode(), table_one_mode()])
            .with_transition_deadlines(0, 1, vec![tv(100); 3]);
        let v = validate_application(&app, &Platform::identical(2));
        let msgs: Vec<_> = v.iter().map(|v| v.to_string()).collect();
        assert!(msgs.contains(&"transition 0->1: one transition deadline per target task required".to_string()));
        assert!(msgs.contains(&"transition 1->0: missing transition deadlines".to_string()));
    }

    #[test]
    fn cumulative_speed_decreases() {
        let p = Platform::from_integers(&[1, 2, 10]).unwrap();
        assert_eq!(p.cumulative_speed(0), tv(13));
        assert_eq!(p.cumulative_speed(1), tv(12));
        assert_eq!(p.cumulative_speed(2), tv(10));
        assert!(Platform::from_integers(&[2, 1]).is_err());
        assert!(Platform::from_integers(&[0, 1]).is_err());
    }

    #[test]
    fn document_round_trip_is_lossless() {
        let json = r#"{
            "modes": [
                {"tasks": [{"C": 40, "D": 120, "T": 120}, {"C": "7/2", "D": 10, "T": 12}],
                 "scheduler": {"kind": "ftp", "order": [1, 0]}},
                {"tasks": [{"C": 1, "D": 4, "T": 4}, {"C": 2, "D": 8, "T": 8}], "scheduler": {"kind": "edf"}}
            ],
            "transition_deadlines": {"0->1": [10, "21/2"], "1->0": [5, 6]},
            "platform": {"speeds": [1, "3/2"]}
        }"#;
        let (app, platform) = SystemDoc::parse(json).unwrap().into_system().unwrap();
        assert_eq!(app.modes[0].tasks[1].wcet, TimeValue::ratio(7, 2));
        assert_eq!(app.transition_deadline(0, 1, 1), Some(&TimeValue::ratio(21, 2)));
        assert!(validate_application(&app, &platform).is_empty());
        let again = SystemDoc::from_system(&app, &platform).to_json();
        let (app2, platform2) = SystemDoc::parse(&again).unwrap().into_system().unwrap();
        assert_eq!(app, app2);
        assert_eq!(platform, platform2);
    }

    #[test]
    fn priority_assignment_must_cover_jobs() {
        let jobs = JobSet::from_integers(&[1, 2, 3]).unwrap();
        assert!(PriorityAssignment::new(vec![2, 0, 1]).check_against(&jobs).is_ok());
        assert!(PriorityAssignment::new(vec![2, 0]).check_against(&jobs).is_err());
        assert!(PriorityAssignment::new(vec![2, 0, 0]).check_against(&jobs).is_err());
    }
}
