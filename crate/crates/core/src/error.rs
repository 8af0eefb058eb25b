use thiserror::Error;

use crate::time::TimeValue;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("platform has no CPU")]
    EmptyPlatform,
    #[error("CPU speed {0} is not positive")]
    NonPositiveSpeed(TimeValue),
    #[error("CPU speeds must be listed slowest first")]
    UnsortedSpeeds,
    #[error("job id {0} appears twice")]
    DuplicateJob(usize),
    #[error("job {0} has negative processing time")]
    NegativeWork(usize),
    #[error("priority assignment is not a permutation of the job ids")]
    NotAPermutation,
    #[error("invalid document: {0}")]
    Document(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("jobs must be sorted by non-decreasing processing time")]
    Unsorted,
    #[error("mode has no task")]
    EmptyMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("exhaustive search over {n} jobs refused (limit {limit}, {cost} schedules); use sampling")]
    TooManyJobs { n: usize, limit: usize, cost: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("mode {0} does not exist")]
    UnknownMode(usize),
    #[error("mode {mode} uses scheduler `{name}`, which cannot be simulated")]
    UnsupportedScheduler { mode: usize, name: String },
    #[error("MCR at {time} rejected: new-mode tasks were already enabled at {since}")]
    Lockout { time: TimeValue, since: TimeValue },
    #[error("rem-job of task {task} has remaining time {remaining} above its WCET")]
    RemainingAboveWcet { task: usize, remaining: TimeValue },
    #[error("rem-job of task {task} has a deadline before the MCR")]
    DeadlineBeforeMcr { task: usize },
    #[error("task {task} does not exist in mode {mode}")]
    UnknownTask { mode: usize, task: usize },
    #[error("missing transition deadlines for {from}->{to}")]
    MissingTransitionDeadlines { from: usize, to: usize },
    #[error("MCR schedule must be sorted by time")]
    UnsortedMcrs,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExperimentError {
    #[error("experiment needs at least one job")]
    NoJobs,
    #[error("speed grid is empty")]
    EmptyGrid,
    #[error("exhaustive experiment over {n} jobs refused (limit {limit}): {schedules} schedules across {platforms} platforms")]
    Infeasible { n: usize, limit: usize, platforms: usize, schedules: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
