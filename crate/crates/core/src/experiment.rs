//! Accuracy of the uniform FJP makespan bounds against the exact maximum
//! makespan, over a grid of platforms.

use std::fmt::Write as _;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{lambda_pi, unif_fjp_trace};
use crate::error::ExperimentError;
use crate::model::{JobSet, Platform};
use crate::oracle::{exact_max, factorial, sampled_max, OracleMode, DEFAULT_LIMIT};
use crate::time::TimeValue;

/// Processing times of the reference ten-job set.
pub const REFERENCE_JOBS: [i64; 10] = [3896, 3964, 878, 1378, 2228, 3612, 1230, 1232, 1668, 4672];

/// Every CPU picks its speed from `levels`; each combination becomes one
/// platform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeedGrid {
    pub levels: Vec<TimeValue>,
    pub m: usize,
}

impl SpeedGrid {
    /// `min, min + step, …` up to and including `max` when reachable.
    pub fn range(min: TimeValue, max: TimeValue, step: TimeValue, m: usize) -> Self {
        let mut levels = Vec::new();
        let mut s = min;
        while s <= max && step.is_positive() {
            levels.push(s.clone());
            s = &s + &step;
        }
        SpeedGrid { levels, m }
    }

    pub fn len(&self) -> usize {
        if self.m == 0 {
            return 0;
        }
        self.levels.len().pow(self.m as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All `levels^m` combinations in lexicographic order, each sorted into
    /// a platform. Permuted combinations yield repeated platforms.
    pub fn platforms(&self) -> Result<Vec<Platform>, ExperimentError> {
        if self.is_empty() {
            return Err(ExperimentError::EmptyGrid);
        }
        let l = self.levels.len();
        (0..self.len())
            .map(|mut code| {
                let mut speeds = vec![TimeValue::zero(); self.m];
                for slot in speeds.iter_mut().rev() {
                    *slot = self.levels[code % l].clone();
                    code /= l;
                }
                Ok(Platform::from_unsorted(speeds)?)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleChoice {
    /// Refuses job sets above the oracle limit.
    Exhaustive,
    Sampled { samples: usize },
    /// Exhaustive up to the limit, sampled beyond.
    Auto { samples: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub jobs: Vec<TimeValue>,
    pub grid: SpeedGrid,
    pub oracle: OracleChoice,
    pub limit_n: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    /// Seven-job prefix of the reference set on three CPUs with speeds in
    /// `{1, 51, 101}`.
    fn default() -> Self {
        ExperimentConfig {
            jobs: REFERENCE_JOBS[..7].iter().map(|&c| TimeValue::from_integer(c)).collect(),
            grid: SpeedGrid { levels: [1, 51, 101].map(TimeValue::from_integer).to_vec(), m: 3 },
            oracle: OracleChoice::Exhaustive,
            limit_n: DEFAULT_LIMIT,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    /// The full reference set over speeds `1, 11, …, 101` on `m` CPUs.
    pub fn reference(m: usize) -> Self {
        ExperimentConfig {
            jobs: REFERENCE_JOBS.iter().map(|&c| TimeValue::from_integer(c)).collect(),
            grid: SpeedGrid::range(TimeValue::from_integer(1), TimeValue::from_integer(101), TimeValue::from_integer(10), m),
            oracle: OracleChoice::Auto { samples: 50_000 },
            limit_n: 10,
            seed: 0,
        }
    }

    /// Number of schedules the oracle will build.
    pub fn schedule_count(&self) -> BigUint {
        let per_platform = match self.oracle_mode() {
            OracleMode::Exhaustive => factorial(self.jobs.len()),
            OracleMode::Sampled { samples, .. } => BigUint::from(samples.max(1)),
        };
        per_platform * BigUint::from(self.grid.len())
    }

    fn oracle_mode(&self) -> OracleMode {
        let n = self.jobs.len();
        match self.oracle {
            OracleChoice::Exhaustive => OracleMode::Exhaustive,
            OracleChoice::Sampled { samples } => OracleMode::Sampled { seed: self.seed, samples },
            OracleChoice::Auto { samples } if n > self.limit_n => OracleMode::Sampled { seed: self.seed, samples },
            OracleChoice::Auto { .. } => OracleMode::Exhaustive,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.jobs.is_empty() {
            return Err(ExperimentError::NoJobs);
        }
        if self.grid.is_empty() {
            return Err(ExperimentError::EmptyGrid);
        }
        if self.oracle_mode() == OracleMode::Exhaustive && self.jobs.len() > self.limit_n {
            return Err(ExperimentError::Infeasible {
                n: self.jobs.len(),
                limit: self.limit_n,
                platforms: self.grid.len(),
                schedules: self.schedule_count().to_string(),
            });
        }
        Ok(())
    }
}

/// One platform of the experiment. Errors are percentages relative to the
/// exact maximum makespan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentRow {
    pub speeds: Vec<TimeValue>,
    pub lambda: TimeValue,
    pub exact: TimeValue,
    pub ms1: TimeValue,
    pub ms2: TimeValue,
    pub ms3: TimeValue,
    pub e1: TimeValue,
    pub e2: TimeValue,
    pub e3: TimeValue,
    pub emin: TimeValue,
    pub oracle: OracleMode,
}

/// Distribution of one error column.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSummary {
    pub min: TimeValue,
    pub q1: TimeValue,
    pub median: TimeValue,
    pub mean: TimeValue,
    pub q3: TimeValue,
    pub max: TimeValue,
    /// Sample variance; undefined for a single row.
    pub variance: Option<TimeValue>,
    pub sd: Option<f64>,
    /// Mean error, the errors being signed deviations from the exact value.
    pub bias: TimeValue,
    /// Mean squared error.
    pub mse: TimeValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
    /// `(column name, summary)` for E1, E2, E3 and Emin.
    pub summary: Vec<(&'static str, ColumnSummary)>,
}

fn percent_error(bound: &TimeValue, exact: &TimeValue) -> TimeValue {
    (bound - exact) / exact * TimeValue::from_integer(100)
}

pub fn experiment_row(jobs: &JobSet, platform: &Platform, mode: OracleMode, limit_n: usize) -> Result<ExperimentRow, ExperimentError> {
    let oracle = match mode {
        OracleMode::Exhaustive => exact_max(jobs, platform, limit_n)?,
        OracleMode::Sampled { seed, samples } => sampled_max(jobs, platform, samples, seed),
    };
    let exact = oracle.exact_max_makespan().clone();
    let trace = unif_fjp_trace(&jobs.sorted_ascending(), platform)?;
    let (e1, e2, e3) = (
        percent_error(&trace.ms1, &exact),
        percent_error(&trace.ms2, &exact),
        percent_error(&trace.ms3, &exact),
    );
    let emin = [&e1, &e2, &e3].into_iter().min().expect("three errors").clone();
    Ok(ExperimentRow {
        speeds: platform.speeds().to_vec(),
        lambda: lambda_pi(platform),
        exact,
        ms1: trace.ms1,
        ms2: trace.ms2,
        ms3: trace.ms3,
        e1,
        e2,
        e3,
        emin,
        oracle: mode,
    })
}

/// Evaluates every platform of the grid in parallel; rows keep grid order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let jobs = JobSet::from_times(&cfg.jobs)?;
    let mode = cfg.oracle_mode();
    let rows = cfg
        .grid
        .platforms()?
        .par_iter()
        .map(|p| experiment_row(&jobs, p, mode, cfg.limit_n))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = summarize_rows(&rows);
    Ok(ExperimentReport { rows, summary })
}

pub fn summarize_rows(rows: &[ExperimentRow]) -> Vec<(&'static str, ColumnSummary)> {
    let columns: [(&'static str, fn(&ExperimentRow) -> &TimeValue); 4] =
        [("E1", |r| &r.e1), ("E2", |r| &r.e2), ("E3", |r| &r.e3), ("Emin", |r| &r.emin)];
    columns
        .into_iter()
        .filter_map(|(name, get)| {
            let values: Vec<TimeValue> = rows.iter().map(|r| get(r).clone()).collect();
            summarize(&values).map(|s| (name, s))
        })
        .collect()
}

/// Quantile by linear interpolation between order statistics at position
/// `(n - 1) * p`.
pub fn quantile(sorted: &[TimeValue], p: &TimeValue) -> TimeValue {
    let h = TimeValue::from(sorted.len() - 1) * p;
    let lo = usize::try_from(h.numer() / h.denom()).unwrap_or(0).min(sorted.len() - 1);
    let frac = &h - TimeValue::from(lo);
    match sorted.get(lo + 1) {
        Some(next) if !frac.is_zero() => &sorted[lo] + &frac * (next - &sorted[lo]),
        _ => sorted[lo].clone(),
    }
}

pub fn summarize(values: &[TimeValue]) -> Option<ColumnSummary> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort();
    let n = TimeValue::from(values.len());
    let mean = values.iter().sum::<TimeValue>() / &n;
    let squares = values.iter().map(|v| v * v).sum::<TimeValue>();
    let variance = (values.len() > 1).then(|| {
        values.iter().map(|v| (v - &mean) * (v - &mean)).sum::<TimeValue>() / (&n - TimeValue::one())
    });
    Some(ColumnSummary {
        min: sorted[0].clone(),
        q1: quantile(&sorted, &TimeValue::ratio(1, 4)),
        median: quantile(&sorted, &TimeValue::ratio(1, 2)),
        q3: quantile(&sorted, &TimeValue::ratio(3, 4)),
        max: sorted[sorted.len() - 1].clone(),
        sd: variance.as_ref().map(|v| v.to_f64().sqrt()),
        variance,
        bias: mean.clone(),
        mse: squares / &n,
        mean,
    })
}

fn render(t: &TimeValue, places: Option<usize>) -> String {
    match places {
        Some(p) => t.to_decimal(p),
        None => t.to_string(),
    }
}

fn oracle_label(mode: &OracleMode) -> String {
    match mode {
        OracleMode::Exhaustive => "exhaustive".into(),
        OracleMode::Sampled { seed, samples } => format!("sampled({samples};seed={seed})"),
    }
}

/// One line per platform; speeds are `;`-separated, slowest first.
pub fn rows_csv(rows: &[ExperimentRow], places: Option<usize>) -> String {
    let mut out = String::from("speeds,lambda,E1,E2,E3,Emin,exact,ms1,ms2,ms3,oracle\n");
    for r in rows {
        let speeds: Vec<String> = r.speeds.iter().map(ToString::to_string).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            speeds.join(";"),
            render(&r.lambda, places),
            render(&r.e1, places),
            render(&r.e2, places),
            render(&r.e3, places),
            render(&r.emin, places),
            render(&r.exact, places),
            render(&r.ms1, places),
            render(&r.ms2, places),
            render(&r.ms3, places),
            oracle_label(&r.oracle)
        );
    }
    out
}

/// One line per error column with the distribution statistics.
pub fn summary_csv(summary: &[(&'static str, ColumnSummary)], places: Option<usize>) -> String {
    let mut out = String::from("column,min,q1,median,mean,q3,max,variance,sd,bias,mse\n");
    let digits = places.unwrap_or(6);
    for (name, s) in summary {
        let _ = writeln!(
            out,
            "{name},{},{},{},{},{},{},{},{},{},{}",
            render(&s.min, places),
            render(&s.q1, places),
            render(&s.median, places),
            render(&s.mean, places),
            render(&s.q3, places),
            render(&s.max, places),
            s.variance.as_ref().map_or("NA".into(), |v| render(v, places)),
            s.sd.map_or("NA".into(), |v| format!("{v:.digits$}")),
            render(&s.bias, places),
            render(&s.mse, places)
        );
    }
    out
}
