//! Arguments and rendering shared by the subcommands.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use modeswitch::bounds::critical_rem_job_set_ordered;
use modeswitch::model::SystemDoc;
use modeswitch::{Application, JobSet, Platform, PriorityAssignment, TimeValue};

/// A job set and platform, given inline or taken from an application file.
#[derive(Debug, clap::Args)]
pub struct Workload {
    /// Processing times, e.g. `4,6` or `1/2,2.5`.
    #[arg(long, value_delimiter = ',', required_unless_present = "app")]
    pub jobs: Vec<TimeValue>,
    /// CPU speeds, any order.
    #[arg(long, value_delimiter = ',', conflicts_with = "m")]
    pub speeds: Vec<TimeValue>,
    /// Number of identical unit-speed CPUs.
    #[arg(long)]
    pub m: Option<usize>,
    /// Application file; the workload becomes the critical rem-job set of
    /// `--mode` on the file's platform.
    #[arg(long, conflicts_with = "jobs")]
    pub app: Option<PathBuf>,
    /// Mode of `--app`, counted from 1.
    #[arg(long, default_value_t = 1, requires = "app")]
    pub mode: usize,
}

impl Workload {
    pub fn load(&self) -> Result<(JobSet, Platform)> {
        if let Some(path) = &self.app {
            let (app, file_platform) = load_system(path)?;
            let mode = app
                .modes
                .get(self.mode.wrapping_sub(1))
                .with_context(|| format!("{} has no mode {}", path.display(), self.mode))?;
            let jobs = critical_rem_job_set_ordered(mode)?;
            let platform = self.platform()?.unwrap_or(file_platform);
            return Ok((jobs, platform));
        }
        let jobs = JobSet::from_times(&self.jobs)?;
        let platform = self.platform()?.context("give --speeds or --m")?;
        Ok((jobs, platform))
    }

    fn platform(&self) -> Result<Option<Platform>> {
        if let Some(m) = self.m {
            if m == 0 {
                bail!("--m must be at least 1");
            }
            return Ok(Some(Platform::identical(m)));
        }
        if self.speeds.is_empty() {
            return Ok(None);
        }
        Ok(Some(Platform::from_unsorted(self.speeds.clone())?))
    }
}

/// Number formatting for printed values.
#[derive(Debug, Clone, Copy, clap::Args)]
pub struct Format {
    /// Decimal places for non-integer values.
    #[arg(long, default_value_t = 6)]
    pub places: usize,
    /// Print non-integers as exact fractions only.
    #[arg(long)]
    pub exact: bool,
}

impl Format {
    /// For tables: a fraction when `--exact`, otherwise a decimal.
    pub fn cell(&self, t: &TimeValue) -> String {
        if self.exact || t.is_integer() {
            t.to_string()
        } else {
            t.to_decimal(self.places)
        }
    }

    /// For prose: the exact value, followed by its decimal expansion when it
    /// is not an integer.
    pub fn value(&self, t: &TimeValue) -> String {
        if t.is_integer() || self.exact {
            t.to_string()
        } else {
            format!("{t} ({})", t.to_decimal(self.places))
        }
    }

    pub fn list(&self, values: &[TimeValue]) -> String {
        values.iter().map(|v| self.value(v)).collect::<Vec<_>>().join(", ")
    }

    pub fn csv_places(&self) -> Option<usize> {
        (!self.exact).then_some(self.places)
    }
}

/// `--order 3,1,2` (1-based, highest priority first) or the listed order.
pub fn priority(order: &[usize], jobs: &JobSet) -> Result<PriorityAssignment> {
    let n = jobs.len();
    if order.is_empty() {
        return Ok(PriorityAssignment::identity(n));
    }
    if order.iter().any(|&j| j == 0 || j > n) {
        bail!("--order entries must lie in 1..={n}");
    }
    let assignment = PriorityAssignment::new(order.iter().map(|j| j - 1).collect());
    assignment.check_against(jobs)?;
    Ok(assignment)
}

/// `J3 > J1 > J2`.
pub fn describe_order(order: &[usize]) -> String {
    order.iter().map(|j| format!("J{}", j + 1)).collect::<Vec<_>>().join(" > ")
}

pub fn load_system(path: &Path) -> Result<(Application, Platform)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc = SystemDoc::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(doc.into_system()?)
}

/// Writes to `path`, or to stdout when the path is `-`.
pub fn emit(path: &Path, content: &str) -> Result<()> {
    if path == Path::new("-") {
        let mut out = io::stdout().lock();
        out.write_all(content.as_bytes())?;
        return Ok(out.flush()?);
    }
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}
