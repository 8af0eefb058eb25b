use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use modeswitch::experiment::{rows_csv, run_experiment, summary_csv, ExperimentConfig, OracleChoice, SpeedGrid};
use modeswitch::TimeValue;

use crate::input::{emit, Format};
use crate::Status;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// JSON experiment configuration; inline flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the full ten-job reference set over speeds 1, 11, …, 101.
    #[arg(long, conflicts_with = "config")]
    reference: bool,
    /// Processing times.
    #[arg(long, value_delimiter = ',')]
    jobs: Vec<TimeValue>,
    /// Speed levels each CPU may take.
    #[arg(long, value_delimiter = ',')]
    levels: Vec<TimeValue>,
    /// Speed levels as `min:max:step`.
    #[arg(long, conflicts_with = "levels")]
    range: Option<String>,
    /// CPUs per platform.
    #[arg(long)]
    m: Option<usize>,
    /// Use this many sampled assignments per platform instead of all of them.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest job count accepted for exhaustive search.
    #[arg(long)]
    limit: Option<usize>,
    /// Write per-platform rows here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the summary here instead of stdout.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    format: Format,
}

fn parse_range(spec: &str) -> Result<(TimeValue, TimeValue, TimeValue)> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [min, max, step] = parts.as_slice() else {
        anyhow::bail!("--range expects min:max:step, got `{spec}`");
    };
    Ok((min.parse()?, max.parse()?, step.parse()?))
}

fn config(args: &Args) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, args.reference) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        (None, true) => ExperimentConfig::reference(args.m.unwrap_or(3)),
        (None, false) => ExperimentConfig::default(),
    };
    if !args.jobs.is_empty() {
        cfg.jobs = args.jobs.clone();
    }
    if let Some(m) = args.m {
        cfg.grid.m = m;
    }
    if !args.levels.is_empty() {
        cfg.grid.levels = args.levels.clone();
    }
    if let Some(spec) = &args.range {
        let (min, max, step) = parse_range(spec)?;
        cfg.grid = SpeedGrid::range(min, max, step, cfg.grid.m);
    }
    if let Some(samples) = args.samples {
        cfg.oracle = OracleChoice::Sampled { samples };
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(limit) = args.limit {
        cfg.limit_n = limit;
    }
    Ok(cfg)
}

pub fn run(args: Args) -> Result<Status> {
    let cfg = config(&args)?;
    cfg.validate()?;
    eprintln!(
        "{} platforms, {} schedules in total",
        cfg.grid.len(),
        cfg.schedule_count()
    );
    let report = run_experiment(&cfg)?;
    let places = args.format.csv_places();
    let rows = rows_csv(&report.rows, places);
    let summary = summary_csv(&report.summary, places);
    let stdout = PathBuf::from("-");
    emit(args.out.as_ref().unwrap_or(&stdout), &rows)?;
    if args.out.is_none() && args.summary.is_none() {
        emit(&stdout, "\n")?;
    }
    emit(args.summary.as_ref().unwrap_or(&stdout), &summary)?;
    let unsound = report.rows.iter().any(|r| [&r.e1, &r.e2, &r.e3].iter().any(|e| e.is_negative()));
    Ok(if unsound { Status::Invalid } else { Status::Ok })
}
