use std::path::PathBuf;

use anyhow::Result;
use clap::ValueEnum;
use modeswitch::validity::{validity_ammso, validity_smmso, PairReport, ValidityReport, Verdict, DensityTest};

use crate::input::{load_system, Format};
use crate::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    SmMso,
    AmMso,
    Both,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Application file.
    #[arg(long)]
    app: PathBuf,
    #[arg(long, value_enum, default_value_t = Which::Both)]
    protocol: Which,
    /// Print CSV instead of an aligned table.
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    format: Format,
}

const HEADER: [&str; 8] = ["protocol", "pair", "bound", "value", "binding", "slack", "verdict", "enable bounds"];

fn cells(report: &ValidityReport, pair: &PairReport, fmt: &Format) -> [String; 8] {
    let opt = |v: &Option<modeswitch::TimeValue>| v.as_ref().map_or("-".to_string(), |t| fmt.cell(t));
    let mut verdict = pair.verdict.to_string();
    if let Some(task) = pair.failing_task {
        verdict = format!("{verdict} (task {})", task + 1);
    }
    [
        report.protocol.to_string(),
        format!("{}->{}", pair.from + 1, pair.to + 1),
        pair.bound_name.clone(),
        opt(&pair.bound),
        pair.binding_deadline.as_ref().map_or("-".into(), |(k, d)| format!("{} (task {})", fmt.cell(d), k + 1)),
        opt(&pair.slack),
        verdict,
        pair.enable_bounds.iter().map(|b| fmt.cell(b)).collect::<Vec<_>>().join(" "),
    ]
}

pub fn run(args: Args) -> Result<Status> {
    let (app, platform) = load_system(&args.app)?;
    let mut reports = Vec::new();
    if args.protocol != Which::AmMso {
        reports.push(validity_smmso(&app, &platform)?);
    }
    if args.protocol != Which::SmMso {
        reports.push(validity_ammso(&app, &platform, &DensityTest)?);
    }
    let rows: Vec<[String; 8]> =
        reports.iter().flat_map(|r| r.pairs.iter().map(move |p| cells(r, p, &args.format))).collect();
    if args.csv {
        println!("protocol,from,to,bound,value,binding_task,binding_deadline,slack,verdict,enable_bounds");
        for (report, pair) in reports.iter().flat_map(|r| r.pairs.iter().map(move |p| (r, p))) {
            let fmt = &args.format;
            let opt = |v: &Option<modeswitch::TimeValue>| v.as_ref().map_or(String::new(), |t| fmt.cell(t));
            println!(
                "{},{},{},{},{},{},{},{},{},{}",
                report.protocol,
                pair.from + 1,
                pair.to + 1,
                pair.bound_name,
                opt(&pair.bound),
                pair.binding_deadline.as_ref().map_or(String::new(), |(k, _)| (k + 1).to_string()),
                opt(&pair.binding_deadline.as_ref().map(|(_, d)| d.clone())),
                opt(&pair.slack),
                pair.verdict,
                pair.enable_bounds.iter().map(|b| fmt.cell(b)).collect::<Vec<_>>().join(";"),
            );
        }
    } else {
        let mut widths = HEADER.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |row: &[String]| {
            row.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
        };
        println!("{}", line(&HEADER.map(String::from)));
        for row in &rows {
            println!("{}", line(row));
        }
        for report in &reports {
            println!("{}: {}", report.protocol, report.verdict);
        }
    }
    let all_valid = reports.iter().all(|r| r.verdict == Verdict::Valid);
    Ok(if all_valid { Status::Ok } else { Status::Invalid })
}
