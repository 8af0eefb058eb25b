//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use common::*;
use modeswitch::bounds::*;
use modeswitch::experiment::{run_experiment, ExperimentConfig};
use modeswitch::oracle::{exact_max, OracleResult};
use modeswitch::protocols::*;
use modeswitch::simkernel::{schedule, schedule_identical, ScheduleResult};
use modeswitch::validity::{mode_bounds, validity_ammso, validity_smmso, DensityTest};
use modeswitch::{Application, JobSet, Mode, Platform, PriorityAssignment, Scheduler, TimeValue};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn expect_eq<T: PartialEq + std::fmt::Debug>(got: T, want: T, what: &str) -> Result<(), String> {
    ensure(got == want, || format!("{what}: got {got:?}, want {want:?}"))
}

fn prio(order_1_based: &[usize]) -> PriorityAssignment {
    PriorityAssignment::new(order_1_based.iter().map(|j| j - 1).collect())
}

fn jobs(v: &[i64]) -> JobSet {
    JobSet::from_integers(v).unwrap()
}

fn platform(v: &[i64]) -> Platform {
    Platform::from_integers(v).unwrap()
}

fn makespan(j: &JobSet, p: &Platform, order: &[usize]) -> TimeValue {
    schedule(j, p, &prio(order)).unwrap().makespan
}

fn uniform_simulator() -> Outcome {
    let two = jobs(&[4, 6]);
    let p12 = platform(&[1, 2]);
    expect_eq(makespan(&two, &p12, &[1, 2]), tv(4), "{4,6} J1>J2")?;
    expect_eq(makespan(&two, &p12, &[2, 1]), TimeValue::ratio(7, 2), "{4,6} J2>J1")?;
    let four = jobs(&[4, 4, 16, 22]);
    expect_eq(makespan(&four, &p12, &[1, 2, 3, 4]), TimeValue::ratio(71, 4), "SJF")?;
    expect_eq(makespan(&four, &p12, &[3, 1, 2, 4]), tv(19), "J3>J1>J2>J4")?;
    expect_eq(makespan(&jobs(&[50, 80, 99]), &platform(&[1, 2, 10]), &[1, 2, 3]), tv(20), "{50,80,99}")?;
    Ok("4, 7/2, 71/4, 19, 20".into())
}

const TABLE_THREE: [i64; 12] = [1, 1, 1, 1, 1, 1, 3, 3, 6, 6, 9, 12];

fn identical_fjp() -> Outcome {
    let j = jobs(&TABLE_THREE);
    expect_eq(ident_fjp_idle_bounds(&j, 3).unwrap().values, ints(&[15, 18, 23]), "tight vector")?;
    expect_eq(
        ident_fjp_idle_bounds_legacy(&j, 3).unwrap().values,
        vec![tv(15), TimeValue::ratio(37, 2), tv(23)],
        "original vector",
    )?;
    let witnesses: [(usize, [usize; 12], i64); 3] = [
        (0, [7, 9, 10, 12, 11, 8, 1, 2, 3, 4, 5, 6], 15),
        (1, [10, 9, 1, 2, 3, 4, 5, 6, 12, 7, 8, 11], 18),
        (2, [7, 11, 10, 1, 2, 9, 8, 3, 5, 4, 6, 12], 23),
    ];
    for (k, order, want) in witnesses {
        let r = schedule_identical(&j, 3, &prio(&order)).unwrap();
        expect_eq(r.idle_instants[k].clone(), tv(want), &format!("idle_{} under listed assignment", k + 1))?;
    }
    Ok("(15,18,23), (15,37/2,23), all three attained".into())
}

fn identical_ftp() -> Outcome {
    let j = jobs(&[7, 2, 5, 16, 6, 5, 5]);
    let w = ident_ftp_processed_work(&j, 4);
    expect_eq(w.get(3, 5).clone(), tv(8), "W_3^5")?;
    expect_eq(w.column(3).to_vec(), ints(&[0, 5, 2, 7]), "column 3")?;
    let sim = schedule_identical(&j, 4, &PriorityAssignment::identity(7)).unwrap();
    expect_eq(ident_ftp_idle_bounds(&j, 4).values, sim.idle_instants.clone(), "final idle vs simulator")?;
    Ok(format!("W_3^5 = 8, idle = {:?}", sim.idle_instants.iter().map(ToString::to_string).collect::<Vec<_>>()))
}

fn uniform_fjp() -> Outcome {
    let j = jobs(&[50, 80, 99]);
    let p = platform(&[1, 2, 10]);
    let naive = unsound::unif_fjp_ms0_naive(&j, &p).unwrap();
    expect_eq(naive.clone(), TimeValue::ratio(199, 10), "ms0")?;
    ensure(naive < tv(20), || "ms0 should undershoot the exact 20".into())?;
    expect_eq(unif_fjp_ms1(&j, &p).unwrap(), TimeValue::ratio(2667, 130), "ms1")?;
    let best = unif_fjp_ms_min(&j, &p).unwrap();
    ensure(best >= tv(20), || format!("ms_min {best} < 20"))?;
    Ok(format!("ms0 = 19.9 < 20, ms1 = 2667/130, ms_min = {best}"))
}

fn uniform_ftp() -> Outcome {
    let j = jobs(&[4, 6]);
    let p = platform(&[1, 2]);
    let table = unif_ftp_idle_table(&j, &p);
    expect_eq(table.row(2).to_vec(), ints(&[2, 4]), "final row")?;
    let sim = schedule(&j, &p, &PriorityAssignment::identity(2)).unwrap();
    expect_eq(table.final_idle().values, sim.idle_instants, "table vs simulator")?;
    Ok("(2,4), equals simulator".into())
}

fn heterogeneity() -> Outcome {
    expect_eq(lambda_pi(&platform(&[1, 500, 1000])), TimeValue::ratio(501, 1000), "[1,500,1000]")?;
    expect_eq(lambda_pi(&platform(&[500, 500, 600])), TimeValue::ratio(5, 3), "[500,500,600]")?;
    expect_eq(lambda_pi(&Platform::identical(4)), tv(3), "identical-4")?;
    Ok("501/1000, 5/3, 3".into())
}

fn example_app() -> Application {
    let p = |c: &[i64], t: i64| c.iter().map(|&c| (tv(c), tv(t), tv(t))).collect::<Vec<_>>();
    let old = Mode::from_params(&p(&[40, 20, 40, 60], 120), Scheduler::FixedTask(vec![0, 1, 2, 3]));
    let new = Mode::from_params(&p(&[100, 40, 40], 250), Scheduler::FixedTask(vec![0, 1, 2]));
    Application::new(vec![old, new])
        .with_transition_deadlines(0, 1, vec![tv(100); 3])
        .with_transition_deadlines(1, 0, vec![tv(200); 4])
}

fn protocol_example() -> Outcome {
    let opts = RunOptions::new(Protocol::SmMso);
    let trace = run_multimode(&example_app(), &Platform::identical(2), &[Mcr { time: tv(130), target: 1 }], tv(500), &opts)
        .map_err(|e| e.to_string())?;
    let rem: Vec<TimeValue> = trace.jobs.iter().filter(|j| j.rem_of.is_some()).map(|j| &j.work - &trace_done(&trace, j)).collect();
    expect_eq(rem, ints(&[30, 10, 40, 60]), "remaining work at the MCR")?;
    let sm = &trace.transitions[0];
    expect_eq(sm.transition_end.clone(), tv(220), "SM-MSO end")?;
    expect_eq(sm.length(), tv(90), "SM-MSO length")?;

    let rem_jobs = [(0, 30), (1, 10), (2, 40), (3, 60)]
        .iter()
        .map(|&(task, c)| RemJob { task, remaining: tv(c), deadline: tv(240) })
        .collect();
    let sc = TransitionScenario {
        app: example_app(),
        platform: Platform::identical(2),
        source: 0,
        target: 1,
        mcr_time: tv(130),
        rem_jobs,
    };
    let am = run_ammso(&sc, &DensityTest).map_err(|e| e.to_string())?;
    let first_new = am.trace.iter().filter(|s| !s.rem).map(|s| s.start.clone()).min();
    expect_eq(am.first_enablement(), Some(tv(180)), "AM-MSO first enablement")?;
    expect_eq(first_new, Some(tv(180)), "first new-mode execution in trace")?;
    expect_eq(am.transition_end.clone(), tv(220), "AM-MSO final enablement")?;
    Ok("SM-MSO ends at 220 (length 90); AM-MSO enables at 180 and 220".into())
}

/// Work a job had completed at the first MCR.
fn trace_done(trace: &MultimodeTrace, job: &JobRecord) -> TimeValue {
    let id = trace.jobs.iter().position(|j| j == job).unwrap();
    let mcr = &trace.transitions[0].started_at;
    trace
        .segments
        .iter()
        .filter(|s| s.job == id && s.start < *mcr)
        .map(|s| TimeValue::min_of(&s.end, mcr) - &s.start)
        .sum()
}

struct CorpusEntry {
    jobs: JobSet,
    platform: Platform,
    oracle: OracleResult,
}

fn corpus() -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    (0..300)
        .map(|_| {
            let platform = random_platform(&mut rng, 4);
            let jobs = random_jobs(&mut rng, 7);
            let oracle = exact_max(&jobs, &platform, 8).unwrap();
            CorpusEntry { jobs, platform, oracle }
        })
        .collect()
}

fn identical_speed(p: &Platform) -> Option<TimeValue> {
    p.is_identical().then(|| p.slowest().clone())
}

fn dominance(corpus: &[CorpusEntry]) -> Outcome {
    let mut checks = 0usize;
    for (i, e) in corpus.iter().enumerate() {
        let sorted = e.jobs.sorted_ascending();
        let m = e.platform.m();
        let max_idle: Vec<&TimeValue> = e.oracle.max_idle.iter().map(|x| &x.value).collect();
        let min_idle: Vec<&TimeValue> = e.oracle.min_idle.iter().map(|x| &x.value).collect();
        let upper = unif_fjp_idle_upper(&sorted, &e.platform).unwrap();
        let lower = unif_fjp_idle_lower(&sorted, &e.platform).unwrap();
        let trace = unif_fjp_trace(&sorted, &e.platform).unwrap();
        for k in 0..m {
            ensure(upper.values[k] >= *max_idle[k], || format!("instance {i}: uniform maxidle_{}", k + 1))?;
            ensure(lower[k] <= *min_idle[k], || format!("instance {i}: uniform minidle_{}", k + 1))?;
            checks += 2;
        }
        for (name, b) in [("ms2", &trace.ms2), ("ms3", &trace.ms3)] {
            ensure(b >= e.oracle.exact_max_makespan(), || format!("instance {i}: {name}"))?;
            checks += 1;
        }
        if let Some(s) = identical_speed(&e.platform) {
            let factor = s.recip();
            let tight = ident_fjp_idle_bounds(&sorted, m).unwrap().scaled(&factor);
            let legacy = ident_fjp_idle_bounds_legacy(&sorted, m).unwrap().scaled(&factor);
            for k in 0..m {
                ensure(tight.values[k] >= *max_idle[k], || format!("instance {i}: identical maxidle_{}", k + 1))?;
                ensure(legacy.values[k] >= *max_idle[k], || format!("instance {i}: legacy maxidle_{}", k + 1))?;
                checks += 2;
            }
        }
        let witnesses = e.oracle.max_idle.iter().map(|x| x.assignment.clone()).chain([PriorityAssignment::identity(e.jobs.len())]);
        for assignment in witnesses {
            let sim = schedule(&e.jobs, &e.platform, &assignment).unwrap();
            let ordered = e.jobs.in_priority_order(&assignment).unwrap();
            let table = unif_ftp_idle_table(&ordered, &e.platform).final_idle();
            ensure(table.values == sim.idle_instants, || format!("instance {i}: uniform FTP table differs from schedule"))?;
            if let Some(s) = identical_speed(&e.platform) {
                let ident = ident_ftp_idle_bounds(&ordered, m).scaled(&s.recip());
                ensure(ident.values == sim.idle_instants, || format!("instance {i}: identical FTP bound differs"))?;
            }
            for k in 0..m {
                ensure(sim.idle_instants[k] <= *max_idle[k], || format!("instance {i}: FTP idle above oracle max"))?;
            }
            checks += 1;
        }
    }
    Ok(format!("{} instances, {checks} comparisons, 0 violations", corpus.len()))
}

fn competitiveness(corpus: &[CorpusEntry]) -> Outcome {
    let mut worst_ident = TimeValue::zero();
    let mut identical = 0;
    for (i, e) in corpus.iter().enumerate() {
        let sorted = e.jobs.sorted_ascending();
        let exact = e.oracle.exact_max_makespan();
        if let Some(s) = identical_speed(&e.platform) {
            let bound = ident_fjp_makespan(&sorted, e.platform.m()).unwrap() / &s;
            ensure(bound <= exact * &tv(2), || format!("instance {i}: identical bound {bound} > 2 x {exact}"))?;
            if exact.is_positive() {
                worst_ident = worst_ident.max(bound / exact);
            }
            identical += 1;
        }
        let alpha = e.platform.total_speed() / e.platform.fastest();
        let ms1 = unif_fjp_ms1(&sorted, &e.platform).unwrap();
        ensure(ms1 <= exact * &alpha, || format!("instance {i}: ms1 {ms1} above {alpha} x {exact}"))?;
    }
    Ok(format!("{identical} identical instances, worst ratio {}", worst_ident.to_decimal(4)))
}

fn no_later(shrunk: &ScheduleResult, full: &ScheduleResult) -> bool {
    shrunk.start.iter().all(|(j, t)| t <= &full.start[j])
        && shrunk.completion.iter().all(|(j, t)| t <= &full.completion[j])
        && shrunk.idle_instants.iter().zip(&full.idle_instants).all(|(a, b)| a <= b)
}

fn predictability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for run in 0..300 {
        let platform = random_platform(&mut rng, 4);
        let full = random_jobs(&mut rng, 8);
        let shrunk = JobSet::from_times(
            &full.times().iter().map(|c| c * &TimeValue::ratio(rng.gen_range(0..=4), 4)).collect::<Vec<_>>(),
        )
        .unwrap();
        let order = PriorityAssignment::new(random_order(&mut rng, full.len()));
        let a = schedule(&full, &platform, &order).unwrap();
        let b = schedule(&shrunk, &platform, &order).unwrap();
        ensure(no_later(&b, &a), || format!("run {run}: shrinking delayed a job"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for run in 0..300 {
        let platform = random_platform_for_apps(&mut rng);
        let app = random_two_mode_app(&mut rng, &platform);
        let critical = TransitionScenario::critical(app.clone(), platform.clone(), 0, 1, TimeValue::zero());
        let mut partial = critical.clone();
        partial.rem_jobs.retain(|_| rng.gen_bool(0.7));
        for rj in &mut partial.rem_jobs {
            rj.remaining = &rj.remaining * &TimeValue::ratio(rng.gen_range(0..=4), 4);
        }
        let crit = run_smmso(&critical).unwrap().transition_end;
        let part = run_smmso(&partial).unwrap().transition_end;
        let bound = mode_bounds(&app.modes[0], &platform).unwrap().makespan;
        ensure(part <= bound, || format!("scenario {run}: transition {part} exceeds bound {bound}"))?;
        if app.modes[0].scheduler.is_fixed_task() {
            ensure(part <= crit, || format!("scenario {run}: {part} later than critical {crit}"))?;
        }
    }
    Ok("300 shrunken schedules and 300 rem-job scenarios, 0 violations".into())
}

fn staircase() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut runs = 0;
    while runs < 500 {
        let platform = random_platform(&mut rng, 4);
        if platform.is_identical() {
            continue;
        }
        runs += 1;
        let j = random_jobs(&mut rng, 9);
        let r = schedule(&j, &platform, &PriorityAssignment::new(random_order(&mut rng, j.len()))).unwrap();
        ensure(r.cpu_idle_from.windows(2).all(|w| w[0] <= w[1]), || {
            format!("run {runs}: CPUs idled at {:?}", r.cpu_idle_from.iter().map(ToString::to_string).collect::<Vec<_>>())
        })?;
    }
    Ok("500 non-identical platforms, slowest CPU always idles first".into())
}

fn soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut summary = Vec::new();
    for protocol in [Protocol::SmMso, Protocol::AmMso] {
        let (mut apps, mut attempts, mut runs) = (0, 0, 0);
        while apps < 100 {
            attempts += 1;
            ensure(attempts < 5000, || format!("{protocol}: too few valid apps generated"))?;
            let platform = random_platform_for_apps(&mut rng);
            let app = random_two_mode_app(&mut rng, &platform);
            let valid = match protocol {
                Protocol::SmMso => validity_smmso(&app, &platform),
                Protocol::AmMso => validity_ammso(&app, &platform, &DensityTest),
            }
            .map_err(|e| e.to_string())?
            .is_valid();
            if !valid {
                continue;
            }
            apps += 1;
            let max_period = app.modes.iter().map(Mode::max_period).max().unwrap();
            for scenario in 0..50 {
                let initial = rng.gen_range(0..2);
                let mcr = &max_period * &TimeValue::ratio(rng.gen_range(0..=60), 20);
                let exec = if scenario % 2 == 0 { ExecTime::Wcet } else { hashed_exec(&app, rng.gen()) };
                let opts = RunOptions::new(protocol).with_initial_mode(initial).with_exec(exec);
                let horizon = &mcr + &max_period * &tv(6);
                let trace = run_multimode(&app, &platform, &[Mcr { time: mcr, target: 1 - initial }], horizon, &opts)
                    .map_err(|e| e.to_string())?;
                ensure(trace.total_misses() == 0, || {
                    format!("{protocol}: app {apps} scenario {scenario} missed {} deadlines", trace.total_misses())
                })?;
                runs += 1;
            }
        }
        summary.push(format!("{protocol}: {apps} valid apps of {attempts}, {runs} runs"));
    }
    Ok(format!("{}, 0 misses", summary.join("; ")))
}

fn replication() -> Outcome {
    let report = run_experiment(&ExperimentConfig::default()).map_err(|e| e.to_string())?;
    expect_eq(report.rows.len(), 27, "platform count")?;
    for (i, r) in report.rows.iter().enumerate() {
        let errors = [&r.e1, &r.e2, &r.e3];
        ensure(errors.iter().all(|e| !e.is_negative()), || format!("row {i}: negative error"))?;
        ensure(r.emin == **errors.iter().min().unwrap(), || format!("row {i}: Emin is not the row minimum"))?;
    }
    let emin = &report.summary.iter().find(|(name, _)| *name == "Emin").ok_or("no Emin summary")?.1;
    ensure(!emin.mean.is_negative() && emin.mean <= tv(60), || format!("mean Emin {} outside [0, 60]", emin.mean))?;
    Ok(format!(
        "27 platforms, Emin min {} / mean {} / max {} %",
        emin.min.to_decimal(2),
        emin.mean.to_decimal(2),
        emin.max.to_decimal(2)
    ))
}

fn main() -> ExitCode {
    let corpus_start = Instant::now();
    let corpus = corpus();
    let corpus_time = corpus_start.elapsed();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 uniform simulator", Box::new(uniform_simulator)),
        ("2 identical FJP bounds", Box::new(identical_fjp)),
        ("3 identical FTP processed work", Box::new(identical_ftp)),
        ("4 uniform FJP bounds", Box::new(uniform_fjp)),
        ("5 uniform FTP table", Box::new(uniform_ftp)),
        ("6 heterogeneity", Box::new(heterogeneity)),
        ("7 protocol example", Box::new(protocol_example)),
        ("8 dominance", Box::new(|| dominance(&corpus))),
        ("9 competitiveness", Box::new(|| competitiveness(&corpus))),
        ("10 predictability and critical set", Box::new(predictability)),
        ("11 staircase", Box::new(staircase)),
        ("12 validity soundness", Box::new(soundness)),
        ("scaled replication", Box::new(replication)),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let mut elapsed = start.elapsed();
        if name.starts_with('8') {
            elapsed += corpus_time;
        }
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} ({:.2?})", elapsed),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} ({:.2?})", elapsed)
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
