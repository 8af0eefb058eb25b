#![allow(dead_code)]

use std::sync::Arc;

use modeswitch::protocols::ExecTime;
use modeswitch::validity::{mode_bounds, DensityTest, SchedTest};
use modeswitch::{Application, JobSet, Mode, Platform, Scheduler, Task, TimeValue};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn tv(n: i64) -> TimeValue {
    TimeValue::from_integer(n)
}

pub fn ints(v: &[i64]) -> Vec<TimeValue> {
    v.iter().map(|&x| tv(x)).collect()
}

/// Rational speed in `[1, 10]` with denominator at most 4.
pub fn random_speed(rng: &mut ChaCha8Rng) -> TimeValue {
    let den = rng.gen_range(1..=4);
    TimeValue::ratio(rng.gen_range(den..=10 * den), den)
}

/// Identical unit CPUs one time in three, rational speeds otherwise.
pub fn random_platform(rng: &mut ChaCha8Rng, max_m: usize) -> Platform {
    let m = rng.gen_range(1..=max_m);
    if rng.gen_ratio(1, 3) {
        return Platform::identical(m);
    }
    Platform::from_unsorted((0..m).map(|_| random_speed(rng)).collect()).unwrap()
}

pub fn random_jobs(rng: &mut ChaCha8Rng, max_n: usize) -> JobSet {
    let n = rng.gen_range(1..=max_n);
    let times: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=30)).collect();
    JobSet::from_integers(&times).unwrap()
}

pub fn random_order(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

/// Random mode that passes the density test on the whole platform. FTP
/// modes use deadline-monotonic priorities.
pub fn random_mode(rng: &mut ChaCha8Rng, platform: &Platform) -> Mode {
    let m = platform.m();
    loop {
        let n = rng.gen_range(m..=m + 2);
        let tasks: Vec<Task> = (0..n)
            .map(|id| {
                let period = tv(rng.gen_range(2..=10) * 10);
                let wcet = tv(rng.gen_range(1..=15));
                let deadline = if rng.gen_bool(0.5) {
                    period.clone()
                } else {
                    tv(rng.gen_range(15..=10 * 10)).max(wcet.clone()).min(period.clone())
                };
                Task::new(id, wcet, deadline, period)
            })
            .collect();
        let scheduler = if rng.gen_bool(0.5) {
            Scheduler::Edf
        } else {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| tasks[a].deadline.cmp(&tasks[b].deadline).then(a.cmp(&b)));
            Scheduler::FixedTask(order)
        };
        if DensityTest.schedulable(platform.speeds(), &scheduler, &tasks) {
            return Mode::new(tasks, scheduler);
        }
    }
}

/// Two-mode application whose transition deadlines are a random multiple
/// of the source mode's makespan bound.
pub fn random_two_mode_app(rng: &mut ChaCha8Rng, platform: &Platform) -> Application {
    let modes = vec![random_mode(rng, platform), random_mode(rng, platform)];
    let mut app = Application::new(modes);
    for (from, to) in [(0, 1), (1, 0)] {
        let base = mode_bounds(&app.modes[from], platform).expect("supported").makespan;
        let deadlines = (0..app.modes[to].len())
            .map(|_| &base * &TimeValue::ratio(rng.gen_range(3..=10), 5) + tv(rng.gen_range(0..=5)))
            .collect();
        app.set_transition_deadlines(from, to, deadlines);
    }
    app
}

pub fn random_platform_for_apps(rng: &mut ChaCha8Rng) -> Platform {
    let m = rng.gen_range(1..=3);
    if rng.gen_bool(0.5) {
        Platform::identical(m)
    } else {
        Platform::from_unsorted((0..m).map(|_| tv(rng.gen_range(1..=3))).collect()).unwrap()
    }
}

/// Execution times drawn per job from a seeded hash, at least a quarter of
/// the WCET.
pub fn hashed_exec(app: &Application, seed: u64) -> ExecTime {
    let wcets: Vec<Vec<TimeValue>> = app.modes.iter().map(|m| m.tasks.iter().map(|t| t.wcet.clone()).collect()).collect();
    ExecTime::Custom(Arc::new(move |mode, task, index| {
        let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
        for v in [mode as u64, task as u64, index] {
            h = (h ^ v).wrapping_mul(0x1000_0000_01b3).rotate_left(17);
        }
        let quarter = (h % 4 + 1) as i64;
        &wcets[mode][task] * &TimeValue::ratio(quarter, 4)
    }))
}
