//! Ground truth by brute force over priority assignments.
//!
//! Every assignment is simulated and the largest makespan and idle instants
//! are kept. Exhaustive search walks permutations in lexicographic order in
//! contiguous chunks; sampling draws seeded shuffles.

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::OracleError;
use crate::model::{JobSet, Platform, PriorityAssignment};
use crate::simkernel::idle_profile;
use crate::time::TimeValue;

pub const DEFAULT_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    Exhaustive,
    Sampled { seed: u64, samples: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extremum {
    pub value: TimeValue,
    pub assignment: PriorityAssignment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub max_makespan: Extremum,
    pub min_makespan: Extremum,
    /// Largest `idle_k` for `k = 1..=m`, each with its own witness.
    pub max_idle: Vec<Extremum>,
    /// Smallest `idle_k` for `k = 1..=m`.
    pub min_idle: Vec<Extremum>,
    pub assignments_evaluated: u64,
    pub mode: OracleMode,
}

impl OracleResult {
    pub fn exact_max_makespan(&self) -> &TimeValue {
        &self.max_makespan.value
    }

    /// Sampled maxima only bound the true maxima from below.
    pub fn is_lower_bound(&self) -> bool {
        matches!(self.mode, OracleMode::Sampled { .. })
    }
}

/// Running extrema over positions-in-job-set permutations.
#[derive(Clone)]
struct Acc {
    max: Vec<(TimeValue, Vec<usize>)>,
    min: Vec<(TimeValue, Vec<usize>)>,
    count: u64,
}

impl Acc {
    fn first(idle: Vec<TimeValue>, perm: &[usize]) -> Acc {
        let entries: Vec<_> = idle.into_iter().map(|v| (v, perm.to_vec())).collect();
        Acc { max: entries.clone(), min: entries, count: 1 }
    }

    fn push(&mut self, idle: &[TimeValue], perm: &[usize]) {
        for (k, v) in idle.iter().enumerate() {
            if *v > self.max[k].0 {
                self.max[k] = (v.clone(), perm.to_vec());
            }
            if *v < self.min[k].0 {
                self.min[k] = (v.clone(), perm.to_vec());
            }
        }
        self.count += 1;
    }

    /// `self` precedes `other` in enumeration order; ties keep `self`.
    fn merge(mut self, other: Acc) -> Acc {
        for (mine, theirs) in self.max.iter_mut().zip(other.max) {
            if theirs.0 > mine.0 {
                *mine = theirs;
            }
        }
        for (mine, theirs) in self.min.iter_mut().zip(other.min) {
            if theirs.0 < mine.0 {
                *mine = theirs;
            }
        }
        self.count += other.count;
        self
    }

    fn finish(self, jobs: &JobSet, mode: OracleMode) -> OracleResult {
        let to_assignment = |perm: &[usize]| {
            PriorityAssignment::new(perm.iter().map(|&p| jobs.jobs()[p].id).collect())
        };
        let wrap = |v: &(TimeValue, Vec<usize>)| Extremum { value: v.0.clone(), assignment: to_assignment(&v.1) };
        let max_idle: Vec<Extremum> = self.max.iter().map(wrap).collect();
        let min_idle: Vec<Extremum> = self.min.iter().map(wrap).collect();
        OracleResult {
            max_makespan: max_idle.last().expect("m ≥ 1").clone(),
            min_makespan: min_idle.last().expect("m ≥ 1").clone(),
            max_idle,
            min_idle,
            assignments_evaluated: self.count,
            mode,
        }
    }
}

fn order_of(jobs: &JobSet, perm: &[usize]) -> Vec<usize> {
    perm.iter().map(|&p| jobs.jobs()[p].id).collect()
}

fn evaluate(jobs: &JobSet, platform: &Platform, perm: &[usize]) -> Vec<TimeValue> {
    idle_profile(jobs, platform, &order_of(jobs, perm))
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).map(BigUint::from).product()
}

/// The permutation of `0..n` with lexicographic rank `rank`.
pub fn unrank(n: usize, mut rank: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let f: u64 = (1..=i as u64).product();
        let idx = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(idx));
    }
    out
}

/// Advances to the next permutation in lexicographic order.
pub fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| perm[i] < perm[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).expect("a successor exists");
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

fn check_limit(n: usize, limit_n: usize) -> Result<u64, OracleError> {
    if n > limit_n || n > 20 {
        return Err(OracleError::TooManyJobs { n, limit: limit_n, cost: factorial(n).to_string() });
    }
    Ok((1..=n as u64).product())
}

/// Maxima and minima over all `n!` priority assignments.
pub fn exact_max(jobs: &JobSet, platform: &Platform, limit_n: usize) -> Result<OracleResult, OracleError> {
    let n = jobs.len();
    let total = check_limit(n, limit_n)?;
    let chunks = (rayon::current_num_threads() as u64 * 16).clamp(1, total);
    let per_chunk = total.div_ceil(chunks);
    let acc = (0..chunks)
        .into_par_iter()
        .filter_map(|c| {
            let lo = c * per_chunk;
            let hi = ((c + 1) * per_chunk).min(total);
            if lo >= hi {
                return None;
            }
            let mut perm = unrank(n, lo);
            let mut acc = Acc::first(evaluate(jobs, platform, &perm), &perm);
            for _ in lo + 1..hi {
                next_permutation(&mut perm);
                acc.push(&evaluate(jobs, platform, &perm), &perm);
            }
            Some(acc)
        })
        .reduce_with(Acc::merge)
        .expect("at least one assignment");
    Ok(acc.finish(jobs, OracleMode::Exhaustive))
}

/// Calls `f(rank, assignment, idle instants)` for every assignment in
/// lexicographic order, sequentially.
pub fn for_each_assignment(
    jobs: &JobSet,
    platform: &Platform,
    limit_n: usize,
    mut f: impl FnMut(u64, &PriorityAssignment, &[TimeValue]),
) -> Result<u64, OracleError> {
    let total = check_limit(jobs.len(), limit_n)?;
    let mut perm: Vec<usize> = (0..jobs.len()).collect();
    for rank in 0..total {
        if rank > 0 {
            next_permutation(&mut perm);
        }
        let assignment = PriorityAssignment::new(order_of(jobs, &perm));
        f(rank, &assignment, &evaluate(jobs, platform, &perm));
    }
    Ok(total)
}

/// The `samples` seeded shuffles evaluated by [`sampled_max`]; the identity
/// alone when `samples` is zero.
pub fn sample_permutations(n: usize, samples: usize, seed: u64) -> Vec<Vec<usize>> {
    if samples == 0 {
        return vec![(0..n).collect()];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            perm
        })
        .collect()
}

/// Extrema over seeded random assignments. Deterministic for a given seed.
pub fn sampled_max(jobs: &JobSet, platform: &Platform, samples: usize, seed: u64) -> OracleResult {
    let perms = sample_permutations(jobs.len(), samples, seed);
    let acc = perms
        .par_chunks(256)
        .map(|chunk| {
            let mut acc = Acc::first(evaluate(jobs, platform, &chunk[0]), &chunk[0]);
            for perm in &chunk[1..] {
                acc.push(&evaluate(jobs, platform, perm), perm);
            }
            acc
        })
        .reduce_with(Acc::merge)
        .expect("at least one sample");
    acc.finish(jobs, OracleMode::Sampled { seed, samples })
}
