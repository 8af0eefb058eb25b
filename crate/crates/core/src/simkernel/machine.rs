//! Event-driven global preemptive dispatcher.
//!
//! Jobs carry an ordering key; a smaller key means a higher priority. Time
//! only moves inside [`Machine::advance`], which stops at the next
//! completion or at the caller's limit, whichever comes first.

use std::collections::HashMap;

use crate::time::TimeValue;

/// How jobs are mapped onto CPUs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispatch {
    /// Running jobs keep their CPU; a waiting job takes the free CPU with the
    /// highest index, or preempts the lowest-priority running job.
    Weak,
    /// The k-th highest-priority active job always runs on the k-th fastest
    /// CPU.
    Strong,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub job: usize,
    pub cpu: usize,
    pub start: TimeValue,
    pub end: TimeValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub job: usize,
    pub start: TimeValue,
    pub finish: TimeValue,
}

#[derive(Debug, Clone)]
struct Active<K> {
    id: usize,
    key: K,
    remaining: TimeValue,
    cpu: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Machine<K> {
    speeds: Vec<TimeValue>,
    dispatch: Dispatch,
    now: TimeValue,
    /// Sorted by key, highest priority first.
    active: Vec<Active<K>>,
    occupant: Vec<Option<(usize, TimeValue)>>,
    starts: HashMap<usize, TimeValue>,
    segments: Vec<Segment>,
    last_busy: Vec<TimeValue>,
    record_segments: bool,
}

impl<K: Ord + Clone> Machine<K> {
    /// `speeds` must be sorted slowest first.
    pub fn new(speeds: Vec<TimeValue>, dispatch: Dispatch, start: TimeValue) -> Self {
        let m = speeds.len();
        Machine {
            speeds,
            dispatch,
            last_busy: vec![start.clone(); m],
            now: start,
            active: Vec::new(),
            occupant: vec![None; m],
            starts: HashMap::new(),
            segments: Vec::new(),
            record_segments: true,
        }
    }

    /// Skips segment bookkeeping; per-CPU activity is still tracked.
    pub fn without_segments(mut self) -> Self {
        self.record_segments = false;
        self
    }

    pub fn now(&self) -> &TimeValue {
        &self.now
    }

    pub fn m(&self) -> usize {
        self.speeds.len()
    }

    pub fn is_idle(&self) -> bool {
        self.active.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    pub fn is_active(&self, id: usize) -> bool {
        self.active.iter().any(|a| a.id == id)
    }

    /// Active jobs that hold no CPU.
    pub fn waiting(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().filter(|a| a.cpu.is_none()).map(|a| a.id)
    }

    /// Job held by each CPU.
    pub fn occupants(&self) -> Vec<Option<usize>> {
        self.occupant.iter().map(|o| o.as_ref().map(|(id, _)| *id)).collect()
    }

    pub fn remaining(&self, id: usize) -> Option<&TimeValue> {
        self.active.iter().find(|a| a.id == id).map(|a| &a.remaining)
    }

    /// Adds a job at the current instant. A zero-length job completes
    /// immediately and is returned.
    pub fn release(&mut self, id: usize, key: K, work: TimeValue) -> Option<Completion> {
        if work.is_zero() {
            return Some(Completion { job: id, start: self.now.clone(), finish: self.now.clone() });
        }
        let pos = self.active.partition_point(|a| a.key <= key);
        self.active.insert(pos, Active { id, key, remaining: work, cpu: None });
        self.reassign();
        None
    }

    /// Replaces every active job's key.
    pub fn rekey(&mut self, mut f: impl FnMut(usize, &K) -> K) {
        for a in &mut self.active {
            a.key = f(a.id, &a.key);
        }
        self.active.sort_by(|a, b| a.key.cmp(&b.key));
        self.reassign();
    }

    /// Removes an active job without completing it.
    pub fn abort(&mut self, id: usize) -> bool {
        let Some(pos) = self.active.iter().position(|a| a.id == id) else {
            return false;
        };
        let job = self.active.remove(pos);
        self.starts.remove(&id);
        if let Some(cpu) = job.cpu {
            self.close(cpu);
        }
        self.reassign();
        true
    }

    pub fn next_completion_time(&self) -> Option<TimeValue> {
        self.active
            .iter()
            .filter_map(|a| a.cpu.map(|c| &a.remaining / &self.speeds[c]))
            .min()
            .map(|dt| &self.now + dt)
    }

    /// Runs until the next completion or `limit`, returning the jobs that
    /// finished at the new instant in priority order.
    pub fn advance(&mut self, limit: Option<&TimeValue>) -> Vec<Completion> {
        let target = match (self.next_completion_time(), limit) {
            (Some(t), Some(l)) => TimeValue::min_of(&t, l).clone(),
            (Some(t), None) => t,
            (None, Some(l)) => l.clone(),
            (None, None) => return Vec::new(),
        };
        assert!(target >= self.now, "time cannot move backwards");
        let elapsed = &target - &self.now;
        if !elapsed.is_zero() {
            for a in &mut self.active {
                if let Some(cpu) = a.cpu {
                    a.remaining = &a.remaining - &elapsed * &self.speeds[cpu];
                    self.last_busy[cpu] = target.clone();
                }
            }
        }
        self.now = target;

        let mut done = Vec::new();
        let mut i = 0;
        while i < self.active.len() {
            if self.active[i].cpu.is_some() && self.active[i].remaining.is_zero() {
                let job = self.active.remove(i);
                self.close(job.cpu.expect("running"));
                let start = self.starts.remove(&job.id).expect("a running job has started");
                done.push(Completion { job: job.id, start, finish: self.now.clone() });
            } else {
                i += 1;
            }
        }
        self.reassign();
        done
    }

    fn close(&mut self, cpu: usize) {
        if let Some((job, start)) = self.occupant[cpu].take() {
            if self.record_segments && start < self.now {
                self.segments.push(Segment { job, cpu, start, end: self.now.clone() });
            }
        }
        for a in &mut self.active {
            if a.cpu == Some(cpu) {
                a.cpu = None;
            }
        }
    }

    fn occupy(&mut self, idx: usize, cpu: usize) {
        let id = self.active[idx].id;
        self.active[idx].cpu = Some(cpu);
        self.occupant[cpu] = Some((id, self.now.clone()));
        self.starts.entry(id).or_insert_with(|| self.now.clone());
    }

    fn reassign(&mut self) {
        let m = self.m();
        let running = self.active.len().min(m);
        match self.dispatch {
            Dispatch::Strong => {
                for rank in 0..self.active.len() {
                    let want = (rank < running).then(|| m - 1 - rank);
                    if self.active[rank].cpu != want {
                        if let Some(cpu) = self.active[rank].cpu {
                            self.close(cpu);
                        }
                    }
                }
                for rank in 0..running {
                    let cpu = m - 1 - rank;
                    if self.active[rank].cpu != Some(cpu) {
                        if self.occupant[cpu].is_some() {
                            self.close(cpu);
                        }
                        self.occupy(rank, cpu);
                    }
                }
            }
            Dispatch::Weak => {
                for rank in running..self.active.len() {
                    if let Some(cpu) = self.active[rank].cpu {
                        self.close(cpu);
                    }
                }
                for rank in 0..running {
                    if self.active[rank].cpu.is_none() {
                        let cpu = (0..m)
                            .rev()
                            .find(|&c| self.occupant[c].is_none())
                            .expect("fewer running jobs than CPUs");
                        self.occupy(rank, cpu);
                    }
                }
            }
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Closes open segments at the current instant and returns the trace.
    pub fn take_segments(&mut self) -> Vec<Segment> {
        if self.record_segments {
            for cpu in 0..self.m() {
                if let Some((job, start)) = &self.occupant[cpu] {
                    if *start < self.now {
                        self.segments.push(Segment {
                            job: *job,
                            cpu,
                            start: start.clone(),
                            end: self.now.clone(),
                        });
                    }
                    self.occupant[cpu] = Some((*job, self.now.clone()));
                }
            }
        }
        std::mem::take(&mut self.segments)
    }

    /// Last instant each CPU executed something.
    pub fn last_busy(&self) -> &[TimeValue] {
        &self.last_busy
    }
}
