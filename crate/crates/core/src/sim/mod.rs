//! Discrete-event simulation of the single-threaded, run-to-completion,
//! fixed-priority dispatcher.
//!
//! External events arrive per a [`Scenario`] and are released after their
//! drawn jitter. Whenever the processor is free, the dispatcher picks the
//! released job with the highest priority (ties: earliest release, then
//! job declaration order, then instance) and runs its whole synchronous set.
//! Signals release successor jobs `offset` ticks after dispatch, without
//! jitter.

mod scenario;

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::{self, Write as _};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use scenario::{
    adversarial_scenario, adversarial_scenarios, default_horizon, GapPolicy, JitterPolicy, Scenario, SourceScenario,
};

use crate::derive::{Derivation, DeriveError};
use crate::model::{SystemModel, Tick};
use scenario::{draw_gap, draw_jitter};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] DeriveError),
    #[error("scenario has no entry for external event `{0}`")]
    MissingSource(String),
    #[error("scenario entry `{0}` does not name an external event")]
    UnknownSource(String),
    #[error("fixed jitter {delay} for `{event}` exceeds its bound {bound}")]
    JitterOutOfBounds { event: String, delay: Tick, bound: Tick },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Arrival,
    Release,
    Dispatch,
    Emission,
    Completion,
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecordKind::Arrival => "arrival",
            RecordKind::Release => "release",
            RecordKind::Dispatch => "dispatch",
            RecordKind::Emission => "emission",
            RecordKind::Completion => "completion",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub time: Tick,
    pub kind: RecordKind,
    /// Index into [`Trace::jobs`].
    pub job: usize,
    /// Instance number of the owning transaction.
    pub instance: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobLane {
    pub root: String,
    pub transaction: String,
    pub priority: u32,
    pub cost: Tick,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub instance: u64,
    pub arrival: Tick,
    pub release: Tick,
    pub completion: Tick,
    pub response: Tick,
    pub missed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransactionTrace {
    pub transaction: String,
    pub deadline: Tick,
    pub jitter: Tick,
    pub instances: Vec<InstanceOutcome>,
}

impl TransactionTrace {
    pub fn max_response(&self) -> Option<Tick> {
        self.instances.iter().map(|i| i.response).max()
    }

    pub fn misses(&self) -> usize {
        self.instances.iter().filter(|i| i.missed).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub duration: Tick,
    pub jobs: Vec<JobLane>,
    /// Ordered by time; ties keep the order in which they happened.
    pub records: Vec<Record>,
    pub transactions: Vec<TransactionTrace>,
}

impl Trace {
    /// Execution intervals `(job, instance, start, end)`.
    pub fn executions(&self) -> Vec<(usize, u64, Tick, Tick)> {
        let mut open: Vec<Option<(u64, Tick)>> = vec![None; self.jobs.len()];
        let mut out = Vec::new();
        for r in &self.records {
            match r.kind {
                RecordKind::Dispatch => open[r.job] = Some((r.instance, r.time)),
                RecordKind::Completion => {
                    if let Some((inst, start)) = open[r.job].take() {
                        out.push((r.job, inst, start, r.time));
                    }
                }
                _ => {}
            }
        }
        out.sort_by_key(|&(_, _, s, _)| s);
        out
    }

    /// Last completion time, or the duration if later.
    pub fn end(&self) -> Tick {
        self.records
            .iter()
            .map(|r| r.time)
            .max()
            .unwrap_or(0)
            .max(self.duration)
    }

    /// Line-delimited `time kind job instance` records.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(out, "{} {} {} {}", r.time, r.kind, self.jobs[r.job].root, r.instance);
        }
        out
    }

    pub fn total_misses(&self) -> usize {
        self.transactions.iter().map(TransactionTrace::misses).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct ReadyKey {
    priority: Reverse<u32>,
    release: Tick,
    job: usize,
    seq: u64,
}

struct Pending {
    time: Tick,
    seq: u64,
    job: usize,
    instance: u64,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap on (time, seq)
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

/// Runs one scenario to completion.
pub fn simulate(model: &SystemModel, scenario: &Scenario) -> Result<Trace, SimError> {
    let derivation = Derivation::new(model)?;
    simulate_derived(model, &derivation, scenario)
}

pub(crate) fn simulate_derived(
    model: &SystemModel,
    derivation: &Derivation,
    scenario: &Scenario,
) -> Result<Trace, SimError> {
    for s in &scenario.sources {
        if model.transactions.iter().all(|t| t.external.id != s.event) {
            return Err(SimError::UnknownSource(s.event.to_string()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut records = Vec::new();
    let mut pending = BinaryHeap::new();
    let mut seq = 0u64;
    let mut outcomes: Vec<TransactionTrace> = Vec::with_capacity(model.transactions.len());
    // outstanding job count per (transaction, instance)
    let mut outstanding: Vec<Vec<usize>> = Vec::with_capacity(model.transactions.len());

    for (tx, t) in model.transactions.iter().enumerate() {
        let src = scenario
            .sources
            .iter()
            .find(|s| s.event == t.external.id)
            .ok_or_else(|| SimError::MissingSource(t.external.id.to_string()))?;
        let p = t.pattern();
        if let JitterPolicy::Fixed(v) = &src.jitter {
            if let Some(&bad) = v.iter().find(|&&d| d > p.jitter) {
                return Err(SimError::JitterOutOfBounds {
                    event: t.external.id.to_string(),
                    delay: bad,
                    bound: p.jitter,
                });
            }
        }
        let root = derivation.chains[tx].jobs[0];
        let mut instances = Vec::new();
        let mut burst_start = src.phase;
        'bursts: while burst_start < scenario.duration {
            for k in 0..u64::from(p.burst.max(1)) {
                let arrival = burst_start + k * p.inner_period;
                if arrival >= scenario.duration {
                    break 'bursts;
                }
                let instance = instances.len() as u64;
                let delay = draw_jitter(&src.jitter, p.jitter, instances.len(), &mut rng);
                let release = arrival + delay;
                records.push(Record {
                    time: arrival,
                    kind: RecordKind::Arrival,
                    job: root,
                    instance,
                });
                pending.push(Pending {
                    time: release,
                    seq,
                    job: root,
                    instance,
                });
                seq += 1;
                instances.push(InstanceOutcome {
                    instance,
                    arrival,
                    release,
                    completion: 0,
                    response: 0,
                    missed: false,
                });
            }
            burst_start += draw_gap(src.gaps, p.outer_period, &mut rng);
        }
        outstanding.push(vec![derivation.chains[tx].jobs.len(); instances.len()]);
        outcomes.push(TransactionTrace {
            transaction: t.id.clone(),
            deadline: t.deadline(),
            jitter: p.jitter,
            instances,
        });
    }

    let mut ready: Vec<(ReadyKey, u64)> = Vec::new();
    let mut now: Tick = 0;
    loop {
        while pending.peek().is_some_and(|p: &Pending| p.time <= now) {
            let p = pending.pop().expect("peeked");
            records.push(Record {
                time: p.time,
                kind: RecordKind::Release,
                job: p.job,
                instance: p.instance,
            });
            ready.push((
                ReadyKey {
                    priority: Reverse(derivation.jobs[p.job].priority),
                    release: p.time,
                    job: p.job,
                    seq: p.seq,
                },
                p.instance,
            ));
        }
        let Some(best) = ready.iter().enumerate().min_by_key(|(_, (k, _))| *k).map(|(i, _)| i) else {
            match pending.peek() {
                Some(p) => {
                    now = p.time;
                    continue;
                }
                None => break,
            }
        };
        let (key, instance) = ready.swap_remove(best);
        let job = &derivation.jobs[key.job];
        records.push(Record {
            time: now,
            kind: RecordKind::Dispatch,
            job: key.job,
            instance,
        });
        for e in &job.emissions {
            records.push(Record {
                time: now + e.offset,
                kind: RecordKind::Emission,
                job: key.job,
                instance,
            });
            pending.push(Pending {
                time: now + e.offset,
                seq,
                job: e.successor,
                instance,
            });
            seq += 1;
        }
        now += job.cost;
        records.push(Record {
            time: now,
            kind: RecordKind::Completion,
            job: key.job,
            instance,
        });
        let tx = job.chain;
        let left = &mut outstanding[tx][instance as usize];
        *left -= 1;
        if *left == 0 {
            let out = &mut outcomes[tx];
            let inst = &mut out.instances[instance as usize];
            inst.completion = now;
            inst.response = now - inst.arrival;
            inst.missed = inst.response > out.deadline;
        }
    }

    records.sort_by_key(|r| r.time);
    let jobs = derivation
        .jobs
        .iter()
        .map(|j| JobLane {
            root: j.root.to_string(),
            transaction: j.transaction.clone(),
            priority: j.priority,
            cost: j.cost,
        })
        .collect();
    Ok(Trace {
        duration: scenario.duration,
        jobs,
        records,
        transactions: outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransactionSummary {
    pub transaction: String,
    pub deadline: Tick,
    pub max_response: Option<Tick>,
    pub instances: u64,
    pub misses: u64,
    /// Seed of the scenario that produced the maximum (`None` for an
    /// adversarial scenario).
    pub worst_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub scenarios: u64,
    pub transactions: Vec<TransactionSummary>,
}

impl SweepSummary {
    pub fn misses(&self) -> u64 {
        self.transactions.iter().map(|t| t.misses).sum()
    }

    pub fn max_response(&self, transaction: &str) -> Option<Tick> {
        self.transactions
            .iter()
            .find(|t| t.transaction == transaction)
            .and_then(|t| t.max_response)
    }

    fn new(model: &SystemModel) -> Self {
        Self {
            scenarios: 0,
            transactions: model
                .transactions
                .iter()
                .map(|t| TransactionSummary {
                    transaction: t.id.clone(),
                    deadline: t.deadline(),
                    max_response: None,
                    instances: 0,
                    misses: 0,
                    worst_seed: None,
                })
                .collect(),
        }
    }

    fn absorb(&mut self, trace: &Trace, seed: Option<u64>) {
        self.scenarios += 1;
        for (sum, t) in self.transactions.iter_mut().zip(&trace.transactions) {
            sum.instances += t.instances.len() as u64;
            sum.misses += t.misses() as u64;
            if let Some(m) = t.max_response() {
                if sum.max_response.is_none_or(|cur| m > cur) {
                    sum.max_response = Some(m);
                    sum.worst_seed = seed;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepOptions {
    pub count: u64,
    pub seed: u64,
    pub duration: Option<Tick>,
    pub jitter: JitterPolicy,
    pub adversarial: bool,
}

impl SweepOptions {
    pub fn new(count: u64, seed: u64) -> Self {
        Self {
            count,
            seed,
            duration: None,
            jitter: JitterPolicy::Random,
            adversarial: true,
        }
    }
}

/// Seed of the `i`-th scenario of a sweep.
pub fn scenario_seed(base: u64, i: u64) -> u64 {
    base.wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// `count` seeded random scenarios plus the adversarial ones; deterministic
/// for a fixed seed.
pub fn sweep(model: &SystemModel, count: u64, seed: u64) -> Result<SweepSummary, SimError> {
    sweep_with(model, &SweepOptions::new(count, seed))
}

pub fn sweep_with(model: &SystemModel, options: &SweepOptions) -> Result<SweepSummary, SimError> {
    let derivation = Derivation::new(model)?;
    let duration = options.duration.unwrap_or_else(|| default_horizon(model));
    let mut summary = SweepSummary::new(model);
    if options.adversarial {
        let mut scenarios = vec![adversarial_scenario(model)];
        scenarios.extend(adversarial_scenarios(model));
        for s in &scenarios {
            summary.absorb(&simulate_derived(model, &derivation, s)?, None);
        }
    }
    for i in 0..options.count {
        let s = scenario_seed(options.seed, i);
        let scenario = Scenario::random(model, duration, s, options.jitter.clone());
        summary.absorb(&simulate_derived(model, &derivation, &scenario)?, Some(s));
    }
    Ok(summary)
}
