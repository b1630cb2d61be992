//! Worst-case response-time and feasibility analysis.
//!
//! Scheduling is fixed-priority and run-to-completion on a single thread:
//! once a job (synchronous set) is dispatched it is not preempted.
//! End-to-end analysis treats each transaction's chain as one unit of work
//! released by its external event:
//!
//! * blocking: at most one lower-priority job can be running when the chain
//!   is released; no job below the chain's minimum priority can start while
//!   a chain stage is pending, because every successor stage is released
//!   before its predecessor completes;
//! * interference: every other transaction whose highest job priority is at
//!   least the chain's lowest contributes its whole chain cost per release
//!   over the full response window;
//! * successive instances of the chain are examined until one completes
//!   before the next can be released.
//!
//! Release counting (with jitter and bursts) lives on
//! [`ArrivalPattern::release_count`].

mod busy;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use busy::InterferenceSource;

use crate::derive::{Derivation, DeriveError};
use crate::model::{validate, ActionId, ArrivalPattern, Priority, SystemModel, Tick, ValidationReport};
use busy::{solve, Outcome, Target};

/// Multiple of the hyperperiod used as the default divergence bound.
pub const DEFAULT_WINDOW_FACTOR: Tick = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Busy windows longer than this are reported as unbounded. `None`
    /// selects ten times the hyperperiod of the outer periods.
    pub max_window: Option<Tick>,
    /// Also compute per-job stage bounds.
    pub stages: bool,
}

impl AnalysisConfig {
    pub fn effective_window(&self, model: &SystemModel) -> Tick {
        self.max_window
            .unwrap_or_else(|| model.hyperperiod().saturating_mul(DEFAULT_WINDOW_FACTOR))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("model is not valid:\n{0}")]
    Invalid(ValidationReport),
    #[error("maximum window must be positive")]
    NonPositiveWindow,
    #[error("unknown transaction `{0}`")]
    UnknownTransaction(String),
    #[error("unknown job root `{0}`")]
    UnknownJob(String),
}

impl From<DeriveError> for AnalysisError {
    fn from(e: DeriveError) -> Self {
        match e {
            DeriveError::Invalid(r) => AnalysisError::Invalid(r),
            DeriveError::UnknownTransaction(t) => AnalysisError::UnknownTransaction(t),
            DeriveError::UnknownAction(a) => AnalysisError::UnknownJob(a),
            other => AnalysisError::Invalid(ValidationReport {
                diagnostics: vec![crate::model::Diagnostic {
                    code: crate::model::DiagnosticCode::DanglingRef,
                    message: other.to_string(),
                    subject: String::new(),
                }],
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Schedulable,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WcrtResult {
    pub transaction: String,
    pub deadline: Tick,
    /// `None` when the busy window diverged or the system is overloaded.
    pub wcrt: Option<Tick>,
    pub blocking: Tick,
    pub instances_examined: u64,
    /// Response bound of each examined instance.
    pub responses: Vec<Tick>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageBound {
    pub root: ActionId,
    pub transaction: String,
    /// Release jitter seen by the job relative to its transaction's
    /// external arrival.
    pub jitter: Tick,
    /// Completion bound measured from the external arrival.
    pub wcrt: Option<Tick>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub results: Vec<WcrtResult>,
    pub utilization: Ratio<u64>,
    pub max_window: Tick,
    pub stages: Vec<StageBound>,
}

impl AnalysisReport {
    pub fn schedulable(&self) -> bool {
        self.results.iter().all(|r| r.verdict == Verdict::Schedulable)
    }

    pub fn result(&self, transaction: &str) -> Option<&WcrtResult> {
        self.results.iter().find(|r| r.transaction == transaction)
    }
}

/// Long-run processor demand: Σ (chain cost · burst) / outer period.
pub fn utilization(model: &SystemModel) -> Ratio<u64> {
    model
        .transactions
        .iter()
        .map(|t| {
            let cost: Tick = t.actions.iter().map(|a| a.cost()).sum();
            let p = t.pattern();
            Ratio::new(cost * u64::from(p.burst), p.outer_period.max(1))
        })
        .fold(Ratio::from_integer(0), |acc, r| acc + r)
}

/// Releases of `pattern` in a half-open window of length `window`.
pub fn release_count(pattern: &ArrivalPattern, window: Tick) -> u64 {
    pattern.release_count(window)
}

/// Cost of `job` plus the successor jobs it releases (transitively) that
/// have priority at least `floor`. Those run inside a busy period started by
/// `job` and are not covered by their transaction's release count.
fn blocker_demand(derivation: &Derivation, job: usize, floor: Priority) -> Tick {
    let j = &derivation.jobs[job];
    j.emissions
        .iter()
        .filter(|e| derivation.jobs[e.successor].priority >= floor)
        .map(|e| blocker_demand(derivation, e.successor, floor))
        .fold(j.cost, Tick::saturating_add)
}

/// Longest lower-priority demand that can already be running when work of
/// priority `floor` is released. Jobs in `exclude` are never blockers.
fn blocking_below(derivation: &Derivation, floor: Priority, exclude: &[usize]) -> Tick {
    derivation
        .jobs
        .iter()
        .enumerate()
        .filter(|(i, j)| j.priority < floor && !exclude.contains(i))
        .map(|(i, _)| blocker_demand(derivation, i, floor))
        .max()
        .unwrap_or(0)
}

/// Blocking term of a chain: the largest lower-priority job that can be
/// running when the chain is released, plus any of its own successors that
/// are urgent enough to run inside the chain's busy period.
pub fn blocking(derivation: &Derivation, chain: usize) -> Tick {
    let c = &derivation.chains[chain];
    blocking_below(derivation, c.min_priority, &c.jobs)
}

fn chain_sources(model: &SystemModel, derivation: &Derivation, chain: usize) -> Vec<InterferenceSource> {
    let floor = derivation.chains[chain].min_priority;
    derivation
        .chains
        .iter()
        .enumerate()
        .filter(|(i, c)| *i != chain && c.max_priority >= floor)
        .map(|(i, c)| InterferenceSource {
            cost: c.total_cost,
            pattern: model.transactions[i].external.pattern,
        })
        .collect()
}

fn overtaking_cost(pattern: &ArrivalPattern, jobs: usize, cost: Tick) -> Tick {
    // A lone job whose instances are released in arrival order is FIFO
    // among itself; anything else can be overtaken by a later instance.
    if jobs == 1 && pattern.jitter < pattern.min_spacing() {
        0
    } else {
        cost
    }
}

fn chain_wcrt(model: &SystemModel, derivation: &Derivation, chain: usize, limit: Tick) -> WcrtResult {
    let c = &derivation.chains[chain];
    let t = &model.transactions[chain];
    let pattern = t.external.pattern;
    let target = Target {
        cost: c.total_cost,
        pattern,
        blocking: blocking(derivation, chain),
        overtaking_cost: overtaking_cost(&pattern, c.jobs.len(), c.total_cost),
    };
    let sources = chain_sources(model, derivation, chain);
    let deadline = t.deadline();
    let (instances, bounded) = match solve(&target, &sources, limit) {
        Outcome::Bounded(i) => (i, true),
        Outcome::Diverged(i) => (i, false),
    };
    let responses: Vec<Tick> = instances.iter().map(|i| i.response).collect();
    let wcrt = if bounded { responses.iter().copied().max() } else { None };
    let verdict = match wcrt {
        None => Verdict::Unbounded,
        Some(r) if r <= deadline => Verdict::Schedulable,
        Some(_) => Verdict::Infeasible,
    };
    WcrtResult {
        transaction: t.id.clone(),
        deadline,
        wcrt,
        blocking: target.blocking,
        instances_examined: responses.len() as u64,
        responses,
        verdict,
    }
}

fn check_window(limit: Tick) -> Result<Tick, AnalysisError> {
    if limit == 0 {
        Err(AnalysisError::NonPositiveWindow)
    } else {
        Ok(limit)
    }
}

/// End-to-end worst-case response time of one transaction, measured from
/// the external arrival (release jitter included) to the completion of the
/// last job of its chain.
pub fn end_to_end_wcrt(
    model: &SystemModel,
    transaction: &str,
    config: &AnalysisConfig,
) -> Result<WcrtResult, AnalysisError> {
    let limit = check_window(config.effective_window(model))?;
    let derivation = Derivation::new(model)?;
    let chain = derivation
        .chain_of(transaction)
        .ok_or_else(|| AnalysisError::UnknownTransaction(transaction.to_owned()))?;
    Ok(chain_wcrt(model, &derivation, chain, limit))
}

const STAGE_ROUNDS: usize = 64;

/// Per-job response bounds, each job analysed on its own with release
/// jitter inherited from the worst-case emission time of its triggering
/// signal. Jitter and responses are iterated to a joint fixed point.
/// These bounds are a diagnostic; they are typically more pessimistic than
/// the end-to-end figure.
pub fn stage_bounds(model: &SystemModel, config: &AnalysisConfig) -> Result<Vec<StageBound>, AnalysisError> {
    let limit = check_window(config.effective_window(model))?;
    let derivation = Derivation::new(model)?;
    let jobs = &derivation.jobs;
    let base_jitter = |j: usize| model.transactions[jobs[j].chain].external.pattern.jitter;

    let mut jitter: Vec<Option<Tick>> = (0..jobs.len()).map(|j| Some(base_jitter(j))).collect();
    let mut wcrt: Vec<Option<Tick>> = vec![None; jobs.len()];
    for _ in 0..STAGE_ROUNDS {
        for (j, job) in jobs.iter().enumerate() {
            let Some(own_jitter) = jitter[j] else {
                wcrt[j] = None;
                continue;
            };
            let pattern = model.transactions[job.chain].external.pattern.with_jitter(own_jitter);
            let mut sources = Vec::new();
            let mut overloaded = false;
            for (k, other) in jobs.iter().enumerate() {
                if k == j || other.priority < job.priority {
                    continue;
                }
                match jitter[k] {
                    Some(jk) => sources.push(InterferenceSource {
                        cost: other.cost,
                        pattern: model.transactions[other.chain].external.pattern.with_jitter(jk),
                    }),
                    None => overloaded = true,
                }
            }
            if overloaded {
                wcrt[j] = None;
                continue;
            }
            let target = Target {
                cost: job.cost,
                pattern,
                blocking: blocking_below(&derivation, job.priority, &[j]),
                overtaking_cost: overtaking_cost(&pattern, 1, job.cost),
            };
            wcrt[j] = match solve(&target, &sources, limit) {
                Outcome::Bounded(inst) => inst.iter().map(|i| i.response).max(),
                Outcome::Diverged(_) => None,
            };
        }
        let mut next = jitter.clone();
        for (j, job) in jobs.iter().enumerate() {
            for e in &job.emissions {
                // emission happens `offset` ticks after a dispatch that is at
                // the latest `wcrt - cost` after the external arrival
                next[e.successor] = wcrt[j].map(|r| r - job.cost + e.offset).filter(|&jit| jit <= limit);
            }
        }
        if next == jitter {
            break;
        }
        jitter = next;
    }
    Ok(jobs
        .iter()
        .enumerate()
        .map(|(j, job)| StageBound {
            root: job.root.clone(),
            transaction: job.transaction.clone(),
            jitter: jitter[j].unwrap_or(Tick::MAX),
            wcrt: wcrt[j],
        })
        .collect())
}

/// Stage bound of the job rooted at `root`; `None` when unbounded.
pub fn stage_wcrt(model: &SystemModel, root: &str, config: &AnalysisConfig) -> Result<Option<Tick>, AnalysisError> {
    stage_bounds(model, config)?
        .into_iter()
        .find(|s| s.root.as_str() == root)
        .map(|s| s.wcrt)
        .ok_or_else(|| AnalysisError::UnknownJob(root.to_owned()))
}

/// Full feasibility analysis. A utilization above one is infeasible
/// outright and skips the busy-window iteration.
pub fn analyze(model: &SystemModel, config: &AnalysisConfig) -> Result<AnalysisReport, AnalysisError> {
    let report = validate(model);
    if !report.is_clean() {
        return Err(AnalysisError::Invalid(report));
    }
    let limit = check_window(config.effective_window(model))?;
    let derivation = Derivation::new(model)?;
    let utilization = utilization(model);
    let results = if utilization > Ratio::from_integer(1) {
        model
            .transactions
            .iter()
            .enumerate()
            .map(|(i, t)| WcrtResult {
                transaction: t.id.clone(),
                deadline: t.deadline(),
                wcrt: None,
                blocking: blocking(&derivation, i),
                instances_examined: 0,
                responses: Vec::new(),
                verdict: Verdict::Infeasible,
            })
            .collect()
    } else {
        (0..derivation.chains.len())
            .map(|c| chain_wcrt(model, &derivation, c, limit))
            .collect()
    };
    let stages = if config.stages {
        stage_bounds(model, config)?
    } else {
        Vec::new()
    };
    Ok(AnalysisReport {
        results,
        utilization,
        max_window: limit,
        stages,
    })
}
