//! Derives the scheduling view of a design model.
//!
//! A *job* is the synchronous set rooted at an asynchronously triggered
//! action (one triggered by an external event or a signal): the root plus
//! every action reachable through call emissions. A job runs as a single
//! non-preemptable unit. A *chain* lists the jobs of one transaction in
//! causal order together with the offsets at which signals are emitted.
//!
//! Inside a job the nested-call timeline is: a sub-action's own cost, then
//! the full synchronous set of the action it calls, then the next
//! sub-action. Signals are emitted when the emitting sub-action's own cost
//! has elapsed.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate, Action, ActionId, EmissionKind, EventId, Priority, SystemModel, Tick, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeriveError {
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unknown transaction `{0}`")]
    UnknownTransaction(String),
    #[error("sub-action range {p}..={q} is invalid for `{action}` with {len} sub-actions")]
    SubActionRange {
        action: String,
        p: usize,
        q: usize,
        len: usize,
    },
    #[error("model is not valid:\n{0}")]
    Invalid(ValidationReport),
}

/// `Υ(A)` and its cumulative cost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncSet {
    pub members: Vec<ActionId>,
    pub cost: Tick,
}

/// A signal emitted by one job that releases another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalEmission {
    pub event: EventId,
    /// Ticks after the emitting job is dispatched.
    pub offset: Tick,
    /// Index of the released job in [`Derivation::jobs`].
    pub successor: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub root: ActionId,
    pub members: Vec<ActionId>,
    pub cost: Tick,
    pub priority: Priority,
    pub transaction: String,
    /// Index of the owning chain in [`Derivation::chains`].
    pub chain: usize,
    pub emissions: Vec<SignalEmission>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub transaction: String,
    /// Job indices in causal order; the first is rooted at the external event's action.
    pub jobs: Vec<usize>,
    pub total_cost: Tick,
    pub min_priority: Priority,
    pub max_priority: Priority,
}

impl Chain {
    /// Signal emissions of the chain as `(event, emitting job, offset)`.
    pub fn emission_offsets<'a>(
        &'a self,
        derivation: &'a Derivation,
    ) -> impl Iterator<Item = (&'a EventId, usize, Tick)> + 'a {
        self.jobs.iter().flat_map(move |&j| {
            derivation.jobs[j]
                .emissions
                .iter()
                .map(move |e| (&e.event, j, e.offset))
        })
    }
}

/// Jobs and chains of a validated model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub jobs: Vec<Job>,
    pub chains: Vec<Chain>,
}

impl Derivation {
    pub fn new(model: &SystemModel) -> Result<Self, DeriveError> {
        let report = validate(model);
        if !report.is_clean() {
            return Err(DeriveError::Invalid(report));
        }
        let triggers = model.trigger_index();
        let mut jobs: Vec<Job> = Vec::new();
        let mut chains = Vec::new();

        for (chain_idx, t) in model.transactions.iter().enumerate() {
            let root = triggers[t.external.id.as_str()];
            let mut queue = VecDeque::from([root]);
            let mut members = Vec::new();
            // pending (job index, emission slot) edges waiting for the successor's index
            let mut pending: HashMap<&str, (usize, usize)> = HashMap::new();
            while let Some(action) = queue.pop_front() {
                let index = jobs.len();
                if let Some((from, slot)) = pending.remove(action.trigger.as_str()) {
                    jobs[from].emissions[slot].successor = index;
                }
                let mut timeline = Timeline::default();
                timeline.walk(action, &triggers);
                let mut emissions = Vec::new();
                let mut signals = timeline.signals;
                signals.sort_by_key(|(_, offset)| *offset);
                for (event, offset) in signals {
                    let next = triggers[event.as_str()];
                    pending.insert(next.trigger.as_str(), (index, emissions.len()));
                    emissions.push(SignalEmission {
                        event,
                        offset,
                        successor: usize::MAX,
                    });
                    queue.push_back(next);
                }
                jobs.push(Job {
                    root: action.id.clone(),
                    members: timeline.members,
                    cost: timeline.elapsed,
                    priority: action.priority,
                    transaction: t.id.clone(),
                    chain: chain_idx,
                    emissions,
                });
                members.push(index);
            }
            let total_cost = members.iter().map(|&j| jobs[j].cost).sum();
            let min_priority = members.iter().map(|&j| jobs[j].priority).min().unwrap_or(0);
            let max_priority = members.iter().map(|&j| jobs[j].priority).max().unwrap_or(0);
            chains.push(Chain {
                transaction: t.id.clone(),
                jobs: members,
                total_cost,
                min_priority,
                max_priority,
            });
        }
        Ok(Self { jobs, chains })
    }

    pub fn chain_of(&self, transaction: &str) -> Option<usize> {
        self.chains.iter().position(|c| c.transaction == transaction)
    }

    pub fn job_of(&self, root: &str) -> Option<usize> {
        self.jobs.iter().position(|j| j.root.as_str() == root)
    }

    pub fn chain_jobs(&self, chain: usize) -> impl Iterator<Item = &Job> {
        self.chains[chain].jobs.iter().map(|&j| &self.jobs[j])
    }
}

#[derive(Default)]
struct Timeline {
    elapsed: Tick,
    members: Vec<ActionId>,
    signals: Vec<(EventId, Tick)>,
}

impl Timeline {
    fn walk(&mut self, action: &Action, triggers: &HashMap<&str, &Action>) {
        if self.members.contains(&action.id) {
            return;
        }
        self.members.push(action.id.clone());
        for sub in action.sub_actions() {
            self.elapsed += sub.cost;
            match &sub.emission {
                Some(e) if e.kind == EmissionKind::Call => {
                    if let Some(callee) = triggers.get(e.event.as_str()) {
                        self.walk(callee, triggers);
                    }
                }
                Some(e) => self.signals.push((e.event.clone(), self.elapsed)),
                None => {}
            }
        }
    }
}

/// `Υ(action)`: the action plus everything it calls, transitively.
pub fn sync_set(model: &SystemModel, action: &str) -> Result<SyncSet, DeriveError> {
    let root = model
        .action(action)
        .ok_or_else(|| DeriveError::UnknownAction(action.to_owned()))?;
    let triggers = model.trigger_index();
    let mut timeline = Timeline::default();
    timeline.walk(root, &triggers);
    let cost = timeline
        .members
        .iter()
        .filter_map(|id| model.action(id.as_str()))
        .map(Action::cost)
        .sum();
    Ok(SyncSet {
        members: timeline.members,
        cost,
    })
}

/// One job per asynchronously triggered action, grouped by transaction in
/// causal order.
pub fn jobs(model: &SystemModel) -> Result<Vec<Job>, DeriveError> {
    Derivation::new(model).map(|d| d.jobs)
}

pub fn chains(model: &SystemModel) -> Result<Vec<Chain>, DeriveError> {
    Derivation::new(model).map(|d| d.chains)
}

/// `C_{i,p..q}`: own cost of sub-actions `p..=q` (1-based), callees excluded.
pub fn partial_cost(action: &Action, p: usize, q: usize) -> Result<Tick, DeriveError> {
    let subs = action.sub_actions();
    if p == 0 || p > q || q > subs.len() {
        return Err(DeriveError::SubActionRange {
            action: action.id.to_string(),
            p,
            q,
            len: subs.len(),
        });
    }
    Ok(subs[p - 1..q].iter().map(|s| s.cost).sum())
}
