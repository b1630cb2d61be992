use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::blocking;
use crate::derive::Derivation;
use crate::model::{EventId, SystemModel, Tick};

/// How each instance's release delay (`release − arrival`) is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterPolicy {
    Zero,
    Max,
    /// Delay of the k-th instance; instances past the end get zero.
    Fixed(Vec<Tick>),
    /// Seeded draw in `[0, J]`, biased towards both ends.
    Random,
}

/// Spacing between bursts (or between arrivals of non-bursty sources).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapPolicy {
    /// Exactly the outer period.
    Exact,
    /// The outer period plus a seeded non-negative extra.
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceScenario {
    pub event: EventId,
    /// Arrival time of the first instance.
    pub phase: Tick,
    pub jitter: JitterPolicy,
    pub gaps: GapPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    /// External arrivals happen strictly before this time; work already
    /// released is run to completion.
    pub duration: Tick,
    pub sources: Vec<SourceScenario>,
    pub seed: u64,
}

/// Default horizon: two hyperperiods plus the longest deadline.
pub fn default_horizon(model: &SystemModel) -> Tick {
    let max_deadline = model
        .transactions
        .iter()
        .map(|t| t.deadline())
        .filter(|&d| d != Tick::MAX)
        .max()
        .unwrap_or(0);
    model.hyperperiod().saturating_mul(2).saturating_add(max_deadline)
}

impl Scenario {
    /// Every source starts at `0` with the given jitter policy and exact gaps.
    pub fn aligned(model: &SystemModel, duration: Tick, jitter: JitterPolicy) -> Self {
        Self {
            duration,
            sources: model
                .transactions
                .iter()
                .map(|t| SourceScenario {
                    event: t.external.id.clone(),
                    phase: 0,
                    jitter: jitter.clone(),
                    gaps: GapPolicy::Exact,
                })
                .collect(),
            seed: 0,
        }
    }

    /// Seeded random phases, gaps and the given jitter policy.
    pub fn random(model: &SystemModel, duration: Tick, seed: u64, jitter: JitterPolicy) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sources = model
            .transactions
            .iter()
            .map(|t| {
                let p = t.pattern();
                let phase = if rng.gen_bool(0.25) {
                    0
                } else {
                    rng.gen_range(0..p.outer_period.max(1))
                };
                SourceScenario {
                    event: t.external.id.clone(),
                    phase,
                    jitter: jitter.clone(),
                    gaps: if rng.gen_bool(0.5) {
                        GapPolicy::Exact
                    } else {
                        GapPolicy::Random
                    },
                }
            })
            .collect();
        Self {
            duration,
            sources,
            seed,
        }
    }
}

/// Worst-phasing heuristic.
///
/// All external events are released together, the first instance of each
/// after its maximal jitter and later instances without delay. When some
/// chain can be blocked, the transaction owning the largest blocker of the
/// most urgent such chain is started early so that the blocker is
/// dispatched one tick before the common release instant.
pub fn adversarial_scenario(model: &SystemModel) -> Scenario {
    let target = Derivation::new(model).ok().and_then(|d| {
        (0..d.chains.len())
            .filter(|&c| blocking(&d, c) > 0)
            .max_by_key(|&c| (d.chains[c].min_priority, std::cmp::Reverse(c)))
    });
    match target {
        Some(chain) => adversarial_for(model, chain),
        None => baseline(model, None),
    }
}

/// One adversarial scenario per transaction, each aimed at that
/// transaction's chain.
pub fn adversarial_scenarios(model: &SystemModel) -> Vec<Scenario> {
    (0..model.transactions.len())
        .map(|c| adversarial_for(model, c))
        .collect()
}

fn baseline(model: &SystemModel, common: Option<Tick>) -> Scenario {
    let max_jitter = model.transactions.iter().map(|t| t.pattern().jitter).max().unwrap_or(0);
    let release = common.unwrap_or(max_jitter).max(max_jitter);
    let mut s = Scenario::aligned(model, 0, JitterPolicy::Zero);
    for (src, t) in s.sources.iter_mut().zip(&model.transactions) {
        let j = t.pattern().jitter;
        src.phase = release - j;
        src.jitter = JitterPolicy::Fixed(vec![j]);
    }
    s.duration = release.saturating_add(default_horizon(model));
    s
}

pub(crate) fn adversarial_for(model: &SystemModel, chain: usize) -> Scenario {
    let Ok(d) = Derivation::new(model) else {
        return baseline(model, None);
    };
    let c = &d.chains[chain];
    let blocker = d
        .jobs
        .iter()
        .enumerate()
        .filter(|(i, j)| j.priority < c.min_priority && !c.jobs.contains(i))
        .max_by_key(|(i, j)| (j.cost, std::cmp::Reverse(*i)))
        .map(|(i, _)| i);
    let Some(blocker) = blocker else {
        return baseline(model, None);
    };
    let owner = d.jobs[blocker].chain;
    let lead = isolated_dispatch(&d, owner, blocker);
    let mut s = baseline(model, Some(lead + 1));
    let release = s.sources[chain].phase + model.transactions[chain].pattern().jitter;
    s.sources[owner].phase = release - 1 - lead;
    s.sources[owner].jitter = JitterPolicy::Zero;
    s
}

/// Dispatch offset of `job` when its chain runs alone from time 0.
fn isolated_dispatch(d: &Derivation, chain: usize, job: usize) -> Tick {
    let mut now = 0;
    let mut ready: Vec<(Tick, usize)> = vec![(0, d.chains[chain].jobs[0])];
    while !ready.is_empty() {
        let pick = ready
            .iter()
            .enumerate()
            .filter(|(_, (t, _))| *t <= now)
            .max_by_key(|(_, (t, j))| (d.jobs[*j].priority, std::cmp::Reverse((*t, *j))))
            .map(|(i, _)| i);
        let Some(i) = pick else {
            now = ready.iter().map(|(t, _)| *t).min().unwrap_or(now);
            continue;
        };
        let (_, j) = ready.swap_remove(i);
        if j == job {
            return now;
        }
        for e in &d.jobs[j].emissions {
            ready.push((now + e.offset, e.successor));
        }
        now += d.jobs[j].cost;
    }
    0
}

pub(crate) fn draw_jitter(policy: &JitterPolicy, bound: Tick, instance: usize, rng: &mut ChaCha8Rng) -> Tick {
    match policy {
        JitterPolicy::Zero => 0,
        JitterPolicy::Max => bound,
        JitterPolicy::Fixed(v) => v.get(instance).copied().unwrap_or(0),
        JitterPolicy::Random => match rng.gen_range(0..4u8) {
            0 => 0,
            1 => bound,
            _ => rng.gen_range(0..=bound),
        },
    }
}

pub(crate) fn draw_gap(policy: GapPolicy, outer: Tick, rng: &mut ChaCha8Rng) -> Tick {
    match policy {
        GapPolicy::Exact => outer,
        GapPolicy::Random => {
            if rng.gen_bool(0.5) {
                outer
            } else {
                outer + rng.gen_range(1..=outer.max(1))
            }
        }
    }
}
