//! Seeded random models for property tests and stress runs.
//!
//! Periods come from a small set of round values so hyperperiods stay short.
//! Each transaction is a tree of jobs linked by signals; a job may contain
//! one synchronous callee.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::utilization;
use crate::model::{Action, ArrivalPattern, SubAction, SystemModel, Tick, Transaction};

const PERIODS: [Tick; 8] = [20, 30, 40, 50, 60, 80, 100, 120];

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub max_transactions: usize,
    pub max_jobs: usize,
    /// Jobs per transaction, at most.
    pub max_chain: usize,
    pub max_sub_cost: Tick,
    pub max_priority: u32,
    /// Rejection bound on long-run utilization.
    pub max_utilization: Ratio<u64>,
    pub allow_jitter: bool,
    pub allow_bursts: bool,
    pub allow_aperiodic: bool,
    pub allow_calls: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            max_transactions: 4,
            max_jobs: 8,
            max_chain: 3,
            max_sub_cost: 6,
            max_priority: 6,
            max_utilization: Ratio::new(9, 10),
            allow_jitter: true,
            allow_bursts: true,
            allow_aperiodic: true,
            allow_calls: true,
        }
    }
}

impl GeneratorConfig {
    /// Independent periodic tasks: one job each, no jitter, no calls.
    pub fn periodic_tasks() -> Self {
        Self {
            max_chain: 1,
            allow_jitter: false,
            allow_bursts: false,
            allow_aperiodic: false,
            allow_calls: false,
            ..Self::default()
        }
    }
}

/// A valid model drawn from `seed`. Candidates above the utilization bound
/// are redrawn from the same stream.
pub fn random_model(seed: u64, config: &GeneratorConfig) -> SystemModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let model = draw(&mut rng, config, seed);
        if utilization(&model) <= config.max_utilization {
            return model;
        }
    }
}

fn draw_pattern(rng: &mut ChaCha8Rng, config: &GeneratorConfig) -> ArrivalPattern {
    let period = PERIODS[rng.gen_range(0..PERIODS.len())];
    let jitter = if config.allow_jitter && rng.gen_bool(0.6) {
        rng.gen_range(0..=period / 3)
    } else {
        0
    };
    if config.allow_bursts && rng.gen_bool(0.25) {
        let burst = rng.gen_range(2..=3u32);
        let outer = period * Tick::from(burst + 1);
        let inner = rng.gen_range(period / 2..=period);
        ArrivalPattern::sporadic(outer, inner, burst, jitter.min(inner / 2))
    } else if config.allow_aperiodic && rng.gen_bool(0.3) {
        ArrivalPattern::aperiodic(period, jitter)
    } else {
        ArrivalPattern::periodic(period, jitter)
    }
}

fn draw_subs(rng: &mut ChaCha8Rng, config: &GeneratorConfig, prefix: &str, count: usize) -> Vec<SubAction> {
    (0..count)
        .map(|i| SubAction::new(format!("{prefix}_{}", i + 1), rng.gen_range(1..=config.max_sub_cost)))
        .collect()
}

fn draw(rng: &mut ChaCha8Rng, config: &GeneratorConfig, seed: u64) -> SystemModel {
    let tx_count = rng.gen_range(1..=config.max_transactions.min(config.max_jobs));
    let mut budget = config.max_jobs;
    let mut model = SystemModel::new(format!("random-{seed}"));
    let mut next_event = 0usize;
    let mut event = || {
        next_event += 1;
        format!("E{next_event}")
    };

    for ti in 0..tx_count {
        let reserve = tx_count - ti - 1;
        let jobs = rng.gen_range(1..=config.max_chain.min(budget - reserve).max(1));
        budget -= jobs;
        let pattern = draw_pattern(rng, config);
        let external = event();
        let mut tx = Transaction::new(format!("T{}", ti + 1), external.clone(), pattern);
        let deadline = pattern.outer_period * rng.gen_range(1..=3);

        // Parent of each non-root job, chosen among earlier jobs.
        let parents: Vec<usize> = (1..jobs).map(|k| rng.gen_range(0..k)).collect();
        let priorities: Vec<u32> = (0..jobs).map(|_| rng.gen_range(1..=config.max_priority)).collect();
        let triggers: Vec<String> = (0..jobs)
            .map(|k| if k == 0 { external.clone() } else { event() })
            .collect();

        for k in 0..jobs {
            let id = format!("A{}_{}", ti + 1, k + 1);
            let children: Vec<usize> = (1..jobs).filter(|&c| parents[c - 1] == k).collect();
            let has_call = config.allow_calls && rng.gen_bool(0.3);
            let needed = children.len() + usize::from(has_call);
            let count = rng.gen_range(needed.max(1)..=needed.max(1) + 1);
            let mut subs = draw_subs(rng, config, &id.to_lowercase(), count);

            let mut slots: Vec<usize> = (0..count).collect();
            for i in (1..slots.len()).rev() {
                slots.swap(i, rng.gen_range(0..=i));
            }
            let mut slots = slots.into_iter();
            for &child in &children {
                let s = slots.next().expect("enough sub-actions");
                subs[s] = subs[s].clone().signal(triggers[child].clone());
            }
            if has_call {
                let call_event = event();
                let s = slots.next().expect("enough sub-actions");
                subs[s] = subs[s].clone().call(call_event.clone());
                let callee_id = format!("{id}c");
                let callee_len = rng.gen_range(1..=2);
                let mut callee_subs = draw_subs(rng, config, &callee_id.to_lowercase(), callee_len);
                let last = callee_subs.len() - 1;
                callee_subs[last] = callee_subs[last].clone().reply();
                tx = tx.with_action(Action::new(
                    callee_id,
                    call_event,
                    format!("Cap{}", rng.gen_range(1..=4)),
                    priorities[k],
                    deadline,
                    callee_subs,
                ));
            }
            tx = tx.with_action(Action::new(
                id,
                triggers[k].clone(),
                format!("Cap{}", rng.gen_range(1..=4)),
                priorities[k],
                deadline,
                subs,
            ));
        }
        model = model.with_transaction(tx);
    }
    model
}
