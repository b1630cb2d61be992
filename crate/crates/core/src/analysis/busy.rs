//! Level-i busy-period iteration over successive instances.

use serde::{Deserialize, Serialize};

use crate::model::{ArrivalPattern, Tick};

/// Work released by another transaction (or job) that can delay the one
/// under analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterferenceSource {
    pub cost: Tick,
    pub pattern: ArrivalPattern,
}

impl InterferenceSource {
    pub(crate) fn demand(&self, window: Tick) -> Tick {
        self.pattern.release_count(window).saturating_mul(self.cost)
    }
}

/// Work under analysis.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Target {
    pub cost: Tick,
    pub pattern: ArrivalPattern,
    pub blocking: Tick,
    /// Cost charged for each own instance released inside the window after
    /// the instance being examined.
    pub overtaking_cost: Tick,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Instance {
    pub window: Tick,
    pub response: Tick,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Outcome {
    Bounded(Vec<Instance>),
    /// The window exceeded the limit; holds the instances solved before that.
    Diverged(Vec<Instance>),
}

impl Target {
    /// Right-hand side of the window equation for instance `q`.
    pub(crate) fn demand(&self, q: u64, window: Tick, sources: &[InterferenceSource]) -> Tick {
        let own = (q + 1).saturating_mul(self.cost);
        let later = self
            .pattern
            .release_count(window)
            .saturating_sub(q + 1)
            .saturating_mul(self.overtaking_cost);
        sources.iter().map(|s| s.demand(window)).fold(
            self.blocking.saturating_add(own).saturating_add(later),
            Tick::saturating_add,
        )
    }
}

/// Solves `w(q) = B + (q+1)·C + later(w) + Σ N_s(w)·C_s` for q = 0, 1, …
/// until an instance completes before the next one can be released.
pub(crate) fn solve(target: &Target, sources: &[InterferenceSource], limit: Tick) -> Outcome {
    let jitter = target.pattern.jitter;
    let mut instances = Vec::new();
    let mut q = 0u64;
    loop {
        let mut w = target.blocking.saturating_add((q + 1).saturating_mul(target.cost));
        loop {
            if w > limit {
                return Outcome::Diverged(instances);
            }
            let next = target.demand(q, w, sources);
            if next == w {
                break;
            }
            w = next;
        }
        let arrival = target.pattern.arrival_offset(q);
        instances.push(Instance {
            window: w,
            response: (w + jitter).saturating_sub(arrival),
        });
        if w <= target.pattern.arrival_offset(q + 1).saturating_sub(jitter) {
            return Outcome::Bounded(instances);
        }
        q += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target(cost: Tick, pattern: ArrivalPattern, blocking: Tick) -> Target {
        Target {
            cost,
            pattern,
            blocking,
            overtaking_cost: 0,
        }
    }

    #[test]
    fn lone_job() {
        let t = target(5, ArrivalPattern::periodic(10, 0), 0);
        assert_eq!(
            solve(&t, &[], 1000),
            Outcome::Bounded(vec![Instance { window: 5, response: 5 }])
        );
    }

    #[test]
    fn busy_period_spans_instances() {
        let src = [InterferenceSource {
            cost: 1,
            pattern: ArrivalPattern::periodic(6, 0),
        }];
        let t = target(4, ArrivalPattern::periodic(6, 0), 2);
        // q=0: 6 -> 7 -> 8, and 8 > 6 so the next instance joins the busy period
        // q=1: 10 -> 12, done since 12 <= 12
        assert_eq!(
            solve(&t, &src, 1000),
            Outcome::Bounded(vec![
                Instance { window: 8, response: 8 },
                Instance {
                    window: 12,
                    response: 6
                },
            ])
        );
    }

    #[test]
    fn overload_diverges() {
        let t = target(6, ArrivalPattern::periodic(10, 0), 0);
        let src = [InterferenceSource {
            cost: 5,
            pattern: ArrivalPattern::periodic(10, 0),
        }];
        assert!(matches!(solve(&t, &src, 10_000), Outcome::Diverged(_)));
    }

    #[test]
    fn windows_are_fixed_points() {
        let t = Target {
            cost: 7,
            pattern: ArrivalPattern::sporadic(100, 10, 3, 4),
            blocking: 3,
            overtaking_cost: 7,
        };
        let src = [
            InterferenceSource {
                cost: 3,
                pattern: ArrivalPattern::periodic(15, 2),
            },
            InterferenceSource {
                cost: 1,
                pattern: ArrivalPattern::sporadic(50, 5, 2, 0),
            },
        ];
        let Outcome::Bounded(inst) = solve(&t, &src, 100_000) else {
            panic!("diverged");
        };
        for (q, i) in inst.iter().enumerate() {
            assert_eq!(t.demand(q as u64, i.window, &src), i.window);
        }
    }
}
