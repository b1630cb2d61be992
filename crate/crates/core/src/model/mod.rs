//! Design model: transactions triggered by external events, run-to-completion
//! actions built from ordered sub-actions, and the internal events those
//! sub-actions emit.
//!
//! All time quantities are exact integer [`Tick`]s. Priorities are positive
//! integers where a larger number means a higher priority; equal priorities
//! are legal.

mod validate;

use std::borrow::Borrow;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use validate::{validate, Diagnostic, DiagnosticCode, ValidationReport};

/// Non-negative integer time unit.
pub type Tick = u64;

/// Action priority; larger is more urgent.
pub type Priority = u32;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Identifier of an action (`A_i`).
    ActionId
);
string_id!(
    /// Identifier of an event stream (`E_i`).
    EventId
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalKind {
    Periodic,
    /// Sporadic with a worst-case (minimum) inter-arrival time.
    Aperiodic,
    /// Bursts of `burst` arrivals spaced by the inner period, bursts
    /// separated by at least the outer period.
    SporadicallyPeriodic,
}

/// Arrival characterisation of an external event source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArrivalPattern {
    pub kind: ArrivalKind,
    pub outer_period: Tick,
    pub inner_period: Tick,
    pub burst: u32,
    pub jitter: Tick,
}

impl ArrivalPattern {
    pub fn periodic(period: Tick, jitter: Tick) -> Self {
        Self {
            kind: ArrivalKind::Periodic,
            outer_period: period,
            inner_period: period,
            burst: 1,
            jitter,
        }
    }

    pub fn aperiodic(min_interarrival: Tick, jitter: Tick) -> Self {
        Self {
            kind: ArrivalKind::Aperiodic,
            ..Self::periodic(min_interarrival, jitter)
        }
    }

    pub fn sporadic(outer: Tick, inner: Tick, burst: u32, jitter: Tick) -> Self {
        Self {
            kind: ArrivalKind::SporadicallyPeriodic,
            outer_period: outer,
            inner_period: inner,
            burst,
            jitter,
        }
    }

    pub fn with_jitter(self, jitter: Tick) -> Self {
        Self { jitter, ..self }
    }

    /// Offset of the `q`-th arrival from the first one under the densest
    /// legal arrival sequence: `(q div n)·T + (q mod n)·t`.
    pub fn arrival_offset(&self, q: u64) -> Tick {
        let n = u64::from(self.burst.max(1));
        (q / n)
            .saturating_mul(self.outer_period)
            .saturating_add((q % n).saturating_mul(self.inner_period))
    }

    /// Smallest gap between two consecutive arrivals.
    pub fn min_spacing(&self) -> Tick {
        if self.burst > 1 {
            self.inner_period
        } else {
            self.outer_period
        }
    }

    /// Maximum number of releases that can fall in a half-open window of
    /// length `window`, assuming the worst-case phasing and release jitter.
    ///
    /// With `F = floor((w + J) / T)` this is
    /// `F·n + min(n, ceil(max(0, w + J − F·T) / t))`.
    pub fn release_count(&self, window: Tick) -> u64 {
        let outer = self.outer_period.max(1);
        let inner = self.inner_period.max(1);
        let n = u64::from(self.burst.max(1));
        let span = window.saturating_add(self.jitter);
        let full = span / outer;
        let rest = span - full * outer;
        full.saturating_mul(n).saturating_add(n.min(rest.div_ceil(inner)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmissionKind {
    /// Asynchronous send; the receiver is scheduled separately.
    Signal,
    /// Synchronous call; the callee runs inside the caller's synchronous set.
    Call,
}

impl fmt::Display for EmissionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmissionKind::Signal => "signal",
            EmissionKind::Call => "call",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Emission {
    pub kind: EmissionKind,
    pub event: EventId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubAction {
    pub id: String,
    pub cost: Tick,
    pub emission: Option<Emission>,
    pub reply: bool,
}

impl SubAction {
    pub fn new(id: impl Into<String>, cost: Tick) -> Self {
        Self {
            id: id.into(),
            cost,
            emission: None,
            reply: false,
        }
    }

    pub fn emits(mut self, kind: EmissionKind, event: impl Into<EventId>) -> Self {
        self.emission = Some(Emission {
            kind,
            event: event.into(),
        });
        self
    }

    pub fn signal(self, event: impl Into<EventId>) -> Self {
        self.emits(EmissionKind::Signal, event)
    }

    pub fn call(self, event: impl Into<EventId>) -> Self {
        self.emits(EmissionKind::Call, event)
    }

    pub fn reply(mut self) -> Self {
        self.reply = true;
        self
    }
}

/// Run-to-completion processing of one event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub id: ActionId,
    pub owner: String,
    pub priority: Priority,
    pub deadline: Tick,
    pub trigger: EventId,
    sub_actions: Vec<SubAction>,
    cost: Tick,
}

impl Action {
    pub fn new(
        id: impl Into<ActionId>,
        trigger: impl Into<EventId>,
        owner: impl Into<String>,
        priority: Priority,
        deadline: Tick,
        sub_actions: Vec<SubAction>,
    ) -> Self {
        let cost = sub_actions.iter().map(|s| s.cost).sum();
        Self {
            id: id.into(),
            owner: owner.into(),
            priority,
            deadline,
            trigger: trigger.into(),
            sub_actions,
            cost,
        }
    }

    pub fn sub_actions(&self) -> &[SubAction] {
        &self.sub_actions
    }

    /// Total own execution cost, `C(A) = Σ C(a_j)`.
    pub fn cost(&self) -> Tick {
        self.cost
    }

    /// Replaces the sub-action list, keeping the cached cost in sync.
    pub fn set_sub_actions(&mut self, sub_actions: Vec<SubAction>) {
        self.cost = sub_actions.iter().map(|s| s.cost).sum();
        self.sub_actions = sub_actions;
    }

    /// Mutates a single sub-action's cost.
    pub fn set_sub_cost(&mut self, index: usize, cost: Tick) {
        if let Some(sub) = self.sub_actions.get_mut(index) {
            sub.cost = cost;
        }
        self.cost = self.sub_actions.iter().map(|s| s.cost).sum();
    }

    pub fn emissions(&self) -> impl Iterator<Item = &Emission> {
        self.sub_actions.iter().filter_map(|s| s.emission.as_ref())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalEvent {
    pub id: EventId,
    pub pattern: ArrivalPattern,
}

/// End-to-end computation triggered by one external event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub id: String,
    pub external: ExternalEvent,
    pub actions: Vec<Action>,
}

impl Transaction {
    pub fn new(id: impl Into<String>, external: impl Into<EventId>, pattern: ArrivalPattern) -> Self {
        Self {
            id: id.into(),
            external: ExternalEvent {
                id: external.into(),
                pattern,
            },
            actions: Vec::new(),
        }
    }

    pub fn with_action(mut self, action: Action) -> Self {
        self.actions.push(action);
        self
    }

    /// End-to-end deadline: the tightest member deadline.
    pub fn deadline(&self) -> Tick {
        self.actions.iter().map(|a| a.deadline).min().unwrap_or(Tick::MAX)
    }

    pub fn pattern(&self) -> &ArrivalPattern {
        &self.external.pattern
    }

    pub fn action(&self, id: &str) -> Option<&Action> {
        self.actions.iter().find(|a| a.id.as_str() == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EventKind {
    External { pattern: ArrivalPattern },
    Signal,
    Call,
}

/// Flattened view of an event stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub id: EventId,
    pub kind: EventKind,
    /// Action triggered by the event, if one is declared.
    pub action: Option<ActionId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SystemModel {
    pub name: String,
    pub transactions: Vec<Transaction>,
}

impl SystemModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            transactions: Vec::new(),
        }
    }

    pub fn with_transaction(mut self, transaction: Transaction) -> Self {
        self.transactions.push(transaction);
        self
    }

    pub fn actions(&self) -> impl Iterator<Item = &Action> {
        self.transactions.iter().flat_map(|t| t.actions.iter())
    }

    pub fn action(&self, id: &str) -> Option<&Action> {
        self.actions().find(|a| a.id.as_str() == id)
    }

    pub fn action_mut(&mut self, id: &str) -> Option<&mut Action> {
        self.transactions
            .iter_mut()
            .flat_map(|t| t.actions.iter_mut())
            .find(|a| a.id.as_str() == id)
    }

    pub fn transaction(&self, id: &str) -> Option<&Transaction> {
        self.transactions.iter().find(|t| t.id == id)
    }

    pub fn transaction_mut(&mut self, id: &str) -> Option<&mut Transaction> {
        self.transactions.iter_mut().find(|t| t.id == id)
    }

    /// Action triggered by `event`; the first declared one if several are.
    pub fn triggered_by(&self, event: &str) -> Option<&Action> {
        self.actions().find(|a| a.trigger.as_str() == event)
    }

    /// All event streams: externals in transaction order, then internal
    /// events in order of their first emission site.
    pub fn events(&self) -> Vec<Event> {
        let mut seen = BTreeSet::new();
        let mut events = Vec::new();
        for t in &self.transactions {
            if seen.insert(t.external.id.as_str()) {
                events.push(Event {
                    id: t.external.id.clone(),
                    kind: EventKind::External {
                        pattern: t.external.pattern,
                    },
                    action: self.triggered_by(t.external.id.as_str()).map(|a| a.id.clone()),
                });
            }
        }
        for emission in self.actions().flat_map(Action::emissions) {
            if seen.insert(emission.event.as_str()) {
                events.push(Event {
                    id: emission.event.clone(),
                    kind: match emission.kind {
                        EmissionKind::Signal => EventKind::Signal,
                        EmissionKind::Call => EventKind::Call,
                    },
                    action: self.triggered_by(emission.event.as_str()).map(|a| a.id.clone()),
                });
            }
        }
        events
    }

    /// Distinct capsule names, in order of first use.
    pub fn capsules(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for a in self.actions() {
            if !out.contains(&a.owner.as_str()) {
                out.push(&a.owner);
            }
        }
        out
    }

    /// Map from event id to the action it triggers (first declaration wins).
    pub(crate) fn trigger_index(&self) -> HashMap<&str, &Action> {
        let mut map = HashMap::new();
        for a in self.actions() {
            map.entry(a.trigger.as_str()).or_insert(a);
        }
        map
    }

    /// Longest outer period hyperperiod (lcm of all outer periods), saturating.
    pub fn hyperperiod(&self) -> Tick {
        self.transactions
            .iter()
            .map(|t| t.external.pattern.outer_period.max(1))
            .fold(1u64, |acc, p| {
                let g = num_integer::gcd(acc, p);
                (acc / g).saturating_mul(p)
            })
    }
}
