use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Action, ArrivalKind, EmissionKind, SystemModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagnosticCode {
    SyncPriorityMismatch,
    CycleInCauses,
    MissingReply,
    UnexpectedReply,
    MultipleEmitters,
    DuplicateTrigger,
    JitterOnInternal,
    BurstExceedsOuter,
    InvalidPattern,
    DanglingRef,
    DuplicateId,
    EmptyAction,
    InvalidPriority,
    TransactionMembership,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::SyncPriorityMismatch => "SYNC_PRIORITY_MISMATCH",
            DiagnosticCode::CycleInCauses => "CYCLE_IN_CAUSES",
            DiagnosticCode::MissingReply => "MISSING_REPLY",
            DiagnosticCode::UnexpectedReply => "UNEXPECTED_REPLY",
            DiagnosticCode::MultipleEmitters => "MULTIPLE_EMITTERS",
            DiagnosticCode::DuplicateTrigger => "DUPLICATE_TRIGGER",
            DiagnosticCode::JitterOnInternal => "JITTER_ON_INTERNAL",
            DiagnosticCode::BurstExceedsOuter => "BURST_EXCEEDS_OUTER",
            DiagnosticCode::InvalidPattern => "INVALID_PATTERN",
            DiagnosticCode::DanglingRef => "DANGLING_REF",
            DiagnosticCode::DuplicateId => "DUPLICATE_ID",
            DiagnosticCode::EmptyAction => "EMPTY_ACTION",
            DiagnosticCode::InvalidPriority => "INVALID_PRIORITY",
            DiagnosticCode::TransactionMembership => "TRANSACTION_MEMBERSHIP",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
    /// Id of the offending transaction, event or action.
    pub subject: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.code, self.subject, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn has(&self, code: DiagnosticCode) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }

    fn push(&mut self, code: DiagnosticCode, subject: impl Into<String>, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            code,
            message: message.into(),
            subject: subject.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.diagnostics {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of the design model. Violations are
/// reported as diagnostics; the function never fails.
pub fn validate(model: &SystemModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_ids(model, &mut report);
    check_patterns(model, &mut report);
    check_actions(model, &mut report);
    check_events(model, &mut report);
    check_causes(model, &mut report);
    check_membership(model, &mut report);
    report
}

fn check_ids(model: &SystemModel, report: &mut ValidationReport) {
    let mut tx_ids = HashSet::new();
    let mut ext_ids = HashSet::new();
    let mut action_ids = HashSet::new();
    for t in &model.transactions {
        if !tx_ids.insert(t.id.as_str()) {
            report.push(
                DiagnosticCode::DuplicateId,
                &t.id,
                "transaction declared more than once",
            );
        }
        if !ext_ids.insert(t.external.id.as_str()) {
            report.push(
                DiagnosticCode::DuplicateId,
                t.external.id.as_str(),
                "external event declared by more than one transaction",
            );
        }
        for a in &t.actions {
            if !action_ids.insert(a.id.as_str()) {
                report.push(
                    DiagnosticCode::DuplicateId,
                    a.id.as_str(),
                    "action declared more than once",
                );
            }
            let mut subs = HashSet::new();
            for s in a.sub_actions() {
                if !subs.insert(s.id.as_str()) {
                    report.push(
                        DiagnosticCode::DuplicateId,
                        a.id.as_str(),
                        format!("sub-action `{}` declared more than once", s.id),
                    );
                }
            }
        }
    }
}

fn check_patterns(model: &SystemModel, report: &mut ValidationReport) {
    for t in &model.transactions {
        let p = &t.external.pattern;
        let subject = t.external.id.as_str();
        if p.outer_period == 0 {
            report.push(DiagnosticCode::InvalidPattern, subject, "outer period must be positive");
        }
        if p.burst == 0 {
            report.push(
                DiagnosticCode::InvalidPattern,
                subject,
                "burst count must be at least 1",
            );
        }
        match p.kind {
            ArrivalKind::Periodic | ArrivalKind::Aperiodic => {
                if p.burst != 1 || p.inner_period != p.outer_period {
                    report.push(
                        DiagnosticCode::InvalidPattern,
                        subject,
                        "periodic and aperiodic sources have burst 1 and inner period equal to the period",
                    );
                }
            }
            ArrivalKind::SporadicallyPeriodic => {
                if p.inner_period == 0 {
                    report.push(DiagnosticCode::InvalidPattern, subject, "inner period must be positive");
                }
                if p.inner_period > p.outer_period {
                    report.push(
                        DiagnosticCode::BurstExceedsOuter,
                        subject,
                        format!(
                            "inner period {} exceeds outer period {}",
                            p.inner_period, p.outer_period
                        ),
                    );
                } else if u64::from(p.burst).saturating_mul(p.inner_period) > p.outer_period {
                    report.push(
                        DiagnosticCode::BurstExceedsOuter,
                        subject,
                        format!(
                            "burst of {} × {} does not fit in outer period {}",
                            p.burst, p.inner_period, p.outer_period
                        ),
                    );
                }
            }
        }
    }
}

fn check_actions(model: &SystemModel, report: &mut ValidationReport) {
    let call_events: HashSet<&str> = model
        .actions()
        .flat_map(Action::emissions)
        .filter(|e| e.kind == EmissionKind::Call)
        .map(|e| e.event.as_str())
        .collect();

    for a in model.actions() {
        let id = a.id.as_str();
        if a.priority == 0 {
            report.push(
                DiagnosticCode::InvalidPriority,
                id,
                "priority must be a positive integer",
            );
        }
        let subs = a.sub_actions();
        if subs.is_empty() {
            report.push(DiagnosticCode::EmptyAction, id, "action has no sub-actions");
            continue;
        }
        let replies = subs.iter().filter(|s| s.reply).count();
        if call_events.contains(a.trigger.as_str()) {
            if !subs.last().is_some_and(|s| s.reply) {
                report.push(
                    DiagnosticCode::MissingReply,
                    id,
                    "synchronously triggered action must end with a reply sub-action",
                );
            } else if replies > 1 {
                report.push(DiagnosticCode::MissingReply, id, "only the last sub-action may reply");
            }
        } else if replies > 0 {
            report.push(
                DiagnosticCode::UnexpectedReply,
                id,
                "reply sub-action in an asynchronously triggered action",
            );
        }
    }
}

fn check_events(model: &SystemModel, report: &mut ValidationReport) {
    let externals: HashSet<&str> = model.transactions.iter().map(|t| t.external.id.as_str()).collect();

    let mut emitters: HashMap<&str, Vec<(&Action, EmissionKind)>> = HashMap::new();
    for a in model.actions() {
        for e in a.emissions() {
            emitters.entry(e.event.as_str()).or_default().push((a, e.kind));
        }
    }

    let mut triggered: HashMap<&str, Vec<&Action>> = HashMap::new();
    for a in model.actions() {
        triggered.entry(a.trigger.as_str()).or_default().push(a);
    }

    let mut emitted: Vec<&str> = emitters.keys().copied().collect();
    emitted.sort_unstable();
    for event in emitted {
        let sites = &emitters[event];
        if externals.contains(event) {
            report.push(
                DiagnosticCode::JitterOnInternal,
                event,
                "event is both an external source with an arrival pattern and emitted internally",
            );
        }
        if sites.len() > 1 {
            let who: Vec<&str> = sites.iter().map(|(a, _)| a.id.as_str()).collect();
            report.push(
                DiagnosticCode::MultipleEmitters,
                event,
                format!(
                    "internal event emitted by {} sub-actions ({})",
                    sites.len(),
                    who.join(", ")
                ),
            );
        }
        if !triggered.contains_key(event) {
            report.push(DiagnosticCode::DanglingRef, event, "emitted event triggers no action");
        }
        if let [(caller, EmissionKind::Call), ..] = sites.as_slice() {
            if let Some(callees) = triggered.get(event) {
                for callee in callees {
                    if callee.priority != caller.priority {
                        report.push(
                            DiagnosticCode::SyncPriorityMismatch,
                            event,
                            format!(
                                "call from {} (priority {}) to {} (priority {})",
                                caller.id, caller.priority, callee.id, callee.priority
                            ),
                        );
                    }
                }
            }
        }
    }

    for t in &model.transactions {
        if !triggered.contains_key(t.external.id.as_str()) {
            report.push(
                DiagnosticCode::DanglingRef,
                t.external.id.as_str(),
                "external event triggers no action",
            );
        }
    }

    for a in model.actions() {
        let trig = a.trigger.as_str();
        if !externals.contains(trig) && !emitters.contains_key(trig) {
            report.push(
                DiagnosticCode::DanglingRef,
                a.id.as_str(),
                format!("trigger event `{trig}` is never declared or emitted"),
            );
        }
    }

    let mut trig_ids: Vec<&str> = triggered.keys().copied().collect();
    trig_ids.sort_unstable();
    for event in trig_ids {
        let actions = &triggered[event];
        if actions.len() > 1 {
            let who: Vec<&str> = actions.iter().map(|a| a.id.as_str()).collect();
            report.push(
                DiagnosticCode::DuplicateTrigger,
                event,
                format!("event triggers several actions ({})", who.join(", ")),
            );
        }
    }
}

/// Successor lists of the causes relation, one edge per emission.
fn causes_edges(model: &SystemModel) -> Vec<(usize, usize)> {
    let actions: Vec<&Action> = model.actions().collect();
    let index = model.trigger_index();
    let pos: HashMap<&str, usize> = actions.iter().enumerate().map(|(i, a)| (a.id.as_str(), i)).collect();
    let mut edges = Vec::new();
    for (i, a) in actions.iter().enumerate() {
        for e in a.emissions() {
            if let Some(target) = index.get(e.event.as_str()) {
                edges.push((i, pos[target.id.as_str()]));
            }
        }
    }
    edges
}

fn check_causes(model: &SystemModel, report: &mut ValidationReport) {
    let actions: Vec<&Action> = model.actions().collect();
    let n = actions.len();
    let mut succ = vec![Vec::new(); n];
    for (from, to) in causes_edges(model) {
        succ[from].push(to);
    }

    // iterative DFS; a gray target closes a cycle
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut color = vec![Color::White; n];
    let mut reported = BTreeSet::new();
    for start in 0..n {
        if color[start] != Color::White {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        color[start] = Color::Gray;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(&to) = succ[node].get(*next) {
                *next += 1;
                match color[to] {
                    Color::White => {
                        color[to] = Color::Gray;
                        stack.push((to, 0));
                    }
                    Color::Gray => {
                        if reported.insert((node, to)) {
                            report.push(
                                DiagnosticCode::CycleInCauses,
                                actions[node].id.as_str(),
                                format!(
                                    "{} causes {}, which already causes it",
                                    actions[node].id, actions[to].id
                                ),
                            );
                        }
                    }
                    Color::Black => {}
                }
            } else {
                color[node] = Color::Black;
                stack.pop();
            }
        }
    }
}

fn check_membership(model: &SystemModel, report: &mut ValidationReport) {
    let index = model.trigger_index();
    for t in &model.transactions {
        let Some(root) = index.get(t.external.id.as_str()) else {
            continue;
        };
        let mut closure = BTreeSet::new();
        let mut stack = vec![*root];
        while let Some(a) = stack.pop() {
            if !closure.insert(a.id.as_str()) {
                continue;
            }
            for e in a.emissions() {
                if let Some(next) = index.get(e.event.as_str()) {
                    stack.push(next);
                }
            }
        }
        let declared: BTreeSet<&str> = t.actions.iter().map(|a| a.id.as_str()).collect();
        for missing in closure.difference(&declared) {
            report.push(
                DiagnosticCode::TransactionMembership,
                *missing,
                format!("caused by transaction {} but declared outside it", t.id),
            );
        }
        for extra in declared.difference(&closure) {
            report.push(
                DiagnosticCode::TransactionMembership,
                *extra,
                format!("declared in transaction {} but not caused by its external event", t.id),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArrivalPattern, SubAction, Transaction};

    fn base() -> SystemModel {
        SystemModel::new("m").with_transaction(
            Transaction::new("t", "E1", ArrivalPattern::periodic(10, 0))
                .with_action(Action::new(
                    "A1",
                    "E1",
                    "C",
                    3,
                    10,
                    vec![SubAction::new("a", 1).call("E2"), SubAction::new("b", 1)],
                ))
                .with_action(Action::new(
                    "A2",
                    "E2",
                    "C",
                    3,
                    10,
                    vec![SubAction::new("c", 2).reply()],
                )),
        )
    }

    #[test]
    fn clean_model_has_no_diagnostics() {
        let r = validate(&base());
        assert!(r.is_clean(), "{r}");
    }

    #[test]
    fn priority_mismatch_on_call() {
        let mut m = base();
        m.action_mut("A2").unwrap().priority = 4;
        assert!(validate(&m).has(DiagnosticCode::SyncPriorityMismatch));
    }

    #[test]
    fn self_signal_is_a_cycle() {
        let mut m = base();
        let a = m.action_mut("A1").unwrap();
        let mut subs = a.sub_actions().to_vec();
        subs.push(SubAction::new("loop", 1).signal("E1"));
        a.set_sub_actions(subs);
        let r = validate(&m);
        assert!(r.has(DiagnosticCode::CycleInCauses), "{r}");
    }

    #[test]
    fn missing_and_unexpected_reply() {
        let mut m = base();
        m.action_mut("A2")
            .unwrap()
            .set_sub_actions(vec![SubAction::new("c", 2)]);
        assert!(validate(&m).has(DiagnosticCode::MissingReply));

        let mut m = base();
        m.action_mut("A1")
            .unwrap()
            .set_sub_actions(vec![SubAction::new("a", 1).call("E2"), SubAction::new("b", 1).reply()]);
        assert!(validate(&m).has(DiagnosticCode::UnexpectedReply));

        let mut m = base();
        m.action_mut("A2")
            .unwrap()
            .set_sub_actions(vec![SubAction::new("c", 2).reply(), SubAction::new("d", 1).reply()]);
        assert!(validate(&m).has(DiagnosticCode::MissingReply));
    }

    #[test]
    fn multiple_emitters_and_dangling() {
        let mut m = base();
        m.action_mut("A1").unwrap().set_sub_actions(vec![
            SubAction::new("a", 1).call("E2"),
            SubAction::new("b", 1).call("E2"),
        ]);
        assert!(validate(&m).has(DiagnosticCode::MultipleEmitters));

        let mut m = base();
        m.action_mut("A1").unwrap().set_sub_actions(vec![
            SubAction::new("a", 1).call("E2"),
            SubAction::new("b", 1).signal("E9"),
        ]);
        let r = validate(&m);
        assert!(r.has(DiagnosticCode::DanglingRef), "{r}");
    }

    #[test]
    fn pattern_checks() {
        let mut m = base();
        m.transactions[0].external.pattern = ArrivalPattern::sporadic(10, 4, 3, 0);
        assert!(validate(&m).has(DiagnosticCode::BurstExceedsOuter));

        let mut m = base();
        m.transactions[0].external.pattern.burst = 2;
        assert!(validate(&m).has(DiagnosticCode::InvalidPattern));
    }

    #[test]
    fn external_emitted_internally() {
        let mut m = base();
        m.action_mut("A2").unwrap().set_sub_actions(vec![
            SubAction::new("x", 1).signal("E1"),
            SubAction::new("c", 2).reply(),
        ]);
        let r = validate(&m);
        assert!(r.has(DiagnosticCode::JitterOnInternal), "{r}");
        assert!(r.has(DiagnosticCode::CycleInCauses), "{r}");
    }

    #[test]
    fn membership_across_transactions() {
        let mut m = base();
        let a2 = m.transactions[0].actions.pop().unwrap();
        m.transactions.push(
            Transaction::new("u", "E3", ArrivalPattern::periodic(20, 0))
                .with_action(Action::new("A3", "E3", "C", 1, 20, vec![SubAction::new("z", 1)]))
                .with_action(a2),
        );
        let r = validate(&m);
        assert!(r.has(DiagnosticCode::TransactionMembership), "{r}");
    }

    #[test]
    fn validate_is_pure() {
        let mut m = base();
        m.action_mut("A2").unwrap().priority = 9;
        assert_eq!(validate(&m), validate(&m));
    }
}
