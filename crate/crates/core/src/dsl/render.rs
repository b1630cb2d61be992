use std::fmt::Write;

use crate::model::{ArrivalKind, ArrivalPattern, SystemModel};

/// Canonical text for a model. `parse(render(m)) == m` for every model whose
/// identifiers are valid `.rts` identifiers.
pub fn render(model: &SystemModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "system {}", quote(&model.name));
    for t in &model.transactions {
        out.push('\n');
        let _ = writeln!(out, "transaction {} {{", t.id);
        let _ = writeln!(out, "  external {} {}", t.external.id, pattern(&t.external.pattern));
        for a in &t.actions {
            let _ = writeln!(
                out,
                "  action {} trigger={} owner={} priority={} deadline={} {{",
                a.id,
                a.trigger,
                name(&a.owner),
                a.priority,
                a.deadline
            );
            for s in a.sub_actions() {
                let _ = write!(out, "    sub {} exec={}", s.id, s.cost);
                if let Some(e) = &s.emission {
                    let _ = write!(out, " emits {} {}", e.kind, e.event);
                }
                if s.reply {
                    out.push_str(" reply");
                }
                out.push('\n');
            }
            out.push_str("  }\n");
        }
        out.push_str("}\n");
    }
    out
}

fn pattern(p: &ArrivalPattern) -> String {
    let mut s = match p.kind {
        ArrivalKind::Periodic => format!("periodic period={}", p.outer_period),
        ArrivalKind::Aperiodic => format!("aperiodic min_interarrival={}", p.outer_period),
        ArrivalKind::SporadicallyPeriodic => format!(
            "sporadic outer={} inner={} burst={}",
            p.outer_period, p.inner_period, p.burst
        ),
    };
    if p.jitter > 0 {
        let _ = write!(s, " jitter={}", p.jitter);
    }
    s
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn name(s: &str) -> String {
    if is_ident(s) {
        s.to_owned()
    } else {
        quote(s)
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::model::{Action, SubAction, Transaction};

    #[test]
    fn minimal_layout() {
        let m = SystemModel::new("mini").with_transaction(
            Transaction::new("T", "E", ArrivalPattern::periodic(10, 0)).with_action(Action::new(
                "A",
                "E",
                "Cap",
                1,
                10,
                vec![SubAction::new("a", 5)],
            )),
        );
        let expected = "system \"mini\"\n\ntransaction T {\n  external E periodic period=10\n  action A trigger=E owner=Cap priority=1 deadline=10 {\n    sub a exec=5\n  }\n}\n";
        assert_eq!(render(&m), expected);
        assert_eq!(parse(expected).unwrap(), m);
    }

    #[test]
    fn sporadic_without_jitter() {
        let p = ArrivalPattern::sporadic(900, 300, 3, 0);
        assert_eq!(pattern(&p), "sporadic outer=900 inner=300 burst=3");
        assert_eq!(
            pattern(&p.with_jitter(4)),
            "sporadic outer=900 inner=300 burst=3 jitter=4"
        );
        assert_eq!(
            pattern(&ArrivalPattern::aperiodic(200, 5)),
            "aperiodic min_interarrival=200 jitter=5"
        );
    }

    #[test]
    fn odd_names_are_quoted() {
        let m = SystemModel::new("a \"quoted\" \\ name").with_transaction(
            Transaction::new("T", "E", ArrivalPattern::periodic(10, 0)).with_action(Action::new(
                "A",
                "E",
                "Roll Gap",
                1,
                10,
                vec![SubAction::new("a", 5)],
            )),
        );
        assert_eq!(parse(&render(&m)).unwrap(), m);
    }
}
