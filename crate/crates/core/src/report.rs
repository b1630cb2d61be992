//! Machine-readable and tabular analysis reports.
//!
//! The JSON field names are a public contract, versioned by
//! `schema_version`.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::{AnalysisConfig, AnalysisReport, StageBound, Verdict};
use crate::model::{SystemModel, Tick};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utilization {
    pub numerator: u64,
    pub denominator: u64,
    /// Rounded to six decimal places.
    pub decimal: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub policy: String,
    pub max_window: Tick,
    pub stages: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransactionReport {
    pub id: String,
    pub wcrt: Option<Tick>,
    pub deadline: Tick,
    pub blocking: Tick,
    pub verdict: Verdict,
    pub instances_examined: u64,
    pub responses: Vec<Tick>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool_version: String,
    pub model: String,
    pub verdict: Verdict,
    pub utilization: Utilization,
    pub config: ConfigEcho,
    pub transactions: Vec<TransactionReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<StageBound>,
}

impl ReportDocument {
    pub fn new(model: &SystemModel, config: &AnalysisConfig, report: &AnalysisReport) -> Self {
        let u = report.utilization;
        let exact = *u.numer() as f64 / *u.denom() as f64;
        let verdict = if report.schedulable() {
            Verdict::Schedulable
        } else if report.results.iter().any(|r| r.verdict == Verdict::Infeasible) {
            Verdict::Infeasible
        } else {
            Verdict::Unbounded
        };
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            model: model.name.clone(),
            verdict,
            utilization: Utilization {
                numerator: *u.numer(),
                denominator: *u.denom(),
                decimal: (exact * 1e6).round() / 1e6,
            },
            config: ConfigEcho {
                policy: "run-to-completion".to_owned(),
                max_window: report.max_window,
                stages: config.stages,
            },
            transactions: report
                .results
                .iter()
                .map(|r| TransactionReport {
                    id: r.transaction.clone(),
                    wcrt: r.wcrt,
                    deadline: r.deadline,
                    blocking: r.blocking,
                    verdict: r.verdict,
                    instances_examined: r.instances_examined,
                    responses: r.responses.clone(),
                })
                .collect(),
            stages: report.stages.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Aligned table, one row per transaction.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model: {}", self.model);
        let _ = writeln!(
            out,
            "utilization: {}/{} ({:.6})",
            self.utilization.numerator, self.utilization.denominator, self.utilization.decimal
        );
        let rows: Vec<[String; 6]> = self
            .transactions
            .iter()
            .map(|t| {
                [
                    t.id.clone(),
                    t.wcrt.map_or_else(|| "-".to_owned(), |w| w.to_string()),
                    t.deadline.to_string(),
                    t.blocking.to_string(),
                    t.instances_examined.to_string(),
                    verdict_label(t.verdict).to_owned(),
                ]
            })
            .collect();
        let header = ["transaction", "wcrt", "deadline", "blocking", "instances", "verdict"];
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[&str]| {
            let mut s = String::new();
            for (i, (c, w)) in cells.iter().zip(widths).enumerate() {
                if i == 0 {
                    let _ = write!(s, "{c:<w$}");
                } else {
                    let _ = write!(s, "  {c:>w$}");
                }
            }
            s.trim_end().to_owned()
        };
        let _ = writeln!(out, "{}", line(&header));
        for row in &rows {
            let cells: Vec<&str> = row.iter().map(String::as_str).collect();
            let _ = writeln!(out, "{}", line(&cells));
        }
        if !self.stages.is_empty() {
            let _ = writeln!(out, "stage bounds:");
            for s in &self.stages {
                let wcrt = s.wcrt.map_or_else(|| "-".to_owned(), |w| w.to_string());
                let _ = writeln!(
                    out,
                    "  {} ({}): jitter {} wcrt {}",
                    s.root, s.transaction, s.jitter, wcrt
                );
            }
        }
        let _ = writeln!(out, "overall: {}", verdict_label(self.verdict));
        out
    }
}

fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Schedulable => "schedulable",
        Verdict::Infeasible => "infeasible",
        Verdict::Unbounded => "unbounded",
    }
}
