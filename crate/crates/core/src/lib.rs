//! End-to-end schedulability analysis for fixed-priority, single-threaded,
//! run-to-completion designs.
//!
//! A design is a set of transactions. Each transaction is triggered by an
//! external event (periodic, aperiodic or sporadically periodic, with
//! release jitter) and runs a causal set of actions built from sub-actions
//! that may send signals or make synchronous calls. The crate parses the
//! `.rts` text format ([`dsl`]), validates the model ([`model`]), derives
//! the scheduling jobs ([`derive`]), bounds worst-case end-to-end response
//! times ([`analysis`]) and cross-checks them with a discrete-event
//! simulator ([`sim`]).

pub mod analysis;
pub mod derive;
pub mod dsl;
pub mod fixtures;
pub mod gantt;
pub mod generate;
pub mod model;
pub mod report;
pub mod sim;

pub use analysis::{analyze, AnalysisConfig, AnalysisReport, Verdict, WcrtResult};
pub use dsl::{parse, render, ParseError};
pub use model::{validate, SystemModel, Tick, ValidationReport};
