//! Decide and synthesize terminating solutions of distributed tasks under
//! message adversaries.
//!
//! The pipeline: explore the full-information execution graph
//! ([`execution`]), pick an execution cut and build its system slice
//! ([`slicing`]), put the task's valid outputs on it as a sheaf ([`sheaf`]),
//! search for a global section, turn it into a decision map and check that
//! map on every run prefix ([`synthesis`], [`verifier`]).

pub mod adversary;
pub mod cli;
pub mod domain;
pub mod error;
pub mod execution;
pub mod linalg;
pub mod sheaf;
pub mod slicing;
pub mod synthesis;
pub mod task;
pub mod verifier;

pub use adversary::{Adversary, RoundDigraph};
pub use domain::{Configuration, InputVector, OutputVector, ProcessId, Rational, Value, Vector, ViewId, ViewRegistry};
pub use error::{Error, Result};
pub use execution::{NodeId, SystemFrame};
pub use sheaf::{find_section, Section, TaskSheaf};
pub use slicing::{CutStrategy, ExecutionCut, SystemSlice};
pub use synthesis::{synthesize, DecisionMap, SynthesisReport, SynthesisVerdict};
pub use task::Task;
pub use verifier::{verify, Verdict};
