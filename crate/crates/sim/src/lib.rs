//! Executable case studies for the flow framework: a Harris list and the
//! give-up dictionary template, driven by an interleaving explorer that
//! checks the structures' invariants after every step.

pub mod actions;
pub mod bptree;
pub mod dict;
pub mod harris;
pub mod lin;
pub mod monitor;
pub mod seqspec;
pub mod sortedlist;
pub mod step;
pub mod workload;
