//! Relevance analysis for grounded planning tasks.
//!
//! Given a grounded task (parsed from PDDL 2.1 or from a SAS+ translator
//! file) the scoping pass computes a projection onto the fluents that can
//! matter for reaching the goal optimally, classifies every other fluent as
//! causally linked or irrelevant, and reports which actions survive. The
//! emitters write the pruned task back out; the oracle planner checks the
//! guarantees on small instances.

pub mod emit;
pub mod logic;
pub mod model;
pub mod oracle;
pub mod par;
pub mod pddl;
pub mod sas;
pub mod scoping;
pub mod synth;
pub mod verify;
