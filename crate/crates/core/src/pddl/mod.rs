//! PDDL 2.1 (level 2, no conditional effects) frontend: parsing, grounding
//! and printing.

pub mod ast;
mod ground;
mod print;
pub mod sexpr;

pub use ast::{parse_domain, parse_problem, Domain, Problem};
pub use ground::{ground, Binding, GroundAtom, GroundOptions, GroundedTask, DEFAULT_MAX_ACTIONS};
pub use print::{print_domain, print_problem};
pub use sexpr::Loc;

use crate::model::ModelError;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum PddlError {
    #[error("parse error at {loc}: {message}")]
    Parse { loc: Loc, message: String },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("{0}")]
    Semantic(String),
    #[error("numeric fluent {0} has no initial value")]
    UndefinedNumeric(String),
    #[error("grounding would produce {count} candidate actions, above the cap of {cap}")]
    GroundingExplosion { count: usize, cap: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Parses a domain and a problem text.
pub fn parse_pddl(domain: &str, problem: &str) -> Result<(Domain, Problem), PddlError> {
    let d = parse_domain(domain)?;
    let p = parse_problem(problem)?;
    if !p.domain.is_empty() && p.domain != d.name {
        log::warn!("problem names domain `{}` but the domain is `{}`", p.domain, d.name);
    }
    Ok((d, p))
}

/// Parses and grounds in one step.
pub fn load(domain: &str, problem: &str, opts: &GroundOptions) -> Result<GroundedTask, PddlError> {
    let (d, p) = parse_pddl(domain, problem)?;
    ground(&d, &p, opts)
}

#[cfg(test)]
mod tests;
