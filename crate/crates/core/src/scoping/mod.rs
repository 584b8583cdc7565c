//! Task scoping: quotient transition systems over a kept fluent set and the
//! fixed point that grows the relevant set until the projection is scoped.
//!
//! A projection onto `J` is *scoped* when every CNF clause of every quotient
//! precondition either mentions only fluents in `J`, or holds in the initial
//! state and mentions no fluent that any quotient may change as a side
//! effect. Scoped projections are sound and keep an optimal plan whenever
//! every goal fluent is relevant or causally linked.

mod reduced;

use std::collections::{BTreeMap, BTreeSet};

use crate::logic::{clause_over, clause_true_in, to_cnf, Clause, Cnf, CnfBlowup, DEFAULT_CLAUSE_CAP};
use crate::model::{
    ActionId, CaeTriple, EffectFn, FluentId, FluentSet, Formula, ModelError, PlanningProblem, Rational,
    State, Value,
};
use crate::par::{self, Exec};

pub use reduced::{lift_plan, pruned_problem, ReducedProblem};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ScopeError {
    #[error(transparent)]
    Cnf(#[from] CnfBlowup),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("scoped system is inconsistent: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Copy, Debug)]
pub struct ScopeOptions {
    pub clause_cap: usize,
    pub exec: Exec,
    /// Mutation switch for the verification harness: accept clauses that
    /// hold initially even when their fluents are side-affected. Produces
    /// unsound projections; never set it outside of testing the verifier.
    pub ignore_side_effects: bool,
}

impl Default for ScopeOptions {
    fn default() -> Self {
        ScopeOptions { clause_cap: DEFAULT_CLAUSE_CAP, exec: Exec::default(), ignore_side_effects: false }
    }
}

/// Merged representative of the triples that act identically on `J`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientCae {
    /// Disjunction of the member preconditions.
    pub precondition: Formula,
    pub actions: BTreeSet<ActionId>,
    /// Member effects restricted to `J`; never empty.
    pub effects: BTreeMap<FluentId, EffectFn>,
    /// Fluents outside `J` that some member changes.
    pub side_effects: FluentSet,
    /// Indices of the member triples in the source list.
    pub members: Vec<usize>,
    pub cost: Rational,
}

type Signature = (Vec<(FluentId, EffectFn)>, Rational);

fn signature(t: &CaeTriple, j: &FluentSet) -> Option<Signature> {
    let effects: Vec<(FluentId, EffectFn)> =
        t.effects.iter().filter(|(f, _)| j.contains(f)).map(|(f, e)| (*f, e.canonical())).collect();
    if effects.is_empty() {
        None
    } else {
        Some((effects, t.cost.clone()))
    }
}

/// Builds the transition system induced by `j`.
///
/// Triples are grouped by their canonical effects on `j` (and their cost, so
/// that merged representatives never misprice an action); groups that do not
/// touch `j` are dropped. Output is sorted by signature.
pub fn reduce_transitions(transitions: &[CaeTriple], j: &FluentSet, exec: Exec) -> Vec<QuotientCae> {
    let keys = par::map(exec, transitions, |t| signature(t, j));
    let mut parts: BTreeMap<Signature, Vec<usize>> = BTreeMap::new();
    for (i, key) in keys.into_iter().enumerate() {
        if let Some(key) = key {
            parts.entry(key).or_default().push(i);
        }
    }
    parts
        .into_iter()
        .map(|((_, cost), members)| {
            let first = &transitions[members[0]];
            let precondition = if members.len() == 1 {
                first.precondition.clone()
            } else {
                Formula::Or(members.iter().map(|&m| transitions[m].precondition.clone()).collect())
            };
            let mut side_effects = FluentSet::new();
            let mut actions = BTreeSet::new();
            for &m in &members {
                actions.insert(transitions[m].action);
                side_effects.extend(transitions[m].affected().filter(|f| !j.contains(f)));
            }
            QuotientCae {
                precondition,
                actions,
                effects: first.effects.iter().filter(|(f, _)| j.contains(f)).map(|(f, e)| (*f, e.clone())).collect(),
                side_effects,
                members,
                cost,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScopedCheck {
    Scoped,
    /// A clause that is neither over `J` nor a valid causal link.
    NotScoped { quotient: usize, clause: Clause },
}

impl ScopedCheck {
    pub fn is_scoped(&self) -> bool {
        matches!(self, ScopedCheck::Scoped)
    }
}

struct ClauseView<'a> {
    j: &'a FluentSet,
    side: &'a FluentSet,
    init: &'a State,
}

impl ClauseView<'_> {
    fn over_j(&self, c: &Clause) -> bool {
        clause_over(c, self.j)
    }

    fn causal_link(&self, c: &Clause) -> Result<bool, ModelError> {
        Ok(clause_true_in(c, self.init)? && c.vars().is_disjoint(self.side))
    }
}

fn side_effects_of(quotients: &[QuotientCae], ignore: bool) -> FluentSet {
    if ignore {
        return FluentSet::new();
    }
    quotients.iter().flat_map(|q| q.side_effects.iter().copied()).collect()
}

fn preconditions_cnf(quotients: &[QuotientCae], opts: &ScopeOptions) -> Result<Vec<Cnf>, CnfBlowup> {
    par::try_map(opts.exec, quotients, |q| to_cnf(&q.precondition, opts.clause_cap))
}

fn check_with(cnfs: &[Cnf], view: &ClauseView) -> Result<ScopedCheck, ModelError> {
    for (qi, cnf) in cnfs.iter().enumerate() {
        for c in &cnf.clauses {
            if !view.over_j(c) && !view.causal_link(c)? {
                return Ok(ScopedCheck::NotScoped { quotient: qi, clause: c.clone() });
            }
        }
    }
    Ok(ScopedCheck::Scoped)
}

/// Decides whether the projection given by `quotients` over `j` is scoped.
pub fn is_scoped(
    quotients: &[QuotientCae],
    init: &State,
    j: &FluentSet,
    opts: &ScopeOptions,
) -> Result<ScopedCheck, ScopeError> {
    let cnfs = preconditions_cnf(quotients, opts)?;
    let side = side_effects_of(quotients, opts.ignore_side_effects);
    Ok(check_with(&cnfs, &ClauseView { j, side: &side, init })?)
}

/// Outcome of scoping: the fluent partition and the surviving transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopeResult {
    pub j_rel: FluentSet,
    pub j_cl: FluentSet,
    pub j_irrel: FluentSet,
    /// Terminal quotient system over `j_rel`, without the synthetic goal triple.
    pub quotients: Vec<QuotientCae>,
    pub retained_actions: BTreeSet<ActionId>,
    pub iterations: usize,
}

impl ScopeResult {
    pub fn deleted_actions(&self, pp: &PlanningProblem) -> usize {
        pp.actions.len() - self.retained_actions.len()
    }

    /// Quotients that change a relevant fluent while listing a causally
    /// linked fluent among their side effects. Always empty for a scoped
    /// result.
    pub fn causal_link_violations(&self) -> Vec<usize> {
        self.quotients
            .iter()
            .enumerate()
            .filter(|(_, q)| !q.side_effects.is_disjoint(&self.j_cl))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn names<'a>(&self, pp: &'a PlanningProblem, set: &FluentSet) -> Vec<&'a str> {
        set.iter().map(|f| pp.fluent_name(*f)).collect()
    }
}

/// The problem extended with the dummy goal fluent `g` and the triple
/// `(goal; doGoal; g <- true)`.
struct Augmented {
    transitions: Vec<CaeTriple>,
    init: State,
    goal_fluent: FluentId,
    goal_action: ActionId,
}

fn augment(pp: &PlanningProblem) -> Augmented {
    let goal_fluent = FluentId(pp.fluents.len() as u32);
    let goal_action = ActionId(pp.actions.len() as u32);
    let mut transitions = pp.transitions.clone();
    transitions.push(
        CaeTriple::new(pp.goal.clone(), goal_action, [(goal_fluent, EffectFn::SetTrue)]).with_cost(crate::model::rat(0)),
    );
    let mut init = pp.init.clone();
    init.0.push(Value::Bool(false));
    Augmented { transitions, init, goal_fluent, goal_action }
}

/// Runs the scoping fixed point on `pp`.
pub fn scope_task(pp: &PlanningProblem, opts: &ScopeOptions) -> Result<ScopeResult, ScopeError> {
    let aug = augment(pp);
    let mut j_rel: FluentSet = [aug.goal_fluent].into_iter().collect();
    let mut iterations = 0;
    let (quotients, cnfs, side) = loop {
        iterations += 1;
        let quotients = reduce_transitions(&aug.transitions, &j_rel, opts.exec);
        let cnfs = preconditions_cnf(&quotients, opts)?;
        let side = side_effects_of(&quotients, opts.ignore_side_effects);
        let view = ClauseView { j: &j_rel, side: &side, init: &aug.init };
        if check_with(&cnfs, &view)?.is_scoped() {
            break (quotients, cnfs, side);
        }
        let affected: FluentSet = j_rel.union(&side).copied().collect();
        let mut grown = j_rel.clone();
        for c in cnfs.iter().flat_map(|cnf| &cnf.clauses) {
            let vars = c.vars();
            if !clause_true_in(c, &aug.init)? || !vars.is_disjoint(&affected) {
                grown.extend(vars);
            }
        }
        debug_assert!(grown.len() > j_rel.len(), "an unscoped iteration must add a fluent");
        if grown.len() == j_rel.len() {
            return Err(ScopeError::Inconsistent("fixed point stalled before reaching a scoped projection".into()));
        }
        log::debug!("scoping iteration {iterations}: {} -> {} relevant fluents", j_rel.len(), grown.len());
        j_rel = grown;
    };

    let view = ClauseView { j: &j_rel, side: &side, init: &aug.init };
    let mut j_cl = FluentSet::new();
    for c in cnfs.iter().flat_map(|cnf| &cnf.clauses) {
        if view.causal_link(c)? {
            j_cl.extend(c.vars().into_iter().filter(|f| !j_rel.contains(f)));
        }
    }
    j_rel.remove(&aug.goal_fluent);
    let j_irrel: FluentSet = pp.fluent_ids().filter(|f| !j_rel.contains(f) && !j_cl.contains(f)).collect();
    let quotients: Vec<QuotientCae> =
        quotients.into_iter().filter(|q| !q.actions.contains(&aug.goal_action)).collect();
    let retained_actions = quotients.iter().flat_map(|q| q.actions.iter().copied()).collect();
    Ok(ScopeResult { j_rel, j_cl, j_irrel, quotients, retained_actions, iterations })
}

/// Rebuilds the terminal projection of `result` from scratch and checks it.
pub fn check_scoped(pp: &PlanningProblem, result: &ScopeResult, opts: &ScopeOptions) -> Result<ScopedCheck, ScopeError> {
    let aug = augment(pp);
    let mut j = result.j_rel.clone();
    j.insert(aug.goal_fluent);
    let quotients = reduce_transitions(&aug.transitions, &j, opts.exec);
    is_scoped(&quotients, &aug.init, &j, opts)
}
