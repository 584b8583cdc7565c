use std::collections::BTreeMap;

use super::{ScopeError, ScopeResult};
use crate::logic::{to_cnf, Cnf};
use crate::model::{ActionId, CaeTriple, FluentId, FluentSet, PlanningProblem, State};
use crate::oracle::{Plan, ReplayError};

/// The scoped projection as a standalone problem over `j_rel ∪ j_cl`, with
/// one triple per quotient. Causally linked fluents stay in the problem so
/// every precondition clause remains well defined.
#[derive(Clone, Debug)]
pub struct ReducedProblem {
    pub problem: PlanningProblem,
    /// Reduced fluent id -> original fluent id.
    pub fluent_map: Vec<FluentId>,
    /// Reduced transition index -> quotient index in the scope result.
    pub quotient_of: Vec<usize>,
}

impl ReducedProblem {
    pub fn build(pp: &PlanningProblem, scope: &ScopeResult, clause_cap: usize) -> Result<Self, ScopeError> {
        let kept: FluentSet = scope.j_rel.union(&scope.j_cl).copied().collect();
        let fluent_map: Vec<FluentId> = kept.iter().copied().collect();
        let index: BTreeMap<FluentId, FluentId> =
            fluent_map.iter().enumerate().map(|(i, f)| (*f, FluentId(i as u32))).collect();
        let remap = |f: FluentId| index[&f];
        let restrict = |cnf: &Cnf, what: &str| -> Result<(), ScopeError> {
            match cnf.vars().iter().find(|f| !kept.contains(f)) {
                Some(f) => Err(ScopeError::Inconsistent(format!("{what} mentions pruned fluent {}", pp.fluent_name(*f)))),
                None => Ok(()),
            }
        };

        let mut actions = Vec::with_capacity(scope.quotients.len());
        let mut transitions = Vec::with_capacity(scope.quotients.len());
        for (qi, q) in scope.quotients.iter().enumerate() {
            let cnf = to_cnf(&q.precondition, clause_cap)?;
            restrict(&cnf, "a quotient precondition")?;
            let name: Vec<&str> = q.actions.iter().map(|a| pp.action_name(*a)).collect();
            actions.push(name.join("|"));
            transitions.push(CaeTriple {
                precondition: cnf.to_formula().map_fluents(&remap),
                action: ActionId(qi as u32),
                effects: q.effects.iter().map(|(f, e)| (remap(*f), e.map_fluents(&remap))).collect(),
                cost: q.cost.clone(),
            });
        }
        let goal = to_cnf(&pp.goal, clause_cap)?;
        restrict(&goal, "the goal")?;
        let problem = PlanningProblem {
            fluents: fluent_map.iter().map(|f| pp.fluent(*f).clone()).collect(),
            actions,
            transitions,
            init: State(pp.init.project(&fluent_map)),
            goal: goal.to_formula().map_fluents(&remap),
        };
        Ok(ReducedProblem { problem, fluent_map, quotient_of: (0..scope.quotients.len()).collect() })
    }

    /// Positions of `fluents` inside the reduced state vector.
    pub fn positions_of(&self, fluents: &FluentSet) -> Vec<FluentId> {
        self.fluent_map
            .iter()
            .enumerate()
            .filter(|(_, f)| fluents.contains(f))
            .map(|(i, _)| FluentId(i as u32))
            .collect()
    }
}

/// Lifts a plan of the reduced problem to the original one: each step fires
/// an applicable member triple of the quotient the step used.
pub fn lift_plan(
    pp: &PlanningProblem,
    scope: &ScopeResult,
    reduced: &ReducedProblem,
    plan: &Plan,
) -> Result<Plan, ReplayError> {
    let mut state = pp.init.clone();
    let mut lifted = Plan { actions: vec![], transitions: vec![], cost: crate::model::rat(0), trace: vec![state.clone()] };
    for (step, &rt) in plan.transitions.iter().enumerate() {
        let q = &scope.quotients[reduced.quotient_of[rt]];
        let mut fired = None;
        for &m in &q.members {
            if pp.transitions[m].is_applicable(&state)? {
                fired = Some(m);
                break;
            }
        }
        let m = fired.ok_or_else(|| ReplayError::NoApplicable { step, action: reduced.problem.actions[rt].clone() })?;
        let t = &pp.transitions[m];
        state = t.apply_unchecked(&state)?;
        lifted.actions.push(pp.action_name(t.action).to_string());
        lifted.transitions.push(m);
        lifted.cost += &t.cost;
        lifted.trace.push(state.clone());
    }
    Ok(lifted)
}

/// The original problem restricted to triples of retained actions. All
/// fluents are kept, mirroring operator-level pruning of task files.
pub fn pruned_problem(pp: &PlanningProblem, scope: &ScopeResult) -> PlanningProblem {
    PlanningProblem {
        transitions: pp.transitions.iter().filter(|t| scope.retained_actions.contains(&t.action)).cloned().collect(),
        ..pp.clone()
    }
}
