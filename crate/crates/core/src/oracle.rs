//! Brute-force optimal planner: uniform-cost graph search over full states
//! with duplicate detection. Only meant for small instances where the whole
//! reachable space can be enumerated.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use num::Signed;

use crate::model::{rat, ActionId, FluentId, FluentSet, ModelError, PlanningProblem, Rational, State, Value};

#[derive(Clone, Debug)]
pub struct SearchLimits {
    pub max_expanded_states: usize,
    /// Successors with any numeric value beyond this magnitude are pruned,
    /// which turns an exhausted search into `Inconclusive`.
    pub max_numeric_magnitude: Rational,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_expanded_states: 1_000_000, max_numeric_magnitude: rat(1000) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    pub actions: Vec<String>,
    /// Index of the fired triple at each step.
    pub transitions: Vec<usize>,
    pub cost: Rational,
    /// States visited, starting with the initial state.
    pub trace: Vec<State>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved(Plan),
    Unsolvable,
    /// A limit truncated the search before it could decide.
    Inconclusive,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("step {step}: no triple of `{action}` is applicable")]
    NoApplicable { step: usize, action: String },
    #[error("step {step}: several triples of `{action}` are applicable")]
    Ambiguous { step: usize, action: String },
    #[error("step {step}: unknown action `{action}`")]
    UnknownAction { step: usize, action: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

struct Node {
    state: State,
    g: Rational,
    parent: Option<(usize, usize)>,
    closed: bool,
}

fn out_of_range(s: &State, limit: &Rational) -> bool {
    s.0.iter().any(|v| matches!(v, Value::Num(n) if n.abs() > *limit))
}

/// Cost-optimal plan by uniform-cost search. Ties between equal-cost
/// frontier nodes are broken by insertion order.
pub fn solve(pp: &PlanningProblem, limits: &SearchLimits) -> Result<SolveOutcome, ModelError> {
    let mut nodes = vec![Node { state: pp.init.clone(), g: rat(0), parent: None, closed: false }];
    let mut index: HashMap<State, usize> = HashMap::from([(pp.init.clone(), 0)]);
    let mut frontier = BinaryHeap::from([Reverse((rat(0), 0u64, 0usize))]);
    let mut seq = 1u64;
    let mut expanded = 0usize;
    let mut truncated = false;

    while let Some(Reverse((g, _, id))) = frontier.pop() {
        if nodes[id].closed || g > nodes[id].g {
            continue;
        }
        if pp.goal.eval(&nodes[id].state)? {
            return Ok(SolveOutcome::Solved(extract(pp, &nodes, id)));
        }
        nodes[id].closed = true;
        expanded += 1;
        if expanded > limits.max_expanded_states {
            return Ok(SolveOutcome::Inconclusive);
        }
        let state = nodes[id].state.clone();
        for (ti, t) in pp.transitions.iter().enumerate() {
            if !t.precondition.eval(&state)? {
                continue;
            }
            let next = t.apply_unchecked(&state)?;
            if out_of_range(&next, &limits.max_numeric_magnitude) {
                truncated = true;
                continue;
            }
            let cost = &g + &t.cost;
            match index.get(&next) {
                Some(&n) => {
                    if !nodes[n].closed && cost < nodes[n].g {
                        nodes[n].g = cost.clone();
                        nodes[n].parent = Some((id, ti));
                        frontier.push(Reverse((cost, seq, n)));
                        seq += 1;
                    }
                }
                None => {
                    let n = nodes.len();
                    index.insert(next.clone(), n);
                    nodes.push(Node { state: next, g: cost.clone(), parent: Some((id, ti)), closed: false });
                    frontier.push(Reverse((cost, seq, n)));
                    seq += 1;
                }
            }
        }
    }
    Ok(if truncated { SolveOutcome::Inconclusive } else { SolveOutcome::Unsolvable })
}

fn extract(pp: &PlanningProblem, nodes: &[Node], goal: usize) -> Plan {
    let mut steps = Vec::new();
    let mut at = goal;
    while let Some((parent, ti)) = nodes[at].parent {
        steps.push((ti, at));
        at = parent;
    }
    steps.reverse();
    let mut plan = Plan { actions: vec![], transitions: vec![], cost: nodes[goal].g.clone(), trace: vec![pp.init.clone()] };
    for (ti, node) in steps {
        plan.actions.push(pp.action_name(pp.transitions[ti].action).to_string());
        plan.transitions.push(ti);
        plan.trace.push(nodes[node].state.clone());
    }
    plan
}

/// Executes `plan` by action name, firing at each step the unique applicable
/// triple of that action, and returns the trace projected onto `project_to`.
pub fn replay(pp: &PlanningProblem, plan: &Plan, project_to: &FluentSet) -> Result<Vec<Vec<Value>>, ReplayError> {
    let by_name: HashMap<&str, ActionId> =
        pp.actions.iter().enumerate().map(|(i, a)| (a.as_str(), ActionId(i as u32))).collect();
    let mut by_action: HashMap<ActionId, Vec<usize>> = HashMap::new();
    for (i, t) in pp.transitions.iter().enumerate() {
        by_action.entry(t.action).or_default().push(i);
    }
    let projection: Vec<FluentId> = project_to.iter().copied().collect();
    let mut state = pp.init.clone();
    let mut trace = vec![state.project(&projection)];
    for (step, name) in plan.actions.iter().enumerate() {
        let action = *by_name
            .get(name.as_str())
            .ok_or_else(|| ReplayError::UnknownAction { step, action: name.clone() })?;
        let mut applicable = None;
        for &ti in by_action.get(&action).into_iter().flatten() {
            if pp.transitions[ti].precondition.eval(&state)? {
                if applicable.is_some() {
                    return Err(ReplayError::Ambiguous { step, action: name.clone() });
                }
                applicable = Some(ti);
            }
        }
        let ti = applicable.ok_or_else(|| ReplayError::NoApplicable { step, action: name.clone() })?;
        state = pp.transitions[ti].apply_unchecked(&state)?;
        trace.push(state.project(&projection));
    }
    Ok(trace)
}
