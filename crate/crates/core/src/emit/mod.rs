//! Writing pruned task files and the scoping report.

mod report;

pub use report::{stats, FluentClasses, ScopeReport, StateSize};

use std::collections::{BTreeSet, HashMap};

use crate::logic::to_cnf;
use crate::model::{FluentId, Formula, PlanningProblem};
use crate::pddl::ast::{Condition, Effect, InitEntry, NumExpr, Term};
use crate::pddl::{ground, parse_pddl, print_domain, print_problem, Domain, GroundOptions, GroundedTask, PddlError, Problem};
use crate::sas::{filter_operators, SasTask};
use crate::scoping::ScopeResult;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum EmitError {
    #[error("emitted task is inconsistent with the scoped task: {0}")]
    Inconsistent(String),
    #[error("emitted task does not load: {0}")]
    Reload(#[from] PddlError),
}

#[derive(Clone, Debug)]
pub struct EmittedPddl {
    pub domain: String,
    pub problem: String,
    pub removed_objects: Vec<String>,
    pub removed_schemas: Vec<String>,
}

fn objects_in_condition(c: &Condition, out: &mut BTreeSet<String>) {
    match c {
        Condition::And(cs) | Condition::Or(cs) => cs.iter().for_each(|c| objects_in_condition(c, out)),
        Condition::Not(x) | Condition::Exists(_, x) | Condition::Forall(_, x) => objects_in_condition(x, out),
        Condition::Imply(a, b) => {
            objects_in_condition(a, out);
            objects_in_condition(b, out);
        }
        Condition::Atom(a) => objects_in_terms(&a.args, out),
        Condition::Equal(a, b) => objects_in_terms([a.clone(), b.clone()].as_slice(), out),
        Condition::Compare(_, a, b) => {
            objects_in_num(a, out);
            objects_in_num(b, out);
        }
    }
}

fn objects_in_terms(ts: &[Term], out: &mut BTreeSet<String>) {
    out.extend(ts.iter().filter_map(|t| match t {
        Term::Obj(o) => Some(o.clone()),
        Term::Var(_) => None,
    }));
}

fn objects_in_num(e: &NumExpr, out: &mut BTreeSet<String>) {
    match e {
        NumExpr::Const(_) => {}
        NumExpr::Fn(a) => objects_in_terms(&a.args, out),
        NumExpr::Neg(x) => objects_in_num(x, out),
        NumExpr::Bin(_, a, b) => {
            objects_in_num(a, out);
            objects_in_num(b, out);
        }
    }
}

fn schema_uses_object(effects: &[Effect], pre: Option<&Condition>, out: &mut BTreeSet<String>) {
    if let Some(p) = pre {
        objects_in_condition(p, out);
    }
    for e in effects {
        match e {
            Effect::Add(a) | Effect::Del(a) => objects_in_terms(&a.args, out),
            Effect::Numeric(_, a, v) => {
                objects_in_terms(&a.args, out);
                objects_in_num(v, out);
            }
            Effect::Forall(_, body) => schema_uses_object(body, None, out),
        }
    }
}

/// Objects the pruned problem must keep: those of relevant and causally
/// linked fluents, of retained actions and of every fluent those actions
/// or the goal touch.
fn kept_objects(problem: &Problem, task: &GroundedTask, scope: &ScopeResult) -> BTreeSet<String> {
    let pp = &task.problem;
    let mut fluents: BTreeSet<FluentId> = scope.j_rel.union(&scope.j_cl).copied().collect();
    fluents.extend(pp.goal.vars());
    let mut keep = BTreeSet::new();
    for t in pp.transitions.iter().filter(|t| scope.retained_actions.contains(&t.action)) {
        fluents.extend(t.precondition.vars());
        for (f, e) in &t.effects {
            fluents.insert(*f);
            fluents.extend(e.reads());
        }
    }
    for a in &scope.retained_actions {
        keep.extend(task.bindings[a.index()].args.iter().cloned());
    }
    for f in fluents {
        keep.extend(task.atoms[f.index()].args.iter().cloned());
    }
    objects_in_condition(&problem.goal, &mut keep);
    if let Some(m) = &problem.metric {
        objects_in_num(&m.expr, &mut keep);
    }
    keep
}

/// Pruned domain and problem text. Objects outside [`kept_objects`] and
/// schemas without a retained grounding are removed; the result is loaded
/// again and compared with the scoped task.
pub fn emit_pddl(
    domain: &Domain,
    problem: &Problem,
    task: &GroundedTask,
    scope: &ScopeResult,
    opts: &GroundOptions,
) -> Result<EmittedPddl, EmitError> {
    let declared: BTreeSet<&str> = domain.constants.iter().chain(&problem.objects).map(|o| o.name.as_str()).collect();
    for a in &scope.retained_actions {
        let b = &task.bindings[a.index()];
        if let Some(o) = b.args.iter().find(|o| !declared.contains(o.as_str())) {
            return Err(EmitError::Inconsistent(format!("retained action `{}` references unknown object `{o}`", task.problem.action_name(*a))));
        }
    }
    let keep = kept_objects(problem, task, scope);

    let retained_schemas: BTreeSet<&str> = scope.retained_actions.iter().map(|a| task.bindings[a.index()].schema.as_str()).collect();
    let mut d = domain.clone();
    let removed_schemas = d.actions.iter().filter(|a| !retained_schemas.contains(a.name.as_str())).map(|a| a.name.clone()).collect();
    d.actions.retain(|a| retained_schemas.contains(a.name.as_str()));
    let mut schema_objects = BTreeSet::new();
    for a in &d.actions {
        schema_uses_object(&a.effects, a.precondition.as_ref(), &mut schema_objects);
    }

    let mut p = problem.clone();
    let keeps = |o: &String| keep.contains(o) || schema_objects.contains(o);
    let removed_objects = p.objects.iter().filter(|o| !keeps(&o.name)).map(|o| o.name.clone()).collect();
    p.objects.retain(|o| keeps(&o.name));
    p.init.retain(|e| match e {
        InitEntry::Fact(_, args) | InitEntry::Value(_, args, _) => args.iter().all(keeps),
    });

    let out = EmittedPddl { domain: print_domain(&d), problem: print_problem(&p), removed_objects, removed_schemas };
    let (d2, p2) = parse_pddl(&out.domain, &out.problem)?;
    let again = ground(&d2, &p2, opts)?;
    let retained = scope.retained_actions.iter().map(|a| task.problem.action_name(*a));
    equivalent_restriction(&task.problem, &again.problem, retained).map_err(EmitError::Inconsistent)?;
    Ok(out)
}

/// The SAS+ text with non-retained operators removed. Variables stay.
pub fn emit_sas(task: &SasTask, scope: &ScopeResult) -> String {
    filter_operators(task, |i| scope.retained_actions.contains(&crate::model::ActionId(i as u32)))
}

fn cnf_key(f: &Formula) -> Option<BTreeSet<crate::logic::Clause>> {
    to_cnf(f, crate::logic::DEFAULT_CLAUSE_CAP).ok().map(|c| c.clauses.into_iter().collect())
}

fn same_formula(a: &Formula, b: &Formula) -> bool {
    a == b || matches!((cnf_key(a), cnf_key(b)), (Some(x), Some(y)) if x == y)
}

/// Checks that `small` behaves like `big` on every action it keeps and on
/// every action named in `required`. Fluents of `big` missing from `small`
/// are replaced by their initial value, so kept actions may only write that
/// value to them.
pub fn equivalent_restriction<'a>(
    big: &PlanningProblem,
    small: &PlanningProblem,
    required: impl IntoIterator<Item = &'a str>,
) -> Result<(), String> {
    let mut to_big = Vec::with_capacity(small.fluents.len());
    for f in &small.fluents {
        let id = big.fluent_by_name(&f.name).ok_or_else(|| format!("unknown fluent {}", f.name))?;
        if big.fluent(id).kind != f.kind {
            return Err(format!("fluent {} changed kind", f.name));
        }
        to_big.push(id);
    }
    for (i, v) in small.init.0.iter().enumerate() {
        if big.initial_value(to_big[i]) != v {
            return Err(format!("initial value of {} differs", small.fluents[i].name));
        }
    }
    let present: BTreeSet<FluentId> = to_big.iter().copied().collect();
    let fold = |f: &Formula| f.substitute(&|x| (!present.contains(&x)).then(|| big.initial_value(x).clone()));
    let map = |f: FluentId| to_big[f.index()];

    if !same_formula(&fold(&big.goal), &small.goal.map_fluents(&map)) {
        return Err("goals differ".into());
    }

    let mut big_by_action: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, t) in big.transitions.iter().enumerate() {
        big_by_action.entry(big.action_name(t.action)).or_default().push(i);
    }
    let mut small_by_action: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, t) in small.transitions.iter().enumerate() {
        small_by_action.entry(small.action_name(t.action)).or_default().push(i);
    }
    let live = |name: &str| {
        big_by_action.get(name).is_some_and(|xs| xs.iter().any(|&i| fold(&big.transitions[i].precondition) != Formula::False))
    };
    for name in required {
        if small.action_by_name(name).is_none() && live(name) {
            return Err(format!("action {name} is missing"));
        }
    }
    for name in &small.actions {
        if big.action_by_name(name).is_none() {
            return Err(format!("unexpected action {name}"));
        }
        let xs = big_by_action.get(name.as_str()).map_or(&[][..], Vec::as_slice);
        let ys = small_by_action.get(name.as_str()).map_or(&[][..], Vec::as_slice);
        let xs: Vec<_> = xs.iter().map(|&i| &big.transitions[i]).filter(|t| fold(&t.precondition) != Formula::False).collect();
        if xs.len() != ys.len() {
            return Err(format!("action {name} has {} rules instead of {}", ys.len(), xs.len()));
        }
        for (x, &y) in xs.iter().zip(ys) {
            let y = &small.transitions[y];
            let effects: std::collections::BTreeMap<_, _> = y.effects.iter().map(|(f, e)| (map(*f), e.map_fluents(&map))).collect();
            let constant = |f: FluentId| (!present.contains(&f)).then(|| big.initial_value(f).clone());
            let mut expected = std::collections::BTreeMap::new();
            for (f, e) in &x.effects {
                if present.contains(f) {
                    expected.insert(*f, e.substitute(&constant));
                } else if !e.preserves(big.initial_value(*f)) {
                    return Err(format!("action {name} changes dropped fluent {}", big.fluent_name(*f)));
                }
            }
            if x.cost != y.cost || expected != effects || !same_formula(&fold(&x.precondition), &y.precondition.map_fluents(&map)) {
                return Err(format!("action {name} changed"));
            }
        }
    }
    Ok(())
}

/// Same fluents, actions, initial state, goal and rules up to renaming.
pub fn isomorphic(a: &PlanningProblem, b: &PlanningProblem) -> Result<(), String> {
    if a.fluents.len() != b.fluents.len() || a.actions.len() != b.actions.len() {
        return Err(format!(
            "sizes differ: {} fluents and {} actions against {} and {}",
            a.fluents.len(),
            a.actions.len(),
            b.fluents.len(),
            b.actions.len()
        ));
    }
    equivalent_restriction(a, b, a.actions.iter().map(String::as_str))
}
