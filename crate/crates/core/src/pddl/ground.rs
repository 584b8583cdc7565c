//! Grounding of a lifted domain and problem into a [`PlanningProblem`].
//!
//! Static predicates and functions are evaluated against the initial state
//! and folded into constants; quantifiers become finite conjunctions and
//! disjunctions over the typed objects. Each grounded action yields one
//! triple.

use std::collections::{BTreeMap, HashMap, HashSet};

use num::Zero;

use super::ast::{ArithOp, AssignOp, Atom, Condition, Domain, Effect, InitEntry, NumExpr, Problem, Term, Typed};
use super::PddlError;
use crate::model::{
    rat, ActionId, CaeTriple, EffectFn, Fluent, FluentId, FluentKind, Formula, LinearExpr, Literal, PlanningProblem,
    Rational, State, Value,
};
use crate::par::{self, Exec};

pub const DEFAULT_MAX_ACTIONS: usize = 1_000_000;

#[derive(Clone, Copy, Debug)]
pub struct GroundOptions {
    /// Upper bound on candidate parameter substitutions over all schemas.
    pub max_actions: usize,
    pub exec: Exec,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions { max_actions: DEFAULT_MAX_ACTIONS, exec: Exec::default() }
    }
}

/// A ground atom: predicate or function name plus object arguments.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub name: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn key(&self) -> String {
        if self.args.is_empty() {
            format!("({})", self.name)
        } else {
            format!("({} {})", self.name, self.args.join(" "))
        }
    }
}

/// Which schema and objects produced a grounded action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub schema: String,
    pub args: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct GroundedTask {
    pub problem: PlanningProblem,
    /// Atom behind each fluent, indexed like `problem.fluents`.
    pub atoms: Vec<GroundAtom>,
    /// Binding behind each action, indexed like `problem.actions`.
    pub bindings: Vec<Binding>,
}

struct Types {
    parents: HashMap<String, Vec<String>>,
}

impl Types {
    fn new(domain: &Domain) -> Self {
        let mut parents: HashMap<String, Vec<String>> = HashMap::from([("object".to_string(), vec![])]);
        for t in &domain.types {
            parents.entry(t.name.clone()).or_default().extend(t.types.iter().filter(|p| **p != t.name).cloned());
        }
        for t in &domain.types {
            for p in &t.types {
                parents.entry(p.clone()).or_default();
            }
        }
        Types { parents }
    }

    fn declared(&self, t: &str) -> bool {
        self.parents.contains_key(t)
    }

    fn is_subtype(&self, t: &str, of: &str) -> bool {
        if t == of || of == "object" {
            return true;
        }
        let mut seen = HashSet::new();
        let mut stack = vec![t];
        while let Some(x) = stack.pop() {
            if x == of {
                return true;
            }
            if seen.insert(x) {
                stack.extend(self.parents.get(x).into_iter().flatten().map(String::as_str));
            }
        }
        false
    }
}

struct World<'a> {
    types: Types,
    /// Objects in declaration order with their types.
    objects: Vec<Typed>,
    predicates: HashMap<&'a str, usize>,
    functions: HashMap<&'a str, usize>,
    dynamic_predicates: HashSet<String>,
    dynamic_functions: HashSet<String>,
    facts: HashSet<GroundAtom>,
    values: HashMap<GroundAtom, Rational>,
    cost_function: Option<String>,
}

impl World<'_> {
    fn objects_of(&self, types: &[String]) -> Vec<&str> {
        self.objects
            .iter()
            .filter(|o| o.types.iter().any(|ot| types.iter().any(|t| self.types.is_subtype(ot, t))))
            .map(|o| o.name.as_str())
            .collect()
    }
}

fn semantic(msg: impl Into<String>) -> PddlError {
    PddlError::Semantic(msg.into())
}

/// Atom table local to one grounding worker.
#[derive(Default)]
struct Interner {
    atoms: Vec<(GroundAtom, FluentKind)>,
    index: HashMap<GroundAtom, FluentId>,
}

impl Interner {
    fn intern(&mut self, atom: GroundAtom, kind: FluentKind) -> FluentId {
        if let Some(&id) = self.index.get(&atom) {
            return id;
        }
        let id = FluentId(self.atoms.len() as u32);
        self.index.insert(atom.clone(), id);
        self.atoms.push((atom, kind));
        id
    }
}

type Env = Vec<(String, String)>;

struct Grounder<'w, 'a> {
    world: &'w World<'a>,
    table: Interner,
}

enum Num {
    Defined(LinearExpr),
    /// Refers to a static function with no initial value.
    Undefined,
}

impl Grounder<'_, '_> {
    fn resolve(&self, t: &Term, env: &Env) -> Result<String, PddlError> {
        match t {
            Term::Obj(o) => {
                if self.world.objects.iter().any(|x| x.name == *o) {
                    Ok(o.clone())
                } else {
                    Err(semantic(format!("unknown object `{o}`")))
                }
            }
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(name, _)| name == v)
                .map(|(_, o)| o.clone())
                .ok_or_else(|| semantic(format!("unbound variable `{v}`"))),
        }
    }

    fn ground_atom(&self, a: &Atom, env: &Env, arities: &HashMap<&str, usize>, what: &str) -> Result<GroundAtom, PddlError> {
        match arities.get(a.name.as_str()) {
            None => return Err(semantic(format!("undeclared {what} `{}`", a.name))),
            Some(&n) if n != a.args.len() => {
                return Err(semantic(format!("{what} `{}` expects {n} argument(s), got {}", a.name, a.args.len())))
            }
            _ => {}
        }
        Ok(GroundAtom { name: a.name.clone(), args: a.args.iter().map(|t| self.resolve(t, env)).collect::<Result<_, _>>()? })
    }

    fn bindings(&self, vars: &[Typed]) -> Result<Vec<Vec<(String, String)>>, PddlError> {
        let mut out: Vec<Vec<(String, String)>> = vec![vec![]];
        for v in vars {
            for t in &v.types {
                if !self.world.types.declared(t) {
                    return Err(semantic(format!("undeclared type `{t}`")));
                }
            }
            let objs = self.world.objects_of(&v.types);
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    objs.iter().map(move |o| {
                        let mut b = prefix.clone();
                        b.push((v.name.clone(), o.to_string()));
                        b
                    })
                })
                .collect();
        }
        Ok(out)
    }

    fn condition(&mut self, c: &Condition, env: &Env) -> Result<Formula, PddlError> {
        Ok(match c {
            Condition::And(cs) => Formula::And(cs.iter().map(|c| self.condition(c, env)).collect::<Result<_, _>>()?),
            Condition::Or(cs) => Formula::Or(cs.iter().map(|c| self.condition(c, env)).collect::<Result<_, _>>()?),
            Condition::Not(c) => Formula::negation(self.condition(c, env)?),
            Condition::Imply(a, b) => Formula::Or(vec![Formula::negation(self.condition(a, env)?), self.condition(b, env)?]),
            Condition::Exists(vars, body) | Condition::Forall(vars, body) => {
                let mut parts = vec![];
                for b in self.bindings(vars)? {
                    let mut inner = env.clone();
                    inner.extend(b);
                    parts.push(self.condition(body, &inner)?);
                }
                if matches!(c, Condition::Exists(..)) {
                    Formula::Or(parts)
                } else {
                    Formula::And(parts)
                }
            }
            Condition::Atom(a) => {
                let g = self.ground_atom(a, env, &self.world.predicates, "predicate")?;
                if self.world.dynamic_predicates.contains(&a.name) {
                    Formula::lit(Literal::pos(self.table.intern(g, FluentKind::Propositional)))
                } else if self.world.facts.contains(&g) {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            Condition::Equal(a, b) => {
                if self.resolve(a, env)? == self.resolve(b, env)? {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            Condition::Compare(op, l, r) => match (self.num(l, env)?, self.num(r, env)?) {
                (Num::Defined(l), Num::Defined(r)) => Formula::lit(Literal::cmp(l, *op, r)),
                _ => Formula::False,
            },
        }
        .simplify())
    }

    fn num(&mut self, e: &NumExpr, env: &Env) -> Result<Num, PddlError> {
        use Num::*;
        Ok(match e {
            NumExpr::Const(c) => Defined(LinearExpr::constant(c.clone())),
            NumExpr::Fn(a) => {
                if self.world.cost_function.as_deref() == Some(a.name.as_str()) {
                    return Err(PddlError::UnsupportedFeature("total-cost read in a condition".into()));
                }
                let g = self.ground_atom(a, env, &self.world.functions, "function")?;
                if self.world.dynamic_functions.contains(&a.name) {
                    Defined(LinearExpr::var(self.table.intern(g, FluentKind::Numeric)))
                } else {
                    match self.world.values.get(&g) {
                        Some(v) => Defined(LinearExpr::constant(v.clone())),
                        None => Undefined,
                    }
                }
            }
            NumExpr::Neg(x) => match self.num(x, env)? {
                Defined(x) => Defined(x.negate()),
                Undefined => Undefined,
            },
            NumExpr::Bin(op, a, b) => {
                let (Defined(a), Defined(b)) = (self.num(a, env)?, self.num(b, env)?) else { return Ok(Undefined) };
                let nonlinear = || PddlError::UnsupportedFeature("nonlinear numeric expression".into());
                Defined(match op {
                    ArithOp::Add => a.add(&b),
                    ArithOp::Sub => a.sub(&b),
                    ArithOp::Mul if a.is_constant() => b.scale(&a.constant),
                    ArithOp::Mul if b.is_constant() => a.scale(&b.constant),
                    ArithOp::Div if b.is_constant() && !b.constant.is_zero() => a.scale(&(rat(1) / &b.constant)),
                    ArithOp::Div if b.is_constant() => return Err(semantic("division by zero")),
                    _ => return Err(nonlinear()),
                })
            }
        })
    }

    fn effects(
        &mut self,
        effs: &[Effect],
        env: &Env,
        out: &mut BTreeMap<FluentId, EffectFn>,
        cost: &mut Rational,
    ) -> Result<(), PddlError> {
        for e in effs {
            match e {
                Effect::Add(a) | Effect::Del(a) => {
                    let g = self.ground_atom(a, env, &self.world.predicates, "predicate")?;
                    let id = self.table.intern(g, FluentKind::Propositional);
                    let set = matches!(e, Effect::Add(_));
                    // an add and a delete of the same atom: the add wins
                    if set || out.get(&id) != Some(&EffectFn::SetTrue) {
                        out.insert(id, if set { EffectFn::SetTrue } else { EffectFn::SetFalse });
                    }
                }
                Effect::Forall(vars, body) => {
                    for b in self.bindings(vars)? {
                        let mut inner = env.clone();
                        inner.extend(b);
                        self.effects(body, &inner, out, cost)?;
                    }
                }
                Effect::Numeric(op, target, value) => {
                    let v = match self.num(value, env)? {
                        Num::Defined(v) => v,
                        Num::Undefined => return Err(semantic(format!("effect on `{}` reads an undefined value", target.name))),
                    };
                    if self.world.cost_function.as_deref() == Some(target.name.as_str()) {
                        if *op != AssignOp::Increase || !v.is_constant() {
                            return Err(PddlError::UnsupportedFeature("total-cost must be increased by a constant".into()));
                        }
                        *cost += &v.constant;
                        continue;
                    }
                    let g = self.ground_atom(target, env, &self.world.functions, "function")?;
                    let id = self.table.intern(g.clone(), FluentKind::Numeric);
                    let current = LinearExpr::var(id);
                    let const_factor = |what: &str| {
                        if v.is_constant() {
                            Ok(v.constant.clone())
                        } else {
                            Err(PddlError::UnsupportedFeature(format!("{what} by a non-constant factor")))
                        }
                    };
                    let effect = match op {
                        AssignOp::Assign if v.is_constant() => EffectFn::AssignConst(Value::Num(v.constant.clone())),
                        AssignOp::Assign => EffectFn::AssignExpr(v),
                        AssignOp::Increase => EffectFn::Increase(v),
                        AssignOp::Decrease => EffectFn::Decrease(v),
                        AssignOp::ScaleUp => EffectFn::AssignExpr(current.scale(&const_factor("scale-up")?)),
                        AssignOp::ScaleDown => {
                            let k = const_factor("scale-down")?;
                            if k.is_zero() {
                                return Err(semantic("scale-down by zero"));
                            }
                            EffectFn::AssignExpr(current.scale(&(rat(1) / k)))
                        }
                    };
                    if out.insert(id, effect).is_some() {
                        return Err(semantic(format!("two effects on {}", g.key())));
                    }
                }
            }
        }
        Ok(())
    }
}

struct LocalAction {
    binding: Binding,
    precondition: Formula,
    effects: BTreeMap<FluentId, EffectFn>,
    cost: Rational,
}

fn collect_effect_symbols(effs: &[Effect], preds: &mut HashSet<String>, funcs: &mut HashSet<String>) {
    for e in effs {
        match e {
            Effect::Add(a) | Effect::Del(a) => {
                preds.insert(a.name.clone());
            }
            Effect::Numeric(_, a, _) => {
                funcs.insert(a.name.clone());
            }
            Effect::Forall(_, body) => collect_effect_symbols(body, preds, funcs),
        }
    }
}

fn build_world<'a>(domain: &'a Domain, problem: &Problem) -> Result<World<'a>, PddlError> {
    let types = Types::new(domain);
    let mut objects: Vec<Typed> = domain.constants.clone();
    for o in &problem.objects {
        if objects.iter().any(|x| x.name == o.name) {
            return Err(semantic(format!("object `{}` declared twice", o.name)));
        }
        objects.push(o.clone());
    }
    for o in &objects {
        if let Some(t) = o.types.iter().find(|t| !types.declared(t)) {
            return Err(semantic(format!("object `{}` has undeclared type `{t}`", o.name)));
        }
    }

    let mut dynamic_predicates = HashSet::new();
    let mut dynamic_functions = HashSet::new();
    for a in &domain.actions {
        collect_effect_symbols(&a.effects, &mut dynamic_predicates, &mut dynamic_functions);
    }

    let cost_function = match &problem.metric {
        None => None,
        Some(m) => match &m.expr {
            NumExpr::Fn(a) if m.minimize && a.args.is_empty() => Some(a.name.clone()),
            _ => return Err(PddlError::UnsupportedFeature("metric other than minimizing total-cost".into())),
        },
    };
    let cost_name = cost_function.clone().unwrap_or_else(|| "total-cost".into());
    let cost_function = if dynamic_functions.remove(&cost_name) || cost_function.is_some() { Some(cost_name) } else { None };

    let predicates = domain.predicates.iter().map(|p| (p.name.as_str(), p.params.len())).collect();
    let functions = domain.functions.iter().map(|f| (f.name.as_str(), f.params.len())).collect();
    let mut facts = HashSet::new();
    let mut values = HashMap::new();
    for e in &problem.init {
        match e {
            InitEntry::Fact(name, args) => {
                facts.insert(GroundAtom { name: name.clone(), args: args.clone() });
            }
            InitEntry::Value(name, args, v) => {
                values.insert(GroundAtom { name: name.clone(), args: args.clone() }, v.clone());
            }
        }
    }
    Ok(World {
        types,
        objects,
        predicates,
        functions,
        dynamic_predicates,
        dynamic_functions,
        facts,
        values,
        cost_function,
    })
}

/// Grounds `problem` against `domain`.
pub fn ground(domain: &Domain, problem: &Problem, opts: &GroundOptions) -> Result<GroundedTask, PddlError> {
    let world = build_world(domain, problem)?;
    for e in &problem.init {
        let (name, args, table, what) = match e {
            InitEntry::Fact(n, a) => (n, a, &world.predicates, "predicate"),
            InitEntry::Value(n, a, _) => (n, a, &world.functions, "function"),
        };
        if world.cost_function.as_deref() == Some(name.as_str()) {
            continue;
        }
        match table.get(name.as_str()) {
            Some(&n) if n == args.len() => {}
            _ => return Err(semantic(format!("initial {what} `{name}` is undeclared or has the wrong arity"))),
        }
        if let Some(o) = args.iter().find(|o| !world.objects.iter().any(|x| x.name == **o)) {
            return Err(semantic(format!("unknown object `{o}` in the initial state")));
        }
    }

    let mut candidates = 0usize;
    for a in &domain.actions {
        let n = a
            .params
            .iter()
            .map(|p| world.objects_of(&p.types).len())
            .try_fold(1usize, |acc, k| acc.checked_mul(k))
            .unwrap_or(usize::MAX);
        candidates = candidates.saturating_add(n);
    }
    if candidates > opts.max_actions {
        return Err(PddlError::GroundingExplosion { count: candidates, cap: opts.max_actions });
    }

    let base_cost = if world.cost_function.is_some() { rat(0) } else { rat(1) };
    let per_schema = par::try_map(opts.exec, &domain.actions, |schema| -> Result<(Interner, Vec<LocalAction>), PddlError> {
        let mut g = Grounder { world: &world, table: Interner::default() };
        let mut out = vec![];
        for b in g.bindings(&schema.params)? {
            let precondition = match &schema.precondition {
                Some(c) => g.condition(c, &b)?,
                None => Formula::True,
            };
            if precondition == Formula::False {
                continue;
            }
            let mut effects = BTreeMap::new();
            let mut cost = base_cost.clone();
            g.effects(&schema.effects, &b, &mut effects, &mut cost)?;
            out.push(LocalAction {
                binding: Binding { schema: schema.name.clone(), args: b.into_iter().map(|(_, o)| o).collect() },
                precondition,
                effects,
                cost,
            });
        }
        Ok((g.table, out))
    })?;

    // merge worker tables in schema order
    let mut table = Interner::default();
    let mut actions = vec![];
    for (local, acts) in per_schema {
        let map: Vec<FluentId> = local.atoms.into_iter().map(|(a, k)| table.intern(a, k)).collect();
        let remap = |f: FluentId| map[f.index()];
        for a in acts {
            actions.push(LocalAction {
                precondition: a.precondition.map_fluents(&remap),
                effects: a.effects.into_iter().map(|(f, e)| (remap(f), e.map_fluents(&remap))).collect(),
                ..a
            });
        }
    }
    let mut goal_grounder = Grounder { world: &world, table };
    let goal = goal_grounder.condition(&problem.goal, &vec![])?;
    let table = goal_grounder.table;

    let initial: Vec<Value> = table
        .atoms
        .iter()
        .map(|(atom, kind)| match kind {
            FluentKind::Propositional => Ok(Value::Bool(world.facts.contains(atom))),
            FluentKind::Numeric => world.values.get(atom).map(|v| Value::Num(v.clone())).ok_or_else(|| PddlError::UndefinedNumeric(atom.key())),
        })
        .collect::<Result<_, _>>()?;

    // atoms no live action changes keep their initial value; repeat until no more actions die
    let changes = |f: FluentId, e: &EffectFn| !e.preserves(&initial[f.index()]);
    let mut live = vec![true; actions.len()];
    let written = loop {
        let written: HashSet<FluentId> = actions
            .iter()
            .zip(&live)
            .filter(|(_, l)| **l)
            .flat_map(|(a, _)| a.effects.iter().filter(|(f, e)| changes(**f, e)).map(|(f, _)| *f))
            .collect();
        let constant = |f: FluentId| (!written.contains(&f)).then(|| initial[f.index()].clone());
        let mut changed = false;
        for (a, l) in actions.iter().zip(live.iter_mut()) {
            if *l && a.precondition.substitute(&constant) == Formula::False {
                *l = false;
                changed = true;
            }
        }
        if !changed {
            break written;
        }
    };
    let keep: Vec<FluentId> = (0..table.atoms.len() as u32).map(FluentId).filter(|f| written.contains(f)).collect();
    let folded = table.atoms.len() - keep.len();
    if folded > 0 {
        log::warn!("{folded} atom(s) are never changed by an applicable action; folded to their initial values");
    }
    let mut new_id = vec![None; table.atoms.len()];
    for (n, f) in keep.iter().enumerate() {
        new_id[f.index()] = Some(FluentId(n as u32));
    }
    let dropped = |f: FluentId| new_id[f.index()].is_none().then(|| initial[f.index()].clone());
    let remap = |f: FluentId| new_id[f.index()].expect("kept fluent");

    let mut transitions = vec![];
    let mut names = vec![];
    let mut bindings = vec![];
    for (a, l) in actions.into_iter().zip(live) {
        if !l {
            continue;
        }
        let pre = a.precondition.substitute(&dropped);
        let id = ActionId(names.len() as u32);
        names.push(if a.binding.args.is_empty() {
            a.binding.schema.clone()
        } else {
            format!("{} {}", a.binding.schema, a.binding.args.join(" "))
        });
        bindings.push(a.binding);
        transitions.push(CaeTriple {
            precondition: pre.map_fluents(&remap),
            action: id,
            effects: a
                .effects
                .into_iter()
                .filter(|(f, _)| new_id[f.index()].is_some())
                .map(|(f, e)| (remap(f), e.substitute(&dropped).map_fluents(&remap)))
                .collect(),
            cost: a.cost,
        });
    }
    let goal = goal.substitute(&dropped).map_fluents(&remap);

    let mut fluents = vec![];
    let mut init = vec![];
    let mut atoms = vec![];
    for f in &keep {
        let (atom, kind) = &table.atoms[f.index()];
        fluents.push(match kind {
            FluentKind::Propositional => Fluent::prop(atom.key()),
            FluentKind::Numeric => Fluent::num(atom.key()),
        });
        init.push(initial[f.index()].clone());
        atoms.push(atom.clone());
    }
    let problem = PlanningProblem { fluents, actions: names, transitions, init: State(init), goal };
    problem.validate()?;
    Ok(GroundedTask { problem, atoms, bindings })
}
