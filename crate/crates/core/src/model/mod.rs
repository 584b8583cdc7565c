//! Grounded planning-problem representation: fluents, states, conditions,
//! CAE triples (precondition, action, effect) and whole problems.

mod expr;
mod formula;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num::{Signed, Zero};
use rand::Rng;

pub use expr::{rat, LinearExpr, Rational, Value};
pub use formula::{CmpOp, Formula, Literal, Named};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FluentId(pub u32);

impl FluentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub u32);

impl ActionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub type FluentSet = BTreeSet<FluentId>;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("fluent #{} is not declared", .0 .0)]
    UndeclaredFluent(FluentId),
    #[error("fluent #{} used with a value of the wrong kind", .0 .0)]
    KindMismatch(FluentId),
    #[error("action #{} is not declared", .0 .0)]
    UndeclaredAction(ActionId),
    #[error("precondition of `{0}` does not hold")]
    PreconditionViolated(String),
    #[error("duplicate fluent name `{0}`")]
    DuplicateFluent(String),
    #[error("propositional fluent `{0}` carries a domain bound")]
    BoundOnPropositional(String),
    #[error("transition #{0} has a negative cost")]
    NegativeCost(usize),
    #[error("transitions #{0} and #{1} share an action but have different costs")]
    InconsistentCost(usize, usize),
    #[error("transitions #{0} and #{1} share an action and are both applicable in a sampled state")]
    NotMutuallyExclusive(usize, usize),
    #[error("initial state has {found} values for {expected} fluents")]
    StateSize { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FluentKind {
    Propositional,
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fluent {
    pub name: String,
    pub kind: FluentKind,
    /// Inclusive integer range, numeric fluents only. `None` means unbounded.
    pub bound: Option<(i64, i64)>,
}

impl Fluent {
    pub fn prop(name: impl Into<String>) -> Self {
        Fluent { name: name.into(), kind: FluentKind::Propositional, bound: None }
    }

    pub fn num(name: impl Into<String>) -> Self {
        Fluent { name: name.into(), kind: FluentKind::Numeric, bound: None }
    }

    pub fn bounded(name: impl Into<String>, lo: i64, hi: i64) -> Self {
        Fluent { name: name.into(), kind: FluentKind::Numeric, bound: Some((lo, hi)) }
    }

    /// Number of values, or `None` for unbounded numeric fluents.
    pub fn domain_size(&self) -> Option<u64> {
        match (self.kind, self.bound) {
            (FluentKind::Propositional, _) => Some(2),
            (FluentKind::Numeric, Some((lo, hi))) => Some((hi - lo + 1).max(0) as u64),
            (FluentKind::Numeric, None) => None,
        }
    }
}

/// Total assignment, indexed by fluent id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub Vec<Value>);

impl State {
    pub fn get(&self, f: FluentId) -> Result<&Value, ModelError> {
        self.0.get(f.index()).ok_or(ModelError::UndeclaredFluent(f))
    }

    pub fn set(&mut self, f: FluentId, v: Value) {
        self.0[f.index()] = v;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn project(&self, fluents: &[FluentId]) -> Vec<Value> {
        fluents.iter().map(|f| self.0[f.index()].clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EffectFn {
    AssignConst(Value),
    AssignExpr(LinearExpr),
    Increase(LinearExpr),
    Decrease(LinearExpr),
    SetTrue,
    SetFalse,
}

impl EffectFn {
    pub fn increment() -> Self {
        EffectFn::Increase(LinearExpr::int(1))
    }

    pub fn decrement() -> Self {
        EffectFn::Decrease(LinearExpr::int(1))
    }

    /// Value of `fluent` after this effect, reading only the pre-state.
    pub fn apply(&self, fluent: FluentId, pre: &State) -> Result<Value, ModelError> {
        let current = pre.get(fluent)?;
        let numeric = || current.as_num().ok_or(ModelError::KindMismatch(fluent));
        Ok(match self {
            EffectFn::SetTrue => Value::Bool(true),
            EffectFn::SetFalse => Value::Bool(false),
            EffectFn::AssignConst(v) => v.clone(),
            EffectFn::AssignExpr(e) => Value::Num(e.eval(pre)?),
            EffectFn::Increase(e) => Value::Num(numeric()? + e.eval(pre)?),
            EffectFn::Decrease(e) => Value::Num(numeric()? - e.eval(pre)?),
        })
    }

    /// Canonical representative used to decide effect equality.
    pub fn canonical(&self) -> EffectFn {
        match self {
            EffectFn::AssignConst(Value::Bool(true)) => EffectFn::SetTrue,
            EffectFn::AssignConst(Value::Bool(false)) => EffectFn::SetFalse,
            EffectFn::AssignExpr(e) if e.is_constant() => EffectFn::AssignConst(Value::Num(e.constant.clone())),
            EffectFn::Decrease(e) => EffectFn::Increase(e.negate()),
            other => other.clone(),
        }
    }

    pub fn is_propositional(&self) -> bool {
        matches!(self, EffectFn::SetTrue | EffectFn::SetFalse | EffectFn::AssignConst(Value::Bool(_)))
    }

    /// Fluents read by the effect expression (not the target).
    pub fn reads(&self) -> FluentSet {
        match self {
            EffectFn::AssignExpr(e) | EffectFn::Increase(e) | EffectFn::Decrease(e) => e.vars().collect(),
            _ => FluentSet::new(),
        }
    }

    /// True when the effect leaves a fluent holding `v` unchanged in every state.
    pub fn preserves(&self, v: &Value) -> bool {
        match self.canonical() {
            EffectFn::SetTrue => *v == Value::Bool(true),
            EffectFn::SetFalse => *v == Value::Bool(false),
            EffectFn::AssignConst(c) => *v == c,
            EffectFn::Increase(e) => e.is_constant() && e.constant.is_zero(),
            _ => false,
        }
    }

    /// Replaces reads of fluents with known values by constants.
    pub fn substitute(&self, value_of: &impl Fn(FluentId) -> Option<Value>) -> EffectFn {
        let fold = |x: &LinearExpr| {
            let mut out = LinearExpr::constant(x.constant.clone());
            for (f, c) in &x.terms {
                match value_of(*f) {
                    Some(Value::Num(v)) => out.constant += c * v,
                    _ => out.add_term(*f, c.clone()),
                }
            }
            out
        };
        match self {
            EffectFn::AssignExpr(x) => match fold(x) {
                x if x.is_constant() => EffectFn::AssignConst(Value::Num(x.constant)),
                x => EffectFn::AssignExpr(x),
            },
            EffectFn::Increase(x) => EffectFn::Increase(fold(x)),
            EffectFn::Decrease(x) => EffectFn::Decrease(fold(x)),
            other => other.clone(),
        }
    }

    pub(crate) fn map_fluents(&self, map: &impl Fn(FluentId) -> FluentId) -> EffectFn {
        match self {
            EffectFn::AssignExpr(e) => EffectFn::AssignExpr(e.map_fluents(map)),
            EffectFn::Increase(e) => EffectFn::Increase(e.map_fluents(map)),
            EffectFn::Decrease(e) => EffectFn::Decrease(e.map_fluents(map)),
            other => other.clone(),
        }
    }
}

/// One guarded deterministic transition rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaeTriple {
    pub precondition: Formula,
    pub action: ActionId,
    pub effects: BTreeMap<FluentId, EffectFn>,
    pub cost: Rational,
}

impl CaeTriple {
    pub fn new(precondition: Formula, action: ActionId, effects: impl IntoIterator<Item = (FluentId, EffectFn)>) -> Self {
        CaeTriple { precondition, action, effects: effects.into_iter().collect(), cost: rat(1) }
    }

    pub fn with_cost(mut self, cost: Rational) -> Self {
        self.cost = cost;
        self
    }

    pub fn is_applicable(&self, s: &State) -> Result<bool, ModelError> {
        self.precondition.eval(s)
    }

    /// Fires the triple. Every effect reads the frozen pre-transition state.
    pub fn apply(&self, s: &State) -> Result<State, ModelError> {
        if !self.precondition.eval(s)? {
            return Err(ModelError::PreconditionViolated(format!("action #{}", self.action.0)));
        }
        self.apply_unchecked(s)
    }

    pub(crate) fn apply_unchecked(&self, s: &State) -> Result<State, ModelError> {
        let mut next = s.clone();
        for (f, e) in &self.effects {
            next.set(*f, e.apply(*f, s)?);
        }
        Ok(next)
    }

    pub fn affected(&self) -> impl Iterator<Item = FluentId> + '_ {
        self.effects.keys().copied()
    }
}

/// `(fluents, actions, transitions, initial state, goal)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanningProblem {
    pub fluents: Vec<Fluent>,
    pub actions: Vec<String>,
    pub transitions: Vec<CaeTriple>,
    pub init: State,
    pub goal: Formula,
}

impl PlanningProblem {
    pub fn fluent_ids(&self) -> impl Iterator<Item = FluentId> {
        (0..self.fluents.len() as u32).map(FluentId)
    }

    pub fn fluent(&self, f: FluentId) -> &Fluent {
        &self.fluents[f.index()]
    }

    pub fn fluent_name(&self, f: FluentId) -> &str {
        &self.fluents[f.index()].name
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a.index()]
    }

    pub fn fluent_by_name(&self, name: &str) -> Option<FluentId> {
        self.fluents.iter().position(|f| f.name == name).map(|i| FluentId(i as u32))
    }

    pub fn action_by_name(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a == name).map(|i| ActionId(i as u32))
    }

    pub fn names(&self) -> impl Fn(FluentId) -> String + '_ {
        move |f| self.fluents.get(f.index()).map(|x| x.name.clone()).unwrap_or_else(|| format!("#{}", f.0))
    }

    pub fn display_formula(&self, f: &Formula) -> String {
        let names = self.names();
        Named { item: f, names: &names }.to_string()
    }

    /// Checks every structural invariant of the model.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.fluents.len();
        let mut seen = HashMap::new();
        for f in &self.fluents {
            if seen.insert(f.name.as_str(), ()).is_some() {
                return Err(ModelError::DuplicateFluent(f.name.clone()));
            }
            if f.kind == FluentKind::Propositional && f.bound.is_some() {
                return Err(ModelError::BoundOnPropositional(f.name.clone()));
            }
        }
        if self.init.len() != n {
            return Err(ModelError::StateSize { expected: n, found: self.init.len() });
        }
        for (i, v) in self.init.0.iter().enumerate() {
            self.check_value_kind(FluentId(i as u32), v)?;
        }
        self.check_formula(&self.goal)?;
        let mut action_cost: HashMap<ActionId, usize> = HashMap::new();
        for (i, t) in self.transitions.iter().enumerate() {
            if t.action.index() >= self.actions.len() {
                return Err(ModelError::UndeclaredAction(t.action));
            }
            if t.cost.is_negative() {
                return Err(ModelError::NegativeCost(i));
            }
            if let Some(&j) = action_cost.get(&t.action) {
                if self.transitions[j].cost != t.cost {
                    return Err(ModelError::InconsistentCost(j, i));
                }
            } else {
                action_cost.insert(t.action, i);
            }
            self.check_formula(&t.precondition)?;
            for (f, e) in &t.effects {
                let fluent = self.fluents.get(f.index()).ok_or(ModelError::UndeclaredFluent(*f))?;
                let ok = match fluent.kind {
                    FluentKind::Propositional => e.is_propositional(),
                    FluentKind::Numeric => !e.is_propositional(),
                };
                if !ok {
                    return Err(ModelError::KindMismatch(*f));
                }
                for r in e.reads() {
                    self.expect_kind(r, FluentKind::Numeric)?;
                }
            }
        }
        Ok(())
    }

    fn check_value_kind(&self, f: FluentId, v: &Value) -> Result<(), ModelError> {
        match v {
            Value::Bool(_) => self.expect_kind(f, FluentKind::Propositional),
            Value::Num(_) => self.expect_kind(f, FluentKind::Numeric),
        }
    }

    fn expect_kind(&self, f: FluentId, kind: FluentKind) -> Result<(), ModelError> {
        let fluent = self.fluents.get(f.index()).ok_or(ModelError::UndeclaredFluent(f))?;
        if fluent.kind == kind {
            Ok(())
        } else {
            Err(ModelError::KindMismatch(f))
        }
    }

    fn check_formula(&self, formula: &Formula) -> Result<(), ModelError> {
        for l in formula.literals() {
            match l {
                Literal::Prop { fluent, .. } => self.expect_kind(*fluent, FluentKind::Propositional)?,
                Literal::Cmp { .. } => {
                    for f in l.vars() {
                        self.expect_kind(f, FluentKind::Numeric)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Samples random states and checks that no two triples sharing an
    /// action are simultaneously applicable.
    pub fn check_mutual_exclusion(&self, samples: usize, rng: &mut impl Rng) -> Result<(), ModelError> {
        let mut by_action: BTreeMap<ActionId, Vec<usize>> = BTreeMap::new();
        for (i, t) in self.transitions.iter().enumerate() {
            by_action.entry(t.action).or_default().push(i);
        }
        let groups: Vec<Vec<usize>> = by_action.into_values().filter(|g| g.len() > 1).collect();
        if groups.is_empty() {
            return Ok(());
        }
        for _ in 0..samples {
            let s = self.random_state(rng);
            for group in &groups {
                let mut first = None;
                for &i in group {
                    if self.transitions[i].precondition.eval(&s)? {
                        if let Some(j) = first {
                            return Err(ModelError::NotMutuallyExclusive(j, i));
                        }
                        first = Some(i);
                    }
                }
            }
        }
        Ok(())
    }

    /// A state drawn uniformly from bounded domains; unbounded numeric
    /// fluents are drawn near their initial value.
    pub fn random_state(&self, rng: &mut impl Rng) -> State {
        State(
            self.fluents
                .iter()
                .zip(&self.init.0)
                .map(|(f, init)| match (f.kind, f.bound) {
                    (FluentKind::Propositional, _) => Value::Bool(rng.gen()),
                    (FluentKind::Numeric, Some((lo, hi))) => Value::int(rng.gen_range(lo..=hi)),
                    (FluentKind::Numeric, None) => {
                        let base = init.as_num().cloned().unwrap_or_else(Rational::zero);
                        Value::Num(base + rat(rng.gen_range(-4..=4)))
                    }
                })
                .collect(),
        )
    }

    pub fn initial_value(&self, f: FluentId) -> &Value {
        &self.init.0[f.index()]
    }
}

impl fmt::Display for PlanningProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "fluents:")?;
        for (fl, v) in self.fluents.iter().zip(&self.init.0) {
            writeln!(f, "  {} = {}", fl.name, v)?;
        }
        writeln!(f, "transitions:")?;
        for t in &self.transitions {
            write!(f, "  ({}; {}; ", self.display_formula(&t.precondition), self.action_name(t.action))?;
            for (i, (fl, e)) in t.effects.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{} <- {:?}", self.fluent_name(*fl), e)?;
            }
            writeln!(f, ")")?;
        }
        writeln!(f, "goal: {}", self.display_formula(&self.goal))
    }
}

#[cfg(test)]
mod tests;
