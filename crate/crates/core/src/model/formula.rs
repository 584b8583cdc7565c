use std::collections::BTreeSet;
use std::fmt;

use num::Zero;

use super::expr::{rat, LinearExpr, Rational, Value};
use super::{FluentId, ModelError, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
        }
    }

    /// The operator obtained by swapping both sides.
    pub fn mirror(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Gt => CmpOp::Lt,
            op => op,
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Prop { fluent: FluentId, positive: bool },
    Cmp { lhs: LinearExpr, op: CmpOp, rhs: LinearExpr },
}

impl Literal {
    pub fn pos(fluent: FluentId) -> Self {
        Literal::Prop { fluent, positive: true }
    }

    pub fn neg(fluent: FluentId) -> Self {
        Literal::Prop { fluent, positive: false }
    }

    pub fn cmp(lhs: LinearExpr, op: CmpOp, rhs: LinearExpr) -> Self {
        Literal::Cmp { lhs, op, rhs }
    }

    /// `fluent op constant`
    pub fn num(fluent: FluentId, op: CmpOp, value: i64) -> Self {
        Literal::cmp(LinearExpr::var(fluent), op, LinearExpr::int(value))
    }

    pub fn negate(&self) -> Literal {
        match self {
            Literal::Prop { fluent, positive } => Literal::Prop { fluent: *fluent, positive: !positive },
            Literal::Cmp { lhs, op, rhs } => Literal::Cmp { lhs: lhs.clone(), op: op.negate(), rhs: rhs.clone() },
        }
    }

    pub fn vars(&self) -> BTreeSet<FluentId> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<FluentId>) {
        match self {
            Literal::Prop { fluent, .. } => {
                out.insert(*fluent);
            }
            Literal::Cmp { lhs, rhs, .. } => {
                out.extend(lhs.vars());
                out.extend(rhs.vars());
            }
        }
    }

    pub fn eval(&self, state: &State) -> Result<bool, ModelError> {
        match self {
            Literal::Prop { fluent, positive } => match state.get(*fluent)? {
                Value::Bool(b) => Ok(*b == *positive),
                Value::Num(_) => Err(ModelError::KindMismatch(*fluent)),
            },
            Literal::Cmp { lhs, op, rhs } => Ok(op.holds(&lhs.eval(state)?, &rhs.eval(state)?)),
        }
    }

    /// Truth value of a comparison that mentions no fluent.
    pub fn constant_value(&self) -> Option<bool> {
        match self {
            Literal::Cmp { lhs, op, rhs } => {
                let diff = lhs.sub(rhs);
                diff.is_constant().then(|| op.holds(&diff.constant, &Rational::zero()))
            }
            _ => None,
        }
    }

    /// Normal form `e op 0` with the leading coefficient of `e` equal to 1.
    /// Two comparisons with equal canonical forms are equivalent.
    pub fn canonical(&self) -> Literal {
        match self {
            Literal::Prop { .. } => self.clone(),
            Literal::Cmp { lhs, op, rhs } => {
                let diff = lhs.sub(rhs);
                let (norm, k) = diff.normalized();
                let op = if LinearExpr::is_negative_scale(&k) { op.mirror() } else { *op };
                Literal::Cmp { lhs: norm, op, rhs: LinearExpr::constant(Rational::zero()) }
            }
        }
    }

    pub(crate) fn map_fluents(&self, map: &impl Fn(FluentId) -> FluentId) -> Literal {
        match self {
            Literal::Prop { fluent, positive } => Literal::Prop { fluent: map(*fluent), positive: *positive },
            Literal::Cmp { lhs, op, rhs } => Literal::Cmp {
                lhs: lhs.map_fluents(map),
                op: *op,
                rhs: rhs.map_fluents(map),
            },
        }
    }
}

/// Condition tree over fluents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Lit(Literal),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn lit(l: Literal) -> Self {
        Formula::Lit(l)
    }

    pub fn negation(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn vars(&self) -> BTreeSet<FluentId> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<FluentId>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Lit(l) => l.collect_vars(out),
            Formula::Not(f) => f.collect_vars(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_vars(out)),
        }
    }

    pub fn eval(&self, state: &State) -> Result<bool, ModelError> {
        match self {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Lit(l) => l.eval(state),
            Formula::Not(f) => Ok(!f.eval(state)?),
            Formula::And(fs) => {
                for f in fs {
                    if !f.eval(state)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.eval(state)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// Constant folding: removes True/False operands, flattens nested
    /// conjunctions and disjunctions, and evaluates fluent-free comparisons.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Lit(l) => match l.constant_value() {
                Some(true) => Formula::True,
                Some(false) => Formula::False,
                None => self.clone(),
            },
            Formula::Not(f) => match f.simplify() {
                Formula::True => Formula::False,
                Formula::False => Formula::True,
                Formula::Lit(l) => Formula::Lit(l.negate()),
                Formula::Not(inner) => *inner,
                other => Formula::negation(other),
            },
            Formula::And(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for f in fs {
                    match f.simplify() {
                        Formula::True => {}
                        Formula::False => return Formula::False,
                        Formula::And(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                match out.len() {
                    0 => Formula::True,
                    1 => out.pop().unwrap(),
                    _ => Formula::And(out),
                }
            }
            Formula::Or(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for f in fs {
                    match f.simplify() {
                        Formula::False => {}
                        Formula::True => return Formula::True,
                        Formula::Or(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                match out.len() {
                    0 => Formula::False,
                    1 => out.pop().unwrap(),
                    _ => Formula::Or(out),
                }
            }
        }
    }

    /// Replaces the listed fluents by constants and simplifies.
    pub fn substitute(&self, value_of: &impl Fn(FluentId) -> Option<Value>) -> Formula {
        self.substitute_inner(value_of).simplify()
    }

    fn substitute_inner(&self, value_of: &impl Fn(FluentId) -> Option<Value>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Lit(Literal::Prop { fluent, positive }) => match value_of(*fluent) {
                Some(Value::Bool(b)) => {
                    if b == *positive {
                        Formula::True
                    } else {
                        Formula::False
                    }
                }
                _ => self.clone(),
            },
            Formula::Lit(Literal::Cmp { lhs, op, rhs }) => {
                let fold = |e: &LinearExpr| {
                    let mut out = LinearExpr::constant(e.constant.clone());
                    for (f, c) in &e.terms {
                        match value_of(*f) {
                            Some(Value::Num(v)) => out.constant += c * v,
                            _ => out.add_term(*f, c.clone()),
                        }
                    }
                    out
                };
                Formula::Lit(Literal::Cmp { lhs: fold(lhs), op: *op, rhs: fold(rhs) })
            }
            Formula::Not(f) => Formula::negation(f.substitute_inner(value_of)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.substitute_inner(value_of)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.substitute_inner(value_of)).collect()),
        }
    }

    pub(crate) fn map_fluents(&self, map: &impl Fn(FluentId) -> FluentId) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Lit(l) => Formula::Lit(l.map_fluents(map)),
            Formula::Not(f) => Formula::negation(f.map_fluents(map)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.map_fluents(map)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.map_fluents(map)).collect()),
        }
    }

    pub fn literals(&self) -> Vec<&Literal> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Literal>) {
            match f {
                Formula::True | Formula::False => {}
                Formula::Lit(l) => out.push(l),
                Formula::Not(f) => walk(f, out),
                Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| walk(f, out)),
            }
        }
        walk(self, &mut out);
        out
    }
}

/// Renders formulas with fluent names instead of ids.
pub struct Named<'a, T> {
    pub item: &'a T,
    pub names: &'a dyn Fn(FluentId) -> String,
}

fn fmt_expr(e: &LinearExpr, names: &dyn Fn(FluentId) -> String, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut first = true;
    for (id, c) in &e.terms {
        if !first {
            write!(f, " + ")?;
        }
        first = false;
        if *c == rat(1) {
            write!(f, "{}", names(*id))?;
        } else {
            write!(f, "{}*{}", c, names(*id))?;
        }
    }
    if first {
        write!(f, "{}", e.constant)
    } else if !e.constant.is_zero() {
        write!(f, " + {}", e.constant)
    } else {
        Ok(())
    }
}

impl fmt::Display for Named<'_, Literal> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.item {
            Literal::Prop { fluent, positive } => {
                if !positive {
                    write!(f, "!")?;
                }
                write!(f, "{}", (self.names)(*fluent))
            }
            Literal::Cmp { lhs, op, rhs } if rhs.terms.is_empty() && rhs.constant.is_zero() && !lhs.terms.is_empty() => {
                // canonical `e + c op 0` prints as `e op -c`
                let mut terms = lhs.clone();
                terms.constant = Rational::zero();
                fmt_expr(&terms, self.names, f)?;
                write!(f, " {} {}", op.symbol(), -lhs.constant.clone())
            }
            Literal::Cmp { lhs, op, rhs } => {
                fmt_expr(lhs, self.names, f)?;
                write!(f, " {} ", op.symbol())?;
                fmt_expr(rhs, self.names, f)
            }
        }
    }
}

impl fmt::Display for Named<'_, Formula> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.item {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Lit(l) => write!(f, "{}", Named { item: l, names: self.names }),
            Formula::Not(inner) => write!(f, "!({})", Named { item: inner.as_ref(), names: self.names }),
            Formula::And(fs) | Formula::Or(fs) => {
                let sep = if matches!(self.item, Formula::And(_)) { " & " } else { " | " };
                write!(f, "(")?;
                for (i, inner) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    write!(f, "{}", Named { item: inner, names: self.names })?;
                }
                write!(f, ")")
            }
        }
    }
}
