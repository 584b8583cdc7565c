use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, Signed, Zero};

use super::{FluentId, ModelError, State};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// A fluent value. The tag always matches the kind of the fluent it belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Num(Rational),
}

impl Value {
    pub fn int(n: i64) -> Self {
        Value::Num(rat(n))
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Num(_) => None,
        }
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self {
            Value::Num(n) => Some(n),
            Value::Bool(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Num(n) => write!(f, "{n}"),
        }
    }
}

/// `constant + Σ coefficient·fluent` over numeric fluents.
///
/// Kept canonical: zero coefficients are never stored, so structural equality
/// coincides with syntactic equality of the normalized expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinearExpr {
    pub constant: Rational,
    pub terms: BTreeMap<FluentId, Rational>,
}

impl LinearExpr {
    pub fn constant(c: Rational) -> Self {
        LinearExpr { constant: c, terms: BTreeMap::new() }
    }

    pub fn int(c: i64) -> Self {
        Self::constant(rat(c))
    }

    pub fn var(f: FluentId) -> Self {
        Self::term(f, rat(1))
    }

    pub fn term(f: FluentId, coefficient: Rational) -> Self {
        let mut e = LinearExpr::default();
        e.add_term(f, coefficient);
        e
    }

    pub fn add_term(&mut self, f: FluentId, coefficient: Rational) {
        let slot = self.terms.entry(f).or_insert_with(Rational::zero);
        *slot += coefficient;
        if slot.is_zero() {
            self.terms.remove(&f);
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &LinearExpr) -> LinearExpr {
        let mut out = self.clone();
        out.constant += &other.constant;
        for (f, c) in &other.terms {
            out.add_term(*f, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &LinearExpr) -> LinearExpr {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn scale(&self, k: &Rational) -> LinearExpr {
        if k.is_zero() {
            return LinearExpr::default();
        }
        LinearExpr {
            constant: &self.constant * k,
            terms: self.terms.iter().map(|(f, c)| (*f, c * k)).collect(),
        }
    }

    pub fn negate(&self) -> LinearExpr {
        self.scale(&rat(-1))
    }

    pub fn vars(&self) -> impl Iterator<Item = FluentId> + '_ {
        self.terms.keys().copied()
    }

    pub fn eval(&self, state: &State) -> Result<Rational, ModelError> {
        let mut acc = self.constant.clone();
        for (f, c) in &self.terms {
            match state.get(*f)? {
                Value::Num(v) => acc += c * v,
                Value::Bool(_) => return Err(ModelError::KindMismatch(*f)),
            }
        }
        Ok(acc)
    }

    /// Sign-normalized form: the first coefficient is +1. Returns the scale
    /// factor used so callers can adjust comparison direction.
    pub(crate) fn normalized(&self) -> (LinearExpr, Rational) {
        match self.terms.values().next() {
            Some(lead) => {
                let k = lead.recip();
                (self.scale(&k), k)
            }
            None => (self.clone(), rat(1)),
        }
    }

    pub(crate) fn map_fluents(&self, map: &impl Fn(FluentId) -> FluentId) -> LinearExpr {
        let mut out = LinearExpr::constant(self.constant.clone());
        for (f, c) in &self.terms {
            out.add_term(map(*f), c.clone());
        }
        out
    }

    pub(crate) fn is_negative_scale(k: &Rational) -> bool {
        k.is_negative()
    }
}
