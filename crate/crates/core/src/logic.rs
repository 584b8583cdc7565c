//! Conjunctive normal form and the clause-level queries the scoping loop runs.
//!
//! Conversion goes through negation normal form and then distributes `Or`
//! over `And`. Numeric comparisons are opaque atoms; the only reasoning done
//! on them is recognising a comparison next to its own negation.

use std::collections::BTreeSet;
use std::fmt;

use crate::model::{FluentId, FluentSet, Formula, Literal, ModelError, Named, State};

pub const DEFAULT_CLAUSE_CAP: usize = 1024;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("CNF conversion exceeded {cap} clauses")]
pub struct CnfBlowup {
    pub cap: usize,
}

/// A disjunction of literals. Literals are stored in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Clause {
    pub literals: BTreeSet<Literal>,
}

impl Clause {
    pub fn unit(l: Literal) -> Self {
        Clause { literals: [l.canonical()].into_iter().collect() }
    }

    pub fn from_literals(lits: impl IntoIterator<Item = Literal>) -> Self {
        Clause { literals: lits.into_iter().map(|l| l.canonical()).collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn vars(&self) -> FluentSet {
        let mut out = FluentSet::new();
        for l in &self.literals {
            l.collect_vars(&mut out);
        }
        out
    }

    /// True when the clause holds a literal together with its negation.
    pub fn is_tautology(&self) -> bool {
        self.literals.iter().any(|l| self.literals.contains(&l.negate().canonical()))
    }

    pub fn eval(&self, s: &State) -> Result<bool, ModelError> {
        for l in &self.literals {
            if l.eval(s)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn subsumes(&self, other: &Clause) -> bool {
        self.literals.len() <= other.literals.len() && self.literals.is_subset(&other.literals)
    }

    fn union(&self, other: &Clause) -> Clause {
        Clause { literals: self.literals.union(&other.literals).cloned().collect() }
    }

    pub fn to_formula(&self) -> Formula {
        match self.literals.len() {
            1 => Formula::Lit(self.literals.iter().next().unwrap().clone()),
            _ => Formula::Or(self.literals.iter().cloned().map(Formula::Lit).collect()),
        }
    }

    pub fn display<'a>(&'a self, names: &'a dyn Fn(FluentId) -> String) -> impl fmt::Display + 'a {
        ClauseDisplay { clause: self, names }
    }
}

struct ClauseDisplay<'a> {
    clause: &'a Clause,
    names: &'a dyn Fn(FluentId) -> String,
}

impl fmt::Display for ClauseDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clause.is_empty() {
            return write!(f, "false");
        }
        for (i, l) in self.clause.literals.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{}", Named { item: l, names: self.names })?;
        }
        Ok(())
    }
}

/// A conjunction of clauses; the empty conjunction is `True`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Cnf {
    pub clauses: Vec<Clause>,
}

impl Cnf {
    pub fn is_true(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn vars(&self) -> FluentSet {
        self.clauses.iter().flat_map(|c| c.vars()).collect()
    }

    pub fn eval(&self, s: &State) -> Result<bool, ModelError> {
        for c in &self.clauses {
            if !c.eval(s)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_formula(&self) -> Formula {
        match self.clauses.len() {
            0 => Formula::True,
            1 => self.clauses[0].to_formula(),
            _ => Formula::And(self.clauses.iter().map(Clause::to_formula).collect()),
        }
    }

    fn true_cnf() -> Self {
        Cnf::default()
    }

    fn false_cnf() -> Self {
        Cnf { clauses: vec![Clause::default()] }
    }
}

/// Negation normal form: `Not` only directly above literals, which we
/// absorb by negating the literal itself.
fn nnf(f: &Formula, negated: bool) -> Formula {
    match (f, negated) {
        (Formula::True, false) | (Formula::False, true) => Formula::True,
        (Formula::True, true) | (Formula::False, false) => Formula::False,
        (Formula::Lit(l), false) => Formula::Lit(l.clone()),
        (Formula::Lit(l), true) => Formula::Lit(l.negate()),
        (Formula::Not(inner), _) => nnf(inner, !negated),
        (Formula::And(fs), false) | (Formula::Or(fs), true) => Formula::And(fs.iter().map(|g| nnf(g, negated)).collect()),
        (Formula::Or(fs), false) | (Formula::And(fs), true) => Formula::Or(fs.iter().map(|g| nnf(g, negated)).collect()),
    }
}

/// Drops tautologies and duplicates, then removes subsumed clauses.
/// Result is sorted, so equal clause sets compare equal.
fn normalize(clauses: impl IntoIterator<Item = Clause>) -> Vec<Clause> {
    let mut set: Vec<Clause> = clauses
        .into_iter()
        .filter(|c| !c.is_tautology())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    // shortest first so a subsuming clause is always seen before its supersets
    set.sort_by(|a, b| a.literals.len().cmp(&b.literals.len()).then_with(|| a.cmp(b)));
    let mut kept: Vec<Clause> = Vec::with_capacity(set.len());
    for c in set {
        if !kept.iter().any(|k| k.subsumes(&c)) {
            kept.push(c);
        }
    }
    kept.sort();
    kept
}

fn cnf_of_nnf(f: &Formula, cap: usize) -> Result<Cnf, CnfBlowup> {
    match f {
        Formula::True => Ok(Cnf::true_cnf()),
        Formula::False => Ok(Cnf::false_cnf()),
        Formula::Lit(l) => Ok(match l.constant_value() {
            Some(true) => Cnf::true_cnf(),
            Some(false) => Cnf::false_cnf(),
            None => Cnf { clauses: vec![Clause::unit(l.clone())] },
        }),
        Formula::Not(_) => unreachable!("input is in negation normal form"),
        Formula::And(fs) => {
            let mut all = Vec::new();
            for g in fs {
                all.extend(cnf_of_nnf(g, cap)?.clauses);
                if all.len() > cap {
                    all = normalize(all);
                    if all.len() > cap {
                        return Err(CnfBlowup { cap });
                    }
                }
            }
            Ok(Cnf { clauses: normalize(all) })
        }
        Formula::Or(fs) => {
            let mut acc = vec![Clause::default()];
            for g in fs {
                let part = cnf_of_nnf(g, cap)?;
                if part.is_true() {
                    return Ok(Cnf::true_cnf());
                }
                if acc.len().saturating_mul(part.clauses.len()) > cap.saturating_mul(8) {
                    return Err(CnfBlowup { cap });
                }
                let mut product = Vec::with_capacity(acc.len() * part.clauses.len());
                for a in &acc {
                    for b in &part.clauses {
                        product.push(a.union(b));
                    }
                }
                acc = normalize(product);
                if acc.is_empty() {
                    return Ok(Cnf::true_cnf());
                }
                if acc.len() > cap {
                    return Err(CnfBlowup { cap });
                }
            }
            Ok(Cnf { clauses: acc })
        }
    }
}

/// Equivalence-preserving CNF with at most `cap` clauses.
pub fn to_cnf(f: &Formula, cap: usize) -> Result<Cnf, CnfBlowup> {
    let cnf = cnf_of_nnf(&nnf(f, false), cap)?;
    if cnf.clauses.len() > cap {
        return Err(CnfBlowup { cap });
    }
    Ok(cnf)
}

/// `vars(clause) ⊆ fluents`
pub fn clause_over(clause: &Clause, fluents: &FluentSet) -> bool {
    clause.literals.iter().all(|l| match l {
        Literal::Prop { fluent, .. } => fluents.contains(fluent),
        Literal::Cmp { lhs, rhs, .. } => lhs.vars().chain(rhs.vars()).all(|v| fluents.contains(&v)),
    })
}

/// Evaluates the disjunction at the (total) initial state.
pub fn clause_true_in(clause: &Clause, init: &State) -> Result<bool, ModelError> {
    clause.eval(init)
}
