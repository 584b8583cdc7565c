//! Lifted PDDL domain and problem syntax trees and the parser producing them.

use num::{BigInt, One, Zero};

use super::sexpr::{parse_all, Loc, Sexp};
use super::PddlError;
use crate::model::{CmpOp, Rational};

/// A typed name: variable, object or type with its declared type(s).
/// More than one type means `(either ...)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Typed {
    pub name: String,
    pub types: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub name: String,
    pub params: Vec<Typed>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Obj(String),
}

impl Term {
    pub fn text(&self) -> &str {
        match self {
            Term::Var(v) | Term::Obj(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub name: String,
    pub args: Vec<Term>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NumExpr {
    Const(Rational),
    Fn(Atom),
    Neg(Box<NumExpr>),
    Bin(ArithOp, Box<NumExpr>, Box<NumExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    And(Vec<Condition>),
    Or(Vec<Condition>),
    Not(Box<Condition>),
    Imply(Box<Condition>, Box<Condition>),
    Exists(Vec<Typed>, Box<Condition>),
    Forall(Vec<Typed>, Box<Condition>),
    Atom(Atom),
    /// Object equality `(= ?x ?y)`.
    Equal(Term, Term),
    Compare(CmpOp, NumExpr, NumExpr),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssignOp {
    Assign,
    Increase,
    Decrease,
    ScaleUp,
    ScaleDown,
}

impl AssignOp {
    pub fn keyword(self) -> &'static str {
        match self {
            AssignOp::Assign => "assign",
            AssignOp::Increase => "increase",
            AssignOp::Decrease => "decrease",
            AssignOp::ScaleUp => "scale-up",
            AssignOp::ScaleDown => "scale-down",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Effect {
    Add(Atom),
    Del(Atom),
    Numeric(AssignOp, Atom, NumExpr),
    Forall(Vec<Typed>, Vec<Effect>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<Typed>,
    pub precondition: Option<Condition>,
    pub effects: Vec<Effect>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    /// Declared types with their parents.
    pub types: Vec<Typed>,
    pub constants: Vec<Typed>,
    pub predicates: Vec<Signature>,
    pub functions: Vec<Signature>,
    pub actions: Vec<ActionSchema>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitEntry {
    Fact(String, Vec<String>),
    Value(String, Vec<String>, Rational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metric {
    pub minimize: bool,
    pub expr: NumExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub domain: String,
    pub objects: Vec<Typed>,
    pub init: Vec<InitEntry>,
    pub goal: Condition,
    pub metric: Option<Metric>,
}

fn err(loc: Loc, message: impl Into<String>) -> PddlError {
    PddlError::Parse { loc, message: message.into() }
}

fn unsupported(feature: &str) -> PddlError {
    PddlError::UnsupportedFeature(feature.to_string())
}

fn expect_list<'a>(s: &'a Sexp, what: &str) -> Result<&'a [Sexp], PddlError> {
    s.list().ok_or_else(|| err(s.loc(), format!("expected {what}")))
}

fn expect_atom<'a>(s: &'a Sexp, what: &str) -> Result<&'a str, PddlError> {
    s.atom().ok_or_else(|| err(s.loc(), format!("expected {what}")))
}

/// Parses `a b - t c - (either u v) d` style lists. Untyped names get
/// `default`.
fn typed_list(items: &[Sexp], default: &str) -> Result<Vec<Typed>, PddlError> {
    let mut out = vec![];
    let mut pending: Vec<String> = vec![];
    let mut i = 0;
    while i < items.len() {
        let s = &items[i];
        if s.atom() == Some("-") {
            let t = items.get(i + 1).ok_or_else(|| err(s.loc(), "missing type after `-`"))?;
            let types = match t {
                Sexp::Atom(a, _) => vec![a.clone()],
                Sexp::List(xs, loc) if t.head() == Some("either") => xs[1..]
                    .iter()
                    .map(|x| expect_atom(x, "type name").map(str::to_owned))
                    .collect::<Result<_, _>>()
                    .and_then(|v: Vec<String>| if v.is_empty() { Err(err(*loc, "empty either")) } else { Ok(v) })?,
                _ => return Err(err(t.loc(), "expected a type")),
            };
            if pending.is_empty() {
                return Err(err(s.loc(), "`-` without preceding names"));
            }
            out.extend(pending.drain(..).map(|name| Typed { name, types: types.clone() }));
            i += 2;
        } else {
            pending.push(expect_atom(s, "a name")?.to_owned());
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|name| Typed { name, types: vec![default.to_owned()] }));
    Ok(out)
}

fn signature(s: &Sexp) -> Result<Signature, PddlError> {
    let xs = expect_list(s, "a signature")?;
    let name = expect_atom(xs.first().ok_or_else(|| err(s.loc(), "empty signature"))?, "a name")?;
    Ok(Signature { name: name.to_owned(), params: typed_list(&xs[1..], "object")? })
}

pub(crate) fn parse_number(a: &str) -> Option<Rational> {
    let (neg, body) = match a.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, a),
    };
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit() || c == '.') || body.matches('.').count() > 1 {
        return None;
    }
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits = format!("{int}{frac}");
    let numer: BigInt = if digits.is_empty() { return None } else { digits.parse().ok()? };
    let denom = num::pow(BigInt::from(10), frac.len());
    let r = Rational::new(numer, denom);
    Some(if neg { -r } else { r })
}

fn term(s: &Sexp) -> Result<Term, PddlError> {
    let a = expect_atom(s, "a term")?;
    Ok(if a.starts_with('?') { Term::Var(a.to_owned()) } else { Term::Obj(a.to_owned()) })
}

fn atom_of(xs: &[Sexp], loc: Loc) -> Result<Atom, PddlError> {
    let name = expect_atom(xs.first().ok_or_else(|| err(loc, "empty atom"))?, "a predicate name")?;
    Ok(Atom { name: name.to_owned(), args: xs[1..].iter().map(term).collect::<Result<_, _>>()? })
}

fn num_expr(s: &Sexp) -> Result<NumExpr, PddlError> {
    match s {
        Sexp::Atom(a, loc) => match parse_number(a) {
            Some(r) => Ok(NumExpr::Const(r)),
            None if a.starts_with('?') => Err(err(*loc, "object variable used as a number")),
            None => Err(err(*loc, format!("expected a number, found `{a}`"))),
        },
        Sexp::List(xs, loc) => {
            let op = match s.head() {
                Some("+") => Some(ArithOp::Add),
                Some("-") => Some(ArithOp::Sub),
                Some("*") => Some(ArithOp::Mul),
                Some("/") => Some(ArithOp::Div),
                _ => None,
            };
            match (op, xs.len()) {
                (Some(ArithOp::Sub), 2) => Ok(NumExpr::Neg(Box::new(num_expr(&xs[1])?))),
                (Some(op), n) if n >= 3 => {
                    let mut acc = num_expr(&xs[1])?;
                    for x in &xs[2..] {
                        acc = NumExpr::Bin(op, Box::new(acc), Box::new(num_expr(x)?));
                    }
                    Ok(acc)
                }
                (Some(_), _) => Err(err(*loc, "wrong number of operands")),
                (None, _) => Ok(NumExpr::Fn(atom_of(xs, *loc)?)),
            }
        }
    }
}

fn cmp_op(a: &str) -> Option<CmpOp> {
    Some(match a {
        "<" => CmpOp::Lt,
        "<=" => CmpOp::Le,
        "=" => CmpOp::Eq,
        ">=" => CmpOp::Ge,
        ">" => CmpOp::Gt,
        _ => return None,
    })
}

fn is_term_atom(s: &Sexp) -> bool {
    matches!(s, Sexp::Atom(a, _) if parse_number(a).is_none())
}

fn condition(s: &Sexp) -> Result<Condition, PddlError> {
    let xs = expect_list(s, "a condition")?;
    let loc = s.loc();
    let Some(head) = s.head() else {
        return if xs.is_empty() { Ok(Condition::And(vec![])) } else { Err(err(loc, "expected a condition")) };
    };
    let args = &xs[1..];
    let arity = |n: usize| if args.len() == n { Ok(()) } else { Err(err(loc, format!("`{head}` takes {n} argument(s)"))) };
    Ok(match head {
        "and" => Condition::And(args.iter().map(condition).collect::<Result<_, _>>()?),
        "or" => Condition::Or(args.iter().map(condition).collect::<Result<_, _>>()?),
        "not" => {
            arity(1)?;
            Condition::Not(Box::new(condition(&args[0])?))
        }
        "imply" => {
            arity(2)?;
            Condition::Imply(Box::new(condition(&args[0])?), Box::new(condition(&args[1])?))
        }
        "exists" | "forall" => {
            arity(2)?;
            let vars = typed_list(expect_list(&args[0], "a variable list")?, "object")?;
            let body = Box::new(condition(&args[1])?);
            if head == "exists" {
                Condition::Exists(vars, body)
            } else {
                Condition::Forall(vars, body)
            }
        }
        "=" if args.len() == 2 && is_term_atom(&args[0]) && is_term_atom(&args[1]) => {
            Condition::Equal(term(&args[0])?, term(&args[1])?)
        }
        "preference" => return Err(unsupported("preferences")),
        h => match cmp_op(h) {
            Some(op) => {
                arity(2)?;
                Condition::Compare(op, num_expr(&args[0])?, num_expr(&args[1])?)
            }
            None => Condition::Atom(atom_of(xs, loc)?),
        },
    })
}

fn effect(s: &Sexp, out: &mut Vec<Effect>) -> Result<(), PddlError> {
    let xs = expect_list(s, "an effect")?;
    let loc = s.loc();
    let Some(head) = s.head() else {
        return if xs.is_empty() { Ok(()) } else { Err(err(loc, "expected an effect")) };
    };
    let args = &xs[1..];
    match head {
        "and" => {
            for a in args {
                effect(a, out)?;
            }
        }
        "not" => {
            let inner = args.first().filter(|_| args.len() == 1).ok_or_else(|| err(loc, "`not` takes 1 argument"))?;
            out.push(Effect::Del(atom_of(expect_list(inner, "an atom")?, inner.loc())?));
        }
        "when" => return Err(unsupported("conditional-effects")),
        "forall" => {
            if args.len() != 2 {
                return Err(err(loc, "`forall` takes 2 arguments"));
            }
            let vars = typed_list(expect_list(&args[0], "a variable list")?, "object")?;
            let mut body = vec![];
            effect(&args[1], &mut body)?;
            out.push(Effect::Forall(vars, body));
        }
        "assign" | "increase" | "decrease" | "scale-up" | "scale-down" => {
            if args.len() != 2 {
                return Err(err(loc, format!("`{head}` takes 2 arguments")));
            }
            let op = match head {
                "assign" => AssignOp::Assign,
                "increase" => AssignOp::Increase,
                "decrease" => AssignOp::Decrease,
                "scale-up" => AssignOp::ScaleUp,
                _ => AssignOp::ScaleDown,
            };
            let target = atom_of(expect_list(&args[0], "a function term")?, args[0].loc())?;
            out.push(Effect::Numeric(op, target, num_expr(&args[1])?));
        }
        _ => out.push(Effect::Add(atom_of(xs, loc)?)),
    }
    Ok(())
}

const UNSUPPORTED_REQUIREMENTS: [(&str, &str); 5] = [
    (":durative-actions", "durative-actions"),
    (":derived-predicates", "derived-predicates"),
    (":conditional-effects", "conditional-effects"),
    (":timed-initial-literals", "timed-initial-literals"),
    (":preferences", "preferences"),
];

fn action(xs: &[Sexp], loc: Loc) -> Result<ActionSchema, PddlError> {
    let name = expect_atom(xs.get(1).ok_or_else(|| err(loc, "action without a name"))?, "an action name")?;
    let mut a = ActionSchema { name: name.to_owned(), params: vec![], precondition: None, effects: vec![] };
    let mut i = 2;
    while i < xs.len() {
        let key = expect_atom(&xs[i], "an action keyword")?;
        let val = xs.get(i + 1).ok_or_else(|| err(xs[i].loc(), format!("`{key}` without a value")))?;
        match key {
            ":parameters" => a.params = typed_list(expect_list(val, "a parameter list")?, "object")?,
            ":precondition" => a.precondition = Some(condition(val)?),
            ":effect" => effect(val, &mut a.effects)?,
            _ => return Err(err(xs[i].loc(), format!("unknown action keyword `{key}`"))),
        }
        i += 2;
    }
    Ok(a)
}

fn define_body<'a>(text: &'a [Sexp], kind: &str) -> Result<(&'a [Sexp], String), PddlError> {
    let top = text.first().ok_or_else(|| err(Loc { line: 1, col: 1 }, format!("empty {kind} file")))?;
    if text.len() > 1 {
        return Err(err(text[1].loc(), "trailing input after `define`"));
    }
    let xs = expect_list(top, "`(define ...)`")?;
    if top.head() != Some("define") {
        return Err(err(top.loc(), "expected `(define ...)`"));
    }
    let header = expect_list(xs.get(1).ok_or_else(|| err(top.loc(), "missing header"))?, "a header")?;
    if header.first().and_then(Sexp::atom) != Some(kind) || header.len() != 2 {
        return Err(err(xs[1].loc(), format!("expected `({kind} NAME)`")));
    }
    Ok((&xs[2..], expect_atom(&header[1], "a name")?.to_owned()))
}

pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let sexps = parse_all(text).map_err(|e| err(e.loc, e.message))?;
    let (sections, name) = define_body(&sexps, "domain")?;
    let mut d = Domain {
        name,
        requirements: vec![],
        types: vec![],
        constants: vec![],
        predicates: vec![],
        functions: vec![],
        actions: vec![],
    };
    for s in sections {
        let xs = expect_list(s, "a domain section")?;
        let args = &xs[1..];
        match s.head() {
            Some(":requirements") => {
                for r in args {
                    let r = expect_atom(r, "a requirement")?;
                    if let Some((_, feature)) = UNSUPPORTED_REQUIREMENTS.iter().find(|(k, _)| *k == r) {
                        return Err(unsupported(feature));
                    }
                    d.requirements.push(r.to_owned());
                }
            }
            Some(":types") => d.types = typed_list(args, "object")?,
            Some(":constants") => d.constants = typed_list(args, "object")?,
            Some(":predicates") => d.predicates = args.iter().map(signature).collect::<Result<_, _>>()?,
            Some(":functions") => {
                // `- number` annotations are accepted and dropped
                let mut i = 0;
                while i < args.len() {
                    if args[i].atom() == Some("-") {
                        i += 2;
                        continue;
                    }
                    d.functions.push(signature(&args[i])?);
                    i += 1;
                }
            }
            Some(":action") => d.actions.push(action(xs, s.loc())?),
            Some(":durative-action") => return Err(unsupported("durative-actions")),
            Some(":derived") => return Err(unsupported("derived-predicates")),
            Some(":constraints") => return Err(unsupported("constraints")),
            _ => return Err(err(s.loc(), "unknown domain section")),
        }
    }
    Ok(d)
}

pub fn parse_problem(text: &str) -> Result<Problem, PddlError> {
    let sexps = parse_all(text).map_err(|e| err(e.loc, e.message))?;
    let (sections, name) = define_body(&sexps, "problem")?;
    let mut p = Problem { name, domain: String::new(), objects: vec![], init: vec![], goal: Condition::And(vec![]), metric: None };
    for s in sections {
        let xs = expect_list(s, "a problem section")?;
        let args = &xs[1..];
        match s.head() {
            Some(":domain") => p.domain = expect_atom(args.first().ok_or_else(|| err(s.loc(), "missing domain name"))?, "a name")?.to_owned(),
            Some(":requirements") => {}
            Some(":objects") => p.objects = typed_list(args, "object")?,
            Some(":init") => {
                for e in args {
                    let ys = expect_list(e, "an initial fact")?;
                    match e.head() {
                        Some("=") => {
                            if ys.len() != 3 {
                                return Err(err(e.loc(), "`=` takes 2 arguments"));
                            }
                            let f = expect_list(&ys[1], "a function term")?;
                            let fname = expect_atom(f.first().ok_or_else(|| err(ys[1].loc(), "empty term"))?, "a name")?;
                            let fargs = f[1..].iter().map(|x| expect_atom(x, "an object").map(str::to_owned)).collect::<Result<_, _>>()?;
                            let v = expect_atom(&ys[2], "a number")?;
                            let v = parse_number(v).ok_or_else(|| err(ys[2].loc(), "expected a number"))?;
                            p.init.push(InitEntry::Value(fname.to_owned(), fargs, v));
                        }
                        Some("at") if ys.len() == 3 && ys[1].atom().and_then(parse_number).is_some() => {
                            return Err(unsupported("timed-initial-literals"))
                        }
                        Some(name) => {
                            let objs = ys[1..].iter().map(|x| expect_atom(x, "an object").map(str::to_owned)).collect::<Result<_, _>>()?;
                            p.init.push(InitEntry::Fact(name.to_owned(), objs));
                        }
                        None => return Err(err(e.loc(), "expected an initial fact")),
                    }
                }
            }
            Some(":goal") => {
                p.goal = condition(args.first().ok_or_else(|| err(s.loc(), "missing goal"))?)?;
            }
            Some(":metric") => {
                if args.len() != 2 {
                    return Err(err(s.loc(), "`:metric` takes a direction and an expression"));
                }
                let minimize = match expect_atom(&args[0], "minimize or maximize")? {
                    "minimize" => true,
                    "maximize" => false,
                    other => return Err(err(args[0].loc(), format!("unknown metric direction `{other}`"))),
                };
                let expr = match &args[1] {
                    Sexp::Atom(a, _) if a == "total-time" => return Err(unsupported("total-time metric")),
                    x => num_expr(x)?,
                };
                p.metric = Some(Metric { minimize, expr });
            }
            Some(":constraints") => return Err(unsupported("constraints")),
            _ => return Err(err(s.loc(), "unknown problem section")),
        }
    }
    Ok(p)
}

/// `num` as a PDDL number: integers verbatim, other values as exact
/// decimals when they have one and as a division otherwise.
pub(crate) fn format_number(r: &Rational) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    let mut d = r.denom().clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("(/ {} {})", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let scaled = (r * Rational::from_integer(num::pow(BigInt::from(10), places))).to_integer();
    let neg = scaled < BigInt::from(0);
    let digits = if neg { (-scaled).to_string() } else { scaled.to_string() };
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int, frac) = digits.split_at(digits.len() - places);
    format!("{}{int}.{frac}", if neg { "-" } else { "" })
}
