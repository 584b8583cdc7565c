//! Pretty-printer producing PDDL text that parses back to the same tree.

use std::fmt::Write;

use super::ast::{format_number, Atom, Condition, Domain, Effect, InitEntry, NumExpr, Problem, Signature, Typed};
use crate::model::CmpOp;

fn typed(items: &[Typed]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < items.len() {
        let mut j = i;
        while j < items.len() && items[j].types == items[i].types {
            out.push_str(&items[j].name);
            out.push(' ');
            j += 1;
        }
        let t = &items[i].types;
        if t.len() == 1 {
            let _ = write!(out, "- {} ", t[0]);
        } else {
            let _ = write!(out, "- (either {}) ", t.join(" "));
        }
        i = j;
    }
    out.trim_end().to_string()
}

fn atom(a: &Atom) -> String {
    let mut s = format!("({}", a.name);
    for t in &a.args {
        s.push(' ');
        s.push_str(t.text());
    }
    s.push(')');
    s
}

fn signature(s: &Signature) -> String {
    if s.params.is_empty() {
        format!("({})", s.name)
    } else {
        format!("({} {})", s.name, typed(&s.params))
    }
}

fn num(e: &NumExpr) -> String {
    match e {
        NumExpr::Const(c) => format_number(c),
        NumExpr::Fn(a) => atom(a),
        NumExpr::Neg(x) => format!("(- {})", num(x)),
        NumExpr::Bin(op, a, b) => format!("({} {} {})", op.symbol(), num(a), num(b)),
    }
}

fn condition(c: &Condition) -> String {
    let join = |cs: &[Condition]| cs.iter().map(condition).collect::<Vec<_>>().join(" ");
    match c {
        Condition::And(cs) => format!("(and {})", join(cs)).replace("(and )", "(and)"),
        Condition::Or(cs) => format!("(or {})", join(cs)).replace("(or )", "(or)"),
        Condition::Not(x) => format!("(not {})", condition(x)),
        Condition::Imply(a, b) => format!("(imply {} {})", condition(a), condition(b)),
        Condition::Exists(vs, b) => format!("(exists ({}) {})", typed(vs), condition(b)),
        Condition::Forall(vs, b) => format!("(forall ({}) {})", typed(vs), condition(b)),
        Condition::Atom(a) => atom(a),
        Condition::Equal(a, b) => format!("(= {} {})", a.text(), b.text()),
        Condition::Compare(op, a, b) => {
            let sym = match op {
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Eq | CmpOp::Ne => "=",
                CmpOp::Ge => ">=",
                CmpOp::Gt => ">",
            };
            let c = format!("({sym} {} {})", num(a), num(b));
            if *op == CmpOp::Ne {
                format!("(not {c})")
            } else {
                c
            }
        }
    }
}

fn effect(e: &Effect) -> String {
    match e {
        Effect::Add(a) => atom(a),
        Effect::Del(a) => format!("(not {})", atom(a)),
        Effect::Numeric(op, target, v) => format!("({} {} {})", op.keyword(), atom(target), num(v)),
        Effect::Forall(vs, body) => {
            let inner: Vec<String> = body.iter().map(effect).collect();
            format!("(forall ({}) (and {}))", typed(vs), inner.join(" "))
        }
    }
}

pub fn print_domain(d: &Domain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", d.name);
    if !d.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", d.requirements.join(" "));
    }
    if !d.types.is_empty() {
        let _ = writeln!(out, "  (:types {})", typed(&d.types));
    }
    if !d.constants.is_empty() {
        let _ = writeln!(out, "  (:constants {})", typed(&d.constants));
    }
    let _ = writeln!(out, "  (:predicates");
    for p in &d.predicates {
        let _ = writeln!(out, "    {}", signature(p));
    }
    let _ = writeln!(out, "  )");
    if !d.functions.is_empty() {
        let _ = writeln!(out, "  (:functions");
        for f in &d.functions {
            let _ = writeln!(out, "    {}", signature(f));
        }
        let _ = writeln!(out, "  )");
    }
    for a in &d.actions {
        let _ = writeln!(out, "  (:action {}", a.name);
        let _ = writeln!(out, "    :parameters ({})", typed(&a.params));
        if let Some(p) = &a.precondition {
            let _ = writeln!(out, "    :precondition {}", condition(p));
        }
        let effects: Vec<String> = a.effects.iter().map(effect).collect();
        let _ = writeln!(out, "    :effect (and {})", effects.join(" "));
        let _ = writeln!(out, "  )");
    }
    out.push_str(")\n");
    out
}

pub fn print_problem(p: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", p.name);
    let _ = writeln!(out, "  (:domain {})", p.domain);
    let _ = writeln!(out, "  (:objects {})", typed(&p.objects));
    let _ = writeln!(out, "  (:init");
    for e in &p.init {
        match e {
            InitEntry::Fact(name, args) => {
                let _ = writeln!(out, "    {}", if args.is_empty() { format!("({name})") } else { format!("({name} {})", args.join(" ")) });
            }
            InitEntry::Value(name, args, v) => {
                let f = if args.is_empty() { format!("({name})") } else { format!("({name} {})", args.join(" ")) };
                let _ = writeln!(out, "    (= {f} {})", format_number(v));
            }
        }
    }
    let _ = writeln!(out, "  )");
    let _ = writeln!(out, "  (:goal {})", condition(&p.goal));
    if let Some(m) = &p.metric {
        let _ = writeln!(out, "  (:metric {} {})", if m.minimize { "minimize" } else { "maximize" }, num(&m.expr));
    }
    out.push_str(")\n");
    out
}
