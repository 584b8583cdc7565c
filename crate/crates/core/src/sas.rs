//! SAS+ translator output (format version 3) without axioms.
//!
//! The parser keeps the source text together with the byte ranges of the
//! operator count line and of every operator block, so operators can be
//! removed without disturbing any other byte of the file.

use std::fmt::Write;
use std::ops::Range;

use crate::model::{
    rat, ActionId, CaeTriple, CmpOp, EffectFn, Fluent, FluentId, Formula, Literal, PlanningProblem, State, Value,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SasError {
    #[error("{section}, line {line}: {message}")]
    Parse { section: String, line: usize, message: String },
    #[error("unsupported SAS+ version {0}; only version 3 is read")]
    UnsupportedVersion(String),
    #[error("axioms are not supported ({0} axiom rules)")]
    AxiomsUnsupported(usize),
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SasVariable {
    pub name: String,
    pub axiom_layer: i64,
    pub values: Vec<String>,
}

impl SasVariable {
    pub fn domain_size(&self) -> usize {
        self.values.len()
    }
}

/// One pre/post entry; `pre` is `None` for the wildcard `-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SasEffect {
    pub var: usize,
    pub pre: Option<usize>,
    pub post: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SasOperator {
    pub name: String,
    pub prevail: Vec<(usize, usize)>,
    pub effects: Vec<SasEffect>,
    pub cost: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Source {
    text: String,
    count_line: Range<usize>,
    operators: Vec<Range<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SasTask {
    pub version: u32,
    pub metric: bool,
    pub variables: Vec<SasVariable>,
    pub mutex_groups: Vec<Vec<(usize, usize)>>,
    pub init: Vec<usize>,
    pub goal: Vec<(usize, usize)>,
    pub operators: Vec<SasOperator>,
    source: Option<Source>,
}

struct Lines<'a> {
    text: &'a str,
    /// (byte start, byte end excluding the newline, 1-based line number)
    lines: Vec<(usize, usize, usize)>,
    pos: usize,
    section: &'static str,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let mut lines = vec![];
        let mut start = 0;
        for (n, piece) in text.split_inclusive('\n').enumerate() {
            let body = piece.strip_suffix('\n').unwrap_or(piece);
            let body = body.strip_suffix('\r').unwrap_or(body);
            lines.push((start, start + body.len(), n + 1));
            start += piece.len();
        }
        Lines { text, lines, pos: 0, section: "header" }
    }

    fn err(&self, message: impl Into<String>) -> SasError {
        let line = self.lines.get(self.pos.saturating_sub(1)).map_or(0, |l| l.2);
        SasError::Parse { section: self.section.to_string(), line, message: message.into() }
    }

    fn next(&mut self) -> Result<&'a str, SasError> {
        let &(s, e, _) = self.lines.get(self.pos).ok_or_else(|| self.err("unexpected end of file"))?;
        self.pos += 1;
        Ok(self.text[s..e].trim())
    }

    fn expect(&mut self, word: &str) -> Result<(), SasError> {
        let got = self.next()?;
        if got == word {
            Ok(())
        } else {
            Err(self.err(format!("expected `{word}`, found `{got}`")))
        }
    }

    fn number<T: std::str::FromStr>(&mut self) -> Result<T, SasError> {
        let s = self.next()?;
        s.parse().map_err(|_| {
            self.err(format!("expected a number, found `{s}`"))
        })
    }

    fn numbers(&mut self) -> Result<Vec<i64>, SasError> {
        let s = self.next()?;
        s.split_whitespace()
            .map(|w| w.parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|_| {
                self.err(format!("expected numbers, found `{s}`"))
            })
    }

    fn start_of_current(&self) -> usize {
        self.lines.get(self.pos).map_or(self.text.len(), |l| l.0)
    }

    /// Byte just past the newline of the previous line.
    fn end_of_previous(&self) -> usize {
        self.lines.get(self.pos).map_or(self.text.len(), |l| l.0)
    }
}

fn check_value(lines: &Lines, vars: &[SasVariable], var: i64, val: i64) -> Result<(usize, usize), SasError> {
    let v = usize::try_from(var).ok().filter(|v| *v < vars.len()).ok_or_else(|| lines.err(format!("unknown variable {var}")))?;
    let x = usize::try_from(val)
        .ok()
        .filter(|x| *x < vars[v].domain_size())
        .ok_or_else(|| lines.err(format!("value {val} out of range for variable {v}")))?;
    Ok((v, x))
}

fn pair(lines: &mut Lines, vars: &[SasVariable]) -> Result<(usize, usize), SasError> {
    let xs = lines.numbers()?;
    if xs.len() != 2 {
        return Err(lines.err("expected `variable value`"));
    }
    check_value(lines, vars, xs[0], xs[1])
}

/// Parses a translator output file.
pub fn parse_sas(text: &str) -> Result<SasTask, SasError> {
    let mut l = Lines::new(text);
    l.section = "version";
    l.expect("begin_version")?;
    let version = l.next()?;
    if version != "3" {
        return Err(SasError::UnsupportedVersion(version.to_string()));
    }
    l.expect("end_version")?;

    l.section = "metric";
    l.expect("begin_metric")?;
    let metric = match l.next()? {
        "0" => false,
        "1" => true,
        other => {
            return Err(l.err(format!("metric must be 0 or 1, found `{other}`")));
        }
    };
    l.expect("end_metric")?;

    l.section = "variables";
    let n: usize = l.number()?;
    let mut variables = Vec::with_capacity(n);
    for _ in 0..n {
        l.expect("begin_variable")?;
        let name = l.next()?.to_string();
        let axiom_layer: i64 = l.number()?;
        let size: usize = l.number()?;
        let values = (0..size).map(|_| l.next().map(str::to_owned)).collect::<Result<_, _>>()?;
        l.expect("end_variable")?;
        variables.push(SasVariable { name, axiom_layer, values });
    }

    l.section = "mutex groups";
    let n: usize = l.number()?;
    let mut mutex_groups = Vec::with_capacity(n);
    for _ in 0..n {
        l.expect("begin_mutex_group")?;
        let k: usize = l.number()?;
        mutex_groups.push((0..k).map(|_| pair(&mut l, &variables)).collect::<Result<_, _>>()?);
        l.expect("end_mutex_group")?;
    }

    l.section = "initial state";
    l.expect("begin_state")?;
    let mut init = Vec::with_capacity(variables.len());
    for v in 0..variables.len() {
        let x: i64 = l.number()?;
        init.push(check_value(&l, &variables, v as i64, x)?.1);
    }
    l.expect("end_state")?;

    l.section = "goal";
    l.expect("begin_goal")?;
    let k: usize = l.number()?;
    let goal = (0..k).map(|_| pair(&mut l, &variables)).collect::<Result<_, _>>()?;
    l.expect("end_goal")?;

    l.section = "operators";
    let count_start = l.start_of_current();
    let n: usize = l.number()?;
    let count_line = count_start..l.lines[l.pos - 1].1;
    let mut operators = Vec::with_capacity(n);
    let mut spans = Vec::with_capacity(n);
    for _ in 0..n {
        let start = l.start_of_current();
        l.expect("begin_operator")?;
        let name = l.next()?.to_string();
        let k: usize = l.number()?;
        let prevail = (0..k).map(|_| pair(&mut l, &variables)).collect::<Result<_, _>>()?;
        let k: usize = l.number()?;
        let mut effects = Vec::with_capacity(k);
        for _ in 0..k {
            let xs = l.numbers()?;
            let conds = *xs.first().ok_or_else(|| l.err("empty effect line"))?;
            if conds != 0 {
                return Err(SasError::UnsupportedFeature("conditional-effects".into()));
            }
            if xs.len() != 4 {
                return Err(l.err("effect line must read `0 var pre post`"));
            }
            let (var, post) = check_value(&l, &variables, xs[1], xs[3])?;
            let pre = if xs[2] == -1 { None } else { Some(check_value(&l, &variables, xs[1], xs[2])?.1) };
            effects.push(SasEffect { var, pre, post });
        }
        let cost: i64 = l.number()?;
        l.expect("end_operator")?;
        spans.push(start..l.end_of_previous());
        operators.push(SasOperator { name, prevail, effects, cost });
    }

    l.section = "axioms";
    let axioms: usize = l.number()?;
    if axioms > 0 {
        return Err(SasError::AxiomsUnsupported(axioms));
    }
    while l.pos < l.lines.len() {
        if !l.next()?.is_empty() {
            return Err(l.err("trailing content after the axiom section"));
        }
    }

    Ok(SasTask {
        version: 3,
        metric,
        variables,
        mutex_groups,
        init,
        goal,
        operators,
        source: Some(Source { text: text.to_string(), count_line, operators: spans }),
    })
}

impl SasTask {
    /// A task without source text; `emit_sas` falls back to the writer.
    pub fn without_source(mut self) -> Self {
        self.source = None;
        self
    }
}

/// Canonical translator formatting of `task`.
pub fn write_sas(task: &SasTask) -> String {
    let mut out = String::new();
    let _ = write!(out, "begin_version\n{}\nend_version\n", task.version);
    let _ = write!(out, "begin_metric\n{}\nend_metric\n", u8::from(task.metric));
    let _ = writeln!(out, "{}", task.variables.len());
    for v in &task.variables {
        let _ = write!(out, "begin_variable\n{}\n{}\n{}\n", v.name, v.axiom_layer, v.values.len());
        for x in &v.values {
            let _ = writeln!(out, "{x}");
        }
        out.push_str("end_variable\n");
    }
    let _ = writeln!(out, "{}", task.mutex_groups.len());
    for g in &task.mutex_groups {
        let _ = writeln!(out, "begin_mutex_group\n{}", g.len());
        for (v, x) in g {
            let _ = writeln!(out, "{v} {x}");
        }
        out.push_str("end_mutex_group\n");
    }
    out.push_str("begin_state\n");
    for x in &task.init {
        let _ = writeln!(out, "{x}");
    }
    out.push_str("end_state\n");
    let _ = writeln!(out, "begin_goal\n{}", task.goal.len());
    for (v, x) in &task.goal {
        let _ = writeln!(out, "{v} {x}");
    }
    out.push_str("end_goal\n");
    let _ = writeln!(out, "{}", task.operators.len());
    for op in &task.operators {
        write_operator(&mut out, op);
    }
    out.push_str("0\n");
    out
}

fn write_operator(out: &mut String, op: &SasOperator) {
    let _ = writeln!(out, "begin_operator\n{}\n{}", op.name, op.prevail.len());
    for (v, x) in &op.prevail {
        let _ = writeln!(out, "{v} {x}");
    }
    let _ = writeln!(out, "{}", op.effects.len());
    for e in &op.effects {
        let pre = e.pre.map_or(-1, |p| p as i64);
        let _ = writeln!(out, "0 {} {} {}", e.var, pre, e.post);
    }
    let _ = write!(out, "{}\nend_operator\n", op.cost);
}

/// The task with only the operators for which `keep` holds. Every byte
/// outside the operator section and its count line is preserved.
pub fn filter_operators(task: &SasTask, keep: impl Fn(usize) -> bool) -> String {
    match &task.source {
        Some(src) => {
            let kept: Vec<usize> = (0..task.operators.len()).filter(|&i| keep(i)).collect();
            let mut out = String::with_capacity(src.text.len());
            out.push_str(&src.text[..src.count_line.start]);
            out.push_str(&kept.len().to_string());
            let section_start = src.operators.first().map_or(src.count_line.end, |r| r.start);
            let section_end = src.operators.last().map_or(src.count_line.end, |r| r.end);
            out.push_str(&src.text[src.count_line.end..section_start]);
            for i in kept {
                out.push_str(&src.text[src.operators[i].clone()]);
            }
            out.push_str(&src.text[section_end..]);
            out
        }
        None => {
            let filtered = SasTask {
                operators: task.operators.iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, o)| o.clone()).collect(),
                ..task.clone()
            };
            write_sas(&filtered)
        }
    }
}

/// Every variable becomes a bounded numeric fluent, every operator one
/// triple named after the operator.
pub fn sas_to_problem(task: &SasTask) -> PlanningProblem {
    let eq = |v: usize, x: usize| Formula::lit(Literal::num(FluentId(v as u32), CmpOp::Eq, x as i64));
    let fluents = task
        .variables
        .iter()
        .map(|v| Fluent::bounded(v.name.clone(), 0, v.domain_size().saturating_sub(1) as i64))
        .collect();
    let transitions = task
        .operators
        .iter()
        .enumerate()
        .map(|(i, op)| {
            let mut pre: Vec<Formula> = op.prevail.iter().map(|&(v, x)| eq(v, x)).collect();
            pre.extend(op.effects.iter().filter_map(|e| e.pre.map(|p| eq(e.var, p))));
            let effects = op.effects.iter().map(|e| (FluentId(e.var as u32), EffectFn::AssignConst(Value::int(e.post as i64))));
            let cost = if task.metric { rat(op.cost) } else { rat(1) };
            CaeTriple::new(Formula::And(pre).simplify(), ActionId(i as u32), effects).with_cost(cost)
        })
        .collect();
    PlanningProblem {
        fluents,
        actions: task.operators.iter().map(|o| o.name.clone()).collect(),
        transitions,
        init: State(task.init.iter().map(|&x| Value::int(x as i64)).collect()),
        goal: Formula::And(task.goal.iter().map(|&(v, x)| eq(v, x)).collect()).simplify(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "begin_version
3
end_version
begin_metric
0
end_metric
4
begin_variable
var0
-1
2
Atom a()
NegatedAtom a()
end_variable
begin_variable
var1
-1
2
Atom b()
NegatedAtom b()
end_variable
begin_variable
var2
-1
3
Atom c(x)
Atom c(y)
Atom c(z)
end_variable
begin_variable
var3
-1
2
Atom d()
NegatedAtom d()
end_variable
1
begin_mutex_group
2
2 0
2 1
end_mutex_group
begin_state
0
1
0
1
end_state
begin_goal
1
0 1
end_goal
2
begin_operator
op-a
1
3 1
1
0 0 0 1
1
end_operator
begin_operator
op-b
0
2
0 1 -1 0
0 2 0 2
1
end_operator
0
";

    #[test]
    fn parses_and_translates() {
        let t = parse_sas(TINY).unwrap();
        assert_eq!(t.variables.len(), 4);
        assert_eq!(t.operators.len(), 2);
        assert_eq!(t.mutex_groups, vec![vec![(2, 0), (2, 1)]]);
        let pp = sas_to_problem(&t);
        pp.validate().unwrap();
        assert_eq!(pp.transitions.len(), 2);
        // prevail var3=1 and var0: 0 -> 1
        let expected = Formula::And(vec![
            Formula::lit(Literal::num(FluentId(3), CmpOp::Eq, 1)),
            Formula::lit(Literal::num(FluentId(0), CmpOp::Eq, 0)),
        ]);
        assert_eq!(pp.transitions[0].precondition, expected);
        assert_eq!(pp.transitions[0].effects[&FluentId(0)], EffectFn::AssignConst(Value::int(1)));
        // two pre-posts give two effects; the -1 adds no conjunct
        assert_eq!(pp.transitions[1].effects.len(), 2);
        assert_eq!(pp.transitions[1].precondition, Formula::lit(Literal::num(FluentId(2), CmpOp::Eq, 0)));
        assert_eq!(pp.fluents[2].bound, Some((0, 2)));
    }

    #[test]
    fn byte_identical_round_trip() {
        let t = parse_sas(TINY).unwrap();
        assert_eq!(filter_operators(&t, |_| true), TINY);
        assert_eq!(write_sas(&t), TINY);
    }

    #[test]
    fn dropping_an_operator_touches_only_the_operator_section() {
        let t = parse_sas(TINY).unwrap();
        let out = filter_operators(&t, |i| i == 1);
        let again = parse_sas(&out).unwrap();
        assert_eq!(again.operators.len(), 1);
        assert_eq!(again.operators[0].name, "op-b");
        assert_eq!(write_sas(&t.clone().without_source()).len(), TINY.len());
        let none = filter_operators(&t, |_| false);
        assert_eq!(parse_sas(&none).unwrap().operators.len(), 0);
    }

    #[test]
    fn rejects_other_versions_and_axioms() {
        let v2 = TINY.replacen("3\nend_version", "2\nend_version", 1);
        assert_eq!(parse_sas(&v2).unwrap_err(), SasError::UnsupportedVersion("2".into()));
        let axioms = TINY.strip_suffix("0\n").unwrap().to_string() + "1\n";
        assert_eq!(parse_sas(&axioms).unwrap_err(), SasError::AxiomsUnsupported(1));
    }

    #[test]
    fn errors_name_section_and_line() {
        let bad = TINY.replace("0 2 0 2", "0 2 0 7");
        match parse_sas(&bad).unwrap_err() {
            SasError::Parse { section, line, .. } => {
                assert_eq!(section, "operators");
                assert_eq!(line, TINY.lines().position(|l| l == "0 2 0 2").unwrap() + 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_operators() {
        let t = parse_sas(&filter_operators(&parse_sas(TINY).unwrap(), |_| false)).unwrap();
        assert!(sas_to_problem(&t).transitions.is_empty());
    }

    #[test]
    fn metric_costs() {
        let t = parse_sas(&TINY.replacen("begin_metric\n0", "begin_metric\n1", 1).replace("1\nend_operator\nbegin_operator\nop-b", "4\nend_operator\nbegin_operator\nop-b")).unwrap();
        let pp = sas_to_problem(&t);
        assert_eq!(pp.transitions[0].cost, rat(4));
        assert_eq!(pp.transitions[1].cost, rat(1));
        let unit = sas_to_problem(&parse_sas(TINY).unwrap());
        assert!(unit.transitions.iter().all(|t| t.cost == rat(1)));
    }
}
