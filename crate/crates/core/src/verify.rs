//! Oracle cross-check of a scoping result on one instance.
//!
//! The original, pruned and reduced problems are solved optimally; costs and
//! solvability must agree, and the reduced plan must lift to an executable
//! plan of the original with the same cost and the same trace on the
//! relevant fluents.

use std::fmt;

use serde::Serialize;

use crate::model::PlanningProblem;
use crate::oracle::{replay, solve, SearchLimits, SolveOutcome};
use crate::scoping::{check_scoped, lift_plan, pruned_problem, scope_task, ReducedProblem, ScopeOptions, ScopeResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", content = "reason", rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail(String),
    Inconclusive(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "PASS"),
            Verdict::Fail(r) => write!(f, "FAIL ({r})"),
            Verdict::Inconclusive(r) => write!(f, "INCONCLUSIVE ({r})"),
        }
    }
}

/// Which stage rejected the instance, for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Scoping,
    Structure,
    Solvability,
    Cost,
    Lifting,
    Trace,
}

/// `OracleOnly` skips the structural checks so that an unsound projection
/// has to be caught by search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Checks {
    #[default]
    All,
    OracleOnly,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub verdict: Verdict,
    pub stage: Option<Stage>,
    pub original_cost: Option<String>,
    pub reduced_cost: Option<String>,
    pub relevant: usize,
    pub causally_linked: usize,
    pub irrelevant: usize,
}

fn cost_string(o: &SolveOutcome) -> Option<String> {
    match o {
        SolveOutcome::Solved(p) => Some(p.cost.to_string()),
        _ => None,
    }
}

/// Scopes `pp` with `opts` and checks the result against the oracle.
pub fn verify(pp: &PlanningProblem, opts: &ScopeOptions, limits: &SearchLimits, checks: Checks) -> VerifyReport {
    match scope_task(pp, opts) {
        Ok(scope) => verify_scope(pp, &scope, opts, limits, checks),
        Err(e) => VerifyReport {
            verdict: Verdict::Fail(format!("scoping failed: {e}")),
            stage: Some(Stage::Scoping),
            original_cost: None,
            reduced_cost: None,
            relevant: 0,
            causally_linked: 0,
            irrelevant: 0,
        },
    }
}

pub fn verify_scope(
    pp: &PlanningProblem,
    scope: &ScopeResult,
    opts: &ScopeOptions,
    limits: &SearchLimits,
    checks: Checks,
) -> VerifyReport {
    let mut report = VerifyReport {
        verdict: Verdict::Pass,
        stage: None,
        original_cost: None,
        reduced_cost: None,
        relevant: scope.j_rel.len(),
        causally_linked: scope.j_cl.len(),
        irrelevant: scope.j_irrel.len(),
    };
    let fail = |report: &mut VerifyReport, stage: Stage, why: String| {
        report.verdict = Verdict::Fail(why);
        report.stage = Some(stage);
    };

    if checks == Checks::All {
        let why = match check_scoped(pp, scope, opts) {
            Ok(c) if c.is_scoped() => None,
            Ok(c) => Some(format!("terminal projection is not scoped: {c:?}")),
            Err(e) => Some(e.to_string()),
        };
        let why = why.or_else(|| {
            (!scope.causal_link_violations().is_empty())
                .then(|| "a relevant transition side-effects a causally linked fluent".to_string())
        });
        if let Some(why) = why {
            fail(&mut report, Stage::Structure, why);
            return report;
        }
    }
    let reduced = match ReducedProblem::build(pp, scope, opts.clause_cap) {
        Ok(r) => r,
        Err(e) => {
            fail(&mut report, Stage::Structure, e.to_string());
            return report;
        }
    };

    let solved = (|| -> Result<_, crate::model::ModelError> {
        Ok((solve(pp, limits)?, solve(&pruned_problem(pp, scope), limits)?, solve(&reduced.problem, limits)?))
    })();
    let (original, pruned, small) = match solved {
        Ok(t) => t,
        Err(e) => {
            fail(&mut report, Stage::Solvability, e.to_string());
            return report;
        }
    };
    report.original_cost = cost_string(&original);
    report.reduced_cost = cost_string(&small);
    if [&original, &pruned, &small].iter().any(|o| matches!(o, SolveOutcome::Inconclusive)) {
        report.verdict = Verdict::Inconclusive("search limit reached".into());
        return report;
    }

    let (original, small) = match (original, pruned, small) {
        (SolveOutcome::Unsolvable, SolveOutcome::Unsolvable, SolveOutcome::Unsolvable) => return report,
        (SolveOutcome::Solved(o), SolveOutcome::Solved(p), SolveOutcome::Solved(s)) => {
            if o.cost != p.cost || o.cost != s.cost {
                fail(&mut report, Stage::Cost, format!("optimal costs differ: original {}, pruned {}, reduced {}", o.cost, p.cost, s.cost));
                return report;
            }
            (o, s)
        }
        (o, p, s) => {
            let tag = |x: &SolveOutcome| if matches!(x, SolveOutcome::Solved(_)) { "solvable" } else { "unsolvable" };
            fail(&mut report, Stage::Solvability, format!("original {}, pruned {}, reduced {}", tag(&o), tag(&p), tag(&s)));
            return report;
        }
    };
    debug_assert_eq!(original.cost, small.cost);

    let lifted = match lift_plan(pp, scope, &reduced, &small) {
        Ok(l) => l,
        Err(e) => {
            fail(&mut report, Stage::Lifting, e.to_string());
            return report;
        }
    };
    if lifted.cost != small.cost {
        fail(&mut report, Stage::Lifting, format!("lifted plan costs {} instead of {}", lifted.cost, small.cost));
        return report;
    }
    match pp.goal.eval(lifted.trace.last().expect("trace holds the initial state")) {
        Ok(true) => {}
        _ => {
            fail(&mut report, Stage::Lifting, "lifted plan does not reach the goal".into());
            return report;
        }
    }

    let replayed = match replay(pp, &lifted, &scope.j_rel) {
        Ok(t) => t,
        Err(e) => {
            fail(&mut report, Stage::Trace, e.to_string());
            return report;
        }
    };
    let positions = reduced.positions_of(&scope.j_rel);
    let expected: Vec<_> = small.trace.iter().map(|s| s.project(&positions)).collect();
    if replayed != expected {
        fail(&mut report, Stage::Trace, "relevant-fluent traces of reduced and lifted plans differ".into());
    }
    report
}
