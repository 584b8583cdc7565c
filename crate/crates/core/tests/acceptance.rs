//! End-to-end acceptance checks. Prints one line per criterion and exits
//! non-zero when any of them fails.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use scoper_core::emit::{emit_pddl, emit_sas, isomorphic};
use scoper_core::logic::{to_cnf, DEFAULT_CLAUSE_CAP};
use scoper_core::model::{
    ActionId, CaeTriple, CmpOp, EffectFn, FluentId, FluentSet, Formula, LinearExpr, Literal, PlanningProblem, Value,
};
use scoper_core::oracle::{replay, solve, SearchLimits, SolveOutcome};
use scoper_core::par::Exec;
use scoper_core::pddl::{ground, parse_pddl, GroundOptions, GroundedTask};
use scoper_core::sas::{filter_operators, parse_sas, sas_to_problem, write_sas};
use scoper_core::scoping::{check_scoped, lift_plan, reduce_transitions, scope_task, ReducedProblem, ScopeOptions, ScopeResult};
use scoper_core::synth::{chain, micro_batch, playroom, playroom_pddl, MicroConfig, PlayroomConfig};
use scoper_core::verify::{verify, Checks, Verdict};

type Outcome = Result<String, String>;

fn fixture(rel: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/fixtures/{rel}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

const SAS_CORPUS: [&str; 7] = [
    "sas/gripper-prob01.sas",
    "sas/gripper-prob04.sas",
    "sas/three-ops.sas",
    "sas/grid-5x5.sas",
    "sas/costs.sas",
    "sas/lamp-link.sas",
    "sas/empty-ops.sas",
];

/// Scope results gathered by the earlier criteria for the structural ones.
#[derive(Default)]
struct Seen {
    results: Vec<(String, PlanningProblem, ScopeResult)>,
}

fn opts() -> ScopeOptions {
    ScopeOptions::default()
}

fn names(pp: &PlanningProblem, s: &FluentSet) -> BTreeSet<String> {
    s.iter().map(|f| pp.fluent_name(*f).to_string()).collect()
}

fn action_names(pp: &PlanningProblem, s: &ScopeResult) -> BTreeSet<String> {
    s.retained_actions.iter().map(|a| pp.action_name(*a).to_string()).collect()
}

fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn ensure(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn playroom_classification(seen: &mut Seen) -> Outcome {
    let pp = playroom(&PlayroomConfig::default());
    let r = scope_task(&pp, &opts()).map_err(|e| e.to_string())?;
    let rel = set(&[
        "(eye-x agent1)",
        "(eye-y agent1)",
        "(hand-x agent1)",
        "(hand-y agent1)",
        "(marker-x agent1)",
        "(marker-y agent1)",
        "(ball-x)",
        "(ball-y)",
        "(bell-x)",
        "(bell-y)",
        "(monkey-screaming monkey1)",
    ]);
    let cl = set(&["(music-on)"]);
    let irrel = set(&[
        "(temperature)",
        "(thermostat-x)",
        "(thermostat-y)",
        "(lights-on switch1)",
        "(switch1-x)",
        "(switch1-y)",
        "(green1-x)",
        "(green1-y)",
        "(red1-x)",
        "(red1-y)",
    ]);
    ensure(names(&pp, &r.j_rel) == rel, || format!("jRel = {:?}", names(&pp, &r.j_rel)))?;
    ensure(names(&pp, &r.j_cl) == cl, || format!("jCL = {:?}", names(&pp, &r.j_cl)))?;
    ensure(names(&pp, &r.j_irrel) == irrel, || format!("jIrrel = {:?}", names(&pp, &r.j_irrel)))?;
    let detail = format!("{} relevant, 1 causally linked, {} irrelevant", rel.len(), irrel.len());
    seen.results.push(("playroom".into(), pp, r));
    Ok(detail)
}

fn quotient_merge() -> Outcome {
    let (hx, hy, tx, ty, temp) = (FluentId(0), FluentId(1), FluentId(2), FluentId(3), FluentId(4));
    let eq = |a: FluentId, b: LinearExpr| Formula::lit(Literal::cmp(LinearExpr::var(a), CmpOp::Eq, b));
    let in_way = Formula::And(vec![eq(hx, LinearExpr::var(tx)), eq(ty, LinearExpr::var(hy).add(&LinearExpr::int(1)))]);
    let move_north = ActionId(0);
    let transitions = vec![
        CaeTriple::new(Formula::negation(in_way.clone()), move_north, [(hy, EffectFn::increment())]),
        CaeTriple::new(in_way, move_north, [(hy, EffectFn::increment()), (temp, EffectFn::increment())]),
    ];
    let j: FluentSet = [hy].into();
    let qs = reduce_transitions(&transitions, &j, Exec::default());
    ensure(qs.len() == 1, || format!("{} quotients", qs.len()))?;
    let q = &qs[0];
    let cnf = to_cnf(&q.precondition, DEFAULT_CLAUSE_CAP).map_err(|e| e.to_string())?;
    ensure(cnf.is_true(), || format!("precondition {:?}", q.precondition))?;
    ensure(q.effects == [(hy, EffectFn::increment())].into(), || format!("effects {:?}", q.effects))?;
    ensure(q.side_effects == [temp].into(), || format!("side effects {:?}", q.side_effects))?;
    ensure(q.actions == [move_north].into(), || format!("actions {:?}", q.actions))?;
    Ok("one quotient (True; move_north; hand-y++; {temperature})".into())
}

fn load_pddl(domain: &str, problem: &str) -> Result<(scoper_core::pddl::Domain, scoper_core::pddl::Problem, GroundedTask), String> {
    let (d, p) = parse_pddl(domain, problem).map_err(|e| e.to_string())?;
    let t = ground(&d, &p, &GroundOptions::default()).map_err(|e| e.to_string())?;
    Ok((d, p, t))
}

fn gripper_no_prune(seen: &mut Seen) -> Outcome {
    let (_, _, t) = load_pddl(&fixture("pddl/gripper-domain.pddl"), &fixture("pddl/gripper-prob04.pddl"))?;
    let sas = sas_to_problem(&parse_sas(&fixture("sas/gripper-prob04.sas")).map_err(|e| e.to_string())?);
    let mut detail = vec![];
    for (label, pp) in [("gripper pddl", t.problem), ("gripper sas", sas)] {
        let r = scope_task(&pp, &opts()).map_err(|e| e.to_string())?;
        ensure(r.retained_actions.len() == pp.actions.len(), || format!("{label}: {} of {} actions kept", r.retained_actions.len(), pp.actions.len()))?;
        ensure(r.j_irrel.is_empty(), || format!("{label}: irrelevant {:?}", names(&pp, &r.j_irrel)))?;
        detail.push(format!("{label} keeps {}/{}", r.retained_actions.len(), pp.actions.len()));
        seen.results.push((label.into(), pp, r));
    }
    Ok(detail.join(", "))
}

fn micro_problems() -> Vec<PlanningProblem> {
    micro_batch(7, 100, &MicroConfig::default())
}

fn optimality_completeness(seen: &mut Seen) -> Outcome {
    let limits = SearchLimits::default();
    let (mut pass, mut fail, mut inconclusive, mut solved) = (0, 0, 0, 0);
    let mut first_failure = None;
    for (i, pp) in micro_problems().into_iter().enumerate() {
        let report = verify(&pp, &opts(), &limits, Checks::All);
        match &report.verdict {
            Verdict::Pass => pass += 1,
            Verdict::Fail(why) => {
                fail += 1;
                first_failure.get_or_insert_with(|| format!("instance {i}: {why}"));
            }
            Verdict::Inconclusive(_) => inconclusive += 1,
        }
        solved += usize::from(report.original_cost.is_some());
        if let Ok(r) = scope_task(&pp, &opts()) {
            seen.results.push((format!("micro {i}"), pp, r));
        }
    }
    ensure(fail == 0, || format!("{fail} FAIL, first: {}", first_failure.unwrap_or_default()))?;
    ensure(inconclusive <= 5, || format!("{inconclusive} inconclusive"))?;
    Ok(format!("{pass} PASS ({solved} solvable), 0 FAIL, {inconclusive} INCONCLUSIVE"))
}

fn soundness() -> Outcome {
    let limits = SearchLimits::default();
    let (mut replayed, mut violations) = (0, vec![]);
    for (i, pp) in micro_problems().into_iter().enumerate() {
        let scope = scope_task(&pp, &opts()).map_err(|e| e.to_string())?;
        let reduced = ReducedProblem::build(&pp, &scope, DEFAULT_CLAUSE_CAP).map_err(|e| e.to_string())?;
        let SolveOutcome::Solved(plan) = solve(&reduced.problem, &limits).map_err(|e| e.to_string())? else { continue };
        let lifted = match lift_plan(&pp, &scope, &reduced, &plan) {
            Ok(l) => l,
            Err(e) => {
                violations.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        let original = match replay(&pp, &lifted, &scope.j_rel) {
            Ok(t) => t,
            Err(e) => {
                violations.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        let positions = reduced.positions_of(&scope.j_rel);
        let scoped: Vec<Vec<Value>> = plan.trace.iter().map(|s| s.project(&positions)).collect();
        if original != scoped {
            violations.push(format!("instance {i}: projected traces differ"));
        }
        if !pp.goal.eval(lifted.trace.last().unwrap()).unwrap_or(false) {
            violations.push(format!("instance {i}: lifted plan misses the goal"));
        }
        replayed += 1;
    }
    ensure(violations.is_empty(), || violations.join("; "))?;
    ensure(replayed > 0, || "no scoped plan to replay".into())?;
    Ok(format!("{replayed} scoped plans replayed, 0 violations"))
}

fn causal_links_hold(seen: &Seen) -> Outcome {
    let bad: Vec<&str> = seen.results.iter().filter(|(_, _, r)| !r.causal_link_violations().is_empty()).map(|(n, _, _)| n.as_str()).collect();
    ensure(bad.is_empty(), || format!("violations in {bad:?}"))?;
    Ok(format!("{} terminal quotient systems, 0 violations", seen.results.len()))
}

fn rescope_sas(rel: &str) -> Result<(), String> {
    let task = parse_sas(&fixture(rel)).map_err(|e| e.to_string())?;
    let pp = sas_to_problem(&task);
    let r = scope_task(&pp, &opts()).map_err(|e| e.to_string())?;
    let again = parse_sas(&emit_sas(&task, &r)).map_err(|e| e.to_string())?;
    let pp2 = sas_to_problem(&again);
    let r2 = scope_task(&pp2, &opts()).map_err(|e| e.to_string())?;
    ensure(names(&pp, &r.j_rel) == names(&pp2, &r2.j_rel), || format!("{rel}: jRel changed"))?;
    ensure(action_names(&pp, &r) == action_names(&pp2, &r2), || format!("{rel}: retained actions changed"))?;
    ensure(r2.deleted_actions(&pp2) == 0, || format!("{rel}: second pass deletes actions"))
}

fn rescope_pddl(label: &str, domain: &str, problem: &str) -> Result<(), String> {
    let (d, p, t) = load_pddl(domain, problem)?;
    let r = scope_task(&t.problem, &opts()).map_err(|e| e.to_string())?;
    let out = emit_pddl(&d, &p, &t, &r, &GroundOptions::default()).map_err(|e| format!("{label}: {e}"))?;
    let (_, _, t2) = load_pddl(&out.domain, &out.problem)?;
    let r2 = scope_task(&t2.problem, &opts()).map_err(|e| e.to_string())?;
    ensure(names(&t.problem, &r.j_rel) == names(&t2.problem, &r2.j_rel), || format!("{label}: jRel changed"))?;
    ensure(action_names(&t.problem, &r) == action_names(&t2.problem, &r2), || format!("{label}: retained actions changed"))?;
    ensure(r2.deleted_actions(&t2.problem) == 0, || format!("{label}: second pass deletes actions"))
}

fn fixed_point(seen: &Seen) -> Outcome {
    for (label, pp, r) in &seen.results {
        let check = check_scoped(pp, r, &opts()).map_err(|e| e.to_string())?;
        ensure(check.is_scoped(), || format!("{label}: output is not scoped"))?;
    }
    for rel in SAS_CORPUS {
        rescope_sas(rel)?;
    }
    let gripper = (fixture("pddl/gripper-domain.pddl"), fixture("pddl/gripper-prob04.pddl"));
    rescope_pddl("gripper", &gripper.0, &gripper.1)?;
    for k in [1, 3] {
        let (d, p) = playroom_pddl(4, k, true);
        rescope_pddl(&format!("playroom-{k}"), &d, &p)?;
        let (d, p) = playroom_pddl(4, k, false);
        rescope_pddl(&format!("playroom-{k} music off"), &d, &p)?;
    }
    Ok(format!("{} outputs scoped; {} emitted tasks rescope unchanged", seen.results.len(), SAS_CORPUS.len() + 5))
}

fn scaling_trend() -> Outcome {
    let mut rows = vec![];
    for k in [1, 3, 5, 7, 9] {
        let (d, p) = playroom_pddl(5, k, true);
        let (_, _, t) = load_pddl(&d, &p)?;
        let r = scope_task(&t.problem, &opts()).map_err(|e| e.to_string())?;
        rows.push((t.problem.actions.len(), t.problem.fluents.len(), action_names(&t.problem, &r), names(&t.problem, &r.j_rel)));
    }
    for w in rows.windows(2) {
        ensure(w[0].2 == w[1].2, || "retained actions differ across k".into())?;
        ensure(w[0].3 == w[1].3, || "jRel differs across k".into())?;
        ensure(w[0].0 < w[1].0 && w[0].1 < w[1].1, || format!("original sizes do not grow: {:?}", rows.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>()))?;
    }
    Ok(format!(
        "scoped {} actions / {} relevant fluents for every k; original actions {:?}",
        rows[0].2.len(),
        rows[0].3.len(),
        rows.iter().map(|r| r.0).collect::<Vec<_>>()
    ))
}

fn complexity_trend() -> Outcome {
    let mut medians: Vec<(usize, f64)> = vec![];
    for step in 0..8 {
        let target = 1000.0 * 2f64.powi(step) * 1.4;
        let n = (target / 2.0).sqrt().round() as usize;
        let pp = chain(n, 1);
        let mut times: Vec<f64> = (0..7)
            .map(|_| {
                let start = Instant::now();
                scope_task(&pp, &opts()).unwrap();
                start.elapsed().as_secs_f64()
            })
            .collect();
        times.sort_by(f64::total_cmp);
        medians.push((n * pp.transitions.len(), times[3]));
    }
    let ratios: Vec<f64> = medians.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let shown = ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(" ");
    // least-squares slope of log time against log n*t
    let pts: Vec<(f64, f64)> = medians.iter().map(|&(nt, t)| ((nt as f64).ln(), t.ln())).collect();
    let k = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    ensure(slope <= 1.25, || format!("fitted exponent {slope:.2}, ratios per doubling {shown}"))?;
    Ok(format!("n*t {}..{}, fitted exponent {slope:.2}, ratios per doubling {shown}", medians[0].0, medians.last().unwrap().0))
}

fn everything_kept(pp: &PlanningProblem) -> ScopeResult {
    ScopeResult {
        j_rel: pp.fluent_ids().collect(),
        j_cl: FluentSet::new(),
        j_irrel: FluentSet::new(),
        quotients: vec![],
        retained_actions: (0..pp.actions.len() as u32).map(ActionId).collect(),
        iterations: 0,
    }
}

fn format_fidelity() -> Outcome {
    for rel in SAS_CORPUS {
        let text = fixture(rel);
        let task = parse_sas(&text).map_err(|e| format!("{rel}: {e}"))?;
        let keep_all = everything_kept(&sas_to_problem(&task));
        ensure(emit_sas(&task, &keep_all) == text, || format!("{rel}: emitted bytes differ"))?;
        ensure(filter_operators(&task, |_| true) == text, || format!("{rel}: spliced bytes differ"))?;
        ensure(write_sas(&task) == text, || format!("{rel}: rewritten bytes differ"))?;
    }
    let mut pddl = vec![
        ("gripper-prob01".to_string(), fixture("pddl/gripper-domain.pddl"), fixture("pddl/gripper-prob01.pddl")),
        ("gripper-prob04".to_string(), fixture("pddl/gripper-domain.pddl"), fixture("pddl/gripper-prob04.pddl")),
    ];
    for k in [1, 2] {
        let (d, p) = playroom_pddl(3, k, k == 1);
        pddl.push((format!("playroom-{k}"), d, p));
    }
    for (label, d, p) in &pddl {
        let (dom, prob, t) = load_pddl(d, p)?;
        let out = emit_pddl(&dom, &prob, &t, &everything_kept(&t.problem), &GroundOptions::default()).map_err(|e| format!("{label}: {e}"))?;
        let (_, _, again) = load_pddl(&out.domain, &out.problem)?;
        isomorphic(&t.problem, &again.problem).map_err(|e| format!("{label}: {e}"))?;
    }
    Ok(format!("{} SAS+ files byte-identical, {} PDDL tasks isomorphic after emission", SAS_CORPUS.len(), pddl.len()))
}

fn run(id: usize, title: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
    });
    let elapsed = start.elapsed();
    let outcome = match (outcome, budget) {
        (Ok(_), Some(b)) if elapsed > b => Err(format!("took {:.2}s, budget {:.0}s", elapsed.as_secs_f64(), b.as_secs_f64())),
        (o, _) => o,
    };
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("criterion {id:>2} {tag}  {title} ({:.2}s): {detail}", elapsed.as_secs_f64());
    outcome.is_ok()
}

fn main() -> ExitCode {
    let mut seen = Seen::default();
    let secs = Duration::from_secs;
    let results = [
        run(1, "playroom classification", Some(secs(1)), || playroom_classification(&mut seen)),
        run(2, "quotient merge", None, quotient_merge),
        run(3, "gripper is not pruned", None, || gripper_no_prune(&mut seen)),
        run(4, "optimality-completeness on 100 micro problems", Some(secs(60)), || optimality_completeness(&mut seen)),
        run(5, "soundness of scoped plans", None, soundness),
        run(6, "no relevant quotient side-effects a causal link", None, || causal_links_hold(&seen)),
        run(7, "fixed point and idempotence", None, || fixed_point(&seen)),
        run(8, "playroom family scoped size is constant", Some(secs(10)), scaling_trend),
        run(9, "scoping time near-linear in n*t", Some(secs(120)), complexity_trend),
        run(10, "format fidelity", None, format_fidelity),
    ];
    let passed = results.iter().filter(|r| **r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
