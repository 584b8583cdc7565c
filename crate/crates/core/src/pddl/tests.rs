use super::ast::{Condition, InitEntry};
use super::*;
use crate::model::{rat, ActionId, CaeTriple, CmpOp, EffectFn, Fluent, FluentId, Formula, Literal, PlanningProblem, State, Value};
use crate::oracle::{solve, SearchLimits, SolveOutcome};
use crate::synth::playroom_pddl;

fn gripper(problem: &str) -> (String, String) {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/pddl");
    (
        std::fs::read_to_string(format!("{dir}/gripper-domain.pddl")).unwrap(),
        std::fs::read_to_string(format!("{dir}/{problem}")).unwrap(),
    )
}

fn load_ok(d: &str, p: &str) -> GroundedTask {
    load(d, p, &GroundOptions::default()).unwrap()
}

fn cost(pp: &PlanningProblem) -> Option<crate::model::Rational> {
    match solve(pp, &SearchLimits::default()).unwrap() {
        SolveOutcome::Solved(p) => Some(p.cost),
        SolveOutcome::Unsolvable => None,
        SolveOutcome::Inconclusive => panic!("search limit"),
    }
}

#[test]
fn zero_parameter_schema_grounds_once() {
    let t = load_ok(
        "(define (domain d) (:predicates (p)) (:action a :parameters () :effect (p)))",
        "(define (problem q) (:domain d) (:objects) (:init) (:goal (p)))",
    );
    assert_eq!(t.problem.actions, vec!["a"]);
    assert_eq!(t.problem.transitions.len(), 1);
}

#[test]
fn playroom_fluent_names() {
    let (d, p) = playroom_pddl(5, 1, true);
    let t = load_ok(&d, &p);
    for name in ["(hand-y agent1)", "(eye-x agent1)", "(temperature)", "(music-on)", "(lights-on switch1)"] {
        assert!(t.problem.fluent_by_name(name).is_some(), "{name}");
    }
    // static positions fold away
    assert!(t.problem.fluent_by_name("(x ball1)").is_none());
    let schemas = parse_domain(&d).unwrap();
    assert!(schemas.actions.iter().any(|a| a.name == "move-north-hand"));
}

#[test]
fn forall_over_three_objects_is_a_conjunction() {
    let t = load_ok(
        "(define (domain d) (:types door) (:predicates (open ?d - door) (done))
           (:action finish :parameters () :precondition (forall (?d - door) (open ?d)) :effect (done))
           (:action open :parameters (?d - door) :effect (open ?d)))",
        "(define (problem q) (:domain d) (:objects d1 d2 d3 - door) (:init) (:goal (done)))",
    );
    let finish = &t.problem.transitions[0];
    match &finish.precondition {
        Formula::And(parts) => {
            assert_eq!(parts.len(), 3);
            assert!(parts.iter().all(|p| matches!(p, Formula::Lit(Literal::Prop { positive: true, .. }))));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn statics_equality_and_closed_world() {
    let t = load_ok(
        "(define (domain d) (:requirements :strips :equality :negative-preconditions)
           (:predicates (link ?a ?b) (at ?a) (ghost ?a))
           (:action go :parameters (?a ?b)
             :precondition (and (link ?a ?b) (at ?a) (not (= ?a ?b)) (not (ghost ?b)))
             :effect (and (at ?b) (not (at ?a)))))",
        "(define (problem q) (:domain d) (:objects x y z) (:init (link x y) (link y y) (at x)) (:goal (at y)))",
    );
    // (link y y) is dropped by the equality test, every other pair by the static link
    assert_eq!(t.problem.actions, vec!["go x y"]);
    // ghost is static and absent, so it folds to true under the negation
    assert_eq!(t.problem.fluents.len(), 2);
}

#[test]
fn never_true_atoms_fold_to_false() {
    let t = load_ok(
        "(define (domain d) (:predicates (p) (q) (r))
           (:action a :parameters () :precondition (q) :effect (p))
           (:action b :parameters () :effect (r)))",
        "(define (problem q) (:domain d) (:objects) (:init) (:goal (p)))",
    );
    // q is never achieved and not initially true
    assert_eq!(t.problem.actions, vec!["b"]);
}

#[test]
fn folding_repeats_until_no_action_dies() {
    let t = load_ok(
        "(define (domain d) (:predicates (p) (q) (r) (s))
           (:action drop-q :parameters () :effect (not (q)))
           (:action make-r :parameters () :precondition (q) :effect (r))
           (:action make-p :parameters () :precondition (not (r)) :effect (and (p) (s)))
           (:action keep-s :parameters () :effect (s)))",
        "(define (problem q) (:domain d) (:objects) (:init (s)) (:goal (p)))",
    );
    // q only ever loses a value it never had, so make-r dies, so r stays false
    assert_eq!(t.problem.actions, vec!["drop-q", "make-p", "keep-s"]);
    let names: Vec<&str> = t.problem.fluents.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, vec!["(p)"]);
    assert_eq!(t.problem.transitions[1].precondition, Formula::True);
    assert!(t.problem.transitions[0].effects.is_empty());
    assert_eq!(cost(&t.problem), Some(rat(1)));
}

#[test]
fn constant_numeric_reads_are_folded_into_effects() {
    let t = load_ok(
        "(define (domain d) (:functions (x) (step)) (:predicates (p))
           (:action a :parameters () :effect (increase (x) (step)))
           (:action b :parameters () :effect (assign (step) 2)))",
        "(define (problem q) (:domain d) (:objects) (:init (= (x) 0) (= (step) 2)) (:goal (> (x) 3)))",
    );
    assert_eq!(t.problem.fluents.len(), 1);
    let x = t.problem.fluent_by_name("(x)").unwrap();
    assert_eq!(t.problem.transitions[0].effects[&x], EffectFn::Increase(crate::model::LinearExpr::int(2)));
    assert_eq!(cost(&t.problem), Some(rat(2)));
}

#[test]
fn undefined_numeric_fluent_is_an_error() {
    let e = load(
        "(define (domain d) (:functions (x)) (:predicates (p))
           (:action a :parameters () :precondition (< (x) 3) :effect (increase (x) 1)))",
        "(define (problem q) (:domain d) (:objects) (:init) (:goal (> (x) 2)))",
        &GroundOptions::default(),
    )
    .unwrap_err();
    assert_eq!(e, PddlError::UndefinedNumeric("(x)".into()));
}

#[test]
fn grounding_cap() {
    let (d, p) = gripper("gripper-prob04.pddl");
    let e = load(&d, &p, &GroundOptions { max_actions: 100, ..Default::default() }).unwrap_err();
    assert!(matches!(e, PddlError::GroundingExplosion { cap: 100, .. }));
}

#[test]
fn gripper_prob04_counts() {
    let (d, p) = gripper("gripper-prob04.pddl");
    let t = load_ok(&d, &p);
    let count = |s: &str| t.bindings.iter().filter(|b| b.schema == s).count();
    assert_eq!((count("pick"), count("drop"), count("move")), (40, 40, 4));
    // at-robby x2, at x20, free x2, carry x20
    assert_eq!(t.problem.fluents.len(), 44);
    assert_eq!(t.atoms.len(), t.problem.fluents.len());
}

#[test]
fn add_wins_over_delete() {
    let (d, p) = gripper("gripper-prob01.pddl");
    let t = load_ok(&d, &p);
    let stay = t.problem.action_by_name("move rooma rooma").unwrap();
    let at = t.problem.fluent_by_name("(at-robby rooma)").unwrap();
    assert_eq!(t.problem.transitions[stay.index()].effects[&at], EffectFn::SetTrue);
}

#[test]
fn print_parse_round_trip() {
    let (gd, gp) = gripper("gripper-prob04.pddl");
    let (pd, pp) = playroom_pddl(4, 2, true);
    for (d, p) in [(gd, gp), (pd, pp)] {
        let (dom, prob) = parse_pddl(&d, &p).unwrap();
        let (dom2, prob2) = parse_pddl(&print_domain(&dom), &print_problem(&prob)).unwrap();
        assert_eq!(dom, dom2);
        assert_eq!(prob, prob2);
    }
}

#[test]
fn action_costs_and_metric() {
    let t = load_ok(
        "(define (domain d) (:requirements :action-costs) (:predicates (p) (q)) (:functions (total-cost))
           (:action a :parameters () :effect (and (p) (increase (total-cost) 5)))
           (:action b :parameters () :effect (q)))",
        "(define (problem q) (:domain d) (:objects) (:init (= (total-cost) 0)) (:goal (p)) (:metric minimize (total-cost)))",
    );
    assert_eq!(t.problem.transitions[0].cost, rat(5));
    assert_eq!(t.problem.transitions[1].cost, rat(0));
    assert!(t.problem.fluent_by_name("(total-cost)").is_none());
}

#[test]
fn unsupported_metric_is_rejected() {
    let e = load(
        "(define (domain d) (:predicates (p)) (:functions (f)) (:action a :parameters () :effect (p)))",
        "(define (problem q) (:domain d) (:objects) (:init (= (f) 0)) (:goal (p)) (:metric maximize (f)))",
        &GroundOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(e, PddlError::UnsupportedFeature(_)));
}

#[test]
fn undeclared_type_is_rejected() {
    let e = load(
        "(define (domain d) (:types block) (:predicates (p)) (:action a :parameters () :effect (p)))",
        "(define (problem q) (:domain d) (:objects x - cube) (:init) (:goal (p)))",
        &GroundOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(e, PddlError::Semantic(_)));
}

#[test]
fn ast_keeps_init_and_goal() {
    let (_, p) = parse_pddl(
        "(define (domain d) (:predicates (p ?x)))",
        "(define (problem q) (:domain d) (:objects a) (:init (p a)) (:goal (not (p a))))",
    )
    .unwrap();
    assert_eq!(p.init, vec![InitEntry::Fact("p".into(), vec!["a".into()])]);
    assert!(matches!(p.goal, Condition::Not(_)));
}

#[test]
fn sequential_and_parallel_grounding_agree() {
    let (d, p) = gripper("gripper-prob04.pddl");
    let a = load(&d, &p, &GroundOptions { exec: crate::par::Exec::Sequential, ..Default::default() }).unwrap();
    let b = load(&d, &p, &GroundOptions { exec: crate::par::Exec::Parallel, ..Default::default() }).unwrap();
    assert_eq!(a.problem, b.problem);
}

/// Hand-built counterparts of five small domains, compared on optimal cost.
mod by_hand {
    use super::*;

    fn model(fluents: Vec<Fluent>, init: Vec<Value>, actions: &[&str], transitions: Vec<CaeTriple>, goal: Formula) -> PlanningProblem {
        let pp = PlanningProblem {
            fluents,
            actions: actions.iter().map(|s| s.to_string()).collect(),
            transitions,
            init: State(init),
            goal,
        };
        pp.validate().unwrap();
        pp
    }

    fn lit(l: Literal) -> Formula {
        Formula::lit(l)
    }

    #[test]
    fn two_lights() {
        let grounded = load_ok(
            "(define (domain d) (:predicates (on ?l))
               (:action switch-on :parameters (?l) :precondition (not (on ?l)) :effect (on ?l)))",
            "(define (problem q) (:domain d) (:objects l1 l2) (:init) (:goal (and (on l1) (on l2))))",
        );
        let (a, b) = (FluentId(0), FluentId(1));
        let hand = model(
            vec![Fluent::prop("a"), Fluent::prop("b")],
            vec![Value::Bool(false), Value::Bool(false)],
            &["on-a", "on-b"],
            vec![
                CaeTriple::new(lit(Literal::neg(a)), ActionId(0), [(a, EffectFn::SetTrue)]),
                CaeTriple::new(lit(Literal::neg(b)), ActionId(1), [(b, EffectFn::SetTrue)]),
            ],
            Formula::And(vec![lit(Literal::pos(a)), lit(Literal::pos(b))]),
        );
        assert_eq!(cost(&grounded.problem), cost(&hand));
        assert_eq!(cost(&hand), Some(rat(2)));
    }

    #[test]
    fn static_step_counter() {
        let grounded = load_ok(
            "(define (domain d) (:requirements :fluents) (:functions (x) (step))
               (:action bump :parameters () :precondition (< (x) 10) :effect (increase (x) (step))))",
            "(define (problem q) (:domain d) (:objects) (:init (= (x) 0) (= (step) 2)) (:goal (= (x) 4)))",
        );
        let x = FluentId(0);
        let hand = model(
            vec![Fluent::num("x")],
            vec![Value::int(0)],
            &["bump"],
            vec![CaeTriple::new(lit(Literal::num(x, CmpOp::Lt, 10)), ActionId(0), [(x, EffectFn::Increase(crate::model::LinearExpr::int(2)))])],
            lit(Literal::num(x, CmpOp::Eq, 4)),
        );
        assert_eq!(cost(&grounded.problem), cost(&hand));
        assert_eq!(cost(&hand), Some(rat(2)));
    }

    #[test]
    fn existential_goal() {
        let grounded = load_ok(
            "(define (domain d) (:types block) (:predicates (clear ?b - block) (held ?b - block))
               (:action pick :parameters (?b - block) :precondition (clear ?b) :effect (held ?b)))",
            "(define (problem q) (:domain d) (:objects b1 b2 b3 - block) (:init (clear b2))
               (:goal (exists (?b - block) (held ?b))))",
        );
        let h = FluentId(0);
        let hand = model(
            vec![Fluent::prop("held-b2")],
            vec![Value::Bool(false)],
            &["pick-b2"],
            vec![CaeTriple::new(Formula::True, ActionId(0), [(h, EffectFn::SetTrue)])],
            lit(Literal::pos(h)),
        );
        assert_eq!(grounded.problem.actions, vec!["pick b2"]);
        assert_eq!(cost(&grounded.problem), cost(&hand));
    }

    #[test]
    fn universal_precondition() {
        let grounded = load_ok(
            "(define (domain d) (:types door) (:predicates (open ?d - door) (done))
               (:action finish :parameters () :precondition (forall (?d - door) (open ?d)) :effect (done))
               (:action open :parameters (?d - door) :effect (open ?d)))",
            "(define (problem q) (:domain d) (:objects d1 d2 d3 - door) (:init (open d2)) (:goal (done)))",
        );
        let ds = [FluentId(0), FluentId(1), FluentId(2)];
        let done = FluentId(3);
        let mut ts = vec![CaeTriple::new(
            Formula::And(ds.iter().map(|d| lit(Literal::pos(*d))).collect()),
            ActionId(0),
            [(done, EffectFn::SetTrue)],
        )];
        for (i, d) in ds.iter().enumerate() {
            ts.push(CaeTriple::new(Formula::True, ActionId(i as u32 + 1), [(*d, EffectFn::SetTrue)]));
        }
        let hand = model(
            vec![Fluent::prop("d1"), Fluent::prop("d2"), Fluent::prop("d3"), Fluent::prop("done")],
            vec![Value::Bool(false), Value::Bool(true), Value::Bool(false), Value::Bool(false)],
            &["finish", "open1", "open2", "open3"],
            ts,
            lit(Literal::pos(done)),
        );
        assert_eq!(cost(&grounded.problem), cost(&hand));
        assert_eq!(cost(&hand), Some(rat(3)));
    }

    #[test]
    fn cheap_detour() {
        let grounded = load_ok(
            "(define (domain d) (:requirements :action-costs) (:predicates (at ?p) (road ?a ?b))
               (:functions (total-cost) (len ?a ?b))
               (:action drive :parameters (?a ?b) :precondition (and (at ?a) (road ?a ?b))
                 :effect (and (not (at ?a)) (at ?b) (increase (total-cost) (len ?a ?b)))))",
            "(define (problem q) (:domain d) (:objects s m t)
               (:init (at s) (road s t) (road s m) (road m t) (= (len s t) 5) (= (len s m) 1) (= (len m t) 1) (= (total-cost) 0))
               (:goal (at t)) (:metric minimize (total-cost)))",
        );
        let (s, m, t) = (FluentId(0), FluentId(1), FluentId(2));
        let drive = |from: FluentId, to: FluentId, a: u32, c: i64| {
            CaeTriple::new(lit(Literal::pos(from)), ActionId(a), [(from, EffectFn::SetFalse), (to, EffectFn::SetTrue)]).with_cost(rat(c))
        };
        let hand = model(
            vec![Fluent::prop("s"), Fluent::prop("m"), Fluent::prop("t")],
            vec![Value::Bool(true), Value::Bool(false), Value::Bool(false)],
            &["st", "sm", "mt"],
            vec![drive(s, t, 0, 5), drive(s, m, 1, 1), drive(m, t, 2, 1)],
            lit(Literal::pos(t)),
        );
        assert_eq!(cost(&grounded.problem), Some(rat(2)));
        assert_eq!(cost(&grounded.problem), cost(&hand));
    }
}
