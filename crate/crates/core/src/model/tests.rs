use super::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn two_numeric() -> PlanningProblem {
    PlanningProblem {
        fluents: vec![Fluent::num("(hand-y agent1)"), Fluent::num("(thermostat-y thermo1)")],
        actions: vec!["move_north_hand".into(), "move_and_flick".into()],
        transitions: vec![],
        init: State(vec![Value::int(2), Value::int(3)]),
        goal: Formula::True,
    }
}

#[test]
fn vars_of_constant_is_empty() {
    assert!(Formula::True.vars().is_empty());
}

#[test]
fn vars_of_equality_between_fluents() {
    let f = Formula::lit(Literal::cmp(LinearExpr::var(FluentId(0)), CmpOp::Eq, LinearExpr::var(FluentId(1))));
    assert_eq!(f.vars(), [FluentId(0), FluentId(1)].into_iter().collect());
}

#[test]
fn vars_union_over_literals() {
    let f = Formula::And(vec![Formula::lit(Literal::pos(FluentId(0))), Formula::lit(Literal::neg(FluentId(1)))]);
    assert_eq!(f.vars().len(), 2);
}

#[test]
fn eval_examples() {
    let music = State(vec![Value::Bool(true)]);
    assert!(Formula::True.eval(&music).unwrap());
    assert!(Formula::lit(Literal::pos(FluentId(0))).eval(&music).unwrap());

    // x + 1 <= 3 at x = 5/2 is 7/2 <= 3
    let s = State(vec![Value::Num(q(5, 2))]);
    let lhs = LinearExpr::var(FluentId(0)).add(&LinearExpr::int(1));
    let f = Formula::lit(Literal::cmp(lhs, CmpOp::Le, LinearExpr::int(3)));
    assert!(!f.eval(&s).unwrap());
}

#[test]
fn eval_reports_undeclared_fluent() {
    let f = Formula::lit(Literal::pos(FluentId(3)));
    assert_eq!(f.eval(&State(vec![])), Err(ModelError::UndeclaredFluent(FluentId(3))));
}

#[test]
fn apply_noop_is_identity() {
    let t = CaeTriple::new(Formula::True, ActionId(0), []);
    let s = State(vec![Value::int(7), Value::Bool(false)]);
    assert_eq!(t.apply(&s).unwrap(), s);
}

#[test]
fn apply_move_north() {
    let p = two_numeric();
    let t = CaeTriple::new(Formula::True, ActionId(0), [(FluentId(0), EffectFn::increment())]);
    let next = t.apply(&p.init).unwrap();
    assert_eq!(next.0, vec![Value::int(3), Value::int(3)]);
}

#[test]
fn apply_reads_frozen_pre_state() {
    let x = FluentId(0);
    let s = State(vec![Value::int(4), Value::int(9)]);
    let by_const = CaeTriple::new(Formula::True, ActionId(0), [(x, EffectFn::increment())]);
    assert_eq!(by_const.apply(&s).unwrap().0[0], Value::int(5));
    let by_self = CaeTriple::new(Formula::True, ActionId(0), [(x, EffectFn::Increase(LinearExpr::var(x)))]);
    assert_eq!(by_self.apply(&s).unwrap().0[0], Value::int(8));

    // Swap: both assignments read the pre-state.
    let y = FluentId(1);
    let swap = CaeTriple::new(
        Formula::True,
        ActionId(0),
        [(x, EffectFn::AssignExpr(LinearExpr::var(y))), (y, EffectFn::AssignExpr(LinearExpr::var(x)))],
    );
    assert_eq!(swap.apply(&s).unwrap().0, vec![Value::int(9), Value::int(4)]);
}

#[test]
fn apply_checks_precondition() {
    let t = CaeTriple::new(Formula::False, ActionId(0), []);
    assert!(matches!(t.apply(&State(vec![])), Err(ModelError::PreconditionViolated(_))));
}

#[test]
fn canonical_effects_identify_equivalent_spellings() {
    assert_eq!(EffectFn::decrement().canonical(), EffectFn::Increase(LinearExpr::int(-1)));
    assert_eq!(EffectFn::AssignConst(Value::Bool(true)).canonical(), EffectFn::SetTrue);
    assert_eq!(EffectFn::AssignExpr(LinearExpr::int(3)).canonical(), EffectFn::AssignConst(Value::int(3)));
}

#[test]
fn validate_rejects_kind_mismatch() {
    let mut p = two_numeric();
    p.transitions.push(CaeTriple::new(Formula::True, ActionId(0), [(FluentId(0), EffectFn::SetTrue)]));
    assert_eq!(p.validate(), Err(ModelError::KindMismatch(FluentId(0))));
}

#[test]
fn validate_rejects_bound_on_propositional() {
    let mut p = two_numeric();
    p.fluents[0] = Fluent { name: "p".into(), kind: FluentKind::Propositional, bound: Some((0, 1)) };
    assert!(matches!(p.validate(), Err(ModelError::BoundOnPropositional(_))));
}

#[test]
fn mutual_exclusion_sampling() {
    let (h, t) = (FluentId(0), FluentId(1));
    let eq = Literal::cmp(LinearExpr::var(h), CmpOp::Eq, LinearExpr::var(t));
    let mut p = two_numeric();
    p.transitions = vec![
        CaeTriple::new(Formula::lit(eq.negate()), ActionId(0), [(h, EffectFn::increment())]),
        CaeTriple::new(Formula::lit(eq.clone()), ActionId(0), [(h, EffectFn::increment())]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(p.check_mutual_exclusion(1000, &mut rng).is_ok());

    p.transitions[1].precondition = Formula::True;
    assert!(matches!(p.check_mutual_exclusion(1000, &mut rng), Err(ModelError::NotMutuallyExclusive(0, 1))));
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn literal() -> impl Strategy<Value = Literal> {
        prop_oneof![
            (0u32..3, any::<bool>()).prop_map(|(f, p)| Literal::Prop { fluent: FluentId(f), positive: p }),
            (3u32..5, 0usize..6, -2i64..3).prop_map(|(f, op, c)| {
                let ops = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt];
                Literal::num(FluentId(f), ops[op], c)
            }),
        ]
    }

    fn state() -> impl Strategy<Value = State> {
        (proptest::collection::vec(any::<bool>(), 3), proptest::collection::vec(-2i64..3, 2)).prop_map(|(b, n)| {
            State(b.into_iter().map(Value::Bool).chain(n.into_iter().map(Value::int)).collect())
        })
    }

    proptest! {
        #[test]
        fn eval_stable_under_reordering(lits in proptest::collection::vec(literal(), 1..6), s in state()) {
            let fs: Vec<Formula> = lits.into_iter().map(Formula::lit).collect();
            let mut rev = fs.clone();
            rev.reverse();
            prop_assert_eq!(Formula::And(fs.clone()).eval(&s), Formula::And(rev.clone()).eval(&s));
            prop_assert_eq!(Formula::Or(fs).eval(&s), Formula::Or(rev).eval(&s));
        }

        #[test]
        fn canonical_literal_is_equivalent(l in literal(), s in state()) {
            prop_assert_eq!(l.eval(&s), l.canonical().eval(&s));
            prop_assert_eq!(l.negate().eval(&s).unwrap(), !l.eval(&s).unwrap());
        }

        #[test]
        fn apply_is_deterministic(s in state(), k in -3i64..3) {
            let t = CaeTriple::new(Formula::True, ActionId(0), [
                (FluentId(0), EffectFn::SetFalse),
                (FluentId(3), EffectFn::Increase(LinearExpr::var(FluentId(4)).add(&LinearExpr::int(k)))),
            ]);
            prop_assert_eq!(t.apply(&s).unwrap(), t.apply(&s.clone()).unwrap());
        }
    }
}
