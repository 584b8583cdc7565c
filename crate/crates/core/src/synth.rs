//! Synthetic task builders: the continuous playroom, chain domains for
//! timing sweeps, and small random problems for property checks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{
    rat, ActionId, CaeTriple, CmpOp, EffectFn, Fluent, FluentId, FluentKind, Formula, LinearExpr, Literal,
    PlanningProblem, State, Value,
};

struct Builder {
    fluents: Vec<Fluent>,
    init: Vec<Value>,
    actions: Vec<String>,
    transitions: Vec<CaeTriple>,
}

impl Builder {
    fn new() -> Self {
        Builder { fluents: vec![], init: vec![], actions: vec![], transitions: vec![] }
    }

    fn fluent(&mut self, f: Fluent, v: Value) -> FluentId {
        self.fluents.push(f);
        self.init.push(v);
        FluentId(self.fluents.len() as u32 - 1)
    }

    fn action(&mut self, name: impl Into<String>) -> ActionId {
        self.actions.push(name.into());
        ActionId(self.actions.len() as u32 - 1)
    }

    fn finish(self, goal: Formula) -> PlanningProblem {
        PlanningProblem {
            fluents: self.fluents,
            actions: self.actions,
            transitions: self.transitions,
            init: State(self.init),
            goal,
        }
    }
}

fn eq(a: FluentId, b: FluentId) -> Formula {
    Formula::lit(Literal::cmp(LinearExpr::var(a), CmpOp::Eq, LinearExpr::var(b)))
}

fn lit(l: Literal) -> Formula {
    Formula::lit(l)
}

#[derive(Clone, Debug)]
pub struct PlayroomConfig {
    /// Grid side length; coordinates range over `0..grid`.
    pub grid: i64,
    /// Number of light-switch / button groups.
    pub groups: usize,
    pub music_on: bool,
    pub with_thermostat: bool,
}

impl Default for PlayroomConfig {
    fn default() -> Self {
        PlayroomConfig { grid: 5, groups: 1, music_on: true, with_thermostat: true }
    }
}

struct Effector {
    x: FluentId,
    y: FluentId,
}

/// The continuous playroom on a grid: an agent with eye, hand and marker
/// effectors, a thermostat, light switches with green/red music buttons, a
/// ball, a bell and a monkey. Goal: frighten the monkey.
pub fn playroom(cfg: &PlayroomConfig) -> PlanningProblem {
    let mut b = Builder::new();
    let hi = cfg.grid - 1;
    let coord = |b: &mut Builder, name: String, v: i64| b.fluent(Fluent::bounded(name, 0, hi), Value::int(v));

    let effector = |b: &mut Builder, name: &str, x: i64, y: i64| Effector {
        x: coord(b, format!("({name}-x agent1)"), x),
        y: coord(b, format!("({name}-y agent1)"), y),
    };
    let eye = effector(&mut b, "eye", 0, 0);
    let hand = effector(&mut b, "hand", 0, 0);
    let marker = effector(&mut b, "marker", 0, 0);

    let object = |b: &mut Builder, name: &str, x: i64, y: i64| Effector {
        x: coord(b, format!("({name}-x)"), x),
        y: coord(b, format!("({name}-y)"), y),
    };
    let ball = object(&mut b, "ball", hi, hi);
    let bell = object(&mut b, "bell", hi, (hi - 1).max(0));
    let thermostat = cfg.with_thermostat.then(|| {
        let t = object(&mut b, "thermostat", 0, hi.min(1));
        let temperature = b.fluent(Fluent::num("(temperature)"), Value::int(2));
        (t, temperature)
    });

    let music = b.fluent(Fluent::prop("(music-on)"), Value::Bool(cfg.music_on));
    let monkey = b.fluent(Fluent::prop("(monkey-screaming monkey1)"), Value::Bool(false));

    let at = |e: &Effector, o: &Effector| vec![eq(e.x, o.x), eq(e.y, o.y)];

    // effector movement
    for (name, e) in [("eye", &eye), ("hand", &hand), ("marker", &marker)] {
        for (dir, axis, up) in [("north", e.y, true), ("south", e.y, false), ("east", e.x, true), ("west", e.x, false)] {
            let bound = if up { Literal::num(axis, CmpOp::Lt, hi) } else { Literal::num(axis, CmpOp::Gt, 0) };
            let effect = if up { EffectFn::increment() } else { EffectFn::decrement() };
            let flicks = name == "hand" && (dir == "north" || dir == "south");
            match (&thermostat, flicks) {
                (Some((t, temperature)), true) => {
                    let plain = b.action(format!("move_{dir}_hand"));
                    let flick = b.action(format!("move_{dir}_and_flick"));
                    let in_way = Literal::cmp(LinearExpr::var(axis), CmpOp::Eq, LinearExpr::var(t.y));
                    b.transitions.push(CaeTriple::new(
                        Formula::And(vec![lit(bound.clone()), lit(in_way.negate())]),
                        plain,
                        [(axis, effect.clone())],
                    ));
                    b.transitions.push(CaeTriple::new(
                        Formula::And(vec![lit(bound), lit(in_way)]),
                        flick,
                        [(axis, effect), (*temperature, EffectFn::increment())],
                    ));
                }
                _ => {
                    let a = b.action(format!("move_{dir}_{name}"));
                    b.transitions.push(CaeTriple::new(lit(bound), a, [(axis, effect)]));
                }
            }
        }
    }

    if let Some((t, temperature)) = &thermostat {
        for v in 0..5 {
            let a = b.action(format!("set_temperature_{v}"));
            let pre = [at(&eye, t), at(&hand, t)].concat();
            b.transitions.push(CaeTriple::new(Formula::And(pre), a, [(*temperature, EffectFn::AssignConst(Value::int(v)))]));
        }
    }

    for g in 1..=cfg.groups {
        let switch = object(&mut b, &format!("switch{g}"), (g as i64) % cfg.grid, hi);
        let green = object(&mut b, &format!("green{g}"), hi, (g as i64) % cfg.grid);
        let red = object(&mut b, &format!("red{g}"), 0, (g as i64 + 1) % cfg.grid);
        let lights = b.fluent(Fluent::prop(format!("(lights-on switch{g})")), Value::Bool(false));

        let toggle = b.action(format!("toggle_lights_{g}"));
        let reach = [at(&eye, &switch), at(&hand, &switch)].concat();
        b.transitions.push(CaeTriple::new(
            Formula::And([reach.clone(), vec![lit(Literal::neg(lights))]].concat()),
            toggle,
            [(lights, EffectFn::SetTrue)],
        ));
        b.transitions.push(CaeTriple::new(
            Formula::And([reach, vec![lit(Literal::pos(lights))]].concat()),
            toggle,
            [(lights, EffectFn::SetFalse)],
        ));
        for (button, name, effect) in [(&green, "push_green", EffectFn::SetTrue), (&red, "push_red", EffectFn::SetFalse)] {
            let a = b.action(format!("{name}_{g}"));
            let pre = [at(&eye, button), at(&hand, button), vec![lit(Literal::pos(lights))]].concat();
            b.transitions.push(CaeTriple::new(Formula::And(pre), a, [(music, effect)]));
        }
    }

    let throw = b.action("throw_ball");
    let pre = [at(&eye, &ball), at(&hand, &ball), at(&marker, &bell), vec![lit(Literal::pos(music))]].concat();
    b.transitions.push(CaeTriple::new(Formula::And(pre), throw, [(monkey, EffectFn::SetTrue)]));

    b.finish(lit(Literal::pos(monkey)))
}

/// `n` propositional fluents `x0..x{n-1}`; action `a_i` sets `x_i` and
/// requires `x_{i-1}`. The goal is the last fluent, so scoping needs `n + 1`
/// rounds and every round visits all `n` triples. `distractors` adds that
/// many unrelated fluent/action pairs per chain link.
pub fn chain(n: usize, distractors: usize) -> PlanningProblem {
    let mut b = Builder::new();
    let xs: Vec<FluentId> = (0..n).map(|i| b.fluent(Fluent::prop(format!("(x{i})")), Value::Bool(false))).collect();
    for i in 0..n {
        let a = b.action(format!("a{i}"));
        let pre = if i == 0 { Formula::True } else { lit(Literal::pos(xs[i - 1])) };
        b.transitions.push(CaeTriple::new(pre, a, [(xs[i], EffectFn::SetTrue)]));
        for d in 0..distractors {
            let y = b.fluent(Fluent::prop(format!("(y{i}_{d})")), Value::Bool(false));
            let a = b.action(format!("noise{i}_{d}"));
            b.transitions.push(CaeTriple::new(lit(Literal::pos(xs[i])), a, [(y, EffectFn::SetTrue)]));
        }
    }
    let goal = match xs.last() {
        Some(&last) => lit(Literal::pos(last)),
        None => Formula::True,
    };
    b.finish(goal)
}

/// Parameters of the random micro-problem generator.
#[derive(Clone, Debug)]
pub struct MicroConfig {
    pub max_fluents: usize,
    pub max_domain: i64,
    pub max_transitions: usize,
    pub max_goal_fluents: usize,
}

impl Default for MicroConfig {
    fn default() -> Self {
        MicroConfig { max_fluents: 6, max_domain: 4, max_transitions: 12, max_goal_fluents: 2 }
    }
}

fn random_literal(rng: &mut impl Rng, fluents: &[Fluent], only: Option<FluentId>) -> Literal {
    let f = only.unwrap_or_else(|| FluentId(rng.gen_range(0..fluents.len()) as u32));
    let fl = &fluents[f.index()];
    match fl.kind {
        FluentKind::Propositional => Literal::Prop { fluent: f, positive: rng.gen() },
        FluentKind::Numeric => {
            let (lo, hi) = fl.bound.unwrap_or((0, 3));
            let ops = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt];
            let op = *ops.choose(rng).unwrap();
            let others: Vec<FluentId> = fluents
                .iter()
                .enumerate()
                .filter(|(i, o)| *i != f.index() && o.kind == FluentKind::Numeric)
                .map(|(i, _)| FluentId(i as u32))
                .collect();
            if only.is_none() && !others.is_empty() && rng.gen_bool(0.2) {
                let g = *others.choose(rng).unwrap();
                Literal::cmp(LinearExpr::var(f), op, LinearExpr::var(g))
            } else {
                Literal::num(f, op, rng.gen_range(lo..=hi))
            }
        }
    }
}

fn random_effect(rng: &mut impl Rng, fluents: &[Fluent], f: FluentId, guards: &mut Vec<Formula>) -> EffectFn {
    let fl = &fluents[f.index()];
    match fl.kind {
        FluentKind::Propositional => {
            if rng.gen() {
                EffectFn::SetTrue
            } else {
                EffectFn::SetFalse
            }
        }
        FluentKind::Numeric => {
            let (lo, hi) = fl.bound.unwrap_or((0, 3));
            match rng.gen_range(0..3) {
                0 if hi > lo => {
                    guards.push(lit(Literal::num(f, CmpOp::Lt, hi)));
                    EffectFn::increment()
                }
                1 if hi > lo => {
                    guards.push(lit(Literal::num(f, CmpOp::Gt, lo)));
                    EffectFn::decrement()
                }
                _ => EffectFn::AssignConst(Value::int(rng.gen_range(lo..=hi))),
            }
        }
    }
}

/// `count` micro problems from one seed; instance `i` depends only on
/// `seed` and `i`.
pub fn micro_batch(seed: u64, count: usize, cfg: &MicroConfig) -> Vec<PlanningProblem> {
    use rand::SeedableRng;
    (0..count)
        .map(|i| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64));
            random_micro_problem(&mut rng, cfg)
        })
        .collect()
}

/// A random problem small enough for exhaustive search: at most six
/// fluents (propositional, or numeric with at most four values), at most
/// twelve triples and a goal over at most two fluents. Some actions get two
/// triples guarded by complementary literals; some triples copy the effects
/// of an earlier one and add another, so quotient merging is exercised.
pub fn random_micro_problem(rng: &mut impl Rng, cfg: &MicroConfig) -> PlanningProblem {
    let mut b = Builder::new();
    let n = rng.gen_range(2..=cfg.max_fluents.max(2));
    for i in 0..n {
        if rng.gen_bool(0.5) {
            b.fluent(Fluent::prop(format!("p{i}")), Value::Bool(rng.gen()));
        } else {
            let hi = rng.gen_range(1..cfg.max_domain.max(2));
            b.fluent(Fluent::bounded(format!("n{i}"), 0, hi), Value::int(rng.gen_range(0..=hi)));
        }
    }
    let fluents = b.fluents.clone();

    let random_pre = |rng: &mut dyn rand::RngCore| -> Vec<Formula> {
        let mut rng = rng;
        let k = rng.gen_range(0..=2);
        let mut pre: Vec<Formula> = (0..k).map(|_| lit(random_literal(&mut rng, &fluents, None))).collect();
        if rng.gen_bool(0.15) {
            pre.push(Formula::Or(vec![
                lit(random_literal(&mut rng, &fluents, None)),
                lit(random_literal(&mut rng, &fluents, None)),
            ]));
        }
        pre
    };
    let random_effects = |rng: &mut dyn rand::RngCore, guards: &mut Vec<Formula>| -> BTreeMap<FluentId, EffectFn> {
        let mut rng = rng;
        let k = rng.gen_range(1..=2.min(n));
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(&mut rng);
        ids[..k]
            .iter()
            .map(|&i| (FluentId(i as u32), random_effect(&mut rng, &fluents, FluentId(i as u32), guards)))
            .collect()
    };

    let target = rng.gen_range(1..=cfg.max_transitions);
    while b.transitions.len() < target {
        let cost = rat(rng.gen_range(1..=2));
        let a = b.action(format!("a{}", b.actions.len()));
        let mut guards = vec![];
        let mut effects = if !b.transitions.is_empty() && rng.gen_bool(0.25) {
            // same effects as an earlier triple plus one more
            let base = b.transitions[rng.gen_range(0..b.transitions.len())].effects.clone();
            let mut e = base;
            let extra = FluentId(rng.gen_range(0..n) as u32);
            if let std::collections::btree_map::Entry::Vacant(slot) = e.entry(extra) {
                slot.insert(random_effect(rng, &fluents, extra, &mut guards));
            }
            e
        } else {
            random_effects(rng, &mut guards)
        };
        // re-derive guards for copied numeric steps
        for (f, e) in &effects {
            let (lo, hi) = fluents[f.index()].bound.unwrap_or((0, 3));
            match e {
                EffectFn::Increase(_) => guards.push(lit(Literal::num(*f, CmpOp::Lt, hi))),
                EffectFn::Decrease(_) => guards.push(lit(Literal::num(*f, CmpOp::Gt, lo))),
                _ => {}
            }
        }
        let pre = [random_pre(rng), guards.clone()].concat();
        if target - b.transitions.len() >= 2 && rng.gen_bool(0.2) {
            // two triples of one action, separated by a literal and its negation
            let split = random_literal(rng, &fluents, None);
            let mut second_guards = vec![];
            let second = if rng.gen() {
                let mut e = effects.clone();
                let extra = FluentId(rng.gen_range(0..n) as u32);
                if let std::collections::btree_map::Entry::Vacant(slot) = e.entry(extra) {
                    slot.insert(random_effect(rng, &fluents, extra, &mut second_guards));
                }
                e
            } else {
                random_effects(rng, &mut second_guards)
            };
            for (f, e) in &second {
                let (lo, hi) = fluents[f.index()].bound.unwrap_or((0, 3));
                match e {
                    EffectFn::Increase(_) => second_guards.push(lit(Literal::num(*f, CmpOp::Lt, hi))),
                    EffectFn::Decrease(_) => second_guards.push(lit(Literal::num(*f, CmpOp::Gt, lo))),
                    _ => {}
                }
            }
            let second_pre = [random_pre(rng), second_guards, vec![lit(split.negate())]].concat();
            b.transitions.push(CaeTriple::new(Formula::And([pre, vec![lit(split)]].concat()), a, std::mem::take(&mut effects)).with_cost(cost.clone()));
            b.transitions.push(CaeTriple::new(Formula::And(second_pre), a, second).with_cost(cost));
        } else {
            b.transitions.push(CaeTriple::new(Formula::And(pre).simplify(), a, effects).with_cost(cost));
        }
    }

    let k = rng.gen_range(1..=cfg.max_goal_fluents.min(n).max(1));
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let goal = Formula::And(ids[..k].iter().map(|&i| lit(random_literal(rng, &fluents, Some(FluentId(i as u32))))).collect());
    b.finish(goal.simplify())
}

const PLAYROOM_DOMAIN: &str = "(define (domain playroom)
  (:requirements :typing :fluents :negative-preconditions :equality)
  (:types agent ball bell thermostat switch button monkey level)
  (:predicates
    (lights-on ?s - switch)
    (music-on)
    (green ?b - button)
    (red ?b - button)
    (controls ?s - switch ?b - button)
    (monkey-screaming ?m - monkey)
  )
  (:functions
    (eye-x ?a - agent) (eye-y ?a - agent)
    (hand-x ?a - agent) (hand-y ?a - agent)
    (marker-x ?a - agent) (marker-y ?a - agent)
    (x ?o - object) (y ?o - object)
    (temperature)
    (level-value ?l - level)
    (grid-max)
  )
  (:action move-north-eye :parameters (?a - agent)
    :precondition (< (eye-y ?a) (grid-max)) :effect (increase (eye-y ?a) 1))
  (:action move-south-eye :parameters (?a - agent)
    :precondition (> (eye-y ?a) 0) :effect (decrease (eye-y ?a) 1))
  (:action move-east-eye :parameters (?a - agent)
    :precondition (< (eye-x ?a) (grid-max)) :effect (increase (eye-x ?a) 1))
  (:action move-west-eye :parameters (?a - agent)
    :precondition (> (eye-x ?a) 0) :effect (decrease (eye-x ?a) 1))
  (:action move-north-hand :parameters (?a - agent ?t - thermostat)
    :precondition (and (< (hand-y ?a) (grid-max)) (not (= (hand-y ?a) (y ?t))))
    :effect (increase (hand-y ?a) 1))
  (:action move-north-and-flick :parameters (?a - agent ?t - thermostat)
    :precondition (and (< (hand-y ?a) (grid-max)) (= (hand-y ?a) (y ?t)))
    :effect (and (increase (hand-y ?a) 1) (increase (temperature) 1)))
  (:action move-south-hand :parameters (?a - agent)
    :precondition (> (hand-y ?a) 0) :effect (decrease (hand-y ?a) 1))
  (:action move-east-hand :parameters (?a - agent)
    :precondition (< (hand-x ?a) (grid-max)) :effect (increase (hand-x ?a) 1))
  (:action move-west-hand :parameters (?a - agent)
    :precondition (> (hand-x ?a) 0) :effect (decrease (hand-x ?a) 1))
  (:action move-north-marker :parameters (?a - agent)
    :precondition (< (marker-y ?a) (grid-max)) :effect (increase (marker-y ?a) 1))
  (:action move-south-marker :parameters (?a - agent)
    :precondition (> (marker-y ?a) 0) :effect (decrease (marker-y ?a) 1))
  (:action move-east-marker :parameters (?a - agent)
    :precondition (< (marker-x ?a) (grid-max)) :effect (increase (marker-x ?a) 1))
  (:action move-west-marker :parameters (?a - agent)
    :precondition (> (marker-x ?a) 0) :effect (decrease (marker-x ?a) 1))
  (:action set-temperature :parameters (?a - agent ?t - thermostat ?l - level)
    :precondition (and (= (eye-x ?a) (x ?t)) (= (eye-y ?a) (y ?t)) (= (hand-x ?a) (x ?t)) (= (hand-y ?a) (y ?t)))
    :effect (assign (temperature) (level-value ?l)))
  (:action lights-on :parameters (?a - agent ?s - switch)
    :precondition (and (= (eye-x ?a) (x ?s)) (= (eye-y ?a) (y ?s)) (= (hand-x ?a) (x ?s)) (= (hand-y ?a) (y ?s))
                       (not (lights-on ?s)))
    :effect (lights-on ?s))
  (:action lights-off :parameters (?a - agent ?s - switch)
    :precondition (and (= (eye-x ?a) (x ?s)) (= (eye-y ?a) (y ?s)) (= (hand-x ?a) (x ?s)) (= (hand-y ?a) (y ?s))
                       (lights-on ?s))
    :effect (not (lights-on ?s)))
  (:action push-green :parameters (?a - agent ?b - button ?s - switch)
    :precondition (and (green ?b) (controls ?s ?b) (lights-on ?s)
                       (= (eye-x ?a) (x ?b)) (= (eye-y ?a) (y ?b)) (= (hand-x ?a) (x ?b)) (= (hand-y ?a) (y ?b)))
    :effect (music-on))
  (:action push-red :parameters (?a - agent ?b - button ?s - switch)
    :precondition (and (red ?b) (controls ?s ?b) (lights-on ?s)
                       (= (eye-x ?a) (x ?b)) (= (eye-y ?a) (y ?b)) (= (hand-x ?a) (x ?b)) (= (hand-y ?a) (y ?b)))
    :effect (not (music-on)))
  (:action throw-ball :parameters (?a - agent ?b - ball ?l - bell ?m - monkey)
    :precondition (and (music-on)
                       (= (eye-x ?a) (x ?b)) (= (eye-y ?a) (y ?b)) (= (hand-x ?a) (x ?b)) (= (hand-y ?a) (y ?b))
                       (= (marker-x ?a) (x ?l)) (= (marker-y ?a) (y ?l)))
    :effect (monkey-screaming ?m))
)
";

/// The playroom as PDDL text: a numeric domain and a problem with `groups`
/// switch/button groups on a `grid` x `grid` board. Object positions are
/// static functions, so they fold away during grounding.
pub fn playroom_pddl(grid: i64, groups: usize, music_on: bool) -> (String, String) {
    use std::fmt::Write;
    let hi = grid - 1;
    let mut objects = String::from("agent1 - agent ball1 - ball bell1 - bell thermostat1 - thermostat monkey1 - monkey");
    for l in 0..5 {
        let _ = write!(objects, " level{l}");
    }
    objects.push_str(" - level");
    let mut init = String::new();
    let place = |init: &mut String, o: &str, x: i64, y: i64| {
        let _ = writeln!(init, "    (= (x {o}) {x}) (= (y {o}) {y})");
    };
    for e in ["eye", "hand", "marker"] {
        let _ = writeln!(init, "    (= ({e}-x agent1) 0) (= ({e}-y agent1) 0)");
    }
    place(&mut init, "ball1", hi, hi);
    place(&mut init, "bell1", hi, (hi - 1).max(0));
    place(&mut init, "thermostat1", 0, hi.min(1));
    for g in 1..=groups {
        let _ = write!(objects, " switch{g} - switch green{g} red{g} - button");
        place(&mut init, &format!("switch{g}"), g as i64 % grid, hi);
        place(&mut init, &format!("green{g}"), hi, g as i64 % grid);
        place(&mut init, &format!("red{g}"), 0, (g as i64 + 1) % grid);
        let _ = writeln!(init, "    (green green{g}) (red red{g}) (controls switch{g} green{g}) (controls switch{g} red{g})");
    }
    for l in 0..5 {
        let _ = writeln!(init, "    (= (level-value level{l}) {l})");
    }
    let _ = writeln!(init, "    (= (temperature) 2) (= (grid-max) {hi})");
    if music_on {
        init.push_str("    (music-on)\n");
    }
    let problem = format!(
        "(define (problem playroom-{groups})\n  (:domain playroom)\n  (:objects {objects})\n  (:init\n{init}  )\n  (:goal (monkey-screaming monkey1))\n)\n"
    );
    (PLAYROOM_DOMAIN.to_string(), problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builders_produce_valid_problems() {
        playroom(&PlayroomConfig::default()).validate().unwrap();
        playroom(&PlayroomConfig { groups: 4, with_thermostat: false, ..Default::default() }).validate().unwrap();
        chain(10, 2).validate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = random_micro_problem(&mut rng, &MicroConfig::default());
            p.validate().unwrap();
            assert!(p.fluents.len() <= 6 && p.transitions.len() <= 12);
            p.check_mutual_exclusion(200, &mut rng).unwrap();
        }
    }

    #[test]
    fn playroom_names_follow_atom_style() {
        let p = playroom(&PlayroomConfig::default());
        for name in ["(hand-y agent1)", "(ball-x)", "(temperature)", "(music-on)", "(lights-on switch1)"] {
            assert!(p.fluent_by_name(name).is_some(), "{name}");
        }
    }
}
