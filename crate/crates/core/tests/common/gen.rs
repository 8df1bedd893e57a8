//! Seeded generators of valid state machines.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smd2cpn::smd::{Behaviour, BoolExpr, CmpOp, IntExpr, StateKind, StateMachine, StateNode, TransitionDef};

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub states: usize,
    /// Nesting depth guaranteed by a spine of composites (1 = flat).
    pub depth: usize,
    pub transitions: usize,
    pub events: usize,
    pub variables: usize,
}

/// States only: `shape.states` named states (plus final states) with a
/// nesting spine of `shape.depth` levels and random attachment elsewhere.
pub fn hierarchy(seed: u64, shape: Shape) -> StateMachine {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.states.max(1);
    let depth = shape.depth.clamp(1, n);
    // parent index and depth (1 = root member) of each named state
    let mut parent: Vec<Option<usize>> = Vec::with_capacity(n);
    let mut level: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        if i < depth {
            parent.push(i.checked_sub(1));
            level.push(i + 1);
        } else {
            let p = if rng.random_bool(0.25) {
                None
            } else {
                let candidates: Vec<usize> = (0..i).filter(|&j| level[j] < depth).collect();
                candidates.choose(&mut rng).copied()
            };
            level.push(p.map_or(1, |p| level[p] + 1));
            parent.push(p);
        }
    }
    let has_children: Vec<bool> = (0..n).map(|i| parent.contains(&Some(i))).collect();
    let name = |i: usize| format!("S{i}");

    let mut m = StateMachine::new(format!("Gen{seed}"));
    let mut region_has_initial = std::collections::BTreeSet::new();
    for i in 0..n {
        let mut s = if has_children[i] {
            StateNode::composite(name(i))
        } else {
            StateNode::simple(name(i))
        };
        if let Some(p) = parent[i] {
            s = s.under(name(p));
        }
        if region_has_initial.insert(parent[i]) {
            s = s.initial();
        }
        if has_children[i] && rng.random_bool(0.3) {
            s = s.with_history();
        }
        if rng.random_bool(0.3) {
            s = s.with_entry(Behaviour::new(format!("en{i}")));
        }
        if rng.random_bool(0.3) {
            s = s.with_exit(Behaviour::new(format!("ex{i}")));
        }
        if !has_children[i] && rng.random_bool(0.1) {
            s = s.with_do(Behaviour::new(format!("do{i}")));
        }
        m = m.state(s);
    }
    for i in (0..n).filter(|&i| has_children[i]) {
        if rng.random_bool(0.3) {
            m = m.state(StateNode::final_of(Some(&name(i))));
        }
    }
    if rng.random_bool(0.2) {
        m = m.state(StateNode::final_of(None));
    }
    m.canonical()
}

/// A hierarchy plus random transitions, events, guards and bounded assignments.
pub fn machine(seed: u64, shape: Shape) -> StateMachine {
    let mut m = hierarchy(seed, shape);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let vars: Vec<String> = (0..shape.variables).map(|i| format!("x{i}")).collect();
    for v in &vars {
        m = m.variable(v.clone(), 0);
    }
    let events: Vec<String> = (0..shape.events.max(1)).map(|i| format!("e{i}")).collect();
    let sources: Vec<StateNode> = m.states.iter().filter(|s| s.kind != StateKind::Final).cloned().collect();
    let targets: Vec<StateNode> = m.states.clone();
    let has_final = |c: &str| m.states.iter().any(|s| s.kind == StateKind::Final && s.parent.as_deref() == Some(c));
    let mut defs = Vec::new();
    for k in 0..shape.transitions {
        let src = sources.choose(&mut rng).expect("a state exists");
        let dst = targets.choose(&mut rng).expect("a state exists");
        let mut t = TransitionDef::new(format!("t{k}"), src.name.clone(), dst.name.clone());
        if dst.history && rng.random_bool(0.5) {
            t = t.to_history();
        }
        let completion = src.kind == StateKind::Composite && has_final(&src.name) && rng.random_bool(0.3);
        let spontaneous = src.kind == StateKind::Simple && rng.random_bool(0.1);
        if !completion && !spontaneous {
            t = t.on(events.choose(&mut rng).unwrap().clone());
        }
        if let Some(v) = vars.choose(&mut rng) {
            if rng.random_bool(0.3) {
                let op = *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt].choose(&mut rng).unwrap();
                t = t.when(BoolExpr::Cmp(op, IntExpr::Var(v.clone()), IntExpr::Lit(rng.random_range(0..2))));
            }
        }
        if rng.random_bool(0.3) {
            let mut b = Behaviour::new(format!("fx{k}"));
            if let Some(v) = vars.choose(&mut rng) {
                // 1 - v keeps every variable in {0, 1}.
                b = b.assign(v.clone(), IntExpr::Sub(Box::new(IntExpr::Lit(1)), Box::new(IntExpr::Var(v.clone()))));
            }
            t = t.with_effect(b);
        }
        defs.push(t);
    }
    for t in defs {
        m = m.transition(t);
    }
    m
}
