//! State machine to coloured Petri net translation.
//!
//! Every simple state becomes an activity place, every final state a `^F`
//! place and every history composite a `^H` place recording its last active
//! child. Composite states without history or final states leave no trace.
//! An SMD transition becomes one dispatch transition per source leaf followed
//! by a chain of behaviour transitions (exits innermost-first, the effect,
//! entries outermost-first) that hands the control token to the target.

mod map;
mod safety;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use map::{Dispatch, Occurrence, Segment, TranslationMap};
pub use safety::{check_control_safety, SafetyReport, SafetyViolation};

use crate::cpn::{
    Arc, ColourDecl, ColourSet, ColouredNet, Expr, Multiset, NetError, Orientation, Place, Transition, Value, VarDecl,
};
use crate::smd::{Behaviour, BoolExpr, IntExpr, Machine, StateId, StateKind, TransitionDef, ROOT_FINAL};

pub const UNIT: &str = "UNIT";
pub const INT: &str = "INT";
pub const EVENT: &str = "EVENT";
pub const VARS: &str = "VARS";
pub const EVENTS: &str = "EVENTS";
pub const EVENTS_CAP: &str = "EVENTS_CAP";
/// History value meaning "nothing remembered, use the default entry".
pub const NONE: &str = "NONE";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TranslationConfig {
    /// Tokens of each event the environment may have pending at once.
    pub event_capacity: usize,
    /// Add `EVENTS_CAP` and one producer transition per event.
    pub include_environment: bool,
}

impl Default for TranslationConfig {
    fn default() -> Self {
        TranslationConfig {
            event_capacity: 1,
            include_environment: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("generated identifier `{0}` is used twice")]
    IdCollision(String),
    #[error("generated net is ill-formed: {0}")]
    Net(#[from] NetError),
}

/// Net and map under construction; the three passes fill it in turn.
#[derive(Debug, Clone)]
pub struct Translation {
    pub net: ColouredNet,
    pub map: TranslationMap,
    /// (transition, history composite, in-flight place awaiting restore).
    history_joins: Vec<(String, StateId, String)>,
    ids: BTreeSet<String>,
    collision: Option<String>,
    arc_seq: usize,
    environment: bool,
}

pub fn cpn_var(smd_var: &str) -> String {
    format!("v_{smd_var}")
}

pub fn history_var(composite: &str) -> String {
    format!("h_{composite}")
}

pub fn history_colour(composite: &str) -> String {
    format!("H_{composite}")
}

/// Whole pipeline: states, transitions, history restores, then canonical ordering.
pub fn translate(machine: &Machine, config: &TranslationConfig) -> Result<(ColouredNet, TranslationMap), TranslateError> {
    let mut t = translate_states(machine, config);
    translate_transitions(machine, &mut t);
    translate_history(machine, &mut t);
    if let Some(id) = t.collision {
        return Err(TranslateError::IdCollision(id));
    }
    let mut net = t.net;
    net.canonicalize();
    net.check()?;
    Ok((net, t.map))
}

impl Translation {
    fn claim(&mut self, id: &str) {
        if !self.ids.insert(id.to_string()) && self.collision.is_none() {
            self.collision = Some(id.to_string());
        }
    }

    fn add_place(&mut self, id: String, name: String, colour: &str, initial: Multiset) -> String {
        self.claim(&id);
        self.net.places.push(Place {
            id: id.clone(),
            name,
            colour: colour.to_string(),
            initial,
        });
        id
    }

    fn add_transition(&mut self, id: String, name: String, guard: Option<Expr>, observable: Option<String>) -> String {
        self.claim(&id);
        self.net.transitions.push(Transition {
            id: id.clone(),
            name,
            guard,
            observable,
        });
        id
    }

    fn arc(&mut self, place: &str, transition: &str, orientation: Orientation, inscription: Expr) {
        let id = format!("A_{}", self.arc_seq);
        self.arc_seq += 1;
        self.claim(&id);
        self.net.arcs.push(Arc {
            id,
            place: place.to_string(),
            transition: transition.to_string(),
            orientation,
            inscription,
        });
    }

    fn input(&mut self, place: &str, transition: &str, e: Expr) {
        self.arc(place, transition, Orientation::PtoT, e);
    }

    fn output(&mut self, place: &str, transition: &str, e: Expr) {
        self.arc(place, transition, Orientation::TtoP, e);
    }

    fn vars_pattern(&self) -> Expr {
        let vars: Vec<Expr> = self.map.variables.iter().map(|v| Expr::Var(cpn_var(v))).collect();
        match vars.len() {
            1 => vars.into_iter().next().expect("one variable"),
            _ => Expr::Tuple(vars),
        }
    }

    /// `VARS` after running the assignments in order, as one expression over
    /// the values read on the input arc.
    fn vars_update(&self, b: &Behaviour) -> Expr {
        let mut env: BTreeMap<&str, Expr> = self
            .map
            .variables
            .iter()
            .map(|v| (v.as_str(), Expr::Var(cpn_var(v))))
            .collect();
        for (var, value) in &b.assignments {
            let e = int_expr(value, &|v| env.get(v).cloned().unwrap_or(Expr::Int(0)));
            env.insert(var.as_str(), e);
        }
        let vals: Vec<Expr> = self.map.variables.iter().map(|v| env[v.as_str()].clone()).collect();
        match vals.len() {
            1 => vals.into_iter().next().expect("one variable"),
            _ => Expr::Tuple(vals),
        }
    }

    /// Transition running behaviour `b`, reading and rewriting `VARS` when it assigns.
    fn behaviour_transition(&mut self, id: String, b: &Behaviour, occurrence: Occurrence) -> String {
        let id = self.add_transition(id, b.label.clone(), None, Some(b.label.clone()));
        if !b.assignments.is_empty() {
            let vars = self.map.vars_place.clone().expect("assignments imply variables");
            let pattern = self.vars_pattern();
            let update = self.vars_update(b);
            self.input(&vars, &id, pattern);
            self.output(&vars, &id, update);
        }
        self.map.behaviour_trans.insert(occurrence, id.clone());
        id
    }

    /// Wires `start → p0 → b0 → p1 → b1 … → end`. With no `start` the first
    /// place has no producer here (something else feeds it). Returns created ids.
    fn wire(&mut self, start: Option<&str>, steps: Vec<Step<'_>>, end: &str) -> Vec<String> {
        let mut created = Vec::new();
        let mut prev = start.map(str::to_string);
        for step in steps {
            let place = self.add_place(step.place.clone(), step.place_name, UNIT, Multiset::new());
            self.map.in_flight.insert(place.clone());
            created.push(place.clone());
            if let Some(p) = &prev {
                self.output(&place, p, Expr::Unit);
            }
            let t = self.behaviour_transition(step.transition, step.behaviour, step.occurrence);
            self.input(&place, &t, Expr::Unit);
            created.push(t.clone());
            prev = Some(t);
        }
        if let Some(p) = prev {
            self.output(end, &p, Expr::Unit);
        }
        created
    }

    fn record(&mut self, transition: &str, nodes: Vec<String>) {
        self.map
            .transition_subnet
            .entry(transition.to_string())
            .or_default()
            .extend(nodes);
    }

    /// Control place a leaf or entered state stands on once it is active.
    fn leaf_place(&self, machine: &Machine, leaf: StateId) -> String {
        self.map
            .place_of_leaf(machine.state_name(leaf))
            .expect("every leaf has a control place")
            .to_string()
    }
}

struct Step<'m> {
    place: String,
    place_name: String,
    transition: String,
    behaviour: &'m Behaviour,
    occurrence: Occurrence,
}

fn int_expr(e: &IntExpr, var: &impl Fn(&str) -> Expr) -> Expr {
    let bin = |a: &IntExpr, b: &IntExpr| (Box::new(int_expr(a, var)), Box::new(int_expr(b, var)));
    match e {
        IntExpr::Lit(v) => Expr::Int(*v),
        IntExpr::Var(v) => var(v),
        IntExpr::Neg(a) => Expr::Neg(Box::new(int_expr(a, var))),
        IntExpr::Add(a, b) => {
            let (a, b) = bin(a, b);
            Expr::Add(a, b)
        }
        IntExpr::Sub(a, b) => {
            let (a, b) = bin(a, b);
            Expr::Sub(a, b)
        }
        IntExpr::Mul(a, b) => {
            let (a, b) = bin(a, b);
            Expr::Mul(a, b)
        }
    }
}

/// SMD guard over `v_` variables.
pub fn guard_expr(g: &BoolExpr) -> Expr {
    let var = |v: &str| Expr::Var(cpn_var(v));
    match g {
        BoolExpr::Lit(b) => Expr::Bool(*b),
        BoolExpr::Cmp(op, a, b) => Expr::Cmp(*op, Box::new(int_expr(a, &var)), Box::new(int_expr(b, &var))),
        BoolExpr::Not(a) => Expr::Not(Box::new(guard_expr(a))),
        BoolExpr::And(a, b) => Expr::And(Box::new(guard_expr(a)), Box::new(guard_expr(b))),
        BoolExpr::Or(a, b) => Expr::Or(Box::new(guard_expr(a)), Box::new(guard_expr(b))),
    }
}

/// Pass 1: colour sets, activity/final/history places, the variable and
/// event places, producers and do-behaviour transitions.
pub fn translate_states(machine: &Machine, config: &TranslationConfig) -> Translation {
    let model = machine.model();
    let events = model.events();
    let mut t = Translation {
        net: ColouredNet::default(),
        map: TranslationMap {
            variables: model.variables.iter().map(|v| v.name.clone()).collect(),
            event_capacity: config.event_capacity,
            ..TranslationMap::default()
        },
        history_joins: Vec::new(),
        ids: BTreeSet::new(),
        collision: None,
        arc_seq: 0,
        environment: config.include_environment,
    };

    let colours = &mut t.net.colours;
    colours.push(ColourDecl {
        name: UNIT.into(),
        set: ColourSet::Unit,
    });
    if !model.variables.is_empty() {
        colours.push(ColourDecl {
            name: INT.into(),
            set: ColourSet::Int,
        });
        if model.variables.len() > 1 {
            colours.push(ColourDecl {
                name: VARS.into(),
                set: ColourSet::Product(vec![INT.to_string(); model.variables.len()]),
            });
        }
        for v in &model.variables {
            t.net.variables.push(VarDecl {
                name: cpn_var(&v.name),
                colour: INT.into(),
            });
        }
    }
    if !events.is_empty() {
        t.net.colours.push(ColourDecl {
            name: EVENT.into(),
            set: ColourSet::Enum(events.iter().cloned().collect()),
        });
    }

    let initial_leaf = machine.initial_leaf();
    for s in machine.state_ids() {
        let node = machine.state(s);
        match node.kind {
            StateKind::Simple => {
                let initial = if s == initial_leaf {
                    Multiset::single(Value::Unit)
                } else {
                    Multiset::new()
                };
                let p = t.add_place(format!("P_{}", node.name), node.name.clone(), UNIT, initial);
                t.map.state_place.insert(node.name.clone(), p);
            }
            StateKind::Final => match &node.parent {
                Some(c) => {
                    let p = t.add_place(format!("P_{c}__F"), format!("{c}^F"), UNIT, Multiset::new());
                    t.map.final_place.insert(c.clone(), p);
                }
                None => {
                    let p = t.add_place(format!("P_{ROOT_FINAL}"), ROOT_FINAL.into(), UNIT, Multiset::new());
                    t.map.root_final_place = Some(p);
                }
            },
            StateKind::Composite if node.history => {
                let colour = history_colour(&node.name);
                let mut values: Vec<String> = machine
                    .children(s)
                    .iter()
                    .filter(|&&c| machine.kind(c) != StateKind::Final)
                    .map(|&c| machine.state_name(c).to_string())
                    .collect();
                values.push(NONE.into());
                t.net.colours.push(ColourDecl {
                    name: colour.clone(),
                    set: ColourSet::Enum(values),
                });
                t.net.variables.push(VarDecl {
                    name: history_var(&node.name),
                    colour: colour.clone(),
                });
                let p = t.add_place(
                    format!("P_{}__H", node.name),
                    format!("{}^H", node.name),
                    &colour,
                    Multiset::single(Value::Enum(NONE.into())),
                );
                t.map.history_place.insert(node.name.clone(), p);
            }
            StateKind::Composite => {}
        }
    }

    if !model.variables.is_empty() {
        let (colour, initial) = if model.variables.len() == 1 {
            (INT, Value::Int(model.variables[0].initial))
        } else {
            (
                VARS,
                Value::Tuple(model.variables.iter().map(|v| Value::Int(v.initial)).collect()),
            )
        };
        let p = t.add_place(VARS.into(), VARS.into(), colour, Multiset::single(initial));
        t.map.vars_place = Some(p);
    }

    if !events.is_empty() {
        let p = t.add_place(EVENTS.into(), EVENTS.into(), EVENT, Multiset::new());
        t.map.events_place = Some(p.clone());
        if config.include_environment {
            let mut cap = Multiset::new();
            for e in &events {
                cap.add(Value::Enum(e.clone()), config.event_capacity);
            }
            let c = t.add_place(EVENTS_CAP.into(), EVENTS_CAP.into(), EVENT, cap);
            t.map.capacity_place = Some(c.clone());
            for e in &events {
                let id = t.add_transition(format!("T_{e}__produce"), format!("produce {e}"), None, None);
                t.input(&c, &id, Expr::Const(e.clone()));
                t.output(&p, &id, Expr::Const(e.clone()));
                t.map.producers.insert(e.clone(), id);
            }
        }
    }

    for s in machine.state_ids() {
        let node = machine.state(s);
        if let Some(b) = &node.do_activity {
            let place = t.map.state_place.get(&node.name).cloned().expect("do-behaviours sit on simple states");
            let id = t.behaviour_transition(
                format!("T_{}__do", node.name),
                b,
                Occurrence::Do {
                    state: node.name.clone(),
                },
            );
            t.input(&place, &id, Expr::Unit);
            t.output(&place, &id, Expr::Unit);
            t.map.do_transitions.insert(node.name.clone(), id);
        }
    }
    t
}

/// Pass 2: one dispatch per source leaf plus the exit, effect and entry chain.
pub fn translate_transitions(machine: &Machine, t: &mut Translation) {
    for def in &machine.model().transitions {
        translate_transition(machine, t, def);
    }
}

fn translate_transition(machine: &Machine, t: &mut Translation, def: &TransitionDef) {
    let tid = def.id.as_str();
    let scope = machine.scope(def);
    let target = machine.target_state(def);
    let to_history = Machine::is_history_target(def);

    let entry_to = if to_history { target } else { machine.default_configuration(target) };
    let mut shared: Vec<&Behaviour> = def.effect.iter().collect();
    shared.extend(machine.entry_chain(scope.entry_boundary, entry_to).expect("boundary contains target"));
    let mut created = Vec::new();
    // In-flight place awaiting the history restore, or the final control place.
    let end = if to_history {
        let r = t.add_place(
            format!("P_{tid}__{}", shared.len()),
            format!("{tid}.{}", shared.len()),
            UNIT,
            Multiset::new(),
        );
        t.map.in_flight.insert(r.clone());
        t.history_joins.push((tid.to_string(), target, r.clone()));
        created.push(r.clone());
        r
    } else {
        t.leaf_place(machine, entry_to)
    };

    let join = if shared.is_empty() {
        end.clone()
    } else {
        format!("P_{tid}__0")
    };
    let steps = shared
        .iter()
        .enumerate()
        .map(|(k, b)| Step {
            place: format!("P_{tid}__{k}"),
            place_name: format!("{tid}.{k}"),
            transition: format!("T_{tid}__beh_{k}"),
            behaviour: b,
            occurrence: Occurrence::Chain {
                transition: tid.to_string(),
                segment: Segment::Shared,
                index: k,
            },
        })
        .collect();
    let mut shared_nodes = t.wire(None, steps, &end);

    let guard = def.guard.as_ref().map(guard_expr);
    for leaf in machine.source_leaves(def) {
        let leaf_name = machine.state_name(leaf).to_string();
        let leaf_place = t.leaf_place(machine, leaf);
        let dispatch = t.add_transition(
            format!("T_{tid}__from_{leaf_name}"),
            format!("{tid}:{leaf_name}"),
            guard.clone(),
            None,
        );
        created.push(dispatch.clone());
        t.map.dispatch.insert(
            dispatch.clone(),
            Dispatch {
                transition: tid.to_string(),
                leaf: leaf_name.clone(),
            },
        );
        t.input(&leaf_place, &dispatch, Expr::Unit);
        if let Some(e) = &def.trigger {
            let events = t.map.events_place.clone().expect("triggers imply an event place");
            t.input(&events, &dispatch, Expr::Const(e.clone()));
            if let Some(cap) = t.map.capacity_place.clone() {
                t.output(&cap, &dispatch, Expr::Const(e.clone()));
            }
        }
        if def.guard.is_some() {
            let vars = t.map.vars_place.clone().expect("guards imply variables");
            let pattern = t.vars_pattern();
            t.input(&vars, &dispatch, pattern.clone());
            t.output(&vars, &dispatch, pattern);
        }
        for (composite, child) in machine.history_updates(leaf, scope.exit_boundary) {
            let c = machine.state_name(composite);
            let place = t.map.history_place[c].clone();
            let value = child.map_or(NONE, |ch| machine.state_name(ch));
            t.input(&place, &dispatch, Expr::Var(history_var(c)));
            t.output(&place, &dispatch, Expr::Const(value.to_string()));
        }

        let exits = machine.exit_chain(leaf, scope.exit_boundary).expect("boundary contains leaf");
        let steps = exits
            .into_iter()
            .enumerate()
            .map(|(j, b)| Step {
                place: format!("P_{tid}__exit_{leaf_name}_{j}"),
                place_name: format!("{tid}.exit.{leaf_name}.{j}"),
                transition: format!("T_{tid}__exit_{leaf_name}_{j}"),
                behaviour: b,
                occurrence: Occurrence::Chain {
                    transition: tid.to_string(),
                    segment: Segment::Exit {
                        leaf: leaf_name.clone(),
                    },
                    index: j,
                },
            })
            .collect();
        created.extend(t.wire(Some(&dispatch), steps, &join));
    }
    created.append(&mut shared_nodes);
    t.record(tid, created);
}

/// Pass 3: restore transitions that read a `^H` memory and descend either
/// into the remembered child or along the default entry path.
pub fn translate_history(machine: &Machine, t: &mut Translation) {
    let joins = std::mem::take(&mut t.history_joins);
    for (tid, composite, waiting) in joins {
        let c = machine.state_name(composite).to_string();
        let hplace = t.map.history_place[&c].clone();
        let mut options: Vec<(String, StateId)> = machine
            .children(composite)
            .iter()
            .filter(|&&ch| machine.kind(ch) != StateKind::Final)
            .map(|&ch| (machine.state_name(ch).to_string(), ch))
            .collect();
        options.push((NONE.to_string(), machine.initial_child(Some(composite))));

        let mut created = Vec::new();
        for (value, child) in options {
            let restore = t.add_transition(
                format!("T_{tid}__restore_{value}"),
                format!("{tid}:H={value}"),
                None,
                None,
            );
            created.push(restore.clone());
            t.input(&waiting, &restore, Expr::Unit);
            t.input(&hplace, &restore, Expr::Const(value.clone()));
            t.output(&hplace, &restore, Expr::Const(value.clone()));
            let leaf = machine.default_configuration(child);
            let entries = machine.entry_chain(child, leaf).expect("child contains its default leaf");
            let end = t.leaf_place(machine, leaf);
            let steps = entries
                .into_iter()
                .enumerate()
                .map(|(j, b)| Step {
                    place: format!("P_{tid}__hist_{value}_{j}"),
                    place_name: format!("{tid}.hist.{value}.{j}"),
                    transition: format!("T_{tid}__hist_{value}_{j}"),
                    behaviour: b,
                    occurrence: Occurrence::Chain {
                        transition: tid.clone(),
                        segment: Segment::Restore { child: value.clone() },
                        index: j,
                    },
                })
                .collect();
            created.extend(t.wire(Some(&restore), steps, &end));
        }
        t.record(&tid, created);
    }
}

impl Translation {
    /// Whether the producers and `EVENTS_CAP` were requested.
    pub fn includes_environment(&self) -> bool {
        self.environment
    }
}

#[cfg(test)]
mod tests;
