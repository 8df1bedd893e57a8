use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use super::interp::{enabled_transitions, initial_configuration, inject, step, Configuration};
use crate::cpn::{ColouredNet, Marking, NetError, Simulator, Value};
use crate::smd::Machine;
use crate::translate::TranslationMap;

/// Where control ended up after a step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Active(String),
    /// The chain reached a marking without exactly one control token.
    Invalid { control_tokens: usize },
    /// The chain deadlocked before control came to rest.
    Stuck,
}

/// One edge of the observable step tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Inject(String),
    Step {
        event: Option<String>,
        behaviours: Vec<String>,
        outcome: Outcome,
    },
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Inject(e) => write!(f, "inject {e}"),
            Move::Step {
                event,
                behaviours,
                outcome,
            } => {
                match event {
                    Some(e) => write!(f, "{e}")?,
                    None => f.write_str("(completion)")?,
                }
                if !behaviours.is_empty() {
                    write!(f, " / {}", behaviours.join(", "))?;
                }
                match outcome {
                    Outcome::Active(s) => write!(f, " -> {s}"),
                    Outcome::Invalid { control_tokens } => write!(f, " -> <{control_tokens} control tokens>"),
                    Outcome::Stuck => f.write_str(" -> <stuck>"),
                }
            }
        }
    }
}

/// Which system could take the diverging move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Model,
    Net,
}

/// Shortest run after which the two systems disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// Moves both systems performed.
    pub common: Vec<Move>,
    /// The move only one side can perform next.
    pub divergence: Move,
    pub side: Side,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.common.iter().enumerate() {
            writeln!(f, "{:>3}. {m}", i + 1)?;
        }
        let (can, cannot) = match self.side {
            Side::Model => ("model", "net"),
            Side::Net => ("net", "model"),
        };
        write!(f, "  then the {can} can do `{}` but the {cannot} cannot", self.divergence)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equivalent { depth: usize },
    Inequivalent(Counterexample),
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("depth bound must be at least 1")]
    ZeroDepth,
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("a step did not come to rest within {0} intermediate markings")]
    ChainBound(usize),
}

/// Intermediate markings explored per step before giving up.
pub const DEFAULT_CHAIN_BOUND: usize = 10_000;

/// Projects net runs onto observable steps: from a stable marking, either
/// a producer injects an event or some other transition starts a step that
/// is followed until control is at rest again.
pub struct NetProjection<'n> {
    sim: Simulator<'n>,
    map: &'n TranslationMap,
    control: Vec<usize>,
    in_flight: Vec<usize>,
    events: Option<usize>,
    producers: BTreeMap<&'n str, &'n str>,
    skipped: BTreeSet<&'n str>,
    chain_bound: usize,
}

impl<'n> NetProjection<'n> {
    pub fn new(net: &'n ColouredNet, map: &'n TranslationMap, chain_bound: usize) -> Result<Self, NetError> {
        let sim = Simulator::new(net)?;
        let index = |ids: Vec<&str>| -> Vec<usize> { ids.into_iter().filter_map(|p| net.place_index(p)).collect() };
        Ok(NetProjection {
            control: index(map.control_places().into_iter().collect()),
            in_flight: index(map.in_flight.iter().map(String::as_str).collect()),
            events: map.events_place.as_deref().and_then(|p| net.place_index(p)),
            producers: map.producers.iter().map(|(e, t)| (t.as_str(), e.as_str())).collect(),
            skipped: map.do_transitions.values().map(String::as_str).collect(),
            sim,
            map,
            chain_bound,
        })
    }

    fn is_stable(&self, m: &Marking) -> bool {
        self.in_flight.iter().all(|&p| m.place(p).is_empty())
    }

    fn outcome(&self, m: &Marking) -> Outcome {
        let tokens: usize = self.control.iter().map(|&p| m.place(p).len()).sum();
        if tokens != 1 {
            return Outcome::Invalid { control_tokens: tokens };
        }
        let net = self.sim.net();
        let place = self
            .control
            .iter()
            .find(|&&p| !m.place(p).is_empty())
            .map(|&p| net.places[p].id.as_str())
            .expect("one control token");
        match self.map.leaf_of_place(place) {
            Some(leaf) => Outcome::Active(leaf),
            None => Outcome::Invalid { control_tokens: 1 },
        }
    }

    fn consumed_event(&self, before: &Marking, after: &Marking) -> Option<String> {
        let p = self.events?;
        let mut consumed = Vec::new();
        for (v, n) in before.place(p).iter() {
            for _ in after.place(p).count(v)..n {
                if let Value::Enum(e) = v {
                    consumed.push(e.clone());
                }
            }
        }
        (!consumed.is_empty()).then(|| consumed.join("+"))
    }

    /// Observable moves from a stable marking, sorted and deduplicated.
    pub fn moves(&self, m: &Marking) -> Result<Vec<(Move, Marking)>, EquivError> {
        let mut out = BTreeSet::new();
        for (t, _, next) in self.sim.successors(m) {
            if self.skipped.contains(t) {
                continue;
            }
            if let Some(e) = self.producers.get(t) {
                out.insert((Move::Inject(e.to_string()), next));
                continue;
            }
            for (behaviours, end, outcome) in self.follow(t, next)? {
                let event = self.consumed_event(m, &end);
                out.insert((
                    Move::Step {
                        event,
                        behaviours,
                        outcome,
                    },
                    end,
                ));
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Every way the chain started by `first` can come to rest.
    fn follow(&self, first: &str, start: Marking) -> Result<Vec<(Vec<String>, Marking, Outcome)>, EquivError> {
        let net = self.sim.net();
        let label = |t: &str| net.transition(t).and_then(|t| t.observable.clone());
        let mut results = Vec::new();
        let mut seen: BTreeSet<Marking> = BTreeSet::new();
        let mut stack = vec![(label(first).into_iter().collect::<Vec<_>>(), start)];
        while let Some((labels, m)) = stack.pop() {
            if self.is_stable(&m) {
                let outcome = self.outcome(&m);
                results.push((labels, m, outcome));
                continue;
            }
            if !seen.insert(m.clone()) {
                continue;
            }
            if seen.len() > self.chain_bound {
                return Err(EquivError::ChainBound(self.chain_bound));
            }
            let next: Vec<_> = self
                .sim
                .successors(&m)
                .into_iter()
                .filter(|(t, _, _)| !self.producers.contains_key(t) && !self.skipped.contains(t))
                .collect();
            if next.is_empty() {
                results.push((labels, m, Outcome::Stuck));
                continue;
            }
            for (t, _, n) in next.into_iter().rev() {
                let mut l = labels.clone();
                l.extend(label(t));
                stack.push((l, n));
            }
        }
        Ok(results)
    }
}

struct Checker<'a> {
    machine: &'a Machine,
    net: NetProjection<'a>,
    capacity: usize,
    environment: bool,
    events: Vec<String>,
    model_moves: HashMap<Configuration, Vec<(Move, Configuration)>>,
    net_moves: HashMap<Marking, Vec<(Move, Marking)>>,
    /// Pairs known to agree for at least this many further moves.
    agreed: HashMap<(Configuration, Marking), usize>,
}

impl<'a> Checker<'a> {
    fn model_moves(&mut self, c: &Configuration) -> Vec<(Move, Configuration)> {
        if let Some(m) = self.model_moves.get(c) {
            return m.clone();
        }
        let mut out = BTreeSet::new();
        if self.environment {
            for e in &self.events {
                if c.pending.get(e).copied().unwrap_or(0) < self.capacity {
                    out.insert((Move::Inject(e.clone()), inject(c, e)));
                }
            }
        }
        for choice in enabled_transitions(self.machine, c) {
            let (next, s) = step(self.machine, c, &choice).expect("enabled choice steps");
            out.insert((
                Move::Step {
                    event: s.event,
                    behaviours: s.behaviours,
                    outcome: Outcome::Active(s.active),
                },
                next,
            ));
        }
        let moves: Vec<_> = out.into_iter().collect();
        self.model_moves.insert(c.clone(), moves.clone());
        moves
    }

    fn net_moves(&mut self, m: &Marking) -> Result<Vec<(Move, Marking)>, EquivError> {
        if let Some(v) = self.net_moves.get(m) {
            return Ok(v.clone());
        }
        let moves = self.net.moves(m)?;
        self.net_moves.insert(m.clone(), moves.clone());
        Ok(moves)
    }

    /// Bounded bisimulation: `None` when the two agree for `depth` more moves.
    fn check(&mut self, c: &Configuration, m: &Marking, depth: usize) -> Result<Option<Counterexample>, EquivError> {
        if depth == 0 {
            return Ok(None);
        }
        let key = (c.clone(), m.clone());
        if self.agreed.get(&key).is_some_and(|&d| d >= depth) {
            return Ok(None);
        }
        let model = self.model_moves(c);
        let net = self.net_moves(m)?;
        let model_labels: BTreeSet<&Move> = model.iter().map(|(x, _)| x).collect();
        let net_labels: BTreeSet<&Move> = net.iter().map(|(x, _)| x).collect();
        let only_model = model_labels.difference(&net_labels).next().map(|x| (*x, Side::Model));
        let only_net = net_labels.difference(&model_labels).next().map(|x| (*x, Side::Net));
        if let Some((mv, side)) = only_model.or(only_net) {
            return Ok(Some(Counterexample {
                common: Vec::new(),
                divergence: mv.clone(),
                side,
            }));
        }
        // Labels agree one level down; every matching pair must keep agreeing.
        for (mv, c2) in &model {
            let mut first_failure = None;
            let mut matched = false;
            for (_, m2) in net.iter().filter(|(x, _)| x == mv) {
                match self.check(c2, m2, depth - 1)? {
                    None => {
                        matched = true;
                        break;
                    }
                    Some(cx) if first_failure.is_none() => first_failure = Some(cx),
                    Some(_) => {}
                }
            }
            if !matched {
                let mut cx = first_failure.expect("a partner exists");
                cx.common.insert(0, mv.clone());
                return Ok(Some(cx));
            }
        }
        for (mv, m2) in &net {
            let mut first_failure = None;
            let mut matched = false;
            for (_, c2) in model.iter().filter(|(x, _)| x == mv) {
                match self.check(c2, m2, depth - 1)? {
                    None => {
                        matched = true;
                        break;
                    }
                    Some(cx) if first_failure.is_none() => first_failure = Some(cx),
                    Some(_) => {}
                }
            }
            if !matched {
                let mut cx = first_failure.expect("a partner exists");
                cx.common.insert(0, mv.clone());
                return Ok(Some(cx));
            }
        }
        self.agreed.insert(key, depth);
        Ok(None)
    }
}

/// Compares the machine's step tree with the net's projected step tree up
/// to `depth` moves (injections count as moves). Searches depth 1, 2, ...
/// so a reported counterexample is a shortest one.
pub fn check_trace_equivalence(
    machine: &Machine,
    net: &ColouredNet,
    map: &TranslationMap,
    depth: usize,
) -> Result<Verdict, EquivError> {
    if depth == 0 {
        return Err(EquivError::ZeroDepth);
    }
    let mut checker = Checker {
        machine,
        net: NetProjection::new(net, map, DEFAULT_CHAIN_BOUND)?,
        capacity: map.event_capacity,
        environment: map.capacity_place.is_some(),
        events: machine.model().events().into_iter().collect(),
        model_moves: HashMap::new(),
        net_moves: HashMap::new(),
        agreed: HashMap::new(),
    };
    let c0 = initial_configuration(machine);
    let m0 = net.initial_marking();
    for d in 1..=depth {
        if let Some(cx) = checker.check(&c0, &m0, d)? {
            return Ok(Verdict::Inequivalent(cx));
        }
    }
    Ok(Verdict::Equivalent { depth })
}
