use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::smd::{Machine, StateId, StateKind, Valuation};

/// Stable configuration of a running machine.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    /// Active leaf: a simple state, or a final state once its region completed.
    pub active: StateId,
    pub valuation: Valuation,
    /// Last active child of each history composite; `None` = nothing remembered.
    pub history: BTreeMap<StateId, Option<StateId>>,
    pub pending: BTreeMap<String, usize>,
}

/// A transition chosen to fire, with the event it consumes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Choice {
    pub transition: String,
    pub event: Option<String>,
}

/// Observable record of one run-to-completion step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceStep {
    pub event: Option<String>,
    pub behaviours: Vec<String>,
    pub active: String,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.event {
            Some(e) => write!(f, "{e}")?,
            None => f.write_str("(completion)")?,
        }
        if !self.behaviours.is_empty() {
            write!(f, " / {}", self.behaviours.join(", "))?;
        }
        write!(f, " -> {}", self.active)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
}

pub fn initial_configuration(machine: &Machine) -> Configuration {
    Configuration {
        active: machine.initial_leaf(),
        valuation: machine
            .model()
            .variables
            .iter()
            .map(|v| (v.name.clone(), v.initial))
            .collect(),
        history: machine
            .composites()
            .filter(|&c| machine.state(c).history)
            .map(|c| (c, None))
            .collect(),
        pending: BTreeMap::new(),
    }
}

/// Transitions that may fire now, in model order.
pub fn enabled_transitions(machine: &Machine, config: &Configuration) -> Vec<Choice> {
    machine
        .model()
        .transitions
        .iter()
        .filter(|t| machine.source_leaves(t).contains(&config.active))
        .filter(|t| t.trigger.as_ref().is_none_or(|e| config.pending.get(e).is_some_and(|&n| n > 0)))
        .filter(|t| t.guard.as_ref().is_none_or(|g| g.eval(&config.valuation)))
        .map(|t| Choice {
            transition: t.id.clone(),
            event: t.trigger.clone(),
        })
        .collect()
}

/// Adds one pending occurrence of `event`.
pub fn inject(config: &Configuration, event: &str) -> Configuration {
    let mut next = config.clone();
    *next.pending.entry(event.to_string()).or_insert(0) += 1;
    next
}

/// Fires `choice`: exits innermost-first, the effect, then entries
/// outermost-first, resolving a history target from memory.
pub fn step(machine: &Machine, config: &Configuration, choice: &Choice) -> Result<(Configuration, TraceStep), StepError> {
    if !enabled_transitions(machine, config).contains(choice) {
        return Err(StepError::NotEnabled(choice.transition.clone()));
    }
    let t = machine.transition(&choice.transition).expect("enabled transitions exist");
    let scope = machine.scope(t);
    let mut next = config.clone();
    if let Some(e) = &choice.event {
        let n = next.pending.get_mut(e).expect("enabled trigger is pending");
        *n -= 1;
        if *n == 0 {
            next.pending.remove(e);
        }
    }

    let mut behaviours = Vec::new();
    let exits = machine
        .exit_chain(config.active, scope.exit_boundary)
        .expect("exit boundary contains the active leaf");
    let target = machine.target_state(t);
    let mut run = |b: &crate::smd::Behaviour, valuation: &mut Valuation| {
        b.apply(valuation);
        behaviours.push(b.label.clone());
    };
    for b in exits {
        run(b, &mut next.valuation);
    }
    for (composite, child) in machine.history_updates(config.active, scope.exit_boundary) {
        next.history.insert(composite, child);
    }
    if let Some(b) = &t.effect {
        run(b, &mut next.valuation);
    }
    let leaf = if Machine::is_history_target(t) {
        for b in machine.entry_chain(scope.entry_boundary, target).expect("entry boundary contains target") {
            run(b, &mut next.valuation);
        }
        let child = next
            .history
            .get(&target)
            .copied()
            .flatten()
            .unwrap_or_else(|| machine.initial_child(Some(target)));
        let leaf = machine.default_configuration(child);
        for b in machine.entry_chain(child, leaf).expect("child contains its default leaf") {
            run(b, &mut next.valuation);
        }
        leaf
    } else {
        let leaf = machine.default_configuration(target);
        for b in machine.entry_chain(scope.entry_boundary, leaf).expect("entry boundary contains target") {
            run(b, &mut next.valuation);
        }
        leaf
    };
    debug_assert!(matches!(machine.kind(leaf), StateKind::Simple | StateKind::Final));
    next.active = leaf;
    let record = TraceStep {
        event: choice.event.clone(),
        behaviours,
        active: machine.state_name(leaf).to_string(),
    };
    Ok((next, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smdl;

    const CD_PLAYER: &str = include_str!("../../../../corpus/cdplayer.smdl");

    fn fire(m: &Machine, c: &Configuration, t: &str) -> (Configuration, TraceStep) {
        let choice = enabled_transitions(m, c)
            .into_iter()
            .find(|ch| ch.transition == t)
            .unwrap_or_else(|| panic!("{t} not enabled"));
        step(m, c, &choice).unwrap()
    }

    #[test]
    fn cd_player_starts_closed_with_track_zero() {
        let m = smdl::load(CD_PLAYER).unwrap();
        let c = initial_configuration(&m);
        assert_eq!(m.state_name(c.active), "Closed");
        assert_eq!(c.valuation["track"], 0);
        assert!(c.history.values().all(Option::is_none));
        assert!(enabled_transitions(&m, &c).is_empty());
    }

    #[test]
    fn entering_busy_runs_fts_first() {
        let m = smdl::load(CD_PLAYER).unwrap();
        let c = inject(&initial_configuration(&m), "play");
        let (c, s) = fire(&m, &c, "start");
        assert_eq!(s.behaviours, vec!["FTS"]);
        assert_eq!(s.active, "Playing");
        assert_eq!(c.valuation["track"], 1);
        assert!(c.pending.is_empty());
    }

    #[test]
    fn history_restores_paused() {
        let m = smdl::load(CD_PLAYER).unwrap();
        let mut c = initial_configuration(&m);
        for (e, t) in [("play", "start"), ("pause", "pause"), ("open_close", "eject"), ("play", "load")] {
            c = inject(&c, e);
            c = fire(&m, &c, t).0;
        }
        assert_eq!(m.state_name(c.active), "Paused");
    }

    #[test]
    fn guard_excludes_transition() {
        let m = smdl::load("machine M { var track : int = 0; state A initial; state B; trans t : A -> B if (track > 0); }")
            .unwrap();
        let c = initial_configuration(&m);
        assert!(enabled_transitions(&m, &c).is_empty());
        let choice = Choice {
            transition: "t".into(),
            event: None,
        };
        assert_eq!(step(&m, &c, &choice), Err(StepError::NotEnabled("t".into())));
    }

    #[test]
    fn valuation_domain_is_preserved() {
        let m = smdl::load(CD_PLAYER).unwrap();
        let mut c = inject(&initial_configuration(&m), "play");
        c = fire(&m, &c, "start").0;
        c = inject(&c, "next");
        let (c, s) = fire(&m, &c, "next");
        assert_eq!(s.behaviours, vec!["nextTrack"]);
        assert_eq!(c.valuation.keys().collect::<Vec<_>>(), vec!["track"]);
        assert_eq!(c.valuation["track"], 2);
    }
}
