use std::collections::{BTreeMap, BTreeSet};

use crate::smd::{final_state_name, ROOT_FINAL};

/// Which part of a transition's chain a behaviour transition sits in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    /// Exit behaviours run when leaving from this source leaf.
    Exit { leaf: String },
    /// Effect and entry behaviours common to every source leaf.
    Shared,
    /// Entry behaviours after restoring history to `child` (`NONE` = default).
    Restore { child: String },
}

/// One place where a behaviour is executed in the generated net.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Occurrence {
    Do {
        state: String,
    },
    Chain {
        transition: String,
        segment: Segment,
        index: usize,
    },
}

/// How to start one SMD transition from one source leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dispatch {
    pub transition: String,
    pub leaf: String,
}

/// Records where each source element ended up in the generated net.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TranslationMap {
    /// Simple state → activity place.
    pub state_place: BTreeMap<String, String>,
    /// Composite → place of its final state (`^F`).
    pub final_place: BTreeMap<String, String>,
    /// Place of the root region's final state, if any.
    pub root_final_place: Option<String>,
    /// History composite → `^H` place.
    pub history_place: BTreeMap<String, String>,
    pub behaviour_trans: BTreeMap<Occurrence, String>,
    /// SMD transition → generated nodes (dispatches, in-flight places,
    /// behaviour and restore transitions), in creation order.
    pub transition_subnet: BTreeMap<String, Vec<String>>,
    pub dispatch: BTreeMap<String, Dispatch>,
    pub in_flight: BTreeSet<String>,
    pub producers: BTreeMap<String, String>,
    pub do_transitions: BTreeMap<String, String>,
    pub vars_place: Option<String>,
    pub events_place: Option<String>,
    pub capacity_place: Option<String>,
    /// Variable order inside the `VARS` token.
    pub variables: Vec<String>,
    pub event_capacity: usize,
}

impl TranslationMap {
    /// Places that can hold the single locus of control.
    pub fn control_places(&self) -> BTreeSet<&str> {
        self.state_place
            .values()
            .chain(self.final_place.values())
            .chain(self.root_final_place.iter())
            .chain(self.in_flight.iter())
            .map(String::as_str)
            .collect()
    }

    /// The source leaf (simple or final state name) a stable control place stands for.
    pub fn leaf_of_place(&self, place: &str) -> Option<String> {
        if let Some((s, _)) = self.state_place.iter().find(|(_, p)| p.as_str() == place) {
            return Some(s.clone());
        }
        if let Some((c, _)) = self.final_place.iter().find(|(_, p)| p.as_str() == place) {
            return Some(final_state_name(Some(c)));
        }
        if self.root_final_place.as_deref() == Some(place) {
            return Some(ROOT_FINAL.to_string());
        }
        None
    }

    /// Place holding control while `leaf` is active.
    pub fn place_of_leaf(&self, leaf: &str) -> Option<&str> {
        if let Some(p) = self.state_place.get(leaf) {
            return Some(p);
        }
        if leaf == ROOT_FINAL {
            return self.root_final_place.as_deref();
        }
        leaf.strip_suffix(".final")
            .and_then(|c| self.final_place.get(c))
            .map(String::as_str)
    }

    /// Every node id the map knows about.
    pub fn all_nodes(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = BTreeSet::new();
        out.extend(self.state_place.values().map(String::as_str));
        out.extend(self.final_place.values().map(String::as_str));
        out.extend(self.root_final_place.as_deref());
        out.extend(self.history_place.values().map(String::as_str));
        out.extend(self.behaviour_trans.values().map(String::as_str));
        out.extend(self.transition_subnet.values().flatten().map(String::as_str));
        out.extend(self.producers.values().map(String::as_str));
        out.extend(self.do_transitions.values().map(String::as_str));
        out.extend(self.vars_place.as_deref());
        out.extend(self.events_place.as_deref());
        out.extend(self.capacity_place.as_deref());
        out
    }
}
