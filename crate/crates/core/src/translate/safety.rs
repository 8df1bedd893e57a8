use crate::cpn::{ColouredNet, ReachabilityGraph};

use super::TranslationMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyViolation {
    /// Vertex of the reachability graph.
    pub marking: usize,
    pub control_tokens: usize,
    pub vars_tokens: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyReport {
    pub states: usize,
    pub truncated: bool,
    pub violations: Vec<SafetyViolation>,
}

impl SafetyReport {
    /// Safe on every explored marking and the exploration was complete.
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && !self.truncated
    }
}

/// Checks that every explored marking holds exactly one token across the
/// control places and, when present, exactly one token on `VARS`.
pub fn check_control_safety(net: &ColouredNet, map: &TranslationMap, graph: &ReachabilityGraph) -> SafetyReport {
    let control: Vec<usize> = map
        .control_places()
        .into_iter()
        .filter_map(|p| net.place_index(p))
        .collect();
    let vars = map.vars_place.as_deref().and_then(|p| net.place_index(p));
    let violations = graph
        .markings
        .iter()
        .enumerate()
        .filter_map(|(i, m)| {
            let control_tokens: usize = control.iter().map(|&p| m.place(p).len()).sum();
            let vars_tokens = vars.map(|p| m.place(p).len());
            (control_tokens != 1 || vars_tokens.is_some_and(|n| n != 1)).then_some(SafetyViolation {
                marking: i,
                control_tokens,
                vars_tokens,
            })
        })
        .collect();
    SafetyReport {
        states: graph.state_count(),
        truncated: graph.truncated,
        violations,
    }
}
