use std::collections::{HashMap, VecDeque};

use super::{Binding, Marking, Simulator};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub transition: String,
    pub binding: Binding,
}

/// Markings numbered in BFS discovery order; vertex 0 is the start marking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityGraph {
    pub markings: Vec<Marking>,
    pub edges: Vec<Edge>,
    /// Set when some successor was dropped because `bound` states were already known.
    pub truncated: bool,
}

impl ReachabilityGraph {
    pub fn state_count(&self) -> usize {
        self.markings.len()
    }

    /// Vertices with no outgoing edge.
    pub fn dead_states(&self) -> Vec<usize> {
        let mut has_out = vec![false; self.markings.len()];
        for e in &self.edges {
            has_out[e.from] = true;
        }
        (0..self.markings.len()).filter(|&i| !has_out[i]).collect()
    }
}

/// Breadth-first reachability from `start`, keeping at most `bound` markings.
/// Successors are expanded in (transition id, binding) order, so the vertex
/// numbering is a function of the net and the start marking alone.
pub fn explore(sim: &Simulator<'_>, start: &Marking, bound: usize) -> ReachabilityGraph {
    let bound = bound.max(1);
    let mut index: HashMap<Marking, usize> = HashMap::new();
    let mut markings = vec![start.clone()];
    index.insert(start.clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut edges = Vec::new();
    let mut truncated = false;

    while let Some(from) = queue.pop_front() {
        let current = markings[from].clone();
        for (transition, binding, next) in sim.successors(&current) {
            let to = match index.get(&next) {
                Some(&to) => to,
                None if markings.len() < bound => {
                    let to = markings.len();
                    index.insert(next.clone(), to);
                    markings.push(next);
                    queue.push_back(to);
                    to
                }
                None => {
                    truncated = true;
                    continue;
                }
            };
            edges.push(Edge {
                from,
                to,
                transition: transition.to_string(),
                binding,
            });
        }
    }

    ReachabilityGraph {
        markings,
        edges,
        truncated,
    }
}
