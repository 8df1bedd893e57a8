//! Brute-force hierarchy queries straight from the parent links.

use std::collections::BTreeMap;

use smd2cpn::smd::{Behaviour, StateKind, StateMachine};

pub fn labels(chain: Vec<&Behaviour>) -> Vec<String> {
    chain.into_iter().map(|b| b.label.clone()).collect()
}

/// Naive view: parent by name, no precomputation.
pub struct Naive<'a> {
    model: &'a StateMachine,
    parent: BTreeMap<&'a str, Option<&'a str>>,
}

impl<'a> Naive<'a> {
    pub fn new(model: &'a StateMachine) -> Self {
        let parent = model.states.iter().map(|s| (s.name.as_str(), s.parent.as_deref())).collect();
        Naive { model, parent }
    }

    pub fn chain(&self, s: &'a str) -> Vec<&'a str> {
        let mut out = vec![s];
        while let Some(p) = self.parent[out.last().unwrap()] {
            out.push(p);
        }
        out
    }

    pub fn contains(&self, outer: &str, s: &'a str) -> bool {
        self.chain(s).contains(&outer)
    }

    pub fn depth(&self, s: &'a str) -> usize {
        self.chain(s).len()
    }

    pub fn preorder(&self, s: &'a str, out: &mut Vec<&'a str>) {
        out.push(s);
        for c in self.model.states.iter().filter(|c| c.parent.as_deref() == Some(s)) {
            self.preorder(&c.name, out);
        }
    }

    pub fn substates(&self, s: &'a str) -> Vec<&'a str> {
        let mut all = Vec::new();
        self.preorder(s, &mut all);
        all.retain(|x| self.model.find_state(x).unwrap().kind == StateKind::Simple);
        all
    }

    pub fn exit_chain(&self, from: &'a str, boundary: &str) -> Option<Vec<String>> {
        if !self.contains(boundary, from) {
            return None;
        }
        let mut between: Vec<&str> = self
            .model
            .states
            .iter()
            .map(|s| s.name.as_str())
            .filter(|a| self.contains(a, from) && self.contains(boundary, a))
            .collect();
        between.sort_by_key(|a| std::cmp::Reverse(self.depth(a)));
        Some(
            between
                .into_iter()
                .filter_map(|a| self.model.find_state(a).unwrap().exit.as_ref().map(|b| b.label.clone()))
                .collect(),
        )
    }

    pub fn entry_chain(&self, boundary: &str, to: &'a str) -> Option<Vec<String>> {
        if !self.contains(boundary, to) {
            return None;
        }
        let mut between: Vec<&str> = self
            .model
            .states
            .iter()
            .map(|s| s.name.as_str())
            .filter(|a| self.contains(a, to) && self.contains(boundary, a))
            .collect();
        between.sort_by_key(|a| self.depth(a));
        Some(
            between
                .into_iter()
                .filter_map(|a| self.model.find_state(a).unwrap().entry.as_ref().map(|b| b.label.clone()))
                .collect(),
        )
    }

    pub fn lca(&self, a: &'a str, b: &'a str) -> Option<&'a str> {
        self.model
            .states
            .iter()
            .map(|s| s.name.as_str())
            .filter(|x| self.contains(x, a) && self.contains(x, b))
            .max_by_key(|x| self.depth(x))
    }
}
