use std::collections::HashMap;

use thiserror::Error;

use super::{validate, Behaviour, StateKind, StateMachine, StateNode, Target, TransitionDef, ValidationReport};

/// Index of a state inside a [`Machine`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("`{boundary}` is not an ancestor of `{state}`")]
    NotAncestor { boundary: String, state: String },
    #[error("`{0}` is not a composite state")]
    NotComposite(String),
}

/// Where a transition leaves and re-enters the hierarchy.
///
/// Both boundaries are children of the same region (`region`, `None` = root).
/// Exits run from the active leaf up to and including `exit_boundary`;
/// entries run from `entry_boundary` down to the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionScope {
    pub region: Option<StateId>,
    pub exit_boundary: StateId,
    pub entry_boundary: StateId,
}

/// A validated state machine with precomputed hierarchy links.
#[derive(Debug, Clone)]
pub struct Machine {
    model: StateMachine,
    index: HashMap<String, StateId>,
    parent: Vec<Option<StateId>>,
    children: Vec<Vec<StateId>>,
    depth: Vec<u32>,
    roots: Vec<StateId>,
}

impl Machine {
    pub fn new(model: StateMachine) -> Result<Self, ValidationReport> {
        let report = validate(&model);
        if !report.is_ok() {
            return Err(report);
        }
        let n = model.states.len();
        let index: HashMap<String, StateId> = model
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.clone(), StateId(i as u32)))
            .collect();
        let parent: Vec<Option<StateId>> = model
            .states
            .iter()
            .map(|s| s.parent.as_ref().map(|p| index[p.as_str()]))
            .collect();
        let mut children = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for (i, p) in parent.iter().enumerate() {
            match p {
                Some(p) => children[p.index()].push(StateId(i as u32)),
                None => roots.push(StateId(i as u32)),
            }
        }
        let mut depth = vec![u32::MAX; n];
        let mut stack: Vec<(StateId, u32)> = roots.iter().map(|&r| (r, 0)).collect();
        while let Some((s, d)) = stack.pop() {
            depth[s.index()] = d;
            stack.extend(children[s.index()].iter().map(|&c| (c, d + 1)));
        }
        Ok(Machine {
            model,
            index,
            parent,
            children,
            depth,
            roots,
        })
    }

    pub fn model(&self) -> &StateMachine {
        &self.model
    }

    pub fn name(&self) -> &str {
        &self.model.name
    }

    pub fn len(&self) -> usize {
        self.model.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.model.states.is_empty()
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> {
        (0..self.model.states.len() as u32).map(StateId)
    }

    pub fn state(&self, id: StateId) -> &StateNode {
        &self.model.states[id.index()]
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.model.states[id.index()].name
    }

    pub fn kind(&self, id: StateId) -> StateKind {
        self.state(id).kind
    }

    pub fn id(&self, name: &str) -> Result<StateId, QueryError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| QueryError::UnknownState(name.to_string()))
    }

    pub fn parent(&self, id: StateId) -> Option<StateId> {
        self.parent[id.index()]
    }

    pub fn children(&self, id: StateId) -> &[StateId] {
        &self.children[id.index()]
    }

    /// Members of a region; `None` is the root region.
    pub fn region_members(&self, region: Option<StateId>) -> &[StateId] {
        match region {
            Some(s) => self.children(s),
            None => &self.roots,
        }
    }

    pub fn depth(&self, id: StateId) -> usize {
        self.depth[id.index()] as usize
    }

    pub fn initial_child(&self, region: Option<StateId>) -> StateId {
        *self
            .region_members(region)
            .iter()
            .find(|&&c| self.state(c).initial)
            .expect("validated regions have an initial state")
    }

    pub fn final_child(&self, region: Option<StateId>) -> Option<StateId> {
        self.region_members(region)
            .iter()
            .copied()
            .find(|&c| self.kind(c) == StateKind::Final)
    }

    pub fn composites(&self) -> impl Iterator<Item = StateId> + '_ {
        self.state_ids()
            .filter(|&s| self.kind(s) == StateKind::Composite)
    }

    pub fn transition(&self, id: &str) -> Option<&TransitionDef> {
        self.model.transitions.iter().find(|t| t.id == id)
    }

    /// Pre-order walk of the subtree rooted at `s`, each node visited once.
    pub fn walk_subtree(&self, s: StateId, mut visit: impl FnMut(StateId)) {
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            visit(x);
            stack.extend(self.children(x).iter().rev());
        }
    }

    /// Simple states below `s` (or `s` itself when simple), document order.
    /// Final states are excluded.
    pub fn substates(&self, s: StateId) -> Vec<StateId> {
        let mut out = Vec::new();
        self.walk_subtree(s, |x| {
            if self.kind(x) == StateKind::Simple {
                out.push(x);
            }
        });
        out
    }

    /// Every leaf (simple or final) below `s`, document order.
    pub fn leaves(&self, s: StateId) -> Vec<StateId> {
        let mut out = Vec::new();
        self.walk_subtree(s, |x| {
            if self.kind(x) != StateKind::Composite {
                out.push(x);
            }
        });
        out
    }

    /// `s`, then its parent, and so on up to a top-level state.
    pub fn ancestors(&self, s: StateId) -> impl Iterator<Item = StateId> + '_ {
        std::iter::successors(Some(s), move |&x| self.parent(x))
    }

    pub fn is_ancestor_or_self(&self, ancestor: StateId, s: StateId) -> bool {
        self.ancestors(s).any(|a| a == ancestor)
    }

    /// States from `from` up to and including `boundary`, innermost first.
    pub fn path_up(&self, from: StateId, boundary: StateId) -> Result<Vec<StateId>, QueryError> {
        let mut path = Vec::new();
        for a in self.ancestors(from) {
            path.push(a);
            if a == boundary {
                return Ok(path);
            }
        }
        Err(QueryError::NotAncestor {
            boundary: self.state_name(boundary).to_string(),
            state: self.state_name(from).to_string(),
        })
    }

    /// Exit behaviours from `from` up to `boundary` (inclusive), innermost first.
    pub fn exit_chain(&self, from: StateId, boundary: StateId) -> Result<Vec<&Behaviour>, QueryError> {
        Ok(self
            .path_up(from, boundary)?
            .into_iter()
            .filter_map(|s| self.state(s).exit.as_ref())
            .collect())
    }

    /// Entry behaviours from `boundary` down to `to` (inclusive), outermost first.
    pub fn entry_chain(&self, boundary: StateId, to: StateId) -> Result<Vec<&Behaviour>, QueryError> {
        Ok(self
            .path_up(to, boundary)?
            .into_iter()
            .rev()
            .filter_map(|s| self.state(s).entry.as_ref())
            .collect())
    }

    /// Deepest common ancestor-or-self; `None` is the root region.
    pub fn least_common_ancestor(&self, a: StateId, b: StateId) -> Option<StateId> {
        let (mut a, mut b) = (Some(a), Some(b));
        while let (Some(x), Some(y)) = (a, b) {
            if x == y {
                return Some(x);
            }
            match self.depth(x).cmp(&self.depth(y)) {
                std::cmp::Ordering::Greater => a = self.parent(x),
                std::cmp::Ordering::Less => b = self.parent(y),
                std::cmp::Ordering::Equal => {
                    a = self.parent(x);
                    b = self.parent(y);
                }
            }
        }
        None
    }

    /// Follows initial children down to a leaf. Leaves map to themselves.
    pub fn default_configuration(&self, s: StateId) -> StateId {
        let mut cur = s;
        while self.kind(cur) == StateKind::Composite {
            cur = self.initial_child(Some(cur));
        }
        cur
    }

    /// The leaf active when the machine starts.
    pub fn initial_leaf(&self) -> StateId {
        self.default_configuration(self.initial_child(None))
    }

    /// Ancestor-or-self of `s` that is a direct member of `region`.
    pub fn member_containing(&self, region: Option<StateId>, s: StateId) -> StateId {
        self.ancestors(s)
            .find(|&a| self.parent(a) == region)
            .expect("region contains state")
    }

    /// Exit/entry boundaries of a transition. When source and target are
    /// nested in one another (including self-transitions) the outer one is
    /// exited and re-entered.
    pub fn scope(&self, t: &TransitionDef) -> TransitionScope {
        let s = self.index[t.source.as_str()];
        let d = self.index[t.target.state_name()];
        let mut region = self.least_common_ancestor(s, d);
        if region == Some(s) || region == Some(d) {
            region = region.and_then(|r| self.parent(r));
        }
        TransitionScope {
            region,
            exit_boundary: self.member_containing(region, s),
            entry_boundary: self.member_containing(region, d),
        }
    }

    /// Leaves from which `t` can fire: the source itself when simple; every
    /// leaf below a composite source for triggered transitions; only the
    /// composite's final state for completion transitions.
    pub fn source_leaves(&self, t: &TransitionDef) -> Vec<StateId> {
        let s = self.index[t.source.as_str()];
        match self.kind(s) {
            StateKind::Composite if t.trigger.is_none() => self.final_child(Some(s)).into_iter().collect(),
            StateKind::Composite => self.leaves(s),
            _ => vec![s],
        }
    }

    /// History memories rewritten when leaving `leaf` through `exit_boundary`:
    /// each history composite crossed records its direct child on the path,
    /// or `None` when that child is its final state.
    pub fn history_updates(&self, leaf: StateId, exit_boundary: StateId) -> Vec<(StateId, Option<StateId>)> {
        let mut out = Vec::new();
        if leaf == exit_boundary {
            return out;
        }
        let mut child = leaf;
        for a in self.ancestors(leaf).skip(1) {
            if self.state(a).history {
                let remembered = (self.kind(child) != StateKind::Final).then_some(child);
                out.push((a, remembered));
            }
            if a == exit_boundary {
                break;
            }
            child = a;
        }
        out
    }

    pub fn target_state(&self, t: &TransitionDef) -> StateId {
        self.index[t.target.state_name()]
    }

    pub fn is_history_target(t: &TransitionDef) -> bool {
        matches!(t.target, Target::History(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smd::{Behaviour, StateNode};

    /// root ⊃ A ⊃ {B, C ⊃ {D}}, with exit/entry behaviours on the path to D.
    fn three_level() -> Machine {
        let m = StateMachine::new("Syn")
            .state(StateNode::composite("A").initial().with_entry(Behaviour::new("a")))
            .state(StateNode::simple("B").under("A"))
            .state(
                StateNode::composite("C")
                    .under("A")
                    .initial()
                    .with_entry(Behaviour::new("c"))
                    .with_exit(Behaviour::new("e2")),
            )
            .state(StateNode::simple("D").under("C").initial().with_exit(Behaviour::new("e1")));
        Machine::new(m).unwrap()
    }

    fn labels(bs: Vec<&Behaviour>) -> Vec<&str> {
        bs.into_iter().map(|b| b.label.as_str()).collect()
    }

    #[test]
    fn substates_of_three_level_machine() {
        let m = three_level();
        let names: Vec<_> = m
            .substates(m.id("A").unwrap())
            .into_iter()
            .map(|s| m.state_name(s))
            .collect();
        assert_eq!(names, ["B", "D"]);
        assert_eq!(m.substates(m.id("D").unwrap()), vec![m.id("D").unwrap()]);
    }

    #[test]
    fn exit_and_entry_chains() {
        let m = three_level();
        let (a, c, d) = (m.id("A").unwrap(), m.id("C").unwrap(), m.id("D").unwrap());
        assert_eq!(labels(m.exit_chain(d, a).unwrap()), ["e1", "e2"]);
        assert_eq!(labels(m.exit_chain(d, c).unwrap()), ["e1", "e2"]);
        assert_eq!(labels(m.entry_chain(a, d).unwrap()), ["a", "c"]);
        let b = m.id("B").unwrap();
        assert!(matches!(m.exit_chain(d, b), Err(QueryError::NotAncestor { .. })));
    }

    #[test]
    fn lca_and_default_descent() {
        let m = three_level();
        let (a, b, d) = (m.id("A").unwrap(), m.id("B").unwrap(), m.id("D").unwrap());
        assert_eq!(m.least_common_ancestor(b, d), Some(a));
        assert_eq!(m.least_common_ancestor(d, d), Some(d));
        assert_eq!(m.default_configuration(a), d);
        assert_eq!(m.initial_leaf(), d);
    }

    #[test]
    fn self_transition_scope_exits_the_state_itself() {
        let m = three_level();
        let t = TransitionDef::new("t", "D", "D").on("x");
        let scope = m.scope(&t);
        assert_eq!(scope.exit_boundary, m.id("D").unwrap());
        assert_eq!(scope.region, Some(m.id("C").unwrap()));
        let t = TransitionDef::new("t", "D", "A").on("x");
        let scope = m.scope(&t);
        assert_eq!(scope.region, None);
        assert_eq!(scope.exit_boundary, m.id("A").unwrap());
    }
}
