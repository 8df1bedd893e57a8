//! Non-concurrent UML state machine models.
//!
//! [`StateMachine`] is the raw, possibly ill-formed model as produced by the
//! SMDL parser or by hand. [`validate`] lists every broken invariant, and
//! [`Machine`] is the validated form that answers structural queries
//! (substates, exit/entry chains, least common ancestor, default descent).

mod expr;
mod machine;
mod validate;

pub use expr::{BoolExpr, CmpOp, IntExpr, Valuation};
pub use machine::{Machine, QueryError, StateId, TransitionScope};
pub use validate::{validate, ElementRef, Issue, IssueKind, ValidationReport};

use std::collections::BTreeSet;

/// Name of the final state directly under the root region.
pub const ROOT_FINAL: &str = "final";

/// Canonical name of the final state owned by `parent` (`None` = root region).
pub fn final_state_name(parent: Option<&str>) -> String {
    match parent {
        Some(p) => format!("{p}.final"),
        None => ROOT_FINAL.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateKind {
    Simple,
    Composite,
    Final,
}

/// A named behaviour with its ordered variable assignments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Behaviour {
    pub label: String,
    pub assignments: Vec<(String, IntExpr)>,
}

impl Behaviour {
    pub fn new(label: impl Into<String>) -> Self {
        Behaviour {
            label: label.into(),
            assignments: Vec::new(),
        }
    }

    pub fn assign(mut self, var: impl Into<String>, value: IntExpr) -> Self {
        self.assignments.push((var.into(), value));
        self
    }

    /// Applies the assignments in order; later ones see earlier results.
    pub fn apply(&self, env: &mut Valuation) {
        for (var, value) in &self.assignments {
            let v = value.eval(env);
            env.insert(var.clone(), v);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateNode {
    pub name: String,
    pub parent: Option<String>,
    pub kind: StateKind,
    pub initial: bool,
    pub history: bool,
    pub entry: Option<Behaviour>,
    pub exit: Option<Behaviour>,
    pub do_activity: Option<Behaviour>,
}

impl StateNode {
    pub fn new(name: impl Into<String>, kind: StateKind) -> Self {
        StateNode {
            name: name.into(),
            parent: None,
            kind,
            initial: false,
            history: false,
            entry: None,
            exit: None,
            do_activity: None,
        }
    }

    pub fn simple(name: impl Into<String>) -> Self {
        Self::new(name, StateKind::Simple)
    }

    pub fn composite(name: impl Into<String>) -> Self {
        Self::new(name, StateKind::Composite)
    }

    /// Final state of `parent`, named canonically.
    pub fn final_of(parent: Option<&str>) -> Self {
        let mut node = Self::new(final_state_name(parent), StateKind::Final);
        node.parent = parent.map(str::to_string);
        node
    }

    pub fn under(mut self, parent: impl Into<String>) -> Self {
        self.parent = Some(parent.into());
        self
    }

    pub fn initial(mut self) -> Self {
        self.initial = true;
        self
    }

    pub fn with_history(mut self) -> Self {
        self.history = true;
        self
    }

    pub fn with_entry(mut self, b: Behaviour) -> Self {
        self.entry = Some(b);
        self
    }

    pub fn with_exit(mut self, b: Behaviour) -> Self {
        self.exit = Some(b);
        self
    }

    pub fn with_do(mut self, b: Behaviour) -> Self {
        self.do_activity = Some(b);
        self
    }

    pub fn behaviours(&self) -> impl Iterator<Item = &Behaviour> {
        self.entry
            .iter()
            .chain(self.exit.iter())
            .chain(self.do_activity.iter())
    }
}

/// Transition target: a state, or the shallow-history pseudostate of a composite.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Target {
    State(String),
    History(String),
}

impl Target {
    pub fn state_name(&self) -> &str {
        match self {
            Target::State(s) | Target::History(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionDef {
    pub id: String,
    pub source: String,
    pub target: Target,
    pub trigger: Option<String>,
    pub guard: Option<BoolExpr>,
    pub effect: Option<Behaviour>,
}

impl TransitionDef {
    pub fn new(id: impl Into<String>, source: impl Into<String>, target: impl Into<String>) -> Self {
        TransitionDef {
            id: id.into(),
            source: source.into(),
            target: Target::State(target.into()),
            trigger: None,
            guard: None,
            effect: None,
        }
    }

    pub fn to_history(mut self) -> Self {
        self.target = Target::History(self.target.state_name().to_string());
        self
    }

    pub fn on(mut self, event: impl Into<String>) -> Self {
        self.trigger = Some(event.into());
        self
    }

    pub fn when(mut self, guard: BoolExpr) -> Self {
        self.guard = Some(guard);
        self
    }

    pub fn with_effect(mut self, b: Behaviour) -> Self {
        self.effect = Some(b);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: String,
    pub initial: i64,
}

/// The raw state machine: a forest of states under one implicit root region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMachine {
    pub name: String,
    pub states: Vec<StateNode>,
    pub transitions: Vec<TransitionDef>,
    pub variables: Vec<VariableDecl>,
}

impl StateMachine {
    pub fn new(name: impl Into<String>) -> Self {
        StateMachine {
            name: name.into(),
            states: Vec::new(),
            transitions: Vec::new(),
            variables: Vec::new(),
        }
    }

    pub fn state(mut self, node: StateNode) -> Self {
        self.states.push(node);
        self
    }

    pub fn transition(mut self, t: TransitionDef) -> Self {
        self.transitions.push(t);
        self
    }

    pub fn variable(mut self, name: impl Into<String>, initial: i64) -> Self {
        self.variables.push(VariableDecl {
            name: name.into(),
            initial,
        });
        self
    }

    pub fn find_state(&self, name: &str) -> Option<&StateNode> {
        self.states.iter().find(|s| s.name == name)
    }

    /// Trigger events, sorted.
    pub fn events(&self) -> BTreeSet<String> {
        self.transitions
            .iter()
            .filter_map(|t| t.trigger.clone())
            .collect()
    }

    /// States in hierarchy pre-order; siblings keep their relative insertion
    /// order. Orphans and cyclic nodes are appended at the end so nothing is lost.
    pub fn states_preorder(&self) -> Vec<&StateNode> {
        let mut out = Vec::with_capacity(self.states.len());
        let mut placed = vec![false; self.states.len()];
        let mut stack: Vec<usize> = self
            .states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.parent.is_none())
            .map(|(i, _)| i)
            .rev()
            .collect();
        while let Some(i) = stack.pop() {
            if placed[i] {
                continue;
            }
            placed[i] = true;
            out.push(&self.states[i]);
            let name = &self.states[i].name;
            let children: Vec<usize> = self
                .states
                .iter()
                .enumerate()
                .filter(|(j, s)| !placed[*j] && s.parent.as_deref() == Some(name))
                .map(|(j, _)| j)
                .collect();
            stack.extend(children.into_iter().rev());
        }
        for (i, s) in self.states.iter().enumerate() {
            if !placed[i] {
                out.push(s);
            }
        }
        out
    }

    /// Copy with states reordered into hierarchy pre-order.
    pub fn canonical(&self) -> StateMachine {
        StateMachine {
            name: self.name.clone(),
            states: self.states_preorder().into_iter().cloned().collect(),
            transitions: self.transitions.clone(),
            variables: self.variables.clone(),
        }
    }
}
