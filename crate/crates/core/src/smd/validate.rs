use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use super::{final_state_name, Behaviour, StateKind, StateMachine, Target};

/// The model element an issue is attached to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementRef {
    Machine,
    State(String),
    Transition(String),
    Variable(String),
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementRef::Machine => f.write_str("machine"),
            ElementRef::State(s) => write!(f, "state `{s}`"),
            ElementRef::Transition(t) => write!(f, "transition `{t}`"),
            ElementRef::Variable(v) => write!(f, "variable `{v}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IssueKind {
    DuplicateName,
    /// Identifiers may not contain `__`; generated net ids use it as separator.
    ReservedIdentifier(String),
    UnknownParent(String),
    ParentNotComposite(String),
    ParentCycle,
    /// `None` is the root region.
    MissingInitial(Option<String>),
    MultipleInitial(Option<String>),
    MultipleFinal(Option<String>),
    SimpleWithChildren,
    CompositeWithoutChildren,
    FinalWithChildren,
    FinalWithBehaviour,
    FinalMarkedInitial,
    FinalNameMismatch { expected: String },
    HistoryOnNonComposite,
    UnknownSource(String),
    UnknownTarget(String),
    SourceIsFinal,
    HistoryTargetNotComposite(String),
    HistoryTargetWithoutHistory(String),
    CompletionWithoutFinal,
    UndeclaredVariable(String),
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn region(r: &Option<String>) -> String {
            match r {
                Some(s) => format!("composite `{s}`"),
                None => "root region".to_string(),
            }
        }
        match self {
            IssueKind::DuplicateName => f.write_str("name is declared more than once"),
            IssueKind::ReservedIdentifier(id) => {
                write!(f, "identifier `{id}` is reserved (`NONE` or containing `__`)")
            }
            IssueKind::UnknownParent(p) => write!(f, "parent `{p}` does not exist"),
            IssueKind::ParentNotComposite(p) => write!(f, "parent `{p}` is not a composite state"),
            IssueKind::ParentCycle => f.write_str("parent references form a cycle"),
            IssueKind::MissingInitial(r) => write!(f, "{} has no initial state", region(r)),
            IssueKind::MultipleInitial(r) => {
                write!(f, "{} has more than one initial state", region(r))
            }
            IssueKind::MultipleFinal(r) => write!(f, "{} has more than one final state", region(r)),
            IssueKind::SimpleWithChildren => f.write_str("simple state has children"),
            IssueKind::CompositeWithoutChildren => f.write_str("composite state has no children"),
            IssueKind::FinalWithChildren => f.write_str("final state has children"),
            IssueKind::FinalWithBehaviour => f.write_str("final state declares a behaviour"),
            IssueKind::FinalMarkedInitial => f.write_str("final state is marked initial"),
            IssueKind::FinalNameMismatch { expected } => {
                write!(f, "final state must be named `{expected}`")
            }
            IssueKind::HistoryOnNonComposite => f.write_str("history on a non-composite state"),
            IssueKind::UnknownSource(s) => write!(f, "source `{s}` does not exist"),
            IssueKind::UnknownTarget(s) => write!(f, "target `{s}` does not exist"),
            IssueKind::SourceIsFinal => f.write_str("final states cannot have outgoing transitions"),
            IssueKind::HistoryTargetNotComposite(s) => {
                write!(f, "history target `{s}` is not a composite state")
            }
            IssueKind::HistoryTargetWithoutHistory(s) => {
                write!(f, "history target `{s}` does not declare history")
            }
            IssueKind::CompletionWithoutFinal => {
                f.write_str("triggerless transition from a composite without a final state")
            }
            IssueKind::UndeclaredVariable(v) => write!(f, "variable `{v}` is not declared"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Issue {
    pub element: ElementRef,
    pub kind: IssueKind,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.kind)
    }
}

/// Every invariant violation found in a model. Empty means accepted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has(&self, kind: &IssueKind) -> bool {
        self.issues.iter().any(|i| &i.kind == kind)
    }

    fn push(&mut self, element: ElementRef, kind: IssueKind) {
        self.issues.push(Issue { element, kind });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

fn check_identifier(report: &mut ValidationReport, element: &ElementRef, id: &str) {
    if id.contains("__") || id == "NONE" {
        report.push(element.clone(), IssueKind::ReservedIdentifier(id.to_string()));
    }
}

fn check_behaviour(
    report: &mut ValidationReport,
    element: &ElementRef,
    b: &Behaviour,
    declared: &HashSet<&str>,
) {
    check_identifier(report, element, &b.label);
    for (var, value) in &b.assignments {
        if !declared.contains(var.as_str()) {
            report.push(element.clone(), IssueKind::UndeclaredVariable(var.clone()));
        }
        value.for_each_var(&mut |v| {
            if !declared.contains(v) {
                report.push(element.clone(), IssueKind::UndeclaredVariable(v.to_string()));
            }
        });
    }
}

/// Checks every structural invariant of a state machine model.
pub fn validate(model: &StateMachine) -> ValidationReport {
    let mut report = ValidationReport::default();

    let declared: HashSet<&str> = model.variables.iter().map(|v| v.name.as_str()).collect();
    let mut seen_vars = HashSet::new();
    for v in &model.variables {
        let el = ElementRef::Variable(v.name.clone());
        if !seen_vars.insert(v.name.as_str()) {
            report.push(el.clone(), IssueKind::DuplicateName);
        }
        check_identifier(&mut report, &el, &v.name);
    }

    let mut by_name: HashMap<&str, usize> = HashMap::new();
    let mut reported_dup = HashSet::new();
    for (i, s) in model.states.iter().enumerate() {
        if by_name.insert(s.name.as_str(), i).is_some() && reported_dup.insert(s.name.as_str()) {
            report.push(ElementRef::State(s.name.clone()), IssueKind::DuplicateName);
        }
    }

    // Region membership: children per parent (None = root).
    let mut children: HashMap<Option<&str>, Vec<usize>> = HashMap::new();
    for (i, s) in model.states.iter().enumerate() {
        let el = ElementRef::State(s.name.clone());
        if s.kind != StateKind::Final {
            check_identifier(&mut report, &el, &s.name);
        }
        if let Some(p) = &s.parent {
            match by_name.get(p.as_str()) {
                None => report.push(el.clone(), IssueKind::UnknownParent(p.clone())),
                Some(&pi) if model.states[pi].kind != StateKind::Composite => {
                    report.push(el.clone(), IssueKind::ParentNotComposite(p.clone()))
                }
                _ => {}
            }
        }
        children.entry(s.parent.as_deref()).or_default().push(i);
    }

    // Cycle detection along parent links.
    for s in &model.states {
        let mut seen = HashSet::new();
        let mut cur = Some(s.name.as_str());
        while let Some(name) = cur {
            if !seen.insert(name) {
                report.push(ElementRef::State(s.name.clone()), IssueKind::ParentCycle);
                break;
            }
            cur = by_name
                .get(name)
                .and_then(|&i| model.states[i].parent.as_deref());
        }
    }

    for s in &model.states {
        let el = ElementRef::State(s.name.clone());
        let has_children = children
            .get(&Some(s.name.as_str()))
            .is_some_and(|c| !c.is_empty());
        match s.kind {
            StateKind::Simple if has_children => report.push(el.clone(), IssueKind::SimpleWithChildren),
            StateKind::Composite if !has_children => {
                report.push(el.clone(), IssueKind::CompositeWithoutChildren)
            }
            StateKind::Final => {
                if has_children {
                    report.push(el.clone(), IssueKind::FinalWithChildren);
                }
                if s.behaviours().next().is_some() {
                    report.push(el.clone(), IssueKind::FinalWithBehaviour);
                }
                if s.initial {
                    report.push(el.clone(), IssueKind::FinalMarkedInitial);
                }
                let expected = final_state_name(s.parent.as_deref());
                if s.name != expected {
                    report.push(el.clone(), IssueKind::FinalNameMismatch { expected });
                }
            }
            _ => {}
        }
        if s.history && s.kind != StateKind::Composite {
            report.push(el.clone(), IssueKind::HistoryOnNonComposite);
        }
        for b in s.behaviours() {
            check_behaviour(&mut report, &el, b, &declared);
        }
    }

    // Initial / final multiplicity per region, in a stable order.
    let mut regions: Vec<Option<&str>> = vec![None];
    regions.extend(
        model
            .states
            .iter()
            .filter(|s| s.kind == StateKind::Composite)
            .map(|s| Some(s.name.as_str())),
    );
    let mut region_seen = HashSet::new();
    for region in regions {
        if !region_seen.insert(region) {
            continue;
        }
        let members = children.get(&region).map(Vec::as_slice).unwrap_or(&[]);
        if region.is_some() && members.is_empty() {
            continue; // already reported as CompositeWithoutChildren
        }
        let owner = region.map(str::to_string);
        let el = match region {
            Some(r) => ElementRef::State(r.to_string()),
            None => ElementRef::Machine,
        };
        let initials = members.iter().filter(|&&i| model.states[i].initial).count();
        if initials == 0 {
            report.push(el.clone(), IssueKind::MissingInitial(owner.clone()));
        } else if initials > 1 {
            report.push(el.clone(), IssueKind::MultipleInitial(owner.clone()));
        }
        let finals = members
            .iter()
            .filter(|&&i| model.states[i].kind == StateKind::Final)
            .count();
        if finals > 1 {
            report.push(el, IssueKind::MultipleFinal(owner));
        }
    }

    let mut seen_trans = HashSet::new();
    for t in &model.transitions {
        let el = ElementRef::Transition(t.id.clone());
        if !seen_trans.insert(t.id.as_str()) {
            report.push(el.clone(), IssueKind::DuplicateName);
        }
        check_identifier(&mut report, &el, &t.id);
        if let Some(e) = &t.trigger {
            check_identifier(&mut report, &el, e);
        }
        let source = by_name.get(t.source.as_str()).map(|&i| &model.states[i]);
        match source {
            None => report.push(el.clone(), IssueKind::UnknownSource(t.source.clone())),
            Some(s) if s.kind == StateKind::Final => report.push(el.clone(), IssueKind::SourceIsFinal),
            Some(s) if s.kind == StateKind::Composite && t.trigger.is_none() => {
                let has_final = children
                    .get(&Some(s.name.as_str()))
                    .is_some_and(|c| c.iter().any(|&i| model.states[i].kind == StateKind::Final));
                if !has_final {
                    report.push(el.clone(), IssueKind::CompletionWithoutFinal);
                }
            }
            _ => {}
        }
        let target_name = t.target.state_name();
        match (by_name.get(target_name).map(|&i| &model.states[i]), &t.target) {
            (None, _) => report.push(el.clone(), IssueKind::UnknownTarget(target_name.to_string())),
            (Some(d), Target::History(_)) if d.kind != StateKind::Composite => report.push(
                el.clone(),
                IssueKind::HistoryTargetNotComposite(target_name.to_string()),
            ),
            (Some(d), Target::History(_)) if !d.history => report.push(
                el.clone(),
                IssueKind::HistoryTargetWithoutHistory(target_name.to_string()),
            ),
            _ => {}
        }
        if let Some(g) = &t.guard {
            let mut undeclared = BTreeSet::new();
            g.for_each_var(&mut |v| {
                if !declared.contains(v) {
                    undeclared.insert(v.to_string());
                }
            });
            for v in undeclared {
                report.push(el.clone(), IssueKind::UndeclaredVariable(v));
            }
        }
        if let Some(b) = &t.effect {
            check_behaviour(&mut report, &el, b, &declared);
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smd::{BoolExpr, Behaviour, CmpOp, IntExpr, StateNode, TransitionDef};

    fn cd_player_like() -> StateMachine {
        StateMachine::new("M")
            .variable("track", 0)
            .state(StateNode::composite("Busy").initial().with_history())
            .state(StateNode::simple("Playing").under("Busy").initial())
            .state(StateNode::simple("Paused").under("Busy"))
            .state(StateNode::final_of(Some("Busy")))
            .state(StateNode::composite("NonPlaying"))
            .state(StateNode::simple("Closed").under("NonPlaying").initial())
            .transition(TransitionDef::new("t1", "Playing", "Paused").on("pause"))
            .transition(TransitionDef::new("t2", "Busy", "Closed"))
            .transition(TransitionDef::new("t3", "Closed", "Busy").to_history().on("play"))
    }

    #[test]
    fn well_formed_model_is_accepted() {
        let report = validate(&cd_player_like());
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn duplicate_state_names_are_reported_once_by_name() {
        let m = StateMachine::new("M")
            .state(StateNode::simple("A").initial())
            .state(StateNode::simple("A"));
        let r = validate(&m);
        assert_eq!(r.issues.len(), 1);
        assert_eq!(r.issues[0].element, ElementRef::State("A".into()));
        assert_eq!(r.issues[0].kind, IssueKind::DuplicateName);
    }

    #[test]
    fn composite_without_initial_child() {
        let m = StateMachine::new("M")
            .state(StateNode::composite("C").initial())
            .state(StateNode::simple("X").under("C"));
        let r = validate(&m);
        assert!(r.has(&IssueKind::MissingInitial(Some("C".into()))), "{r}");
    }

    #[test]
    fn parent_cycle_is_detected() {
        let m = StateMachine::new("M")
            .state(StateNode::simple("R").initial())
            .state(StateNode::composite("A").under("B").initial())
            .state(StateNode::composite("B").under("A").initial());
        let r = validate(&m);
        assert!(r.has(&IssueKind::ParentCycle), "{r}");
    }

    #[test]
    fn transitions_out_of_final_states_are_rejected() {
        let m = cd_player_like().transition(TransitionDef::new("bad", "Busy.final", "Paused"));
        assert!(validate(&m).has(&IssueKind::SourceIsFinal));
    }

    #[test]
    fn history_target_must_declare_history() {
        let m = cd_player_like().transition(
            TransitionDef::new("bad", "Playing", "NonPlaying")
                .to_history()
                .on("x"),
        );
        assert!(validate(&m).has(&IssueKind::HistoryTargetWithoutHistory("NonPlaying".into())));
    }

    #[test]
    fn undeclared_variables_in_guards_and_behaviours() {
        let m = cd_player_like().transition(
            TransitionDef::new("t9", "Playing", "Paused")
                .when(BoolExpr::Cmp(CmpOp::Gt, IntExpr::var("nope"), IntExpr::Lit(0)))
                .with_effect(Behaviour::new("e").assign("other", IntExpr::Lit(1))),
        );
        let r = validate(&m);
        assert!(r.has(&IssueKind::UndeclaredVariable("nope".into())));
        assert!(r.has(&IssueKind::UndeclaredVariable("other".into())));
    }

    #[test]
    fn completion_needs_a_final_child() {
        let m = cd_player_like().transition(TransitionDef::new("t9", "NonPlaying", "Busy"));
        assert!(validate(&m).has(&IssueKind::CompletionWithoutFinal));
    }

    #[test]
    fn final_states_have_canonical_names() {
        let mut m = cd_player_like();
        for s in &mut m.states {
            if s.name == "Busy.final" {
                s.name = "Done".into();
            }
        }
        assert!(validate(&m).has(&IssueKind::FinalNameMismatch {
            expected: "Busy.final".into()
        }));
    }

    #[test]
    fn reserved_double_underscore() {
        let m = StateMachine::new("M").state(StateNode::simple("a__b").initial());
        assert!(validate(&m).has(&IssueKind::ReservedIdentifier("a__b".into())));
    }
}
