use std::collections::HashMap;
use std::fmt::Write;

use crate::smd::{Behaviour, StateKind, StateMachine, StateNode, Target, TransitionDef};

fn behaviour(out: &mut String, b: &Behaviour) {
    out.push_str(&b.label);
    if !b.assignments.is_empty() {
        out.push_str(" { ");
        for (i, (var, value)) in b.assignments.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{var} := {value}");
        }
        out.push_str(" }");
    }
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn state<'a>(
    out: &mut String,
    node: &'a StateNode,
    children: &HashMap<Option<&'a str>, Vec<&'a StateNode>>,
    level: usize,
) {
    indent(out, level);
    if node.kind == StateKind::Final {
        out.push_str("final;\n");
        return;
    }
    let _ = write!(out, "state {}", node.name);
    if node.initial {
        out.push_str(" initial");
    }
    if node.history {
        out.push_str(" history");
    }
    for (kw, b) in [("entry", &node.entry), ("exit", &node.exit), ("do", &node.do_activity)] {
        if let Some(b) = b {
            let _ = write!(out, " {kw} ");
            behaviour(out, b);
        }
    }
    if node.kind == StateKind::Composite {
        out.push_str(" {\n");
        for child in children.get(&Some(node.name.as_str())).into_iter().flatten() {
            state(out, child, children, level + 1);
        }
        indent(out, level);
        out.push('}');
    }
    out.push_str(";\n");
}

fn target(t: &TransitionDef) -> String {
    match &t.target {
        Target::History(c) => format!("{c}.H"),
        Target::State(s) => s.clone(),
    }
}

/// Canonical SMDL text: variables, then states in hierarchy pre-order,
/// then transitions; two-space indentation.
pub fn print(model: &StateMachine) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "machine {} {{", model.name);

    for v in &model.variables {
        let _ = writeln!(out, "  var {} : int = {};", v.name, v.initial);
    }
    if !model.variables.is_empty() && !model.states.is_empty() {
        out.push('\n');
    }

    let mut children: HashMap<Option<&str>, Vec<&StateNode>> = HashMap::new();
    for s in &model.states {
        children.entry(s.parent.as_deref()).or_default().push(s);
    }
    for root in children.get(&None).cloned().unwrap_or_default() {
        state(&mut out, root, &children, 1);
    }

    if !model.transitions.is_empty() && (!model.states.is_empty() || !model.variables.is_empty()) {
        out.push('\n');
    }
    for t in &model.transitions {
        let _ = write!(out, "  trans {} : {} -> {}", t.id, t.source, target(t));
        if let Some(e) = &t.trigger {
            let _ = write!(out, " on {e}");
        }
        if let Some(g) = &t.guard {
            let _ = write!(out, " if ({g})");
        }
        if let Some(b) = &t.effect {
            out.push_str(" / ");
            behaviour(&mut out, b);
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}
