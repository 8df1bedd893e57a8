use std::fmt::Write as _;

use super::ml::Printer;
use crate::cpn::{ColouredNet, Marking, Orientation};

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz rendering. With a marking, each place label gains its token
/// count and multiset.
pub fn emit_dot(net: &ColouredNet, marking: Option<&Marking>) -> String {
    let net = net.canonical();
    let printer = Printer::new(&net);
    let mut out = String::from("digraph net {\n  rankdir=LR;\n");
    for (i, p) in net.places.iter().enumerate() {
        let mut label = p.name.clone();
        if let Some(m) = marking.and_then(|m| m.0.get(i)) {
            if !m.is_empty() {
                let _ = write!(label, "\n{} token(s): {}", m.len(), printer.multiset(m, Some(&p.colour)));
            }
        }
        let _ = writeln!(out, "  {} [shape=ellipse, label={}];", quote(&p.id), quote(&label));
    }
    for t in &net.transitions {
        let mut label = t.name.clone();
        if let Some(g) = &t.guard {
            let _ = write!(label, "\n[{}]", printer.expr(g, None));
        }
        let _ = writeln!(out, "  {} [shape=box, label={}];", quote(&t.id), quote(&label));
    }
    for a in &net.arcs {
        let colour = net.place(&a.place).map(|p| p.colour.as_str());
        let (from, to) = match a.orientation {
            Orientation::PtoT => (&a.place, &a.transition),
            Orientation::TtoP => (&a.transition, &a.place),
        };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(from),
            quote(to),
            quote(&printer.expr(&a.inscription, colour))
        );
    }
    out.push_str("}\n");
    out
}
