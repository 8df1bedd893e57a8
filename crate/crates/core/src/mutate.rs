//! Deliberate corruptions of a generated net, used to show that the
//! equivalence check notices translation defects.

use std::fmt;

use crate::cpn::{ColouredNet, Expr, Orientation};
use crate::smd::Machine;
use crate::translate::{Occurrence, Segment, TranslationMap, NONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MutationKind {
    DeleteArc,
    FlipGuard,
    SwapEntryExit,
    WrongHistoryRestore,
    DropEffect,
}

impl MutationKind {
    pub const ALL: [MutationKind; 5] = [
        MutationKind::DeleteArc,
        MutationKind::FlipGuard,
        MutationKind::SwapEntryExit,
        MutationKind::WrongHistoryRestore,
        MutationKind::DropEffect,
    ];
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MutationKind::DeleteArc => "deleted arc",
            MutationKind::FlipGuard => "flipped guard",
            MutationKind::SwapEntryExit => "swapped exit/entry order",
            MutationKind::WrongHistoryRestore => "wrong history restore",
            MutationKind::DropEffect => "dropped effect",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mutant {
    pub kind: MutationKind,
    pub description: String,
    pub net: ColouredNet,
}

/// Every mutant of `kind` the net admits, in a deterministic order.
pub fn mutants(machine: &Machine, net: &ColouredNet, map: &TranslationMap, kind: MutationKind) -> Vec<Mutant> {
    let mutant = |description: String, net: ColouredNet| Mutant {
        kind,
        description,
        net,
    };
    match kind {
        MutationKind::DeleteArc => net
            .arcs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mut n = net.clone();
                n.arcs.remove(i);
                mutant(format!("delete arc {} ({} / {})", a.id, a.place, a.transition), n)
            })
            .collect(),
        MutationKind::FlipGuard => net
            .transitions
            .iter()
            .enumerate()
            .filter_map(|(i, t)| {
                let g = t.guard.clone()?;
                let mut n = net.clone();
                n.transitions[i].guard = Some(Expr::Not(Box::new(g)));
                Some(mutant(format!("negate guard of {}", t.id), n))
            })
            .collect(),
        MutationKind::SwapEntryExit => swap_entry_exit(machine, net, map)
            .into_iter()
            .map(|(d, n)| mutant(d, n))
            .collect(),
        MutationKind::WrongHistoryRestore => wrong_restores(net, map)
            .into_iter()
            .map(|(d, n)| mutant(d, n))
            .collect(),
        MutationKind::DropEffect => map
            .behaviour_trans
            .iter()
            .filter_map(|(occ, id)| match occ {
                Occurrence::Chain {
                    transition,
                    segment: Segment::Shared,
                    index: 0,
                } if machine.transition(transition)?.effect.is_some() => {
                    let mut n = net.clone();
                    let t = n.transitions.iter_mut().find(|t| &t.id == id)?;
                    t.observable = None;
                    Some(mutant(format!("drop effect of {transition} ({id})"), n))
                }
                _ => None,
            })
            .collect(),
    }
}

/// Exchanges two behaviour transitions: the last exit before a transition's
/// effect/entries and the first entry after it.
fn swap_entry_exit(machine: &Machine, net: &ColouredNet, map: &TranslationMap) -> Vec<(String, ColouredNet)> {
    let mut out = Vec::new();
    for (occ, exit_id) in &map.behaviour_trans {
        let Occurrence::Chain {
            transition,
            segment: Segment::Exit { leaf },
            index,
        } = occ
        else {
            continue;
        };
        let is_last = !map.behaviour_trans.contains_key(&Occurrence::Chain {
            transition: transition.clone(),
            segment: Segment::Exit { leaf: leaf.clone() },
            index: index + 1,
        });
        if !is_last {
            continue;
        }
        let Some(def) = machine.transition(transition) else {
            continue;
        };
        let first_entry = Occurrence::Chain {
            transition: transition.clone(),
            segment: Segment::Shared,
            index: usize::from(def.effect.is_some()),
        };
        let Some(entry_id) = map.behaviour_trans.get(&first_entry) else {
            continue;
        };
        let mut n = net.clone();
        swap_behaviour(&mut n, map, exit_id, entry_id);
        out.push((format!("swap {exit_id} with {entry_id}"), n));
    }
    out
}

/// Swaps label, name and variable access of two behaviour transitions,
/// leaving the control chain in place.
fn swap_behaviour(net: &mut ColouredNet, map: &TranslationMap, a: &str, b: &str) {
    let ia = net.transitions.iter().position(|t| t.id == a).expect("known transition");
    let ib = net.transitions.iter().position(|t| t.id == b).expect("known transition");
    let (la, na) = (net.transitions[ia].observable.clone(), net.transitions[ia].name.clone());
    net.transitions[ia].observable = net.transitions[ib].observable.clone();
    net.transitions[ia].name = net.transitions[ib].name.clone();
    net.transitions[ib].observable = la;
    net.transitions[ib].name = na;
    if let Some(vars) = &map.vars_place {
        for arc in net.arcs.iter_mut().filter(|x| &x.place == vars) {
            if arc.transition == a {
                arc.transition = b.to_string();
            } else if arc.transition == b {
                arc.transition = a.to_string();
            }
        }
    }
}

/// Exchanges where `restore_<child>` and `restore_NONE` send control,
/// for children whose entry path differs from the default one.
fn wrong_restores(net: &ColouredNet, map: &TranslationMap) -> Vec<(String, ColouredNet)> {
    let mut out = Vec::new();
    let control_outputs = |t: &str| -> Vec<String> {
        net.arcs
            .iter()
            .filter(|a| a.transition == t && a.orientation == Orientation::TtoP)
            .filter(|a| !map.history_place.values().any(|h| h == &a.place))
            .map(|a| a.place.clone())
            .collect()
    };
    for nodes in map.transition_subnet.values() {
        let restores: Vec<&String> = nodes.iter().filter(|id| id.contains("__restore_")).collect();
        let Some(default) = restores.iter().find(|id| id.ends_with(&format!("__restore_{NONE}"))) else {
            continue;
        };
        let default_out = control_outputs(default);
        for r in restores.iter().filter(|r| *r != default) {
            if control_outputs(r) == default_out {
                continue;
            }
            let mut n = net.clone();
            for arc in n.arcs.iter_mut() {
                let is_control = arc.orientation == Orientation::TtoP
                    && !map.history_place.values().any(|h| h == &arc.place);
                if !is_control {
                    continue;
                }
                if &arc.transition == *r {
                    arc.transition = default.to_string();
                } else if &arc.transition == *default {
                    arc.transition = r.to_string();
                }
            }
            out.push((format!("swap targets of {r} and {default}"), n));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smdl;
    use crate::translate::{translate, TranslationConfig};

    #[test]
    fn cd_player_admits_every_kind() {
        let m = smdl::load(include_str!("../../../corpus/cdplayer.smdl")).unwrap();
        let (net, map) = translate(&m, &TranslationConfig::default()).unwrap();
        for kind in MutationKind::ALL {
            let ms = mutants(&m, &net, &map, kind);
            assert!(!ms.is_empty(), "{kind}");
            assert!(ms.iter().all(|x| x.net != net), "{kind}");
        }
        assert_eq!(mutants(&m, &net, &map, MutationKind::DeleteArc).len(), net.arcs.len());
    }
}
