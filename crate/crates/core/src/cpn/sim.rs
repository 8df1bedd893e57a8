use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::{Binding, ColouredNet, Expr, Marking, NetError, Orientation, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FireError {
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("binding is not enabled for `{0}`")]
    NotEnabled(String),
}

struct CompiledTransition<'n> {
    inputs: Vec<(usize, &'n Expr)>,
    outputs: Vec<(usize, &'n Expr)>,
    guard: Option<&'n Expr>,
}

/// Token-game engine over a checked net.
pub struct Simulator<'n> {
    net: &'n ColouredNet,
    transitions: Vec<CompiledTransition<'n>>,
    transition_index: HashMap<&'n str, usize>,
}

impl<'n> Simulator<'n> {
    pub fn new(net: &'n ColouredNet) -> Result<Self, NetError> {
        net.check()?;
        let place_index: HashMap<&str, usize> = net
            .places
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.as_str(), i))
            .collect();
        let transition_index: HashMap<&str, usize> = net
            .transitions
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.as_str(), i))
            .collect();
        let mut transitions: Vec<CompiledTransition> = net
            .transitions
            .iter()
            .map(|t| CompiledTransition {
                inputs: Vec::new(),
                outputs: Vec::new(),
                guard: t.guard.as_ref(),
            })
            .collect();
        for a in &net.arcs {
            let t = &mut transitions[transition_index[a.transition.as_str()]];
            let p = place_index[a.place.as_str()];
            match a.orientation {
                Orientation::PtoT => t.inputs.push((p, &a.inscription)),
                Orientation::TtoP => t.outputs.push((p, &a.inscription)),
            }
        }
        // Patterns first so that computed input inscriptions see their variables bound.
        for t in &mut transitions {
            t.inputs.sort_by_key(|(_, e)| !e.is_pattern());
        }
        Ok(Simulator {
            net,
            transitions,
            transition_index,
        })
    }

    pub fn net(&self) -> &'n ColouredNet {
        self.net
    }

    fn compiled(&self, id: &str) -> Option<&CompiledTransition<'n>> {
        self.transition_index.get(id).map(|&i| &self.transitions[i])
    }

    /// All bindings under which `transition` may occur, ascending.
    pub fn enabled_bindings(&self, marking: &Marking, transition: &str) -> Vec<Binding> {
        let Some(t) = self.compiled(transition) else {
            return Vec::new();
        };
        let mut out = BTreeSet::new();
        let mut consumed: HashMap<(usize, Value), usize> = HashMap::new();
        self.bind_inputs(t, 0, marking, &mut Binding::new(), &mut consumed, &mut out);
        out.into_iter().collect()
    }

    fn bind_inputs(
        &self,
        t: &CompiledTransition<'n>,
        i: usize,
        marking: &Marking,
        binding: &mut Binding,
        consumed: &mut HashMap<(usize, Value), usize>,
        out: &mut BTreeSet<Binding>,
    ) {
        if i == t.inputs.len() {
            let ok = match t.guard {
                Some(g) => g.eval_bool(binding).unwrap_or(false),
                None => true,
            };
            if ok {
                out.insert(binding.clone());
            }
            return;
        }
        let (place, pattern) = t.inputs[i];
        for (value, count) in marking.place(place).iter() {
            let key = (place, value.clone());
            let used = consumed.get(&key).copied().unwrap_or(0);
            if used >= count {
                continue;
            }
            let mut extended = binding.clone();
            if !pattern.matches(value, &mut extended) {
                continue;
            }
            *consumed.entry(key.clone()).or_insert(0) += 1;
            self.bind_inputs(t, i + 1, marking, &mut extended, consumed, out);
            *consumed.get_mut(&key).expect("just inserted") -= 1;
        }
    }

    /// Transition ids (declaration order) with at least one enabled binding.
    pub fn enabled_transitions(&self, marking: &Marking) -> Vec<&'n str> {
        self.net
            .transitions
            .iter()
            .map(|t| t.id.as_str())
            .filter(|id| !self.enabled_bindings(marking, id).is_empty())
            .collect()
    }

    /// Fires `transition` under `binding`, which must be enabled.
    pub fn fire(&self, marking: &Marking, transition: &str, binding: &Binding) -> Result<Marking, FireError> {
        if self.compiled(transition).is_none() {
            return Err(FireError::UnknownTransition(transition.to_string()));
        }
        if !self.enabled_bindings(marking, transition).contains(binding) {
            return Err(FireError::NotEnabled(transition.to_string()));
        }
        Ok(self.fire_enabled(marking, transition, binding))
    }

    /// Fires without re-checking enabledness. `binding` must come from
    /// [`Simulator::enabled_bindings`] on the same marking.
    pub fn fire_enabled(&self, marking: &Marking, transition: &str, binding: &Binding) -> Marking {
        let t = self.compiled(transition).expect("known transition");
        let mut next = marking.clone();
        for &(place, e) in &t.inputs {
            let v = e.eval_value(binding).expect("enabled binding binds inputs");
            let removed = next.0[place].remove(&v);
            debug_assert!(removed, "enabled binding has its input tokens");
        }
        for &(place, e) in &t.outputs {
            let v = e.eval_value(binding).expect("checked net binds output variables");
            next.0[place].add(v, 1);
        }
        next
    }

    /// Every (transition, binding) pair enabled in `marking`, sorted by
    /// transition id then binding.
    pub fn successors(&self, marking: &Marking) -> Vec<(&'n str, Binding, Marking)> {
        let mut ids: Vec<&'n str> = self.net.transitions.iter().map(|t| t.id.as_str()).collect();
        ids.sort_by(|a, b| super::natural_cmp(a, b));
        let mut out = Vec::new();
        for id in ids {
            for b in self.enabled_bindings(marking, id) {
                let m = self.fire_enabled(marking, id, &b);
                out.push((id, b, m));
            }
        }
        out
    }
}
