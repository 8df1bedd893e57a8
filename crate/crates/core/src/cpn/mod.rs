//! Coloured Petri nets: declarations, markings, the token game and
//! bounded reachability.

mod explore;
mod expr;
mod sim;

pub use explore::{explore, Edge, ReachabilityGraph};
pub use expr::{Binding, EvalError, Evaluated, Expr, Value};
pub use sim::{FireError, Simulator};

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Value domain of a place. Product components name other declared colour sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ColourSet {
    Unit,
    Int,
    Enum(Vec<String>),
    Product(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColourDecl {
    pub name: String,
    pub set: ColourSet,
}

/// A typed variable usable in arc inscriptions and guards.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub name: String,
    pub colour: String,
}

/// Finite multiset of colour values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiset(BTreeMap<Value, usize>);

impl Multiset {
    pub fn new() -> Self {
        Multiset(BTreeMap::new())
    }

    pub fn single(v: Value) -> Self {
        let mut m = Multiset::new();
        m.add(v, 1);
        m
    }

    pub fn add(&mut self, v: Value, n: usize) {
        if n > 0 {
            *self.0.entry(v).or_insert(0) += n;
        }
    }

    /// Removes one occurrence; false when absent.
    pub fn remove(&mut self, v: &Value) -> bool {
        match self.0.get_mut(v) {
            Some(n) if *n > 1 => {
                *n -= 1;
                true
            }
            Some(_) => {
                self.0.remove(v);
                true
            }
            None => false,
        }
    }

    pub fn count(&self, v: &Value) -> usize {
        self.0.get(v).copied().unwrap_or(0)
    }

    /// Total number of tokens.
    pub fn len(&self) -> usize {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Distinct values with multiplicities, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (&Value, usize)> {
        self.0.iter().map(|(v, n)| (v, *n))
    }
}

impl FromIterator<Value> for Multiset {
    fn from_iter<I: IntoIterator<Item = Value>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for v in iter {
            m.add(v, 1);
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Place {
    pub id: String,
    pub name: String,
    pub colour: String,
    pub initial: Multiset,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub id: String,
    pub name: String,
    pub guard: Option<Expr>,
    /// Behaviour label made visible to trace projection.
    pub observable: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    PtoT,
    TtoP,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::PtoT => "PtoT",
            Orientation::TtoP => "TtoP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arc {
    pub id: String,
    pub place: String,
    pub transition: String,
    pub orientation: Orientation,
    pub inscription: Expr,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ColouredNet {
    pub colours: Vec<ColourDecl>,
    pub variables: Vec<VarDecl>,
    pub places: Vec<Place>,
    pub transitions: Vec<Transition>,
    pub arcs: Vec<Arc>,
}

/// Marking aligned with [`ColouredNet::places`] order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(pub Vec<Multiset>);

impl Marking {
    pub fn place(&self, index: usize) -> &Multiset {
        &self.0[index]
    }

    pub fn total_tokens(&self) -> usize {
        self.0.iter().map(Multiset::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown colour set `{0}`")]
    UnknownColour(String),
    #[error("colour set `{0}` is empty")]
    EmptyColour(String),
    #[error("arc `{arc}` references unknown {what} `{id}`")]
    DanglingArc { arc: String, what: &'static str, id: String },
    #[error("initial marking of `{0}` does not inhabit its colour set")]
    BadInitialMarking(String),
    #[error("inscription of arc `{0}` does not match the place colour")]
    InscriptionType(String),
    #[error("variable `{var}` of transition `{transition}` is not bound by an input arc")]
    UnboundVariable { transition: String, var: String },
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
}

/// Orders ids with a trailing number numerically (`A_2` before `A_10`).
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn split(s: &str) -> (&str, Option<u64>) {
        let digits = s.len() - s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        if digits == 0 || digits > 18 {
            return (s, None);
        }
        let (head, tail) = s.split_at(s.len() - digits);
        (head, tail.parse().ok())
    }
    let (ha, na) = split(a);
    let (hb, nb) = split(b);
    ha.cmp(hb).then(na.cmp(&nb)).then(a.cmp(b))
}

impl ColouredNet {
    pub fn colour(&self, name: &str) -> Option<&ColourSet> {
        self.colours.iter().find(|c| c.name == name).map(|c| &c.set)
    }

    pub fn place(&self, id: &str) -> Option<&Place> {
        self.places.iter().find(|p| p.id == id)
    }

    pub fn place_index(&self, id: &str) -> Option<usize> {
        self.places.iter().position(|p| p.id == id)
    }

    pub fn transition(&self, id: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.id == id)
    }

    pub fn variable_colour(&self, name: &str) -> Option<&str> {
        self.variables
            .iter()
            .find(|v| v.name == name)
            .map(|v| v.colour.as_str())
    }

    pub fn initial_marking(&self) -> Marking {
        Marking(self.places.iter().map(|p| p.initial.clone()).collect())
    }

    /// Tokens of place `id` in `marking`.
    pub fn tokens<'m>(&self, marking: &'m Marking, id: &str) -> Option<&'m Multiset> {
        self.place_index(id).map(|i| marking.place(i))
    }

    /// Arcs attached to transition `id`, in declaration order.
    pub fn arcs_of<'a>(&'a self, transition: &'a str) -> impl Iterator<Item = &'a Arc> + 'a {
        self.arcs.iter().filter(move |a| a.transition == transition)
    }

    /// Sorts every element list so that equal nets compare equal regardless
    /// of insertion order.
    pub fn canonicalize(&mut self) {
        self.colours.sort_by(|a, b| natural_cmp(&a.name, &b.name));
        self.variables.sort_by(|a, b| natural_cmp(&a.name, &b.name));
        self.transitions.sort_by(|a, b| natural_cmp(&a.id, &b.id));
        self.arcs.sort_by(|a, b| natural_cmp(&a.id, &b.id));
        self.places.sort_by(|a, b| natural_cmp(&a.id, &b.id));
    }

    pub fn canonical(&self) -> ColouredNet {
        let mut n = self.clone();
        n.canonicalize();
        n
    }

    /// Does `v` inhabit colour set `colour`?
    pub fn inhabits(&self, v: &Value, colour: &str) -> bool {
        match (self.colour(colour), v) {
            (Some(ColourSet::Unit), Value::Unit) => true,
            (Some(ColourSet::Int), Value::Int(_)) => true,
            (Some(ColourSet::Enum(values)), Value::Enum(c)) => values.contains(c),
            (Some(ColourSet::Product(parts)), Value::Tuple(vs)) => {
                parts.len() == vs.len() && parts.iter().zip(vs).all(|(p, v)| self.inhabits(v, p))
            }
            _ => false,
        }
    }

    pub fn marking_conforms(&self, marking: &Marking) -> bool {
        marking.0.len() == self.places.len()
            && self
                .places
                .iter()
                .zip(&marking.0)
                .all(|(p, ms)| ms.iter().all(|(v, _)| self.inhabits(v, &p.colour)))
    }

    /// Can `e` produce or match values of `colour`?
    pub fn inscription_conforms(&self, e: &Expr, colour: &str) -> bool {
        let Some(set) = self.colour(colour) else {
            return false;
        };
        match e {
            Expr::Var(v) => self.variable_colour(v) == Some(colour),
            Expr::Unit => *set == ColourSet::Unit,
            Expr::Const(c) => matches!(set, ColourSet::Enum(vs) if vs.contains(c)),
            Expr::Tuple(items) => match set {
                ColourSet::Product(parts) => {
                    parts.len() == items.len()
                        && parts
                            .iter()
                            .zip(items)
                            .all(|(p, e)| self.inscription_conforms(e, p))
                }
                _ => false,
            },
            Expr::Int(_) | Expr::Neg(_) | Expr::Add(..) | Expr::Sub(..) | Expr::Mul(..) => {
                *set == ColourSet::Int && self.is_int_expr(e)
            }
            Expr::Bool(_) | Expr::Cmp(..) | Expr::Not(_) | Expr::And(..) | Expr::Or(..) => false,
        }
    }

    fn is_int_expr(&self, e: &Expr) -> bool {
        match e {
            Expr::Int(_) => true,
            Expr::Var(v) => self
                .variable_colour(v)
                .is_some_and(|c| self.colour(c) == Some(&ColourSet::Int)),
            Expr::Neg(a) => self.is_int_expr(a),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                self.is_int_expr(a) && self.is_int_expr(b)
            }
            _ => false,
        }
    }

    /// Checks declarations, references, inscription types and variable binding.
    pub fn check(&self) -> Result<(), NetError> {
        let mut colour_names = HashSet::new();
        for c in &self.colours {
            if !colour_names.insert(c.name.as_str()) {
                return Err(NetError::DuplicateId(c.name.clone()));
            }
        }
        for c in &self.colours {
            match &c.set {
                ColourSet::Enum(vs) if vs.is_empty() => return Err(NetError::EmptyColour(c.name.clone())),
                ColourSet::Product(ps) if ps.is_empty() => {
                    return Err(NetError::EmptyColour(c.name.clone()))
                }
                ColourSet::Product(ps) => {
                    if let Some(p) = ps.iter().find(|p| !colour_names.contains(p.as_str())) {
                        return Err(NetError::UnknownColour(p.clone()));
                    }
                }
                _ => {}
            }
        }
        for v in &self.variables {
            if !colour_names.contains(v.colour.as_str()) {
                return Err(NetError::UnknownColour(v.colour.clone()));
            }
        }
        let mut ids = HashSet::new();
        for id in self
            .places
            .iter()
            .map(|p| &p.id)
            .chain(self.transitions.iter().map(|t| &t.id))
            .chain(self.arcs.iter().map(|a| &a.id))
        {
            if !ids.insert(id.as_str()) {
                return Err(NetError::DuplicateId(id.clone()));
            }
        }
        let places: HashMap<&str, &Place> = self.places.iter().map(|p| (p.id.as_str(), p)).collect();
        for p in &self.places {
            if !colour_names.contains(p.colour.as_str()) {
                return Err(NetError::UnknownColour(p.colour.clone()));
            }
            if !p.initial.iter().all(|(v, _)| self.inhabits(v, &p.colour)) {
                return Err(NetError::BadInitialMarking(p.id.clone()));
            }
        }
        let trans: HashSet<&str> = self.transitions.iter().map(|t| t.id.as_str()).collect();
        let mut bound: HashMap<&str, HashSet<&str>> = HashMap::new();
        for a in &self.arcs {
            let Some(place) = places.get(a.place.as_str()) else {
                return Err(NetError::DanglingArc {
                    arc: a.id.clone(),
                    what: "place",
                    id: a.place.clone(),
                });
            };
            if !trans.contains(a.transition.as_str()) {
                return Err(NetError::DanglingArc {
                    arc: a.id.clone(),
                    what: "transition",
                    id: a.transition.clone(),
                });
            }
            for v in a.inscription.vars() {
                if self.variable_colour(v).is_none() {
                    return Err(NetError::UndeclaredVariable(v.to_string()));
                }
            }
            if !self.inscription_conforms(&a.inscription, &place.colour) {
                return Err(NetError::InscriptionType(a.id.clone()));
            }
            if a.orientation == Orientation::PtoT && a.inscription.is_pattern() {
                bound
                    .entry(a.transition.as_str())
                    .or_default()
                    .extend(a.inscription.vars());
            }
        }
        let empty = HashSet::new();
        for t in &self.transitions {
            let bound = bound.get(t.id.as_str()).unwrap_or(&empty);
            let guard_vars = t.guard.iter().flat_map(|g| g.vars());
            let arc_vars = self
                .arcs_of(&t.id)
                .filter(|a| a.orientation == Orientation::TtoP || !a.inscription.is_pattern())
                .flat_map(|a| a.inscription.vars());
            for v in guard_vars.chain(arc_vars) {
                if self.variable_colour(v).is_none() {
                    return Err(NetError::UndeclaredVariable(v.to_string()));
                }
                if !bound.contains(v) {
                    return Err(NetError::UnboundVariable {
                        transition: t.id.clone(),
                        var: v.to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, n)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str("++")?;
            }
            write!(f, "{n}`{v}")?;
        }
        Ok(())
    }
}


#[cfg(test)]
mod tests {
    use super::testnets::*;
    use super::*;

    #[test]
    fn natural_order_of_arc_ids() {
        let mut ids = vec!["A_10", "A_2", "A_1", "B", "A_"];
        ids.sort_by(|a, b| natural_cmp(a, b));
        assert_eq!(ids, ["A_", "A_1", "A_2", "A_10", "B"]);
    }

    #[test]
    fn check_accepts_simple_net_and_rejects_dangling_arcs() {
        let n = move_token();
        assert_eq!(n.check(), Ok(()));
        let mut bad = n.clone();
        bad.arcs[0].place = "nowhere".into();
        assert!(matches!(bad.check(), Err(NetError::DanglingArc { .. })));
    }

    #[test]
    fn check_rejects_unbound_output_variables() {
        let mut n = move_token();
        n.colours.push(ColourDecl {
            name: "INT".into(),
            set: ColourSet::Int,
        });
        n.variables.push(VarDecl {
            name: "x".into(),
            colour: "INT".into(),
        });
        n.places.push(place("q", "INT", Multiset::new()));
        n.arcs.push(arc("a3", "q", "t", Orientation::TtoP, Expr::var("x")));
        assert!(matches!(n.check(), Err(NetError::UnboundVariable { .. })));
    }

    #[test]
    fn multiset_arithmetic_and_display() {
        let mut m: Multiset = [Value::Int(2), Value::Int(1), Value::Int(2)].into_iter().collect();
        assert_eq!(m.len(), 3);
        assert_eq!(m.to_string(), "1`1++2`2");
        assert!(m.remove(&Value::Int(2)));
        assert!(!m.remove(&Value::Int(9)));
        assert_eq!(m.count(&Value::Int(2)), 1);
    }
}
