use std::collections::{BTreeMap, VecDeque};

use crate::cpn::{natural_cmp, ColouredNet, Orientation};

/// Horizontal and vertical distance between neighbouring nodes.
pub const SPACING: f64 = 80.0;

/// Canvas coordinates for every place and transition.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layout(pub BTreeMap<String, (f64, f64)>);

impl Layout {
    pub fn get(&self, id: &str) -> Option<(f64, f64)> {
        self.0.get(id).copied()
    }
}

/// Layered placement: breadth-first along the arcs, starting from the
/// marked places. Column = distance from the nearest start node, row =
/// order of discovery within the column. Nodes no start reaches seed new
/// searches (sources first), so every node gets a distinct cell.
pub fn layout(net: &ColouredNet) -> Layout {
    let mut ids: Vec<&str> = net
        .places
        .iter()
        .map(|p| p.id.as_str())
        .chain(net.transitions.iter().map(|t| t.id.as_str()))
        .collect();
    ids.sort_by(|a, b| natural_cmp(a, b));
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();

    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    let mut indegree = vec![0usize; ids.len()];
    for a in &net.arcs {
        let (Some(&p), Some(&t)) = (index.get(a.place.as_str()), index.get(a.transition.as_str())) else {
            continue;
        };
        let (from, to) = match a.orientation {
            Orientation::PtoT => (p, t),
            Orientation::TtoP => (t, p),
        };
        succ[from].push(to);
        indegree[to] += 1;
    }
    for s in &mut succ {
        s.sort_unstable();
        s.dedup();
    }

    let mut layer: Vec<Option<usize>> = vec![None; ids.len()];
    let mut rows: Vec<usize> = Vec::new();
    let mut coords = BTreeMap::new();
    let mut place = |node: usize, l: usize, coords: &mut BTreeMap<String, (f64, f64)>| {
        if rows.len() <= l {
            rows.resize(l + 1, 0);
        }
        let row = rows[l];
        rows[l] += 1;
        coords.insert(ids[node].to_string(), (SPACING * l as f64, -SPACING * row as f64));
    };

    let marked: Vec<usize> = net
        .places
        .iter()
        .filter(|p| !p.initial.is_empty())
        .map(|p| index[p.id.as_str()])
        .collect();
    let mut seeds: Vec<Vec<usize>> = vec![marked];
    let sources = (0..ids.len()).filter(|&i| indegree[i] == 0);
    seeds.extend(sources.map(|i| vec![i]));
    seeds.extend((0..ids.len()).map(|i| vec![i]));

    for seed in seeds {
        let mut queue = VecDeque::new();
        let mut sorted = seed;
        sorted.sort_unstable();
        for s in sorted {
            if layer[s].is_none() {
                layer[s] = Some(0);
                place(s, 0, &mut coords);
                queue.push_back(s);
            }
        }
        while let Some(n) = queue.pop_front() {
            let l = layer[n].expect("queued nodes are placed");
            for &m in &succ[n] {
                if layer[m].is_none() {
                    layer[m] = Some(l + 1);
                    place(m, l + 1, &mut coords);
                    queue.push_back(m);
                }
            }
        }
    }
    Layout(coords)
}
