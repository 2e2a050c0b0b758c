use std::collections::{BTreeMap, HashSet};

use super::{Instance, RawComponent, RawInstance, RawTransition, TransitionBits, Vertex};

/// Maps each `(old component, entry name)` pair to the single-entry copy
/// that replaced it. Component indices are 0-based.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EntryMap {
    pub map: BTreeMap<(usize, String), usize>,
}

impl EntryMap {
    pub fn get(&self, component: usize, entry: &str) -> Option<usize> {
        self.map.get(&(component, entry.to_string())).copied()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(pos, ((old, _), new))| *old == pos && *new == pos)
    }
}

/// Replace every multi-entry component by one copy per entry. Boxes calling
/// a multi-entry component are split into one box per callee entry, named
/// `box@entry`, each calling the matching copy; the return ports of the
/// split boxes inherit the original return-port transitions.
///
/// Copies are numbered component by component, entries in declaration
/// order, so the first entry of component 1 stays the main component.
pub fn normalize_single_entry(inst: &Instance) -> (Instance, EntryMap) {
    let mut map = EntryMap::default();
    let mut next = 0;
    for (i, c) in inst.components().iter().enumerate() {
        for &e in c.entries() {
            map.map.insert((i, c.nodes()[e].clone()), next);
            next += 1;
        }
    }
    if inst.is_single_entry() {
        return (inst.clone(), map);
    }

    let mut raw = RawInstance::default();
    for (i, c) in inst.components().iter().enumerate() {
        for &entry in c.entries() {
            let mut taken: HashSet<String> = c.nodes().iter().cloned().collect();
            taken.extend(c.boxes().iter().map(|b| b.name.clone()));

            // For each original box: list of (new box name, callee entry node, new callee index).
            let mut split: Vec<Vec<(String, usize, usize)>> = Vec::new();
            let mut boxes = Vec::new();
            for b in c.boxes() {
                let callee = inst.component(b.callee);
                let mut parts = Vec::new();
                if callee.entries().len() == 1 {
                    let e = callee.entries()[0];
                    let target = map.get(b.callee, &callee.nodes()[e]).unwrap();
                    parts.push((b.name.clone(), e, target));
                } else {
                    for &e in callee.entries() {
                        let mut name = format!("{}@{}", b.name, callee.nodes()[e]);
                        while taken.contains(&name) {
                            name.push('\'');
                        }
                        taken.insert(name.clone());
                        let target = map.get(b.callee, &callee.nodes()[e]).unwrap();
                        parts.push((name, e, target));
                    }
                }
                for (name, _, target) in &parts {
                    boxes.push((name.clone(), target + 1));
                }
                split.push(parts);
            }

            let port_name = |v: Vertex| -> Vec<String> {
                match v {
                    Vertex::Node(n) => vec![c.nodes()[n].clone()],
                    Vertex::Call { bx, entry } => {
                        let callee = inst.component(c.boxes()[bx].callee);
                        split[bx]
                            .iter()
                            .filter(|p| p.1 == entry)
                            .map(|p| format!("{}:{}", p.0, callee.nodes()[entry]))
                            .collect()
                    }
                    Vertex::Return { bx, exit } => {
                        let callee = inst.component(c.boxes()[bx].callee);
                        split[bx].iter().map(|p| format!("{}:{}", p.0, callee.nodes()[exit])).collect()
                    }
                }
            };

            let mut transitions = Vec::new();
            for &v in c.sources() {
                if let Vertex::Node(n) = c.vertex(v) {
                    if c.entries().contains(&n) && n != entry {
                        continue;
                    }
                }
                let [s0, s1] = [c.successor(v, 0).unwrap(), c.successor(v, 1).unwrap()];
                let d0 = port_name(c.vertex(s0)).remove(0);
                let d1 = port_name(c.vertex(s1)).remove(0);
                for src in port_name(c.vertex(v)) {
                    if d0 == d1 {
                        transitions.push(RawTransition::new(src, TransitionBits::Both, d0.clone()));
                    } else {
                        transitions.push(RawTransition::new(src.clone(), TransitionBits::Zero, d0.clone()));
                        transitions.push(RawTransition::new(src, TransitionBits::One, d1.clone()));
                    }
                }
            }

            let nodes = (0..c.nodes().len())
                .filter(|n| !c.entries().contains(n) && !c.exits().contains(n))
                .map(|n| c.nodes()[n].clone())
                .collect();
            raw.components.push(RawComponent {
                index: map.get(i, &c.nodes()[entry]).unwrap() + 1,
                entries: vec![c.nodes()[entry].clone()],
                exits: c.exits().iter().map(|&x| c.nodes()[x].clone()).collect(),
                nodes,
                boxes,
                transitions,
            });
        }
    }
    let out = Instance::from_raw(&raw).expect("normalization preserves validity");
    (out, map)
}
