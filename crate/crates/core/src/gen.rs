//! Seeded random instances and circuits.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{Instance, RawComponent, RawInstance, RawTransition, TransitionBits};
use crate::reduce::{Gate, MonotoneCircuit};

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub components: RangeInclusive<usize>,
    /// Nodes per component, entry and exits included. At least 2.
    pub nodes: RangeInclusive<usize>,
    pub max_boxes: usize,
    pub max_exits: usize,
    /// Probability that a source gets `s0 = s1`.
    pub parallel: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            components: 1..=4,
            nodes: 2..=6,
            max_boxes: 2,
            max_exits: 2,
            parallel: 0.25,
        }
    }
}

impl GenParams {
    /// At most two components with two or three nodes and one box.
    pub fn tiny() -> Self {
        GenParams {
            components: 1..=2,
            nodes: 2..=3,
            max_boxes: 1,
            max_exits: 2,
            parallel: 0.3,
        }
    }
}

struct Shape {
    internal: usize,
    exits: usize,
    /// `(box name, 0-based callee)`.
    boxes: Vec<(String, usize)>,
}

fn shapes<R: Rng>(rng: &mut R, p: &GenParams) -> Vec<Shape> {
    let k = rng.gen_range(p.components.clone());
    (0..k)
        .map(|_| {
            let n = rng.gen_range(p.nodes.clone()).max(2);
            let exits = rng.gen_range(1..=p.max_exits.max(1).min(n - 1));
            let boxes = (0..rng.gen_range(0..=p.max_boxes))
                .map(|b| (format!("b{b}"), rng.gen_range(0..k)))
                .collect();
            Shape {
                internal: n - 1 - exits,
                exits,
                boxes,
            }
        })
        .collect()
}

fn exit_name(i: usize) -> String {
    format!("x{i}")
}

/// Assemble the instance. `forced[i]` fixes the successor of the entry
/// under bit 0.
fn assemble<R: Rng>(rng: &mut R, p: &GenParams, shapes: &[Shape], forced: &[Option<String>]) -> Instance {
    let mut raw = RawInstance::default();
    for (i, s) in shapes.iter().enumerate() {
        let internal: Vec<String> = (0..s.internal).map(|j| format!("n{j}")).collect();
        let exits: Vec<String> = (0..s.exits).map(exit_name).collect();
        let mut sources = vec!["o".to_string()];
        sources.extend(internal.iter().cloned());
        let mut dests: Vec<String> = internal.iter().chain(&exits).cloned().collect();
        for (b, callee) in &s.boxes {
            dests.push(format!("{b}:o"));
            sources.extend((0..shapes[*callee].exits).map(|x| format!("{b}:{}", exit_name(x))));
        }
        let mut transitions = Vec::new();
        for src in sources {
            let s0 = match (&forced[i], src.as_str()) {
                (Some(f), "o") => f.clone(),
                _ => dests.choose(rng).unwrap().clone(),
            };
            if rng.gen_bool(p.parallel) {
                transitions.push(RawTransition::new(src, TransitionBits::Both, s0));
            } else {
                let s1 = dests.choose(rng).unwrap().clone();
                transitions.push(RawTransition::new(src.clone(), TransitionBits::Zero, s0));
                transitions.push(RawTransition::new(src, TransitionBits::One, s1));
            }
        }
        raw.components.push(RawComponent {
            index: i + 1,
            entries: vec!["o".into()],
            exits,
            nodes: internal,
            boxes: s.boxes.iter().map(|(b, c)| (b.clone(), c + 1)).collect(),
            transitions,
        });
    }
    Instance::from_raw(&raw).expect("generated instances are valid")
}

/// A uniformly wired single-entry instance.
pub fn random_instance<R: Rng>(rng: &mut R, p: &GenParams) -> Instance {
    let shapes = shapes(rng, p);
    let forced = vec![None; shapes.len()];
    assemble(rng, p, &shapes, &forced)
}

/// An instance whose run recurses forever: component 1 starts a chain of
/// fresh calls `1 -> c_2 -> ... -> c_m -> c_j`, each made by the entry's
/// first move, so the call stack grows without bound.
pub fn recursive_instance<R: Rng>(rng: &mut R, p: &GenParams) -> Instance {
    let mut shapes = shapes(rng, p);
    let k = shapes.len();
    let mut rest: Vec<usize> = (1..k).collect();
    rest.shuffle(rng);
    let m = rng.gen_range(1..=k);
    let mut chain = vec![0];
    chain.extend(rest.into_iter().take(m - 1));
    let back = *chain.choose(rng).unwrap();
    let mut forced = vec![None; k];
    for (pos, &c) in chain.iter().enumerate() {
        let next = chain.get(pos + 1).copied().unwrap_or(back);
        shapes[c].boxes.push(("rec".into(), next));
        forced[c] = Some("rec:o".to_string());
    }
    assemble(rng, p, &shapes, &forced)
}

/// A random circuit of `1..=max_gates` gates whose output is the last gate.
pub fn random_circuit<R: Rng>(rng: &mut R, max_gates: usize) -> MonotoneCircuit {
    let n = rng.gen_range(1..=max_gates.max(1));
    let mut gates = Vec::with_capacity(n);
    for i in 0..n {
        let g = if i == 0 || rng.gen_bool(0.3) {
            if rng.gen_bool(0.5) {
                Gate::True
            } else {
                Gate::False
            }
        } else {
            let (a, b) = (rng.gen_range(0..i), rng.gen_range(0..i));
            if rng.gen_bool(0.5) {
                Gate::And(a, b)
            } else {
                Gate::Or(a, b)
            }
        };
        gates.push(g);
    }
    MonotoneCircuit::new(gates, n - 1).expect("inputs precede use")
}
