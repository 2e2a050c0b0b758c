//! Monotone circuits and their translation into two-exit instances.
//!
//! Every gate becomes one component with entry `o` and exits `top` and
//! `bot`. An `and`/`or` gate has boxes `l` and `r` calling the components of
//! its left and right inputs and evaluates them lazily, left first.
//! Constants route `o` straight to the matching exit.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{Instance, RawComponent, RawInstance, RawTransition, TransitionBits};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    True,
    False,
    /// Inputs are earlier gate indices, 0-based.
    And(usize, usize),
    Or(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneCircuit {
    pub gates: Vec<Gate>,
    pub names: Vec<String>,
    pub output: usize,
}

impl MonotoneCircuit {
    /// Build from gates named `g1, g2, ...`; checks that inputs precede use.
    pub fn new(gates: Vec<Gate>, output: usize) -> Result<Self> {
        for (i, g) in gates.iter().enumerate() {
            if let Gate::And(a, b) | Gate::Or(a, b) = *g {
                if a >= i || b >= i {
                    return Err(Error::Contract(format!("gate {} uses a later gate", i + 1)));
                }
            }
        }
        if output >= gates.len() {
            return Err(Error::Contract("output gate out of range".into()));
        }
        let names = (1..=gates.len()).map(|i| format!("g{i}")).collect();
        Ok(MonotoneCircuit { gates, names, output })
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, g) in self.gates.iter().enumerate() {
            let n = &self.names;
            let line = match *g {
                Gate::True => format!("{} true", n[i]),
                Gate::False => format!("{} false", n[i]),
                Gate::And(a, b) => format!("{} and {} {}", n[i], n[a], n[b]),
                Gate::Or(a, b) => format!("{} or {} {}", n[i], n[a], n[b]),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str(&format!("out {}\n", self.names[self.output]));
        out
    }
}

/// Parse `<name> true|false|and <a> <b>|or <a> <b>` lines ending with
/// `out <name>`. `#` starts a comment.
pub fn parse_circuit(text: &str) -> Result<MonotoneCircuit> {
    let mut gates = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut output = None;
    let mut last_line = 0;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: lineno, message };
        let fields: Vec<&str> = content.split_whitespace().collect();
        if output.is_some() {
            return Err(err("nothing may follow the `out` line".into()));
        }
        if fields[0] == "out" {
            let [_, name] = fields[..] else {
                return Err(err("usage: out <name>".into()));
            };
            let &g = index.get(name).ok_or_else(|| err(format!("unknown gate {name:?}")))?;
            output = Some(g);
            continue;
        }
        if fields.len() < 2 {
            return Err(err("usage: <name> true|false|and <a> <b>|or <a> <b>".into()));
        }
        let name = fields[0];
        if index.contains_key(name) {
            return Err(err(format!("duplicate gate {name:?}")));
        }
        let input = |s: &str| -> Result<usize> {
            if s == name {
                return Err(err(format!("gate {name:?} refers to itself")));
            }
            index
                .get(s)
                .copied()
                .ok_or_else(|| err(format!("gate {s:?} used before it is defined")))
        };
        let gate = match fields[1..] {
            ["true"] => Gate::True,
            ["false"] => Gate::False,
            ["and", a, b] => Gate::And(input(a)?, input(b)?),
            ["or", a, b] => Gate::Or(input(a)?, input(b)?),
            _ => return Err(err(format!("unknown gate kind in {content:?}"))),
        };
        index.insert(name.to_string(), gates.len());
        names.push(name.to_string());
        gates.push(gate);
    }
    let output = output.ok_or(Error::Parse {
        line: last_line,
        message: "missing `out` line".into(),
    })?;
    Ok(MonotoneCircuit { gates, names, output })
}

/// Value of every gate.
pub fn eval_circuit(circuit: &MonotoneCircuit) -> Vec<bool> {
    let mut v: Vec<bool> = Vec::with_capacity(circuit.len());
    for g in &circuit.gates {
        let b = match *g {
            Gate::True => true,
            Gate::False => false,
            Gate::And(a, b) => v[a] && v[b],
            Gate::Or(a, b) => v[a] || v[b],
        };
        v.push(b);
    }
    v
}

pub const TOP: &str = "top";
pub const BOTTOM: &str = "bot";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateComponentMap {
    /// 0-based component of each gate.
    pub component: Vec<usize>,
    /// Largest vertex count of a generated component.
    pub vertices_per_gate: usize,
}

impl GateComponentMap {
    pub fn gate_of(&self, component: usize) -> Option<usize> {
        self.component.iter().position(|&c| c == component)
    }
}

/// The generated instance, the gate map, and the target: exit `top` of
/// component 1, which is the output gate's component.
pub fn mcvp_to_ra(circuit: &MonotoneCircuit) -> (Instance, GateComponentMap, String) {
    let n = circuit.len();
    let mut order: Vec<usize> = vec![circuit.output];
    order.extend((0..n).filter(|&g| g != circuit.output));
    let mut component = vec![0; n];
    for (c, &g) in order.iter().enumerate() {
        component[g] = c;
    }
    let t = |src: &str, dst: &str| RawTransition::new(src, TransitionBits::Both, dst);
    let mut raw = RawInstance::default();
    for (c, &g) in order.iter().enumerate() {
        let mut rc = RawComponent {
            index: c + 1,
            entries: vec!["o".into()],
            exits: vec![TOP.into(), BOTTOM.into()],
            ..RawComponent::default()
        };
        match circuit.gates[g] {
            Gate::True => rc.transitions.push(t("o", TOP)),
            Gate::False => rc.transitions.push(t("o", BOTTOM)),
            Gate::And(a, b) | Gate::Or(a, b) => {
                rc.boxes.push(("l".into(), component[a] + 1));
                rc.boxes.push(("r".into(), component[b] + 1));
                rc.transitions.push(t("o", "l:o"));
                if matches!(circuit.gates[g], Gate::And(..)) {
                    rc.transitions.push(t("l:bot", BOTTOM));
                    rc.transitions.push(t("l:top", "r:o"));
                } else {
                    rc.transitions.push(t("l:top", TOP));
                    rc.transitions.push(t("l:bot", "r:o"));
                }
                rc.transitions.push(t("r:top", TOP));
                rc.transitions.push(t("r:bot", BOTTOM));
            }
        }
        raw.components.push(rc);
    }
    let inst = Instance::from_raw(&raw).expect("gadgets are valid");
    let vertices_per_gate = inst.components().iter().map(|c| c.vertex_count()).max().unwrap_or(0);
    (
        inst,
        GateComponentMap {
            component,
            vertices_per_gate,
        },
        TOP.to_string(),
    )
}
