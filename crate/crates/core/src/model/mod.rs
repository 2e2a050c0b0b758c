//! Recursive Arrival instances.
//!
//! An [`Instance`] is an ordered tuple of [`Component`]s. Each component owns
//! its nodes and boxes, and every box induces call ports (one per callee
//! entry) and return ports (one per callee exit). Component indices are
//! 0-based in the API; the text and JSON formats use 1-based indices, and
//! component 0 (printed as `1`) is always the main component.
//!
//! Instances are only obtained through [`Instance::from_raw`], which runs the
//! full structural validation, so every `Instance` value is well-formed.

mod normalize;
mod text;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

pub use normalize::{normalize_single_entry, EntryMap};
pub use text::{parse_instance, parse_raw, RawComponent, RawInstance, RawTransition, TransitionBits};

pub type VertexId = usize;
pub type EdgeId = usize;

/// A vertex of a single component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    /// Index into the component's node list.
    Node(usize),
    /// Call port `(b, e)`; `entry` indexes the callee's node list.
    Call { bx: usize, entry: usize },
    /// Return port `(b, d)`; `exit` indexes the callee's node list.
    Return { bx: usize, exit: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxDef {
    pub name: String,
    /// 0-based callee component.
    pub callee: usize,
}

/// One coordinate of a component flow vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Edge {
    /// Underlying edge of the transition relation. `labels[σ]` is set when
    /// `s^σ(from) = to`; both are set for a parallel pair.
    Step {
        from: VertexId,
        to: VertexId,
        labels: [bool; 2],
    },
    /// Potential box crossing from a call port to a return port of the same box.
    Cross {
        bx: usize,
        call: VertexId,
        ret: VertexId,
    },
}

impl Edge {
    pub fn tail(&self) -> VertexId {
        match *self {
            Edge::Step { from, .. } => from,
            Edge::Cross { call, .. } => call,
        }
    }

    pub fn head(&self) -> VertexId {
        match *self {
            Edge::Step { to, .. } => to,
            Edge::Cross { ret, .. } => ret,
        }
    }

    pub fn is_cross(&self) -> bool {
        matches!(self, Edge::Cross { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    nodes: Vec<String>,
    boxes: Vec<BoxDef>,
    entries: Vec<usize>,
    exits: Vec<usize>,
    vertices: Vec<Vertex>,
    names: Vec<String>,
    lookup: HashMap<Vertex, VertexId>,
    succ: Vec<Option<[VertexId; 2]>>,
    source_slot: Vec<Option<usize>>,
    sources: Vec<VertexId>,
    edges: Vec<Edge>,
    out_edges: Vec<Option<[EdgeId; 2]>>,
    in_edges: Vec<Vec<EdgeId>>,
    all_out: Vec<Vec<EdgeId>>,
    /// `crossings[b][entry position][exit position]`, positions taken in the
    /// callee's entry/exit order.
    crossings: Vec<Vec<Vec<EdgeId>>>,
}

impl Component {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn boxes(&self) -> &[BoxDef] {
        &self.boxes
    }

    /// Entry nodes, as node indices.
    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// Exit nodes, as node indices.
    pub fn exits(&self) -> &[usize] {
        &self.exits
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, id: VertexId) -> Vertex {
        self.vertices[id]
    }

    pub fn vertex_id(&self, v: Vertex) -> Option<VertexId> {
        self.lookup.get(&v).copied()
    }

    pub fn vertex_name(&self, id: VertexId) -> &str {
        &self.names[id]
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn node_vertex(&self, node: usize) -> VertexId {
        self.lookup[&Vertex::Node(node)]
    }

    /// The entry vertex of a single-entry component.
    pub fn entry_vertex(&self) -> VertexId {
        self.node_vertex(self.entries[0])
    }

    pub fn entry_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.entries.iter().map(|&n| self.node_vertex(n))
    }

    pub fn exit_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.exits.iter().map(|&n| self.node_vertex(n))
    }

    pub fn is_exit(&self, v: VertexId) -> bool {
        matches!(self.vertices[v], Vertex::Node(n) if self.exits.contains(&n))
    }

    pub fn is_entry(&self, v: VertexId) -> bool {
        matches!(self.vertices[v], Vertex::Node(n) if self.entries.contains(&n))
    }

    pub fn is_call(&self, v: VertexId) -> bool {
        matches!(self.vertices[v], Vertex::Call { .. })
    }

    pub fn is_source(&self, v: VertexId) -> bool {
        self.succ[v].is_some()
    }

    /// `s^bit(v)` for a source vertex.
    pub fn successor(&self, v: VertexId, bit: usize) -> Option<VertexId> {
        self.succ[v].map(|s| s[bit])
    }

    /// The source vertices `Sor_i` in vertex order; switch positions are
    /// indexed by position in this list.
    pub fn sources(&self) -> &[VertexId] {
        &self.sources
    }

    pub fn source_slot(&self, v: VertexId) -> Option<usize> {
        self.source_slot[v]
    }

    /// Canonical edge index `E_i` then `F_i`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edge ids of `(v, s^0(v))` and `(v, s^1(v))`; equal for a parallel pair.
    pub fn out_edges(&self, v: VertexId) -> Option<[EdgeId; 2]> {
        self.out_edges[v]
    }

    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.in_edges[v]
    }

    pub fn outgoing(&self, v: VertexId) -> &[EdgeId] {
        &self.all_out[v]
    }

    /// Crossing edges of box `bx`, all entry/exit combinations.
    pub fn box_crossings(&self, bx: usize) -> impl Iterator<Item = EdgeId> + '_ {
        self.crossings[bx].iter().flatten().copied()
    }

    pub fn crossing(&self, bx: usize, entry_pos: usize, exit_pos: usize) -> EdgeId {
        self.crossings[bx][entry_pos][exit_pos]
    }

    pub fn step_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| !e.is_cross()).count()
    }

    /// Canonical key for an edge, `u->v`.
    pub fn edge_key(&self, e: EdgeId) -> String {
        let edge = self.edges[e];
        format!("{}->{}", self.names[edge.tail()], self.names[edge.head()])
    }

    pub fn edge_by_key(&self, key: &str) -> Option<EdgeId> {
        (0..self.edges.len()).find(|&e| self.edge_key(e) == key)
    }

    /// Dead-ends: sources whose two successors are both the source itself,
    /// together with all exits.
    pub fn dead_ends(&self) -> BTreeSet<VertexId> {
        let mut out: BTreeSet<VertexId> = self.exit_vertices().collect();
        for &v in &self.sources {
            if self.succ[v] == Some([v, v]) {
                out.insert(v);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    components: Vec<Component>,
}

impl Instance {
    /// Validate and index a raw instance.
    pub fn from_raw(raw: &RawInstance) -> std::result::Result<Instance, ValidationReport> {
        let (inst, report) = build(raw);
        match inst {
            Some(inst) if report.is_ok() => Ok(inst),
            _ => Err(report),
        }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Component {
        &self.components[i]
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn is_single_entry(&self) -> bool {
        self.components.iter().all(|c| c.entries.len() == 1)
    }

    pub fn require_single_entry(&self) -> Result<()> {
        match self.components.iter().position(|c| c.entries.len() != 1) {
            None => Ok(()),
            Some(i) => Err(Error::MultiEntry {
                component: i + 1,
                entries: self.components[i].entries.len(),
            }),
        }
    }

    pub fn total_vertices(&self) -> usize {
        self.components.iter().map(|c| c.vertex_count()).sum()
    }

    pub fn total_edges(&self) -> usize {
        self.components.iter().map(|c| c.edge_count()).sum()
    }

    pub fn call_graph(&self) -> CallGraph {
        let mut edges = BTreeSet::new();
        for (i, c) in self.components.iter().enumerate() {
            for b in &c.boxes {
                edges.insert((i, b.callee));
            }
        }
        CallGraph {
            size: self.components.len(),
            edges,
        }
    }

    /// Exit of component 1 by name.
    pub fn main_exit(&self, name: &str) -> Result<VertexId> {
        let main = &self.components[0];
        main.exit_vertices()
            .find(|&v| main.vertex_name(v) == name)
            .ok_or_else(|| Error::NotAnExit(name.to_string()))
    }

    /// The same instance with component `main` moved to the front. Box
    /// labels are renumbered accordingly.
    pub fn rerooted(&self, main: usize) -> Instance {
        let mut raw = self.to_raw();
        let k = raw.components.len();
        let renumber = |c: usize| -> usize {
            if c == main {
                0
            } else if c < main {
                c + 1
            } else {
                c
            }
        };
        for comp in &mut raw.components {
            comp.index = renumber(comp.index - 1) + 1;
            for b in &mut comp.boxes {
                b.1 = renumber(b.1 - 1) + 1;
            }
        }
        raw.components.sort_by_key(|c| c.index);
        debug_assert_eq!(raw.components.len(), k);
        Instance::from_raw(&raw).expect("rerooting preserves validity")
    }

    /// Raw form, used for serialization and rebuilding.
    pub fn to_raw(&self) -> RawInstance {
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let entries = c.entries.iter().map(|&n| c.nodes[n].clone()).collect();
                let exits = c.exits.iter().map(|&n| c.nodes[n].clone()).collect();
                let nodes = (0..c.nodes.len())
                    .filter(|n| !c.entries.contains(n) && !c.exits.contains(n))
                    .map(|n| c.nodes[n].clone())
                    .collect();
                let boxes = c.boxes.iter().map(|b| (b.name.clone(), b.callee + 1)).collect();
                let mut transitions = Vec::new();
                for &v in &c.sources {
                    let [s0, s1] = c.succ[v].expect("source");
                    let src = c.names[v].clone();
                    if s0 == s1 {
                        transitions.push(RawTransition::new(src, TransitionBits::Both, c.names[s0].clone()));
                    } else {
                        transitions.push(RawTransition::new(src.clone(), TransitionBits::Zero, c.names[s0].clone()));
                        transitions.push(RawTransition::new(src, TransitionBits::One, c.names[s1].clone()));
                    }
                }
                RawComponent {
                    index: i + 1,
                    entries,
                    exits,
                    nodes,
                    boxes,
                    transitions,
                }
            })
            .collect();
        RawInstance { components }
    }

    pub fn to_text(&self) -> String {
        self.to_raw().to_text()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CallGraph {
    pub size: usize,
    /// 0-based `(caller, callee)` pairs; self-loops allowed.
    pub edges: BTreeSet<(usize, usize)>,
}

/// A structural problem found by [`validate`]. Components are reported
/// 1-based, as written in the source text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MissingMainComponent,
    DuplicateComponent { component: usize },
    ComponentGap { component: usize },
    NoEntry { component: usize },
    DuplicateName { component: usize, name: String },
    EntryIsExit { component: usize, node: String },
    DanglingBoxLabel { component: usize, r#box: String, label: usize },
    UnknownBox { component: usize, vertex: String },
    UnknownPort { component: usize, vertex: String },
    BadSource { component: usize, vertex: String },
    BadDestination { component: usize, vertex: String },
    TransitionFromExit { component: usize, vertex: String },
    TransitionIntoEntry { component: usize, vertex: String },
    ConflictingTransition { component: usize, vertex: String, bit: u8 },
    PartialSuccessorMap { component: usize, vertex: String, bit: u8 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            MissingMainComponent => write!(f, "component 1 is missing"),
            DuplicateComponent { component } => write!(f, "component {component} declared twice"),
            ComponentGap { component } => write!(f, "component {component} is missing (indices must be contiguous)"),
            NoEntry { component } => write!(f, "component {component}: no entry node"),
            DuplicateName { component, name } => write!(f, "component {component}: name {name} declared twice"),
            EntryIsExit { component, node } => write!(f, "component {component}: {node} is both entry and exit"),
            DanglingBoxLabel { component, r#box, label } => {
                write!(f, "component {component}: dangling box label, box {box} calls component {label}", r#box = r#box)
            }
            UnknownBox { component, vertex } => write!(f, "component {component}: {vertex} refers to an unknown box"),
            UnknownPort { component, vertex } => write!(f, "component {component}: {vertex} is not a port of its box"),
            BadSource { component, vertex } => write!(f, "component {component}: {vertex} cannot be a transition source"),
            BadDestination { component, vertex } => {
                write!(f, "component {component}: {vertex} cannot be a transition destination")
            }
            TransitionFromExit { component, vertex } => write!(f, "component {component}: exit {vertex} has an outgoing transition"),
            TransitionIntoEntry { component, vertex } => write!(f, "component {component}: entry {vertex} has an incoming transition"),
            ConflictingTransition { component, vertex, bit } => {
                write!(f, "component {component}: s{bit}({vertex}) defined twice with different targets")
            }
            PartialSuccessorMap { component, vertex, bit } => {
                write!(f, "component {component}: partial successor map, s{bit}({vertex}) undefined")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Check every structural invariant of a raw instance. Violations are
/// reported exhaustively and never abort the check.
pub fn validate(raw: &RawInstance) -> ValidationReport {
    build(raw).1
}

enum Resolved {
    Node(usize),
    Call { bx: usize, entry: usize },
    Return { bx: usize, exit: usize },
}

fn build(raw: &RawInstance) -> (Option<Instance>, ValidationReport) {
    let mut violations = Vec::new();

    let mut by_index: BTreeMap<usize, &RawComponent> = BTreeMap::new();
    for c in &raw.components {
        if by_index.insert(c.index, c).is_some() {
            violations.push(Violation::DuplicateComponent { component: c.index });
        }
    }
    let k = by_index.keys().next_back().copied().unwrap_or(0);
    if !by_index.contains_key(&1) {
        violations.push(Violation::MissingMainComponent);
    }
    for i in 2..=k {
        if !by_index.contains_key(&i) {
            violations.push(Violation::ComponentGap { component: i });
        }
    }
    if !violations.is_empty() {
        return (None, ValidationReport { violations });
    }
    let ordered: Vec<&RawComponent> = by_index.values().copied().collect();

    // Pass 1: node tables (entries, exits, declared and inferred nodes).
    struct Nodes {
        names: Vec<String>,
        entries: Vec<usize>,
        exits: Vec<usize>,
    }
    let mut node_tables = Vec::with_capacity(k);
    for (ci, rc) in ordered.iter().enumerate() {
        let comp = ci + 1;
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut entries = Vec::new();
        let mut exits = Vec::new();
        for e in &rc.entries {
            if index.contains_key(e.as_str()) {
                violations.push(Violation::DuplicateName { component: comp, name: e.clone() });
                continue;
            }
            index.insert(e, names.len());
            entries.push(names.len());
            names.push(e.clone());
        }
        for x in &rc.exits {
            match index.get(x.as_str()) {
                Some(&n) if entries.contains(&n) => {
                    violations.push(Violation::EntryIsExit { component: comp, node: x.clone() });
                }
                Some(_) => violations.push(Violation::DuplicateName { component: comp, name: x.clone() }),
                None => {
                    index.insert(x, names.len());
                    exits.push(names.len());
                    names.push(x.clone());
                }
            }
        }
        for n in &rc.nodes {
            if index.contains_key(n.as_str()) {
                violations.push(Violation::DuplicateName { component: comp, name: n.clone() });
                continue;
            }
            index.insert(n, names.len());
            names.push(n.clone());
        }
        for t in &rc.transitions {
            for name in [&t.src, &t.dst] {
                if !name.contains(':') && !index.contains_key(name.as_str()) {
                    index.insert(name, names.len());
                    names.push(name.clone());
                }
            }
        }
        if entries.is_empty() {
            violations.push(Violation::NoEntry { component: comp });
        }
        node_tables.push(Nodes { names, entries, exits });
    }

    // Pass 2: boxes, ports, transitions.
    let mut components = Vec::with_capacity(k);
    for (ci, rc) in ordered.iter().enumerate() {
        let comp = ci + 1;
        let table = &node_tables[ci];
        let mut boxes: Vec<BoxDef> = Vec::new();
        let mut box_ok = Vec::new();
        for (name, label) in &rc.boxes {
            if boxes.iter().any(|b| &b.name == name) || table.names.contains(name) {
                violations.push(Violation::DuplicateName { component: comp, name: name.clone() });
                continue;
            }
            let ok = *label >= 1 && *label <= k;
            if !ok {
                violations.push(Violation::DanglingBoxLabel {
                    component: comp,
                    r#box: name.clone(),
                    label: *label,
                });
            }
            box_ok.push(ok);
            boxes.push(BoxDef {
                name: name.clone(),
                callee: label.saturating_sub(1),
            });
        }

        let mut vertices: Vec<Vertex> = (0..table.names.len()).map(Vertex::Node).collect();
        let mut vnames: Vec<String> = table.names.clone();
        for (bi, b) in boxes.iter().enumerate() {
            if !box_ok[bi] {
                continue;
            }
            let callee = &node_tables[b.callee];
            for &e in &callee.entries {
                vertices.push(Vertex::Call { bx: bi, entry: e });
                vnames.push(format!("{}:{}", b.name, callee.names[e]));
            }
            for &x in &callee.exits {
                vertices.push(Vertex::Return { bx: bi, exit: x });
                vnames.push(format!("{}:{}", b.name, callee.names[x]));
            }
        }
        let lookup: HashMap<Vertex, VertexId> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();

        let resolve = |name: &str| -> std::result::Result<Resolved, Violation> {
            if let Some((bname, port)) = name.split_once(':') {
                let Some(bi) = boxes.iter().position(|b| b.name == bname) else {
                    return Err(Violation::UnknownBox { component: comp, vertex: name.to_string() });
                };
                if !box_ok[bi] {
                    return Err(Violation::UnknownBox { component: comp, vertex: name.to_string() });
                }
                let callee = &node_tables[boxes[bi].callee];
                match callee.names.iter().position(|n| n == port) {
                    Some(n) if callee.entries.contains(&n) => Ok(Resolved::Call { bx: bi, entry: n }),
                    Some(n) if callee.exits.contains(&n) => Ok(Resolved::Return { bx: bi, exit: n }),
                    _ => Err(Violation::UnknownPort { component: comp, vertex: name.to_string() }),
                }
            } else {
                let n = table.names.iter().position(|x| x == name).expect("inferred in pass 1");
                Ok(Resolved::Node(n))
            }
        };

        let mut succ: Vec<[Option<VertexId>; 2]> = vec![[None, None]; vertices.len()];
        let mut reported: BTreeSet<(String, u8)> = BTreeSet::new();
        for t in &rc.transitions {
            let src = match resolve(&t.src) {
                Ok(Resolved::Node(n)) if table.exits.contains(&n) => {
                    violations.push(Violation::TransitionFromExit { component: comp, vertex: t.src.clone() });
                    None
                }
                Ok(Resolved::Node(n)) => Some(lookup[&Vertex::Node(n)]),
                Ok(Resolved::Return { bx, exit }) => Some(lookup[&Vertex::Return { bx, exit }]),
                Ok(Resolved::Call { .. }) => {
                    violations.push(Violation::BadSource { component: comp, vertex: t.src.clone() });
                    None
                }
                Err(v) => {
                    violations.push(v);
                    None
                }
            };
            let dst = match resolve(&t.dst) {
                Ok(Resolved::Node(n)) if table.entries.contains(&n) => {
                    violations.push(Violation::TransitionIntoEntry { component: comp, vertex: t.dst.clone() });
                    None
                }
                Ok(Resolved::Node(n)) => Some(lookup[&Vertex::Node(n)]),
                Ok(Resolved::Call { bx, entry }) => Some(lookup[&Vertex::Call { bx, entry }]),
                Ok(Resolved::Return { .. }) => {
                    violations.push(Violation::BadDestination { component: comp, vertex: t.dst.clone() });
                    None
                }
                Err(v) => {
                    violations.push(v);
                    None
                }
            };
            let (Some(s), Some(d)) = (src, dst) else { continue };
            for bit in t.bits.bits() {
                match succ[s][bit] {
                    Some(prev) if prev != d => {
                        if reported.insert((t.src.clone(), bit as u8)) {
                            violations.push(Violation::ConflictingTransition {
                                component: comp,
                                vertex: t.src.clone(),
                                bit: bit as u8,
                            });
                        }
                    }
                    _ => succ[s][bit] = Some(d),
                }
            }
        }

        // Totality on Sor_i.
        let mut sources = Vec::new();
        let mut full_succ = vec![None; vertices.len()];
        for (vid, v) in vertices.iter().enumerate() {
            let is_source = match *v {
                Vertex::Node(n) => !table.exits.contains(&n),
                Vertex::Return { .. } => true,
                Vertex::Call { .. } => false,
            };
            if !is_source {
                continue;
            }
            sources.push(vid);
            match succ[vid] {
                [Some(a), Some(b)] => full_succ[vid] = Some([a, b]),
                pair => {
                    for (bit, s) in pair.iter().enumerate() {
                        if s.is_none() {
                            violations.push(Violation::PartialSuccessorMap {
                                component: comp,
                                vertex: vnames[vid].clone(),
                                bit: bit as u8,
                            });
                        }
                    }
                }
            }
        }

        components.push(Component {
            nodes: table.names.clone(),
            boxes,
            entries: table.entries.clone(),
            exits: table.exits.clone(),
            vertices,
            names: vnames,
            lookup,
            succ: full_succ,
            source_slot: Vec::new(),
            sources,
            edges: Vec::new(),
            out_edges: Vec::new(),
            in_edges: Vec::new(),
            all_out: Vec::new(),
            crossings: Vec::new(),
        });
    }

    let report = ValidationReport { violations };
    if !report.is_ok() {
        return (None, report);
    }
    let ports: Vec<CalleePorts> = node_tables
        .iter()
        .map(|t| CalleePorts {
            names: t.names.clone(),
            entries: t.entries.clone(),
            exits: t.exits.clone(),
        })
        .collect();
    for c in &mut components {
        index_edges(c, &ports);
    }
    (Some(Instance { components }), report)
}

struct CalleePorts {
    names: Vec<String>,
    entries: Vec<usize>,
    exits: Vec<usize>,
}

/// Build the canonical edge index: step edges sorted by (source name, lowest
/// label), then crossings sorted by (box name, entry name, exit name).
fn index_edges(c: &mut Component, callees: &[CalleePorts]) {
    let n = c.vertices.len();
    c.source_slot = vec![None; n];
    for (slot, &v) in c.sources.iter().enumerate() {
        c.source_slot[v] = Some(slot);
    }

    let mut steps: Vec<(String, usize, Edge)> = Vec::new();
    for &v in &c.sources {
        let [s0, s1] = c.succ[v].expect("total after validation");
        if s0 == s1 {
            steps.push((c.names[v].clone(), 0, Edge::Step { from: v, to: s0, labels: [true, true] }));
        } else {
            steps.push((c.names[v].clone(), 0, Edge::Step { from: v, to: s0, labels: [true, false] }));
            steps.push((c.names[v].clone(), 1, Edge::Step { from: v, to: s1, labels: [false, true] }));
        }
    }
    steps.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));

    let mut crosses: Vec<((String, String, String), Edge)> = Vec::new();
    for (bi, b) in c.boxes.iter().enumerate() {
        let names = &callees[b.callee].names;
        for v in 0..n {
            let Vertex::Call { bx, entry } = c.vertices[v] else { continue };
            if bx != bi {
                continue;
            }
            for w in 0..n {
                let Vertex::Return { bx: bx2, exit } = c.vertices[w] else { continue };
                if bx2 != bi {
                    continue;
                }
                crosses.push((
                    (b.name.clone(), names[entry].clone(), names[exit].clone()),
                    Edge::Cross { bx: bi, call: v, ret: w },
                ));
            }
        }
    }
    crosses.sort_by(|a, b| a.0.cmp(&b.0));

    c.edges = steps.into_iter().map(|s| s.2).chain(crosses.into_iter().map(|x| x.1)).collect();
    c.out_edges = vec![None; n];
    c.in_edges = vec![Vec::new(); n];
    c.all_out = vec![Vec::new(); n];
    c.crossings = c
        .boxes
        .iter()
        .map(|b| vec![vec![usize::MAX; callees[b.callee].exits.len()]; callees[b.callee].entries.len()])
        .collect();
    for (eid, e) in c.edges.iter().enumerate() {
        c.in_edges[e.head()].push(eid);
        c.all_out[e.tail()].push(eid);
        match *e {
            Edge::Step { from, labels, .. } => {
                let slot = c.out_edges[from].get_or_insert([eid, eid]);
                if labels[0] {
                    slot[0] = eid;
                }
                if labels[1] {
                    slot[1] = eid;
                }
            }
            Edge::Cross { bx, call, ret } => {
                let Vertex::Call { entry, .. } = c.vertices[call] else { unreachable!() };
                let Vertex::Return { exit, .. } = c.vertices[ret] else { unreachable!() };
                let callee = &callees[c.boxes[bx].callee];
                let ep = callee.entries.iter().position(|&n| n == entry).expect("call port of callee entry");
                let xp = callee.exits.iter().position(|&n| n == exit).expect("return port of callee exit");
                c.crossings[bx][ep][xp] = eid;
            }
        }
    }
}
