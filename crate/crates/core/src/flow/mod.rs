//! Flow certificates: component switching flows, recursive switching flows,
//! last-used-edge graphs, pending-/completed-call graphs and the run-like
//! classification.
//!
//! Component indices are 0-based in the API and 1-based in every rendered
//! message and document.

mod json;
mod value;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::bounds::OverflowPoly;
use crate::error::{Error, Result};
use crate::model::{Component, EdgeId, Instance, Vertex, VertexId};

pub use json::{flow_from_json, flow_to_json, parse_flow};
pub use value::Flow;

/// Counts elementary verifier operations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Meter {
    pub ops: u64,
}

impl Meter {
    #[inline]
    fn tick(&mut self, n: usize) {
        self.ops += n as u64;
    }
}

/// One failed component condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum ComponentViolation {
    /// Net outflow at the entry is not 1.
    EntryBalance { balance: i64 },
    /// A vertex other than the entry and the current vertex is unbalanced.
    Conservation { vertex: String, balance: i64 },
    /// No vertex, or more than one, has net inflow 1.
    CurrentVertex { candidates: usize },
    SwitchingParity { vertex: String },
    BoxCondition { r#box: String },
}

impl ComponentViolation {
    pub fn code(&self) -> &'static str {
        match self {
            ComponentViolation::EntryBalance { .. }
            | ComponentViolation::Conservation { .. }
            | ComponentViolation::CurrentVertex { .. } => "flow conservation",
            ComponentViolation::SwitchingParity { .. } => "switching parity",
            ComponentViolation::BoxCondition { .. } => "box condition",
        }
    }
}

impl fmt::Display for ComponentViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentViolation::EntryBalance { balance } => {
                write!(f, "flow conservation: entry has net outflow {balance}")
            }
            ComponentViolation::Conservation { vertex, balance } => {
                write!(f, "flow conservation: {vertex} has net inflow {balance}")
            }
            ComponentViolation::CurrentVertex { candidates } => {
                write!(f, "flow conservation: {candidates} vertices with net inflow 1")
            }
            ComponentViolation::SwitchingParity { vertex } => write!(f, "switching parity at {vertex}"),
            ComponentViolation::BoxCondition { r#box } => write!(f, "box condition: box {box} crossed more than one way"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComponentFlowStatus {
    /// The all-zero vector; its current vertex is the entry.
    Zero,
    Valid {
        current: VertexId,
        complete: bool,
        call_pending: bool,
    },
    Invalid(Vec<ComponentViolation>),
}

impl ComponentFlowStatus {
    pub fn is_valid(&self) -> bool {
        !matches!(self, ComponentFlowStatus::Invalid(_))
    }

    /// `d^l`, when defined.
    pub fn current(&self, c: &Component) -> Option<VertexId> {
        match *self {
            ComponentFlowStatus::Zero => Some(c.entry_vertex()),
            ComponentFlowStatus::Valid { current, .. } => Some(current),
            ComponentFlowStatus::Invalid(_) => None,
        }
    }
}

fn require_single_entry(c: &Component) -> Result<()> {
    if c.entries().len() != 1 {
        return Err(Error::Contract(format!("component has {} entries", c.entries().len())));
    }
    Ok(())
}

/// Check flow conservation, switching parity and the box condition.
pub fn verify_component_flow(c: &Component, x: &[u64]) -> Result<ComponentFlowStatus> {
    require_single_entry(c)?;
    if x.len() != c.edge_count() {
        return Err(Error::DimensionMismatch {
            component: 0,
            expected: c.edge_count(),
            found: x.len(),
        });
    }
    Ok(component_status(c, x, &mut Meter::default()))
}

fn component_status(c: &Component, x: &[u64], meter: &mut Meter) -> ComponentFlowStatus {
    meter.tick(x.len());
    if x.iter().all(|&v| v == 0) {
        return ComponentFlowStatus::Zero;
    }
    let mut violations = Vec::new();
    let mut balance = vec![0i64; c.vertex_count()];
    for (e, edge) in c.edges().iter().enumerate() {
        let v = x[e] as i64;
        balance[edge.head()] += v;
        balance[edge.tail()] -= v;
    }
    meter.tick(c.edges().len() + c.vertex_count());
    let entry = c.entry_vertex();
    if balance[entry] != -1 {
        violations.push(ComponentViolation::EntryBalance {
            balance: -balance[entry],
        });
    }
    let candidates: Vec<VertexId> = (0..c.vertex_count()).filter(|&v| v != entry && balance[v] == 1).collect();
    for v in 0..c.vertex_count() {
        if v != entry && balance[v] != 0 && balance[v] != 1 {
            violations.push(ComponentViolation::Conservation {
                vertex: c.vertex_name(v).to_string(),
                balance: balance[v],
            });
        }
    }
    if candidates.len() != 1 {
        violations.push(ComponentViolation::CurrentVertex {
            candidates: candidates.len(),
        });
    }
    for &v in c.sources() {
        let [e0, e1] = c.out_edges(v).expect("source");
        if e0 != e1 {
            let (x0, x1) = (x[e0], x[e1]);
            if !(x1 <= x0 && x0 <= x1 + 1) {
                violations.push(ComponentViolation::SwitchingParity {
                    vertex: c.vertex_name(v).to_string(),
                });
            }
        }
    }
    meter.tick(c.sources().len());
    for (b, def) in c.boxes().iter().enumerate() {
        if c.box_crossings(b).filter(|&f| x[f] > 0).count() > 1 {
            violations.push(ComponentViolation::BoxCondition { r#box: def.name.clone() });
        }
    }
    meter.tick(c.edges().len());
    if !violations.is_empty() {
        return ComponentFlowStatus::Invalid(violations);
    }
    let current = candidates[0];
    ComponentFlowStatus::Valid {
        current,
        complete: c.is_exit(current),
        call_pending: c.is_call(current),
    }
}

/// Why a flow is not run-like. Components are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Reason {
    ComponentFlow {
        component: usize,
        violations: Vec<ComponentViolation>,
    },
    /// A crossing is used although the callee's flow is not complete.
    CrossingIntoIncomplete { component: usize, edge: String },
    /// A crossing does not end at the callee's current exit.
    CrossingExitMismatch { component: usize, edge: String },
    /// The last-used-edge graph has a cycle that is not the single cycle
    /// through the current vertex.
    LastUsedEdgeCycle { component: usize },
    /// The pending-call edges do not form a path or lasso starting at 1.
    PendingCallShape,
    /// A non-zero component that is neither complete, call-pending, nor the
    /// active component.
    StrayComponent { component: usize },
    CompletedCallCycle,
    UnreachableComponent { component: usize },
}

impl Reason {
    pub fn code(&self) -> &'static str {
        match self {
            Reason::ComponentFlow { .. } => "component flow",
            Reason::CrossingIntoIncomplete { .. } => "crossing into incomplete component",
            Reason::CrossingExitMismatch { .. } => "crossing/exit mismatch",
            Reason::LastUsedEdgeCycle { .. } => "last-used-edge cycle",
            Reason::PendingCallShape => "pending-call shape",
            Reason::StrayComponent { .. } => "stray component",
            Reason::CompletedCallCycle => "completed-call cycle",
            Reason::UnreachableComponent { .. } => "unreachable component",
        }
    }

    /// Recursive switching flow conditions, as opposed to run-like ones.
    pub fn is_recursive_condition(&self) -> bool {
        matches!(
            self,
            Reason::ComponentFlow { .. } | Reason::CrossingIntoIncomplete { .. } | Reason::CrossingExitMismatch { .. }
        )
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::ComponentFlow { component, violations } => {
                let parts: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                write!(f, "component {}: {}", component + 1, parts.join("; "))
            }
            Reason::CrossingIntoIncomplete { component, edge } => {
                write!(f, "crossing into incomplete component: {edge} in component {}", component + 1)
            }
            Reason::CrossingExitMismatch { component, edge } => {
                write!(f, "crossing/exit mismatch: {edge} in component {}", component + 1)
            }
            Reason::LastUsedEdgeCycle { component } => write!(f, "last-used-edge cycle in component {}", component + 1),
            Reason::PendingCallShape => write!(f, "pending-call shape"),
            Reason::StrayComponent { component } => write!(f, "stray component {}", component + 1),
            Reason::CompletedCallCycle => write!(f, "completed-call cycle"),
            Reason::UnreachableComponent { component } => write!(f, "unreachable component {}", component + 1),
        }
    }
}

fn check_instance(inst: &Instance, x: &Flow) -> Result<()> {
    inst.require_single_entry()?;
    value::check_shape(inst, x.parts())
}

/// Per-component statuses plus the cross-component crossing conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursiveReport {
    pub statuses: Vec<ComponentFlowStatus>,
    pub violations: Vec<Reason>,
}

impl RecursiveReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check that `x` is a recursive switching flow.
pub fn verify_recursive_flow(inst: &Instance, x: &Flow) -> Result<RecursiveReport> {
    check_instance(inst, x)?;
    Ok(recursive_report(inst, x, &mut Meter::default()))
}

fn recursive_report(inst: &Instance, x: &Flow, meter: &mut Meter) -> RecursiveReport {
    let statuses: Vec<ComponentFlowStatus> = inst
        .components()
        .iter()
        .enumerate()
        .map(|(l, c)| component_status(c, x.part(l), meter))
        .collect();
    let mut violations = Vec::new();
    for (l, s) in statuses.iter().enumerate() {
        if let ComponentFlowStatus::Invalid(v) = s {
            violations.push(Reason::ComponentFlow {
                component: l,
                violations: v.clone(),
            });
        }
    }
    for (l, c) in inst.components().iter().enumerate() {
        for (e, edge) in c.edges().iter().enumerate() {
            let crate::model::Edge::Cross { bx, ret, .. } = *edge else { continue };
            if x.get(l, e) == 0 {
                continue;
            }
            meter.tick(1);
            let callee = c.boxes()[bx].callee;
            let callee_comp = inst.component(callee);
            match &statuses[callee] {
                ComponentFlowStatus::Valid {
                    current, complete: true, ..
                } => {
                    let Vertex::Return { exit, .. } = c.vertex(ret) else { unreachable!() };
                    if callee_comp.node_vertex(exit) != *current {
                        violations.push(Reason::CrossingExitMismatch {
                            component: l,
                            edge: c.edge_key(e),
                        });
                    }
                }
                ComponentFlowStatus::Invalid(_) => {}
                _ => violations.push(Reason::CrossingIntoIncomplete {
                    component: l,
                    edge: c.edge_key(e),
                }),
            }
        }
    }
    RecursiveReport { statuses, violations }
}

/// Last-used-edge set of a component switching flow, as edge ids.
pub fn last_used_edge_graph(c: &Component, x: &[u64]) -> Result<Vec<EdgeId>> {
    if !verify_component_flow(c, x)?.is_valid() {
        return Err(Error::Contract("not a component switching flow".into()));
    }
    Ok(lue_edges(c, x, &mut Meter::default()))
}

fn lue_edges(c: &Component, x: &[u64], meter: &mut Meter) -> Vec<EdgeId> {
    let mut out = Vec::new();
    for &v in c.sources() {
        let [e0, e1] = c.out_edges(v).expect("source");
        if x[e0] != x[e1] {
            out.push(e0);
        } else if x[e0] > 0 {
            out.push(e1);
        }
    }
    for (e, edge) in c.edges().iter().enumerate() {
        if edge.is_cross() && x[e] > 0 {
            out.push(e);
        }
    }
    meter.tick(c.sources().len() + c.edges().len());
    out.sort_unstable();
    out
}

/// Each vertex has at most one outgoing last-used edge, so the graph is
/// functional. Ok when acyclic or when its only cycle passes through `d`.
fn lue_cycles_ok(c: &Component, lue: &[EdgeId], d: VertexId, meter: &mut Meter) -> bool {
    let n = c.vertex_count();
    let mut next = vec![usize::MAX; n];
    for &e in lue {
        let edge = c.edges()[e];
        if next[edge.tail()] != usize::MAX {
            return false;
        }
        next[edge.tail()] = edge.head();
    }
    // 0 = unvisited, 1 = on current path, 2 = done
    let mut mark = vec![0u8; n];
    let mut cycles = 0;
    let mut d_on_cycle = false;
    for start in 0..n {
        let mut path = Vec::new();
        let mut v = start;
        while v != usize::MAX && mark[v] == 0 {
            mark[v] = 1;
            path.push(v);
            v = next[v];
        }
        meter.tick(path.len() + 1);
        if v != usize::MAX && mark[v] == 1 {
            cycles += 1;
            let pos = path.iter().position(|&u| u == v).unwrap();
            if path[pos..].contains(&d) {
                d_on_cycle = true;
            }
        }
        for u in path {
            mark[u] = 2;
        }
    }
    cycles == 0 || (cycles == 1 && d_on_cycle)
}

/// Structural facts about a recursive switching flow.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Structure {
    /// `d^l` for every component.
    pub current: Vec<VertexId>,
    /// `K_X`.
    pub complete: BTreeSet<usize>,
    /// `J_X`.
    pub pending: BTreeSet<usize>,
    pub pending_edges: BTreeSet<(usize, usize)>,
    pub completed_edges: BTreeSet<(usize, usize)>,
    /// `j_1, ..., j_{r+1}` when the pending-call graph has the right shape.
    pub order: Vec<usize>,
}

impl Structure {
    /// `j_{r+1}`, the active component.
    pub fn active(&self) -> usize {
        *self.order.last().unwrap_or(&0)
    }

    /// `j_r`, the caller of the active component.
    pub fn caller(&self) -> Option<usize> {
        self.order.len().checked_sub(2).map(|i| self.order[i])
    }

    pub fn is_complete(&self) -> bool {
        self.complete.contains(&0)
    }

    pub fn is_lassoed(&self) -> bool {
        !self.pending.is_empty() && self.pending.contains(&self.active())
    }
}

fn graphs(inst: &Instance, x: &Flow, current: &[VertexId], meter: &mut Meter) -> Structure {
    let mut s = Structure {
        current: current.to_vec(),
        ..Structure::default()
    };
    for (l, c) in inst.components().iter().enumerate() {
        let d = current[l];
        if c.is_exit(d) && !x.part_is_zero(l) {
            s.complete.insert(l);
        }
        if let Vertex::Call { bx, .. } = c.vertex(d) {
            s.pending.insert(l);
            s.pending_edges.insert((l, c.boxes()[bx].callee));
        }
        for (e, edge) in c.edges().iter().enumerate() {
            if let crate::model::Edge::Cross { bx, .. } = *edge {
                if x.get(l, e) > 0 {
                    s.completed_edges.insert((l, c.boxes()[bx].callee));
                }
            }
        }
        meter.tick(c.edges().len() + 1);
    }
    s
}

/// 0-based `(caller, callee)` pairs.
pub type CallEdges = BTreeSet<(usize, usize)>;

/// Pending-call and completed-call edge sets of a recursive switching flow.
pub fn derived_graphs(inst: &Instance, x: &Flow) -> Result<(CallEdges, CallEdges)> {
    check_instance(inst, x)?;
    let mut meter = Meter::default();
    let report = recursive_report(inst, x, &mut meter);
    if !report.is_ok() {
        return Err(Error::Contract("not a recursive switching flow".into()));
    }
    let current = currents(inst, &report.statuses);
    let s = graphs(inst, x, &current, &mut meter);
    Ok((s.pending_edges, s.completed_edges))
}

fn currents(inst: &Instance, statuses: &[ComponentFlowStatus]) -> Vec<VertexId> {
    statuses
        .iter()
        .zip(inst.components())
        .map(|(s, c)| s.current(c).expect("valid status"))
        .collect()
}

fn has_cycle(k: usize, edges: &BTreeSet<(usize, usize)>, meter: &mut Meter) -> bool {
    let mut indeg = vec![0usize; k];
    let mut adj = vec![Vec::new(); k];
    for &(a, b) in edges {
        adj[a].push(b);
        indeg[b] += 1;
    }
    let mut queue: Vec<usize> = (0..k).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop() {
        seen += 1;
        for &w in &adj[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push(w);
            }
        }
    }
    meter.tick(k + edges.len());
    seen < k
}

/// The run-like conditions, without overflow classification.
/// Returns the structure (possibly partial) and every failed condition.
pub fn analyse(inst: &Instance, x: &Flow, meter: &mut Meter) -> (Structure, Vec<Reason>) {
    let report = recursive_report(inst, x, meter);
    if !report.statuses.iter().all(|s| s.is_valid()) {
        return (Structure::default(), report.violations);
    }
    let mut reasons = report.violations;
    let current = currents(inst, &report.statuses);
    let mut s = graphs(inst, x, &current, meter);
    let k = inst.len();

    for (l, c) in inst.components().iter().enumerate() {
        if x.part_is_zero(l) {
            continue;
        }
        let lue = lue_edges(c, x.part(l), meter);
        if !lue_cycles_ok(c, &lue, current[l], meter) {
            reasons.push(Reason::LastUsedEdgeCycle { component: l });
        }
    }

    // Pending-call path or lasso from component 1.
    let mut shape_ok = true;
    if s.pending.is_empty() {
        s.order = vec![0];
    } else if !s.pending.contains(&0) {
        shape_ok = false;
    } else {
        let next = |i: usize| s.pending_edges.iter().find(|e| e.0 == i).map(|e| e.1);
        let mut order = vec![0];
        let mut visited = vec![false; k];
        visited[0] = true;
        let mut at = 0;
        while let Some(n) = next(at) {
            order.push(n);
            meter.tick(1);
            if visited[n] || !s.pending.contains(&n) {
                break;
            }
            visited[n] = true;
            at = n;
        }
        let covered = order[..order.len() - 1].len();
        if covered != s.pending.len() {
            shape_ok = false;
        } else {
            s.order = order;
        }
    }
    if !shape_ok {
        reasons.push(Reason::PendingCallShape);
    }

    let active = if shape_ok { Some(s.active()) } else { None };
    for l in 0..k {
        if !(s.pending.contains(&l) || s.complete.contains(&l) || x.part_is_zero(l) || Some(l) == active) {
            reasons.push(Reason::StrayComponent { component: l });
        }
    }

    if has_cycle(k, &s.completed_edges, meter) {
        reasons.push(Reason::CompletedCallCycle);
    }

    let mut reach = vec![false; k];
    reach[0] = true;
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        for &(a, b) in s.pending_edges.iter().chain(&s.completed_edges) {
            meter.tick(1);
            if a == v && !reach[b] {
                reach[b] = true;
                stack.push(b);
            }
        }
    }
    for l in 0..k {
        if !x.part_is_zero(l) && !reach[l] {
            reasons.push(Reason::UnreachableComponent { component: l });
        }
    }
    (s, reasons)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    InProgress,
    Complete { exit: VertexId },
    Lassoed,
    JustOverflowing { component: usize, edge: EdgeId },
    PostOverflowing,
    NotRunLike(Vec<Reason>),
}

impl Classification {
    pub fn is_run_like(&self) -> bool {
        !matches!(self, Classification::NotRunLike(_))
    }

    pub fn is_finished(&self) -> bool {
        matches!(
            self,
            Classification::Complete { .. } | Classification::Lassoed | Classification::JustOverflowing { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Classification::InProgress => "in_progress",
            Classification::Complete { .. } => "complete",
            Classification::Lassoed => "lassoed",
            Classification::JustOverflowing { .. } => "just_overflowing",
            Classification::PostOverflowing => "post_overflowing",
            Classification::NotRunLike(_) => "not_run_like",
        }
    }

    pub fn reasons(&self) -> &[Reason] {
        match self {
            Classification::NotRunLike(r) => r,
            _ => &[],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunLikeStatus {
    pub classification: Classification,
    pub structure: Structure,
}

impl RunLikeStatus {
    pub fn is_run_like(&self) -> bool {
        self.classification.is_run_like()
    }
}

/// Full run-like verification and classification with thresholds
/// `2^p(|V_l|) + 1`.
pub fn verify_run_like(inst: &Instance, x: &Flow, poly: OverflowPoly) -> Result<RunLikeStatus> {
    verify_run_like_metered(inst, x, poly, &mut Meter::default())
}

pub fn verify_run_like_metered(inst: &Instance, x: &Flow, poly: OverflowPoly, meter: &mut Meter) -> Result<RunLikeStatus> {
    check_instance(inst, x)?;
    let thresholds = poly.thresholds(inst);
    Ok(classify(inst, x, &thresholds, meter))
}

pub(crate) fn classify(inst: &Instance, x: &Flow, thresholds: &[u64], meter: &mut Meter) -> RunLikeStatus {
    let (structure, reasons) = analyse(inst, x, meter);
    if !reasons.is_empty() {
        return RunLikeStatus {
            classification: Classification::NotRunLike(reasons),
            structure,
        };
    }
    let mut over = Vec::new();
    for (l, part) in x.parts().iter().enumerate() {
        for (e, &v) in part.iter().enumerate() {
            if v >= thresholds[l] {
                over.push((l, e, v));
            }
        }
        meter.tick(part.len());
    }
    let classification = if !over.is_empty() {
        let just = match over[..] {
            [(l, e, v)] if v == thresholds[l] && !structure.is_complete() => {
                let c = inst.component(l);
                c.edges()[e].head() == structure.current[l]
                    && analyse(inst, &x.minus_unit(l, e).expect("positive"), meter).1.is_empty()
            }
            _ => false,
        };
        if !just {
            Classification::PostOverflowing
        } else if structure.is_lassoed() {
            Classification::Lassoed
        } else {
            let (l, e, _) = over[0];
            Classification::JustOverflowing { component: l, edge: e }
        }
    } else if structure.is_complete() {
        Classification::Complete {
            exit: structure.current[0],
        }
    } else if structure.is_lassoed() {
        Classification::Lassoed
    } else {
        Classification::InProgress
    };
    RunLikeStatus {
        classification,
        structure,
    }
}

/// Sum of all coordinates.
pub fn val(x: &Flow) -> u64 {
    x.val()
}

/// Completed call count of component `l`: total crossings of boxes labelled `l`.
pub fn cc(inst: &Instance, x: &Flow, l: usize) -> u64 {
    let mut total = 0;
    for (i, c) in inst.components().iter().enumerate() {
        for (b, def) in c.boxes().iter().enumerate() {
            if def.callee == l {
                total += c.box_crossings(b).map(|f| x.get(i, f)).sum::<u64>();
            }
        }
    }
    total
}
