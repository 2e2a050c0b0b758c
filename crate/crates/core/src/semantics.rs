//! Operational semantics: switch positions, the transition function on
//! call-stack states, bounded runs and recursive run profiles.
//!
//! A run starts at `(ε, (o_1, q^0))`. [`run`] stops at the first of three
//! events, each decided on the fly:
//!
//! * the main component reaches an exit with an empty stack (termination);
//! * the call stack reaches depth `k`, which forces a repeated component on
//!   the component call-stack and hence unbounded recursion;
//! * an edge count of some component's canonical visit reaches the overflow
//!   threshold `2^p(|V_l|) + 1`.
//!
//! The run profile is maintained incrementally: only the canonical frame of
//! each component (the frame pushed when the component was first entered)
//! updates that component's vector. A box crossing is counted in the caller
//! when a call made from its canonical frame returns.

use std::collections::HashMap;

use serde::Serialize;

use crate::bounds::OverflowPoly;
use crate::error::{Error, Result};
use crate::flow::Flow;
use crate::model::{Component, EdgeId, Instance, Vertex, VertexId};

/// `q : Sor_i -> {0,1}`, indexed by source slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SwitchPosition(Vec<bool>);

impl SwitchPosition {
    /// The all-zero position `q^0`.
    pub fn initial(c: &Component) -> SwitchPosition {
        SwitchPosition(vec![false; c.sources().len()])
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, c: &Component, v: VertexId) -> Option<bool> {
        c.source_slot(v).and_then(|s| self.0.get(s).copied())
    }

    pub fn to_bit_string(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Flip the bit of source vertex `v`.
pub fn flip(c: &Component, v: VertexId, q: &SwitchPosition) -> Result<SwitchPosition> {
    let slot = c
        .source_slot(v)
        .filter(|&s| s < q.0.len())
        .ok_or_else(|| Error::Contract(format!("{} is not a source vertex", c.vertex_name(v))))?;
    let mut out = q.clone();
    out.0[slot] = !out.0[slot];
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Frame {
    /// Component that owns the box.
    pub component: usize,
    pub bx: usize,
    /// The call port the call was made from.
    pub call: VertexId,
    pub switches: SwitchPosition,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct State {
    pub stack: Vec<Frame>,
    pub component: usize,
    pub vertex: VertexId,
    pub switches: SwitchPosition,
}

impl State {
    /// `(ε, (o_1, q_1^0))`.
    pub fn initial(inst: &Instance) -> State {
        let main = inst.component(0);
        State::at_entry(inst, 0, main.entry_vertex())
    }

    /// `(ε, (entry, q^0))` in an arbitrary component.
    pub fn at_entry(inst: &Instance, component: usize, entry: VertexId) -> State {
        State {
            stack: Vec::new(),
            component,
            vertex: entry,
            switches: SwitchPosition::initial(inst.component(component)),
        }
    }

    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    /// `(c_1, ..., c_{r+1})`.
    pub fn component_stack(&self) -> Vec<usize> {
        self.stack.iter().map(|f| f.component).chain([self.component]).collect()
    }

    pub fn is_well_formed(&self, inst: &Instance) -> bool {
        let comps = self.component_stack();
        if comps.iter().any(|&c| c >= inst.len()) {
            return false;
        }
        for (i, f) in self.stack.iter().enumerate() {
            let c = inst.component(f.component);
            let Some(b) = c.boxes().get(f.bx) else { return false };
            if b.callee != comps[i + 1] || f.switches.0.len() != c.sources().len() {
                return false;
            }
            if !matches!(c.vertices().get(f.call), Some(Vertex::Call { bx, .. }) if *bx == f.bx) {
                return false;
            }
        }
        let c = inst.component(self.component);
        self.vertex < c.vertex_count() && self.switches.0.len() == c.sources().len()
    }
}

/// What a single application of the transition function did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transition {
    /// Case 1: moved along `edge` from a source vertex and flipped its bit.
    Move { from: VertexId, to: VertexId, edge: EdgeId },
    /// Case 2: pushed a frame and entered the callee.
    Call { callee: usize },
    /// Case 3: popped back to the caller's return port; `crossing` is the
    /// caller's box-crossing edge that was just completed.
    Return { caller: usize, crossing: EdgeId },
    /// Case 4: exit of the outermost frame, a fixed point.
    Halt,
}

fn apply(inst: &Instance, st: &mut State) -> Transition {
    let comp = inst.component(st.component);
    let v = st.vertex;
    if let Some(slot) = comp.source_slot(v) {
        let bit = st.switches.0[slot] as usize;
        let to = comp.successor(v, bit).expect("source");
        let edge = comp.out_edges(v).expect("source")[bit];
        st.switches.0[slot] = !st.switches.0[slot];
        st.vertex = to;
        return Transition::Move { from: v, to, edge };
    }
    match comp.vertex(v) {
        Vertex::Call { bx, entry } => {
            let callee = comp.boxes()[bx].callee;
            let callee_comp = inst.component(callee);
            let saved = std::mem::replace(&mut st.switches, SwitchPosition::initial(callee_comp));
            st.stack.push(Frame {
                component: st.component,
                bx,
                call: v,
                switches: saved,
            });
            st.component = callee;
            st.vertex = callee_comp.node_vertex(entry);
            Transition::Call { callee }
        }
        Vertex::Node(n) => {
            debug_assert!(comp.exits().contains(&n));
            let Some(frame) = st.stack.pop() else {
                return Transition::Halt;
            };
            let caller = inst.component(frame.component);
            let ret = caller
                .vertex_id(Vertex::Return { bx: frame.bx, exit: n })
                .expect("return port for callee exit");
            let crossing = caller
                .outgoing(frame.call)
                .iter()
                .copied()
                .find(|&e| caller.edges()[e].head() == ret)
                .expect("crossing edge");
            st.component = frame.component;
            st.vertex = ret;
            st.switches = frame.switches;
            Transition::Return {
                caller: frame.component,
                crossing,
            }
        }
        Vertex::Return { .. } => unreachable!("return ports are sources"),
    }
}

/// The transition function `δ` on well-formed states.
pub fn step(inst: &Instance, state: &State) -> Result<State> {
    if !state.is_well_formed(inst) {
        return Err(Error::Contract("state is not well-formed".into()));
    }
    let mut next = state.clone();
    apply(inst, &mut next);
    Ok(next)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Limits {
    #[serde(skip)]
    pub poly: OverflowPoly,
    /// Hard cap on simulated steps; `None` relies on the detectors alone,
    /// which always fire on a single-entry instance.
    pub max_steps: Option<u64>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            poly: OverflowPoly::Linear,
            max_steps: None,
        }
    }
}

impl Limits {
    pub fn with_poly(poly: OverflowPoly) -> Self {
        Limits { poly, max_steps: None }
    }

    /// `10 * Σ_l |E_l ∪ F_l| * (2^p(|V_l|) + 1)`, saturating.
    pub fn guard_for(inst: &Instance, poly: OverflowPoly) -> Self {
        let budget = inst
            .components()
            .iter()
            .map(|c| (c.edge_count() as u64).saturating_mul(poly.threshold(c.vertex_count())))
            .fold(0u64, |a, b| a.saturating_add(b))
            .saturating_mul(10);
        Limits {
            poly,
            max_steps: Some(budget),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Terminated { exit: VertexId, time: u64 },
    StackBlowup { time: u64, depth: usize },
    LoopOverflow { component: usize, edge: EdgeId, time: u64 },
    Inconclusive { steps: u64 },
}

impl RunOutcome {
    pub fn terminates(&self) -> Option<bool> {
        match self {
            RunOutcome::Terminated { .. } => Some(true),
            RunOutcome::StackBlowup { .. } | RunOutcome::LoopOverflow { .. } => Some(false),
            RunOutcome::Inconclusive { .. } => None,
        }
    }

    pub fn time(&self) -> u64 {
        match *self {
            RunOutcome::Terminated { time, .. }
            | RunOutcome::StackBlowup { time, .. }
            | RunOutcome::LoopOverflow { time, .. } => time,
            RunOutcome::Inconclusive { steps } => steps,
        }
    }
}

/// `RunPros(G, t)` together with the first-entry times `S_l`, exit times
/// `T_l` and canonical stacks `β^l` (as `(component, box)` paths).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunProfile {
    pub flow: Flow,
    pub first_entry: Vec<Option<u64>>,
    pub exit_time: Vec<Option<u64>>,
    pub canonical_stack: Vec<Option<Vec<(usize, usize)>>>,
}

impl RunProfile {
    fn new(inst: &Instance) -> Self {
        let k = inst.len();
        let mut p = RunProfile {
            flow: Flow::zero(inst),
            first_entry: vec![None; k],
            exit_time: vec![None; k],
            canonical_stack: vec![None; k],
        };
        p.first_entry[0] = Some(0);
        p.canonical_stack[0] = Some(Vec::new());
        p
    }

    fn is_canonical(&self, component: usize, depth: usize) -> bool {
        self.exit_time[component].is_none()
            && matches!(&self.canonical_stack[component], Some(s) if s.len() == depth)
    }
}

/// What a call to [`Runner::step`] observed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    Continue,
    Terminated { exit: VertexId },
    StackBlowup { depth: usize },
    LoopOverflow { component: usize, edge: EdgeId },
}

/// Step-by-step simulation with an incrementally maintained run profile.
/// The runner keeps going after an event is reported; [`run`] is the
/// stopping wrapper.
#[derive(Clone, Debug)]
pub struct Runner<'a> {
    inst: &'a Instance,
    state: State,
    time: u64,
    profile: RunProfile,
    thresholds: Vec<u64>,
}

impl<'a> Runner<'a> {
    pub fn new(inst: &'a Instance, poly: OverflowPoly) -> Result<Self> {
        inst.require_single_entry()?;
        Ok(Runner {
            inst,
            state: State::initial(inst),
            time: 0,
            profile: RunProfile::new(inst),
            thresholds: poly.thresholds(inst),
        })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn profile(&self) -> &RunProfile {
        &self.profile
    }

    pub fn into_profile(self) -> RunProfile {
        self.profile
    }

    pub fn is_terminated(&self) -> bool {
        self.state.stack.is_empty() && self.state.component == 0 && self.inst.component(0).is_exit(self.state.vertex)
    }

    /// Apply `δ` once and update the profile.
    pub fn step(&mut self) -> Event {
        let depth = self.state.depth();
        let comp = self.state.component;
        let canonical = self.profile.is_canonical(comp, depth);
        let tr = apply(self.inst, &mut self.state);
        if tr != Transition::Halt {
            self.time += 1;
        }
        let t = self.time;
        let mut event = Event::Continue;
        match tr {
            Transition::Move { to, edge, .. } => {
                if canonical {
                    let count = self.profile.flow.increment(comp, edge);
                    if count == self.thresholds[comp] {
                        event = Event::LoopOverflow { component: comp, edge };
                    }
                    if self.inst.component(comp).is_exit(to) {
                        self.profile.exit_time[comp] = Some(t);
                    }
                }
            }
            Transition::Call { callee } => {
                if self.profile.first_entry[callee].is_none() {
                    self.profile.first_entry[callee] = Some(t);
                    self.profile.canonical_stack[callee] =
                        Some(self.state.stack.iter().map(|f| (f.component, f.bx)).collect());
                }
                if self.state.depth() >= self.inst.len() {
                    event = Event::StackBlowup { depth: self.state.depth() };
                }
            }
            Transition::Return { caller, crossing } => {
                if self.profile.is_canonical(caller, self.state.depth()) {
                    let count = self.profile.flow.increment(caller, crossing);
                    if count == self.thresholds[caller] {
                        event = Event::LoopOverflow {
                            component: caller,
                            edge: crossing,
                        };
                    }
                }
            }
            Transition::Halt => {}
        }
        if self.is_terminated() {
            return Event::Terminated { exit: self.state.vertex };
        }
        event
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub outcome: RunOutcome,
    pub profile: RunProfile,
}

/// Simulate from `(ε, (o_1, q^0))` until termination, a detector fires, or
/// the step cap is hit.
pub fn run(inst: &Instance, limits: Limits) -> Result<RunReport> {
    let mut runner = Runner::new(inst, limits.poly)?;
    let outcome = loop {
        if let Some(cap) = limits.max_steps {
            if runner.time() >= cap {
                break RunOutcome::Inconclusive { steps: runner.time() };
            }
        }
        match runner.step() {
            Event::Continue => {}
            Event::Terminated { exit } => break RunOutcome::Terminated { exit, time: runner.time() },
            Event::StackBlowup { depth } => break RunOutcome::StackBlowup { time: runner.time(), depth },
            Event::LoopOverflow { component, edge } => {
                break RunOutcome::LoopOverflow {
                    component,
                    edge,
                    time: runner.time(),
                }
            }
        }
    };
    Ok(RunReport {
        outcome,
        profile: runner.into_profile(),
    })
}

/// `RunPros(G, t)`. After termination the profile is constant, so any `t`
/// is accepted; otherwise `t` must not exceed the detection time.
pub fn run_profile(inst: &Instance, t: u64, limits: Limits) -> Result<RunProfile> {
    let mut runner = Runner::new(inst, limits.poly)?;
    if runner.is_terminated() {
        return Ok(runner.into_profile());
    }
    while runner.time() < t {
        if let Some(cap) = limits.max_steps {
            if runner.time() >= cap {
                return Err(Error::BeyondHorizon {
                    requested: t,
                    stopped_at: runner.time(),
                });
            }
        }
        match runner.step() {
            Event::Continue => {}
            Event::Terminated { .. } => return Ok(runner.into_profile()),
            _ => {
                if runner.time() < t {
                    return Err(Error::BeyondHorizon {
                        requested: t,
                        stopped_at: runner.time(),
                    });
                }
            }
        }
    }
    Ok(runner.into_profile())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HitAnswer {
    Yes,
    No,
    Inconclusive,
}

/// Does the run from `(ε, (o_1, q^0))` ever sit at `vertex` of `component`?
///
/// A negative answer is given only when the run terminates without hitting
/// the vertex, or when it provably repeats: a configuration
/// `(component, vertex, switch position)` recurs while the frame in which
/// it was first seen is still on the stack. From that point the run replays
/// the same segment forever (deeper each time when the stack grew), so
/// nothing unseen is ever reached.
pub fn hits(inst: &Instance, component: usize, vertex: VertexId, limits: Limits) -> Result<HitAnswer> {
    inst.require_single_entry()?;
    if component >= inst.len() || vertex >= inst.component(component).vertex_count() {
        return Err(Error::Contract("target vertex out of range".into()));
    }
    type Key = (usize, VertexId, SwitchPosition);
    let mut seen: HashMap<Key, usize> = HashMap::new();
    let mut by_depth: Vec<Vec<Key>> = Vec::new();
    let mut st = State::initial(inst);
    let mut steps = 0u64;
    loop {
        if st.component == component && st.vertex == vertex {
            return Ok(HitAnswer::Yes);
        }
        if st.stack.is_empty() && st.component == 0 && inst.component(0).is_exit(st.vertex) {
            return Ok(HitAnswer::No);
        }
        let depth = st.depth();
        while by_depth.len() > depth + 1 {
            for key in by_depth.pop().unwrap() {
                seen.remove(&key);
            }
        }
        let key: Key = (st.component, st.vertex, st.switches.clone());
        if seen.get(&key).is_some_and(|&d| d <= depth) {
            return Ok(HitAnswer::No);
        }
        seen.insert(key.clone(), depth);
        by_depth.resize_with(depth + 1, Vec::new);
        by_depth[depth].push(key);

        if limits.max_steps.is_some_and(|cap| steps >= cap) {
            return Ok(HitAnswer::Inconclusive);
        }
        apply(inst, &mut st);
        steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_instance;

    const ALTERNATION: &str = "version 1\ncomponent 1\nentry s\nexit d z\nnode o w\nt s * o\nt o 0 w\nt o 1 d\nt w * o\n";

    #[test]
    fn flip_is_an_involution() {
        let inst = parse_instance(ALTERNATION).unwrap();
        let c = inst.component(0);
        let q0 = SwitchPosition::initial(c);
        let o = c.vertex_by_name("o").unwrap();
        let w = c.vertex_by_name("w").unwrap();
        let q1 = flip(c, o, &q0).unwrap();
        assert_eq!(q1.get(c, o), Some(true));
        assert_eq!(q1.get(c, w), Some(false));
        assert_eq!(flip(c, o, &q1).unwrap(), q0);
        assert_eq!(
            flip(c, w, &flip(c, o, &q0).unwrap()).unwrap(),
            flip(c, o, &flip(c, w, &q0).unwrap()).unwrap()
        );
        let d = c.vertex_by_name("d").unwrap();
        assert!(matches!(flip(c, d, &q0), Err(Error::Contract(_))));
    }

    #[test]
    fn exit_of_main_is_a_fixed_point() {
        let inst = parse_instance(ALTERNATION).unwrap();
        let c = inst.component(0);
        let st = State::at_entry(&inst, 0, c.vertex_by_name("d").unwrap());
        assert_eq!(step(&inst, &st).unwrap(), st);
    }

    #[test]
    fn ill_formed_state_rejected() {
        let inst = parse_instance(ALTERNATION).unwrap();
        let mut st = State::initial(&inst);
        st.switches = SwitchPosition(vec![]);
        assert!(step(&inst, &st).is_err());
    }

    #[test]
    fn alternation_terminates_at_four() {
        let inst = parse_instance(ALTERNATION).unwrap();
        let report = run(&inst, Limits::default()).unwrap();
        let d = inst.component(0).vertex_by_name("d").unwrap();
        assert_eq!(report.outcome, RunOutcome::Terminated { exit: d, time: 4 });
    }

    #[test]
    fn step_cap_gives_inconclusive() {
        let inst = parse_instance(ALTERNATION).unwrap();
        let limits = Limits {
            max_steps: Some(2),
            ..Limits::default()
        };
        assert_eq!(run(&inst, limits).unwrap().outcome, RunOutcome::Inconclusive { steps: 2 });
    }

    #[test]
    fn hits_on_alternation() {
        let inst = parse_instance(ALTERNATION).unwrap();
        let c = inst.component(0);
        let l = Limits::default();
        assert_eq!(hits(&inst, 0, c.vertex_by_name("w").unwrap(), l).unwrap(), HitAnswer::Yes);
        assert_eq!(hits(&inst, 0, c.vertex_by_name("z").unwrap(), l).unwrap(), HitAnswer::No);
        assert_eq!(hits(&inst, 0, c.entry_vertex(), l).unwrap(), HitAnswer::Yes);
    }

    #[test]
    fn multi_entry_instances_are_refused() {
        let inst = parse_instance("version 1\ncomponent 1\nentry a b\nexit d\nt a * d\nt b * d\n").unwrap();
        assert!(matches!(run(&inst, Limits::default()), Err(Error::MultiEntry { .. })));
    }
}
