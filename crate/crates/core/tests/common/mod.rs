#![allow(dead_code)]

use rarrival::flow::Flow;
use rarrival::model::{parse_instance, Instance, VertexId};
use rarrival::semantics::{step, Runner, State};
use rarrival::OverflowPoly;

pub const ALTERNATION: &str = "version 1
component 1
entry s
exit d z
node o w
t s * o
t o 0 w
t o 1 d
t w * o
";

pub const MUTUAL: &str = "version 1
component 1
entry o1
exit d1
box b1 2
t o1 * b1:o2
t b1:d2 * d1
component 2
entry o2
exit d2
box b2 1
t o2 * b2:o1
t b2:d1 * d2
";

pub const SELF_LOOP: &str = "version 1
component 1
entry o
exit d
node v
t o * v
t v * v
";

pub fn fixture(text: &str) -> Instance {
    parse_instance(text).unwrap()
}

pub fn seed() -> u64 {
    std::env::var("RA_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(20240601)
}

/// One observed state: the stack as `(component, box)` pairs, the current
/// component and vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub stack: Vec<(usize, usize)>,
    pub component: usize,
    pub vertex: VertexId,
}

pub fn trajectory(inst: &Instance, steps: usize) -> Vec<Snapshot> {
    let mut st = State::initial(inst);
    let mut out = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        out.push(Snapshot {
            stack: st.stack.iter().map(|f| (f.component, f.bx)).collect(),
            component: st.component,
            vertex: st.vertex,
        });
        if i < steps {
            st = step(inst, &st).unwrap();
        }
    }
    out
}

/// Run profiles straight from the definition: `S_l` is the first time at
/// `o_l`, `β^l` the stack then, `T_l` the first time at an exit of `l`, and
/// the component run is every time in `[S_l, T_l]` whose stack is `β^l`.
/// Consecutive component-run times contribute the edge between their
/// vertices.
pub fn definitional_profiles(inst: &Instance, steps: usize) -> Vec<Flow> {
    let traj = trajectory(inst, steps);
    let k = inst.len();
    let mut s_time = vec![None; k];
    let mut t_time = vec![None; k];
    let mut base = vec![None; k];
    for (t, snap) in traj.iter().enumerate() {
        let c = inst.component(snap.component);
        if s_time[snap.component].is_none() && snap.vertex == c.entry_vertex() {
            s_time[snap.component] = Some(t);
            base[snap.component] = Some(snap.stack.clone());
        }
        if t_time[snap.component].is_none() && c.is_exit(snap.vertex) {
            t_time[snap.component] = Some(t);
        }
    }
    let mut last: Vec<Option<usize>> = vec![None; k];
    let mut x = Flow::zero(inst);
    let mut out = Vec::with_capacity(traj.len());
    for (t, snap) in traj.iter().enumerate() {
        let l = snap.component;
        let in_range = s_time[l].is_some_and(|s| s <= t) && t_time[l].is_none_or(|e| t <= e);
        if in_range && base[l].as_ref() == Some(&snap.stack) {
            if let Some(prev) = last[l] {
                let c = inst.component(l);
                let from = traj[prev].vertex;
                let e = c
                    .outgoing(from)
                    .iter()
                    .copied()
                    .find(|&e| c.edges()[e].head() == snap.vertex)
                    .unwrap_or_else(|| panic!("no edge {} -> {}", c.vertex_name(from), c.vertex_name(snap.vertex)));
                x.increment(l, e);
            }
            last[l] = Some(t);
        }
        out.push(x.clone());
    }
    out
}

/// `(component, vertex)` at every time up to `steps`, stepping in place.
pub fn positions(inst: &Instance, steps: usize) -> Vec<(usize, VertexId)> {
    let mut r = Runner::new(inst, OverflowPoly::Linear).unwrap();
    let mut out = Vec::with_capacity(steps + 1);
    for _ in 0..=steps {
        out.push((r.state().component, r.state().vertex));
        r.step();
    }
    out
}
