//! The Adv/Prev line through run-like flows, the walk to the unique finished
//! flow, termination decisions from it, and arithmetic witness checking.

mod ueopl;

use log::info;

use crate::bounds::OverflowPoly;
use crate::error::{Error, Result};
use crate::flow::{analyse, cc, classify, Classification, Flow, Meter, RunLikeStatus};
use crate::model::{EdgeId, Instance, Vertex, VertexId};

pub use ueopl::{scan, Encoding, ScanReport, Ueopl};

/// `U_{i,e}`: component `i` (0-based), edge `e`.
pub type Unit = (usize, EdgeId);

const CHECKPOINT: u64 = 1 << 16;

fn check(inst: &Instance, x: &Flow) -> Result<()> {
    inst.require_single_entry()?;
    Flow::from_parts(inst, x.parts().to_vec()).map(|_| ())
}

/// The unique increment of an in-progress flow, read off its structure.
fn next_unit(inst: &Instance, x: &Flow, st: &RunLikeStatus) -> Result<Unit> {
    let s = &st.structure;
    let c = s.active();
    let comp = inst.component(c);
    let d = s.current[c];
    if let Some([e0, e1]) = comp.out_edges(d) {
        let e = if x.get(c, e0) == x.get(c, e1) { e0 } else { e1 };
        return Ok((c, e));
    }
    if s.complete.contains(&c) {
        let caller = s
            .caller()
            .ok_or_else(|| Error::Invariant("complete main component on an in-progress flow".into()))?;
        let cc = inst.component(caller);
        let call = s.current[caller];
        let Vertex::Call { bx, .. } = cc.vertex(call) else {
            return Err(Error::Invariant("caller is not at a call port".into()));
        };
        let Vertex::Node(exit) = comp.vertex(d) else { unreachable!() };
        let ret = cc.vertex_id(Vertex::Return { bx, exit }).expect("return port");
        let f = cc
            .outgoing(call)
            .iter()
            .copied()
            .find(|&f| cc.edges()[f].head() == ret)
            .expect("crossing");
        return Ok((caller, f));
    }
    Err(Error::Invariant(format!(
        "no increment rule applies at {} in component {}",
        comp.vertex_name(d),
        c + 1
    )))
}

/// `Adv`: identity unless the flow is run-like and in progress.
pub fn adv(inst: &Instance, x: &Flow, poly: OverflowPoly) -> Result<Flow> {
    check(inst, x)?;
    let st = classify(inst, x, &poly.thresholds(inst), &mut Meter::default());
    if st.classification != Classification::InProgress {
        return Ok(x.clone());
    }
    let (i, e) = next_unit(inst, x, &st)?;
    Ok(x.plus_unit(i, e))
}

fn structurally_run_like(inst: &Instance, x: &Flow) -> bool {
    analyse(inst, x, &mut Meter::default()).1.is_empty()
}

fn prev_unit(inst: &Instance, x: &Flow, st: &RunLikeStatus) -> Result<Unit> {
    let s = &st.structure;
    let c = s.active();
    // On a lasso the active component is itself pending; the last move
    // closed the lasso in its caller.
    let i = if !s.is_lassoed() && !x.part_is_zero(c) && cc(inst, x, c) == 0 {
        c
    } else {
        s.caller()
            .ok_or_else(|| Error::Invariant("no component to decrement in".into()))?
    };
    let comp = inst.component(i);
    let d = s.current[i];
    let part = x.part(i);
    let lue = lue_into(inst, i, part, d);
    let passing: Vec<Unit> = lue
        .into_iter()
        .filter(|&e| structurally_run_like(inst, &x.minus_unit(i, e).expect("positive")))
        .map(|e| (i, e))
        .collect();
    match passing[..] {
        [u] => Ok(u),
        _ => Err(Error::Lemma(format!(
            "{} run-like decrements into {} of component {}",
            passing.len(),
            comp.vertex_name(d),
            i + 1
        ))),
    }
}

/// Incoming last-used edges of `d` with positive count.
fn lue_into(inst: &Instance, i: usize, part: &[u64], d: VertexId) -> Vec<EdgeId> {
    let comp = inst.component(i);
    comp.in_edges(d)
        .iter()
        .copied()
        .filter(|&e| part[e] > 0)
        .filter(|&e| {
            let edge = comp.edges()[e];
            if edge.is_cross() {
                return true;
            }
            let [e0, e1] = comp.out_edges(edge.tail()).expect("source");
            if part[e0] != part[e1] {
                e == e0
            } else {
                e == e1
            }
        })
        .collect()
}

/// `Prev`: identity on non-run-like, zero and post-overflowing flows.
pub fn prev(inst: &Instance, x: &Flow, poly: OverflowPoly) -> Result<Flow> {
    check(inst, x)?;
    let st = classify(inst, x, &poly.thresholds(inst), &mut Meter::default());
    if !st.classification.is_run_like() || st.classification == Classification::PostOverflowing || x.is_zero() {
        return Ok(x.clone());
    }
    let (i, e) = prev_unit(inst, x, &st)?;
    Ok(x.minus_unit(i, e).expect("positive"))
}

/// Every unit whose addition keeps the flow run-like.
pub fn increment_candidates(inst: &Instance, x: &Flow) -> Vec<Unit> {
    let mut out = Vec::new();
    for (i, c) in inst.components().iter().enumerate() {
        for e in 0..c.edge_count() {
            if structurally_run_like(inst, &x.plus_unit(i, e)) {
                out.push((i, e));
            }
        }
    }
    out
}

/// Every unit whose subtraction is defined and keeps the flow run-like.
pub fn decrement_candidates(inst: &Instance, x: &Flow) -> Vec<Unit> {
    let mut out = Vec::new();
    for (i, c) in inst.components().iter().enumerate() {
        for e in 0..c.edge_count() {
            if let Some(y) = x.minus_unit(i, e) {
                if structurally_run_like(inst, &y) {
                    out.push((i, e));
                }
            }
        }
    }
    out
}

/// `Adv` by exhaustive search over all units.
pub fn adv_oracle(inst: &Instance, x: &Flow, poly: OverflowPoly) -> Result<Flow> {
    check(inst, x)?;
    let st = classify(inst, x, &poly.thresholds(inst), &mut Meter::default());
    if st.classification != Classification::InProgress {
        return Ok(x.clone());
    }
    match increment_candidates(inst, x)[..] {
        [(i, e)] => Ok(x.plus_unit(i, e)),
        ref c => Err(Error::Lemma(format!("{} run-like increments of {x}", c.len()))),
    }
}

/// `Prev` by exhaustive search over all units.
pub fn prev_oracle(inst: &Instance, x: &Flow, poly: OverflowPoly) -> Result<Flow> {
    check(inst, x)?;
    let st = classify(inst, x, &poly.thresholds(inst), &mut Meter::default());
    if !st.classification.is_run_like() || st.classification == Classification::PostOverflowing || x.is_zero() {
        return Ok(x.clone());
    }
    match decrement_candidates(inst, x)[..] {
        [(i, e)] => Ok(x.minus_unit(i, e).expect("positive")),
        ref c => Err(Error::Lemma(format!("{} run-like decrements of {x}", c.len()))),
    }
}

/// The unique finished run-like flow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinishedWitness {
    pub flow: Flow,
    pub classification: Classification,
    /// `d^1` when complete.
    pub exit: Option<VertexId>,
    pub val: u64,
    /// Number of `Adv` steps from the zero flow.
    pub steps: u64,
}

impl FinishedWitness {
    pub fn terminates(&self) -> bool {
        self.exit.is_some()
    }
}

/// Upper bound on the length of the line: `Σ_l |E_l ∪ F_l| · θ_l + 1`.
pub fn line_bound(inst: &Instance, poly: OverflowPoly) -> u64 {
    inst.components()
        .iter()
        .map(|c| (c.edge_count() as u64).saturating_mul(poly.threshold(c.vertex_count())))
        .fold(1u64, |a, b| a.saturating_add(b))
}

/// Iterator over the line `0, Adv(0), Adv(Adv(0)), ...` up to and including
/// the finished flow.
pub struct Line<'a> {
    inst: &'a Instance,
    thresholds: Vec<u64>,
    next: Option<Flow>,
}

impl<'a> Line<'a> {
    pub fn new(inst: &'a Instance, poly: OverflowPoly) -> Result<Self> {
        inst.require_single_entry()?;
        Ok(Line {
            inst,
            thresholds: poly.thresholds(inst),
            next: Some(Flow::zero(inst)),
        })
    }
}

impl Iterator for Line<'_> {
    type Item = Result<(Flow, RunLikeStatus)>;

    fn next(&mut self) -> Option<Self::Item> {
        let x = self.next.take()?;
        let st = classify(self.inst, &x, &self.thresholds, &mut Meter::default());
        match &st.classification {
            Classification::InProgress => match next_unit(self.inst, &x, &st) {
                Ok((i, e)) => self.next = Some(x.plus_unit(i, e)),
                Err(err) => return Some(Err(err)),
            },
            c if c.is_finished() => {}
            other => {
                return Some(Err(Error::Invariant(format!(
                    "line reached a {} flow: {x}",
                    other.name()
                ))))
            }
        }
        Some(Ok((x, st)))
    }
}

/// Iterate `Adv` from the zero flow until a finished flow is reached.
pub fn walk(inst: &Instance, poly: OverflowPoly) -> Result<FinishedWitness> {
    let bound = line_bound(inst, poly);
    let mut steps = 0u64;
    for point in Line::new(inst, poly)? {
        let (x, st) = point?;
        if st.classification.is_finished() {
            let exit = match st.classification {
                Classification::Complete { exit } => Some(exit),
                _ => None,
            };
            return Ok(FinishedWitness {
                val: x.val(),
                flow: x,
                classification: st.classification,
                exit,
                steps,
            });
        }
        steps += 1;
        if steps.is_multiple_of(CHECKPOINT) {
            info!("walk checkpoint: val {} after {steps} steps", x.val() + 1);
        }
        if steps > bound {
            return Err(Error::Invariant(format!("walk exceeded its bound of {bound} steps")));
        }
    }
    Err(Error::Invariant("line ended without a finished flow".into()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub answer: bool,
    pub witness: FinishedWitness,
}

/// Does the run terminate at exit `target` of component 1?
pub fn decide(inst: &Instance, target: VertexId, poly: OverflowPoly) -> Result<Decision> {
    let main = inst.component(0);
    if target >= main.vertex_count() || !main.is_exit(target) {
        return Err(Error::NotAnExit(
            main.vertices().get(target).map(|_| main.vertex_name(target).to_string()).unwrap_or_default(),
        ));
    }
    let witness = walk(inst, poly)?;
    Ok(Decision {
        answer: witness.exit == Some(target),
        witness,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Claim {
    TerminatesAt(VertexId),
    DoesNotTerminate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub accepted: bool,
    pub reason: Option<String>,
    /// Elementary check operations spent.
    pub ops: u64,
}

/// Check, by arithmetic alone, that `x` is a finished run-like flow whose
/// classification entails `claim`.
pub fn verify_witness(inst: &Instance, x: &Flow, claim: Claim, poly: OverflowPoly) -> Result<Verdict> {
    check(inst, x)?;
    let mut meter = Meter::default();
    let st = classify(inst, x, &poly.thresholds(inst), &mut meter);
    let reject = |reason: String, meter: Meter| Verdict {
        accepted: false,
        reason: Some(reason),
        ops: meter.ops,
    };
    let main = inst.component(0);
    let verdict = match (&st.classification, claim) {
        (Classification::NotRunLike(reasons), _) => {
            let codes: Vec<&str> = reasons.iter().map(|r| r.code()).collect();
            reject(format!("not run-like: {}", codes.join(", ")), meter)
        }
        (c, _) if !c.is_finished() => reject(format!("not finished: {}", c.name()), meter),
        (Classification::Complete { exit }, Claim::TerminatesAt(d)) if *exit == d => Verdict {
            accepted: true,
            reason: None,
            ops: meter.ops,
        },
        (Classification::Complete { exit }, _) => reject(
            format!("claim mismatch: witness is complete at {}", main.vertex_name(*exit)),
            meter,
        ),
        (_, Claim::DoesNotTerminate) => Verdict {
            accepted: true,
            reason: None,
            ops: meter.ops,
        },
        (c, Claim::TerminatesAt(_)) => reject(format!("claim mismatch: witness is {}", c.name()), meter),
    };
    Ok(verdict)
}
