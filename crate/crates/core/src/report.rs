//! JSON renderings shared by the command line and the bindings. Components
//! are 1-based, vertices and edges are named.

use serde_json::{json, Map, Value};

use crate::flow::{flow_to_json, Classification};
use crate::line::FinishedWitness;
use crate::model::Instance;
use crate::semantics::{RunOutcome, State};

pub fn outcome_json(inst: &Instance, outcome: &RunOutcome) -> Value {
    match *outcome {
        RunOutcome::Terminated { exit, time } => {
            json!({"outcome": "terminated", "exit": inst.component(0).vertex_name(exit), "T": time})
        }
        RunOutcome::StackBlowup { time, depth } => json!({"outcome": "stack_blowup", "t": time, "depth": depth}),
        RunOutcome::LoopOverflow { component, edge, time } => json!({
            "outcome": "loop_overflow",
            "t": time,
            "component": component + 1,
            "edge": inst.component(component).edge_key(edge),
        }),
        RunOutcome::Inconclusive { steps } => json!({"outcome": "inconclusive", "steps": steps}),
    }
}

pub fn state_json(inst: &Instance, t: u64, st: &State) -> Value {
    let stack: Vec<Value> = st
        .stack
        .iter()
        .map(|f| {
            let c = inst.component(f.component);
            json!({"component": f.component + 1, "box": c.boxes()[f.bx].name, "call": c.vertex_name(f.call)})
        })
        .collect();
    json!({
        "t": t,
        "stack": stack,
        "component": st.component + 1,
        "vertex": inst.component(st.component).vertex_name(st.vertex),
        "switches": st.switches.to_bit_string(),
    })
}

pub fn classification_json(inst: &Instance, c: &Classification) -> Value {
    let mut m = Map::new();
    m.insert("classification".into(), c.name().into());
    match *c {
        Classification::Complete { exit } => {
            m.insert("exit".into(), inst.component(0).vertex_name(exit).into());
        }
        Classification::JustOverflowing { component, edge } => {
            m.insert("component".into(), (component + 1).into());
            m.insert("edge".into(), inst.component(component).edge_key(edge).into());
        }
        _ => {}
    }
    Value::Object(m)
}

pub fn witness_json(inst: &Instance, w: &FinishedWitness) -> Value {
    let mut v = classification_json(inst, &w.classification);
    let m = v.as_object_mut().unwrap();
    m.insert("val".into(), w.val.into());
    m.insert("steps".into(), w.steps.into());
    m.insert("flows".into(), flow_to_json(inst, &w.flow)["flows"].clone());
    v
}
