//! `{"flows": {"<component>": {"u->v": n, "b:o->b:d": n}}}`, 1-based
//! component keys, omitted coordinates are zero.

use std::collections::HashMap;

use serde_json::{Map, Value};

use super::Flow;
use crate::error::{Error, Result};
use crate::model::Instance;

/// Nonzero coordinates only, components and edges in canonical order.
pub fn flow_to_json(inst: &Instance, x: &Flow) -> Value {
    let mut flows = Map::new();
    for (l, c) in inst.components().iter().enumerate() {
        let mut part = Map::new();
        for (e, &v) in x.part(l).iter().enumerate() {
            if v > 0 {
                part.insert(c.edge_key(e), Value::from(v));
            }
        }
        flows.insert((l + 1).to_string(), Value::Object(part));
    }
    let mut doc = Map::new();
    doc.insert("flows".into(), Value::Object(flows));
    Value::Object(doc)
}

pub fn flow_from_json(inst: &Instance, doc: &Value) -> Result<Flow> {
    let bad = |m: String| Error::FlowFormat(m);
    let flows = doc
        .get("flows")
        .and_then(Value::as_object)
        .ok_or_else(|| bad("missing \"flows\" object".into()))?;
    let mut x = Flow::zero(inst);
    for (key, part) in flows {
        let l: usize = key.parse().map_err(|_| bad(format!("bad component key {key:?}")))?;
        if l == 0 || l > inst.len() {
            return Err(bad(format!("no component {l}")));
        }
        let c = inst.component(l - 1);
        let index: HashMap<String, usize> = (0..c.edge_count()).map(|e| (c.edge_key(e), e)).collect();
        let part = part
            .as_object()
            .ok_or_else(|| bad(format!("component {l}: expected an object")))?;
        for (edge, v) in part {
            let &e = index
                .get(edge)
                .ok_or_else(|| bad(format!("component {l}: unknown edge {edge:?}")))?;
            let v = v
                .as_u64()
                .ok_or_else(|| bad(format!("component {l}: {edge}: expected a nonnegative integer")))?;
            x.set(l - 1, e, v);
        }
    }
    Ok(x)
}

pub fn parse_flow(inst: &Instance, text: &str) -> Result<Flow> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::FlowFormat(e.to_string()))?;
    flow_from_json(inst, &doc)
}
