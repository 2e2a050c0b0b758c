use std::fmt;

use crate::error::{Error, Result};
use crate::model::{EdgeId, Instance};

/// One nonnegative integer vector per component, indexed by the component's
/// canonical edge order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Flow {
    parts: Vec<Vec<u64>>,
}

impl Flow {
    pub fn zero(inst: &Instance) -> Flow {
        Flow {
            parts: inst.components().iter().map(|c| vec![0; c.edge_count()]).collect(),
        }
    }

    /// Build from raw vectors, checking the dimensions against `inst`.
    pub fn from_parts(inst: &Instance, parts: Vec<Vec<u64>>) -> Result<Flow> {
        check_shape(inst, &parts)?;
        Ok(Flow { parts })
    }

    pub fn parts(&self) -> &[Vec<u64>] {
        &self.parts
    }

    pub fn part(&self, l: usize) -> &[u64] {
        &self.parts[l]
    }

    pub fn get(&self, l: usize, e: EdgeId) -> u64 {
        self.parts[l][e]
    }

    pub fn set(&mut self, l: usize, e: EdgeId, value: u64) {
        self.parts[l][e] = value;
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| p.iter().all(|&x| x == 0))
    }

    pub fn part_is_zero(&self, l: usize) -> bool {
        self.parts[l].iter().all(|&x| x == 0)
    }

    /// `X + U_{l,e}`.
    pub fn plus_unit(&self, l: usize, e: EdgeId) -> Flow {
        let mut out = self.clone();
        out.parts[l][e] += 1;
        out
    }

    /// `X - U_{l,e}`, defined only when the coordinate is positive.
    pub fn minus_unit(&self, l: usize, e: EdgeId) -> Option<Flow> {
        let x = self.parts[l][e];
        if x == 0 {
            return None;
        }
        let mut out = self.clone();
        out.parts[l][e] = x - 1;
        Some(out)
    }

    pub fn increment(&mut self, l: usize, e: EdgeId) -> u64 {
        self.parts[l][e] += 1;
        self.parts[l][e]
    }

    /// Sum of every coordinate of every vector.
    pub fn val(&self) -> u64 {
        self.parts.iter().flatten().sum()
    }

    pub fn max_coordinate(&self) -> u64 {
        self.parts.iter().flatten().copied().max().unwrap_or(0)
    }

    /// All coordinates in canonical order, component by component.
    pub fn coordinates(&self) -> impl Iterator<Item = u64> + '_ {
        self.parts.iter().flatten().copied()
    }

    /// Inverse of [`Flow::coordinates`].
    pub fn from_coordinates(inst: &Instance, coords: &[u64]) -> Result<Flow> {
        let total = inst.total_edges();
        if coords.len() != total {
            return Err(Error::Encoding(format!("expected {total} coordinates, got {}", coords.len())));
        }
        let mut parts = Vec::with_capacity(inst.len());
        let mut at = 0;
        for c in inst.components() {
            parts.push(coords[at..at + c.edge_count()].to_vec());
            at += c.edge_count();
        }
        Ok(Flow { parts })
    }
}

pub(crate) fn check_shape(inst: &Instance, parts: &[Vec<u64>]) -> Result<()> {
    if parts.len() != inst.len() {
        return Err(Error::ComponentCountMismatch {
            expected: inst.len(),
            found: parts.len(),
        });
    }
    for (l, (p, c)) in parts.iter().zip(inst.components()).enumerate() {
        if p.len() != c.edge_count() {
            return Err(Error::DimensionMismatch {
                component: l + 1,
                expected: c.edge_count(),
                found: p.len(),
            });
        }
    }
    Ok(())
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .parts
            .iter()
            .map(|p| format!("({})", p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "({})", parts.join(","))
    }
}
