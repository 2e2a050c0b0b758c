//! `S`, `P` and `V` over fixed-width bit strings.
//!
//! A point is the concatenation of all coordinates in canonical order,
//! component by component, each written MSB-first in `w = ⌈log2(N+1)⌉`
//! bits. Points with a coordinate above `N` are isolated.

use super::{next_unit, prev_unit};
use crate::bounds::OverflowPoly;
use crate::error::{Error, Result};
use crate::flow::{classify, Classification, Flow, Meter};
use crate::model::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Encoding {
    pub coordinates: usize,
    /// Bits per coordinate.
    pub w: u32,
    /// Largest admissible coordinate.
    pub bound: u64,
}

impl Encoding {
    pub fn new(inst: &Instance, poly: OverflowPoly) -> Self {
        let bound = poly.coordinate_bound(inst);
        Encoding {
            coordinates: inst.total_edges(),
            w: 64 - bound.leading_zeros(),
            bound,
        }
    }

    pub fn width(&self) -> usize {
        self.coordinates * self.w as usize
    }

    /// Coordinates may exceed `bound` but must fit in `w` bits.
    pub fn encode(&self, coords: &[u64]) -> Result<Vec<bool>> {
        if coords.len() != self.coordinates {
            return Err(Error::Encoding(format!(
                "expected {} coordinates, got {}",
                self.coordinates,
                coords.len()
            )));
        }
        let mut bits = Vec::with_capacity(self.width());
        for &c in coords {
            if self.w < 64 && c >> self.w != 0 {
                return Err(Error::Encoding(format!("coordinate {c} does not fit in {} bits", self.w)));
            }
            for i in (0..self.w).rev() {
                bits.push(c >> i & 1 == 1);
            }
        }
        Ok(bits)
    }

    pub fn decode(&self, bits: &[bool]) -> Result<Vec<u64>> {
        if bits.len() != self.width() {
            return Err(Error::Encoding(format!("expected {} bits, got {}", self.width(), bits.len())));
        }
        Ok(bits
            .chunks(self.w.max(1) as usize)
            .take(self.coordinates)
            .map(|chunk| chunk.iter().fold(0u64, |a, &b| a << 1 | b as u64))
            .collect())
    }

    /// The bit string as one big-endian hexadecimal number of
    /// `⌈width/4⌉` digits.
    pub fn to_hex(&self, bits: &[bool]) -> String {
        let n = bits.len();
        let digits = n.div_ceil(4);
        let pad = digits * 4 - n;
        let padded: Vec<bool> = std::iter::repeat_n(false, pad).chain(bits.iter().copied()).collect();
        padded
            .chunks(4)
            .map(|c| {
                let v = c.iter().fold(0u32, |a, &b| a << 1 | b as u32);
                std::char::from_digit(v, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(&self, hex: &str) -> Result<Vec<bool>> {
        let hex = hex.strip_prefix("0x").unwrap_or(hex);
        let n = self.width();
        let digits = n.div_ceil(4);
        if hex.len() != digits {
            return Err(Error::Encoding(format!("expected {digits} hex digits, got {}", hex.len())));
        }
        let mut bits = Vec::with_capacity(digits * 4);
        for ch in hex.chars() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| Error::Encoding(format!("bad hex digit {ch:?}")))?;
            for i in (0..4).rev() {
                bits.push(v >> i & 1 == 1);
            }
        }
        let pad = digits * 4 - n;
        if bits[..pad].iter().any(|&b| b) {
            return Err(Error::Encoding(format!("value does not fit in {n} bits")));
        }
        Ok(bits.split_off(pad))
    }
}

/// The three step functions of one instance.
pub struct Ueopl<'a> {
    inst: &'a Instance,
    thresholds: Vec<u64>,
    pub encoding: Encoding,
}

impl<'a> Ueopl<'a> {
    pub fn new(inst: &'a Instance, poly: OverflowPoly) -> Result<Self> {
        inst.require_single_entry()?;
        Ok(Ueopl {
            inst,
            thresholds: poly.thresholds(inst),
            encoding: Encoding::new(inst, poly),
        })
    }

    /// `(S(x), P(x))` on decoded points.
    pub fn step_pair(&self, x: &Flow) -> Result<(Flow, Flow)> {
        if x.max_coordinate() > self.encoding.bound {
            return Ok((x.clone(), x.clone()));
        }
        let st = classify(self.inst, x, &self.thresholds, &mut Meter::default());
        let s = match st.classification {
            Classification::InProgress => {
                let (i, e) = next_unit(self.inst, x, &st)?;
                x.plus_unit(i, e)
            }
            _ => x.clone(),
        };
        let p = if st.classification.is_run_like() && st.classification != Classification::PostOverflowing && !x.is_zero() {
            let (i, e) = prev_unit(self.inst, x, &st)?;
            x.minus_unit(i, e).expect("positive")
        } else {
            x.clone()
        };
        Ok((s, p))
    }

    fn decode(&self, bits: &[bool]) -> Result<Flow> {
        Flow::from_coordinates(self.inst, &self.encoding.decode(bits)?)
    }

    fn encode(&self, x: &Flow) -> Vec<bool> {
        let coords: Vec<u64> = x.coordinates().collect();
        self.encoding.encode(&coords).expect("in range")
    }

    pub fn s(&self, bits: &[bool]) -> Result<Vec<bool>> {
        let x = self.decode(bits)?;
        Ok(self.encode(&self.step_pair(&x)?.0))
    }

    pub fn p(&self, bits: &[bool]) -> Result<Vec<bool>> {
        let x = self.decode(bits)?;
        Ok(self.encode(&self.step_pair(&x)?.1))
    }

    pub fn v(&self, bits: &[bool]) -> Result<u64> {
        Ok(self.decode(bits)?.val())
    }
}

/// Result of evaluating `S`, `P`, `V` on every point.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScanReport {
    pub width: usize,
    pub points: u64,
    /// Points with an outgoing and no incoming edge.
    pub starts: Vec<u64>,
    /// `P(S(x)) != x`.
    pub u1: Vec<u64>,
    /// `x != S(x)`, `P(S(x)) = x`, `V(S(x)) <= V(x)`.
    pub uv1: Vec<u64>,
    /// `S(P(x)) != x != 0`.
    pub uv2: Vec<u64>,
    /// Points `x` that are the first half of some (UV3) pair.
    pub uv3: Vec<u64>,
    /// `0, S(0), S(S(0)), ...` until a fixed point.
    pub line: Vec<u64>,
    /// `V` along `line`.
    pub line_values: Vec<u64>,
}

impl ScanReport {
    pub fn values_strictly_increase(&self) -> bool {
        self.line_values.windows(2).all(|w| w[0] < w[1])
    }
}

/// Evaluate the step functions on all `2^width` points. Points are numbered
/// by their bit string read as a big-endian integer.
pub fn scan(inst: &Instance, poly: OverflowPoly, max_width: usize) -> Result<ScanReport> {
    let u = Ueopl::new(inst, poly)?;
    let enc = u.encoding;
    let width = enc.width();
    if width > max_width || width >= 40 {
        return Err(Error::Encoding(format!("width {width} exceeds the scan limit {max_width}")));
    }
    let n = 1u64 << width;
    let w = enc.w;
    let m = enc.coordinates;
    let mask = (1u64 << w) - 1;
    let to_flow = |idx: u64| -> Flow {
        let coords: Vec<u64> = (0..m).map(|j| idx >> (w as usize * (m - 1 - j)) & mask).collect();
        Flow::from_coordinates(inst, &coords).expect("shape")
    };
    let to_idx = |x: &Flow| -> u64 { x.coordinates().fold(0u64, |a, c| a << w | c) };

    let mut s = Vec::with_capacity(n as usize);
    let mut p = Vec::with_capacity(n as usize);
    let mut v = Vec::with_capacity(n as usize);
    for idx in 0..n {
        let x = to_flow(idx);
        let (sx, px) = u.step_pair(&x)?;
        s.push(to_idx(&sx));
        p.push(to_idx(&px));
        v.push(x.val());
    }

    let mut report = ScanReport {
        width,
        points: n,
        ..ScanReport::default()
    };
    for x in 0..n {
        let (sx, px) = (s[x as usize], p[x as usize]);
        let out_edge = sx != x && p[sx as usize] == x;
        let in_edge = px != x && s[px as usize] == x;
        if out_edge && !in_edge {
            report.starts.push(x);
        }
        if p[sx as usize] != x {
            report.u1.push(x);
        }
        if sx != x && p[sx as usize] == x && v[sx as usize] <= v[x as usize] {
            report.uv1.push(x);
        }
        if s[px as usize] != x && x != 0 {
            report.uv2.push(x);
        }
    }

    let mut moving: Vec<u64> = (0..n).filter(|&x| s[x as usize] != x).map(|x| v[x as usize]).collect();
    moving.sort_unstable();
    for x in 0..n {
        let sx = s[x as usize];
        if sx == x {
            continue;
        }
        let (lo, hi) = (v[x as usize], v[sx as usize]);
        let equal = moving.partition_point(|&y| y <= lo) - moving.partition_point(|&y| y < lo);
        let between = moving.partition_point(|&y| y < hi) - moving.partition_point(|&y| y <= lo);
        if equal > 1 || (hi > lo && between > 0) {
            report.uv3.push(x);
        }
    }

    let mut x = 0u64;
    loop {
        report.line.push(x);
        report.line_values.push(v[x as usize]);
        let sx = s[x as usize];
        if sx == x || report.line.len() as u64 > n {
            break;
        }
        x = sx;
    }
    Ok(report)
}
