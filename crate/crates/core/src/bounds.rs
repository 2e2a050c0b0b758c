//! The polynomial `p` behind the overflow threshold `2^p(|V_l|) + 1`.

use std::fmt;
use std::str::FromStr;

use crate::model::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OverflowPoly {
    /// `p(n) = n`.
    #[default]
    Linear,
    /// `p(n) = n^2`.
    Quadratic,
    /// `p(n) = C`, `C >= 1`.
    Const(u32),
}

impl OverflowPoly {
    pub fn eval(self, n: usize) -> u64 {
        match self {
            OverflowPoly::Linear => n as u64,
            OverflowPoly::Quadratic => (n as u64).saturating_mul(n as u64),
            OverflowPoly::Const(c) => c as u64,
        }
    }

    /// `2^p(n) + 1`, saturating at `u64::MAX`.
    pub fn threshold(self, n: usize) -> u64 {
        let p = self.eval(n);
        if p >= 63 {
            u64::MAX
        } else {
            (1u64 << p) + 1
        }
    }

    /// Per-component thresholds for an instance.
    pub fn thresholds(self, inst: &Instance) -> Vec<u64> {
        inst.components().iter().map(|c| self.threshold(c.vertex_count())).collect()
    }

    /// The coordinate bound `N = 2^p(max_l |V_l|) + 1` of the finite flow space.
    pub fn coordinate_bound(self, inst: &Instance) -> u64 {
        let n = inst.components().iter().map(|c| c.vertex_count()).max().unwrap_or(0);
        self.threshold(n)
    }
}

impl fmt::Display for OverflowPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OverflowPoly::Linear => write!(f, "linear"),
            OverflowPoly::Quadratic => write!(f, "quadratic"),
            OverflowPoly::Const(c) => write!(f, "const:{c}"),
        }
    }
}

impl FromStr for OverflowPoly {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(OverflowPoly::Linear),
            "quadratic" => Ok(OverflowPoly::Quadratic),
            _ => {
                let c = s
                    .strip_prefix("const:")
                    .ok_or_else(|| format!("unknown polynomial {s:?} (linear | quadratic | const:C)"))?;
                let c: u32 = c.parse().map_err(|_| format!("bad constant in {s:?}"))?;
                if c == 0 {
                    return Err("const:C requires C >= 1".into());
                }
                Ok(OverflowPoly::Const(c))
            }
        }
    }
}
