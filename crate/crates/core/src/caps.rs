//! Work caps for exhaustive computations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bounds on the number of elementary evaluations an exact computation may
/// perform before it is refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Summands of the literal Gowers average.
    pub direct_summands: u128,
    /// Candidates scanned by exhaustive searches (polynomials, catalogue members).
    pub exhaustive_candidates: u128,
    /// Shift tuples visited by full-mode degree checks.
    pub shift_tuples: u128,
    /// Table-sized passes for recursive norms and statistics.
    pub table_passes: u128,
    /// Coefficient vectors averaged by exact subspace means.
    pub subspace_points: u128,
    /// Pattern evaluations for cube averages.
    pub pattern_evals: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            direct_summands: 1 << 26,
            exhaustive_candidates: 1 << 20,
            shift_tuples: 1 << 20,
            table_passes: 1 << 22,
            subspace_points: 1 << 24,
            pattern_evals: 1 << 30,
        }
    }
}

impl Caps {
    /// Ceiling that no override may exceed.
    pub fn hard_limit() -> Self {
        Caps {
            direct_summands: 1 << 36,
            exhaustive_candidates: 1 << 30,
            shift_tuples: 1 << 30,
            table_passes: 1 << 32,
            subspace_points: 1 << 32,
            pattern_evals: 1 << 38,
        }
    }

    pub fn unlimited() -> Self {
        Caps {
            direct_summands: u128::MAX,
            exhaustive_candidates: u128::MAX,
            shift_tuples: u128::MAX,
            table_passes: u128::MAX,
            subspace_points: u128::MAX,
            pattern_evals: u128::MAX,
        }
    }

    /// Every field multiplied by `factor`, clamped at the hard limit.
    pub fn scaled(&self, factor: u128) -> Self {
        let h = Caps::hard_limit();
        let f = |a: u128, b: u128| a.saturating_mul(factor).min(b);
        Caps {
            direct_summands: f(self.direct_summands, h.direct_summands),
            exhaustive_candidates: f(self.exhaustive_candidates, h.exhaustive_candidates),
            shift_tuples: f(self.shift_tuples, h.shift_tuples),
            table_passes: f(self.table_passes, h.table_passes),
            subspace_points: f(self.subspace_points, h.subspace_points),
            pattern_evals: f(self.pattern_evals, h.pattern_evals),
        }
    }
}

/// p^e as u128, saturating.
pub fn pow(p: u64, e: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..e {
        acc = acc.saturating_mul(p as u128);
    }
    acc
}

pub fn check(what: &'static str, required: u128, cap: u128) -> Result<()> {
    if required > cap {
        Err(Error::CapExceeded {
            what,
            required,
            cap,
        })
    } else {
        Ok(())
    }
}
