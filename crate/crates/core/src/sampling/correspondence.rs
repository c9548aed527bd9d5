//! The finite correspondence identity: integrating G against the empirical
//! distribution of patterns (f(x + a_1 . v), ..., f(x + a_k . v)) over x in V equals
//! int_V G(T_{a_1 . v} f, ..., T_{a_k . v} f).
//!
//! The left side is built from a histogram of the patterns, the right side from
//! shifted tables, so the two sums are organized differently.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SamplingPlan;
use crate::error::{Error, Result};
use crate::reduce;
use crate::table::FunctionTable;

/// Functions of the k pattern values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointFunctional {
    /// z_i
    Coordinate { i: usize },
    /// z_1 z_2 ... z_k
    Product,
    /// z_1 conj(z_2) z_3 conj(z_4) ...
    AlternatingProduct,
    /// |z_i - z_j|
    AbsDiff { i: usize, j: usize },
}

impl PointFunctional {
    pub fn arity_ok(&self, k: usize) -> bool {
        match *self {
            PointFunctional::Coordinate { i } => i < k,
            PointFunctional::AbsDiff { i, j } => i < k && j < k,
            _ => k >= 1,
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        match *self {
            PointFunctional::Coordinate { i } => z[i],
            PointFunctional::Product => z.iter().product(),
            PointFunctional::AlternatingProduct => z
                .iter()
                .enumerate()
                .map(|(i, v)| if i % 2 == 1 { v.conj() } else { *v })
                .product(),
            PointFunctional::AbsDiff { i, j } => Complex64::new((z[i] - z[j]).norm(), 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub difference: f64,
    pub equal: bool,
    /// Number of distinct patterns in the empirical distribution.
    pub distinct_patterns: usize,
}

/// Checks the identity for shifts given as coefficient vectors a_i (each at most as
/// long as the plan; missing trailing coefficients are zero).
pub fn correspondence_check(
    f: &FunctionTable,
    plan: &SamplingPlan,
    g: &PointFunctional,
    shifts: &[Vec<u32>],
) -> Result<CorrespondenceReport> {
    let space = plan.space();
    space.check_same(&f.space())?;
    if !g.arity_ok(shifts.len()) {
        return Err(Error::Precondition(format!(
            "{g:?} does not accept {} pattern values",
            shifts.len()
        )));
    }
    let vectors = plan.vectors();
    let offsets = shifts
        .iter()
        .map(|a| {
            if a.len() > vectors.len() {
                return Err(Error::Precondition(format!(
                    "shift has {} coefficients, plan has {} vectors",
                    a.len(),
                    vectors.len()
                )));
            }
            if let Some(&c) = a.iter().find(|&&c| c >= space.p()) {
                return Err(Error::ResidueOutOfRange {
                    value: c as u64,
                    p: space.p(),
                });
            }
            Ok(space.combine(a, &vectors[..a.len()]))
        })
        .collect::<Result<Vec<usize>>>()?;

    // empirical pattern distribution: pattern -> number of x producing it
    let mut histogram: BTreeMap<Vec<(u64, u64)>, usize> = BTreeMap::new();
    for x in 0..space.size() {
        let key = offsets
            .iter()
            .map(|&o| {
                let v = f.get(space.add(x, o));
                (v.re.to_bits(), v.im.to_bits())
            })
            .collect();
        *histogram.entry(key).or_insert(0) += 1;
    }
    let size = space.size() as f64;
    let mut lhs = Complex64::new(0.0, 0.0);
    for (key, count) in &histogram {
        let z: Vec<Complex64> = key
            .iter()
            .map(|&(re, im)| Complex64::new(f64::from_bits(re), f64::from_bits(im)))
            .collect();
        lhs += g.eval(&z) * (*count as f64 / size);
    }

    let shifted: Vec<FunctionTable> = offsets.iter().map(|&o| f.shift(o)).collect();
    let rhs = reduce::mean_complex(space.size(), |x| {
        let z: Vec<Complex64> = shifted.iter().map(|t| t.get(x)).collect();
        g.eval(&z)
    });
    let difference = (lhs - rhs).norm();
    Ok(CorrespondenceReport {
        lhs,
        rhs,
        difference,
        equal: difference <= 1e-12,
        distinct_patterns: histogram.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::sampling::{make_scales, Growth};
    use crate::space::Space;
    use rand::Rng;

    fn plan(space: Space, seed: u64) -> SamplingPlan {
        SamplingPlan::draw(space, make_scales(Growth::Linear { step: 2 }, 3).unwrap(), seed).unwrap()
    }

    #[test]
    fn coordinate_gives_the_mean() {
        let s = Space::of(2, 8).unwrap();
        let f = random::disk_table(s, &mut random::rng(1));
        let pl = plan(s, 2);
        let rep = correspondence_check(&f, &pl, &PointFunctional::Coordinate { i: 0 }, &[vec![1, 0, 1]]).unwrap();
        assert!(rep.equal);
        assert!((rep.lhs - f.mean()).norm() < 1e-12);
    }

    #[test]
    fn random_instances_agree() {
        let s = Space::of(2, 8).unwrap();
        let mut rng = random::rng(9);
        for seed in 0..20 {
            let f = if seed % 2 == 0 {
                random::sign_table(s, &mut rng)
            } else {
                random::disk_table(s, &mut rng)
            };
            let pl = plan(s, seed);
            let k = 1 + seed as usize % 3;
            let shifts: Vec<Vec<u32>> = (0..k)
                .map(|_| (0..pl.vectors().len()).map(|_| rng.gen_range(0..2)).collect())
                .collect();
            for g in [
                PointFunctional::Product,
                PointFunctional::AlternatingProduct,
                PointFunctional::AbsDiff { i: 0, j: k - 1 },
            ] {
                let rep = correspondence_check(&f, &pl, &g, &shifts).unwrap();
                assert!(rep.equal, "{g:?}: {}", rep.difference);
            }
        }
    }

    #[test]
    fn sign_tables_collapse_to_few_patterns() {
        let s = Space::of(2, 6).unwrap();
        let f = random::sign_table(s, &mut random::rng(3));
        let pl = plan(s, 4);
        let rep = correspondence_check(&f, &pl, &PointFunctional::Product, &[vec![1], vec![0, 1]]).unwrap();
        assert!(rep.distinct_patterns <= 4);
        assert!(rep.equal);
    }

    #[test]
    fn rejects_bad_shifts() {
        let s = Space::of(2, 4).unwrap();
        let f = random::disk_table(s, &mut random::rng(5));
        let pl = plan(s, 6);
        let long = vec![1u32; pl.vectors().len() + 1];
        assert!(correspondence_check(&f, &pl, &PointFunctional::Product, &[long]).is_err());
        assert!(correspondence_check(&f, &pl, &PointFunctional::Product, &[vec![2]]).is_err());
        assert!(correspondence_check(&f, &pl, &PointFunctional::Coordinate { i: 1 }, &[vec![1]]).is_err());
    }
}
