//! Maximizing |<g, e_F(P)>| over P in Poly_d.
//!
//! The affine part of P is handled by one Fourier transform: with N the part of P
//! of degree >= 2, <g, e_F(N + xi.x)> is the xi-th coefficient of g conj(e_F(N)).

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{interpolate, MonomialBasis};
use crate::caps::{self, Caps};
use crate::error::Result;
use crate::fourier;
use crate::random;
use crate::table::{FieldTable, FunctionTable};

/// Best polynomial found: coefficients in basis order, and <g, e_F(P)>.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSearch {
    pub coeffs: Vec<u32>,
    pub inner: Complex64,
    /// Polynomials covered (each Fourier transform covers p^{n+1} of them).
    pub evals: u128,
}

impl ClassicalSearch {
    pub fn value(&self) -> f64 {
        self.inner.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HillClimb {
    pub restarts: usize,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for HillClimb {
    fn default() -> Self {
        HillClimb {
            restarts: 4,
            max_steps: 64,
            seed: 0,
        }
    }
}

struct Layout {
    /// Basis positions of monomials of degree >= 2.
    high: Vec<usize>,
    /// Basis position of x_j, if linear monomials are present.
    linear: Vec<Option<usize>>,
}

fn layout(basis: &MonomialBasis) -> Layout {
    let n = basis.space().n();
    let mut high = Vec::new();
    let mut linear = vec![None; n];
    for (i, e) in basis.exponents().iter().enumerate() {
        match basis.monomial_degree(i) {
            0 => {}
            1 => {
                let j = e.iter().position(|&k| k == 1).expect("linear monomial");
                linear[j] = Some(i);
            }
            _ => high.push(i),
        }
    }
    Layout { high, linear }
}

/// Score of a high-degree part: best affine completion and its inner product.
fn score(g: &FunctionTable, basis: &MonomialBasis, lay: &Layout, high: &[u32]) -> (usize, Complex64) {
    let space = basis.space();
    let mut coeffs = vec![0u32; basis.len()];
    for (&pos, &c) in lay.high.iter().zip(high) {
        coeffs[pos] = c;
    }
    let residues = basis.table_of(&coeffs);
    let chars = space.field().characters();
    let h = FunctionTable::from_fn(space, |x| g.get(x) * chars[residues[x] as usize].conj());
    if basis.degree() == 0 {
        return (0, h.mean());
    }
    let spectrum = fourier::transform(&h);
    let mut best = 0;
    for (xi, v) in spectrum.iter().enumerate() {
        if v.norm() > spectrum[best].norm() + 1e-15 {
            best = xi;
        }
    }
    (best, spectrum[best])
}

fn assemble(basis: &MonomialBasis, lay: &Layout, high: &[u32], xi: usize) -> Vec<u32> {
    let space = basis.space();
    let mut coeffs = vec![0u32; basis.len()];
    for (&pos, &c) in lay.high.iter().zip(high) {
        coeffs[pos] = c;
    }
    for (j, &d) in space.digits(xi).iter().enumerate() {
        if let Some(pos) = lay.linear[j] {
            coeffs[pos] = d;
        }
    }
    coeffs
}

fn covered(basis: &MonomialBasis) -> u128 {
    let space = basis.space();
    if basis.degree() == 0 {
        1
    } else {
        space.size() as u128
    }
}

/// Exact maximum over all of Poly_d (d = basis degree) of |<g, e_F(P)>|.
/// The cap applies to the full p^{dim Poly_d} candidate count.
pub fn best_classical_correlation(
    g: &FunctionTable,
    basis: &MonomialBasis,
    caps: &Caps,
) -> Result<ClassicalSearch> {
    let space = basis.space();
    let p = space.p() as u64;
    caps::check(
        "exhaustive classical search",
        caps::pow(p, basis.len()),
        caps.exhaustive_candidates,
    )?;
    let lay = layout(basis);
    let combos = caps::pow(p, lay.high.len()) as u64;
    let decode = |mut code: u64| -> Vec<u32> {
        (0..lay.high.len())
            .map(|_| {
                let c = (code % p) as u32;
                code /= p;
                c
            })
            .collect()
    };
    let (code, xi, inner) = (0..combos)
        .into_par_iter()
        .map(|code| {
            let (xi, inner) = score(g, basis, &lay, &decode(code));
            (code, xi, inner)
        })
        .reduce(
            || (u64::MAX, 0, Complex64::new(-1.0, 0.0)),
            |a, b| {
                // larger modulus wins, earlier code breaks ties, so the result is order independent
                let (na, nb) = (a.2.norm(), b.2.norm());
                if a.0 == u64::MAX {
                    b
                } else if b.0 == u64::MAX {
                    a
                } else if nb > na + 1e-15 || ((nb - na).abs() <= 1e-15 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    Ok(ClassicalSearch {
        coeffs: assemble(basis, &lay, &decode(code), xi),
        inner,
        evals: combos as u128 * covered(basis),
    })
}

/// High-degree coefficients of the polynomial obtained by rounding the arguments of
/// g (after aligning g(0) to 1) to p-th roots of unity and interpolating.
fn rounding_seed(g: &FunctionTable, basis: &MonomialBasis, lay: &Layout) -> Vec<u32> {
    let space = basis.space();
    let p = space.p();
    let anchor = g.get(0);
    let align = if anchor.norm() > 0.0 {
        anchor.conj() / anchor.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let residues: Vec<u32> = g
        .values()
        .iter()
        .map(|&v| {
            let turns = (v * align).arg() / std::f64::consts::TAU;
            ((turns * p as f64).round() as i64).rem_euclid(p as i64) as u32
        })
        .collect();
    let poly = interpolate(&FieldTable::new(space, residues).expect("residues reduced"));
    let mut out = vec![0u32; lay.high.len()];
    for (e, c) in poly.terms() {
        if let Some(i) = basis.exponents().iter().position(|b| b.as_slice() == e) {
            if let Some(k) = lay.high.iter().position(|&pos| pos == i) {
                out[k] = c;
            }
        }
    }
    out
}

/// Local search over the degree >= 2 coefficients, each state scored by its best
/// affine completion. Starts from zero, the rounding seed, then `restarts` random states.
/// The result is a lower bound on the true maximum.
pub fn hill_climb(g: &FunctionTable, basis: &MonomialBasis, params: &HillClimb) -> ClassicalSearch {
    let space = basis.space();
    let p = space.p();
    let lay = layout(basis);
    let mut rng = random::rng(params.seed);
    let mut starts = vec![vec![0; lay.high.len()], rounding_seed(g, basis, &lay)];
    for _ in 0..params.restarts {
        starts.push((0..lay.high.len()).map(|_| rng.gen_range(0..p)).collect());
    }
    let mut evals: u128 = 0;
    let mut best: Option<(Vec<u32>, usize, Complex64)> = None;
    for start in starts {
        let mut cur = start;
        let (mut xi, mut inner) = score(g, basis, &lay, &cur);
        evals += covered(basis);
        for _ in 0..params.max_steps {
            let moves: Vec<(usize, u32)> = (0..cur.len())
                .flat_map(|k| (1..p).map(move |delta| (k, delta)))
                .collect();
            let scored: Vec<(usize, Complex64, Vec<u32>)> = moves
                .par_iter()
                .map(|&(k, delta)| {
                    let mut next = cur.clone();
                    next[k] = (next[k] + delta) % p;
                    let (xi, inner) = score(g, basis, &lay, &next);
                    (xi, inner, next)
                })
                .collect();
            evals += scored.len() as u128 * covered(basis);
            let mut improved = false;
            for (nxi, ninner, next) in scored {
                if ninner.norm() > inner.norm() + 1e-12 {
                    xi = nxi;
                    inner = ninner;
                    cur = next;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        let better = match &best {
            None => true,
            Some((_, _, b)) => inner.norm() > b.norm() + 1e-12,
        };
        if better {
            best = Some((cur, xi, inner));
        }
    }
    let (high, xi, inner) = best.expect("at least one start");
    ClassicalSearch {
        coeffs: assemble(basis, &lay, &high, xi),
        inner,
        evals,
    }
}
