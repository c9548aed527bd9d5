//! Classical polynomials P: F_p^n -> F_p in the monomial basis.
//!
//! Exponents are kept strictly below p because x^p = x on F_p, so the monomials
//! x^e with e_j < p and |e| <= d form a basis of the degree-d polynomials.

mod phase;
mod search;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::{self, Caps};
use crate::error::{Error, Result};
use crate::space::Space;
use crate::table::FieldTable;

pub use phase::{
    classical_phase, default_phase_tolerance, is_phase_polynomial, phase_catalogue,
    symmetric_phase, symmetric_table, PhaseCatalogue, PhasePolynomial,
};
pub use search::{best_classical_correlation, hill_climb, ClassicalSearch, HillClimb};

/// A polynomial as a sparse map from exponent vectors to nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    space: Space,
    degree_bound: usize,
    terms: BTreeMap<Vec<u32>, u32>,
}

impl Polynomial {
    /// Builds a polynomial; coefficients are reduced mod p, repeated exponent vectors
    /// are merged and zero terms dropped.
    pub fn new<I>(space: Space, degree_bound: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, u32)>,
    {
        let field = space.field();
        let mut map: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != space.n() {
                return Err(Error::DimensionMismatch {
                    expected: space.n(),
                    found: e.len(),
                });
            }
            for &x in &e {
                field.check(x as u64)?;
            }
            let total: usize = e.iter().map(|&x| x as usize).sum();
            if total > degree_bound {
                return Err(Error::Precondition(format!(
                    "monomial of degree {total} exceeds degree bound {degree_bound}"
                )));
            }
            let entry = map.entry(e).or_insert(0);
            *entry = field.add(*entry, c % space.p());
        }
        map.retain(|_, c| *c != 0);
        Ok(Polynomial {
            space,
            degree_bound,
            terms: map,
        })
    }

    pub fn zero(space: Space, degree_bound: usize) -> Self {
        Polynomial {
            space,
            degree_bound,
            terms: BTreeMap::new(),
        }
    }

    /// The linear form x -> coeffs . x.
    pub fn linear(space: Space, coeffs: &[u32]) -> Result<Self> {
        let terms = coeffs.iter().enumerate().map(|(j, &c)| {
            let mut e = vec![0; space.n()];
            e[j] = 1;
            (e, c)
        });
        Polynomial::new(space, 1, terms)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], u32)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest total degree among the terms (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn with_degree_bound(mut self, degree_bound: usize) -> Result<Self> {
        if self.degree() > degree_bound {
            return Err(Error::Precondition(format!(
                "polynomial has degree {} above the requested bound {degree_bound}",
                self.degree()
            )));
        }
        self.degree_bound = degree_bound;
        Ok(self)
    }

    /// Drop every term of total degree above `d`.
    pub fn truncate(&self, d: usize) -> Polynomial {
        Polynomial {
            space: self.space,
            degree_bound: d,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().map(|&x| x as usize).sum::<usize>() <= d)
                .map(|(e, &c)| (e.clone(), c))
                .collect(),
        }
    }

    /// P(x) for a point index.
    pub fn eval_index(&self, x: usize) -> u32 {
        let digits = self.space.digits(x);
        self.eval_digits(&digits)
    }

    /// P(x) for coordinates.
    pub fn eval(&self, coords: &[u32]) -> Result<u32> {
        self.space.point_index(coords)?;
        Ok(self.eval_digits(coords))
    }

    fn eval_digits(&self, digits: &[u32]) -> u32 {
        let f = self.space.field();
        self.terms.iter().fold(0, |acc, (e, &c)| {
            let m = e
                .iter()
                .zip(digits)
                .fold(1, |m, (&k, &x)| f.mul(m, f.pow(x, k)));
            f.add(acc, f.mul(c, m))
        })
    }

    pub fn to_table(&self) -> FieldTable {
        FieldTable::from_fn(self.space, |x| self.eval_index(x))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermDocument {
    pub e: Vec<u32>,
    pub c: u32,
}

/// Text form `{"p", "n", "d", "terms": [{"e": [...], "c": int}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialDocument {
    pub p: u32,
    pub n: usize,
    pub d: usize,
    pub terms: Vec<TermDocument>,
}

impl From<&Polynomial> for PolynomialDocument {
    fn from(poly: &Polynomial) -> Self {
        PolynomialDocument {
            p: poly.space.p(),
            n: poly.space.n(),
            d: poly.degree_bound,
            terms: poly
                .terms
                .iter()
                .map(|(e, &c)| TermDocument { e: e.clone(), c })
                .collect(),
        }
    }
}

impl TryFrom<PolynomialDocument> for Polynomial {
    type Error = Error;

    fn try_from(doc: PolynomialDocument) -> Result<Self> {
        let space = Space::of(doc.p, doc.n)?;
        let field = space.field();
        for t in &doc.terms {
            field.check(t.c as u64)?;
        }
        Polynomial::new(space, doc.d, doc.terms.into_iter().map(|t| (t.e, t.c)))
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialDocument::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = PolynomialDocument::deserialize(d)?;
        Polynomial::try_from(doc).map_err(serde::de::Error::custom)
    }
}

/// Number of monomials x^e with e_j < p and |e| <= d, i.e. dim Poly_d(F_p^n).
pub fn poly_dimension(p: u32, n: usize, d: usize) -> u128 {
    // ways[s] = number of exponent prefixes with total s
    let mut ways = vec![0u128; d + 1];
    ways[0] = 1;
    for _ in 0..n {
        let mut next = vec![0u128; d + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for e in 0..p as usize {
                if s + e > d {
                    break;
                }
                next[s + e] += w;
            }
        }
        ways = next;
    }
    ways.iter().sum()
}

/// Admissible exponent vectors of degree at most d, ordered by total degree and
/// then lexicographically.
pub fn monomials(space: Space, d: usize) -> Vec<Vec<u32>> {
    fn rec(p: u32, n: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for e in 0..p.min(left as u32 + 1) {
            cur.push(e);
            rec(p, n, left - e as usize, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(space.p(), space.n(), d, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| {
        let da: u32 = a.iter().sum();
        let db: u32 = b.iter().sum();
        da.cmp(&db).then_with(|| b.cmp(a))
    });
    out
}

/// The monomials of Poly_d together with their value tables.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    space: Space,
    degree: usize,
    exponents: Vec<Vec<u32>>,
    tables: Vec<Vec<u32>>,
}

impl MonomialBasis {
    pub fn new(space: Space, degree: usize) -> Self {
        let exponents = monomials(space, degree);
        let f = space.field();
        let tables = exponents
            .iter()
            .map(|e| {
                (0..space.size())
                    .map(|x| {
                        space
                            .digits(x)
                            .iter()
                            .zip(e)
                            .fold(1, |m, (&xv, &k)| f.mul(m, f.pow(xv, k)))
                    })
                    .collect()
            })
            .collect();
        MonomialBasis {
            space,
            degree,
            exponents,
            tables,
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn table(&self, i: usize) -> &[u32] {
        &self.tables[i]
    }

    pub fn monomial_degree(&self, i: usize) -> usize {
        self.exponents[i].iter().map(|&x| x as usize).sum()
    }

    pub fn polynomial(&self, coeffs: &[u32]) -> Polynomial {
        Polynomial::new(
            self.space,
            self.degree,
            self.exponents.iter().cloned().zip(coeffs.iter().copied()),
        )
        .expect("basis exponents are admissible")
    }

    /// Residue table of sum_i coeffs[i] * m_i.
    pub fn table_of(&self, coeffs: &[u32]) -> Vec<u32> {
        let p = self.space.p();
        let mut out = vec![0u32; self.space.size()];
        for (c, t) in coeffs.iter().zip(&self.tables) {
            if *c == 0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(t) {
                *o = (*o + c * v) % p;
            }
        }
        out
    }
}

/// Streams every polynomial of Poly_d exactly once, in base-p counter order over
/// the coefficient vector (monomial order of [`monomials`]).
pub struct PolynomialStream {
    basis: MonomialBasis,
    coeffs: Vec<u32>,
    done: bool,
}

impl Iterator for PolynomialStream {
    type Item = Polynomial;

    fn next(&mut self) -> Option<Polynomial> {
        if self.done {
            return None;
        }
        let out = self.basis.polynomial(&self.coeffs);
        let p = self.basis.space.p();
        self.done = true;
        for c in self.coeffs.iter_mut() {
            *c += 1;
            if *c < p {
                self.done = false;
                break;
            }
            *c = 0;
        }
        Some(out)
    }
}

pub fn enumerate_polynomials(space: Space, d: usize, caps: &Caps) -> Result<PolynomialStream> {
    let dim = poly_dimension(space.p(), space.n(), d);
    let count = caps::pow(space.p() as u64, dim as usize);
    caps::check(
        "polynomial enumeration",
        count,
        caps.exhaustive_candidates,
    )?;
    let basis = MonomialBasis::new(space, d);
    let len = basis.len();
    Ok(PolynomialStream {
        basis,
        coeffs: vec![0; len],
        done: false,
    })
}

/// Recovers the unique polynomial (exponents < p) agreeing with a table.
pub fn interpolate(table: &FieldTable) -> Polynomial {
    let space = table.space();
    let f = space.field();
    let p = space.p() as usize;
    // inverse of the Vandermonde matrix V[x][e] = x^e over F_p
    let mut aug: Vec<Vec<u32>> = (0..p)
        .map(|x| {
            let mut row: Vec<u32> = (0..p).map(|e| f.pow(x as u32, e as u32)).collect();
            row.extend((0..p).map(|j| u32::from(j == x)));
            row
        })
        .collect();
    for col in 0..p {
        let pivot = (col..p).find(|&r| aug[r][col] != 0).expect("Vandermonde is invertible");
        aug.swap(col, pivot);
        let inv = f.inv(aug[col][col]).unwrap();
        for v in aug[col].iter_mut() {
            *v = f.mul(*v, inv);
        }
        for r in 0..p {
            if r != col && aug[r][col] != 0 {
                let factor = aug[r][col];
                for k in 0..2 * p {
                    let sub = f.mul(factor, aug[col][k]);
                    aug[r][k] = f.sub(aug[r][k], sub);
                }
            }
        }
    }
    let inv: Vec<Vec<u32>> = aug.iter().map(|row| row[p..].to_vec()).collect();

    let mut data = table.values().to_vec();
    let size = data.len();
    let mut fiber = vec![0u32; p];
    let mut stride = 1;
    for _ in 0..space.n() {
        let block = stride * p;
        for base in (0..size).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (t, slot) in fiber.iter_mut().enumerate() {
                    *slot = data[start + t * stride];
                }
                for (e, row) in inv.iter().enumerate() {
                    let v = row
                        .iter()
                        .zip(&fiber)
                        .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)));
                    data[start + e * stride] = v;
                }
            }
        }
        stride = block;
    }
    let terms: Vec<(Vec<u32>, u32)> = data
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(idx, &c)| (space.digits(idx), c))
        .collect();
    let degree = terms
        .iter()
        .map(|(e, _)| e.iter().map(|&x| x as usize).sum())
        .max()
        .unwrap_or(0);
    Polynomial::new(space, degree, terms).expect("interpolated exponents are admissible")
}

/// Which shift tuples a degree check visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// Every (d+1)-tuple of shifts.
    Full,
    /// Multisets of standard basis vectors only.
    BasisDirections,
}

/// Whether all (d+1)-fold additive derivatives of `table` vanish.
pub fn degree_at_most(
    table: &FieldTable,
    d: usize,
    mode: DerivativeMode,
    caps: &Caps,
) -> Result<bool> {
    let space = table.space();
    match mode {
        DerivativeMode::Full => {
            let tuples = caps::pow(space.size() as u64, d + 1);
            caps::check("full-mode degree check", tuples, caps.shift_tuples)?;
            Ok(vanishes_full(table, d + 1))
        }
        DerivativeMode::BasisDirections => Ok(vanishes_basis(table, d + 1, 0)),
    }
}

fn vanishes_full(t: &FieldTable, remaining: usize) -> bool {
    if remaining == 0 {
        return t.is_zero();
    }
    // Delta_0 is identically zero, so h = 0 never fails
    (1..t.space().size())
        .into_par_iter()
        .all(|h| vanishes_full(&t.add_derivative(h), remaining - 1))
}

fn vanishes_basis(t: &FieldTable, remaining: usize, start: usize) -> bool {
    if remaining == 0 {
        return t.is_zero();
    }
    let space = t.space();
    (start..space.n()).all(|j| vanishes_basis(&t.add_derivative(space.basis(j)), remaining - 1, j))
}
