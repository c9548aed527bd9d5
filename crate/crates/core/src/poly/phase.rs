//! Phase polynomials: classical e^{2 pi i theta} e_F(P) and explicit unit-modulus
//! tables of verified degree, plus the search catalogue built from them.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{poly_dimension, DerivativeMode, MonomialBasis, Polynomial};
use crate::caps::{self, Caps};
use crate::error::{Error, Result};
use crate::field::{self, unit_root};
use crate::io::TableDocument;
use crate::space::Space;
use crate::table::FunctionTable;

/// Default tolerance for a degree-d phase check: 1e-9 per derivative factor.
pub fn default_phase_tolerance(d: usize) -> f64 {
    1e-9 * (1u64 << (d + 1).min(62)) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhasePolynomial {
    Classical { theta: f64, poly: Polynomial },
    Explicit { table: FunctionTable, degree: usize },
}

pub fn classical_phase(theta: f64, poly: Polynomial) -> Result<PhasePolynomial> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::Precondition(format!(
            "theta must lie in [0, 1), got {theta}"
        )));
    }
    Ok(PhasePolynomial::Classical { theta, poly })
}

impl PhasePolynomial {
    /// Wraps a table after checking it is a phase polynomial of the stated degree.
    pub fn explicit(table: FunctionTable, degree: usize) -> Result<Self> {
        if !is_phase_polynomial(&table, degree, None, DerivativeMode::BasisDirections, &Caps::default())? {
            return Err(Error::Precondition(format!(
                "table is not a phase polynomial of degree {degree}"
            )));
        }
        Ok(PhasePolynomial::Explicit { table, degree })
    }

    pub fn space(&self) -> Space {
        match self {
            PhasePolynomial::Classical { poly, .. } => poly.space(),
            PhasePolynomial::Explicit { table, .. } => table.space(),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            PhasePolynomial::Classical { poly, .. } => poly.degree_bound(),
            PhasePolynomial::Explicit { degree, .. } => *degree,
        }
    }

    pub fn table(&self) -> FunctionTable {
        match self {
            PhasePolynomial::Classical { theta, poly } => {
                let rot = field::phase(*theta);
                let chars = poly.space().field().characters();
                let t = poly.to_table();
                FunctionTable::from_fn(poly.space(), |x| rot * chars[t.get(x) as usize])
            }
            PhasePolynomial::Explicit { table, .. } => table.clone(),
        }
    }

    /// Equality modulo a global phase: |<phi, psi>| = 1 within `tol`.
    pub fn equivalent(&self, other: &PhasePolynomial, tol: f64) -> Result<bool> {
        let ip = self.table().inner_product(&other.table())?;
        Ok((ip.norm() - 1.0).abs() <= tol)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PhaseDocument {
    Classical { theta: f64, poly: Polynomial },
    Explicit { degree: usize, table: TableDocument },
}

impl Serialize for PhasePolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let doc = match self {
            PhasePolynomial::Classical { theta, poly } => PhaseDocument::Classical {
                theta: *theta,
                poly: poly.clone(),
            },
            PhasePolynomial::Explicit { table, degree } => PhaseDocument::Explicit {
                degree: *degree,
                table: TableDocument::from(table),
            },
        };
        doc.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PhasePolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match PhaseDocument::deserialize(d)? {
            PhaseDocument::Classical { theta, poly } => {
                classical_phase(theta, poly).map_err(D::Error::custom)
            }
            PhaseDocument::Explicit { degree, table } => {
                let table = FunctionTable::try_from(table).map_err(D::Error::custom)?;
                PhasePolynomial::explicit(table, degree).map_err(D::Error::custom)
            }
        }
    }
}

/// Whether every (d+1)-fold multiplicative derivative of `f` is within `tol` of 1.
pub fn is_phase_polynomial(
    f: &FunctionTable,
    d: usize,
    tol: Option<f64>,
    mode: DerivativeMode,
    caps: &Caps,
) -> Result<bool> {
    let tol = tol.unwrap_or_else(|| default_phase_tolerance(d));
    f.check_unit_modulus(tol.max(1e-9))?;
    let space = f.space();
    match mode {
        DerivativeMode::Full => {
            let tuples = caps::pow(space.size() as u64, d + 1);
            caps::check("full-mode phase check", tuples, caps.shift_tuples)?;
            Ok(trivial_full(f, d + 1, tol))
        }
        DerivativeMode::BasisDirections => Ok(trivial_basis(f, d + 1, 0, tol)),
    }
}

fn near_one(t: &FunctionTable, tol: f64) -> bool {
    let one = Complex64::new(1.0, 0.0);
    t.values().iter().all(|v| (v - one).norm() <= tol)
}

fn trivial_full(t: &FunctionTable, remaining: usize, tol: f64) -> bool {
    if remaining == 0 {
        return near_one(t, tol);
    }
    // Delta_0 of a unit-modulus table is |t|^2 = 1, which every later derivative keeps at 1
    (1..t.space().size())
        .into_par_iter()
        .all(|h| trivial_full(&t.mult_derivative(h), remaining - 1, tol))
}

// Basis directions suffice because Delta_{h+k} f = Delta_h f * T_h Delta_k f.
fn trivial_basis(t: &FunctionTable, remaining: usize, start: usize, tol: f64) -> bool {
    if remaining == 0 {
        return near_one(t, tol);
    }
    let space = t.space();
    (start..space.n()).all(|j| trivial_basis(&t.mult_derivative(space.basis(j)), remaining - 1, j, tol))
}

/// The table x -> e^{2 pi i |x| / 2^m} on F_2^n.
pub fn symmetric_table(n: usize, m: u32) -> Result<FunctionTable> {
    let space = Space::of(2, n)?;
    if m == 0 || m > 62 {
        return Err(Error::Precondition(format!("m must lie in 1..=62, got {m}")));
    }
    let den = 1u64 << m;
    Ok(FunctionTable::from_fn(space, |x| {
        unit_root(x.count_ones() as u64, den)
    }))
}

/// e^{2 pi i |x| / 2^m} on F_2^n as a verified member of Phase_m.
pub fn symmetric_phase(n: usize, m: u32) -> Result<PhasePolynomial> {
    let table = symmetric_table(n, m)?;
    if m == 1 {
        let space = table.space();
        return classical_phase(0.0, Polynomial::linear(space, &vec![1; n])?);
    }
    PhasePolynomial::explicit(table, m as usize)
}

/// Search set for u^d: classical e_F(P) with P in Poly_{d-1}, and over F_2 also
/// the products with symmetric phases of order 2..=d-1. Global phase is quotiented out.
#[derive(Debug, Clone)]
pub struct PhaseCatalogue {
    space: Space,
    degree: usize,
    basis: MonomialBasis,
    /// None is the trivial generator; Some(m) is the symmetric phase of order m.
    generators: Vec<Option<u32>>,
    generator_tables: Vec<FunctionTable>,
    per_generator: u128,
}

impl PhaseCatalogue {
    /// Catalogue for u^d, so members have degree at most d - 1 (requires d >= 1).
    pub fn new(space: Space, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Precondition("catalogue needs d >= 1".into()));
        }
        let degree = d - 1;
        let basis = MonomialBasis::new(space, degree);
        let mut generators = vec![None];
        if space.p() == 2 && space.n() > 0 {
            generators.extend((2..=degree as u32).map(Some));
        }
        let generator_tables = generators
            .iter()
            .map(|g| match g {
                None => Ok(FunctionTable::constant(space, Complex64::new(1.0, 0.0))),
                Some(m) => symmetric_table(space.n(), *m),
            })
            .collect::<Result<Vec<_>>>()?;
        let per_generator = caps::pow(space.p() as u64, basis.len());
        Ok(PhaseCatalogue {
            space,
            degree,
            basis,
            generators,
            generator_tables,
            per_generator,
        })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Degree bound of the members (d - 1).
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    /// Symmetric-phase orders used as generators (None = classical only).
    pub fn generators(&self) -> &[Option<u32>] {
        &self.generators
    }

    pub fn generator_table(&self, i: usize) -> &FunctionTable {
        &self.generator_tables[i]
    }

    pub fn len(&self) -> u128 {
        self.per_generator.saturating_mul(self.generators.len() as u128)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn coefficients(&self, mut index: u128) -> Vec<u32> {
        let p = self.space.p() as u128;
        (0..self.basis.len())
            .map(|_| {
                let c = (index % p) as u32;
                index /= p;
                c
            })
            .collect()
    }

    /// Table of the member (generator, coefficient vector).
    pub fn member_table(&self, generator: usize, coeffs: &[u32]) -> FunctionTable {
        let chars = self.space.field().characters();
        let residues = self.basis.table_of(coeffs);
        let g = &self.generator_tables[generator];
        FunctionTable::from_fn(self.space, |x| g.get(x) * chars[residues[x] as usize])
    }

    /// Member as a phase polynomial, given generator and coefficients.
    pub fn member_of(&self, generator: usize, coeffs: &[u32]) -> Result<PhasePolynomial> {
        let poly = self.basis.polynomial(coeffs);
        match self.generators[generator] {
            None => classical_phase(0.0, poly),
            Some(_) => PhasePolynomial::explicit(self.member_table(generator, coeffs), self.degree),
        }
    }

    /// The index-th member: generator-major, then base-p counter over coefficients.
    pub fn get(&self, index: u128) -> Result<PhasePolynomial> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: index.min(usize::MAX as u128) as usize,
                size: self.len().min(usize::MAX as u128) as usize,
            });
        }
        let generator = (index / self.per_generator) as usize;
        let coeffs = self.coefficients(index % self.per_generator);
        self.member_of(generator, &coeffs)
    }

    /// Uniformly random members (with replacement).
    pub fn sample<R: Rng>(&self, rng: &mut R, count: usize) -> Result<Vec<PhasePolynomial>> {
        (0..count)
            .map(|_| {
                let generator = rng.gen_range(0..self.generators.len());
                let coeffs: Vec<u32> = (0..self.basis.len())
                    .map(|_| rng.gen_range(0..self.space.p()))
                    .collect();
                self.member_of(generator, &coeffs)
            })
            .collect()
    }
}

/// All catalogue members for u^d, refused when the catalogue exceeds the cap.
pub fn phase_catalogue(space: Space, d: usize, caps: &Caps) -> Result<Vec<PhasePolynomial>> {
    if d == 0 {
        return Err(Error::Precondition("catalogue needs d >= 1".into()));
    }
    let dim = poly_dimension(space.p(), space.n(), d - 1) as usize;
    let generators = if space.p() == 2 && space.n() > 0 { d.saturating_sub(2) + 1 } else { 1 };
    let total = caps::pow(space.p() as u64, dim).saturating_mul(generators as u128);
    caps::check("phase catalogue", total, caps.exhaustive_candidates)?;
    let cat = PhaseCatalogue::new(space, d)?;
    (0..cat.len()).map(|i| cat.get(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{enumerate_polynomials, interpolate};
    use crate::random;
    use crate::table::FieldTable;
    use std::collections::HashSet;

    fn sp(p: u32, n: usize) -> Space {
        Space::of(p, n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classical_examples() {
        let s = sp(2, 1);
        let one = classical_phase(0.0, Polynomial::zero(s, 0)).unwrap().table();
        assert_eq!(one.values(), &[c(1.0, 0.0), c(1.0, 0.0)]);
        let x1 = classical_phase(0.0, Polynomial::linear(s, &[1]).unwrap()).unwrap();
        assert_eq!(x1.table().values(), &[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(x1.degree(), 1);
        let neg = classical_phase(0.5, Polynomial::zero(s, 0)).unwrap().table();
        assert_eq!(neg.values(), &[c(-1.0, 0.0), c(-1.0, 0.0)]);
        assert!(classical_phase(1.0, Polynomial::zero(s, 0)).is_err());
    }

    #[test]
    fn low_characteristic_example() {
        let caps = Caps::default();
        let f = FunctionTable::new(sp(2, 1), vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!(is_phase_polynomial(&f, 2, None, DerivativeMode::Full, &caps).unwrap());
        assert!(!is_phase_polynomial(&f, 1, None, DerivativeMode::Full, &caps).unwrap());
        // Delta_1 Delta_1 f(0) = -1
        assert!((f.mult_derivatives(&[1, 1]).get(0) - c(-1.0, 0.0)).norm() < 1e-15);
        let bad = FunctionTable::new(sp(2, 1), vec![c(1.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!(is_phase_polynomial(&bad, 1, None, DerivativeMode::Full, &caps).is_err());
    }

    #[test]
    fn classical_phases_pass_exactly() {
        let caps = Caps::unlimited();
        for (p, n) in [(2u32, 1usize), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (5, 2)] {
            let s = sp(p, n);
            for d in 0..=3usize {
                for seed in 0..3u64 {
                    let raw = random::field_table(s, &mut random::rng(seed * 31 + d as u64));
                    let poly = interpolate(&raw).truncate(d);
                    let theta = (seed as f64) / 7.0;
                    let phi = classical_phase(theta, poly).unwrap();
                    let t = phi.table();
                    let mode = if caps::pow(s.size() as u64, d + 1) <= 1 << 16 {
                        DerivativeMode::Full
                    } else {
                        DerivativeMode::BasisDirections
                    };
                    assert!(is_phase_polynomial(&t, d, None, mode, &caps).unwrap());
                }
            }
        }
    }

    /// For p = 3 > d, every phase polynomial on a p^2-th root grid is classical.
    #[test]
    fn high_characteristic_phases_are_classical() {
        let caps = Caps::unlimited();
        for n in 1..=2usize {
            let s = sp(3, n);
            let size = s.size();
            // exponents on the 9-th root grid; f(0) = 1 fixes the global phase, and for
            // d >= 1 multiplying by a linear phase (exponent shift 3 l(x)) preserves
            // membership, so f(e_j) may be reduced mod 3
            let basis_points: Vec<usize> = (0..n).map(|j| s.basis(j)).collect();
            let free: Vec<usize> = (1..size).filter(|x| !basis_points.contains(x)).collect();
            for d in 0..=2usize {
                let classical: Vec<FunctionTable> = enumerate_polynomials(s, d, &caps)
                    .unwrap()
                    .map(|p| classical_phase(0.0, p).unwrap().table())
                    .collect();
                // d = 0 admits no such reduction; on n = 2 it then scans a subset only
                let basis_range = if d == 0 && n == 1 { 9 } else { 3 };
                let total = 9u64.pow(free.len() as u32) * (basis_range as u64).pow(n as u32);
                // exact exponent check: (d+1)-fold basis-direction differences vanish mod 9
                let exact = |exps: &[u64]| -> bool {
                    fn rec(s: Space, a: Vec<u64>, left: usize, start: usize) -> bool {
                        if left == 0 {
                            return a.iter().all(|&v| v % 9 == 0);
                        }
                        (start..s.n()).all(|j| {
                            let h = s.basis(j);
                            let next = (0..s.size()).map(|x| (a[s.add(x, h)] + 9 - a[x] % 9) % 9).collect();
                            rec(s, next, left - 1, j)
                        })
                    }
                    rec(s, exps.to_vec(), d + 1, 0)
                };
                let mut passing = 0;
                for code in 0..total {
                    let mut rest = code;
                    let mut exps = vec![0u64; size];
                    for &b in &basis_points {
                        exps[b] = rest % basis_range;
                        rest /= basis_range;
                    }
                    for &x in &free {
                        exps[x] = rest % 9;
                        rest /= 9;
                    }
                    let accepted = exact(&exps);
                    if !accepted && code % 997 != 0 {
                        continue;
                    }
                    let f = FunctionTable::from_fn(s, |x| unit_root(exps[x], 9));
                    let verdict = is_phase_polynomial(&f, d, None, DerivativeMode::Full, &caps).unwrap();
                    assert_eq!(verdict, accepted);
                    if !verdict {
                        continue;
                    }
                    passing += 1;
                    let hit = classical.iter().any(|phi| {
                        (f.inner_product(phi).unwrap().norm() - 1.0).abs() < 1e-9
                    });
                    assert!(hit, "n={n} d={d} non-classical phase found");
                }
                assert!(passing > 0);
            }
        }
    }

    #[test]
    fn symmetric_phase_examples() {
        let m1 = symmetric_phase(3, 1).unwrap();
        assert!(matches!(m1, PhasePolynomial::Classical { .. }));
        let direct = symmetric_table(3, 1).unwrap();
        assert!(m1.table().max_abs_diff(&direct).unwrap() < 1e-15);
        let m2 = symmetric_phase(1, 2).unwrap();
        assert_eq!(m2.table().values(), &[c(1.0, 0.0), c(0.0, 1.0)]);
        assert!(symmetric_phase(6, 3).is_ok());
    }

    #[test]
    fn order_eight_phase_is_far_from_classical_cubics() {
        let caps = Caps::default();
        let g = symmetric_phase(3, 3).unwrap().table();
        let mut best = f64::INFINITY;
        for p in enumerate_polynomials(sp(2, 3), 3, &caps).unwrap() {
            let e = FieldTable::phase(&p.to_table());
            for k in 0..512 {
                let rot = field::phase(k as f64 / 512.0);
                let d = g.l1_distance(&e.scale(rot)).unwrap();
                best = best.min(d);
            }
        }
        assert!(best > 0.1, "best distance {best}");
    }

    #[test]
    fn catalogue_examples() {
        let caps = Caps::default();
        let lin = phase_catalogue(sp(3, 1), 2, &caps).unwrap();
        assert_eq!(lin.len(), 9);
        let distinct: HashSet<Vec<(i64, i64)>> = lin
            .iter()
            .map(|phi| {
                phi.table()
                    .values()
                    .iter()
                    .map(|v| ((v.re * 1e6).round() as i64, (v.im * 1e6).round() as i64))
                    .collect()
            })
            .collect();
        assert_eq!(distinct.len(), 9);

        let cat = PhaseCatalogue::new(sp(2, 2), 3).unwrap();
        assert_eq!(cat.generators(), &[None, Some(2)]);
        let members = phase_catalogue(sp(2, 2), 3, &caps).unwrap();
        assert_eq!(members.len() as u128, cat.len());
        let sym = symmetric_table(2, 2).unwrap();
        assert!(members.iter().any(|m| m.table().max_abs_diff(&sym).unwrap() < 1e-12));
        for m in &members {
            assert!(m.degree() <= 2);
            assert!(is_phase_polynomial(&m.table(), 2, None, DerivativeMode::Full, &caps).unwrap());
        }

        let classical_only = PhaseCatalogue::new(sp(2, 5), 2).unwrap();
        assert_eq!(classical_only.generators(), &[None]);

        let tiny = Caps {
            exhaustive_candidates: 10,
            ..Caps::default()
        };
        assert!(phase_catalogue(sp(2, 3), 3, &tiny).is_err());
    }

    #[test]
    fn catalogue_members_are_distinct() {
        let caps = Caps::default();
        let members = phase_catalogue(sp(2, 2), 4, &caps).unwrap();
        let keys: HashSet<Vec<(i64, i64)>> = members
            .iter()
            .map(|phi| {
                phi.table()
                    .values()
                    .iter()
                    .map(|v| ((v.re * 1e6).round() as i64, (v.im * 1e6).round() as i64))
                    .collect()
            })
            .collect();
        assert_eq!(keys.len(), members.len());
    }

    #[test]
    fn phase_serialization() {
        let s = sp(2, 2);
        let phi = classical_phase(0.25, Polynomial::linear(s, &[1, 1]).unwrap()).unwrap();
        let json = serde_json::to_string(&phi).unwrap();
        assert!(json.starts_with("{\"classical\""));
        let back: PhasePolynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(back, phi);
        let sym = symmetric_phase(2, 2).unwrap();
        let json = serde_json::to_string(&sym).unwrap();
        assert!(json.starts_with("{\"explicit\""));
        let back: PhasePolynomial = serde_json::from_str(&json).unwrap();
        assert!(back.table().max_abs_diff(&sym.table()).unwrap() < 1e-15);
        // wrong declared degree is refused
        let bad = json.replace("\"degree\":2", "\"degree\":1");
        assert!(serde_json::from_str::<PhasePolynomial>(&bad).is_err());
    }
}
