//! Gowers uniformity norms U^d and weak norms u^d.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::{self, Caps};
use crate::error::{Error, Result};
use crate::fourier;
use crate::poly::{
    best_classical_correlation, classical_phase, hill_climb, HillClimb, MonomialBasis,
    PhaseCatalogue, PhasePolynomial,
};
use crate::reduce;
use crate::signs::SignTable;
use crate::table::FunctionTable;

/// Pre-root averages below this are rounding error; anything further below zero is a bug.
pub const NEGATIVE_CLAMP: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    #[serde(rename = "U")]
    Uniformity,
    #[serde(rename = "u")]
    Weak,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    pub d: usize,
    pub value: f64,
    pub witness: Option<PhasePolynomial>,
    pub method: String,
    pub evals: u64,
}

impl NormReport {
    fn uniformity(d: usize, value: f64, method: &str, evals: u128) -> Self {
        NormReport {
            kind: NormKind::Uniformity,
            d,
            value,
            witness: None,
            method: method.to_string(),
            evals: evals.min(u64::MAX as u128) as u64,
        }
    }
}

/// 2^d-th root of a pre-root average, after the rounding clamp.
pub fn root(power: f64, d: usize) -> Result<f64> {
    if power < NEGATIVE_CLAMP || !power.is_finite() {
        return Err(Error::Numerical(format!(
            "Gowers average {power} is negative beyond rounding"
        )));
    }
    Ok(power.max(0.0).powf(1.0 / (1u64 << d) as f64))
}

fn check_d(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::Precondition("Gowers norms need d >= 1".into()));
    }
    if d > 30 {
        return Err(Error::Precondition(format!("d = {d} is too large")));
    }
    Ok(())
}

/// The literal average over all (h_1, ..., h_d, x) of the 2^d-fold cube product.
pub fn gowers_norm_direct(f: &FunctionTable, d: usize, caps: &Caps) -> Result<NormReport> {
    check_d(d)?;
    let size = f.space().size();
    let total = caps::pow(size as u64, d + 1);
    caps::check("direct Gowers average", total, caps.direct_summands)?;
    let space = f.space();
    let values = f.values();
    let corners = 1usize << d;
    let avg = reduce::mean_complex(total as usize, |mut idx| {
        let x = idx % size;
        idx /= size;
        let mut hs = [0usize; 30];
        for h in hs.iter_mut().take(d) {
            *h = idx % size;
            idx /= size;
        }
        let mut prod = num_complex::Complex64::new(1.0, 0.0);
        for w in 0..corners {
            let mut point = x;
            for (i, &h) in hs.iter().enumerate().take(d) {
                if w >> i & 1 == 1 {
                    point = space.add(point, h);
                }
            }
            let v = values[point];
            prod *= if w.count_ones() % 2 == 1 { v.conj() } else { v };
        }
        prod
    });
    if avg.im.abs() > 1e-9 {
        return Err(Error::Numerical(format!(
            "Gowers average has imaginary part {}",
            avg.im
        )));
    }
    Ok(NormReport::uniformity(d, root(avg.re, d)?, "direct", total))
}

/// ||f||_{U^d}^{2^d} by E_h ||Delta_h f||_{U^{d-1}}^{2^{d-1}} with ||g||_{U^1} = |E g|.
pub fn gowers_power(f: &FunctionTable, d: usize) -> f64 {
    if d == 1 {
        return f.mean().norm_sqr();
    }
    let size = f.space().size();
    let partial: Vec<f64> = (0..size)
        .into_par_iter()
        .map(|h| gowers_power(&f.mult_derivative(h), d - 1))
        .collect();
    reduce::compensated_sum(partial) / size as f64
}

pub fn gowers_norm(f: &FunctionTable, d: usize) -> Result<NormReport> {
    check_d(d)?;
    let size = f.space().size() as u128;
    let passes = caps::pow(size as u64, d - 1);
    Ok(NormReport::uniformity(
        d,
        root(gowers_power(f, d), d)?,
        "recursive",
        passes.saturating_mul(size),
    ))
}

/// Same recursion with a Fourier base case at d = 2 (and a bit-packed path for
/// exact sign tables over F_2). Used for instances too large for [`gowers_norm`].
pub fn gowers_power_fast(f: &FunctionTable, d: usize) -> f64 {
    if f.space().p() == 2 {
        if let Ok(signs) = SignTable::from_table(f) {
            return signs.gowers_power_fourier(d);
        }
    }
    fast_power(f, d)
}

fn fast_power(f: &FunctionTable, d: usize) -> f64 {
    match d {
        1 => f.mean().norm_sqr(),
        2 => reduce::compensated_sum(fourier::transform(f).iter().map(|c| c.norm_sqr().powi(2))),
        _ => {
            let size = f.space().size();
            let partial: Vec<f64> = (0..size)
                .into_par_iter()
                .map(|h| fast_power(&f.mult_derivative(h), d - 1))
                .collect();
            reduce::compensated_sum(partial) / size as f64
        }
    }
}

pub fn gowers_norm_fast(f: &FunctionTable, d: usize, caps: &Caps) -> Result<NormReport> {
    check_d(d)?;
    let size = f.space().size() as u128;
    let passes = caps::pow(size as u64, d.saturating_sub(2));
    caps::check("fast Gowers recursion", passes, caps.table_passes)?;
    Ok(NormReport::uniformity(
        d,
        root(gowers_power_fast(f, d), d)?,
        "recursive-fourier-base",
        passes.saturating_mul(size),
    ))
}

/// (sum_xi |f^(xi)|^4)^{1/4}.
pub fn fourier_u2(f: &FunctionTable) -> Result<NormReport> {
    let spectrum = fourier::transform(f);
    let fourth = reduce::compensated_sum(spectrum.iter().map(|c| c.norm_sqr().powi(2)));
    Ok(NormReport::uniformity(
        2,
        root(fourth, 2)?,
        "fourier",
        f.space().size() as u128,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeakNormStrategy {
    /// All classical phases of degree at most d - 1; exact.
    ExhaustiveClassical,
    /// Classical phases and their products with symmetric phases; exhaustive when the
    /// catalogue fits the cap, otherwise local search.
    Catalogue(HillClimb),
    Supplied(Vec<PhasePolynomial>),
}

fn theta_of(inner: num_complex::Complex64) -> f64 {
    // <f, e^{2 pi i theta} phi> = e^{-2 pi i theta} <f, phi>, real and positive at this theta
    let t = (inner.arg() / std::f64::consts::TAU).rem_euclid(1.0);
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

/// max |<f, phi>| over the strategy's phase polynomials of degree at most d - 1.
pub fn weak_norm(
    f: &FunctionTable,
    d: usize,
    strategy: &WeakNormStrategy,
    caps: &Caps,
) -> Result<NormReport> {
    check_d(d)?;
    let space = f.space();
    let report = |value: f64, witness: PhasePolynomial, method: &str, evals: u128| NormReport {
        kind: NormKind::Weak,
        d,
        value,
        witness: Some(witness),
        method: method.to_string(),
        evals: evals.min(u64::MAX as u128) as u64,
    };
    match strategy {
        WeakNormStrategy::ExhaustiveClassical => {
            let basis = MonomialBasis::new(space, d - 1);
            let best = best_classical_correlation(f, &basis, caps)?;
            let witness = classical_phase(theta_of(best.inner), basis.polynomial(&best.coeffs))?;
            Ok(report(best.value(), witness, "exhaustive-classical", best.evals))
        }
        WeakNormStrategy::Catalogue(params) => {
            let cat = PhaseCatalogue::new(space, d)?;
            let exhaustive = cat.len() <= caps.exhaustive_candidates;
            let per_generator = Caps {
                exhaustive_candidates: u128::MAX,
                ..*caps
            };
            let mut best: Option<(usize, crate::poly::ClassicalSearch)> = None;
            let mut evals: u128 = 0;
            for i in 0..cat.generators().len() {
                let g = f.mul_conj(cat.generator_table(i))?;
                let found = if exhaustive {
                    best_classical_correlation(&g, cat.basis(), &per_generator)?
                } else {
                    hill_climb(&g, cat.basis(), params)
                };
                evals += found.evals;
                let better = match &best {
                    None => true,
                    Some((_, b)) => found.value() > b.value() + 1e-15,
                };
                if better {
                    best = Some((i, found));
                }
            }
            let (i, found) = best.expect("catalogue has the trivial generator");
            let theta = theta_of(found.inner);
            let witness = match cat.generators()[i] {
                None => classical_phase(theta, cat.basis().polynomial(&found.coeffs))?,
                Some(_) => PhasePolynomial::explicit(
                    cat.member_table(i, &found.coeffs)
                        .scale(crate::field::phase(theta)),
                    cat.degree(),
                )?,
            };
            let method = if exhaustive {
                "catalogue-exhaustive (exact over catalogue, lower bound for u^d)"
            } else {
                "catalogue-hill-climb (lower bound)"
            };
            Ok(report(found.value(), witness, method, evals))
        }
        WeakNormStrategy::Supplied(list) => {
            if list.is_empty() {
                return Err(Error::Precondition("supplied phase list is empty".into()));
            }
            let mut best: Option<(f64, &PhasePolynomial)> = None;
            for phi in list {
                if phi.degree() + 1 > d {
                    return Err(Error::Precondition(format!(
                        "supplied phase of degree {} exceeds d - 1 = {}",
                        phi.degree(),
                        d - 1
                    )));
                }
                let v = f.inner_product(&phi.table())?.norm();
                if best.map_or(true, |(b, _)| v > b + 1e-15) {
                    best = Some((v, phi));
                }
            }
            let (value, phi) = best.expect("non-empty list");
            Ok(report(value, phi.clone(), "supplied", list.len() as u128))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::unit_root;
    use crate::poly::{interpolate, phase_catalogue, symmetric_phase, symmetric_table, Polynomial};
    use crate::random;
    use crate::space::Space;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn sp(p: u32, n: usize) -> Space {
        Space::of(p, n).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bent() -> FunctionTable {
        FunctionTable::from_real(sp(2, 2), &[1.0, 1.0, 1.0, -1.0]).unwrap()
    }

    #[test]
    fn direct_examples() {
        let caps = Caps::default();
        for d in 1..=3 {
            let one = FunctionTable::constant(sp(3, 2), c(1.0));
            assert!((gowers_norm_direct(&one, d, &caps).unwrap().value - 1.0).abs() < 1e-12);
        }
        let alt = FunctionTable::from_real(sp(2, 1), &[1.0, -1.0]).unwrap();
        assert!(gowers_norm_direct(&alt, 1, &caps).unwrap().value.abs() < 1e-12);
        let u2 = gowers_norm_direct(&bent(), 2, &caps).unwrap().value;
        assert!((u2 - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((fourier_u2(&bent()).unwrap().value - 0.5f64.sqrt()).abs() < 1e-12);
        let tiny = Caps {
            direct_summands: 10,
            ..Caps::default()
        };
        assert!(gowers_norm_direct(&bent(), 2, &tiny).is_err());
    }

    #[test]
    fn recursive_examples() {
        assert!((gowers_norm(&bent(), 3).unwrap().value - 1.0).abs() < 1e-12);
        let s = sp(3, 2);
        let poly = interpolate(&random::field_table(s, &mut random::rng(4))).truncate(2);
        let phi = classical_phase(0.3, poly).unwrap().table();
        assert!((gowers_norm(&phi, 3).unwrap().value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn recursive_matches_direct() {
        let caps = Caps::default();
        let s = sp(2, 3);
        let mut rng = random::rng(11);
        for _ in 0..50 {
            let f = random::disk_table(s, &mut rng);
            for d in 2..=3 {
                let a = gowers_norm_direct(&f, d, &caps).unwrap().value;
                let b = gowers_norm(&f, d).unwrap().value;
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn fourier_matches_recursive() {
        let s = sp(3, 2);
        let mut rng = random::rng(12);
        for _ in 0..50 {
            let f = random::disk_table(s, &mut rng);
            let a = fourier_u2(&f).unwrap().value;
            let b = gowers_norm(&f, 2).unwrap().value;
            assert!((a - b).abs() < 1e-10);
        }
        let zero = FunctionTable::constant(s, c(0.0));
        assert_eq!(fourier_u2(&zero).unwrap().value, 0.0);
        let lin = Polynomial::linear(s, &[1, 2]).unwrap().to_table().phase();
        assert!((fourier_u2(&lin).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fast_matches_recursive() {
        let caps = Caps::default();
        for (p, n) in [(2u32, 4usize), (3, 2), (5, 1)] {
            let s = sp(p, n);
            let mut rng = random::rng(p as u64);
            for _ in 0..5 {
                let f = random::disk_table(s, &mut rng);
                let g = random::sign_table(s, &mut rng);
                for d in 1..=3 {
                    for t in [&f, &g] {
                        let a = gowers_norm_fast(t, d, &caps).unwrap().value;
                        let b = gowers_norm(t, d).unwrap().value;
                        assert!((a - b).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn monotone_in_d() {
        let mut rng = random::rng(13);
        for (p, n) in [(2u32, 3usize), (2, 6), (3, 2), (3, 3)] {
            let f = random::disk_table(sp(p, n), &mut rng);
            for d in 1..3 {
                let a = gowers_norm(&f, d).unwrap().value;
                let b = gowers_norm(&f, d + 1).unwrap().value;
                assert!(a <= b + 1e-9);
            }
        }
    }

    #[test]
    fn correlation_bound_over_catalogue() {
        let caps = Caps::default();
        let mut rng = random::rng(14);
        for (p, n, d) in [(2u32, 2usize, 3usize), (2, 3, 2), (3, 2, 2), (3, 1, 3), (2, 2, 2)] {
            let s = sp(p, n);
            let cat = phase_catalogue(s, d, &caps).unwrap();
            for _ in 0..4 {
                let f = random::disk_table(s, &mut rng);
                let u = gowers_norm(&f, d).unwrap().value;
                for phi in &cat {
                    assert!(f.inner_product(&phi.table()).unwrap().norm() <= u + 1e-9);
                }
            }
        }
    }

    #[test]
    fn phase_polynomials_have_unit_norm() {
        for d in 2..=4usize {
            let s = symmetric_table(3, (d - 1) as u32).unwrap();
            assert!((gowers_norm(&s, d).unwrap().value - 1.0).abs() < 1e-10, "d={d}");
        }
        let i_x = symmetric_table(4, 2).unwrap();
        assert!((gowers_norm(&i_x, 3).unwrap().value - 1.0).abs() < 1e-10);
        let eighth = symmetric_table(4, 3).unwrap();
        assert!((gowers_norm_fast(&eighth, 4, &Caps::default()).unwrap().value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn weak_norm_examples() {
        let caps = Caps::default();
        let s = sp(3, 2);
        let poly = Polynomial::new(s, 1, [(vec![1, 0], 2), (vec![0, 0], 1)]).unwrap();
        let f = poly.to_table().phase();
        let r = weak_norm(&f, 2, &WeakNormStrategy::ExhaustiveClassical, &caps).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let w = r.witness.unwrap();
        assert!(w.equivalent(&classical_phase(0.0, poly).unwrap(), 1e-12).unwrap());

        let alt = FunctionTable::from_real(sp(2, 1), &[1.0, -1.0]).unwrap();
        let r = weak_norm(&alt, 1, &WeakNormStrategy::ExhaustiveClassical, &caps).unwrap();
        assert!(r.value.abs() < 1e-12);

        let f = FunctionTable::new(sp(2, 1), vec![c(1.0), Complex64::new(0.0, 1.0)]).unwrap();
        let r = weak_norm(&f, 3, &WeakNormStrategy::Catalogue(HillClimb::default()), &caps).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let w = r.witness.unwrap();
        assert!(w.equivalent(&symmetric_phase(1, 2).unwrap(), 1e-12).unwrap());

        assert!(weak_norm(&f, 2, &WeakNormStrategy::Supplied(vec![]), &caps).is_err());
    }

    #[test]
    fn witnesses_reproduce_values() {
        let caps = Caps::default();
        let mut rng = random::rng(15);
        for (p, n, d) in [(2u32, 4usize, 3usize), (3, 2, 2), (2, 3, 4)] {
            let s = sp(p, n);
            let f = random::disk_table(s, &mut rng);
            let strategies = [
                WeakNormStrategy::ExhaustiveClassical,
                WeakNormStrategy::Catalogue(HillClimb::default()),
            ];
            let mut values = vec![];
            for st in &strategies {
                let r = weak_norm(&f, d, st, &caps).unwrap();
                let phi = r.witness.as_ref().unwrap();
                let ip = f.inner_product(&phi.table()).unwrap();
                assert!((ip.norm() - r.value).abs() < 1e-9);
                assert!((ip.re - r.value).abs() < 1e-9, "witness phase aligned");
                assert!(r.value <= 1.0 + 1e-9);
                values.push(r.value);
            }
            assert!(values[0] <= values[1] + 1e-12);
            let supplied = phase_catalogue(s, d, &caps).unwrap();
            let r = weak_norm(&f, d, &WeakNormStrategy::Supplied(supplied), &caps).unwrap();
            assert!((r.value - values[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn heuristic_catalogue_is_a_lower_bound() {
        let tiny = Caps {
            exhaustive_candidates: 4,
            ..Caps::default()
        };
        let s = sp(2, 4);
        let f = random::disk_table(s, &mut random::rng(16));
        let heur = weak_norm(&f, 3, &WeakNormStrategy::Catalogue(HillClimb::default()), &tiny).unwrap();
        assert!(heur.method.contains("lower bound"));
        let exact = weak_norm(&f, 3, &WeakNormStrategy::Catalogue(HillClimb::default()), &Caps::default())
            .unwrap();
        assert!(heur.value <= exact.value + 1e-12);
    }

    #[test]
    fn report_serialization() {
        let r = gowers_norm(&bent(), 2).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["kind"], "U");
        assert_eq!(json["d"], 2);
        let f = FunctionTable::new(sp(2, 1), vec![c(1.0), unit_root(1, 4)]).unwrap();
        let w = weak_norm(&f, 3, &WeakNormStrategy::Catalogue(HillClimb::default()), &Caps::default())
            .unwrap();
        let json = serde_json::to_string(&w).unwrap();
        let back: NormReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.kind, NormKind::Weak);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn shift_invariance(seed in any::<u64>(), h in 0usize..9, d in 1usize..=3) {
            let f = random::disk_table(sp(3, 2), &mut random::rng(seed));
            let a = gowers_norm(&f, d).unwrap().value;
            let b = gowers_norm(&f.shift(h), d).unwrap().value;
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
