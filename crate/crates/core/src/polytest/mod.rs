//! The polynomiality test E_{h_1..h_k} int_V |Delta_{h_1} ... Delta_{h_k} g - 1|,
//! discreteness and rigidity of phase polynomials, and a decoder that recovers a
//! nearby phase polynomial from a function that nearly passes the test.

mod decode;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{DecodeFailure, Error, Result};
use crate::poly::{is_phase_polynomial, DerivativeMode, PhaseCatalogue, PhasePolynomial};
use crate::random;
use crate::sampling::{deviation_average, local_polytest, Estimate, MonteCarlo, SamplingPlan};
use crate::space::Space;
use crate::table::FunctionTable;

pub use decode::{decode, DecodeParams, DecodeResult, DecodeTrace, LevelTrace};

/// Where the shifts h_i come from.
#[derive(Debug, Clone, Copy)]
pub enum StatisticMode<'a> {
    /// All of V.
    Exact,
    /// Prefix spans of a sampling plan at the given scales.
    Local {
        plan: &'a SamplingPlan,
        scales: &'a [usize],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytestStatistic {
    pub k: usize,
    #[serde(flatten)]
    pub estimate: Estimate<f64>,
    /// "phase-certificate", "root-spectrum", "exact", "monte-carlo" or "local".
    pub method: String,
}

impl PolytestStatistic {
    pub fn value(&self) -> f64 {
        self.estimate.value
    }
}

/// The test statistic at order k >= 1.
///
/// In exact mode a unit-modulus g that passes the degree-(k-1) phase check has every
/// k-fold derivative identically 1, so the statistic is 0 without enumeration.
/// Otherwise root-of-unity valued tables use the cube-product expansion, other
/// tables are enumerated, and `mc` allows sampling the shifts when both exceed caps.
pub fn polytest_statistic(
    g: &FunctionTable,
    k: usize,
    mode: StatisticMode,
    caps: &Caps,
    mc: Option<MonteCarlo>,
) -> Result<PolytestStatistic> {
    if k == 0 {
        return Err(Error::Precondition("the test needs k >= 1".into()));
    }
    g.check_bounded()?;
    match mode {
        StatisticMode::Local { plan, scales } => {
            if scales.len() != k {
                return Err(Error::Precondition(format!(
                    "local mode needs {k} scales, got {}",
                    scales.len()
                )));
            }
            let estimate = local_polytest(g, plan, scales, caps, mc)?;
            Ok(PolytestStatistic {
                k,
                estimate,
                method: "local".into(),
            })
        }
        StatisticMode::Exact => {
            if g.is_unit_modulus(1e-12)
                && is_phase_polynomial(g, k - 1, None, DerivativeMode::BasisDirections, caps)?
            {
                return Ok(PolytestStatistic {
                    k,
                    estimate: Estimate::exact(0.0),
                    method: "phase-certificate".into(),
                });
            }
            let space = g.space();
            let basis: Vec<usize> = (0..space.n()).map(|j| space.basis(j)).collect();
            let (estimate, method) = deviation_average(g, vec![basis; k], caps, mc)?;
            Ok(PolytestStatistic {
                k,
                estimate,
                method: method.into(),
            })
        }
    }
}

/// p^{floor(k/p) + 1}.
pub fn discreteness_k(p: u32, k: usize) -> u64 {
    (p as u64).pow(k as u32 / p + 1)
}

/// Least K such that every value of the table is t(0) times a K-th root of unity.
pub fn minimal_k_of_table(t: &FunctionTable) -> Result<u64> {
    t.check_unit_modulus(1e-9)?;
    let anchor = t.get(0).conj();
    let ratios: Vec<Complex64> = t.values().iter().map(|v| v * anchor).collect();
    // a coarse pass on the arguments, then the exact power test
    (1..=4096u64)
        .find(|&k| {
            ratios.iter().all(|r| {
                let turns = r.arg() / std::f64::consts::TAU * k as f64;
                (turns - turns.round()).abs() <= 1e-7
            }) && ratios
                .iter()
                .all(|r| (r.powu(k as u32) - Complex64::new(1.0, 0.0)).norm() <= 1e-7)
        })
        .ok_or_else(|| Error::Numerical("values are not a rotated root-of-unity set with K <= 4096".into()))
}

pub fn minimal_k(phi: &PhasePolynomial) -> Result<u64> {
    minimal_k_of_table(&phi.table())
}

/// Largest minimal K over the catalogue generators of degree at most `degree`
/// (every member is a generator times a classical phase).
pub fn catalogue_minimal_k(space: Space, degree: usize) -> Result<u64> {
    let cat = PhaseCatalogue::new(space, degree + 1)?;
    let mut best = if degree >= 1 && space.n() > 0 { space.p() as u64 } else { 1 };
    for i in 0..cat.generators().len() {
        let k = minimal_k_of_table(cat.generator_table(i))?;
        // the classical factor contributes p-th roots
        let k = if degree >= 1 && space.n() > 0 { lcm(k, space.p() as u64) } else { k };
        best = best.max(k);
    }
    Ok(best)
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// K used for snapping at this degree: the larger of the formula and the catalogue value.
pub fn admissible_k(space: Space, degree: usize) -> Result<u64> {
    Ok(discreteness_k(space.p(), degree).max(catalogue_minimal_k(space, degree)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RigidityVerdict {
    Constant,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub integral: f64,
    pub verdict: RigidityVerdict,
}

/// If int |phi - 1| <= epsilon_cal, asserts phi is constant (fails loudly otherwise).
pub fn rigidity_check(phi: &PhasePolynomial, k: usize, epsilon_cal: f64) -> Result<RigidityReport> {
    if phi.degree() > k {
        return Err(Error::Precondition(format!(
            "phase has degree {} above {k}",
            phi.degree()
        )));
    }
    let t = phi.table();
    let one = Complex64::new(1.0, 0.0);
    let integral = t.values().iter().map(|v| (v - one).norm()).sum::<f64>() / t.len() as f64;
    if integral > epsilon_cal {
        return Ok(RigidityReport {
            integral,
            verdict: RigidityVerdict::Inconclusive,
        });
    }
    let spread = t
        .values()
        .iter()
        .map(|v| (v - t.get(0)).norm())
        .fold(0.0, f64::max);
    if spread > 1e-9 {
        return Err(Error::Rigidity {
            integral,
            epsilon: epsilon_cal,
            spread,
        });
    }
    Ok(RigidityReport {
        integral,
        verdict: RigidityVerdict::Constant,
    })
}

/// Smallest int |phi - 1| over non-constant catalogue members of degree at most `k`.
pub fn calibrate_rigidity(space: Space, k: usize, caps: &Caps) -> Result<f64> {
    let cat = PhaseCatalogue::new(space, k + 1)?;
    crate::caps::check("rigidity calibration", cat.len(), caps.exhaustive_candidates)?;
    let one = Complex64::new(1.0, 0.0);
    let best = (0..cat.len() as u64)
        .into_par_iter()
        .map(|i| {
            let t = cat.get(i as u128).expect("index in range").table();
            let spread = t.values().iter().map(|v| (v - t.get(0)).norm()).fold(0.0, f64::max);
            if spread <= 1e-9 {
                f64::INFINITY
            } else {
                t.values().iter().map(|v| (v - one).norm()).sum::<f64>() / t.len() as f64
            }
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodShift {
    pub h: usize,
    pub score: f64,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodShifts {
    pub drawn: usize,
    pub good: Vec<GoodShift>,
}

impl GoodShifts {
    pub fn fraction(&self) -> f64 {
        self.good.len() as f64 / self.drawn as f64
    }
}

/// Score of h: the order-(k-1) statistic of Delta_h g.
pub(crate) fn shift_score(
    g: &FunctionTable,
    k: usize,
    h: usize,
    caps: &Caps,
    inner: MonteCarlo,
) -> Result<Estimate<f64>> {
    let space = g.space();
    let basis: Vec<usize> = (0..space.n()).map(|j| space.basis(j)).collect();
    Ok(deviation_average(&g.mult_derivative(h), vec![basis; k - 1], caps, Some(inner))?.0)
}

/// Draws `sample_count` uniform shifts and keeps those whose score is at most `threshold`.
/// Scores are exact while enumeration fits `caps.pattern_evals`, sampled otherwise.
pub fn find_good_shifts(
    g: &FunctionTable,
    k: usize,
    threshold: f64,
    sample_count: usize,
    seed: u64,
    caps: &Caps,
    inner: MonteCarlo,
) -> Result<GoodShifts> {
    if k < 2 {
        return Err(Error::Precondition("good shifts need k >= 2".into()));
    }
    if sample_count == 0 || threshold <= 0.0 {
        return Err(Error::Precondition("need sample_count >= 1 and threshold > 0".into()));
    }
    let space = g.space();
    let mut rng = random::rng(seed);
    let hs: Vec<usize> = (0..sample_count).map(|_| rng.gen_range(0..space.size())).collect();
    let scored = hs
        .par_iter()
        .map(|&h| Ok((h, shift_score(g, k, h, caps, inner)?)))
        .collect::<Result<Vec<_>>>()?;
    let good: Vec<GoodShift> = scored
        .into_iter()
        .filter(|(_, e)| e.value <= threshold)
        .map(|(h, e)| GoodShift {
            h,
            score: e.value,
            stderr: e.stderr,
        })
        .collect();
    if good.is_empty() {
        return Err(DecodeFailure::InsufficientGoodShifts {
            order: k,
            found: 0,
            drawn: sample_count,
        }
        .into());
    }
    Ok(GoodShifts {
        drawn: sample_count,
        good,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{classical_phase, symmetric_phase, symmetric_table, Polynomial};
    use crate::sampling::{make_scales, Growth};

    fn sp(p: u32, n: usize) -> Space {
        Space::of(p, n).unwrap()
    }

    /// Literal average over every (h_1, ..., h_k) and x.
    fn brute(g: &FunctionTable, k: usize) -> f64 {
        let size = g.len();
        let total = size.pow(k as u32);
        let one = Complex64::new(1.0, 0.0);
        let mut sum = 0.0;
        for t in 0..total {
            let mut rest = t;
            let hs: Vec<usize> = (0..k)
                .map(|_| {
                    let h = rest % size;
                    rest /= size;
                    h
                })
                .collect();
            sum += g.mult_derivatives(&hs).values().iter().map(|v| (v - one).norm()).sum::<f64>();
        }
        sum / (total * size) as f64
    }

    #[test]
    fn statistic_examples() {
        let s = sp(2, 3);
        let x1 = classical_phase(0.0, Polynomial::linear(s, &[1, 0, 0]).unwrap()).unwrap();
        let st = polytest_statistic(&x1.table(), 1, StatisticMode::Exact, &Caps::default(), None).unwrap();
        assert!((st.value() - 1.0).abs() < 1e-15);
        assert!((brute(&x1.table(), 1) - 1.0).abs() < 1e-15);
        // degree k - 1 phases pass exactly
        let st = polytest_statistic(&x1.table(), 2, StatisticMode::Exact, &Caps::default(), None).unwrap();
        assert_eq!(st.value(), 0.0);
        assert_eq!(st.method, "phase-certificate");
    }

    #[test]
    fn statistic_matches_brute_force() {
        let caps = Caps::default();
        let s = sp(2, 3);
        let quad = Polynomial::new(s, 2, vec![(vec![1, 1, 0], 1), (vec![0, 0, 1], 1)]).unwrap();
        let base = quad.to_table().phase();
        let mut values = base.values().to_vec();
        values[5] = -values[5];
        let perturbed = FunctionTable::new(s, values).unwrap();
        let sym = symmetric_table(3, 3).unwrap();
        let disk = random::disk_table(s, &mut random::rng(4));
        for g in [&perturbed, &sym, &disk] {
            for k in 1..=3 {
                let st = polytest_statistic(g, k, StatisticMode::Exact, &caps, None).unwrap();
                assert!((st.value() - brute(g, k)).abs() < 1e-12, "k={k} {}", st.method);
            }
        }
        let t = sp(3, 2);
        let g = random::unit_table(t, &mut random::rng(5));
        for k in 1..=2 {
            let st = polytest_statistic(&g, k, StatisticMode::Exact, &caps, None).unwrap();
            assert!((st.value() - brute(&g, k)).abs() < 1e-12);
        }
    }

    #[test]
    fn local_mode_with_spanning_prefix_is_global() {
        let s = sp(2, 4);
        let scales = make_scales(Growth::Linear { step: 4 }, 3).unwrap();
        let mut vectors: Vec<usize> = (0..4).map(|j| s.basis(j)).collect();
        vectors.resize(12, 0);
        let plan = SamplingPlan::from_vectors(s, scales, 0, vectors).unwrap();
        let g = random::flip_signs(&symmetric_table(4, 2).unwrap(), 0.1, 3);
        let global = polytest_statistic(&g, 2, StatisticMode::Exact, &Caps::default(), None).unwrap();
        let local = polytest_statistic(
            &g,
            2,
            StatisticMode::Local {
                plan: &plan,
                scales: &[1, 2],
            },
            &Caps::default(),
            None,
        )
        .unwrap();
        assert!((global.value() - local.value()).abs() < 1e-12);
    }

    #[test]
    fn discreteness_examples() {
        assert_eq!(discreteness_k(2, 2), 4);
        assert_eq!(discreteness_k(2, 0), 2);
        assert_eq!(discreteness_k(3, 2), 3);
        assert_eq!(discreteness_k(2, 3), 4);
        assert_eq!(minimal_k(&symmetric_phase(4, 2).unwrap()).unwrap(), 4);
        assert_eq!(minimal_k(&symmetric_phase(4, 3).unwrap()).unwrap(), 8);
        let c = PhasePolynomial::explicit(FunctionTable::constant(sp(3, 2), Complex64::from_polar(1.0, 0.3)), 0)
            .unwrap();
        assert_eq!(minimal_k(&c).unwrap(), 1);
        assert_eq!(catalogue_minimal_k(sp(2, 4), 2).unwrap(), 4);
        assert_eq!(catalogue_minimal_k(sp(2, 4), 3).unwrap(), 8);
        assert_eq!(catalogue_minimal_k(sp(3, 2), 2).unwrap(), 3);
        assert_eq!(admissible_k(sp(2, 4), 3).unwrap(), 8);
    }

    #[test]
    fn rigidity_examples() {
        let s = sp(2, 2);
        let one = PhasePolynomial::explicit(FunctionTable::constant(s, Complex64::new(1.0, 0.0)), 0).unwrap();
        assert_eq!(rigidity_check(&one, 0, 0.1).unwrap().verdict, RigidityVerdict::Constant);
        let x1 = classical_phase(0.0, Polynomial::linear(s, &[1, 0]).unwrap()).unwrap();
        let r = rigidity_check(&x1, 1, 0.1).unwrap();
        assert_eq!(r.verdict, RigidityVerdict::Inconclusive);
        assert!((r.integral - 1.0).abs() < 1e-15);
        // a miscalibrated epsilon surfaces as an error
        assert!(matches!(rigidity_check(&x1, 1, 1.5), Err(Error::Rigidity { .. })));
    }

    #[test]
    fn rigidity_calibration_on_small_catalogue() {
        let s = sp(2, 3);
        let delta = calibrate_rigidity(s, 3, &Caps::default()).unwrap();
        assert!(delta > 0.0 && delta.is_finite());
        let cat = PhaseCatalogue::new(s, 4).unwrap();
        for i in 0..cat.len() {
            let phi = cat.get(i).unwrap();
            rigidity_check(&phi, 3, delta / 2.0).unwrap();
        }
    }

    #[test]
    fn good_shift_examples() {
        let caps = Caps::default();
        let inner = MonteCarlo::default();
        let phase = symmetric_table(6, 3).unwrap();
        let all = find_good_shifts(&phase, 4, 1e-9, 20, 1, &caps, inner).unwrap();
        assert_eq!(all.good.len(), 20);
        // Markov: the good fraction is at least 1 - statistic / threshold
        let noisy = random::corrupt(&phase, 0.03, 2);
        let stat = polytest_statistic(&noisy, 3, StatisticMode::Exact, &caps, None).unwrap().value();
        let threshold = 4.0 * stat;
        let found = find_good_shifts(&noisy, 3, threshold, 64, 3, &caps, inner).unwrap();
        assert!(found.fraction() >= 1.0 - stat / threshold - 0.15, "{}", found.fraction());
    }
}
