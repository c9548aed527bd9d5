//! Two explicit counterexamples as reproducible reports.
//!
//! * f = (-1)^{S_4} on F_2^n, S_4 the fourth elementary symmetric polynomial. It
//!   correlates with the non-classical phase e^{2 pi i |x| / 8} but, as n grows, not
//!   with any (-1)^P for a cubic P.
//! * f = (1, i) on F_2: a degree-2 phase polynomial that is not a rotated exponential
//!   of any classical polynomial.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::{self, Caps};
use crate::error::{Error, Result};
use crate::poly::{is_phase_polynomial, symmetric_table, DerivativeMode, MonomialBasis};
use crate::poly::best_classical_correlation;
use crate::random;
use crate::reduce;
use crate::signs::SignTable;
use crate::space::Space;
use crate::table::{FieldTable, FunctionTable};

fn s4_space(n: usize) -> Result<Space> {
    if n < 4 {
        return Err(Error::Precondition(format!("S_4 needs n >= 4, got {n}")));
    }
    Space::of(2, n)
}

/// S_4(x) = C(|x|, 4) mod 2, which by Lucas is bit 2 of |x|.
pub fn s4_value(x: usize) -> u32 {
    (x.count_ones() >> 2) & 1
}

pub fn s4_table(n: usize) -> Result<FieldTable> {
    let space = s4_space(n)?;
    Ok(FieldTable::from_fn(space, s4_value))
}

/// The quadruple sum over i < j < k < l, evaluated literally.
pub fn s4_literal(n: usize) -> Result<FieldTable> {
    let space = s4_space(n)?;
    Ok(FieldTable::from_fn(space, |x| {
        let bit = |i: usize| (x >> i) & 1;
        let mut s = 0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for l in k + 1..n {
                        s ^= bit(i) & bit(j) & bit(k) & bit(l);
                    }
                }
            }
        }
        s as u32
    }))
}

/// f = (-1)^{S_4}: +1 exactly when |x| mod 8 is 0, 1, 2 or 3.
pub fn s4_signs(n: usize) -> Result<SignTable> {
    s4_space(n)?;
    Ok(SignTable::new(n, |x| s4_value(x) == 1))
}

/// (1 - i - sqrt(2) i) / 4, the large-n value of E f conj(e^{2 pi i |x| / 8}).
pub fn s4_limit() -> Complex64 {
    Complex64::new(0.25, -(1.0 + SQRT_2) / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMode {
    /// Average over the full table of 2^n points.
    ExactTable,
    /// Sum over Hamming weights with binomial weights.
    Binomial,
}

fn sigma(w: u64) -> f64 {
    if w % 8 < 4 {
        1.0
    } else {
        -1.0
    }
}

/// Binomial probabilities C(n, m) / 2^n. Up to n = 120 the coefficients are exact
/// u128 integers rounded once; beyond that they come from log-space recurrences.
fn binomial_weights(n: usize) -> Vec<f64> {
    if n <= 120 {
        let mut c: u128 = 1;
        let scale = 2f64.powi(n as i32);
        let mut out = Vec::with_capacity(n + 1);
        for m in 0..=n {
            out.push(c as f64 / scale);
            if m < n {
                // C(n, m+1) = C(n, m) (n - m) / (m + 1), exact at every step
                c = c * (n - m) as u128 / (m + 1) as u128;
            }
        }
        out
    } else {
        let mut log_c = 0.0f64;
        let base = n as f64 * std::f64::consts::LN_2;
        let mut out = Vec::with_capacity(n + 1);
        for m in 0..=n {
            out.push((log_c - base).exp());
            if m < n {
                log_c += ((n - m) as f64).ln() - ((m + 1) as f64).ln();
            }
        }
        out
    }
}

/// E_x f(x) conj(g(x)) with f = (-1)^{S_4} and g = e^{2 pi i |x| / 8}.
pub fn s4_correlation(n: usize, mode: CorrelationMode, caps: &Caps) -> Result<Complex64> {
    match mode {
        CorrelationMode::ExactTable => {
            let space = s4_space(n)?;
            caps::check("exact S_4 correlation", space.size() as u128, caps.direct_summands)?;
            let f = s4_signs(n)?.to_table();
            let g = symmetric_table(n, 3)?;
            f.inner_product(&g)
        }
        CorrelationMode::Binomial => {
            if n < 4 {
                return Err(Error::Precondition(format!("S_4 needs n >= 4, got {n}")));
            }
            let weights = binomial_weights(n);
            let term = |m: usize| {
                let phase = Complex64::from_polar(1.0, -TAU * (m % 8) as f64 / 8.0);
                weights[m] * sigma(m as u64) * phase
            };
            let re = reduce::compensated_sum((0..=n).map(|m| term(m).re));
            let im = reduce::compensated_sum((0..=n).map(|m| term(m).im));
            Ok(Complex64::new(re, im))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CubicStrategy {
    /// Every P in Poly_3(F_2^n); needs 2^{dim Poly_3} within the cap.
    Exhaustive,
    /// Single-monomial toggles from the best symmetric cubic and from random states.
    HillClimb { restarts: usize, moves: usize, seed: u64 },
}

impl CubicStrategy {
    pub fn hill_climb_default() -> Self {
        CubicStrategy::HillClimb {
            restarts: 100,
            moves: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSearch {
    pub n: usize,
    /// max over the searched cubics of |<f, (-1)^P>|.
    pub value: f64,
    /// True for the exhaustive maximum, false for a best-found lower bound.
    pub exact: bool,
    /// Cubic monomials (as bit masks of degree 2 and 3) of the best P; its affine
    /// part is whatever the final Walsh transform picked.
    pub support: Vec<u64>,
    pub evaluations: u64,
}

fn walsh_max(h: &mut [i64]) -> i64 {
    let len = h.len();
    let mut half = 1;
    while half < len {
        for block in (0..len).step_by(2 * half) {
            for i in block..block + half {
                let (a, b) = (h[i], h[i + half]);
                h[i] = a + b;
                h[i + half] = a - b;
            }
        }
        half *= 2;
    }
    h.iter().map(|v| v.abs()).max().unwrap_or(0)
}

/// Degree 2 and 3 monomials as bit masks.
fn high_monomials(n: usize) -> Vec<u64> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push((1u64 << i) | (1 << j));
            for k in j + 1..n {
                out.push((1u64 << i) | (1 << j) | (1 << k));
            }
        }
    }
    out.sort_by_key(|m| (m.count_ones(), *m));
    out
}

struct Climber<'a> {
    monomials: &'a [u64],
    state: Vec<bool>,
    h: Vec<i64>,
    scratch: Vec<i64>,
}

impl<'a> Climber<'a> {
    fn new(signs: &'a [i64], monomials: &'a [u64], state: Vec<bool>) -> Self {
        let mut h = signs.to_vec();
        for (&m, _) in monomials.iter().zip(&state).filter(|(_, &on)| on) {
            Self::apply(&mut h, m);
        }
        Climber {
            monomials,
            state,
            scratch: vec![0; h.len()],
            h,
        }
    }

    fn apply(h: &mut [i64], mask: u64) {
        for (x, v) in h.iter_mut().enumerate() {
            if x as u64 & mask == mask {
                *v = -*v;
            }
        }
    }

    fn score(&mut self) -> i64 {
        self.scratch.copy_from_slice(&self.h);
        walsh_max(&mut self.scratch)
    }

    fn toggle(&mut self, i: usize) {
        self.state[i] = !self.state[i];
        Self::apply(&mut self.h, self.monomials[i]);
    }
}

/// Best correlation with (-1)^{a S_1 + b S_2 + c S_3} over (a, b, c) in F_2^3,
/// returned as the monomial state it corresponds to (S_1 is affine and left to the
/// Walsh step).
fn symmetric_start(signs: &[i64], monomials: &[u64]) -> Vec<bool> {
    let mut best = (i64::MIN, vec![false; monomials.len()]);
    for code in 0..4u32 {
        let state: Vec<bool> = monomials
            .iter()
            .map(|m| (m.count_ones() == 2 && code & 1 == 1) || (m.count_ones() == 3 && code & 2 == 2))
            .collect();
        let mut c = Climber::new(signs, monomials, state.clone());
        let s = c.score();
        if s > best.0 {
            best = (s, state);
        }
    }
    best.1
}

/// max |<(-1)^{S_4}, (-1)^P>| over cubic P, exactly or as a hill-climb lower bound.
pub fn s4_vs_classical_cubics(n: usize, strategy: &CubicStrategy, caps: &Caps) -> Result<CubicSearch> {
    let space = s4_space(n)?;
    let f = s4_signs(n)?;
    match *strategy {
        CubicStrategy::Exhaustive => {
            let basis = MonomialBasis::new(space, 3);
            let found = best_classical_correlation(&f.to_table(), &basis, caps)?;
            let support = basis
                .exponents()
                .iter()
                .zip(&found.coeffs)
                .filter(|(e, &c)| c == 1 && e.iter().sum::<u32>() >= 2)
                .map(|(e, _)| e.iter().enumerate().fold(0u64, |m, (i, &k)| m | ((k as u64) << i)))
                .collect();
            Ok(CubicSearch {
                n,
                value: found.value(),
                exact: true,
                support,
                evaluations: found.evals.min(u64::MAX as u128) as u64,
            })
        }
        CubicStrategy::HillClimb { restarts, moves, seed } => {
            if n > 24 {
                return Err(Error::Precondition(format!("hill climb needs n <= 24, got {n}")));
            }
            // one Walsh transform per scored state
            let required = (restarts as u128 + 1) * (moves as u128 + 1) + 4;
            caps::check("cubic hill climb", required, caps.table_passes)?;
            let signs: Vec<i64> = (0..space.size())
                .map(|x| if f.is_negative(x) { -1 } else { 1 })
                .collect();
            let monomials = high_monomials(n);
            let symmetric = symmetric_start(&signs, &monomials);
            let runs: Vec<(i64, Vec<bool>)> = (0..=restarts)
                .into_par_iter()
                .map(|r| {
                    let mut rng = random::stream_rng(seed, r as u64);
                    let start = if r == 0 {
                        symmetric.clone()
                    } else {
                        (0..monomials.len()).map(|_| rng.gen_bool(0.5)).collect()
                    };
                    let mut c = Climber::new(&signs, &monomials, start);
                    let mut cur = c.score();
                    for _ in 0..moves {
                        let i = rng.gen_range(0..monomials.len());
                        c.toggle(i);
                        let next = c.score();
                        if next > cur {
                            cur = next;
                        } else {
                            c.toggle(i);
                        }
                    }
                    (cur, c.state)
                })
                .collect();
            // first maximal run wins, so the result does not depend on scheduling
            let (best, state) = runs
                .into_iter()
                .fold((i64::MIN, Vec::new()), |a, b| if b.0 > a.0 { b } else { a });
            Ok(CubicSearch {
                n,
                value: best as f64 / space.size() as f64,
                exact: false,
                support: monomials
                    .iter()
                    .zip(&state)
                    .filter(|(_, &on)| on)
                    .map(|(&m, _)| m)
                    .collect(),
                evaluations: ((restarts as u64 + 1) * (moves as u64 + 1)).saturating_add(4),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub name: String,
    pub value: Complex64,
    /// Where the number comes from, e.g. "closed-form".
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub computed: String,
    pub reference: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

/// One point of an n-indexed series, the rows of the CSV form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub n: usize,
    pub value: Complex64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub name: String,
    pub n: usize,
    pub computed: Vec<NamedValue>,
    pub references: Vec<ReferenceValue>,
    /// Pairs (computed, reference) whose distance is reported.
    pub deviations: Vec<Deviation>,
    pub checks: Vec<Check>,
    pub series: Vec<SeriesPoint>,
    pub method: Vec<String>,
}

impl CounterexampleReport {
    fn new(name: &str, n: usize) -> Self {
        CounterexampleReport {
            name: name.to_string(),
            n,
            computed: Vec::new(),
            references: Vec::new(),
            deviations: Vec::new(),
            checks: Vec::new(),
            series: Vec::new(),
            method: Vec::new(),
        }
    }

    fn compute(&mut self, name: &str, value: Complex64) {
        self.computed.push(NamedValue {
            name: name.to_string(),
            value,
        });
    }

    fn reference(&mut self, name: &str, value: Complex64, tag: &str) {
        self.references.push(ReferenceValue {
            name: name.to_string(),
            value,
            tag: tag.to_string(),
        });
    }

    fn compare(&mut self, computed: &str, reference: &str) {
        self.deviations.push(Deviation {
            computed: computed.to_string(),
            reference: reference.to_string(),
            value: f64::NAN,
        });
    }

    fn check(&mut self, name: &str, pass: bool) {
        self.checks.push(Check {
            name: name.to_string(),
            pass,
        });
    }

    pub fn computed_value(&self, name: &str) -> Option<Complex64> {
        self.computed.iter().find(|v| v.name == name).map(|v| v.value)
    }

    pub fn reference_value(&self, name: &str) -> Option<Complex64> {
        self.references.iter().find(|v| v.name == name).map(|v| v.value)
    }

    /// Refreshes every deviation from the stored computed and reference values.
    pub fn recompute_deviations(&mut self) -> Result<()> {
        for i in 0..self.deviations.len() {
            let d = &self.deviations[i];
            let c = self.computed_value(&d.computed).ok_or_else(|| {
                Error::Format(format!("deviation names unknown computed value {}", d.computed))
            })?;
            let r = self.reference_value(&d.reference).ok_or_else(|| {
                Error::Format(format!("deviation names unknown reference value {}", d.reference))
            })?;
            self.deviations[i].value = (c - r).norm();
        }
        Ok(())
    }

    pub fn check_invariants(&self) -> Result<()> {
        if let Some(r) = self.references.iter().find(|r| r.tag.trim().is_empty()) {
            return Err(Error::Format(format!("reference value {} has no provenance tag", r.name)));
        }
        let mut copy = self.clone();
        copy.recompute_deviations()?;
        for (a, b) in copy.deviations.iter().zip(&self.deviations) {
            if (a.value - b.value).abs() > 1e-12 {
                return Err(Error::Format(format!(
                    "stored deviation {} for {} differs from the recomputed {}",
                    b.value, b.computed, a.value
                )));
            }
        }
        Ok(())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// `n,re,im,deviation` rows of the series.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,re,im,deviation\n");
        for s in &self.series {
            let _ = writeln!(out, "{},{:.17e},{:.17e},{:.17e}", s.n, s.value.re, s.value.im, s.deviation);
        }
        out
    }
}

/// Binomial-mode correlation along `ns`, plus the exact-table value where it fits the
/// cap. The last n is the report's headline.
pub fn s4_report(ns: &[usize], tolerance: f64, caps: &Caps) -> Result<CounterexampleReport> {
    let last = *ns
        .last()
        .ok_or_else(|| Error::Precondition("no n values".to_string()))?;
    let mut report = CounterexampleReport::new("s4", last);
    let limit = s4_limit();
    report.reference("limit", limit, "closed-form: weights equidistributed mod 8");
    report.method.push("binomial sum over Hamming weights, compensated".to_string());

    let values = ns
        .iter()
        .map(|&n| s4_correlation(n, CorrelationMode::Binomial, caps))
        .collect::<Result<Vec<_>>>()?;
    for (&n, &v) in ns.iter().zip(&values) {
        report.series.push(SeriesPoint {
            n,
            value: v,
            deviation: (v - limit).norm(),
        });
    }
    let head = *values.last().expect("non-empty");
    report.compute("correlation", head);
    report.compare("correlation", "limit");
    report.check(
        &format!("|correlation - limit| <= {tolerance}"),
        (head - limit).norm() <= tolerance,
    );
    report.check(
        "deviation non-increasing in n",
        report.series.windows(2).all(|w| w[1].deviation <= w[0].deviation),
    );

    if caps::pow(2, last) <= caps.direct_summands && last <= 40 {
        let exact = s4_correlation(last, CorrelationMode::ExactTable, caps)?;
        report.compute("correlation_exact_table", exact);
        report.reference("correlation_binomial", head, "independent evaluation: binomial sum");
        report.compare("correlation_exact_table", "correlation_binomial");
        report.check("exact table agrees with binomial sum to 1e-12", (exact - head).norm() <= 1e-12);
        report.method.push("exact average over the 2^n table".to_string());
    }
    report.recompute_deviations()?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// E|f - g|
    L1,
    /// (E|f - g|^2)^{1/2}
    L2,
    /// max |f - g|
    Sup,
}

impl DistanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            DistanceKind::L1 => "l1",
            DistanceKind::L2 => "l2",
            DistanceKind::Sup => "sup",
        }
    }

    fn of(&self, f: &FunctionTable, g: &FunctionTable) -> f64 {
        let diffs = f.values().iter().zip(g.values()).map(|(a, b)| (a - b).norm());
        match self {
            DistanceKind::L1 => diffs.sum::<f64>() / f.len() as f64,
            DistanceKind::L2 => (diffs.map(|d| d * d).sum::<f64>() / f.len() as f64).sqrt(),
            DistanceKind::Sup => diffs.fold(0.0, f64::max),
        }
    }
}

/// Golden-section refinement on [lo, hi].
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..100 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    let x = (lo + hi) / 2.0;
    (x, f(x))
}

pub const FAIL_GRID: usize = 10_000;

/// Minimum over the theta grid (then refined) and over P in Poly_2(F_2) of the distance
/// from f to e^{2 pi i theta} e_F(P). Returns (distance, theta, index of P in 0, 1, x, 1 + x).
pub fn min_rotated_distance(f: &FunctionTable, kind: DistanceKind) -> Result<(f64, f64, usize)> {
    let space = Space::of(2, 1)?;
    space.check_same(&f.space())?;
    let polys: [(f64, f64); 4] = [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)];
    let distance = |theta: f64, (a, b): (f64, f64)| {
        let u = Complex64::from_polar(1.0, TAU * theta);
        let g = FunctionTable::new(space, vec![u * a, u * b]).expect("two values");
        kind.of(f, &g)
    };
    let mut best = (f64::INFINITY, 0.0, 0usize);
    for (pi, &poly) in polys.iter().enumerate() {
        for t in 0..FAIL_GRID {
            let theta = t as f64 / FAIL_GRID as f64;
            let d = distance(theta, poly);
            if d < best.0 {
                best = (d, theta, pi);
            }
        }
    }
    let step = 1.0 / FAIL_GRID as f64;
    let (theta, refined) = golden_min(|t| distance(t, polys[best.2]), best.1 - step, best.1 + step);
    if refined < best.0 {
        Ok((refined, theta.rem_euclid(1.0), best.2))
    } else {
        Ok(best)
    }
}

/// f = (1, i) on F_2: phase-polynomial membership at degrees 2 and 1, and its minimum
/// distance to e^{2 pi i theta} e_F(P) over theta and P in Poly_2(F_2), in the L1, L2
/// and sup senses.
pub fn fail_example_report(caps: &Caps) -> Result<CounterexampleReport> {
    let space = Space::of(2, 1)?;
    let f = FunctionTable::new(space, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)])?;
    let mut report = CounterexampleReport::new("fail-example", 1);
    report.check(
        "phase polynomial of degree 2",
        is_phase_polynomial(&f, 2, None, DerivativeMode::Full, caps)?,
    );
    report.check(
        "not a phase polynomial of degree 1",
        !is_phase_polynomial(&f, 1, None, DerivativeMode::Full, caps)?,
    );
    let two_sin = 2.0 * (PI / 8.0).sin();
    let half_root2 = SQRT_2 / 2.0;
    report.reference(
        "two_sin_pi_8",
        Complex64::new(two_sin, 0.0),
        "closed-form: L2 and sup optimum, rotation halfway between 1 and i",
    );
    report.reference(
        "half_sqrt_2",
        Complex64::new(half_root2, 0.0),
        "closed-form: L1 optimum, |1 - u| + |i - u| >= |1 - i| with equality at u = 1",
    );
    for kind in [DistanceKind::L1, DistanceKind::L2, DistanceKind::Sup] {
        let (d, theta, poly) = min_rotated_distance(&f, kind)?;
        let name = format!("min_{}_distance", kind.name());
        report.compute(&name, Complex64::new(d, 0.0));
        report.compute(&format!("{}_theta", kind.name()), Complex64::new(theta, 0.0));
        report.compute(&format!("{}_poly_index", kind.name()), Complex64::new(poly as f64, 0.0));
        report.compare(&name, "two_sin_pi_8");
        if kind == DistanceKind::L1 {
            report.compare(&name, "half_sqrt_2");
            report.check("L1 minimum positive", d > 0.0);
        }
    }
    report.recompute_deviations()?;
    let within = |computed: &str, reference: &str| {
        report
            .deviations
            .iter()
            .find(|d| d.computed == computed && d.reference == reference)
            .is_some_and(|d| d.value <= 1e-3)
    };
    let checks = [
        ("L1 minimum equals 2 sin(pi/8) within 1e-3", within("min_l1_distance", "two_sin_pi_8")),
        ("L1 minimum equals sqrt(2)/2 within 1e-3", within("min_l1_distance", "half_sqrt_2")),
        ("L2 minimum equals 2 sin(pi/8) within 1e-3", within("min_l2_distance", "two_sin_pi_8")),
        ("sup minimum equals 2 sin(pi/8) within 1e-3", within("min_sup_distance", "two_sin_pi_8")),
    ];
    for (name, pass) in checks {
        report.check(name, pass);
    }
    report.method.push(format!(
        "theta grid of {FAIL_GRID} points over the 4 polynomials of Poly_2(F_2), golden-section refinement within one grid step"
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gowers::{weak_norm, WeakNormStrategy};
    use crate::poly::HillClimb;

    fn binom(n: u64, k: u64) -> u64 {
        if k > n {
            return 0;
        }
        (0..k).fold(1u64, |c, i| c * (n - i) / (i + 1))
    }

    #[test]
    fn s4_small_values() {
        assert_eq!(s4_value(0), 0);
        assert_eq!(s4_value(0b1111), 1);
        let f = s4_signs(6).unwrap();
        assert!(!f.is_negative(0));
        assert!(f.is_negative(0b1111));
        assert!(s4_table(3).is_err());
    }

    #[test]
    fn s4_fast_path_matches_quadruple_sum() {
        for n in 4..=12 {
            assert_eq!(s4_table(n).unwrap(), s4_literal(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn s4_matches_binomial_parity() {
        for w in 0..40u64 {
            assert_eq!(s4_value((1usize << w) - 1) as u64, binom(w, 4) % 2, "w={w}");
        }
    }

    #[test]
    fn sign_pattern_by_weight_mod_8() {
        for w in 0..24u32 {
            assert_eq!(sigma(w as u64) < 0.0, s4_value((1usize << w) - 1) == 1);
        }
    }

    #[test]
    fn binomial_weights_sum_to_one() {
        for n in [4, 16, 64, 120, 121, 500] {
            let s = reduce::compensated_sum(binomial_weights(n));
            assert!((s - 1.0).abs() < 1e-12, "n={n}: {s}");
        }
    }

    #[test]
    fn exact_and_binomial_agree() {
        let caps = Caps::default();
        for n in [4, 8, 12, 16] {
            let a = s4_correlation(n, CorrelationMode::ExactTable, &caps).unwrap();
            let b = s4_correlation(n, CorrelationMode::Binomial, &caps).unwrap();
            assert!((a - b).norm() < 1e-12, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn exact_mode_respects_cap() {
        let caps = Caps {
            direct_summands: 1 << 10,
            ..Caps::default()
        };
        assert!(matches!(
            s4_correlation(12, CorrelationMode::ExactTable, &caps),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn correlation_approaches_limit() {
        let caps = Caps::default();
        let limit = s4_limit();
        assert!((limit.norm() - (4.0 + 2.0 * SQRT_2).sqrt() / 4.0).abs() < 1e-15);
        // equidistributed weights: the average of sigma(r) e^{-2 pi i r/8} over r mod 8
        let oracle: Complex64 = (0..8)
            .map(|r| sigma(r) * Complex64::from_polar(1.0, -TAU * r as f64 / 8.0))
            .sum::<Complex64>()
            / 8.0;
        assert!((oracle - limit).norm() < 1e-15);
        let devs: Vec<f64> = [16, 32, 48, 64]
            .iter()
            .map(|&n| (s4_correlation(n, CorrelationMode::Binomial, &caps).unwrap() - limit).norm())
            .collect();
        assert!(devs[3] <= 0.02, "{devs:?}");
        assert!(devs.windows(2).all(|w| w[1] <= w[0]), "{devs:?}");
        // sigma(w) e^{-2 pi i w/8} has frequencies 0, 2, 4, 6 mod 8 only; frequency j decays
        // like |cos(pi j/8)|^n, so the error is at most 2 * 2^{-n/2}
        for (&n, &d) in [16, 32, 48, 64].iter().zip(&devs) {
            assert!(d <= 2.0 * 2f64.powf(-(n as f64) / 2.0), "n={n}: {d}");
        }
    }

    #[test]
    fn report_round_trip_and_csv() {
        let rep = s4_report(&[16, 32, 48, 64], 0.02, &Caps::default()).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
        rep.check_invariants().unwrap();
        let csv = rep.to_csv();
        assert_eq!(csv.lines().count(), 5);
        let json = serde_json::to_string(&rep).unwrap();
        let back: CounterexampleReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);
        let with_exact = s4_report(&[16], 0.2, &Caps::default()).unwrap();
        assert!(with_exact.computed_value("correlation_exact_table").is_some());
        assert!(with_exact.passed(), "{:?}", with_exact.checks);
    }

    #[test]
    fn tampered_deviation_is_detected() {
        let mut rep = s4_report(&[16, 32], 0.5, &Caps::default()).unwrap();
        rep.deviations[0].value += 0.1;
        assert!(rep.check_invariants().is_err());
        rep.references[0].tag.clear();
        assert!(rep.check_invariants().is_err());
    }

    #[test]
    fn walsh_matches_direct_correlation() {
        let n = 5;
        let signs: Vec<i64> = (0..1usize << n).map(|x| if s4_value(x) == 1 { -1 } else { 1 }).collect();
        let mut h = signs.clone();
        let m = walsh_max(&mut h);
        let direct = (0..1usize << n)
            .map(|xi| {
                (0..1usize << n)
                    .map(|x| signs[x] * if (x & xi).count_ones() % 2 == 1 { -1 } else { 1 })
                    .sum::<i64>()
                    .abs()
            })
            .max()
            .unwrap();
        assert_eq!(m, direct);
    }

    #[test]
    fn cubic_search_n4() {
        let caps = Caps::default();
        let exact = s4_vs_classical_cubics(4, &CubicStrategy::Exhaustive, &caps).unwrap();
        // for n = 4, S_4 = x1 x2 x3 x4 and the best cubic differs from it in one point
        assert!((exact.value - 7.0 / 8.0).abs() < 1e-12, "{}", exact.value);
        let climb = s4_vs_classical_cubics(
            4,
            &CubicStrategy::HillClimb {
                restarts: 8,
                moves: 40,
                seed: 1,
            },
            &caps,
        )
        .unwrap();
        assert!(!climb.exact);
        assert!(climb.value <= exact.value + 1e-12);
    }

    #[test]
    fn climber_state_reproduces_score() {
        let n = 6;
        let signs: Vec<i64> = (0..1usize << n).map(|x| if s4_value(x) == 1 { -1 } else { 1 }).collect();
        let monos = high_monomials(n);
        assert_eq!(monos.len(), 15 + 20);
        let found = s4_vs_classical_cubics(
            n,
            &CubicStrategy::HillClimb {
                restarts: 4,
                moves: 30,
                seed: 3,
            },
            &Caps::default(),
        )
        .unwrap();
        // rebuild the cubic from its support and score it independently
        let state: Vec<bool> = monos.iter().map(|m| found.support.contains(m)).collect();
        let mut c = Climber::new(&signs, &monos, state);
        assert_eq!(c.score() as f64 / 64.0, found.value);
        // and against the generic classical search restricted to that cubic part
        let space = Space::of(2, n).unwrap();
        let cubic = FunctionTable::from_fn(space, |x| {
            let v = found.support.iter().filter(|&&m| x as u64 & m == m).count() % 2;
            Complex64::new(if v == 1 { -1.0 } else { 1.0 }, 0.0)
        });
        let g = s4_signs(n).unwrap().to_table().mul(&cubic).unwrap();
        let affine = best_classical_correlation(&g, &MonomialBasis::new(space, 1), &Caps::default()).unwrap();
        assert!((affine.value() - found.value).abs() < 1e-12);
    }

    #[test]
    fn cubic_search_is_deterministic_and_trends_down() {
        let caps = Caps::default();
        let strategy = CubicStrategy::HillClimb {
            restarts: 3,
            moves: 20,
            seed: 0,
        };
        let a = s4_vs_classical_cubics(8, &strategy, &caps).unwrap();
        let b = s4_vs_classical_cubics(8, &strategy, &caps).unwrap();
        assert_eq!(a, b);
        let c = s4_vs_classical_cubics(12, &strategy, &caps).unwrap();
        assert!(c.value <= a.value + 1e-12, "{} vs {}", a.value, c.value);
    }

    #[test]
    fn weak_norm_bounds_correlation() {
        let caps = Caps::default();
        let params = HillClimb {
            restarts: 0,
            max_steps: 1,
            seed: 0,
        };
        for n in [4, 6, 8] {
            let f = s4_signs(n).unwrap().to_table();
            let corr = s4_correlation(n, CorrelationMode::Binomial, &caps).unwrap();
            let w = weak_norm(&f, 4, &WeakNormStrategy::Catalogue(params), &caps).unwrap();
            assert!(w.value >= corr.norm() - 1e-9, "n={n}: {} < {}", w.value, corr.norm());
        }
    }

    #[test]
    fn fail_example() {
        let rep = fail_example_report(&Caps::default()).unwrap();
        rep.check_invariants().unwrap();
        let status = |name: &str| rep.checks.iter().find(|c| c.name == name).unwrap().pass;
        assert!(status("phase polynomial of degree 2"));
        assert!(status("not a phase polynomial of degree 1"));
        assert!(status("L1 minimum positive"));
        assert!(status("L1 minimum equals sqrt(2)/2 within 1e-3"));
        assert!(status("L2 minimum equals 2 sin(pi/8) within 1e-3"));
        assert!(status("sup minimum equals 2 sin(pi/8) within 1e-3"));
        // the L1 optimum sits at a kink (u = 1), well away from 2 sin(pi/8)
        assert!(!status("L1 minimum equals 2 sin(pi/8) within 1e-3"));
    }

    #[test]
    fn rotated_distance_oracles() {
        let space = Space::of(2, 1).unwrap();
        let f = FunctionTable::new(space, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap();
        // closed forms on the circle for the (1, 1) pattern, phi the angle of u in [0, pi/2]
        let l1 = |phi: f64| (phi / 2.0).sin() + ((PI / 2.0 - phi) / 2.0).sin();
        let l2 = |phi: f64| ((2.0 - 2.0 * phi.cos()) / 2.0 + (2.0 - 2.0 * phi.sin()) / 2.0).sqrt();
        let grid_l1 = (0..=1000).map(|t| l1(t as f64 * PI / 2000.0)).fold(f64::INFINITY, f64::min);
        let grid_l2 = (0..=1000).map(|t| l2(t as f64 * PI / 2000.0)).fold(f64::INFINITY, f64::min);
        let (d1, _, _) = min_rotated_distance(&f, DistanceKind::L1).unwrap();
        let (d2, t2, _) = min_rotated_distance(&f, DistanceKind::L2).unwrap();
        assert!((d1 - grid_l1).abs() < 1e-9, "{d1} vs {grid_l1}");
        assert!((d2 - grid_l2).abs() < 1e-6, "{d2} vs {grid_l2}");
        assert!((d2 - 2.0 * (PI / 8.0).sin()).abs() < 1e-9);
        assert!((t2 - 0.125).abs() < 1e-6 || (t2 - 0.625).abs() < 1e-6, "{t2}");
        // both sign patterns reach the L1 minimum
        for pattern in [(1.0, 1.0), (1.0, -1.0)] {
            let best = (0..FAIL_GRID)
                .map(|t| {
                    let u = Complex64::from_polar(1.0, TAU * t as f64 / FAIL_GRID as f64);
                    let g = FunctionTable::new(space, vec![u * pattern.0, u * pattern.1]).unwrap();
                    f.l1_distance(&g).unwrap()
                })
                .fold(f64::INFINITY, f64::min);
            assert!((best - SQRT_2 / 2.0).abs() < 1e-9);
        }
    }
}
