//! Recursive decoding of a function that nearly passes the order-k test.
//!
//! For k = 1 the output is the nearest constant phase. For k >= 2: draw shifts h whose
//! derivative Delta_h g nearly passes the order-(k-1) test, decode each derivative to
//! phi_h, rotate phi_h so its values are pK-th roots of unity, keep a set of shifts
//! whose phi_h satisfy the cocycle identity phi_a(x) phi_b(x+a) = phi_b(x) phi_a(x+b)
//! pairwise, integrate psi(x + h) = phi_h(x) psi(x) from psi(0) = 1, and read the
//! remaining constant phase off the mean of g conj(psi).
//!
//! Every psi is kept as integer exponents of a fixed root of unity, so the identities
//! are checked exactly.

use std::collections::VecDeque;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{admissible_k, polytest_statistic, shift_score, StatisticMode};
use crate::caps::Caps;
use crate::error::{DecodeFailure, Error, Result};
use crate::field::unit_root;
use crate::poly::{classical_phase, interpolate, is_phase_polynomial, DerivativeMode, PhasePolynomial};
use crate::random;
use crate::sampling::MonteCarlo;
use crate::space::{Space, Subspace};
use crate::table::{FieldTable, FunctionTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeParams {
    /// Score bound for a good shift; defaults to max(8 * statistic, 1e-6) per level.
    pub good_threshold: Option<f64>,
    /// Good shifts kept per level beyond the dimension n.
    pub extra_shifts: usize,
    /// Shift draws allowed per level.
    pub max_draws: usize,
    /// Shift sampling for scores too large to enumerate.
    pub inner: MonteCarlo,
    /// Enumeration budget for exact scores and statistics.
    pub exact_budget: u128,
    /// Largest allowed |e^{i theta} - zeta| when rotating onto a root of unity.
    pub snap_tolerance: f64,
    /// Minimum fraction of pairwise cocycle identities that must hold.
    pub vote_threshold: f64,
    /// Smallest |mean| from which a constant phase is read.
    pub min_mean: f64,
}

impl Default for DecodeParams {
    fn default() -> Self {
        DecodeParams {
            good_threshold: None,
            extra_shifts: 4,
            max_draws: 256,
            inner: MonteCarlo { samples: 32, seed: 0 },
            exact_budget: 1 << 16,
            snap_tolerance: 0.2,
            vote_threshold: 2.0 / 3.0,
            min_mean: 1e-3,
        }
    }
}

impl DecodeParams {
    fn check(&self) -> Result<()> {
        if self.good_threshold.is_some_and(|t| t <= 0.0) {
            return Err(Error::Precondition("good_threshold must be positive".into()));
        }
        if self.max_draws == 0 || self.inner.samples < 2 {
            return Err(Error::Precondition("need max_draws >= 1 and at least 2 inner samples".into()));
        }
        Ok(())
    }
}

/// Diagnostics aggregated over every node of one recursion order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub order: usize,
    pub nodes: usize,
    pub drawn: usize,
    pub good: usize,
    pub snaps: usize,
    pub max_snap: f64,
    pub discreteness_violations: usize,
    pub pair_checks: usize,
    pub pair_violations: usize,
    pub min_vote: f64,
}

impl LevelTrace {
    fn merge(&mut self, other: &LevelTrace) {
        if self.nodes == 0 {
            *self = other.clone();
            return;
        }
        self.nodes += other.nodes;
        self.drawn += other.drawn;
        self.good += other.good;
        self.snaps += other.snaps;
        self.max_snap = self.max_snap.max(other.max_snap);
        self.discreteness_violations += other.discreteness_violations;
        self.pair_checks += other.pair_checks;
        self.pair_violations += other.pair_violations;
        self.min_vote = self.min_vote.min(other.min_vote);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecodeTrace {
    /// Indexed by order, highest first.
    pub levels: Vec<LevelTrace>,
}

impl DecodeTrace {
    fn merge(&mut self, other: &DecodeTrace) {
        for lt in &other.levels {
            match self.levels.iter_mut().find(|l| l.order == lt.order) {
                Some(l) => l.merge(lt),
                None => self.levels.push(lt.clone()),
            }
        }
        self.levels.sort_by(|a, b| b.order.cmp(&a.order));
    }

    /// Good shifts over draws at the top order.
    pub fn good_fraction(&self) -> f64 {
        match self.levels.first() {
            Some(l) if l.drawn > 0 => l.good as f64 / l.drawn as f64,
            _ => 1.0,
        }
    }

    pub fn snaps(&self) -> usize {
        self.levels.iter().map(|l| l.snaps).sum()
    }

    pub fn pair_violations(&self) -> usize {
        self.levels.iter().map(|l| l.pair_violations).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub k: usize,
    pub phi: PhasePolynomial,
    /// int_V |g - phi|
    pub distance: f64,
    pub statistic: f64,
    pub trace: DecodeTrace,
}

/// e^{i theta} times omega^{exps}, omega a primitive `modulus`-th root of unity.
struct Decoded {
    theta: f64,
    exps: Vec<u64>,
    trace: DecodeTrace,
}

struct Ctx<'a> {
    space: Space,
    params: &'a DecodeParams,
    caps: Caps,
    modulus: u64,
    /// Snapping grid p * K per phase degree.
    grids: Vec<u64>,
}

fn mean_phase(t: &FunctionTable, min_mean: f64) -> Result<f64> {
    let c = t.mean();
    if c.norm() < min_mean {
        return Err(DecodeFailure::MeanVanishes { modulus: c.norm() }.into());
    }
    Ok(c.arg())
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    random::stream_rng(seed, stream).gen()
}

fn decode_level(g: &FunctionTable, k: usize, threshold: f64, seed: u64, ctx: &Ctx) -> Result<Decoded> {
    let space = ctx.space;
    let size = space.size();
    let m = ctx.modulus;
    if k == 1 {
        return Ok(Decoded {
            theta: mean_phase(g, ctx.params.min_mean)?,
            exps: vec![0; size],
            trace: DecodeTrace::default(),
        });
    }
    let mut level = LevelTrace {
        order: k,
        nodes: 1,
        min_vote: 1.0,
        ..LevelTrace::default()
    };

    // good shifts, drawn until enough of them span V
    let want = space.n() + ctx.params.extra_shifts;
    let mut rng = random::rng(seed);
    let mut good: Vec<(usize, f64)> = Vec::new();
    let mut seen = vec![false; size];
    seen[0] = true;
    while level.drawn < ctx.params.max_draws && good.len() < want {
        if seen.iter().all(|&s| s) {
            break;
        }
        let h = rng.gen_range(1..size.max(2));
        if size == 1 || seen[h] {
            continue;
        }
        seen[h] = true;
        level.drawn += 1;
        let inner = MonteCarlo {
            samples: ctx.params.inner.samples,
            seed: derive_seed(seed, h as u64),
        };
        let score = shift_score(g, k, h, &ctx.caps, inner)?;
        if score.value <= threshold {
            good.push((h, score.value));
        }
    }
    level.good = good.len();
    let shifts: Vec<usize> = good.iter().map(|g| g.0).collect();
    if Subspace::span(space, &shifts).len() != size {
        return Err(DecodeFailure::InsufficientGoodShifts {
            order: k,
            found: good.len(),
            drawn: level.drawn,
        }
        .into());
    }

    // decode every derivative
    let children: Vec<Result<Decoded>> = good
        .par_iter()
        .enumerate()
        .map(|(i, &(h, score))| {
            let child_threshold = ctx.params.good_threshold.unwrap_or((8.0 * score).max(1e-6));
            decode_level(&g.mult_derivative(h), k - 1, child_threshold, derive_seed(seed, (size + i) as u64), ctx)
        })
        .collect();

    // snap each phi_h onto pK-th roots and check phi_h(x) ... phi_h(x + (p-1)h) = 1
    let grid = ctx.grids[k - 2];
    let step = m / grid;
    let p = space.p() as usize;
    let mut phis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut trace = DecodeTrace::default();
    for ((h, _), child) in good.iter().zip(children) {
        let child = match child {
            Ok(c) => c,
            Err(Error::Decode(_)) => continue,
            Err(e) => return Err(e),
        };
        trace.merge(&child.trace);
        let turns = child.theta / std::f64::consts::TAU * grid as f64;
        let t = (turns.round() as i64).rem_euclid(grid as i64) as u64;
        let snap = (Complex64::from_polar(1.0, child.theta) - unit_root(t, grid)).norm();
        level.snaps += 1;
        level.max_snap = level.max_snap.max(snap);
        if snap > ctx.params.snap_tolerance {
            return Err(DecodeFailure::SnapOutOfTolerance {
                order: k,
                distance: snap,
                tolerance: ctx.params.snap_tolerance,
            }
            .into());
        }
        let exps: Vec<u64> = child.exps.iter().map(|e| (e + t * step) % m).collect();
        let discrete = (0..size).all(|x| {
            let mut y = x;
            let mut acc = 0;
            for _ in 0..p {
                acc += exps[y];
                y = space.add(y, *h);
            }
            acc % m == 0
        });
        if discrete {
            phis.push((*h, exps));
        } else {
            level.discreteness_violations += 1;
        }
    }

    // pairwise cocycle identities
    let pairs: Vec<(usize, usize)> = (0..phis.len())
        .flat_map(|a| (a + 1..phis.len()).map(move |b| (a, b)))
        .collect();
    let consistent: Vec<bool> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (ha, pa) = &phis[a];
            let (hb, pb) = &phis[b];
            (0..size).all(|x| (pa[x] + pb[space.add(x, *ha)]) % m == (pb[x] + pa[space.add(x, *hb)]) % m)
        })
        .collect();
    level.pair_checks = pairs.len();
    level.pair_violations = consistent.iter().filter(|c| !**c).count();
    let vote = if pairs.is_empty() {
        1.0
    } else {
        1.0 - level.pair_violations as f64 / pairs.len() as f64
    };
    level.min_vote = vote;
    if vote < ctx.params.vote_threshold {
        return Err(DecodeFailure::VoteBelowThreshold {
            order: k,
            agreement: vote,
            threshold: ctx.params.vote_threshold,
        }
        .into());
    }

    // keep a mutually consistent set, most-agreeing shifts first
    let mut agree = vec![0usize; phis.len()];
    let mut ok = vec![vec![true; phis.len()]; phis.len()];
    for (&(a, b), &c) in pairs.iter().zip(&consistent) {
        ok[a][b] = c;
        ok[b][a] = c;
        if c {
            agree[a] += 1;
            agree[b] += 1;
        }
    }
    let mut order: Vec<usize> = (0..phis.len()).collect();
    order.sort_by(|&a, &b| agree[b].cmp(&agree[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if kept.iter().all(|&j| ok[i][j]) {
            kept.push(i);
        }
    }
    // a basis among the kept shifts: the only relations left are p-cycles and
    // commutators, both checked above, so integration is path independent
    let mut basis: Vec<usize> = Vec::new();
    let mut span_dim = 0;
    for &i in &kept {
        let mut cand: Vec<usize> = basis.iter().map(|&j| phis[j].0).collect();
        cand.push(phis[i].0);
        let dim = Subspace::span(space, &cand).dim();
        if dim > span_dim {
            span_dim = dim;
            basis.push(i);
        }
    }
    if span_dim != space.n() {
        return Err(DecodeFailure::InsufficientGoodShifts {
            order: k,
            found: kept.len(),
            drawn: level.drawn,
        }
        .into());
    }

    // integrate
    let mut psi: Vec<Option<u64>> = vec![None; size];
    psi[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        let px = psi[x].unwrap();
        for &i in &basis {
            let (h, phi) = &phis[i];
            let y = space.add(x, *h);
            let py = (px + phi[x]) % m;
            match psi[y] {
                None => {
                    psi[y] = Some(py);
                    queue.push_back(y);
                }
                Some(v) if v != py => {
                    return Err(Error::Numerical(format!(
                        "integration is path dependent at order {k}"
                    )))
                }
                Some(_) => {}
            }
        }
    }
    let exps: Vec<u64> = psi.into_iter().map(|e| e.expect("basis spans V")).collect();
    let psi_table = FunctionTable::from_fn(space, |x| unit_root(exps[x], m));
    let theta = mean_phase(&g.mul_conj(&psi_table)?, ctx.params.min_mean)?;
    trace.merge(&DecodeTrace { levels: vec![level] });
    Ok(Decoded { theta, exps, trace })
}

/// Recovers a phase polynomial of degree k - 1 close to g.
pub fn decode(g: &FunctionTable, k: usize, params: &DecodeParams, seed: u64, caps: &Caps) -> Result<DecodeResult> {
    if k == 0 {
        return Err(Error::Precondition("decoding needs k >= 1".into()));
    }
    params.check()?;
    g.check_bounded()?;
    let space = g.space();
    let budget = Caps {
        pattern_evals: params.exact_budget.min(caps.pattern_evals),
        ..*caps
    };
    let statistic = polytest_statistic(
        g,
        k,
        StatisticMode::Exact,
        &budget,
        Some(MonteCarlo {
            samples: params.inner.samples.max(256),
            seed: derive_seed(seed, u64::MAX),
        }),
    )?;
    let threshold = params
        .good_threshold
        .unwrap_or((8.0 * statistic.value()).max(1e-6));
    let grids = (0..k.saturating_sub(1))
        .map(|d| Ok(space.p() as u64 * admissible_k(space, d)?))
        .collect::<Result<Vec<u64>>>()?;
    let modulus = grids.iter().copied().max().unwrap_or(space.p() as u64);
    let ctx = Ctx {
        space,
        params,
        caps: budget,
        modulus,
        grids,
    };
    let dec = decode_level(g, k, threshold, seed, &ctx)?;
    let noiseless = statistic.method == "phase-certificate";
    if noiseless && dec.trace.pair_violations() > 0 {
        return Err(Error::Numerical(
            "cocycle identity failed on an exact phase polynomial".into(),
        ));
    }
    let phi = assemble(space, &dec, modulus, k - 1)?;
    let distance = g.l1_distance(&phi.table())?;
    Ok(DecodeResult {
        k,
        phi,
        distance,
        statistic: statistic.value(),
        trace: dec.trace,
    })
}

/// Classical form when every value is a p-th root times the constant, explicit otherwise.
fn assemble(space: Space, dec: &Decoded, modulus: u64, degree: usize) -> Result<PhasePolynomial> {
    let p = space.p() as u64;
    let theta = (dec.theta / std::f64::consts::TAU).rem_euclid(1.0);
    let theta = if theta >= 1.0 { 0.0 } else { theta };
    if modulus % p == 0 && dec.exps.iter().all(|e| e % (modulus / p) == 0) {
        let residues = FieldTable::new(space, dec.exps.iter().map(|e| (e / (modulus / p)) as u32).collect())?;
        let poly = interpolate(&residues);
        if poly.degree() <= degree {
            let phi = classical_phase(theta, poly.with_degree_bound(degree)?)?;
            verify(&phi.table(), degree)?;
            return Ok(phi);
        }
    }
    let rot = crate::field::phase(theta);
    let table = FunctionTable::from_fn(space, |x| rot * unit_root(dec.exps[x], modulus.max(1)));
    verify(&table, degree)?;
    PhasePolynomial::explicit(table, degree)
}

fn verify(table: &FunctionTable, degree: usize) -> Result<()> {
    if !is_phase_polynomial(table, degree, None, DerivativeMode::BasisDirections, &Caps::default())? {
        return Err(DecodeFailure::Unverified { degree }.into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{symmetric_table, MonomialBasis, PhaseCatalogue};

    fn sp(p: u32, n: usize) -> Space {
        Space::of(p, n).unwrap()
    }

    fn random_classical(space: Space, d: usize, seed: u64) -> FunctionTable {
        let basis = MonomialBasis::new(space, d);
        let mut rng = random::rng(seed);
        let coeffs: Vec<u32> = (0..basis.len()).map(|_| rng.gen_range(0..space.p())).collect();
        let rot = Complex64::from_polar(1.0, rng.gen::<f64>() * 6.0);
        basis.polynomial(&coeffs).to_table().phase().scale(rot)
    }

    #[test]
    fn exact_classical_round_trip() {
        let caps = Caps::default();
        for (p, n) in [(2u32, 5usize), (3, 3)] {
            for k in 1..=4 {
                let s = sp(p, n);
                let g = random_classical(s, k - 1, k as u64);
                let r = decode(&g, k, &DecodeParams::default(), 7, &caps).unwrap();
                assert!(r.distance <= 1e-9, "p={p} n={n} k={k} d={}", r.distance);
                assert!(r.phi.degree() == k - 1);
                assert_eq!(r.trace.pair_violations(), 0);
            }
        }
    }

    #[test]
    fn non_classical_round_trip() {
        let caps = Caps::default();
        let g = symmetric_table(6, 2).unwrap();
        let r = decode(&g, 3, &DecodeParams::default(), 1, &caps).unwrap();
        assert!(r.distance <= 1e-9);
        assert!(matches!(r.phi, PhasePolynomial::Explicit { .. }));
        let ip = g.inner_product(&r.phi.table()).unwrap();
        assert!((ip.norm() - 1.0).abs() < 1e-9);
        let g = symmetric_table(5, 3).unwrap().scale(Complex64::from_polar(1.0, 0.4));
        let r = decode(&g, 4, &DecodeParams::default(), 2, &caps).unwrap();
        assert!(r.distance <= 1e-9);
    }

    #[test]
    fn catalogue_members_round_trip() {
        let caps = Caps::default();
        let s = sp(2, 4);
        let cat = PhaseCatalogue::new(s, 4).unwrap();
        let mut rng = random::rng(3);
        for phi in cat.sample(&mut rng, 6).unwrap() {
            let r = decode(&phi.table(), 4, &DecodeParams::default(), 5, &caps).unwrap();
            assert!(r.distance <= 1e-9);
        }
    }

    #[test]
    fn corrupted_input_decodes_close() {
        let caps = Caps::default();
        let s = sp(2, 8);
        let clean = random_classical(s, 2, 11);
        let noisy = random::corrupt(&clean, 0.01, 4);
        let r = decode(&noisy, 3, &DecodeParams::default(), 3, &caps).unwrap();
        assert!(r.distance <= 0.05, "{}", r.distance);
        assert!(r.phi.equivalent(&PhasePolynomial::explicit(clean, 2).unwrap(), 1e-9).unwrap());
    }

    #[test]
    fn base_case_failures() {
        let s = sp(2, 3);
        let zero_mean = FunctionTable::from_fn(s, |x| if x % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(-1.0, 0.0) });
        let err = decode(&zero_mean, 1, &DecodeParams::default(), 0, &Caps::default()).unwrap_err();
        assert!(matches!(err, Error::Decode(DecodeFailure::MeanVanishes { .. })));
        assert!(decode(&zero_mean, 0, &DecodeParams::default(), 0, &Caps::default()).is_err());
    }

    #[test]
    fn random_input_fails_cleanly() {
        let s = sp(2, 6);
        let g = random::unit_table(s, &mut random::rng(9));
        let params = DecodeParams {
            good_threshold: Some(0.05),
            ..DecodeParams::default()
        };
        let err = decode(&g, 3, &params, 0, &Caps::default()).unwrap_err();
        assert!(matches!(err, Error::Decode(_)), "{err}");
    }
}
