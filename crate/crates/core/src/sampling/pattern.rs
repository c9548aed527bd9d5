//! Cube-pattern averages at nested scales and the accuracy inequality
//! int_V |G_{f,r_0,...,r_k} - G_{f,r_0}| <= ||G||_Lip / r_1.
//!
//! A pattern at x with shifts (u_1, ..., u_k) is the family
//! z(omega, b) = f(x + omega . u + b . v_0) for omega in {0,1}^k and b in F^{H_{r_0}},
//! stored flat as z[b * 2^k + omega] with bit i of omega for the (i+1)-th shift.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{coset_average, combinations, EstimateMode, MonteCarlo, SamplingPlan};
use crate::caps::{self, Caps};
use crate::error::{Error, Result};
use crate::field::unit_root;
use crate::random;
use crate::space::{Space, Subspace};
use crate::table::FunctionTable;

/// Shapes of one cube average: k shift families given by generator lists, and the
/// window points b . v_0.
#[derive(Debug, Clone)]
pub struct CubeSpec {
    pub space: Space,
    pub generators: Vec<Vec<usize>>,
    pub window: Vec<usize>,
    /// Work allowed for the closed-form paths before falling back.
    pub budget: u128,
}

impl CubeSpec {
    pub fn k(&self) -> usize {
        self.generators.len()
    }

    /// Work of the product recursion: all but the largest family enumerated, times |V|.
    fn product_cost(&self) -> u128 {
        let mut sizes: Vec<u128> = self
            .generators
            .iter()
            .map(|g| self.span_of_gens(g).len() as u128)
            .collect();
        sizes.sort_unstable();
        sizes.pop();
        sizes
            .into_iter()
            .fold(self.space.size() as u128, |a, b| a.saturating_mul(b))
    }

    fn span_of_gens(&self, gens: &[usize]) -> Subspace {
        Subspace::span(self.space, gens)
    }

    fn span_of(&self, which: impl Fn(usize) -> bool) -> Subspace {
        let gens: Vec<usize> = self
            .generators
            .iter()
            .enumerate()
            .filter(|(i, _)| which(*i))
            .flat_map(|(_, g)| g.iter().copied())
            .collect();
        Subspace::span(self.space, &gens)
    }
}

pub trait PatternFunctional: Sync {
    fn name(&self) -> String;

    /// sup |G| plus the Lipschitz constant for the l^1 metric on patterns.
    fn lipschitz_bound(&self) -> f64;

    fn eval(&self, z: &[Complex64], k: usize) -> Complex64;

    /// Closed-form table of the cube average, when the functional has one.
    fn fast_table(&self, _f: &FunctionTable, _spec: &CubeSpec) -> Option<FunctionTable> {
        None
    }
}

/// Which cube corner a coordinate functional reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corner {
    /// omega = 0
    Origin,
    /// omega = (1, ..., 1)
    Top,
}

impl Corner {
    fn index(self, k: usize) -> usize {
        match self {
            Corner::Origin => 0,
            Corner::Top => (1 << k) - 1,
        }
    }
}

/// The built-in functionals, each with an analytically derived Lipschitz bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// G = c. Bound |c|.
    Constant { c: f64 },
    /// G = z(corner, b), b taken modulo the window size. Bound 1 + 1.
    Projection { corner: Corner, b: usize },
    /// G = prod_omega C^{|omega|} z(omega, 0). Bound 1 + 1, since
    /// |prod z - prod w| <= sum |z_i - w_i| on the unit disk.
    GowersProduct,
    /// G = |prod_omega C^{|omega|} z(omega, 0) - 1|. Bound 2 + 1.
    PolytestDeviation,
    /// G = E_b z(corner, b). Bound 1 + 1.
    WindowAverage { corner: Corner },
    /// G = |E_b z(corner, b)|^2. Bound 1 + 2.
    WindowEnergy { corner: Corner },
}

/// The functionals checked by default.
pub fn functional_catalogue() -> Vec<Functional> {
    vec![
        Functional::Constant { c: 0.5 },
        Functional::Projection {
            corner: Corner::Origin,
            b: 0,
        },
        Functional::Projection {
            corner: Corner::Top,
            b: 0,
        },
        Functional::Projection {
            corner: Corner::Top,
            b: 1,
        },
        Functional::GowersProduct,
        Functional::PolytestDeviation,
        Functional::WindowAverage { corner: Corner::Top },
        Functional::WindowEnergy { corner: Corner::Top },
    ]
}

fn cube_product(z: &[Complex64], k: usize) -> Complex64 {
    (0..1usize << k).fold(Complex64::new(1.0, 0.0), |acc, w| {
        if w.count_ones() % 2 == 1 {
            acc * z[w].conj()
        } else {
            acc * z[w]
        }
    })
}

/// E_{w_1 in S_1, ..., w_k in S_k} prod_omega C^{|omega|} g(x + omega . w), as a table.
/// Splits off the smaller families first; the last one is handled by coset sums.
pub(crate) fn product_table(g: &FunctionTable, spans: &[Subspace]) -> FunctionTable {
    let last = spans.last().expect("k >= 1");
    let (labels, cosets) = last.coset_labels();
    let mut counts = vec![0usize; cosets];
    for &l in &labels {
        counts[l as usize] += 1;
    }
    let coset = CosetSums { labels, counts };
    let values = product_values(g.space(), g.values(), &spans[..spans.len() - 1], &coset);
    FunctionTable::new(g.space(), values).expect("size")
}

struct CosetSums {
    labels: Vec<u32>,
    counts: Vec<usize>,
}

impl CosetSums {
    /// g(x) conj(average of g over x + W), written into out.
    fn close(&self, g: &[Complex64], out: &mut [Complex64], sums: &mut [Complex64]) {
        sums.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (v, &l) in g.iter().zip(&self.labels) {
            sums[l as usize] += v;
        }
        for ((o, v), &l) in out.iter_mut().zip(g).zip(&self.labels) {
            let l = l as usize;
            *o = v * (sums[l] / self.counts[l] as f64).conj();
        }
    }
}

const PRODUCT_CHUNK: usize = 64;

fn product_values(
    space: Space,
    g: &[Complex64],
    rest: &[Subspace],
    coset: &CosetSums,
) -> Vec<Complex64> {
    let size = g.len();
    let Some((first, tail)) = rest.split_first() else {
        let mut out = vec![Complex64::new(0.0, 0.0); size];
        let mut sums = vec![Complex64::new(0.0, 0.0); coset.counts.len()];
        coset.close(g, &mut out, &mut sums);
        return out;
    };
    let elements = first.elements();
    // fixed chunks summed in order keep the result independent of the thread count
    let partials: Vec<Vec<Complex64>> = elements
        .par_chunks(PRODUCT_CHUNK)
        .map(|chunk| {
            let mut acc = vec![Complex64::new(0.0, 0.0); size];
            let mut der = vec![Complex64::new(0.0, 0.0); size];
            let mut out = vec![Complex64::new(0.0, 0.0); size];
            let mut sums = vec![Complex64::new(0.0, 0.0); coset.counts.len()];
            for &w in chunk {
                for (x, d) in der.iter_mut().enumerate() {
                    *d = (g[space.add(x, w)] * g[x].conj()).conj();
                }
                if tail.is_empty() {
                    coset.close(&der, &mut out, &mut sums);
                    for (a, v) in acc.iter_mut().zip(&out) {
                        *a += v;
                    }
                } else {
                    let part = product_values(space, &der, tail, coset);
                    for (a, v) in acc.iter_mut().zip(&part) {
                        *a += v;
                    }
                }
            }
            acc
        })
        .collect();
    let count = elements.len() as f64;
    let mut acc = vec![Complex64::new(0.0, 0.0); size];
    for part in &partials {
        for (a, v) in acc.iter_mut().zip(part) {
            *a += v;
        }
    }
    acc.iter_mut().for_each(|a| *a /= count);
    acc
}

pub(crate) fn sorted_spans(spec: &CubeSpec) -> Vec<Subspace> {
    let mut spans: Vec<Subspace> = (0..spec.k()).map(|i| spec.span_of(|j| j == i)).collect();
    spans.sort_by_key(|s| s.len());
    spans
}

/// If f is a rotation of a table of K-th roots of unity (K <= 64), the rotated table and K.
pub(crate) fn root_valued(f: &FunctionTable) -> Option<(FunctionTable, usize)> {
    let anchor = f.get(0);
    if (anchor.norm() - 1.0).abs() > 1e-12 {
        return None;
    }
    let g = f.scale(anchor.conj());
    (1..=64usize).find_map(|k| {
        let ok = g
            .values()
            .iter()
            .all(|v| (v.powu(k as u32) - Complex64::new(1.0, 0.0)).norm() <= 1e-9);
        ok.then(|| {
            // snap to exact roots so the expansion below is exact
            let snapped = g.map(|v| {
                let j = ((v.arg() / std::f64::consts::TAU) * k as f64).round() as i64;
                unit_root(j.rem_euclid(k as i64) as u64, k as u64)
            });
            (snapped, k)
        })
    })
}

impl PatternFunctional for Functional {
    fn name(&self) -> String {
        match self {
            Functional::Constant { c } => format!("constant({c})"),
            Functional::Projection { corner, b } => format!("projection({corner:?},{b})"),
            Functional::GowersProduct => "gowers-product".into(),
            Functional::PolytestDeviation => "polytest-deviation".into(),
            Functional::WindowAverage { corner } => format!("window-average({corner:?})"),
            Functional::WindowEnergy { corner } => format!("window-energy({corner:?})"),
        }
    }

    fn lipschitz_bound(&self) -> f64 {
        match self {
            Functional::Constant { c } => c.abs(),
            Functional::Projection { .. } => 2.0,
            Functional::GowersProduct => 2.0,
            Functional::PolytestDeviation => 3.0,
            Functional::WindowAverage { .. } => 2.0,
            Functional::WindowEnergy { .. } => 3.0,
        }
    }

    fn eval(&self, z: &[Complex64], k: usize) -> Complex64 {
        let corners = 1usize << k;
        let window = z.len() / corners;
        match *self {
            Functional::Constant { c } => Complex64::new(c, 0.0),
            Functional::Projection { corner, b } => z[(b % window) * corners + corner.index(k)],
            Functional::GowersProduct => cube_product(z, k),
            Functional::PolytestDeviation => {
                Complex64::new((cube_product(z, k) - Complex64::new(1.0, 0.0)).norm(), 0.0)
            }
            Functional::WindowAverage { corner } => {
                let c = corner.index(k);
                (0..window).map(|b| z[b * corners + c]).sum::<Complex64>() / window as f64
            }
            Functional::WindowEnergy { corner } => {
                let c = corner.index(k);
                let avg = (0..window).map(|b| z[b * corners + c]).sum::<Complex64>() / window as f64;
                Complex64::new(avg.norm_sqr(), 0.0)
            }
        }
    }

    fn fast_table(&self, f: &FunctionTable, spec: &CubeSpec) -> Option<FunctionTable> {
        let space = f.space();
        // average of f over x + (sum of the shift families selected by the corner)
        let corner_average = |corner: Corner, g: &FunctionTable| -> FunctionTable {
            match corner {
                Corner::Origin => g.clone(),
                Corner::Top => {
                    let span = spec.span_of(|_| true);
                    let (labels, cosets) = span.coset_labels();
                    coset_average(g, &labels, cosets)
                }
            }
        };
        match *self {
            Functional::Constant { c } => Some(FunctionTable::constant(space, Complex64::new(c, 0.0))),
            Functional::Projection { corner, b } => {
                let shift = spec.window[b % spec.window.len()];
                Some(corner_average(corner, f).shift(shift))
            }
            Functional::GowersProduct => {
                (spec.product_cost() <= spec.budget).then(|| product_table(f, &sorted_spans(spec)))
            }
            Functional::PolytestDeviation => {
                // |zeta^j - 1| = sum_t c_t zeta^{tj} on K-th roots, and the cube product
                // of f^t is the t-th power of the cube product of f
                let (g, order) = root_valued(f)?;
                if spec.product_cost().saturating_mul(order as u128) > spec.budget {
                    return None;
                }
                let spans = sorted_spans(spec);
                let dev: Vec<f64> = (0..order)
                    .map(|j| (unit_root(j as u64, order as u64) - Complex64::new(1.0, 0.0)).norm())
                    .collect();
                let mut acc = vec![Complex64::new(0.0, 0.0); space.size()];
                for t in 0..order {
                    let c_t = (0..order)
                        .map(|j| dev[j] * unit_root(((order - t) * j % order) as u64, order as u64))
                        .sum::<Complex64>()
                        / order as f64;
                    if c_t.norm() < 1e-15 {
                        continue;
                    }
                    let prod = product_table(&g.powi(t as i32), &spans);
                    for (a, v) in acc.iter_mut().zip(prod.values()) {
                        *a += c_t * v;
                    }
                }
                // the deviation is real; drop the rounding residue in the imaginary part
                Some(FunctionTable::new(space, acc.into_iter().map(|v| Complex64::new(v.re, 0.0)).collect()).ok()?)
            }
            Functional::WindowAverage { corner } => {
                let avg = corner_average(corner, f);
                let w = spec.window.len() as f64;
                Some(FunctionTable::from_fn(space, |x| {
                    spec.window
                        .iter()
                        .map(|&b| avg.get(space.add(x, b)))
                        .sum::<Complex64>()
                        / w
                }))
            }
            Functional::WindowEnergy { corner } => {
                let w = spec.window.len() as f64;
                let energy = FunctionTable::from_fn(space, |y| {
                    let a = spec.window.iter().map(|&b| f.get(space.add(y, b))).sum::<Complex64>() / w;
                    Complex64::new(a.norm_sqr(), 0.0)
                });
                Some(corner_average(corner, &energy))
            }
        }
    }
}

/// A cube-average table with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternTable {
    pub table: FunctionTable,
    /// Root mean square over x of the per-point standard error (Monte Carlo only).
    pub stderr: Option<f64>,
    pub mode: EstimateMode,
}

fn fill_pattern(f: &FunctionTable, spec: &CubeSpec, x: usize, shifts: &[usize], z: &mut [Complex64]) {
    let space = spec.space;
    let corners = 1usize << spec.k();
    for w in 0..corners {
        let mut base = x;
        for (i, &u) in shifts.iter().enumerate() {
            if w >> i & 1 == 1 {
                base = space.add(base, u);
            }
        }
        for (b, &off) in spec.window.iter().enumerate() {
            z[b * corners + w] = f.get(space.add(base, off));
        }
    }
}

/// The cube average by literal enumeration of every coefficient tuple (a_1, ..., a_k).
pub fn cube_average_direct<G: PatternFunctional + ?Sized>(
    f: &FunctionTable,
    g: &G,
    spec: &CubeSpec,
    caps: &Caps,
) -> Result<FunctionTable> {
    let space = spec.space;
    let k = spec.k();
    let families: Vec<Vec<usize>> = spec
        .generators
        .iter()
        .map(|gens| combinations(space, gens))
        .collect();
    let tuples: u128 = families.iter().map(|f| f.len() as u128).product();
    let cost = tuples
        .saturating_mul(space.size() as u128)
        .saturating_mul((spec.window.len() << k) as u128);
    caps::check("direct cube average", cost, caps.pattern_evals)?;
    let tuples = tuples as usize;
    let pattern_len = spec.window.len() << k;
    Ok(FunctionTable::from_fn(space, |x| {
        let mut z = vec![Complex64::new(0.0, 0.0); pattern_len];
        let mut shifts = vec![0usize; k];
        let mut sum = Complex64::new(0.0, 0.0);
        for t in 0..tuples {
            let mut rest = t;
            for (i, fam) in families.iter().enumerate() {
                shifts[i] = fam[rest % fam.len()];
                rest /= fam.len();
            }
            fill_pattern(f, spec, x, &shifts, &mut z);
            sum += g.eval(&z, k);
        }
        sum / tuples as f64
    }))
}

/// Monte Carlo cube average: the same `samples` shift tuples for every x.
fn cube_average_mc<G: PatternFunctional + ?Sized>(
    f: &FunctionTable,
    g: &G,
    spec: &CubeSpec,
    mc: MonteCarlo,
) -> Result<PatternTable> {
    if mc.samples < 2 {
        return Err(Error::Precondition("Monte Carlo needs at least 2 samples".into()));
    }
    let space = spec.space;
    let k = spec.k();
    let mut rng = random::rng(mc.seed);
    let draws: Vec<Vec<usize>> = (0..mc.samples)
        .map(|_| {
            spec.generators
                .iter()
                .map(|gens| {
                    let a: Vec<u32> = gens.iter().map(|_| rng.gen_range(0..space.p())).collect();
                    space.combine(&a, gens)
                })
                .collect()
        })
        .collect();
    let pattern_len = spec.window.len() << k;
    let n = mc.samples as f64;
    let stats: Vec<(Complex64, f64)> = (0..space.size())
        .into_par_iter()
        .map(|x| {
            let mut z = vec![Complex64::new(0.0, 0.0); pattern_len];
            let vals: Vec<Complex64> = draws
                .iter()
                .map(|shifts| {
                    fill_pattern(f, spec, x, shifts, &mut z);
                    g.eval(&z, k)
                })
                .collect();
            let mean = vals.iter().sum::<Complex64>() / n;
            let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
            (mean, var / n)
        })
        .collect();
    let stderr = (stats.iter().map(|s| s.1).sum::<f64>() / stats.len() as f64).sqrt();
    Ok(PatternTable {
        table: FunctionTable::new(space, stats.into_iter().map(|s| s.0).collect())?,
        stderr: Some(stderr),
        mode: EstimateMode::Mc,
    })
}

fn cube_average<G: PatternFunctional + ?Sized>(
    f: &FunctionTable,
    g: &G,
    spec: &CubeSpec,
    caps: &Caps,
    mc: Option<MonteCarlo>,
) -> Result<PatternTable> {
    if let Some(table) = g.fast_table(f, spec) {
        return Ok(PatternTable {
            table,
            stderr: None,
            mode: EstimateMode::Exact,
        });
    }
    match cube_average_direct(f, g, spec, caps) {
        Ok(table) => Ok(PatternTable {
            table,
            stderr: None,
            mode: EstimateMode::Exact,
        }),
        Err(Error::CapExceeded { .. }) if mc.is_some() => cube_average_mc(f, g, spec, mc.unwrap()),
        Err(e) => Err(e),
    }
}

fn check_scales(r: &[usize]) -> Result<()> {
    if r.len() < 2 {
        return Err(Error::Precondition(
            "need scales r_0 < r_1 < ... < r_k with k >= 1".into(),
        ));
    }
    if r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("scales must be strictly increasing".into()));
    }
    Ok(())
}

/// Cube shape for the local average at scales r = (r_0, r_1, ..., r_k).
pub fn local_spec(plan: &SamplingPlan, r: &[usize], caps: &Caps) -> Result<CubeSpec> {
    check_scales(r)?;
    Ok(CubeSpec {
        space: plan.space(),
        generators: r[1..]
            .iter()
            .map(|&ri| plan.prefix(ri).map(|p| p.to_vec()))
            .collect::<Result<_>>()?,
        window: plan.window(r[0], caps)?,
        budget: caps.pattern_evals,
    })
}

/// Cube shape for the global average: every shift family is all of V.
pub fn global_spec(plan: &SamplingPlan, r0: usize, k: usize, caps: &Caps) -> Result<CubeSpec> {
    if k == 0 {
        return Err(Error::Precondition("need k >= 1".into()));
    }
    let space = plan.space();
    let basis: Vec<usize> = (0..space.n()).map(|j| space.basis(j)).collect();
    Ok(CubeSpec {
        space,
        generators: vec![basis; k],
        window: plan.window(r0, caps)?,
        budget: caps.pattern_evals,
    })
}

/// G_{f,r_0,r_1,...,r_k}(x) = E_{a_1, ..., a_k} G(f(x + omega . u + b . v_0)).
pub fn pattern_local<G: PatternFunctional + ?Sized>(
    f: &FunctionTable,
    plan: &SamplingPlan,
    g: &G,
    r: &[usize],
    caps: &Caps,
    mc: Option<MonteCarlo>,
) -> Result<PatternTable> {
    plan.space().check_same(&f.space())?;
    cube_average(f, g, &local_spec(plan, r, caps)?, caps, mc)
}

/// G_{f,r_0}(x) = E_{h_1, ..., h_k in V} G(f(x + omega . h + b . v_0)).
pub fn pattern_global<G: PatternFunctional + ?Sized>(
    f: &FunctionTable,
    plan: &SamplingPlan,
    g: &G,
    r0: usize,
    k: usize,
    caps: &Caps,
    mc: Option<MonteCarlo>,
) -> Result<PatternTable> {
    plan.space().check_same(&f.space())?;
    cube_average(f, g, &global_spec(plan, r0, k, caps)?, caps, mc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub functional: String,
    pub scales: Vec<usize>,
    pub residual: f64,
    pub bound: f64,
    pub pass: bool,
    pub stderr: Option<f64>,
    pub mode: EstimateMode,
}

/// residual = int_V |local - global|, pass = residual <= ||G||_Lip / r_1.
pub fn verify_accuracy<G: PatternFunctional + ?Sized>(
    f: &FunctionTable,
    plan: &SamplingPlan,
    g: &G,
    r: &[usize],
    caps: &Caps,
    mc: Option<MonteCarlo>,
) -> Result<AccuracyReport> {
    let local = pattern_local(f, plan, g, r, caps, mc)?;
    let global = pattern_global(f, plan, g, r[0], r.len() - 1, caps, mc)?;
    let residual = local.table.l1_distance(&global.table)?;
    let bound = g.lipschitz_bound() / r[1] as f64;
    let stderr = match (local.stderr, global.stderr) {
        (None, None) => None,
        (a, b) => Some(a.unwrap_or(0.0) + b.unwrap_or(0.0)),
    };
    let mode = if stderr.is_some() {
        EstimateMode::Mc
    } else {
        EstimateMode::Exact
    };
    Ok(AccuracyReport {
        functional: g.name(),
        scales: r.to_vec(),
        residual,
        bound,
        pass: residual <= bound,
        stderr,
        mode,
    })
}

/// Every functional against every scale tuple.
pub fn verify_accuracy_batch(
    f: &FunctionTable,
    plan: &SamplingPlan,
    functionals: &[Functional],
    scale_tuples: &[Vec<usize>],
    caps: &Caps,
    mc: Option<MonteCarlo>,
) -> Result<Vec<AccuracyReport>> {
    let mut out = Vec::new();
    for r in scale_tuples {
        for g in functionals {
            out.push(verify_accuracy(f, plan, g, r, caps, mc)?);
        }
    }
    Ok(out)
}

/// Worst observed ratios on random pattern pairs: (max |G| / bound, max Lipschitz
/// quotient / bound). Both must stay at most 1.
pub fn spot_check_lipschitz<G: PatternFunctional + ?Sized>(
    g: &G,
    k: usize,
    window: usize,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = random::rng(seed);
    let len = window << k;
    let bound = g.lipschitz_bound();
    let disk = |r: &mut rand_chacha::ChaCha8Rng| -> Complex64 {
        let rad: f64 = r.gen::<f64>().sqrt();
        Complex64::from_polar(rad, std::f64::consts::TAU * r.gen::<f64>())
    };
    let mut sup: f64 = 0.0;
    let mut lip: f64 = 0.0;
    for s in 0..samples {
        let z: Vec<Complex64> = (0..len).map(|_| disk(&mut rng)).collect();
        // alternate far pairs and small perturbations of one coordinate
        let w: Vec<Complex64> = if s % 2 == 0 {
            (0..len).map(|_| disk(&mut rng)).collect()
        } else {
            let mut w = z.clone();
            let i = rng.gen_range(0..len);
            let step = disk(&mut rng) * 1e-3;
            let moved = w[i] + step;
            w[i] = if moved.norm() <= 1.0 { moved } else { moved / moved.norm() };
            w
        };
        let gz = g.eval(&z, k);
        let gw = g.eval(&w, k);
        sup = sup.max(gz.norm() / bound.max(1e-300));
        let dist: f64 = z.iter().zip(&w).map(|(a, b)| (a - b).norm()).sum();
        if dist > 0.0 {
            lip = lip.max((gz - gw).norm() / dist / bound.max(1e-300));
        }
    }
    (sup, lip)
}
