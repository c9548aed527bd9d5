//! Random subspace sampling: scale sequences, sampling plans, subspace averages,
//! cube-pattern averages at nested scales, and the finite correspondence identity.

mod correspondence;
mod local;
mod pattern;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::caps::{self, Caps};
use crate::error::{Error, Result};
use crate::random;
use crate::space::{Space, Subspace};
use crate::table::FunctionTable;

pub use correspondence::{correspondence_check, CorrespondenceReport, PointFunctional};
pub(crate) use local::deviation_average;
pub use local::{local_average_residual, local_gowers, local_polytest};
pub use pattern::{
    cube_average_direct, functional_catalogue, pattern_global, pattern_local, spot_check_lipschitz,
    verify_accuracy, verify_accuracy_batch, AccuracyReport, Functional, PatternFunctional,
};

/// How H_{j+1} is obtained from H_j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    /// x -> x + step
    Linear { step: usize },
    /// x -> mult * x + add
    Affine { mult: usize, add: usize },
}

impl Growth {
    /// Default growth for degree-d sequences: x -> x + 2d.
    pub fn default_for(d: usize) -> Growth {
        Growth::Linear { step: 2 * d.max(1) }
    }

    pub fn apply(&self, x: usize) -> usize {
        match *self {
            Growth::Linear { step } => x + step,
            Growth::Affine { mult, add } => mult * x + add,
        }
    }
}

/// Scales 0 = H_0 < H_1 < H_2 < ...
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleSequence {
    values: Vec<usize>,
    growth: Option<Growth>,
}

impl ScaleSequence {
    pub fn from_values(values: Vec<usize>) -> Result<Self> {
        if values.first() != Some(&0) {
            return Err(Error::Precondition("scale sequences start at H_0 = 0".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition("scales must be strictly increasing".into()));
        }
        Ok(ScaleSequence {
            values,
            growth: None,
        })
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn growth(&self) -> Option<Growth> {
        self.growth
    }

    /// H_r.
    pub fn h(&self, r: usize) -> Result<usize> {
        self.values.get(r).copied().ok_or_else(|| {
            Error::Precondition(format!(
                "scale index {r} beyond the {} scales defined",
                self.values.len()
            ))
        })
    }

    /// Largest index defined.
    pub fn top(&self) -> usize {
        self.values.len() - 1
    }
}

/// H_0 = 0 and H_{j+1} = growth(H_j) for `count` steps.
pub fn make_scales(growth: Growth, count: usize) -> Result<ScaleSequence> {
    let mut values = vec![0usize];
    for _ in 0..count {
        let last = *values.last().unwrap();
        let next = growth.apply(last);
        if next <= last {
            return Err(Error::Precondition(format!(
                "growth is not increasing at {last} (gives {next})"
            )));
        }
        values.push(next);
    }
    Ok(ScaleSequence {
        values,
        growth: Some(growth),
    })
}

/// A drawn sequence v_1, ..., v_M of points with the scales it serves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingPlan {
    space: Space,
    seed: u64,
    scales: ScaleSequence,
    vectors: Vec<usize>,
}

/// M iid uniform points of `space` from `seed`.
pub fn draw_sampling_sequence(space: Space, m: usize, seed: u64) -> Result<Vec<usize>> {
    if m == 0 {
        return Err(Error::Precondition("need at least one vector".into()));
    }
    let mut rng = random::rng(seed);
    Ok((0..m).map(|_| rng.gen_range(0..space.size())).collect())
}

impl SamplingPlan {
    /// Draws H_top vectors (at least one).
    pub fn draw(space: Space, scales: ScaleSequence, seed: u64) -> Result<Self> {
        let m = scales.values()[scales.top()].max(1);
        let vectors = draw_sampling_sequence(space, m, seed)?;
        Ok(SamplingPlan {
            space,
            seed,
            scales,
            vectors,
        })
    }

    pub fn from_vectors(space: Space, scales: ScaleSequence, seed: u64, vectors: Vec<usize>) -> Result<Self> {
        for &v in &vectors {
            space.check_index(v)?;
        }
        let need = scales.values()[scales.top()];
        if vectors.len() < need {
            return Err(Error::Precondition(format!(
                "plan has {} vectors but the scales need {need}",
                vectors.len()
            )));
        }
        Ok(SamplingPlan {
            space,
            seed,
            scales,
            vectors,
        })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scales(&self) -> &ScaleSequence {
        &self.scales
    }

    pub fn vectors(&self) -> &[usize] {
        &self.vectors
    }

    /// v_1, ..., v_{H_r}.
    pub fn prefix(&self, r: usize) -> Result<&[usize]> {
        let h = self.scales.h(r)?;
        if h > self.vectors.len() {
            return Err(Error::Precondition(format!(
                "scale {r} needs {h} vectors, plan has {}",
                self.vectors.len()
            )));
        }
        Ok(&self.vectors[..h])
    }

    /// span(v_1, ..., v_{H_r}). Every a . v over F^{H_r} hits each element of the span
    /// equally often, so averages over coefficient vectors equal averages over the span.
    pub fn span(&self, r: usize) -> Result<Subspace> {
        Ok(Subspace::span(self.space, self.prefix(r)?))
    }

    /// Points b . v_{[H_r]} for every b in F^{H_r}, in base-p counter order of b
    /// (repeats kept).
    pub fn window(&self, r: usize, caps: &Caps) -> Result<Vec<usize>> {
        let prefix = self.prefix(r)?;
        let count = caps::pow(self.space.p() as u64, prefix.len());
        caps::check("pattern window", count, caps.subspace_points)?;
        Ok(combinations(self.space, prefix))
    }
}

/// All a . v for a in F^m, in base-p counter order of a (a_1 fastest).
pub(crate) fn combinations(space: Space, vectors: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &v in vectors {
        let layer = out.clone();
        let mut step = v;
        let mut blocks = Vec::with_capacity(layer.len() * space.p() as usize);
        blocks.extend_from_slice(&layer);
        for _ in 1..space.p() {
            blocks.extend(layer.iter().map(|&e| space.add(e, step)));
            step = space.add(step, v);
        }
        out = blocks;
    }
    // each new vector contributes the outermost block, so a_1 varies fastest
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMode {
    Exact,
    Mc,
}

/// A computed quantity; Monte Carlo values carry a standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub stderr: Option<f64>,
    pub mode: EstimateMode,
}

impl<T> Estimate<T> {
    pub fn exact(value: T) -> Self {
        Estimate {
            value,
            stderr: None,
            mode: EstimateMode::Exact,
        }
    }
}

/// Statistic report `{"statistic", "scales", "value", "stderr", "mode"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticReport {
    pub statistic: String,
    pub scales: Vec<usize>,
    pub value: f64,
    pub stderr: Option<f64>,
    pub mode: EstimateMode,
}

impl StatisticReport {
    pub fn new(statistic: &str, scales: &[usize], est: Estimate<f64>) -> Self {
        StatisticReport {
            statistic: statistic.to_string(),
            scales: scales.to_vec(),
            value: est.value,
            stderr: est.stderr,
            mode: est.mode,
        }
    }
}

/// Monte Carlo fallback settings for averages too large to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        MonteCarlo {
            samples: 4096,
            seed: 0,
        }
    }
}

/// E_{a in F^m} f(a . v).
///
/// Exact by enumerating all p^m coefficient vectors when that fits
/// `caps.subspace_points`; otherwise exact through the span (each span element is hit
/// p^{m - dim} times). With `mc` set, averages `mc.samples` uniform draws of a instead.
pub fn subspace_average(
    f: &FunctionTable,
    vectors: &[usize],
    mc: Option<MonteCarlo>,
    caps: &Caps,
) -> Result<Estimate<Complex64>> {
    let space = f.space();
    for &v in vectors {
        space.check_index(v)?;
    }
    if let Some(mc) = mc {
        if mc.samples < 2 {
            return Err(Error::Precondition("Monte Carlo needs at least 2 samples".into()));
        }
        let mut rng = random::rng(mc.seed);
        let p = space.p();
        let draws: Vec<Complex64> = (0..mc.samples)
            .map(|_| {
                let a: Vec<u32> = (0..vectors.len()).map(|_| rng.gen_range(0..p)).collect();
                f.get(space.combine(&a, vectors))
            })
            .collect();
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<Complex64>() / n;
        let var = draws.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
        return Ok(Estimate {
            value: mean,
            stderr: Some((var / n).sqrt()),
            mode: EstimateMode::Mc,
        });
    }
    let count = caps::pow(space.p() as u64, vectors.len());
    if count <= caps.subspace_points {
        let points = combinations(space, vectors);
        let sum = points.iter().fold(Complex64::new(0.0, 0.0), |acc, &x| acc + f.get(x));
        return Ok(Estimate::exact(sum / points.len() as f64));
    }
    let span = Subspace::span(space, vectors);
    let sum = span
        .elements()
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &x| acc + f.get(x));
    Ok(Estimate::exact(sum / span.len() as f64))
}

/// Result of averaging a function built from the first m_0 vectors over all m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependentAverage {
    pub local: Complex64,
    pub global: Complex64,
}

/// Builds g from v_1..v_{m_0} only (the builder never sees later vectors), then
/// returns E_{a in F^m} g(a . v) together with E_V g.
pub fn dependent_subspace_average<B>(
    builder: B,
    vectors: &[usize],
    m0: usize,
    m: usize,
    caps: &Caps,
) -> Result<DependentAverage>
where
    B: FnOnce(&[usize]) -> Result<FunctionTable>,
{
    if m <= m0 {
        return Err(Error::Precondition(format!("need m > m_0, got m = {m}, m_0 = {m0}")));
    }
    if vectors.len() < m {
        return Err(Error::Precondition(format!(
            "{m} vectors requested, {} available",
            vectors.len()
        )));
    }
    let g = builder(&vectors[..m0])?;
    g.check_bounded()?;
    let local = subspace_average(&g, &vectors[..m], None, caps)?.value;
    Ok(DependentAverage {
        local,
        global: g.mean(),
    })
}

/// Average of g over the coset x + W, as a table in x.
pub(crate) fn coset_average(g: &FunctionTable, labels: &[u32], cosets: usize) -> FunctionTable {
    let mut sums = vec![Complex64::new(0.0, 0.0); cosets];
    let mut counts = vec![0usize; cosets];
    for (x, &l) in labels.iter().enumerate() {
        sums[l as usize] += g.get(x);
        counts[l as usize] += 1;
    }
    FunctionTable::from_fn(g.space(), |x| {
        let l = labels[x] as usize;
        sums[l] / counts[l] as f64
    })
}

impl Serialize for SamplingPlan {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PlanDocument {
            p: self.space.p(),
            n: self.space.n(),
            seed: self.seed,
            h: self.scales.values.clone(),
            growth: self.scales.growth,
            vectors: self
                .vectors
                .iter()
                .map(|&v| self.space.digits(v))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SamplingPlan {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = PlanDocument::deserialize(d)?;
        let space = Space::of(doc.p, doc.n).map_err(D::Error::custom)?;
        let mut scales = ScaleSequence::from_values(doc.h).map_err(D::Error::custom)?;
        scales.growth = doc.growth;
        let vectors = doc
            .vectors
            .iter()
            .map(|c| space.point_index(c))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        SamplingPlan::from_vectors(space, scales, doc.seed, vectors).map_err(D::Error::custom)
    }
}

/// Plan file `{"p", "n", "seed", "H", "vectors"}`.
#[derive(Serialize, Deserialize)]
struct PlanDocument {
    p: u32,
    n: usize,
    seed: u64,
    #[serde(rename = "H")]
    h: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    growth: Option<Growth>,
    vectors: Vec<Vec<u32>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(p: u32, n: usize) -> Space {
        Space::of(p, n).unwrap()
    }

    #[test]
    fn scale_examples() {
        let s = make_scales(Growth::Linear { step: 2 }, 4).unwrap();
        assert_eq!(s.values(), &[0, 2, 4, 6, 8]);
        let s = make_scales(Growth::Affine { mult: 2, add: 2 }, 3).unwrap();
        assert_eq!(s.values(), &[0, 2, 6, 14]);
        let s = make_scales(Growth::Affine { mult: 2, add: 2 }, 4).unwrap();
        assert!(s.values()[4] <= 30);
        assert!(make_scales(Growth::Affine { mult: 1, add: 0 }, 2).is_err());
        assert!(ScaleSequence::from_values(vec![0, 3, 3]).is_err());
        assert!(ScaleSequence::from_values(vec![1, 3]).is_err());
    }

    #[test]
    fn draws_are_reproducible() {
        let s = sp(2, 10);
        assert_eq!(
            draw_sampling_sequence(s, 50, 9).unwrap(),
            draw_sampling_sequence(s, 50, 9).unwrap()
        );
        assert_ne!(
            draw_sampling_sequence(s, 50, 9).unwrap(),
            draw_sampling_sequence(s, 50, 10).unwrap()
        );
        let zero = draw_sampling_sequence(sp(2, 0), 5, 1).unwrap();
        assert!(zero.iter().all(|&v| v == 0));
    }

    #[test]
    fn draws_are_uniform() {
        let s = sp(2, 4);
        let m = 100_000;
        let v = draw_sampling_sequence(s, m, 3).unwrap();
        let mut counts = [0f64; 16];
        for x in v {
            counts[x] += 1.0;
        }
        let expected = m as f64 / 16.0;
        let chi: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
        // 99th percentile of chi-square with 15 degrees of freedom
        assert!(chi < 30.578, "chi-square {chi}");
    }

    #[test]
    fn combinations_follow_counter_order() {
        let s = sp(3, 2);
        let v = [s.basis(0), s.basis(1)];
        let pts = combinations(s, &v);
        assert_eq!(pts.len(), 9);
        for (code, &x) in pts.iter().enumerate() {
            let a = [(code % 3) as u32, (code / 3) as u32];
            assert_eq!(x, s.combine(&a, &v));
        }
    }

    #[test]
    fn subspace_average_examples() {
        let caps = Caps::default();
        let s = sp(3, 2);
        let f = random::disk_table(s, &mut random::rng(1));
        let basis = [s.basis(0), s.basis(1)];
        let full = subspace_average(&f, &basis, None, &caps).unwrap();
        assert!((full.value - f.mean()).norm() < 1e-14);
        let empty = subspace_average(&f, &[], None, &caps).unwrap();
        assert_eq!(empty.value, f.get(0));
        // span route agrees with literal enumeration
        let v = draw_sampling_sequence(s, 5, 2).unwrap();
        let literal = subspace_average(&f, &v, None, &caps).unwrap().value;
        let tight = Caps {
            subspace_points: 1,
            ..caps
        };
        let spanned = subspace_average(&f, &v, None, &tight).unwrap().value;
        assert!((literal - spanned).norm() < 1e-14);
        let mc = subspace_average(&f, &v, Some(MonteCarlo { samples: 20_000, seed: 4 }), &caps).unwrap();
        assert_eq!(mc.mode, EstimateMode::Mc);
        assert!((mc.value - literal).norm() < 5.0 * mc.stderr.unwrap() + 1e-12);
    }

    #[test]
    fn dependent_average_examples() {
        let caps = Caps::default();
        let s = sp(2, 6);
        let f = random::sign_table(s, &mut random::rng(5));
        let v = draw_sampling_sequence(s, 6, 6).unwrap();
        let plain = dependent_subspace_average(|_| Ok(f.clone()), &v, 2, 6, &caps).unwrap();
        let direct = subspace_average(&f, &v, None, &caps).unwrap().value;
        assert_eq!(plain.local, direct);
        assert_eq!(plain.global, f.mean());
        let derived = dependent_subspace_average(|head| Ok(f.mult_derivative(head[0])), &v, 1, 6, &caps)
            .unwrap();
        assert_eq!(derived.global, f.mult_derivative(v[0]).mean());
        assert!(dependent_subspace_average(|_| Ok(f.clone()), &v, 3, 3, &caps).is_err());
    }

    #[test]
    fn plan_round_trip() {
        let s = sp(3, 3);
        let scales = make_scales(Growth::default_for(1), 3).unwrap();
        let plan = SamplingPlan::draw(s, scales, 17).unwrap();
        assert_eq!(plan.vectors().len(), 6);
        let json = serde_json::to_string(&plan).unwrap();
        assert!(json.contains("\"H\":[0,2,4,6]"));
        let back: SamplingPlan = serde_json::from_str(&json).unwrap();
        assert_eq!(back, plan);
        assert_eq!(plan.prefix(2).unwrap().len(), 4);
        assert!(plan.prefix(4).is_err());
    }
}
