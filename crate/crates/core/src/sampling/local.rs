//! Local versions of the Gowers power, the global average and the polynomiality
//! statistic, with shifts a . v drawn from plan prefixes instead of all of V.
//!
//! Every average over a in F^{H_r} is computed over span(v_1, ..., v_{H_r}): the map
//! a -> a . v has equal fibers, so the two averages agree.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::pattern::{root_valued, CubeSpec, Functional, PatternFunctional};
use super::{coset_average, Estimate, EstimateMode, MonteCarlo, SamplingPlan};
use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::random;
use crate::reduce;
use crate::space::{Space, Subspace};
use crate::table::FunctionTable;

fn check_increasing(r: &[usize]) -> Result<()> {
    if r.is_empty() {
        return Err(Error::Precondition("need at least one scale".into()));
    }
    if r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("scales must be strictly increasing".into()));
    }
    Ok(())
}

fn prefix_spans(plan: &SamplingPlan, r: &[usize]) -> Result<Vec<Subspace>> {
    r.iter()
        .map(|&ri| Ok(Subspace::span(plan.space(), plan.prefix(ri)?)))
        .collect()
}

/// Work of enumerating every family except the last, times |V|.
fn enumeration_cost(space: Space, spans: &[Subspace]) -> u128 {
    spans[..spans.len() - 1]
        .iter()
        .fold(space.size() as u128, |a, s| a.saturating_mul(s.len() as u128))
}

fn mc_estimate(values: Vec<f64>) -> Estimate<f64> {
    let n = values.len() as f64;
    let mean = reduce::compensated_sum(values.iter().copied()) / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Estimate {
        value: mean,
        stderr: Some((var / n).sqrt()),
        mode: EstimateMode::Mc,
    }
}

/// One uniform element from each span, for `samples` draws.
fn draw_tuples(spans: &[Subspace], mc: MonteCarlo) -> Result<Vec<Vec<usize>>> {
    if mc.samples < 2 {
        return Err(Error::Precondition("Monte Carlo needs at least 2 samples".into()));
    }
    let mut rng = random::rng(mc.seed);
    Ok((0..mc.samples)
        .map(|_| {
            spans
                .iter()
                .map(|s| s.elements()[rng.gen_range(0..s.len())])
                .collect()
        })
        .collect())
}

/// E_x E_{w in W} g(x + w) conj g(x) = sum over cosets c of |S_c|^2 / (|V| |W|).
fn last_level(g: &FunctionTable, span: &Subspace) -> f64 {
    let (labels, cosets) = span.coset_labels();
    let mut sums = vec![Complex64::new(0.0, 0.0); cosets];
    for (x, &l) in labels.iter().enumerate() {
        sums[l as usize] += g.get(x);
    }
    reduce::compensated_sum(sums.iter().map(|s| s.norm_sqr())) / (g.len() as f64 * span.len() as f64)
}

fn gowers_levels(g: &FunctionTable, spans: &[Subspace]) -> f64 {
    let (last, rest) = spans.split_last().expect("d >= 1");
    match rest.split_first() {
        None => last_level(g, last),
        Some((first, tail)) => {
            let mut remaining = tail.to_vec();
            remaining.push(last.clone());
            let parts: Vec<f64> = first
                .elements()
                .par_iter()
                .map(|&w| gowers_levels(&g.mult_derivative(w), &remaining))
                .collect();
            reduce::compensated_sum(parts) / first.len() as f64
        }
    }
}

/// E_{a_1 in F^{H_{r_1}}, ..., a_d in F^{H_{r_d}}} int_V Delta_{a_1 . v} ... Delta_{a_d . v} f.
///
/// Exact when the enumeration fits `caps.pattern_evals`; with `mc` the first d - 1
/// shifts are sampled and the last is still averaged exactly.
pub fn local_gowers(
    f: &FunctionTable,
    plan: &SamplingPlan,
    r: &[usize],
    caps: &Caps,
    mc: Option<MonteCarlo>,
) -> Result<Estimate<f64>> {
    plan.space().check_same(&f.space())?;
    check_increasing(r)?;
    let mut spans = prefix_spans(plan, r)?;
    // derivatives commute; enumerate the small families and average the largest last
    spans.sort_by_key(|s| s.len());
    let cost = enumeration_cost(f.space(), &spans);
    if cost <= caps.pattern_evals {
        return Ok(Estimate::exact(gowers_levels(f, &spans)));
    }
    let Some(mc) = mc else {
        return Err(Error::CapExceeded {
            what: "local Gowers average",
            required: cost,
            cap: caps.pattern_evals,
        });
    };
    let (last, rest) = spans.split_last().unwrap();
    let tuples = draw_tuples(rest, mc)?;
    let values: Vec<f64> = tuples
        .par_iter()
        .map(|ws| last_level(&f.mult_derivatives(ws), last))
        .collect();
    Ok(mc_estimate(values))
}

/// int_V | E_{a in F^{H_r}} T_{a . v} g - int_V g |, exactly.
pub fn local_average_residual(g: &FunctionTable, plan: &SamplingPlan, r: usize) -> Result<f64> {
    plan.space().check_same(&g.space())?;
    let span = Subspace::span(plan.space(), plan.prefix(r)?);
    let (labels, cosets) = span.coset_labels();
    let local = coset_average(g, &labels, cosets);
    let mean = g.mean();
    Ok(reduce::mean_real(g.len(), |x| (local.get(x) - mean).norm()))
}

fn deviation_levels(g: &FunctionTable, spans: &[Subspace]) -> f64 {
    match spans.split_first() {
        None => reduce::mean_real(g.len(), |x| (g.get(x) - Complex64::new(1.0, 0.0)).norm()),
        Some((first, rest)) => {
            let parts: Vec<f64> = first
                .elements()
                .par_iter()
                .map(|&w| deviation_levels(&g.mult_derivative(w), rest))
                .collect();
            reduce::compensated_sum(parts) / first.len() as f64
        }
    }
}

/// E_{w_i in S_i} int_V |Delta_{w_1} ... Delta_{w_k} g - 1| over the given families.
///
/// Root-of-unity valued g use the closed form through cube products; otherwise the
/// families are enumerated, or sampled when `mc` is set and enumeration is too large.
pub(crate) fn deviation_average(
    g: &FunctionTable,
    generators: Vec<Vec<usize>>,
    caps: &Caps,
    mc: Option<MonteCarlo>,
) -> Result<(Estimate<f64>, &'static str)> {
    let space = g.space();
    if generators.is_empty() {
        return Ok((Estimate::exact(deviation_levels(g, &[])), "exact"));
    }
    let spec = CubeSpec {
        space,
        generators,
        window: vec![0],
        budget: caps.pattern_evals,
    };
    if root_valued(g).is_some() {
        if let Some(t) = Functional::PolytestDeviation.fast_table(g, &spec) {
            return Ok((Estimate::exact(t.mean().re), "root-spectrum"));
        }
    }
    let mut spans: Vec<Subspace> = spec
        .generators
        .iter()
        .map(|gens| Subspace::span(space, gens))
        .collect();
    spans.sort_by_key(|s| s.len());
    let cost = spans
        .iter()
        .fold(space.size() as u128, |a, s| a.saturating_mul(s.len() as u128));
    if cost <= caps.pattern_evals {
        return Ok((Estimate::exact(deviation_levels(g, &spans)), "exact"));
    }
    let Some(mc) = mc else {
        return Err(Error::CapExceeded {
            what: "polynomiality statistic",
            required: cost,
            cap: caps.pattern_evals,
        });
    };
    let tuples = draw_tuples(&spans, mc)?;
    let values: Vec<f64> = tuples
        .par_iter()
        .map(|ws| deviation_levels(&g.mult_derivatives(ws), &[]))
        .collect();
    Ok((mc_estimate(values), "monte-carlo"))
}

/// E_{a_i in F^{H_{r_i}}} int_V |Delta_{a_1 . v} ... Delta_{a_k . v} g - 1|.
pub fn local_polytest(
    g: &FunctionTable,
    plan: &SamplingPlan,
    r: &[usize],
    caps: &Caps,
    mc: Option<MonteCarlo>,
) -> Result<Estimate<f64>> {
    plan.space().check_same(&g.space())?;
    check_increasing(r)?;
    let generators = r
        .iter()
        .map(|&ri| plan.prefix(ri).map(|p| p.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok(deviation_average(g, generators, caps, mc)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gowers;
    use crate::poly::{symmetric_table, Polynomial};
    use crate::sampling::{make_scales, Growth, ScaleSequence};

    fn sp(p: u32, n: usize) -> Space {
        Space::of(p, n).unwrap()
    }

    fn spanning_plan(space: Space, h: Vec<usize>) -> SamplingPlan {
        let top = *h.last().unwrap();
        let mut vectors: Vec<usize> = (0..space.n()).map(|j| space.basis(j)).collect();
        vectors.resize(top.max(space.n()), 0);
        SamplingPlan::from_vectors(space, ScaleSequence::from_values(h).unwrap(), 0, vectors).unwrap()
    }

    /// Literal definition: every coefficient tuple, every x.
    fn literal_polytest(g: &FunctionTable, plan: &SamplingPlan, r: &[usize]) -> f64 {
        let space = g.space();
        let fams: Vec<Vec<usize>> = r
            .iter()
            .map(|&ri| super::super::combinations(space, plan.prefix(ri).unwrap()))
            .collect();
        let total: usize = fams.iter().map(|f| f.len()).product();
        let mut sum = 0.0;
        for t in 0..total {
            let mut rest = t;
            let ws: Vec<usize> = fams
                .iter()
                .map(|f| {
                    let w = f[rest % f.len()];
                    rest /= f.len();
                    w
                })
                .collect();
            let d = g.mult_derivatives(&ws);
            sum += d.values().iter().map(|v| (v - Complex64::new(1.0, 0.0)).norm()).sum::<f64>();
        }
        sum / (total * space.size()) as f64
    }

    #[test]
    fn constant_function_examples() {
        let s = sp(2, 6);
        let one = FunctionTable::constant(s, Complex64::new(1.0, 0.0));
        let plan = SamplingPlan::draw(s, make_scales(Growth::Linear { step: 2 }, 3).unwrap(), 1).unwrap();
        for r in [vec![1usize], vec![1, 2], vec![1, 2, 3]] {
            let v = local_gowers(&one, &plan, &r, &Caps::default(), None).unwrap();
            assert!((v.value - 1.0).abs() < 1e-15);
        }
        assert!(local_average_residual(&one, &plan, 2).unwrap() < 1e-15);
    }

    #[test]
    fn spanning_prefixes_give_global_values() {
        for (p, n) in [(2u32, 3usize), (3, 2)] {
            let s = sp(p, n);
            let plan = spanning_plan(s, vec![0, n, n + 1, n + 2]);
            for seed in 0..5 {
                let f = random::disk_table(s, &mut random::rng(seed));
                for d in 1..=3 {
                    let r: Vec<usize> = (1..=d).collect();
                    let local = local_gowers(&f, &plan, &r, &Caps::default(), None).unwrap();
                    let direct = gowers::gowers_norm_direct(&f, d, &Caps::default()).unwrap().value;
                    assert!((local.value - direct.powi(1 << d)).abs() < 1e-10);
                }
                assert!(local_average_residual(&f, &plan, 1).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn local_gowers_matches_literal_average() {
        let s = sp(2, 5);
        let plan = SamplingPlan::draw(s, ScaleSequence::from_values(vec![0, 1, 2, 3]).unwrap(), 4).unwrap();
        let f = random::disk_table(s, &mut random::rng(3));
        let r = [1usize, 2, 3];
        let fams: Vec<Vec<usize>> = r
            .iter()
            .map(|&ri| super::super::combinations(s, plan.prefix(ri).unwrap()))
            .collect();
        let mut sum = Complex64::new(0.0, 0.0);
        for &a in &fams[0] {
            for &b in &fams[1] {
                for &c in &fams[2] {
                    sum += f.mult_derivatives(&[a, b, c]).mean();
                }
            }
        }
        let literal = sum / (fams[0].len() * fams[1].len() * fams[2].len()) as f64;
        let v = local_gowers(&f, &plan, &r, &Caps::default(), None).unwrap();
        assert!(literal.im.abs() < 1e-12);
        assert!((v.value - literal.re).abs() < 1e-12);
    }

    #[test]
    fn polytest_matches_literal_definition() {
        let s = sp(2, 4);
        let plan = SamplingPlan::draw(s, ScaleSequence::from_values(vec![0, 1, 2, 3]).unwrap(), 5).unwrap();
        let roots = symmetric_table(s.n(), 3).unwrap();
        let flipped = random::flip_signs(&roots, 0.2, 1);
        let disk = random::disk_table(s, &mut random::rng(6));
        for g in [&roots, &flipped, &disk] {
            for r in [vec![1usize], vec![1, 2], vec![1, 2, 3]] {
                let v = local_polytest(g, &plan, &r, &Caps::default(), None).unwrap();
                assert!((v.value - literal_polytest(g, &plan, &r)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn phase_polynomial_of_lower_degree_passes_locally() {
        let s = sp(3, 3);
        let poly = Polynomial::new(s, 2, vec![(vec![2, 0, 0], 1), (vec![0, 1, 1], 2)]).unwrap();
        let g = poly.to_table().phase();
        let plan = SamplingPlan::draw(s, make_scales(Growth::Linear { step: 1 }, 3).unwrap(), 2).unwrap();
        let v = local_polytest(&g, &plan, &[1, 2, 3], &Caps::default(), None).unwrap();
        assert!(v.value < 1e-12);
    }

    #[test]
    fn monte_carlo_fallbacks() {
        let s = sp(2, 6);
        let plan = SamplingPlan::draw(s, ScaleSequence::from_values(vec![0, 3, 5, 6]).unwrap(), 8).unwrap();
        let f = random::disk_table(s, &mut random::rng(8));
        let tiny = Caps {
            pattern_evals: 100,
            ..Caps::default()
        };
        let mc = MonteCarlo { samples: 3000, seed: 2 };
        let exact = local_gowers(&f, &plan, &[1, 2, 3], &Caps::default(), None).unwrap();
        let est = local_gowers(&f, &plan, &[1, 2, 3], &tiny, Some(mc)).unwrap();
        assert_eq!(est.mode, EstimateMode::Mc);
        assert!((est.value - exact.value).abs() < 6.0 * est.stderr.unwrap() + 1e-12);
        assert!(local_gowers(&f, &plan, &[1, 2, 3], &tiny, None).is_err());

        let exact = local_polytest(&f, &plan, &[1, 2], &Caps::default(), None).unwrap();
        let est = local_polytest(&f, &plan, &[1, 2], &tiny, Some(mc)).unwrap();
        assert!((est.value - exact.value).abs() < 6.0 * est.stderr.unwrap() + 1e-12);
    }

    #[test]
    fn scales_are_validated() {
        let s = sp(2, 3);
        let plan = spanning_plan(s, vec![0, 3, 4]);
        let f = FunctionTable::constant(s, Complex64::new(1.0, 0.0));
        assert!(local_gowers(&f, &plan, &[2, 1], &Caps::default(), None).is_err());
        assert!(local_gowers(&f, &plan, &[], &Caps::default(), None).is_err());
        assert!(local_polytest(&f, &plan, &[1, 5], &Caps::default(), None).is_err());
    }
}
