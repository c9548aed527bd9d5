//! Command-line front end for gowers-core.
//!
//! Every command prints one JSON document `{"config": RunConfig, "report": ...}` on
//! standard output (or CSV with `--csv` where a series exists). Diagnostics go to
//! standard error. Exit codes: 0 success, 2 precondition or input errors, 3 decode
//! failures.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gowers_core::counterexamples::{
    self, CorrelationMode, CubicStrategy,
};
use gowers_core::gowers::{self, WeakNormStrategy};
use gowers_core::io::{self, Encoding};
use gowers_core::poly::{self, HillClimb, PhaseCatalogue};
use gowers_core::polytest::{self, DecodeParams, StatisticMode};
use gowers_core::random;
use gowers_core::sampling::{
    self, functional_catalogue, make_scales, Growth, MonteCarlo, PointFunctional, SamplingPlan,
    StatisticReport,
};
use gowers_core::{Caps, Error, FunctionTable, Space};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Largest p^n accepted without --allow-big.
pub const DEFAULT_MAX_SIZE: usize = 1 << 20;

#[derive(Debug, Parser)]
#[command(name = "gowers", version, about = "Gowers norms, phase polynomials and sampling estimators on F_p^n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gowers uniformity norm U^d of a function table.
    ///
    /// Modes: recursive (default; nested multiplicative derivatives), direct (literal
    /// average over all base points and shifts), fast (sign-table popcounts when the
    /// input is +-1 on F_2^n), fourier (U^2 through the fourth moment of the Fourier
    /// coefficients).
    Norm(Common),
    /// Weak norm u^d: largest correlation with a phase polynomial of degree d - 1.
    ///
    /// Modes: catalogue (default; classical phases times symmetric phases
    /// e^{2 pi i |x| / 2^m} over F_2, exhaustive when small, hill climb otherwise),
    /// exhaustive (classical phases only, exact).
    WeakNorm(Common),
    /// Sampling estimators over spans of a drawn sequence v_1, v_2, ...
    ///
    /// Modes: subspace (average of f over a . v for a in F^m), local-gowers (Gowers
    /// average with shifts restricted to prefix spans), local-average (distance of
    /// coset averages over a prefix span from the global mean), local-polytest
    /// (polynomiality statistic with local shifts).
    Estimate(Common),
    /// Accurate sampling sequence check: local versus global cube-pattern averages for
    /// the Lipschitz functional catalogue, against the bound Lip / H_{r_1}.
    SampleCheck(Common),
    /// Polynomiality test statistic: average of |Delta_{h_1} ... Delta_{h_k} g - 1|.
    ///
    /// Modes: exact (default; shifts over all of V), local (shifts over prefix spans).
    Polytest(Common),
    /// Decode a function with small polynomiality statistic into a nearby phase
    /// polynomial of degree k - 1 (good shifts, cocycle vote, integration).
    Decode(Common),
    /// Counterexample reports.
    ///
    /// s4: correlation of (-1)^{S_4} with e^{2 pi i |x| / 8} (modes binomial, exact).
    /// fail-example: the function (1, i) on F_2, a degree-2 phase polynomial that is
    /// no rotated exponential of a classical polynomial.
    Counterexample(CounterexampleArgs),
    /// Correspondence identity: integrating a point functional against the empirical
    /// pattern distribution equals integrating it over shifted copies of f.
    ///
    /// Modes: product (default), alternating, coordinate, abs-diff.
    Correspond(Common),
    /// Generate a table: disk, unit, sign (random), phase (random catalogue phase
    /// polynomial of degree d), classical (random e_F(P), deg P <= d), symmetric
    /// (e^{2 pi i |x| / 2^d}), s4 ((-1)^{S_4}), corrupt (randomize a rate fraction of
    /// the input).
    Gen(Common),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Field characteristic.
    #[arg(long)]
    pub p: Option<u32>,
    /// Dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Norm order or phase degree.
    #[arg(long)]
    pub d: Option<usize>,
    /// Test order or number of shifts.
    #[arg(long)]
    pub k: Option<usize>,
    /// Input table (binary `.gftbl` detected by magic, otherwise JSON).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output path; for gen this receives the table.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, env = "GOWERS_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Command-specific mode, see the command help.
    #[arg(long)]
    pub mode: Option<String>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Lift the default size limit p^n <= 2^20 and use the hard caps.
    #[arg(long)]
    pub allow_big: bool,
    /// Emit the series as CSV where the command has one.
    #[arg(long)]
    pub csv: bool,
    /// Sampling plan file `{"p","n","seed","H","vectors"}`; drawn from --seed if absent.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Scale indices, comma separated; several tuples separated by ';'.
    #[arg(long)]
    pub scales: Option<String>,
    /// Number of vectors for subspace averages.
    #[arg(long)]
    pub m: Option<usize>,
    /// Monte Carlo samples for averages above the caps (exact only when absent).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Corruption rate for gen --mode corrupt.
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Example {
    S4,
    FailExample,
}

#[derive(Debug, Clone, Args)]
pub struct CounterexampleArgs {
    #[arg(value_enum)]
    pub which: Example,
    #[command(flatten)]
    pub common: Common,
    /// Also search cubic polynomials for the best classical correlation (n <= 24).
    #[arg(long)]
    pub cubics: bool,
    /// Restarts for the cubic hill climb.
    #[arg(long, default_value_t = 100)]
    pub restarts: usize,
}

/// Everything that determines a run, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<Example>,
    #[serde(flatten)]
    pub common: Common,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cubics: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    pub caps: Caps,
    pub max_size: usize,
}

/// Failure of a run, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Decode(_)) { 3 } else { 2 };
        let mut message = e.to_string();
        if matches!(e, Error::CapExceeded { .. }) {
            message.push_str("; pass --samples N for a Monte Carlo estimate where supported, or --allow-big to raise the caps");
        }
        Failure { code, message }
    }
}

fn precondition(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Rendered result of a run.
pub struct Output {
    pub stdout: String,
}

/// Parses and runs; on error returns the exit code and a message for standard error.
pub fn run<I, T>(argv: I) -> Outcome<Output>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let code = if e.use_stderr() { 2 } else { 0 };
        Failure {
            code,
            message: e.render().to_string(),
        }
    })?;
    let (command, example, common, extra) = match &cli.command {
        Command::Norm(c) => ("norm", None, c, None),
        Command::WeakNorm(c) => ("weak-norm", None, c, None),
        Command::Estimate(c) => ("estimate", None, c, None),
        Command::SampleCheck(c) => ("sample-check", None, c, None),
        Command::Polytest(c) => ("polytest", None, c, None),
        Command::Decode(c) => ("decode", None, c, None),
        Command::Counterexample(a) => ("counterexample", Some(a.which), &a.common, Some((a.cubics, a.restarts))),
        Command::Correspond(c) => ("correspond", None, c, None),
        Command::Gen(c) => ("gen", None, c, None),
    };
    let (caps, max_size) = if common.allow_big {
        (Caps::hard_limit(), usize::MAX)
    } else {
        (Caps::default(), DEFAULT_MAX_SIZE)
    };
    let config = RunConfig {
        command: command.to_string(),
        example,
        common: common.clone(),
        cubics: extra.map(|e| e.0),
        restarts: extra.map(|e| e.1),
        caps,
        max_size,
    };
    let work = || -> Outcome<Output> {
        match &cli.command {
            Command::Norm(c) => norm(&config, c),
            Command::WeakNorm(c) => weak_norm(&config, c),
            Command::Estimate(c) => estimate(&config, c),
            Command::SampleCheck(c) => sample_check(&config, c),
            Command::Polytest(c) => polytest_cmd(&config, c),
            Command::Decode(c) => decode(&config, c),
            Command::Counterexample(a) => counterexample(&config, a),
            Command::Correspond(c) => correspond(&config, c),
            Command::Gen(c) => gen(&config, c),
        }
    };
    match common.threads {
        Some(0) => Err(precondition("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| precondition(format!("cannot build a pool of {t} threads: {e}")))?
            .install(work),
        None => work(),
    }
}

fn document(config: &RunConfig, report: Value) -> Outcome<Output> {
    let doc = json!({ "config": config, "report": report });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| precondition(e.to_string()))?;
    text.push('\n');
    if let (Some(path), false) = (&config.common.output, config.command == "gen") {
        std::fs::write(path, &text).map_err(|e| precondition(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(Output { stdout: text })
}

fn to_value<T: Serialize>(v: &T) -> Outcome<Value> {
    serde_json::to_value(v).map_err(|e| precondition(e.to_string()))
}

fn mode<'a>(c: &'a Common, default: &'a str, allowed: &[&str]) -> Outcome<&'a str> {
    let m = c.mode.as_deref().unwrap_or(default);
    if allowed.contains(&m) {
        Ok(m)
    } else {
        Err(precondition(format!(
            "unknown --mode {m}; expected one of {}",
            allowed.join(", ")
        )))
    }
}

fn read_input(config: &RunConfig, c: &Common) -> Outcome<FunctionTable> {
    let path = c
        .input
        .as_deref()
        .ok_or_else(|| precondition("--input <table> is required"))?;
    let t = io::read_table(path).map_err(|e| match e {
        Error::Io(io) => precondition(format!("cannot read {}: {io}", path.display())),
        other => Failure::from(other),
    })?;
    check_size(config, t.space())?;
    if let Some(p) = c.p {
        if p != t.space().p() {
            return Err(precondition(format!("--p {p} but the input table has p = {}", t.space().p())));
        }
    }
    if let Some(n) = c.n {
        if n != t.space().n() {
            return Err(precondition(format!("--n {n} but the input table has n = {}", t.space().n())));
        }
    }
    t.check_bounded()?;
    Ok(t)
}

fn check_size(config: &RunConfig, space: Space) -> Outcome<()> {
    if space.size() > config.max_size {
        return Err(precondition(format!(
            "p^n = {} exceeds the default limit {}; pass --allow-big to lift it",
            space.size(),
            config.max_size
        )));
    }
    Ok(())
}

fn space_from_flags(config: &RunConfig, c: &Common) -> Outcome<Space> {
    let p = c.p.unwrap_or(2);
    let n = c.n.ok_or_else(|| precondition("--n is required"))?;
    let space = Space::of(p, n)?;
    check_size(config, space)?;
    Ok(space)
}

fn mc(c: &Common) -> Option<MonteCarlo> {
    c.samples.map(|samples| MonteCarlo { samples, seed: c.seed })
}

fn parse_tuples(s: &str) -> Outcome<Vec<Vec<usize>>> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<usize>()
                        .map_err(|_| precondition(format!("bad scale index {x:?} in --scales")))
                })
                .collect()
        })
        .collect()
}

fn plan_for(c: &Common, space: Space, order: usize, count: usize) -> Outcome<SamplingPlan> {
    if let Some(path) = &c.plan {
        let text = std::fs::read_to_string(path)
            .map_err(|e| precondition(format!("cannot read plan {}: {e}", path.display())))?;
        let plan: SamplingPlan =
            serde_json::from_str(&text).map_err(|e| precondition(format!("malformed plan: {e}")))?;
        plan.space().check_same(&space)?;
        return Ok(plan);
    }
    let scales = make_scales(Growth::default_for(order), count)?;
    Ok(SamplingPlan::draw(space, scales, c.seed)?)
}

fn norm(config: &RunConfig, c: &Common) -> Outcome<Output> {
    let f = read_input(config, c)?;
    let d = c.d.unwrap_or(2);
    let m = mode(c, "recursive", &["recursive", "direct", "fast", "fourier"])?;
    let report = match m {
        "recursive" => gowers::gowers_norm(&f, d)?,
        "direct" => gowers::gowers_norm_direct(&f, d, &config.caps)?,
        "fast" => gowers::gowers_norm_fast(&f, d, &config.caps)?,
        _ => {
            if d != 2 {
                return Err(precondition("--mode fourier computes U^2 only; use --d 2"));
            }
            gowers::fourier_u2(&f)?
        }
    };
    document(config, to_value(&report)?)
}

fn weak_norm(config: &RunConfig, c: &Common) -> Outcome<Output> {
    let f = read_input(config, c)?;
    let d = c.d.unwrap_or(2);
    let strategy = match mode(c, "catalogue", &["catalogue", "exhaustive"])? {
        "catalogue" => WeakNormStrategy::Catalogue(HillClimb {
            seed: c.seed,
            ..HillClimb::default()
        }),
        _ => WeakNormStrategy::ExhaustiveClassical,
    };
    let report = gowers::weak_norm(&f, d, &strategy, &config.caps)?;
    document(config, to_value(&report)?)
}

fn estimate(config: &RunConfig, c: &Common) -> Outcome<Output> {
    let f = read_input(config, c)?;
    let space = f.space();
    let m = mode(c, "subspace", &["subspace", "local-gowers", "local-average", "local-polytest"])?;
    let report = match m {
        "subspace" => {
            let count = c.m.unwrap_or(space.n().max(1));
            let vectors = sampling::draw_sampling_sequence(space, count, c.seed)?;
            let est = sampling::subspace_average(&f, &vectors, mc(c), &config.caps)?;
            let global = f.mean();
            json!({
                "statistic": "subspace-average",
                "m": count,
                "value": [est.value.re, est.value.im],
                "stderr": est.stderr,
                "mode": est.mode,
                "global_mean": [global.re, global.im],
                "deviation": (est.value - global).norm(),
            })
        }
        "local-gowers" => {
            let d = c.d.unwrap_or(2);
            let r = single_tuple(c, (1..=d).collect())?;
            let plan = plan_for(c, space, d, *r.iter().max().unwrap_or(&1))?;
            let est = sampling::local_gowers(&f, &plan, &r, &config.caps, mc(c))?;
            let mut v = to_value(&StatisticReport::new("local-gowers", &r, est))?;
            v["global"] = json!(gowers::gowers_power(&f, d));
            v
        }
        "local-average" => {
            let r = single_tuple(c, vec![1])?;
            if r.len() != 1 {
                return Err(precondition("local-average takes one scale index"));
            }
            let plan = plan_for(c, space, 1, r[0])?;
            let value = sampling::local_average_residual(&f, &plan, r[0])?;
            to_value(&StatisticReport::new(
                "local-average",
                &r,
                sampling::Estimate::exact(value),
            ))?
        }
        _ => {
            let k = c.k.unwrap_or(2);
            let r = single_tuple(c, (1..=k).collect())?;
            let plan = plan_for(c, space, k, *r.iter().max().unwrap_or(&1))?;
            let est = sampling::local_polytest(&f, &plan, &r, &config.caps, mc(c))?;
            to_value(&StatisticReport::new("local-polytest", &r, est))?
        }
    };
    document(config, report)
}

fn single_tuple(c: &Common, default: Vec<usize>) -> Outcome<Vec<usize>> {
    match &c.scales {
        None => Ok(default),
        Some(s) => {
            let mut tuples = parse_tuples(s)?;
            if tuples.len() != 1 {
                return Err(precondition("this mode takes a single --scales tuple"));
            }
            Ok(tuples.remove(0))
        }
    }
}

fn sample_check(config: &RunConfig, c: &Common) -> Outcome<Output> {
    let f = read_input(config, c)?;
    let k = c.k.unwrap_or(2);
    if k == 0 {
        return Err(precondition("--k must be at least 1"));
    }
    let tuples = match &c.scales {
        Some(s) => parse_tuples(s)?,
        None => vec![(0..=k).collect(), (1..=k + 1).collect()],
    };
    let top = tuples.iter().flatten().copied().max().unwrap_or(k);
    let plan = plan_for(c, f.space(), c.d.unwrap_or(k), top)?;
    let reports = sampling::verify_accuracy_batch(&f, &plan, &functional_catalogue(), &tuples, &config.caps, mc(c))?;
    let passed = reports.iter().filter(|r| r.pass).count();
    document(
        config,
        json!({
            "plan": plan,
            "checks": reports,
            "passed": passed,
            "total": reports.len(),
            "all_pass": passed == reports.len(),
        }),
    )
}

fn polytest_cmd(config: &RunConfig, c: &Common) -> Outcome<Output> {
    let g = read_input(config, c)?;
    let k = c.k.unwrap_or(2);
    let report = match mode(c, "exact", &["exact", "local"])? {
        "exact" => polytest::polytest_statistic(&g, k, StatisticMode::Exact, &config.caps, mc(c))?,
        _ => {
            let r = single_tuple(c, (1..=k).collect())?;
            let plan = plan_for(c, g.space(), k, *r.iter().max().unwrap_or(&1))?;
            polytest::polytest_statistic(
                &g,
                k,
                StatisticMode::Local { plan: &plan, scales: &r },
                &config.caps,
                mc(c),
            )?
        }
    };
    document(config, to_value(&report)?)
}

fn decode(config: &RunConfig, c: &Common) -> Outcome<Output> {
    let g = read_input(config, c)?;
    let k = c.k.ok_or_else(|| precondition("--k is required"))?;
    let result = polytest::decode(&g, k, &DecodeParams::default(), c.seed, &config.caps)?;
    document(
        config,
        json!({
            "k": result.k,
            "distance": result.distance,
            "statistic": result.statistic,
            "good_fraction": result.trace.good_fraction(),
            "snaps": result.trace.snaps(),
            "pair_violations": result.trace.pair_violations(),
            "phi": result.phi,
            "trace": result.trace,
        }),
    )
}

fn counterexample(config: &RunConfig, a: &CounterexampleArgs) -> Outcome<Output> {
    let c = &a.common;
    let mut report = match a.which {
        Example::FailExample => counterexamples::fail_example_report(&config.caps)?,
        Example::S4 => {
            let n = c.n.unwrap_or(64);
            let series: Vec<usize> = match mode(c, "binomial", &["binomial", "exact"])? {
                "exact" => {
                    counterexamples::s4_correlation(n, CorrelationMode::ExactTable, &config.caps)?;
                    vec![n]
                }
                _ => {
                    let mut ns: Vec<usize> = (1..=4).map(|q| q * n / 4).filter(|&m| m >= 4).collect();
                    ns.dedup();
                    if ns.is_empty() {
                        ns.push(n);
                    }
                    ns
                }
            };
            let mut rep = counterexamples::s4_report(&series, 0.02, &config.caps)?;
            if a.cubics {
                let strategy = if n <= 4 {
                    CubicStrategy::Exhaustive
                } else {
                    CubicStrategy::HillClimb {
                        restarts: a.restarts,
                        moves: 200,
                        seed: c.seed,
                    }
                };
                let found = counterexamples::s4_vs_classical_cubics(n, &strategy, &config.caps)?;
                rep.method.push(if found.exact {
                    "cubic correlation: exhaustive maximum".to_string()
                } else {
                    format!("cubic correlation: hill-climb lower bound, {} restarts", a.restarts)
                });
                rep.computed.push(counterexamples::NamedValue {
                    name: "best_cubic_correlation".to_string(),
                    value: num_complex::Complex64::new(found.value, 0.0),
                });
            }
            rep
        }
    };
    report.recompute_deviations()?;
    if c.csv {
        let mut text = format!(
            "# {}\n",
            serde_json::to_string(config).map_err(|e| precondition(e.to_string()))?
        );
        text.push_str(&report.to_csv());
        if let Some(path) = &c.output {
            std::fs::write(path, &text).map_err(|e| precondition(format!("cannot write {}: {e}", path.display())))?;
        }
        return Ok(Output { stdout: text });
    }
    document(config, to_value(&report)?)
}

fn correspond(config: &RunConfig, c: &Common) -> Outcome<Output> {
    let f = read_input(config, c)?;
    let k = c.k.unwrap_or(2);
    if k == 0 {
        return Err(precondition("--k must be at least 1"));
    }
    let g = match mode(c, "product", &["product", "alternating", "coordinate", "abs-diff"])? {
        "product" => PointFunctional::Product,
        "alternating" => PointFunctional::AlternatingProduct,
        "coordinate" => PointFunctional::Coordinate { i: 0 },
        _ => PointFunctional::AbsDiff { i: 0, j: k - 1 },
    };
    let plan = plan_for(c, f.space(), k, 1)?;
    let mut rng = random::stream_rng(c.seed, 1);
    let p = f.space().p();
    let shifts: Vec<Vec<u32>> = (0..k)
        .map(|_| (0..plan.vectors().len()).map(|_| rng.gen_range(0..p)).collect())
        .collect();
    let report = sampling::correspondence_check(&f, &plan, &g, &shifts)?;
    let mut v = to_value(&report)?;
    v["functional"] = to_value(&g)?;
    v["shifts"] = json!(shifts);
    document(config, v)
}

fn gen(config: &RunConfig, c: &Common) -> Outcome<Output> {
    let kind = mode(
        c,
        "disk",
        &["disk", "unit", "sign", "phase", "classical", "symmetric", "s4", "corrupt"],
    )?;
    let mut rng = random::rng(c.seed);
    let mut extra = json!({});
    let table = match kind {
        "corrupt" => {
            let input = read_input(config, c)?;
            let rate = c.rate.ok_or_else(|| precondition("--rate is required for corrupt"))?;
            if !(0.0..=1.0).contains(&rate) {
                return Err(precondition("--rate must lie in [0, 1]"));
            }
            random::corrupt(&input, rate, c.seed)
        }
        "s4" => {
            let space = space_from_flags(config, c)?;
            if space.p() != 2 {
                return Err(precondition("s4 lives on F_2^n"));
            }
            counterexamples::s4_signs(space.n())?.to_table()
        }
        "symmetric" => {
            let space = space_from_flags(config, c)?;
            if space.p() != 2 {
                return Err(precondition("symmetric phases live on F_2^n"));
            }
            let m = c.d.ok_or_else(|| precondition("--d (the exponent m of 2^m) is required"))?;
            poly::symmetric_table(space.n(), m as u32)?
        }
        _ => {
            let space = space_from_flags(config, c)?;
            match kind {
                "disk" => random::disk_table(space, &mut rng),
                "unit" => random::unit_table(space, &mut rng),
                "sign" => {
                    if space.p() != 2 {
                        return Err(precondition("sign tables live on F_2^n"));
                    }
                    random::sign_table(space, &mut rng)
                }
                "phase" => {
                    let d = c.d.ok_or_else(|| precondition("--d is required"))?;
                    let cat = PhaseCatalogue::new(space, d + 1)?;
                    let phi = cat.sample(&mut rng, 1)?.remove(0);
                    let table = phi.table();
                    extra = json!({ "phi": phi });
                    table
                }
                _ => {
                    let d = c.d.ok_or_else(|| precondition("--d is required"))?;
                    let basis = poly::MonomialBasis::new(space, d);
                    let coeffs: Vec<u32> = (0..basis.len()).map(|_| rng.gen_range(0..space.p())).collect();
                    let poly = basis.polynomial(&coeffs);
                    let table = poly.to_table().phase();
                    extra = json!({ "poly": poly });
                    table
                }
            }
        }
    };
    let mut report = json!({
        "kind": kind,
        "p": table.space().p(),
        "n": table.space().n(),
    });
    if let Some(obj) = extra.as_object() {
        for (key, val) in obj {
            report[key] = val.clone();
        }
    }
    match &c.output {
        Some(path) => {
            write_table(path, &table)?;
            report["output"] = json!(path.display().to_string());
        }
        None => report["table"] = serde_json::from_str(&io::table_to_json(&table)).map_err(|e| precondition(e.to_string()))?,
    }
    document(config, report)
}

fn write_table(path: &Path, table: &FunctionTable) -> Outcome<()> {
    io::write_table(path, table, Encoding::from_path(path)).map_err(|e| match e {
        Error::Io(io) => precondition(format!("cannot write {}: {io}", path.display())),
        other => Failure::from(other),
    })
}
