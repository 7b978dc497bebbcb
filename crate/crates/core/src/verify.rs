//! Randomized property battery over small generated instances.
//!
//! Each suite draws its own instances from `(seed, suite, trial)`, checks one
//! guarantee against the exact oracles, and reports the first counterexample
//! found. Trials run in parallel; results are assembled in trial order.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::adaptive::{compute_params, exact_policy_value, Policy};
use crate::cascade::engagements;
use crate::estimator::{build_pool, derive_seed, derived_rng, Evaluator};
use crate::network::{generate_random_instance, Instance, NodeSet, RandomInstanceSpec};
use crate::nonadaptive::{select, select_deterministic, select_known_cost};
use crate::oracle::{
    check_adaptive_submodularity, check_min_truncation, check_monotonicity, check_submodularity,
    enumerate_realizations, optimal_adaptive, optimal_nonadaptive_with, TOLERANCE,
};

/// `(1 − e^{−1/2}) / 4`.
pub fn two_phase_ratio() -> f64 {
    (1.0 - (-0.5f64).exp()) / 4.0
}

/// `(1 − 1/e) / 2`.
pub fn known_cost_ratio() -> f64 {
    (1.0 - (-1.0f64).exp()) / 2.0
}

/// Monte-Carlo sample count of the convergence suite.
pub const CONVERGENCE_SAMPLES: usize = 20_000;
/// Quintuples drawn by the min-truncation suite unless overridden.
pub const LEMMA_TRIALS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    SubmodG,
    SubmodL,
    RatioNonadaptive,
    RatioDeterministic,
    RatioKnownCost,
    AdaptiveSubmod,
    RatioAdaptive,
    HVsF,
    LemmaMin,
    Convergence,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::SubmodG,
        Suite::SubmodL,
        Suite::RatioNonadaptive,
        Suite::RatioDeterministic,
        Suite::RatioKnownCost,
        Suite::AdaptiveSubmod,
        Suite::RatioAdaptive,
        Suite::HVsF,
        Suite::LemmaMin,
        Suite::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SubmodG => "submod-g",
            Suite::SubmodL => "submod-l",
            Suite::RatioNonadaptive => "ratio-nonadaptive",
            Suite::RatioDeterministic => "ratio-deterministic",
            Suite::RatioKnownCost => "ratio-known-cost",
            Suite::AdaptiveSubmod => "adaptive-submod",
            Suite::RatioAdaptive => "ratio-adaptive",
            Suite::HVsF => "h-vs-f",
            Suite::LemmaMin => "lemma-min",
            Suite::Convergence => "convergence",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::SubmodG | Suite::SubmodL | Suite::AdaptiveSubmod => 50,
            Suite::RatioNonadaptive | Suite::RatioDeterministic | Suite::RatioKnownCost => 200,
            Suite::RatioAdaptive | Suite::HVsF | Suite::Convergence => 100,
            Suite::LemmaMin => LEMMA_TRIALS,
        }
    }

    /// Failing trials tolerated out of `trials`.
    pub fn allowed_failures(self, trials: usize) -> usize {
        match self {
            Suite::Convergence => trials / 100,
            _ => 0,
        }
    }

    fn stream(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).unwrap() as u64 + 1
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown suite `{0}`")]
pub struct UnknownSuite(pub String);

impl FromStr for Suite {
    type Err = UnknownSuite;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Overrides every suite's default trial count.
    pub trials: Option<usize>,
    /// Replaces the approximation constant of every ratio suite. Used to
    /// check that the harness reports failures.
    pub ratio_override: Option<f64>,
}

impl VerifyOptions {
    pub fn new(seed: u64) -> Self {
        VerifyOptions {
            seed,
            trials: None,
            ratio_override: None,
        }
    }

    pub fn trials(mut self, trials: usize) -> Self {
        self.trials = Some(trials);
        self
    }

    fn ratio(&self, nominal: f64) -> f64 {
        self.ratio_override.unwrap_or(nominal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    /// Instance in the text file format, when the trial had one.
    pub instance: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub trials: usize,
    pub failures: usize,
    pub allowed_failures: usize,
    /// Individual property evaluations performed.
    pub checks: u64,
    /// Suite-specific summary: smallest achieved ratio, largest error, etc.
    pub statistic: Option<Statistic>,
    pub counterexample: Option<Counterexample>,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Statistic {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Default)]
struct Trial {
    checks: u64,
    failure: Option<(Option<String>, String)>,
    stat: Option<f64>,
}

impl Trial {
    fn fail(&mut self, instance: Option<&Instance>, detail: String) {
        if self.failure.is_none() {
            self.failure = Some((instance.map(Instance::to_text), detail));
        }
    }
}

#[derive(Clone, Copy)]
enum Fold {
    Min,
    Max,
}

pub fn run_all(opts: &VerifyOptions) -> Vec<SuiteReport> {
    Suite::ALL.iter().map(|&s| run_suite(s, opts)).collect()
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    let start = Instant::now();
    let trials = opts.trials.unwrap_or_else(|| suite.default_trials());
    let (stat_name, fold) = match suite {
        Suite::RatioNonadaptive
        | Suite::RatioDeterministic
        | Suite::RatioKnownCost
        | Suite::RatioAdaptive => (Some("min_ratio"), Fold::Min),
        Suite::HVsF => (Some("min_gap"), Fold::Min),
        Suite::Convergence => (Some("max_error_over_bound"), Fold::Max),
        _ => (None, Fold::Min),
    };

    let results: Vec<Trial> = if suite == Suite::LemmaMin {
        lemma_chunks(opts.seed, trials)
    } else {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = derived_rng(opts.seed, &[suite.stream(), i as u64]);
                run_trial(suite, opts, &mut rng)
            })
            .collect()
    };

    let mut report = SuiteReport {
        suite,
        passed: true,
        trials,
        failures: 0,
        allowed_failures: suite.allowed_failures(trials),
        checks: 0,
        statistic: None,
        counterexample: None,
        elapsed_ms: 0,
    };
    let mut stat: Option<f64> = None;
    for (i, t) in results.into_iter().enumerate() {
        report.checks += t.checks;
        if let Some(v) = t.stat {
            stat = Some(match (stat, fold) {
                (None, _) => v,
                (Some(s), Fold::Min) => s.min(v),
                (Some(s), Fold::Max) => s.max(v),
            });
        }
        if let Some((instance, detail)) = t.failure {
            report.failures += 1;
            if report.counterexample.is_none() {
                report.counterexample = Some(Counterexample {
                    trial: i,
                    instance,
                    detail,
                });
            }
        }
    }
    report.passed = report.failures <= report.allowed_failures;
    report.statistic = stat_name.zip(stat).map(|(name, value)| Statistic { name, value });
    report.elapsed_ms = start.elapsed().as_millis();
    report
}

fn run_trial(suite: Suite, opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Trial {
    let mut t = Trial::default();
    match suite {
        Suite::SubmodG => submod_g(&mut t, rng),
        Suite::SubmodL => submod_l(&mut t, rng),
        Suite::RatioNonadaptive => ratio_nonadaptive(&mut t, opts, rng),
        Suite::RatioDeterministic => ratio_deterministic(&mut t, opts, rng),
        Suite::RatioKnownCost => ratio_known_cost(&mut t, opts, rng),
        Suite::AdaptiveSubmod => adaptive_submod(&mut t, rng),
        Suite::RatioAdaptive => ratio_adaptive(&mut t, opts, rng),
        Suite::HVsF => h_vs_f(&mut t, rng),
        Suite::Convergence => convergence(&mut t, rng),
        Suite::LemmaMin => unreachable!("lemma-min runs in chunks"),
    }
    t
}

/// Shape of a generated corpus instance.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_nodes: usize,
    pub max_edges: usize,
    /// Upper end of the cost range as a fraction of the budget.
    pub cost_fraction: f64,
}

/// Random instance with `1..=max_nodes` users, an integer budget in `3..=10`
/// and costs uniform on `[1, cost_fraction·B]`.
pub fn random_instance<R: Rng>(rng: &mut R, shape: Shape) -> Instance {
    let n = rng.gen_range(1..=shape.max_nodes);
    let m = rng.gen_range(0..=shape.max_edges.min(n * (n - 1)));
    let budget = rng.gen_range(3..=10) as f64;
    let spec = RandomInstanceSpec::new(n, m, budget, rng.gen())
        .costs(1.0, (shape.cost_fraction * budget).max(1.0));
    generate_random_instance(&spec).expect("corpus shapes are feasible")
}

/// Random instance whose every edge is deterministically live or blocked.
pub fn random_deterministic_instance<R: Rng>(rng: &mut R, max_nodes: usize) -> Instance {
    let base = random_instance(
        rng,
        Shape {
            max_nodes,
            max_edges: 2 * max_nodes,
            cost_fraction: 1.0,
        },
    );
    let edges: Vec<(String, String, f64)> = base
        .edges()
        .iter()
        .map(|e| {
            let p = if rng.gen_bool(0.75) { 1.0 } else { 0.0 };
            (base.name(e.source).into(), base.name(e.target).into(), p)
        })
        .collect();
    let nodes = base.names().iter().cloned().zip(base.costs().iter().copied());
    Instance::new(nodes, edges, base.budget(), base.cpe()).expect("rebuilt from a valid instance")
}

const SUBMOD_SHAPE: Shape = Shape {
    max_nodes: 5,
    max_edges: 8,
    cost_fraction: 1.0,
};

const NONADAPTIVE_SHAPE: Shape = Shape {
    max_nodes: 8,
    max_edges: 11,
    cost_fraction: 1.0,
};

const ADAPTIVE_SHAPE: Shape = Shape {
    max_nodes: 4,
    max_edges: 4,
    cost_fraction: 1.0,
};

const DETERMINISTIC_NODES: usize = 10;

fn set_function_checks(
    t: &mut Trial,
    inst: &Instance,
    what: &str,
    monotone: bool,
    f: impl Fn(&NodeSet) -> f64 + Copy,
) {
    let n = inst.node_count();
    t.checks += 1;
    match check_submodularity(n, f) {
        Ok(v) if v.is_empty() => {}
        Ok(v) => t.fail(Some(inst), format!("{what} not submodular: {:?}", v[0])),
        Err(e) => t.fail(Some(inst), e.to_string()),
    }
    if monotone {
        t.checks += 1;
        match check_monotonicity(n, f) {
            Ok(v) if v.is_empty() => {}
            Ok(v) => t.fail(Some(inst), format!("{what} not monotone: {:?}", v[0])),
            Err(e) => t.fail(Some(inst), e.to_string()),
        }
    }
}

fn submod_g(t: &mut Trial, rng: &mut ChaCha8Rng) {
    let inst = random_instance(rng, SUBMOD_SHAPE);
    let dist = match enumerate_realizations(&inst) {
        Ok(d) => d,
        Err(e) => return t.fail(Some(&inst), e.to_string()),
    };
    for (r, (phi, _)) in dist.entries().enumerate() {
        let g = |s: &NodeSet| engagements(&inst, s, phi).expect("valid seeds") as f64;
        set_function_checks(t, &inst, &format!("g under realization {r}"), true, g);
    }
    set_function_checks(t, &inst, "g_exp", true, |s| dist.expected_engagements(s));
}

fn submod_l(t: &mut Trial, rng: &mut ChaCha8Rng) {
    let inst = random_instance(rng, SUBMOD_SHAPE);
    let dist = match enumerate_realizations(&inst) {
        Ok(d) => d,
        Err(e) => return t.fail(Some(&inst), e.to_string()),
    };
    let b = inst.budget();
    for z in [0.0, b / 4.0, b / 2.0, b] {
        set_function_checks(t, &inst, &format!("l(., {z})"), true, |s| {
            dist.truncated_objective(s, z)
        });
    }
}

fn ratio_check(t: &mut Trial, inst: &Instance, label: &str, alg: f64, opt: f64, ratio: f64) {
    t.checks += 1;
    if opt > 0.0 {
        let achieved = alg / opt;
        t.stat = Some(t.stat.map_or(achieved, |s| s.min(achieved)));
    }
    if alg < ratio * opt - TOLERANCE {
        t.fail(
            Some(inst),
            format!("{label}: value {alg} below {ratio} x optimum {opt}"),
        );
    }
}

fn ratio_nonadaptive(t: &mut Trial, opts: &VerifyOptions, rng: &mut ChaCha8Rng) {
    let inst = random_instance(rng, NONADAPTIVE_SHAPE);
    let dist = match enumerate_realizations(&inst) {
        Ok(d) => d,
        Err(e) => return t.fail(Some(&inst), e.to_string()),
    };
    let (_, opt) = match optimal_nonadaptive_with(&dist) {
        Ok(v) => v,
        Err(e) => return t.fail(Some(&inst), e.to_string()),
    };
    let chosen = select(&dist);
    let value = dist.expected_revenue(&chosen.seeds);
    ratio_check(t, &inst, "select", value, opt, opts.ratio(two_phase_ratio()));
}

fn ratio_deterministic(t: &mut Trial, opts: &VerifyOptions, rng: &mut ChaCha8Rng) {
    let inst = random_deterministic_instance(rng, DETERMINISTIC_NODES);
    let dist = match enumerate_realizations(&inst) {
        Ok(d) => d,
        Err(e) => return t.fail(Some(&inst), e.to_string()),
    };
    let (_, opt) = match optimal_nonadaptive_with(&dist) {
        Ok(v) => v,
        Err(e) => return t.fail(Some(&inst), e.to_string()),
    };
    let chosen = match select_deterministic(&inst) {
        Ok(c) => c,
        Err(e) => return t.fail(Some(&inst), e.to_string()),
    };
    let value = dist.expected_revenue(&chosen.seeds);
    ratio_check(
        t,
        &inst,
        "select_deterministic",
        value,
        opt,
        opts.ratio(known_cost_ratio()),
    );
}

/// Known-cost selection on one deterministic and one stochastic instance,
/// drawn the same way as the deterministic and two-phase corpora.
fn ratio_known_cost(t: &mut Trial, opts: &VerifyOptions, rng: &mut ChaCha8Rng) {
    let deterministic = random_deterministic_instance(rng, DETERMINISTIC_NODES);
    let stochastic = random_instance(rng, NONADAPTIVE_SHAPE);
    for (label, inst) in [("deterministic", &deterministic), ("stochastic", &stochastic)] {
        let dist = match enumerate_realizations(inst) {
            Ok(d) => d,
            Err(e) => return t.fail(Some(inst), e.to_string()),
        };
        let (best, opt) = match optimal_nonadaptive_with(&dist) {
            Ok(v) => v,
            Err(e) => return t.fail(Some(inst), e.to_string()),
        };
        let chosen = select_known_cost(&dist, inst.set_cost(&best));
        let value = dist.expected_revenue(&chosen.seeds);
        ratio_check(
            t,
            inst,
            &format!("select_known_cost ({label})"),
            value,
            opt,
            opts.ratio(known_cost_ratio()),
        );
    }
}

fn adaptive_submod(t: &mut Trial, rng: &mut ChaCha8Rng) {
    let inst = random_instance(rng, ADAPTIVE_SHAPE);
    for z in [0.0, inst.budget() / 2.0] {
        t.checks += 1;
        match check_adaptive_submodularity(&inst, z) {
            Ok(v) if v.is_empty() => {}
            Ok(v) => t.fail(Some(&inst), format!("z = {z}: {:?}", v[0])),
            Err(e) => t.fail(Some(&inst), e.to_string()),
        }
    }
}

/// Adaptive corpus; about half the instances keep every cost within `B/2`.
fn adaptive_instance(rng: &mut ChaCha8Rng) -> Instance {
    let cheap = rng.gen_bool(0.5);
    let shape = Shape {
        cost_fraction: if cheap { 0.5 } else { 1.0 },
        ..ADAPTIVE_SHAPE
    };
    random_instance(rng, shape)
}

fn ratio_adaptive(t: &mut Trial, opts: &VerifyOptions, rng: &mut ChaCha8Rng) {
    let inst = adaptive_instance(rng);
    let params = compute_params(&inst, 0);
    let b = inst.budget();
    if inst.costs().iter().all(|&c| c <= b / 2.0) {
        t.checks += 1;
        let constant = params.guarantee(b);
        if constant != two_phase_ratio() {
            t.fail(
                Some(&inst),
                format!("all costs within B/2 but constant is {constant}"),
            );
        }
    }
    let values = [Policy::Pi1, Policy::Pi2, Policy::Pis]
        .map(|p| exact_policy_value(&inst, p, &params).map(|v| v.f_avg));
    let opt = optimal_adaptive(&inst);
    let ([Ok(f1), Ok(f2), Ok(fs)], Ok(opt)) = (values, opt) else {
        return t.fail(Some(&inst), "exact evaluation failed".to_string());
    };
    t.checks += 1;
    if fs != (f1 + f2) / 2.0 {
        t.fail(
            Some(&inst),
            format!("mixed policy value {fs} is not the mean of {f1} and {f2}"),
        );
    }
    let ratio = opts.ratio(params.guarantee(b));
    ratio_check(t, &inst, "mixed policy", fs, opt, ratio);
}

fn h_vs_f(t: &mut Trial, rng: &mut ChaCha8Rng) {
    let inst = adaptive_instance(rng);
    let params = compute_params(&inst, 0);
    for policy in [Policy::Pi1, Policy::Pi2, Policy::Pis] {
        t.checks += 1;
        match exact_policy_value(&inst, policy, &params) {
            Ok(v) => {
                let gap = v.h_avg - v.f_avg;
                t.stat = Some(t.stat.map_or(gap, |s| s.min(gap)));
                if gap < -TOLERANCE {
                    t.fail(
                        Some(&inst),
                        format!("{policy}: h_avg {} below f_avg {}", v.h_avg, v.f_avg),
                    );
                }
            }
            Err(e) => t.fail(Some(&inst), e.to_string()),
        }
    }
}

fn convergence(t: &mut Trial, rng: &mut ChaCha8Rng) {
    let inst = random_instance(
        rng,
        Shape {
            max_nodes: 8,
            max_edges: 10,
            cost_fraction: 1.0,
        },
    );
    let n = inst.node_count();
    let seeds = NodeSet::from_mask(rng.gen_range(0..1u64 << n));
    let pool_seed: u64 = rng.gen();
    let exact = match enumerate_realizations(&inst) {
        Ok(d) => d.expected_revenue(&seeds),
        Err(e) => return t.fail(Some(&inst), e.to_string()),
    };
    let pool = build_pool(&inst, CONVERGENCE_SAMPLES, pool_seed).expect("non-empty pool");
    let estimate = pool.expected_revenue(&seeds);
    let bound = 3.0 * inst.budget() / (CONVERGENCE_SAMPLES as f64).sqrt();
    let error = (estimate - exact).abs();
    t.checks += 1;
    t.stat = Some(error / bound);
    if error > bound {
        t.fail(
            Some(&inst),
            format!("seeds {seeds:?}: estimate {estimate} vs exact {exact}, bound {bound}"),
        );
    }

    let again = build_pool(&inst, CONVERGENCE_SAMPLES, pool_seed).expect("non-empty pool");
    t.checks += 1;
    if again.expected_revenue(&seeds).to_bits() != estimate.to_bits() {
        t.fail(Some(&inst), "repeated estimate differs".to_string());
    }
    t.checks += 1;
    if select(&pool) != select(&again) {
        t.fail(Some(&inst), "repeated selection differs".to_string());
    }
}

const LEMMA_CHUNK: usize = 1 << 14;

fn lemma_chunks(seed: u64, trials: usize) -> Vec<Trial> {
    let chunks = trials.div_ceil(LEMMA_CHUNK);
    let stream = derive_seed(seed, &[Suite::LemmaMin.stream()]);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = derived_rng(stream, &[c as u64]);
            let mut t = Trial::default();
            let count = LEMMA_CHUNK.min(trials - c * LEMMA_CHUNK);
            for _ in 0..count {
                let q = lemma_quintuple(&mut rng);
                t.checks += 1;
                match check_min_truncation(q[0], q[1], q[2], q[3], q[4]) {
                    Ok(true) => {}
                    Ok(false) => t.fail(None, format!("inequality fails at {q:?}")),
                    Err(e) => t.fail(None, e.to_string()),
                }
            }
            t
        })
        .collect()
}

/// `(c1, c2, c3, c4, x)` with `c1 >= c2`, `c3 >= c4`, `c1 − c2 >= c3 − c4`
/// and `c2 <= c4`. Half the draws come from a small integer grid so that
/// ties are exercised.
fn lemma_quintuple(rng: &mut ChaCha8Rng) -> [f64; 5] {
    loop {
        let mut draw = || {
            if rng.gen_bool(0.5) {
                rng.gen_range(0..=4) as f64
            } else {
                rng.gen_range(0.0..10.0)
            }
        };
        let c2 = draw();
        let c4 = c2 + draw();
        let d2 = draw();
        let d1 = d2 + draw();
        let x = draw() * 2.0;
        let q = [c2 + d1, c2, c4 + d2, c4, x];
        if q[0] >= q[1] && q[2] >= q[3] && q[0] - q[1] >= q[2] - q[3] && q[1] <= q[3] {
            return q;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn constants() {
        assert!((two_phase_ratio() - 0.0983673).abs() < 1e-7);
        assert!((known_cost_ratio() - 0.316060).abs() < 1e-6);
    }

    #[test]
    fn corpus_is_reproducible() {
        let a = random_instance(&mut derived_rng(5, &[1]), NONADAPTIVE_SHAPE);
        let b = random_instance(&mut derived_rng(5, &[1]), NONADAPTIVE_SHAPE);
        assert_eq!(a, b);
        let d = random_deterministic_instance(&mut derived_rng(5, &[2]), 10);
        assert!(d.is_deterministic());
        assert!(d.node_count() <= 10);
    }

    #[test]
    fn quintuples_meet_preconditions() {
        let mut rng = derived_rng(3, &[]);
        for _ in 0..1000 {
            let q = lemma_quintuple(&mut rng);
            assert!(check_min_truncation(q[0], q[1], q[2], q[3], q[4]).is_ok());
        }
    }

    #[test]
    fn small_runs_pass() {
        let opts = VerifyOptions::new(11).trials(5);
        for s in [Suite::SubmodG, Suite::RatioNonadaptive, Suite::LemmaMin] {
            let r = run_suite(s, &opts);
            assert!(r.passed, "{r:?}");
            assert_eq!(r.trials, 5);
        }
    }

    #[test]
    fn corrupted_threshold_is_caught() {
        let opts = VerifyOptions {
            ratio_override: Some(1.5),
            ..VerifyOptions::new(2).trials(10)
        };
        let r = run_suite(Suite::RatioNonadaptive, &opts);
        assert!(!r.passed);
        let cx = r.counterexample.expect("a counterexample");
        assert!(cx.instance.unwrap().starts_with("ic "));
    }
}
