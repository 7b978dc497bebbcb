//! Adaptive seed selection: the conditional benefit-cost greedy policy `π¹`,
//! the best-singleton policy `π²`, their fair mixture `πˢ`, and an episode
//! executor that reveals a hidden realization one selection at a time.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cascade::{
    count_engaged, observe_unchecked, sample_realization, CascadeError, Label, PartialRealization,
    Realization,
};
use crate::estimator::{
    build_pool, derive_seed, derived_rng, sampled_marginal, EstimatorError, Evaluator,
};
use crate::network::{EdgeId, Instance, NodeId, NodeSet};
use crate::oracle::{enumerate_realizations, ExactDistribution, OracleError, DEFAULT_REALIZATION_CAP};

const COIN_STREAM: u64 = 0xC011;
const HIDDEN_STREAM: u64 = 0x41DD;
const EPISODE_STREAM: u64 = 0xE915;
const POOL_STREAM: u64 = 0x9001;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdaptiveError {
    #[error("unknown policy `{0}` (expected pi1, pi2 or pis)")]
    UnknownPolicy(String),
    #[error("episode count must be at least 1")]
    NoEpisodes,
    #[error(transparent)]
    Cascade(#[from] CascadeError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Pi1,
    Pi2,
    Pis,
}

impl FromStr for Policy {
    type Err = AdaptiveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pi1" => Ok(Policy::Pi1),
            "pi2" => Ok(Policy::Pi2),
            "pis" => Ok(Policy::Pis),
            other => Err(AdaptiveError::UnknownPolicy(other.to_string())),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Pi1 => "pi1",
            Policy::Pi2 => "pi2",
            Policy::Pis => "pis",
        })
    }
}

/// Cost cap and guarantee constant for the adaptive policies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdaptiveParams {
    /// `C = max{c(ē), B/2}` where ē is the most expensive user.
    pub cost_cap: f64,
    /// `α = min{1/2, 1 − C/B}`.
    pub alpha: f64,
    /// Conditional samples per marginal query in sampled mode.
    pub marginal_samples: usize,
    /// Use exact conditional enumeration instead of sampling.
    pub exact_marginals: bool,
    /// Set when `C >= B`: the guarantee says nothing for this instance.
    pub bound_vacuous: bool,
}

impl AdaptiveParams {
    pub fn with_exact_marginals(mut self) -> Self {
        self.exact_marginals = true;
        self
    }

    /// `α (1 − e^{−C/B}) / 2`, the guaranteed fraction of the optimal policy value.
    pub fn guarantee(&self, budget: f64) -> f64 {
        self.alpha * (1.0 - (-self.cost_cap / budget).exp()) / 2.0
    }
}

pub fn compute_params(instance: &Instance, marginal_samples: usize) -> AdaptiveParams {
    let b = instance.budget();
    let cost_cap = instance.max_cost().max(b / 2.0);
    AdaptiveParams {
        cost_cap,
        alpha: 0.5f64.min(1.0 - cost_cap / b),
        marginal_samples,
        exact_marginals: false,
        bound_vacuous: cost_cap >= b,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub node: NodeId,
    /// Edge labels first revealed by this selection.
    pub revealed: Vec<(EdgeId, Label)>,
}

/// One adaptive episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyTrace {
    /// The policy that actually made the selections (`pi1` or `pi2`).
    pub policy: Policy,
    /// True when the episode was dispatched by the `pis` coin flip.
    pub mixed: bool,
    pub steps: Vec<TraceStep>,
    pub final_seeds: NodeSet,
    pub realized_revenue: f64,
    pub episode_seed: u64,
}

fn revenue(instance: &Instance, seeds: &NodeSet, hidden: &Realization) -> f64 {
    let g = count_engaged(instance, seeds, hidden) as f64;
    g.min(instance.budget() - instance.set_cost(seeds))
}

fn check_hidden(instance: &Instance, hidden: &Realization) -> Result<(), CascadeError> {
    if hidden.len() != instance.edge_count() {
        return Err(CascadeError::LengthMismatch {
            expected: instance.edge_count(),
            found: hidden.len(),
        });
    }
    Ok(())
}

/// The next selection `π¹` makes after observing `psi`, or `None` when it stops.
///
/// `step` and `episode_seed` identify the sampling streams in sampled mode.
pub fn pi1_next(
    instance: &Instance,
    psi: &PartialRealization,
    params: &AdaptiveParams,
    episode_seed: u64,
    step: usize,
) -> Result<Option<NodeId>, AdaptiveError> {
    let dom = psi.dom();
    let cap = instance.budget();
    let exact = if params.exact_marginals {
        Some(ExactDistribution::conditional(instance, psi, DEFAULT_REALIZATION_CAP)?)
    } else {
        None
    };
    let mut best: Option<(NodeId, f64)> = None;
    for e in (0..instance.node_count()).filter(|&e| !dom.contains(e)) {
        let gain = match &exact {
            Some(dist) => dist.truncated_marginal(dom, e, cap),
            None => {
                let mut rng = derived_rng(episode_seed, &[step as u64, e as u64]);
                sampled_marginal(instance, psi, e, cap, params.marginal_samples.max(1), &mut rng)
            }
        };
        if gain <= 0.0 {
            continue;
        }
        let ratio = gain / instance.cost(e);
        if best.is_none_or(|(_, b)| ratio > b) {
            best = Some((e, ratio));
        }
    }
    Ok(best
        .filter(|&(e, _)| instance.set_cost(dom) + instance.cost(e) <= params.cost_cap)
        .map(|(e, _)| e))
}

/// Runs `π¹` against `hidden`.
pub fn run_pi1(
    instance: &Instance,
    hidden: &Realization,
    params: &AdaptiveParams,
    episode_seed: u64,
) -> Result<PolicyTrace, AdaptiveError> {
    check_hidden(instance, hidden)?;
    let mut psi = PartialRealization::empty(instance);
    let mut steps = Vec::new();
    while let Some(e) = pi1_next(instance, &psi, params, episode_seed, steps.len())? {
        let next = observe_unchecked(instance, &psi.dom().with(e), hidden);
        steps.push(TraceStep {
            node: e,
            revealed: next.newly_revealed(&psi),
        });
        psi = next;
    }
    let final_seeds = psi.dom().clone();
    Ok(PolicyTrace {
        policy: Policy::Pi1,
        mixed: false,
        steps,
        realized_revenue: revenue(instance, &final_seeds, hidden),
        final_seeds,
        episode_seed,
    })
}

/// The singleton `π²` commits to: the affordable user maximizing `f_exp({e})`.
pub fn pi2_choice<E: Evaluator + ?Sized>(eval: &E) -> Option<NodeId> {
    let inst = eval.instance();
    let mut best: Option<(NodeId, f64)> = None;
    for e in (0..inst.node_count()).filter(|&e| inst.cost(e) <= inst.budget()) {
        let v = eval.expected_revenue(&NodeSet::singleton(e));
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((e, v));
        }
    }
    best.map(|(e, _)| e)
}

fn pi2_trace(
    instance: &Instance,
    choice: Option<NodeId>,
    hidden: &Realization,
    episode_seed: u64,
) -> PolicyTrace {
    let empty = PartialRealization::empty(instance);
    let (steps, final_seeds) = match choice {
        Some(e) => {
            let seeds = NodeSet::singleton(e);
            let psi = observe_unchecked(instance, &seeds, hidden);
            let step = TraceStep {
                node: e,
                revealed: psi.newly_revealed(&empty),
            };
            (vec![step], seeds)
        }
        None => (Vec::new(), NodeSet::new()),
    };
    PolicyTrace {
        policy: Policy::Pi2,
        mixed: false,
        steps,
        realized_revenue: revenue(instance, &final_seeds, hidden),
        final_seeds,
        episode_seed,
    }
}

/// Runs `π²` against `hidden`, scoring singletons on `eval`.
pub fn run_pi2<E: Evaluator + ?Sized>(
    instance: &Instance,
    eval: &E,
    hidden: &Realization,
) -> Result<PolicyTrace, AdaptiveError> {
    check_hidden(instance, hidden)?;
    Ok(pi2_trace(instance, pi2_choice(eval), hidden, 0))
}

/// Fair coin drawn from the episode seed: `true` dispatches to `π¹`.
pub fn pis_uses_pi1(episode_seed: u64) -> bool {
    derived_rng(episode_seed, &[COIN_STREAM]).gen_bool(0.5)
}

/// Runs `πˢ`: a fair coin from `episode_seed` picks `π¹` or `π²`.
pub fn run_pis<E: Evaluator + ?Sized>(
    instance: &Instance,
    eval: &E,
    hidden: &Realization,
    params: &AdaptiveParams,
    episode_seed: u64,
) -> Result<PolicyTrace, AdaptiveError> {
    check_hidden(instance, hidden)?;
    let mut trace = if pis_uses_pi1(episode_seed) {
        run_pi1(instance, hidden, params, episode_seed)?
    } else {
        pi2_trace(instance, pi2_choice(eval), hidden, episode_seed)
    };
    trace.mixed = true;
    Ok(trace)
}

/// Hidden world and episode seed of episode `i` under `base_seed`.
pub fn episode_setup(instance: &Instance, base_seed: u64, i: usize) -> (Realization, u64) {
    let mut rng = derived_rng(base_seed, &[HIDDEN_STREAM, i as u64]);
    (
        sample_realization(instance, &mut rng),
        derive_seed(base_seed, &[EPISODE_STREAM, i as u64]),
    )
}

/// Monte-Carlo `f_avg(π)`: mean realized revenue over `episodes` sampled hidden worlds.
pub fn evaluate_policy(
    instance: &Instance,
    policy: Policy,
    episodes: usize,
    base_seed: u64,
    params: &AdaptiveParams,
) -> Result<f64, AdaptiveError> {
    if episodes == 0 {
        return Err(AdaptiveError::NoEpisodes);
    }
    let choice = match policy {
        Policy::Pi1 => None,
        _ if params.exact_marginals => pi2_choice(&enumerate_realizations(instance)?),
        _ => {
            let seed = derive_seed(base_seed, &[POOL_STREAM]);
            pi2_choice(&build_pool(instance, params.marginal_samples.max(1), seed)?)
        }
    };
    let revenues: Vec<f64> = (0..episodes)
        .into_par_iter()
        .map(|i| {
            let (hidden, seed) = episode_setup(instance, base_seed, i);
            let use_pi1 = match policy {
                Policy::Pi1 => true,
                Policy::Pi2 => false,
                Policy::Pis => pis_uses_pi1(seed),
            };
            if use_pi1 {
                Ok(run_pi1(instance, &hidden, params, seed)?.realized_revenue)
            } else {
                Ok(pi2_trace(instance, choice, &hidden, seed).realized_revenue)
            }
        })
        .collect::<Result<_, AdaptiveError>>()?;
    Ok(revenues.iter().sum::<f64>() / episodes as f64)
}

/// Exact expected revenue `f_avg(π)` and truncated value `h_avg(π, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolicyValue {
    pub f_avg: f64,
    pub h_avg: f64,
}

fn pi1_tree(
    instance: &Instance,
    psi: &PartialRealization,
    params: &AdaptiveParams,
) -> Result<PolicyValue, AdaptiveError> {
    let dist = ExactDistribution::conditional(instance, psi, DEFAULT_REALIZATION_CAP)?;
    let dom = psi.dom();
    let Some(e) = pi1_next(instance, psi, params, 0, dom.len())? else {
        return Ok(PolicyValue {
            f_avg: dist.expected_revenue(dom),
            h_avg: dist.truncated_value(dom, instance.budget()),
        });
    };
    let next_dom = dom.with(e);
    let mut outcomes: Vec<(PartialRealization, f64)> = Vec::new();
    for (phi, p) in dist.entries() {
        if p == 0.0 {
            continue;
        }
        let next = observe_unchecked(instance, &next_dom, phi);
        match outcomes.iter_mut().find(|(q, _)| *q == next) {
            Some(slot) => slot.1 += p,
            None => outcomes.push((next, p)),
        }
    }
    let mut value = PolicyValue {
        f_avg: 0.0,
        h_avg: 0.0,
    };
    for (next, p) in &outcomes {
        let child = pi1_tree(instance, next, params)?;
        value.f_avg += p * child.f_avg;
        value.h_avg += p * child.h_avg;
    }
    Ok(value)
}

/// Exact policy evaluation by walking the policy tree over observation
/// outcomes. `π¹` uses exact conditional marginals; `πˢ` is the average of
/// the two sub-policies.
pub fn exact_policy_value(
    instance: &Instance,
    policy: Policy,
    params: &AdaptiveParams,
) -> Result<PolicyValue, AdaptiveError> {
    let exact = params.with_exact_marginals();
    match policy {
        Policy::Pi1 => pi1_tree(instance, &PartialRealization::empty(instance), &exact),
        Policy::Pi2 => {
            let dist = enumerate_realizations(instance)?;
            Ok(match pi2_choice(&dist) {
                Some(e) => {
                    let s = NodeSet::singleton(e);
                    PolicyValue {
                        f_avg: dist.expected_revenue(&s),
                        h_avg: dist.truncated_value(&s, instance.budget()),
                    }
                }
                None => PolicyValue {
                    f_avg: 0.0,
                    h_avg: 0.0,
                },
            })
        }
        Policy::Pis => {
            let a = exact_policy_value(instance, Policy::Pi1, &exact)?;
            let b = exact_policy_value(instance, Policy::Pi2, &exact)?;
            Ok(PolicyValue {
                f_avg: (a.f_avg + b.f_avg) / 2.0,
                h_avg: (a.h_avg + b.h_avg) / 2.0,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::observe;
    use approx::assert_abs_diff_eq;

    fn t1() -> Instance {
        Instance::new(
            [("a", 1.0), ("b", 1.0), ("c", 1.0)],
            [("a", "b", 1.0), ("b", "c", 0.5)],
            4.0,
            1.0,
        )
        .unwrap()
    }

    fn named(inst: &Instance, trace: &PolicyTrace) -> Vec<String> {
        trace.steps.iter().map(|s| inst.name(s.node).to_string()).collect()
    }

    #[test]
    fn params_follow_formulas() {
        let cheap = t1();
        let p = compute_params(&cheap, 10);
        assert_eq!(p.cost_cap, 2.0);
        assert_eq!(p.alpha, 0.5);
        assert!(!p.bound_vacuous);
        assert_abs_diff_eq!(p.guarantee(4.0), (1.0 - (-0.5f64).exp()) / 4.0);

        let mid = Instance::new([("a", 3.0), ("b", 1.0)], [("a", "b", 0.5)], 4.0, 1.0).unwrap();
        let p = compute_params(&mid, 10);
        assert_eq!(p.cost_cap, 3.0);
        assert_eq!(p.alpha, 0.25);

        let edge = Instance::new([("a", 4.0), ("b", 1.0)], [("a", "b", 0.5)], 4.0, 1.0).unwrap();
        let p = compute_params(&edge, 10);
        assert_eq!(p.cost_cap, 4.0);
        assert_eq!(p.alpha, 0.0);
        assert!(p.bound_vacuous);
    }

    #[test]
    fn pi1_on_t1_blocked_world() {
        let inst = t1();
        let params = compute_params(&inst, 0).with_exact_marginals();
        let hidden = Realization::from_mask(2, 0b01);
        let trace = run_pi1(&inst, &hidden, &params, 3).unwrap();
        assert_eq!(named(&inst, &trace), ["a", "c"]);
        assert_eq!(trace.realized_revenue, 2.0);
    }

    #[test]
    fn pi1_on_t1_live_world() {
        let inst = t1();
        let params = compute_params(&inst, 0).with_exact_marginals();
        let trace = run_pi1(&inst, &Realization::all_live(2), &params, 3).unwrap();
        assert_eq!(named(&inst, &trace), ["a"]);
        assert_eq!(trace.realized_revenue, 3.0);
    }

    #[test]
    fn sampled_pi1_matches_exact_on_t1() {
        let inst = t1();
        let params = compute_params(&inst, 400);
        let trace = run_pi1(&inst, &Realization::from_mask(2, 0b01), &params, 8).unwrap();
        assert_eq!(named(&inst, &trace), ["a", "c"]);
        assert_eq!(trace, run_pi1(&inst, &Realization::from_mask(2, 0b01), &params, 8).unwrap());
    }

    #[test]
    fn pi1_with_nothing_affordable() {
        // C never drops below the largest cost, so force a cap below every cost
        let inst = Instance::new([("a", 5.0), ("b", 6.0)], [("a", "b", 0.5)], 3.0, 1.0).unwrap();
        let mut params = compute_params(&inst, 0).with_exact_marginals();
        params.cost_cap = 1.5;
        let trace = run_pi1(&inst, &Realization::all_live(1), &params, 0).unwrap();
        assert!(trace.final_seeds.is_empty());
        assert_eq!(trace.realized_revenue, 0.0);
    }

    #[test]
    fn trace_deltas_partition_the_observation() {
        let inst = t1();
        let params = compute_params(&inst, 0).with_exact_marginals();
        let hidden = Realization::from_mask(2, 0b01);
        let trace = run_pi1(&inst, &hidden, &params, 0).unwrap();
        let mut all: Vec<(EdgeId, Label)> =
            trace.steps.iter().flat_map(|s| s.revealed.clone()).collect();
        let n = all.len();
        all.sort_by_key(|(e, _)| *e);
        all.dedup_by_key(|(e, _)| *e);
        assert_eq!(all.len(), n);
        let full: Vec<_> = observe(&inst, &trace.final_seeds, &hidden)
            .unwrap()
            .observed()
            .collect();
        assert_eq!(all, full);
    }

    #[test]
    fn pi2_on_t1() {
        let inst = t1();
        let dist = enumerate_realizations(&inst).unwrap();
        let live = run_pi2(&inst, &dist, &Realization::all_live(2)).unwrap();
        assert_eq!(named(&inst, &live), ["a"]);
        assert_eq!(live.realized_revenue, 3.0);
        let cut = run_pi2(&inst, &dist, &Realization::from_mask(2, 0b01)).unwrap();
        assert_eq!(cut.final_seeds, NodeSet::singleton(0));
        assert_eq!(cut.realized_revenue, 2.0);

        let lone = Instance::new([("v", 1.0)], Vec::<(&str, &str, f64)>::new(), 2.0, 1.0).unwrap();
        let d = enumerate_realizations(&lone).unwrap();
        assert_eq!(run_pi2(&lone, &d, &Realization::all_live(0)).unwrap().final_seeds, NodeSet::singleton(0));
    }

    #[test]
    fn pis_coin_is_fair_and_repeatable() {
        let heads = (0..10_000u64)
            .filter(|&i| pis_uses_pi1(derive_seed(42, &[i])))
            .count();
        let frac = heads as f64 / 10_000.0;
        assert!((0.47..=0.53).contains(&frac), "{frac}");

        let inst = t1();
        let dist = enumerate_realizations(&inst).unwrap();
        let params = compute_params(&inst, 0).with_exact_marginals();
        let hidden = Realization::from_mask(2, 0b01);
        let a = run_pis(&inst, &dist, &hidden, &params, 99).unwrap();
        let b = run_pis(&inst, &dist, &hidden, &params, 99).unwrap();
        assert_eq!(a, b);
        assert!(a.mixed);
    }

    #[test]
    fn exact_policy_values_on_t1() {
        let inst = t1();
        let params = compute_params(&inst, 0);
        for policy in [Policy::Pi1, Policy::Pi2, Policy::Pis] {
            let v = exact_policy_value(&inst, policy, &params).unwrap();
            assert_abs_diff_eq!(v.f_avg, 2.5, epsilon = 1e-12);
            assert!(v.h_avg >= v.f_avg);
        }
    }

    #[test]
    fn policy_tree_matches_hidden_world_enumeration() {
        let inst = Instance::new(
            [("a", 1.0), ("b", 2.0), ("c", 0.5), ("d", 1.5)],
            [("a", "b", 0.4), ("b", "c", 0.7), ("a", "d", 0.2), ("d", "c", 0.9)],
            4.0,
            1.0,
        )
        .unwrap();
        let params = compute_params(&inst, 0).with_exact_marginals();
        let tree = exact_policy_value(&inst, Policy::Pi1, &params).unwrap();
        let dist = enumerate_realizations(&inst).unwrap();
        let mut by_world = 0.0;
        for (phi, p) in dist.entries() {
            by_world += p * run_pi1(&inst, phi, &params, 0).unwrap().realized_revenue;
        }
        assert_abs_diff_eq!(tree.f_avg, by_world, epsilon = 1e-12);
    }

    #[test]
    fn no_propagation_means_no_randomness() {
        let inst = Instance::new([("a", 1.0), ("b", 2.0)], [("a", "b", 0.0)], 2.5, 1.0).unwrap();
        let params = compute_params(&inst, 0);
        // best affordable singleton is a: min{1, 1.5} = 1
        for policy in [Policy::Pi1, Policy::Pi2, Policy::Pis] {
            assert_eq!(exact_policy_value(&inst, policy, &params).unwrap().f_avg, 1.0);
            assert_eq!(evaluate_policy(&inst, policy, 50, 7, &params.with_exact_marginals()).unwrap(), 1.0);
        }
    }

    #[test]
    fn monte_carlo_mix_averages_the_two_policies() {
        let inst = t1();
        let params = compute_params(&inst, 200);
        let episodes = 4000;
        let p1 = evaluate_policy(&inst, Policy::Pi1, episodes, 5, &params).unwrap();
        let p2 = evaluate_policy(&inst, Policy::Pi2, episodes, 5, &params).unwrap();
        let ps = evaluate_policy(&inst, Policy::Pis, episodes, 5, &params).unwrap();
        // revenues lie in {2, 3}: per-episode sd <= 0.5
        let tol = 3.0 * 0.5 / (episodes as f64).sqrt() * 2.0;
        assert!((ps - (p1 + p2) / 2.0).abs() <= tol, "{ps} vs {p1} {p2}");
        assert_abs_diff_eq!(p1, 2.5, epsilon = tol);
        assert_eq!(ps, evaluate_policy(&inst, Policy::Pis, episodes, 5, &params).unwrap());
    }

    #[test]
    fn policy_names_parse() {
        assert_eq!("pis".parse::<Policy>().unwrap(), Policy::Pis);
        assert!(matches!("pi3".parse::<Policy>(), Err(AdaptiveError::UnknownPolicy(_))));
    }
}
