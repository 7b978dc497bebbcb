//! Exact brute-force machinery for small instances: realization enumeration,
//! exact objectives and conditional marginals, optimal non-adaptive sets,
//! optimal adaptive policies, and the structural property checkers.

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::cascade::{observe_unchecked, CascadeError, Label, PartialRealization, Realization};
use crate::estimator::{Evaluator, Scenarios};
use crate::network::{EdgeId, Instance, NodeId, NodeSet};

/// Default ceiling on the number of enumerated realizations.
pub const DEFAULT_REALIZATION_CAP: usize = 4096;
/// Largest ground set for exhaustive subset search.
pub const MAX_SUBSET_NODES: usize = 20;
/// Largest ground set for the exhaustive `A ⊆ B` checks.
pub const MAX_SUBMODULARITY_NODES: usize = 5;
/// Default caps for policy-tree search and adaptive property checks.
pub const MAX_ADAPTIVE_NODES: usize = 4;
pub const MAX_ADAPTIVE_EDGES: usize = 4;
/// Absolute tolerance of every exact comparison.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{what}: {size} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("observation has probability zero under the instance")]
    ImpossibleObservation,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
}

fn cap_check(what: &'static str, size: usize, cap: usize) -> Result<(), OracleError> {
    if size > cap {
        Err(OracleError::CapExceeded { what, size, cap })
    } else {
        Ok(())
    }
}

/// Every realization with non-zero probability, weighted by its probability.
#[derive(Debug, Clone)]
pub struct ExactDistribution<'a> {
    scenarios: Scenarios<'a>,
}

impl<'a> ExactDistribution<'a> {
    /// Realizations consistent with `partial`, weighted by `p(φ | Φ ∼ ψ)`.
    pub fn conditional(
        instance: &'a Instance,
        partial: &PartialRealization,
        cap: usize,
    ) -> Result<Self, OracleError> {
        partial.validate(instance)?;
        for (e, label) in partial.observed() {
            let p = instance.edge(e).probability;
            if (p == 0.0 && label == Label::Live) || (p == 1.0 && label == Label::Blocked) {
                return Err(OracleError::ImpossibleObservation);
            }
        }
        let free: Vec<EdgeId> = instance
            .random_edges()
            .filter(|&e| !partial.is_revealed(e))
            .collect();
        Self::over_free_edges(instance, &free, cap, |e| match partial.label(e) {
            Some(label) => label == Label::Live,
            None => instance.edge(e).probability == 1.0,
        })
    }

    fn over_free_edges(
        instance: &'a Instance,
        free: &[EdgeId],
        cap: usize,
        fixed_live: impl Fn(EdgeId) -> bool,
    ) -> Result<Self, OracleError> {
        if free.len() >= usize::BITS as usize - 1 {
            return Err(OracleError::CapExceeded {
                what: "realization count",
                size: usize::MAX,
                cap,
            });
        }
        let count = 1usize << free.len();
        cap_check("realization count", count, cap)?;
        let m = instance.edge_count();
        let base = Realization::from_fn(m, &fixed_live);
        let mut realizations = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for mask in 0..count {
            let mut bits = base.bits().clone();
            let mut p = 1.0;
            for (k, &e) in free.iter().enumerate() {
                let rho = instance.edge(e).probability;
                let live = mask >> k & 1 == 1;
                bits.set(e, live);
                p *= if live { rho } else { 1.0 - rho };
            }
            realizations.push(Realization::from_bits(bits));
            weights.push(p);
        }
        Ok(ExactDistribution {
            scenarios: Scenarios::new(instance, realizations, weights, 1.0),
        })
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    /// `(realization, probability)` pairs.
    pub fn entries(&self) -> impl Iterator<Item = (&Realization, f64)> + '_ {
        self.scenarios.iter()
    }

    pub fn total_probability(&self) -> f64 {
        self.scenarios.probabilities().sum()
    }

    pub fn scenarios(&self) -> &Scenarios<'a> {
        &self.scenarios
    }
}

impl Evaluator for ExactDistribution<'_> {
    fn instance(&self) -> &Instance {
        self.scenarios.instance()
    }

    fn truncated_value(&self, seeds: &NodeSet, cap: f64) -> f64 {
        self.scenarios.truncated_value(seeds, cap)
    }

    fn truncated_marginal(&self, seeds: &NodeSet, e: NodeId, cap: f64) -> f64 {
        self.scenarios.truncated_marginal(seeds, e, cap)
    }
}

/// Number of realizations full enumeration would produce (edges with ρ ∈ {0, 1} are pruned).
pub fn realization_count(instance: &Instance) -> Option<usize> {
    let free = instance.random_edges().count();
    (free < usize::BITS as usize - 1).then(|| 1usize << free)
}

/// True when exact evaluation fits under `cap`.
pub fn exact_feasible(instance: &Instance, cap: usize) -> bool {
    realization_count(instance).is_some_and(|c| c <= cap)
}

pub fn enumerate_realizations(instance: &Instance) -> Result<ExactDistribution<'_>, OracleError> {
    enumerate_realizations_capped(instance, DEFAULT_REALIZATION_CAP)
}

pub fn enumerate_realizations_capped(
    instance: &Instance,
    cap: usize,
) -> Result<ExactDistribution<'_>, OracleError> {
    let free: Vec<EdgeId> = instance.random_edges().collect();
    ExactDistribution::over_free_edges(instance, &free, cap, |e| {
        instance.edge(e).probability == 1.0
    })
}

pub fn exact_f_exp(instance: &Instance, seeds: &NodeSet) -> Result<f64, OracleError> {
    Ok(enumerate_realizations(instance)?.expected_revenue(seeds))
}

/// Exact `Δ_{h(·,·,z)}(e | ψ)` by conditional enumeration.
pub fn exact_marginal(
    instance: &Instance,
    partial: &PartialRealization,
    e: NodeId,
    z: f64,
) -> Result<f64, OracleError> {
    let dist = ExactDistribution::conditional(instance, partial, DEFAULT_REALIZATION_CAP)?;
    Ok(dist.truncated_marginal(partial.dom(), e, instance.budget() - z))
}

/// Every feasible subset (`c(S) <= B`), ordered by size then lexicographically.
fn feasible_subsets(instance: &Instance) -> Result<Vec<NodeSet>, OracleError> {
    let n = instance.node_count();
    cap_check("node count", n, MAX_SUBSET_NODES)?;
    let mut sets: Vec<NodeSet> = (0..1u64 << n)
        .map(NodeSet::from_mask)
        .filter(|s| instance.set_cost(s) <= instance.budget())
        .collect();
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.as_slice().cmp(b.as_slice())));
    Ok(sets)
}

/// Exhaustive `argmax {f_exp(S) | c(S) <= B}` against any evaluator.
/// Ties go to the smallest set, then the lexicographically first.
pub fn optimal_nonadaptive_with<E: Evaluator + ?Sized>(
    eval: &E,
) -> Result<(NodeSet, f64), OracleError> {
    let mut best = (NodeSet::new(), 0.0);
    for s in feasible_subsets(eval.instance())? {
        let v = eval.expected_revenue(&s);
        if v > best.1 {
            best = (s, v);
        }
    }
    Ok(best)
}

pub fn optimal_nonadaptive(instance: &Instance) -> Result<(NodeSet, f64), OracleError> {
    optimal_nonadaptive_with(&enumerate_realizations(instance)?)
}

/// Policy-tree search over partial realizations.
#[derive(Debug, Clone)]
pub struct AdaptiveOracle<'a> {
    instance: &'a Instance,
    allow_stop: bool,
    memo: HashMap<PartialRealization, f64>,
}

impl<'a> AdaptiveOracle<'a> {
    /// `allow_stop = false` forces the policy to keep selecting while some
    /// user is still affordable.
    pub fn new(instance: &'a Instance, allow_stop: bool) -> Result<Self, OracleError> {
        cap_check("node count", instance.node_count(), MAX_ADAPTIVE_NODES)?;
        cap_check("edge count", instance.edge_count(), MAX_ADAPTIVE_EDGES)?;
        Ok(AdaptiveOracle {
            instance,
            allow_stop,
            memo: HashMap::new(),
        })
    }

    /// Optimal expected revenue from the empty observation.
    pub fn optimum(&mut self) -> Result<f64, OracleError> {
        self.value(&PartialRealization::empty(self.instance))
    }

    /// Optimal expected revenue achievable once `psi` has been observed.
    pub fn value(&mut self, psi: &PartialRealization) -> Result<f64, OracleError> {
        if let Some(&v) = self.memo.get(psi) {
            return Ok(v);
        }
        let inst = self.instance;
        let dist = ExactDistribution::conditional(inst, psi, DEFAULT_REALIZATION_CAP)?;
        let dom = psi.dom();
        let spent = inst.set_cost(dom);
        let stop = dist.expected_revenue(dom);

        let mut best: Option<f64> = self.allow_stop.then_some(stop);
        for e in 0..inst.node_count() {
            if dom.contains(e) || spent + inst.cost(e) > inst.budget() {
                continue;
            }
            let next_dom = dom.with(e);
            let mut outcomes: Vec<(PartialRealization, f64)> = Vec::new();
            for (phi, p) in dist.entries() {
                if p == 0.0 {
                    continue;
                }
                let next = observe_unchecked(inst, &next_dom, phi);
                match outcomes.iter_mut().find(|(q, _)| *q == next) {
                    Some(slot) => slot.1 += p,
                    None => outcomes.push((next, p)),
                }
            }
            let mut v = 0.0;
            for (next, p) in &outcomes {
                v += p * self.value(next)?;
            }
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
        let v = best.unwrap_or(stop);
        self.memo.insert(psi.clone(), v);
        Ok(v)
    }
}

/// `max_π f_avg(π)` over budget-feasible deterministic policies that may stop at any time.
pub fn optimal_adaptive(instance: &Instance) -> Result<f64, OracleError> {
    AdaptiveOracle::new(instance, true)?.optimum()
}

/// Same search, but the policy must keep selecting while some user is affordable.
pub fn optimal_adaptive_without_stop(instance: &Instance) -> Result<f64, OracleError> {
    AdaptiveOracle::new(instance, false)?.optimum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    Submodularity,
    Monotonicity,
}

/// A witnessed failure of a set-function property. For monotonicity `a == b`
/// and `gain_b` is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetViolation {
    pub kind: ViolationKind,
    pub a: NodeSet,
    pub b: NodeSet,
    pub v: NodeId,
    pub gain_a: f64,
    pub gain_b: f64,
}

fn subset_values(
    n: usize,
    cap: usize,
    f: impl Fn(&NodeSet) -> f64,
) -> Result<Vec<f64>, OracleError> {
    cap_check("ground set size", n, cap)?;
    Ok((0..1u64 << n).map(|m| f(&NodeSet::from_mask(m))).collect())
}

/// Every `(A ⊆ B, v ∉ B)` with `f(A+v) − f(A) < f(B+v) − f(B) − 1e-9`.
pub fn check_submodularity(
    n: usize,
    f: impl Fn(&NodeSet) -> f64,
) -> Result<Vec<SetViolation>, OracleError> {
    let values = subset_values(n, MAX_SUBMODULARITY_NODES, f)?;
    let full = (1u64 << n) - 1;
    let mut out = Vec::new();
    for b in 0..=full {
        // walk every submask of b, including 0
        let mut a = b;
        loop {
            for v in (0..n).filter(|v| b >> v & 1 == 0) {
                let bit = 1u64 << v;
                let gain_a = values[(a | bit) as usize] - values[a as usize];
                let gain_b = values[(b | bit) as usize] - values[b as usize];
                if gain_a < gain_b - TOLERANCE {
                    out.push(SetViolation {
                        kind: ViolationKind::Submodularity,
                        a: NodeSet::from_mask(a),
                        b: NodeSet::from_mask(b),
                        v,
                        gain_a,
                        gain_b,
                    });
                }
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & b;
        }
    }
    Ok(out)
}

/// Every `(A, v ∉ A)` with `f(A+v) < f(A) − 1e-9`.
pub fn check_monotonicity(
    n: usize,
    f: impl Fn(&NodeSet) -> f64,
) -> Result<Vec<SetViolation>, OracleError> {
    let values = subset_values(n, MAX_SUBMODULARITY_NODES, f)?;
    let mut out = Vec::new();
    for a in 0..1u64 << n {
        for v in (0..n).filter(|v| a >> v & 1 == 0) {
            let gain = values[(a | 1 << v) as usize] - values[a as usize];
            if gain < -TOLERANCE {
                out.push(SetViolation {
                    kind: ViolationKind::Monotonicity,
                    a: NodeSet::from_mask(a),
                    b: NodeSet::from_mask(a),
                    v,
                    gain_a: gain,
                    gain_b: 0.0,
                });
            }
        }
    }
    Ok(out)
}

/// A partial realization in reportable form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservationSummary {
    pub dom: NodeSet,
    pub observed: Vec<(EdgeId, Label)>,
}

impl From<&PartialRealization> for ObservationSummary {
    fn from(psi: &PartialRealization) -> Self {
        ObservationSummary {
            dom: psi.dom().clone(),
            observed: psi.observed().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AdaptiveViolation {
    /// `Δ(e | ψ) < 0`.
    Monotonicity {
        psi: ObservationSummary,
        e: NodeId,
        delta: f64,
    },
    /// `ψ ⊆ ψ′` but `Δ(e | ψ) < Δ(e | ψ′)`.
    Submodularity {
        psi: ObservationSummary,
        psi_prime: ObservationSummary,
        e: NodeId,
        delta: f64,
        delta_prime: f64,
    },
}

/// All partial realizations reachable by selecting some subset under some
/// realization of positive probability.
pub fn reachable_observations(instance: &Instance) -> Result<Vec<PartialRealization>, OracleError> {
    let n = instance.node_count();
    cap_check("node count", n, MAX_SUBSET_NODES)?;
    let dist = enumerate_realizations(instance)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in 0..1u64 << n {
        let s = NodeSet::from_mask(mask);
        for (phi, p) in dist.entries() {
            if p == 0.0 {
                continue;
            }
            let psi = observe_unchecked(instance, &s, phi);
            if seen.insert(psi.clone()) {
                out.push(psi);
            }
        }
    }
    Ok(out)
}

/// Exhaustive adaptive monotonicity and submodularity check of `h(·,·,z)`.
pub fn check_adaptive_submodularity(
    instance: &Instance,
    z: f64,
) -> Result<Vec<AdaptiveViolation>, OracleError> {
    cap_check("node count", instance.node_count(), MAX_ADAPTIVE_NODES)?;
    cap_check("edge count", instance.edge_count(), MAX_ADAPTIVE_EDGES)?;
    if !(0.0..=instance.budget()).contains(&z) {
        return Err(OracleError::Precondition(format!(
            "z = {z} outside [0, {}]",
            instance.budget()
        )));
    }
    let n = instance.node_count();
    let cap = instance.budget() - z;
    let observations = reachable_observations(instance)?;
    let deltas: Vec<Vec<Option<f64>>> = observations
        .iter()
        .map(|psi| {
            let dist = ExactDistribution::conditional(instance, psi, DEFAULT_REALIZATION_CAP)?;
            Ok((0..n)
                .map(|e| {
                    (!psi.dom().contains(e)).then(|| dist.truncated_marginal(psi.dom(), e, cap))
                })
                .collect())
        })
        .collect::<Result<_, OracleError>>()?;

    let mut out = Vec::new();
    for (i, psi) in observations.iter().enumerate() {
        for (e, delta) in deltas[i].iter().enumerate() {
            if let Some(d) = *delta {
                if d < -TOLERANCE {
                    out.push(AdaptiveViolation::Monotonicity {
                        psi: psi.into(),
                        e,
                        delta: d,
                    });
                }
            }
        }
        for (j, bigger) in observations.iter().enumerate() {
            if i == j || !psi.is_subrealization_of(bigger) {
                continue;
            }
            for (e, pair) in deltas[i].iter().zip(&deltas[j]).enumerate() {
                if let (Some(d), Some(d_prime)) = (*pair.0, *pair.1) {
                    if d < d_prime - TOLERANCE {
                        out.push(AdaptiveViolation::Submodularity {
                            psi: psi.into(),
                            psi_prime: bigger.into(),
                            e,
                            delta: d,
                            delta_prime: d_prime,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `min{c1, x} − min{c2, x} >= min{c3, x} − min{c4, x}` under
/// `c1 >= c2`, `c3 >= c4`, `c1 − c2 >= c3 − c4`, `c2 <= c4`.
pub fn check_min_truncation(c1: f64, c2: f64, c3: f64, c4: f64, x: f64) -> Result<bool, OracleError> {
    if !(c1 >= c2 && c3 >= c4 && c1 - c2 >= c3 - c4 && c2 <= c4) {
        return Err(OracleError::Precondition(format!(
            "({c1}, {c2}, {c3}, {c4}) does not satisfy c1>=c2, c3>=c4, c1-c2>=c3-c4, c2<=c4"
        )));
    }
    Ok(c1.min(x) - c2.min(x) >= c3.min(x) - c4.min(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{engagements, observe};
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

    fn star() -> Instance {
        Instance::new(
            [("s", 2.0), ("v1", 1.0), ("v2", 1.0), ("v3", 1.0)],
            [("s", "v1", 1.0), ("s", "v2", 1.0), ("s", "v3", 1.0)],
            5.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn enumeration_sizes_and_weights() {
        let one = Instance::new([("a", 1.0), ("b", 1.0)], [("a", "b", 0.5)], 2.0, 1.0).unwrap();
        let d = enumerate_realizations(&one).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.entries().all(|(_, p)| p == 0.5));

        let two = Instance::new(
            [("a", 1.0), ("b", 1.0), ("c", 1.0)],
            [("a", "b", 0.5), ("b", "c", 0.5)],
            2.0,
            1.0,
        )
        .unwrap();
        let d = enumerate_realizations(&two).unwrap();
        assert_eq!(d.len(), 4);
        assert!(d.entries().all(|(_, p)| p == 0.25));

        let star = star();
        let d = enumerate_realizations(&star).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.total_probability(), 1.0);
    }

    #[test]
    fn enumeration_respects_cap() {
        let inst = t1();
        assert!(matches!(
            enumerate_realizations_capped(&inst, 1),
            Err(OracleError::CapExceeded { .. })
        ));
    }

    #[test]
    fn exact_revenue_on_t1() {
        let inst = t1();
        assert_eq!(exact_f_exp(&inst, &NodeSet::new()).unwrap(), 0.0);
        assert_abs_diff_eq!(exact_f_exp(&inst, &NodeSet::singleton(0)).unwrap(), 2.5);
        assert_abs_diff_eq!(exact_f_exp(&inst, &inst.all_nodes()).unwrap(), 1.0);
    }

    #[test]
    fn optimal_sets() {
        let inst = t1();
        let (s, v) = optimal_nonadaptive(&inst).unwrap();
        assert_eq!(s, NodeSet::singleton(0));
        assert_abs_diff_eq!(v, 2.5);

        let star = star();
        let (s, v) = optimal_nonadaptive(&star).unwrap();
        assert_eq!(star.names_of(&s), ["s"]);
        assert_abs_diff_eq!(v, 3.0);

        let pricey = Instance::new([("a", 9.0), ("b", 7.0)], [("a", "b", 0.5)], 3.0, 1.0).unwrap();
        assert_eq!(optimal_nonadaptive(&pricey).unwrap(), (NodeSet::new(), 0.0));
    }

    #[test]
    fn optimal_policy_values() {
        assert_abs_diff_eq!(optimal_adaptive(&t1()).unwrap(), 2.5);

        let lone = Instance::new([("v", 1.0)], Vec::<(&str, &str, f64)>::new(), 3.0, 1.0).unwrap();
        assert_abs_diff_eq!(optimal_adaptive(&lone).unwrap(), 1.0);
        let tight = Instance::new([("v", 2.5)], Vec::<(&str, &str, f64)>::new(), 3.0, 1.0).unwrap();
        assert_abs_diff_eq!(optimal_adaptive(&tight).unwrap(), 0.5);

        // no propagation: adaptivity gains nothing
        let dead = Instance::new(
            [("a", 1.0), ("b", 1.5), ("c", 0.5)],
            [("a", "b", 0.0), ("b", "c", 0.0)],
            4.0,
            1.0,
        )
        .unwrap();
        let (_, fixed) = optimal_nonadaptive(&dead).unwrap();
        assert_abs_diff_eq!(optimal_adaptive(&dead).unwrap(), fixed, epsilon = 1e-12);
    }

    #[test]
    fn forced_selection_is_never_better() {
        let inst = t1();
        let with = optimal_adaptive(&inst).unwrap();
        let without = optimal_adaptive_without_stop(&inst).unwrap();
        assert!(without <= with + TOLERANCE);
    }

    #[test]
    fn adaptive_caps_enforced() {
        let inst = star();
        let big = Instance::new(
            [("s", 2.0), ("v1", 1.0), ("v2", 1.0), ("v3", 1.0), ("z", 1.0)],
            [("s", "v1", 1.0), ("s", "v2", 1.0), ("s", "v3", 1.0)],
            5.0,
            1.0,
        )
        .unwrap();
        assert!(optimal_adaptive(&inst).is_ok());
        assert!(matches!(
            optimal_adaptive(&big),
            Err(OracleError::CapExceeded { .. })
        ));
    }

    #[test]
    fn submodularity_of_engagements_per_realization() {
        let inst = t1();
        for (phi, _) in enumerate_realizations(&inst).unwrap().entries() {
            let f = |s: &NodeSet| engagements(&inst, s, phi).unwrap() as f64;
            assert!(check_submodularity(3, f).unwrap().is_empty());
            assert!(check_monotonicity(3, f).unwrap().is_empty());
        }
    }

    #[test]
    fn truncated_objective_is_submodular_on_t1() {
        let inst = t1();
        let d = enumerate_realizations(&inst).unwrap();
        for z in [0.0, 2.0, 4.0] {
            let f = |s: &NodeSet| d.truncated_objective(s, z);
            assert!(check_submodularity(3, f).unwrap().is_empty());
        }
    }

    #[test]
    fn square_of_cardinality_is_flagged() {
        let v = check_submodularity(3, |s| (s.len() * s.len()) as f64).unwrap();
        assert!(!v.is_empty());
        assert!(v.iter().all(|x| x.kind == ViolationKind::Submodularity));
        assert!(check_submodularity(6, |_| 0.0).is_err());
    }

    #[test]
    fn conditional_distribution_and_marginals() {
        let inst = t1();
        let blocked = observe(&inst, &NodeSet::singleton(0), &Realization::from_mask(2, 0b01)).unwrap();
        let d = ExactDistribution::conditional(&inst, &blocked, 16).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(exact_marginal(&inst, &blocked, 1, 0.0).unwrap(), 0.0);
        assert_eq!(exact_marginal(&inst, &blocked, 2, 0.0).unwrap(), 1.0);
        let empty = PartialRealization::empty(&inst);
        assert_abs_diff_eq!(exact_marginal(&inst, &empty, 0, 0.0).unwrap(), 2.5);

        let impossible = PartialRealization::from_labels(
            &inst,
            NodeSet::singleton(0),
            [(0, Label::Blocked)],
        )
        .unwrap();
        assert_eq!(
            ExactDistribution::conditional(&inst, &impossible, 16).unwrap_err(),
            OracleError::ImpossibleObservation
        );
    }

    #[test]
    fn adaptive_submodularity_on_t1() {
        let inst = t1();
        for z in [0.0, 2.0, 4.0] {
            assert!(check_adaptive_submodularity(&inst, z).unwrap().is_empty());
        }
        // at z = B every marginal is zero
        let obs = reachable_observations(&inst).unwrap();
        for psi in &obs {
            for e in (0..3).filter(|&e| !psi.dom().contains(e)) {
                assert_eq!(exact_marginal(&inst, psi, e, 4.0).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn min_truncation_examples() {
        assert!(check_min_truncation(5.0, 1.0, 3.0, 2.0, 4.0).unwrap());
        assert!(check_min_truncation(2.0, 2.0, 2.0, 2.0, 7.0).unwrap());
        assert!(check_min_truncation(5.0, 1.0, 3.0, 2.0, 0.0).unwrap());
        assert!(check_min_truncation(1.0, 5.0, 3.0, 2.0, 0.0).is_err());
    }
}
