//! Expectation estimates over weighted collections of realizations.
//!
//! A [`SamplePool`] is a fixed, seeded Monte-Carlo sample (common random
//! numbers: every candidate set is scored on the same draws). The exact
//! distribution built by the oracle uses the same [`Scenarios`] machinery with
//! product probabilities as weights, so every algorithm can run unchanged on
//! either.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cascade::{
    self, conditional_sample_unchecked, count_engaged, reach_mask, CascadeError,
    PartialRealization, Realization,
};
use crate::network::{Instance, NodeId, NodeSet};

/// Default Monte-Carlo sample count for selection.
pub const DEFAULT_SAMPLES: usize = 10_000;

/// Reach tables are only built below this many `u64` words.
const REACH_TABLE_LIMIT: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("sample count must be at least 1")]
    EmptyPool,
    #[error("truncation level {z} is outside [0, {budget}]")]
    TruncationOutOfRange { z: f64, budget: f64 },
    #[error("node {0} is already selected in the partial realization")]
    AlreadySelected(NodeId),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
}

/// Anything that can score seed sets against the cascade distribution.
pub trait Evaluator: Sync {
    fn instance(&self) -> &Instance;

    /// `E[min{g(S, Φ), cap}]`. A negative cap yields that cap.
    fn truncated_value(&self, seeds: &NodeSet, cap: f64) -> f64;

    /// `E[min{g(S ∪ {e}, Φ), cap} − min{g(S, Φ), cap}]`, accumulated per
    /// realization so that an exactly-zero gain stays exactly zero.
    fn truncated_marginal(&self, seeds: &NodeSet, e: NodeId, cap: f64) -> f64;

    /// `g_exp(S)`.
    fn expected_engagements(&self, seeds: &NodeSet) -> f64 {
        self.truncated_value(seeds, f64::INFINITY)
    }

    /// `l(S, z) = E[min{g(S, Φ), B − z}]`.
    fn truncated_objective(&self, seeds: &NodeSet, z: f64) -> f64 {
        self.truncated_value(seeds, self.instance().budget() - z)
    }

    /// `f_exp(S) = E[min{g(S, Φ), B − c(S)}]`; negative once `c(S) > B`.
    fn expected_revenue(&self, seeds: &NodeSet) -> f64 {
        let inst = self.instance();
        self.truncated_value(seeds, inst.budget() - inst.set_cost(seeds))
    }
}

/// Weighted realizations with an optional per-realization reach table.
#[derive(Debug, Clone)]
pub struct Scenarios<'a> {
    instance: &'a Instance,
    realizations: Vec<Realization>,
    weights: Vec<f64>,
    normalizer: f64,
    // reach[r * n + v] = reach set of v in realization r, for n <= 64
    reach: Option<Vec<u64>>,
}

impl<'a> Scenarios<'a> {
    /// `weights` are divided by `normalizer` at the end of every sum.
    pub fn new(
        instance: &'a Instance,
        realizations: Vec<Realization>,
        weights: Vec<f64>,
        normalizer: f64,
    ) -> Self {
        assert_eq!(realizations.len(), weights.len());
        let n = instance.node_count();
        let reach = (n <= 64 && realizations.len() * n <= REACH_TABLE_LIMIT).then(|| {
            realizations
                .iter()
                .flat_map(|r| (0..n).map(move |v| reach_mask(instance, v, r)))
                .collect()
        });
        Scenarios {
            instance,
            realizations,
            weights,
            normalizer,
            reach,
        }
    }

    pub fn uniform(instance: &'a Instance, realizations: Vec<Realization>) -> Self {
        let m = realizations.len();
        Scenarios::new(instance, realizations, vec![1.0; m], m as f64)
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    pub fn realizations(&self) -> &[Realization] {
        &self.realizations
    }

    /// Normalized weight of each realization.
    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().map(move |w| w / self.normalizer)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Realization, f64)> + '_ {
        self.realizations.iter().zip(self.probabilities())
    }

    fn mask_of(&self, r: usize, seeds: &NodeSet) -> u64 {
        let table = self.reach.as_ref().expect("reach table");
        let n = self.instance.node_count();
        seeds.iter().fold(0u64, |m, v| m | table[r * n + v])
    }

    fn mask_with(&self, r: usize, base: u64, e: NodeId) -> u64 {
        let table = self.reach.as_ref().expect("reach table");
        base | table[r * self.instance.node_count() + e]
    }

    /// `g(S, φ_r)` for realization `r`.
    pub fn engagements_in(&self, r: usize, seeds: &NodeSet) -> usize {
        match self.reach {
            Some(_) => self.mask_of(r, seeds).count_ones() as usize,
            None => count_engaged(self.instance, seeds, &self.realizations[r]),
        }
    }

    fn weighted_sum(&self, mut term: impl FnMut(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for (r, w) in self.weights.iter().enumerate() {
            acc += w * term(r);
        }
        acc / self.normalizer
    }
}

impl Evaluator for Scenarios<'_> {
    fn instance(&self) -> &Instance {
        self.instance
    }

    fn truncated_value(&self, seeds: &NodeSet, cap: f64) -> f64 {
        if seeds.is_empty() {
            return 0f64.min(cap);
        }
        match self.reach {
            Some(_) => self.weighted_sum(|r| (self.mask_of(r, seeds).count_ones() as f64).min(cap)),
            None => self.weighted_sum(|r| {
                (count_engaged(self.instance, seeds, &self.realizations[r]) as f64).min(cap)
            }),
        }
    }

    fn truncated_marginal(&self, seeds: &NodeSet, e: NodeId, cap: f64) -> f64 {
        if seeds.contains(e) {
            return 0.0;
        }
        match self.reach {
            Some(_) => self.weighted_sum(|r| {
                let base = self.mask_of(r, seeds);
                let before = (base.count_ones() as f64).min(cap);
                let after = (self.mask_with(r, base, e).count_ones() as f64).min(cap);
                after - before
            }),
            None => {
                let with = seeds.with(e);
                self.weighted_sum(|r| {
                    let real = &self.realizations[r];
                    let before = (count_engaged(self.instance, seeds, real) as f64).min(cap);
                    let after = (count_engaged(self.instance, &with, real) as f64).min(cap);
                    after - before
                })
            }
        }
    }
}

/// Fixed, seeded Monte-Carlo sample of realizations.
#[derive(Debug, Clone)]
pub struct SamplePool<'a> {
    scenarios: Scenarios<'a>,
    seed: u64,
}

impl<'a> SamplePool<'a> {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn realizations(&self) -> &[Realization] {
        self.scenarios.realizations()
    }

    pub fn scenarios(&self) -> &Scenarios<'a> {
        &self.scenarios
    }
}

impl Evaluator for SamplePool<'_> {
    fn instance(&self) -> &Instance {
        self.scenarios.instance
    }

    fn truncated_value(&self, seeds: &NodeSet, cap: f64) -> f64 {
        self.scenarios.truncated_value(seeds, cap)
    }

    fn truncated_marginal(&self, seeds: &NodeSet, e: NodeId, cap: f64) -> f64 {
        self.scenarios.truncated_marginal(seeds, e, cap)
    }
}

/// `samples` independent realizations, a pure function of `(instance, samples, seed)`.
pub fn build_pool(
    instance: &Instance,
    samples: usize,
    seed: u64,
) -> Result<SamplePool<'_>, EstimatorError> {
    if samples == 0 {
        return Err(EstimatorError::EmptyPool);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let realizations = (0..samples)
        .map(|_| cascade::sample_realization(instance, &mut rng))
        .collect();
    Ok(SamplePool {
        scenarios: Scenarios::uniform(instance, realizations),
        seed,
    })
}

fn check_truncation(instance: &Instance, z: f64) -> Result<(), EstimatorError> {
    if (0.0..=instance.budget()).contains(&z) {
        Ok(())
    } else {
        Err(EstimatorError::TruncationOutOfRange {
            z,
            budget: instance.budget(),
        })
    }
}

/// `l(S, z)` on any evaluator.
pub fn estimate_l<E: Evaluator + ?Sized>(
    eval: &E,
    seeds: &NodeSet,
    z: f64,
) -> Result<f64, EstimatorError> {
    check_truncation(eval.instance(), z)?;
    Ok(eval.truncated_objective(seeds, z))
}

pub fn estimate_f_exp<E: Evaluator + ?Sized>(eval: &E, seeds: &NodeSet) -> f64 {
    eval.expected_revenue(seeds)
}

pub fn estimate_g_exp<E: Evaluator + ?Sized>(eval: &E, seeds: &NodeSet) -> f64 {
    eval.expected_engagements(seeds)
}

/// Monte-Carlo `Δ_{h(·,·,z)}(e | ψ)` from `samples` fresh conditional draws.
pub fn conditional_marginal<R: Rng + ?Sized>(
    instance: &Instance,
    partial: &PartialRealization,
    e: NodeId,
    z: f64,
    samples: usize,
    rng: &mut R,
) -> Result<f64, EstimatorError> {
    if samples == 0 {
        return Err(EstimatorError::EmptyPool);
    }
    check_truncation(instance, z)?;
    if e >= instance.node_count() {
        return Err(CascadeError::UnknownNode(e).into());
    }
    if partial.dom().contains(e) {
        return Err(EstimatorError::AlreadySelected(e));
    }
    partial.validate(instance)?;
    Ok(sampled_marginal(instance, partial, e, instance.budget() - z, samples, rng))
}

pub(crate) fn sampled_marginal<R: Rng + ?Sized>(
    instance: &Instance,
    partial: &PartialRealization,
    e: NodeId,
    cap: f64,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let dom = partial.dom();
    let with = dom.with(e);
    let mut acc = 0.0;
    for _ in 0..samples {
        let r = conditional_sample_unchecked(instance, partial, rng);
        let before = (count_engaged(instance, dom, &r) as f64).min(cap);
        let after = (count_engaged(instance, &with, &r) as f64).min(cap);
        acc += after - before;
    }
    acc / samples as f64
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic seed for a sub-stream identified by `parts`.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |h, &p| splitmix64(h ^ splitmix64(p.wrapping_add(0x5851_F42D_4C95_7F2D))))
}

pub fn derived_rng(base: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// a→b (ρ=1), b→c (ρ=0.5), unit costs, B = 4.
    fn t1() -> Instance {
        Instance::new(
            [("a", 1.0), ("b", 1.0), ("c", 1.0)],
            [("a", "b", 1.0), ("b", "c", 0.5)],
            4.0,
            1.0,
        )
        .unwrap()
    }

    /// Both realizations of T1 with probability 1/2 each.
    fn t1_exact(inst: &Instance) -> Scenarios<'_> {
        Scenarios::new(
            inst,
            vec![Realization::from_mask(2, 0b11), Realization::from_mask(2, 0b01)],
            vec![0.5, 0.5],
            1.0,
        )
    }

    fn set(inst: &Instance, names: &[&str]) -> NodeSet {
        inst.node_set(names).unwrap()
    }

    #[test]
    fn pools_are_deterministic() {
        let inst = t1();
        let a = build_pool(&inst, 64, 9).unwrap();
        let b = build_pool(&inst, 64, 9).unwrap();
        assert_eq!(a.realizations(), b.realizations());
        assert_eq!(build_pool(&inst, 0, 9).unwrap_err(), EstimatorError::EmptyPool);
    }

    #[test]
    fn degenerate_pools() {
        let live = Instance::new([("a", 1.0), ("b", 1.0)], [("a", "b", 1.0)], 3.0, 1.0).unwrap();
        let dead = Instance::new([("a", 1.0), ("b", 1.0)], [("a", "b", 0.0)], 3.0, 1.0).unwrap();
        assert!(build_pool(&live, 20, 1)
            .unwrap()
            .realizations()
            .iter()
            .all(|r| *r == Realization::all_live(1)));
        assert!(build_pool(&dead, 20, 1)
            .unwrap()
            .realizations()
            .iter()
            .all(|r| *r == Realization::all_blocked(1)));
    }

    #[test]
    fn truncated_objective_on_t1() {
        let inst = t1();
        let ex = t1_exact(&inst);
        let a = set(&inst, &["a"]);
        assert_eq!(estimate_l(&ex, &NodeSet::new(), 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(estimate_l(&ex, &a, 0.0).unwrap(), 2.5);
        assert_abs_diff_eq!(estimate_l(&ex, &a, 2.0).unwrap(), 2.0);
        assert!(matches!(
            estimate_l(&ex, &a, 4.5),
            Err(EstimatorError::TruncationOutOfRange { .. })
        ));
    }

    #[test]
    fn revenue_and_engagements_on_t1() {
        let inst = t1();
        let ex = t1_exact(&inst);
        assert_eq!(estimate_f_exp(&ex, &NodeSet::new()), 0.0);
        assert_abs_diff_eq!(estimate_f_exp(&ex, &set(&inst, &["a"])), 2.5);
        assert_abs_diff_eq!(estimate_f_exp(&ex, &inst.all_nodes()), 1.0);
        assert_abs_diff_eq!(estimate_g_exp(&ex, &set(&inst, &["a"])), 2.5);

        let pair = Instance::new([("u", 1.0), ("v", 1.0)], [("u", "v", 0.5)], 3.0, 1.0).unwrap();
        let ex = Scenarios::new(
            &pair,
            vec![Realization::all_live(1), Realization::all_blocked(1)],
            vec![0.5, 0.5],
            1.0,
        );
        assert_abs_diff_eq!(estimate_f_exp(&ex, &set(&pair, &["u"])), 1.5);
    }

    #[test]
    fn deterministic_path_engagements() {
        let inst = Instance::new(
            [("a", 1.0), ("b", 1.0), ("c", 1.0)],
            [("a", "b", 1.0), ("b", "c", 1.0)],
            4.0,
            1.0,
        )
        .unwrap();
        let pool = build_pool(&inst, 10, 3).unwrap();
        assert_eq!(estimate_g_exp(&pool, &set(&inst, &["a"])), 3.0);
    }

    #[test]
    fn revenue_can_go_negative() {
        let inst = Instance::new([("a", 5.0)], Vec::<(&str, &str, f64)>::new(), 2.0, 1.0).unwrap();
        let pool = build_pool(&inst, 4, 0).unwrap();
        assert_eq!(estimate_f_exp(&pool, &NodeSet::singleton(0)), -3.0);
    }

    #[test]
    fn table_and_traversal_paths_agree() {
        let inst = t1();
        let pool = build_pool(&inst, 200, 17).unwrap();
        let no_table = Scenarios {
            reach: None,
            ..pool.scenarios().clone()
        };
        for mask in 0..8u64 {
            let s = NodeSet::from_mask(mask);
            for cap in [0.5, 2.0, 4.0, f64::INFINITY] {
                assert_eq!(
                    pool.truncated_value(&s, cap),
                    no_table.truncated_value(&s, cap)
                );
                for e in 0..3 {
                    assert_eq!(
                        pool.truncated_marginal(&s, e, cap),
                        no_table.truncated_marginal(&s, e, cap)
                    );
                }
            }
        }
    }

    #[test]
    fn conditional_marginals_on_t1() {
        let inst = t1();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let empty = PartialRealization::empty(&inst);
        let m = conditional_marginal(&inst, &empty, 0, 0.0, 20_000, &mut rng).unwrap();
        // E[min{g({a}), 4}] = 2.5, per-sample values in {2, 3}: sigma = 0.5/sqrt(M)
        assert!((m - 2.5).abs() < 3.0 * 0.5 / (20_000f64).sqrt(), "{m}");

        let blocked = cascade::observe(&inst, &set(&inst, &["a"]), &Realization::from_mask(2, 0b01))
            .unwrap();
        let b = conditional_marginal(&inst, &blocked, 1, 0.0, 500, &mut rng).unwrap();
        let c = conditional_marginal(&inst, &blocked, 2, 0.0, 500, &mut rng).unwrap();
        assert_eq!(b, 0.0);
        assert_eq!(c, 1.0);

        assert_eq!(
            conditional_marginal(&inst, &blocked, 0, 0.0, 10, &mut rng),
            Err(EstimatorError::AlreadySelected(0))
        );
        assert!(conditional_marginal(&inst, &blocked, 2, 9.0, 10, &mut rng).is_err());
    }

    #[test]
    fn derived_streams_differ_and_repeat() {
        assert_eq!(derive_seed(1, &[2, 3]), derive_seed(1, &[2, 3]));
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
        assert_ne!(derive_seed(1, &[2]), derive_seed(2, &[2]));
    }
}
