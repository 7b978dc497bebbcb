//! Non-adaptive seed selection: the benefit-cost greedy template over the
//! truncated objective, the selector for a known optimal cost, the two-phase
//! general selector, and the enumeration-based selector for deterministic
//! instances.
//!
//! Every routine takes an [`Evaluator`], so the same code runs on a seeded
//! sample pool or on the exact distribution.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cascade::Realization;
use crate::estimator::{Evaluator, Scenarios};
use crate::network::{Instance, NodeId, NodeSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectionError {
    #[error("instance has {0} edges with probability strictly between 0 and 1")]
    NotDeterministic(usize),
}

/// Which candidate produced the returned seed set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Phase1Greedy,
    Phase1Singleton,
    Phase2Greedy { pivot: String },
    Phase2Singleton { pivot: String },
    KnownCostGreedy,
    KnownCostSingleton,
    Deterministic { prefix: usize, picks: usize },
    SingletonO,
    EmptySet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub seeds: NodeSet,
    pub objective_estimate: f64,
    pub total_cost: f64,
    pub provenance: Provenance,
}

/// Running argmax of `f_exp`; the empty set is the incumbent, later
/// candidates must be strictly better.
struct Tournament<'e, E: ?Sized> {
    eval: &'e E,
    best: SelectionResult,
}

impl<'e, E: Evaluator + ?Sized> Tournament<'e, E> {
    fn new(eval: &'e E) -> Self {
        Tournament {
            eval,
            best: SelectionResult {
                seeds: NodeSet::new(),
                objective_estimate: 0.0,
                total_cost: 0.0,
                provenance: Provenance::EmptySet,
            },
        }
    }

    fn offer(&mut self, seeds: NodeSet, provenance: Provenance) {
        let value = self.eval.expected_revenue(&seeds);
        if value > self.best.objective_estimate {
            self.best = SelectionResult {
                total_cost: self.eval.instance().set_cost(&seeds),
                seeds,
                objective_estimate: value,
                provenance,
            };
        }
    }

    fn finish(self) -> SelectionResult {
        self.best
    }
}

fn ratio(gain: f64, cost: f64) -> f64 {
    if gain == 0.0 {
        0.0
    } else {
        gain / cost
    }
}

/// Benefit-cost greedy on ground set `{e | c(e) <= x}` with utility `l(·, y)`.
///
/// Candidates with non-positive marginal gain are never added; the loop ends
/// when none remain or when the best-ratio candidate would push the cost
/// above `x`.
pub fn greedy<E: Evaluator + ?Sized>(eval: &E, x: f64, y: f64) -> NodeSet {
    let inst = eval.instance();
    assert!(x >= 0.0 && (0.0..=inst.budget()).contains(&y), "greedy({x}, {y})");
    let ground = inst.users_within_cost(x);
    let cap = inst.budget() - y;
    let mut chosen = NodeSet::new();
    loop {
        let mut best: Option<(NodeId, f64)> = None;
        for e in ground.iter().filter(|&e| !chosen.contains(e)) {
            let gain = eval.truncated_marginal(&chosen, e, cap);
            if gain <= 0.0 {
                continue;
            }
            let r = ratio(gain, inst.cost(e));
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((e, r));
            }
        }
        match best {
            Some((e, _)) if inst.set_cost(&chosen) + inst.cost(e) <= x => {
                chosen.insert(e);
            }
            _ => return chosen,
        }
    }
}

/// `v(x, y)`: the user in `{e | c(e) <= x}` maximizing `l({e}, y)`.
pub fn best_singleton<E: Evaluator + ?Sized>(eval: &E, x: f64, y: f64) -> Option<NodeId> {
    let inst = eval.instance();
    let mut best: Option<(NodeId, f64)> = None;
    for e in inst.users_within_cost(x).iter() {
        let v = eval.truncated_objective(&NodeSet::singleton(e), y);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((e, v));
        }
    }
    best.map(|(e, _)| e)
}

/// Selection when the cost of the optimal solution is known.
pub fn select_known_cost<E: Evaluator + ?Sized>(eval: &E, c_star: f64) -> SelectionResult {
    let mut t = Tournament::new(eval);
    t.offer(greedy(eval, c_star, c_star), Provenance::KnownCostGreedy);
    if let Some(e) = best_singleton(eval, c_star, c_star) {
        t.offer(NodeSet::singleton(e), Provenance::KnownCostSingleton);
    }
    t.finish()
}

/// Two-phase selection without knowledge of the optimal cost.
///
/// Phase 1 covers optima whose most expensive seed costs at most `B/2`;
/// phase 2 guesses that seed among the users with `B/2 < c(e) <= B`.
pub fn select<E: Evaluator + ?Sized>(eval: &E) -> SelectionResult {
    let inst = eval.instance();
    let half = inst.budget() / 2.0;
    let mut t = Tournament::new(eval);

    t.offer(greedy(eval, half, 0.0), Provenance::Phase1Greedy);
    if let Some(e) = best_singleton(eval, half, 0.0) {
        t.offer(NodeSet::singleton(e), Provenance::Phase1Singleton);
    }

    let large: Vec<NodeId> = (0..inst.node_count())
        .filter(|&e| inst.cost(e) > half && inst.cost(e) <= inst.budget())
        .collect();
    let phase2: Vec<(NodeId, NodeSet, Option<NodeId>)> = large
        .par_iter()
        .map(|&e| {
            let c = inst.cost(e);
            (e, greedy(eval, c, c), best_singleton(eval, c, c))
        })
        .collect();
    for (e, set, single) in phase2 {
        let pivot = inst.name(e).to_string();
        t.offer(set, Provenance::Phase2Greedy { pivot: pivot.clone() });
        if let Some(v) = single {
            t.offer(NodeSet::singleton(v), Provenance::Phase2Singleton { pivot });
        }
    }
    t.finish()
}

/// The single realization of a deterministic instance as an evaluator.
pub fn deterministic_scenario(instance: &Instance) -> Result<Scenarios<'_>, SelectionError> {
    let random = instance.random_edges().count();
    if random > 0 {
        return Err(SelectionError::NotDeterministic(random));
    }
    let live = Realization::from_fn(instance.edge_count(), |e| {
        instance.edge(e).probability == 1.0
    });
    Ok(Scenarios::new(instance, vec![live], vec![1.0], 1.0))
}

/// Users sorted by non-decreasing cost, ties by node order.
pub fn cost_order(instance: &Instance) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..instance.node_count()).collect();
    order.sort_by(|&a, &b| instance.cost(a).total_cmp(&instance.cost(b)).then(a.cmp(&b)));
    order
}

/// For every cheapest-`i` prefix, the chain `S_{i,1} ⊆ … ⊆ S_{i,i}` built by
/// unconstrained benefit-cost greedy on `g_exp`.
pub fn deterministic_chains<E: Evaluator + ?Sized>(eval: &E) -> Vec<Vec<NodeSet>> {
    let inst = eval.instance();
    let order = cost_order(inst);
    (1..=order.len())
        .map(|i| {
            let prefix: NodeSet = order[..i].iter().copied().collect();
            let mut chosen = NodeSet::new();
            let mut chain = Vec::with_capacity(i);
            for _ in 0..i {
                let mut best: Option<(NodeId, f64)> = None;
                for e in prefix.iter().filter(|&e| !chosen.contains(e)) {
                    let gain = eval.truncated_marginal(&chosen, e, f64::INFINITY);
                    let r = ratio(gain, inst.cost(e));
                    if best.is_none_or(|(_, b)| r > b) {
                        best = Some((e, r));
                    }
                }
                let (e, _) = best.expect("prefix has an unchosen user");
                chosen.insert(e);
                chain.push(chosen.clone());
            }
            chain
        })
        .collect()
}

/// Selection on an instance whose edge probabilities are all 0 or 1.
pub fn select_deterministic(instance: &Instance) -> Result<SelectionResult, SelectionError> {
    let eval = deterministic_scenario(instance)?;
    let mut t = Tournament::new(&eval);
    for (i, chain) in deterministic_chains(&eval).into_iter().enumerate() {
        for (k, set) in chain.into_iter().enumerate() {
            t.offer(
                set,
                Provenance::Deterministic {
                    prefix: i + 1,
                    picks: k + 1,
                },
            );
        }
    }
    let mut o: Option<(NodeId, f64)> = None;
    for e in 0..instance.node_count() {
        let v = eval.expected_revenue(&NodeSet::singleton(e));
        if o.is_none_or(|(_, b)| v > b) {
            o = Some((e, v));
        }
    }
    if let Some((e, _)) = o {
        t.offer(NodeSet::singleton(e), Provenance::SingletonO);
    }
    Ok(t.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate_realizations;
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

    fn names(inst: &Instance, s: &NodeSet) -> Vec<String> {
        inst.names_of(s)
    }

    #[test]
    fn greedy_on_empty_ground_set() {
        let inst = t1();
        let ex = enumerate_realizations(&inst).unwrap();
        assert!(greedy(&ex, 0.5, 0.0).is_empty());
        assert_eq!(best_singleton(&ex, 0.5, 0.0), None);
    }

    #[test]
    fn greedy_on_star_stops_at_zero_gain() {
        let inst = star();
        let ex = enumerate_realizations(&inst).unwrap();
        assert_eq!(names(&inst, &greedy(&ex, 5.0, 0.0)), ["s"]);
    }

    #[test]
    fn greedy_and_singleton_on_t1() {
        let inst = t1();
        let ex = enumerate_realizations(&inst).unwrap();
        assert_eq!(names(&inst, &greedy(&ex, 1.0, 0.0)), ["a"]);
        assert_eq!(best_singleton(&ex, 1.0, 0.0), Some(0));
    }

    #[test]
    fn singleton_ties_break_by_node_order() {
        let inst = Instance::new(
            [("x", 1.0), ("w", 1.0)],
            Vec::<(&str, &str, f64)>::new(),
            3.0,
            1.0,
        )
        .unwrap();
        let ex = enumerate_realizations(&inst).unwrap();
        assert_eq!(inst.name(best_singleton(&ex, 1.0, 0.0).unwrap()), "w");
    }

    #[test]
    fn known_cost_selection() {
        let inst = star();
        let ex = enumerate_realizations(&inst).unwrap();
        let r = select_known_cost(&ex, 2.0);
        assert_eq!(names(&inst, &r.seeds), ["s"]);
        assert_abs_diff_eq!(r.objective_estimate, 3.0);

        let r = select_known_cost(&ex, 0.0);
        assert!(r.seeds.is_empty());
        assert_eq!(r.provenance, Provenance::EmptySet);

        let t = t1();
        let ex = enumerate_realizations(&t).unwrap();
        let r = select_known_cost(&ex, 1.0);
        assert_eq!(names(&t, &r.seeds), ["a"]);
        assert_abs_diff_eq!(r.objective_estimate, 2.5);
    }

    #[test]
    fn select_examples() {
        let pricey = Instance::new([("a", 9.0), ("b", 7.0)], [("a", "b", 0.5)], 3.0, 1.0).unwrap();
        let ex = enumerate_realizations(&pricey).unwrap();
        let r = select(&ex);
        assert!(r.seeds.is_empty());
        assert_eq!(r.objective_estimate, 0.0);

        let inst = star();
        let ex = enumerate_realizations(&inst).unwrap();
        let r = select(&ex);
        assert_eq!(names(&inst, &r.seeds), ["s"]);
        assert_abs_diff_eq!(r.objective_estimate, 3.0);
        assert_eq!(r.provenance, Provenance::Phase1Greedy);
        assert_eq!(r.total_cost, 2.0);

        // c(u) = 0.75 B: only phase 2 can see u
        let lone = Instance::new([("u", 3.0)], Vec::<(&str, &str, f64)>::new(), 4.0, 1.0).unwrap();
        let ex = enumerate_realizations(&lone).unwrap();
        let r = select(&ex);
        assert_eq!(names(&lone, &r.seeds), ["u"]);
        assert_abs_diff_eq!(r.objective_estimate, 1.0);
        assert!(matches!(r.provenance, Provenance::Phase2Greedy { .. }));
    }

    #[test]
    fn deterministic_selection() {
        let r = select_deterministic(&star()).unwrap();
        assert_eq!(names(&star(), &r.seeds), ["s"]);
        assert_abs_diff_eq!(r.objective_estimate, 3.0);

        let lone = Instance::new([("v", 1.0)], Vec::<(&str, &str, f64)>::new(), 2.0, 1.0).unwrap();
        let r = select_deterministic(&lone).unwrap();
        assert_eq!(r.seeds, NodeSet::singleton(0));
        assert_abs_diff_eq!(r.objective_estimate, 1.0);

        let broke = Instance::new(
            [("a", 3.0), ("b", 4.0)],
            [("a", "b", 1.0)],
            2.0,
            1.0,
        )
        .unwrap();
        let r = select_deterministic(&broke).unwrap();
        assert!(r.seeds.is_empty());
        assert_eq!(r.objective_estimate, 0.0);

        assert_eq!(
            select_deterministic(&t1()).unwrap_err(),
            SelectionError::NotDeterministic(1)
        );
    }

    #[test]
    fn chains_are_nested() {
        let inst = star();
        let eval = deterministic_scenario(&inst).unwrap();
        let chains = deterministic_chains(&eval);
        assert_eq!(chains.len(), 4);
        for (i, chain) in chains.iter().enumerate() {
            assert_eq!(chain.len(), i + 1);
            for w in chain.windows(2) {
                assert!(w[0].is_subset(&w[1]));
            }
        }
        // the full prefix starts with the hub
        assert_eq!(names(&inst, &chains[3][0]), ["s"]);
    }
}
