use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use seedsel::cascade::{engagements, is_consistent, observe, sample_realization};
use seedsel::estimator::build_pool;
use seedsel::network::{generate_random_instance, RandomInstanceSpec};
use seedsel::nonadaptive::{greedy, select};
use seedsel::oracle::{
    check_submodularity, enumerate_realizations, optimal_adaptive, optimal_nonadaptive,
};
use seedsel::{load_instance, Evaluator, Instance, NodeSet};

fn instance(max_nodes: usize, max_edges: usize) -> impl Strategy<Value = Instance> {
    (1..=max_nodes, 0..=max_edges, 3u32..=10, any::<u64>(), 0.0..=1.0f64).prop_map(
        move |(n, m, b, seed, lo)| {
            let m = m.min(n * (n - 1));
            let spec = RandomInstanceSpec::new(n, m, b as f64, seed).probabilities(lo * 0.5, 1.0);
            generate_random_instance(&spec).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip(inst in instance(8, 12)) {
        let back = load_instance(&inst.to_text()).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn affordable_users_grow_with_the_threshold(inst in instance(8, 12), x in 0.0..12.0f64, dx in 0.0..5.0f64) {
        prop_assert!(inst.users_within_cost(x).is_subset(&inst.users_within_cost(x + dx)));
    }

    #[test]
    fn pool_objective_is_submodular(inst in instance(5, 8), seed in any::<u64>(), zf in 0.0..=1.0f64) {
        let pool = build_pool(&inst, 64, seed).unwrap();
        let z = zf * inst.budget();
        let v = check_submodularity(inst.node_count(), |s| pool.truncated_objective(s, z)).unwrap();
        prop_assert!(v.is_empty(), "{:?}", v.first());
    }

    #[test]
    fn observation_is_consistent_with_its_world(inst in instance(8, 12), seed in any::<u64>(), mask in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = sample_realization(&inst, &mut rng);
        let seeds = NodeSet::from_mask(mask & ((1u64 << inst.node_count()) - 1));
        let psi = observe(&inst, &seeds, &phi).unwrap();
        prop_assert!(is_consistent(&phi, &psi));
        prop_assert_eq!(psi.engaged(&inst).len(), engagements(&inst, &seeds, &phi).unwrap());
        let smaller = NodeSet::from_mask(seeds.to_mask() & mask.rotate_left(7));
        let earlier = observe(&inst, &smaller, &phi).unwrap();
        prop_assert!(earlier.is_subrealization_of(&psi));
    }

    #[test]
    fn greedy_respects_its_cost_limit(inst in instance(8, 11), xf in 0.0..=1.0f64, yf in 0.0..=1.0f64) {
        let dist = enumerate_realizations(&inst).unwrap();
        let b = inst.budget();
        let chosen = greedy(&dist, xf * b, yf * b);
        prop_assert!(inst.set_cost(&chosen) <= xf * b);
        let s = select(&dist);
        prop_assert!(s.total_cost <= b);
        prop_assert!(s.objective_estimate >= 0.0);
    }

    #[test]
    fn adaptivity_never_hurts(inst in instance(4, 4)) {
        let (_, fixed) = optimal_nonadaptive(&inst).unwrap();
        let adaptive = optimal_adaptive(&inst).unwrap();
        prop_assert!(adaptive >= fixed - 1e-9, "{} < {}", adaptive, fixed);
    }
}
