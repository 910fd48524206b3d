mod common;

use apm_core::eval::acceptance_probability;
use apm_core::planner::{plan_rg, plan_sita, plan_sitina, Algorithm};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{brute_force_best, random_tree};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn exact_planners_match_brute_force(seed in any::<u64>(), members in 1usize..12, budget in 1usize..7, h in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = random_tree(&mut rng, members, h);
        let best = brute_force_best(&tree, budget);
        let (a, _) = plan_sitina(&tree, budget).unwrap();
        let (b, _) = plan_sita(&tree, budget).unwrap();
        prop_assert!((a.objective - best).abs() < 1e-12, "sitina {} vs brute {}", a.objective, best);
        prop_assert!((b.objective - best).abs() < 1e-12, "sita {} vs brute {}", b.objective, best);
    }

    #[test]
    fn plans_are_feasible(seed in any::<u64>(), members in 1usize..25, budget in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = random_tree(&mut rng, members, true);
        for plan in [plan_rg(&tree, budget).unwrap(), plan_sitina(&tree, budget).unwrap().0] {
            prop_assert!(plan.selected.len() <= budget, "{} over budget", plan.algorithm);
            prop_assert!(plan.selected.contains(&tree.target()));
            prop_assert!((0.0..=1.0).contains(&plan.objective));
            let again = acceptance_probability(&tree, &plan.selected).unwrap().objective();
            prop_assert_eq!(again, plan.objective);
            let root = plan.nodes.iter().find(|n| n.node == tree.target()).unwrap();
            prop_assert_eq!(root.subtree_budget, plan.selected.len());
        }
    }

    #[test]
    fn sitina_dominates_greedy_and_is_monotone(seed in any::<u64>(), members in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = random_tree(&mut rng, members, false);
        let mut last = 0.0;
        for budget in 1..=10 {
            let opt = plan_sitina(&tree, budget).unwrap().0.objective;
            let greedy = plan_rg(&tree, budget).unwrap().objective;
            prop_assert!(opt + 1e-12 >= greedy, "r={budget}: {opt} < {greedy}");
            prop_assert!(opt + 1e-12 >= last, "r={budget}: {opt} < {last}");
            last = opt;
        }
    }

    #[test]
    fn deterministic_output(seed in any::<u64>(), budget in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = random_tree(&mut rng, 15, true);
        for alg in Algorithm::ALL {
            let a = apm_core::planner::run_planner(&tree, alg, budget);
            let b = apm_core::planner::run_planner(&tree, alg, budget);
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn sitina_table_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tree = random_tree(&mut rng, 20, false);
    let (_, tables) = plan_sitina(&tree, 6).unwrap();
    for v in tree.non_friend_nodes() {
        assert_eq!(tables.max_r(v), tree.z(v).min(6));
        assert_eq!(tables.f(v, 0), Some(0.0));
        for r in 0..=tables.max_r(v) {
            let f = tables.f(v, r).unwrap();
            assert!((0.0..=1.0).contains(&f));
        }
    }
}
