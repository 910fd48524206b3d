mod common;

use std::collections::BTreeSet;

use apm_core::eval::{
    acceptance_probability, exact_ic_acceptance, independent_acceptance, mc_estimate,
    selection_mask,
};
use apm_core::graph::{FriendSet, HomophilyModel};
use apm_core::miia::build_miia;
use apm_core::planner::{plan_sitina, PlanRequest};
use apm_core::EvalError;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use common::{random_tree, tree_as_graph};

#[test]
fn exact_enumeration_matches_tree_recurrence() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 30 {
        let members = rng.gen_range(1..8);
        let tree = random_tree(&mut rng, members, true);
        if tree.len() - 1 > 20 {
            continue;
        }
        let (graph, friends, members) = tree_as_graph(&tree, 9999);
        let fs = FriendSet::new(9999, friends.iter().copied());
        let mut r: BTreeSet<u64> = members
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.6))
            .collect();
        r.insert(tree.target());
        let exact = exact_ic_acceptance(&graph, &fs, &r, tree.target()).unwrap();
        let analytic = acceptance_probability(&tree, &r).unwrap().objective();
        assert!((exact - analytic).abs() < 1e-12, "{exact} vs {analytic}");
        let indep = independent_acceptance(&graph, &fs, &r, tree.target()).unwrap();
        assert!((indep - analytic).abs() < 1e-12);
        checked += 1;
    }
}

#[test]
fn miia_of_tree_graph_is_the_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let tree = random_tree(&mut rng, 10, false);
        let (graph, friends, _) = tree_as_graph(&tree, 9999);
        let req = PlanRequest::new(9999, tree.target(), FriendSet::new(9999, friends), 4);
        let rebuilt = build_miia(&graph, &req, &HomophilyModel::Absent).unwrap();
        let a = plan_sitina(&tree, 4).unwrap().0;
        let b = plan_sitina(&rebuilt, 4).unwrap().0;
        assert_eq!(a.objective, b.objective);
    }
}

#[test]
fn monte_carlo_within_four_standard_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for i in 0..10 {
        let tree = random_tree(&mut rng, 12, true);
        let plan = plan_sitina(&tree, 5).unwrap().0;
        let mask = selection_mask(&tree, &plan.selected).unwrap();
        let mc = mc_estimate(&tree, &mask, 20_000, i);
        let tol = 4.0 * mc.std_error.max(1e-9);
        assert!(
            (mc.estimate - plan.objective).abs() <= tol,
            "{} vs {} (se {})",
            mc.estimate,
            plan.objective,
            mc.std_error
        );
        assert_eq!(mc_estimate(&tree, &mask, 20_000, i), mc);
    }
}

#[test]
fn enumeration_guard() {
    let mut text = String::new();
    for i in 1..=22 {
        text.push_str(&format!("{} 0 0.5\n", 100 + i));
    }
    let g = apm_core::graph::load_edge_list_str(&text).unwrap();
    let fs = FriendSet::new(101, (102..=122).collect::<Vec<_>>());
    let r: BTreeSet<u64> = [0].into();
    assert!(matches!(
        exact_ic_acceptance(&g, &fs, &r, 0),
        Err(EvalError::TooLarge { edges: 22, .. })
    ));
}
