use apm_core::eval::{acceptance_probability, submodularity_counterexample};
use apm_core::miia::{Arborescence, TreeBuilder};
use apm_core::planner::{allocation_values, plan_sita, plan_sitina};

const U17: u64 = 17;

/// Subtree rooted at u17 with children u18, u20, u24 (friend leaves use ids >= 100).
fn u17_tree() -> Arborescence {
    let mut b = TreeBuilder::new(U17);
    b.member(18, U17, 0.7).friend(100, 18, 0.45);
    b.member(20, U17, 0.8)
        .member(21, 20, 0.92)
        .friend(101, 21, 0.67);
    b.member(24, U17, 0.8).friend(102, 24, 0.4);
    b.member(25, 24, 0.9).friend(103, 25, 0.45);
    b.member(26, 24, 0.4).friend(104, 26, 0.52);
    b.build().unwrap()
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

#[test]
fn m_table_for_u17() {
    let tree = u17_tree();
    let (_, tables) = plan_sitina(&tree, 7).unwrap();
    let v = tree.root();
    let expected: [&[f64]; 3] = [
        &[0.315],
        &[0.315, 0.4931, 0.6528],
        &[0.32, 0.5342, 0.6674, 0.7639, 0.8314, 0.8520],
    ];
    for (k, row) in expected.iter().enumerate() {
        for (i, &want) in row.iter().enumerate() {
            let got = tables.m(v, k + 1, i + 1).unwrap();
            assert_eq!(round4(got), want, "m[{}][{}]", k + 1, i + 1);
        }
        assert_eq!(tables.m(v, k + 1, row.len() + 1), None);
        assert_eq!(tables.m(v, k + 1, 0), Some(0.0));
    }
    assert_eq!(round4(tables.f(v, 5).unwrap()), 0.7639);
}

#[test]
fn exhaustive_allocations_for_u17() {
    let tree = u17_tree();
    let (_, tables) = plan_sita(&tree, 7).unwrap();
    let allocs = allocation_values(&tree, &tables, tree.root(), 5);
    let splits: Vec<Vec<usize>> = allocs.iter().map(|(s, _)| s.clone()).collect();
    assert_eq!(
        splits,
        vec![
            vec![0, 1, 3],
            vec![0, 2, 2],
            vec![1, 0, 3],
            vec![1, 1, 2],
            vec![1, 2, 1]
        ]
    );
    let values: Vec<f64> = allocs.iter().map(|&(_, p)| round4(p)).collect();
    assert_eq!(values, vec![0.5738, 0.7539, 0.7081, 0.6674, 0.7639]);
    assert_eq!(round4(tables.f(tree.root(), 5).unwrap()), 0.7639);
}

#[test]
fn both_planners_agree_on_u17() {
    let tree = u17_tree();
    for r in 1..=7 {
        let (a, ta) = plan_sita(&tree, r).unwrap();
        let (b, tb) = plan_sitina(&tree, r).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-12, "r = {r}");
        for x in 0..=r.min(tree.z(tree.root())) {
            let (fa, fb) = (ta.f(tree.root(), x).unwrap(), tb.f(tree.root(), x).unwrap());
            assert!((fa - fb).abs() < 1e-12, "f[{x}] {fa} vs {fb}");
        }
        assert_eq!(
            acceptance_probability(&tree, &b.selected)
                .unwrap()
                .objective(),
            b.objective
        );
    }
}

#[test]
fn counterexample_values() {
    let rep = submodularity_counterexample();
    let want = [0.0, 0.0, 0.09, 0.909];
    for (got, want) in rep.recurrence.iter().zip(want) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    assert!((rep.gain_large() - 0.819).abs() < 1e-12);
    assert_eq!(rep.gain_small(), 0.0);
    assert!(rep.violates_submodularity());
    assert!(rep.to_string().contains("non-submodular: 0 < 0.819"));
}
