use crate::error::PlanError;
use crate::eval::acceptance_with_mask;
use crate::miia::Arborescence;

use super::{check_tree, Algorithm, InvitationPlan};

/// Range-based greedy.
///
/// Each round invites the non-friend node with the highest acceptance
/// probability among those that already have a friend or invited child and
/// lie at most `budget - |R| - 1` hops from the target. Ties go to the
/// smaller node id. If the target is still uninvited when no candidate
/// remains, the last invitation goes to it.
pub fn plan_rg(tree: &Arborescence, budget: usize) -> Result<InvitationPlan, PlanError> {
    check_tree(tree, budget)?;
    let n = tree.len();
    let mut selected = vec![false; n];
    let mut ap = acceptance_with_mask(tree, &selected).values().to_vec();
    let mut count = 0;

    while count < budget {
        let range = budget - count - 1;
        let mut best: Option<(f64, u64, usize)> = None;
        for v in tree.non_friend_nodes() {
            if selected[v] || tree.node(v).depth > range {
                continue;
            }
            let mut reachable = false;
            let mut q = 1.0;
            for &c in tree.children(v) {
                let child = tree.node(c);
                if child.friend || selected[c] {
                    reachable = true;
                    q *= 1.0 - ap[c] * child.weight;
                }
            }
            if !reachable {
                continue;
            }
            let score = 1.0 - q;
            let id = tree.member_id(v).unwrap();
            let better = match best {
                None => true,
                Some((s, bid, _)) => score > s || (score == s && id < bid),
            };
            if better {
                best = Some((score, id, v));
            }
        }
        let Some((_, _, v)) = best else { break };
        selected[v] = true;
        count += 1;
        ap = acceptance_with_mask(tree, &selected).values().to_vec();
    }
    if !selected[tree.root()] {
        selected[tree.root()] = true;
    }
    Ok(InvitationPlan::from_mask(
        tree,
        &selected,
        Algorithm::Rg,
        budget,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miia::TreeBuilder;

    fn ids(plan: &InvitationPlan) -> Vec<u64> {
        plan.selected.iter().copied().collect()
    }

    fn chain() -> Arborescence {
        let mut b = TreeBuilder::new(3);
        b.member(2, 3, 0.1).friend(1, 2, 0.9);
        b.build().unwrap()
    }

    #[test]
    fn chain_budget_two() {
        let plan = plan_rg(&chain(), 2).unwrap();
        assert_eq!(ids(&plan), vec![2, 3]);
        assert!((plan.objective - 0.09).abs() < 1e-12);
    }

    #[test]
    fn chain_budget_one_only_target() {
        let plan = plan_rg(&chain(), 1).unwrap();
        assert_eq!(ids(&plan), vec![3]);
        assert_eq!(plan.objective, 0.0);
    }

    #[test]
    fn star_of_friends() {
        let mut b = TreeBuilder::new(0);
        b.friend(1, 0, 0.6).friend(2, 0, 0.5);
        let plan = plan_rg(&b.build().unwrap(), 1).unwrap();
        assert_eq!(ids(&plan), vec![0]);
        assert!((plan.objective - 0.8).abs() < 1e-12);
    }

    #[test]
    fn range_limit_skips_far_nodes() {
        // t <- x (0.1) <- friend ; t <- y <- w <- friend with strong links.
        // With budget 2 only nodes within 1 hop may be taken first.
        let mut b = TreeBuilder::new(0);
        b.member(10, 0, 0.1).friend(11, 10, 0.5);
        b.member(20, 0, 0.9)
            .member(21, 20, 0.9)
            .friend(22, 21, 0.99);
        let tree = b.build().unwrap();
        let plan = plan_rg(&tree, 2).unwrap();
        assert_eq!(ids(&plan), vec![0, 10]);
        assert!((plan.objective - 0.05).abs() < 1e-12);
        let plan = plan_rg(&tree, 3).unwrap();
        assert_eq!(ids(&plan), vec![0, 20, 21]);
    }

    #[test]
    fn ties_broken_by_id() {
        let mut b = TreeBuilder::new(0);
        b.member(5, 0, 0.5).friend(6, 5, 0.5);
        b.member(3, 0, 0.5).friend(4, 3, 0.5);
        let plan = plan_rg(&b.build().unwrap(), 2).unwrap();
        assert_eq!(ids(&plan), vec![0, 3]);
    }
}
