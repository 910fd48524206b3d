#![allow(dead_code)]

use std::collections::BTreeSet;

use apm_core::eval::acceptance_with_mask;
use apm_core::graph::{GraphBuilder, NodeId, SocialGraph};
use apm_core::miia::{Arborescence, TreeBuilder};
use rand::prelude::*;

/// Most children any node of [`random_tree`] gets.
pub const MAX_CHILDREN: usize = 5;

/// Random tree with `members` non-friend nodes (root included). Every
/// non-friend gets zero to two friend leaves, with at least one overall;
/// some nodes get a homophily leaf when `homophily` is set. No node has
/// more than [`MAX_CHILDREN`] children.
pub fn random_tree<R: Rng>(rng: &mut R, members: usize, homophily: bool) -> Arborescence {
    let members = members.max(1);
    // Shuffle ids so child order is not tied to insertion order.
    let mut ids: Vec<NodeId> = (0..members as NodeId).collect();
    ids[1..].shuffle(rng);
    let mut b = TreeBuilder::new(ids[0]);
    let mut next_friend = 1000;
    let mut friends = 0;
    let mut degree = vec![0usize; members];
    for i in 0..members {
        if i > 0 {
            let open: Vec<usize> = (0..i).filter(|&j| degree[j] < MAX_CHILDREN).collect();
            let p = *open.choose(rng).expect("the previous node always has room");
            degree[p] += 1;
            b.member(ids[i], ids[p], rng.gen_range(0.05..1.0));
        }
        let k = rng.gen_range(0..3);
        for _ in 0..k {
            b.friend(next_friend, ids[i], rng.gen_range(0.05..1.0));
            next_friend += 1;
            friends += 1;
            degree[i] += 1;
        }
        if homophily && rng.gen_bool(0.3) {
            b.homophily(ids[i], rng.gen_range(0.01..0.3));
            degree[i] += 1;
        }
    }
    if friends == 0 {
        let open: Vec<usize> = (0..members).filter(|&j| degree[j] < MAX_CHILDREN).collect();
        let v = ids[*open.choose(rng).expect("some node has room")];
        b.friend(next_friend, v, rng.gen_range(0.05..1.0));
    }
    b.build().expect("random tree is valid")
}

/// Best objective over every invited set of at most `budget` members that contains the target.
pub fn brute_force_best(tree: &Arborescence, budget: usize) -> f64 {
    let candidates: Vec<usize> = tree
        .non_friend_nodes()
        .filter(|&v| v != tree.root())
        .collect();
    let mut mask = vec![false; tree.len()];
    mask[tree.root()] = true;
    let mut best = acceptance_with_mask(tree, &mask).objective();
    fn rec(
        tree: &Arborescence,
        cand: &[usize],
        start: usize,
        left: usize,
        mask: &mut Vec<bool>,
        best: &mut f64,
    ) {
        for i in start..cand.len() {
            if left == 0 {
                return;
            }
            mask[cand[i]] = true;
            let v = acceptance_with_mask(tree, mask).objective();
            if v > *best {
                *best = v;
            }
            rec(tree, cand, i + 1, left - 1, mask, best);
            mask[cand[i]] = false;
        }
    }
    rec(
        tree,
        &candidates,
        0,
        budget.saturating_sub(1),
        &mut mask,
        &mut best,
    );
    best
}

/// Social graph whose edges are exactly the parent links of `tree`
/// (homophily leaves become edges from `initiator`). Returns the graph, the
/// friend ids and the member ids.
pub fn tree_as_graph(
    tree: &Arborescence,
    initiator: NodeId,
) -> (SocialGraph, BTreeSet<NodeId>, Vec<NodeId>) {
    let mut b = GraphBuilder::new();
    let mut friends = BTreeSet::new();
    let mut members = Vec::new();
    b.add_node(initiator);
    for i in 0..tree.len() {
        let node = tree.node(i);
        let Some(parent) = node.parent else {
            members.push(tree.target());
            continue;
        };
        let to = tree.member_id(parent).unwrap();
        match tree.member_id(i) {
            Some(id) => {
                b.add_edge(id, to, node.weight).unwrap();
                if node.friend {
                    friends.insert(id);
                } else {
                    members.push(id);
                }
            }
            None => b.add_edge(initiator, to, node.weight).unwrap(),
        }
    }
    (b.build(), friends, members)
}
