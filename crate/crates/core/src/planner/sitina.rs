//! Exact planner folding a node's children in one at a time.
//!
//! For node `v` with children `u_1..u_d`, `m[v][k][x]` is the best
//! acceptance at `v` when `x` invitations go to the subtrees of the first
//! `k` children, and `f[v][r] = m[v][d][r - 1]`. Row `k = 0` is zero for
//! every `x`. Rows `k >= 1` stop at `min(z_{u_1} + .. + z_{u_k}, budget - 1)`.
//!
//! Everything is stored as miss probability `1 - p` so the products match
//! [`acceptance_with_mask`](crate::eval::acceptance_with_mask) exactly.

use crate::error::PlanError;
use crate::miia::Arborescence;

use super::{check_tree, Algorithm, InvitationPlan};

#[derive(Debug, Clone)]
pub struct DpTables {
    budget: usize,
    f_start: Vec<usize>,
    f_miss: Vec<f64>,
    /// First row id of each node; a node with `d` children owns `d + 1` rows.
    node_rows: Vec<usize>,
    row_start: Vec<usize>,
    m_miss: Vec<f64>,
    choice: Vec<u32>,
}

impl DpTables {
    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Largest `r` with an entry for node `v`, i.e. `min(z_v, budget)`.
    pub fn max_r(&self, v: usize) -> usize {
        self.f_start[v + 1] - self.f_start[v] - 1
    }

    pub fn f(&self, v: usize, r: usize) -> Option<f64> {
        (r <= self.max_r(v)).then(|| 1.0 - self.f_miss[self.f_start[v] + r])
    }

    fn row(&self, v: usize, k: usize) -> Option<std::ops::Range<usize>> {
        let first = self.node_rows[v];
        let id = first + k;
        (id < self.node_rows[v + 1]).then(|| self.row_start[id]..self.row_start[id + 1])
    }

    /// `m[v][k][x]`; `None` where `x` exceeds the row (the `*` cells).
    pub fn m(&self, v: usize, k: usize, x: usize) -> Option<f64> {
        let row = self.row(v, k)?;
        (x < row.len()).then(|| 1.0 - self.m_miss[row.start + x])
    }

    /// Invitations given to the `k`-th child when `x` go to the first `k`.
    pub fn choice(&self, v: usize, k: usize, x: usize) -> Option<usize> {
        if k == 0 {
            return None;
        }
        let row = self.row(v, k)?;
        (x < row.len()).then(|| self.choice[row.start + x] as usize)
    }

    fn f_miss_row(&self, v: usize) -> &[f64] {
        &self.f_miss[self.f_start[v]..self.f_start[v + 1]]
    }
}

/// Fills the tables bottom-up. Friend leaves get `f = [1]`.
pub fn sitina_tables(tree: &Arborescence, budget: usize) -> DpTables {
    let nodes = tree.nodes();
    let n = nodes.len();
    // Lay out storage in index order so offsets are known up front.
    let mut f_start = Vec::with_capacity(n + 1);
    let mut node_rows = Vec::with_capacity(n + 1);
    let mut row_start = Vec::with_capacity(2 * n + 1);
    f_start.push(0);
    node_rows.push(0);
    row_start.push(0);
    let (mut f_end, mut rows, mut end) = (0, 0, 0);
    for node in nodes {
        f_end += node.z.min(budget) + 1;
        f_start.push(f_end);
        if !node.friend {
            rows += node.children.len() + 1;
            end += (node.z - 1).min(budget - 1) + 1;
            row_start.push(end);
            let mut cum = 0;
            for &c in &node.children {
                cum += nodes[c].z;
                end += cum.min(budget - 1) + 1;
                row_start.push(end);
            }
        }
        node_rows.push(rows);
    }
    let mut tables = DpTables {
        budget,
        f_start,
        f_miss: vec![1.0; f_end],
        node_rows,
        row_start,
        m_miss: vec![1.0; end],
        choice: vec![0; end],
    };

    for &v in tree.topo_order() {
        let node = &nodes[v];
        let fv = tables.f_start[v];
        if node.friend {
            tables.f_miss[fv] = 0.0;
            continue;
        }
        let base = tables.node_rows[v];
        for (k, &u) in node.children.iter().enumerate() {
            let w = nodes[u].weight;
            let prev_at = tables.row_start[base + k];
            let cur_at = tables.row_start[base + k + 1];
            let cur_len = tables.row_start[base + k + 2] - cur_at;
            let (head, tail) = tables.m_miss.split_at_mut(cur_at);
            let prev = &head[prev_at..];
            let cur = &mut tail[..cur_len];
            let choice = &mut tables.choice[cur_at..cur_at + cur_len];
            let fu = &tables.f_miss[tables.f_start[u]..tables.f_start[u + 1]];
            if fu.len() == 1 {
                // Leaf child: nothing to split, only its fixed contribution.
                let keep = 1.0 - (1.0 - fu[0]) * w;
                for ((c, &p), ch) in cur.iter_mut().zip(prev).zip(choice.iter_mut()) {
                    *c = p * keep;
                    *ch = 0;
                }
                continue;
            }
            let prev_cap = prev.len() - 1;
            for x in 0..cur_len {
                let lo = x.saturating_sub(prev_cap);
                let hi = (fu.len() - 1).min(x);
                let mut best = f64::INFINITY;
                let mut arg = lo;
                for xp in lo..=hi {
                    let cand = prev[x - xp] * (1.0 - (1.0 - fu[xp]) * w);
                    if cand < best {
                        best = cand;
                        arg = xp;
                    }
                }
                cur[x] = best;
                choice[x] = arg as u32;
            }
        }
        let row = tables.row_start[base + node.children.len()];
        let len = tables.f_start[v + 1] - fv;
        tables.f_miss[fv + 1..fv + len].copy_from_slice(&tables.m_miss[row..row + len - 1]);
    }
    tables
}

/// Recovers the invited set from the recorded choices, starting from
/// `(target, min(budget, z_t))`. Invitations a node leaves unassigned after
/// its first child stay unspent.
pub fn backtrack(tables: &DpTables, tree: &Arborescence) -> Vec<bool> {
    let mut selected = vec![false; tree.len()];
    let root = tree.root();
    let mut stack = vec![(root, tables.max_r(root))];
    while let Some((v, r)) = stack.pop() {
        if r == 0 {
            continue;
        }
        assert!(!tree.is_friend(v), "budget allocated to a friend leaf");
        assert!(r <= tables.max_r(v), "allocation beyond subtree capacity");
        selected[v] = true;
        let mut x = r - 1;
        for k in (1..=tree.in_degree(v)).rev() {
            let xp = tables
                .choice(v, k, x)
                .expect("choice recorded for every cell");
            assert!(xp <= x, "inconsistent choice table");
            if xp > 0 {
                stack.push((tree.children(v)[k - 1], xp));
            }
            x -= xp;
        }
    }
    selected
}

pub fn plan_sitina(
    tree: &Arborescence,
    budget: usize,
) -> Result<(InvitationPlan, DpTables), PlanError> {
    check_tree(tree, budget)?;
    let tables = sitina_tables(tree, budget);
    let selected = backtrack(&tables, tree);
    let plan = InvitationPlan::from_mask(tree, &selected, Algorithm::Sitina, budget);
    debug_assert_eq!(
        Some(plan.objective),
        tables.f(tree.root(), tables.max_r(tree.root())),
        "backtracked plan disagrees with the table"
    );
    Ok((plan, tables))
}

impl DpTables {
    /// Objective `f[t][min(budget, z_t)]`.
    pub fn objective(&self, tree: &Arborescence) -> f64 {
        let t = tree.root();
        let miss = self.f_miss_row(t);
        1.0 - miss[miss.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::activation_probability;
    use crate::miia::TreeBuilder;

    #[test]
    fn single_friend_child() {
        let mut b = TreeBuilder::new(4);
        b.friend(5, 4, 0.75);
        let tree = b.build().unwrap();
        let (plan, tables) = plan_sitina(&tree, 1).unwrap();
        assert_eq!(tables.f(tree.root(), 0), Some(0.0));
        assert!((tables.f(tree.root(), 1).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(tables.f(tree.root(), 2), None);
        assert_eq!(plan.objective, tables.objective(&tree));
    }

    #[test]
    fn friend_and_relay_child() {
        let mut b = TreeBuilder::new(6);
        b.friend(7, 6, 0.8).member(8, 6, 0.7).friend(9, 8, 0.95);
        let tree = b.build().unwrap();
        let (_, tables) = plan_sitina(&tree, 2).unwrap();
        let u8 = tree.index_of(8).unwrap();
        assert!((tables.f(u8, 1).unwrap() - 0.95).abs() < 1e-12);
        assert!((tables.f(tree.root(), 1).unwrap() - 0.8).abs() < 1e-12);
        assert!((tables.f(tree.root(), 2).unwrap() - 0.933).abs() < 1e-12);
    }

    #[test]
    fn chain_backtrack() {
        let mut b = TreeBuilder::new(3);
        b.member(2, 3, 0.1).friend(1, 2, 0.9);
        let tree = b.build().unwrap();
        let (plan, _) = plan_sitina(&tree, 2).unwrap();
        assert_eq!(
            plan.selected.iter().copied().collect::<Vec<_>>(),
            vec![2, 3]
        );
        let (plan, _) = plan_sitina(&tree, 1).unwrap();
        assert_eq!(plan.selected.iter().copied().collect::<Vec<_>>(), vec![3]);
        assert_eq!(plan.objective, 0.0);
    }

    #[test]
    fn full_budget_matches_activation() {
        let mut b = TreeBuilder::new(0);
        b.member(1, 0, 0.6)
            .member(2, 0, 0.3)
            .friend(3, 1, 0.9)
            .member(4, 1, 0.5)
            .friend(5, 4, 0.7);
        b.friend(6, 2, 0.2).homophily(0, 0.05).homophily(4, 0.1);
        let tree = b.build().unwrap();
        let (plan, _) = plan_sitina(&tree, tree.z(tree.root()) + 3).unwrap();
        assert_eq!(plan.selected.len(), tree.z(tree.root()));
        assert_eq!(plan.objective, activation_probability(&tree).objective());
    }

    #[test]
    fn star_cells() {
        let mut b = TreeBuilder::new(0);
        b.member(1, 0, 0.5)
            .friend(2, 1, 0.5)
            .member(3, 0, 0.5)
            .member(4, 3, 0.5)
            .friend(5, 4, 0.5);
        let tree = b.build().unwrap();
        let (_, tables) = plan_sitina(&tree, 10).unwrap();
        let t = tree.root();
        assert_eq!(tables.m(t, 1, 1).map(|_| ()), Some(()));
        assert_eq!(tables.m(t, 1, 2), None);
        assert!(tables.m(t, 2, 3).is_some());
        assert_eq!(tables.m(t, 3, 0), None);
        assert_eq!(tables.m(t, 0, 3), Some(0.0));
    }
}
