//! Exact planner that tries every split of a node's budget among its
//! children. Exponential in the in-degree; kept as a cross-check for
//! [`plan_sitina`](super::plan_sitina).

use crate::error::PlanError;
use crate::miia::Arborescence;

use super::{check_tree, Algorithm, InvitationPlan};

/// Upper bound on `sum_v (budget + 1)^d_v` accepted by [`plan_sita`].
pub const SITA_STATE_LIMIT: f64 = 1e7;

#[derive(Debug, Clone)]
pub struct SitaTables {
    budget: usize,
    /// Miss probability `1 - f[v][r]`.
    f_miss: Vec<Vec<f64>>,
    /// Winning split for `(v, r)`, one entry per child.
    choice: Vec<Vec<Vec<u32>>>,
}

impl SitaTables {
    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn max_r(&self, v: usize) -> usize {
        self.f_miss[v].len() - 1
    }

    pub fn f(&self, v: usize, r: usize) -> Option<f64> {
        self.f_miss[v].get(r).map(|q| 1.0 - q)
    }

    pub fn choice(&self, v: usize, r: usize) -> Option<&[u32]> {
        self.choice[v].get(r).map(|c| c.as_slice())
    }
}

fn child_caps(tree: &Arborescence, v: usize, budget: usize) -> Vec<usize> {
    tree.children(v)
        .iter()
        .map(|&c| tree.z(c).min(budget))
        .collect()
}

/// Calls `visit(split, sum)` for every vector in `prod [0, caps_i]`, in lexicographic order.
fn for_each_split(caps: &[usize], mut visit: impl FnMut(&[usize], usize)) {
    let mut split = vec![0usize; caps.len()];
    let mut sum = 0;
    loop {
        visit(&split, sum);
        let mut k = caps.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if split[k] < caps[k] {
                split[k] += 1;
                sum += 1;
                break;
            }
            sum -= split[k];
            split[k] = 0;
        }
    }
}

fn split_miss(tree: &Arborescence, f_miss: &[Vec<f64>], v: usize, split: &[usize]) -> f64 {
    let mut q = 1.0;
    for (&c, &r) in tree.children(v).iter().zip(split) {
        q *= 1.0 - (1.0 - f_miss[c][r]) * tree.node(c).weight;
    }
    q
}

pub fn sita_tables(tree: &Arborescence, budget: usize) -> Result<SitaTables, PlanError> {
    let states: f64 = (0..tree.len())
        .filter(|&v| !tree.is_friend(v))
        .map(|v| ((budget + 1) as f64).powi(tree.in_degree(v) as i32))
        .sum();
    if states > SITA_STATE_LIMIT {
        return Err(PlanError::EnumerationGuard {
            states,
            limit: SITA_STATE_LIMIT,
        });
    }
    let n = tree.len();
    let mut f_miss: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut choice: Vec<Vec<Vec<u32>>> = vec![Vec::new(); n];
    for &v in tree.topo_order() {
        if tree.is_friend(v) {
            f_miss[v] = vec![0.0];
            choice[v] = vec![Vec::new()];
            continue;
        }
        let max_r = tree.z(v).min(budget);
        let caps = child_caps(tree, v, budget);
        let mut best = vec![f64::INFINITY; max_r + 1];
        let mut arg: Vec<Vec<u32>> = vec![vec![0; caps.len()]; max_r + 1];
        best[0] = 1.0;
        for_each_split(&caps, |split, sum| {
            let r = sum + 1;
            if r > max_r {
                return;
            }
            let q = split_miss(tree, &f_miss, v, split);
            if q < best[r] {
                best[r] = q;
                arg[r] = split.iter().map(|&x| x as u32).collect();
            }
        });
        f_miss[v] = best;
        choice[v] = arg;
    }
    Ok(SitaTables {
        budget,
        f_miss,
        choice,
    })
}

/// Every split of `r - 1` invitations among the children of `v` and its
/// acceptance probability, in lexicographic order of the split.
pub fn allocation_values(
    tree: &Arborescence,
    tables: &SitaTables,
    v: usize,
    r: usize,
) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    if r == 0 || tree.is_friend(v) {
        return out;
    }
    let caps = child_caps(tree, v, tables.budget);
    for_each_split(&caps, |split, sum| {
        if sum + 1 == r {
            out.push((
                split.to_vec(),
                1.0 - split_miss(tree, &tables.f_miss, v, split),
            ));
        }
    });
    out
}

fn sita_backtrack(tables: &SitaTables, tree: &Arborescence) -> Vec<bool> {
    let mut selected = vec![false; tree.len()];
    let mut stack = vec![(tree.root(), tables.max_r(tree.root()))];
    while let Some((v, r)) = stack.pop() {
        if r == 0 {
            continue;
        }
        selected[v] = true;
        let split = &tables.choice[v][r];
        for (&c, &rc) in tree.children(v).iter().zip(split) {
            stack.push((c, rc as usize));
        }
    }
    selected
}

pub fn plan_sita(
    tree: &Arborescence,
    budget: usize,
) -> Result<(InvitationPlan, SitaTables), PlanError> {
    check_tree(tree, budget)?;
    let tables = sita_tables(tree, budget)?;
    let selected = sita_backtrack(&tables, tree);
    let plan = InvitationPlan::from_mask(tree, &selected, Algorithm::Sita, budget);
    Ok((plan, tables))
}
