//! Acceptance evaluators: the analytic tree recurrences, a Monte-Carlo
//! simulator, exact live-edge enumeration on small general graphs, and the
//! four-user non-submodularity fixture.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{EvalError, GraphError};
use crate::graph::{FriendSet, GraphBuilder, NodeId, SocialGraph};
use crate::miia::Arborescence;

/// Invited users `R`. Friends of the initiator never belong here.
pub type SelectionSet = BTreeSet<NodeId>;

/// Maximum number of relevant edges [`exact_ic_acceptance`] will enumerate.
pub const ENUMERATION_EDGE_LIMIT: usize = 20;

/// Per-node probabilities over a tree, indexed like [`Arborescence::nodes`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityReport {
    ap: Vec<f64>,
    objective: f64,
}

impl ProbabilityReport {
    /// Probability at the root.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn at(&self, i: usize) -> f64 {
        self.ap[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.ap
    }

    pub fn get(&self, tree: &Arborescence, v: NodeId) -> Option<f64> {
        tree.index_of(v).map(|i| self.ap[i])
    }
}

/// Converts a selection into a per-node mask, rejecting friends and foreign ids.
pub fn selection_mask(
    tree: &Arborescence,
    selected: &SelectionSet,
) -> Result<Vec<bool>, EvalError> {
    let mut mask = vec![false; tree.len()];
    for &v in selected {
        let i = tree.index_of(v).ok_or(EvalError::NotInTree(v))?;
        if tree.is_friend(i) {
            return Err(EvalError::FriendSelected(v));
        }
        mask[i] = true;
    }
    Ok(mask)
}

/// Activation probability: every tree node relays influence.
pub fn activation_probability(tree: &Arborescence) -> ProbabilityReport {
    acceptance_with_mask(tree, &vec![true; tree.len()])
}

/// Acceptance probability when only the nodes in `selected` are invited.
pub fn acceptance_probability(
    tree: &Arborescence,
    selected: &SelectionSet,
) -> Result<ProbabilityReport, EvalError> {
    Ok(acceptance_with_mask(tree, &selection_mask(tree, selected)?))
}

/// Bottom-up evaluation; `selected[i]` is ignored for friend leaves.
///
/// Each node keeps the running miss probability `q = prod(1 - ap(u) * w)`
/// over its children in child order; the planners accumulate in exactly the
/// same order so their objectives reproduce this value bit for bit.
pub fn acceptance_with_mask(tree: &Arborescence, selected: &[bool]) -> ProbabilityReport {
    let mut ap = vec![0.0; tree.len()];
    for &i in tree.topo_order() {
        let node = tree.node(i);
        ap[i] = if node.friend {
            1.0
        } else if !selected[i] {
            0.0
        } else {
            let mut q = 1.0;
            for &c in &node.children {
                let child = tree.node(c);
                if child.friend || selected[c] {
                    q *= 1.0 - ap[c] * child.weight;
                }
            }
            1.0 - q
        };
    }
    let objective = ap[tree.root()];
    ProbabilityReport { ap, objective }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: u64,
    pub successes: u64,
}

const MC_STREAMS: u64 = 64;

/// Monte-Carlo estimate of the root's acceptance under `selected`.
///
/// Trials are split over a fixed number of ChaCha streams derived from
/// `seed`, so the result does not depend on the rayon pool size.
pub fn mc_estimate(tree: &Arborescence, selected: &[bool], trials: u64, seed: u64) -> McEstimate {
    let trials = trials.max(1);
    let successes: u64 = (0..MC_STREAMS)
        .into_par_iter()
        .map(|stream| {
            let share = trials / MC_STREAMS + u64::from(stream < trials % MC_STREAMS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let mut accepted = vec![false; tree.len()];
            let mut hits = 0;
            for _ in 0..share {
                for &i in tree.topo_order() {
                    let node = tree.node(i);
                    accepted[i] = node.friend
                        || (selected[i]
                            && node
                                .children
                                .iter()
                                .any(|&c| accepted[c] && rng.gen::<f64>() < tree.node(c).weight));
                }
                hits += u64::from(accepted[tree.root()]);
            }
            hits
        })
        .sum();
    let p = successes as f64 / trials as f64;
    McEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        trials,
        successes,
    }
}

fn check_nodes<'a>(
    graph: &SocialGraph,
    ids: impl IntoIterator<Item = &'a NodeId>,
) -> Result<(), EvalError> {
    for &v in ids {
        if !graph.contains(v) {
            return Err(GraphError::UnknownNode(v).into());
        }
    }
    Ok(())
}

/// Exact acceptance of `target` under the independent cascade on a general graph.
///
/// Only edges that can matter are enumerated: `u -> v` with `u` in `S ∪ R`
/// and `v` in `R \ S`. Each of the `2^m` live/blocked outcomes is weighted
/// by its probability and `target` counts as accepting when a live path
/// leads to it from a friend through invited users.
pub fn exact_ic_acceptance(
    graph: &SocialGraph,
    friends: &FriendSet,
    selected: &SelectionSet,
    target: NodeId,
) -> Result<f64, EvalError> {
    check_nodes(graph, selected.iter().chain(std::iter::once(&target)))?;
    if friends.contains(target) {
        return Ok(1.0);
    }
    if !selected.contains(&target) {
        return Ok(0.0);
    }
    let active = |v: NodeId| friends.contains(v) || selected.contains(&v);
    let mut local: HashMap<NodeId, usize> = HashMap::new();
    let mut sources = Vec::new();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let intern = |v: NodeId, local: &mut HashMap<NodeId, usize>| {
        let n = local.len();
        *local.entry(v).or_insert(n)
    };
    for &v in selected {
        let vi = intern(v, &mut local);
        let gv = graph.index_of(v).unwrap();
        for &(gu, w) in graph.in_edges(gv) {
            let u = graph.id_of(gu);
            if active(u) {
                let ui = intern(u, &mut local);
                edges.push((ui, vi, w));
            }
        }
    }
    if edges.len() > ENUMERATION_EDGE_LIMIT {
        return Err(EvalError::TooLarge {
            edges: edges.len(),
            limit: ENUMERATION_EDGE_LIMIT,
        });
    }
    for (&v, &i) in &local {
        if friends.contains(v) {
            sources.push(i);
        }
    }
    let t = local[&target];
    let n = local.len();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(u, _, _)) in edges.iter().enumerate() {
        out[u].push(e);
    }

    let m = edges.len();
    let mut total = 0.0;
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for world in 0u32..(1u32 << m) {
        let mut p = 1.0;
        for (e, &(_, _, w)) in edges.iter().enumerate() {
            p *= if world >> e & 1 == 1 { w } else { 1.0 - w };
        }
        if p == 0.0 {
            continue;
        }
        seen.iter_mut().for_each(|s| *s = false);
        queue.clear();
        for &s in &sources {
            seen[s] = true;
            queue.push_back(s);
        }
        while let Some(u) = queue.pop_front() {
            for &e in &out[u] {
                let v = edges[e].1;
                if world >> e & 1 == 1 && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        if seen[t] {
            total += p;
        }
    }
    Ok(total)
}

/// The tree recurrence applied to a general graph: every invited node
/// combines all of its invited or friend in-neighbours as if they were
/// independent. Requires the invited subgraph to be acyclic. On trees this
/// agrees with [`acceptance_probability`]; on graphs with shared ancestors
/// it ignores the correlation that [`exact_ic_acceptance`] accounts for.
pub fn independent_acceptance(
    graph: &SocialGraph,
    friends: &FriendSet,
    selected: &SelectionSet,
    target: NodeId,
) -> Result<f64, EvalError> {
    check_nodes(graph, selected.iter().chain(std::iter::once(&target)))?;
    if friends.contains(target) {
        return Ok(1.0);
    }
    if !selected.contains(&target) {
        return Ok(0.0);
    }
    let invited: Vec<NodeId> = selected
        .iter()
        .copied()
        .filter(|&v| !friends.contains(v))
        .collect();
    // Kahn's algorithm over edges between invited nodes.
    let mut indeg: HashMap<NodeId, usize> = invited.iter().map(|&v| (v, 0)).collect();
    for &v in &invited {
        for &(gu, _) in graph.in_edges(graph.index_of(v).unwrap()) {
            if indeg.contains_key(&graph.id_of(gu)) {
                *indeg.get_mut(&v).unwrap() += 1;
            }
        }
    }
    let mut ready: VecDeque<NodeId> = invited.iter().copied().filter(|v| indeg[v] == 0).collect();
    let mut ap: HashMap<NodeId, f64> = HashMap::new();
    while let Some(v) = ready.pop_front() {
        let gv = graph.index_of(v).unwrap();
        let mut q = 1.0;
        for &(gu, w) in graph.in_edges(gv) {
            let u = graph.id_of(gu);
            if friends.contains(u) {
                q *= 1.0 - w;
            } else if let Some(&a) = ap.get(&u) {
                q *= 1.0 - a * w;
            }
        }
        ap.insert(v, 1.0 - q);
        for &(gx, _) in graph.out_edges(gv) {
            let x = graph.id_of(gx);
            if let Some(d) = indeg.get_mut(&x) {
                *d -= 1;
                if *d == 0 {
                    ready.push_back(x);
                }
            }
        }
    }
    if let Some(&v) = invited.iter().find(|v| !ap.contains_key(v)) {
        return Err(EvalError::Cyclic(v));
    }
    Ok(ap[&target])
}

/// Node ids used by [`counterexample_graph`].
pub mod fixture {
    use crate::graph::NodeId;
    pub const A: NodeId = 1;
    pub const B: NodeId = 2;
    pub const C: NodeId = 3;
    pub const T: NodeId = 4;

    pub fn label(v: NodeId) -> &'static str {
        match v {
            A => "a",
            B => "b",
            C => "c",
            T => "t",
            _ => "?",
        }
    }
}

/// Four users: friend `a`, and `a -> b (0.9)`, `b -> t (0.1)`, `b -> c (1.0)`, `c -> t (1.0)`.
///
/// The initiator itself is not part of the graph; `a` stands in as the
/// sole member of the friend set.
pub fn counterexample_graph() -> (SocialGraph, FriendSet) {
    use fixture::*;
    let mut b = GraphBuilder::new();
    for (u, v, w) in [(A, B, 0.9), (B, T, 0.1), (B, C, 1.0), (C, T, 1.0)] {
        b.add_edge(u, v, w).expect("fixture is valid");
    }
    (b.build(), FriendSet::new(A, []))
}

/// Acceptance of `t` for `R_S = {t}` and `R_T = {b, t}`, each with and without `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularityReport {
    /// `[R_S, R_S + c, R_T, R_T + c]` under the independent recurrence.
    pub recurrence: [f64; 4],
    /// The same four sets under exact live-edge enumeration.
    pub exact: [f64; 4],
}

impl SubmodularityReport {
    pub fn gain_small(&self) -> f64 {
        self.recurrence[1] - self.recurrence[0]
    }

    pub fn gain_large(&self) -> f64 {
        self.recurrence[3] - self.recurrence[2]
    }

    pub fn exact_gain_small(&self) -> f64 {
        self.exact[1] - self.exact[0]
    }

    pub fn exact_gain_large(&self) -> f64 {
        self.exact[3] - self.exact[2]
    }

    /// Submodularity requires the gain at the smaller set to be at least the gain at the larger one.
    pub fn violates_submodularity(&self) -> bool {
        self.gain_small() < self.gain_large()
    }
}

fn short(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

impl fmt::Display for SubmodularityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["R_S = {t}", "R_S + {c}", "R_T = {b, t}", "R_T + {c}"];
        writeln!(
            f,
            "friend set S = {{a}}; edges a->b 0.9, b->t 0.1, b->c 1.0, c->t 1.0"
        )?;
        for (k, name) in names.iter().enumerate() {
            writeln!(
                f,
                "ap(t | {name}) = {} (exact live-edge: {})",
                short(self.recurrence[k]),
                short(self.exact[k])
            )?;
        }
        writeln!(f, "gain of c at R_S = {}", short(self.gain_small()))?;
        writeln!(f, "gain of c at R_T = {}", short(self.gain_large()))?;
        if self.violates_submodularity() {
            writeln!(
                f,
                "non-submodular: {} < {}",
                short(self.gain_small()),
                short(self.gain_large())
            )
        } else {
            writeln!(f, "submodular on this instance")
        }
    }
}

pub fn submodularity_counterexample() -> SubmodularityReport {
    use fixture::*;
    let (graph, friends) = counterexample_graph();
    let sets: [&[NodeId]; 4] = [&[T], &[T, C], &[B, T], &[B, T, C]];
    let mut recurrence = [0.0; 4];
    let mut exact = [0.0; 4];
    for (k, set) in sets.iter().enumerate() {
        let r: SelectionSet = set.iter().copied().collect();
        recurrence[k] =
            independent_acceptance(&graph, &friends, &r, T).expect("fixture is acyclic");
        exact[k] = exact_ic_acceptance(&graph, &friends, &r, T).expect("fixture is small");
    }
    SubmodularityReport { recurrence, exact }
}
