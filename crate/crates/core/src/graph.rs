//! Directed social graph with influence weights, plus the friend-set and
//! homophily inputs that accompany a planning request.
//!
//! External node ids are arbitrary `u64`s. Internally nodes are renumbered
//! densely in order of first appearance; the dense index never leaks through
//! the public API except via [`SocialGraph::index_of`] / [`SocialGraph::id_of`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::io::{BufRead, Write};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::GraphError;

pub type NodeId = u64;

#[derive(Debug, Clone, Default)]
pub struct SocialGraph {
    ids: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    out_adj: Vec<Vec<(usize, f64)>>,
    in_adj: Vec<Vec<(usize, f64)>>,
    /// Dense indices sorted by external id.
    by_id: Vec<usize>,
    edge_count: usize,
}

impl SocialGraph {
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.index.contains_key(&v)
    }

    pub fn index_of(&self, v: NodeId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn id_of(&self, idx: usize) -> NodeId {
        self.ids[idx]
    }

    /// External ids in dense-index order.
    pub fn node_ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let (ui, vi) = (self.index_of(u)?, self.index_of(v)?);
        self.out_adj[ui]
            .iter()
            .find(|&&(x, _)| x == vi)
            .map(|&(_, w)| w)
    }

    /// Out-neighbours of dense node `idx` as `(dense index, weight)`, sorted by external id.
    pub fn out_edges(&self, idx: usize) -> &[(usize, f64)] {
        &self.out_adj[idx]
    }

    /// In-neighbours of dense node `idx` as `(dense index, weight)`, sorted by external id.
    pub fn in_edges(&self, idx: usize) -> &[(usize, f64)] {
        &self.in_adj[idx]
    }

    pub fn out_neighbors(&self, v: NodeId) -> Vec<NodeId> {
        match self.index_of(v) {
            Some(i) => self.out_adj[i].iter().map(|&(j, _)| self.ids[j]).collect(),
            None => Vec::new(),
        }
    }

    /// Every edge as `(u, v, w)`, sorted by `u` then `v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.by_id.iter().flat_map(move |&u| {
            self.out_adj[u]
                .iter()
                .map(move |&(v, w)| (self.ids[u], self.ids[v], w))
        })
    }

    /// Checks the adjacency indexes against each other. Used by tests.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut forward = HashSet::new();
        let mut count = 0;
        for (u, adj) in self.out_adj.iter().enumerate() {
            for &(v, w) in adj {
                if u == v {
                    return Err(format!("self-loop on {}", self.ids[u]));
                }
                if !(0.0..=1.0).contains(&w) {
                    return Err(format!("weight {w} out of range"));
                }
                if !forward.insert((u, v)) {
                    return Err(format!("duplicate edge {} -> {}", self.ids[u], self.ids[v]));
                }
                count += 1;
            }
        }
        let mut backward = HashSet::new();
        for (v, adj) in self.in_adj.iter().enumerate() {
            for &(u, w) in adj {
                backward.insert((u, v));
                if self.out_adj[u].iter().find(|&&(x, _)| x == v).map(|e| e.1) != Some(w) {
                    return Err(format!(
                        "in-index edge {} -> {} missing",
                        self.ids[u], self.ids[v]
                    ));
                }
            }
        }
        if forward != backward || count != self.edge_count {
            return Err("in/out indexes disagree".into());
        }
        Ok(())
    }
}

/// Incremental constructor enforcing the graph invariants.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    graph: SocialGraph,
    seen: HashSet<(usize, usize)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, v: NodeId) -> usize {
        if let Some(&i) = self.graph.index.get(&v) {
            return i;
        }
        let i = self.graph.ids.len();
        self.graph.ids.push(v);
        self.graph.index.insert(v, i);
        self.graph.out_adj.push(Vec::new());
        self.graph.in_adj.push(Vec::new());
        i
    }

    /// Adds `u -> v` with weight `w`. `line` is only used for error reporting.
    pub fn add_edge_at(
        &mut self,
        u: NodeId,
        v: NodeId,
        w: f64,
        line: usize,
    ) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop { line, node: u });
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(GraphError::WeightOutOfRange {
                line,
                u,
                v,
                weight: w,
            });
        }
        let (ui, vi) = (self.add_node(u), self.add_node(v));
        if !self.seen.insert((ui, vi)) {
            return Err(GraphError::DuplicateEdge { line, u, v });
        }
        self.graph.out_adj[ui].push((vi, w));
        self.graph.in_adj[vi].push((ui, w));
        self.graph.edge_count += 1;
        Ok(())
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId, w: f64) -> Result<(), GraphError> {
        self.add_edge_at(u, v, w, 0)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        match (self.graph.index.get(&u), self.graph.index.get(&v)) {
            (Some(&a), Some(&b)) => self.seen.contains(&(a, b)),
            _ => false,
        }
    }

    pub fn build(mut self) -> SocialGraph {
        let ids = self.graph.ids.clone();
        for adj in self
            .graph
            .out_adj
            .iter_mut()
            .chain(self.graph.in_adj.iter_mut())
        {
            adj.sort_by_key(|&(j, _)| ids[j]);
        }
        let mut by_id: Vec<usize> = (0..ids.len()).collect();
        by_id.sort_by_key(|&i| ids[i]);
        self.graph.by_id = by_id;
        self.graph
    }
}

/// Parses the whitespace-separated `u v w` edge-list format.
///
/// `#` starts a comment line; blank lines are skipped. With `undirected`
/// set, every line contributes both `u -> v` and `v -> u`.
pub fn load_edge_list<R: BufRead>(reader: R, undirected: bool) -> Result<SocialGraph, GraphError> {
    let mut builder = GraphBuilder::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(GraphError::Malformed {
                line: lineno,
                reason: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let parse_id = |s: &str| {
            s.parse::<NodeId>().map_err(|_| GraphError::Malformed {
                line: lineno,
                reason: format!("bad node id {s:?}"),
            })
        };
        let u = parse_id(fields[0])?;
        let v = parse_id(fields[1])?;
        let w: f64 = fields[2].parse().map_err(|_| GraphError::Malformed {
            line: lineno,
            reason: format!("bad weight {:?}", fields[2]),
        })?;
        if w.is_nan() {
            return Err(GraphError::WeightOutOfRange {
                line: lineno,
                u,
                v,
                weight: w,
            });
        }
        builder.add_edge_at(u, v, w, lineno)?;
        if undirected {
            builder.add_edge_at(v, u, w, lineno)?;
        }
    }
    Ok(builder.build())
}

pub fn load_edge_list_str(text: &str) -> Result<SocialGraph, GraphError> {
    load_edge_list(text.as_bytes(), false)
}

/// Formats a probability with at least six significant digits while keeping
/// the shortest representation that round-trips.
pub fn format_weight(w: f64) -> String {
    let mut s = format!("{w}");
    let significant = s
        .chars()
        .filter(|c| c.is_ascii_digit())
        .skip_while(|&c| c == '0')
        .count();
    let significant = if w == 0.0 { 1 } else { significant };
    if significant < 6 {
        if !s.contains('.') {
            s.push('.');
        }
        s.extend(std::iter::repeat_n('0', 6 - significant));
    }
    s
}

pub fn write_edge_list<W: Write>(graph: &SocialGraph, mut out: W) -> std::io::Result<()> {
    for (u, v, w) in graph.edges() {
        writeln!(out, "{u} {v} {}", format_weight(w))?;
    }
    Ok(())
}

/// Minimum number of directed hops from `a` to `b`, or `None` when unreachable.
pub fn hop_distance(graph: &SocialGraph, a: NodeId, b: NodeId) -> Option<usize> {
    let (ai, bi) = (graph.index_of(a)?, graph.index_of(b)?);
    if ai == bi {
        return Some(0);
    }
    let dist = bfs_from(graph, ai);
    dist[bi]
}

/// Breadth-first hop counts from dense node `src` along out-edges.
pub fn bfs_from(graph: &SocialGraph, src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; graph.node_count()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap() + 1;
        for &(v, _) in graph.out_edges(u) {
            if dist[v].is_none() {
                dist[v] = Some(d);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Friends of the initiator, always including the initiator itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FriendSet {
    initiator: NodeId,
    members: BTreeSet<NodeId>,
}

impl FriendSet {
    pub fn new(initiator: NodeId, friends: impl IntoIterator<Item = NodeId>) -> Self {
        let mut members: BTreeSet<NodeId> = friends.into_iter().collect();
        members.insert(initiator);
        Self { initiator, members }
    }

    /// `s` plus its out-neighbours.
    pub fn from_out_neighbors(graph: &SocialGraph, initiator: NodeId) -> Self {
        Self::new(initiator, graph.out_neighbors(initiator))
    }

    pub fn initiator(&self) -> NodeId {
        self.initiator
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.members.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.members.iter().copied()
    }

    /// Fails on the first member that does not exist in `graph`.
    pub fn validate(&self, graph: &SocialGraph) -> Result<(), GraphError> {
        match self.members.iter().find(|&&v| !graph.contains(v)) {
            Some(&v) => Err(GraphError::UnknownNode(v)),
            None => Ok(()),
        }
    }
}

/// Homophily probability `h(s, v)` attached to every non-friend tree node.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum HomophilyModel {
    #[default]
    Absent,
    Constant(f64),
    /// Nodes missing from the map get probability 0.
    PerNode(BTreeMap<NodeId, f64>),
}

impl HomophilyModel {
    pub fn probability(&self, v: NodeId) -> f64 {
        match self {
            HomophilyModel::Absent => 0.0,
            HomophilyModel::Constant(h) => *h,
            HomophilyModel::PerNode(map) => map.get(&v).copied().unwrap_or(0.0),
        }
    }

    pub fn is_absent(&self) -> bool {
        match self {
            HomophilyModel::Absent => true,
            HomophilyModel::Constant(h) => *h == 0.0,
            HomophilyModel::PerNode(map) => map.values().all(|&h| h == 0.0),
        }
    }

    /// Reads `v h` lines (same comment rules as the edge list).
    pub fn load<R: BufRead>(reader: R) -> Result<Self, GraphError> {
        let mut map = BTreeMap::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let malformed = |reason: &str| GraphError::Malformed {
                line: lineno + 1,
                reason: reason.to_string(),
            };
            let mut it = trimmed.split_whitespace();
            let (Some(v), Some(h), None) = (it.next(), it.next(), it.next()) else {
                return Err(malformed("expected `node probability`"));
            };
            let v: NodeId = v.parse().map_err(|_| malformed("bad node id"))?;
            let h: f64 = h.parse().map_err(|_| malformed("bad probability"))?;
            if !(0.0..=1.0).contains(&h) {
                return Err(GraphError::WeightOutOfRange {
                    line: lineno + 1,
                    u: v,
                    v,
                    weight: h,
                });
            }
            map.insert(v, h);
        }
        Ok(HomophilyModel::PerNode(map))
    }
}

/// Zipf-distributed edge weights over a fixed grid of `ranks` levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZipfWeightConfig {
    pub alpha: f64,
    pub ranks: usize,
    pub w_max: f64,
    pub seed: u64,
}

impl Default for ZipfWeightConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            ranks: 10,
            w_max: 0.9,
            seed: 0,
        }
    }
}

impl ZipfWeightConfig {
    fn validate(&self) -> Result<(), GraphError> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(GraphError::InvalidParameter(format!(
                "alpha {} must be >= 0",
                self.alpha
            )));
        }
        if self.ranks == 0 {
            return Err(GraphError::InvalidParameter(
                "rank count must be positive".into(),
            ));
        }
        if !(self.w_max > 0.0 && self.w_max <= 1.0) {
            return Err(GraphError::InvalidParameter(format!(
                "w_max {} must lie in (0, 1]",
                self.w_max
            )));
        }
        Ok(())
    }

    /// Weight assigned to rank `i` (1-based).
    ///
    /// Ranks are drawn with probability proportional to `i^-alpha`, and the
    /// most frequent rank carries the smallest weight: rank `i` maps to
    /// `w_max * (ranks + 1 - i)^-alpha`, so rank `ranks` maps to `w_max`.
    pub fn rank_weight(&self, i: usize) -> f64 {
        self.w_max * ((self.ranks + 1 - i) as f64).powf(-self.alpha)
    }

    pub fn sampler(&self) -> Result<ZipfSampler, GraphError> {
        self.validate()?;
        let probs: Vec<f64> = (1..=self.ranks)
            .map(|i| (i as f64).powf(-self.alpha))
            .collect();
        let index =
            WeightedIndex::new(&probs).map_err(|e| GraphError::InvalidParameter(e.to_string()))?;
        Ok(ZipfSampler {
            config: *self,
            index,
        })
    }
}

/// Draws ranks with probability proportional to `i^-alpha`.
#[derive(Debug, Clone)]
pub struct ZipfSampler {
    config: ZipfWeightConfig,
    index: WeightedIndex<f64>,
}

impl ZipfSampler {
    pub fn sample_rank<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng) + 1
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.config.rank_weight(self.sample_rank(rng))
    }
}

/// Edge-weight distribution for synthetic graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightModel {
    Zipf {
        alpha: f64,
        ranks: usize,
        w_max: f64,
    },
    /// Uniform on `(low, high]`.
    Uniform { low: f64, high: f64 },
}

/// Random weakly connected directed graph with Zipf edge weights.
pub fn generate_synthetic(
    nodes: usize,
    avg_out_degree: f64,
    zipf: &ZipfWeightConfig,
) -> Result<SocialGraph, GraphError> {
    let model = WeightModel::Zipf {
        alpha: zipf.alpha,
        ranks: zipf.ranks,
        w_max: zipf.w_max,
    };
    generate_with_model(nodes, avg_out_degree, model, zipf.seed)
}

/// Random weakly connected directed graph with `round(nodes * avg_out_degree)` edges.
///
/// A random spanning tree (each node `i > 0` linked to a uniformly chosen
/// earlier node, random direction) guarantees weak connectivity; the
/// remaining edges are uniform random pairs. All topology draws happen
/// before any weight draw, so two calls with the same seed and size share
/// the same topology whatever the weight model.
pub fn generate_with_model(
    nodes: usize,
    avg_out_degree: f64,
    model: WeightModel,
    seed: u64,
) -> Result<SocialGraph, GraphError> {
    if nodes < 2 {
        return Err(GraphError::InvalidParameter(format!(
            "need at least 2 nodes, got {nodes}"
        )));
    }
    if avg_out_degree.is_nan() || avg_out_degree < 1.0 {
        return Err(GraphError::InvalidParameter(format!(
            "average out-degree {avg_out_degree} must be >= 1"
        )));
    }
    let target = (nodes as f64 * avg_out_degree).round() as usize;
    let max_edges = nodes * (nodes - 1);
    if target > max_edges {
        return Err(GraphError::InvalidParameter(format!(
            "{target} edges requested but only {max_edges} fit"
        )));
    }
    let sampler = match model {
        WeightModel::Zipf {
            alpha,
            ranks,
            w_max,
        } => Some(
            ZipfWeightConfig {
                alpha,
                ranks,
                w_max,
                seed,
            }
            .sampler()?,
        ),
        WeightModel::Uniform { low, high } => {
            if !(0.0 <= low && low < high && high <= 1.0) {
                return Err(GraphError::InvalidParameter(format!(
                    "uniform range ({low}, {high}] must lie within [0, 1]"
                )));
            }
            None
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(target);
    let mut seen = HashSet::with_capacity(target);
    for i in 1..nodes {
        let j = rng.gen_range(0..i);
        let pair = if rng.gen_bool(0.5) { (i, j) } else { (j, i) };
        seen.insert(pair);
        pairs.push(pair);
    }
    while pairs.len() < target {
        let u = rng.gen_range(0..nodes);
        let v = rng.gen_range(0..nodes);
        if u != v && seen.insert((u, v)) {
            pairs.push((u, v));
        }
    }

    let mut builder = GraphBuilder::new();
    for v in 0..nodes {
        builder.add_node(v as NodeId);
    }
    for (u, v) in pairs {
        let w = match (&sampler, model) {
            (Some(z), _) => z.sample(&mut rng),
            (None, WeightModel::Uniform { low, high }) => {
                // (low, high]
                high - rng.gen::<f64>() * (high - low)
            }
            _ => unreachable!(),
        };
        builder.add_edge(u as NodeId, v as NodeId, w)?;
    }
    Ok(builder.build())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_simple_list() {
        let g = load_edge_list_str("0 1 0.9\n1 2 0.1").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.weight(0, 1), Some(0.9));
        assert_eq!(g.weight(1, 0), None);
        g.check_invariants().unwrap();
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let g = load_edge_list_str("# header\n\n  0 1 0.5\n# another\n").unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn rejects_self_loop() {
        let err = load_edge_list_str("0 0 0.5").unwrap_err();
        assert_eq!(err, GraphError::SelfLoop { line: 1, node: 0 });
    }

    #[test]
    fn rejects_weight_out_of_range() {
        let err = load_edge_list_str("0 1 1.5").unwrap_err();
        assert!(matches!(err, GraphError::WeightOutOfRange { line: 1, .. }));
        assert!(load_edge_list_str("0 1 -0.1").is_err());
        assert!(load_edge_list_str("0 1 NaN").is_err());
    }

    #[test]
    fn rejects_duplicates_and_reports_line() {
        let err = load_edge_list_str("0 1 0.5\n# c\n0 1 0.4").unwrap_err();
        assert_eq!(
            err,
            GraphError::DuplicateEdge {
                line: 3,
                u: 0,
                v: 1
            }
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(
            load_edge_list_str("0 1").unwrap_err(),
            GraphError::Malformed { line: 1, .. }
        ));
        assert!(matches!(
            load_edge_list_str("0 x 0.3").unwrap_err(),
            GraphError::Malformed { line: 1, .. }
        ));
        assert!(matches!(
            load_edge_list_str("0 1 heavy").unwrap_err(),
            GraphError::Malformed { line: 1, .. }
        ));
    }

    #[test]
    fn undirected_flag_expands_arcs() {
        let g = load_edge_list("0 1 0.3\n1 2 0.4".as_bytes(), true).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.weight(1, 0), Some(0.3));
        assert!(load_edge_list("0 1 0.3\n1 0 0.3".as_bytes(), true).is_err());
    }

    #[test]
    fn weight_formatting_keeps_six_digits() {
        assert_eq!(format_weight(0.5), "0.500000");
        assert_eq!(format_weight(1.0), "1.00000");
        assert_eq!(format_weight(0.0), "0.00000");
        assert_eq!(format_weight(0.001), "0.00100000");
        assert_eq!(format_weight(0.123456789), "0.123456789");
        assert_eq!(format_weight(0.1 + 0.2).parse::<f64>().unwrap(), 0.1 + 0.2);
    }

    #[test]
    fn hop_distances() {
        let g = load_edge_list_str("0 1 0.5\n1 2 0.5\n5 6 0.1").unwrap();
        assert_eq!(hop_distance(&g, 0, 0), Some(0));
        assert_eq!(hop_distance(&g, 0, 2), Some(2));
        assert_eq!(hop_distance(&g, 2, 0), None);
        assert_eq!(hop_distance(&g, 0, 6), None);
        assert_eq!(hop_distance(&g, 0, 99), None);
    }

    #[test]
    fn friend_set_always_contains_initiator() {
        let g = load_edge_list_str("0 1 0.5\n0 2 0.5\n2 3 0.5").unwrap();
        let s = FriendSet::from_out_neighbors(&g, 0);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(FriendSet::new(7, [1]).contains(7));
        assert_eq!(
            FriendSet::new(0, [9]).validate(&g),
            Err(GraphError::UnknownNode(9))
        );
    }

    #[test]
    fn homophily_file() {
        let m = HomophilyModel::load("# v h\n3 0.25\n4 0.5\n".as_bytes()).unwrap();
        assert_eq!(m.probability(3), 0.25);
        assert_eq!(m.probability(99), 0.0);
        assert!(HomophilyModel::load("3 1.5".as_bytes()).is_err());
        assert!(HomophilyModel::Constant(0.0).is_absent());
    }

    #[test]
    fn alpha_zero_collapses_to_w_max() {
        let cfg = ZipfWeightConfig {
            alpha: 0.0,
            ranks: 10,
            w_max: 0.9,
            seed: 3,
        };
        let g = generate_synthetic(200, 3.0, &cfg).unwrap();
        assert!(g.edges().all(|(_, _, w)| w == 0.9));
    }

    #[test]
    fn generator_is_deterministic_and_valid() {
        let cfg = ZipfWeightConfig {
            alpha: 2.0,
            ranks: 10,
            w_max: 0.9,
            seed: 42,
        };
        let a = generate_synthetic(300, 4.0, &cfg).unwrap();
        let b = generate_synthetic(300, 4.0, &cfg).unwrap();
        assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
        assert_eq!(a.edge_count(), 1200);
        a.check_invariants().unwrap();
        assert!(a.edges().all(|(_, _, w)| w > 0.0 && w <= 0.9));
    }

    #[test]
    fn generator_is_weakly_connected() {
        let cfg = ZipfWeightConfig {
            seed: 9,
            ..Default::default()
        };
        let g = generate_synthetic(500, 1.0, &cfg).unwrap();
        // undirected BFS
        let n = g.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in g.out_edges(u).iter().chain(g.in_edges(u)) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        assert!(seen.into_iter().all(|x| x));
    }

    #[test]
    fn generator_rejects_bad_parameters() {
        let cfg = ZipfWeightConfig::default();
        assert!(generate_synthetic(1, 2.0, &cfg).is_err());
        assert!(generate_synthetic(10, 0.5, &cfg).is_err());
        assert!(generate_synthetic(3, 5.0, &cfg).is_err());
        let bad = ZipfWeightConfig { alpha: -1.0, ..cfg };
        assert!(generate_synthetic(10, 2.0, &bad).is_err());
        let bad = ZipfWeightConfig { w_max: 1.5, ..cfg };
        assert!(generate_synthetic(10, 2.0, &bad).is_err());
        let uniform = WeightModel::Uniform {
            low: 0.5,
            high: 0.2,
        };
        assert!(generate_with_model(10, 2.0, uniform, 0).is_err());
    }

    #[test]
    fn uniform_weights_within_range() {
        let g = generate_with_model(
            100,
            3.0,
            WeightModel::Uniform {
                low: 0.1,
                high: 0.3,
            },
            5,
        )
        .unwrap();
        assert!(g.edges().all(|(_, _, w)| w > 0.1 && w <= 0.3));
    }

    #[test]
    fn topology_independent_of_alpha() {
        let a = generate_synthetic(
            100,
            3.0,
            &ZipfWeightConfig {
                alpha: 0.5,
                seed: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let b = generate_synthetic(
            100,
            3.0,
            &ZipfWeightConfig {
                alpha: 2.5,
                seed: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let ta: Vec<_> = a.edges().map(|(u, v, _)| (u, v)).collect();
        let tb: Vec<_> = b.edges().map(|(u, v, _)| (u, v)).collect();
        assert_eq!(ta, tb);
    }
}
