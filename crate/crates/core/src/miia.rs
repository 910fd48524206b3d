//! Maximum influence paths and the (homophily-extended) maximum influence
//! in-arborescence rooted at the target.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt::Write as _;
use std::io::Write;

use crate::error::TreeError;
use crate::graph::{format_weight, HomophilyModel, NodeId, SocialGraph};
use crate::planner::PlanRequest;

/// Best path from every node that can reach the target.
#[derive(Debug, Clone)]
pub struct InfluencePaths {
    target: usize,
    next: Vec<Option<usize>>,
    prob: Vec<f64>,
    reached: Vec<bool>,
}

impl InfluencePaths {
    /// `(next hop, path probability)` for `v`; `None` if `v` cannot reach the target.
    pub fn get(&self, graph: &SocialGraph, v: NodeId) -> Option<(Option<NodeId>, f64)> {
        let i = graph.index_of(v)?;
        self.reached[i].then(|| (self.next[i].map(|j| graph.id_of(j)), self.prob[i]))
    }

    pub fn to_map(&self, graph: &SocialGraph) -> BTreeMap<NodeId, (Option<NodeId>, f64)> {
        (0..self.reached.len())
            .filter(|&i| self.reached[i])
            .map(|i| {
                (
                    graph.id_of(i),
                    (self.next[i].map(|j| graph.id_of(j)), self.prob[i]),
                )
            })
            .collect()
    }

    pub fn target_index(&self) -> usize {
        self.target
    }
}

#[derive(PartialEq)]
struct Candidate {
    prob: f64,
    id: NodeId,
    idx: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.prob
            .total_cmp(&other.prob)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Maximum-probability paths into `target`.
///
/// Dijkstra over the reversed graph, maximising the product of weights
/// (the same search as minimising the sum of `-ln w`). Zero-weight edges
/// are never traversed. Among equally good next hops that are already
/// settled, the one with the smaller external id wins.
pub fn max_influence_tree(graph: &SocialGraph, target: NodeId) -> Option<InfluencePaths> {
    let t = graph.index_of(target)?;
    let n = graph.node_count();
    let mut next = vec![None; n];
    let mut prob = vec![0.0; n];
    let mut reached = vec![false; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();

    prob[t] = 1.0;
    reached[t] = true;
    heap.push(Candidate {
        prob: 1.0,
        id: target,
        idx: t,
    });
    while let Some(Candidate { idx: u, .. }) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        let pu = prob[u];
        let uid = graph.id_of(u);
        for &(v, w) in graph.in_edges(u) {
            if w <= 0.0 || settled[v] {
                continue;
            }
            let cand = w * pu;
            let better = !reached[v]
                || cand > prob[v]
                || (cand == prob[v] && next[v].is_some_and(|cur| uid < graph.id_of(cur)));
            if better {
                reached[v] = true;
                prob[v] = cand;
                next[v] = Some(u);
                heap.push(Candidate {
                    prob: cand,
                    id: graph.id_of(v),
                    idx: v,
                });
            }
        }
    }
    Some(InfluencePaths {
        target: t,
        next,
        prob,
        reached,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeNodeKind {
    /// A real user of the social graph.
    Member(NodeId),
    /// Duplicated initiator carrying the homophily edge into `of`.
    Homophily { of: NodeId },
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub kind: TreeNodeKind,
    pub parent: Option<usize>,
    /// Weight of the edge into the parent; 0 for the root.
    pub weight: f64,
    pub children: Vec<usize>,
    pub friend: bool,
    /// Non-friend nodes in the subtree, this node included.
    pub z: usize,
    /// Hops to the root.
    pub depth: usize,
}

/// In-tree towards the target. Node handles are indices into [`Arborescence::nodes`].
#[derive(Debug, Clone)]
pub struct Arborescence {
    nodes: Vec<TreeNode>,
    root: usize,
    topo: Vec<usize>,
    theta: f64,
    index: HashMap<NodeId, usize>,
}

impl Arborescence {
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn target(&self) -> NodeId {
        self.member_id(self.root).expect("root is a member")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.nodes[i].children
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.nodes[i].children.len()
    }

    pub fn is_friend(&self, i: usize) -> bool {
        self.nodes[i].friend
    }

    pub fn z(&self, i: usize) -> usize {
        self.nodes[i].z
    }

    /// Children before parents; the root comes last.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn index_of(&self, v: NodeId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn member_id(&self, i: usize) -> Option<NodeId> {
        match self.nodes[i].kind {
            TreeNodeKind::Member(v) => Some(v),
            TreeNodeKind::Homophily { .. } => None,
        }
    }

    pub fn label(&self, i: usize) -> String {
        match self.nodes[i].kind {
            TreeNodeKind::Member(v) => v.to_string(),
            TreeNodeKind::Homophily { of } => format!("s@{of}"),
        }
    }

    /// Tree indices of all non-friend nodes.
    pub fn non_friend_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| !self.nodes[i].friend)
    }

    pub fn friend_leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].friend)
    }

    /// Number of edges in the tree that come from the homophily extension.
    pub fn homophily_leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, TreeNodeKind::Homophily { .. }))
            .count()
    }

    /// Writes one `v parent w z` line per node, root first (`t ROOT - z_t`).
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(self.dump_string().as_bytes())
    }

    pub fn dump_string(&self) -> String {
        let mut s = String::new();
        for &i in self.topo.iter().rev() {
            let node = &self.nodes[i];
            match node.parent {
                None => writeln!(s, "{} ROOT - {}", self.label(i), node.z),
                Some(p) => writeln!(
                    s,
                    "{} {} {} {}",
                    self.label(i),
                    self.label(p),
                    format_weight(node.weight),
                    node.z
                ),
            }
            .unwrap();
        }
        s
    }

    /// Structural self-check used by tests and debug assertions.
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.nodes.len();
        if self.topo.len() != n {
            return Err("topological order does not cover every node".into());
        }
        let mut pos = vec![usize::MAX; n];
        for (k, &i) in self.topo.iter().enumerate() {
            if pos[i] != usize::MAX {
                return Err(format!("node {} listed twice", self.label(i)));
            }
            pos[i] = k;
        }
        let roots = self.nodes.iter().filter(|x| x.parent.is_none()).count();
        if roots != 1 || self.nodes[self.root].parent.is_some() {
            return Err("tree must have exactly one root".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some(p) = node.parent {
                if pos[i] >= pos[p] {
                    return Err(format!("{} does not precede its parent", self.label(i)));
                }
                if !self.nodes[p].children.contains(&i) {
                    return Err(format!("{} missing from parent's children", self.label(i)));
                }
                if node.depth != self.nodes[p].depth + 1 {
                    return Err(format!("bad depth at {}", self.label(i)));
                }
            }
            if node.children.is_empty() && !node.friend {
                return Err(format!("leaf {} is not a friend", self.label(i)));
            }
            let z = usize::from(!node.friend)
                + node
                    .children
                    .iter()
                    .map(|&c| self.nodes[c].z)
                    .sum::<usize>();
            if z != node.z {
                return Err(format!("z mismatch at {}", self.label(i)));
            }
        }
        Ok(())
    }
}

/// Assembles an [`Arborescence`] from explicit parent links.
///
/// Children of each node are ordered by external id, homophily leaves last.
#[derive(Debug, Clone)]
pub struct TreeBuilder {
    root: NodeId,
    members: BTreeMap<NodeId, (NodeId, f64, bool)>,
    homophily: BTreeMap<NodeId, f64>,
    theta: f64,
}

impl TreeBuilder {
    pub fn new(root: NodeId) -> Self {
        Self {
            root,
            members: BTreeMap::new(),
            homophily: BTreeMap::new(),
            theta: 0.0,
        }
    }

    pub fn theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    /// Adds `child -> parent` with influence `weight`.
    pub fn edge(&mut self, child: NodeId, parent: NodeId, weight: f64, friend: bool) -> &mut Self {
        self.members.insert(child, (parent, weight, friend));
        self
    }

    pub fn friend(&mut self, child: NodeId, parent: NodeId, weight: f64) -> &mut Self {
        self.edge(child, parent, weight, true)
    }

    pub fn member(&mut self, child: NodeId, parent: NodeId, weight: f64) -> &mut Self {
        self.edge(child, parent, weight, false)
    }

    /// Attaches an initiator copy to `of` with probability `h`.
    pub fn homophily(&mut self, of: NodeId, h: f64) -> &mut Self {
        self.homophily.insert(of, h);
        self
    }

    pub fn build(&self) -> Result<Arborescence, TreeError> {
        let malformed = |m: String| Err(TreeError::Malformed(m));
        if self.members.contains_key(&self.root) {
            return malformed(format!("root {} cannot have a parent", self.root));
        }
        let mut nodes = Vec::with_capacity(self.members.len() + self.homophily.len() + 1);
        let mut index = HashMap::new();
        nodes.push(TreeNode {
            kind: TreeNodeKind::Member(self.root),
            parent: None,
            weight: 0.0,
            children: Vec::new(),
            friend: false,
            z: 0,
            depth: 0,
        });
        index.insert(self.root, 0);
        for (&v, &(_, w, friend)) in &self.members {
            if !(0.0..=1.0).contains(&w) {
                return malformed(format!("weight {w} on {v} outside [0, 1]"));
            }
            index.insert(v, nodes.len());
            nodes.push(TreeNode {
                kind: TreeNodeKind::Member(v),
                parent: None,
                weight: w,
                children: Vec::new(),
                friend,
                z: 0,
                depth: 0,
            });
        }
        for (&v, &(p, _, _)) in &self.members {
            let Some(&pi) = index.get(&p) else {
                return malformed(format!("parent {p} of {v} is not in the tree"));
            };
            let vi = index[&v];
            nodes[vi].parent = Some(pi);
            nodes[pi].children.push(vi);
        }
        for (&of, &h) in &self.homophily {
            let Some(&pi) = index.get(&of) else {
                return malformed(format!("homophily target {of} is not in the tree"));
            };
            if !(0.0..=1.0).contains(&h) {
                return Err(TreeError::InvalidHomophily { node: of, value: h });
            }
            let i = nodes.len();
            nodes.push(TreeNode {
                kind: TreeNodeKind::Homophily { of },
                parent: Some(pi),
                weight: h,
                children: Vec::new(),
                friend: true,
                z: 0,
                depth: 0,
            });
            nodes[pi].children.push(i);
        }
        if let Some(leaf) = nodes.iter().find(|n| n.friend && !n.children.is_empty()) {
            return malformed(format!("friend {:?} must be a leaf", leaf.kind));
        }

        // Post-order walk from the root; anything unvisited sits on a cycle.
        let mut topo = Vec::with_capacity(nodes.len());
        let mut stack = vec![(0usize, false)];
        while let Some((i, expanded)) = stack.pop() {
            if expanded {
                topo.push(i);
                continue;
            }
            stack.push((i, true));
            let depth = nodes[i].depth + 1;
            for k in (0..nodes[i].children.len()).rev() {
                let c = nodes[i].children[k];
                nodes[c].depth = depth;
                stack.push((c, false));
            }
        }
        if topo.len() != nodes.len() {
            return malformed("parent links contain a cycle".into());
        }
        for &i in &topo {
            let z = usize::from(!nodes[i].friend)
                + nodes[i].children.iter().map(|&c| nodes[c].z).sum::<usize>();
            nodes[i].z = z;
        }
        Ok(Arborescence {
            nodes,
            root: 0,
            topo,
            theta: self.theta,
            index,
        })
    }
}

/// Builds the extended maximum influence in-arborescence for `request`.
///
/// Every friend's best path into the target is kept when its probability
/// is at least `theta`; a friend whose path runs through another friend is
/// covered by that friend's own path. Each non-friend node of the result,
/// the target included, then receives one initiator-copy leaf weighted by
/// its homophily probability (skipped when that probability is 0).
pub fn build_miia(
    graph: &SocialGraph,
    request: &PlanRequest,
    homophily: &HomophilyModel,
) -> Result<Arborescence, TreeError> {
    let t = request.target;
    let friends = &request.friends;
    if friends.contains(t) {
        return Err(TreeError::TargetIsFriend(t));
    }
    friends.validate(graph)?;
    let paths = max_influence_tree(graph, t).ok_or(crate::error::GraphError::UnknownNode(t))?;
    let ti = paths.target;

    let mut builder = TreeBuilder::new(t).theta(request.theta);
    for u in friends.iter() {
        let ui = graph.index_of(u).expect("validated");
        if !paths.reached[ui] || paths.prob[ui] < request.theta {
            continue;
        }
        let mut path = vec![ui];
        let mut cur = paths.next[ui].expect("reached node has a next hop");
        let mut covered = false;
        while cur != ti {
            if friends.contains(graph.id_of(cur)) {
                covered = true;
                break;
            }
            path.push(cur);
            cur = paths.next[cur].expect("reached node has a next hop");
        }
        if covered {
            continue;
        }
        for &v in &path {
            let nh = paths.next[v].unwrap();
            let w = graph
                .out_edges(v)
                .iter()
                .find(|&&(x, _)| x == nh)
                .map(|&(_, w)| w)
                .unwrap();
            let id = graph.id_of(v);
            builder.edge(id, graph.id_of(nh), w, friends.contains(id));
        }
    }

    let mut non_friends: Vec<NodeId> = vec![t];
    non_friends.extend(
        builder
            .members
            .iter()
            .filter(|(_, &(_, _, f))| !f)
            .map(|(&v, _)| v),
    );
    for v in non_friends {
        let h = homophily.probability(v);
        if !(0.0..=1.0).contains(&h) {
            return Err(TreeError::InvalidHomophily { node: v, value: h });
        }
        if h > 0.0 {
            builder.homophily(v, h);
        }
    }
    let tree = builder.build()?;
    if tree.children(tree.root()).is_empty() {
        return Err(TreeError::TargetUnreachable {
            initiator: friends.initiator(),
            target: t,
        });
    }
    debug_assert_eq!(tree.check_invariants(), Ok(()));
    Ok(tree)
}

/// Per-node count of non-friend nodes in the subtree, indexed like [`Arborescence::nodes`].
pub fn subtree_counts(tree: &Arborescence) -> Vec<usize> {
    let mut z = vec![0; tree.len()];
    for &i in tree.topo_order() {
        z[i] =
            usize::from(!tree.is_friend(i)) + tree.children(i).iter().map(|&c| z[c]).sum::<usize>();
    }
    z
}
