//! Invitation planners over an influence arborescence.
//!
//! * [`plan_rg`]: range-limited greedy baseline.
//! * [`plan_sita`]: exact DP enumerating every budget split among children.
//! * [`plan_sitina`]: exact DP folding children in one at a time, `O(n r^2)`.

mod greedy;
mod sita;
mod sitina;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub use greedy::plan_rg;
pub use sita::{allocation_values, plan_sita, sita_tables, SitaTables, SITA_STATE_LIMIT};
pub use sitina::{backtrack, plan_sitina, sitina_tables, DpTables};

use crate::error::{PlanError, TreeError};
use crate::eval::{acceptance_with_mask, ProbabilityReport, SelectionSet};
use crate::graph::{FriendSet, HomophilyModel, NodeId, SocialGraph};
use crate::miia::{build_miia, Arborescence};

/// One friending query: initiator, target, friends, budget and path threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanRequest {
    pub initiator: NodeId,
    pub target: NodeId,
    pub friends: FriendSet,
    pub budget: usize,
    pub theta: f64,
}

impl PlanRequest {
    pub fn new(initiator: NodeId, target: NodeId, friends: FriendSet, budget: usize) -> Self {
        Self {
            initiator,
            target,
            friends,
            budget,
            theta: 0.0,
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if self.budget == 0 {
            return Err(PlanError::ZeroBudget);
        }
        if self.friends.contains(self.target) {
            return Err(TreeError::TargetIsFriend(self.target).into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Rg,
    Sita,
    Sitina,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Rg, Algorithm::Sita, Algorithm::Sitina];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rg => "rg",
            Algorithm::Sita => "sita",
            Algorithm::Sitina => "sitina",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rg" => Ok(Algorithm::Rg),
            "sita" => Ok(Algorithm::Sita),
            "sitina" => Ok(Algorithm::Sitina),
            other => Err(format!(
                "unknown algorithm {other:?} (expected rg, sita or sitina)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectedNode {
    pub node: NodeId,
    /// Invitations spent in this node's subtree, the node itself included.
    pub subtree_budget: usize,
    pub ap: f64,
    /// Hops from the node to the target inside the tree.
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvitationPlan {
    pub algorithm: Algorithm,
    pub budget: usize,
    pub selected: SelectionSet,
    /// Acceptance probability of the target under `selected`.
    pub objective: f64,
    /// Selected nodes ordered by id.
    pub nodes: Vec<SelectedNode>,
    pub report: ProbabilityReport,
}

impl InvitationPlan {
    /// Largest tree distance from any invited node to the target.
    pub fn longest_path(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    fn from_mask(tree: &Arborescence, mask: &[bool], algorithm: Algorithm, budget: usize) -> Self {
        let report = acceptance_with_mask(tree, mask);
        let mut used = vec![0usize; tree.len()];
        for &i in tree.topo_order() {
            used[i] =
                usize::from(mask[i]) + tree.children(i).iter().map(|&c| used[c]).sum::<usize>();
        }
        let mut nodes: Vec<SelectedNode> = (0..tree.len())
            .filter(|&i| mask[i])
            .map(|i| SelectedNode {
                node: tree.member_id(i).expect("only members are selectable"),
                subtree_budget: used[i],
                ap: report.at(i),
                depth: tree.node(i).depth,
            })
            .collect();
        nodes.sort_by_key(|n| n.node);
        InvitationPlan {
            algorithm,
            budget,
            selected: nodes.iter().map(|n| n.node).collect(),
            objective: report.objective(),
            nodes,
            report,
        }
    }
}

fn check_tree(tree: &Arborescence, budget: usize) -> Result<(), PlanError> {
    if budget == 0 {
        return Err(PlanError::ZeroBudget);
    }
    if tree.children(tree.root()).is_empty() {
        return Err(PlanError::EmptyTree);
    }
    Ok(())
}

/// Runs one planner on an already-built tree.
pub fn run_planner(
    tree: &Arborescence,
    algorithm: Algorithm,
    budget: usize,
) -> Result<InvitationPlan, PlanError> {
    match algorithm {
        Algorithm::Rg => plan_rg(tree, budget),
        Algorithm::Sita => plan_sita(tree, budget).map(|(p, _)| p),
        Algorithm::Sitina => plan_sitina(tree, budget).map(|(p, _)| p),
    }
}

// Returned once per query, so the size gap between variants does not matter.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum PlanOutcome {
    /// The target is already in the friend set; nothing to plan.
    AlreadyFriends,
    Planned {
        tree: Arborescence,
        plan: InvitationPlan,
        build_ms: f64,
        plan_ms: f64,
    },
}

/// Builds the arborescence for `request` and runs `algorithm` on it.
pub fn plan(
    graph: &SocialGraph,
    request: &PlanRequest,
    homophily: &HomophilyModel,
    algorithm: Algorithm,
) -> Result<PlanOutcome, PlanError> {
    if request.friends.contains(request.target) {
        return Ok(PlanOutcome::AlreadyFriends);
    }
    request.validate()?;
    let start = Instant::now();
    let tree = build_miia(graph, request, homophily)?;
    let build_ms = start.elapsed().as_secs_f64() * 1e3;
    let start = Instant::now();
    let plan = run_planner(&tree, algorithm, request.budget)?;
    let plan_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(PlanOutcome::Planned {
        tree,
        plan,
        build_ms,
        plan_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_edge_list_str;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>(), Ok(a));
        }
        assert!("dp".parse::<Algorithm>().is_err());
    }

    #[test]
    fn already_friends_is_trivial() {
        let g = load_edge_list_str("1 2 0.5").unwrap();
        let req = PlanRequest::new(1, 2, FriendSet::new(1, [2]), 3);
        let out = plan(&g, &req, &HomophilyModel::Absent, Algorithm::Sitina).unwrap();
        assert!(matches!(out, PlanOutcome::AlreadyFriends));
    }

    #[test]
    fn zero_budget_rejected() {
        let g = load_edge_list_str("1 2 0.5").unwrap();
        let req = PlanRequest::new(1, 2, FriendSet::new(1, []), 0);
        assert_eq!(
            plan(&g, &req, &HomophilyModel::Absent, Algorithm::Rg).unwrap_err(),
            PlanError::ZeroBudget
        );
    }

    #[test]
    fn end_to_end_chain() {
        let g = load_edge_list_str("0 1 1.0\n1 2 0.9\n2 3 0.1").unwrap();
        let req = PlanRequest::new(0, 3, FriendSet::from_out_neighbors(&g, 0), 2);
        for alg in Algorithm::ALL {
            let PlanOutcome::Planned { plan, .. } =
                plan(&g, &req, &HomophilyModel::Absent, alg).unwrap()
            else {
                panic!("expected a plan");
            };
            assert_eq!(
                plan.selected.iter().copied().collect::<Vec<_>>(),
                vec![2, 3],
                "{alg}"
            );
            assert!((plan.objective - 0.09).abs() < 1e-12);
            assert_eq!(plan.longest_path(), 1);
            let t = plan.nodes.iter().find(|n| n.node == 3).unwrap();
            assert_eq!(t.subtree_budget, 2);
        }
    }
}
