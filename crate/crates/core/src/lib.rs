//! Invitation planning for active friending.
//!
//! Given an initiator `s`, their friends, a target `t` and an invitation
//! budget, choose which users `s` should befriend on the way to `t` so that
//! `t` finally accepts with the highest probability. Influence is modelled
//! on the maximum influence in-arborescence rooted at `t` ([`miia`]); the
//! [`planner`] module holds a greedy baseline and two exact dynamic
//! programmes; [`eval`] has the analytic, simulated and enumerated
//! acceptance evaluators used to check them.

pub mod bench;
pub mod error;
pub mod eval;
pub mod graph;
pub mod miia;
pub mod planner;

pub use error::{BenchError, EvalError, GraphError, PlanError, TreeError};
pub use eval::{
    acceptance_probability, activation_probability, exact_ic_acceptance, mc_estimate,
    submodularity_counterexample, McEstimate, ProbabilityReport, SelectionSet,
};
pub use graph::{FriendSet, HomophilyModel, NodeId, SocialGraph, ZipfWeightConfig};
pub use miia::{build_miia, max_influence_tree, Arborescence, TreeBuilder};
pub use planner::{
    plan, plan_rg, plan_sita, plan_sitina, Algorithm, InvitationPlan, PlanOutcome, PlanRequest,
};
