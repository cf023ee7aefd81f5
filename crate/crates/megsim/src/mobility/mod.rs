//! Mobility models as node-driven MEGs: random paths over a graph (with the
//! random walk as the single-edge special case), the discretized random
//! waypoint over a grid square, and the positional-profile analysis that
//! turns single-node uniformity conditions into flooding-time bounds.

mod graph;
mod paths;
mod profile;
mod waypoint;

pub use graph::{graph_delta, MobilityGraph};
pub use paths::{
    build_random_path, build_random_walk, edge_paths, path_chain, path_family_checks, FamilyChecks,
    PathFamily,
};
pub use profile::{
    geometric_bound, path_family_bound, positional_profile, uniformity_check, walk_bound,
    PositionalProfile, UniformityCheck,
};
pub use waypoint::{build_random_waypoint, WaypointChain, WaypointConfig, WaypointModel};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MobilityError {
    #[error("mobility graph invalid: {0}")]
    BadGraph(String),
    #[error("path family invalid: {0}")]
    BadFamily(String),
    #[error("waypoint configuration invalid: {0}")]
    BadWaypoint(String),
    #[error("chain would need {states} states, above the desk-scale cap {cap}")]
    TooManyStates { states: u64, cap: u64 },
    #[error("precondition not verified: {0}")]
    PreconditionFailed(String),
    #[error(transparent)]
    NodeMeg(#[from] crate::node_meg::NodeMegError),
}
