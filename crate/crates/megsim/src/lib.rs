//! Simulation and analysis of information spreading over Markovian evolving
//! graphs (MEGs).
//!
//! A MEG is a stochastic process `E_0, E_1, ...` of edge sets over a fixed
//! node set `[n]` in which the next snapshot depends only on the current one.
//! This crate provides:
//!
//! * finite Markov chain machinery (stationary distributions, total variation,
//!   mixing times, trajectory sampling) in [`markov`];
//! * the abstract MEG process contract, snapshot statistics, and estimators
//!   for the epoch-level density / edge-independence parameters in [`dynamic`];
//! * the flooding process, its phase instrumentation, and the evaluable
//!   flooding-time bound formulas in [`flooding`];
//! * node-driven MEGs (one hidden chain per node plus a symmetric connection
//!   map) with their analytic edge-probability parameters in [`node_meg`];
//! * edge-driven MEGs (one hidden chain per edge with an on/off projection)
//!   in [`edge_meg`];
//! * mobility-model constructors (random waypoint on a grid square, random
//!   paths over a graph, random walks) and positional-profile analysis in
//!   [`mobility`].
//!
//! All simulation entry points take explicit random-number streams and are
//! bit-reproducible for a fixed seed, independent of worker count.

pub mod dynamic;
pub mod edge_meg;
pub mod flooding;
pub mod markov;
pub mod mobility;
pub mod node_meg;
pub mod rng;

pub use dynamic::{MegProcess, Snapshot};
pub use markov::{Distribution, TransitionKernel};
