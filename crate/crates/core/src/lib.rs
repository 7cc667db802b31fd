//! Decentralized gradient descent maximization for nonconvex
//! strongly-concave minimax problems over a simulated agent network.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: communication graphs, gossip matrices and their validation;
//! - [`problem`]: the minimax problem contract and concrete instances;
//! - [`subsolver`]: simplex projection and dual maximization;
//! - [`optim`]: the decentralized method, its centralized special case and
//!   the gradient descent ascent baseline;
//! - [`metrics`]: stationarity and consensus measures;
//! - [`harness`]: configuration, traces, synthetic data and grid search.

pub mod checks;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod optim;
pub mod problem;
pub mod rng;
pub mod subsolver;
