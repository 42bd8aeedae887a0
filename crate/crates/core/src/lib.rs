//! Pliable index coding (PICOD) toolkit.
//!
//! A PICOD problem has `m` messages at a server and `n` clients, each holding
//! a distinct proper subset of the messages as side information and wanting
//! *any* one message it does not already have. This crate computes:
//!
//! - converse bounds on the optimal broadcast length: the nesting number
//!   (greedy and exact), the decoding-chain bounds `tau1`/`tau2`, and the
//!   absent-client structural bounds ([`bounds`]);
//! - linear schemes, their per-client decodability and a greedy builder
//!   ([`schemes`]);
//! - the exact optimal *linear* length over a small prime field by exhaustive
//!   subspace search, with an optimality certificate when a lower bound is
//!   met ([`exact`]);
//! - closed-form answers for instances with at most three clients and the
//!   sweep that cross-checks them ([`characterize`]).
//!
//! Indexing convention: the library API uses 0-based message and client
//! indices. Every external format (JSON files, reports, CLI tables) uses
//! 1-based indices.

pub mod bounds;
pub mod budget;
pub mod characterize;
pub mod cli;
pub mod error;
pub mod exact;
pub mod gflin;
pub mod instance;
pub mod schemes;

pub use budget::Budget;
pub use error::{PicodError, Result};
pub use instance::{MessageSet, PicodInstance};
