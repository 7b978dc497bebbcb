//! Budgeted seed selection for incentivized social advertising.
//!
//! An advertiser pays each seed user an incentive and pays the platform a fixed
//! amount per engagement. The platform's revenue from a seed set `S` is
//! `min{g(S, φ), B − c(S)}`: engagements are capped by whatever budget is left
//! after incentives. Engagement spreads under the Independent Cascade model.
//!
//! The crate provides non-adaptive selectors (two-phase benefit-cost greedy and
//! a variant for deterministic graphs), adaptive policies that observe cascades
//! as they unfold, and exact brute-force oracles used to check the approximation
//! guarantees and structural properties on small instances.

pub mod adaptive;
pub mod cascade;
pub mod cli;
pub mod estimator;
pub mod network;
pub mod nonadaptive;
pub mod oracle;
pub mod verify;

pub use cascade::{Label, PartialRealization, Realization};
pub use estimator::{build_pool, Evaluator, SamplePool};
pub use network::{load_instance, Instance, NodeId, NodeSet};
