//! Temporal social-network analysis and agent-based society simulation.
//!
//! The pipeline turns an [`society::InteractionLog`] into relation graphs,
//! network measures, overlapping communities and user roles, then drives a
//! seeded multi-agent simulator whose synthetic logs go back through the
//! same analysis for comparison.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod communities;
pub mod error;
pub mod eval;
pub mod linkpred;
pub mod roles;
pub mod simulator;
pub mod sna;
pub mod society;

pub use error::{Error, Result};
