//! Circuit decomposition of multilevel continuous absorption machines.
//!
//! A machine is a [`graph::LabeledGraph`]: energy levels joined by edges,
//! each driven by one heat bath with detailed-balance rates. The steady-state
//! heat currents are split into contributions of the graph's circuits
//! ([`hill::decompose`]), cross-checked against the direct steady-state
//! route ([`steady`]) and the fundamental-set and positive-term
//! decompositions ([`decomp_alt`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod decomp_alt;
pub mod error;
pub mod graph;
pub mod hill;
pub mod io;
pub mod linalg;
pub mod models;
pub mod par;
pub mod steady;

pub use error::{Error, Result};
pub use graph::{Caps, Circuit, Cycle, LabeledGraph};
pub use models::{Bath, Model, ModelParams, Statistics};
pub use par::Execution;
