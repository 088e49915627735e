// Copyright 2026 The qnet Authors
// SPDX-License-Identifier: Apache-2.0

//! Topology reconstruction of single-excitation quantum networks from
//! sink-probe data.
//!
//! A probe injects one excitation at node `e`, attaches an absorbing sink at
//! node `s` and records the absorbed population over time. [`probing`]
//! produces those datasets, [`fitness`] compares them, and [`ga`] searches
//! adjacency matrices whose probe data reproduce a target dataset.
//! [`experiments`] drives the parameter sweeps built on top.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision instantiation used by the CLI.

// `!(x > 0)` is how validation rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fitness;
pub mod ga;
pub mod graph;
pub mod linalg;
pub mod probing;
pub mod rng;
pub mod scalar;

pub use error::{QnetError, Result};
pub use graph::{Network, NodePermutation};
pub use scalar::Real;

pub type SinkHamiltonian64 = dynamics::SinkHamiltonian<f64>;
pub type SinkTrace64 = dynamics::SinkTrace<f64>;
pub type WalkState64 = dynamics::WalkState<f64>;
pub type ProbeDataset64 = probing::ProbeDataset<f64>;
pub type GaReport64 = ga::GaReport<f64>;
pub type Individual64 = ga::Individual<f64>;
pub type ProbePlan64 = probing::ProbePlan<f64>;
pub type PeakTimeFit64 = fitness::PeakTimeFit<f64>;
