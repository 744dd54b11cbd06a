// SPDX-License-Identifier: Apache-2.0

//! Two-route SIR epidemics on two-layer multiplex networks.
//!
//! Nodes are shared between layers A and B. An edge present in only one
//! layer transmits with that layer's rate; an edge present in both
//! transmits with `1 - (1 - lambda_a)(1 - lambda_b)`. The crate covers
//! graph representation and metrics ([`multiplex`]), generators with
//! overlap and degree-correlation targets ([`netgen`]), generating-function
//! theory for thresholds and outbreak sizes ([`theory`]) and Monte Carlo
//! validation ([`sim`]).

pub mod edgelist;
pub mod error;
pub mod multiplex;
pub mod netgen;
pub mod report;
pub mod rng;
pub mod sim;
pub mod theory;

pub use error::{Error, Result};
pub use multiplex::{
    asn, ddc, DdcMode, EdgeClasses, JointDegreeDistribution, MultiplexGraph, VectorDegree,
    VectorDegreeDistribution,
};
pub use netgen::{build_multiplex, CouplingSpec, CouplingTarget, LayerKind, LayerSpec};
pub use sim::{SimConfig, SimMode, SimResult};
pub use theory::{SpreadingRate, Theory, Weighting};
