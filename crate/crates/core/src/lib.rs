//! Weighted MaxCut on simulated neutral-atom (Rydberg) arrays.
//!
//! The crate covers the whole chain from a power-grid case file to a measured
//! MaxCut distribution:
//!
//! * [`graph`] holds problem instances, cut semantics, the brute-force oracle and
//!   the solution-quality metrics (ground-state probability, step-to-solution).
//! * [`gridparse`] reads MATPOWER bus/branch tables and turns line impedances into
//!   edge weights.
//! * [`rydsim`] is an exact state-vector simulator for the driven Rydberg
//!   Hamiltonian with piecewise pulse schedules.
//! * [`embed`] places graph vertices in the atom plane (force-directed layouts and
//!   register selection).
//! * [`pulseopt`] shapes an adiabatic pulse with Nadam, and [`qaoa`] runs the
//!   local-detuning and ideal-circuit QAOA variants.
//! * [`benchmark`] estimates the fidelity of sampled distributions along the
//!   evolution.
//!
//! Units: every frequency, detuning and interaction strength inside the crate is
//! angular, in rad/μs; times are μs and distances μm. Conversions from the MHz
//! values used in user-facing files live in [`units`].
//!
//! Bit convention: bit `i` of an assignment index is the state of vertex/atom `i`.
//! A set bit means the atom is in the Rydberg state, which is the Z eigenvalue -1
//! and the "cut" side of a MaxCut partition.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod embed;
pub mod error;
pub mod graph;
pub mod gridparse;
pub mod optim;
pub mod pulseopt;
pub mod qaoa;
pub mod rydsim;
pub mod units;

pub use error::{Error, Result};
pub use graph::{
    CutAssignment, Distribution, OracleResult, ProbabilityMap, ShotHistogram, WeightedGraph,
};
pub use rydsim::{Layout, PhysicsConstants, PulseSchedule, SimConfig, StateVector};
