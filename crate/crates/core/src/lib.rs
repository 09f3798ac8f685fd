//! Numerical toolkit for short-time Lagrangian mean curvature flow with
//! conical singularities.
//!
//! The crate is split along the computational pieces of the theory:
//!
//! * [`link_spectrum`]: spectra of link Laplacians, the exponent set of
//!   homogeneous harmonic functions and the counting functions built on it.
//! * [`sl_cones`]: special Lagrangian cones, moment maps and the stability index.
//! * [`cone_heat`]: the heat equation on model cones, mode by mode, with
//!   discrete-asymptotics extraction and Fredholm index bookkeeping.
//! * [`weighted_norms`]: weighted Hölder/Sobolev norms and decay-rate fits.
//! * [`lmcf_flow`]: the scalar-potential Lagrangian MCF on a flat torus.
//! * [`cli`]: the batch front end used by the `conic-lmcf` binary.

// `!(x > 0.0)` is used on purpose throughout input validation: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cone_heat;
pub mod error;
pub mod link_spectrum;
pub mod lmcf_flow;
pub mod parallel;
pub mod sl_cones;
pub mod weighted_norms;

pub use error::{Error, Result};
