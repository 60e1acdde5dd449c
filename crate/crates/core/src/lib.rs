//! Forward models and inverse pipelines for the nuclear-spin Λ system of
//! Tm³⁺ ions in YAG.
//!
//! The crate is layered bottom-up:
//!
//! * [`geometry`]: the six orientationally inequivalent substitution sites,
//!   site-local field coordinates and polarization selection.
//! * [`zeeman`]: gyromagnetic tensors, Zeeman splittings, nuclear-spin mixing
//!   and the branching ratio `R = μw²/μs²`.
//! * [`popdyn`]: the four resonant ion classes, optical-pumping steady state,
//!   hole/antihole spectra and sublevel population decay.
//! * [`coherent`]: optical nutation, optical-density algebra, photon-echo
//!   scaling and π-pulse arithmetic, plus the Bessel functions they need.
//! * [`analysis`]: nonlinear fits and both branching-ratio extraction routes.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod coherent;
pub mod error;
pub mod geometry;
pub mod numeric;
pub mod popdyn;
pub mod trace;
pub mod zeeman;

pub use error::{Error, Result};
pub use trace::Trace;
