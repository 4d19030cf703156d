//! Coherent leakage of a superconducting qubit into microwave-package cavity
//! modes.
//!
//! The crate is split along the workflow:
//!
//! * [`physics`]: closed-form cavity electromagnetics and Jaynes-Cummings
//!   relations (mode frequencies, zero-point fields, dressed states, Purcell).
//! * [`bloch`]: the semiclassical Maxwell-Bloch integrator and the
//!   depolarizing error probability derived from it.
//! * [`fencing`]: half-wave fencing combinatorics and wire layouts.
//! * [`helmholtz`]: a 2D Dirichlet eigenmode solver for the cavity
//!   cross-section with conducting wire inclusions.
//! * [`pinning`]: the iterative antinode pinning algorithm.
//! * [`analysis`]: leakage sweeps, multi-mode budgets and the anticrossing fit.
//! * [`export`]: CSV / PGM / SVG interchange formats.

// `!(x > 0.0)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bloch;
pub mod constants;
pub mod error;
pub mod export;
pub mod fencing;
pub mod helmholtz;
pub mod physics;
pub mod pinning;

pub use error::{Error, Result};
