//! Phase-space simulation of epistemically restricted Liouville mechanics
//! alongside Gaussian quantum mechanics, over the shared means/covariance
//! formalism.
//!
//! Two engines are provided: an analytic one working on means and moment
//! matrices ([`state`], [`measurement`], [`channel`], [`wigner`]) and an
//! ontic Monte Carlo one that samples phase-space points ([`sampler`]).
//! [`protocols`] runs scenarios through both and compares the statistics.
//!
//! Coordinates are interleaved `(q1, p1, q2, p2, …)` throughout.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod mixture;
pub mod protocols;
pub mod random;
pub mod sampler;
pub mod state;
pub mod symplectic;
pub mod wigner;

pub use error::{Error, Result};
pub use mixture::GaussianMixture;
pub use state::{GaussianState, ValidityReport};
pub use symplectic::{PhaseVector, SymplecticKind, SymplecticMap};
