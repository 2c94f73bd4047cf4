//! Synchronization certificates for networks of Chua oscillators coupled
//! through their first state coordinate by a sector-bounded nonlinearity.
//!
//! The crate builds the comparison matrix of a network, decides whether it is
//! Hurwitz, and validates the result by integrating the network, its error
//! dynamics and the comparison system with a fixed-step Runge–Kutta scheme.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command
//! line live in the `chua-sync` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
mod math;

pub mod certificate;
pub mod coupling;
pub mod matrix;
pub mod model;
pub mod simulate;
pub mod spectral;
pub mod topology;

pub use certificate::{Certificate, ComparisonState, GainSearch};
pub use coupling::{CouplingKind, SectorCoupling, SectorReport};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use model::{ChuaParams, NodeState};
pub use num_complex::Complex64;
pub use simulate::{ErrorSeries, NetworkState, NodeError, Trajectory};

pub use spectral::Spectrum;
pub use topology::{AuxMatrices, ResidualCoefficients, Topology};
