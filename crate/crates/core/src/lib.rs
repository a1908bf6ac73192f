//! Distributed estimation and detection with bounded sensor transmissions
//! over a Gaussian multiple-access channel.
//!
//! Each of `L` sensors observes `x_i = θ + σ_i n_i` and transmits
//! `√(P_T/L) f(x_i)`; the fusion center receives the superposition plus
//! Gaussian channel noise. The crate evaluates the mean response `h(θ)`,
//! the inversion estimator and its asymptotic variance, the
//! amplify-and-forward baseline, the deflection coefficient, a
//! moment-matched quadratic detector, and Monte Carlo harnesses for all of
//! them.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
mod error;
pub mod estimation;
pub mod harness;
pub mod network;
pub mod noise;
pub mod numerics;
pub mod transmit;

pub use error::{Error, Result};
pub use network::{ChannelRealization, Network, SigmaSequence};
pub use noise::{Density, NoiseModel};
pub use numerics::{QuadratureSpec, RngStream};
pub use transmit::TransmitFunction;
