//! Numerical substrate: expectation against a noise density, monotone
//! inversion, scalar minimization and counter-based random streams.

mod optimize;
mod quadrature;
mod rng;
mod roots;

pub use optimize::minimize_scalar;
pub use quadrature::{expect, integrate, Integral, QuadratureSpec};
pub use rng::{split_stream, RngStream};
pub use roots::invert_monotone;
