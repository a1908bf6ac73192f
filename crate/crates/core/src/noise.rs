//! Symmetric, zero-median sensing-noise distributions.

use std::f64::consts::{FRAC_1_PI, PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf;

use crate::error::{invalid, Result};
use crate::numerics::RngStream;

/// A density that can be evaluated pointwise together with its score
/// `-p'(x)/p(x)`.
pub trait Density {
    fn pdf(&self, x: f64) -> f64;
    fn score(&self, x: f64) -> f64;
}

/// Sensing-noise law. `scale` is the standard deviation for `Gaussian`, the
/// exponential scale `b` for `Laplacian` and the half-width `γ` for `Cauchy`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    Gaussian { scale: f64 },
    Laplacian { scale: f64 },
    Cauchy { scale: f64 },
}

impl NoiseModel {
    /// Gaussian with the given variance.
    pub fn gaussian_with_variance(variance: f64) -> Self {
        NoiseModel::Gaussian { scale: variance.sqrt() }
    }

    /// Laplacian with the given variance (`variance = 2 b²`).
    pub fn laplacian_with_variance(variance: f64) -> Self {
        NoiseModel::Laplacian {
            scale: (0.5 * variance).sqrt(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            NoiseModel::Gaussian { .. } => "gaussian",
            NoiseModel::Laplacian { .. } => "laplacian",
            NoiseModel::Cauchy { .. } => "cauchy",
        }
    }

    pub fn scale(&self) -> f64 {
        match *self {
            NoiseModel::Gaussian { scale } | NoiseModel::Laplacian { scale } | NoiseModel::Cauchy { scale } => scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.scale();
        if s.is_finite() && s > 0.0 {
            Ok(())
        } else {
            Err(invalid("noise.scale", format!("must be positive and finite, got {s}")))
        }
    }

    /// Variance, or `None` when it does not exist (Cauchy).
    pub fn variance(&self) -> Option<f64> {
        match *self {
            NoiseModel::Gaussian { scale } => Some(scale * scale),
            NoiseModel::Laplacian { scale } => Some(2.0 * scale * scale),
            NoiseModel::Cauchy { .. } => None,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            NoiseModel::Gaussian { scale } => {
                let z = x / scale;
                (-0.5 * z * z).exp() / (scale * (2.0 * PI).sqrt())
            }
            NoiseModel::Laplacian { scale } => (-x.abs() / scale).exp() / (2.0 * scale),
            NoiseModel::Cauchy { scale } => FRAC_1_PI * scale / (scale * scale + x * x),
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            NoiseModel::Gaussian { scale } => {
                let z = x / scale;
                -0.5 * z * z - scale.ln() - 0.5 * (2.0 * PI).ln()
            }
            NoiseModel::Laplacian { scale } => -x.abs() / scale - (2.0 * scale).ln(),
            NoiseModel::Cauchy { scale } => (FRAC_1_PI * scale).ln() - (scale * scale + x * x).ln(),
        }
    }

    /// `-d/dx ln p(x)`. The Laplacian kink at zero maps to 0.
    pub fn score(&self, x: f64) -> f64 {
        match *self {
            NoiseModel::Gaussian { scale } => x / (scale * scale),
            NoiseModel::Laplacian { scale } => {
                if x == 0.0 {
                    0.0
                } else {
                    x.signum() / scale
                }
            }
            NoiseModel::Cauchy { scale } => 2.0 * x / (scale * scale + x * x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            NoiseModel::Gaussian { scale } => 0.5 * erf::erfc(-x / (scale * SQRT_2)),
            NoiseModel::Laplacian { scale } => {
                if x < 0.0 {
                    0.5 * (x / scale).exp()
                } else {
                    1.0 - 0.5 * (-x / scale).exp()
                }
            }
            NoiseModel::Cauchy { scale } => 0.5 + (x / scale).atan() * FRAC_1_PI,
        }
    }

    /// Smallest `T` with `Pr(|n| > T) <= mass`.
    pub fn tail_truncation(&self, mass: f64) -> Result<f64> {
        if !(mass > 0.0 && mass < 1.0) {
            return Err(invalid("mass", format!("must lie in (0, 1), got {mass}")));
        }
        Ok(match *self {
            NoiseModel::Gaussian { scale } => scale * SQRT_2 * erf::erfc_inv(mass),
            NoiseModel::Laplacian { scale } => -scale * mass.ln(),
            NoiseModel::Cauchy { scale } => scale / (0.5 * PI * mass).tan(),
        })
    }

    /// One draw. Laplacian and Cauchy use the inverse CDF of a single uniform.
    pub fn sample_one(&self, stream: &mut RngStream) -> f64 {
        match *self {
            NoiseModel::Gaussian { scale } => scale * stream.standard_normal(),
            NoiseModel::Laplacian { scale } => {
                let u = stream.uniform();
                if u < 0.5 {
                    scale * (2.0 * u).ln()
                } else {
                    -scale * (2.0 * (1.0 - u)).ln()
                }
            }
            NoiseModel::Cauchy { scale } => scale * (PI * (stream.uniform() - 0.5)).tan(),
        }
    }

    pub fn sample(&self, stream: &mut RngStream, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.sample_one(stream)).collect()
    }
}

impl Density for NoiseModel {
    fn pdf(&self, x: f64) -> f64 {
        NoiseModel::pdf(self, x)
    }

    fn score(&self, x: f64) -> f64 {
        NoiseModel::score(self, x)
    }
}
