//! Sensor transmit nonlinearities.
//!
//! The smooth bounded kinds (`tanh`, `gudermannian`, `rational`) are
//! normalized so that `sup |f| = 1`. The uniform quantizer uses half-open
//! cells `[(k - 1/2)Δ, (k + 1/2)Δ)` with `Δ = 2 x_max / M` and saturates at
//! `±K Δ`, `K = (M - 1) / 2`.

use std::f64::consts::FRAC_2_PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransmitFunction {
    /// `tanh(ω x)`
    Tanh { omega: f64 },
    /// `(2/π) arctan(sinh(ω x))`
    Gudermannian { omega: f64 },
    /// `ω x / (1 + |ω x|)`
    Rational { omega: f64 },
    /// `sign(x) |x|^p`, unbounded; evaluation only.
    SignedPower { p_exponent: f64 },
    UniformQuantizer {
        x_max: f64,
        #[serde(rename = "M")]
        levels: u32,
    },
    /// Amplify-and-forward `α x`.
    Linear { alpha: f64 },
}

impl TransmitFunction {
    pub fn kind_name(&self) -> &'static str {
        match self {
            TransmitFunction::Tanh { .. } => "tanh",
            TransmitFunction::Gudermannian { .. } => "gudermannian",
            TransmitFunction::Rational { .. } => "rational",
            TransmitFunction::SignedPower { .. } => "signed_power",
            TransmitFunction::UniformQuantizer { .. } => "uniform_quantizer",
            TransmitFunction::Linear { .. } => "linear",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        match *self {
            TransmitFunction::Tanh { omega }
            | TransmitFunction::Gudermannian { omega }
            | TransmitFunction::Rational { omega } => positive("transmit.omega", omega),
            TransmitFunction::SignedPower { p_exponent } => {
                if p_exponent > 0.0 && p_exponent < 0.5 {
                    Ok(())
                } else {
                    Err(invalid(
                        "transmit.p_exponent",
                        format!("must lie in (0, 1/2), got {p_exponent}"),
                    ))
                }
            }
            TransmitFunction::UniformQuantizer { x_max, levels } => {
                positive("transmit.x_max", x_max)?;
                if levels >= 3 && levels % 2 == 1 {
                    Ok(())
                } else {
                    Err(invalid(
                        "transmit.M",
                        format!("must be an odd integer >= 3, got {levels}"),
                    ))
                }
            }
            TransmitFunction::Linear { alpha } => positive("transmit.alpha", alpha),
        }
    }

    /// Quantizer step `Δ` and saturation index `K`.
    fn quantizer_geometry(x_max: f64, levels: u32) -> (f64, f64) {
        (2.0 * x_max / levels as f64, ((levels - 1) / 2) as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TransmitFunction::Tanh { omega } => (omega * x).tanh(),
            TransmitFunction::Gudermannian { omega } => FRAC_2_PI * 2.0 * (0.5 * omega * x).tanh().atan(),
            TransmitFunction::Rational { omega } => {
                let u = omega * x;
                u / (1.0 + u.abs())
            }
            TransmitFunction::SignedPower { p_exponent } => {
                if x == 0.0 {
                    0.0
                } else {
                    x.signum() * x.abs().powf(p_exponent)
                }
            }
            TransmitFunction::UniformQuantizer { x_max, levels } => {
                let (delta, k_max) = Self::quantizer_geometry(x_max, levels);
                (x / delta + 0.5).floor().clamp(-k_max, k_max) * delta
            }
            TransmitFunction::Linear { alpha } => alpha * x,
        }
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        match *self {
            TransmitFunction::Tanh { omega } => {
                let c = (omega * x).cosh();
                Ok(omega / (c * c))
            }
            TransmitFunction::Gudermannian { omega } => Ok(FRAC_2_PI * omega / (omega * x).cosh()),
            TransmitFunction::Rational { omega } => {
                let d = 1.0 + (omega * x).abs();
                Ok(omega / (d * d))
            }
            TransmitFunction::Linear { alpha } => Ok(alpha),
            TransmitFunction::SignedPower { .. } | TransmitFunction::UniformQuantizer { .. } => {
                Err(Error::UnsupportedKind {
                    operation: "derivative",
                    kind: self.kind_name(),
                })
            }
        }
    }

    /// `sup |f|`, or `None` for unbounded kinds.
    pub fn bound(&self) -> Option<f64> {
        match *self {
            TransmitFunction::Tanh { .. }
            | TransmitFunction::Gudermannian { .. }
            | TransmitFunction::Rational { .. } => Some(1.0),
            TransmitFunction::UniformQuantizer { x_max, levels } => {
                let (delta, k_max) = Self::quantizer_geometry(x_max, levels);
                Some(k_max * delta)
            }
            TransmitFunction::SignedPower { .. } | TransmitFunction::Linear { .. } => None,
        }
    }

    /// Strictly increasing and differentiable everywhere.
    pub fn is_invertible(&self) -> bool {
        !matches!(self, TransmitFunction::UniformQuantizer { .. })
    }

    pub fn is_differentiable(&self) -> bool {
        self.derivative(0.0).is_ok()
    }

    pub fn omega(&self) -> Option<f64> {
        match *self {
            TransmitFunction::Tanh { omega }
            | TransmitFunction::Gudermannian { omega }
            | TransmitFunction::Rational { omega } => Some(omega),
            _ => None,
        }
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        let f = match *self {
            TransmitFunction::Tanh { .. } => TransmitFunction::Tanh { omega },
            TransmitFunction::Gudermannian { .. } => TransmitFunction::Gudermannian { omega },
            TransmitFunction::Rational { .. } => TransmitFunction::Rational { omega },
            _ => {
                return Err(Error::UnsupportedKind {
                    operation: "with_omega",
                    kind: self.kind_name(),
                })
            }
        };
        f.validate()?;
        Ok(f)
    }

    /// Abscissae where `f` jumps or has a kink, plus the origin where every
    /// kind changes sign.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            TransmitFunction::UniformQuantizer { x_max, levels } => {
                let (delta, k_max) = Self::quantizer_geometry(x_max, levels);
                let k = k_max as i64;
                let mut edges: Vec<f64> = (-k - 1..=k).map(|j| (j as f64 + 0.5) * delta).collect();
                edges.push(0.0);
                edges.sort_by(f64::total_cmp);
                edges
            }
            _ => vec![0.0],
        }
    }
}
