//! Inversion estimator `θ̂ = h⁻¹(z / √P_T)`, its asymptotic variance, and the
//! amplify-and-forward baseline.

use crate::error::{Error, Result};
use crate::network::Network;
use crate::numerics::invert_monotone;

/// Margin kept between a clamped target and the open range of `h`.
pub const CLAMP_MARGIN: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct EstimationSetup {
    pub theta: f64,
    pub network: Network,
}

impl EstimationSetup {
    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() {
            return Err(crate::error::invalid("theta", "must be finite"));
        }
        self.network.validate()
    }
}

/// Finite-`L` mean response `h_L(θ) = L⁻¹ Σ_i E[f(θ + σ_i n_i)]`, with one
/// quadrature per distinct `σ`.
#[derive(Clone, Debug)]
pub struct MeanResponse<'a> {
    network: &'a Network,
    groups: Vec<(f64, usize)>,
}

impl<'a> MeanResponse<'a> {
    pub fn new(network: &'a Network) -> Self {
        Self {
            network,
            groups: network.sigmas.groups(network.sensors),
        }
    }

    // Per-group weights keep a single group's average exact.
    fn weight(&self, count: usize) -> f64 {
        count as f64 / self.network.sensors as f64
    }

    pub fn distinct_sigmas(&self) -> usize {
        self.groups.len()
    }

    pub fn eval(&self, theta: f64) -> Result<f64> {
        let mut acc = 0.0;
        for &(sigma, count) in &self.groups {
            acc += self.weight(count) * self.network.mean_transmit(theta, sigma)?;
        }
        Ok(acc)
    }

    /// `h_L'(θ) = L⁻¹ Σ_i E[f'(θ + σ_i n_i)]`.
    pub fn derivative(&self, theta: f64) -> Result<f64> {
        let f = &self.network.transmit;
        f.derivative(0.0)?;
        let mut acc = 0.0;
        for &(sigma, count) in &self.groups {
            let d = self
                .network
                .measurement_expectation(theta, sigma, |x| f.derivative(x).unwrap_or(f64::NAN))
                .map_err(|e| e.in_integral(|| format!("E[f'(θ+σn)] with f={}, θ={theta}, σ={sigma}", f.kind_name())))?;
            acc += self.weight(count) * d;
        }
        Ok(acc)
    }
}

pub fn mean_response(setup: &EstimationSetup, theta: f64) -> Result<f64> {
    MeanResponse::new(&setup.network).eval(theta)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub theta_hat: f64,
    /// The normalized target fell outside the range of `h` and was clamped.
    pub clamped: bool,
}

const TABLE_HALF_WIDTH: f64 = 20.0;
const TABLE_NODES: usize = 401;
const TABLE_MAX_GROUPS: usize = 8;

/// Inverts `h_L` for a fixed network. Precomputes a coarse table of `h_L`
/// when it is cheap so that each inversion starts from a tight bracket.
#[derive(Clone, Debug)]
pub struct Estimator<'a> {
    response: MeanResponse<'a>,
    total_power: f64,
    open_range: Option<(f64, f64)>,
    table: Vec<(f64, f64)>,
}

impl<'a> Estimator<'a> {
    pub fn new(network: &'a Network) -> Result<Self> {
        if !network.transmit.is_invertible() {
            return Err(Error::UnsupportedKind {
                operation: "estimate",
                kind: network.transmit.kind_name(),
            });
        }
        let response = MeanResponse::new(network);
        let table = if response.distinct_sigmas() <= TABLE_MAX_GROUPS {
            let step = 2.0 * TABLE_HALF_WIDTH / (TABLE_NODES - 1) as f64;
            (0..TABLE_NODES)
                .map(|k| {
                    let t = -TABLE_HALF_WIDTH + step * k as f64;
                    response.eval(t).map(|h| (t, h))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            response,
            total_power: network.total_power,
            open_range: network.transmit.bound().map(|c| (-c, c)),
            table,
        })
    }

    pub fn mean_response(&self) -> &MeanResponse<'a> {
        &self.response
    }

    fn bracket_for(&self, target: f64) -> (f64, f64) {
        if self.table.is_empty() {
            return (-1.0, 1.0);
        }
        let idx = self.table.partition_point(|&(_, h)| h < target);
        if idx == 0 {
            (self.table[0].0 - 1.0, self.table[0].0)
        } else if idx == self.table.len() {
            let last = self.table[idx - 1].0;
            (last, last + 1.0)
        } else {
            (self.table[idx - 1].0, self.table[idx].0)
        }
    }

    /// `θ̂ = h_L⁻¹(z / √P_T)`.
    pub fn estimate(&self, received_z: f64) -> Result<Estimate> {
        let mut target = received_z / self.total_power.sqrt();
        let mut clamped = false;
        if let Some((lo, hi)) = self.open_range {
            if target > hi - CLAMP_MARGIN {
                target = hi - CLAMP_MARGIN;
                clamped = true;
            } else if target < lo + CLAMP_MARGIN {
                target = lo + CLAMP_MARGIN;
                clamped = true;
            }
        }
        let theta_hat = invert_monotone(|t| self.response.eval(t), target, self.bracket_for(target))?;
        Ok(Estimate { theta_hat, clamped })
    }
}

pub fn estimate(setup: &EstimationSetup, received_z: f64) -> Result<Estimate> {
    Estimator::new(&setup.network)?.estimate(received_z)
}

/// Variance of the limiting normal law of `√L (θ̂_L − θ)`:
///
/// `AsV = (E[f²(θ+n)] − h²(θ) + σ_v²/P_T) / E[f'(θ+n)]²`
///
/// Requires unit `σ_i` and a differentiable transmit map.
pub fn asymptotic_variance(setup: &EstimationSetup) -> Result<f64> {
    let net = &setup.network;
    if !net.sigmas.is_unit_constant() {
        return Err(Error::Precondition(
            "asymptotic variance requires constant unit sensor scales".into(),
        ));
    }
    if !net.transmit.is_differentiable() {
        return Err(Error::Precondition(format!(
            "asymptotic variance requires a differentiable transmit map, got `{}`",
            net.transmit.kind_name()
        )));
    }
    let theta = setup.theta;
    let h = net.mean_transmit(theta, 1.0)?;
    let second = net.transmit_second_moment(theta, 1.0)?;
    let slope = MeanResponse::new(net).derivative(theta)?;
    Ok((second - h * h + net.channel_noise_var / net.total_power) / (slope * slope))
}

/// Power-normalizing AF gain `α_L = √(P_T / Σ_i (θ² + σ_i² σ_n²))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AfGain {
    pub alpha: f64,
    /// `σ_n² = 1` was substituted because the noise variance does not exist.
    pub nominal_variance: bool,
}

/// The gain uses the true `θ`, as the power normalization requires.
pub fn af_gain(setup: &EstimationSetup) -> AfGain {
    let net = &setup.network;
    let (var, nominal_variance) = match net.noise.variance() {
        Some(v) => (v, false),
        None => (1.0, true),
    };
    let theta2 = setup.theta * setup.theta;
    let power_sum: f64 = (1..=net.sensors)
        .map(|i| {
            let s = net.sigmas.sigma(i);
            theta2 + s * s * var
        })
        .sum();
    AfGain {
        alpha: (net.total_power / power_sum).sqrt(),
        nominal_variance,
    }
}

/// AF estimate `y_L / (L α_L)` from one set of sensing draws `n_i` and one
/// channel draw `v`, i.e. `θ + L⁻¹ Σ σ_i n_i + v / (L α_L)`.
pub fn af_estimate(setup: &EstimationSetup, sensing: &[f64], channel: f64) -> f64 {
    af_estimate_with_gain(setup, af_gain(setup).alpha, sensing, channel)
}

pub(crate) fn af_estimate_with_gain(setup: &EstimationSetup, alpha: f64, sensing: &[f64], channel: f64) -> f64 {
    let net = &setup.network;
    let l = net.sensors as f64;
    let spread: f64 = sensing
        .iter()
        .enumerate()
        .map(|(k, n)| net.sigmas.sigma(k + 1) * n)
        .sum();
    setup.theta + spread / l + channel / (l * alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::SigmaSequence;
    use crate::noise::NoiseModel;
    use crate::numerics::QuadratureSpec;
    use crate::transmit::TransmitFunction;
    use approx::assert_relative_eq;

    fn setup(transmit: TransmitFunction, noise: NoiseModel) -> EstimationSetup {
        EstimationSetup {
            theta: 1.0,
            network: Network {
                sensors: 500,
                sigmas: SigmaSequence::Constant { sigma: 1.0 },
                noise,
                transmit,
                total_power: 10.0,
                channel_noise_var: 1.0,
                quadrature: QuadratureSpec::default(),
            },
        }
    }

    const NOISES: [NoiseModel; 3] = [
        NoiseModel::Gaussian { scale: 1.0 },
        NoiseModel::Laplacian {
            scale: std::f64::consts::FRAC_1_SQRT_2,
        },
        NoiseModel::Cauchy { scale: 1.0 },
    ];

    #[test]
    fn odd_transmit_has_zero_mean_response_at_origin() {
        for noise in NOISES {
            for sigma in [0.3, 1.0, 4.0] {
                let mut s = setup(TransmitFunction::Tanh { omega: 0.75 }, noise);
                s.network.sigmas = SigmaSequence::Constant { sigma };
                assert!(mean_response(&s, 0.0).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mean_response_saturates() {
        for noise in NOISES {
            let s = setup(TransmitFunction::Tanh { omega: 0.75 }, noise);
            let h = mean_response(&s, 1e7).unwrap();
            assert!((h - 1.0).abs() < 1e-6, "{noise:?}: {h}");
        }
    }

    #[test]
    fn linear_mean_response_is_exact() {
        let s = setup(
            TransmitFunction::Linear { alpha: 2.5 },
            NoiseModel::Gaussian { scale: 1.3 },
        );
        for theta in [-3.0, 0.2, 1.7] {
            assert_relative_eq!(mean_response(&s, theta).unwrap(), 2.5 * theta, max_relative = 1e-10);
        }
    }

    #[test]
    fn mean_response_is_odd() {
        for noise in NOISES {
            let mut s = setup(TransmitFunction::Rational { omega: 1.4 }, noise);
            s.network.sigmas = SigmaSequence::ExplicitList {
                values: (0..500).map(|i| 0.5 + (i % 3) as f64).collect(),
            };
            for theta in [0.1, 0.9, 2.5, 4.0] {
                let a = mean_response(&s, theta).unwrap();
                let b = mean_response(&s, -theta).unwrap();
                assert!((a + b).abs() < 1e-9, "{noise:?} {theta}: {a} {b}");
            }
        }
    }

    #[test]
    fn noiseless_round_trip() {
        for noise in NOISES {
            for transmit in [
                TransmitFunction::Tanh { omega: 0.75 },
                TransmitFunction::Gudermannian { omega: 2.0 },
                TransmitFunction::Rational { omega: 0.4 },
            ] {
                let s = setup(transmit, noise);
                let est = Estimator::new(&s.network).unwrap();
                for theta0 in [-2.3, 0.0, 0.6, 1.0, 3.7] {
                    let z = s.network.total_power.sqrt() * mean_response(&s, theta0).unwrap();
                    let e = est.estimate(z).unwrap();
                    assert!(!e.clamped);
                    assert!(
                        (e.theta_hat - theta0).abs() < 1e-8,
                        "{transmit:?} {noise:?} {theta0}: {}",
                        e.theta_hat
                    );
                }
            }
        }
    }

    #[test]
    fn zero_received_signal_estimates_zero() {
        let s = setup(
            TransmitFunction::Tanh { omega: 0.75 },
            NoiseModel::Cauchy { scale: 1.0 },
        );
        assert!(estimate(&s, 0.0).unwrap().theta_hat.abs() < 1e-9);
    }

    #[test]
    fn out_of_range_target_is_clamped() {
        let s = setup(
            TransmitFunction::Tanh { omega: 0.75 },
            NoiseModel::Gaussian { scale: 1.0 },
        );
        let e = estimate(&s, 2.0 * s.network.total_power.sqrt()).unwrap();
        assert!(e.clamped);
        let h = mean_response(&s, e.theta_hat).unwrap();
        assert!((h - (1.0 - CLAMP_MARGIN)).abs() < 1e-10);
        let e = estimate(&s, -5.0).unwrap();
        assert!(e.clamped && e.theta_hat < 0.0);
    }

    #[test]
    fn quantizer_is_not_invertible() {
        let s = setup(
            TransmitFunction::UniformQuantizer { x_max: 1.0, levels: 3 },
            NoiseModel::Gaussian { scale: 1.0 },
        );
        assert!(matches!(estimate(&s, 0.1), Err(Error::UnsupportedKind { .. })));
    }

    #[test]
    fn linear_asymptotic_variance_closed_form() {
        for (alpha, sn) in [(1.0, 1.0), (0.3, 2.0), (4.0, 0.5)] {
            let mut s = setup(TransmitFunction::Linear { alpha }, NoiseModel::Gaussian { scale: sn });
            s.network.total_power = 7.0;
            s.network.channel_noise_var = 1.7;
            let expected = sn * sn + 1.7 / (7.0 * alpha * alpha);
            assert_relative_eq!(asymptotic_variance(&s).unwrap(), expected, max_relative = 1e-6);
        }
    }

    #[test]
    fn asymptotic_variance_is_positive() {
        for noise in NOISES {
            for omega in [0.3, 1.0, 3.0] {
                let mut s = setup(TransmitFunction::Tanh { omega }, noise);
                s.network.channel_noise_var = 1e-12;
                assert!(asymptotic_variance(&s).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn asymptotic_variance_preconditions() {
        let mut s = setup(
            TransmitFunction::Tanh { omega: 1.0 },
            NoiseModel::Gaussian { scale: 1.0 },
        );
        s.network.sigmas = SigmaSequence::Constant { sigma: 2.0 };
        assert!(matches!(asymptotic_variance(&s), Err(Error::Precondition(_))));
        let s = setup(
            TransmitFunction::UniformQuantizer { x_max: 1.0, levels: 3 },
            NoiseModel::Gaussian { scale: 1.0 },
        );
        assert!(matches!(asymptotic_variance(&s), Err(Error::Precondition(_))));
    }

    #[test]
    fn af_without_noise_recovers_theta() {
        let mut s = setup(
            TransmitFunction::Linear { alpha: 1.0 },
            NoiseModel::Gaussian { scale: 1.0 },
        );
        s.theta = 0.37;
        assert_eq!(af_estimate(&s, &vec![0.0; 500], 0.0), 0.37);
    }

    #[test]
    fn af_gain_values() {
        let mut s = setup(
            TransmitFunction::Linear { alpha: 1.0 },
            NoiseModel::Gaussian { scale: 1.0 },
        );
        s.network.sensors = 4;
        s.network.sigmas = SigmaSequence::SqrtGrowth { sigma: 1.0 };
        // Σ (1 + i) for i = 1..4 = 14.
        let g = af_gain(&s);
        assert_relative_eq!(g.alpha, (10.0f64 / 14.0).sqrt(), max_relative = 1e-15);
        assert!(!g.nominal_variance);
        s.network.noise = NoiseModel::Cauchy { scale: 1.0 };
        assert!(af_gain(&s).nominal_variance);
    }
}
