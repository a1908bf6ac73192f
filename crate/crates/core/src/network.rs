//! Sensor field and Gaussian multiple-access channel shared by the
//! estimation and detection pipelines.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::noise::NoiseModel;
use crate::numerics::{expect, QuadratureSpec, RngStream};
use crate::transmit::TransmitFunction;

/// Deterministic per-sensor reliability scales `σ_i`, `i = 1, 2, ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaSequence {
    Constant {
        sigma: f64,
    },
    /// Explicit `σ_1, σ_2, ...`; must cover every sensor.
    ExplicitList {
        values: Vec<f64>,
    },
    /// `σ_i = σ √i`
    SqrtGrowth {
        sigma: f64,
    },
    /// `σ_i = σ i^exponent`
    PowerGrowth {
        sigma: f64,
        exponent: f64,
    },
}

impl SigmaSequence {
    pub fn validate(&self, sensors: usize) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        match self {
            SigmaSequence::Constant { sigma } | SigmaSequence::SqrtGrowth { sigma } => {
                if !positive(*sigma) {
                    return Err(invalid("sigmas.sigma", format!("must be positive, got {sigma}")));
                }
            }
            SigmaSequence::PowerGrowth { sigma, exponent } => {
                if !positive(*sigma) {
                    return Err(invalid("sigmas.sigma", format!("must be positive, got {sigma}")));
                }
                if !exponent.is_finite() {
                    return Err(invalid("sigmas.exponent", "must be finite"));
                }
            }
            SigmaSequence::ExplicitList { values } => {
                if values.len() < sensors {
                    return Err(invalid(
                        "sigmas.values",
                        format!("{} entries for {} sensors", values.len(), sensors),
                    ));
                }
                if let Some(bad) = values.iter().find(|v| !positive(**v)) {
                    return Err(invalid("sigmas.values", format!("entries must be positive, got {bad}")));
                }
            }
        }
        Ok(())
    }

    /// `σ_i` for the 1-based sensor index `i`.
    pub fn sigma(&self, i: usize) -> f64 {
        match self {
            SigmaSequence::Constant { sigma } => *sigma,
            SigmaSequence::ExplicitList { values } => values[i - 1],
            SigmaSequence::SqrtGrowth { sigma } => sigma * (i as f64).sqrt(),
            SigmaSequence::PowerGrowth { sigma, exponent } => sigma * (i as f64).powf(*exponent),
        }
    }

    /// Distinct `σ` values among the first `sensors` entries with their
    /// multiplicities, in order of first appearance.
    pub fn groups(&self, sensors: usize) -> Vec<(f64, usize)> {
        match self {
            SigmaSequence::Constant { sigma } => vec![(*sigma, sensors)],
            _ => {
                let mut out: Vec<(f64, usize)> = Vec::new();
                let mut index: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
                for i in 1..=sensors {
                    let s = self.sigma(i);
                    match index.get(&s.to_bits()) {
                        Some(&k) => out[k].1 += 1,
                        None => {
                            index.insert(s.to_bits(), out.len());
                            out.push((s, 1));
                        }
                    }
                }
                out
            }
        }
    }

    pub fn is_unit_constant(&self) -> bool {
        matches!(self, SigmaSequence::Constant { sigma } if *sigma == 1.0)
    }
}

/// `L` sensors with a shared noise law and transmit map, superposed over a
/// Gaussian MAC under total power `P_T` with channel-noise variance `σ_v²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    pub sensors: usize,
    pub sigmas: SigmaSequence,
    pub noise: NoiseModel,
    pub transmit: TransmitFunction,
    pub total_power: f64,
    pub channel_noise_var: f64,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

/// One received MAC output and its `1/√L`-normalized version.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelRealization {
    pub y: f64,
    pub z: f64,
}

impl Network {
    pub fn validate(&self) -> Result<()> {
        if self.sensors == 0 {
            return Err(invalid("sensors", "must be at least 1"));
        }
        if !(self.total_power.is_finite() && self.total_power > 0.0) {
            return Err(invalid(
                "total_power",
                format!("must be positive, got {}", self.total_power),
            ));
        }
        if !(self.channel_noise_var.is_finite() && self.channel_noise_var > 0.0) {
            return Err(invalid(
                "channel_noise_var",
                format!("must be positive, got {}", self.channel_noise_var),
            ));
        }
        self.sigmas.validate(self.sensors)?;
        self.noise.validate()?;
        self.transmit.validate()?;
        self.quadrature.validate()
    }

    /// Per-sensor power factor `ρ = P_T / L`.
    pub fn per_sensor_power(&self) -> f64 {
        self.total_power / self.sensors as f64
    }

    /// `E[g(θ + σ n)]` over the sensing noise, with the transmit map's
    /// breakpoints passed to the quadrature.
    pub fn measurement_expectation<G: Fn(f64) -> f64>(&self, theta: f64, sigma: f64, g: G) -> Result<f64> {
        let breaks: Vec<f64> = self
            .transmit
            .breakpoints()
            .into_iter()
            .map(|x| (x - theta) / sigma)
            .collect();
        expect(&self.noise, |n| g(theta + sigma * n), &breaks, &self.quadrature)
    }

    /// `E[f(θ + σ n)]`, written `g_σ(θ)`.
    pub fn mean_transmit(&self, theta: f64, sigma: f64) -> Result<f64> {
        let f = &self.transmit;
        self.measurement_expectation(theta, sigma, |x| f.eval(x)).map_err(|e| {
            e.in_integral(|| {
                format!(
                    "E[f(θ+σn)] with f={}, noise={}, θ={theta}, σ={sigma}",
                    f.kind_name(),
                    self.noise.kind_name()
                )
            })
        })
    }

    /// `E[f(θ + σ n)²]`.
    pub fn transmit_second_moment(&self, theta: f64, sigma: f64) -> Result<f64> {
        let f = &self.transmit;
        self.measurement_expectation(theta, sigma, |x| f.eval(x).powi(2))
            .map_err(|e| {
                e.in_integral(|| {
                    format!(
                        "E[f²(θ+σn)] with f={}, noise={}, θ={theta}, σ={sigma}",
                        f.kind_name(),
                        self.noise.kind_name()
                    )
                })
            })
    }

    /// Deterministic superposition `y = √ρ Σ f(θ + σ_i n_i) + v` for given draws.
    pub fn superpose(&self, theta: f64, sensing: &[f64], channel: f64) -> ChannelRealization {
        debug_assert_eq!(sensing.len(), self.sensors);
        let sum: f64 = sensing
            .iter()
            .enumerate()
            .map(|(k, n)| self.transmit.eval(theta + self.sigmas.sigma(k + 1) * n))
            .sum();
        self.realization(sum, channel)
    }

    fn realization(&self, transmit_sum: f64, channel: f64) -> ChannelRealization {
        let root_l = (self.sensors as f64).sqrt();
        let z = (self.per_sensor_power().sqrt() * transmit_sum + channel) / root_l;
        // y is rebuilt from z so that z·√L == y holds bit for bit.
        ChannelRealization { y: z * root_l, z }
    }

    /// Draw one MAC output. Consumes exactly one variate per sensor, in
    /// ascending sensor order, then one for the channel.
    pub fn simulate(&self, theta: f64, stream: &mut RngStream) -> ChannelRealization {
        let mut sum = 0.0;
        for i in 1..=self.sensors {
            let n = self.noise.sample_one(stream);
            sum += self.transmit.eval(theta + self.sigmas.sigma(i) * n);
        }
        let v = self.channel_noise_var.sqrt() * stream.standard_normal();
        self.realization(sum, v)
    }

    /// Same as [`Network::simulate`] but also records the largest
    /// instantaneous per-sensor power `ρ f(x_i)²` seen.
    pub fn simulate_with_peak_power(&self, theta: f64, stream: &mut RngStream) -> (ChannelRealization, f64) {
        let rho = self.per_sensor_power();
        let mut sum = 0.0;
        let mut peak = 0.0f64;
        for i in 1..=self.sensors {
            let n = self.noise.sample_one(stream);
            let fx = self.transmit.eval(theta + self.sigmas.sigma(i) * n);
            peak = peak.max(rho * fx * fx);
            sum += fx;
        }
        let v = self.channel_noise_var.sqrt() * stream.standard_normal();
        (self.realization(sum, v), peak)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn network(transmit: TransmitFunction, sensors: usize) -> Network {
        Network {
            sensors,
            sigmas: SigmaSequence::Constant { sigma: 1.0 },
            noise: NoiseModel::Gaussian { scale: 1.0 },
            transmit,
            total_power: 10.0,
            channel_noise_var: 1.0,
            quadrature: QuadratureSpec::default(),
        }
    }

    #[test]
    fn zero_noise_tanh_at_zero() {
        let net = network(TransmitFunction::Tanh { omega: 1.0 }, 7);
        let r = net.superpose(0.0, &[0.0; 7], 0.0);
        assert_eq!(r.y, 0.0);
    }

    #[test]
    fn zero_noise_linear_arithmetic() {
        let mut net = network(TransmitFunction::Linear { alpha: 1.0 }, 16);
        net.total_power = 16.0;
        let r = net.superpose(1.0, &[0.0; 16], 0.0);
        assert_eq!(r.y, 16.0);
        assert_eq!(r.z * 4.0, r.y);
    }

    #[test]
    fn draw_order_accounting() {
        let net = network(TransmitFunction::Tanh { omega: 1.0 }, 25);
        let mut s = RngStream::new(3, 11);
        net.simulate(1.0, &mut s);
        assert_eq!(s.counter(), 26);
        net.simulate(1.0, &mut s);
        assert_eq!(s.counter(), 52);
    }

    #[test]
    fn simulate_matches_superpose_of_same_draws() {
        let mut net = network(TransmitFunction::Rational { omega: 0.7 }, 9);
        net.sigmas = SigmaSequence::SqrtGrowth { sigma: 0.5 };
        net.noise = NoiseModel::Laplacian { scale: 0.8 };
        let mut a = RngStream::new(5, 2);
        let r = net.simulate(0.4, &mut a);
        let mut b = RngStream::new(5, 2);
        let draws = net.noise.sample(&mut b, 9);
        let v = b.standard_normal();
        let r2 = net.superpose(0.4, &draws, v);
        assert!((r.y - r2.y).abs() < 1e-12);
    }

    #[test]
    fn sigma_groups() {
        assert_eq!(SigmaSequence::Constant { sigma: 2.0 }.groups(10), vec![(2.0, 10)]);
        let list = SigmaSequence::ExplicitList {
            values: vec![1.0, 2.0, 1.0, 3.0, 2.0],
        };
        assert_eq!(list.groups(5), vec![(1.0, 2), (2.0, 2), (3.0, 1)]);
        assert!(list.validate(6).is_err());
        let g = SigmaSequence::SqrtGrowth { sigma: 2.0 }.groups(4);
        assert_eq!(g.len(), 4);
        assert_eq!(g[3].0, 4.0);
    }

    #[test]
    fn network_validation() {
        let mut net = network(TransmitFunction::Tanh { omega: 1.0 }, 5);
        assert!(net.validate().is_ok());
        net.sensors = 0;
        assert!(net.validate().is_err());
    }
}
