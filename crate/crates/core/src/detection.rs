//! Binary detection of a known `θ` with bounded transmissions: deflection
//! coefficient, Gaussian moment-matched quadratic fusion rule, Monte Carlo
//! error probability, and the score/density duality of locally optimal
//! nonlinearities.

use std::cell::Cell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::network::Network;
use crate::noise::Density;
use crate::numerics::{integrate, minimize_scalar, split_stream, QuadratureSpec, RngStream};
use crate::transmit::TransmitFunction;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Priors {
    pub p0: f64,
    pub p1: f64,
}

impl Priors {
    pub fn equal() -> Self {
        Self { p0: 0.5, p1: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0 && self.p1 > 0.0 && (self.p0 + self.p1 - 1.0).abs() < 1e-12) {
            return Err(invalid(
                "priors",
                format!("need p0, p1 > 0 with p0 + p1 = 1, got ({}, {})", self.p0, self.p1),
            ));
        }
        Ok(())
    }

    /// `ln(P1 / P0)`.
    pub fn log_ratio(&self) -> f64 {
        (self.p1 / self.p0).ln()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionSetup {
    /// Signal present under H1; `x_i = θ + σ_i n_i` under H1, `σ_i n_i` under H0.
    pub theta: f64,
    pub priors: Priors,
    pub network: Network,
}

impl DetectionSetup {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta.is_finite() && self.theta >= 0.0) {
            return Err(invalid("theta", format!("must be non-negative, got {}", self.theta)));
        }
        self.priors.validate()?;
        self.network.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

/// Pieces of the deflection coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeflectionTerms {
    /// `L⁻¹ Σ_i E[f(θ + σ_i n) − f(σ_i n)]` (before squaring).
    pub mean_shift: f64,
    /// `L⁻¹ Σ_i var[f(σ_i n)]`.
    pub sensing_variance: f64,
    /// `σ_v² / P_T`.
    pub channel_term: f64,
}

impl DeflectionTerms {
    pub fn deflection(&self) -> f64 {
        self.mean_shift * self.mean_shift / (self.sensing_variance + self.channel_term)
    }
}

pub fn deflection_terms(setup: &DetectionSetup) -> Result<DeflectionTerms> {
    let net = &setup.network;
    let l = net.sensors as f64;
    let mut shift = 0.0;
    let mut variance = 0.0;
    for (sigma, count) in net.sigmas.groups(net.sensors) {
        let w = count as f64 / l;
        let g0 = net.mean_transmit(0.0, sigma)?;
        let g1 = if setup.theta == 0.0 {
            g0
        } else {
            net.mean_transmit(setup.theta, sigma)?
        };
        let s0 = net.transmit_second_moment(0.0, sigma)?;
        shift += w * (g1 - g0);
        variance += w * (s0 - g0 * g0);
    }
    Ok(DeflectionTerms {
        mean_shift: shift,
        sensing_variance: variance,
        channel_term: net.channel_noise_var / net.total_power,
    })
}

/// Deflection coefficient `D_L`.
pub fn deflection(setup: &DetectionSetup) -> Result<f64> {
    deflection_terms(setup).map(|t| t.deflection())
}

/// Gain `α` for linear transmission normalizing the mean sensor power
/// under H1 to one: `α = √(L / Σ(θ² + σᵢ²σₙ²))`. Noise without a variance
/// (Cauchy) uses its squared scale in place of `σₙ²`.
pub fn af_transmit_gain(setup: &DetectionSetup) -> Result<f64> {
    let net = &setup.network;
    let var = net.noise.variance().unwrap_or(net.noise.scale().powi(2));
    let power: f64 = (1..=net.sensors)
        .map(|i| setup.theta * setup.theta + net.sigmas.sigma(i).powi(2) * var)
        .sum();
    if !(power > 0.0) {
        return Err(invalid("theta", "linear gain needs nonzero signal or noise power"));
    }
    Ok((net.sensors as f64 / power).sqrt())
}

/// Copy of `setup` transmitting with [`af_transmit_gain`].
pub fn with_af_transmit(setup: &DetectionSetup) -> Result<DetectionSetup> {
    let mut s = setup.clone();
    s.network.transmit = TransmitFunction::Linear {
        alpha: af_transmit_gain(setup)?,
    };
    Ok(s)
}

/// Maximize `D(ω)` over `[lo, hi]` for a transmit kind with a scale
/// parameter. Returns `(ω*, D(ω*))`; ties resolve toward smaller `ω`.
pub fn optimal_omega(setup: &DetectionSetup, lo: f64, hi: f64, grid_points: usize) -> Result<(f64, f64)> {
    if setup.network.transmit.omega().is_none() {
        return Err(Error::UnsupportedKind {
            operation: "optimal_omega",
            kind: setup.network.transmit.kind_name(),
        });
    }
    let failure: Cell<Option<Error>> = Cell::new(None);
    let objective = |omega: f64| -> f64 {
        let run = || -> Result<f64> {
            let mut s = setup.clone();
            s.network.transmit = s.network.transmit.with_omega(omega)?;
            deflection(&s)
        };
        match run() {
            Ok(d) => -d,
            Err(e) => {
                failure.set(Some(e));
                f64::INFINITY
            }
        }
    };
    let (omega, neg) = minimize_scalar(objective, lo, hi, grid_points)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok((omega, -neg))
}

/// Quadratic fusion rule treating `y_L` as Gaussian under each hypothesis
/// with exactly computed first and second moments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianApproxDetector {
    pub mean0: f64,
    pub mean1: f64,
    pub var0: f64,
    pub var1: f64,
    /// `ln(P1 / P0)`.
    pub log_prior_ratio: f64,
}

impl GaussianApproxDetector {
    /// `ln N(y; mean1, var1) − ln N(y; mean0, var0)`.
    pub fn log_likelihood_ratio(&self, y: f64) -> f64 {
        let d1 = y - self.mean1;
        let d0 = y - self.mean0;
        -0.5 * (d1 * d1 / self.var1 - d0 * d0 / self.var0) - 0.5 * (self.var1 / self.var0).ln()
    }

    /// Bayes rule; ties go to H1.
    pub fn decide(&self, y: f64) -> Hypothesis {
        if self.log_likelihood_ratio(y) >= -self.log_prior_ratio {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        }
    }
}

pub fn build_detector(setup: &DetectionSetup) -> Result<GaussianApproxDetector> {
    let net = &setup.network;
    let mut m0 = 0.0;
    let mut m1 = 0.0;
    let mut v0 = 0.0;
    let mut v1 = 0.0;
    for (sigma, count) in net.sigmas.groups(net.sensors) {
        let c = count as f64;
        let a0 = net.mean_transmit(0.0, sigma)?;
        let b0 = net.transmit_second_moment(0.0, sigma)?;
        let (a1, b1) = if setup.theta == 0.0 {
            (a0, b0)
        } else {
            (
                net.mean_transmit(setup.theta, sigma)?,
                net.transmit_second_moment(setup.theta, sigma)?,
            )
        };
        m0 += c * a0;
        m1 += c * a1;
        v0 += c * (b0 - a0 * a0);
        v1 += c * (b1 - a1 * a1);
    }
    let rho = net.per_sensor_power();
    Ok(GaussianApproxDetector {
        mean0: rho.sqrt() * m0,
        mean1: rho.sqrt() * m1,
        var0: rho * v0 + net.channel_noise_var,
        var1: rho * v1 + net.channel_noise_var,
        log_prior_ratio: setup.priors.log_ratio(),
    })
}

/// One Monte Carlo detection trial. When `forced` is `None` the hypothesis
/// is drawn from the priors with one uniform variate before the sensor and
/// channel draws. Returns `(truth, decision)`.
pub(crate) fn detection_trial(
    setup: &DetectionSetup,
    detector: &GaussianApproxDetector,
    stream: &mut RngStream,
    forced: Option<Hypothesis>,
) -> (Hypothesis, Hypothesis) {
    let truth = forced.unwrap_or_else(|| {
        if stream.uniform() < setup.priors.p1 {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        }
    });
    let theta = match truth {
        Hypothesis::H1 => setup.theta,
        Hypothesis::H0 => 0.0,
    };
    let r = setup.network.simulate(theta, stream);
    (truth, detector.decide(r.y))
}

/// Monte Carlo error probability with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorProbability {
    pub pe: f64,
    pub stderr: f64,
    pub trials_h0: usize,
    pub errors_h0: usize,
    pub trials_h1: usize,
    pub errors_h1: usize,
}

impl ErrorProbability {
    /// Hypotheses sampled from the priors: binomial standard error.
    pub(crate) fn sampled(outcomes: &[(Hypothesis, Hypothesis)]) -> Self {
        let mut s = Self::tally(outcomes);
        let n = outcomes.len() as f64;
        let errors = (s.errors_h0 + s.errors_h1) as f64;
        s.pe = errors / n;
        s.stderr = (s.pe * (1.0 - s.pe) / n).sqrt();
        s
    }

    /// Fixed per-hypothesis trial counts: prior-weighted combination.
    pub(crate) fn stratified(outcomes: &[(Hypothesis, Hypothesis)], priors: &Priors) -> Self {
        let mut s = Self::tally(outcomes);
        let rate = |e: usize, n: usize| if n == 0 { 0.0 } else { e as f64 / n as f64 };
        let var = |p: f64, n: usize| if n == 0 { 0.0 } else { p * (1.0 - p) / n as f64 };
        let q0 = rate(s.errors_h0, s.trials_h0);
        let q1 = rate(s.errors_h1, s.trials_h1);
        s.pe = priors.p0 * q0 + priors.p1 * q1;
        s.stderr = (priors.p0.powi(2) * var(q0, s.trials_h0) + priors.p1.powi(2) * var(q1, s.trials_h1)).sqrt();
        s
    }

    fn tally(outcomes: &[(Hypothesis, Hypothesis)]) -> Self {
        let mut s = ErrorProbability {
            pe: 0.0,
            stderr: 0.0,
            trials_h0: 0,
            errors_h0: 0,
            trials_h1: 0,
            errors_h1: 0,
        };
        for &(truth, decision) in outcomes {
            match truth {
                Hypothesis::H0 => {
                    s.trials_h0 += 1;
                    s.errors_h0 += (decision != truth) as usize;
                }
                Hypothesis::H1 => {
                    s.trials_h1 += 1;
                    s.errors_h1 += (decision != truth) as usize;
                }
            }
        }
        s
    }
}

/// Number of H1 trials in a stratified run of `trials`.
pub(crate) fn stratified_h1_count(trials: usize, priors: &Priors) -> usize {
    ((priors.p1 * trials as f64).round() as usize).clamp(1.min(trials), trials.saturating_sub(1).max(1))
}

pub(crate) fn run_trials(
    setup: &DetectionSetup,
    detector: &GaussianApproxDetector,
    trials: usize,
    stream: &RngStream,
    stratified: bool,
) -> Vec<(Hypothesis, Hypothesis)> {
    let n1 = stratified_h1_count(trials, &setup.priors);
    let n0 = trials - n1;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut s = split_stream(stream, stream.stream_id().wrapping_add(t as u64));
            let forced = if !stratified {
                None
            } else if t < n0 {
                Some(Hypothesis::H0)
            } else {
                Some(Hypothesis::H1)
            };
            detection_trial(setup, detector, &mut s, forced)
        })
        .collect()
}

/// `P_e = P0 Pr[error | H0] + P1 Pr[error | H1]` by Monte Carlo over the full
/// pipeline. Trial `t` draws from stream `stream.stream_id() + t`.
pub fn error_probability(setup: &DetectionSetup, trials: usize, stream: &RngStream) -> Result<ErrorProbability> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let detector = build_detector(setup)?;
    let outcomes = run_trials(setup, &detector, trials, stream, false);
    Ok(ErrorProbability::sampled(&outcomes))
}

/// Variant of [`error_probability`] with `round(P1 · trials)` trials under
/// H1 and the rest under H0.
pub fn error_probability_stratified(
    setup: &DetectionSetup,
    trials: usize,
    stream: &RngStream,
) -> Result<ErrorProbability> {
    if trials < 2 {
        return Err(invalid("trials", "stratified sampling needs at least 2 trials"));
    }
    let detector = build_detector(setup)?;
    let outcomes = run_trials(setup, &detector, trials, stream, true);
    Ok(ErrorProbability::stratified(&outcomes, &setup.priors))
}

/// Locally optimal nonlinearity `f(x) = −p'(x)/p(x)` for a density.
pub fn locally_optimal_nonlinearity<D: Density + ?Sized>(model: &D) -> impl Fn(f64) -> f64 + '_ {
    move |x| model.score(x)
}

/// Density `p(x) = C exp(−∫₀ˣ f(y) dy)` for which `f` is the locally optimal
/// nonlinearity, normalized numerically.
#[derive(Clone, Debug)]
pub struct MatchedDensity<F> {
    f: F,
    log_norm: f64,
    spec: QuadratureSpec,
}

const NORMALIZATION_LIMIT: f64 = 1048576.0;

impl<F: Fn(f64) -> f64> MatchedDensity<F> {
    /// `∫₀ˣ f(y) dy`.
    pub fn antiderivative(&self, x: f64) -> Result<f64> {
        antiderivative(&self.f, 0.0, x, &self.spec)
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok((-self.antiderivative(x)? - self.log_norm).exp())
    }

    /// `ln C`.
    pub fn log_normalizer(&self) -> f64 {
        -self.log_norm
    }
}

impl<F: Fn(f64) -> f64> Density for MatchedDensity<F> {
    fn pdf(&self, x: f64) -> f64 {
        MatchedDensity::pdf(self, x).unwrap_or(f64::NAN)
    }

    fn score(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

fn antiderivative<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let v = integrate(f, &[lo, hi], spec).map_err(|e| e.in_integral(|| format!("∫f over [{lo}, {hi}]")))?;
    Ok(sign * v.value)
}

/// Mass of `exp(−F)` on one side of the origin; `direction` is ±1.
fn half_mass<F: Fn(f64) -> f64>(f: &F, direction: f64, spec: &QuadratureSpec) -> Result<f64> {
    let mut total = 0.0;
    let mut left = 0.0f64;
    let mut f_left = 0.0f64;
    let mut right = 1.0f64;
    loop {
        let (a, b) = (direction * left, direction * right);
        let base = f_left;
        let failed = Cell::new(false);
        let integrand = |x: f64| match antiderivative(f, a, x, spec) {
            Ok(v) => (-(base + v)).exp(),
            Err(_) => {
                failed.set(true);
                f64::NAN
            }
        };
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let piece = integrate(integrand, &[lo, hi], spec)
            .map_err(|e| e.in_integral(|| format!("matched density mass over [{lo}, {hi}]")))?;
        if failed.get() || !piece.value.is_finite() {
            return Err(Error::NotNormalizable(format!("non-finite mass on [{lo}, {hi}]")));
        }
        total += piece.value;
        f_left = base + antiderivative(f, a, b, spec)?;
        if right >= 4.0 && piece.value <= 1e-17 * total && (-f_left).exp() * right <= 1e-17 * total {
            return Ok(total);
        }
        if right >= NORMALIZATION_LIMIT {
            return Err(Error::NotNormalizable(format!(
                "tail mass does not vanish by |x| = {NORMALIZATION_LIMIT}"
            )));
        }
        left = right;
        right *= 2.0;
    }
}

pub fn matched_density<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<MatchedDensity<F>> {
    spec.validate()?;
    let mass = half_mass(&f, 1.0, spec)? + half_mass(&f, -1.0, spec)?;
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::NotNormalizable(format!("total mass {mass}")));
    }
    Ok(MatchedDensity {
        f,
        log_norm: mass.ln(),
        spec: *spec,
    })
}
