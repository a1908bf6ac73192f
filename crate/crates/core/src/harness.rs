//! Monte Carlo experiment engine.
//!
//! Trial `t` of a run draws exclusively from stream
//! `(master_seed, stream_base + t)`; sweep point `k` uses
//! `stream_base = k << 32`. Trials run on the ambient rayon pool and are
//! collected in trial order, so every summary is bit-identical for any
//! number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{self, DetectionSetup, ErrorProbability, Hypothesis};
use crate::error::{invalid, Result};
use crate::estimation::{af_gain, EstimationSetup, Estimator};
use crate::network::{ChannelRealization, Network, SigmaSequence};
use crate::numerics::RngStream;

pub fn simulate_channel(network: &Network, theta: f64, stream: &mut RngStream) -> ChannelRealization {
    network.simulate(theta, stream)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `θ` with `θ²/σₙ²` equal to `snr_db`.
pub fn theta_from_sensing_snr_db(snr_db: f64, noise_variance: f64) -> f64 {
    (db_to_linear(snr_db) * noise_variance).sqrt()
}

/// `P_T` with `P_T/σ_v²` equal to `snr_db`.
pub fn power_from_channel_snr_db(snr_db: f64, channel_noise_var: f64) -> f64 {
    db_to_linear(snr_db) * channel_noise_var
}

/// Stream id of trial `trial` at sweep point `point`.
pub fn trial_stream_id(point: usize, trial: usize) -> u64 {
    ((point as u64) << 32).wrapping_add(trial as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TrialOutputs {
    Estimates(Vec<f64>),
    Decisions(Vec<(Hypothesis, Hypothesis)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationAggregates {
    pub mean: f64,
    pub median: f64,
    /// Unbiased sample variance of the estimates.
    pub variance: f64,
    pub median_abs_error: f64,
    /// `L · var(θ̂ − θ)`.
    pub scaled_variance: f64,
    /// Normal-theory standard error of `scaled_variance`; `None` for a
    /// single trial.
    pub scaled_variance_stderr: Option<f64>,
}

impl EstimationAggregates {
    pub fn from_estimates(estimates: &[f64], theta: f64, sensors: usize) -> Self {
        let n = estimates.len() as f64;
        let mean = estimates.iter().sum::<f64>() / n;
        let variance = if estimates.len() > 1 {
            estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let abs_err: Vec<f64> = estimates.iter().map(|e| (e - theta).abs()).collect();
        let scaled_variance = sensors as f64 * variance;
        let scaled_variance_stderr = (estimates.len() > 1).then(|| scaled_variance * (2.0 / (n - 1.0)).sqrt());
        Self {
            mean,
            median: median(estimates),
            variance,
            median_abs_error: median(&abs_err),
            scaled_variance,
            scaled_variance_stderr,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Aggregates {
    Estimation(EstimationAggregates),
    Detection(ErrorProbability),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub experiment_id: String,
    pub master_seed: u64,
    pub stream_base: u64,
    pub trials: usize,
    pub outputs: TrialOutputs,
    pub aggregates: Aggregates,
    /// Estimation trials whose normalized signal fell outside the range of `h`.
    pub clamp_count: usize,
    /// True parameter the estimates are scored against.
    pub theta: f64,
    pub sensors: usize,
    #[serde(default)]
    pub stratified: bool,
    #[serde(default)]
    pub priors: Option<detection::Priors>,
}

impl TrialSummary {
    /// Aggregates rebuilt from the stored per-trial outputs.
    pub fn recompute_aggregates(&self) -> Aggregates {
        match &self.outputs {
            TrialOutputs::Estimates(e) => {
                Aggregates::Estimation(EstimationAggregates::from_estimates(e, self.theta, self.sensors))
            }
            TrialOutputs::Decisions(d) => match (self.stratified, self.priors) {
                (true, Some(p)) => Aggregates::Detection(ErrorProbability::stratified(d, &p)),
                _ => Aggregates::Detection(ErrorProbability::sampled(d)),
            },
        }
    }

    pub fn estimation(&self) -> Option<&EstimationAggregates> {
        match &self.aggregates {
            Aggregates::Estimation(a) => Some(a),
            Aggregates::Detection(_) => None,
        }
    }

    pub fn detection(&self) -> Option<&ErrorProbability> {
        match &self.aggregates {
            Aggregates::Detection(a) => Some(a),
            Aggregates::Estimation(_) => None,
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        Err(invalid("trials", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// Bounded-transmission estimation: `θ̂ = h_L⁻¹(z_L / √P_T)` per trial.
pub fn run_estimation_experiment(setup: &EstimationSetup, trials: usize, master_seed: u64) -> Result<TrialSummary> {
    run_estimation_experiment_at(setup, trials, master_seed, 0)
}

pub fn run_estimation_experiment_at(
    setup: &EstimationSetup,
    trials: usize,
    master_seed: u64,
    stream_base: u64,
) -> Result<TrialSummary> {
    check_trials(trials)?;
    setup.validate()?;
    let estimator = Estimator::new(&setup.network)?;
    let results = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut s = RngStream::new(master_seed, stream_base.wrapping_add(t as u64));
            let r = setup.network.simulate(setup.theta, &mut s);
            estimator.estimate(r.z)
        })
        .collect::<Result<Vec<_>>>()?;
    let clamp_count = results.iter().filter(|e| e.clamped).count();
    let estimates: Vec<f64> = results.into_iter().map(|e| e.theta_hat).collect();
    Ok(TrialSummary {
        experiment_id: "estimation".into(),
        master_seed,
        stream_base,
        trials,
        aggregates: Aggregates::Estimation(EstimationAggregates::from_estimates(
            &estimates,
            setup.theta,
            setup.network.sensors,
        )),
        outputs: TrialOutputs::Estimates(estimates),
        clamp_count,
        theta: setup.theta,
        sensors: setup.network.sensors,
        stratified: false,
        priors: None,
    })
}

/// Amplify-and-forward baseline on the same draw contract (one variate per
/// sensor, then one for the channel). The setup's transmit map is ignored.
pub fn run_af_experiment_at(
    setup: &EstimationSetup,
    trials: usize,
    master_seed: u64,
    stream_base: u64,
) -> Result<TrialSummary> {
    check_trials(trials)?;
    setup.validate()?;
    let net = &setup.network;
    let gain = af_gain(setup);
    let l = net.sensors as f64;
    let channel_sd = net.channel_noise_var.sqrt();
    let estimates: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut s = RngStream::new(master_seed, stream_base.wrapping_add(t as u64));
            let mut spread = 0.0;
            for i in 1..=net.sensors {
                spread += net.sigmas.sigma(i) * net.noise.sample_one(&mut s);
            }
            let v = channel_sd * s.standard_normal();
            setup.theta + spread / l + v / (l * gain.alpha)
        })
        .collect();
    Ok(TrialSummary {
        experiment_id: "af_estimation".into(),
        master_seed,
        stream_base,
        trials,
        aggregates: Aggregates::Estimation(EstimationAggregates::from_estimates(
            &estimates,
            setup.theta,
            net.sensors,
        )),
        outputs: TrialOutputs::Estimates(estimates),
        clamp_count: 0,
        theta: setup.theta,
        sensors: net.sensors,
        stratified: false,
        priors: None,
    })
}

/// Normalized received signal `z_L / √P_T` for each trial.
pub fn run_received_signal_experiment_at(
    setup: &EstimationSetup,
    trials: usize,
    master_seed: u64,
    stream_base: u64,
) -> Result<Vec<f64>> {
    check_trials(trials)?;
    setup.validate()?;
    let scale = setup.network.total_power.sqrt();
    Ok((0..trials)
        .into_par_iter()
        .map(|t| {
            let mut s = RngStream::new(master_seed, stream_base.wrapping_add(t as u64));
            setup.network.simulate(setup.theta, &mut s).z / scale
        })
        .collect())
}

pub fn run_detection_experiment(setup: &DetectionSetup, trials: usize, master_seed: u64) -> Result<TrialSummary> {
    run_detection_experiment_at(setup, trials, master_seed, 0, false)
}

/// Builds the quadratic detector once, then runs `trials` full-pipeline
/// trials. With `stratified`, `round(P1 · trials)` trials run under H1.
pub fn run_detection_experiment_at(
    setup: &DetectionSetup,
    trials: usize,
    master_seed: u64,
    stream_base: u64,
    stratified: bool,
) -> Result<TrialSummary> {
    check_trials(trials)?;
    if stratified && trials < 2 {
        return Err(invalid("trials", "stratified sampling needs at least 2 trials"));
    }
    setup.validate()?;
    let detector = detection::build_detector(setup)?;
    let base = RngStream::new(master_seed, stream_base);
    let outcomes = detection::run_trials(setup, &detector, trials, &base, stratified);
    let aggregates = if stratified {
        ErrorProbability::stratified(&outcomes, &setup.priors)
    } else {
        ErrorProbability::sampled(&outcomes)
    };
    Ok(TrialSummary {
        experiment_id: "detection".into(),
        master_seed,
        stream_base,
        trials,
        aggregates: Aggregates::Detection(aggregates),
        outputs: TrialOutputs::Decisions(outcomes),
        clamp_count: 0,
        theta: setup.theta,
        sensors: setup.network.sensors,
        stratified,
        priors: Some(setup.priors),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Omega,
    #[serde(rename = "L")]
    Sensors,
    Theta,
    /// Coefficient `σ` of `σ_i = σ √i`.
    SigmaGrowth,
}

impl SweepParameter {
    pub fn column_name(&self) -> &'static str {
        match self {
            SweepParameter::Omega => "omega",
            SweepParameter::Sensors => "L",
            SweepParameter::Theta => "theta",
            SweepParameter::SigmaGrowth => "sigma_growth",
        }
    }
}

/// Setups whose parameters a sweep can vary.
pub trait Sweepable: Clone {
    fn network_mut(&mut self) -> &mut Network;
    fn theta_mut(&mut self) -> &mut f64;

    fn with_parameter(&self, parameter: SweepParameter, value: f64) -> Result<Self> {
        let mut s = self.clone();
        match parameter {
            SweepParameter::Omega => {
                let net = s.network_mut();
                net.transmit = net.transmit.with_omega(value)?;
            }
            SweepParameter::Sensors => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(invalid(
                        "L",
                        format!("sweep values must be positive integers, got {value}"),
                    ));
                }
                s.network_mut().sensors = value as usize;
            }
            SweepParameter::Theta => *s.theta_mut() = value,
            SweepParameter::SigmaGrowth => {
                if !(value > 0.0) {
                    return Err(invalid("sigma_growth", format!("must be positive, got {value}")));
                }
                s.network_mut().sigmas = SigmaSequence::SqrtGrowth { sigma: value };
            }
        }
        Ok(s)
    }
}

impl Sweepable for EstimationSetup {
    fn network_mut(&mut self) -> &mut Network {
        &mut self.network
    }
    fn theta_mut(&mut self) -> &mut f64 {
        &mut self.theta
    }
}

impl Sweepable for DetectionSetup {
    fn network_mut(&mut self) -> &mut Network {
        &mut self.network
    }
    fn theta_mut(&mut self) -> &mut f64 {
        &mut self.theta
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint<R> {
    pub index: usize,
    pub value: f64,
    /// First stream id for this point's trials.
    pub stream_base: u64,
    pub result: R,
}

/// Evaluate `per_point(setup, stream_base)` at each value of `parameter`, in
/// order.
pub fn sweep<S, R, F>(
    parameter: SweepParameter,
    values: &[f64],
    base: &S,
    mut per_point: F,
) -> Result<Vec<SweepPoint<R>>>
where
    S: Sweepable,
    F: FnMut(&S, u64) -> Result<R>,
{
    if values.is_empty() {
        return Err(invalid("values", "sweep needs at least one value"));
    }
    values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            let setup = base.with_parameter(parameter, value)?;
            let stream_base = trial_stream_id(index, 0);
            Ok(SweepPoint {
                index,
                value,
                stream_base,
                result: per_point(&setup, stream_base)?,
            })
        })
        .collect()
}
