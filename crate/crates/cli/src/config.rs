//! Experiment configuration: JSON text, dotted-path overrides, validation.

use std::path::PathBuf;

use boundedmac::detection::Priors;
use boundedmac::harness::SweepParameter;
use boundedmac::{Network, NoiseModel, TransmitFunction};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    AsvVsOmega,
    #[serde(rename = "lvar_vs_L")]
    LvarVsL,
    Consistency,
    AfCompare,
    DcVsOmega,
    PeVsOmega,
    #[serde(rename = "pe_vs_L")]
    PeVsL,
    GrowthDegeneration,
    DualityCheck,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::AsvVsOmega => "asv_vs_omega",
            ExperimentKind::LvarVsL => "lvar_vs_L",
            ExperimentKind::Consistency => "consistency",
            ExperimentKind::AfCompare => "af_compare",
            ExperimentKind::DcVsOmega => "dc_vs_omega",
            ExperimentKind::PeVsOmega => "pe_vs_omega",
            ExperimentKind::PeVsL => "pe_vs_L",
            ExperimentKind::GrowthDegeneration => "growth_degeneration",
            ExperimentKind::DualityCheck => "duality_check",
        }
    }

    /// Parameter varied along `grid`; `None` means the grid is over `x`.
    pub fn grid_parameter(&self) -> Option<SweepParameter> {
        match self {
            ExperimentKind::AsvVsOmega | ExperimentKind::DcVsOmega | ExperimentKind::PeVsOmega => {
                Some(SweepParameter::Omega)
            }
            ExperimentKind::LvarVsL
            | ExperimentKind::Consistency
            | ExperimentKind::AfCompare
            | ExperimentKind::PeVsL
            | ExperimentKind::GrowthDegeneration => Some(SweepParameter::Sensors),
            ExperimentKind::DualityCheck => None,
        }
    }

    pub fn uses_trials(&self) -> bool {
        !matches!(self, ExperimentKind::DcVsOmega | ExperimentKind::DualityCheck)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Grid {
    Values(Vec<f64>),
    Linspace { start: f64, stop: f64, points: usize },
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match *self {
            Grid::Values(ref v) => v.clone(),
            Grid::Linspace { start, stop, points } => match points {
                0 => vec![],
                1 => vec![start],
                n => (0..n)
                    .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaSearch {
    pub lo: f64,
    pub hi: f64,
    pub grid_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DualitySource {
    /// Compare the density matched to the noise score with the noise pdf.
    Noise(NoiseModel),
    /// Density matched to a transmit function, compared with its closed form.
    Transmit(TransmitFunction),
}

fn default_theta() -> f64 {
    1.0
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "Priors::equal")]
    pub priors: Priors,
    pub network: Network,
    pub grid: Grid,
    /// Outer loop over a second parameter; adds a column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Series>,
    /// Outer loop over transmit functions; adds a `transmit` column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmits: Option<Vec<TransmitFunction>>,
    /// Replace each scaled transmit's `ω` by the deflection maximizer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_search: Option<OmegaSearch>,
    /// Hold `P_T / L` fixed instead of `P_T` when `L` varies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_per_sensor: Option<f64>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub stratified: bool,
    /// Second parameter value for response-gap columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duality_source: Option<DualitySource>,
}

impl ExperimentConfig {
    pub fn seed(&self) -> u64 {
        self.master_seed.unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let kind = self.experiment;
        if kind.uses_trials() && self.trials == 0 {
            return Err(CliError::config(
                "trials",
                format!("{} needs at least one trial", kind.name()),
            ));
        }
        if self.stratified && self.trials < 2 {
            return Err(CliError::config(
                "trials",
                "stratified sampling needs at least 2 trials",
            ));
        }
        let grid = self.grid.points();
        if grid.is_empty() {
            return Err(CliError::config("grid", "needs at least one point"));
        }
        if let Some(bad) = grid.iter().find(|v| !v.is_finite()) {
            return Err(CliError::config("grid", format!("non-finite value {bad}")));
        }
        if let Some(series) = &self.series {
            if series.values.is_empty() {
                return Err(CliError::config("series.values", "needs at least one value"));
            }
            if Some(series.parameter) == kind.grid_parameter() {
                return Err(CliError::config(
                    "series.parameter",
                    "must differ from the grid parameter",
                ));
            }
        }
        if !self.theta.is_finite() {
            return Err(CliError::config("theta", "must be finite"));
        }
        if let Some(t) = self.transmits.as_ref() {
            if t.is_empty() {
                return Err(CliError::config("transmits", "needs at least one entry"));
            }
            for f in t {
                f.validate().map_err(|e| prefix("transmits", e))?;
            }
        }
        if let Some(s) = &self.omega_search {
            if !(s.lo > 0.0 && s.hi > s.lo && s.grid_points >= 8) {
                return Err(CliError::config(
                    "omega_search",
                    "requires 0 < lo < hi and grid_points >= 8",
                ));
            }
        }
        if let Some(p) = self.power_per_sensor {
            if !(p > 0.0 && p.is_finite()) {
                return Err(CliError::config("power_per_sensor", "must be positive"));
            }
        }
        self.priors.validate().map_err(|e| prefix("priors", e))?;
        self.network.validate().map_err(|e| prefix("network", e))?;
        match kind {
            ExperimentKind::DualityCheck if self.duality_source.is_none() => {
                Err(CliError::config("duality_source", "required for duality_check"))
            }
            _ => Ok(()),
        }
    }
}

fn prefix(section: &str, e: boundedmac::Error) -> CliError {
    match CliError::from(e) {
        CliError::Config { field, message } => CliError::config(format!("{section}.{field}"), message),
        other => other,
    }
}

/// Set `path` (dot separated, numeric segments index arrays) in `root`.
/// `raw` is parsed as JSON when possible and taken as a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(assignment, "override must look like key=value"))?;
    if path.is_empty() {
        return Err(CliError::config(assignment, "empty key"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    for segment in path.split('.') {
        node = match node {
            Value::Object(map) => map.entry(segment).or_insert(Value::Null),
            Value::Array(items) => {
                let index: usize = segment
                    .parse()
                    .map_err(|_| CliError::config(path, format!("`{segment}` is not an array index")))?;
                let len = items.len();
                items
                    .get_mut(index)
                    .ok_or_else(|| CliError::config(path, format!("index {index} out of bounds (length {len})")))?
            }
            Value::Null => {
                *node = Value::Object(Default::default());
                match node {
                    Value::Object(map) => map.entry(segment).or_insert(Value::Null),
                    _ => unreachable!(),
                }
            }
            _ => {
                return Err(CliError::config(
                    path,
                    format!("cannot descend into scalar at `{segment}`"),
                ))
            }
        };
    }
    *node = value;
    Ok(())
}

pub fn parse_value(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| CliError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Typed config from a JSON tree, reporting the offending field path.
pub fn from_value(value: Value) -> Result<ExperimentConfig> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "config".to_string() } else { path };
        CliError::config(field, e.into_inner().to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_create_and_replace() {
        let mut v = json!({"network": {"transmit": {"kind": "tanh", "omega": 1.0}}, "grid": {"values": [1, 2]}});
        apply_override(&mut v, "network.transmit.omega=0.5").unwrap();
        apply_override(&mut v, "grid.values.1=7").unwrap();
        apply_override(&mut v, "output=out dir/x.csv").unwrap();
        apply_override(&mut v, "series.parameter=L").unwrap();
        assert_eq!(v["network"]["transmit"]["omega"], json!(0.5));
        assert_eq!(v["grid"]["values"], json!([1, 7]));
        assert_eq!(v["output"], json!("out dir/x.csv"));
        assert_eq!(v["series"]["parameter"], json!("L"));
        assert!(apply_override(&mut v, "grid.values.9=1").is_err());
        assert!(apply_override(&mut v, "network.transmit.omega.x=1").is_err());
        assert!(apply_override(&mut v, "novalue").is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let g = Grid::Linspace {
            start: 0.3,
            stop: 3.0,
            points: 10,
        };
        let p = g.points();
        assert_eq!(p.len(), 10);
        assert_eq!(p[0], 0.3);
        assert_eq!(p[9], 3.0);
        assert!((p[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn error_names_the_field() {
        let v = json!({
            "experiment": "dc_vs_omega",
            "network": {"sensors": 5, "sigmas": {"kind": "constant", "sigma": 1.0},
                        "noise": {"kind": "gaussan", "scale": 1.0},
                        "transmit": {"kind": "tanh", "omega": 1.0},
                        "total_power": 1.0, "channel_noise_var": 1.0},
            "grid": {"values": [1.0]}
        });
        match from_value(v) {
            Err(CliError::Config { field, message }) => {
                assert!(field.contains("network.noise"), "{field}");
                assert!(message.contains("gaussan"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }
}
