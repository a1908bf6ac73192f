//! Experiment kinds mapped onto harness calls, one table row per point.

use boundedmac::detection::{self, DetectionSetup};
use boundedmac::estimation::{asymptotic_variance, EstimationSetup, MeanResponse};
use boundedmac::harness::{self, Sweepable};
use boundedmac::{Density, TransmitFunction};

use crate::config::{DualitySource, ExperimentConfig, ExperimentKind};
use crate::error::{CliError, Result};
use crate::table::{Cell, Table};

/// Position of one row within the nested (transmit, series, grid) loops.
struct Point {
    index: usize,
    transmit: Option<TransmitFunction>,
    series: Option<f64>,
    value: f64,
}

fn points(cfg: &ExperimentConfig) -> Vec<Point> {
    let transmits: Vec<Option<TransmitFunction>> = match &cfg.transmits {
        Some(t) => t.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let series: Vec<Option<f64>> = match &cfg.series {
        Some(s) => s.values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let grid = cfg.grid.points();
    let mut out = Vec::new();
    for t in &transmits {
        for s in &series {
            for &value in &grid {
                out.push(Point {
                    index: out.len(),
                    transmit: *t,
                    series: *s,
                    value,
                });
            }
        }
    }
    out
}

fn estimation_setup(cfg: &ExperimentConfig, p: &Point) -> Result<EstimationSetup> {
    let mut s = EstimationSetup {
        theta: cfg.theta,
        network: cfg.network.clone(),
    };
    if let Some(t) = p.transmit {
        s.network.transmit = t;
    }
    if let (Some(series), Some(v)) = (&cfg.series, p.series) {
        s = s
            .with_parameter(series.parameter, v)
            .map_err(|e| at("series.values", e))?;
    }
    if let Some(param) = cfg.experiment.grid_parameter() {
        s = s.with_parameter(param, p.value).map_err(|e| at("grid", e))?;
    }
    if let Some(rho) = cfg.power_per_sensor {
        s.network.total_power = rho * s.network.sensors as f64;
    }
    s.network.validate()?;
    Ok(s)
}

fn detection_setup(cfg: &ExperimentConfig, p: &Point) -> Result<DetectionSetup> {
    let e = estimation_setup(cfg, p)?;
    Ok(DetectionSetup {
        theta: e.theta,
        priors: cfg.priors,
        network: e.network,
    })
}

fn at(field: &str, e: boundedmac::Error) -> CliError {
    match CliError::from(e) {
        CliError::Config { message, .. } => CliError::config(field, message),
        other => other,
    }
}

fn transmit_scale(f: &TransmitFunction) -> f64 {
    match *f {
        TransmitFunction::Linear { alpha } => alpha,
        _ => f.omega().unwrap_or(f64::NAN),
    }
}

fn header(cfg: &ExperimentConfig, columns: &[&str]) -> Table {
    let mut names: Vec<String> = Vec::new();
    if cfg.transmits.is_some() {
        names.push("transmit".into());
    }
    if let Some(s) = &cfg.series {
        names.push(s.parameter.column_name().into());
    }
    names.extend(columns.iter().map(|c| c.to_string()));
    Table::new(names)
}

fn prefix(cfg: &ExperimentConfig, p: &Point) -> Vec<Cell> {
    let mut cells = Vec::new();
    if let Some(t) = &p.transmit {
        cells.push(Cell::from(t.kind_name()));
    }
    if let (Some(s), Some(v)) = (&cfg.series, p.series) {
        cells.push(grid_cell(s.parameter, v));
    }
    cells
}

fn grid_cell(param: boundedmac::harness::SweepParameter, v: f64) -> Cell {
    match param {
        boundedmac::harness::SweepParameter::Sensors => Cell::Int(v as u64),
        _ => Cell::Real(v),
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Table> {
    cfg.validate()?;
    let seed = cfg.seed();
    let kind = cfg.experiment;
    let grid_name = kind.grid_parameter().map(|p| p.column_name()).unwrap_or("x");
    let columns: Vec<&str> = match kind {
        ExperimentKind::AsvVsOmega | ExperimentKind::LvarVsL => vec![grid_name, "asv", "l_var", "trials", "stderr"],
        ExperimentKind::Consistency => vec![
            grid_name,
            "mean",
            "median",
            "median_abs_error",
            "variance",
            "clamp_count",
            "trials",
        ],
        ExperimentKind::AfCompare => vec![
            grid_name,
            "bounded_median_abs_error",
            "af_median_abs_error",
            "bounded_l_var",
            "af_l_var",
            "trials",
        ],
        ExperimentKind::DcVsOmega => vec![
            grid_name,
            "deflection",
            "mean_shift",
            "sensing_variance",
            "channel_term",
        ],
        ExperimentKind::PeVsOmega => vec![grid_name, "deflection", "pe", "stderr", "trials"],
        ExperimentKind::PeVsL => vec![grid_name, "scale", "deflection", "pe", "stderr", "trials"],
        ExperimentKind::GrowthDegeneration => vec![
            grid_name,
            "response_gap",
            "signal_mean",
            "signal_stderr",
            "af_median_abs_error",
            "trials",
        ],
        ExperimentKind::DualityCheck => vec!["x", "matched_pdf", "reference_pdf", "abs_diff"],
    };
    let mut table = header(cfg, &columns);
    if kind == ExperimentKind::DualityCheck {
        duality_rows(cfg, &mut table)?;
        return Ok(table);
    }
    let param = kind.grid_parameter().expect("grid parameter");
    for p in points(cfg) {
        let base = harness::trial_stream_id(p.index, 0);
        let mut row = prefix(cfg, &p);
        row.push(grid_cell(param, p.value));
        match kind {
            ExperimentKind::AsvVsOmega | ExperimentKind::LvarVsL => {
                let s = estimation_setup(cfg, &p)?;
                let asv = asymptotic_variance(&s)?;
                let summary = harness::run_estimation_experiment_at(&s, cfg.trials, seed, base)?;
                let a = summary.estimation().expect("estimation summary");
                row.extend([
                    Cell::from(asv),
                    Cell::from(a.scaled_variance),
                    Cell::from(cfg.trials),
                    Cell::from(a.scaled_variance_stderr.unwrap_or(f64::NAN)),
                ]);
            }
            ExperimentKind::Consistency => {
                let s = estimation_setup(cfg, &p)?;
                let summary = harness::run_estimation_experiment_at(&s, cfg.trials, seed, base)?;
                let a = summary.estimation().expect("estimation summary");
                row.extend([
                    Cell::from(a.mean),
                    Cell::from(a.median),
                    Cell::from(a.median_abs_error),
                    Cell::from(a.variance),
                    Cell::from(summary.clamp_count),
                    Cell::from(cfg.trials),
                ]);
            }
            ExperimentKind::AfCompare => {
                let s = estimation_setup(cfg, &p)?;
                let bounded = harness::run_estimation_experiment_at(&s, cfg.trials, seed, base)?;
                let af = harness::run_af_experiment_at(&s, cfg.trials, seed, base)?;
                let (b, a) = (bounded.estimation().expect("bounded"), af.estimation().expect("af"));
                row.extend([
                    Cell::from(b.median_abs_error),
                    Cell::from(a.median_abs_error),
                    Cell::from(b.scaled_variance),
                    Cell::from(a.scaled_variance),
                    Cell::from(cfg.trials),
                ]);
            }
            ExperimentKind::DcVsOmega => {
                let t = detection::deflection_terms(&detection_setup(cfg, &p)?)?;
                row.extend([
                    Cell::from(t.deflection()),
                    Cell::from(t.mean_shift),
                    Cell::from(t.sensing_variance),
                    Cell::from(t.channel_term),
                ]);
            }
            ExperimentKind::PeVsOmega => {
                let s = detection_setup(cfg, &p)?;
                let d = detection::deflection(&s)?;
                let summary = harness::run_detection_experiment_at(&s, cfg.trials, seed, base, cfg.stratified)?;
                let e = summary.detection().expect("detection summary");
                row.extend([
                    Cell::from(d),
                    Cell::from(e.pe),
                    Cell::from(e.stderr),
                    Cell::from(cfg.trials),
                ]);
            }
            ExperimentKind::PeVsL => {
                let mut s = detection_setup(cfg, &p)?;
                if matches!(s.network.transmit, TransmitFunction::Linear { .. }) {
                    s = detection::with_af_transmit(&s)?;
                } else if let (Some(search), Some(_)) = (cfg.omega_search, s.network.transmit.omega()) {
                    let (omega, _) = detection::optimal_omega(&s, search.lo, search.hi, search.grid_points)?;
                    s.network.transmit = s.network.transmit.with_omega(omega)?;
                }
                let d = detection::deflection(&s)?;
                let summary = harness::run_detection_experiment_at(&s, cfg.trials, seed, base, cfg.stratified)?;
                let e = summary.detection().expect("detection summary");
                row.extend([
                    Cell::from(transmit_scale(&s.network.transmit)),
                    Cell::from(d),
                    Cell::from(e.pe),
                    Cell::from(e.stderr),
                    Cell::from(cfg.trials),
                ]);
            }
            ExperimentKind::GrowthDegeneration => {
                let s = estimation_setup(cfg, &p)?;
                let h = MeanResponse::new(&s.network);
                let gap = (h.eval(s.theta)? - h.eval(cfg.reference_theta.unwrap_or(0.0))?).abs();
                let z = harness::run_received_signal_experiment_at(&s, cfg.trials, seed, base)?;
                let n = z.len() as f64;
                let mean = z.iter().sum::<f64>() / n;
                let sd = if z.len() > 1 {
                    (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
                } else {
                    f64::NAN
                };
                let af = harness::run_af_experiment_at(&s, cfg.trials, seed, base)?;
                row.extend([
                    Cell::from(gap),
                    Cell::from(mean),
                    Cell::from(sd / n.sqrt()),
                    Cell::from(af.estimation().expect("af").median_abs_error),
                    Cell::from(cfg.trials),
                ]);
            }
            ExperimentKind::DualityCheck => unreachable!(),
        }
        table.push(row);
    }
    Ok(table)
}

type RealFn = Box<dyn Fn(f64) -> f64>;

fn duality_rows(cfg: &ExperimentConfig, table: &mut Table) -> Result<()> {
    let spec = &cfg.network.quadrature;
    let source = cfg.duality_source.as_ref().expect("validated");
    let (f, reference): (RealFn, RealFn) = match source {
        DualitySource::Noise(model) => {
            model.validate().map_err(|e| at("duality_source.noise", e))?;
            let m = *model;
            (Box::new(move |x| m.score(x)), Box::new(move |x| Density::pdf(&m, x)))
        }
        DualitySource::Transmit(t) => {
            t.validate().map_err(|e| at("duality_source.transmit", e))?;
            let t = *t;
            let reference: RealFn = match t {
                TransmitFunction::Tanh { omega: 1.0 } => Box::new(|x: f64| 1.0 / (std::f64::consts::PI * x.cosh())),
                TransmitFunction::Linear { alpha } => {
                    Box::new(move |x: f64| (alpha / (2.0 * std::f64::consts::PI)).sqrt() * (-0.5 * alpha * x * x).exp())
                }
                _ => {
                    return Err(CliError::config(
                        "duality_source.transmit",
                        format!("no closed-form reference density for {}", t.kind_name()),
                    ))
                }
            };
            (Box::new(move |x| t.eval(x)), reference)
        }
    };
    let density = detection::matched_density(f, spec)?;
    for x in cfg.grid.points() {
        let (p, q) = (density.pdf(x)?, reference(x));
        table.push(vec![
            Cell::from(x),
            Cell::from(p),
            Cell::from(q),
            Cell::from((p - q).abs()),
        ]);
    }
    Ok(())
}
