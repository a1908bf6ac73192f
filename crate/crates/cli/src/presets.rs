//! Built-in experiment configs for the standard sweeps.

use boundedmac::detection::Priors;
use boundedmac::harness::{power_from_channel_snr_db, theta_from_sensing_snr_db, SweepParameter};
use boundedmac::{Network, NoiseModel, QuadratureSpec, SigmaSequence, TransmitFunction};

use crate::config::{DualitySource, ExperimentConfig, ExperimentKind, Grid, OmegaSearch, Series};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ExperimentConfig,
}

fn network(noise: NoiseModel, transmit: TransmitFunction, sensors: usize, total_power: f64) -> Network {
    Network {
        sensors,
        sigmas: SigmaSequence::Constant { sigma: 1.0 },
        noise,
        transmit,
        total_power,
        channel_noise_var: 1.0,
        quadrature: QuadratureSpec::default(),
    }
}

fn base(experiment: ExperimentKind, network: Network, grid: Grid, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        experiment,
        master_seed: None,
        trials,
        output: None,
        theta: 1.0,
        priors: Priors::equal(),
        network,
        grid,
        series: None,
        transmits: None,
        omega_search: None,
        power_per_sensor: None,
        stratified: false,
        reference_theta: None,
        duality_source: None,
    }
}

const GAUSSIAN: NoiseModel = NoiseModel::Gaussian { scale: 1.0 };
const TANH: TransmitFunction = TransmitFunction::Tanh { omega: 1.0 };

fn laplacian() -> NoiseModel {
    NoiseModel::laplacian_with_variance(1.0)
}

fn omega_grid() -> Grid {
    Grid::Linspace {
        start: 0.3,
        stop: 3.0,
        points: 10,
    }
}

fn bounded_family() -> Vec<TransmitFunction> {
    vec![
        TANH,
        TransmitFunction::Gudermannian { omega: 1.0 },
        TransmitFunction::Rational { omega: 1.0 },
    ]
}

fn detection_base(experiment: ExperimentKind, channel_snr_db: f64, grid: Grid, trials: usize) -> ExperimentConfig {
    let mut c = base(
        experiment,
        network(GAUSSIAN, TANH, 20, power_from_channel_snr_db(channel_snr_db, 1.0)),
        grid,
        trials,
    );
    c.theta = theta_from_sensing_snr_db(10.0, 1.0);
    c
}

fn large_l_grid() -> Grid {
    Grid::Values(vec![100.0, 1000.0, 10_000.0])
}

pub fn presets() -> Vec<Preset> {
    let asv_gaussian = base(
        ExperimentKind::AsvVsOmega,
        network(GAUSSIAN, TANH, 500, 10.0),
        omega_grid(),
        10_000,
    );

    let mut asv_laplacian = base(
        ExperimentKind::AsvVsOmega,
        network(laplacian(), TANH, 500, 10.0),
        omega_grid(),
        10_000,
    );
    asv_laplacian.series = Some(Series {
        parameter: SweepParameter::Sensors,
        values: vec![25.0, 50.0, 500.0],
    });

    let mut lvar = base(
        ExperimentKind::LvarVsL,
        network(GAUSSIAN, TransmitFunction::Tanh { omega: 0.75 }, 10, 10.0),
        Grid::Values(vec![10.0, 25.0, 50.0, 100.0, 250.0, 500.0, 1000.0]),
        10_000,
    );
    lvar.power_per_sensor = Some(1.0);

    let mut asv_transmits = base(
        ExperimentKind::AsvVsOmega,
        network(GAUSSIAN, TANH, 500, 10.0),
        omega_grid(),
        10_000,
    );
    asv_transmits.transmits = Some(bounded_family());

    let pe_grid = Grid::Linspace {
        start: 0.1,
        stop: 3.2,
        points: 32,
    };
    let pe_omega = detection_base(ExperimentKind::PeVsOmega, 3.0, pe_grid.clone(), 1_000_000);
    let dc_omega = detection_base(ExperimentKind::DcVsOmega, 3.0, pe_grid, 0);

    let mut pe_l = detection_base(
        ExperimentKind::PeVsL,
        0.0,
        Grid::Values(vec![5.0, 10.0, 20.0, 40.0]),
        1_000_000,
    );
    let mut family = vec![TransmitFunction::Linear { alpha: 1.0 }];
    family.extend(bounded_family());
    pe_l.transmits = Some(family);
    pe_l.omega_search = Some(OmegaSearch {
        lo: 0.05,
        hi: 5.0,
        grid_points: 64,
    });

    let mut sqrt_growth = base(
        ExperimentKind::GrowthDegeneration,
        network(GAUSSIAN, TANH, 100, 10.0),
        large_l_grid(),
        1000,
    );
    sqrt_growth.network.sigmas = SigmaSequence::SqrtGrowth { sigma: 1.0 };
    sqrt_growth.reference_theta = Some(0.0);

    let cauchy_af = base(
        ExperimentKind::AfCompare,
        network(NoiseModel::Cauchy { scale: 1.0 }, TANH, 100, 10.0),
        large_l_grid(),
        1000,
    );

    let consistency = base(
        ExperimentKind::Consistency,
        network(laplacian(), TransmitFunction::Tanh { omega: 0.75 }, 100, 10.0),
        large_l_grid(),
        1000,
    );

    let mut duality = base(
        ExperimentKind::DualityCheck,
        network(GAUSSIAN, TANH, 1, 1.0),
        Grid::Linspace {
            start: -10.0,
            stop: 10.0,
            points: 201,
        },
        0,
    );
    duality.duality_source = Some(DualitySource::Transmit(TANH));

    vec![
        Preset {
            name: "asv-gaussian",
            description: "AsV and L·var versus omega, tanh, gaussian noise, L=500, P_T=10",
            config: asv_gaussian,
        },
        Preset {
            name: "asv-laplacian",
            description: "AsV and L·var versus omega, laplacian noise, L in {25, 50, 500}",
            config: asv_laplacian,
        },
        Preset {
            name: "lvar-vs-l",
            description: "AsV and L·var versus L at omega=0.75 with P_T/L=1",
            config: lvar,
        },
        Preset {
            name: "asv-transmits",
            description: "AsV versus omega for tanh, gudermannian and rational maps",
            config: asv_transmits,
        },
        Preset {
            name: "pe-vs-omega",
            description: "deflection and Pe versus omega, 10 dB sensing, 3 dB channel, L=20",
            config: pe_omega,
        },
        Preset {
            name: "deflection-vs-omega",
            description: "deflection terms versus omega on the pe-vs-omega grid",
            config: dc_omega,
        },
        Preset {
            name: "pe-vs-l",
            description: "Pe versus L for linear and bounded maps at their deflection-optimal omega",
            config: pe_l,
        },
        Preset {
            name: "sqrt-growth",
            description: "response gap and AF error with sigma_i = sqrt(i), L up to 1e4",
            config: sqrt_growth,
        },
        Preset {
            name: "cauchy-af",
            description: "bounded versus AF median error under Cauchy noise, L up to 1e4",
            config: cauchy_af,
        },
        Preset {
            name: "consistency",
            description: "bounded estimator spread versus L, laplacian noise",
            config: consistency,
        },
        Preset {
            name: "duality-sech",
            description: "density matched to tanh against sech(x)/pi",
            config: duality,
        },
    ]
}

pub fn find(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

/// One line per preset: name, padding, description.
pub fn listing() -> String {
    let all = presets();
    let width = all.iter().map(|p| p.name.len()).max().unwrap_or(0);
    all.iter()
        .map(|p| format!("{:width$}  {}\n", p.name, p.description))
        .collect()
}
