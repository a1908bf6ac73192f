//! Acceptance criteria, one PASS/FAIL line each. Set ACCEPTANCE_STRICT=1 to
//! exit nonzero when any criterion fails; by default the verdict is only
//! printed so that a workspace test run still reaches every other suite.

use std::time::{Duration, Instant};

use boundedmac::detection::{
    deflection, locally_optimal_nonlinearity, matched_density, optimal_omega, with_af_transmit, DetectionSetup, Priors,
};
use boundedmac::estimation::{asymptotic_variance, EstimationSetup, MeanResponse};
use boundedmac::harness::{
    power_from_channel_snr_db, run_af_experiment_at, run_detection_experiment_at, run_estimation_experiment_at, sweep,
    theta_from_sensing_snr_db, trial_stream_id, SweepParameter,
};
use boundedmac::{Density, Network, NoiseModel, QuadratureSpec, SigmaSequence, TransmitFunction};
use boundedmac_cli::{presets, run, RunOptions};

struct Outcome {
    pass: bool,
    detail: String,
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

fn models() -> [NoiseModel; 3] {
    [
        NoiseModel::Gaussian { scale: 1.0 },
        NoiseModel::laplacian_with_variance(1.0),
        NoiseModel::Cauchy { scale: 1.0 },
    ]
}

fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| start + (stop - start) * k as f64 / (points - 1) as f64)
        .collect()
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn asv_agreement() -> Outcome {
    const TOL: f64 = 0.10;
    const BUDGET: Duration = Duration::from_secs(300);
    let start = Instant::now();
    let mut worst = (0.0f64, String::new());
    for noise in models() {
        let setup = EstimationSetup {
            theta: 1.0,
            network: network(noise, TransmitFunction::Tanh { omega: 1.0 }, 500, 10.0),
        };
        let rows = sweep(SweepParameter::Omega, &linspace(0.3, 3.0, 10), &setup, |s, base| {
            let asv = asymptotic_variance(s)?;
            let lvar = run_estimation_experiment_at(s, 10_000, 1, base)?
                .estimation()
                .unwrap()
                .scaled_variance;
            Ok((asv, lvar))
        })
        .unwrap();
        for p in rows {
            let rel = (p.result.1 / p.result.0 - 1.0).abs();
            if rel >= worst.0 {
                worst = (rel, format!("{} ω={:.2}", noise.kind_name(), p.value));
            }
        }
    }
    let gap = |sensors: usize| {
        let s = EstimationSetup {
            theta: 1.0,
            network: network(
                NoiseModel::laplacian_with_variance(1.0),
                TransmitFunction::Tanh { omega: 0.75 },
                sensors,
                10.0,
            ),
        };
        let asv = asymptotic_variance(&s).unwrap();
        let lvar = run_estimation_experiment_at(&s, 10_000, 2, 0)
            .unwrap()
            .estimation()
            .unwrap()
            .scaled_variance;
        (lvar - asv).abs()
    };
    let (g25, g500) = (gap(25), gap(500));
    let elapsed = start.elapsed();
    Outcome {
        pass: worst.0 <= TOL && g25 > g500 && elapsed < BUDGET,
        detail: format!(
            "max |L·var/AsV − 1| = {:.4} at {} (tol {TOL}); laplacian ω=0.75 gap L=25 {g25:.4} vs L=500 {g500:.4}; {:.0}s (budget {}s)",
            worst.0,
            worst.1,
            secs(elapsed),
            BUDGET.as_secs()
        ),
    }
}

fn linear_closed_forms() -> Outcome {
    const TOL: f64 = 1e-6;
    let mut worst = 0.0f64;
    for noise in [
        NoiseModel::Gaussian { scale: 1.3 },
        NoiseModel::laplacian_with_variance(0.6),
    ] {
        let sn2 = noise.variance().unwrap();
        for (alpha, total_power, sigma, theta) in [(1.0, 10.0, 1.0, 1.0), (0.35, 2.0, 1.7, 0.4), (2.2, 25.0, 0.8, 2.5)]
        {
            let mut net = network(noise, TransmitFunction::Linear { alpha }, 30, total_power);
            let asv_expected = sn2 + 1.0 / (total_power * alpha * alpha);
            let asv = asymptotic_variance(&EstimationSetup {
                theta,
                network: net.clone(),
            })
            .unwrap();
            worst = worst.max((asv / asv_expected - 1.0).abs());
            net.sigmas = SigmaSequence::Constant { sigma };
            let dc_expected = theta * theta / (sigma * sigma * sn2 + 1.0 / (total_power * alpha * alpha));
            let dc = deflection(&DetectionSetup {
                theta,
                priors: Priors::equal(),
                network: net,
            })
            .unwrap();
            worst = worst.max((dc / dc_expected - 1.0).abs());
        }
    }
    Outcome {
        pass: worst <= TOL,
        detail: format!("max relative deviation {worst:.2e} (tol {TOL:e})"),
    }
}

fn median_errors(setup: &EstimationSetup, seed: u64, base: u64) -> (f64, f64) {
    let b = run_estimation_experiment_at(setup, 1000, seed, base).unwrap();
    let a = run_af_experiment_at(setup, 1000, seed, base).unwrap();
    (
        b.estimation().unwrap().median_abs_error,
        a.estimation().unwrap().median_abs_error,
    )
}

fn cauchy_robustness() -> Outcome {
    let at = |sensors: usize, k: usize| {
        let s = EstimationSetup {
            theta: 1.0,
            network: network(
                NoiseModel::Cauchy { scale: 1.0 },
                TransmitFunction::Tanh { omega: 1.0 },
                sensors,
                10.0,
            ),
        };
        median_errors(&s, 3, trial_stream_id(k, 0))
    };
    let (small, large) = (at(100, 0), at(10_000, 1));
    let bounded = small.0 / large.0;
    let af = small.1 / large.1;
    Outcome {
        pass: bounded >= 2.0 && af <= 1.2,
        detail: format!(
            "bounded median |θ̂−θ| {:.4} → {:.4} (shrink {bounded:.2}×, need ≥ 2); AF {:.4} → {:.4} (shrink {af:.2}×, need ≤ 1.2)",
            small.0, large.0, small.1, large.1
        ),
    }
}

fn growth_sweep(sigmas: SigmaSequence) -> (f64, f64, f64, f64) {
    let mut gaps = Vec::new();
    let mut af = Vec::new();
    for (k, sensors) in [100usize, 10_000].into_iter().enumerate() {
        let mut net = network(
            NoiseModel::Gaussian { scale: 1.0 },
            TransmitFunction::Tanh { omega: 1.0 },
            sensors,
            10.0,
        );
        net.sigmas = sigmas.clone();
        let h = MeanResponse::new(&net);
        gaps.push((h.eval(1.0).unwrap() - h.eval(0.0).unwrap()).abs());
        let s = EstimationSetup {
            theta: 1.0,
            network: net,
        };
        af.push(
            run_af_experiment_at(&s, 1000, 4, trial_stream_id(k, 0))
                .unwrap()
                .estimation()
                .unwrap()
                .median_abs_error,
        );
    }
    (gaps[0], gaps[1], af[0], af[1])
}

fn growth_crossover() -> Outcome {
    let (g100, g10k, a100, a10k) = growth_sweep(SigmaSequence::SqrtGrowth { sigma: 1.0 });
    let ratio = g10k / g100;
    let shrink = a100 / a10k;
    let (p100, p10k, pa100, pa10k) = growth_sweep(SigmaSequence::PowerGrowth {
        sigma: 1.0,
        exponent: 0.25,
    });
    Outcome {
        pass: ratio < 0.05 && shrink >= 2.0,
        detail: format!(
            "σᵢ=√i: |h(1)−h(0)| {g100:.5} → {g10k:.5} (ratio {ratio:.4}, need < 0.05); AF median error {a100:.4} → {a10k:.4} \
             (shrink {shrink:.2}×, need ≥ 2) [σᵢ=i^¼ for reference: gap ratio {:.4}, AF shrink {:.2}×]",
            p10k / p100,
            pa100 / pa10k
        ),
    }
}

fn deflection_suite() -> Outcome {
    let det = |noise: NoiseModel, transmit: TransmitFunction, sigmas: SigmaSequence, sensors: usize, theta: f64| {
        let mut net = network(noise, transmit, sensors, 10.0);
        net.sigmas = sigmas;
        deflection(&DetectionSetup {
            theta,
            priors: Priors::equal(),
            network: net,
        })
        .unwrap()
    };
    let tanh = TransmitFunction::Tanh { omega: 1.0 };
    let sqrt = SigmaSequence::SqrtGrowth { sigma: 1.0 };
    let ratio = det(models()[0], tanh, sqrt.clone(), 10_000, 1.0) / det(models()[0], tanh, sqrt, 10, 1.0);
    let mut invariant = true;
    for noise in models() {
        let d: Vec<f64> = [10usize, 100, 1000, 10_000]
            .iter()
            .map(|&l| det(noise, tanh, SigmaSequence::Constant { sigma: 1.0 }, l, 1.0))
            .collect();
        invariant &= d[0] > 0.0 && d.iter().all(|&v| v == d[0]);
    }
    let mut quantizer_min = f64::INFINITY;
    for levels in [3, 5] {
        for noise in models() {
            for theta in [0.5, 1.0, 2.0] {
                let q = TransmitFunction::UniformQuantizer { x_max: 2.0, levels };
                quantizer_min = quantizer_min.min(det(noise, q, SigmaSequence::Constant { sigma: 1.0 }, 20, theta));
            }
        }
    }
    Outcome {
        pass: ratio < 0.05 && invariant && quantizer_min > 0.0,
        detail: format!(
            "sqrt growth D(1e4)/D(10) = {ratio:.2e} (need < 0.05); constant σ exactly L-invariant and positive: {invariant}; \
             min quantizer D = {quantizer_min:.3e}"
        ),
    }
}

fn dc_pe_argmax() -> Outcome {
    const BUDGET: Duration = Duration::from_secs(900);
    let start = Instant::now();
    let grid = linspace(0.1, 3.2, 32);
    let mut pass = true;
    let mut parts = Vec::new();
    for noise in models() {
        let net = network(
            noise,
            TransmitFunction::Tanh { omega: 1.0 },
            20,
            power_from_channel_snr_db(3.0, 1.0),
        );
        let setup = DetectionSetup {
            theta: theta_from_sensing_snr_db(10.0, 1.0),
            priors: Priors::equal(),
            network: net,
        };
        let rows = sweep(SweepParameter::Omega, &grid, &setup, |s, base| {
            let d = deflection(s)?;
            let pe = run_detection_experiment_at(s, 1_000_000, 6, base, false)?
                .detection()
                .unwrap()
                .pe;
            Ok((d, pe))
        })
        .unwrap();
        let best_d = rows.iter().max_by(|a, b| a.result.0.total_cmp(&b.result.0)).unwrap();
        let best_pe = rows.iter().min_by(|a, b| a.result.1.total_cmp(&b.result.1)).unwrap();
        let cells = best_d.index.abs_diff(best_pe.index);
        pass &= cells <= 1;
        parts.push(format!(
            "{}: argmax D ω={:.1}, argmin Pe ω={:.1} ({cells} cells)",
            noise.kind_name(),
            best_d.value,
            best_pe.value
        ));
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: pass && elapsed < BUDGET,
        detail: format!(
            "{}; {:.0}s (budget {}s)",
            parts.join("; "),
            secs(elapsed),
            BUDGET.as_secs()
        ),
    }
}

fn detection_ordering() -> Outcome {
    let base = DetectionSetup {
        theta: theta_from_sensing_snr_db(10.0, 1.0),
        priors: Priors::equal(),
        network: network(
            NoiseModel::Gaussian { scale: 1.0 },
            TransmitFunction::Tanh { omega: 1.0 },
            20,
            power_from_channel_snr_db(0.0, 1.0),
        ),
    };
    let family = [
        TransmitFunction::Linear { alpha: 1.0 },
        TransmitFunction::Tanh { omega: 1.0 },
        TransmitFunction::Gudermannian { omega: 1.0 },
        TransmitFunction::Rational { omega: 1.0 },
    ];
    let mut results = Vec::new();
    for (k, f) in family.iter().enumerate() {
        let mut s = base.clone();
        s.network.transmit = *f;
        if f.omega().is_some() {
            let (omega, _) = optimal_omega(&s, 0.05, 5.0, 64).unwrap();
            s.network.transmit = f.with_omega(omega).unwrap();
        } else {
            s = with_af_transmit(&s).unwrap();
        }
        let e = *run_detection_experiment_at(&s, 1_000_000, 7, trial_stream_id(k, 0), false)
            .unwrap()
            .detection()
            .unwrap();
        results.push((f.kind_name(), e.pe, e.stderr));
    }
    let mut pass = true;
    for w in results.windows(2) {
        let sep = (w[1].1 - w[0].1) / (w[0].2.powi(2) + w[1].2.powi(2)).sqrt();
        pass &= sep >= 2.0;
    }
    let detail = results
        .windows(2)
        .map(|w| {
            let sep = (w[1].1 - w[0].1) / (w[0].2.powi(2) + w[1].2.powi(2)).sqrt();
            format!("{} {:.5} ≤ {} {:.5} ({sep:.2} se)", w[0].0, w[0].1, w[1].0, w[1].1)
        })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome {
        pass,
        detail: format!("{detail}; need ≥ 2 se each"),
    }
}

fn sup_distance(a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64) -> f64 {
    (0..=4000)
        .map(|k| -10.0 + 0.005 * k as f64)
        .map(|x| (a(x) - b(x)).abs())
        .fold(0.0, f64::max)
}

fn duality() -> Outcome {
    const TOL: f64 = 1e-6;
    let spec = QuadratureSpec::default();
    let sech = matched_density(f64::tanh, &spec).unwrap();
    let d_sech = sup_distance(|x| sech.pdf(x).unwrap(), |x| 1.0 / (std::f64::consts::PI * x.cosh()));
    let mut d_models: f64 = 0.0;
    for model in [
        NoiseModel::Gaussian { scale: 1.0 },
        NoiseModel::laplacian_with_variance(1.0),
    ] {
        let p = matched_density(locally_optimal_nonlinearity(&model), &spec).unwrap();
        d_models = d_models.max(sup_distance(|x| p.pdf(x).unwrap(), |x| Density::pdf(&model, x)));
    }
    Outcome {
        pass: d_sech <= TOL && d_models <= TOL,
        detail: format!("sup |p − sech/π| = {d_sech:.2e}; gaussian/laplacian round trip {d_models:.2e} (tol {TOL:e})"),
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut mismatched = Vec::new();
    let all = presets::presets();
    for p in &all {
        let csv = |workers: usize| {
            let out = dir.path().join(format!("{}-{workers}.csv", p.name));
            let options = RunOptions {
                workers: Some(workers),
                out: Some(out.clone()),
                default_seed: Some(11),
                ..Default::default()
            };
            run(&format!("preset:{}", p.name), &options).unwrap();
            std::fs::read(out).unwrap()
        };
        if csv(1) != csv(8) {
            mismatched.push(p.name);
        }
    }
    Outcome {
        pass: mismatched.is_empty(),
        detail: format!("{} presets at 1 and 8 workers; mismatches: {mismatched:?}", all.len()),
    }
}

fn property_suites() -> Outcome {
    // Condensed re-run of the module property suites; the full versions live
    // in each crate's tests directory.
    use boundedmac::numerics::{expect, invert_monotone};
    use boundedmac::RngStream;
    let spec = QuadratureSpec::default();
    let mut notes = Vec::new();
    let mut pass = true;

    let (theta, sigma) = (0.7, 1.3);
    let mut worst_z: f64 = 0.0;
    for (m, model) in models().iter().enumerate() {
        let f = TransmitFunction::Tanh { omega: 0.8 };
        let exact = expect(model, |n| f.eval(theta + sigma * n), &[], &spec).unwrap();
        let mut s = RngStream::new(1234, m as u64);
        let n = 10_000_000usize;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let v = f.eval(theta + sigma * model.sample_one(&mut s));
            sum += v;
            sq += v * v;
        }
        let mean = sum / n as f64;
        let se = ((sq / n as f64 - mean * mean) / (n as f64 - 1.0)).sqrt();
        worst_z = worst_z.max((mean - exact).abs() / se);
    }
    pass &= worst_z <= 3.0;
    notes.push(format!("quadrature vs MC max {worst_z:.2} se"));

    let mut monotone = true;
    for noise in models() {
        let net = network(noise, TransmitFunction::Tanh { omega: 1.0 }, 10, 10.0);
        let h = MeanResponse::new(&net);
        for k in 0..=40 {
            let t = -5.0 + 0.25 * k as f64;
            monotone &= h.eval(t + 1e-3).unwrap() > h.eval(t).unwrap();
        }
    }
    pass &= monotone;
    notes.push(format!("h strictly increasing: {monotone}"));

    let mut s = RngStream::new(2024, 0);
    let mut worst_inv: f64 = 0.0;
    for case in 0..100 {
        let (p1, p2, p3, x0) = (
            0.2 + 4.8 * s.uniform(),
            0.1 + 2.9 * s.uniform(),
            4.0 * s.uniform() - 2.0,
            6.0 * s.uniform() - 3.0,
        );
        let h = move |x: f64| {
            if case % 2 == 0 {
                p1 * (p2 * x + p3).tanh()
            } else {
                p1 * x.powi(3) + p2 * x
            }
        };
        let x = invert_monotone(|x| Ok(h(x)), h(x0), (-1.0, 1.0)).unwrap();
        worst_inv = worst_inv.max((x - x0).abs());
    }
    pass &= worst_inv <= 1e-8;
    notes.push(format!("inversion round trip max error {worst_inv:.1e}"));

    // Jarque–Bera at 1% (chi-square(2) critical value 9.2103).
    let sensors = 500usize;
    let mut worst_jb: f64 = 0.0;
    for (k, noise) in models()[..2].iter().enumerate() {
        let setup = EstimationSetup {
            theta: 1.0,
            network: network(*noise, TransmitFunction::Tanh { omega: 0.75 }, sensors, 10.0),
        };
        let h = MeanResponse::new(&setup.network).eval(1.0).unwrap();
        let p = setup.network.total_power.sqrt();
        let z =
            boundedmac::harness::run_received_signal_experiment_at(&setup, 10_000, 12, trial_stream_id(k, 0)).unwrap();
        let x: Vec<f64> = z.iter().map(|v| (sensors as f64).sqrt() * p * (v - h)).collect();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let m = |k: i32| x.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n;
        let (skew, kurt) = (m(3) / m(2).powf(1.5), m(4) / m(2).powi(2));
        worst_jb = worst_jb.max(n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0).powi(2)));
    }
    pass &= worst_jb < 9.2103;
    notes.push(format!("CLT Jarque–Bera max {worst_jb:.2} (crit 9.21)"));

    Outcome {
        pass,
        detail: notes.join("; "),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 asymptotic variance agreement", asv_agreement),
        ("2 linear closed forms", linear_closed_forms),
        ("3 cauchy robustness", cauchy_robustness),
        ("4 growing-noise crossover", growth_crossover),
        ("5 deflection limits", deflection_suite),
        ("6 deflection vs error-probability optimum", dc_pe_argmax),
        ("7 detection ordering at L=20", detection_ordering),
        ("8 score/density duality", duality),
        ("9 determinism across workers", determinism),
        ("10 property suites", property_suites),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            secs(start.elapsed())
        );
    }
    println!("acceptance: {}/{} criteria passed", 10 - failed, 10);
    if failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
