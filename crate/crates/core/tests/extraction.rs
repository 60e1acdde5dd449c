//! End-to-end extraction on measurement-scale and digitized-style inputs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use tmlambda::analysis::echo::{solve_r_from_echo, EchoDataset, EchoSample, Interpolation};
use tmlambda::analysis::{fit_nutation, FitFlag};
use tmlambda::coherent::NutationParams;
use tmlambda::trace::{Trace, UniformGrid};

/// Eight strong-leg points shaped like a measured weighted-echo curve: W rising
/// roughly linearly through the intersection, weak point at I0, 10 %
/// amplitude errors. Drive in units of I0.
fn measurement_scale() -> EchoDataset {
    let points = [
        (0.060, 0.0125),
        (0.080, 0.0255),
        (0.100, 0.0395),
        (0.120, 0.0600),
        (0.140, 0.0760),
        (0.160, 0.0980),
        (0.180, 0.1180),
        (0.200, 0.1350),
    ];
    EchoDataset {
        i0: 1.0,
        strong: points
            .iter()
            .map(|&(d, w)| EchoSample { drive: d, echo: w / d })
            .collect(),
        weak_echo: 0.0655,
        rel_sigma: 0.10,
    }
}

#[test]
fn measurement_scale_echo_dataset() {
    let s = solve_r_from_echo(&measurement_scale(), Interpolation::PiecewiseLinear).unwrap();
    assert!((s.r.value - 0.130).abs() <= 0.015, "R = {}", s.r.value);
    assert!(s.r.sigma > 0.005 && s.r.sigma < 0.02, "σ = {}", s.r.sigma);
}

#[test]
fn interpolation_choice_within_reported_uncertainty() {
    let data = measurement_scale();
    let base = solve_r_from_echo(&data, Interpolation::PiecewiseLinear).unwrap();
    for degree in 1..=3 {
        let alt = solve_r_from_echo(&data, Interpolation::Polynomial { degree }).unwrap();
        assert!(
            (alt.r.value - base.r.value).abs() < base.r.sigma,
            "degree {degree}: {} vs {} ± {}",
            alt.r.value,
            base.r.value,
            base.r.sigma
        );
    }
}

#[test]
fn digitized_style_nutation_trace() {
    // coarse 10 µs record, first 0.2 µs gated off, 2 % detector noise,
    // arbitrary detector units
    let grid = UniformGrid::new(0.2, 10.0, 99).unwrap();
    let model = NutationParams {
        omega: 2.6,
        density: 0.32,
    };
    let noise = Normal::new(0.0, 0.02).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let values: Vec<f64> = grid
        .points()
        .map(|t| 3.1 * (model.intensity(t) + noise.sample(&mut rng)))
        .collect();
    let trace = Trace::new(grid.start, grid.step(), values, "t_us", "signal_V").unwrap();
    let fit = fit_nutation(&trace).unwrap();
    assert!((fit.param("omega") - 2.6).abs() < 0.1, "Ω = {}", fit.param("omega"));
    assert!((fit.param("D") - 0.32).abs() < 0.03, "D = {}", fit.param("D"));
    assert!(!fit.has_flag(FitFlag::OutOfModel));
}

#[test]
fn nutation_one_percent_noise() {
    let omega = 2.0 * std::f64::consts::PI * 2.6;
    let grid = UniformGrid::new(0.0, 2.0, 400).unwrap();
    let model = NutationParams { omega, density: 0.32 };
    let noise = Normal::new(0.0, 0.01).unwrap();
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = grid
            .points()
            .map(|t| model.intensity(t) + noise.sample(&mut rng))
            .collect();
        let trace = Trace::new(0.0, grid.step(), values, "t_us", "intensity_rel").unwrap();
        let fit = fit_nutation(&trace).unwrap();
        assert!((fit.param("omega") / omega - 1.0).abs() < 0.02);
        assert!((fit.param("D") / 0.32 - 1.0).abs() < 0.02);
        assert!(fit.sigma("D").unwrap() > 0.0);
    }
}
