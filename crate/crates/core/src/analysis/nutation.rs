//! Fitting the thin-sample nutation formula to a transmitted-intensity trace.

use crate::coherent::{bessel_j2, j1_over_x, j2_first_zero, MAX_NUTATION_DENSITY};
use crate::error::{Error, Result};
use crate::trace::Trace;

use super::fit::{fit_curve, residual_sum_of_squares, CurveModel, FitFlag, FitResult};

pub const MIN_NUTATION_SAMPLES: usize = 20;

/// `I(t) = I₀·[1 − 2(1 − 10^−D)·J1(Ωt)/(Ωt)]` with parameters (I₀, Ω, D).
///
/// The scale `I₀` is fitted so the result does not depend on the units of
/// the trace.
pub struct NutationModel;

impl CurveModel for NutationModel {
    fn names(&self) -> &'static [&'static str] {
        &["I0", "omega", "D"]
    }

    fn eval(&self, p: &[f64], t: f64) -> f64 {
        let contrast = 1.0 - 10f64.powf(-p[2]);
        p[0] * (1.0 - 2.0 * contrast * j1_over_x(p[1] * t))
    }

    fn gradient(&self, p: &[f64], t: f64, out: &mut [f64]) {
        let (a, omega, d) = (p[0], p[1], p[2]);
        let transmission = 10f64.powf(-d);
        let contrast = 1.0 - transmission;
        let x = omega * t;
        let f = j1_over_x(x);
        // d/dx [J1(x)/x] = −J2(x)/x, and J2(x)/x → x/8 near 0
        let df = if x.abs() < 1e-4 { -x / 8.0 } else { -bessel_j2(x) / x };
        out[0] = 1.0 - 2.0 * contrast * f;
        out[1] = -2.0 * a * contrast * df * t;
        out[2] = -2.0 * a * std::f64::consts::LN_10 * transmission * f;
    }
}

/// Scale and contrast at fixed Ω: the model is linear in (I₀, I₀·c).
fn linear_profile(omega: f64, ts: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    // y = a − b·2f(Ωt)
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &y) in ts.iter().zip(ys) {
        let u = -2.0 * j1_over_x(omega * t);
        s11 += 1.0;
        s12 += u;
        s22 += u * u;
        r1 += y;
        r2 += u * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() < 1e-300 {
        return None;
    }
    let a = (r1 * s22 - r2 * s12) / det;
    let b = (s11 * r2 - s12 * r1) / det;
    if !(a > 0.0) || !(b > 0.0) || b >= a {
        return None;
    }
    let d = -(1.0 - b / a).log10();
    let rss = residual_sum_of_squares(&NutationModel, &[a, omega, d], ts, ys);
    Some((a, d, rss))
}

/// Starting Ω from the first transmission maximum, `j₂,₁/t_max`, found on a
/// lightly smoothed copy of the trace.
fn first_max_guess(ts: &[f64], ys: &[f64]) -> Option<f64> {
    let w = (ys.len() / 50).max(1);
    let smooth: Vec<f64> = (0..ys.len())
        .map(|i| {
            let lo = i.saturating_sub(w);
            let hi = (i + w + 1).min(ys.len());
            ys[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let (imax, _) = smooth
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    (ts[imax] > 0.0).then(|| j2_first_zero() / ts[imax])
}

/// Fits (I₀, Ω, D) to a nutation trace (time in µs, Ω in rad/µs).
///
/// Ω is seeded both from the first-maximum rule and from a profile scan over
/// Ω (where the model is linear in the other two parameters); the start with
/// the lowest residual is refined by Levenberg–Marquardt.
pub fn fit_nutation(trace: &Trace) -> Result<FitResult> {
    if trace.len() < MIN_NUTATION_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "nutation fit needs at least {MIN_NUTATION_SAMPLES} samples, got {}",
            trace.len()
        )));
    }
    let ts: Vec<f64> = trace.xs().collect();
    let ys = &trace.values;
    let span = trace.x_end();
    if !(span > 0.0) {
        return Err(Error::InvalidInput("nutation trace must extend past t = 0".into()));
    }

    // Ω·t_end from 1 up to the sampling limit
    let omega_lo = 1.0 / span;
    let omega_hi = std::f64::consts::PI / trace.x_step;
    let steps = 400;
    let mut candidates: Vec<f64> = (0..=steps)
        .map(|i| omega_lo * (omega_hi / omega_lo).powf(i as f64 / steps as f64))
        .collect();
    candidates.extend(first_max_guess(&ts, ys));

    let best = candidates
        .iter()
        .filter_map(|&w| linear_profile(w, &ts, ys).map(|(a, d, rss)| (a, w, d, rss)))
        .min_by(|x, y| x.3.total_cmp(&y.3));
    let init = match best {
        Some((a, w, d, _)) => [a, w, d],
        None => {
            let tail = &ys[ys.len() * 4 / 5..];
            let a = tail.iter().sum::<f64>() / tail.len() as f64;
            let d = if ys[0] > 0.0 && a > ys[0] {
                (a / ys[0]).log10()
            } else {
                0.1
            };
            [a, first_max_guess(&ts, ys).unwrap_or(10.0 / span), d]
        }
    };

    let mut fit = fit_curve(&NutationModel, &ts, ys, &init)?;
    // J1(x)/x is even in x
    if let Some(w) = fit.parameters.get_mut("omega") {
        *w = w.abs();
    }
    if fit.param("D") >= MAX_NUTATION_DENSITY {
        fit.flag(FitFlag::OutOfModel);
    }
    if fit.param("omega") * span < j2_first_zero() {
        fit.flag(FitFlag::NoFullOscillation);
    }
    Ok(fit)
}
