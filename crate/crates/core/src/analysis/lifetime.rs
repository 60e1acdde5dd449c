//! Single-exponential decay fits for spectral-hole depth vs delay.

use crate::error::{Error, Result};

use super::fit::{fit_curve, CurveModel, FitFlag, FitResult};

pub const MIN_DECAY_SAMPLES: usize = 4;

/// A rate is "resolved" when it exceeds this many standard deviations.
const RESOLVED_SIGMAS: f64 = 2.0;
/// ...and changes the depth by more than this fraction over the record.
const MIN_RELATIVE_DECAY: f64 = 1e-9;

/// `A·exp(−k·t)`, fitted in the rate `k` so that a flat signal is a regular
/// point (k = 0) rather than T1 → ∞.
pub struct ExponentialModel;

impl CurveModel for ExponentialModel {
    fn names(&self) -> &'static [&'static str] {
        &["A", "rate"]
    }

    fn eval(&self, p: &[f64], t: f64) -> f64 {
        p[0] * (-p[1] * t).exp()
    }

    fn gradient(&self, p: &[f64], t: f64, out: &mut [f64]) {
        let e = (-p[1] * t).exp();
        out[0] = e;
        out[1] = -p[0] * t * e;
    }
}

/// Fits depth samples `(t [s], depth)`.
///
/// Adds `T1` (and its sigma) when the rate is resolved; otherwise sets
/// [`FitFlag::NoMeasurableDecay`] and reports `T1_lower_bound =
/// 1/(k + 2σk)` when that is finite. A significantly growing signal is
/// rejected.
pub fn fit_exponential(samples: &[(f64, f64)]) -> Result<FitResult> {
    if samples.len() < MIN_DECAY_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "decay fit needs at least {MIN_DECAY_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let ts: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();

    // log-linear start on the positive samples
    let pos: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.1 > 0.0)
        .map(|&(t, y)| (t, y.ln()))
        .collect();
    let init = if pos.len() >= 2 {
        let n = pos.len() as f64;
        let (st, sl) = pos.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let stt: f64 = pos.iter().map(|p| p.0 * p.0).sum();
        let stl: f64 = pos.iter().map(|p| p.0 * p.1).sum();
        let den = n * stt - st * st;
        if den.abs() > 0.0 {
            let slope = (n * stl - st * sl) / den;
            let icpt = (sl - slope * st) / n;
            [icpt.exp(), -slope]
        } else {
            [ys.iter().sum::<f64>() / n, 0.0]
        }
    } else {
        [ys.iter().cloned().fold(f64::MIN, f64::max), 0.0]
    };

    let mut fit = fit_curve(&ExponentialModel, &ts, &ys, &init)?;
    let k = fit.param("rate");
    let sk = fit.sigma("rate").unwrap_or(f64::INFINITY);
    if k < -RESOLVED_SIGMAS * sk {
        return Err(Error::InconsistentData(format!(
            "signal grows (rate {k} ± {sk} s⁻¹): negative lifetime"
        )));
    }
    let span = ts.iter().cloned().fold(f64::MIN, f64::max) - ts.iter().cloned().fold(f64::MAX, f64::min);
    if k > RESOLVED_SIGMAS * sk && k * span > MIN_RELATIVE_DECAY {
        fit.parameters.insert("T1".into(), 1.0 / k);
        fit.sigmas.insert("T1".into(), sk / (k * k));
    } else {
        fit.flag(FitFlag::NoMeasurableDecay);
        let den = k.max(0.0) + RESOLVED_SIGMAS * sk;
        if den > 0.0 && den.is_finite() {
            fit.parameters.insert("T1_lower_bound".into(), 1.0 / den);
        }
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::popdyn::hole_decay;

    #[test]
    fn noiseless_round_trip() {
        let samples: Vec<(f64, f64)> = (0..=20)
            .map(|i| {
                let t = 0.5 * i as f64;
                (t, hole_decay(0.8, 4.5, t).unwrap())
            })
            .collect();
        let fit = fit_exponential(&samples).unwrap();
        assert!((fit.param("T1") - 4.5).abs() < 1e-6);
        assert!((fit.param("A") - 0.8).abs() < 1e-9);
        assert!(fit.flags.is_empty());
    }

    #[test]
    fn flat_signal_gives_lower_bound_flag() {
        let flat: Vec<(f64, f64)> = (0..=10).map(|i| (i as f64, 0.6)).collect();
        let fit = fit_exponential(&flat).unwrap();
        assert!(fit.has_flag(FitFlag::NoMeasurableDecay));
        assert!(!fit.parameters.contains_key("T1"));

        // no decay, ±2 % wiggle over 10 s
        let wiggle = [0.01, -0.02, 0.015, 0.0, -0.01, 0.02, -0.015, 0.005, -0.005, 0.01, -0.01];
        let slow: Vec<(f64, f64)> = (0..=10).map(|i| (i as f64, 1.0 + wiggle[i])).collect();
        let fit = fit_exponential(&slow).unwrap();
        assert!(fit.has_flag(FitFlag::NoMeasurableDecay));
        let lb = fit.param("T1_lower_bound");
        assert!(lb > 10.0 && lb.is_finite(), "lower bound {lb}");
    }

    #[test]
    fn growth_and_short_input_rejected() {
        let grow: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, (0.2 * i as f64).exp())).collect();
        assert!(matches!(fit_exponential(&grow), Err(Error::InconsistentData(_))));
        assert!(fit_exponential(&[(0.0, 1.0), (1.0, 0.5), (2.0, 0.25)]).is_err());
    }
}
