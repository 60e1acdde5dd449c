//! Closed-form inversions of the composite optical-density relations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub sigma: f64,
}

impl Measured {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, sigma: 0.0 }
    }

    fn check(self, what: &str) -> Result<Self> {
        if !self.value.is_finite() || !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "{what} must be finite with sigma >= 0, got {} ± {}",
                self.value, self.sigma
            )));
        }
        Ok(self)
    }
}

/// Branching ratio from the weak-leg and combined densities measured with the
/// repump on ν₀+Δg+Δe and ν₀−Δg: `R = D_w/(D_sw − D_w)`.
///
/// The sigma is first-order propagation, treating the two inputs as
/// independent.
pub fn extract_r_from_densities(d_w: Measured, d_sw: Measured) -> Result<Measured> {
    let d_w = d_w.check("D_w")?;
    let d_sw = d_sw.check("D_sw")?;
    if d_w.value < 0.0 {
        return Err(Error::InvalidInput(format!("D_w must be >= 0, got {}", d_w.value)));
    }
    if d_w.value >= d_sw.value {
        return Err(Error::InconsistentData(format!(
            "weak-leg density {} is not below the combined density {}",
            d_w.value, d_sw.value
        )));
    }
    let diff = d_sw.value - d_w.value;
    let r = d_w.value / diff;
    let dr_dw = d_sw.value / (diff * diff);
    let dr_dsw = -d_w.value / (diff * diff);
    let sigma = (dr_dw * d_w.sigma).hypot(dr_dsw * d_sw.sigma);
    Ok(Measured::new(r, sigma))
}

/// Relative population of the resonant ground sublevel, `ρ = 3·D_sw/(2·D₀)`.
pub fn extract_rho(d_sw: Measured, d0: Measured) -> Result<Measured> {
    let d_sw = d_sw.check("D_sw")?;
    let d0 = d0.check("D0")?;
    if !(d0.value > 0.0) {
        return Err(Error::InvalidInput(format!("D0 must be > 0, got {}", d0.value)));
    }
    let rho = 1.5 * d_sw.value / d0.value;
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InconsistentData(format!(
            "population fraction {rho} outside [0, 1]"
        )));
    }
    let sigma = (1.5 * d_sw.sigma / d0.value).hypot(rho * d0.sigma / d0.value);
    Ok(Measured::new(rho, sigma))
}
