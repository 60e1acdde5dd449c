//! Closed-form coherent-transient models: optical nutation in an infinitely
//! inhomogeneously broadened thin sample, optical-density bookkeeping under
//! pumping/repumping, photon-echo intensity scaling and π-pulse durations.

pub mod bessel;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{Trace, UniformGrid};

pub use bessel::{bessel_j, bessel_j0, bessel_j1, bessel_j2, j1_over_x, j2_first_zero};

/// Upper bound on the optical density for which the nutation formula holds.
pub const MAX_NUTATION_DENSITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NutationParams {
    /// Rabi frequency at beam center, rad/µs.
    pub omega: f64,
    /// Optical density (base 10).
    pub density: f64,
}

impl NutationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidInput(format!(
                "Rabi frequency must be > 0, got {}",
                self.omega
            )));
        }
        if !(self.density >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "optical density must be >= 0, got {}",
                self.density
            )));
        }
        if self.density >= MAX_NUTATION_DENSITY {
            return Err(Error::ModelValidity(self.density));
        }
        Ok(())
    }

    /// Transmitted intensity relative to the incident one at time `t` (µs):
    /// `1 − 2(1 − 10^−D)·J1(Ωt)/(Ωt)`. At t = 0 this is the Beer–Lambert value.
    pub fn intensity(&self, t: f64) -> f64 {
        let contrast = 1.0 - 10f64.powf(-self.density);
        1.0 - 2.0 * contrast * j1_over_x(self.omega * t)
    }
}

/// Nutation signal `I(t)/I₀` on a time grid in µs.
pub fn nutation_trace(params: &NutationParams, grid: &UniformGrid) -> Result<Trace> {
    params.validate()?;
    Trace::from_fn(grid, "t_us", "intensity_rel", |t| params.intensity(t))
}

/// Time (µs) of the first transmission maximum, `j₂,₁/Ω`.
pub fn first_max_time(omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!("Rabi frequency must be > 0, got {omega}")));
    }
    Ok(j2_first_zero() / omega)
}

/// `D = log10(I(∞)/I(0))` from the saturated and initial transmission.
pub fn density_from_contrast(i_inf: f64, i_0: f64) -> Result<f64> {
    if !(i_0 > 0.0) || !(i_inf > 0.0) {
        return Err(Error::InvalidInput(format!(
            "intensities must be positive (I∞ = {i_inf}, I0 = {i_0})"
        )));
    }
    if i_inf < i_0 {
        return Err(Error::InvalidInput(format!(
            "saturated intensity {i_inf} below initial intensity {i_0}"
        )));
    }
    Ok((i_inf / i_0).log10())
}

/// Optical densities seen under the three repumping schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeDensities {
    /// Classes (i)+(ii): repump at ν₀ − Δg.
    pub d_sw: f64,
    /// Class (iv) only, weak leg: repump at ν₀ + Δg + Δe.
    pub d_w: f64,
    /// Class (iii) only, strong leg: repump at ν₀ + Δg − Δe.
    pub d_s: f64,
}

/// Two of the three excited sites are resonant in the Λ configuration, hence
/// the 2/3 factor on the zero-field density `d0`.
pub fn composite_densities(d0: f64, rho: f64, r: f64) -> Result<CompositeDensities> {
    if !(d0 >= 0.0) || !(0.0..=1.0).contains(&rho) || !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidInput(format!(
            "need D0 >= 0, ρ and R in [0, 1] (D0 = {d0}, ρ = {rho}, R = {r})"
        )));
    }
    let d_sw = 2.0 / 3.0 * d0 * rho;
    let d_w = d_sw * r / (1.0 + r);
    let d_s = d_sw / (1.0 + r);
    Ok(CompositeDensities { d_sw, d_w, d_s })
}

/// Echo response `g` of a transition driven at reduced intensity
/// `x = μ²·I`. Must vanish at zero drive.
pub trait EchoResponse {
    fn g(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64> EchoResponse for F {
    fn g(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Two equal-intensity pulses of area `θ = a·√x`: the echo field goes as
/// `sin θ · sin²(θ/2)`, so `g(x) = sin²θ · sin⁴(θ/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPulseEcho {
    pub area_coeff: f64,
}

impl EchoResponse for TwoPulseEcho {
    fn g(&self, x: f64) -> f64 {
        let theta = self.area_coeff * x.max(0.0).sqrt();
        theta.sin().powi(2) * (0.5 * theta).sin().powi(4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Strong,
    Weak,
}

/// Echo intensity on either leg of the Λ.
#[derive(Debug, Clone, Copy)]
pub struct EchoModel<G> {
    pub response: G,
    /// Strong-leg strength μs².
    pub mu_s_sq: f64,
}

impl<G: EchoResponse> EchoModel<G> {
    pub fn new(response: G, mu_s_sq: f64) -> Self {
        Self { response, mu_s_sq }
    }

    /// `μ²·g(μ²·I)` for a leg of strength `mu_sq`.
    fn leg(&self, mu_sq: f64, intensity: f64) -> f64 {
        mu_sq * self.response.g(mu_sq * intensity)
    }

    pub fn strong(&self, intensity: f64) -> f64 {
        self.leg(self.mu_s_sq, intensity)
    }

    /// Weak leg with μw² = R·μs².
    pub fn weak(&self, intensity: f64, r: f64) -> f64 {
        self.leg(r * self.mu_s_sq, intensity)
    }
}

pub fn echo_intensity<G: EchoResponse>(model: &EchoModel<G>, intensity: f64, branch: Branch, r: f64) -> Result<f64> {
    if !(intensity >= 0.0) {
        return Err(Error::InvalidInput(format!("intensity must be >= 0, got {intensity}")));
    }
    Ok(match branch {
        Branch::Strong => model.strong(intensity),
        Branch::Weak => model.weak(intensity, r),
    })
}

/// π-pulse duration on the weak leg given the strong-leg one: `t / √R`.
pub fn pi_pulse_duration(t_pi_strong: f64, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::ForbiddenTransition);
    }
    if !(r > 0.0) || !(t_pi_strong >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need R > 0 and t >= 0 (R = {r}, t = {t_pi_strong})"
        )));
    }
    Ok(t_pi_strong / r.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(stop: f64, n: usize) -> UniformGrid {
        UniformGrid::new(0.0, stop, n).unwrap()
    }

    #[test]
    fn nutation_limits() {
        let p = NutationParams {
            omega: 2.6,
            density: 0.32,
        };
        assert!((p.intensity(0.0) - 10f64.powf(-0.32)).abs() < 1e-15);
        assert!((p.intensity(1e-9) - 10f64.powf(-0.32)).abs() < 1e-12);
        assert!((p.intensity(1e5) - 1.0).abs() < 1e-6);
        let t = nutation_trace(&p, &grid(10.0, 501)).unwrap();
        assert_eq!(t.len(), 501);
        assert_eq!(t.values[0], p.intensity(0.0));
    }

    #[test]
    fn nutation_rejects_thick_samples() {
        let p = NutationParams {
            omega: 2.6,
            density: 0.5,
        };
        assert_eq!(nutation_trace(&p, &grid(10.0, 11)), Err(Error::ModelValidity(0.5)));
        let p = NutationParams {
            omega: 0.0,
            density: 0.1,
        };
        assert!(nutation_trace(&p, &grid(10.0, 11)).is_err());
    }

    #[test]
    fn first_maximum_rule() {
        let omega = 2.0 * PI * 2.6;
        let t = first_max_time(omega).unwrap();
        assert!((omega * t - 5.1356).abs() < 1e-3);
        assert!((omega * t - 5.1).abs() < 0.05);
        assert!((first_max_time(2.0 * omega).unwrap() - t / 2.0).abs() < 1e-15);
        // measured Rabi frequency: first maximum at about 2 µs
        assert!((first_max_time(2.6).unwrap() - 2.0).abs() < 0.05);
    }

    #[test]
    fn trace_maximum_matches_first_max_time() {
        let p = NutationParams {
            omega: 2.0 * PI * 2.6,
            density: 0.32,
        };
        let g = grid(1.0, 4001);
        let t = nutation_trace(&p, &g).unwrap();
        let i = (1..t.len() - 1)
            .find(|&i| t.values[i] > t.values[i - 1] && t.values[i] >= t.values[i + 1])
            .unwrap();
        assert!((t.x(i) - first_max_time(p.omega).unwrap()).abs() <= g.step());
    }

    #[test]
    fn contrast_examples() {
        assert_eq!(density_from_contrast(1.0, 1.0).unwrap(), 0.0);
        assert!((density_from_contrast(10.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((density_from_contrast(10f64.powf(0.36), 1.0).unwrap() - 0.36).abs() < 1e-15);
        assert!(density_from_contrast(1.0, 0.0).is_err());
        assert!(density_from_contrast(0.5, 1.0).is_err());
    }

    #[test]
    fn composite_density_fixtures() {
        let c = composite_densities(0.3, 0.4, 0.0).unwrap();
        assert_eq!(c.d_w, 0.0);
        assert_eq!(c.d_s, c.d_sw);
        let c = composite_densities(0.36, 0.696, 0.121).unwrap();
        assert!((c.d_sw - 0.167).abs() < 5e-4);
        assert!((c.d_w - 0.018).abs() < 5e-4);
        assert!(composite_densities(0.36, 1.2, 0.1).is_err());
    }

    #[test]
    fn echo_examples() {
        let model = EchoModel::new(TwoPulseEcho { area_coeff: 3.7 }, 0.8);
        assert_eq!(echo_intensity(&model, 0.0, Branch::Strong, 0.2).unwrap(), 0.0);
        assert_eq!(echo_intensity(&model, 0.0, Branch::Weak, 0.2).unwrap(), 0.0);
        assert!(echo_intensity(&model, -1.0, Branch::Strong, 0.2).is_err());

        // linear response: I_w/I_s = R² at equal drive
        let lin = EchoModel::new(|x: f64| x, 0.9);
        for r in [0.05, 0.13, 0.7] {
            let ratio = lin.weak(1.7, r) / lin.strong(1.7);
            assert!((ratio - r * r).abs() < 1e-14);
        }
    }

    #[test]
    fn pi_pulse_examples() {
        assert_eq!(pi_pulse_duration(1.2, 1.0).unwrap(), 1.2);
        let t = pi_pulse_duration(1.2, 0.125).unwrap();
        assert!((t - 3.394).abs() < 1e-3);
        assert!((t - 3.4).abs() < 0.01);
        assert_eq!(pi_pulse_duration(1.0, 0.25).unwrap(), 2.0);
        assert_eq!(pi_pulse_duration(1.0, 0.0), Err(Error::ForbiddenTransition));
    }

    proptest! {
        #[test]
        fn nutation_stays_in_envelope(omega in 0.1f64..20.0, d in 0.0f64..0.49, t in 0.0f64..50.0) {
            // min J1(x)/x is at j₂,₁
            let min_ratio = j1_over_x(j2_first_zero()).abs();
            let p = NutationParams { omega, density: d };
            let v = p.intensity(t);
            let c = 1.0 - 10f64.powf(-d);
            prop_assert!(v >= 10f64.powf(-d) - 1e-12);
            prop_assert!(v <= 1.0 + 2.0 * c * min_ratio + 1e-12);
        }

        #[test]
        fn contrast_recovers_density(omega in 0.5f64..20.0, d in 0.0f64..0.49) {
            let p = NutationParams { omega, density: d };
            let i0 = p.intensity(0.0);
            let i_inf = p.intensity(1e9);
            prop_assert!((density_from_contrast(i_inf, i0).unwrap() - d).abs() < 1e-6);
        }

        #[test]
        fn composite_identity(d0 in 0.0f64..2.0, rho in 0.0f64..1.0, r in 0.0f64..1.0) {
            let c = composite_densities(d0, rho, r).unwrap();
            prop_assert!((c.d_w + c.d_s - c.d_sw).abs() < 1e-12);
        }

        #[test]
        fn weak_strong_identity(
            a in 0.5f64..6.0,
            mu in 0.5f64..1.0,
            r in 0.001f64..1.0,
            i in 0.0f64..5.0,
        ) {
            let model = EchoModel::new(TwoPulseEcho { area_coeff: a }, mu);
            let w = model.weak(i, r);
            let s = r * model.strong(r * i);
            prop_assert!((w - s).abs() <= 1e-12 * (w.abs() + 1e-12));
        }
    }
}
