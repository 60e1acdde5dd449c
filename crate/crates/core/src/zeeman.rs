//! Gyromagnetic-tensor algebra: Zeeman splittings, nuclear-spin mixing and the
//! branching ratio of the Λ system.
//!
//! Each electronic level is treated as an effective nuclear spin 1/2 whose
//! quantization axis follows the tensor-weighted field `(γx·Bx, γy·By, γz·Bz)`.
//! The optical transition preserves the nuclear spin state, so the overlap of
//! the ground and excited spin eigenbases, which differ by a rotation through
//! the inter-axis angle θ, fixes `μs = cos(θ/2)` and `μw = sin(θ/2)`.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bisector_field, local_field, Direction3, SiteFrame, Vec3};

/// Diagonal gyromagnetic tensor in the site-local frame, MHz/T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GyroTensor {
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub gamma_z: f64,
}

impl GyroTensor {
    pub fn new(gamma_x: f64, gamma_y: f64, gamma_z: f64) -> Result<Self> {
        let t = Self {
            gamma_x,
            gamma_y,
            gamma_z,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let c = [self.gamma_x, self.gamma_y, self.gamma_z];
        if c.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "gyromagnetic components must be finite and >= 0, got {c:?}"
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            gamma_x: self.gamma_x * k,
            gamma_y: self.gamma_y * k,
            gamma_z: self.gamma_z * k,
        }
    }

    fn weighted(&self, b: &Vec3) -> Vec3 {
        Vec3::new(self.gamma_x * b.x, self.gamma_y * b.y, self.gamma_z * b.z)
    }
}

/// Ground (³H₆) and excited (³H₄) tensors of one site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPair {
    pub ground: GyroTensor,
    pub excited: GyroTensor,
}

impl LevelPair {
    /// Shipped defaults, tuned so that sites 3/5 and site 1 reproduce the
    /// measured and calculated ground splittings near Θ ≈ −50° (see README).
    pub const DEFAULT: LevelPair = LevelPair {
        ground: GyroTensor {
            gamma_x: 18.0,
            gamma_y: 424.0,
            gamma_z: 0.0,
        },
        excited: GyroTensor {
            gamma_x: 14.5,
            gamma_y: 100.0,
            gamma_z: 9.66,
        },
    };

    pub fn validate(&self) -> Result<()> {
        self.ground.validate()?;
        self.excited.validate()
    }
}

impl Default for LevelPair {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Derived Λ-system quantities for one site and field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaParams {
    /// MHz
    pub delta_g: f64,
    /// MHz
    pub delta_e: f64,
    pub axis_g: [f64; 3],
    pub axis_e: [f64; 3],
    #[serde(rename = "R")]
    pub r: f64,
    pub mu_s: f64,
    pub mu_w: f64,
}

impl LambdaParams {
    /// Rows: ground sublevels |1⟩, |2⟩. Columns: excited sublevels |3⟩, |4⟩.
    pub fn dipole_matrix(&self) -> Matrix2<f64> {
        dipole_matrix(self.mu_s, self.mu_w)
    }

    pub fn strong_strength(&self) -> f64 {
        self.mu_s * self.mu_s
    }

    pub fn weak_strength(&self) -> f64 {
        self.mu_w * self.mu_w
    }
}

pub fn dipole_matrix(mu_s: f64, mu_w: f64) -> Matrix2<f64> {
    Matrix2::new(mu_s, mu_w, -mu_w, mu_s)
}

/// Outcome of the spin-overlap computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branching {
    #[serde(rename = "R")]
    pub r: f64,
    pub mu_s: f64,
    pub mu_w: f64,
    /// Inter-axis angle after strong/weak relabeling, radians in [0, π/2].
    pub mixing_angle: f64,
}

/// Zeeman splitting `sqrt(Σ γᵢ² Bᵢ²)` in MHz for a site-local field in tesla.
pub fn splitting(t: &GyroTensor, b_local: &Vec3) -> f64 {
    t.weighted(b_local).norm()
}

/// Quantization axis of the effective spin 1/2 in a level.
pub fn effective_axis(t: &GyroTensor, b_local: &Vec3) -> Result<Direction3> {
    let w = t.weighted(b_local);
    if w.norm() == 0.0 {
        return Err(Error::DegenerateField);
    }
    Direction3::normalize(w)
}

/// Strong/weak dipole magnitudes from the ground and excited quantization axes.
///
/// Past θ = 90° the sublevel pairing that carries the larger dipole swaps, so
/// the angle is folded to `min(θ, π − θ)` and `R ≤ 1` always holds.
pub fn branching_ratio(axis_g: &Direction3, axis_e: &Direction3) -> Branching {
    let theta = axis_g.cross(axis_e).norm().atan2(axis_g.dot(axis_e));
    let folded = theta.min(std::f64::consts::PI - theta);
    let (mu_w, mu_s) = (folded / 2.0).sin_cos();
    let r = (mu_w / mu_s).powi(2);
    Branching {
        r,
        mu_s,
        mu_w,
        mixing_angle: folded,
    }
}

pub fn lambda_params(pair: &LevelPair, b_local: &Vec3) -> Result<LambdaParams> {
    let delta_g = splitting(&pair.ground, b_local);
    let delta_e = splitting(&pair.excited, b_local);
    let axis_g = effective_axis(&pair.ground, b_local)?;
    let axis_e = effective_axis(&pair.excited, b_local)?;
    let br = branching_ratio(&axis_g, &axis_e);
    Ok(LambdaParams {
        delta_g,
        delta_e,
        axis_g: axis_g.to_array(),
        axis_e: axis_e.to_array(),
        r: br.r,
        mu_s: br.mu_s,
        mu_w: br.mu_w,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub theta: f64,
    /// `None` where a splitting vanishes and R is undefined.
    pub params: Option<LambdaParams>,
}

/// R(Θ) for one site with the field swept through the bisector plane.
pub fn sweep_r(pair: &LevelPair, site: &SiteFrame, theta_grid: &[f64], magnitude: f64) -> Result<Vec<SweepPoint>> {
    if theta_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("theta grid must be strictly increasing".into()));
    }
    pair.validate()?;
    theta_grid
        .iter()
        .map(|&theta| {
            let b = local_field(site, &bisector_field(theta, magnitude)?);
            match lambda_params(pair, &b) {
                Ok(p) => Ok(SweepPoint { theta, params: Some(p) }),
                Err(Error::DegenerateField) => Ok(SweepPoint { theta, params: None }),
                Err(e) => Err(e),
            }
        })
        .collect()
}
