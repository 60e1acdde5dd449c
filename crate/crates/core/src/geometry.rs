//! Crystal-frame geometry of the six D₂ substitution sites.
//!
//! All vectors are expressed in the cubic crystal frame. Each site carries an
//! orthonormal, right-handed local triad; the optical transition dipole lies
//! along the local y axis.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Tolerance on unit norm and orthogonality of frame axes.
pub const FRAME_TOL: f64 = 1e-12;

/// Couplings below this magnitude count as "not excited".
pub const COUPLING_CUTOFF: f64 = 1e-12;

/// A unit vector in the crystal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction3(Vec3);

impl Direction3 {
    /// Normalizes `v`; fails on a zero or non-finite vector.
    pub fn normalize(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidInput(format!("cannot normalize vector {v:?}")));
        }
        Ok(Self(v / n))
    }

    /// Accepts `v` only if it is already unit within [`FRAME_TOL`].
    pub fn unit(v: Vec3) -> Result<Self> {
        if (v.norm() - 1.0).abs() > FRAME_TOL {
            return Err(Error::InvalidInput(format!(
                "vector {v:?} is not unit (norm {})",
                v.norm()
            )));
        }
        Ok(Self(v))
    }

    /// Direction of the crystal axis `[h k l]`.
    pub fn miller(h: i32, k: i32, l: i32) -> Self {
        Self::normalize(Vec3::new(h as f64, k as f64, l as f64)).expect("nonzero Miller indices")
    }

    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }
}

impl std::ops::Deref for Direction3 {
    type Target = Vec3;
    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

/// Local axes of one substitution site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteFrame {
    site_id: u8,
    x_axis: Direction3,
    y_axis: Direction3,
    z_axis: Direction3,
}

impl SiteFrame {
    /// Validates orthonormality and handedness.
    pub fn new(site_id: u8, x: Vec3, y: Vec3, z: Vec3) -> Result<Self> {
        if !(1..=6).contains(&site_id) {
            return Err(Error::InvalidFrame(format!("site id {site_id} outside 1..6")));
        }
        let ctx = |e: Error| Error::InvalidFrame(format!("site {site_id}: {e}"));
        let x_axis = Direction3::unit(x).map_err(ctx)?;
        let y_axis = Direction3::unit(y).map_err(ctx)?;
        let z_axis = Direction3::unit(z).map_err(ctx)?;
        for (a, b, name) in [(x, y, "x·y"), (y, z, "y·z"), (z, x, "z·x")] {
            if a.dot(&b).abs() > FRAME_TOL {
                return Err(Error::InvalidFrame(format!(
                    "site {site_id}: axes not orthogonal ({name} = {})",
                    a.dot(&b)
                )));
            }
        }
        if (x.cross(&y) - z).norm() > FRAME_TOL {
            return Err(Error::InvalidFrame(format!("site {site_id}: triad is left-handed")));
        }
        Ok(Self {
            site_id,
            x_axis,
            y_axis,
            z_axis,
        })
    }

    /// Builds the right-handed triad from the dipole (local y) and local z
    /// directions, which need not be normalized.
    pub fn from_dipole_and_z(site_id: u8, y: Vec3, z: Vec3) -> Result<Self> {
        let y = Direction3::normalize(y)?;
        let z = Direction3::normalize(z)?;
        Self::new(site_id, y.cross(&z), *y, *z)
    }

    pub fn site_id(&self) -> u8 {
        self.site_id
    }

    pub fn x_axis(&self) -> Direction3 {
        self.x_axis
    }

    pub fn y_axis(&self) -> Direction3 {
        self.y_axis
    }

    pub fn z_axis(&self) -> Direction3 {
        self.z_axis
    }

    /// Optical transition dipole direction.
    pub fn dipole(&self) -> Direction3 {
        self.y_axis
    }

    /// Rows are the local axes: `rotation() * v` gives local coordinates.
    pub fn rotation(&self) -> Matrix3<f64> {
        Matrix3::from_rows(&[
            self.x_axis.transpose(),
            self.y_axis.transpose(),
            self.z_axis.transpose(),
        ])
    }

    /// Applies a proper rotation to the whole triad.
    pub fn rotated(&self, rot: &Matrix3<f64>) -> Result<Self> {
        Self::new(self.site_id, rot * *self.x_axis, rot * *self.y_axis, rot * *self.z_axis)
    }
}

/// The six site frames, indexed by site id.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    sites: Vec<SiteFrame>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameFile {
    site: Vec<FrameRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameRecord {
    id: u8,
    x: [f64; 3],
    y: [f64; 3],
    z: [f64; 3],
}

impl Default for FrameSet {
    /// Dipoles along the six ⟨110⟩ axes, local z along the perpendicular
    /// ⟨001⟩ axis, labelled so that E∥[111] excites {1,3,5} and E∥[-1-11]
    /// excites {1,4,6}.
    fn default() -> Self {
        let table: [(u8, [i32; 3], [i32; 3]); 6] = [
            (1, [1, 1, 0], [0, 0, 1]),
            (2, [1, -1, 0], [0, 0, 1]),
            (3, [1, 0, 1], [0, 1, 0]),
            (4, [1, 0, -1], [0, 1, 0]),
            (5, [0, 1, 1], [1, 0, 0]),
            (6, [0, 1, -1], [1, 0, 0]),
        ];
        let sites = table
            .iter()
            .map(|&(id, y, z)| {
                let y = *Direction3::miller(y[0], y[1], y[2]);
                let z = *Direction3::miller(z[0], z[1], z[2]);
                SiteFrame::from_dipole_and_z(id, y, z).expect("default frames are orthonormal")
            })
            .collect();
        Self { sites }
    }
}

impl FrameSet {
    /// Requires exactly one frame for each id 1..=6.
    pub fn new(mut sites: Vec<SiteFrame>) -> Result<Self> {
        sites.sort_by_key(|s| s.site_id);
        let ids: Vec<u8> = sites.iter().map(|s| s.site_id).collect();
        if ids != [1, 2, 3, 4, 5, 6] {
            return Err(Error::InvalidFrame(format!(
                "expected one record for each site 1..6, got ids {ids:?}"
            )));
        }
        Ok(Self { sites })
    }

    /// Parses the TOML frame file (`[[site]]` records with `id`, `x`, `y`, `z`).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: FrameFile = toml::from_str(text).map_err(|e| Error::Config(format!("frame file: {e}")))?;
        let sites = file
            .site
            .into_iter()
            .map(|r| SiteFrame::new(r.id, r.x.into(), r.y.into(), r.z.into()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(sites)
    }

    pub fn to_toml_string(&self) -> String {
        let file = FrameFile {
            site: self
                .sites
                .iter()
                .map(|s| FrameRecord {
                    id: s.site_id,
                    x: s.x_axis.to_array(),
                    y: s.y_axis.to_array(),
                    z: s.z_axis.to_array(),
                })
                .collect(),
        };
        toml::to_string(&file).expect("frame records serialize")
    }

    pub fn site(&self, id: u8) -> Result<&SiteFrame> {
        self.sites
            .iter()
            .find(|s| s.site_id == id)
            .ok_or_else(|| Error::InvalidInput(format!("no site {id}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = &SiteFrame> {
        self.sites.iter()
    }

    pub fn rotated(&self, rot: &Matrix3<f64>) -> Result<Self> {
        Self::new(self.sites.iter().map(|s| s.rotated(rot)).collect::<Result<_>>()?)
    }
}

/// Magnetic field setting: either the bisector-plane angle form or an explicit
/// crystal-frame direction scaled by `magnitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSetup {
    /// Tesla.
    pub magnitude: f64,
    /// Degrees from [001] within the (001)/(110) bisector plane.
    #[serde(default)]
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_vector: Option<[f64; 3]>,
}

impl FieldSetup {
    pub fn bisector(theta: f64, magnitude: f64) -> Self {
        Self {
            magnitude,
            theta,
            explicit_vector: None,
        }
    }

    /// Field vector in tesla, crystal frame.
    pub fn vector(&self) -> Result<Vec3> {
        match self.explicit_vector {
            Some(v) => {
                if self.magnitude < 0.0 {
                    return Err(Error::InvalidInput("negative field magnitude".into()));
                }
                Ok(*Direction3::normalize(v.into())? * self.magnitude)
            }
            None => bisector_field(self.theta, self.magnitude),
        }
    }
}

/// Field of `magnitude` tesla in the bisector plane spanned by [001] and [110],
/// at `theta_deg` from [001]: `B·(sinΘ/√2, sinΘ/√2, cosΘ)`.
pub fn bisector_field(theta_deg: f64, magnitude: f64) -> Result<Vec3> {
    if !(magnitude >= 0.0) {
        return Err(Error::InvalidInput(format!("field magnitude {magnitude} must be >= 0")));
    }
    let (s, c) = theta_deg.to_radians().sin_cos();
    let s = s * std::f64::consts::FRAC_1_SQRT_2;
    Ok(Vec3::new(s, s, c) * magnitude)
}

/// Components of the crystal-frame vector `b` along the site's local axes.
pub fn local_field(site: &SiteFrame, b: &Vec3) -> Vec3 {
    Vec3::new(site.x_axis.dot(b), site.y_axis.dot(b), site.z_axis.dot(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteCoupling {
    pub site_id: u8,
    /// `|E·ŷ|` normalized so the strongest site has coupling 1.
    pub coupling: f64,
}

/// Sites whose dipole has a nonzero projection on the polarization `e`.
pub fn excited_sites(frames: &FrameSet, e: &Direction3) -> Vec<SiteCoupling> {
    let raw: Vec<(u8, f64)> = frames
        .iter()
        .map(|s| (s.site_id, s.dipole().dot(e).abs()))
        .filter(|&(_, c)| c >= COUPLING_CUTOFF)
        .collect();
    let max = raw.iter().map(|&(_, c)| c).fold(0.0, f64::max);
    raw.into_iter()
        .map(|(site_id, c)| SiteCoupling {
            site_id,
            coupling: c / max,
        })
        .collect()
}
