//! Scenario files: one TOML document describing field, tensors, pumping,
//! sampling grids and noise for every pipeline.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use tmlambda::analysis::Interpolation;
use tmlambda::geometry::{bisector_field, local_field, Direction3, FrameSet, Vec3};
use tmlambda::popdyn::PumpParams;
use tmlambda::zeeman::{lambda_params, LambdaParams, LevelPair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub field: FieldSection,
    pub tensors: LevelPair,
    pub pump: PumpParams,
    pub grids: Grids,
    pub spectrum: SpectrumSection,
    pub nutation: NutationSection,
    pub echo: EchoSection,
    pub lifetime: LifetimeSection,
    pub noise: NoiseSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    #[serde(rename = "magnitude_T")]
    pub magnitude_t: f64,
    /// Angle from [001] in the bisector plane.
    pub theta_deg: f64,
    /// Laser polarization, crystal frame (need not be normalized).
    pub polarization: [f64; 3],
    /// Site whose Λ system the nutation, echo and lifetime pipelines model.
    #[serde(default = "default_observed_site")]
    pub observed_site: u8,
    /// Frame file, relative to the scenario file; built-in frames if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<PathBuf>,
}

fn default_observed_site() -> u8 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub theta_start_deg: f64,
    pub theta_stop_deg: f64,
    pub theta_points: usize,
    pub spectrum_points: usize,
    pub nutation_t_stop_us: f64,
    pub nutation_points: usize,
    pub lifetime_t_stop_s: f64,
    pub lifetime_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Probe chirp span, centred on ν₀.
    #[serde(rename = "window_MHz")]
    pub window_mhz: f64,
    #[serde(rename = "hole_width_MHz")]
    pub hole_width_mhz: f64,
    #[serde(rename = "antihole_extra_width_MHz")]
    pub antihole_extra_width_mhz: f64,
    pub background_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NutationSection {
    /// Strong-leg (and zero-field) Rabi frequency.
    pub omega_rad_per_us: f64,
    /// Zero-field optical density.
    pub d0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EchoSection {
    /// Pulse area per √(μ²·I) for the default response.
    pub area_coeff: f64,
    pub i0: f64,
    pub drive_min_rel: f64,
    pub drive_max_rel: f64,
    pub samples: usize,
    #[serde(default)]
    pub interpolation: Interpolation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifetimeSection {
    pub depth: f64,
    /// Sublevel lifetime of the observed site group.
    pub t1_observed_s: f64,
    /// Lifetime used for the other excited sites.
    pub t1_other_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub seed: u64,
    /// Additive gaussian sigma on nutation traces, relative to the incident intensity.
    pub trace_sigma: f64,
    /// Log-normal sigma on echo intensities.
    pub echo_log_sigma: f64,
    /// Additive gaussian sigma on hole depths, relative to the initial depth.
    pub decay_sigma: f64,
}

/// A parsed, validated scenario with its resolved frames and content hash.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub scenario: Scenario,
    pub frames: FrameSet,
    /// SHA-256 of the scenario file bytes, followed by the frame file bytes
    /// when one is referenced.
    pub hash: String,
}

impl Loaded {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_bytes(&text, base).with_context(|| format!("scenario {}", path.display()))
    }

    /// `base` resolves a relative frame-file path.
    pub fn from_bytes(text: &[u8], base: &Path) -> Result<Self> {
        let s = std::str::from_utf8(text).context("scenario is not UTF-8")?;
        let scenario: Scenario = toml::from_str(s).context("parsing scenario")?;
        let mut hasher = Sha256::new();
        hasher.update(text);
        let frames = match &scenario.field.frames {
            Some(rel) => {
                let p = base.join(rel);
                let ft = fs::read_to_string(&p).with_context(|| format!("reading frames {}", p.display()))?;
                hasher.update(ft.as_bytes());
                FrameSet::from_toml_str(&ft)?
            }
            None => FrameSet::default(),
        };
        let hash = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        scenario.validate()?;
        Ok(Self { scenario, frames, hash })
    }

    pub fn field(&self) -> Result<Vec3> {
        Ok(bisector_field(
            self.scenario.field.theta_deg,
            self.scenario.field.magnitude_t,
        )?)
    }

    pub fn polarization(&self) -> Result<Direction3> {
        Ok(Direction3::normalize(self.scenario.field.polarization.into())?)
    }

    /// Λ parameters of one site at the configured field.
    pub fn site_params(&self, id: u8) -> Result<LambdaParams> {
        let b = local_field(self.frames.site(id)?, &self.field()?);
        lambda_params(&self.scenario.tensors, &b).with_context(|| format!("site {id}"))
    }

    /// Λ parameters of all sites; `None` where a splitting vanishes.
    pub fn all_site_params(&self) -> Result<BTreeMap<String, Option<LambdaParams>>> {
        self.frames
            .iter()
            .map(|s| {
                let b = local_field(s, &self.field()?);
                let p = match lambda_params(&self.scenario.tensors, &b) {
                    Ok(p) => Some(p),
                    Err(tmlambda::Error::DegenerateField) => None,
                    Err(e) => return Err(e).with_context(|| format!("site {}", s.site_id())),
                };
                Ok((s.site_id().to_string(), p))
            })
            .collect()
    }

    /// Branching ratio of the observed site: the value every synthetic
    /// dataset is generated with.
    pub fn injected_r(&self) -> Result<f64> {
        Ok(self.site_params(self.scenario.field.observed_site)?.r)
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let f = &self.field;
        ensure!(
            f.magnitude_t >= 0.0 && f.magnitude_t.is_finite(),
            "field magnitude must be >= 0"
        );
        ensure!(f.theta_deg.is_finite(), "theta must be finite");
        ensure!((1..=6).contains(&f.observed_site), "observed_site must be 1..6");
        self.tensors.validate()?;
        let p = &self.pump;
        ensure!(
            [p.p, p.r, p.kappa].iter().all(|x| *x >= 0.0 && x.is_finite()),
            "pump rates must be >= 0"
        );

        let g = &self.grids;
        ensure!(g.theta_start_deg < g.theta_stop_deg, "theta grid must be increasing");
        for (name, n) in [
            ("theta_points", g.theta_points),
            ("spectrum_points", g.spectrum_points),
            ("nutation_points", g.nutation_points),
            ("lifetime_points", g.lifetime_points),
        ] {
            ensure!(n >= 2, "{name} must be >= 2");
        }
        ensure!(g.nutation_t_stop_us > 0.0, "nutation_t_stop_us must be > 0");
        ensure!(g.lifetime_t_stop_s > 0.0, "lifetime_t_stop_s must be > 0");

        let s = &self.spectrum;
        ensure!(
            s.window_mhz > 0.0 && s.hole_width_mhz > 0.0,
            "spectrum widths must be > 0"
        );
        ensure!(
            s.antihole_extra_width_mhz >= 0.0 && s.background_density >= 0.0,
            "spectrum settings must be >= 0"
        );

        let n = &self.nutation;
        ensure!(
            n.omega_rad_per_us > 0.0 && n.d0 > 0.0,
            "nutation omega and d0 must be > 0"
        );
        let e = &self.echo;
        ensure!(e.area_coeff > 0.0 && e.i0 > 0.0, "echo area_coeff and i0 must be > 0");
        ensure!(
            0.0 <= e.drive_min_rel && e.drive_min_rel < e.drive_max_rel,
            "echo drive range must satisfy 0 <= min < max"
        );
        let l = &self.lifetime;
        ensure!(
            l.depth > 0.0 && l.t1_observed_s > 0.0 && l.t1_other_s > 0.0,
            "lifetime settings must be > 0"
        );
        let z = &self.noise;
        if [z.trace_sigma, z.echo_log_sigma, z.decay_sigma]
            .iter()
            .any(|x| x.is_nan() || *x < 0.0)
        {
            bail!("noise levels must be >= 0");
        }
        Ok(())
    }
}
