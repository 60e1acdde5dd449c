//! Optical pumping of the four resonant ion classes, the resulting
//! hole/antihole spectrum, and sublevel population decay.
//!
//! Level scheme per ion: ground sublevels |1⟩ (lower) and |2⟩ (upper, +Δg),
//! excited sublevels |3⟩ (lower) and |4⟩ (upper, +Δe). Strong transitions are
//! 1→3 and 2→4, weak ones 1→4 and 2→3. A laser at ν₀ inside the
//! inhomogeneous line is resonant with each of the four transitions for a
//! different subset of ions; these are the classes (i)–(iv).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{Trace, UniformGrid};

/// Offsets closer than this (MHz) are merged into one spectral feature.
pub const OFFSET_MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassId {
    I,
    Ii,
    Iii,
    Iv,
}

impl ClassId {
    pub const ALL: [ClassId; 4] = [ClassId::I, ClassId::Ii, ClassId::Iii, ClassId::Iv];

    /// (i) and (iii) are resonant on a strong leg, (ii) and (iv) on a weak one.
    pub fn resonant_transition(self) -> Transition {
        match self {
            ClassId::I => Transition::T13,
            ClassId::Ii => Transition::T14,
            ClassId::Iii => Transition::T24,
            ClassId::Iv => Transition::T23,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Transition {
    #[serde(rename = "1-3")]
    T13,
    #[serde(rename = "1-4")]
    T14,
    #[serde(rename = "2-3")]
    T23,
    #[serde(rename = "2-4")]
    T24,
}

impl Transition {
    pub const ALL: [Transition; 4] = [Transition::T13, Transition::T14, Transition::T23, Transition::T24];

    /// Ground sublevel, 1 or 2.
    pub fn ground(self) -> u8 {
        match self {
            Transition::T13 | Transition::T14 => 1,
            Transition::T23 | Transition::T24 => 2,
        }
    }

    /// Excited sublevel, 3 or 4.
    pub fn excited(self) -> u8 {
        match self {
            Transition::T13 | Transition::T23 => 3,
            Transition::T14 | Transition::T24 => 4,
        }
    }

    /// Strong legs conserve the nuclear spin projection.
    pub fn is_strong(self) -> bool {
        matches!(self, Transition::T13 | Transition::T24)
    }

    /// Frequency relative to the 1→3 line of the same ion, MHz.
    fn relative_frequency(self, delta_g: f64, delta_e: f64) -> f64 {
        let e = if self.excited() == 4 { delta_e } else { 0.0 };
        let g = if self.ground() == 2 { delta_g } else { 0.0 };
        e - g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassLine {
    pub transition: Transition,
    /// MHz relative to ν₀.
    pub offset: f64,
    /// μs² or μw².
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonClass {
    pub class_id: ClassId,
    pub resonant: Transition,
    pub strength: f64,
    pub lines: [ClassLine; 4],
}

impl IonClass {
    pub fn line(&self, t: Transition) -> &ClassLine {
        self.lines
            .iter()
            .find(|l| l.transition == t)
            .expect("all four lines present")
    }

    /// Ground sublevel depleted by pumping at ν₀.
    pub fn resonant_ground(&self) -> u8 {
        self.resonant.ground()
    }
}

/// The four ion classes resonant with a laser at ν₀.
pub fn enumerate_classes(delta_g: f64, delta_e: f64, mu_s: f64, mu_w: f64) -> Result<[IonClass; 4]> {
    if !(delta_g > 0.0) || !(delta_e > 0.0) {
        return Err(Error::InvalidInput(format!(
            "splittings must be positive (Δg = {delta_g}, Δe = {delta_e})"
        )));
    }
    if (delta_g - delta_e).abs() <= OFFSET_MERGE_TOL {
        return Err(Error::DegenerateSplittings(delta_g));
    }
    let strength = |t: Transition| if t.is_strong() { mu_s * mu_s } else { mu_w * mu_w };
    Ok(ClassId::ALL.map(|class_id| {
        let resonant = class_id.resonant_transition();
        let center = resonant.relative_frequency(delta_g, delta_e);
        let lines = Transition::ALL.map(|t| ClassLine {
            transition: t,
            offset: t.relative_frequency(delta_g, delta_e) - center,
            strength: strength(t),
        });
        IonClass {
            class_id,
            resonant,
            strength: strength(resonant),
            lines,
        }
    }))
}

/// Pumping, repumping and relaxation rates, s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpParams {
    pub p: f64,
    pub r: f64,
    pub kappa: f64,
}

/// Steady-state fraction of a class in its resonant ground sublevel,
/// `ρ = (r + κ) / (p + r + 2κ)`.
pub fn steady_state_fraction(pp: &PumpParams) -> Result<f64> {
    let rates = [pp.p, pp.r, pp.kappa];
    if rates.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "rates must be finite and >= 0, got {rates:?}"
        )));
    }
    let den = pp.p + pp.r + 2.0 * pp.kappa;
    if den == 0.0 {
        if pp.p == 0.0 {
            // no optical excitation at all: thermal equilibrium
            return Ok(0.5);
        }
        return Err(Error::InvalidInput("p + r + 2κ must be > 0".into()));
    }
    Ok((pp.r + pp.kappa) / den)
}

/// Populations of (resonant, other) ground sublevels; they always sum to one.
pub fn ground_populations(resonant_fraction: f64) -> (f64, f64) {
    (resonant_fraction, 1.0 - resonant_fraction)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Hole,
    Antihole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contributor {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub site: Option<u8>,
    pub class_id: ClassId,
    pub transition: Transition,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFeature {
    /// MHz relative to ν₀.
    pub offset: f64,
    pub kind: FeatureKind,
    /// Absorption change relative to the unpumped absorption at ν₀.
    pub amplitude: f64,
    pub contributors: Vec<Contributor>,
}

impl SpectrumFeature {
    pub fn scaled(mut self, weight: f64) -> Self {
        self.amplitude *= weight;
        self
    }

    pub fn with_site(mut self, site: u8) -> Self {
        self.contributors.iter_mut().for_each(|c| c.site = Some(site));
        self
    }
}

/// Absorption changes produced by pumped classes.
///
/// `resonant_fraction[k]` is the population left in the resonant ground
/// sublevel of `classes[k]` (1/2 at equilibrium). Each line probed from a
/// ground sublevel contributes `strength × Δpopulation` at its offset.
pub fn spectrum_features(classes: &[IonClass], resonant_fraction: &[f64]) -> Result<Vec<SpectrumFeature>> {
    if classes.len() != resonant_fraction.len() {
        return Err(Error::InvalidInput(format!(
            "{} classes but {} populations",
            classes.len(),
            resonant_fraction.len()
        )));
    }
    if let Some(bad) = resonant_fraction.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(Error::InvalidInput(format!("population {bad} outside [0, 1]")));
    }

    // (offset, amplitude, probes depleted sublevel, contributor)
    let mut lines: Vec<(f64, f64, bool, Contributor)> = Vec::new();
    for (class, &rho) in classes.iter().zip(resonant_fraction) {
        let change = rho - 0.5;
        if change == 0.0 {
            continue;
        }
        for line in &class.lines {
            let depleted = line.transition.ground() == class.resonant_ground();
            let dpop = if depleted { change } else { -change };
            lines.push((
                line.offset,
                line.strength * dpop,
                depleted,
                Contributor {
                    site: None,
                    class_id: class.class_id,
                    transition: line.transition,
                    strength: line.strength,
                },
            ));
        }
    }
    lines.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut out: Vec<(SpectrumFeature, bool)> = Vec::new();
    for (offset, amp, depleted, who) in lines {
        match out.last_mut() {
            Some((f, all_depleted)) if (offset - f.offset).abs() <= OFFSET_MERGE_TOL => {
                f.amplitude += amp;
                f.contributors.push(who);
                *all_depleted &= depleted;
            }
            _ => out.push((
                SpectrumFeature {
                    offset,
                    kind: FeatureKind::Hole,
                    amplitude: amp,
                    contributors: vec![who],
                },
                depleted,
            )),
        }
    }
    Ok(out
        .into_iter()
        .map(|(mut f, depleted)| {
            f.kind = classify(f.amplitude, depleted);
            f
        })
        .collect())
}

fn classify(amplitude: f64, probes_depleted: bool) -> FeatureKind {
    if amplitude < 0.0 {
        FeatureKind::Hole
    } else if amplitude > 0.0 || !probes_depleted {
        FeatureKind::Antihole
    } else {
        FeatureKind::Hole
    }
}

/// Merges feature lists (e.g. from several sites) by offset.
pub fn merge_features(features: impl IntoIterator<Item = SpectrumFeature>) -> Vec<SpectrumFeature> {
    let mut all: Vec<SpectrumFeature> = features.into_iter().collect();
    all.sort_by(|a, b| a.offset.total_cmp(&b.offset));
    let mut out: Vec<SpectrumFeature> = Vec::new();
    for f in all {
        match out.last_mut() {
            Some(last) if (f.offset - last.offset).abs() <= OFFSET_MERGE_TOL => {
                last.amplitude += f.amplitude;
                last.contributors.extend(f.contributors);
                if last.amplitude != 0.0 {
                    last.kind = classify(last.amplitude, last.kind == FeatureKind::Hole);
                }
            }
            _ => out.push(f),
        }
    }
    out
}

/// Line-shape settings for [`synth_spectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineShape {
    /// Lorentzian FWHM of holes, MHz.
    pub hole_width: f64,
    /// Extra FWHM added to antiholes (ground-splitting inhomogeneity), MHz.
    pub antihole_extra_width: f64,
    /// Unpumped optical density at ν₀.
    pub background_density: f64,
}

fn lorentzian(delta: f64, fwhm: f64) -> f64 {
    let u = 2.0 * delta / fwhm;
    1.0 / (1.0 + u * u)
}

/// Transmission `10^-(D + ΔD(ν))` with each feature drawn as a peak-normalized
/// Lorentzian scaled by `D·amplitude`.
pub fn synth_spectrum(features: &[SpectrumFeature], shape: &LineShape, grid: &UniformGrid) -> Result<Trace> {
    if !(shape.hole_width > 0.0) || !(shape.antihole_extra_width >= 0.0) {
        return Err(Error::InvalidInput("line widths must be positive".into()));
    }
    let d0 = shape.background_density;
    let mut trace = Trace::from_fn(grid, "offset_MHz", "transmission", |nu| {
        let dd: f64 = features
            .iter()
            .map(|f| {
                let w = match f.kind {
                    FeatureKind::Hole => shape.hole_width,
                    FeatureKind::Antihole => shape.hole_width + shape.antihole_extra_width,
                };
                f.amplitude * lorentzian(nu - f.offset, w)
            })
            .sum();
        10f64.powf(-(d0 + d0 * dd))
    })?;
    let outside = features
        .iter()
        .filter(|f| f.offset < grid.start || f.offset > grid.stop)
        .count();
    if outside > 0 {
        trace.warnings.push(format!(
            "{outside} feature(s) lie outside the grid [{}, {}] MHz",
            grid.start, grid.stop
        ));
    }
    Ok(trace)
}

/// Hole depth after a delay `t` with sublevel lifetime `t1` (both seconds).
pub fn hole_decay(depth0: f64, t1: f64, t: f64) -> Result<f64> {
    if !(t1 > 0.0) {
        return Err(Error::InvalidInput(format!("lifetime must be > 0, got {t1}")));
    }
    Ok(depth0 * (-t / t1).exp())
}
