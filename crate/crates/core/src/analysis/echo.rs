//! Branching ratio from strong-leg echo intensities and one weak-leg point.
//!
//! With `I_w(I₀) = R·I_s(R·I₀)` and `W(I) = I_s(I)·I/I₀`, the weak point lies
//! on `W` at `I = R·I₀`, whatever the pulse-area response is.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::coherent::{EchoModel, EchoResponse};
use crate::error::{Error, Result};
use crate::numeric::{brent, sign_changes, sign_changes_on};

use super::densities::Measured;

pub const MIN_STRONG_SAMPLES: usize = 3;

/// Scan resolution for polynomial interpolants.
const POLY_SCAN_STEPS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EchoSample {
    /// Excitation intensity, same unit as `i0`.
    pub drive: f64,
    /// Echo intensity on the strong leg.
    pub echo: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoDataset {
    /// Intensity at which the weak-leg echo was recorded.
    pub i0: f64,
    pub strong: Vec<EchoSample>,
    /// Weak-leg echo intensity at `i0`.
    pub weak_echo: f64,
    /// Relative one-sigma error of every echo intensity; 0 if unknown.
    #[serde(default)]
    pub rel_sigma: f64,
}

impl EchoDataset {
    pub fn validate(&self) -> Result<()> {
        if !(self.i0 > 0.0) || !self.i0.is_finite() {
            return Err(Error::InvalidInput(format!("I0 must be > 0, got {}", self.i0)));
        }
        if self.strong.len() < MIN_STRONG_SAMPLES {
            return Err(Error::InvalidInput(format!(
                "need at least {MIN_STRONG_SAMPLES} strong-leg samples, got {}",
                self.strong.len()
            )));
        }
        for s in &self.strong {
            if !(s.drive >= 0.0 && s.echo >= 0.0) || !s.drive.is_finite() || !s.echo.is_finite() {
                return Err(Error::InvalidInput(format!("negative or non-finite sample {s:?}")));
            }
        }
        if !(self.weak_echo > 0.0) || !self.weak_echo.is_finite() {
            return Err(Error::InvalidInput(format!(
                "weak-leg echo must be > 0, got {}",
                self.weak_echo
            )));
        }
        if !(self.rel_sigma >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "relative sigma must be >= 0, got {}",
                self.rel_sigma
            )));
        }
        Ok(())
    }

    /// Every intensity (drive and echo) multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            i0: self.i0 * k,
            strong: self
                .strong
                .iter()
                .map(|s| EchoSample {
                    drive: s.drive * k,
                    echo: s.echo * k,
                })
                .collect(),
            weak_echo: self.weak_echo * k,
            rel_sigma: self.rel_sigma,
        }
    }

    /// `(I, W(I))` pairs sorted by drive.
    pub fn weighted(&self) -> Vec<(f64, f64)> {
        let mut w: Vec<(f64, f64)> = self
            .strong
            .iter()
            .map(|s| (s.drive, s.echo * s.drive / self.i0))
            .collect();
        w.sort_by(|a, b| a.0.total_cmp(&b.0));
        w
    }
}

/// How `W(I)` is interpolated between the strong-leg samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Interpolation {
    /// Straight segments through the samples.
    #[default]
    PiecewiseLinear,
    /// Least-squares polynomial; degree 1 is a single straight line.
    Polynomial { degree: usize },
}

enum Interpolant {
    Linear(Vec<(f64, f64)>),
    Poly { coeffs: Vec<f64>, lo: f64, hi: f64 },
}

impl Interpolant {
    fn build(points: &[(f64, f64)], how: Interpolation) -> Result<Self> {
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidInput(
                "strong-leg drive intensities must be distinct".into(),
            ));
        }
        match how {
            Interpolation::PiecewiseLinear => Ok(Self::Linear(points.to_vec())),
            Interpolation::Polynomial { degree } => {
                if degree == 0 || degree >= points.len() {
                    return Err(Error::InvalidInput(format!(
                        "polynomial degree must be in 1..{}, got {degree}",
                        points.len()
                    )));
                }
                let lo = points[0].0;
                let hi = points[points.len() - 1].0;
                let a = DMatrix::from_fn(points.len(), degree + 1, |i, j| {
                    scale(points[i].0, lo, hi).powi(j as i32)
                });
                let b = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
                let c = a
                    .svd(true, true)
                    .solve(&b, 1e-14)
                    .map_err(|e| Error::InvalidInput(format!("polynomial fit failed: {e}")))?;
                Ok(Self::Poly {
                    coeffs: c.iter().copied().collect(),
                    lo,
                    hi,
                })
            }
        }
    }

    fn range(&self) -> (f64, f64) {
        match self {
            Self::Linear(p) => (p[0].0, p[p.len() - 1].0),
            Self::Poly { lo, hi, .. } => (*lo, *hi),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Linear(p) => {
                let i = segment(p, x);
                let (x0, y0) = p[i];
                let (x1, y1) = p[i + 1];
                if x == x1 {
                    return y1;
                }
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
            Self::Poly { coeffs, lo, hi } => {
                let u = scale(x, *lo, *hi);
                coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
            }
        }
    }

    fn slope(&self, x: f64) -> f64 {
        match self {
            Self::Linear(p) => {
                let i = segment(p, x);
                (p[i + 1].1 - p[i].1) / (p[i + 1].0 - p[i].0)
            }
            Self::Poly { coeffs, lo, hi } => {
                let u = scale(x, *lo, *hi);
                let du: f64 = coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, (j, c)| acc * u + j as f64 * c);
                du * 2.0 / (hi - lo)
            }
        }
    }
}

fn scale(x: f64, lo: f64, hi: f64) -> f64 {
    (2.0 * x - lo - hi) / (hi - lo)
}

/// Index of the segment containing `x`; a node belongs to the segment on
/// its left, except the first node.
fn segment(p: &[(f64, f64)], x: f64) -> usize {
    let k = p.partition_point(|q| q.0 < x);
    k.saturating_sub(1).min(p.len() - 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EchoSolution {
    /// Branching ratio `I*/I₀`.
    #[serde(rename = "R")]
    pub r: Measured,
    /// Intersection intensity `I*`.
    pub intersection: f64,
    /// Interpolant slope `dW/dI` at the intersection.
    pub slope: f64,
}

/// Solves `W(I*) = I_w(I₀)` on the strong-leg interpolant; `R = I*/I₀`.
///
/// The sigma propagates `rel_sigma` on both the weak point and the
/// interpolated `W` through the local slope.
pub fn solve_r_from_echo(data: &EchoDataset, how: Interpolation) -> Result<EchoSolution> {
    data.validate()?;
    let points = data.weighted();
    let w = Interpolant::build(&points, how)?;
    let target = data.weak_echo;
    let f = |x: f64| w.eval(x) - target;
    let (lo, hi) = w.range();
    let brackets = match &w {
        Interpolant::Linear(p) => sign_changes_on(p.iter().map(|q| q.0), f),
        Interpolant::Poly { .. } => sign_changes(lo, hi, POLY_SCAN_STEPS, f),
    };
    let (a, b) = match brackets.as_slice() {
        [] => {
            return Err(Error::NoBracket(format!(
                "weak-leg echo {target} is outside W on [{lo}, {hi}]"
            )))
        }
        [one] => *one,
        many => return Err(Error::AmbiguousIntersection(many.len())),
    };
    let x = if a == b {
        a
    } else {
        brent(a, b, 1e-15 * hi.abs().max(1e-300), f)?
    };
    let slope = w.slope(x);
    let sigma = if data.rel_sigma == 0.0 {
        0.0
    } else {
        // W(I*) equals the weak point, so both carry the same absolute error
        std::f64::consts::SQRT_2 * data.rel_sigma * target / slope.abs() / data.i0
    };
    Ok(EchoSolution {
        r: Measured::new(x / data.i0, sigma),
        intersection: x,
        slope,
    })
}

/// Noiseless dataset from the forward model: strong-leg samples at
/// `drives_rel·I₀` and the weak point at `I₀`.
pub fn synthetic_echo_dataset<G: EchoResponse>(
    model: &EchoModel<G>,
    i0: f64,
    drives_rel: &[f64],
    r: f64,
) -> EchoDataset {
    EchoDataset {
        i0,
        strong: drives_rel
            .iter()
            .map(|&d| EchoSample {
                drive: d * i0,
                echo: model.strong(d * i0),
            })
            .collect(),
        weak_echo: model.weak(i0, r),
        rel_sigma: 0.0,
    }
}

/// `n` drives evenly spaced on `[lo, hi]` (relative to I₀).
pub fn even_drives(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
