use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniformly sampled real signal.
///
/// `x_label`/`y_label` double as CSV column headers and carry the unit,
/// e.g. `t_us` or `offset_MHz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub x_start: f64,
    pub x_step: f64,
    pub values: Vec<f64>,
    pub x_label: String,
    pub y_label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Trace {
    pub fn new(
        x_start: f64,
        x_step: f64,
        values: Vec<f64>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
    ) -> Result<Self> {
        if !(x_step > 0.0) || !x_step.is_finite() || !x_start.is_finite() {
            return Err(Error::InvalidInput(format!(
                "trace axis must be finite with positive step (start {x_start}, step {x_step})"
            )));
        }
        Ok(Self {
            x_start,
            x_step,
            values,
            x_label: x_label.into(),
            y_label: y_label.into(),
            warnings: Vec::new(),
        })
    }

    /// Build a trace by evaluating `f` on the grid.
    pub fn from_fn(
        grid: &UniformGrid,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let values = grid.points().map(f).collect();
        Self::new(grid.start, grid.step(), values, x_label, y_label)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_start + self.x_step * i as f64
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.len().saturating_sub(1))
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.x(i))
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &y)| (self.x(i), y))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// Two-column CSV with a header row built from the axis labels.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{},{}", self.x_label, self.y_label)?;
        for (x, y) in self.points() {
            writeln!(w, "{x},{y}")?;
        }
        Ok(())
    }
}

/// Closed interval sampled at `count` evenly spaced points, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl UniformGrid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count < 2 || !(stop > start) || !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidInput(format!(
                "grid needs count >= 2 and start < stop (got {start}..{stop}, {count})"
            )));
        }
        Ok(Self { start, stop, count })
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.count - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.stop
        } else {
            self.start + self.step() * i as f64
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.point(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_both_endpoints() {
        let g = UniformGrid::new(-90.0, 90.0, 181).unwrap();
        let pts: Vec<f64> = g.points().collect();
        assert_eq!(pts.len(), 181);
        assert_eq!(pts[0], -90.0);
        assert_eq!(pts[180], 90.0);
        assert!((pts[90]).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(UniformGrid::new(1.0, 1.0, 10).is_err());
        assert!(UniformGrid::new(0.0, 1.0, 1).is_err());
        assert!(Trace::new(0.0, 0.0, vec![], "t_us", "y").is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let t = Trace::new(0.0, 0.5, vec![1.0, 2.0], "t_us", "intensity_rel").unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t_us,intensity_rel\n0,1\n0.5,2\n");
    }
}
