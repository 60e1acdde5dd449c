//! Thin wrappers over bracketed root finding.

use roots::{find_root_brent, SimpleConvergency};

use crate::error::{Error, Result};

/// Brent's method on `[lo, hi]`; the endpoints must bracket a sign change.
pub fn brent(lo: f64, hi: f64, tol: f64, f: impl FnMut(f64) -> f64) -> Result<f64> {
    let mut conv = SimpleConvergency {
        eps: tol,
        max_iter: 200,
    };
    find_root_brent(lo, hi, f, &mut conv).map_err(|e| match e {
        roots::SearchError::NoBracketing => Error::NoBracket(format!("no sign change on [{lo}, {hi}]")),
        other => Error::RootSearch(format!("{other:?}")),
    })
}

/// Subintervals of an evenly spaced scan of `[lo, hi]` on which `f` changes
/// sign. A scan node where `f` is exactly zero yields a degenerate bracket.
pub fn sign_changes(lo: f64, hi: f64, steps: usize, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let h = (hi - lo) / steps as f64;
    let nodes = (0..=steps).map(|i| if i == steps { hi } else { lo + h * i as f64 });
    sign_changes_on(nodes, f)
}

/// As [`sign_changes`], over an arbitrary increasing sequence of nodes.
pub fn sign_changes_on(nodes: impl IntoIterator<Item = f64>, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for x1 in nodes {
        let f1 = f(x1);
        if f1 == 0.0 {
            out.push((x1, x1));
        } else if let Some((x0, f0)) = prev {
            if f0 != 0.0 && f0.signum() != f1.signum() {
                out.push((x0, x1));
            }
        }
        prev = Some((x1, f1));
    }
    out
}
