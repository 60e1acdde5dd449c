//! Nonlinear least-squares fitting of 1-D curve models.

use std::collections::BTreeMap;

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt, TerminationReason};
use nalgebra::storage::Owned;
use nalgebra::{DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evaluation cap for one fit.
pub const MAX_EVALUATIONS: usize = 200;
/// Relative step size at which the solver declares convergence.
pub const STEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitFlag {
    /// Solver stopped without meeting its convergence test.
    Unreliable,
    /// Normal matrix is singular; some sigmas are missing.
    SingularCovariance,
    /// Fitted optical density is at or above the nutation model's validity bound.
    OutOfModel,
    /// Fitted Rabi period is longer than the trace: first maximum not sampled.
    NoFullOscillation,
    /// Decay rate is not resolved from zero; only a lifetime lower bound is reported.
    NoMeasurableDecay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: BTreeMap<String, f64>,
    pub sigmas: BTreeMap<String, f64>,
    /// Euclidean norm of the residual vector.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<FitFlag>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> f64 {
        self.parameters[name]
    }

    pub fn sigma(&self, name: &str) -> Option<f64> {
        self.sigmas.get(name).copied()
    }

    pub fn has_flag(&self, flag: FitFlag) -> bool {
        self.flags.contains(&flag)
    }

    pub(crate) fn flag(&mut self, flag: FitFlag) {
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
    }
}

/// A model `y = f(x; p)` with analytic parameter gradient.
pub trait CurveModel {
    fn names(&self) -> &'static [&'static str];
    fn eval(&self, p: &[f64], x: f64) -> f64;
    fn gradient(&self, p: &[f64], x: f64, out: &mut [f64]);
}

struct CurveProblem<'a, M> {
    model: &'a M,
    xs: &'a [f64],
    ys: &'a [f64],
    params: DVector<f64>,
}

impl<M: CurveModel> LeastSquaresProblem<f64, Dyn, Dyn> for CurveProblem<'_, M> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, x: &DVector<f64>) {
        self.params.copy_from(x);
    }

    fn params(&self) -> DVector<f64> {
        self.params.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let p = self.params.as_slice();
        Some(DVector::from_iterator(
            self.xs.len(),
            self.xs.iter().zip(self.ys).map(|(&x, &y)| self.model.eval(p, x) - y),
        ))
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let p = self.params.as_slice();
        let n = p.len();
        let mut j = DMatrix::zeros(self.xs.len(), n);
        let mut g = vec![0.0; n];
        for (row, &x) in self.xs.iter().enumerate() {
            self.model.gradient(p, x, &mut g);
            for (col, v) in g.iter().enumerate() {
                j[(row, col)] = *v;
            }
        }
        Some(j)
    }
}

/// Sum of squared residuals of `model` at `p`.
pub fn residual_sum_of_squares<M: CurveModel>(model: &M, p: &[f64], xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(&x, &y)| (model.eval(p, x) - y).powi(2)).sum()
}

/// Levenberg–Marquardt fit from `init`; sigmas from the residual covariance
/// `s²·(JᵀJ)⁻¹` with `s² = RSS/(m − n)`.
pub fn fit_curve<M: CurveModel>(model: &M, xs: &[f64], ys: &[f64], init: &[f64]) -> Result<FitResult> {
    let n = init.len();
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput("x and y lengths differ".into()));
    }
    if xs.len() <= n {
        return Err(Error::InvalidInput(format!(
            "{} samples cannot constrain {n} parameters",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("samples must be finite".into()));
    }
    let problem = CurveProblem {
        model,
        xs,
        ys,
        params: DVector::from_column_slice(init),
    };
    let (problem, report) = LevenbergMarquardt::new()
        .with_xtol(STEP_TOL)
        .with_ftol(1e-14)
        .with_patience(MAX_EVALUATIONS.div_ceil(n + 1))
        .minimize(problem);

    let converged = report.termination.was_successful();
    match &report.termination {
        TerminationReason::Numerical(what) | TerminationReason::User(what) => {
            return Err(Error::NonConvergence {
                iterations: report.number_of_evaluations,
                reason: format!("numerical failure in {what}"),
            });
        }
        t if t.was_usage_issue() && !matches!(t, TerminationReason::NoImprovementPossible(_)) => {
            return Err(Error::NonConvergence {
                iterations: report.number_of_evaluations,
                reason: format!("{t:?}"),
            });
        }
        _ => {}
    }

    let p = problem.params.as_slice().to_vec();
    let residuals = problem.residuals().expect("residuals are always computed");
    let jac = problem.jacobian().expect("jacobian is always computed");
    let rss = residuals.norm_squared();
    let dof = (xs.len() - n) as f64;
    let names = model.names();

    let mut result = FitResult {
        parameters: names.iter().zip(&p).map(|(k, v)| (k.to_string(), *v)).collect(),
        sigmas: BTreeMap::new(),
        residual: rss.sqrt(),
        // reaching the machine-precision floor still means we are at the minimum
        converged: converged || matches!(report.termination, TerminationReason::NoImprovementPossible(_)),
        iterations: report.number_of_evaluations,
        flags: Vec::new(),
    };
    match (jac.transpose() * &jac).try_inverse() {
        Some(inv) => {
            let s2 = rss / dof;
            for (i, name) in names.iter().enumerate() {
                let var = (s2 * inv[(i, i)]).max(0.0);
                result.sigmas.insert(name.to_string(), var.sqrt());
            }
        }
        None => result.flag(FitFlag::SingularCovariance),
    }
    if !result.converged {
        result.flag(FitFlag::Unreliable);
    }
    Ok(result)
}
