//! Parametric percentile curves and derived features.

mod logistic;
mod nadir;
mod polynomial;

use serde::{Deserialize, Serialize};

pub use logistic::{fit_triple_logistic, initial_guess, LogisticFitOptions, TripleLogisticCurve};
pub use nadir::find_bmi_nadir;
pub use polynomial::{eval_polynomial, fit_polynomial, PolynomialCurve};

/// Slack allowed between consecutive evaluations in [`check_monotone`].
pub const MONOTONE_SLACK: f64 = 1e-9;

/// A curve of one variable (age in years).
pub trait Curve {
    fn eval(&self, age: f64) -> f64;
}

/// Goodness of fit and iteration history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
    pub max_abs_residual: f64,
    /// SSE after each accepted step, starting with the initial guess.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sse_trace: Vec<f64>,
}

impl FitReport {
    pub(crate) fn from_residuals(residuals: impl Iterator<Item = f64>) -> FitReport {
        let (sse, max_abs) = residuals.fold((0.0, 0.0_f64), |(s, m), r| (s + r * r, m.max(r.abs())));
        FitReport { sse, iterations: 0, converged: true, max_abs_residual: max_abs, sse_trace: Vec::new() }
    }
}

/// Either parametric form, tagged by `kind` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParametricCurve {
    Polynomial(PolynomialCurve),
    TripleLogistic(TripleLogisticCurve),
}

impl Curve for ParametricCurve {
    fn eval(&self, age: f64) -> f64 {
        match self {
            ParametricCurve::Polynomial(p) => p.eval(age),
            ParametricCurve::TripleLogistic(t) => t.eval(age),
        }
    }
}

/// Whether evaluations on the sorted `grid` never decrease by more than
/// [`MONOTONE_SLACK`]; lists the later age of each violating pair.
pub fn check_monotone<C: Curve + ?Sized>(curve: &C, grid: &[f64]) -> (bool, Vec<f64>) {
    let values: Vec<f64> = grid.iter().map(|&t| curve.eval(t)).collect();
    let violations: Vec<f64> = grid
        .windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| v[1] < v[0] - MONOTONE_SLACK)
        .map(|(t, _)| t[1])
        .collect();
    (violations.is_empty(), violations)
}
