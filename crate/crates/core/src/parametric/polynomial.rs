use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Curve, FitReport};
use crate::error::{Error, Result};
use crate::linalg::{qr_least_squares, weighted_least_squares};

/// Polynomial in the scaled age `u = (t - age_center) / age_halfwidth`.
///
/// Fitting in `u ∈ [-1, 1]` keeps a degree-10 design well conditioned where
/// raw ages up to ~23 years would not be.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialCurve {
    pub degree: usize,
    /// Ascending powers of `u`.
    pub coefficients: Vec<f64>,
    pub age_center: f64,
    pub age_halfwidth: f64,
}

impl PolynomialCurve {
    /// Re-expresses `Σ c_k t^k` (ascending powers of age) in the scaled variable.
    pub fn from_age_coefficients(age_coeffs: &[f64], age_center: f64, age_halfwidth: f64) -> Result<Self> {
        if !(age_halfwidth > 0.0) || age_coeffs.is_empty() {
            return Err(Error::domain("polynomial needs coefficients and a positive halfwidth"));
        }
        // Horner over polynomials: r <- r · (center + halfwidth·u) + c_k
        let mut r: Vec<f64> = vec![0.0];
        for &c in age_coeffs.iter().rev() {
            let mut next = vec![0.0; r.len() + 1];
            for (j, &rj) in r.iter().enumerate() {
                next[j] += rj * age_center;
                next[j + 1] += rj * age_halfwidth;
            }
            next[0] += c;
            r = next;
        }
        r.truncate(age_coeffs.len());
        Ok(PolynomialCurve { degree: age_coeffs.len() - 1, coefficients: r, age_center, age_halfwidth })
    }

    pub fn scaled(&self, age: f64) -> f64 {
        (age - self.age_center) / self.age_halfwidth
    }

    /// Evaluation plus whether `age` lies outside the fitted age range.
    pub fn eval_checked(&self, age: f64) -> (f64, bool) {
        let u = self.scaled(age);
        (horner(&self.coefficients, u), u.abs() > 1.0 + 1e-12)
    }

    /// d/du coefficients.
    pub(crate) fn derivative_in_u(&self) -> Vec<f64> {
        self.coefficients.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
    }
}

impl Curve for PolynomialCurve {
    fn eval(&self, age: f64) -> f64 {
        horner(&self.coefficients, self.scaled(age))
    }
}

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

pub fn eval_polynomial(curve: &PolynomialCurve, age: f64) -> f64 {
    curve.eval(age)
}

/// Least-squares polynomial of `degree` through `(age, value)` points.
///
/// Ages are mapped onto `[-1, 1]` from their observed range and the system is
/// solved by Householder QR. `weights`, when given, must be non-negative.
pub fn fit_polynomial(points: &[(f64, f64)], degree: usize, weights: Option<&[f64]>) -> Result<(PolynomialCurve, FitReport)> {
    if points.iter().any(|(t, y)| !t.is_finite() || !y.is_finite()) {
        return Err(Error::domain("polynomial fit input contains non-finite values"));
    }
    let mut ages: Vec<f64> = points.iter().map(|p| p.0).collect();
    ages.sort_by(f64::total_cmp);
    ages.dedup();
    if ages.len() < degree + 1 {
        return Err(Error::domain(format!(
            "degree-{degree} polynomial needs {} distinct ages, got {}",
            degree + 1,
            ages.len()
        )));
    }
    let (lo, hi) = (ages[0], ages[ages.len() - 1]);
    let (center, halfwidth) = if hi > lo { ((lo + hi) / 2.0, (hi - lo) / 2.0) } else { (lo, 1.0) };

    let n = points.len();
    let design = DMatrix::from_fn(n, degree + 1, |r, c| ((points[r].0 - center) / halfwidth).powi(c as i32));
    let rhs = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let beta = match weights {
        None => qr_least_squares(&design, &rhs),
        Some(w) => {
            if w.len() != n || w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::invalid("polynomial weights must be non-negative, one per point"));
            }
            weighted_least_squares(&design, &rhs, w)
        }
    }
    .ok_or_else(|| Error::domain(format!("degree-{degree} polynomial design is rank deficient")))?;

    let curve = PolynomialCurve { degree, coefficients: beta.iter().copied().collect(), age_center: center, age_halfwidth: halfwidth };
    let report = FitReport::from_residuals(points.iter().map(|&(t, y)| y - curve.eval(t)));
    Ok((curve, report))
}
