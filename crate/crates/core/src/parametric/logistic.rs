use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Curve, FitReport};
use crate::error::{Error, Result};

/// Sum of three logistic components, each `a / (1 + exp(-b (t - c)))`.
///
/// With every `a` and `b` positive the curve is strictly increasing, which is
/// what makes it suitable for stature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleLogisticCurve {
    /// Component amplitudes, cm.
    pub a: [f64; 3],
    /// Rates, 1/years.
    pub b: [f64; 3],
    /// Inflection ages, years.
    pub c: [f64; 3],
}

/// Logistic function that saturates to 0 or 1 without overflow.
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl TripleLogisticCurve {
    pub fn derivative(&self, t: f64) -> f64 {
        (0..3)
            .map(|i| {
                let s = sigmoid(self.b[i] * (t - self.c[i]));
                self.a[i] * self.b[i] * s * (1.0 - s)
            })
            .sum()
    }

    /// Partial derivatives at `t`, ordered a1..a3, b1..b3, c1..c3.
    pub fn gradient(&self, t: f64) -> [f64; 9] {
        let mut g = [0.0; 9];
        for i in 0..3 {
            let s = sigmoid(self.b[i] * (t - self.c[i]));
            let ds = s * (1.0 - s);
            g[i] = s;
            g[3 + i] = self.a[i] * ds * (t - self.c[i]);
            g[6 + i] = -self.a[i] * self.b[i] * ds;
        }
        g
    }

    pub fn to_params(&self) -> [f64; 9] {
        let mut p = [0.0; 9];
        p[..3].copy_from_slice(&self.a);
        p[3..6].copy_from_slice(&self.b);
        p[6..].copy_from_slice(&self.c);
        p
    }

    pub fn from_params(p: &[f64]) -> Self {
        TripleLogisticCurve { a: [p[0], p[1], p[2]], b: [p[3], p[4], p[5]], c: [p[6], p[7], p[8]] }
    }

    /// Components reordered so that `c1 <= c2 <= c3`.
    pub fn canonical(&self) -> Self {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| self.c[i].total_cmp(&self.c[j]));
        TripleLogisticCurve {
            a: order.map(|i| self.a[i]),
            b: order.map(|i| self.b[i]),
            c: order.map(|i| self.c[i]),
        }
    }

    pub fn is_increasing(&self) -> bool {
        self.a.iter().chain(&self.b).all(|&v| v > 0.0)
    }
}

impl Curve for TripleLogisticCurve {
    fn eval(&self, t: f64) -> f64 {
        (0..3).map(|i| self.a[i] * sigmoid(self.b[i] * (t - self.c[i]))).sum()
    }
}

/// Damped least-squares settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticFitOptions {
    pub max_iterations: usize,
    /// Relative SSE change that counts as converged.
    pub tolerance: f64,
    pub initial_damping: f64,
    /// Damping multiplier after a rejected step.
    pub damping_increase: f64,
    /// Damping multiplier after an accepted step.
    pub damping_decrease: f64,
}

impl Default for LogisticFitOptions {
    fn default() -> Self {
        LogisticFitOptions {
            max_iterations: 500,
            tolerance: 1e-10,
            initial_damping: 1e-3,
            damping_increase: 10.0,
            damping_decrease: 0.3,
        }
    }
}

const MAX_DAMPING: f64 = 1e16;

/// Starting point built from the data: inflection ages (1, 8, 13) years,
/// rates (1.0, 0.5, 1.0), and amplitudes splitting the observed range
/// 55/20/25 with the first component also carrying the minimum value.
pub fn initial_guess(points: &[(f64, f64)]) -> TripleLogisticCurve {
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.1), h.max(p.1)));
    let range = (hi - lo).max(1e-6);
    TripleLogisticCurve {
        a: [lo.max(0.0) + 0.55 * range, 0.20 * range, 0.25 * range],
        b: [1.0, 0.5, 1.0],
        c: [1.0, 8.0, 13.0],
    }
}

fn sse_of(curve: &TripleLogisticCurve, points: &[(f64, f64)]) -> f64 {
    points.iter().map(|&(t, y)| (y - curve.eval(t)).powi(2)).sum()
}

/// Fits the triple-logistic model by Levenberg–Marquardt with analytic
/// derivatives and Marquardt (diagonal) damping.
///
/// Steps that would make any `a` or `b` non-positive are rejected like steps
/// that raise the SSE. Hitting `max_iterations` returns the best curve so far
/// with `converged = false`.
pub fn fit_triple_logistic(
    points: &[(f64, f64)],
    init: &TripleLogisticCurve,
    options: &LogisticFitOptions,
) -> Result<(TripleLogisticCurve, FitReport)> {
    if points.len() < 9 {
        return Err(Error::domain(format!("triple-logistic fit needs at least 9 points, got {}", points.len())));
    }
    let (t_lo, t_hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.0), h.max(p.0)));
    if !(t_hi - t_lo >= 10.0) {
        return Err(Error::domain(format!("triple-logistic fit needs 10 years of age span, got {t_lo}..{t_hi}")));
    }
    if !init.is_increasing() {
        return Err(Error::domain("initial amplitudes and rates must be positive"));
    }

    let n = points.len();
    let mut current = *init;
    let mut sse = sse_of(&current, points);
    if !sse.is_finite() {
        return Err(Error::Numeric("non-finite residuals at the initial guess".into()));
    }
    let scale: f64 = points.iter().map(|p| p.1 * p.1).sum::<f64>().max(1e-300);
    let mut trace = vec![sse];
    let mut damping = options.initial_damping;
    let mut iterations = 0;
    let mut converged = false;

    'outer: while iterations < options.max_iterations {
        iterations += 1;
        if sse <= 1e-28 * scale {
            converged = true;
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(n, 9);
        let mut resid = DVector::<f64>::zeros(n);
        for (r, &(t, y)) in points.iter().enumerate() {
            jac.row_mut(r).copy_from_slice(&current.gradient(t));
            resid[r] = y - current.eval(t);
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &resid;
        let diag_floor = 1e-12 * (0..9).map(|i| jtj[(i, i)]).fold(0.0_f64, f64::max).max(1e-300);

        loop {
            if damping > MAX_DAMPING {
                // no step lowers the SSE: the relative change is zero
                converged = true;
                break 'outer;
            }
            let mut lhs = jtj.clone();
            for i in 0..9 {
                lhs[(i, i)] += damping * jtj[(i, i)].max(diag_floor);
            }
            let Some(chol) = lhs.cholesky() else {
                damping *= options.damping_increase;
                continue;
            };
            let step = chol.solve(&jtr);
            let mut p = current.to_params();
            for (pi, di) in p.iter_mut().zip(step.iter()) {
                *pi += di;
            }
            let candidate = TripleLogisticCurve::from_params(&p);
            if !candidate.is_increasing() {
                damping *= options.damping_increase;
                continue;
            }
            let new_sse = sse_of(&candidate, points);
            if new_sse.is_nan() {
                return Err(Error::Numeric(format!("NaN residuals at iteration {iterations}")));
            }
            if new_sse < sse {
                let rel = (sse - new_sse) / sse;
                current = candidate;
                sse = new_sse;
                trace.push(sse);
                damping = (damping * options.damping_decrease).max(1e-15);
                if rel < options.tolerance {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            damping *= options.damping_increase;
        }
    }

    let curve = current.canonical();
    let mut report = FitReport::from_residuals(points.iter().map(|&(t, y)| y - curve.eval(t)));
    report.iterations = iterations;
    report.converged = converged;
    report.sse_trace = trace;
    Ok((curve, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parametric::check_monotone;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn generator() -> TripleLogisticCurve {
        TripleLogisticCurve { a: [85.0, 35.0, 55.0], b: [1.1, 0.45, 0.9], c: [0.6, 7.5, 12.5] }
    }

    fn direct(p: &TripleLogisticCurve, t: f64) -> f64 {
        (0..3).map(|i| p.a[i] / (1.0 + (-p.b[i] * (t - p.c[i])).exp())).sum()
    }

    fn bin_ages() -> Vec<f64> {
        (0..36).map(|i| 2.25 + 0.5 * i as f64).collect()
    }

    fn quarter_ages() -> Vec<f64> {
        (0..73).map(|i| 2.0 + 0.25 * i as f64).collect()
    }

    fn perturbed(g: &TripleLogisticCurve) -> TripleLogisticCurve {
        let f = [1.1, 0.9, 1.08, 0.92, 1.1, 0.9, 1.1, 0.93, 1.05];
        let p: Vec<f64> = g.to_params().iter().zip(f).map(|(v, k)| v * k).collect();
        TripleLogisticCurve::from_params(&p)
    }

    #[test]
    fn evaluation_limits() {
        let g = generator();
        assert!((g.eval(g.c[2] + 200.0) - 175.0).abs() < 1e-6);
        assert!(g.eval(g.c[0] - 200.0).abs() < 1e-6);
        assert!(g.eval(1e6).is_finite() && g.eval(-1e6).is_finite());
        let single = TripleLogisticCurve { a: [100.0, 0.0, 0.0], b: [0.8, 1.0, 1.0], c: [10.0, 5.0, 5.0] };
        assert_eq!(single.eval(10.0), 50.0);
        for t in [2.0, 9.3, 17.0] {
            assert!((g.eval(t) - direct(&g, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn recovers_noiseless_generator() {
        let g = generator();
        let pts: Vec<(f64, f64)> = bin_ages().into_iter().map(|t| (t, direct(&g, t))).collect();
        let (fit, report) = fit_triple_logistic(&pts, &perturbed(&g), &LogisticFitOptions::default()).unwrap();
        assert!(report.converged, "{report:?}");
        for i in 0..=180 {
            let t = 2.0 + 0.1 * i as f64;
            assert!((fit.eval(t) - direct(&g, t)).abs() <= 0.05, "t={t}");
        }
        assert!(fit.c[0] <= fit.c[1] && fit.c[1] <= fit.c[2]);
    }

    #[test]
    fn noisy_generator_within_tolerance() {
        let g = generator();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let pts: Vec<(f64, f64)> = quarter_ages().into_iter().map(|t| (t, direct(&g, t) + noise.sample(&mut rng))).collect();
        let (fit, report) = fit_triple_logistic(&pts, &perturbed(&g), &LogisticFitOptions::default()).unwrap();
        assert!(report.sse <= 1.5 * pts.len() as f64 * 0.25, "{report:?}");
        let grid: Vec<f64> = (0..=180).map(|i| 2.0 + 0.1 * i as f64).collect();
        for &t in &grid {
            assert!((fit.eval(t) - direct(&g, t)).abs() <= 1.0, "t={t} {} {}", fit.eval(t), direct(&g, t));
        }
        assert!(check_monotone(&fit, &grid).0);
        assert!(report.sse_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn data_driven_initial_guess_converges() {
        let g = generator();
        let pts: Vec<(f64, f64)> = bin_ages().into_iter().map(|t| (t, direct(&g, t))).collect();
        let init = initial_guess(&pts);
        assert!(init.is_increasing());
        let (fit, _) = fit_triple_logistic(&pts, &init, &LogisticFitOptions::default()).unwrap();
        for &(t, y) in &pts {
            assert!((fit.eval(t) - y).abs() < 0.05, "t={t}");
        }
    }

    #[test]
    fn single_logistic_midpoint() {
        let truth = TripleLogisticCurve { a: [100.0, 0.0, 0.0], b: [0.8, 1.0, 1.0], c: [10.0, 5.0, 5.0] };
        let pts: Vec<(f64, f64)> = bin_ages().into_iter().map(|t| (t, truth.eval(t))).collect();
        let (fit, _) = fit_triple_logistic(&pts, &initial_guess(&pts), &LogisticFitOptions::default()).unwrap();
        assert!((fit.eval(10.0) - 50.0).abs() <= 0.01, "{}", fit.eval(10.0));
    }

    #[test]
    fn precondition_errors() {
        let g = generator();
        let few: Vec<(f64, f64)> = (0..8).map(|i| (2.0 + 2.0 * i as f64, 100.0)).collect();
        assert!(fit_triple_logistic(&few, &g, &LogisticFitOptions::default()).is_err());
        let narrow: Vec<(f64, f64)> = (0..20).map(|i| (2.0 + 0.25 * i as f64, 100.0)).collect();
        assert!(fit_triple_logistic(&narrow, &g, &LogisticFitOptions::default()).is_err());
        let mut nan: Vec<(f64, f64)> = bin_ages().into_iter().map(|t| (t, direct(&g, t))).collect();
        nan[4].1 = f64::NAN;
        assert!(matches!(fit_triple_logistic(&nan, &g, &LogisticFitOptions::default()), Err(Error::Numeric(_))));
    }

    #[test]
    fn iteration_cap_returns_best_so_far() {
        let g = generator();
        let pts: Vec<(f64, f64)> = bin_ages().into_iter().map(|t| (t, direct(&g, t))).collect();
        let opts = LogisticFitOptions { max_iterations: 2, ..Default::default() };
        let init = initial_guess(&pts);
        let (_, report) = fit_triple_logistic(&pts, &init, &opts).unwrap();
        assert!(!report.converged);
        assert_eq!(report.iterations, 2);
        assert!(report.sse <= sse_of(&init, &pts));
    }

    #[test]
    fn derivative_non_negative_on_dense_grid() {
        let g = generator();
        for i in 0..=4000 {
            let t = -5.0 + 0.01 * i as f64;
            assert!(g.derivative(t) >= 0.0);
        }
    }

    proptest! {
        #[test]
        fn gradient_matches_central_differences(
            a in prop::array::uniform3(5.0f64..100.0),
            b in prop::array::uniform3(0.1f64..2.0),
            c in prop::array::uniform3(0.0f64..18.0),
            t in 0.0f64..22.0,
        ) {
            let curve = TripleLogisticCurve { a, b, c };
            let g = curve.gradient(t);
            let p = curve.to_params();
            let h = 1e-6;
            for k in 0..9 {
                let mut up = p;
                let mut dn = p;
                up[k] += h;
                dn[k] -= h;
                let fd = (TripleLogisticCurve::from_params(&up).eval(t) - TripleLogisticCurve::from_params(&dn).eval(t)) / (2.0 * h);
                prop_assert!((fd - g[k]).abs() <= 1e-5 * g[k].abs().max(1.0), "k={} fd={} g={}", k, fd, g[k]);
            }
            let fd = (curve.eval(t + h) - curve.eval(t - h)) / (2.0 * h);
            prop_assert!((fd - curve.derivative(t)).abs() <= 1e-5 * fd.abs().max(1.0));
        }
    }
}
