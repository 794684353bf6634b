//! Fit the triple-logistic stature model to noisy synthetic data.

use growthcharts::parametric::{check_monotone, fit_triple_logistic, initial_guess, Curve, LogisticFitOptions, TripleLogisticCurve};
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

fn main() -> growthcharts::Result<()> {
    let truth = TripleLogisticCurve { a: [85.0, 35.0, 55.0], b: [1.1, 0.45, 0.9], c: [0.6, 7.5, 12.5] };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let points: Vec<(f64, f64)> = (0..73)
        .map(|i| 2.0 + 0.25 * i as f64)
        .map(|t| (t, truth.eval(t) + noise.sample(&mut rng)))
        .collect();

    let init = initial_guess(&points);
    println!("initial guess: {init:?}");
    let (fit, report) = fit_triple_logistic(&points, &init, &LogisticFitOptions::default())?;
    println!("fitted:        {fit:?}");
    println!("sse {:.3} after {} iterations, converged {}", report.sse, report.iterations, report.converged);
    let grid: Vec<f64> = (0..=180).map(|i| 2.0 + 0.1 * i as f64).collect();
    let worst = grid.iter().map(|&t| (fit.eval(t) - truth.eval(t)).abs()).fold(0.0, f64::max);
    println!("max deviation from truth on [2, 20]: {worst:.3} cm");
    println!("monotone: {}", check_monotone(&fit, &grid).0);
    Ok(())
}
