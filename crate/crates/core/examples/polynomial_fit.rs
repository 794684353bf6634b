//! Degree-10 least squares in the scaled age variable.

use growthcharts::parametric::{check_monotone, fit_polynomial, Curve};

fn main() -> growthcharts::Result<()> {
    let truth = |t: f64| 12.0 + 1.8 * t + 0.02 * t * t + 3.0 * (t / 3.0).sin();
    let points: Vec<(f64, f64)> = (0..36).map(|i| 2.25 + 0.5 * i as f64).map(|t| (t, truth(t))).collect();
    let (curve, report) = fit_polynomial(&points, 10, None)?;
    println!("center {} halfwidth {}, sse {:.3e}", curve.age_center, curve.age_halfwidth, report.sse);
    for t in [2.25, 6.0, 10.0, 15.5, 19.75] {
        println!("t = {t:<5}  fit {:.5}  truth {:.5}", curve.eval(t), truth(t));
    }
    let grid: Vec<f64> = (0..=175).map(|i| 2.25 + 0.1 * i as f64).collect();
    let (monotone, bad) = check_monotone(&curve, &grid);
    println!("monotone: {monotone} ({} violations)", bad.len());
    println!("{}", serde_json::to_string_pretty(&curve)?);
    Ok(())
}
