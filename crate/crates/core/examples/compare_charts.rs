//! Divergence between two chart CSV files.
//!
//! cargo run --example compare_charts a.csv b.csv

use growthcharts::lms::{bundled_table, compare_charts, reference_curves, ChartCurveSet};
use growthcharts::{Measure, Sex};

fn main() -> growthcharts::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (a, b) = if let [a, b] = args.as_slice() {
        (ChartCurveSet::from_csv(std::fs::File::open(a)?)?, ChartCurveSet::from_csv(std::fs::File::open(b)?)?)
    } else {
        // boys against girls from the bundled table
        let table = bundled_table(Measure::Weight)?;
        let ages: Vec<f64> = (0..=36).map(|i| 2.0 + 0.5 * i as f64).collect();
        let levels = Measure::Weight.chart_levels();
        let mut boys = reference_curves(&table, Sex::Male, &levels, &ages)?;
        let mut girls = reference_curves(&table, Sex::Female, &levels, &ages)?;
        boys.sex = None;
        girls.sex = None;
        (boys, girls)
    };
    let report = compare_charts(&a, &b, None)?;
    print!("{}", report.to_text());
    println!("{}", report.to_json());
    Ok(())
}
