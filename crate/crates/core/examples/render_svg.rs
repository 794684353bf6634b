//! Render the bundled BMI reference as an SVG fan chart.
//!
//! cargo run --example render_svg > bmi.svg

use growthcharts::lms::{bundled_table, reference_curves};
use growthcharts::svg::{render_svg, SvgStyle};
use growthcharts::{Measure, Sex};

fn main() -> growthcharts::Result<()> {
    let table = bundled_table(Measure::Bmi)?;
    let ages: Vec<f64> = (0..=72).map(|i| 2.0 + 0.25 * i as f64).collect();
    let chart = reference_curves(&table, Sex::Female, &Measure::Bmi.chart_levels(), &ages)?;
    let style = SvgStyle { title: Some("Girls BMI-for-age reference".into()), stroke: "#1f4e79".into(), ..SvgStyle::default() };
    print!("{}", render_svg(&chart, &style));
    Ok(())
}
