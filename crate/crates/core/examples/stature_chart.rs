//! Stature-for-age chart: empirical percentiles, weighted-line
//! pre-smoothing of the upper levels near 20 years, triple-logistic fits.

use growthcharts::lms::bundled_table;
use growthcharts::parametric::ParametricCurve;
use growthcharts::pipeline::{build_chart, ChartConfig, DatasetPreset};
use growthcharts::synth::{sample_cohort, CohortSpec};
use growthcharts::{Level, Measure, Sex};

fn main() -> growthcharts::Result<()> {
    let spec = CohortSpec::standard(&bundled_table(Measure::Weight)?, &bundled_table(Measure::Stature)?, Sex::Female, 300, 3);
    let cohort = sample_cohort(&spec)?;
    let config = ChartConfig::new(Measure::Stature, Sex::Female, DatasetPreset::Generic);
    let build = build_chart(&cohort, &config)?;
    for m in &build.models {
        if let ParametricCurve::TripleLogistic(c) = &m.model {
            println!(
                "{:>4}: adult {:.1} cm, inflections {:.2} {:.2} {:.2}, sse {:.2}, monotone {}",
                m.level.column_name(),
                c.a.iter().sum::<f64>(),
                c.c[0],
                c.c[1],
                c.c[2],
                m.fit.sse,
                m.monotone
            );
        }
    }
    let p50 = build.chart.curve(Level(50.0)).unwrap();
    println!("median at 2, 10, 20 years: {:.1} {:.1} {:.1}", p50[0], p50[32], p50[72]);
    Ok(())
}
