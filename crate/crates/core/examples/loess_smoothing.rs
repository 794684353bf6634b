//! Boundary padding and locally weighted regression of one percentile series.

use growthcharts::binning::{build_empirical_series, AgeGrid};
use growthcharts::lms::bundled_table;
use growthcharts::smoothing::{loess_smooth, SmoothingPolicy};
use growthcharts::synth::{sample_cohort, CohortSpec};
use growthcharts::{Level, Measure, Sex};

fn main() -> growthcharts::Result<()> {
    let spec = CohortSpec::standard(&bundled_table(Measure::Weight)?, &bundled_table(Measure::Stature)?, Sex::Male, 60, 42);
    let cohort = sample_cohort(&spec)?;
    let levels = [Level(95.0)];
    let empirical = build_empirical_series(&cohort, Sex::Male, Measure::Weight, &levels, &AgeGrid::standard())?;

    let policy = SmoothingPolicy::preset("edw-weight")?;
    let padded = policy.pad(&empirical[0], None)?;
    let synthetic: Vec<f64> = padded.points.iter().filter(|p| p.synthetic).map(|p| p.age).collect();
    println!("padding ages: {synthetic:?}");

    let smoothed = loess_smooth(&padded, &policy)?;
    println!("age     raw     smoothed");
    for (raw, s) in empirical[0].points.iter().zip(&smoothed.series.points) {
        println!("{:<7} {:<7.2} {:.2}", raw.age, raw.value, s.value);
    }
    Ok(())
}
