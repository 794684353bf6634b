//! BMI-for-age chart from a synthetic cohort, with adiposity rebound ages.

use growthcharts::lms::bundled_table;
use growthcharts::pipeline::{build_chart, ChartConfig, DatasetPreset};
use growthcharts::synth::{sample_cohort, CohortSpec};
use growthcharts::{Measure, Sex};

fn main() -> growthcharts::Result<()> {
    let spec = CohortSpec::standard(&bundled_table(Measure::Weight)?, &bundled_table(Measure::Stature)?, Sex::Female, 400, 17);
    let cohort = sample_cohort(&spec)?;
    let config = ChartConfig::new(Measure::Bmi, Sex::Female, DatasetPreset::Generic);
    let build = build_chart(&cohort, &config)?;
    for m in &build.models {
        match m.nadir_age {
            Some(age) => println!("{:>4}: rebound at {age:.2} years", m.level.column_name()),
            None => println!("{:>4}: no interior nadir", m.level.column_name()),
        }
    }
    Ok(())
}
