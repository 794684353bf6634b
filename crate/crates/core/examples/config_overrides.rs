//! Override smoothing and fit settings from a TOML document.

use growthcharts::lms::bundled_table;
use growthcharts::pipeline::{build_chart, ChartConfig, ConfigOverrides, DatasetPreset};
use growthcharts::synth::{sample_cohort, CohortSpec};
use growthcharts::{Measure, Sex};

const OVERRIDES: &str = r#"
levels = [5.0, 50.0, 95.0]
polynomial_degree = 8

[grid]
start = 2.0
end = 20.0
step = 1.0

[smoothing]
window_points = 9

[smoothing.upper_pad]
side = "upper"
mode = "repeat_window_max"
window = [17.75, 19.75]
target_ages = [20.25, 20.75, 21.25, 21.75]
"#;

fn main() -> growthcharts::Result<()> {
    let mut config = ChartConfig::new(Measure::Weight, Sex::Female, DatasetPreset::Generic);
    let overrides: ConfigOverrides = toml::from_str(OVERRIDES).map_err(|e| growthcharts::Error::Config(e.to_string()))?;
    config.apply_overrides(overrides)?;
    println!("{:#?}", config.smoothing);

    let spec = CohortSpec::standard(&bundled_table(Measure::Weight)?, &bundled_table(Measure::Stature)?, Sex::Female, 150, 8);
    let build = build_chart(&sample_cohort(&spec)?, &config)?;
    print!("{}", build.chart.to_csv_string());
    Ok(())
}
