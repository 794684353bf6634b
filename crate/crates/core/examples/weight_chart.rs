//! Full weight-for-age chart from a synthetic cohort, checked against the
//! generating LMS table, with CSV, model JSON and SVG output.
//!
//! cargo run --release --example weight_chart [out_dir]

use std::path::PathBuf;

use growthcharts::lms::{bundled_table, compare_charts, reference_curves};
use growthcharts::pipeline::{build_chart, ChartConfig, DatasetPreset};
use growthcharts::svg::{render_svg, SvgStyle};
use growthcharts::synth::{sample_cohort, CohortSpec};
use growthcharts::{Measure, Sex};

fn main() -> growthcharts::Result<()> {
    let out_dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "weight_chart_out".into()));
    std::fs::create_dir_all(&out_dir)?;

    let weight = bundled_table(Measure::Weight)?;
    let stature = bundled_table(Measure::Stature)?;
    let cohort = sample_cohort(&CohortSpec::standard(&weight, &stature, Sex::Male, 500, 7))?;
    let config = ChartConfig::new(Measure::Weight, Sex::Male, DatasetPreset::Generic);
    let build = build_chart(&cohort, &config)?;
    println!("{} encounters, {} level crossings", cohort.len(), build.crossings.len());

    let reference = reference_curves(&weight, Sex::Male, &config.levels, &build.chart.ages)?;
    let report = compare_charts(&reference, &build.chart, Some(&config.levels))?;
    print!("{}", report.to_text());

    std::fs::write(out_dir.join("weight_boys.csv"), build.chart.to_csv_string())?;
    std::fs::write(out_dir.join("weight_boys.model.json"), build.model_json(&config))?;
    let style = SvgStyle {
        title: Some("Boys weight-for-age (red: rebuilt, dashed: reference)".into()),
        overlay: Some((reference, "black".into())),
        ..SvgStyle::default()
    };
    std::fs::write(out_dir.join("weight_boys.svg"), render_svg(&build.chart, &style))?;
    println!("wrote {}", out_dir.display());
    Ok(())
}
