//! Sample a synthetic cohort and write it in the generic CSV schema.
//!
//! cargo run --example synth_cohort [out.csv]

use growthcharts::lms::bundled_table;
use growthcharts::synth::{cohort_to_csv, describe_cohort, sample_cohort, CohortSpec};
use growthcharts::{Measure, Sex};

fn main() -> growthcharts::Result<()> {
    let mut spec = CohortSpec::standard(&bundled_table(Measure::Weight)?, &bundled_table(Measure::Stature)?, Sex::Male, 50, 2024);
    // thinner sampling in the late teens
    for n in spec.per_bin.iter_mut().skip(32) {
        *n = 10;
    }
    let cohort = sample_cohort(&spec)?;
    println!("{}", describe_cohort(&cohort));
    let csv = cohort_to_csv(&cohort);
    match std::env::args().nth(1) {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{}", csv.lines().take(6).collect::<Vec<_>>().join("\n") + "\n"),
    }
    Ok(())
}
