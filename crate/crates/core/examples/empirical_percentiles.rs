//! Empirical percentiles per half-year bin from a synthetic cohort.

use growthcharts::binning::{build_empirical_series, empirical_percentile, percentile_rank, AgeGrid};
use growthcharts::lms::bundled_table;
use growthcharts::synth::{sample_cohort, CohortSpec};
use growthcharts::{Measure, Sex};

fn main() -> growthcharts::Result<()> {
    // rank n = P/100 * N + 1/2, rounded half-up
    for n in [10, 37, 200] {
        println!("N = {n}: p3 rank {}, p50 rank {}, p97 rank {}", percentile_rank(3.0, n), percentile_rank(50.0, n), percentile_rank(97.0, n));
    }
    println!("p50 of [4, 1, 3, 2] = {}", empirical_percentile(&[4.0, 1.0, 3.0, 2.0], 50.0)?);

    let spec = CohortSpec::standard(&bundled_table(Measure::Weight)?, &bundled_table(Measure::Stature)?, Sex::Female, 200, 1);
    let cohort = sample_cohort(&spec)?;
    let series = build_empirical_series(&cohort, Sex::Female, Measure::Stature, &Measure::Stature.chart_levels(), &AgeGrid::standard())?;
    println!("age    p3      p50     p97");
    for i in (0..36).step_by(5) {
        let at = |level: usize| series[level].points[i].value;
        println!("{:<6} {:<7.1} {:<7.1} {:.1}", series[0].points[i].age, at(0), at(4), at(8));
    }
    Ok(())
}
