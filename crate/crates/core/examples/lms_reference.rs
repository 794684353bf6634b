//! Reference percentiles and z-scores from an LMS table.
//!
//! cargo run --example lms_reference [lms.csv]

use growthcharts::lms::{bundled_table, load_lms_table, reference_curves, value_to_z};
use growthcharts::normal::percentile_of_z;
use growthcharts::{Level, Measure, Sex};

fn main() -> growthcharts::Result<()> {
    let table = match std::env::args().nth(1) {
        Some(path) => load_lms_table(std::fs::File::open(path)?, None)?,
        None => bundled_table(Measure::Weight)?,
    };
    let ages: Vec<f64> = (2..=20).map(f64::from).collect();
    let levels = [Level(3.0), Level(50.0), Level(97.0)];
    let chart = reference_curves(&table, Sex::Male, &levels, &ages)?;
    print!("{}", chart.to_csv_string());

    let entry = table.interpolate(Sex::Male, 8.5)?;
    for x in [20.0, 27.0, 40.0] {
        let z = value_to_z(&entry, x)?;
        println!("{x} at 8.5 years: z = {z:.3}, percentile {:.1}", percentile_of_z(z));
    }
    Ok(())
}
