//! Parse a warehouse-style extract and apply the exclusion rules.
//!
//! cargo run --example clean_encounters [path.csv]

use growthcharts::ingest::{clean_csv, ExclusionPolicy, Schema};

const SAMPLE: &str = include_str!("../tests/fixtures/exclusion_audit.csv");

fn main() -> growthcharts::Result<()> {
    let input = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => SAMPLE.to_string(),
    };
    let cleaned = clean_csv(input.as_bytes(), Schema::Edw, &ExclusionPolicy::edw())?;
    println!("{}", cleaned.report.to_json());
    for d in &cleaned.malformed {
        println!("malformed line {}: {}", d.line, d.message);
    }
    for e in cleaned.encounters.iter().take(3) {
        println!("{} {} age {:.1}: bmi {:.2}", e.subject_id, e.sex, e.age, e.bmi.unwrap_or(f64::NAN));
    }
    Ok(())
}
