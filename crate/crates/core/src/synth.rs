//! Synthetic cross-sectional cohorts drawn from LMS tables, for validating
//! the chart pipeline against a known truth.
//!
//! Weight and stature are sampled independently. Each draw takes a uniform
//! age in its half-year bin, then independent standard-normal z-scores
//! pushed through the LMS transform at that age.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::binning::AgeGrid;
use crate::error::{Error, Result};
use crate::ingest::Encounter;
use crate::io::format_sig6;
use crate::lms::{lms_to_value, LmsTable};
use crate::types::Sex;

/// z draws whose LMS value is undefined are redrawn, at most this many times.
const MAX_REDRAWS: usize = 64;

#[derive(Debug, Clone)]
pub struct CohortSpec {
    pub weight: LmsTable,
    pub stature: LmsTable,
    pub sex: Sex,
    pub grid: AgeGrid,
    /// Samples per bin of `grid`.
    pub per_bin: Vec<usize>,
    pub seed: u64,
}

impl CohortSpec {
    /// `per_bin` samples in each of the 36 half-year bins from 2 to 20.
    pub fn standard(weight: &LmsTable, stature: &LmsTable, sex: Sex, per_bin: usize, seed: u64) -> CohortSpec {
        let grid = AgeGrid::standard();
        CohortSpec {
            weight: weight.clone(),
            stature: stature.clone(),
            sex,
            per_bin: vec![per_bin; grid.len()],
            grid,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.per_bin.len() != self.grid.len() {
            return Err(Error::invalid(format!("{} sample counts for {} bins", self.per_bin.len(), self.grid.len())));
        }
        if self.per_bin.iter().all(|&n| n == 0) {
            return Err(Error::invalid("cohort needs at least one sample"));
        }
        let bins = self.grid.bins();
        let (lo, hi) = (bins[0].lower, bins[bins.len() - 1].upper);
        for (name, table) in [("weight", &self.weight), ("stature", &self.stature)] {
            match table.coverage(self.sex) {
                Some((a, b)) if a <= lo + 1e-9 && b >= hi - 1e-9 => {}
                Some((a, b)) => {
                    return Err(Error::domain(format!(
                        "ages {lo}..{hi} outside {name} LMS coverage {a}..{b} for {}",
                        self.sex
                    )))
                }
                None => return Err(Error::domain(format!("{name} LMS table has no rows for {}", self.sex))),
            }
        }
        Ok(())
    }
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let k = 10f64.powi(decimals);
    (x * k).round() / k
}

fn draw_value<R: Rng>(rng: &mut R, table: &LmsTable, sex: Sex, age: f64) -> Result<f64> {
    let entry = table.interpolate(sex, age)?;
    for _ in 0..MAX_REDRAWS {
        let z: f64 = rng.sample(StandardNormal);
        if let Ok(v) = lms_to_value(&entry, z) {
            return Ok(v);
        }
    }
    Err(Error::Numeric(format!("no representable LMS draw at age {age}")))
}

/// Deterministic in `spec`: the same spec always gives the same cohort.
///
/// Ages are truncated to 6 decimals (so they stay inside their bin), weight
/// and stature rounded to 3, and BMI derived from the rounded values and
/// rounded to 4, so the CSV output re-parses to identical encounters.
pub fn sample_cohort(spec: &CohortSpec) -> Result<Vec<Encounter>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let total: usize = spec.per_bin.iter().sum();
    let mut out = Vec::with_capacity(total);
    let width = (total.max(1)).to_string().len();
    for (bin, &count) in spec.grid.bins().iter().zip(&spec.per_bin) {
        for _ in 0..count {
            let raw: f64 = rng.random_range(bin.lower..bin.upper);
            let age = (raw * 1e6).floor() / 1e6;
            let weight = round_to(draw_value(&mut rng, &spec.weight, spec.sex, age)?, 3);
            let stature = round_to(draw_value(&mut rng, &spec.stature, spec.sex, age)?, 3);
            let id = format!("{}{:0width$}", spec.sex.letter(), out.len() + 1);
            let mut e = Encounter::new(id, spec.sex, age, weight, stature)?;
            e.bmi = e.bmi.map(|b| round_to(b, 4));
            out.push(e);
        }
    }
    Ok(out)
}

/// Cohort as CSV in the generic schema.
pub fn cohort_to_csv(encounters: &[Encounter]) -> String {
    let mut out = String::from("subject_id,sex,age,weight,stature,bmi\n");
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for e in encounters {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            e.subject_id,
            e.sex.letter(),
            e.age,
            opt(e.weight),
            opt(e.stature),
            opt(e.bmi)
        );
    }
    out
}

/// Human summary of a cohort: size and per-measure ranges.
pub fn describe_cohort(encounters: &[Encounter]) -> String {
    let range = |f: &dyn Fn(&Encounter) -> Option<f64>| {
        let vals: Vec<f64> = encounters.iter().filter_map(f).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        format!("{}..{}", format_sig6(lo), format_sig6(hi))
    };
    format!(
        "{} encounters; age {}; weight {}; stature {}; bmi {}",
        encounters.len(),
        range(&|e| Some(e.age)),
        range(&|e| e.weight),
        range(&|e| e.stature),
        range(&|e| e.bmi)
    )
}
