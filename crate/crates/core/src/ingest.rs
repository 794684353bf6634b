//! Encounter parsing, BMI derivation and dataset exclusion rules.
//!
//! Parsing never drops a row silently: every data row either becomes an
//! [`Encounter`] or a [`RowDiagnostic`] carrying its line number. Exclusion
//! then assigns each rejected encounter exactly one [`Rejection`] reason,
//! checked in the fixed order missing → weight → stature → BMI → age →
//! encounter count.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Measure, Sex};

/// Maximum tolerated gap between a supplied BMI and weight/stature², kg/m².
pub const BMI_CONSISTENCY_TOL: f64 = 0.05;

/// One measurement event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encounter {
    pub subject_id: String,
    pub sex: Sex,
    /// Decimal years.
    pub age: f64,
    /// kg
    pub weight: Option<f64>,
    /// cm
    pub stature: Option<f64>,
    /// kg/m²
    pub bmi: Option<f64>,
}

impl Encounter {
    /// Builds a complete encounter, deriving BMI from weight and stature.
    pub fn new(subject_id: impl Into<String>, sex: Sex, age: f64, weight: f64, stature: f64) -> Result<Self> {
        let bmi = derive_bmi(weight, stature)?;
        Ok(Encounter {
            subject_id: subject_id.into(),
            sex,
            age,
            weight: Some(weight),
            stature: Some(stature),
            bmi: Some(bmi),
        })
    }

    pub fn value(&self, measure: Measure) -> Option<f64> {
        match measure {
            Measure::Weight => self.weight,
            Measure::Stature => self.stature,
            Measure::Bmi => self.bmi,
        }
    }

    fn is_complete(&self) -> bool {
        [self.weight, self.stature, self.bmi]
            .iter()
            .all(|v| v.is_some_and(f64::is_finite))
    }
}

/// Body mass index from weight in kg and stature in cm.
pub fn derive_bmi(weight_kg: f64, stature_cm: f64) -> Result<f64> {
    if !(weight_kg > 0.0 && stature_cm > 0.0) || !weight_kg.is_finite() || !stature_cm.is_finite() {
        return Err(Error::domain(format!(
            "BMI needs positive weight and stature, got {weight_kg} kg and {stature_cm} cm"
        )));
    }
    let m = stature_cm / 100.0;
    Ok(weight_kg / (m * m))
}

/// Column naming convention of the input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schema {
    Edw,
    Nhanes,
    Generic,
}

impl std::str::FromStr for Schema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edw" => Ok(Schema::Edw),
            "nhanes" => Ok(Schema::Nhanes),
            "generic" => Ok(Schema::Generic),
            _ => Err(Error::invalid(format!("unknown schema `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    SubjectId,
    Sex,
    Age,
    AgeMonths,
    Weight,
    Stature,
    Bmi,
}

impl Schema {
    /// Accepted header names (lowercase) for each field.
    fn aliases(self, field: Field) -> &'static [&'static str] {
        use Field::*;
        match (self, field) {
            (Schema::Generic, SubjectId) => &["subject_id", "id", "subject"],
            (Schema::Edw, SubjectId) => &["subject_id", "patient_id", "pat_id", "mrn", "id"],
            (Schema::Nhanes, SubjectId) => &["subject_id", "seqn", "id"],
            (Schema::Nhanes, Sex) => &["sex", "riagendr", "gender"],
            (_, Sex) => &["sex", "gender"],
            (_, Age) => &["age", "age_years"],
            (Schema::Nhanes, AgeMonths) => &["age_months", "ridageex", "ridagemn", "agemos"],
            (_, AgeMonths) => &["age_months", "agemos"],
            (Schema::Nhanes, Weight) => &["weight", "bmxwt", "weight_kg"],
            (_, Weight) => &["weight", "weight_kg", "wt"],
            (Schema::Nhanes, Stature) => &["stature", "bmxht", "height", "stature_cm", "height_cm"],
            (_, Stature) => &["stature", "height", "stature_cm", "height_cm", "ht"],
            (Schema::Nhanes, Bmi) => &["bmi", "bmxbmi"],
            (_, Bmi) => &["bmi"],
        }
    }
}

/// A per-row message tied to its 1-based line number in the input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDiagnostic {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedEncounters {
    pub encounters: Vec<Encounter>,
    /// Rows that could not be turned into an encounter.
    pub malformed: Vec<RowDiagnostic>,
    /// Accepted rows with a non-fatal problem (inconsistent BMI).
    pub warnings: Vec<RowDiagnostic>,
}

struct Columns {
    subject: usize,
    sex: usize,
    age: Option<usize>,
    age_months: Option<usize>,
    weight: Option<usize>,
    stature: Option<usize>,
    bmi: Option<usize>,
}

impl Columns {
    fn resolve(headers: &csv::StringRecord, schema: Schema) -> Result<Columns> {
        let lower: Vec<String> = headers.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
        let find = |field: Field| {
            schema
                .aliases(field)
                .iter()
                .find_map(|alias| lower.iter().position(|h| h == alias))
        };
        let subject = find(Field::SubjectId).ok_or_else(|| Error::MissingColumn("subject_id".into()))?;
        let sex = find(Field::Sex).ok_or_else(|| Error::MissingColumn("sex".into()))?;
        let age = find(Field::Age);
        let age_months = find(Field::AgeMonths);
        if age.is_none() && age_months.is_none() {
            return Err(Error::MissingColumn("age".into()));
        }
        Ok(Columns {
            subject,
            sex,
            age,
            age_months,
            weight: find(Field::Weight),
            stature: find(Field::Stature),
            bmi: find(Field::Bmi),
        })
    }
}

fn is_missing(raw: &str) -> bool {
    matches!(raw.trim(), "" | "NA" | "na" | "N/A" | "." | "NULL" | "null")
}

fn parse_number(record: &csv::StringRecord, idx: Option<usize>, name: &str) -> std::result::Result<Option<f64>, String> {
    let Some(idx) = idx else { return Ok(None) };
    let raw = record.get(idx).unwrap_or("");
    if is_missing(raw) {
        return Ok(None);
    }
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(format!("unparseable {name} `{raw}`")),
    }
}

/// Parses encounter rows from CSV text with a header row.
///
/// Unreadable input and missing required columns are fatal; everything else
/// is reported per row.
pub fn parse_encounters<R: Read>(input: R, schema: Schema) -> Result<ParsedEncounters> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let cols = Columns::resolve(&headers, schema)?;
    let mut out = ParsedEncounters::default();

    let mut record = csv::StringRecord::new();
    loop {
        let line = reader.position().line() + 1;
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(line, |p| p.line());
                if record.len() != headers.len() {
                    out.malformed.push(RowDiagnostic {
                        line,
                        message: format!("expected {} fields, found {}", headers.len(), record.len()),
                    });
                    continue;
                }
                match parse_row(&record, &cols) {
                    Ok((enc, warning)) => {
                        if let Some(message) = warning {
                            log::warn!("line {line}: {message}");
                            out.warnings.push(RowDiagnostic { line, message });
                        }
                        out.encounters.push(enc);
                    }
                    Err(message) => out.malformed.push(RowDiagnostic { line, message }),
                }
            }
            Err(err) => match err.kind() {
                csv::ErrorKind::Io(_) => return Err(err.into()),
                _ => {
                    let line = err.position().map_or(line, |p| p.line());
                    out.malformed.push(RowDiagnostic { line, message: err.to_string() });
                }
            },
        }
    }
    Ok(out)
}

fn parse_row(record: &csv::StringRecord, cols: &Columns) -> std::result::Result<(Encounter, Option<String>), String> {
    let subject_id = record.get(cols.subject).unwrap_or("").trim().to_string();
    if subject_id.is_empty() {
        return Err("empty subject_id".into());
    }
    let sex_raw = record.get(cols.sex).unwrap_or("");
    let sex = Sex::parse_code(sex_raw).ok_or_else(|| format!("unknown sex code `{sex_raw}`"))?;

    let age = match parse_number(record, cols.age, "age")? {
        Some(a) => a,
        None => match parse_number(record, cols.age_months, "age_months")? {
            Some(m) => m / 12.0,
            None => return Err("missing age".into()),
        },
    };
    if age < 0.0 {
        return Err(format!("negative age {age}"));
    }

    let weight = parse_number(record, cols.weight, "weight")?;
    let stature = parse_number(record, cols.stature, "stature")?;
    let supplied_bmi = parse_number(record, cols.bmi, "bmi")?;
    for (name, v) in [("weight", weight), ("stature", stature), ("bmi", supplied_bmi)] {
        if let Some(v) = v {
            if v <= 0.0 {
                return Err(format!("non-positive {name} {v}"));
            }
        }
    }

    let derived = match (weight, stature) {
        (Some(w), Some(h)) => derive_bmi(w, h).ok(),
        _ => None,
    };
    let mut warning = None;
    let bmi = match (supplied_bmi, derived) {
        (Some(b), Some(d)) => {
            if (b - d).abs() > BMI_CONSISTENCY_TOL {
                warning = Some(format!("supplied BMI {b} differs from weight/stature² = {d:.4}"));
            }
            Some(b)
        }
        (Some(b), None) => Some(b),
        (None, d) => d,
    };

    Ok((Encounter { subject_id, sex, age, weight, stature, bmi }, warning))
}

/// Dataset exclusion thresholds. `None` disables a rule.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExclusionPolicy {
    pub max_weight: Option<f64>,
    pub max_stature: Option<f64>,
    pub bmi_min: Option<f64>,
    pub bmi_max: Option<f64>,
    pub min_age: Option<f64>,
    pub max_age: Option<f64>,
    pub min_encounters_per_subject: Option<usize>,
}

impl ExclusionPolicy {
    /// Identity policy: only incomplete rows are rejected.
    pub fn none() -> Self {
        Self::default()
    }

    /// Electronic-record warehouse extract: weight ≤ 200 kg, stature ≤ 242 cm,
    /// BMI in [6, 100], age ≥ 2, at least five encounters per child.
    pub fn edw() -> Self {
        ExclusionPolicy {
            max_weight: Some(200.0),
            max_stature: Some(242.0),
            bmi_min: Some(6.0),
            bmi_max: Some(100.0),
            min_age: Some(2.0),
            max_age: None,
            min_encounters_per_subject: Some(5),
        }
    }

    /// National survey: age in [0, 26], weight ≤ 300 kg, BMI ≤ 100.
    pub fn nhanes() -> Self {
        ExclusionPolicy {
            max_weight: Some(300.0),
            max_stature: None,
            bmi_min: None,
            bmi_max: Some(100.0),
            min_age: Some(0.0),
            max_age: Some(26.0),
            min_encounters_per_subject: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("max_weight", self.max_weight),
            ("max_stature", self.max_stature),
            ("bmi_min", self.bmi_min),
            ("bmi_max", self.bmi_max),
            ("max_age", self.max_age),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if let Some(v) = self.min_age {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("min_age must be non-negative, got {v}")));
            }
        }
        if let (Some(lo), Some(hi)) = (self.bmi_min, self.bmi_max) {
            if lo >= hi {
                return Err(Error::Config(format!("bmi_min {lo} must be below bmi_max {hi}")));
            }
        }
        if let (Some(lo), Some(hi)) = (self.min_age, self.max_age) {
            if lo > hi {
                return Err(Error::Config(format!("min_age {lo} exceeds max_age {hi}")));
            }
        }
        if self.min_encounters_per_subject == Some(0) {
            return Err(Error::Config("min_encounters_per_subject must be at least 1".into()));
        }
        Ok(())
    }

    fn value_rejection(&self, e: &Encounter) -> Option<Rejection> {
        if !e.is_complete() {
            return Some(Rejection::MissingField);
        }
        let (w, h, b) = (e.weight.unwrap_or_default(), e.stature.unwrap_or_default(), e.bmi.unwrap_or_default());
        if self.max_weight.is_some_and(|max| w > max) {
            return Some(Rejection::WeightOverMax);
        }
        if self.max_stature.is_some_and(|max| h > max) {
            return Some(Rejection::StatureOverMax);
        }
        if self.bmi_min.is_some_and(|min| b < min) || self.bmi_max.is_some_and(|max| b > max) {
            return Some(Rejection::BmiOutOfRange);
        }
        if self.min_age.is_some_and(|min| e.age < min) || self.max_age.is_some_and(|max| e.age > max) {
            return Some(Rejection::AgeOutOfRange);
        }
        None
    }
}

/// Rejection reasons in precedence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    MissingField,
    WeightOverMax,
    StatureOverMax,
    BmiOutOfRange,
    AgeOutOfRange,
    TooFewEncounters,
    MalformedRow,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub total_rows: usize,
    pub accepted: usize,
    pub missing_field: usize,
    pub weight_over_max: usize,
    pub stature_over_max: usize,
    pub bmi_out_of_range: usize,
    pub age_out_of_range: usize,
    pub too_few_encounters: usize,
    pub malformed_row: usize,
}

impl ExclusionReport {
    pub fn count(&self, reason: Rejection) -> usize {
        match reason {
            Rejection::MissingField => self.missing_field,
            Rejection::WeightOverMax => self.weight_over_max,
            Rejection::StatureOverMax => self.stature_over_max,
            Rejection::BmiOutOfRange => self.bmi_out_of_range,
            Rejection::AgeOutOfRange => self.age_out_of_range,
            Rejection::TooFewEncounters => self.too_few_encounters,
            Rejection::MalformedRow => self.malformed_row,
        }
    }

    fn bump(&mut self, reason: Rejection) {
        self.total_rows += 1;
        let slot = match reason {
            Rejection::MissingField => &mut self.missing_field,
            Rejection::WeightOverMax => &mut self.weight_over_max,
            Rejection::StatureOverMax => &mut self.stature_over_max,
            Rejection::BmiOutOfRange => &mut self.bmi_out_of_range,
            Rejection::AgeOutOfRange => &mut self.age_out_of_range,
            Rejection::TooFewEncounters => &mut self.too_few_encounters,
            Rejection::MalformedRow => &mut self.malformed_row,
        };
        *slot += 1;
    }

    /// Folds malformed parse rows into the report.
    pub fn add_malformed(&mut self, rows: usize) {
        for _ in 0..rows {
            self.bump(Rejection::MalformedRow);
        }
    }

    pub fn rejected(&self) -> usize {
        self.missing_field
            + self.weight_over_max
            + self.stature_over_max
            + self.bmi_out_of_range
            + self.age_out_of_range
            + self.too_few_encounters
            + self.malformed_row
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Filters encounters by `policy`, preserving input order.
///
/// The per-subject encounter minimum counts only encounters that survived the
/// value-range rules.
pub fn apply_exclusions(encounters: &[Encounter], policy: &ExclusionPolicy) -> (Vec<Encounter>, ExclusionReport) {
    let mut report = ExclusionReport::default();
    let verdicts: Vec<Option<Rejection>> = encounters.iter().map(|e| policy.value_rejection(e)).collect();

    let mut surviving: HashMap<&str, usize> = HashMap::new();
    for (e, v) in encounters.iter().zip(&verdicts) {
        if v.is_none() {
            *surviving.entry(e.subject_id.as_str()).or_default() += 1;
        }
    }

    let mut kept = Vec::with_capacity(encounters.len());
    for (e, v) in encounters.iter().zip(verdicts) {
        let verdict = v.or_else(|| {
            let min = policy.min_encounters_per_subject?;
            (surviving[e.subject_id.as_str()] < min).then_some(Rejection::TooFewEncounters)
        });
        match verdict {
            Some(reason) => report.bump(reason),
            None => {
                report.total_rows += 1;
                report.accepted += 1;
                kept.push(e.clone());
            }
        }
    }
    (kept, report)
}

/// Result of [`clean_csv`].
#[derive(Debug, Clone)]
pub struct CleanedEncounters {
    pub encounters: Vec<Encounter>,
    pub report: ExclusionReport,
    pub malformed: Vec<RowDiagnostic>,
    pub warnings: Vec<RowDiagnostic>,
}

/// Parses and filters in one step; malformed rows are counted in the report.
pub fn clean_csv<R: Read>(input: R, schema: Schema, policy: &ExclusionPolicy) -> Result<CleanedEncounters> {
    policy.validate()?;
    let parsed = parse_encounters(input, schema)?;
    let (encounters, mut report) = apply_exclusions(&parsed.encounters, policy);
    report.add_malformed(parsed.malformed.len());
    Ok(CleanedEncounters { encounters, report, malformed: parsed.malformed, warnings: parsed.warnings })
}
