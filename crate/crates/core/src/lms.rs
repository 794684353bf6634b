//! LMS reference tables, z-score conversions, reference curves and chart
//! comparison.
//!
//! A measurement `X` at a given age relates to its z-score through the
//! Box-Cox power `L`, median `M` and coefficient of variation `S`:
//! `X = M (1 + L S z)^(1/L)`, or `X = M exp(S z)` when `L` is zero.

use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::format_sig6;
use crate::normal::z_of_percentile;
use crate::types::{Level, Measure, Sex};

/// |L| below this uses the log-normal branch.
pub const L_ZERO_THRESHOLD: f64 = 1e-12;

const AGE_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmsEntry {
    pub sex: Sex,
    /// Years.
    pub age: f64,
    pub l: f64,
    pub m: f64,
    pub s: f64,
}

/// Measurement at z-score `z`.
pub fn lms_to_value(entry: &LmsEntry, z: f64) -> Result<f64> {
    let LmsEntry { l, m, s, .. } = *entry;
    if l.abs() < L_ZERO_THRESHOLD {
        return Ok(m * (s * z).exp());
    }
    let base = 1.0 + l * s * z;
    if base <= 0.0 {
        return Err(Error::domain(format!("z = {z} outside the representable range for L = {l}, S = {s}")));
    }
    Ok(m * base.powf(1.0 / l))
}

/// z-score of measurement `x`.
pub fn value_to_z(entry: &LmsEntry, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("LMS z-score needs a positive measurement, got {x}")));
    }
    let LmsEntry { l, m, s, .. } = *entry;
    if l.abs() < L_ZERO_THRESHOLD {
        return Ok((x / m).ln() / s);
    }
    Ok(((x / m).powf(l) - 1.0) / (l * s))
}

/// LMS rows for one measure, sorted by sex then age.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmsTable {
    pub measure: Option<Measure>,
    entries: Vec<LmsEntry>,
}

impl LmsTable {
    /// Validates and sorts `entries`.
    pub fn new(measure: Option<Measure>, mut entries: Vec<LmsEntry>) -> Result<LmsTable> {
        for e in &entries {
            if !(e.m > 0.0 && e.s > 0.0) || !e.l.is_finite() || !e.age.is_finite() {
                return Err(Error::invalid(format!("invalid LMS row for {} at age {}: M and S must be positive", e.sex, e.age)));
            }
        }
        entries.sort_by(|a, b| a.sex.cmp(&b.sex).then(a.age.total_cmp(&b.age)));
        if let Some(w) = entries.windows(2).find(|w| w[0].sex == w[1].sex && (w[1].age - w[0].age).abs() < AGE_MATCH_TOL) {
            return Err(Error::invalid(format!("duplicate LMS row for {} at age {}", w[0].sex, w[0].age)));
        }
        Ok(LmsTable { measure, entries })
    }

    pub fn entries(&self) -> &[LmsEntry] {
        &self.entries
    }

    fn rows(&self, sex: Sex) -> &[LmsEntry] {
        let start = self.entries.partition_point(|e| e.sex < sex);
        let end = self.entries.partition_point(|e| e.sex <= sex);
        &self.entries[start..end]
    }

    /// Age range covered for `sex`.
    pub fn coverage(&self, sex: Sex) -> Option<(f64, f64)> {
        let rows = self.rows(sex);
        Some((rows.first()?.age, rows.last()?.age))
    }

    /// L, M and S linearly interpolated at `age`.
    pub fn interpolate(&self, sex: Sex, age: f64) -> Result<LmsEntry> {
        let rows = self.rows(sex);
        let out_of_range = || Error::domain(format!("age {age} outside LMS coverage for {sex}"));
        let (first, last) = (rows.first().ok_or_else(out_of_range)?, rows[rows.len() - 1]);
        if !(age >= first.age - AGE_MATCH_TOL && age <= last.age + AGE_MATCH_TOL) {
            return Err(out_of_range());
        }
        let hi = rows.partition_point(|e| e.age < age).min(rows.len() - 1);
        if (rows[hi].age - age).abs() < AGE_MATCH_TOL || hi == 0 {
            return Ok(LmsEntry { age, ..rows[hi] });
        }
        let (a, b) = (rows[hi - 1], rows[hi]);
        if (a.age - age).abs() < AGE_MATCH_TOL {
            return Ok(LmsEntry { age, ..a });
        }
        let w = (age - a.age) / (b.age - a.age);
        let lerp = |x: f64, y: f64| x + w * (y - x);
        Ok(LmsEntry { sex, age, l: lerp(a.l, b.l), m: lerp(a.m, b.m), s: lerp(a.s, b.s) })
    }

    /// Value at percentile `level` for `sex` and `age`.
    pub fn value_at(&self, sex: Sex, age: f64, level: Level) -> Result<f64> {
        lms_to_value(&self.interpolate(sex, age)?, z_of_percentile(level.0)?)
    }
}

/// Loads a CDC-style LMS CSV: `Sex` (1 = male, 2 = female), `Agemos` in
/// months or `Age` in years, then `L`, `M`, `S`. Extra columns are ignored,
/// as are repeated header rows.
pub fn load_lms_table<R: Read>(input: R, measure: Option<Measure>) -> Result<LmsTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(input);
    let headers = reader.headers()?.clone();
    let find = |names: &[&str]| headers.iter().position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)));
    let sex_col = find(&["sex"]).ok_or_else(|| Error::MissingColumn("Sex".into()))?;
    let (age_col, months) = match (find(&["agemos"]), find(&["age"])) {
        (Some(i), _) => (i, true),
        (None, Some(i)) => (i, false),
        _ => return Err(Error::MissingColumn("Agemos".into())),
    };
    let l_col = find(&["l"]).ok_or_else(|| Error::MissingColumn("L".into()))?;
    let m_col = find(&["m"]).ok_or_else(|| Error::MissingColumn("M".into()))?;
    let s_col = find(&["s"]).ok_or_else(|| Error::MissingColumn("S".into()))?;

    let mut entries = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.iter().all(str::is_empty) || row.get(sex_col).is_some_and(|v| v.eq_ignore_ascii_case("sex")) {
            continue;
        }
        let num = |col: usize, name: &str| -> Result<f64> {
            let raw = row.get(col).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::invalid(format!("LMS line {line}: bad {name} `{raw}`")))
        };
        let sex_raw = row.get(sex_col).unwrap_or("");
        let sex = match sex_raw {
            "1" => Sex::Male,
            "2" => Sex::Female,
            other => Sex::parse_code(other)
                .ok_or_else(|| Error::invalid(format!("LMS line {line}: unknown sex `{other}`")))?,
        };
        let age_raw = num(age_col, "age")?;
        let entry = LmsEntry {
            sex,
            age: if months { age_raw / 12.0 } else { age_raw },
            l: num(l_col, "L")?,
            m: num(m_col, "M")?,
            s: num(s_col, "S")?,
        };
        if !(entry.m > 0.0 && entry.s > 0.0) {
            return Err(Error::invalid(format!("LMS line {line}: M and S must be positive (M = {}, S = {})", entry.m, entry.s)));
        }
        entries.push(entry);
    }
    LmsTable::new(measure, entries)
}

/// The bundled desk-scale tables (both sexes, 24–240 months, monthly rows).
///
/// These are smooth CDC-shaped tables meant for synthetic validation and
/// examples. They are not the published CDC values.
pub fn bundled_table(measure: Measure) -> Result<LmsTable> {
    load_lms_table(bundled_csv(measure).as_bytes(), Some(measure))
}

pub fn bundled_csv(measure: Measure) -> &'static str {
    match measure {
        Measure::Weight => include_str!("../data/weight_for_age.csv"),
        Measure::Stature => include_str!("../data/stature_for_age.csv"),
        Measure::Bmi => include_str!("../data/bmi_for_age.csv"),
    }
}

/// Percentile curves on a shared age grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartCurveSet {
    pub measure: Option<Measure>,
    pub sex: Option<Sex>,
    pub ages: Vec<f64>,
    pub levels: Vec<Level>,
    /// `values[i][j]` is level `i` at `ages[j]`.
    pub values: Vec<Vec<f64>>,
}

impl ChartCurveSet {
    pub fn curve(&self, level: Level) -> Option<&[f64]> {
        self.levels.iter().position(|l| l.same(level)).map(|i| self.values[i].as_slice())
    }

    /// `age,p3,p5,…` with six significant digits per value.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("age");
        for level in &self.levels {
            out.push(',');
            out.push_str(&level.column_name());
        }
        out.push('\n');
        for (j, age) in self.ages.iter().enumerate() {
            let _ = write!(out, "{age}");
            for col in &self.values {
                out.push(',');
                out.push_str(&format_sig6(col[j]));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv<R: Read>(input: R) -> Result<ChartCurveSet> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = reader.headers()?.clone();
        if !headers.get(0).is_some_and(|h| h.eq_ignore_ascii_case("age")) {
            return Err(Error::invalid("chart CSV must start with an `age` column"));
        }
        let levels: Vec<Level> = headers
            .iter()
            .skip(1)
            .map(|h| Level::parse_column(h).ok_or_else(|| Error::invalid(format!("bad chart column `{h}`"))))
            .collect::<Result<_>>()?;
        if levels.is_empty() {
            return Err(Error::invalid("chart CSV has no percentile columns"));
        }
        let mut ages = Vec::new();
        let mut values = vec![Vec::new(); levels.len()];
        for row in reader.records() {
            let row = row?;
            let parsed: Vec<f64> = row
                .iter()
                .map(|v| v.parse::<f64>().map_err(|_| Error::invalid(format!("bad chart value `{v}`"))))
                .collect::<Result<_>>()?;
            ages.push(parsed[0]);
            for (col, v) in values.iter_mut().zip(&parsed[1..]) {
                col.push(*v);
            }
        }
        if ages.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("chart ages must be strictly increasing"));
        }
        Ok(ChartCurveSet { measure: None, sex: None, ages, levels, values })
    }
}

/// Percentile curves generated from `table` on `age_grid`.
pub fn reference_curves(table: &LmsTable, sex: Sex, levels: &[Level], age_grid: &[f64]) -> Result<ChartCurveSet> {
    let entries: Vec<LmsEntry> = age_grid.iter().map(|&t| table.interpolate(sex, t)).collect::<Result<_>>()?;
    let values = levels
        .iter()
        .map(|level| {
            let z = z_of_percentile(level.0)?;
            entries.iter().map(|e| lms_to_value(e, z)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(ChartCurveSet { measure: table.measure, sex: Some(sex), ages: age_grid.to_vec(), levels: levels.to_vec(), values })
}

/// Levels compared by default: 3rd, 50th and 97th.
pub fn default_comparison_levels() -> Vec<Level> {
    vec![Level(3.0), Level(50.0), Level(97.0)]
}

/// Divergence of chart `b` from chart `a` at one level; differences are `b - a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelComparison {
    pub level: Level,
    pub max_abs_diff: f64,
    /// Smallest age attaining `max_abs_diff`.
    pub age_of_max_diff: f64,
    pub mean_abs_diff: f64,
    pub mean_diff: f64,
    /// Mean of `|b - a| / |a|`.
    pub mean_rel_diff: f64,
    pub max_rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub max_abs_diff: f64,
    pub level_of_max_abs_diff: Level,
    pub max_rel_diff: f64,
    pub mean_abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub measure: Option<Measure>,
    pub sex: Option<Sex>,
    pub ages_compared: usize,
    pub first_age: f64,
    pub last_age: f64,
    pub levels: Vec<LevelComparison>,
    pub summary: ComparisonSummary,
}

impl ComparisonReport {
    pub fn level(&self, level: Level) -> Option<&LevelComparison> {
        self.levels.iter().find(|c| c.level.same(level))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let what = match (self.measure, self.sex) {
            (Some(m), Some(s)) => format!("{s} {m}"),
            (Some(m), None) => m.to_string(),
            _ => "chart".to_string(),
        };
        let _ = writeln!(
            out,
            "{what} comparison over {} ages ({} to {})",
            self.ages_compared, self.first_age, self.last_age
        );
        let _ = writeln!(out, "{:>6}  {:>12}  {:>8}  {:>12}  {:>12}  {:>10}  {:>10}", "level", "max |diff|", "at age", "mean |diff|", "mean diff", "mean rel", "max rel");
        for c in &self.levels {
            let _ = writeln!(
                out,
                "{:>6}  {:>12.4}  {:>8}  {:>12.4}  {:>12.4}  {:>9.3}%  {:>9.3}%",
                c.level.column_name(),
                c.max_abs_diff,
                c.age_of_max_diff,
                c.mean_abs_diff,
                c.mean_diff,
                100.0 * c.mean_rel_diff,
                100.0 * c.max_rel_diff
            );
        }
        let _ = writeln!(
            out,
            "overall: max |diff| {:.4} at {}, max rel {:.3}%",
            self.summary.max_abs_diff,
            self.summary.level_of_max_abs_diff.column_name(),
            100.0 * self.summary.max_rel_diff
        );
        out
    }
}

/// Compares `b` against `a` over their shared ages at `levels`
/// (default 3rd, 50th, 97th).
pub fn compare_charts(a: &ChartCurveSet, b: &ChartCurveSet, levels: Option<&[Level]>) -> Result<ComparisonReport> {
    if let (Some(x), Some(y)) = (a.measure, b.measure) {
        if x != y {
            return Err(Error::invalid(format!("cannot compare a {x} chart with a {y} chart")));
        }
    }
    if let (Some(x), Some(y)) = (a.sex, b.sex) {
        if x != y {
            return Err(Error::invalid(format!("cannot compare a {x} chart with a {y} chart")));
        }
    }
    let pairs: Vec<(usize, usize)> = a
        .ages
        .iter()
        .enumerate()
        .filter_map(|(i, &t)| b.ages.iter().position(|&u| (u - t).abs() < AGE_MATCH_TOL).map(|j| (i, j)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::domain("charts share no ages"));
    }
    let defaults = default_comparison_levels();
    let levels = levels.unwrap_or(&defaults);
    if levels.is_empty() {
        return Err(Error::invalid("no levels to compare"));
    }

    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        let missing = |side| Error::invalid(format!("chart {side} has no {} column", level.column_name()));
        let ca = a.curve(level).ok_or_else(|| missing("a"))?;
        let cb = b.curve(level).ok_or_else(|| missing("b"))?;
        let n = pairs.len() as f64;
        let mut cmp = LevelComparison {
            level,
            max_abs_diff: -1.0,
            age_of_max_diff: a.ages[pairs[0].0],
            mean_abs_diff: 0.0,
            mean_diff: 0.0,
            mean_rel_diff: 0.0,
            max_rel_diff: 0.0,
        };
        for &(i, j) in &pairs {
            let d = cb[j] - ca[i];
            if d.abs() > cmp.max_abs_diff {
                cmp.max_abs_diff = d.abs();
                cmp.age_of_max_diff = a.ages[i];
            }
            let rel = d.abs() / ca[i].abs();
            cmp.mean_abs_diff += d.abs() / n;
            cmp.mean_diff += d / n;
            cmp.mean_rel_diff += rel / n;
            cmp.max_rel_diff = cmp.max_rel_diff.max(rel);
        }
        out.push(cmp);
    }
    let worst = out
        .iter()
        .fold(&out[0], |w, c| if c.max_abs_diff > w.max_abs_diff { c } else { w });
    let summary = ComparisonSummary {
        max_abs_diff: worst.max_abs_diff,
        level_of_max_abs_diff: worst.level,
        max_rel_diff: out.iter().map(|c| c.max_rel_diff).fold(0.0, f64::max),
        mean_abs_diff: out.iter().map(|c| c.mean_abs_diff).sum::<f64>() / out.len() as f64,
    };
    let ages: Vec<f64> = pairs.iter().map(|&(i, _)| a.ages[i]).collect();
    Ok(ComparisonReport {
        measure: a.measure.or(b.measure),
        sex: a.sex.or(b.sex),
        ages_compared: pairs.len(),
        first_age: ages[0],
        last_age: ages[ages.len() - 1],
        levels: out,
        summary,
    })
}
