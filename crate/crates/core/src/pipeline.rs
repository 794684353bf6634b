//! The chart build: empirical percentiles, boundary padding, local
//! smoothing (or weighted-line pre-smoothing for stature), a parametric fit
//! per level, and evaluation on the output grid.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::binning::{build_empirical_series, AgeGrid, EmpiricalSeries};
use crate::error::{Error, Result};
use crate::ingest::{Encounter, ExclusionPolicy, Schema};
use crate::io::{grid_ages, read_to_string};
use crate::lms::ChartCurveSet;
use crate::parametric::{
    check_monotone, find_bmi_nadir, fit_polynomial, fit_triple_logistic, initial_guess, Curve, FitReport,
    LogisticFitOptions, ParametricCurve,
};
use crate::smoothing::{count_weights, loess_smooth, wlr_presmooth, PaddingRule, SmoothingPolicy, WindowOverride};
use crate::types::{Level, Measure, Sex};

/// Extended bins used to look up padding values beyond 2–20 years.
const LOOKUP_GRID: (f64, f64) = (1.0, 26.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetPreset {
    Edw,
    Nhanes,
    Generic,
}

impl DatasetPreset {
    pub fn schema(self) -> Schema {
        match self {
            DatasetPreset::Edw => Schema::Edw,
            DatasetPreset::Nhanes => Schema::Nhanes,
            DatasetPreset::Generic => Schema::Generic,
        }
    }

    pub fn exclusions(self) -> ExclusionPolicy {
        match self {
            DatasetPreset::Edw => ExclusionPolicy::edw(),
            DatasetPreset::Nhanes => ExclusionPolicy::nhanes(),
            DatasetPreset::Generic => ExclusionPolicy::none(),
        }
    }

    /// Smoothing preset name for `measure`, if that measure is smoothed.
    pub fn smoothing_preset(self, measure: Measure) -> Option<&'static str> {
        match (measure, self) {
            (Measure::Weight, DatasetPreset::Nhanes) => Some("nhanes-weight"),
            (Measure::Weight, _) => Some("edw-weight"),
            (Measure::Bmi, DatasetPreset::Nhanes) => Some("nhanes-bmi"),
            (Measure::Bmi, _) => Some("bmi"),
            (Measure::Stature, _) => None,
        }
    }
}

impl fmt::Display for DatasetPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetPreset::Edw => "edw",
            DatasetPreset::Nhanes => "nhanes",
            DatasetPreset::Generic => "generic",
        })
    }
}

impl FromStr for DatasetPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edw" => Ok(DatasetPreset::Edw),
            "nhanes" => Ok(DatasetPreset::Nhanes),
            "generic" => Ok(DatasetPreset::Generic),
            other => Err(Error::invalid(format!("unknown dataset preset `{other}` (edw, nhanes, generic)"))),
        }
    }
}

/// Inclusive `start:end:step` output ages in years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputGrid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Default for OutputGrid {
    fn default() -> Self {
        OutputGrid { start: 2.0, end: 20.0, step: 0.25 }
    }
}

impl OutputGrid {
    pub fn ages(&self) -> Result<Vec<f64>> {
        grid_ages(self.start, self.end, self.step)
    }
}

impl FromStr for OutputGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let nums: Vec<f64> = parts.iter().filter_map(|p| p.trim().parse().ok()).collect();
        if parts.len() != 3 || nums.len() != 3 {
            return Err(Error::invalid(format!("grid must look like start:end:step, got `{s}`")));
        }
        let grid = OutputGrid { start: nums[0], end: nums[1], step: nums[2] };
        grid.ages()?;
        Ok(grid)
    }
}

impl fmt::Display for OutputGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.step)
    }
}

/// Weighted straight-line pre-smoothing of selected stature levels inside an
/// age window, with bin counts as weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Presmooth {
    /// Levels at or above this are pre-smoothed, unless `levels` is given.
    pub min_level: f64,
    pub levels: Option<Vec<Level>>,
    pub min_age: Option<f64>,
    pub max_age: Option<f64>,
}

impl Default for Presmooth {
    fn default() -> Self {
        Presmooth { min_level: 95.0, levels: None, min_age: Some(18.0), max_age: Some(20.0) }
    }
}

impl Presmooth {
    pub fn applies_to(&self, level: Level) -> bool {
        match &self.levels {
            Some(list) => list.iter().any(|l| l.same(level)),
            None => level.0 >= self.min_level,
        }
    }

    fn covers(&self, age: f64) -> bool {
        self.min_age.is_none_or(|lo| age >= lo) && self.max_age.is_none_or(|hi| age <= hi)
    }

    /// Pre-smooths the windowed part of `series`; fewer than three points
    /// in the window leaves it unchanged.
    pub fn apply(&self, series: &EmpiricalSeries) -> Result<Option<EmpiricalSeries>> {
        let idx: Vec<usize> = (0..series.points.len()).filter(|&i| self.covers(series.points[i].age)).collect();
        if idx.len() < 3 {
            return Ok(None);
        }
        let mut window = series.clone();
        window.points = idx.iter().map(|&i| series.points[i]).collect();
        let fitted = wlr_presmooth(&window, &count_weights(&window))?;
        let mut out = series.clone();
        for (&i, p) in idx.iter().zip(&fitted.points) {
            out.points[i].value = p.value;
        }
        Ok(Some(out))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartConfig {
    pub measure: Measure,
    pub sex: Sex,
    pub preset: DatasetPreset,
    pub levels: Vec<Level>,
    pub grid: OutputGrid,
    /// `None` skips padding and local smoothing (the stature default).
    pub smoothing: Option<SmoothingPolicy>,
    pub exclusions: ExclusionPolicy,
    /// Degree of the final polynomial for weight and BMI.
    pub polynomial_degree: usize,
    pub logistic: LogisticFitOptions,
    /// Stature only.
    pub presmooth: Option<Presmooth>,
    /// Search range for the BMI nadir (adiposity rebound).
    pub nadir_range: (f64, f64),
}

impl ChartConfig {
    /// Defaults for `measure` on data from `preset`.
    pub fn new(measure: Measure, sex: Sex, preset: DatasetPreset) -> ChartConfig {
        let smoothing = preset
            .smoothing_preset(measure)
            .map(|name| SmoothingPolicy::preset(name).expect("built-in preset"));
        ChartConfig {
            measure,
            sex,
            preset,
            levels: measure.chart_levels(),
            grid: OutputGrid::default(),
            smoothing,
            exclusions: preset.exclusions(),
            polynomial_degree: if measure == Measure::Bmi { 4 } else { 10 },
            logistic: LogisticFitOptions::default(),
            presmooth: (measure == Measure::Stature).then(Presmooth::default),
            nadir_range: (2.0, 20.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::Config("no percentile levels".into()));
        }
        if self.levels.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Config("levels must be strictly increasing".into()));
        }
        for l in &self.levels {
            Level::new(l.0).map_err(|e| Error::Config(e.to_string()))?;
        }
        self.grid.ages().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(policy) = &self.smoothing {
            policy.validate()?;
        }
        self.exclusions.validate()?;
        if self.polynomial_degree == 0 || self.polynomial_degree > 15 {
            return Err(Error::Config(format!("polynomial degree {} not in 1..=15", self.polynomial_degree)));
        }
        if !(self.nadir_range.0 < self.nadir_range.1) {
            return Err(Error::Config("nadir range must be increasing".into()));
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, ov: ConfigOverrides) -> Result<()> {
        if let Some(levels) = ov.levels {
            self.levels = levels;
        }
        if let Some(grid) = ov.grid {
            self.grid = grid;
        }
        if let Some(s) = ov.smoothing {
            self.smoothing = s.resolve(self.smoothing.take())?;
        }
        if let Some(e) = ov.exclusions {
            self.exclusions = e;
        }
        if let Some(d) = ov.polynomial_degree {
            self.polynomial_degree = d;
        }
        if let Some(l) = ov.logistic {
            self.logistic = l;
        }
        match ov.presmooth {
            Some(Toggle::Off(false)) => self.presmooth = None,
            Some(Toggle::Off(true)) => self.presmooth = Some(Presmooth::default()),
            Some(Toggle::Set(p)) => self.presmooth = Some(p),
            None => {}
        }
        if let Some(r) = ov.nadir_range {
            self.nadir_range = r;
        }
        self.validate()
    }

    /// Applies a TOML or JSON override file; the format is taken from the
    /// extension, or sniffed from the first character.
    pub fn apply_config_file(&mut self, path: &Path) -> Result<()> {
        let text = read_to_string(path)?;
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        let json = match ext.as_deref() {
            Some("json") => true,
            Some("toml") => false,
            _ => text.trim_start().starts_with('{'),
        };
        let ov = if json {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        self.apply_overrides(ov)
    }
}

/// `false` disables a feature, `true` restores its default, a table sets it.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Toggle<T> {
    Off(bool),
    Set(T),
}

/// Partial smoothing settings layered over the current policy.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothingOverride {
    /// Start from this named preset instead of the current policy.
    pub preset: Option<String>,
    pub enabled: Option<bool>,
    pub window_points: Option<usize>,
    pub local_degree: Option<usize>,
    pub lower_pad: Option<Toggle<PaddingRule>>,
    pub upper_pad: Option<Toggle<PaddingRule>>,
    pub window_overrides: Option<Vec<WindowOverride>>,
}

impl SmoothingOverride {
    fn resolve(self, current: Option<SmoothingPolicy>) -> Result<Option<SmoothingPolicy>> {
        if self.enabled == Some(false) {
            return Ok(None);
        }
        let mut policy = match (&self.preset, current) {
            (Some(name), _) => SmoothingPolicy::preset(name)?,
            (None, Some(p)) => p,
            (None, None) => SmoothingPolicy {
                name: "custom".into(),
                window_points: self.window_points.unwrap_or(13),
                local_degree: 1,
                lower_pad: None,
                upper_pad: None,
                window_overrides: Vec::new(),
            },
        };
        if let Some(k) = self.window_points {
            policy.window_points = k;
        }
        if let Some(d) = self.local_degree {
            policy.local_degree = d;
        }
        let pad = |t: Toggle<PaddingRule>| match t {
            Toggle::Off(false) => Ok(None),
            Toggle::Off(true) => Err(Error::Config("padding can be set to false or a rule table".into())),
            Toggle::Set(rule) => Ok(Some(rule)),
        };
        if let Some(t) = self.lower_pad {
            policy.lower_pad = pad(t)?;
        }
        if let Some(t) = self.upper_pad {
            policy.upper_pad = pad(t)?;
        }
        if let Some(w) = self.window_overrides {
            policy.window_overrides = w;
        }
        policy.validate()?;
        Ok(Some(policy))
    }
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigOverrides {
    pub levels: Option<Vec<Level>>,
    pub grid: Option<OutputGrid>,
    pub smoothing: Option<SmoothingOverride>,
    pub exclusions: Option<ExclusionPolicy>,
    pub polynomial_degree: Option<usize>,
    pub logistic: Option<LogisticFitOptions>,
    pub presmooth: Option<Toggle<Presmooth>>,
    pub nadir_range: Option<(f64, f64)>,
}

/// The fitted model for one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelModel {
    pub level: Level,
    pub model: ParametricCurve,
    pub fit: FitReport,
    /// Non-decreasing on a 0.1-year grid over the output range.
    pub monotone: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nadir_age: Option<f64>,
}

/// Two adjacent levels out of order at an output age.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub age: f64,
    pub lower: Level,
    pub upper: Level,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartBuild {
    pub chart: ChartCurveSet,
    pub empirical: Vec<EmpiricalSeries>,
    /// Smoothed (or pre-smoothed) values at the observed bin midpoints.
    pub smoothed: Vec<EmpiricalSeries>,
    pub models: Vec<LevelModel>,
    pub crossings: Vec<Crossing>,
}

#[derive(Serialize)]
struct ModelDocument<'a> {
    measure: Measure,
    sex: Sex,
    preset: DatasetPreset,
    smoothing: Option<&'a str>,
    grid: OutputGrid,
    levels: &'a [LevelModel],
    crossings: &'a [Crossing],
}

impl ChartBuild {
    /// Model parameters, fit diagnostics and crossings as JSON.
    pub fn model_json(&self, config: &ChartConfig) -> String {
        let doc = ModelDocument {
            measure: config.measure,
            sex: config.sex,
            preset: config.preset,
            smoothing: config.smoothing.as_ref().map(|p| p.name.as_str()),
            grid: config.grid,
            levels: &self.models,
            crossings: &self.crossings,
        };
        serde_json::to_string_pretty(&doc).expect("model serializes") + "\n"
    }
}

fn require_full_grid(series: &EmpiricalSeries, grid: &AgeGrid) -> Result<()> {
    let empty: Vec<String> = grid
        .midpoints()
        .into_iter()
        .filter(|&m| series.value_at(m).is_none())
        .map(|m| m.to_string())
        .collect();
    if empty.is_empty() {
        Ok(())
    } else {
        Err(Error::domain(format!("empty age bins at {}", empty.join(", "))))
    }
}

fn fit_level(series: &EmpiricalSeries, config: &ChartConfig) -> Result<(ParametricCurve, FitReport)> {
    let points: Vec<(f64, f64)> = series.observed().map(|p| (p.age, p.value)).collect();
    if config.measure == Measure::Stature {
        let (curve, mut report) = fit_triple_logistic(&points, &initial_guess(&points), &config.logistic)?;
        if !report.converged {
            return Err(Error::Numeric(format!(
                "stature {} fit did not converge after {} iterations (sse {:.6}, max residual {:.4} cm)",
                series.level.column_name(),
                report.iterations,
                report.sse,
                report.max_abs_residual
            )));
        }
        report.sse_trace.clear();
        Ok((ParametricCurve::TripleLogistic(curve), report))
    } else {
        let (curve, report) = fit_polynomial(&points, config.polynomial_degree, None)?;
        Ok((ParametricCurve::Polynomial(curve), report))
    }
}

/// Builds a chart from already-cleaned encounters.
pub fn build_chart(encounters: &[Encounter], config: &ChartConfig) -> Result<ChartBuild> {
    config.validate()?;
    let (measure, sex) = (config.measure, config.sex);
    let grid = AgeGrid::standard();
    let empirical = build_empirical_series(encounters, sex, measure, &config.levels, &grid)?;
    require_full_grid(&empirical[0], &grid)?;

    let mut smoothed = match &config.smoothing {
        Some(policy) => {
            let wide = AgeGrid::new(LOOKUP_GRID.0, LOOKUP_GRID.1, grid.bins()[0].upper - grid.bins()[0].lower)?;
            let lookup = build_empirical_series(encounters, sex, measure, &config.levels, &wide)?;
            empirical
                .iter()
                .zip(&lookup)
                .map(|(series, wide)| {
                    let padded = policy.pad(series, Some(wide))?;
                    Ok(loess_smooth(&padded, policy)?.series)
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => empirical.clone(),
    };
    if measure == Measure::Stature {
        if let Some(pre) = &config.presmooth {
            for series in smoothed.iter_mut().filter(|s| pre.applies_to(s.level)) {
                match pre.apply(series)? {
                    Some(out) => *series = out,
                    None => warn!("fewer than 3 bins in the pre-smoothing window for {}", series.level.column_name()),
                }
            }
        }
    }

    let ages = config.grid.ages()?;
    let check_grid = grid_ages(config.grid.start, config.grid.end, 0.1)?;
    let mut models = Vec::with_capacity(smoothed.len());
    let mut values = Vec::with_capacity(smoothed.len());
    for series in &smoothed {
        let (model, fit) = fit_level(series, config)?;
        debug!("{} {}: sse {:.6} after {} iterations", measure, series.level.column_name(), fit.sse, fit.iterations);
        let (monotone, _) = check_monotone(&model, &check_grid);
        let nadir_age = match &model {
            ParametricCurve::Polynomial(p) if measure == Measure::Bmi && p.degree == 4 => find_bmi_nadir(p, config.nadir_range),
            _ => None,
        };
        if measure == Measure::Stature && !monotone {
            warn!("stature {} curve is not monotone", series.level.column_name());
        }
        values.push(ages.iter().map(|&t| model.eval(t)).collect::<Vec<f64>>());
        models.push(LevelModel { level: series.level, model, fit, monotone, nadir_age });
    }

    let mut crossings = Vec::new();
    for (j, &age) in ages.iter().enumerate() {
        for i in 1..values.len() {
            if !(values[i][j] > values[i - 1][j]) {
                crossings.push(Crossing { age, lower: config.levels[i - 1], upper: config.levels[i] });
            }
        }
    }
    if !crossings.is_empty() {
        warn!("{} level crossings on the output grid", crossings.len());
    }

    let chart = ChartCurveSet { measure: Some(measure), sex: Some(sex), ages, levels: config.levels.clone(), values };
    Ok(ChartBuild { chart, empirical, smoothed, models, crossings })
}
