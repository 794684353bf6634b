//! Boundary padding, locally weighted regression and weighted-line
//! pre-smoothing of percentile series.
//!
//! LOESS here uses a k-nearest-point window with tricube weights
//! `(1 - (d/d_max)^3)^3`, where `d_max` is the largest distance inside the
//! window, and a local polynomial of degree 0, 1 or 2. Padded points take part
//! in the local fits with full kernel weight but never appear in the output.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::binning::{EmpiricalSeries, SeriesPoint};
use crate::error::{Error, Result};
use crate::io::snap;
use crate::linalg::weighted_least_squares;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// Where padded values come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PadMode {
    /// Repeat the value found at `anchor_age`.
    RepeatAnchorValue { anchor_age: f64 },
    /// Repeat the maximum value over `window` (inclusive).
    RepeatWindowMax { window: (f64, f64) },
    /// Take the lookup series' own values at each target age.
    UseEmpirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaddingRule {
    pub side: Side,
    #[serde(flatten)]
    pub mode: PadMode,
    /// Ordered moving away from the data.
    pub target_ages: Vec<f64>,
}

/// `count` ages starting at `start` in steps of `step` (negative steps go down).
pub fn stepped_ages(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| snap(start + step * i as f64)).collect()
}

impl PaddingRule {
    pub fn repeat_anchor(side: Side, anchor_age: f64, target_ages: Vec<f64>) -> Self {
        PaddingRule { side, mode: PadMode::RepeatAnchorValue { anchor_age }, target_ages }
    }

    pub fn repeat_window_max(side: Side, window: (f64, f64), target_ages: Vec<f64>) -> Self {
        PaddingRule { side, mode: PadMode::RepeatWindowMax { window }, target_ages }
    }

    pub fn use_empirical(side: Side, target_ages: Vec<f64>) -> Self {
        PaddingRule { side, mode: PadMode::UseEmpirical, target_ages }
    }

    /// Number of points the rule adds.
    pub fn count(&self) -> usize {
        self.target_ages.len()
    }

    pub fn validate(&self) -> Result<()> {
        let away = |w: &[f64]| match self.side {
            Side::Lower => w[1] < w[0],
            Side::Upper => w[1] > w[0],
        };
        if !self.target_ages.windows(2).all(away) {
            return Err(Error::Config(format!(
                "{:?} padding targets must move strictly away from the data: {:?}",
                self.side, self.target_ages
            )));
        }
        if let PadMode::RepeatWindowMax { window: (lo, hi) } = self.mode {
            if lo > hi {
                return Err(Error::Config(format!("padding window [{lo}, {hi}] is reversed")));
            }
        }
        Ok(())
    }
}

/// Extends `series` with synthetic points according to `rule`.
///
/// Anchor values, window maxima and empirical values are read from `lookup`
/// when given (e.g. a series on an extended age grid), otherwise from
/// `series` itself. Each series is padded with its own values.
pub fn apply_padding(series: &EmpiricalSeries, rule: &PaddingRule, lookup: Option<&EmpiricalSeries>) -> Result<EmpiricalSeries> {
    rule.validate()?;
    if series.points.is_empty() {
        return Err(Error::domain("cannot pad an empty series"));
    }
    if rule.target_ages.is_empty() {
        return Ok(series.clone());
    }
    let source = lookup.unwrap_or(series);
    let first = series.points[0].age;
    let last = series.points[series.points.len() - 1].age;
    for &t in &rule.target_ages {
        let clear = match rule.side {
            Side::Lower => t < first - 1e-9,
            Side::Upper => t > last + 1e-9,
        };
        if !clear {
            return Err(Error::domain(format!("padding age {t} overlaps the series range [{first}, {last}]")));
        }
    }

    let values: Vec<f64> = match &rule.mode {
        PadMode::RepeatAnchorValue { anchor_age } => {
            let v = source
                .value_at(*anchor_age)
                .ok_or_else(|| Error::domain(format!("padding anchor age {anchor_age} absent from series")))?;
            vec![v; rule.count()]
        }
        PadMode::RepeatWindowMax { window: (lo, hi) } => {
            let max = source
                .points
                .iter()
                .filter(|p| p.age >= lo - 1e-9 && p.age <= hi + 1e-9)
                .map(|p| p.value)
                .fold(f64::NEG_INFINITY, f64::max);
            if !max.is_finite() {
                return Err(Error::domain(format!("padding window [{lo}, {hi}] holds no points")));
            }
            vec![max; rule.count()]
        }
        PadMode::UseEmpirical => rule
            .target_ages
            .iter()
            .map(|&t| {
                source
                    .value_at(t)
                    .ok_or_else(|| Error::domain(format!("no empirical value at padding age {t}")))
            })
            .collect::<Result<_>>()?,
    };

    let added = rule
        .target_ages
        .iter()
        .zip(values)
        .map(|(&age, value)| SeriesPoint { age, value, n: 0, synthetic: true });
    let mut out = series.clone();
    match rule.side {
        Side::Lower => {
            let mut pts: Vec<SeriesPoint> = added.collect();
            pts.reverse();
            pts.extend(out.points);
            out.points = pts;
        }
        Side::Upper => out.points.extend(added),
    }
    Ok(out)
}

/// Window size for target ages within `[min_age, max_age]` (both inclusive,
/// either side open when absent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowOverride {
    #[serde(default)]
    pub min_age: Option<f64>,
    #[serde(default)]
    pub max_age: Option<f64>,
    pub points: usize,
}

impl WindowOverride {
    fn covers(&self, age: f64) -> bool {
        self.min_age.is_none_or(|lo| age >= lo) && self.max_age.is_none_or(|hi| age <= hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingPolicy {
    #[serde(default)]
    pub name: String,
    /// Number of nearest points in each local fit.
    pub window_points: usize,
    #[serde(default = "default_degree")]
    pub local_degree: usize,
    #[serde(default)]
    pub lower_pad: Option<PaddingRule>,
    #[serde(default)]
    pub upper_pad: Option<PaddingRule>,
    /// First matching override wins.
    #[serde(default)]
    pub window_overrides: Vec<WindowOverride>,
}

fn default_degree() -> usize {
    1
}

impl SmoothingPolicy {
    /// Named presets: `edw-weight`, `nhanes-weight`, `bmi`, `nhanes-bmi`.
    pub fn preset(name: &str) -> Result<SmoothingPolicy> {
        let lower_weight = |anchor| PaddingRule::repeat_anchor(Side::Lower, anchor, stepped_ages(1.75, -0.1, 7));
        let lower_bmi = PaddingRule::repeat_anchor(Side::Lower, 2.25, vec![2.0, 1.75]);
        let bmi_windows = vec![WindowOverride { min_age: None, max_age: Some(12.5), points: 7 }];
        let policy = match name {
            "edw-weight" => SmoothingPolicy {
                name: name.into(),
                window_points: 13,
                local_degree: 1,
                lower_pad: Some(lower_weight(2.25)),
                upper_pad: Some(PaddingRule::repeat_window_max(Side::Upper, (16.75, 19.75), stepped_ages(20.25, 0.5, 7))),
                window_overrides: Vec::new(),
            },
            "nhanes-weight" => SmoothingPolicy {
                name: name.into(),
                window_points: 13,
                local_degree: 1,
                lower_pad: Some(lower_weight(1.75)),
                upper_pad: Some(PaddingRule::use_empirical(Side::Upper, stepped_ages(20.25, 0.5, 7))),
                window_overrides: Vec::new(),
            },
            "bmi" => SmoothingPolicy {
                name: name.into(),
                window_points: 20,
                local_degree: 1,
                lower_pad: Some(lower_bmi),
                upper_pad: Some(PaddingRule::repeat_window_max(Side::Upper, (16.75, 19.75), stepped_ages(20.25, 0.5, 7))),
                window_overrides: bmi_windows,
            },
            "nhanes-bmi" => SmoothingPolicy {
                name: name.into(),
                window_points: 20,
                local_degree: 1,
                lower_pad: Some(lower_bmi),
                upper_pad: Some(PaddingRule::repeat_window_max(Side::Upper, (19.75, 25.25), stepped_ages(20.25, 0.5, 12))),
                window_overrides: bmi_windows,
            },
            other => return Err(Error::Config(format!("unknown smoothing preset `{other}`"))),
        };
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if self.local_degree > 2 {
            return Err(Error::Config(format!("local degree {} not in 0..=2", self.local_degree)));
        }
        let min = self.local_degree + 2;
        let sizes = std::iter::once(self.window_points).chain(self.window_overrides.iter().map(|w| w.points));
        for k in sizes {
            if k < min {
                return Err(Error::Config(format!(
                    "window of {k} points is too small for local degree {} (need {min})",
                    self.local_degree
                )));
            }
        }
        for rule in self.lower_pad.iter().chain(&self.upper_pad) {
            rule.validate()?;
        }
        Ok(())
    }

    pub fn window_for(&self, age: f64) -> usize {
        self.window_overrides
            .iter()
            .find(|w| w.covers(age))
            .map_or(self.window_points, |w| w.points)
    }

    fn largest_window(&self) -> usize {
        self.window_overrides.iter().map(|w| w.points).fold(self.window_points, usize::max)
    }

    /// Pads `series` on both sides per this policy.
    pub fn pad(&self, series: &EmpiricalSeries, lookup: Option<&EmpiricalSeries>) -> Result<EmpiricalSeries> {
        let mut out = series.clone();
        if let Some(rule) = &self.lower_pad {
            out = apply_padding(&out, rule, lookup)?;
        }
        if let Some(rule) = &self.upper_pad {
            out = apply_padding(&out, rule, lookup)?;
        }
        Ok(out)
    }
}

/// A smoothed percentile series on the observed (unpadded) age grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedSeries {
    pub series: EmpiricalSeries,
    pub policy: SmoothingPolicy,
}

/// Locally weighted regression of an (already padded) series.
pub fn loess_smooth(series: &EmpiricalSeries, policy: &SmoothingPolicy) -> Result<SmoothedSeries> {
    policy.validate()?;
    let need = policy.largest_window();
    if series.points.len() < need {
        return Err(Error::domain(format!(
            "series has {} points, fewer than the {need}-point window",
            series.points.len()
        )));
    }
    let ages: Vec<f64> = series.ages();
    let values: Vec<f64> = series.values();
    let mut out = series.clone();
    out.points = series
        .points
        .iter()
        .filter(|p| !p.synthetic)
        .map(|p| {
            let k = policy.window_for(p.age);
            local_fit(&ages, &values, p.age, k, policy.local_degree).map(|value| SeriesPoint { value, ..*p })
        })
        .collect::<Result<_>>()?;
    Ok(SmoothedSeries { series: out, policy: policy.clone() })
}

fn tricube(u: f64) -> f64 {
    let t = 1.0 - u.abs().powi(3);
    if t <= 0.0 {
        0.0
    } else {
        t * t * t
    }
}

/// Value at `at` of a tricube-weighted local polynomial over the `k` nearest
/// points (distance ties go to the lower age). Falls back to a lower degree
/// when the weighted design is singular, e.g. when the only distinct ages
/// left carry zero weight.
fn local_fit(ages: &[f64], values: &[f64], at: f64, k: usize, degree: usize) -> Result<f64> {
    let mut idx: Vec<usize> = (0..ages.len()).collect();
    idx.sort_by(|&i, &j| {
        let (di, dj) = ((ages[i] - at).abs(), (ages[j] - at).abs());
        di.total_cmp(&dj).then(ages[i].total_cmp(&ages[j]))
    });
    idx.truncate(k);
    let d_max = idx.iter().map(|&i| (ages[i] - at).abs()).fold(0.0_f64, f64::max);
    let weights: Vec<f64> = idx
        .iter()
        .map(|&i| if d_max > 0.0 { tricube((ages[i] - at).abs() / d_max) } else { 1.0 })
        .collect();
    let rhs = DVector::from_iterator(k, idx.iter().map(|&i| values[i]));

    for deg in (0..=degree).rev() {
        let design = DMatrix::from_fn(k, deg + 1, |r, c| (ages[idx[r]] - at).powi(c as i32));
        if let Some(beta) = weighted_least_squares(&design, &rhs, &weights) {
            if beta[0].is_finite() {
                return Ok(beta[0]);
            }
            return Err(Error::Numeric(format!("non-finite local fit at age {at}")));
        }
    }
    Err(Error::Numeric(format!("local fit at age {at} has no weighted support")))
}

/// Replaces every value with the fit of one weighted straight line of value
/// on age. Meant for irregular upper percentiles before a parametric fit.
pub fn wlr_presmooth(series: &EmpiricalSeries, weights: &[f64]) -> Result<EmpiricalSeries> {
    let n = series.points.len();
    if n < 3 {
        return Err(Error::domain(format!("weighted line needs at least 3 points, got {n}")));
    }
    if weights.len() != n {
        return Err(Error::invalid(format!("{} weights for {n} points", weights.len())));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || weights.iter().all(|&w| w == 0.0) {
        return Err(Error::domain("weights must be non-negative, finite and not all zero"));
    }
    let design = DMatrix::from_fn(n, 2, |r, c| if c == 0 { 1.0 } else { series.points[r].age });
    let rhs = DVector::from_iterator(n, series.points.iter().map(|p| p.value));
    let beta = weighted_least_squares(&design, &rhs, weights)
        .ok_or_else(|| Error::domain("weighted line is singular (all weighted ages equal)"))?;
    let mut out = series.clone();
    for p in &mut out.points {
        p.value = beta[0] + beta[1] * p.age;
    }
    Ok(out)
}

/// Bin counts as weights for [`wlr_presmooth`].
pub fn count_weights(series: &EmpiricalSeries) -> Vec<f64> {
    series.points.iter().map(|p| p.n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Level, Measure, Sex};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn series_from(ages: &[f64], values: &[f64]) -> EmpiricalSeries {
        EmpiricalSeries {
            sex: Sex::Male,
            measure: Measure::Weight,
            level: Level(50.0),
            points: ages
                .iter()
                .zip(values)
                .map(|(&age, &value)| SeriesPoint { age, value, n: 100, synthetic: false })
                .collect(),
        }
    }

    fn chart_ages() -> Vec<f64> {
        (0..36).map(|i| 2.25 + 0.5 * i as f64).collect()
    }

    fn plain(k: usize, degree: usize) -> SmoothingPolicy {
        SmoothingPolicy {
            name: "test".into(),
            window_points: k,
            local_degree: degree,
            lower_pad: None,
            upper_pad: None,
            window_overrides: vec![],
        }
    }

    #[test]
    fn edw_lower_padding() {
        let ages = chart_ages();
        let values: Vec<f64> = ages.iter().map(|a| 10.0 + a).collect();
        let s = series_from(&ages, &values);
        let rule = SmoothingPolicy::preset("edw-weight").unwrap().lower_pad.unwrap();
        let padded = apply_padding(&s, &rule, None).unwrap();
        let added: Vec<&SeriesPoint> = padded.points.iter().filter(|p| p.synthetic).collect();
        assert_eq!(added.len(), 7);
        assert!(added.iter().all(|p| p.value == 12.25));
        let ages: Vec<f64> = added.iter().map(|p| p.age).collect();
        assert_eq!(ages, vec![1.15, 1.25, 1.35, 1.45, 1.55, 1.65, 1.75]);
        assert!(padded.points.windows(2).all(|w| w[0].age < w[1].age));
    }

    #[test]
    fn edw_upper_padding_uses_window_max() {
        let ages = chart_ages();
        let values: Vec<f64> = ages.iter().map(|a| if *a == 18.25 { 99.0 } else { *a }).collect();
        let s = series_from(&ages, &values);
        let rule = SmoothingPolicy::preset("edw-weight").unwrap().upper_pad.unwrap();
        let padded = apply_padding(&s, &rule, None).unwrap();
        let added: Vec<&SeriesPoint> = padded.points.iter().filter(|p| p.synthetic).collect();
        assert_eq!(added.len(), 7);
        assert!(added.iter().all(|p| p.value == 99.0));
        assert_eq!(added[0].age, 20.25);
        assert_eq!(added[6].age, 23.25);
    }

    #[test]
    fn empty_rule_is_identity() {
        let s = series_from(&chart_ages(), &[1.0; 36]);
        let rule = PaddingRule::repeat_anchor(Side::Lower, 2.25, vec![]);
        assert_eq!(apply_padding(&s, &rule, None).unwrap(), s);
    }

    #[test]
    fn padding_errors() {
        let s = series_from(&chart_ages(), &[1.0; 36]);
        let missing = PaddingRule::repeat_anchor(Side::Lower, 2.0, vec![1.75]);
        assert!(apply_padding(&s, &missing, None).is_err());
        let overlapping = PaddingRule::repeat_anchor(Side::Lower, 2.25, vec![3.0]);
        assert!(apply_padding(&s, &overlapping, None).is_err());
        let wrong_way = PaddingRule::repeat_anchor(Side::Lower, 2.25, vec![1.15, 1.75]);
        assert!(apply_padding(&s, &wrong_way, None).is_err());
        let empirical = PaddingRule::use_empirical(Side::Upper, vec![20.25]);
        assert!(apply_padding(&s, &empirical, None).is_err());
    }

    #[test]
    fn padding_reads_extended_lookup() {
        let s = series_from(&chart_ages(), &[5.0; 36]);
        let ext_ages: Vec<f64> = (0..49).map(|i| 1.75 + 0.5 * i as f64).collect();
        let ext = series_from(&ext_ages, &ext_ages);
        let policy = SmoothingPolicy::preset("nhanes-weight").unwrap();
        let padded = policy.pad(&s, Some(&ext)).unwrap();
        assert_eq!(padded.points.len(), 50);
        assert!(padded.points[..7].iter().all(|p| p.value == 1.75 && p.synthetic));
        let upper: Vec<f64> = padded.points[43..].iter().map(|p| p.value).collect();
        assert_eq!(upper, stepped_ages(20.25, 0.5, 7));
    }

    #[test]
    fn bmi_window_depends_on_age() {
        let p = SmoothingPolicy::preset("bmi").unwrap();
        assert_eq!(p.window_for(2.25), 7);
        assert_eq!(p.window_for(12.5), 7);
        assert_eq!(p.window_for(12.75), 20);
        let nh = SmoothingPolicy::preset("nhanes-bmi").unwrap();
        assert_eq!(nh.upper_pad.unwrap().count(), 12);
        assert!(SmoothingPolicy::preset("nope").is_err());
    }

    #[test]
    fn linear_and_constant_inputs_are_reproduced() {
        let ages = chart_ages();
        let line: Vec<f64> = ages.iter().map(|a| 3.0 - 0.7 * a).collect();
        for k in [3, 7, 13, 20] {
            let out = loess_smooth(&series_from(&ages, &line), &plain(k, 1)).unwrap();
            for (p, y) in out.series.points.iter().zip(&line) {
                assert!((p.value - y).abs() < 1e-10, "k={k}");
            }
            let out = loess_smooth(&series_from(&ages, &[4.2; 36]), &plain(k, 1)).unwrap();
            assert!(out.series.points.iter().all(|p| (p.value - 4.2).abs() < 1e-12));
        }
    }

    #[test]
    fn quadratic_reproduced_at_degree_two() {
        let ages = chart_ages();
        let q: Vec<f64> = ages.iter().map(|a| 1.0 + 0.5 * a - 0.03 * a * a).collect();
        let out = loess_smooth(&series_from(&ages, &q), &plain(6, 2)).unwrap();
        for (p, y) in out.series.points.iter().zip(&q) {
            assert!(((p.value - y) / y).abs() < 1e-9);
        }
    }

    #[test]
    fn output_grid_excludes_padding() {
        let ages = chart_ages();
        let s = series_from(&ages, &ages);
        let policy = SmoothingPolicy::preset("edw-weight").unwrap();
        let padded = policy.pad(&s, None).unwrap();
        let out = loess_smooth(&padded, &policy).unwrap();
        assert_eq!(out.series.ages(), ages);
        assert!(out.series.points.iter().all(|p| !p.synthetic));
    }

    #[test]
    fn too_short_series_is_rejected() {
        let s = series_from(&[2.25, 2.75], &[1.0, 2.0]);
        assert!(loess_smooth(&s, &plain(3, 1)).is_err());
        assert!(loess_smooth(&s, &plain(2, 1)).is_err()); // window below degree + 2
    }

    #[test]
    fn noisy_sine_is_denoised() {
        let ages = chart_ages();
        let truth: Vec<f64> = ages.iter().map(|a| (a / 3.0).sin()).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let noise = Normal::new(0.0, 0.2).unwrap();
        let noisy: Vec<f64> = truth.iter().map(|t| t + noise.sample(&mut rng)).collect();
        let out = loess_smooth(&series_from(&ages, &noisy), &plain(15, 1)).unwrap();
        let (lo, hi) = noisy.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        let rmse = |ys: &[f64]| (ys.iter().zip(&truth).map(|(y, t)| (y - t).powi(2)).sum::<f64>() / 36.0).sqrt();
        let smoothed = out.series.values();
        assert!(smoothed.iter().all(|v| *v >= lo && *v <= hi));
        assert!(rmse(&smoothed) < rmse(&noisy), "{} vs {}", rmse(&smoothed), rmse(&noisy));
    }

    #[test]
    fn wlr_examples() {
        let ages = [2.0, 4.0, 6.0, 8.0];
        let line: Vec<f64> = ages.iter().map(|a| 80.0 + 6.0 * a).collect();
        let out = wlr_presmooth(&series_from(&ages, &line), &[1.0, 5.0, 2.0, 9.0]).unwrap();
        for (p, y) in out.points.iter().zip(&line) {
            assert!((p.value - y).abs() < 1e-10);
        }

        // zero weight on the outlier equals the unweighted fit without it
        let ages = [1.0, 2.0, 3.0, 10.0, 11.0, 12.0, 6.0];
        let vals = [1.0, 2.2, 2.9, 10.1, 11.0, 12.2, 50.0];
        let out = wlr_presmooth(&series_from(&ages, &vals), &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        let (a, b) = closed_form(&ages[..6], &vals[..6], &[1.0; 6]);
        for p in &out.points {
            assert!((p.value - (a + b * p.age)).abs() < 1e-9);
        }

        assert!(wlr_presmooth(&series_from(&[3.0, 3.0, 3.0], &[1.0, 2.0, 3.0]), &[1.0; 3]).is_err());
        assert!(wlr_presmooth(&series_from(&[1.0, 2.0], &[1.0, 2.0]), &[1.0; 2]).is_err());
        assert!(wlr_presmooth(&series_from(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), &[1.0, -1.0, 1.0]).is_err());
    }

    /// 2×2 weighted normal equations solved by Cramer's rule.
    fn closed_form(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
        let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..x.len() {
            sw += w[i];
            sx += w[i] * x[i];
            sy += w[i] * y[i];
            sxx += w[i] * x[i] * x[i];
            sxy += w[i] * x[i] * y[i];
        }
        let det = sw * sxx - sx * sx;
        ((sy * sxx - sx * sxy) / det, (sw * sxy - sx * sy) / det)
    }

    #[test]
    fn wlr_with_count_weights_matches_normal_equations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 1.5).unwrap();
        let ages = chart_ages();
        let vals: Vec<f64> = ages.iter().map(|a| 150.0 + 1.2 * a + noise.sample(&mut rng)).collect();
        let mut s = series_from(&ages, &vals);
        for (i, p) in s.points.iter_mut().enumerate() {
            p.n = 20 + 7 * i;
        }
        let w = count_weights(&s);
        let out = wlr_presmooth(&s, &w).unwrap();
        let (a, b) = closed_form(&ages, &vals, &w);
        for p in &out.points {
            assert!((p.value - (a + b * p.age)).abs() < 1e-9);
        }
    }

    #[test]
    fn policy_config_round_trip() {
        let p = SmoothingPolicy::preset("bmi").unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"mode\":\"repeat_anchor_value\""));
        assert_eq!(serde_json::from_str::<SmoothingPolicy>(&json).unwrap(), p);
        let t = toml::to_string(&p).unwrap();
        assert_eq!(toml::from_str::<SmoothingPolicy>(&t).unwrap(), p);
    }

    proptest! {
        #[test]
        fn reproduces_polynomials_up_to_local_degree(
            coeffs in prop::array::uniform3(-3.0f64..3.0),
            degree in 0usize..=2,
            extra in 0usize..10,
        ) {
            let ages = chart_ages();
            let ys: Vec<f64> = ages.iter().map(|a| {
                (0..=degree).map(|j| coeffs[j] * (a / 10.0).powi(j as i32)).sum::<f64>() + 10.0
            }).collect();
            let out = loess_smooth(&series_from(&ages, &ys), &plain(degree + 2 + extra, degree)).unwrap();
            for (p, y) in out.series.points.iter().zip(&ys) {
                prop_assert!(((p.value - y) / y.abs().max(1.0)).abs() < 1e-9);
            }
        }

        #[test]
        fn affine_equivariance(
            ys in prop::collection::vec(-10.0f64..10.0, 36),
            alpha in -5.0f64..5.0,
            beta in -50.0f64..50.0,
        ) {
            let ages = chart_ages();
            let policy = plain(9, 1);
            let base = loess_smooth(&series_from(&ages, &ys), &policy).unwrap().series.values();
            let moved: Vec<f64> = ys.iter().map(|y| alpha * y + beta).collect();
            let out = loess_smooth(&series_from(&ages, &moved), &policy).unwrap().series.values();
            for (o, b) in out.iter().zip(&base) {
                prop_assert!((o - (alpha * b + beta)).abs() < 1e-8 * (1.0 + (alpha * b).abs() + beta.abs()));
            }
        }

        #[test]
        fn repeat_padding_stays_in_range(ys in prop::collection::vec(0.0f64..100.0, 36)) {
            let s = series_from(&chart_ages(), &ys);
            let (lo, hi) = ys.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
            for name in ["edw-weight", "bmi"] {
                let padded = SmoothingPolicy::preset(name).unwrap().pad(&s, None).unwrap();
                prop_assert!(padded.points.iter().all(|p| p.value >= lo && p.value <= hi));
            }
        }
    }
}
