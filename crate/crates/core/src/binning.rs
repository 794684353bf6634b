//! Half-year age bins and order-statistic percentiles.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Encounter;
use crate::io::snap;
use crate::types::{Level, Measure, Sex};

/// A half-open age interval `[lower, upper)` labelled by its midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeBin {
    pub lower: f64,
    pub upper: f64,
    pub midpoint: f64,
}

impl AgeBin {
    pub fn contains(&self, age: f64) -> bool {
        self.lower <= age && age < self.upper
    }
}

/// Sorted, disjoint, equal-width age bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgeGrid {
    bins: Vec<AgeBin>,
}

impl AgeGrid {
    /// The chart grid: 36 half-year bins from 2.0 to 20.0 (midpoints 2.25 … 19.75).
    pub fn standard() -> AgeGrid {
        AgeGrid::new(2.0, 20.0, 0.5).expect("standard grid is valid")
    }

    /// Bins of `width` covering `[start, end)`; `end - start` must be a
    /// multiple of `width`.
    pub fn new(start: f64, end: f64, width: f64) -> Result<AgeGrid> {
        if !(width > 0.0 && end > start && start.is_finite() && end.is_finite()) {
            return Err(Error::invalid(format!("bad age grid [{start}, {end}) width {width}")));
        }
        let count = ((end - start) / width).round();
        if ((end - start) / width - count).abs() > 1e-9 {
            return Err(Error::invalid(format!("[{start}, {end}) is not a multiple of {width}")));
        }
        let bins = (0..count as usize)
            .map(|i| {
                let lower = snap(start + i as f64 * width);
                let upper = snap(start + (i + 1) as f64 * width);
                AgeBin { lower, upper, midpoint: snap((lower + upper) / 2.0) }
            })
            .collect();
        Ok(AgeGrid { bins })
    }

    pub fn bins(&self) -> &[AgeBin] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.midpoint).collect()
    }

    fn index_of(&self, age: f64) -> Option<usize> {
        if !age.is_finite() {
            return None;
        }
        let idx = self.bins.partition_point(|b| b.lower <= age);
        let i = idx.checked_sub(1)?;
        self.bins[i].contains(age).then_some(i)
    }
}

/// The bin with `lower <= age < upper`, if any.
pub fn assign_bin(age: f64, grid: &AgeGrid) -> Option<AgeBin> {
    grid.index_of(age).map(|i| grid.bins[i])
}

/// 1-based rank of the `p`-th percentile among `n` sorted values:
/// `n_rank = round(p/100 · n + 1/2)` with halves rounded up, clamped to `[1, n]`.
///
/// Rounding `x + 1/2` half-up is `floor(x) + 1`, so no half-way comparison is
/// needed.
pub fn percentile_rank(p: f64, n: usize) -> usize {
    let x = p * n as f64 / 100.0;
    let rank = x.floor() as i64 + 1;
    rank.clamp(1, n as i64) as usize
}

/// Order-statistic percentile of `values`.
pub fn empirical_percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("empirical percentile of an empty set"));
    }
    if !(p > 0.0 && p < 100.0) {
        return Err(Error::domain(format!("percentile {p} outside (0, 100)")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(percentile_of_sorted(&sorted, p))
}

fn percentile_of_sorted(sorted: &[f64], p: f64) -> f64 {
    sorted[percentile_rank(p, sorted.len()) - 1]
}

/// One point of a percentile series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub age: f64,
    pub value: f64,
    /// Number of observations in the bin; 0 for synthetic points.
    pub n: usize,
    /// Added by boundary padding; used for estimation but never output.
    #[serde(default)]
    pub synthetic: bool,
}

/// Percentile values at bin midpoints for one sex, measure and level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSeries {
    pub sex: Sex,
    pub measure: Measure,
    pub level: Level,
    /// Strictly increasing in age.
    pub points: Vec<SeriesPoint>,
}

impl EmpiricalSeries {
    pub fn ages(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.age).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Value at `age` (matched to 1e-9), if present.
    pub fn value_at(&self, age: f64) -> Option<f64> {
        self.points.iter().find(|p| (p.age - age).abs() < 1e-9).map(|p| p.value)
    }

    /// Points that came from data rather than padding.
    pub fn observed(&self) -> impl Iterator<Item = &SeriesPoint> {
        self.points.iter().filter(|p| !p.synthetic)
    }
}

/// One series per level from the encounters of `sex` on `grid`.
///
/// Empty bins are left out rather than interpolated.
pub fn build_empirical_series(
    encounters: &[Encounter],
    sex: Sex,
    measure: Measure,
    levels: &[Level],
    grid: &AgeGrid,
) -> Result<Vec<EmpiricalSeries>> {
    let mut by_bin: Vec<Vec<f64>> = vec![Vec::new(); grid.len()];
    for e in encounters.iter().filter(|e| e.sex == sex) {
        if let (Some(i), Some(v)) = (grid.index_of(e.age), e.value(measure)) {
            if v.is_finite() {
                by_bin[i].push(v);
            }
        }
    }
    if by_bin.iter().all(Vec::is_empty) {
        return Err(Error::domain(format!("no data in grid for {sex} {measure}")));
    }
    for values in &mut by_bin {
        values.sort_by(f64::total_cmp);
    }
    Ok(levels
        .iter()
        .map(|&level| {
            let points = grid
                .bins()
                .iter()
                .zip(&by_bin)
                .filter(|(_, v)| !v.is_empty())
                .map(|(bin, values)| SeriesPoint {
                    age: bin.midpoint,
                    value: percentile_of_sorted(values, level.0),
                    n: values.len(),
                    synthetic: false,
                })
                .collect();
            EmpiricalSeries { sex, measure, level, points }
        })
        .collect())
}

/// CSV with columns `age,level,value,n`, grouped by level.
pub fn empirical_to_csv(series: &[EmpiricalSeries]) -> String {
    let mut out = String::from("age,level,value,n\n");
    for s in series {
        for p in s.observed() {
            let _ = writeln!(out, "{},{},{},{}", p.age, s.level, p.value, p.n);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    const LEVELS: [f64; 10] = [3.0, 5.0, 10.0, 25.0, 50.0, 75.0, 85.0, 90.0, 95.0, 97.0];

    /// Independent rank oracle in integer arithmetic: round((2pN + 100) / 200)
    /// with halves rounded up, clamped to [1, N].
    fn oracle(values: &[f64], p: u32) -> f64 {
        let n = values.len() as u64;
        let num = 2 * p as u64 * n + 100; // 200 · (pN/100 + 1/2)
        let rank = ((2 * num + 200) / 400).clamp(1, n);
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted[(rank - 1) as usize]
    }

    fn enc(age: f64, w: f64) -> Encounter {
        Encounter::new("s", Sex::Male, age, w, 100.0).unwrap()
    }

    #[test]
    fn standard_grid_shape() {
        let g = AgeGrid::standard();
        assert_eq!(g.len(), 36);
        assert_eq!(g.bins()[0], AgeBin { lower: 2.0, upper: 2.5, midpoint: 2.25 });
        assert_eq!(g.bins()[35].midpoint, 19.75);
        for b in g.bins() {
            assert!((b.upper - b.lower - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn bin_assignment_is_half_open() {
        let g = AgeGrid::standard();
        assert_eq!(assign_bin(2.3, &g).unwrap().midpoint, 2.25);
        assert_eq!(assign_bin(2.0, &g).unwrap().midpoint, 2.25);
        assert_eq!(assign_bin(2.5, &g).unwrap().midpoint, 2.75);
        assert_eq!(assign_bin(19.999, &g).unwrap().midpoint, 19.75);
        assert!(assign_bin(20.0, &g).is_none());
        assert!(assign_bin(21.0, &g).is_none());
        assert!(assign_bin(1.99, &g).is_none());
        assert!(assign_bin(f64::NAN, &g).is_none());
    }

    #[test]
    fn extended_grids() {
        let g = AgeGrid::new(1.5, 26.0, 0.5).unwrap();
        assert_eq!(g.bins()[0].midpoint, 1.75);
        assert_eq!(assign_bin(25.9, &g).unwrap().midpoint, 25.75);
        assert!(AgeGrid::new(2.0, 20.2, 0.5).is_err());
    }

    #[test]
    fn percentile_examples() {
        let v: Vec<f64> = (1..=99).map(f64::from).collect();
        assert_eq!(empirical_percentile(&v, 50.0).unwrap(), 50.0);
        // n = 0.97 · 10 + 0.5 = 10.2 → 10
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(percentile_rank(97.0, 10), 10);
        assert_eq!(empirical_percentile(&v, 97.0).unwrap(), 10.0);
        assert_eq!(empirical_percentile(&v, 97.0).unwrap(), oracle(&v, 97));
        assert_eq!(empirical_percentile(&[7.5], 3.0).unwrap(), 7.5);
        assert_eq!(empirical_percentile(&[7.5], 97.0).unwrap(), 7.5);
        assert!(empirical_percentile(&[], 50.0).is_err());
        assert!(empirical_percentile(&[1.0], 0.0).is_err());
        assert!(empirical_percentile(&[1.0], 100.0).is_err());
    }

    #[test]
    fn half_ranks_round_up() {
        // 5% of 10 = 0.5 → n = 1.0; 50% of 10 = 5 → n = 5.5 → 6
        assert_eq!(percentile_rank(5.0, 10), 1);
        assert_eq!(percentile_rank(50.0, 10), 6);
        assert_eq!(percentile_rank(25.0, 2), 1);
        assert_eq!(percentile_rank(50.0, 2), 2);
    }

    #[test]
    fn series_from_single_bin() {
        let rows = [enc(3.1, 10.0), enc(3.2, 30.0), enc(3.3, 20.0)];
        let s = build_empirical_series(&rows, Sex::Male, Measure::Weight, &[Level(50.0)], &AgeGrid::standard()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].points, vec![SeriesPoint { age: 3.25, value: 20.0, n: 3, synthetic: false }]);
    }

    #[test]
    fn series_levels_are_ordered_and_sex_filtered() {
        let mut rows: Vec<Encounter> = (0..40).map(|i| enc(5.0 + (i % 4) as f64 * 0.1, 10.0 + i as f64)).collect();
        rows.push(Encounter { sex: Sex::Female, ..enc(5.0, 1000.0) });
        let s = build_empirical_series(&rows, Sex::Male, Measure::Weight, &[Level(3.0), Level(97.0)], &AgeGrid::standard()).unwrap();
        assert!(s[0].points[0].value <= s[1].points[0].value);
        assert_eq!(s[1].points[0].n, 40);
        assert!(build_empirical_series(&rows, Sex::Male, Measure::Weight, &[Level(50.0)], &AgeGrid::new(30.0, 31.0, 0.5).unwrap()).is_err());
    }

    #[test]
    fn normal_cohort_median() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let normal = Normal::new(50.0, 1.0).unwrap();
        let grid = AgeGrid::standard();
        let rows: Vec<Encounter> = grid
            .bins()
            .iter()
            .flat_map(|b| (0..5000).map(move |i| b.lower + 0.5 * i as f64 / 5000.0))
            .map(|age| Encounter { weight: Some(normal.sample(&mut rng)), ..enc(age, 1.0) })
            .collect();
        let s = build_empirical_series(&rows, Sex::Male, Measure::Weight, &[Level(50.0)], &grid).unwrap();
        assert_eq!(s[0].points.len(), 36);
        for p in &s[0].points {
            assert_eq!(p.n, 5000);
            assert!((p.value - 50.0).abs() < 0.1, "{p:?}");
        }
    }

    #[test]
    fn csv_layout() {
        let rows = [enc(3.1, 10.0), enc(4.1, 11.0)];
        let s = build_empirical_series(&rows, Sex::Male, Measure::Weight, &[Level(50.0)], &AgeGrid::standard()).unwrap();
        assert_eq!(empirical_to_csv(&s), "age,level,value,n\n3.25,50,10,1\n4.25,50,11,1\n");
    }

    proptest! {
        #[test]
        fn matches_rank_oracle(values in prop::collection::vec(-1e3f64..1e3, 1..200)) {
            for p in LEVELS {
                prop_assert_eq!(empirical_percentile(&values, p).unwrap(), oracle(&values, p as u32));
            }
        }

        #[test]
        fn monotone_in_level(values in prop::collection::vec(-1e3f64..1e3, 1..200)) {
            let out: Vec<f64> = LEVELS.iter().map(|&p| empirical_percentile(&values, p).unwrap()).collect();
            prop_assert!(out.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn permutation_invariant(values in prop::collection::vec(-1e3f64..1e3, 1..200), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut shuffled = values.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            for p in LEVELS {
                prop_assert_eq!(empirical_percentile(&values, p).unwrap(), empirical_percentile(&shuffled, p).unwrap());
            }
        }

        #[test]
        fn adding_a_new_maximum_never_lowers(values in prop::collection::vec(-1e3f64..1e3, 1..200), bump in 0.0f64..10.0) {
            let max = values.iter().cloned().fold(f64::MIN, f64::max);
            let mut more = values.clone();
            more.push(max + bump);
            for p in LEVELS {
                prop_assert!(empirical_percentile(&more, p).unwrap() >= empirical_percentile(&values, p).unwrap());
            }
        }
    }
}
