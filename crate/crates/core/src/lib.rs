//! Pediatric growth chart reconstruction.
//!
//! The crate turns raw measurement encounters into weight-, stature- and
//! BMI-for-age percentile charts for ages 2 to 20, following the classic
//! empirical-percentile / locally-weighted-regression / parametric-fit route,
//! and compares the result with curves generated from published LMS tables.
//!
//! The stages are exposed as independent modules so each one can be used on
//! its own:
//!
//! - [`ingest`]: CSV parsing, BMI derivation and dataset exclusion rules.
//! - [`binning`]: half-year age bins and order-statistic percentiles.
//! - [`smoothing`]: boundary padding, LOESS and weighted-line pre-smoothing.
//! - [`parametric`]: polynomial and triple-logistic fits, monotonicity and
//!   BMI nadir (adiposity rebound) detection.
//! - [`lms`]: LMS tables, z-scores, reference curves and chart comparison.
//! - [`synth`]: synthetic cohorts drawn from LMS tables.
//! - [`pipeline`]: the end-to-end chart builder and its configuration.
//! - [`svg`]: percentile fan chart rendering.
//! - [`cli`]: the command-line front end used by the `growthcharts` binary.
//!
//! ```no_run
//! use growthcharts::{lms, pipeline, synth, Measure, Sex};
//!
//! let weight = lms::bundled_table(Measure::Weight).unwrap();
//! let stature = lms::bundled_table(Measure::Stature).unwrap();
//! let spec = synth::CohortSpec::standard(&weight, &stature, Sex::Male, 500, 7);
//! let cohort = synth::sample_cohort(&spec).unwrap();
//!
//! let config = pipeline::ChartConfig::new(Measure::Weight, Sex::Male, pipeline::DatasetPreset::Generic);
//! let build = pipeline::build_chart(&cohort, &config).unwrap();
//! println!("{}", build.chart.to_csv_string());
//! ```

// NaN must fail range checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binning;
pub mod cli;
mod error;
pub mod ingest;
mod io;
pub mod lms;
mod linalg;
pub mod normal;
pub mod parametric;
pub mod pipeline;
pub mod smoothing;
pub mod svg;
pub mod synth;
mod types;

pub use error::{Error, Result};
pub use types::{Level, Measure, Sex};
