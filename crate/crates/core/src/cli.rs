//! Command-line front end. Exit codes: 0 success, 1 usage or configuration
//! error, 2 data or numeric error. Log verbosity comes from
//! `GROWTHCHARTS_LOG` (default `warn`).

use std::ffi::OsString;
use std::fs::File;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{clean_csv, ExclusionReport, RowDiagnostic};
use crate::io::write_atomic;
use crate::lms::{bundled_table, compare_charts, load_lms_table, reference_curves, ChartCurveSet, LmsTable};
use crate::pipeline::{build_chart, ChartConfig, DatasetPreset, OutputGrid};
use crate::svg::{render_svg, SvgStyle};
use crate::synth::{cohort_to_csv, sample_cohort, CohortSpec};
use crate::types::{Level, Measure, Sex};
use crate::binning::empirical_to_csv;

pub const LOG_ENV: &str = "GROWTHCHARTS_LOG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "growthcharts", version, about = "Build, compare and plot pediatric growth charts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a percentile chart from encounter data.
    BuildChart(BuildChartArgs),
    /// Tabulate reference percentile curves from an LMS table.
    Reference(ReferenceArgs),
    /// Report divergence between two chart CSVs.
    Compare(CompareArgs),
    /// Sample a synthetic cohort from LMS tables.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct BuildChartArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub measure: Measure,
    #[arg(long)]
    pub sex: Sex,
    #[arg(long)]
    pub preset: DatasetPreset,
    /// Chart CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// TOML or JSON overrides.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub emit_empirical: Option<PathBuf>,
    /// Exclusion counts and fit diagnostics as JSON.
    #[arg(long)]
    pub emit_report: Option<PathBuf>,
    /// Model JSON; defaults to `<out stem>.model.json` beside the chart.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReferenceArgs {
    /// LMS CSV, or `bundled:<weight|stature|bmi>`.
    #[arg(long)]
    pub lms: String,
    #[arg(long)]
    pub sex: Sex,
    /// Defaults to the nine standard levels.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<Level>>,
    #[arg(long, default_value = "2:20:0.25")]
    pub grid: OutputGrid,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<Level>>,
    /// JSON report; a text version goes beside it with a `.txt` extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// LMS CSV, or `bundled:weight`.
    #[arg(long, default_value = "bundled:weight")]
    pub lms_weight: String,
    #[arg(long, default_value = "bundled:stature")]
    pub lms_stature: String,
    #[arg(long)]
    pub sex: Sex,
    #[arg(long)]
    pub per_bin: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::BuildChart(a) => cmd_build_chart(&a),
        Command::Reference(a) => cmd_reference(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Synth(a) => cmd_synth(&a),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::File { path: path.to_path_buf(), source })
}

/// Loads `bundled:<measure>` or an LMS CSV path.
pub fn load_lms_arg(spec: &str, measure: Option<Measure>) -> Result<LmsTable> {
    match spec.strip_prefix("bundled:") {
        Some(m) => bundled_table(m.parse()?),
        None => load_lms_table(open(Path::new(spec))?, measure),
    }
}

/// `<dir>/<stem>.model.json` for chart path `<dir>/<stem>.csv`.
pub fn default_model_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "chart".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.model.json"))
}

#[derive(Serialize)]
struct FitSummary {
    level: Level,
    sse: f64,
    iterations: usize,
    converged: bool,
    max_abs_residual: f64,
    monotone: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    nadir_age: Option<f64>,
}

#[derive(Serialize)]
struct BuildReport<'a> {
    input: String,
    exclusions: &'a ExclusionReport,
    malformed: &'a [RowDiagnostic],
    warnings: &'a [RowDiagnostic],
    crossings: usize,
    fits: Vec<FitSummary>,
}

pub fn cmd_build_chart(args: &BuildChartArgs) -> Result<()> {
    let mut config = ChartConfig::new(args.measure, args.sex, args.preset);
    if let Some(path) = &args.config {
        config.apply_config_file(path)?;
    }
    let cleaned = clean_csv(open(&args.input)?, args.preset.schema(), &config.exclusions)?;
    info!(
        "{} of {} rows accepted from {}",
        cleaned.report.accepted,
        cleaned.report.total_rows,
        args.input.display()
    );
    let build = build_chart(&cleaned.encounters, &config)?;

    write_atomic(&args.out, build.chart.to_csv_string().as_bytes())?;
    let model_path = args.model.clone().unwrap_or_else(|| default_model_path(&args.out));
    write_atomic(&model_path, build.model_json(&config).as_bytes())?;
    if let Some(path) = &args.svg {
        let style = SvgStyle { title: Some(format!("{} {}-for-age", config.sex, config.measure)), ..SvgStyle::default() };
        write_atomic(path, render_svg(&build.chart, &style).as_bytes())?;
    }
    if let Some(path) = &args.emit_empirical {
        write_atomic(path, empirical_to_csv(&build.empirical).as_bytes())?;
    }
    if let Some(path) = &args.emit_report {
        let report = BuildReport {
            input: args.input.display().to_string(),
            exclusions: &cleaned.report,
            malformed: &cleaned.malformed,
            warnings: &cleaned.warnings,
            crossings: build.crossings.len(),
            fits: build
                .models
                .iter()
                .map(|m| FitSummary {
                    level: m.level,
                    sse: m.fit.sse,
                    iterations: m.fit.iterations,
                    converged: m.fit.converged,
                    max_abs_residual: m.fit.max_abs_residual,
                    monotone: m.monotone,
                    nadir_age: m.nadir_age,
                })
                .collect(),
        };
        write_atomic(path, (serde_json::to_string_pretty(&report)? + "\n").as_bytes())?;
    }
    Ok(())
}

pub fn cmd_reference(args: &ReferenceArgs) -> Result<()> {
    let table = load_lms_arg(&args.lms, None)?;
    let levels = args.levels.clone().unwrap_or_else(|| Measure::Weight.chart_levels());
    let chart = reference_curves(&table, args.sex, &levels, &args.grid.ages()?)?;
    write_atomic(&args.out, chart.to_csv_string().as_bytes())?;
    if let Some(path) = &args.svg {
        write_atomic(path, render_svg(&chart, &SvgStyle { stroke: "black".into(), ..SvgStyle::default() }).as_bytes())?;
    }
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let a = ChartCurveSet::from_csv(open(&args.a)?)?;
    let b = ChartCurveSet::from_csv(open(&args.b)?)?;
    let report = compare_charts(&a, &b, args.levels.as_deref())?;
    let text = report.to_text();
    write_atomic(&args.out, (report.to_json() + "\n").as_bytes())?;
    write_atomic(&args.out.with_extension("txt"), text.as_bytes())?;
    print!("{text}");
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let weight = load_lms_arg(&args.lms_weight, Some(Measure::Weight))?;
    let stature = load_lms_arg(&args.lms_stature, Some(Measure::Stature))?;
    let spec = CohortSpec::standard(&weight, &stature, args.sex, args.per_bin, args.seed);
    let cohort = sample_cohort(&spec)?;
    write_atomic(&args.out, cohort_to_csv(&cohort).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["growthcharts"]), EXIT_USAGE);
        assert_eq!(run(["growthcharts", "build-chart", "--measure", "weight"]), EXIT_USAGE);
        assert_eq!(run(["growthcharts", "reference", "--lms", "x", "--sex", "q", "--out", "o"]), EXIT_USAGE);
        assert_eq!(run(["growthcharts", "--help"]), EXIT_OK);
    }

    #[test]
    fn data_errors_exit_two() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.csv");
        let out = out.to_str().unwrap();
        assert_eq!(run(["growthcharts", "reference", "--lms", "bundled:weight", "--sex", "m", "--grid", "1:20:0.5", "--out", out]), EXIT_DATA);
        assert_eq!(run(["growthcharts", "reference", "--lms", "/nonexistent.csv", "--sex", "m", "--out", out]), EXIT_DATA);
    }

    #[test]
    fn model_path_default() {
        assert_eq!(default_model_path(Path::new("/tmp/x/boys.csv")), PathBuf::from("/tmp/x/boys.model.json"));
    }
}
