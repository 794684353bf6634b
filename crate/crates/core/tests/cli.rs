use std::path::Path;
use std::process::{Command, Output};

use growthcharts::lms::{bundled_table, ChartCurveSet, ComparisonReport};
use growthcharts::{Level, Sex};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_growthcharts")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = run(dir, args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

fn synth(dir: &Path, sex: &str, per_bin: &str, seed: &str, out: &str) {
    ok(dir, &["synth", "--sex", sex, "--per-bin", per_bin, "--seed", seed, "--out", out]);
}

fn chart(dir: &Path, name: &str) -> ChartCurveSet {
    ChartCurveSet::from_csv(std::fs::File::open(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn missing_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["build-chart", "--measure", "weight", "--sex", "m", "--preset", "generic", "--out", "c.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--input") && err.contains("Usage"), "{err}");
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(1));
}

#[test]
fn synth_row_count_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "f", "100", "3", "a.csv");
    synth(dir.path(), "f", "100", "3", "b.csv");
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(dir.path().join("b.csv")).unwrap());
    assert_eq!(a.lines().count(), 1 + 3600);
    assert!(a.starts_with("subject_id,sex,age,weight,stature,bmi\n"));
}

#[test]
fn reference_grid_and_median() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["reference", "--lms", "bundled:stature", "--sex", "f", "--levels", "3,50,97", "--grid", "2:20:0.5", "--out", "ref.csv"]);
    let c = chart(dir.path(), "ref.csv");
    assert_eq!(c.ages.len(), 37);
    assert_eq!(c.levels, vec![Level(3.0), Level(50.0), Level(97.0)]);
    let table = bundled_table(growthcharts::Measure::Stature).unwrap();
    for (j, &age) in c.ages.iter().enumerate() {
        let m = table.interpolate(Sex::Female, age).unwrap().m;
        assert!(((c.values[1][j] - m) / m).abs() < 5e-6);
    }
    let out = run(dir.path(), &["reference", "--lms", "bundled:stature", "--sex", "f", "--grid", "0:20:1", "--out", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("bad.csv").exists());
}

#[test]
fn lms_file_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("lms.csv"), "Sex,Agemos,L,M,S\n1,24,1,12,0\n").unwrap();
    let out = run(dir.path(), &["reference", "--lms", "lms.csv", "--sex", "m", "--out", "r.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn compare_self_and_single_level() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["reference", "--lms", "bundled:weight", "--sex", "m", "--out", "ref.csv"]);
    ok(dir.path(), &["compare", "--a", "ref.csv", "--b", "ref.csv", "--out", "self.json"]);
    let report: ComparisonReport = serde_json::from_str(&std::fs::read_to_string(dir.path().join("self.json")).unwrap()).unwrap();
    assert_eq!(report.levels.len(), 3);
    assert!(report.levels.iter().all(|c| c.max_abs_diff == 0.0 && c.mean_diff == 0.0 && c.mean_rel_diff == 0.0));
    assert!(dir.path().join("self.txt").exists());

    ok(dir.path(), &["compare", "--a", "ref.csv", "--b", "ref.csv", "--levels", "50", "--out", "p50.json"]);
    let text = std::fs::read_to_string(dir.path().join("p50.json")).unwrap();
    assert!(text.contains("50.0") && !text.contains("97.0"));

    std::fs::write(dir.path().join("narrow.csv"), "age,p50\n2,12\n3,14\n").unwrap();
    let out = run(dir.path(), &["compare", "--a", "ref.csv", "--b", "narrow.csv", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn build_chart_outputs() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "m", "150", "9", "cohort.csv");
    ok(dir.path(), &[
        "build-chart", "--input", "cohort.csv", "--measure", "bmi", "--sex", "m", "--preset", "generic", "--out", "bmi.csv",
        "--svg", "bmi.svg", "--emit-empirical", "emp.csv", "--emit-report", "report.json",
    ]);
    let c = chart(dir.path(), "bmi.csv");
    assert_eq!(c.levels.len(), 10);
    assert!(c.curve(Level(85.0)).is_some());
    let model = std::fs::read_to_string(dir.path().join("bmi.model.json")).unwrap();
    assert!(model.contains("\"nadir_age\""));
    let svg = std::fs::read_to_string(dir.path().join("bmi.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 10);
    let emp = std::fs::read_to_string(dir.path().join("emp.csv")).unwrap();
    assert_eq!(emp.lines().count(), 1 + 36 * 10);
    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains("\"accepted\": 5400"));

    ok(dir.path(), &["build-chart", "--input", "cohort.csv", "--measure", "stature", "--sex", "m", "--preset", "generic", "--out", "st.csv", "--model", "st.json"]);
    assert!(std::fs::read_to_string(dir.path().join("st.json")).unwrap().contains("triple_logistic"));

    // bundled cohort is all male: a female chart has no data
    let out = run(dir.path(), &["build-chart", "--input", "cohort.csv", "--measure", "weight", "--sex", "f", "--preset", "generic", "--out", "f.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "f", "80", "4", "cohort.csv");
    std::fs::write(dir.path().join("cfg.toml"), "levels = [10.0, 50.0, 90.0]\n[grid]\nstart = 2.0\nend = 20.0\nstep = 1.0\n").unwrap();
    ok(dir.path(), &["build-chart", "--input", "cohort.csv", "--measure", "weight", "--sex", "f", "--preset", "generic", "--out", "c.csv", "--config", "cfg.toml"]);
    let c = chart(dir.path(), "c.csv");
    assert_eq!((c.levels.len(), c.ages.len()), (3, 19));

    std::fs::write(dir.path().join("bad.json"), r#"{"levels": "many"}"#).unwrap();
    let out = run(dir.path(), &["build-chart", "--input", "cohort.csv", "--measure", "weight", "--sex", "f", "--preset", "generic", "--out", "c.csv", "--config", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_input_never_panics() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("junk.csv"), "subject_id,sex,age\n\u{0}\u{1},\"unterminated\n").unwrap();
    let out = run(dir.path(), &["build-chart", "--input", "junk.csv", "--measure", "weight", "--sex", "m", "--preset", "edw", "--out", "c.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
}
