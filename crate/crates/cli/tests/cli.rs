use std::path::Path;
use std::process::{Command, Output};

use imex_mri::catalog;
use imex_mri::tableaux::{induced_ark, scheme_to_json};
use num_complex::Complex64;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imex-mri")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn list_catalog() {
    let o = run(&["list"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["name", "family", "order"]);
    assert!(rows.len() > 10);
    for name in ["lie-trotter", "strang-marchuk", "rk32", "rk4", "heun", "euler", "sdirk2-trap"] {
        assert!(rows.iter().any(|r| r[0] == name), "{name}");
    }
    let j = json(&run(&["--format", "json", "list"]));
    assert_eq!(j.as_array().unwrap().len(), rows.len() - 1);
}

#[test]
fn check_exit_codes() {
    let o = run(&["--format", "json", "check", "imex-mri-gark4"]);
    assert_eq!(code(&o), 0);
    let conditions = json(&o)["report"]["conditions"].as_array().unwrap().clone();
    let order4: Vec<&Value> = conditions
        .iter()
        .filter(|c| c["label"].as_str().unwrap().starts_with("(4"))
        .collect();
    assert_eq!(order4.len(), 14);
    assert!(order4.iter().all(|c| c["residual"].as_f64().unwrap() <= 1e-9));

    assert_eq!(code(&run(&["check", "imex-mri-gark3a", "--order", "4"])), 1);
    assert_eq!(code(&run(&["check", "nosuch"])), 2);
    assert_eq!(code(&run(&["check", "lie-trotter"])), 2);
    assert_eq!(code(&run(&["check", "rk4"])), 0);
    assert_eq!(code(&run(&["check", "euler", "--order", "2"])), 1);
    assert_eq!(code(&run(&["--tolerance", "-1", "check", "rk4"])), 2);
    assert_eq!(code(&run(&["nosuch-command"])), 2);
}

#[test]
fn check_reads_scheme_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scheme.json");
    let s = catalog::get_method("imex-mri-gark3b").unwrap().scheme().unwrap().clone();
    std::fs::write(&path, scheme_to_json(&s).unwrap()).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(code(&run(&["check", p])), 0);
    assert_eq!(code(&run(&["check", p, "--order", "4"])), 1);
    std::fs::write(&path, "{\"name\": \"broken\"}").unwrap();
    assert_eq!(code(&run(&["check", p])), 2);
}

fn rate(o: &Output) -> f64 {
    assert_eq!(code(o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    json(o)["rate"].as_f64().unwrap_or(f64::NAN)
}

#[test]
fn converge_kpr_rates() {
    let r = rate(&run(&["--format", "json", "converge", "--method", "imex-mri-gark3a", "--problem", "kpr"]));
    assert!((2.75..=3.25).contains(&r), "{r}");
    let r = rate(&run(&[
        "--format", "json", "converge", "--method", "lie-trotter", "--problem", "kpr", "--k-min", "3", "--k-max", "13",
    ]));
    assert!((0.85..=1.15).contains(&r), "{r}");
}

#[test]
fn converge_single_step_has_undefined_rate() {
    let o = run(&["--format", "json", "converge", "--method", "imex-mri-gark3a", "--problem", "kpr", "--steps", "0.1"]);
    assert_eq!(code(&o), 0);
    let j = json(&o);
    assert!(j["rate"].is_null());
    assert!(j["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().contains("rate undefined")));
    let o = run(&["converge", "--method", "imex-mri-gark3a", "--problem", "kpr", "--steps", "0.1,0.2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn study_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let study = dir.path().join("study.json");
    std::fs::write(
        &study,
        r#"{"method": "imex-mri-gark3b", "problem": "kpr", "ladder": {"base": 3.141592653589793, "k_min": 3, "k_max": 5},
            "inner": {"table": "rk32", "substeps": 10}}"#,
    )
    .unwrap();
    let s = study.to_str().unwrap();
    let rows = csv_rows(&stdout(&run(&["converge", "--study", s])));
    assert_eq!(rows.len(), 4);
    let rows = csv_rows(&stdout(&run(&["converge", "--study", s, "--k-max", "6"])));
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0], ["H", "max_error", "status"]);
    assert_eq!(code(&run(&["converge", "--study", "/nonexistent/study.json"])), 2);
    assert_eq!(code(&run(&["converge", "--problem", "kpr"])), 2);
}

#[test]
fn outputs_are_deterministic() {
    let args = ["--threads", "2", "converge", "--method", "imex-mri-gark4", "--problem", "kpr", "--k-max", "6"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_numbers_round_trip() {
    let o = run(&["integrate", "--method", "imex-mri-gark3a", "--problem", "kpr", "--step", "0.1"]);
    let rows = csv_rows(&stdout(&o));
    for row in &rows[1..] {
        for field in row {
            let v: f64 = field.parse().unwrap();
            assert_eq!(imex_mri::format::number(v), *field);
        }
    }
}

fn stability_run(dir: &Path, args: &[&str]) -> (Vec<Vec<String>>, Value) {
    let out = dir.join("raster.csv");
    let mut full = vec!["--out", out.to_str().unwrap(), "stability"];
    full.extend_from_slice(args);
    let o = run(&full);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let raster = csv_rows(&std::fs::read_to_string(&out).unwrap());
    let meta = serde_json::from_str(&std::fs::read_to_string(dir.join("raster.json")).unwrap()).unwrap();
    (raster, meta)
}

#[test]
fn stability_rasters() {
    let dir = tempfile::tempdir().unwrap();
    let grid = ["--n-re", "25", "--n-im", "33"];
    let mut args = vec!["imex-mri-gark3b", "--alpha", "10", "--beta", "45"];
    args.extend_from_slice(&grid);
    let (raster, meta) = stability_run(dir.path(), &args);
    assert_eq!(raster[0], ["re_zE", "im_zE", "member", "max_abs_R"]);
    assert_eq!(raster.len(), 1 + 25 * 33);
    assert!(meta["member_count"].as_u64().unwrap() > 0);
    assert!(meta["generated_unix_time"].is_u64());
    assert_eq!(meta["beta"].as_f64(), Some(45.0));

    let mut args = vec!["imex-mri-gark4", "--alpha", "10", "--beta", "10"];
    args.extend_from_slice(&grid);
    let (_, meta) = stability_run(dir.path(), &args);
    assert!(meta["member_fraction"].as_f64().unwrap() < 0.02);
}

#[test]
fn stability_at_origin_is_explicit_region() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["imex-mri-gark3a", "--alpha", "0", "--beta", "0", "--radii", "0", "--n-re", "31", "--n-im", "41"];
    let (raster, _) = stability_run(dir.path(), &args);
    let s = catalog::get_method("imex-mri-gark3a").unwrap().scheme().unwrap().clone();
    let ark = induced_ark(&s);
    for row in &raster[1..] {
        let z = Complex64::new(row[0].parse().unwrap(), row[1].parse().unwrap());
        let want = ark.explicit().stability_value(z).norm() <= 1.0 + 1e-10;
        assert_eq!(row[2] == "1", want, "{z}");
    }
}

#[test]
fn stability_rejects_bad_input() {
    assert_eq!(code(&run(&["stability", "rk4"])), 2);
    assert_eq!(code(&run(&["stability", "imex-mri-gark3a", "--alpha", "120"])), 2);
    assert_eq!(code(&run(&["stability", "imex-mri-gark3a", "--n-re", "0"])), 2);
}

#[test]
fn integrate_runs() {
    let o = run(&["integrate", "--method", "imex-mri-gark3a", "--problem", "kpr", "--step", "0.05"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["t", "y1", "y2", "exact1", "exact2", "error1", "error2"]);
    assert_eq!(rows.len(), 22);

    let o = run(&[
        "--format", "json", "integrate", "--method", "imex-mri-gark3a", "--problem", "kpr", "--step", "10", "--final-time", "0.5",
        "--output-times", "0.5",
    ]);
    let j = json(&o);
    assert_eq!(j["diagnostics"]["steps"].as_u64(), Some(1));
    assert_eq!(j["times"].as_array().unwrap().len(), 2);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let o = run(&[
        "--out", out.to_str().unwrap(), "integrate", "--method", "imex-mri-gark3b", "--problem", "brusselator", "--step", "0.025",
    ]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0].len(), 1 + 603);
    assert_eq!(rows.last().unwrap()[0], "3");

    assert_eq!(code(&run(&["integrate", "--method", "imex-mri-gark3a", "--problem", "kpr"])), 2);
}

#[test]
fn integrate_failure_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let study = dir.path().join("s.json");
    std::fs::write(
        &study,
        r#"{"method": "imex-mri-gark3a", "problem": "kpr", "step": 0.1, "newton": {"max_iterations": 0}}"#,
    )
    .unwrap();
    let o = run(&["integrate", "--study", study.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 2);
}
