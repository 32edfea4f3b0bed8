use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ssqw_core::dynamics::InitialState;
use ssqw_core::{io, QuadratureSpec, ReferenceSet, WindowSpec};

fn ssqw(args: &[&str]) -> Output {
    ssqw_env(args, &[])
}

fn ssqw_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ssqw"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_regime() {
    let o = ssqw(&["validate", "--params", "pset_c"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["notes"][0], "no zeros expected: |phi22| >= |omega22|");
}

#[test]
fn spectrum_finds_both_zeros() {
    let o = ssqw(&["spectrum", "--params", "pset_a", "--grid", "2001"]);
    assert_eq!(o.status.code(), Some(0));
    let zeros: Vec<f64> = json(&o)["zeros"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| z.as_f64().unwrap())
        .collect();
    assert_eq!(zeros.len(), 2);
    assert!((zeros[0] + 0.525114).abs() < 1e-6 && (zeros[1] - 0.525114).abs() < 1e-6);
}

#[test]
fn spectrum_samples_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = ssqw(&["spectrum", "--params", "pset_b", "--samples", "10", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("f_samples.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "lambda,f_closed,f_quad1d");
    assert_eq!(lines.len(), 11);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = dir.path().join("bad.toml");
    fs::write(&malformed, "p = [0.0\n").unwrap();
    let o = ssqw(&["validate", "--params", path(&malformed)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: E_PARSE:"));
    assert_eq!(stderr(&o).lines().count(), 1);

    let unnormalized = dir.path().join("unnormalized.toml");
    let text = io::params_to_toml(&ReferenceSet::PsetA.params()).replace("0.6", "0.7");
    fs::write(&unnormalized, text).unwrap();
    let o = ssqw(&["validate", "--params", path(&unnormalized)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: E_PARAMS:"));

    let o = ssqw(&["resonance", "--params", "pset_a"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: E_THRESHOLD:"));

    let o = ssqw(&["evolve", "--params", "pset_a", "--steps", "10", "--half-width", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: E_LIGHT_CONE:"));

    let o = ssqw(&["eigvec", "--params", "pset_c"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: E_PRECONDITION:"));

    assert_eq!(ssqw(&["evolve", "--params", "pset_a", "--steps", "0"]).status.code(), Some(2));
    assert_eq!(ssqw(&["evolve", "--params", "pset_a", "--steps", "3", "--init", "point:0,0,5"]).status.code(), Some(2));
    assert_eq!(ssqw(&["spectrum", "--params", "pset_a", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(ssqw(&["verify", "--suite", "11"]).status.code(), Some(2));
    assert_eq!(ssqw(&["validate", "--params", "no_such_set"]).status.code(), Some(2));
    let o = ssqw_env(&["validate", "--params", "pset_a"], &[("SSQW_THREADS", "many")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let runs: Vec<_> = ["1", "0", "3"]
        .iter()
        .map(|threads| {
            let dir = tempfile::tempdir().unwrap();
            let out = path(dir.path()).to_string();
            let env = [("SSQW_THREADS", *threads)];
            let a = ssqw_env(&["eigvec", "--params", "pset_a", "--half-width", "40", "--out", &out], &env);
            let b = ssqw_env(
                &["evolve", "--params", "pset_c", "--steps", "40", "--probe", "0,0", "--region", "0,1:8", "--out", &out],
                &env,
            );
            let c = ssqw_env(&["spectrum", "--params", "pset_a", "--samples", "20", "--out", &out, "--format", "json"], &env);
            for o in [&a, &b, &c] {
                assert_eq!(o.status.code(), Some(0), "{}", stderr(o));
            }
            let files: Vec<Vec<u8>> = ["eigvec.csv", "series.csv", "f_samples.json"]
                .iter()
                .map(|f| fs::read(dir.path().join(f)).unwrap())
                .collect();
            (stdout(&a), stdout(&b), stdout(&c), files)
        })
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn eigvec_file_reloads_exactly_and_evolves() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    let o = ssqw(&["eigvec", "--params", "pset_a", "--half-width", "64", "--normalize", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(json(&o)["residual"].as_f64().unwrap() < 1e-8);

    let file = dir.path().join("eigvec.csv");
    let loaded = io::state_from_csv(&fs::read_to_string(&file).unwrap()).unwrap();
    let a = ReferenceSet::PsetA.strong_shift();
    let built = InitialState::Eigenvector { zero: 0, conjugate: false }
        .build(&a, WindowSpec::new(64, 1).unwrap(), &QuadratureSpec::default())
        .unwrap();
    assert_eq!(loaded.values(), built.values());

    let init = format!("file:{}", file.display());
    let o = ssqw(&[
        "evolve", "--params", "pset_a", "--steps", "12", "--init", &init, "--region", "0,1:64", "--edge-mass-tol", "1e-12",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let avg = json(&o)["second_half_average"][0].as_f64().unwrap();
    assert!((avg - 1.0).abs() < 1e-10);
}

#[test]
fn time_series_layout_and_json_mirror() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    let args = ["evolve", "--params", "pset_a", "--steps", "6", "--probe", "0,0", "--probe", "1,0", "--region", "0,1:2", "--out", out];
    assert_eq!(ssqw(&args).status.code(), Some(0));
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    assert_eq!(ssqw(&json_args).status.code(), Some(0));

    let csv = fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,P[0;0],P[1;0],R[0 1;2]");
    assert_eq!(lines.len(), 8);

    let rows: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("series.json")).unwrap()).unwrap();
    for (line, row) in lines[1..].iter().zip(rows.as_array().unwrap()) {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields[1], row["P[0;0]"].as_f64().unwrap());
        assert_eq!(fields[3], row["R[0 1;2]"].as_f64().unwrap());
    }
}

#[test]
fn resonance_writes_slices_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    let o = ssqw(&["resonance", "--params", "pset_b", "--windows", "16,32", "--deltas", "1e-2,1e-3", "--half-width", "8", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = json(&o);
    assert_eq!(report["entries"].as_array().unwrap().len(), 4);
    for stem in ["gef_plus", "gef_plus_conj", "gef_minus", "gef_minus_conj"] {
        let state = io::state_from_csv(&fs::read_to_string(dir.path().join(format!("{stem}.csv"))).unwrap()).unwrap();
        assert_eq!(state.window().half_width(), 8);
    }
    let eps = fs::read_to_string(dir.path().join("epsilon_minus.csv")).unwrap();
    assert!(eps.starts_with("delta,lambda,epsilon,gap\n"));
}

#[test]
fn verify_subset_passes() {
    let o = ssqw(&["verify", "--suite", "1,3,9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|l| l.starts_with("PASS")));
}
