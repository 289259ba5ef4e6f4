use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nonloc::grid::extrema;
use nonloc::io::{read_snapshot, read_trace};

fn nonloc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonloc"))
        .args(args)
        .current_dir(dir)
        .env_remove("NONLOC_OUT")
        .output()
        .expect("binary runs")
}

fn text(out: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
}

const LINEAR: &str = r#"{
    "name": "linear",
    "grid": {"extent": [1.0], "h": 0.03125},
    "kernel": {"shape": "const_ball", "dimension": 1},
    "conductivity": {"family": "linear"},
    "initial": {"profile": "constant", "value": 1.0},
    "psi": {"profile": "constant", "value": 0.0},
    "t_final": 0.1,
    "output_times": [0.02, 0.04, 0.06, 0.08],
    "snapshots": [0.04]
}"#;

const PME_SIGN: &str = r#"{
    "name": "pme_sign",
    "grid": {"extent": [1.0], "h": 0.03125},
    "kernel": {"shape": "const_ball"},
    "conductivity": {"family": "porous_medium", "m": 2},
    "trivial": {"kind": "pme_sign", "u": 1.0, "pattern": {"kind": "sgn_sin_inv"}},
    "t_final": 0.5,
    "output_times": [0.1, 0.2, 0.3, 0.4]
}"#;

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn solve_writes_trace_snapshot_and_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", LINEAR);
    let out = tmp.path().join("out");
    let res = nonloc(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(res.status.code(), Some(0), "{}", text(&res));

    let trace = read_trace(fs::File::open(out.join("trace.csv")).unwrap()).unwrap();
    assert_eq!(trace.len(), 6);
    assert!(trace.windows(2).all(|w| w[1].u_inf < w[0].u_inf));

    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    let snaps = meta["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 1);
    assert_eq!(snaps[0]["t"], 0.04);
    let file = out.join(snaps[0]["file"].as_str().unwrap());
    let field = read_snapshot(fs::File::open(file).unwrap()).unwrap();
    let row = trace.iter().find(|r| r.t == 0.04).unwrap();
    assert_eq!(&extrema(&field, 0.04), row);
    assert!(out.join("timings.json").exists());
}

#[test]
fn solve_is_bit_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let body = LINEAR
        .replace(r#""family": "linear""#, r#""family": "porous_medium", "m": 2"#)
        .replace(r#""profile": "constant", "value": 1.0"#, r#""profile": "random", "range": [-1, 1]"#);
    let cfg = write_config(tmp.path(), "c.json", &body);
    for d in ["a", "b"] {
        let res = nonloc(&["solve", "--config", &cfg, "--out", d, "--seed", "11", "--threads", "2"], tmp.path());
        assert_eq!(res.status.code(), Some(0), "{}", text(&res));
    }
    for f in ["trace.csv", "metadata.json", "snapshot_0002.csv"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(f)).unwrap(),
            fs::read(tmp.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    let res = nonloc(&["solve", "--config", &cfg, "--out", "c", "--seed", "12"], tmp.path());
    assert_eq!(res.status.code(), Some(0));
    assert_ne!(
        fs::read(tmp.path().join("a/trace.csv")).unwrap(),
        fs::read(tmp.path().join("c/trace.csv")).unwrap()
    );
}

#[test]
fn bad_spacing_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &LINEAR.replace("0.03125", "0.3"));
    let res = nonloc(&["solve", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(res.status.code(), Some(2));
    assert!(text(&res).contains("BadSpacing"), "{}", text(&res));
}

#[test]
fn p_laplacian_two_and_a_half_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let body = LINEAR.replace(r#""family": "linear""#, r#""family": "p_laplacian", "p": 2.5"#);
    let cfg = write_config(tmp.path(), "c.json", &body);
    let res = nonloc(&["solve", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(res.status.code(), Some(2));
    assert!(text(&res).contains("NotLipschitzForEvolution"), "{}", text(&res));
}

#[test]
fn malformed_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", "{\"grid\": 3}");
    let res = nonloc(&["solve", "--config", &cfg], tmp.path());
    assert_eq!(res.status.code(), Some(2));
    let res = nonloc(&["solve", "--config", "missing.json"], tmp.path());
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn ratio_violation_exits_3_and_names_the_window() {
    let tmp = tempfile::tempdir().unwrap();
    // a window cap far above the contraction window with few iterations
    // allowed makes the iteration diverge from the start
    let body = LINEAR.replace(
        r#""snapshots": [0.04]"#,
        r#""snapshots": [0.04], "solver": {"window_cap": 0.1, "ratio_tolerance": 0.0, "substeps": 2, "max_iter": 2}"#,
    );
    let cfg = write_config(tmp.path(), "c.json", &body);
    let res = nonloc(&["solve", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(res.status.code(), Some(3), "{}", text(&res));
    assert!(text(&res).contains("window 0"), "{}", text(&res));
}

#[test]
fn verify_trivial_suite_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", PME_SIGN);
    let res = nonloc(&["verify", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(res.status.code(), Some(0), "{}", text(&res));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("o/report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    let checks = report["runs"][0]["checks"].as_array().unwrap();
    let stat = checks.iter().find(|c| c["name"] == "stationarity").unwrap();
    assert_eq!(stat["max_violation"], 0.0);
    let smp = checks.iter().find(|c| c["name"] == "smp").unwrap();
    assert_eq!(smp["vacuous"], false);
    assert!(checks.iter().all(|c| c.get("runtime").is_none()));
}

#[test]
fn verify_with_corrupted_collar_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let body = LINEAR.replace(r#""snapshots": [0.04]"#, r#""verify": {"mutate_collar": true}"#);
    let cfg = write_config(tmp.path(), "c.json", &body);
    let res = nonloc(&["verify", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(res.status.code(), Some(4), "{}", text(&res));
    assert!(text(&res).contains("dirichlet_invariance"), "{}", text(&res));
}

#[test]
fn verify_reports_are_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", LINEAR);
    for d in ["a", "b"] {
        let res = nonloc(&["verify", "--config", &cfg, "--out", d], tmp.path());
        assert_eq!(res.status.code(), Some(0), "{}", text(&res));
    }
    assert_eq!(
        fs::read(tmp.path().join("a/report.json")).unwrap(),
        fs::read(tmp.path().join("b/report.json")).unwrap()
    );
}

#[test]
fn trivial_command_prints_residuals() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", PME_SIGN);
    let res = nonloc(&["trivial", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(res.status.code(), Some(0), "{}", text(&res));
    assert!(String::from_utf8_lossy(&res.stdout).contains("residual 0e0"), "{}", text(&res));
    assert!(tmp.path().join("o/trivial.csv").exists());

    let body = PME_SIGN
        .replace(r#""family": "porous_medium", "m": 2"#, r#""family": "sin_squared""#)
        .replace(r#""kind": "pme_sign", "u": 1.0"#, r#""kind": "integer_field", "levels": 3"#)
        .replace(r#""kind": "sgn_sin_inv""#, r#""kind": "seeded_random", "seed": 2"#);
    let cfg = write_config(tmp.path(), "i.json", &body);
    let res = nonloc(&["trivial", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(res.status.code(), Some(0), "{}", text(&res));
    assert!(String::from_utf8_lossy(&res.stdout).contains("residual 0e0"));

    let body = PME_SIGN
        .replace(r#""family": "porous_medium", "m": 2"#, r#""family": "product_shift", "a": 1, "m": 1"#)
        .replace(r#""kind": "pme_sign", "u": 1.0"#, r#""kind": "involution", "u": 0.0, "a": 1.0"#);
    let cfg = write_config(tmp.path(), "v.json", &body);
    let res = nonloc(&["trivial", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(res.status.code(), Some(2), "{}", text(&res));
    assert!(text(&res).contains("InvalidSpec"));
}

fn numbers(s: &str) -> Vec<f64> {
    s.split_whitespace().filter_map(|w| w.parse().ok()).collect()
}

#[test]
fn weak_residual_command() {
    let tmp = tempfile::tempdir().unwrap();
    let res = nonloc(&["weak-residual", "--U", "1", "--m", "2", "--quad-n", "1024"], tmp.path());
    assert_eq!(res.status.code(), Some(0), "{}", text(&res));
    let stdout = String::from_utf8_lossy(&res.stdout).to_string();
    let nums = numbers(&stdout);
    let target = -2.0 * (-1.0f64).exp();
    assert!((nums[0] - target).abs() < 0.01 * target.abs(), "{stdout}");
    assert_eq!(nums[1], target);

    let res = nonloc(&["weak-residual", "--U", "0"], tmp.path());
    assert_eq!(res.status.code(), Some(0));
    assert_eq!(numbers(&String::from_utf8_lossy(&res.stdout))[..2], [0.0, 0.0]);

    let res = nonloc(&["weak-residual", "--U", "1", "--quad-n", "4"], tmp.path());
    assert_eq!(res.status.code(), Some(5), "{}", text(&res));
    assert!(text(&res).contains("QuadratureUnderResolved"));
}

#[test]
fn output_dir_falls_back_to_env() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", LINEAR);
    let res = Command::new(env!("CARGO_BIN_EXE_nonloc"))
        .args(["solve", "--config", &cfg])
        .current_dir(tmp.path())
        .env("NONLOC_OUT", tmp.path().join("from_env"))
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(0), "{}", text(&res));
    assert!(tmp.path().join("from_env/trace.csv").exists());
}

#[test]
fn shipped_example_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = nonloc::RunConfig::load(&path).unwrap();
        cfg.validate(true).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 3);
}
