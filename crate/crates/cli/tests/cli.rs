use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn fom_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fom-lab"))
        .args(args)
        .env_remove("FOMLAB_TOL")
        .output()
        .expect("spawn fom-lab")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, value: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_vec(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_ogmg_quadratic_json() {
    let out = fom_lab(&["run", "--method", "ogmg", "-N", "10", "--problem", "quadratic", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let g = v["grad_norm_sq_final"].as_f64().unwrap();
    assert!((1.0 / g - 79.5358).abs() < 1e-4, "{g}");
    assert_eq!(v["per_iter"].as_array().unwrap().len(), 11);
}

#[test]
fn run_gm_on_its_worst_case() {
    let out = fom_lab(&["run", "--method", "gm", "-N", "5", "--problem", "worst:gm-huber", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let g = json(&out)["grad_norm_sq_final"].as_f64().unwrap();
    assert!((g * 11.0 - 1.0).abs() < 1e-12);
}

#[test]
fn run_chain_csv_rows() {
    let out = fom_lab(&["run", "--method", "chain", "-N", "2", "--problem", "quadratic"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "iter,fval,grad_norm_sq");
    assert_eq!(lines.len(), 4);
}

#[test]
fn run_every_method_on_data_problems() {
    for method in ["gm", "fgm", "ogm", "ogm_zform", "ogmg", "ogmg_zform", "chain"] {
        for problem in ["least-squares", "logistic", "huber"] {
            let out = fom_lab(&["run", "--method", method, "-N", "6", "--problem", problem, "--seed", "4"]);
            assert_eq!(out.status.code(), Some(0), "{method} {problem}: {}", String::from_utf8_lossy(&out.stderr));
        }
    }
}

#[test]
fn run_bad_config_exits_1() {
    for args in [
        &["run", "--method", "ogmg", "-N", "0"][..],
        &["run", "--method", "nope", "-N", "3"],
        &["run", "--method", "chain", "-N", "1"],
        &["run", "--method", "gm", "-N", "3", "--problem", "/no/such/file.json"],
        &["run", "--method", "gm", "-N", "3", "--d", "0"],
    ] {
        let out = fom_lab(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn run_numerical_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "huge.json",
        &serde_json::json!({"kind": "quadratic", "L": 1e300, "x0": [1e300, 0.0], "d": 2}),
    );
    let out = fom_lab(&["run", "--method", "gm", "-N", "3", "--problem", &p]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "ls.json",
        &serde_json::json!({
            "kind": "least_squares",
            "data": {"a": [[1.0, 0.0], [0.0, 0.5]], "b": [1.0, 1.0]},
            "x0": [0.0, 0.0], "d": 2, "f_star": 0.0
        }),
    );
    let out = fom_lab(&["run", "--method", "ogmg", "-N", "8", "--problem", &p, "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let (g, b) = (v["grad_norm_sq_final"].as_f64().unwrap(), v["grad_bound"].as_f64().unwrap());
    assert!(g <= b * (1.0 + 1e-8));
}

#[test]
fn certify_ogmg_50() {
    let out = fom_lab(&["certify", "--method", "ogmg", "-N", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["feasible"], true);
    let theta = json(&fom_lab(&["theta", "-N", "50", "--json"]));
    let t0sq = theta["theta0_sq"].as_f64().unwrap();
    assert!((v["bound"].as_f64().unwrap() - 1.0 / t0sq).abs() <= 1e-15);
}

#[test]
fn certify_gm_50() {
    let out = fom_lab(&["certify", "--method", "gm", "-N", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["feasible"], true);
    assert_eq!(v["dominance"], true);
    assert!((v["bound"].as_f64().unwrap() - 1.0 / 101.0).abs() < 1e-15);
}

#[test]
fn certify_files_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let tri = fom_core::stepmatrix::TriangleDoc::from_schedule(
        &fom_core::stepmatrix::step_schedule(fom_core::stepmatrix::StepMethod::Ogmg, 6).unwrap(),
    );
    let cert = fom_core::certificate::dual_certificate(fom_core::certificate::CertMethod::Ogmg, 6).unwrap();
    let t = write(dir.path(), "t.json", &serde_json::to_value(&tri).unwrap());
    let c = write(dir.path(), "c.json", &serde_json::to_value(&cert).unwrap());
    let ok = fom_lab(&["certify", "--triangle", &t, "--cert", &c, "--full"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(json(&ok)["S"].as_array().unwrap().len(), 7);

    let mut bad = serde_json::to_value(&cert).unwrap();
    bad["b"][2] = Value::from(cert.b[2] * 1.5);
    let c_bad = write(dir.path(), "c_bad.json", &bad);
    let out = fom_lab(&["certify", "--triangle", &t, "--cert", &c_bad]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["feasible"], false);

    let short = fom_core::certificate::dual_certificate(fom_core::certificate::CertMethod::Ogmg, 5).unwrap();
    let c_short = write(dir.path(), "c_short.json", &serde_json::to_value(&short).unwrap());
    let out = fom_lab(&["certify", "--triangle", &t, "--cert", &c_short]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn certify_needs_a_source() {
    assert_eq!(fom_lab(&["certify", "-N", "4"]).status.code(), Some(1));
    assert_eq!(fom_lab(&["certify", "--method", "gm"]).status.code(), Some(1));
}

#[test]
fn worst_ogmg_quadratic_json() {
    let out = fom_lab(&["worst", "--method", "ogmg", "--flavor", "quadratic", "-N", "10", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for key in ["expected", "measured", "rel_err", "pass"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["pass"], true);
    assert!(v["rel_err"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn worst_gm_quadratic_is_unsupported() {
    let out = fom_lab(&["worst", "--method", "gm", "--flavor", "quadratic", "-N", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn theta_json_shape() {
    let v = json(&fom_lab(&["theta", "--variant", "ogmg", "-N", "1", "--json"]));
    assert_eq!(v["variant"], "ogmg");
    assert_eq!(v["N"], 1);
    assert_eq!(v["theta"], serde_json::json!([2.0, 1.0]));
    assert_eq!(v["theta0_sq"], 4.0);
    let v = json(&fom_lab(&["theta", "--variant", "ogm", "-N", "3", "--json"]));
    assert_eq!(v["theta"][0], 1.0);
}

#[test]
fn table_default_rows() {
    let out = fom_lab(&["table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "N");
    assert_eq!(&headers[1], "theta0_sq");
    assert_eq!(&headers[2], "gm_reciprocal");
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 8);
    let one_decimal = |s: &str| (s.parse::<f64>().unwrap() * 10.0).round() / 10.0;
    let expect = [4.0, 8.1, 19.5, 79.5, 262.5, 547.8, 934.6, 1422.6];
    for (row, want) in rows.iter().zip(expect) {
        for col in 4..=5 {
            assert!((one_decimal(&row[col]) - want).abs() <= 0.05 + 1e-9, "{row:?}");
        }
    }
    assert_eq!(&rows[0][1], "4");
    assert_eq!(&rows[3][2], "21");
}

#[test]
fn table_custom_list_json() {
    let v = json(&fom_lab(&["table", "--n-list", "3,7", "--json"]));
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[1]["N"], 7);
    assert_eq!(v[1]["gm_reciprocal"], 15.0);
}

#[test]
fn byte_determinism() {
    let args = [
        "sweep",
        "--methods",
        "gm,ogm,ogmg,chain",
        "--n-list",
        "2,5,9,17",
        "--problem",
        "least-squares",
        "--seed",
        "11",
    ];
    let a = fom_lab(&args);
    let b = fom_lab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let lines = stdout(&a).lines().count();
    assert_eq!(lines, 1 + 16);
    let mut json_args = args.to_vec();
    json_args.push("--json");
    assert_eq!(fom_lab(&json_args).stdout, fom_lab(&json_args).stdout);
    let other = fom_lab(&["run", "--method", "ogm", "-N", "5", "--problem", "logistic", "--seed", "12"]);
    let again = fom_lab(&["run", "--method", "ogm", "-N", "5", "--problem", "logistic", "--seed", "12"]);
    assert_eq!(other.stdout, again.stdout);
}

#[test]
fn sweep_rows_are_ordered() {
    let out = fom_lab(&["sweep", "--methods", "ogmg,gm", "--n-list", "8,2", "--problem", "worst:ogmg-huber"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let keys: Vec<String> = text.lines().skip(1).map(|l| l.split(',').take(2).collect::<Vec<_>>().join(",")).collect();
    assert_eq!(keys, ["ogmg,8", "ogmg,2", "gm,8", "gm,2"]);
}

#[test]
fn env_tolerance_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_fom-lab"))
        .args(["certify", "--method", "gm", "-N", "3"])
        .env("FOMLAB_TOL", "psd=banana")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_fom-lab"))
        .args(["worst", "--method", "ogmg", "--flavor", "quadratic", "-N", "30", "--json"])
        .env("FOMLAB_TOL", "exact=0")
        .output()
        .unwrap();
    let v = json(&out);
    let rel = v["rel_err"].as_f64().unwrap();
    assert_eq!(v["pass"], rel == 0.0);
}

#[test]
fn help_and_version() {
    let out = fom_lab(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("certify"));
    assert_eq!(fom_lab(&["--version"]).status.code(), Some(0));
}
