use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bergman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman")).args(args).output().unwrap()
}

fn config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn data_rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn kernel_examples() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"family": "unweighted-halfplane"}"#, "0,1,0,1", 0.0795775),
        (r#"{"family": "lorentz", "dim": 2, "alpha": 0}"#, "0,0,0,1,0,0,0,1", 0.0253303),
        (r#"{"family": "ball", "dim": 1, "alpha": 0}"#, "0,0,0,0", std::f64::consts::FRAC_1_PI),
    ];
    for (i, (json, pair, expected)) in cases.into_iter().enumerate() {
        let c = config(dir.path(), &format!("c{i}.json"), json);
        let out = bergman(&["kernel", "--config", c.to_str().unwrap(), "--pair", pair, "--no-timestamp"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let rows = data_rows(&out);
        let n = rows[0].len();
        let k_re: f64 = rows[0][n - 3].parse().unwrap();
        assert!((k_re - expected).abs() < 1e-7, "{json}: {k_re}");
        assert_eq!(rows[0][n - 1], "", "closed mode leaves err_est empty");
    }
}

#[test]
fn kernel_numeric_mode_and_points_file() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "hp.json", r#"{"family": "halfplane-power", "v": 2.5}"#);
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "z_re,z_im,w_re,w_im\n0,1,0,1\n0.5,2,-1,0.5\n").unwrap();
    let out = bergman(&["kernel", "--config", c.to_str().unwrap(), "--points", pts.to_str().unwrap(), "--mode", "numeric"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("# generated_at="));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 2);
    assert!(!rows[1][6].is_empty());
}

#[test]
fn kernel_domain_error_names_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "u.json", r#"{"family": "unweighted-halfplane"}"#);
    let out = bergman(&["kernel", "--config", c.to_str().unwrap(), "--pair", "0,1,0,1", "--pair", "0,-1,0,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 1"));
}

#[test]
fn symbol_examples() {
    let dir = tempfile::tempdir().unwrap();
    let u = config(dir.path(), "u.json", r#"{"family": "unweighted-halfplane"}"#);
    let t = format!("{}", 1.0 / (4.0 * std::f64::consts::PI));
    let out = bergman(&["symbol", "--config", u.to_str().unwrap(), "--t", &t, "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(&out);
    assert!((rows[0][1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);

    let p = config(dir.path(), "p.json", r#"{"family": "paraboloid", "dim": 2, "alpha": 0}"#);
    let out = bergman(&["symbol", "--config", p.to_str().unwrap(), "--t", "0,1", "--no-timestamp"]);
    let rows = data_rows(&out);
    assert!((rows[0][2].parse::<f64>().unwrap() - 0.0397887).abs() < 1e-7);

    let l = config(dir.path(), "l.json", r#"{"family": "lorentz", "dim": 2, "alpha": 0}"#);
    let out = bergman(&["symbol", "--config", l.to_str().unwrap(), "--t", "2,1", "--no-timestamp"]);
    assert_eq!(data_rows(&out)[0][2], "inf");

    let b = config(dir.path(), "b.json", r#"{"family": "ball", "dim": 2, "alpha": 0}"#);
    let out = bergman(&["symbol", "--config", b.to_str().unwrap(), "--t", "0,1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not tube-eligible; use pullback"));
}

#[test]
fn verify_bergman_selberg_reports_the_constant_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "bs.json", r#"{"family": "bergman-selberg", "q": 1}"#);
    let out_path = dir.path().join("r.json");
    let out = bergman(&[
        "verify", "--config", c.to_str().unwrap(), "--suite", "symmetry+reproduction", "--output", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out_path).unwrap()).unwrap();
    assert!(report["generated_at"].is_string());
    let reports = report["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        let notes = r["notes"].as_array().unwrap();
        assert!(notes.iter().any(|n| n.as_str().unwrap().contains("coincide only at q = 3/2")));
    }
}

#[test]
fn verify_all_default_suites() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("all.json");
    let out = bergman(&["verify", "--all", "--seed", "0", "--no-timestamp", "--output", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out_path).unwrap()).unwrap();
    assert!(report.get("generated_at").is_none());
    let reports = report["reports"].as_array().unwrap();
    let mut per_space = std::collections::BTreeMap::<String, usize>::new();
    for r in reports {
        assert_eq!(r["passed"], true, "{r}");
        *per_space.entry(r["space"].as_str().unwrap().to_string()).or_default() += 1;
    }
    for family in ["unweighted", "halfplane-power", "bergman-selberg", "paraboloid", "lorentz", "siegel", "ball"] {
        let counts: Vec<_> = per_space.iter().filter(|(k, _)| k.starts_with(family)).map(|(_, v)| *v).collect();
        assert!(!counts.is_empty() && counts.iter().all(|&c| c >= 7), "{family}: {counts:?}");
    }
}

#[test]
fn verify_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = config(dir.path(), "bad.json", r#"{"family": "paraboloid", "dim": 2, "alpha": "x"}"#);
    let out = bergman(&["verify", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));

    let truncated = config(dir.path(), "trunc.json", r#"{"family": "paraboloid", "dim": 2"#);
    assert_eq!(bergman(&["verify", "--config", truncated.to_str().unwrap()]).status.code(), Some(64));

    let ok = config(dir.path(), "ok.json", r#"{"family": "ball", "dim": 1, "alpha": 0}"#);
    let out = bergman(&["verify", "--config", ok.to_str().unwrap(), "--suite", "no-such-check"]);
    assert_eq!(out.status.code(), Some(64));
    let out = bergman(&["verify", "--config", ok.to_str().unwrap(), "--suite", "homogeneity"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(bergman(&["verify"]).status.code(), Some(64));
    assert_eq!(bergman(&["kernel", "--config", "/nonexistent.json", "--pair", "0,1,0,1"]).status.code(), Some(64));
}

#[test]
fn verify_failure_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    // a budget too small for the nested reproduction quadrature
    let c = config(dir.path(), "c.json", r#"{"family": "halfplane-power", "v": 0.5, "quadrature": {"max_evals": 1000}}"#);
    let out_path = dir.path().join("r.json");
    let out = bergman(&["verify", "--config", c.to_str().unwrap(), "--suite", "reproduction", "--output", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out_path).unwrap()).unwrap();
    assert_eq!(report["reports"][0]["passed"], false);
    assert_eq!(report["reports"][0]["max_rel_err"], "inf");
}

#[test]
fn transform_matches_direct_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "b.json", r#"{"family": "ball", "dim": 1, "alpha": 0}"#);
    let pair = "0.1,0.2,0.3,-0.1";
    let direct = data_rows(&bergman(&["kernel", "--config", c.to_str().unwrap(), "--pair", pair, "--no-timestamp"]));
    for map in ["cayley-ball-to-siegel", "ball-to-paraboloid"] {
        let out = bergman(&["transform", "--config", c.to_str().unwrap(), "--map", map, "--pair", pair, "--no-timestamp"]);
        assert_eq!(out.status.code(), Some(0));
        let rows = data_rows(&out);
        for col in [4, 5] {
            let (a, b): (f64, f64) = (rows[0][col].parse().unwrap(), direct[0][col].parse().unwrap());
            assert!((a - b).abs() < 1e-12, "{map}: {a} vs {b}");
        }
    }
    let out = bergman(&["transform", "--config", c.to_str().unwrap(), "--mode", "numeric", "--pair", pair, "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(&out);
    let a: f64 = rows[0][4].parse().unwrap();
    let b: f64 = direct[0][4].parse().unwrap();
    assert!((a - b).abs() < 1e-8 * b.abs());
    let out = bergman(&["transform", "--config", c.to_str().unwrap(), "--map", "siegel-to-paraboloid", "--pair", pair]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn csv_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "l.json", r#"{"family": "lorentz", "dim": 3, "alpha": 0.5, "quadrature": {"mc_samples": 100000}}"#);
    let run = || bergman(&["kernel", "--config", c.to_str().unwrap(), "--mode", "numeric", "--pair", "0.1,0,0,0,0,2,0,0.2,0,0,0.1,1.5", "--seed", "3", "--no-timestamp"]).stdout;
    let a = run();
    assert!(!a.is_empty());
    assert_eq!(a, run());
}
