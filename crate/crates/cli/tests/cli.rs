use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use statpriv::analysis::gamma;
use statpriv::model::fit_params;
use statpriv::optimizer::BinTable;
use statpriv::{Dataset, Family, Prior, SecretSpec};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_statpriv"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn statpriv")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn values(path: &Path) -> Vec<f64> {
    std::fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.parse().unwrap()).collect()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn release_mean_to_bin_midpoint() {
    let dir = tempfile::tempdir().unwrap();
    let input = p(dir.path(), "in.csv");
    std::fs::write(&input, "value\r\n0.1\r\n0.25\r\n0.4\r\n").unwrap();
    let out = p(dir.path(), "out.csv");
    let o = run(&["release", "--input", s(&input), "--out", s(&out), "--family", "gaussian", "--box", "0:1,0.01:1", "--bin-count", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = values(&out);
    let mean = v.iter().sum::<f64>() / 3.0;
    assert!((mean - 0.3).abs() < 1e-12);

    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let pi = summary["surrogate_privacy"].as_f64().unwrap();
    let d = summary["surrogate_distortion"].as_f64().unwrap();
    assert!((d + pi).abs() < 1e-12);
    assert!((summary["released"]["mu"].as_f64().unwrap() - 0.3).abs() < 1e-12);

    let again = p(dir.path(), "again.csv");
    let o = run(&["release", "--input", s(&out), "--out", s(&again), "--family", "gaussian", "--box", "0:1,0.01:1", "--bin-count", "5", "--quiet"]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn release_from_config_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let input = p(dir.path(), "in.csv");
    std::fs::write(&input, "1.0\n2.0\n3.5\n0.5\n").unwrap();
    let cfg = p(dir.path(), "cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"input": "{}", "out": "{}", "family": "exponential", "secret": "quantile:0.95",
                "prior": {{"kind": "uniform_box", "bounds": [{{"lo": 1, "hi": 3}}]}}, "bin_count": 10}}"#,
            s(&input),
            s(&p(dir.path(), "ignored.csv"))
        ),
    )
    .unwrap();
    let out = p(dir.path(), "out.csv");
    let o = run(&["release", "--config", s(&cfg), "--out", s(&out), "--quiet"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!p(dir.path(), "ignored.csv").exists());
    let fitted = fit_params(&Dataset::new(values(&out)).unwrap(), Family::Exponential).unwrap();
    // Mean 1.75 falls in the bin [1.6, 1.8).
    assert!((fitted.coords()[0] - 1.7).abs() < 1e-9);
}

#[test]
fn release_errors_have_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = p(dir.path(), "in.csv");
    std::fs::write(&input, "5.0\n6.0\n7.0\n").unwrap();
    let out = p(dir.path(), "out.csv");
    // Fitted mean outside the prior box.
    let o = run(&["release", "--input", s(&input), "--out", s(&out), "--family", "gaussian", "--box", "0:1,0.01:2", "--bin-count", "5"]);
    assert_eq!(o.status.code(), Some(3));
    // Missing bin count.
    let o = run(&["release", "--input", s(&input), "--out", s(&out), "--family", "gaussian", "--box", "0:10,0.01:2"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&input, "1\nfoo\n").unwrap();
    let o = run(&["release", "--input", s(&input), "--out", s(&out), "--family", "gaussian", "--box", "0:10,0.01:2", "--bin-count", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not a number"));
    let o = run(&["release", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_identity_like_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = p(dir.path(), "sweep.json");
    std::fs::write(&cfg, r#"{"synth": "gaussian:0:1", "n": 500, "mechanisms": [{"kind": "ap_gaussian", "betas": [0]}]}"#).unwrap();
    let o = run(&["sweep", "--config", s(&cfg)]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][3], "0");
    assert_eq!(rows[0][2], "0");
    assert_eq!(rows[0][4], "");
}

#[test]
fn sweep_rows_respect_the_frontier() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = p(dir.path(), "sweep.json");
    std::fs::write(
        &cfg,
        r#"{"synth": "gaussian:0.3:1", "n": 100000, "family": "gaussian", "secret": "mean",
            "prior": {"kind": "uniform_box", "bounds": [{"lo": 0, "hi": 1}, {"lo": 0.5, "hi": 2}]},
            "mechanisms": [
              {"kind": "quantization", "bin_counts": [1, 2, 5, 10]},
              {"kind": "ap_gaussian", "betas": [0.1, 1, 5]},
              {"kind": "distp_laplace", "betas": [0.1, 1]},
              {"kind": "dp_histogram", "pairs": [[30, 10]]}
            ]}"#,
    )
    .unwrap();
    let svg = p(dir.path(), "plot.svg");
    let o = run(&["sweep", "--config", s(&cfg), "--svg", s(&svg), "--timing"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 10);
    let mechs: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    let mut sorted = mechs.clone();
    sorted.sort();
    assert_eq!(mechs, sorted);
    for r in &rows {
        let (pi, d): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!(d >= -pi - 1e-9, "{r:?}");
        assert!(!r[4].is_empty());
        if r[0] == "quantization" {
            assert!((d + pi).abs() < 1e-9, "{r:?}");
        }
        if r[0] == "ap_gaussian" {
            assert!(pi.abs() < 0.05, "{r:?}");
        }
    }
    let bins: Vec<&str> = rows.iter().filter(|r| r[0] == "quantization").map(|r| r[1].as_str()).collect();
    assert_eq!(bins, ["bin_count=1", "bin_count=2", "bin_count=5", "bin_count=10"]);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("frontier") && text.contains("<circle"));
}

#[test]
fn sweep_error_rows_do_not_abort() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "rows.csv");
    let o = run(&[
        "sweep", "--synth", "exponential:2", "--n", "1000", "--family", "exponential", "--secret", "quantile:0.9",
        "--box", "1:1.5", "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert!(rows.iter().any(|r| !r[5].is_empty() && r[2].is_empty()));
    assert!(rows.iter().any(|r| r[5].is_empty() && !r[2].is_empty()));
    let o = run(&["sweep"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for (i, t) in ["1", "4"].iter().enumerate() {
        let out = p(dir.path(), &format!("o{i}.csv"));
        let o = run(&["sweep", "--synth", "lognormal:2:1", "--n", "3000", "--seed", "5", "--threads", t, "--out", s(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    let o = bin().env("STATPRIV_THREADS", "many").args(["synth", "--generator", "poisson:2"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bound_tables() {
    let o = run(&["bound", "--family", "uniform", "--secret", "std", "--epsilon", "0.1", "--privacy-budgets", "0.4,0.999999999", "--distortion-budgets", "0.35"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r[2], "0.433012701892");
        assert_eq!(r[3], "closed_form");
    }
    assert_eq!(rows[1][4], "0");

    let o = run(&["bound", "--family", "geometric", "--box", "0.2:0.8", "--privacy-budgets", "0.5", "--distortion-budgets", "0.1"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let lib = gamma(Family::Geometric, &SecretSpec::Mean, &Prior::uniform_box(&[(0.2, 0.8)]).unwrap(), 64).unwrap();
    assert_eq!(rows[0][2], statpriv_num(lib.gamma));
    assert_eq!(rows[0][3], "numeric_inf");

    let o = run(&["bound", "--family", "geometric", "--secret", "std"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["bound", "--family", "categorical:3", "--secret", "std"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["bound", "--family", "gaussian", "--privacy-budgets", "1.5"]);
    assert_eq!(o.status.code(), Some(3));
}

/// The CLI's 12-significant-digit float form.
fn statpriv_num(v: f64) -> String {
    let r: f64 = format!("{v:.11e}").parse().unwrap();
    r.to_string()
}

fn problem_file(dir: &Path) -> PathBuf {
    let path = p(dir, "problem.json");
    std::fs::write(
        &path,
        r#"{"problem": {"family": {"family": "geometric"}, "secret": {"kind": "mean"}, "epsilon": 0.5,
            "theta_lo": 0.1, "theta_hi": 0.9, "grid_count": 80}}"#,
    )
    .unwrap();
    path
}

#[test]
fn optimize_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = problem_file(dir.path());
    let table = |mode: &str, extra: &[&str]| -> BinTable {
        let mut args = vec!["optimize", "--config", s(&cfg), "--mode", mode];
        args.extend_from_slice(extra);
        let o = run(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_str(&stdout(&o)).unwrap()
    };
    let dp = table("dp", &["--budget", "1.0"]);
    let greedy = table("greedy", &["--budget", "1.0"]);
    assert!(dp.privacy <= greedy.privacy);
    let text = serde_json::to_string(&dp).unwrap();
    assert_eq!(serde_json::from_str::<BinTable>(&text).unwrap(), dp);

    let one = table("dp", &["--budget", "1000"]);
    assert_eq!(one.bins.len(), 1);
    let bs = table("binary", &["--privacy-target", "0.6", "--eta", "0.001"]);
    assert!(bs.privacy <= 0.6);

    let o = run(&["optimize", "--config", s(&cfg), "--budget", "0"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no answer"));
    let o = run(&["optimize", "--config", s(&cfg), "--family", "gaussian", "--budget", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["optimize", "--family", "poisson", "--theta-lo", "1", "--theta-hi", "3", "--grid-count", "20", "--budget", "0.5"]);
    assert!(o.status.success());
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (p(dir.path(), "a.csv"), p(dir.path(), "b.csv"));
    for out in [&a, &b] {
        let o = run(&["synth", "--generator", "pareto:1:1.5", "--n", "1000", "--seed", "1", "--out", s(out)]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let o = run(&["synth", "--generator", "exponential:2", "--n", "100000", "--seed", "1", "--out", s(&a)]);
    assert!(o.status.success());
    let fitted = fit_params(&Dataset::new(values(&a)).unwrap(), Family::Exponential).unwrap();
    assert!((fitted.coords()[0] / 2.0 - 1.0).abs() < 0.05);

    let o = run(&["synth", "--generator", "", "--out", s(&a)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["synth", "--generator", "zipf:2", "--out", s(&a)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["synth", "--generator", "exponential:-1", "--out", s(&a)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn categorical_release() {
    let dir = tempfile::tempdir().unwrap();
    let input = p(dir.path(), "in.csv");
    let mut text = String::from("category\n");
    for (k, n) in [(0, 25), (1, 35), (2, 40)] {
        for _ in 0..n {
            text.push_str(&format!("{k}\n"));
        }
    }
    std::fs::write(&input, text).unwrap();
    let out = p(dir.path(), "out.csv");
    let o = run(&["release", "--input", s(&input), "--out", s(&out), "--family", "categorical:3", "--secret", "fraction:0", "--bin-count", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = values(&out);
    assert_eq!(v.iter().filter(|&&x| x == 0.0).count(), 30);
}
