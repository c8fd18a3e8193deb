use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn kext(args: &[&str]) -> Output {
    kext_env(args, &[])
}

fn kext_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kext"));
    cmd.args(args).env_remove("KEXT_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn threshold_json(args: &[&str]) -> Value {
    let mut all = vec!["threshold", "--json"];
    all.extend_from_slice(args);
    let o = kext(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(stdout(&o).trim()).unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Rows of a sweep CSV as `(param, alpha_star)`, after checking the header.
fn csv_rows(text: &str) -> Vec<(f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# kext-csv v1"));
    assert_eq!(lines.next(), Some("param,alpha_star,backend,lambda_residual"));
    lines
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 4, "{l}");
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect()
}

fn read_rows(path: &Path) -> Vec<(f64, f64)> {
    csv_rows(&std::fs::read_to_string(path).unwrap())
}

fn alpha_max_k1(g: f64) -> f64 {
    // larger root of (16 − 4γ²)α² − (16 − 4γ²)α + 3 − 3γ² = 0
    let a = 16.0 - 4.0 * g * g;
    let c = 3.0 - 3.0 * g * g;
    (a + (a * a - 4.0 * a * c).sqrt()) / (2.0 * a)
}

#[test]
fn threshold_examples() {
    let r = threshold_json(&[
        "--family", "werner", "--d", "3", "--gamma", "-1", "--n", "1", "--k", "1",
    ]);
    assert!(r["alpha_star"].as_f64().unwrap() >= 0.999999);
    let r = threshold_json(&["--family", "werner", "--d", "2", "--gamma", "0", "--n", "1", "--k", "2"]);
    assert!((r["alpha_star"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-6);
    assert_eq!(r["backend"], "dense");
    assert_eq!(r["full_rank"], true);
    let file = fixture("maxmixed_2x3.state");
    let r = threshold_json(&["--file", file.to_str().unwrap(), "--n", "1", "--k", "1"]);
    assert!(r["alpha_star"].as_f64().unwrap() >= 0.99);
    assert_eq!(r["full_rank"], false);
    // bundled fixtures resolve by bare name
    let r = threshold_json(&["--file", "maxmixed_2x3.state"]);
    assert!(r["alpha_star"].as_f64().unwrap() >= 0.99);
}

#[test]
fn threshold_text_output() {
    let o = kext(&["threshold", "--d", "2", "--p", "0.5", "--k", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for key in ["alpha_star", "backend", "full_rank", "wall_time_s"] {
        assert!(text.lines().any(|l| l.starts_with(key)), "{text}");
    }
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| kext(args).status.code().unwrap();
    assert_eq!(code(&["threshold", "--d", "2", "--gamma", "3"]), 2);
    assert_eq!(code(&["threshold", "--gamma", "0.5"]), 2);
    assert_eq!(code(&["threshold", "--d", "2"]), 2);
    assert_eq!(
        code(&["threshold", "--d", "2", "--gamma", "0", "--backend", "magic"]),
        2
    );
    assert_eq!(code(&["threshold", "--d", "2", "--gamma", "0", "--tol", "1e-13"]), 2);
    assert_eq!(code(&["threshold", "--file", "/nonexistent.state"]), 2);
    assert_eq!(
        code(&["threshold", "--d", "3", "--gamma", "0", "--n", "3", "--k", "4"]),
        3
    );
    assert_eq!(
        code(&[
            "threshold",
            "--d",
            "2",
            "--gamma",
            "0",
            "--k",
            "2",
            "--backend",
            "s3_blocks"
        ]),
        2
    );
    assert_eq!(code(&["sweep"]), 2);
    assert_eq!(code(&["sweep", "--recipe", "no-such-recipe"]), 2);
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn sweep_is_ordered_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "w.conf",
        "# single-copy qutrit curve\nfamily = werner\nd = 3\nparam = gamma\nstart = -0.9\nstop = 0.9\nsteps = 7\nk = 1\n",
    );
    let cfg = cfg.to_str().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}.csv"));
        let o = kext_env(
            &["sweep", "--config", cfg, "--out", out.to_str().unwrap()],
            &[("KEXT_THREADS", threads)],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let rows = csv_rows(std::str::from_utf8(&outputs[0]).unwrap());
    assert_eq!(rows.len(), 7);
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
    for (g, a) in rows {
        assert!((a - alpha_max_k1(g)).abs() < 1e-6, "g={g}: {a}");
    }
    // the same config on stdout
    let o = kext(&["sweep", "--config", cfg]);
    assert_eq!(o.stdout, outputs[0]);
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "w.conf", "steps = 2\n");
    let o = kext_env(
        &["sweep", "--config", cfg.to_str().unwrap()],
        &[("KEXT_THREADS", "zero")],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_sweep_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "big.conf", "d = 3\nn = 3\nk = 4\nsteps = 3\n");
    let out = dir.path().join("big.csv");
    let o = kext(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
    let cfg = write_config(dir.path(), "bad.conf", "d = 3\nsteps = 1\n");
    let o = kext(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn file_family_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let state = fixture("maxmixed_2x3.state");
    let cfg = write_config(
        dir.path(),
        "f.conf",
        &format!("family = file\nfile = \"{}\"\nsteps = 3\n", state.display()),
    );
    let o = kext(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
    assert!(rows[2].1 >= 0.99);
    // no state falls below the k = 1 cloning bound
    assert!(rows.iter().all(|r| r.1 >= 0.75 - 1e-6), "{rows:?}");
}

#[test]
fn copies_k1_recipe() {
    let dir = tempfile::tempdir().unwrap();
    let o = kext(&["sweep", "--recipe", "copies-k1", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let series: Vec<Vec<(f64, f64)>> = ["n1", "n2", "n3", "n4", "n8"]
        .iter()
        .map(|n| read_rows(&dir.path().join(format!("copies-k1_{n}.csv"))))
        .collect();
    assert_eq!(series[0].len(), 81);
    for &(g, a) in &series[0] {
        assert!((a - alpha_max_k1(g)).abs() < 1e-6, "g={g}: {a}");
    }
    // more copies never hurt
    for pair in series.windows(2) {
        for (x, y) in pair[0].iter().zip(&pair[1]) {
            assert_eq!(x.0, y.0);
            assert!(y.1 >= x.1 - 1e-6, "g={}: {} then {}", x.0, x.1, y.1);
        }
    }
}

#[test]
fn two_copies_ordering_in_k() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--recipe",
        "two-copies-d3",
        "--series",
        "k1",
        "--series",
        "k2",
        "--steps",
        "9",
    ];
    let mut all = args.to_vec();
    all.extend(["--out", dir.path().to_str().unwrap()]);
    let o = kext(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let k1 = read_rows(&dir.path().join("two-copies-d3_k1.csv"));
    let k2 = read_rows(&dir.path().join("two-copies-d3_k2.csv"));
    assert_eq!(k1.len(), 9);
    assert!(!dir.path().join("two-copies-d3_k3.csv").exists());
    for (a, b) in k1.iter().zip(&k2) {
        assert!(b.1 <= a.1 + 1e-6, "g={}: k=1 {} k=2 {}", a.0, a.1, b.1);
    }
}

#[test]
fn maximally_mixed_point_is_independent_of_copies() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep", "--recipe", "copies-extensions-d3", "--steps", "3"];
    let series = [
        ("n1_k1", 1),
        ("n1_k2", 2),
        ("n1_k3", 3),
        ("n2_k1", 1),
        ("n2_k2", 2),
        ("n3_k1", 1),
    ];
    for (s, _) in &series {
        args.extend(["--series", s]);
    }
    args.extend(["--out", dir.path().to_str().unwrap()]);
    let o = kext(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for (s, k) in series {
        let rows = read_rows(&dir.path().join(format!("copies-extensions-d3_{s}.csv")));
        assert_eq!(rows[1].0, 0.0);
        let expect = 0.5 * (k as f64 + 2.0) / (k as f64 + 1.0);
        assert!((rows[1].1 - expect).abs() < 1e-6, "{s}: {}", rows[1].1);
    }
}

#[test]
fn over_budget_series_are_marked() {
    let dir = tempfile::tempdir().unwrap();
    let o = kext(&[
        "sweep",
        "--recipe",
        "copies-extensions-d3",
        "--series",
        "n3_k4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("copies-extensions-d3_n3_k4.csv")).unwrap();
    assert!(csv_rows(&text).is_empty());
    assert!(text.contains("# not reproduced"), "{text}");
}

#[test]
fn ellipse_recipe_and_command() {
    let dir = tempfile::tempdir().unwrap();
    let o = kext(&[
        "sweep",
        "--recipe",
        "tradeoff-ellipse",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("tradeoff-ellipse.csv")).unwrap();
    assert_eq!(text.lines().count(), 362);
    let o = kext(&["ellipse", "--points", "8"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# kext-ellipse v1"));
    assert_eq!(lines.next(), Some("theta,f1,f2"));
    for l in lines {
        let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        let (yp, ym) = ((1.0 - v[1] - v[2]) / 2.0, (v[1] - v[2]) / 2.0);
        assert!((yp * yp + ym * ym / 3.0 - 1.0 / 16.0).abs() < 1e-9);
    }
}

fn report(o: &Output) -> Vec<Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn check<'a>(lines: &'a [Value], name: &str) -> &'a Value {
    lines
        .iter()
        .find(|l| l["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn validate_passes_and_reports_margins() {
    let o = kext(&["validate"]);
    let lines = report(&o);
    assert!(o.status.success(), "{}", stdout(&o));
    for l in &lines[..lines.len() - 1] {
        assert_eq!(l["passed"], true, "{l}");
        assert!(l["residual"].is_number());
    }
    let summary = lines.last().unwrap();
    assert_eq!(summary["failed"], 0);
    let mono = check(&lines, "k_monotonicity");
    let curves = mono["details"]["curves"].as_array().unwrap();
    assert!(!curves.is_empty());
    for c in curves {
        assert_eq!(c["margins"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn validate_catches_a_perturbed_closed_form() {
    let o = kext(&["validate", "--perturb-closed-form", "1e-3"]);
    assert_eq!(o.status.code(), Some(1));
    let lines = report(&o);
    assert_eq!(check(&lines, "symmetry")["passed"], true);
    assert_eq!(check(&lines, "consistency_chain")["passed"], false);
    assert!(lines.last().unwrap()["failed"].as_u64().unwrap() >= 1);
}
