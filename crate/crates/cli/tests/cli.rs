use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use shadowkit::system::csv_io::read_discrete;
use shadowkit::system::{defect_discrete, gallery, GalleryProblem, Params, PseudoOrbitDiscrete};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shadowkit"))
        .args(args)
        .env_remove("SHADOWKIT_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn f(v: &Value, key: &str) -> f64 {
    v[key]
        .as_f64()
        .unwrap_or_else(|| panic!("no number `{key}` in {v}"))
}

fn table(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn certify_toy() {
    let out = run(&["certify", "--gallery", "disc-toy"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((f(&v, "q") - 0.5).abs() <= 1e-12);
    assert!((f(&v, "L") - 0.2).abs() <= 1e-12);
    assert!((f(&v, "radius") - 0.4).abs() <= 1e-11);
    assert_eq!(v["status"], "certified");
    assert!(v["dichotomy"]["rho"].as_f64().is_some());
}

#[test]
fn certify_rho_family() {
    let out = run(&["certify", "--gallery", "cont-rho", "--param", "a=3"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(f(&v, "q") <= 2.0 / 3.0 + 0.01);
    assert_eq!(v["tail"]["status"], "decay-envelope");
}

#[test]
fn rho_family_needs_fast_decay() {
    let out = run(&["certify", "--gallery", "cont-rho", "--param", "a=1.5"]);
    assert_eq!(code(&out), 64);
    assert!(String::from_utf8_lossy(&out.stderr).contains("a > 2"));
}

#[test]
fn configuration_errors_exit_64() {
    for args in [
        &["certify", "--gallery", "nope"][..],
        &["certify", "--gallery", "disc-toy", "--param", "lambda"],
        &["certify", "--gallery", "disc-toy", "--param", "colour=3"],
        &["shadow", "--gallery", "disc-toy", "--tol", "0"],
        &["certify"],
        &["certify", "--gallery", "disc-toy", "--bogus"],
        &["jet", "--gallery", "disc-toy", "--order", "3"],
        &["jet", "--gallery", "disc-toy", "--direction", "1,2"],
        &["reproduce", "elsewhere"],
    ] {
        assert_eq!(code(&run(args)), 64, "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn shadow_sine_forced() {
    let out = run(&[
        "shadow",
        "--gallery",
        "cont-sin",
        "--param",
        "lambda=0.5,eps=0.1",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let sup = f(&v, "sup_z");
    assert!((sup - 0.05 / 2f64.sqrt()).abs() <= 1e-6, "{sup}");
    assert!(sup <= 0.2 && sup <= f(&v, "radius"));
}

#[test]
fn shadow_toy_iterations() {
    let out = run(&["shadow", "--gallery", "disc-toy", "--tol", "1e-12"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["iterations"].as_u64().unwrap() <= 50);
    assert!(f(&v, "residual") <= 1e-12);
}

#[test]
fn shadow_of_an_exact_orbit_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    let first = run(&[
        "shadow",
        "--gallery",
        "disc-toy",
        "--out-csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&first), 0);
    let out = run(&[
        "shadow",
        "--gallery",
        "disc-toy",
        "--orbit",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(f(&v, "sup_z") <= 1e-12, "{}", f(&v, "sup_z"));
    assert_eq!(v["iterations"], 1);
}

#[test]
fn continuous_orbit_table_reingests() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    assert_eq!(
        code(&run(&[
            "shadow",
            "--gallery",
            "cont-sin",
            "--out-csv",
            csv.to_str().unwrap()
        ])),
        0
    );
    let (header, _) = table(&csv);
    assert_eq!(header, ["t", "x1", "z1", "xp1"]);
    let out = run(&[
        "shadow",
        "--gallery",
        "cont-sin",
        "--orbit",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    // the table is a cubic Hermite interpolant of the true solution
    assert!(f(&v, "sup_z") <= 1e-10);
    assert_eq!(v["iterations"], 1);
}

#[test]
fn orbit_table_round_trip_defect() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    let out = run(&[
        "shadow",
        "--gallery",
        "disc-toy",
        "--out-csv",
        csv.to_str().unwrap(),
    ]);
    let recorded = f(&json(&out), "orbit_defect");
    let GalleryProblem::Discrete(p) = gallery("disc-toy", &Params::new()).unwrap() else {
        unreachable!()
    };
    let (_, x) = read_discrete(std::fs::File::open(&csv).unwrap()).unwrap();
    let orbit = PseudoOrbitDiscrete::new(p.orbit.lambda.clone(), *p.system.window(), x).unwrap();
    let d = defect_discrete(&p.system, &orbit).unwrap();
    assert!((d.sup_defect - recorded).abs() <= 1e-12);
    assert!(recorded <= 1e-9);
}

#[test]
fn failed_pseudo_orbit_hypothesis_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ones.csv");
    let mut s = String::from("n,y1\n");
    for n in 0..=200 {
        s += &format!("{n},1.0\n");
    }
    std::fs::write(&csv, s).unwrap();
    let out = run(&[
        "certify",
        "--gallery",
        "disc-toy",
        "--orbit",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let v = json(&out);
    assert_eq!(v["status"], "failed");
    assert!(v["hypotheses"]["failed"]
        .as_array()
        .unwrap()
        .iter()
        .any(|h| h == "pseudo-orbit"));
}

#[test]
fn orbit_outside_window_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("short.csv");
    std::fs::write(&csv, "n,y1\n0,0\n1,0\n").unwrap();
    assert_eq!(
        code(&run(&[
            "certify",
            "--gallery",
            "disc-toy",
            "--orbit",
            csv.to_str().unwrap()
        ])),
        64
    );
}

#[test]
fn non_convergence_exits_3() {
    let out = run(&["shadow", "--gallery", "disc-toy", "--max-iter", "3"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-convergence"));
}

#[test]
fn sine_jets() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("jet.csv");
    let out = run(&[
        "jet",
        "--gallery",
        "cont-sin",
        "--order",
        "2",
        "--out-csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let (header, rows) = table(&csv);
    assert_eq!(header, ["t", "w1_1", "w2_1"]);
    let eps = 0.1;
    for r in rows.iter().filter(|r| r[0].abs() <= 15.0) {
        let t = r[0];
        let dy = 0.5 * (t.sin() - t.cos()) + eps / 2.0 * (t.sin() + t.cos());
        assert!((r[1] + dy - 0.5 * (t.sin() - t.cos())).abs() <= 1e-6);
        assert!(r[2].abs() <= 1e-8);
    }
}

#[test]
fn jet_verification_passes() {
    for g in ["disc-toy", "cont-rho"] {
        let out = run(&["jet", "--gallery", g, "--verify"]);
        assert_eq!(code(&out), 0, "{g}");
        let v = json(&out);
        let r = f(&v["richardson"][0], "ratio");
        assert!((3.5..=4.5).contains(&r), "{g}: {r}");
    }
}

#[test]
fn jet_without_oracles_exits_65() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    run(&[
        "shadow",
        "--gallery",
        "disc-toy",
        "--out-csv",
        csv.to_str().unwrap(),
    ]);
    let out = run(&[
        "jet",
        "--gallery",
        "disc-toy",
        "--orbit",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 65);
    assert!(String::from_utf8_lossy(&out.stderr).contains("jet-unavailable"));
}

#[test]
fn config_file() {
    let dir = tempfile::tempdir().unwrap();
    let ini = dir.path().join("run.ini");
    std::fs::write(&ini, "[system]\ngallery = disc-toy\nlambda = 0.5\n\n[window]\nhi = 300\n\n[tolerances]\ntol = 1e-12\n").unwrap();
    let json_path = dir.path().join("out/cert.json");
    let out = run(&[
        "certify",
        "--config",
        ini.to_str().unwrap(),
        "--out-json",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(file, json(&out));
    assert_eq!(file["params"]["hi"], 300.0);
    std::fs::write(
        &ini,
        "[system]\ngallery = disc-toy\n[tolerances]\ntol = small\n",
    )
    .unwrap();
    assert_eq!(
        code(&run(&["certify", "--config", ini.to_str().unwrap()])),
        64
    );
}

#[test]
fn floats_carry_17_digits() {
    let out = run(&["certify", "--gallery", "disc-toy"]);
    let s = String::from_utf8_lossy(&out.stdout);
    assert!(s.contains("\"q\":5.0000000000000000e-1"), "{s}");
}

#[test]
fn thread_cap_and_parallel_agree() {
    let seq = json(&run(&["shadow", "--gallery", "cont-rho"]));
    let out = Command::new(env!("CARGO_BIN_EXE_shadowkit"))
        .args(["shadow", "--gallery", "cont-rho", "--parallel"])
        .env("SHADOWKIT_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let par = json(&out);
    assert_eq!(seq["sup_z"], par["sup_z"]);
    assert_eq!(seq["step_history"], par["step_history"]);
    let bad = Command::new(env!("CARGO_BIN_EXE_shadowkit"))
        .args(["certify", "--gallery", "disc-toy"])
        .env("SHADOWKIT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 64);
}

#[test]
fn reproduce_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for args in [
        &["reproduce", "cont-sin", "--out-dir", d][..],
        &["reproduce", "cont-rho", "--a", "3", "--out-dir", d],
        &["reproduce", "disc-toy", "--out-dir", d],
    ] {
        let out = run(args);
        assert_eq!(
            code(&out),
            0,
            "{args:?}\n{}",
            String::from_utf8_lossy(&out.stdout)
        );
        let md = String::from_utf8_lossy(&out.stdout);
        assert!(md.contains("| check | measured | expected | result |") && !md.contains("FAIL"));
    }
    for id in ["cont-sin", "cont-rho", "disc-toy"] {
        let v: Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(format!("{id}-results.json"))).unwrap(),
        )
        .unwrap();
        assert_eq!(v["passed"], true);
        assert!(dir.path().join(format!("{id}-report.md")).exists());
    }
}
