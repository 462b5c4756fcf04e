use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_chol-lag"));
    c.env_remove("CHOL_LAG_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const PEAKON: &str = r#"{
  "name": "peakon",
  "initial": {"kind": "peakons", "amplitudes": [1.0], "positions": [0.0], "window": [-20, 20]},
  "grid": {"n": 1024},
  "solver": {"dt": 0.01, "t_end": 1.0, "monitor_every": 25},
  "outputs": {"eulerian": true, "lagrangian": true, "csv": true}
}"#;

fn simulate_peakon(dir: &TempDir, out: &str) -> Output {
    let cfg = write(dir, "peakon.json", PEAKON);
    let out = dir.path().join(out);
    run(&[
        "simulate",
        "--config",
        &cfg,
        "--out-dir",
        out.to_str().unwrap(),
    ])
}

#[test]
fn peakon_run_writes_snapshots_and_manifest() {
    let dir = TempDir::new().unwrap();
    let o = simulate_peakon(&dir, "out");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let manifest = read_json(&out.join("peakon_manifest.json"));
    assert!(manifest["energy_drift"].as_f64().unwrap() <= 1e-6);
    let hash = manifest["config_hash"].as_str().unwrap().to_owned();
    assert_eq!(hash.len(), 64);
    for k in 0..=4 {
        let snap = read_json(&out.join(format!("peakon_t{k}.json")));
        assert_eq!(snap["config_hash"], hash.as_str());
        assert_eq!(snap["index"], k);
        assert!(out.join(format!("peakon_t{k}.csv")).exists());
    }
    assert!(!out.join("peakon_t5.json").exists());
    let last = read_json(&out.join("peakon_t4.json"));
    assert_eq!(last["t"].as_f64().unwrap(), 1.0);
    let csv = fs::read_to_string(out.join("peakon_t0.csv")).unwrap();
    assert!(csv.starts_with("x,u,density\n"));
}

#[test]
fn floats_carry_seventeen_digits() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&simulate_peakon(&dir, "out")), 0);
    let text = fs::read_to_string(dir.path().join("out/peakon_t0.json")).unwrap();
    assert!(
        text.contains("\"t\": 0.0000000000000000e0"),
        "{}",
        &text[..300]
    );
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&simulate_peakon(&dir, "a")), 0);
    assert_eq!(code(&simulate_peakon(&dir, "b")), 0);
    for name in ["peakon_manifest.json", "peakon_t4.json", "peakon_t4.csv"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert!(a == b, "{name} differs");
    }
}

#[test]
fn zero_data_stays_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "zero.json",
        r#"{"name": "zero",
            "initial": {"kind": "sampled", "pair": {"x": [-1, 0, 1], "u": [0, 0, 0], "density": [0, 0]}},
            "grid": {"n": 16}, "solver": {"dt": 0.1, "t_end": 0.5, "monitor_every": 1}}"#,
    );
    let out = dir.path().join("out");
    let o = run(&[
        "simulate",
        "--config",
        &cfg,
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for k in 0..=5 {
        let s = read_json(&out.join(format!("zero_t{k}.json")));
        for v in s["eulerian"]["u"].as_array().unwrap() {
            assert_eq!(v.as_f64().unwrap(), 0.0);
        }
        assert!(s["eulerian"]["atoms"].as_array().unwrap().is_empty());
    }
}

#[test]
fn malformed_config_exits_2_with_position() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.json", "{\n  \"name\": \"x\",\n  oops\n}");
    let o = run(&["simulate", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("column"), "{err}");
}

#[test]
fn inconsistent_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let narrow = PEAKON.replace("[-20, 20]", "[-1, 1]");
    let cfg = write(&dir, "narrow.json", &narrow);
    assert_eq!(code(&run(&["simulate", "--config", &cfg])), 2);
    let cfg = write(&dir, "p.json", PEAKON);
    assert_eq!(code(&run(&["simulate", "--config", &cfg, "--dt", "-1"])), 2);
}

#[test]
fn solver_abort_exits_3() {
    let dir = TempDir::new().unwrap();
    // y decreases across the middle cell, so no step can be taken
    let cfg = write(
        &dir,
        "broken.json",
        r#"{"name": "broken",
            "initial": {"kind": "lagrangian", "state": {
                "grid": {"xi_min": 0.0, "xi_max": 2.0, "n": 3},
                "zeta": [0.0, 0.0, -3.0], "u": [0.0, 1.0, 0.0], "h": [0.0, 0.0, 0.0]}},
            "grid": {"n": 3}, "solver": {"dt": 0.01, "t_end": 0.1}}"#,
    );
    let o = run(&[
        "simulate",
        "--config",
        &cfg,
        "--out-dir",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn scenarios_run_in_parallel_under_a_cap() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", PEAKON);
    let b = write(&dir, "b.json", &PEAKON.replace("\"peakon\"", "\"other\""));
    let out = dir.path().join("out");
    let o = bin()
        .env("CHOL_LAG_THREADS", "2")
        .args([
            "simulate",
            "--config",
            &a,
            "--config",
            &b,
            "--out-dir",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("peakon_manifest.json").exists() && out.join("other_manifest.json").exists());
    let o = bin()
        .env("CHOL_LAG_THREADS", "zero")
        .args(["simulate", "--config", &a])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert_eq!(code(&run(&["simulate", "--config", &a, "--config", &a])), 2);
}

#[test]
fn roundtrip_discrepancy_is_within_grid_size() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&simulate_peakon(&dir, "out")), 0);
    let input = dir.path().join("out/peakon_t2.json");
    let report = dir.path().join("rt.json");
    let o = run(&[
        "transform",
        "--roundtrip",
        "--input",
        input.to_str().unwrap(),
        "--output",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&report);
    let h = r["h"].as_f64().unwrap();
    assert!(r["u_linf_discrepancy"].as_f64().unwrap() <= h);
    assert!(r["mass_discrepancy"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn atom_becomes_a_flat_segment() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "atom.json",
        r#"{"x": [-1, 0, 1], "u": [0, 0, 0], "density": [0, 0], "atoms": [{"x": 0.0, "mass": 1.5}]}"#,
    );
    let output = dir.path().join("lag.json");
    let o = run(&[
        "transform",
        "--to-lagrangian",
        "--input",
        &input,
        "--output",
        output.to_str().unwrap(),
        "--grid-n",
        "351",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&output);
    let x = &doc["lagrangian"];
    let grid = &x["grid"];
    let (lo, hi, n) = (
        grid["xi_min"].as_f64().unwrap(),
        grid["xi_max"].as_f64().unwrap(),
        grid["n"].as_u64().unwrap() as usize,
    );
    let h = (hi - lo) / (n - 1) as f64;
    let zeta = x["zeta"].as_array().unwrap();
    let flat: Vec<f64> = (0..n)
        .filter(|&i| (lo + i as f64 * h + zeta[i].as_f64().unwrap()).abs() < 1e-12)
        .map(|i| lo + i as f64 * h)
        .collect();
    let length = flat.last().unwrap() - flat.first().unwrap();
    assert!((length - 1.5).abs() <= h + 1e-12, "{length}");

    let back = dir.path().join("eul.json");
    let o = run(&[
        "transform",
        "--to-eulerian",
        "--input",
        output.to_str().unwrap(),
        "--output",
        back.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let atoms = read_json(&back)["eulerian"]["atoms"].clone();
    assert_eq!(atoms.as_array().unwrap().len(), 1);
    assert!((atoms[0]["mass"].as_f64().unwrap() - 1.5).abs() < 1e-12);
}

#[test]
fn empty_transform_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "empty.json", "");
    let out = dir.path().join("x.json");
    let o = run(&[
        "transform",
        "--to-lagrangian",
        "--input",
        &input,
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert_eq!(
        code(&run(&["transform", "--input", &input, "--output", "x"])),
        2
    );
}

#[test]
fn metric_of_a_file_with_itself_is_zero() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&simulate_peakon(&dir, "out")), 0);
    let a = dir.path().join("out/peakon_t0.json");
    let o = run(&[
        "metric",
        a.to_str().unwrap(),
        a.to_str().unwrap(),
        "--grid-n",
        "256",
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["lower"].as_f64().unwrap(), 0.0);
    assert_eq!(v["upper"].as_f64().unwrap(), 0.0);
}

#[test]
fn restricted_metric_checks_energy() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&simulate_peakon(&dir, "out")), 0);
    let a = dir.path().join("out/peakon_t0.json");
    let b = dir.path().join("out/peakon_t4.json");
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    assert_eq!(code(&run(&["metric", a, b, "--restricted", "1.5"])), 2);
    assert_eq!(
        code(&run(&[
            "metric",
            a,
            b,
            "--restricted",
            "2.5",
            "--grid-n",
            "256"
        ])),
        0
    );
}

#[test]
fn collision_pair_bracket_has_witnesses() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "col.json",
        r#"{"name": "collision",
            "initial": {"kind": "peakons", "amplitudes": [1.0, -1.0], "positions": [-5.0, 5.0], "window": [-20, 20]},
            "grid": {"n": 512}, "solver": {"dt": 0.02, "t_end": 1.0, "monitor_every": 50}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(
        code(&run(&[
            "simulate",
            "--config",
            &cfg,
            "--out-dir",
            out.to_str().unwrap()
        ])),
        0
    );
    let bracket = dir.path().join("bracket.json");
    let o = run(&[
        "metric",
        out.join("collision_t0.json").to_str().unwrap(),
        out.join("collision_t1.json").to_str().unwrap(),
        "--grid-n",
        "256",
        "--output",
        bracket.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&bracket);
    assert!(v["lower"].as_f64().unwrap() <= v["upper"].as_f64().unwrap());
    assert!(v["upper"].as_f64().unwrap() > 0.0);
    assert_eq!(v["witness_knots"]["f1"].as_array().unwrap().len(), 256);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn unknown_suite_exits_2() {
    let o = run(&["validate", "nonsense"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite"));
}

#[test]
fn conservation_suite_passes() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "validate",
        "conservation",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS"));
    let r = read_json(&dir.path().join("validate_conservation.json"));
    assert_eq!(r["reports"][0]["passed"], true);
}

#[test]
fn sandwich_suite_passes() {
    let o = run(&["validate", "sandwich"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}
