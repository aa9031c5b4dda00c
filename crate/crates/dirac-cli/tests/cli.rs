//! End-to-end tests of the `dirac-lab` binary: exit-status contract, output
//! files, manifests, determinism and checkpoint resume.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dirac-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL_SIM: &str = r#"{
  "simulation": {
    "grid": { "n": 2, "points": 32, "length": 16.0 },
    "model": { "n": 2, "model": "thirring", "formulation": "psi_form", "epsilon": 0.5 },
    "u": { "kind": "packet", "center": [0.0, 0.0], "width": 2.0, "wavevector": [1.0, 0.0], "polarization": [1.0, 0.0, 0.0, 1.0], "l2_norm": 1.0 },
    "dt": 0.05,
    "steps": 40,
    "record_every": 10
  }
}"#;

#[test]
fn verify_algebra_passes_and_fault_injection_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&["verify-algebra", "--samples", "500", "--out-dir", arg(dir.path())]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let text = stdout(&ok);
    for id in ["fierz(n=2)", "fierz(n=3)", "anticommutator(n=3)", "projections(n=2)", "null-symbol(n=3)"] {
        assert!(text.contains(id), "{text}");
    }
    assert!(dir.path().join("algebra.csv").exists());
    assert!(dir.path().join("manifest.json").exists());

    let bad = run(&["verify-algebra", "--samples", "50", "--fault-inject", "gamma1", "--out-dir", arg(dir.path())]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout(&bad).contains("FAIL anticommutator(n=2)"));
}

#[test]
fn unknown_ids_and_bad_configs_are_usage_errors() {
    let o = run(&["verify", "no-such-estimate"]);
    assert_eq!(o.status.code(), Some(4));
    let msg = stderr(&o);
    for id in dirac_core_ids() {
        assert!(msg.contains(id), "{msg}");
    }

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"estimates": {"vp": {"instances": 3, "bogus": true}}}"#);
    let o = run(&["verify", "vp", arg(&cfg), "--out-dir", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("estimates.vp.bogus"), "{}", stderr(&o));

    let o = run(&["campaign", arg(&cfg), "--dry-run"]);
    assert_eq!(o.status.code(), Some(4));
}

fn dirac_core_ids() -> [&'static str; 12] {
    [
        "bilinear-l2",
        "strichartz",
        "xsb-counterexample",
        "nullplane-trace",
        "away-from-cone",
        "null-frame-norms",
        "vp",
        "small-data",
        "scattering",
        "lipschitz",
        "mass-horizon",
        "null-gain",
    ]
}

#[test]
fn xsb_prints_the_fit_and_writes_checkable_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "xsb-counterexample", "--out-dir", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("slope") && text.contains("R²"), "{text}");
    for f in ["xsb-counterexample.jsonl", "summary.csv", "trace.csv", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "verify xsb-counterexample");
    assert_eq!(manifest["status"], "PASS");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);

    let m = dir.path().join("manifest.json");
    assert_eq!(run(&["check-manifest", arg(&m)]).status.code(), Some(0));
    std::fs::write(dir.path().join("summary.csv"), "tampered\n").unwrap();
    let o = run(&["check-manifest", arg(&m)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("summary.csv"));
}

#[test]
fn bilinear_one_dimensional_case_reports_the_exact_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"estimates": {"bilinear-l2": {"n": 1, "size": 256, "length": 128.0, "lambda": 1.0, "trials": 10}}}"#);
    let o = run(&["verify", "bilinear-l2", arg(&cfg), "--n", "1", "--out-dir", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS exact-constant"), "{}", stdout(&o));
}

#[test]
fn outputs_are_deterministic_and_the_hash_ignores_formatting() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "a.json", r#"{"estimates": {"vp": {"instances": 50, "max_len": 8}}}"#);
    let b = write_config(dir.path(), "b.json", "{\n  \"estimates\": {\n    \"vp\": { \"max_len\": 8, \"instances\": 50 }\n  }\n}\n");
    let (oa, ob) = (dir.path().join("a"), dir.path().join("b"));
    for (cfg, out) in [(&a, &oa), (&b, &ob)] {
        let o = run(&["verify", "vp", arg(cfg), "--seed", "5", "--out-dir", arg(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for f in ["vp.jsonl", "summary.csv", "trace.csv"] {
        assert_eq!(std::fs::read(oa.join(f)).unwrap(), std::fs::read(ob.join(f)).unwrap(), "{f}");
    }
    let hash = |d: &Path| -> String {
        let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("manifest.json")).unwrap()).unwrap();
        m["config_hash"].as_str().unwrap().to_string()
    };
    assert_eq!(hash(&oa), hash(&ob));
    // The config file hashes to the recorded value only with the same seed.
    assert_eq!(run(&["check-manifest", arg(&oa.join("manifest.json"))]).status.code(), Some(0));
    let o = run(&["check-manifest", arg(&oa.join("manifest.json")), "--config", arg(&b)]);
    assert_eq!(o.status.code(), Some(2), "seedless config must not match a --seed run");

    let oc = dir.path().join("c");
    assert_eq!(run(&["verify", "vp", arg(&a), "--seed", "6", "--out-dir", arg(&oc)]).status.code(), Some(0));
    assert_ne!(std::fs::read(oa.join("vp.jsonl")).unwrap(), std::fs::read(oc.join("vp.jsonl")).unwrap());
}

#[test]
fn campaign_dry_run_prints_the_plan_without_computing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small-data.cfg", r#"{"seed": 9, "campaign": {"estimates": ["small-data", "scattering"]}}"#);
    let out = dir.path().join("out");
    let o = run(&["campaign", arg(&cfg), "--dry-run", "--out-dir", arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("config hash:"));
    assert!(text.contains("small-data: {") && text.contains("scattering: {"));
    assert!(text.contains("\"seed\":9"));
    assert!(!out.exists(), "dry run must not write outputs");
}

#[test]
fn campaign_runs_and_merges_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"estimates": {"vp": {"instances": 20, "max_len": 6}}, "campaign": {"estimates": ["xsb-counterexample", "vp"]}}"#,
    );
    let o = run(&["campaign", arg(&cfg), "--jobs", "2", "--out-dir", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("xsb-counterexample,") && rows[2].starts_with("vp,"), "{summary}");
}

#[test]
fn zero_data_simulation_has_zero_checkpoints_and_no_drift() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "zero.json",
        r#"{"simulation": {"grid": {"n": 2, "points": 16, "length": 8.0},
            "model": {"n": 2, "model": "soler", "formulation": "uv_form"},
            "u": {"kind": "zero"}, "dt": 0.1, "steps": 10, "record_every": 5}}"#,
    );
    let o = run(&["simulate", arg(&cfg), "--out-dir", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("charge drift: 0.000e0"));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("simulation.json")).unwrap()).unwrap();
    assert_eq!(summary["charge_drift"], 0.0);
    let checkpoints: Vec<_> = std::fs::read_dir(dir.path().join("checkpoints")).unwrap().collect();
    assert_eq!(checkpoints.len(), 2);
    for c in checkpoints {
        let (f, _) = dirac_core::grid::SpinorField::load(&c.unwrap().path()).unwrap();
        assert_eq!(f.l2_norm(), 0.0);
    }
    let charge = std::fs::read_to_string(dir.path().join("charge.csv")).unwrap();
    assert!(charge.starts_with("frame,time,charge,relative_drift"));
}

#[test]
fn resume_continues_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sim.json", SMALL_SIM);
    let full = dir.path().join("full");
    let part = dir.path().join("part");
    assert_eq!(run(&["simulate", arg(&cfg), "--out-dir", arg(&full)]).status.code(), Some(0));
    assert_eq!(run(&["simulate", arg(&cfg), "--out-dir", arg(&part)]).status.code(), Some(0));
    // Simulate an interruption after step 20: drop the later checkpoints.
    let ck = part.join("checkpoints");
    let mut names: Vec<String> = std::fs::read_dir(&ck).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for n in &names[2..] {
        std::fs::remove_file(ck.join(n)).unwrap();
    }
    let o = run(&["simulate", arg(&cfg), "--resume", "--out-dir", arg(&part)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("resumed from step 20"), "{}", stdout(&o));
    let last = names.last().unwrap();
    assert_eq!(std::fs::read(full.join("checkpoints").join(last)).unwrap(), std::fs::read(ck.join(last)).unwrap());
}

#[test]
fn three_dimensional_equivalence_flag_reports_the_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "eq.json",
        r#"{"seed": 2, "simulation": {"grid": {"n": 3, "points": 16, "length": 16.0},
            "model": {"n": 3, "model": "thirring", "formulation": "psi_form", "epsilon": 0.5},
            "u": {"kind": "packet", "center": [0, 0, 0], "width": 2.5, "wavevector": [0.5, 0, 0], "polarization": [1, 0, 0, 0.5], "l2_norm": 1.0},
            "v": {"kind": "packet", "center": [1, 0, 0], "width": 2.5, "wavevector": [0, 0.5, 0], "polarization": [0, 0.5, 1, 0], "l2_norm": 1.0},
            "dt": 0.05, "steps": 10, "record_every": 5, "equivalence": true}}"#,
    );
    let o = run(&["simulate", arg(&cfg), "--out-dir", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("formulation divergence:"));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("simulation.json")).unwrap()).unwrap();
    assert!(summary["formulation_divergence"].as_f64().unwrap() < 1e-10);
}
