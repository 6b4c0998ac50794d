use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn passage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_passage")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn run_config(cfg: &Path, out: &Path) -> Output {
    passage(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

const BELL: &str = "protocol = \"bell\"\nduration = 1.0\nkappa_t = [0.0]\n";

#[test]
fn closed_bell_run_writes_manifest_and_trajectory() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bell.cfg", BELL);
    let out = tmp.path().join("out");
    let o = run_config(&cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let m = manifest(&out);
    for key in ["config", "runs", "version", "duration_seconds"] {
        assert!(m.get(key).is_some(), "manifest lacks {key}");
    }
    let runs = m["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 1);
    assert!((runs[0]["final_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-5);

    let csv = fs::read_to_string(out.join("bell_000.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,P_ee,P_eg,P_ge,P_gg,F,residual");
    assert_eq!(csv.lines().count(), 1 + 2 * 2000 + 1);
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0], "2.0000000000000000e0");
}

#[test]
fn ghz_config_lists_every_decay_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "ghz.cfg",
        "protocol = \"ghz\"\nqubits = 3\nduration = 1.0\nkappa_t = [0.0, 0.1884]\n[grid]\nsteps_per_stage = 400\n",
    );
    let out = tmp.path().join("out");
    assert_eq!(run_config(&cfg, &out).status.code(), Some(0));
    let m = manifest(&out);
    let runs = m["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    let f: Vec<f64> = runs.iter().map(|r| r["final_fidelity"].as_f64().unwrap()).collect();
    assert!((f[0] - 1.0).abs() < 1e-5);
    assert!(f[1] < f[0]);
    assert_eq!(runs[1]["steps"].as_array().unwrap().len(), 3);
}

#[test]
fn malformed_config_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.cfg", "protocol = \"ghz\"\nkappa_t = [0.0]\n");
    let o = run_config(&cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 1") && err.contains("duration"), "{err}");

    let cfg = write_config(tmp.path(), "neg.cfg", "protocol = \"bell\"\nduration = 1.0\nkappa_t = [-1.0]\n");
    assert_eq!(run_config(&cfg, &tmp.path().join("out")).status.code(), Some(2));
    let o = passage(&["run", tmp.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bell.cfg", "protocol = \"bell\"\nduration = 1.0\nkappa_t = [0.05]\n[grid]\nsteps_per_stage = 300\n");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_config(&cfg, &a);
    run_config(&cfg, &b);
    assert_eq!(fs::read(a.join("bell_000.csv")).unwrap(), fs::read(b.join("bell_000.csv")).unwrap());
}

#[test]
fn single_value_sweep_matches_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bell.cfg", "protocol = \"bell\"\nduration = 1.0\nkappa_t = [0.05]\n[grid]\nsteps_per_stage = 300\n");
    let (run_dir, sweep_dir) = (tmp.path().join("run"), tmp.path().join("sweep"));
    assert_eq!(run_config(&cfg, &run_dir).status.code(), Some(0));
    let o = passage(&["sweep", cfg.to_str().unwrap(), "--param", "kappa_t", "--values", "0.05", "--out", sweep_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(run_dir.join("bell_000.csv")).unwrap(),
        fs::read(sweep_dir.join("sweep_kappa_t_000.csv")).unwrap()
    );
}

#[test]
fn decay_sweep_table_falls_with_kappa() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bell.cfg", "protocol = \"bell\"\nduration = 1.0\n[grid]\nsteps_per_stage = 300\n");
    let out = tmp.path().join("out");
    let o = passage(&["--jobs", "2", "sweep", cfg.to_str().unwrap(), "--param", "kappa_t", "--values", "0.1,0,0.02", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("sweep_kappa_t.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "kappa_t,F_final,max_residual,F_excitation,F_conversion");
    let f: Vec<(f64, f64)> = lines
        .map(|l| {
            let cells: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
            (cells[0], cells[1])
        })
        .collect();
    assert_eq!(f.len(), 3);
    assert!(f[1].1 > f[2].1 && f[2].1 > f[0].1, "{f:?}");
}

#[test]
fn grid_sweep_converges() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bell.cfg", "protocol = \"bell\"\nduration = 1.0\nkappa_t = [0.05]\n");
    let out = tmp.path().join("out");
    let o = passage(&["sweep", cfg.to_str().unwrap(), "--param", "grid", "--values", "500,1000,2000,4000", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    let f: Vec<f64> = m["runs"].as_array().unwrap().iter().map(|r| r["final_fidelity"].as_f64().unwrap()).collect();
    assert!((f[3] - f[2]).abs() <= 1e-5, "{f:?}");
}

#[test]
fn sweep_rejects_unknown_parameters() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bell.cfg", BELL);
    let o = passage(&["sweep", cfg.to_str().unwrap(), "--param", "temperature", "--values", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = passage(&["sweep", cfg.to_str().unwrap(), "--param", "grid", "--values", "2.5", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_small_suites_and_writes_a_report() {
    let tmp = TempDir::new().unwrap();
    let o = passage(&["verify", "--seed", "1", "--max-m", "2", "--max-n", "3", "--instances", "4", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["suites"].as_array().unwrap().len(), 6);
}

#[test]
fn injected_detuning_fails_the_residual_suite() {
    let o = passage(&["verify", "--max-m", "2", "--max-n", "3", "--instances", "3", "--inject-detuning", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("residual"));
}

#[test]
fn empty_size_list_is_a_trivial_pass() {
    let o = passage(&["verify", "--sizes", ""]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("sizes=0"));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["bell.cfg", "ghz3.cfg"] {
        let tmp = TempDir::new().unwrap();
        let text = fs::read_to_string(root.join(name)).unwrap();
        // keep the shipped settings but use a coarse grid
        let cfg = write_config(tmp.path(), name, &text.replace("steps_per_stage = 2000", "steps_per_stage = 200"));
        let o = run_config(&cfg, tmp.path());
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
