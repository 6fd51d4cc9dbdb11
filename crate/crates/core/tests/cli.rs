use std::path::Path;
use std::process::{Command, Output};

use fama_core::cli::{parse_scenario, run_sweep, CSV_HEADER};

const BIN: &str = env!("CARGO_BIN_EXE_fama");

fn fama(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("FAMA_WORKERS");
    if let Some(w) = workers {
        cmd.env("FAMA_WORKERS", w);
    }
    cmd.output().unwrap()
}

fn scenario(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const MC_SWEEP: &str = "\
N = 3
K = 6
W = 2
trials = 3000
seed = 11
sweep.axis = N
sweep.values = 2..4
sweep.metric = WDT_SINR: MC
sweep.metric = WET_EHP: MC
sweep.metric = IDET_GENERAL: MC
sweep.metric = EE_WET: MC
";

#[test]
fn sweep_output_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "s.cfg", MC_SWEEP);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let oa = fama(&["sweep", &cfg, "--out", a.to_str().unwrap()], Some("1"));
    let ob = fama(&["sweep", &cfg, "--workers", "8", "--out", b.to_str().unwrap()], None);
    assert!(oa.status.success() && ob.status.success());
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert_eq!(text.lines().count(), 1 + 3 * 4);
}

#[test]
fn decibel_labels_round_trip() {
    let sc = parse_scenario("K = 2\nN = 2\ntrials = 1000\nsweep.axis = gamma_th\nsweep.values = 3 dB, 6 dB\nsweep.metric = WDT_SINR: CLOSED_FORM\n").unwrap();
    assert_eq!(sc.values[0].value, 10f64.powf(0.3));
    let res = run_sweep(&sc).unwrap();
    assert_eq!(res.rows[0].axis_value, "3 dB");
    assert_eq!(res.rows[1].axis_value, "6 dB");
}

#[test]
fn json_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "s.cfg", MC_SWEEP);
    let out = fama(&["eval", &cfg, "--format", "json"], Some("1"));
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0]["metric"], "WDT_SINR");
    assert_eq!(rows[0]["method"], "MC");
    assert!(rows[0]["seconds"].is_null());
    assert!(rows[0]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn validation_errors_exit_with_one_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("never.csv");
    let out = out_path.to_str().unwrap();
    let empty = scenario(dir.path(), "e.cfg", "sweep.axis = N\nsweep.values =\nsweep.metric = WDT_SINR: MC\n");
    let o = fama(&["sweep", &empty, "--out", out], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert!(!out_path.exists());

    let typo = scenario(dir.path(), "t.cfg", "N = 3\nK = x\n");
    let o = fama(&["sweep", &typo], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let exact_only = scenario(dir.path(), "x.cfg", "N = 2\nK = 2\nsweep.metric = WDT_SINR: EXACT\n");
    assert_eq!(fama(&["compare", &exact_only], None).status.code(), Some(1));
    assert_eq!(fama(&["sweep", &typo, "--workers", "0"], None).status.code(), Some(1));
}

#[test]
fn failed_cells_stay_in_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "f.cfg", "N = 2\nK = 2\ntrials = 1000\nsweep.metric = EE_WDT: MC, EXACT\n");
    let o = fama(&["eval", &cfg], None);
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8(o.stdout).unwrap();
    let bad = text.lines().find(|l| l.contains("EE_WDT,EXACT")).unwrap();
    assert!(bad.contains(",NaN,") && bad.ends_with("unsupported"), "{bad}");
}

#[test]
fn numerical_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(
        dir.path(),
        "q.cfg",
        "N = 3\nK = 2\nquad.nodes_semiinfinite = 200\nquad.nodes_finite = 200\nsweep.metric = WET_SINR: EXACT\n",
    );
    let o = fama(&["eval", &cfg], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stdout).unwrap().contains("cost_guard"));
}

#[test]
fn compare_passes_on_a_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(
        dir.path(),
        "c.cfg",
        "N = 2\nK = 2\nW = 1\ntrials = 20000\nquad.nodes_semiinfinite = 24\nquad.nodes_finite = 24\n\
         sweep.axis = gamma_th\nsweep.values = 0 dB, 4 dB\nsweep.metric = WDT_SINR: MC, EXACT\n",
    );
    let o = fama(&["compare", &cfg], None);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.matches("PASS").count(), 2);
}

#[test]
fn mu_prints_the_correlation() {
    let o = fama(&["mu", "--w", "1"], None);
    assert!(o.status.success());
    let mu: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    assert!(mu > 0.0 && mu < 1.0);
}
