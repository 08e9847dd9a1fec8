use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn studykin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_studykin")).args(args).output().unwrap()
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_studykin"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn ok_json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("studykin-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn ddkp_j1_at_two_one() {
    let v = ok_json(&studykin(&["ddkp", "--component", "J1", "--d1", "2", "--d2", "1"]));
    let sols = v["solutions"].as_array().unwrap();
    assert_eq!(sols.len(), 2);
    let charts: Vec<Vec<f64>> = sols.iter().map(|s| floats(&s["chart"])).collect();
    for t in [[0.90, 0.21, 0.36], [0.42, 0.45, 0.78]] {
        assert!(charts.iter().any(|c| c.iter().zip(t).all(|(a, b)| (a - b).abs() <= 0.01)), "{charts:?}");
    }
    assert!(v["critical"].is_null());
}

#[test]
fn ddkp_accepts_negative_values_and_reports_the_self_motion() {
    let v = ok_json(&studykin(&["ddkp", "--component", "J1", "--d1", "-0", "--d2", "0"]));
    assert_eq!(v["critical"], "SelfMotionLine");
    let v = ok_json(&studykin(&["ddkp", "--component", "L5", "--d1", "-0.5", "--d2", "0"]));
    assert_eq!(v["solutions"].as_array().unwrap().len(), 2);
}

#[test]
fn critical_values_of_j1() {
    let v = ok_json(&studykin(&["critical", "--component", "J1"]));
    let c = &v["conic"];
    assert!((c["b"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert!((c["c"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((c["rhs"].as_f64().unwrap() - 81.0 / 16.0).abs() < 1e-12);
}

#[test]
fn dkp_i1_published_instance_is_deterministic() {
    let args = ["dkp", "--mode", "I1", "--r", "52,51,50"];
    let a = studykin(&args);
    let b = studykin(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = ok_json(&a);
    let sols = v.as_array().unwrap();
    assert_eq!(sols.len(), 4);
    for s in sols {
        let keys: BTreeSet<&str> = s.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, BTreeSet::from(["point", "mode", "residual", "z"]));
        assert_eq!(s["point"].as_array().unwrap().len(), 8);
        assert_eq!(s["mode"], "I1");
        assert!((s["z"].as_f64().unwrap().abs() - 50.9).abs() <= 0.1);
    }
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(!text.contains('\r') && text.ends_with("}\n]\n"));
}

#[test]
fn scan_histogram_has_the_expected_regions() {
    let dir = scratch("scan");
    let path = dir.join("scan.csv");
    let out = studykin(&[
        "scan", "--mode", "I1", "--r3", "50", "--window", "47:53", "--resolution", "120", "--jobs", "8", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut counts = BTreeSet::new();
    for line in csv.lines().skip(1) {
        counts.insert(line.split(',').nth(3).unwrap().parse::<usize>().unwrap());
    }
    assert_eq!(csv.lines().count(), 1 + 120 * 120);
    assert!(counts.is_superset(&BTreeSet::from([0, 4, 8])), "{counts:?}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn scan_output_does_not_depend_on_jobs() {
    let run = |jobs: &str| studykin(&["scan", "--mode", "I1", "--r3", "10", "--window", "8:12", "--resolution", "5", "--jobs", jobs, "--seed", "4"]);
    let (a, b) = (run("1"), run("3"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("r1,r2,r3,count,status\n"));
}

#[test]
fn convert_round_trips() {
    let identity = r#"{"rotation":[[1,0,0],[0,1,0],[0,0,1]],"translation":[0,0,0]}"#;
    let v = ok_json(&with_stdin(&["convert", "--to-study"], identity));
    assert_eq!(floats(&v), [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);

    let motion = r#"{"rotation":[[0,-1,0],[1,0,0],[0,0,1]],"translation":[1,2,3]}"#;
    let study = with_stdin(&["convert", "--to-study"], motion).stdout;
    let back = ok_json(&with_stdin(&["convert", "--to-motion"], std::str::from_utf8(&study).unwrap()));
    assert_eq!(floats(&back["translation"]).iter().map(|t| t.round()).collect::<Vec<_>>(), [1.0, 2.0, 3.0]);

    let product = r#"{"w":[0.5,0.5,0.5,0.5],"rstu":[1,-2,0.5,3]}"#;
    let blowup = with_stdin(&["convert", "--sigma"], product).stdout;
    let p = ok_json(&with_stdin(&["convert", "--tau"], std::str::from_utf8(&blowup).unwrap()));
    let rstu = floats(&p["rstu"]);
    let s = rstu[0];
    for (a, b) in rstu.iter().zip([1.0, -2.0, 0.5, 3.0]) {
        assert!((a / s - b).abs() < 1e-12);
    }
}

#[test]
fn convert_chart_point_to_boundary() {
    let v = ok_json(&with_stdin(&["convert", "--chart", "J1"], "[0.6, 0.0, 0.8]"));
    let (w, y) = (floats(&v["w"]), floats(&v["y"]));
    assert_eq!(w, [0.0, 0.6, 0.0, 0.8]);
    assert_eq!(y, [0.6, 0.0, 0.8, -0.0]);
}

#[test]
fn usage_errors_exit_with_two() {
    let bad_json = with_stdin(&["convert", "--to-study"], "{\"rotation\": 3}");
    assert_eq!(bad_json.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_json.stderr).contains("malformed"));
    assert_eq!(studykin(&["dkp", "--mode", "I1", "--r", "1,2"]).status.code(), Some(2));
    assert_eq!(studykin(&["dkp", "--mode", "K1", "--r", "5,5,5"]).status.code(), Some(2));
    assert_eq!(studykin(&["dkp", "--mode", "K1", "--arch", "RPS3", "--r", "5,5,5"]).status.code(), Some(2));
    assert_eq!(studykin(&["dkp", "--mode", "I1", "--k2", "2", "--r", "5,5,5"]).status.code(), Some(2));
    assert_eq!(studykin(&["ddkp", "--component", "J1", "--arch", "UPU3_TSAI", "--d1", "1", "--d2", "1"]).status.code(), Some(2));
    assert_eq!(studykin(&["scan", "--mode", "I1", "--r3", "10", "--window", "9:9"]).status.code(), Some(2));
    assert_eq!(studykin(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(studykin(&["--help"]).status.code(), Some(0));
}

#[test]
fn solver_failures_exit_with_three() {
    let out = studykin(&["refine", "--mode", "I1", "--r", "52,51,50", "--start", "1,0,0,0,0,0,0,0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverged"));
}

#[test]
fn refine_k8_from_published_seed() {
    let v = ok_json(&studykin(&["refine", "--mode", "K8", "--r", "100.6,100,100", "--rotation", "0.98,0,0.15,0"]));
    let p = floats(&v["point"]);
    let n = p[..4].iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((p[0].abs() / n - 0.98).abs() <= 0.02 && (p[2].abs() / n - 0.15).abs() <= 0.02);
    assert!(p[1].abs() / n <= 0.02 && p[3].abs() / n <= 0.02);
}

#[test]
fn sweep_reports_lower_bounds() {
    let v = ok_json(&studykin(&["sweep", "--r1", "100.6,101", "--starts", "32"]));
    let pts = v.as_array().unwrap();
    assert_eq!(pts.len(), 2);
    for p in pts {
        assert_eq!(p["count_lower_bound"].as_u64().unwrap() as usize, p["solutions"].as_array().unwrap().len());
    }
    assert_eq!(studykin(&["sweep", "--arch", "UPU3_SNU", "--r1", "100"]).status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = scratch("config");
    let cfg = dir.join("run.json");
    std::fs::write(&cfg, r#"{"architecture": "UPU3_SNU", "seed": 3}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let snu = ok_json(&studykin(&["--config", c, "dkp", "--mode", "K1", "--r", "5,5,5", "--starts", "16"]));
    assert!(snu.as_array().is_some());
    let over = studykin(&["--config", c, "dkp", "--mode", "K1", "--arch", "RPS3", "--r", "5,5,5"]);
    assert_eq!(over.status.code(), Some(2));
    std::fs::write(&cfg, r#"{"colour": "blue"}"#).unwrap();
    assert_eq!(studykin(&["--config", c, "critical", "--component", "J1"]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_exit_codes() {
    let quick = studykin(&["verify", "--quick", "--samples", "50"]);
    assert_eq!(quick.status.code(), Some(0));
    let text = String::from_utf8(quick.stdout).unwrap();
    assert!(text.lines().all(|l| !l.starts_with("[FAIL]")));
    assert!(!text.contains("scan"));
    assert_eq!(studykin(&["verify", "--quick", "--strict", "--samples", "50"]).status.code(), Some(1));

    let shipped = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/generators");
    let dir = scratch("verify");
    for entry in std::fs::read_dir(&shipped).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), dir.join(entry.file_name())).unwrap();
    }
    let k1 = dir.join("K1.txt");
    let text = std::fs::read_to_string(&k1).unwrap().replacen('1', "7", 1);
    std::fs::write(&k1, text).unwrap();
    let out = studykin(&["verify", "--quick", "--samples", "20", "--data-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] generator checksums"));
    std::fs::remove_dir_all(&dir).unwrap();
}
