use std::fs;
use std::path::Path;
use std::process::Command;

fn ddd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ddd"))
}

fn write_circle(dir: &Path, name: &str, centers: &[[f64; 3]]) -> std::path::PathBuf {
    let n = 48;
    let loops: Vec<String> = centers
        .iter()
        .map(|c| {
            let nodes: Vec<String> = (0..n)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / n as f64;
                    format!("[{:?},{:?},{:?}]", c[0] + 5.0 * t.cos(), c[1] + 5.0 * t.sin(), c[2])
                })
                .collect();
            format!(r#"{{"burgers":[0,0,1],"nodes":[{}]}}"#, nodes.join(","))
        })
        .collect();
    let text = format!(
        r#"{{"format":"ddd-net/1","epsilon":1.0,"lattice":[[1,0,0],[0,1,0],[0,0,1]],"loops":[{}]}}"#,
        loops.join(",")
    );
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn fresh_build_passes_every_check() {
    let out = ddd().arg("check").output().unwrap();
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{table}");
    assert_eq!(table.lines().count(), 10);
    assert!(!table.contains("FAIL"));
}

#[test]
fn degraded_kernels_fail_the_check() {
    let out = ddd().args(["check", "--sphere-order", "4"]).output().unwrap();
    assert!(!out.status.success());
    let table = String::from_utf8_lossy(&out.stdout);
    let row = table.lines().find(|l| l.starts_with("kernel self-convergence")).unwrap();
    assert!(row.contains("FAIL"), "{table}");
    let out = ddd().args(["check", "--normalization-scale", "1.1"]).output().unwrap();
    let table = String::from_utf8_lossy(&out.stdout);
    let row = table.lines().find(|l| l.starts_with("oracle equivalence")).unwrap();
    assert!(row.contains("FAIL"), "{table}");
}

#[test]
fn simulate_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_circle(dir.path(), "net.json", &[[0.0, 0.0, 0.0]]);
    let cfg = write(dir.path(), "cfg.json", r#"{"epsilon": 1.0, "step": {"max_steps": 4}, "output": {"snapshot_every": 2}}"#);
    let out_dir = dir.path().join("out");
    let st = ddd()
        .args(["simulate", "--svg", "--input"])
        .arg(&net)
        .arg("--config")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(st.success());
    let csv = fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(fs::read_to_string(out_dir.join("events.jsonl")).unwrap().contains("max_steps"));
    for step in [0, 2, 4] {
        assert!(out_dir.join(format!("snapshots/step_{step:06}.json")).exists());
        assert!(out_dir.join(format!("snapshots/step_{step:06}.svg")).exists());
    }
    // the echoed config loads back to the same values
    let echoed = fs::read_to_string(out_dir.join("config.json")).unwrap();
    assert!(echoed.contains("\"max_steps\": 4"));
}

#[test]
fn diagnostics_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_circle(dir.path(), "net.json", &[[0.0, 0.0, 0.0], [12.0, 0.0, 1.0]]);
    let cfg = write(dir.path(), "cfg.json", r#"{"epsilon": 1.0, "step": {"max_steps": 3}}"#);
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out_dir = dir.path().join(format!("out{threads}"));
        let st = ddd()
            .env("DDD_THREADS", threads)
            .args(["simulate", "--input"])
            .arg(&net)
            .arg("--config")
            .arg(&cfg)
            .arg("--out-dir")
            .arg(&out_dir)
            .status()
            .unwrap();
        assert!(st.success());
        outputs.push(fs::read(out_dir.join("diagnostics.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn exit_codes_distinguish_usage_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_circle(dir.path(), "net.json", &[[0.0, 0.0, 0.0]]);
    let bad = write(dir.path(), "bad.json", r#"{"epsilon": -1}"#);
    let out = ddd()
        .args(["simulate", "--input"])
        .arg(&net)
        .arg("--config")
        .arg(&bad)
        .arg("--out-dir")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
    let mismatch = write(dir.path(), "eps.json", r#"{"epsilon": 0.5}"#);
    let out = ddd().args(["energy", "--input"]).arg(&net).arg("--config").arg(&mismatch).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(ddd().args(["simulate", "--bogus"]).status().unwrap().code(), Some(1));
    assert_eq!(ddd().arg("--help").status().unwrap().code(), Some(0));
}

#[test]
fn energy_force_kernel_table_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_circle(dir.path(), "net.json", &[[0.0, 0.0, 0.0], [20.0, 0.0, 0.0]]);
    let out = ddd().args(["energy", "--input"]).arg(&net).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["total"].as_f64().unwrap() > 0.0);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 2);

    let out = ddd().args(["force", "--input"]).arg(&net).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1 + 96);

    let out = ddd().args(["kernel-table", "--count", "5", "--direction", "1,0,1"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1 + 6);

    let svg = dir.path().join("net.svg");
    assert!(ddd().args(["render", "--plane", "xy", "--input"]).arg(&net).arg("--output").arg(&svg).status().unwrap().success());
    assert_eq!(fs::read_to_string(&svg).unwrap().matches("<path").count(), 2);
}
