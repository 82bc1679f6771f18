use std::path::Path;
use std::process::{Command, Output};

fn qedpec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qedpec"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// CSV text without the wall-time column.
fn strip_time(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let tag = lines.next().unwrap().to_string();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "wall_time_s").unwrap();
    let mut out = vec![tag, header.join(",")];
    for l in lines {
        let mut f: Vec<&str> = l.split(',').collect();
        f.remove(col);
        out.push(f.join(","));
    }
    out
}

const SWEEP: &str = r#"
task = "sweep"
seed = 11

[code]
n = [6, 10]
T = [1, 2]

[syndrome]
model = "readout"
p_m = [1e-3, 1e-2]

[sampling]
shots = 20000
particles = 512
replicates = 4
pec = "both"
"#;

#[test]
fn sweep_replays_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    std::fs::write(&cfg, SWEEP).unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = qedpec(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let full = strip_time(&a);
    assert_eq!(full.len(), 2 + 16);
    assert_eq!(full, strip_time(&b));

    // cut the second file after five points and resume
    let text = std::fs::read_to_string(&b).unwrap();
    let kept: Vec<&str> = text.lines().take(2 + 5).collect();
    std::fs::write(&b, kept.join("\n") + "\n").unwrap();
    let o = qedpec(&["sweep", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--resume"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("5 points already done"));
    assert_eq!(strip_time(&b), full);

    let o = qedpec(&["sweep", "--config", cfg.to_str().unwrap(), "--seed", "12", "--out", b.to_str().unwrap()]);
    assert!(o.status.success());
    assert_ne!(strip_time(&b), full);
}

#[test]
fn analytic_tasks_write_versioned_csv() {
    let o = qedpec(&["baseline", "--n", "30,100", "--T", "1"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# qedpec-csv v1 costs"));
    assert!(lines.next().unwrap().starts_with("n,T,K,"));
    assert_eq!(lines.count(), 2);

    let o = qedpec(&["toy", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["kind"], "toy");
    assert!(!doc["rows"].as_array().unwrap().is_empty());

    let dir = tempfile::tempdir().unwrap();
    let tables = dir.path().join("tables");
    let o = qedpec(&["compile", "--n", "8", "--T", "2", "--tables", tables.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(tables.join("n8_T2_K1").join("block0000.table").exists());
}

#[test]
fn bad_configs_are_rejected_with_every_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "task = \"sweep\"\n[code]\nn = [5]\nK = 0\n[sampling]\nshots = 0\n").unwrap();
    let o = qedpec(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("K"), "{err}");
    assert!(err.contains("shots"), "{err}");

    std::fs::write(&cfg, "task = \"sweep\"\n[code]\nnn = [6]\n").unwrap();
    let o = qedpec(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nn"));
}

#[test]
fn invalid_points_are_reported_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.csv");
    let o = qedpec(&["sweep", "--n", "200", "--T", "20", "--shots", "1000", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("validity"));
}
