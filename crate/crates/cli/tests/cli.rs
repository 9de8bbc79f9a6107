use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ambp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ambp")).args(args).current_dir(dir).output().expect("run ambp")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn build(dir: &Path, n: u32, function: &str, file: &str) {
    let out = ambp(&["build", "--n", &n.to_string(), "--function", function, "--out", file], dir);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn build_reports_size_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let out = ambp(&["build", "--n", "2", "--function", "xor", "--out", "p.ambp"], dir.path());
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["total_nodes"], 224);
    assert_eq!(report["m"], 8);
    assert_eq!(report["per_copy"], "28");
    assert_eq!(report["within_total_bound"], true);
    build(dir.path(), 2, "table:0110", "q.ambp");
    assert_eq!(fs::read(dir.path().join("p.ambp")).unwrap(), fs::read(dir.path().join("q.ambp")).unwrap());
}

#[test]
fn guard_and_usage_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = ambp(&["build", "--n", "5", "--function", "xor"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bytes"));
    let out = ambp(&["build", "--n", "4", "--function", "xor", "--memory-limit", "1000"], dir.path());
    assert_eq!(code(&out), 3);
    assert_eq!(code(&ambp(&["build", "--n", "2", "--function", "nand"], dir.path())), 2);
    assert_eq!(code(&ambp(&["build", "--n", "2", "--function", "table:01"], dir.path())), 2);
    assert_eq!(code(&ambp(&["build", "--n", "2", "--function", "maj"], dir.path())), 2);
    assert_eq!(code(&ambp(&["frobnicate"], dir.path())), 2);
    assert_eq!(code(&ambp(&["verify", "--in", "missing.ambp", "--function", "xor"], dir.path())), 2);
}

#[test]
fn verify_fresh_build_passes_all_checks() {
    let dir = TempDir::new().unwrap();
    build(dir.path(), 3, "maj", "p.ambp");
    let out = ambp(&["verify", "--in", "p.ambp", "--function", "maj", "--json"], dir.path());
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let reports = json(&out);
    let names: Vec<&str> = reports.as_array().unwrap().iter().map(|r| r["check"].as_str().unwrap()).collect();
    assert_eq!(names, ["structure", "copies", "disjoint", "semantics", "schedule", "traffic", "bijection", "fast"]);
    assert!(reports.as_array().unwrap().iter().all(|r| r["pass"] == true));
}

#[test]
fn verify_wrong_function_shows_witness() {
    let dir = TempDir::new().unwrap();
    build(dir.path(), 2, "xor", "p.ambp");
    let out = ambp(&["verify", "--in", "p.ambp", "--function", "and", "--checks", "copies", "--json"], dir.path());
    assert_eq!(code(&out), 1);
    let w = &json(&out)[0]["witness"];
    assert_eq!(w["start_index"], 1);
    assert_eq!(w["input"], "10");
    assert_eq!(w["expected"], "reject 1");
    assert_eq!(w["got"], "accept 1");
}

#[test]
fn verify_catches_flipped_edge() {
    let dir = TempDir::new().unwrap();
    build(dir.path(), 2, "or", "p.ambp");
    let text = fs::read_to_string(dir.path().join("p.ambp")).unwrap();
    let start: u32 =
        text.lines().find_map(|l| l.strip_prefix("starts ")).unwrap().split(' ').next().unwrap().parse().unwrap();
    let mut flipped = false;
    let mutated: Vec<String> = text
        .lines()
        .map(|line| {
            let parts: Vec<&str> = line.split(' ').collect();
            if !flipped && parts[0] == "edge" && parts[1] == start.to_string() && parts[3] == "1" {
                flipped = true;
                let dst: u32 = parts[4].parse().unwrap();
                return format!("edge {} {} {} {}", parts[1], parts[2], parts[3], dst ^ 1);
            }
            line.to_string()
        })
        .collect();
    assert!(flipped);
    fs::write(dir.path().join("m.ambp"), mutated.join("\n") + "\n").unwrap();
    let out = ambp(&["verify", "--in", "m.ambp", "--function", "or"], dir.path());
    assert_eq!(code(&out), 1, "{}", stdout(&out));
    assert!(stdout(&out).contains("witness"));
}

#[test]
fn eval_hand_traces() {
    let dir = TempDir::new().unwrap();
    build(dir.path(), 1, "table:01", "p.ambp");
    let out = ambp(&["eval", "--in", "p.ambp", "--start", "1", "--x", "1"], dir.path());
    assert_eq!((code(&out), stdout(&out).trim()), (0, "accept 1"));
    let out = ambp(&["eval", "--in", "p.ambp", "--start", "2", "--x", "0"], dir.path());
    assert_eq!((code(&out), stdout(&out).trim()), (0, "reject 2"));
    let out = ambp(&["eval", "--in", "p.ambp", "--start", "1", "--x", "1", "--trace"], dir.path());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].contains("FWD1@0"));
    assert_eq!(code(&ambp(&["eval", "--in", "p.ambp", "--start", "0", "--x", "1"], dir.path())), 2);
    assert_eq!(code(&ambp(&["eval", "--in", "p.ambp", "--start", "3", "--x", "1"], dir.path())), 2);
    assert_eq!(code(&ambp(&["eval", "--in", "p.ambp", "--start", "1", "--x", "10"], dir.path())), 2);
}

#[test]
fn stats_and_pruned_verify() {
    let dir = TempDir::new().unwrap();
    let out = ambp(&["build", "--n", "2", "--function", "and", "--prune", "--out", "p.ambp"], dir.path());
    assert_eq!(code(&out), 0);
    let out = ambp(&["stats", "--in", "p.ambp", "--json"], dir.path());
    let stats = json(&out);
    assert_eq!(stats["size"]["pruned"], true);
    assert_eq!(stats["size"]["dead_sink_count"], 0);
    assert_eq!(stats["read_schedule"], serde_json::json!([1, 2, 2, 1, 1, 2, 2, 1]));
    let out = ambp(&["verify", "--in", "p.ambp", "--function", "and"], dir.path());
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(!stdout(&out).contains("semantics"));
    let out = ambp(&["verify", "--in", "p.ambp", "--function", "and", "--checks", "semantics"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn union_doubles_copies() {
    let dir = TempDir::new().unwrap();
    build(dir.path(), 2, "xor", "a.ambp");
    build(dir.path(), 2, "xor", "b.ambp");
    let out = ambp(&["union", "--a", "a.ambp", "--b", "b.ambp", "--out", "u.ambp"], dir.path());
    assert_eq!(code(&out), 0);
    let summary = json(&out);
    assert_eq!((summary["m"].as_u64(), summary["total_nodes"].as_u64()), (Some(16), Some(448)));
    let out = ambp(&["verify", "--in", "u.ambp", "--function", "xor", "--checks", "copies,disjoint"], dir.path());
    assert_eq!(code(&out), 0);
    build(dir.path(), 1, "xor", "c.ambp");
    assert_eq!(code(&ambp(&["union", "--a", "a.ambp", "--b", "c.ambp"], dir.path())), 2);
}

#[test]
fn export_dot_is_deterministic() {
    let dir = TempDir::new().unwrap();
    build(dir.path(), 2, "xor", "p.ambp");
    let a = ambp(&["export-dot", "--in", "p.ambp"], dir.path());
    let b = ambp(&["export-dot", "--in", "p.ambp"], dir.path());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("digraph"));
    let out = ambp(&["export-dot", "--in", "p.ambp", "--segment", "fwd1", "--levels", "0..0"], dir.path());
    assert_eq!(stdout(&out).matches("shape=").count(), 16);
    assert_eq!(code(&ambp(&["export-dot", "--in", "p.ambp", "--levels", "3..1"], dir.path())), 2);
}

#[test]
fn demo_writes_dot_files() {
    let dir = TempDir::new().unwrap();
    let first = ambp(&["demo", "--n", "2", "--out-dir", "d"], dir.path());
    assert_eq!(code(&first), 0);
    let text = stdout(&first);
    assert_eq!(text.matches("matches").count(), 3);
    assert!(!text.contains("DIFFERS"));
    let fwd1 = fs::read_to_string(dir.path().join("d/fwd1.dot")).unwrap();
    assert_eq!(fwd1.matches("shape=").count(), 3 * 16);
    let full1 = fs::read(dir.path().join("d/full.dot")).unwrap();
    let second = ambp(&["demo", "--n", "2", "--out-dir", "d"], dir.path());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(full1, fs::read(dir.path().join("d/full.dot")).unwrap());
    assert!(dir.path().join("d/fwd2.dot").exists());
    assert_eq!(code(&ambp(&["demo", "--n", "3"], dir.path())), 2);
}

fn measure_file(dir: &Path, name: &str, n: u32, value: impl Fn(u64) -> String) {
    let mut text = format!("MEASURE v1 n {n}\n");
    for id in 0..1u64 << (1 << n) {
        text.push_str(&format!("{id:x} {}\n", value(id)));
    }
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn audit_measure() {
    let dir = TempDir::new().unwrap();
    measure_file(dir.path(), "one.m", 2, |_| "1".into());
    let out = ambp(&["build", "--n", "2", "--function", "xor", "--prune", "--out", "p.ambp"], dir.path());
    assert_eq!(code(&out), 0);
    let out =
        ambp(&["audit-measure", "--measure", "one.m", "--bp", "p.ambp", "--function", "xor", "--json"], dir.path());
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let report = json(&out);
    assert_eq!(report["branching"], serde_json::json!([]));
    assert_eq!(report["ceiling"]["pass"], true);
    assert_eq!(report["accounting"]["pass"], true);

    measure_file(dir.path(), "dep.m", 2, |id| {
        let t: Vec<u64> = (0..4).map(|k| (id >> k) & 1).collect();
        let d1 = u64::from(t[0] != t[1] || t[2] != t[3]);
        let d2 = u64::from(t[0] != t[2] || t[1] != t[3]);
        (d1 + d2).to_string()
    });
    let out = ambp(&["audit-measure", "--measure", "dep.m", "--kind", "submodular", "--json"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(!json(&out)["submodular"].as_array().unwrap().is_empty());

    measure_file(dir.path(), "neg.m", 1, |id| if id == 0 { "-1/2".into() } else { "1".into() });
    assert_eq!(code(&ambp(&["audit-measure", "--measure", "neg.m"], dir.path())), 2);
    measure_file(dir.path(), "big.m", 4, |_| "1".into());
    assert_eq!(code(&ambp(&["audit-measure", "--measure", "big.m"], dir.path())), 2);
}
