use std::path::Path;
use std::process::Command;

use hill_circuits::cli::{run_from, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};

const G4: &str = include_str!("../recipes/g4.toml");

fn run(args: &[&str]) -> (i32, String, String) {
    run_from(std::iter::once("hillc").chain(args.iter().copied()))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn validate_flags_duplicate_edges() {
    let dir = tempfile::tempdir().unwrap();
    let bad = G4.replace(
        "{ i = 2, j = 4, bath = \"h\" },",
        "{ i = 2, j = 4, bath = \"h\" },\n    { i = 4, j = 2, bath = \"c\" },",
    );
    let path = write(dir.path(), "dup.toml", &bad);
    let (code, out, _) = run(&["validate", "--graph", &path]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(out.contains("duplicates edge #5"), "{out}");
}

#[test]
fn validate_names_the_unbalanced_edge() {
    let dir = tempfile::tempdir().unwrap();
    let bad = G4.replace(
        "{ i = 2, j = 3, bath = \"w\" }",
        "{ i = 2, j = 3, bath = \"w\", rate_up = 1.0, rate_down = 1.0 }",
    );
    let path = write(dir.path(), "pcd.toml", &bad);
    let (code, out, _) = run(&["validate", "--graph", &path]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(out.contains("edge #3"), "{out}");
    let (code, _, err) = run(&["decompose", "--graph", &path]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("edge #3"), "{err}");
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "broken.toml",
        "schema = 1\nlevels = [\n  { energy = \"x\" },\n]\n",
    );
    let (code, _, err) = run(&["validate", "--graph", &path]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["decompose", "--model", "G9"]).0, EXIT_USAGE);
    assert_eq!(
        run(&["decompose", "--model", "G4", "--graph", "x.toml"]).0,
        EXIT_USAGE
    );
    assert_eq!(run(&["scan"]).0, EXIT_USAGE);
    let (code, _, err) = run(&["decompose", "--model", "G4B:2"]);
    assert_eq!(code, EXIT_USAGE);
    let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["exit_code"], EXIT_USAGE);
}

#[test]
fn decompose_writes_one_row_per_circuit() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g4.toml", G4);
    let out = dir.path().join("out");
    let (code, stdout, err) = run(&[
        "decompose",
        "--graph",
        &graph,
        "--check",
        "--schnakenberg",
        "--kalpazidou",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(stdout.starts_with("wrote"));
    let csv = std::fs::read_to_string(out.join("circuits.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    let totals: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("totals.json")).unwrap()).unwrap();
    assert_eq!(totals["mode"], "transformer");
    assert!(totals["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"] == true));
    assert!(out.join("alt.csv").exists());
}

#[test]
fn graph_file_and_model_agree() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g4.toml", G4);
    let (_, a, _) = run(&["decompose", "--graph", &graph]);
    let (_, b, _) = run(&["decompose", "--model", "G4", "--preset", "fig5", "--t", "1"]);
    let (a, b): (serde_json::Value, serde_json::Value) = (
        serde_json::from_str(&a).unwrap(),
        serde_json::from_str(&b).unwrap(),
    );
    assert_eq!(a["baths"], b["baths"]);
    assert_eq!(a["entropy"], b["entropy"]);
}

#[test]
fn equilibrium_decomposes_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let eq = G4
        .replace("temperature = 7.0", "temperature = 5.0")
        .replace("temperature = 6.0", "temperature = 5.0");
    let graph = write(dir.path(), "eq.toml", &eq);
    let (code, out, err) = run(&["decompose", "--graph", &graph, "--check"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["entropy"], 0.0);
}

#[test]
fn scan_resumes_from_existing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "scan", "--preset", "fig5", "--model", "G3B:1", "--sizes", "1,2,3", "--t", "1,10", "--out",
        out,
    ];
    let (code, stdout, _) = run(&args);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("6 rows (0 reused, 0 failed)"), "{stdout}");
    let first = std::fs::read(dir.path().join("scan.csv")).unwrap();
    let (code, stdout, _) = run(&args);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("6 rows (6 reused, 0 failed)"), "{stdout}");
    assert_eq!(std::fs::read(dir.path().join("scan.csv")).unwrap(), first);

    // a partial file is completed in grid order
    let text = String::from_utf8(first.clone()).unwrap();
    let kept: Vec<&str> = text
        .lines()
        .enumerate()
        .filter(|(k, _)| k % 2 == 0)
        .map(|(_, l)| l)
        .collect();
    std::fs::write(dir.path().join("scan.csv"), kept.join("\n") + "\n").unwrap();
    let (_, stdout, _) = run(&args);
    assert!(stdout.contains("6 rows (3 reused, 0 failed)"), "{stdout}");
    assert_eq!(std::fs::read(dir.path().join("scan.csv")).unwrap(), first);
}

#[test]
fn scan_failures_are_rows_and_exit_numeric() {
    let (code, out, _) = run(&["scan", "--model", "G4B:1", "--sizes", "1,2", "--t", "1"]);
    assert_eq!(code, EXIT_NUMERIC);
    let mut lines = out.lines();
    let header = lines.next().unwrap();
    let err_col = header.split(',').position(|c| c == "error").unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0][err_col].is_empty());
    assert!(rows[1][err_col].contains("square"));
}

#[test]
fn empty_grid_writes_header_only() {
    let (code, out, _) = run(&["scan", "--model", "G3B:1", "--sizes", "1,2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 1);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for jobs in ["1", "4"] {
        let out = dir.path().join(jobs);
        let o = out.to_str().unwrap();
        let (code, _, err) = run(&[
            "--jobs",
            jobs,
            "decompose",
            "--model",
            "G4B:9",
            "--check",
            "--schnakenberg",
            "--out",
            o,
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        let (code, _, _) = run(&[
            "--jobs", jobs, "scan", "--model", "G4L:1", "--sizes", "1,2,3", "--t", "1,10", "--out",
            o,
        ]);
        assert_eq!(code, EXIT_OK);
        outputs.push(
            ["circuits.csv", "totals.json", "alt.csv", "scan.csv"]
                .map(|f| std::fs::read(out.join(f)).unwrap()),
        );
    }
    assert!(outputs[0] == outputs[1]);
}

#[test]
fn recipes_run() {
    let dir = tempfile::tempdir().unwrap();
    let recipe = concat!(env!("CARGO_MANIFEST_DIR"), "/recipes/fig5.toml");
    let (code, stdout, err) = run(&[
        "--config",
        recipe,
        "scan",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    for name in ["g4b", "g4l", "g3b"] {
        assert!(stdout.contains(&format!("{name}:")));
        assert!(dir.path().join(format!("{name}.json")).exists());
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_hillc");
    let st = Command::new(bin)
        .args(["decompose", "--model", "G4"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(EXIT_OK));
    let v: serde_json::Value = serde_json::from_slice(&st.stdout).unwrap();
    assert_eq!(v["n"], 4);
    let st = Command::new(bin)
        .args(["validate", "--graph", "/nonexistent.toml"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(EXIT_USAGE));
    assert!(!st.stderr.is_empty());
}
