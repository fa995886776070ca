use std::path::Path;
use std::process::{Command, Output};

fn kgb(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgbounds"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(kgb(&["frobnicate"], dir.path()).status.code(), Some(64));
    assert_eq!(kgb(&["facet", "--n"], dir.path()).status.code(), Some(64));
    assert_eq!(kgb(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let o = kgb(&["facet", "--config", "nosuch", "--n", "1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nosuch"));
    std::fs::write(dir.path().join("m.txt"), "2 2\n1 1\n").unwrap();
    let o = kgb(&["solve-exact", "--in", "m.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn catalog_lists_every_entry() {
    let dir = tempfile::tempdir().unwrap();
    let o = kgb(&["catalog", "--json"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let ids: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids.len(), 17);
    for id in ["hexagon", "24cell", "600cell", "E8", "ETF-28", "E7+ETF-91"] {
        assert!(ids.contains(&id), "{id}");
    }
}

#[test]
fn solve_exact_chsh() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("chsh.txt"), "2 2\n1 1\n1 -1\n").unwrap();
    let o = kgb(&["solve-exact", "--in", "chsh.txt"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["value_f64"], 2.0);
    assert_eq!(v["proof_flag"], "optimal");
    let o = kgb(
        &[
            "solve-heur",
            "--in",
            "chsh.txt",
            "--n",
            "2",
            "--restarts",
            "50",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 8f64.sqrt()).abs() < 1e-6);
}

#[test]
fn facet_is_deterministic_and_reported() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "facet", "--config", "24cell", "--n", "1", "--seed", "3", "--out", "run", "--store",
        "store",
    ];
    let a = kgb(&args, dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let first = std::fs::read(dir.path().join("run/facet.json")).unwrap();
    // The second run stores the identical certificate again, which is a no-op.
    let b = kgb(&args, dir.path());
    assert!(b.status.success(), "{}", String::from_utf8_lossy(&b.stderr));
    assert_eq!(
        first,
        std::fs::read(dir.path().join("run/facet.json")).unwrap()
    );
    assert!(String::from_utf8_lossy(&a.stderr).contains("ratio 7/5"));

    let o = kgb(
        &["report", "--store", "store", "--n", "1", "--out", "rep"],
        dir.path(),
    );
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("rep/report.csv")).unwrap();
    assert!(
        csv.lines()
            .any(|l| l.starts_with("4,1,") && l.contains("facet-24cell")),
        "{csv}"
    );
}

#[test]
fn best_known_chain() {
    let dir = tempfile::tempdir().unwrap();
    let o = kgb(&["bound", "--best", "--d", "2"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("1.414214"), "{}", stdout(&o));
}

#[test]
fn shipped_run_files_load() {
    let runs = Path::new(env!("CARGO_MANIFEST_DIR")).join("runs");
    let mut count = 0;
    for entry in std::fs::read_dir(runs).unwrap() {
        let path = entry.unwrap().path();
        let dir = tempfile::tempdir().unwrap();
        let o = kgb(&["gen", "--run", path.to_str().unwrap()], dir.path());
        assert!(
            o.status.success(),
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&o.stderr)
        );
        count += 1;
    }
    assert!(count >= 5);
}
