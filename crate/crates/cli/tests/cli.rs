use std::path::Path;
use std::process::{Command, Output};

use locktree_core::document::{Document, Report};

fn locktree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locktree"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// The n = 5 document at the published lengths.
fn published_doc(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("published.json");
    let o = locktree(&[
        "construct",
        "--n",
        "5",
        "--l1",
        "0.9511",
        "--l2",
        "0.299",
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    path
}

#[test]
fn construct_prints_the_ordering_chain() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    let o = locktree(&[
        "construct",
        "--n",
        "5",
        "--l1",
        "0.9511",
        "--l2",
        "0.299",
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("71.997984 < 71.998224 < 72.000000 < 72.008064"), "{out}");
    let doc = Document::load(&path).unwrap();
    assert!(doc.configurations.contains_key("locked") && doc.configurations.contains_key("open"));
    let Some(Report::Constraints(r)) = doc.reports.get("constraints") else {
        panic!("no constraint report")
    };
    assert!(r.all_pass());
}

#[test]
fn construct_from_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    for (n, eps) in [("5", "0.01"), ("8", "0.2")] {
        let path = dir.path().join(format!("{n}.json"));
        let o = locktree(&["construct", "--n", n, "--epsilon-deg", eps, "--out", s(&path)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
}

#[test]
fn construct_rejects_small_n() {
    let dir = tempfile::tempdir().unwrap();
    let o = locktree(&["construct", "--n", "4", "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("n > 4"));
}

#[test]
fn construct_names_failing_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let o = locktree(&[
        "construct",
        "--n",
        "5",
        "--l1",
        "0.9511",
        "--l2",
        "0.05",
        "--out",
        s(&dir.path().join("x.json")),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("constraint l2 > sinβcosβ fails"), "{}", stderr(&o));
    let o = locktree(&[
        "construct",
        "--n",
        "7",
        "--epsilon-deg",
        "0.5",
        "--out",
        s(&dir.path().join("x.json")),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = published_doc(dir.path());
    let o = locktree(&["verify", s(&path)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("locked: simple [RRRRR]"));
}

#[test]
fn verify_catches_perturbed_coordinate() {
    let dir = tempfile::tempdir().unwrap();
    let path = published_doc(dir.path());
    let mut doc = Document::load(&path).unwrap();
    doc.configurations.get_mut("locked").unwrap()[3].x += 0.5;
    doc.save(&path).unwrap();
    let o = locktree(&["verify", s(&path)]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("locked: FAIL link B0-C0 has length"), "{out}");
}

#[test]
fn verify_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&locktree(&["verify", s(&empty)])), 3);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"version\": 1,\n  nope\n}").unwrap();
    let o = locktree(&["verify", s(&bad)]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("line 3"));
    assert_eq!(code(&locktree(&["verify", s(&dir.path().join("missing.json"))])), 3);
}

#[test]
fn probe_budget_zero_and_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let path = published_doc(dir.path());
    let o = locktree(&["probe", s(&path), "--budget", "0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("best_min_angle 72.000000°"));
    for seed in ["1", "2"] {
        let report = dir.path().join(format!("r{seed}.json"));
        let o = locktree(&[
            "probe",
            s(&path),
            "--strategy",
            "squeeze",
            "--petal",
            "0",
            "--budget",
            "300",
            "--seed",
            seed,
            "--report",
            s(&report),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(stdout(&o).contains("no violation found at step size 0.001, budget 300"));
        let r: Report = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        let Report::Probe(r) = r else {
            panic!("not a probe report")
        };
        assert!(r.best_min_angle > 71.997984f64.to_radians());
    }
}

#[test]
fn probe_needs_locked() {
    let dir = tempfile::tempdir().unwrap();
    let path = published_doc(dir.path());
    let mut doc = Document::load(&path).unwrap();
    doc.configurations.remove("locked");
    doc.save(&path).unwrap();
    assert_eq!(code(&locktree(&["probe", s(&path), "--budget", "5"])), 2);
}

#[test]
fn render_lines_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let path = published_doc(dir.path());
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    for out in [&a, &b] {
        let o = locktree(&[
            "render",
            s(&path),
            "--config",
            "locked",
            "--labels",
            "--highlight",
            "0,3",
            "--out",
            s(out),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let svg = std::fs::read(&a).unwrap();
    assert_eq!(svg, std::fs::read(&b).unwrap());
    let text = String::from_utf8(svg).unwrap();
    assert_eq!(text.matches("<line ").count(), 15);
    assert!(text.contains(">B3</text>"));
    let o = locktree(&["render", s(&path), "--config", "nope", "--out", s(&a)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn chain_documents() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain.json");
    let o = locktree(&["chain", "--k", "3", "--out", s(&path)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc = Document::load(&path).unwrap();
    assert_eq!(doc.configurations.len(), 8);
    assert_eq!(doc.tree.link_count(), 74);
    assert_eq!(code(&locktree(&["verify", s(&path)])), 0);
    let svg = dir.path().join("chain.svg");
    assert_eq!(
        code(&locktree(&["render", s(&path), "--config", "010", "--out", s(&svg)])),
        0
    );
    assert_eq!(std::fs::read_to_string(&svg).unwrap().matches("<line ").count(), 74);

    let one = dir.path().join("one.json");
    assert_eq!(code(&locktree(&["chain", "--k", "1", "--out", s(&one)])), 0);
    assert_eq!(Document::load(&one).unwrap().tree.link_count(), 24);

    let o = locktree(&["chain", "--k", "5", "--out", s(&one)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("2^k"));
}

#[test]
fn cspace_census_and_unlock() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("census.json");
    let o = locktree(&["cspace", "--grid", "60", "--report", s(&report)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let Report::Census(c) = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap() else {
        panic!("not a census")
    };
    let theta_m = 71.998224f64.to_radians();
    assert!(c.anchor_component.unwrap().min_theta >= theta_m - 0.5f64.to_radians());

    let o = locktree(&["cspace", "--grid", "60", "--unlock-deg", "100"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("straightened and folded placements connected"));
    assert_eq!(code(&locktree(&["cspace", "--grid", "10"])), 2);
}
