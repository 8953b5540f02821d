use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_labelrank"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &[&str], code: i32) -> String {
    let out = run(dir, args);
    assert_eq!(out.status.code(), Some(code), "{args:?}");
    String::from_utf8(out.stderr).unwrap()
}

const DATA: &str = "#L=4 d=2\n2,1 | 1:1\n3,4,1,2 | 2:1\n4 | 1:0.5 2:0.5\n";

fn key(text: &str, name: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{name}=")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn perfect_and_reversed_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("data.txt"), DATA).unwrap();
    fs::write(d.join("good.pred"), "2,1,3,4\n3,4,1,2\n4,1,2,3\n").unwrap();
    fs::write(d.join("bad.pred"), "4,3,1,2\n2,1,4,3\n3,2,1,4\n").unwrap();
    ok(
        d,
        &[
            "evaluate",
            "--predictions",
            "good.pred",
            "--data",
            "data.txt",
            "--out-prefix",
            "good",
        ],
    );
    ok(
        d,
        &[
            "evaluate",
            "--predictions",
            "bad.pred",
            "--data",
            "data.txt",
            "--out-prefix",
            "bad",
        ],
    );
    let good = fs::read_to_string(d.join("good.txt")).unwrap();
    let bad = fs::read_to_string(d.join("bad.txt")).unwrap();
    assert_eq!(key(&good, "dis_error"), 0.0);
    assert_eq!(key(&bad, "dis_error"), 1.0);
    let csv = fs::read_to_string(d.join("good.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(
        rows[3].split(',').nth(2).unwrap().parse::<f64>().unwrap() == 1.0,
        "{csv}"
    );
}

#[test]
fn topk_rows_follow_flag() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("data.txt"), DATA).unwrap();
    fs::write(d.join("p.txt"), "2,1,3,4\n3,4,1,2\n4,1,2,3\n").unwrap();
    ok(
        d,
        &[
            "evaluate",
            "--predictions",
            "p.txt",
            "--data",
            "data.txt",
            "--topk-max",
            "2",
            "--out-prefix",
            "e",
        ],
    );
    assert_eq!(
        fs::read_to_string(d.join("e.csv")).unwrap().lines().count(),
        3
    );
    fails(
        d,
        &[
            "evaluate",
            "--predictions",
            "p.txt",
            "--data",
            "data.txt",
            "--topk-max",
            "5",
            "--out-prefix",
            "e",
        ],
        1,
    );
}

#[test]
fn featurize_with_ad_views_has_wider_layout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &["gen", "--users", "300", "--labels", "50", "--out-dir", "g"],
    );
    for (flag, dim) in [(None, 411), (Some("--adv"), 511)] {
        let mut args = vec![
            "featurize",
            "--events",
            "g/events.tsv",
            "--demographics",
            "g/demographics.tsv",
            "--t-features",
            "90",
            "--t-labels",
            "120",
            "--out",
            "data.txt",
        ];
        args.extend(flag);
        ok(d, &args);
        let header = fs::read_to_string(d.join("data.txt"))
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        assert_eq!(header, format!("#L=50 d={dim}"));
    }
}

#[test]
fn bad_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("data.txt"), DATA).unwrap();
    let err = fails(d, &["gen", "--alpha", "1.5", "--out-dir", "g"], 2);
    assert!(err.starts_with("error:"), "{err}");
    fails(
        d,
        &[
            "train",
            "--data",
            "missing.txt",
            "--algo",
            "lr",
            "--out",
            "m",
        ],
        1,
    );
    fails(
        d,
        &[
            "cv",
            "--data",
            "data.txt",
            "--folds",
            "1",
            "--out-prefix",
            "cv",
        ],
        1,
    );
    fails(
        d,
        &[
            "train", "--data", "data.txt", "--algo", "ib-mal", "--out", "m",
        ],
        1,
    );
    fails(
        d,
        &[
            "train", "--data", "data.txt", "--algo", "nonsense", "--out", "m",
        ],
        2,
    );
    fs::write(d.join("broken.txt"), "#L=2 d=2\n3 | 1:1\n").unwrap();
    let err = fails(
        d,
        &[
            "train",
            "--data",
            "broken.txt",
            "--algo",
            "lr",
            "--out",
            "m",
        ],
        1,
    );
    assert!(err.contains("broken.txt"), "{err}");
}
