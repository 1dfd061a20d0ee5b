//! Determinism check: every bundled scenario produces byte-identical output
//! across runs and matches the committed golden files.

use std::path::PathBuf;
use std::process::Command;

fn repo_path(rel: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.pop();
    p.pop();
    p.push(rel);
    p.to_str().unwrap().to_owned()
}

fn run(args: &[String]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_essmin"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn cli_outputs_are_deterministic_and_match_goldens() {
    let cases: Vec<(&str, Vec<String>)> = vec![
        (
            "analyze_canonical_p1.txt",
            vec!["analyze".into(), repo_path("data/canonical_p1.json")],
        ),
        (
            "analyze_example2.txt",
            vec!["analyze".into(), repo_path("data/example2.json")],
        ),
        (
            "analyze_tent.txt",
            vec!["analyze".into(), repo_path("data/tent.json")],
        ),
        (
            "analyze_shift_half.txt",
            vec!["analyze".into(), repo_path("data/shift_half.json")],
        ),
        (
            "analyze_example2_structured.json",
            vec![
                "analyze".into(),
                repo_path("data/example2.json"),
                "--format".into(),
                "structured".into(),
            ],
        ),
        (
            "equidist_canonical_p1.txt",
            vec!["equidist".into(), repo_path("data/canonical_p1.json")],
        ),
        (
            "equidist_tent.txt",
            vec!["equidist".into(), repo_path("data/tent.json")],
        ),
        (
            "equidist_shift_half.txt",
            vec!["equidist".into(), repo_path("data/shift_half.json")],
        ),
        (
            "equidist_example2.txt",
            vec![
                "equidist".into(),
                repo_path("data/example2.json"),
                "--along".into(),
                repo_path("data/canonical_p1.json"),
                "--poly".into(),
                "x - 2".into(),
            ],
        ),
        (
            "demo_canonical_p1.csv",
            vec![
                "demo".into(),
                repo_path("data/canonical_p1.json"),
                "--length".into(),
                "10".into(),
                "--format".into(),
                "csv".into(),
            ],
        ),
        (
            "demo_example2.csv",
            vec![
                "demo".into(),
                repo_path("data/example2.json"),
                "--along".into(),
                repo_path("data/canonical_p1.json"),
                "--length".into(),
                "10".into(),
                "--format".into(),
                "csv".into(),
            ],
        ),
        (
            "demo_example2.txt",
            vec![
                "demo".into(),
                repo_path("data/example2.json"),
                "--along".into(),
                repo_path("data/canonical_p1.json"),
                "--length".into(),
                "10".into(),
            ],
        ),
    ];
    for (golden, args) in &cases {
        let first = run(args);
        let second = run(args);
        assert_eq!(first, second, "{golden}: output differs between runs");
        let want =
            std::fs::read(repo_path(&format!("crates/cli/tests/golden/{golden}"))).unwrap();
        assert_eq!(
            first,
            want,
            "{golden}: output differs from golden file\n--- got ---\n{}",
            String::from_utf8_lossy(&first)
        );
    }
    println!(
        "[acceptance 10] PASS: {} CLI invocations byte-identical across runs and goldens",
        cases.len()
    );
}

#[test]
fn exit_codes_follow_contract() {
    let bad = Command::new(env!("CARGO_BIN_EXE_essmin"))
        .args(["analyze", &repo_path("data/no_such_file.json")])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));

    // csv is only defined for demo: semantic error
    let sem = Command::new(env!("CARGO_BIN_EXE_essmin"))
        .args([
            "analyze",
            &repo_path("data/canonical_p1.json"),
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert_eq!(sem.status.code(), Some(3));

    // demo needs a wide divisor: precondition violation
    let pre = Command::new(env!("CARGO_BIN_EXE_essmin"))
        .args(["demo", &repo_path("data/tent.json")])
        .output()
        .unwrap();
    assert_eq!(pre.status.code(), Some(4));
}

#[test]
fn out_flag_writes_same_bytes() {
    let dir = std::env::temp_dir().join("essmin-golden-out");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("analyze.txt");
    let out = Command::new(env!("CARGO_BIN_EXE_essmin"))
        .args([
            "analyze",
            &repo_path("data/canonical_p1.json"),
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let written = std::fs::read(&path).unwrap();
    let golden =
        std::fs::read(repo_path("crates/cli/tests/golden/analyze_canonical_p1.txt")).unwrap();
    assert_eq!(written, golden);
}
