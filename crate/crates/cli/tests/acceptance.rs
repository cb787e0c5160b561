//! CLI acceptance: determinism of CSV output (criterion 11) plus exit-code
//! and format smoke tests against the built binary.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thetabound"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn criterion_11_byte_identical_csv() {
    let cases: Vec<Vec<&str>> = vec![
        vec![
            "theta",
            "--gen",
            "paley:13",
            "--format",
            "csv",
            "--no-time",
        ],
        vec![
            "search",
            "--gen",
            "er:12:0.4:3",
            "--k",
            "3",
            "--rounds",
            "2",
            "--seed",
            "5",
            "--format",
            "csv",
            "--no-time",
        ],
        vec![
            "compare",
            "--gen",
            "er:9:0.45:7",
            "--k",
            "2",
            "--all-subsets",
            "--format",
            "csv",
            "--no-time",
        ],
        vec![
            "level",
            "--gen",
            "cycle:7",
            "--k",
            "3",
            "--hierarchy",
            "cesh",
            "--format",
            "csv",
            "--no-time",
        ],
    ];
    for args in cases {
        let a = run(&args);
        let b = run(&args);
        assert!(
            a.status.success(),
            "command {:?} failed: {}",
            args,
            String::from_utf8_lossy(&a.stderr)
        );
        assert_eq!(
            a.stdout, b.stdout,
            "output of {args:?} differs between runs"
        );
    }
    println!("ACCEPTANCE 11 PASS: repeated CLI runs with fixed seed and --no-time are byte-identical");
}

#[test]
fn exit_codes() {
    // usage error: unknown flag
    let out = run(&["theta", "--nonsense"]);
    assert_eq!(out.status.code(), Some(1));
    // usage error: unknown generator
    let out = run(&["theta", "--gen", "frobnicate:9"]);
    assert_eq!(out.status.code(), Some(1));
    // missing input
    let out = run(&["theta"]);
    assert_eq!(out.status.code(), Some(1));
    // success
    let out = run(&["alpha", "--gen", "cycle:5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn theta_formulations_agree_in_csv() {
    let out = run(&["theta", "--gen", "paley:13", "--format", "csv", "--no-time"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "name,n,m,formulation,k_or_J,bound,alpha,solve_s,iters,status"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][3], "extended");
    assert_eq!(rows[1][3], "trace");
    let ext: f64 = rows[0][5].parse().unwrap();
    let tra: f64 = rows[1][5].parse().unwrap();
    assert!((ext - tra).abs() <= 1e-5, "extended {ext} vs trace {tra}");
    // θ(Paley13) = √13
    assert!((ext - 13f64.sqrt()).abs() < 1e-4);
}

#[test]
fn facets_output() {
    let out = run(&["facets", "--k", "3", "--format", "pretty"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("16 facets"), "{text}");
    // k=6 without the flag is refused
    let out = run(&["facets", "--k", "6"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn json_output_parses() {
    let out = run(&[
        "bound",
        "--gen",
        "cycle:5",
        "--subsets",
        "1,2,3,4,5",
        "--format",
        "json",
        "--no-time",
    ]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = value.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    // full-order constraint closes the gap to α(C5) = 2
    let bound = rows[0]["bound"].as_f64().unwrap();
    assert!((bound - 2.0).abs() < 1e-5);
    assert_eq!(rows[0]["alpha"].as_u64(), Some(2));
}

#[test]
fn dimacs_file_input() {
    let dir = std::env::temp_dir().join("thetabound-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("p5.col");
    std::fs::write(&path, "c path\np edge 5 4\ne 1 2\ne 2 3\ne 3 4\ne 4 5\n").unwrap();
    let out = run(&[
        "theta",
        "--file",
        path.to_str().unwrap(),
        "--format",
        "csv",
        "--no-time",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // P5 is perfect with α = 3
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let bound: f64 = row[5].parse().unwrap();
    assert!((bound - 3.0).abs() < 1e-5);
    assert_eq!(row[6], "3");
}

#[test]
fn batch_runs_every_line() {
    let dir = std::env::temp_dir().join("thetabound-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("batch.txt");
    std::fs::write(&path, "# two instances\ncycle:5\nempty:4\n").unwrap();
    let out = run(&[
        "batch",
        "--file",
        path.to_str().unwrap(),
        "--format",
        "csv",
        "--no-time",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 4); // header + 2 rows per instance
}

#[test]
fn ieq_export_written() {
    let dir = std::env::temp_dir().join("thetabound-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("k2.ieq");
    let out = run(&["facets", "--k", "2", "--ieq", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("DIM = 3"));
    assert_eq!(text.matches("<=").count(), 4);
}
