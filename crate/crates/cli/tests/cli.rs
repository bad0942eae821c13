use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heightzeta"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8")
}

/// Data row of a one-row CSV, split into fields.
fn csv_row(text: &str) -> Vec<String> {
    let mut lines = text.lines();
    lines.next().expect("header");
    lines.next().expect("row").split(',').map(str::to_string).collect()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("heightzeta-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).expect("temp file");
    path
}

#[test]
fn height_of_two_three() {
    let out = stdout(&["height", "1", "1", "max", "2", "3"]);
    assert_eq!(out.lines().next(), Some("3"));
    assert!(out.contains("53 bits"));
    assert_eq!(stdout(&["height", "1", "2", "max", "4", "6"]).lines().next(), Some("9"));
    assert_eq!(
        stdout(&["height", "1", "1", "l2", "-2", "3"]).lines().next(),
        Some("sqrt(13)")
    );
}

#[test]
fn theta_of_the_integers() {
    let direct = 1.0
        + 2.0
            * (1..10)
                .map(|k| (-std::f64::consts::PI * (k * k) as f64).exp())
                .sum::<f64>();
    let row = csv_row(&stdout(&["lattice", "theta", "--gram", "I1", "--t", "1"]));
    let value: f64 = row[0].parse().unwrap();
    assert!((value - direct).abs() < 1e-12, "{value}");
    assert!(row[1].parse::<f64>().unwrap() < 2e-12);
    assert_eq!(row[4], "53");
}

#[test]
fn count_up_to_two() {
    assert_eq!(
        csv_row(&stdout(&["count", "--n", "1", "--arch", "max", "--H", "2"])),
        ["2", "8"]
    );
    let out = stdout(&["count", "--n", "2", "--arch", "max", "--H", "1"]);
    assert_eq!(csv_row(&out)[1], "13");
}

#[test]
fn gram_file_matches_inline_identity() {
    let path = temp_file("gram", "# identity\nrank 2\n1 0\n0 1\n");
    let from_file = stdout(&["lattice", "zeta", "--gram", path.to_str().unwrap(), "--s", "3+i"]);
    let inline = stdout(&["lattice", "zeta", "--gram", "I2", "--s", "3+1i"]);
    assert_eq!(from_file, inline);
    std::fs::remove_file(path).ok();
}

#[test]
fn functional_equation_report() {
    let path = temp_file("fe", "rank 2\n2 1/2\n1/2 1\n");
    let out = stdout(&["lattice", "check-fe", "--gram", path.to_str().unwrap(), "--t", "0.5"]);
    for line in out.lines().skip(1) {
        assert!(line.ends_with(",true"), "{line}");
    }
    std::fs::remove_file(path).ok();
}

#[test]
fn twist_file_and_weight_comparison() {
    let path = temp_file("twist", "rank 2\nplace inf\n3 0\n0 1\nplace 5\n5 0\n0 1\n");
    let p = path.to_str().unwrap();
    assert_eq!(stdout(&["twist", "--file", p, "1", "1"]).lines().next(), Some("3"));
    let row = csv_row(&stdout(&[
        "twist",
        "--file",
        p,
        "--compare",
        "--section",
        "x1",
        "2",
        "3",
    ]));
    assert_eq!(row[2], "true");
    std::fs::remove_file(path).ok();
}

#[test]
fn grouped_table_reports_both_coefficients() {
    let out = stdout(&["arakelov", "--degrees", "1", "--s", "4", "--cutoff", "3", "--grouped"]);
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.iter().map(|r| r[1]).collect::<Vec<_>>(), ["4", "4", "8"]);
    assert_eq!(rows[1][3], "6");
}

#[test]
fn hirzebruch_subcommands() {
    assert_eq!(
        stdout(&[
            "hirzebruch",
            "height",
            "--n",
            "1",
            "--class",
            "1,0,0",
            "--point",
            "1,2,3,4"
        ])
        .lines()
        .next(),
        Some("3")
    );
    let row = csv_row(&stdout(&[
        "hirzebruch",
        "check-shift",
        "--n",
        "1",
        "--class",
        "1,0,2",
        "--point",
        "1,2,3,4",
    ]));
    assert_eq!(&row[row.len() - 3..], ["12", "12", "true"]);
    let out = stdout(&["hirzebruch", "enumerate", "--n", "1", "--class", "1,0,1", "--H", "1"]);
    assert_eq!(out.lines().count(), 17);
    assert_eq!(
        csv_row(&stdout(&["hirzebruch", "anticanonical", "--n", "1"])),
        ["1", "2", "1", "2", "true"]
    );
}

#[test]
fn tamagawa_json_report() {
    let out = stdout(&["tamagawa", "--variety", "P1", "--P", "1000"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["factors"].as_array().unwrap().len(), 20);
    assert_eq!(v["factors"][0]["product"], "3/4");
    assert!((v["mu_infinity"].as_f64().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn json_tables() {
    let out = stdout(&["--format", "json", "count", "--n", "1", "--arch", "max", "--H", "1,2"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["rows"][1]["count"], 8);
}

#[test]
fn validation_errors_exit_with_two() {
    for args in [
        &["height", "1", "1", "max", "0", "0"][..],
        &["height", "1", "1", "max", "1", "2", "3"],
        &["--precision-bits", "64", "height", "1", "1", "max", "2", "3"],
        &["lattice", "theta", "--gram", "I0", "--t", "1"],
        &["count", "--n", "1", "--arch", "sup", "--H", "2"],
        &["fit", "--n", "1", "--arch", "max", "--H-min", "10", "--H-max", "50"],
        &["tamagawa", "--variety", "Q7"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(!err.trim().is_empty(), "{args:?}");
    }
    let out = run(&["height", "1", "1", "max", "0", "0"]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: invalid-input: "), "{err}");
}

#[test]
fn capacity_errors_exit_with_three() {
    let out = run(&[
        "--max-points",
        "10",
        "hirzebruch",
        "enumerate",
        "--n",
        "1",
        "--H",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error: capacity: "));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "arakelov",
        "--degrees",
        "1,2",
        "--s",
        "0.5+2i",
        "--cutoff",
        "12",
        "--terms",
    ];
    let a = run(&args);
    let b = run(&args);
    let mut single = vec!["--threads", "1"];
    single.extend(args);
    let c = run(&single);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn selftest_passes() {
    let out = run(&["--selftest"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("7 of 7 checks passed"));
}
