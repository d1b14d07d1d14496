use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_dicke");

fn dicke(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const PAIR: &str = r#"{"n": 2, "gates": [{"kind": "RZ", "params": [0.0], "noise": 1.0}]}"#;

#[test]
fn run_prints_probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "pair.json", PAIR);
    let out = dicke(&["run", &path]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("j,m,p"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    for row in [&rows[1], &rows[2], &rows[3]] {
        assert!((row[2] - 1.0 / 3.0).abs() < 1e-12, "{row:?}");
    }
}

#[test]
fn run_with_shots_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "rot.json",
        r#"{"n": 6, "gates": [{"kind": "RX", "params": [1.2]}]}"#,
    );
    let a = dicke(&["run", &path, "--shots", "500", "--seed", "11"]);
    let b = dicke(&["run", &path, "--shots", "500", "--seed", "11"]);
    let c = dicke(&["run", &path, "--shots", "500", "--seed", "12"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let text = stdout(&a);
    let counts = text.split("\n\n").nth(1).expect("counts section");
    assert!(counts.starts_with("j,m,count"));
    let total: u64 = counts.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 500);
}

#[test]
fn run_cross_checks_against_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "mixed.json",
        r#"{"n": 4, "gates": [
            {"kind": "RY", "params": [0.4]},
            {"kind": "TAT", "params": [0.3], "axes": "zx", "noise": 0.05},
            {"kind": "GMS", "params": [0.2, 1.0]}
        ]}"#,
    );
    let out = dicke(&["run", &path, "--oracle"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("oracle max deviation"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write(dir.path(), "bad.json", "{");
    assert_eq!(dicke(&["run", &bad_json]).status.code(), Some(3));

    let bad_axes = write(
        dir.path(),
        "axes.json",
        r#"{"n": 3, "gates": [{"kind": "OAT", "params": [0.1], "axes": "w"}]}"#,
    );
    assert_eq!(dicke(&["run", &bad_axes]).status.code(), Some(3));
    assert_eq!(dicke(&["run", "/nonexistent/circuit.json"]).status.code(), Some(3));

    assert_eq!(dicke(&["squeeze", "--gate", "bogus"]).status.code(), Some(2));
    assert_eq!(dicke(&["vqa", "--optimizer", "sgd"]).status.code(), Some(2));
    assert_eq!(dicke(&["qpt", "--steps", "1"]).status.code(), Some(2));
    assert_eq!(dicke(&["frobnicate"]).status.code(), Some(2));

    // GHZ-like state: the mean spin vanishes, so squeezing is undefined
    let out = dicke(&["squeeze", "--n", "4", "--gate", "gms", "--theta-min", "1.5707963267948966",
        "--theta-max", "1.5707963267948966", "--steps", "1", "--phi", "0"]);
    assert!(out.status.success());
    assert!(stdout(&out).lines().nth(1).unwrap().contains("NaN"));
}

#[test]
fn squeeze_sweep_csv() {
    let out = dicke(&["squeeze", "--n", "40", "--steps", "6", "--theta-max", "0.1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,xi2_S_dB,xi2_R_dB"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[0][1].abs() < 1e-6);
    assert!(rows[5][1] < -3.0);
    assert!(rows.iter().all(|r| r[2] >= r[1] - 1e-12));
}

#[test]
fn vqa_single_iteration_has_two_rows() {
    let out = dicke(&["vqa", "--n", "20", "--max-iter", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "iteration,cost,wall_seconds,theta1,theta2,theta3");
    assert_eq!(lines.len(), 3);
}

#[test]
fn vqa_random_init_is_seeded() {
    let run = |seed: &str| {
        let out = dicke(&["vqa", "--n", "10", "--max-iter", "2", "--init", "random", "--seed", seed]);
        assert!(out.status.success());
        // drop the timing column
        stdout(&out)
            .lines()
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                format!("{},{},{}", f[0], f[1], f[3..].join(","))
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run("3"), run("3"));
    assert_ne!(run("3"), run("4"));
}

#[test]
fn qpt_rows_and_header() {
    let out = dicke(&["qpt", "--n", "20", "--steps", "11"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,jz,jx2,jy2");
    assert_eq!(lines.len(), 12);
    let first: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((first + 1.0).abs() < 0.05);
}

#[test]
fn husimi_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "ground.json", r#"{"n": 5, "gates": []}"#);
    let out = dicke(&["husimi", &path, "--theta-steps", "1", "--phi-steps", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theta,phi,q");
    assert_eq!(lines.len(), 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("bench.csv");
    let out = dicke(&[
        "bench", "--n-min", "4", "--n-max", "12", "--n-step", "4", "--repeats", "1",
        "--out", target.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(target).unwrap();
    assert_eq!(text.lines().next(), Some("n,seconds"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn threads_flag_gives_identical_output() {
    let one = dicke(&["squeeze", "--n", "30", "--steps", "5", "--threads", "1"]);
    let four = dicke(&["squeeze", "--n", "30", "--steps", "5", "--threads", "4"]);
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}
