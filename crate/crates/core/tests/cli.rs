use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ringspectra(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ringspectra"));
    cmd.args(args);
    match workers {
        Some(w) => cmd.env("RINGSPECTRA_WORKERS", w),
        None => cmd.env_remove("RINGSPECTRA_WORKERS"),
    };
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn spectrum_of_sum_of_two_squares_sentence() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.rng", "E x. x*x + 1 = 0\n");
    let out = ringspectra(&["spectrum", "--formula", &f, "--bound", "100"], None);
    assert!(out.status.success());
    let text = stdout(&out);
    let members: Vec<&str> = text.lines().skip(1).filter(|l| l.ends_with(",1")).collect();
    assert_eq!(members.len(), 12);
    assert_eq!(text.lines().count(), 1 + 25);

    let out = ringspectra(&["spectrum", "--formula", &f, "--bound", "100", "--format", "json"], None);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["bound"], 100);
    assert_eq!(json["members_total"], 12);
    assert_eq!(json["primes_total"], 25);
    assert_eq!(json["included"][0], 2);
}

#[test]
fn eval_sentence_and_open_formula() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.rng", "E x. x*x + 1 = 0");
    let out = ringspectra(&["eval", "--modulus", "5", "--formula", &f], None);
    assert_eq!(stdout(&out), "true\n");
    let out = ringspectra(&["eval", "--modulus", "7", "--formula", &f, "--engine", "both"], None);
    assert_eq!(stdout(&out), "false\n");

    let g = write(dir.path(), "g.rng", "x*x = 4");
    let out = ringspectra(&["eval", "--modulus", "12", "--formula", &g, "--engine", "both"], None);
    // Oracle: squares equal to 4 modulo 12.
    let roots: Vec<String> = (0..12u64).filter(|x| x * x % 12 == 4).map(|x| x.to_string()).collect();
    assert_eq!(stdout(&out), format!("true\nx\n{}\n", roots.join("\n")));
}

#[test]
fn classify_and_density_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.csv");
    let out = ringspectra(
        &["spectrum", "--poly", "1 + 0*x + 1*x^2", "--bound", "10000", "--out", spec.to_str().unwrap()],
        None,
    );
    assert!(out.status.success());

    let out = ringspectra(&["classify", "--spectrum", spec.to_str().unwrap(), "--max-d", "8"], None);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let fits: Vec<(u64, Vec<u64>)> = json["fits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            let c = &f["class"];
            (c["modulus"].as_u64().unwrap(), c["residues"].as_array().unwrap().iter().map(|r| r.as_u64().unwrap()).collect())
        })
        .collect();
    assert_eq!(fits, vec![(4, vec![1]), (8, vec![1, 5])]);

    let out = ringspectra(
        &["density", "--spectrum", spec.to_str().unwrap(), "--h", "identity", "--samples", "100,1000", "--bound", "10000"],
        None,
    );
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,pi_S,pi,ratio"));
    let row: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
    let primes = ringspectra::arith::sieve(1000).unwrap();
    let members = primes.primes().iter().filter(|&&p| p == 2 || p % 4 == 1).count();
    assert_eq!(&row[..3], &["1000", &members.to_string(), &primes.len().to_string()]);
}

#[test]
fn density_of_alternating_set_from_sequence() {
    let out = ringspectra(&["density", "--seq", "geometric:19:5", "--bound", "150000", "--h", "identity"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    let samples: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(samples, ["19", "361", "6859", "130321"]);
    assert_eq!(rows[2][1], "810");
}

#[test]
fn construct_feeds_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("c.rng");
    let out = ringspectra(
        &["construct", "--family", "congruence", "--params", "3,4", "--out", f.to_str().unwrap()],
        None,
    );
    assert!(out.status.success());
    let out = ringspectra(&["spectrum", "--formula", f.to_str().unwrap(), "--bound", "200"], None);
    for line in stdout(&out).lines().skip(1) {
        let (p, m) = line.split_once(',').unwrap();
        let p: u64 = p.parse().unwrap();
        if p > 4 {
            assert_eq!(m == "1", p % 4 == 3, "p = {p}");
        }
    }

    let out = ringspectra(&["construct", "--family", "powres", "--params", "3,3,1", "--describe"], None);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["valid_above"], 9);
}

#[test]
fn verify_report_is_independent_of_workers() {
    let args = ["verify", "--suite", "paper", "--bound", "2000", "--claims", "1,2,4,6,9,13,14"];
    let one = ringspectra(&args, Some("1"));
    let eight = ringspectra(&args, Some("8"));
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, eight.stdout);
    let json: serde_json::Value = serde_json::from_str(&stdout(&one)).unwrap();
    assert_eq!(json["schema"], "ringspectra.verification/1");
    assert_eq!(json["claims"].as_array().unwrap().len(), 14);
    assert_eq!(json["passed"], 7);
    assert_eq!(json["skipped"], 7);
}

#[test]
fn exit_codes_by_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.rng", "E x. (x = ");
    let open = write(dir.path(), "open.rng", "x = y");
    let code = |args: &[&str]| ringspectra(args, None).status.code();
    assert_eq!(code(&["eval", "--modulus", "5", "--formula", &bad]), Some(3));
    assert_eq!(code(&["spectrum", "--formula", &open, "--bound", "50"]), Some(4));
    assert_eq!(code(&["spectrum", "--poly", "x^2 + 1", "--bound", "5000001"]), Some(5));
    assert_eq!(code(&["eval", "--modulus", "5", "--formula", "/no/such/file"]), Some(6));
    assert_eq!(code(&["spectrum", "--poly", "7", "--bound", "50"]), Some(8));
    assert_eq!(code(&["verify", "--suite", "other"]), Some(8));
    assert_eq!(code(&["spectrum", "--bogus"]), Some(2));
    assert_eq!(code(&["verify", "--claims", "10"]), Some(1));
}
