//! End-to-end runs of the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ordinal-scan"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(path: &Path, text: &str) -> String {
    std::fs::write(path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(i).unwrap().to_string())
        .collect()
}

#[test]
fn profile_of_monotone_file() {
    let dir = tempfile::tempdir().unwrap();
    let text: String = (0..500).map(|i| format!("{i}\n")).collect();
    let f = write(&dir.path().join("up.csv"), &text);
    let o = run(&["profile", &f, "--delay-max", "50"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let tau = column(&out, "tau");
    assert_eq!(tau.len(), 50);
    assert!(tau.iter().all(|v| v == "0.666666667"));
    assert!(column(&out, "delta_sq").iter().all(|v| v == "0.833333333"));
    assert!(column(&out, "tau_tilde").iter().all(|v| v == "0.4"));
}

#[test]
fn cumsum_turns_constant_steps_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(&dir.path().join("ones.csv"), &"1\n".repeat(100));
    let o = run(&["profile", &f, "--delay-max", "3", "--cumsum"]);
    assert!(o.status.success());
    assert!(column(&stdout(&o), "tau")
        .iter()
        .all(|v| v == "0.666666667"));
    // Without the running sum every triple is a tie.
    let o = run(&["profile", &f, "--delay-max", "3"]);
    assert!(o.status.success());
    assert!(column(&stdout(&o), "tau").iter().all(|v| v == "NaN"));
}

#[test]
fn median_test_on_eleven_positive_windows() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(&dir.path().join("w.csv"), &"0.01\n".repeat(11));
    let o = run(&["mediantest", &f, "--sided", "one"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o).lines().nth(1).unwrap(),
        "11,11,0,one,0.00048828125"
    );
    let o = run(&["mediantest", &f]);
    assert!(stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .ends_with(",two,0.0009765625"));
}

#[test]
fn partition_of_model_process() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("ar2.raw");
    let s = series.to_str().unwrap();
    let o = run(&[
        "simulate", "--kind", "ar2", "--length", "2000000", "--seed", "3", "--format", "raw", "-o",
        s,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let prefix = dir.path().join("pm");
    let o = run(&[
        "partition",
        s,
        "--format",
        "raw",
        "--window",
        "10000",
        "--delay-max",
        "50",
        "-o",
        prefix.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = stdout(&o);
    let value = |name: &str| -> f64 {
        report
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{name},")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((value("tau_tilde") - 0.989).abs() < 0.015, "{report}");
    assert!((value("gated_fraction") - 0.20).abs() < 0.10, "{report}");
    for name in ["tau_tilde", "beta_tilde", "gamma_tilde", "delta_tilde"] {
        let text = std::fs::read_to_string(dir.path().join(format!("pm.{name}.csv"))).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 50);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(
        &dir.path().join("g.csv"),
        &(0..100).map(|i| format!("{}\n", i % 7)).collect::<String>(),
    );
    let bad = write(&dir.path().join("b.csv"), "1\n2\nabc1\n");

    assert_eq!(
        run(&["profile", &good, "--delay-max", "5"]).status.code(),
        Some(0)
    );
    let o = run(&["profile", &good, "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--no-such-flag"));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["map", &good]).status.code(),
        Some(2),
        "missing --window"
    );
    assert_eq!(
        run(&["map", &good, "--window", "20", "--stat", "kappa"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["map", &good, "--window", "20", "--delay-max", "10"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["map", &good, "--window", "12.5"]).status.code(),
        Some(2)
    );

    let o = run(&["profile", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("b.csv:3:"));
    assert_eq!(
        run(&["profile", dir.path().join("missing.csv").to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["map", &good, "--window", "500", "--delay-max", "5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&[
            "simulate",
            "--kind",
            "ar2",
            "--length",
            "20000",
            "--seed",
            "7",
            "--outlier-fraction",
            "0.01",
            "--snr",
            "4",
            "-o",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let args = [
        "map",
        a.to_str().unwrap(),
        "--window",
        "2000",
        "--step",
        "500",
        "--stat",
        "gamma",
        "--delay-max",
        "40",
    ];
    let first = run(&args);
    let single = run_env(&args, &[("ORDINAL_SCAN_THREADS", "1")]);
    assert!(first.status.success());
    assert_eq!(first.stdout, single.stdout);

    let pgm = dir.path().join("m.pgm");
    let o = run(&[
        "map",
        a.to_str().unwrap(),
        "--window",
        "2000",
        "--stat",
        "tau",
        "--map-format",
        "pgm",
        "--range",
        "-0.34,0.67",
        "-o",
        pgm.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(&pgm).unwrap();
    assert!(bytes.starts_with(b"P5\n10 50\n255\n"));
    assert_eq!(bytes.len(), b"P5\n10 50\n255\n".len() + 500);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    let o = run(&[
        "simulate",
        "--kind",
        "white",
        "--length",
        "4000",
        "--seed",
        "1",
        "-o",
        data.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let conf = write(
        &dir.path().join("run.conf"),
        "# defaults\nwindow = 1000\ndelay_max = 10\nband-min = 2\n",
    );
    let d = data.to_str().unwrap();

    let o = run(&["--config", &conf, "summary", d]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 1 + 4);
    let o = run(&["--config", &conf, "summary", d, "--window", "2000"]);
    assert_eq!(stdout(&o).lines().count(), 1 + 2);
    // Keys that the subcommand lacks are ignored, unknown keys are usage errors.
    let o = run(&["--config", &conf, "profile", d]);
    assert_eq!(column(&stdout(&o), "d").len(), 10);
    let bad = write(&dir.path().join("bad.conf"), "windwo = 3\n");
    assert_eq!(
        run(&["--config", &bad, "summary", d]).status.code(),
        Some(2)
    );
}

#[test]
fn sample_rate_converts_seconds() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    run(&[
        "simulate",
        "--kind",
        "white",
        "--length",
        "3000",
        "--seed",
        "2",
        "-o",
        data.to_str().unwrap(),
    ]);
    let d = data.to_str().unwrap();
    let secs = run(&[
        "summary",
        d,
        "--hz",
        "100",
        "--window",
        "10",
        "--delay-max",
        "0.2",
    ]);
    let samples = run(&["summary", d, "--window", "1000", "--delay-max", "20"]);
    assert!(
        secs.status.success(),
        "{}",
        String::from_utf8_lossy(&secs.stderr)
    );
    assert_eq!(secs.stdout, samples.stdout);
}

#[test]
fn identities_report() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(&dir.path().join("x.csv"), "1\n3\n2\n5\n4\n7\n6\n9\n8\n");
    let o = run(&["identities", &f, "--delay-max", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1 + 2 * 5);
    assert!(column(&out, "holds").iter().all(|v| v == "true"));
    let o = run(&["identities", &f, "--delay-max", "2", "--cyclic"]);
    assert!(o.status.success());
}
