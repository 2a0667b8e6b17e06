use std::process::{Command, Output};

fn raf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_raf")).args(args).env("RAF_THREADS", "1").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(raf(&["--help"]).status.code(), Some(0));
    assert_eq!(raf(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(raf(&[]).status.code(), Some(1));
    assert_eq!(raf(&["bo", "--alpha", "2"]).status.code(), Some(1));
    assert_eq!(raf(&["bo", "--alpha", "2", "--eps", "1.5"]).status.code(), Some(1));
    let out = raf(&["state-eq", "--loss", "square", "--kernel", "relu", "--gamma", "1", "--lambda", "1", "--alpha", "2", "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kernel"));
}

#[test]
fn bayes_point() {
    let out = raf(&["bo", "--alpha", "2.2222222222222223", "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let line = text.lines().nth(1).unwrap();
    let e: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
    assert!((e - 0.2008).abs() < 5e-4);
}

#[test]
fn config_sweep_writes_csv_and_script() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let script = dir.path().join("sweep.gp");
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "quantity = lambda\nmin = 1e-3\nmax = 10\ncount = 5\nspacing = log\nloss = square\nkernel = erf\n\
             alpha = 2\neps = 0.1\noutput = {}\n",
            csv.display()
        ),
    )
    .unwrap();
    let out = raf(&["sweep", "--config", cfg.to_str().unwrap(), "--gnuplot", script.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = raf_cli::read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 7);
    assert!(std::fs::read_to_string(&script).unwrap().contains("sweep.csv"));
}

#[test]
fn bad_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "quantity = lambda\nmin = 1\nmax = 2\ncount = 3\nloss = square\nkernel = erf\nalpha = 2\n").unwrap();
    let out = raf(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`eps`"));
}

#[test]
fn small_commands_run() {
    for args in [
        &["threshold", "--eps", "1"][..],
        &["kernels"],
        &["cross-validate", "--loss", "square", "--kernel", "relu", "--alpha", "2", "--eps", "0.1"],
        &["rate", "--loss", "square", "--gamma", "1", "--eps", "0.5"],
        &["bo-rate", "--eps", "0.5"],
        &["sweep-angle", "--loss", "square", "--alpha", "4", "--eps", "0.2", "--count", "5"],
        &["mc", "--loss", "hinge", "--kernel", "erf", "--alpha", "2", "--eps", "0.1", "--d", "40", "--lambda-grid", "0.1,1", "--repeats", "2", "--n-test", "100"],
    ] {
        let out = raf(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).lines().count() >= 2, "{args:?}");
    }
    assert!(stdout(&raf(&["threshold", "--eps", "1"])).contains(",2.0000000000000000e0,"));
}
