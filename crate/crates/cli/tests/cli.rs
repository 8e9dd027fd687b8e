use std::fs;
use std::process::Command;

fn repcomm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_repcomm"))
}

#[test]
fn simulate_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.conf");
    fs::write(
        &cfg,
        "variant = no-clique\nL = 4\nalpha = 1\nsigma = -1\nt_end = 10\n",
    )
    .unwrap();
    let out = dir.path().join("run");
    let status = repcomm()
        .args([
            "simulate",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--quiet",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,R_0,R_1,R_2,R_3,R_4,pc,conservation_error\n"));
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn config_error_exits_one_and_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "L = 10\nalpha = 3\n").unwrap();
    let output = repcomm()
        .args(["simulate", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("line 2") && err.contains("alpha"), "{err}");
}

#[test]
fn missing_file_and_bad_usage_exit_one() {
    let output = repcomm()
        .args(["simulate", "/nonexistent/x.conf"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let output = repcomm().args(["frobnicate"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let output = repcomm().args(["preset", "fig99"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn preset_list_and_run() {
    let output = repcomm().args(["preset", "--list"]).output().unwrap();
    assert!(output.status.success());
    let listing = String::from_utf8_lossy(&output.stdout);
    for name in ["fig2a", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"] {
        assert!(listing.contains(name), "{listing}");
    }
    let dir = tempfile::tempdir().unwrap();
    let status = repcomm()
        .args([
            "preset",
            "fig2b",
            "--out",
            dir.path().to_str().unwrap(),
            "--workers",
            "2",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("field.csv").exists());
    assert!(dir.path().join("field.svg").exists());
}

#[test]
fn sweep_and_equilibria() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.conf");
    fs::write(
        &cfg,
        "L = 4\nt_end = 30\naxis1 = alpha 0 1 3\naxis2 = sigma -1 0 2\n",
    )
    .unwrap();
    let out = dir.path().join("sw");
    let status = repcomm()
        .args([
            "sweep",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "-q",
            "--workers",
            "1",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    let svg = fs::read_to_string(out.join("heatmap.svg")).unwrap();
    assert_eq!(svg.matches("data-value=").count(), 6);

    let output = repcomm()
        .args(["equilibria", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(String::from_utf8_lossy(&output.stdout).starts_with("R0,residual,pc,max_re,stability"));
}

#[test]
fn oracle_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("o.conf");
    fs::write(&cfg, "L = 4\nt_end = 2\noracle_n = 200\noracle_dt = 0.05\n").unwrap();
    let out = dir.path().join("o");
    let output = repcomm()
        .args([
            "oracle",
            cfg.to_str().unwrap(),
            "--seeds",
            "3",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    for seed in 1..=3 {
        assert!(out.join(format!("oracle_{seed}.csv")).exists());
    }
    assert!(String::from_utf8_lossy(&output.stdout).contains("median"));
}
