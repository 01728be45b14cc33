use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_magnocavity"));
    cmd.env("SOURCE_DATE_EPOCH", "1700000000");
    cmd
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let base = fs::read_to_string(configs().join("baseline.toml")).unwrap();
    let path = dir.join("run.toml");
    fs::write(&path, format!("{base}\n{extra}")).unwrap();
    path
}

#[test]
fn point_prints_all_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["point", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("point.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.starts_with("pair,E_N,nu_minus,stability\n"));
    assert!(csv.contains("\nbe,"));
}

#[test]
fn point_json_with_drive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("microscopic.toml");
    let out =
        run(&["--config", cfg.to_str().unwrap(), "point", "--format", "json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json = fs::read_to_string(dir.path().join("point.json")).unwrap();
    assert!(json.contains("\"steady_state\""));
    assert!(json.contains("\"created\": \"2023-11-14T22:13:20Z\""));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    fs::write(&empty, "").unwrap();
    assert_eq!(run(&["--config", empty.to_str().unwrap(), "point"]).status.code(), Some(2));

    let bad = dir.path().join("bad.toml");
    let text = fs::read_to_string(configs().join("baseline.toml")).unwrap().replace("r_b = 0.75", "r_b = 1.5");
    fs::write(&bad, text).unwrap();
    let out = run(&["--config", bad.to_str().unwrap(), "point"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("system.r_b"));

    // Baseline has no [sweep1d] section.
    let base = configs().join("baseline.toml");
    assert_eq!(run(&["--config", base.to_str().unwrap(), "sweep1d"]).status.code(), Some(2));
    assert_eq!(run(&["figure", "nope"]).status.code(), Some(2));
}

#[test]
fn unstable_point_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("baseline.toml"))
        .unwrap()
        .replace("r_b = 0.75", "r_b = 0.99")
        .replace("phi_over_pi = 1.0", "phi_over_pi = 0.0")
        .replace("j = 8.0", "j = 0.0")
        .replace("g_ce = 6.0", "g_ce = 0.0");
    let cfg = dir.path().join("unstable.toml");
    fs::write(&cfg, text).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "point", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let csv = fs::read_to_string(dir.path().join("point.csv")).unwrap();
    assert!(csv.contains("be,NA,NA,unstable"));
}

#[test]
fn optimize_without_stable_point_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("baseline.toml"))
        .unwrap()
        .replace("r_b = 0.75", "r_b = 0.99")
        .replace("phi_over_pi = 1.0", "phi_over_pi = 0.0")
        .replace("j = 8.0", "j = 0.0")
        .replace("g_ce = 6.0", "g_ce = 0.0");
    let cfg = dir.path().join("opt.toml");
    fs::write(
        &cfg,
        format!("{text}\n[optimize]\npair = \"c1e\"\ncoarse_points = 5\nfree = [{{ param = \"delta_1\", lower = -1.0, upper = 1.0 }}]\n"),
    )
    .unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "optimize", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_commands_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[sweep1d]
param = "delta_c"
start = -1.0
stop = 1.0
count = 5
mode = "symmetric"
pairs = ["mb"]

[sweep2d]
pairs = ["be", "me"]
x = { param = "delta_1", start = -2.0, stop = 2.0, count = 3 }
y = { param = "delta_2", start = -2.0, stop = 4.0, count = 4 }

[tempscan]
start = 0.0
stop = 0.5
count = 6
pairs = ["be"]

[fbscan]
r_start = 0.0
r_stop = 0.9
r_count = 4
phi_start = 0.0
phi_stop = 2.0
phi_count = 3
pairs = ["be"]

[optimize]
pair = "mb"
mode = "symmetric"
coarse_points = 11
free = [{ param = "delta_c", lower = 0.0, upper = 2.0 }]
"#,
    );
    let out_dir = dir.path().join("out");
    let common = ["--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()];
    for (cmd, rows) in [("sweep1d", 5), ("sweep2d", 24), ("tempscan", 6), ("fbscan", 12)] {
        let out = bin().arg(cmd).args(common).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let csv = fs::read_to_string(out_dir.join(format!("{cmd}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), rows + 1, "{cmd}");
    }
    let out = bin().arg("optimize").args(common).args(["--format", "json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(fs::read_to_string(out_dir.join("optimize.json")).unwrap().contains("\"E_N\""));
}

#[test]
fn figure_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["figure", "f8", "--line", "9", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for stem in ["f8_be", "f8_me", "f8_c1b", "f8_c1m"] {
        assert!(dir.path().join(format!("{stem}.csv")).exists());
        assert!(dir.path().join(format!("{stem}.json")).exists());
    }
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for workers in ["1", "4"] {
        let out_dir = dir.path().join(workers);
        let out = run(&["figure", "f2a", "--grid", "15", "--workers", workers, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        files.push((fs::read(out_dir.join("f2a.csv")).unwrap(), fs::read(out_dir.join("f2a.json")).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}
