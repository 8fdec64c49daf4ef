use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csf-lab"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    bin().arg("--out").arg(out).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn summary(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn list_has_one_line_per_criterion() {
    let o = bin().arg("list").output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), csf_core::fleet::CRITERIA.len());
    assert!(text.contains("delayed-spike-family"));
    assert!(text.contains("harnack-parabola"));
}

#[test]
fn validate_exact_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["run", config("validate-exact.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = summary(dir.path());
    assert_eq!(s["passed"], true);
    assert_eq!(s["experiments"][0]["kind"], "validate-exact");
    assert!(dir.path().join("validate-exact/exact.csv").is_file());
}

#[test]
fn malformed_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax.toml", "kind = \"solve\"\n[grid\n"),
        ("kind.toml", "kind = \"teleport\"\n"),
        ("unknown.toml", "kind = \"validate-exact\"\ncolour = 3\n"),
        (
            "negative.toml",
            "kind = \"solve\"\n[grid]\nleft = -1.0\nright = 1.0\nn = 21\n[initial]\nprofile = \"hat\"\n\
             [solver]\nt_end = -1.0\n[bc]\nkind = \"zero\"\n",
        ),
        ("missing.toml", "kind = \"lp\"\n"),
    ];
    for (file, text) in cases {
        let p = dir.path().join(file);
        std::fs::write(&p, text).unwrap();
        let o = run(&dir.path().join("out"), &["run", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{file}");
        let o = bin().args(["validate", p.to_str().unwrap()]).output().unwrap();
        assert_eq!(o.status.code(), Some(2), "{file}");
    }
    assert!(!dir.path().join("out/summary.json").exists());
    let o = run(dir.path(), &["run", "no-such-criterion"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shipped_configs_validate() {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(config(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();
    assert!(paths.len() >= 9);
    let o = bin().arg("validate").args(&paths).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), paths.len());
}

#[test]
fn sharpness_writes_table_and_trend() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--jobs", "2", "run", config("sharpness-small.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("sharpness-small/sharpness.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "n,t,height,bound,passed_when_applicable");
    assert_eq!(csv.lines().count(), 1 + 3 * 6);
    let trend: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sharpness-small/trend.json")).unwrap()).unwrap();
    assert_eq!(trend.as_array().unwrap().len(), 5);
}

#[test]
fn repeated_runs_give_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config("solve-bump.toml");
    for d in [&a, &b] {
        let o = run(d.path(), &["run", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path().join("solve-bump")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 5);
    for n in names {
        let x = std::fs::read(a.path().join("solve-bump").join(&n)).unwrap();
        let y = std::fs::read(b.path().join("solve-bump").join(&n)).unwrap();
        assert_eq!(x, y, "{n:?} differs");
    }
}

#[test]
fn violated_bound_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // A mass bound far below the true mass puts the delayed bound under the flow.
    let text = std::fs::read_to_string(config("delayed-spike.toml"))
        .unwrap()
        .replace("delta = 1.0", "delta = 1.0\na_bar = 0.05");
    let p = dir.path().join("too-small.toml");
    std::fs::write(&p, text).unwrap();
    let o = run(&dir.path().join("out"), &["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("FAIL too-small"));
    assert_eq!(summary(&dir.path().join("out"))["passed"], false);
}

#[test]
fn builtin_and_config_run_together() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["--jobs", "2", "--tol-scale", "1.5", "run", "truncation-level", config("intersections-sine.toml").to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = summary(dir.path());
    assert_eq!(s["tol_scale"], 1.5);
    let names: Vec<&str> = s["experiments"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["truncation-level", "intersections-sine"]);
    let table = std::fs::read_to_string(dir.path().join("intersections-sine/intersections.csv")).unwrap();
    let first: Vec<&str> = table.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[1], "3");
}

#[test]
fn bad_tolerance_scale_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--tol-scale", "0", "run", "truncation-level"]);
    assert_eq!(o.status.code(), Some(2));
}
