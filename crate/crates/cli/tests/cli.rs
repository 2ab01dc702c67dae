use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn artery1d(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_artery1d"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_tourniquet_writes_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let o = artery1d(&["run", "--preset", "tourniquet", "--out", "res"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("res");
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["scenario.toml", "snapshot_000_t0.000000e0.csv", "snapshot_001_t5.000000e-3.csv"]);
    let last = rows::read(&out.join(&names[2]));
    assert_eq!(last.len(), 100);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("L1(R)"), "{stdout}");
}

mod rows {
    pub fn read(path: &std::path::Path) -> Vec<Vec<f64>> {
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,A,Q,u,R,p"));
        lines
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect()
    }
}

#[test]
fn written_scenario_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let o = artery1d(&["run", "--preset", "wave", "--cells", "40", "--slope", "enom", "--out", "a"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = artery1d(&["run", "--config", "a/scenario.toml", "--out", "b"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let name = "snapshot_004_t8.000000e-3.csv";
    let a = fs::read_to_string(dir.path().join("a").join(name)).unwrap();
    let b = fs::read_to_string(dir.path().join("b").join(name)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn missing_stiffness_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.toml"),
        "[grid]\ncells = 20\nlength = 0.1\n\n[model.profile]\nkind = \"uniform\"\nradius = 4e-3\n\n[time]\nt_end = 1e-3\n",
    )
    .unwrap();
    let o = artery1d(&["run", "--config", "bad.toml"], dir.path());
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("model.k"), "{err}");
    assert!(!err.contains("backtrace"), "{err}");
}

#[test]
fn config_from_file_runs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("pulse.toml"),
        r#"
name = "pulse"

[grid]
cells = 60
length = 0.16

[model]
k = 1e8
profile = { kind = "uniform", radius = 4e-3 }

[initial]
kind = "sine_pulse"
eps = 5e-3
start = 0.064
end = 0.096

[scheme]
flux = "rusanov"
slope = "muscl"

[time]
t_end = 2e-3
snapshots = [1e-3]

[output]
dir = "pulse-out"
"#,
    )
    .unwrap();
    let o = artery1d(&["run", "--config", "pulse.toml"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("pulse-out/snapshot_000_t1.000000e-3.csv").exists());
}

#[test]
fn study_writes_error_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = artery1d(
        &["study", "--preset", "tourniquet", "--levels", "25,50,100", "--field", "R", "--out", "s"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("s/errors.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "J,L1_error");
    assert!(lines[1].starts_with("25,"));
    assert!(lines[4].starts_with("Regression,y=-0."), "{report}");
    assert_eq!(lines[5], "Comparison,convergence");
}

#[test]
fn oracle_dump() {
    let dir = tempfile::tempdir().unwrap();
    let o = artery1d(&["oracle", "--preset", "tourniquet", "--points", "11", "--out", "o"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("o/oracle.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,x,A,Q,u,R"));
    // snapshot times 0 and t_end, eleven points each
    assert_eq!(csv.lines().count(), 1 + 2 * 11);

    let o = artery1d(&["oracle", "--preset", "aneurism"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no reference"));
}

#[test]
fn bad_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["run", "--preset", "wave", "--flux", "godunov"][..],
        &["run", "--preset", "wave", "--order", "3"],
        &["run", "--preset", "wave", "--order", "1", "--slope", "eno"],
        &["run", "--preset", "wave", "--friction", "implicit"],
        &["run", "--preset", "nope"],
        &["run"],
        &["run", "--preset", "wave", "--config", "x.toml"],
        &["run", "--preset", "wave", "--cells", "0"],
        &["study", "--preset", "wave", "--levels", "50,100"],
    ] {
        let o = artery1d(args, dir.path());
        assert!(!o.status.success(), "{args:?} succeeded");
        assert!(!stderr(&o).trim().is_empty(), "{args:?} gave no diagnostic");
    }
}
