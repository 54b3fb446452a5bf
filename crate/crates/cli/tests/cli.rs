use std::fs;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_neckstress"))
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

const SMALL: &[&str] = &["--eps-list", "1e-2:1e-3:3"];

#[test]
fn sweep_is_deterministic_and_appends_rows() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let mut args = vec!["sweep", "--out", p.to_str().unwrap()];
        args.extend_from_slice(SMALL);
        run(&args);
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("# neckstress-v1"));
    let mut args = vec!["sweep", "--out", a.to_str().unwrap()];
    args.extend_from_slice(SMALL);
    run(&args);
    let twice = fs::read_to_string(&a).unwrap();
    let data = |t: &str| {
        t.lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("index"))
            .count()
    };
    assert_eq!(data(&twice), 2 * data(&text));
    assert_eq!(twice.lines().filter(|l| l.starts_with("index")).count(), 1);
}

#[test]
fn sweep_reports_checks_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("s.json");
    let mut args = vec![
        "sweep",
        "--summary",
        summary.to_str().unwrap(),
        "--eps-list",
        "1e-2:1e-4:5",
    ];
    args.push("--m");
    args.push("2");
    let out = run(&args);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.lines().any(|l| l.starts_with("PASS gradient rate")),
        "{stderr}"
    );
    assert!(!stderr.contains("FAIL"), "{stderr}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert!(json["checks"].as_array().unwrap().len() >= 5);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.contains(",ok,")).count(), 5);
}

#[test]
fn fit_reads_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m2.csv");
    run(&[
        "sweep",
        "--out",
        csv.to_str().unwrap(),
        "--eps-list",
        "1e-2:1e-4:5",
    ]);
    let out = run(&["fit", csv.to_str().unwrap()]);
    let fit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let slope = fit["raw"]["slope"].as_f64().unwrap();
    assert!((slope + 0.5).abs() < 0.1, "{fit}");
    assert_eq!(fit["samples"].as_array().unwrap().len(), 5);
    let bad = bin()
        .args(["fit", csv.to_str().unwrap(), "--column", "nope"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}

#[test]
fn oracle_writes_family_table() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("o.csv");
    let out = run(&[
        "oracle",
        "--dim",
        "2",
        "--m",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("family,k,m,p,epsilon,value"));
    let rows = text.lines().count() - 1;
    assert_eq!(rows % 9, 0);
    assert!(rows >= 36);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr
            .lines()
            .all(|l| l.contains("fitted") && l.contains("predicted")),
        "{stderr}"
    );
    let custom = run(&[
        "oracle",
        "--k",
        "0",
        "--p",
        "1",
        "--m",
        "2",
        "--eps-list",
        "1e-3,1e-4,1e-5,1e-6",
    ]);
    let stdout = String::from_utf8_lossy(&custom.stdout);
    assert_eq!(
        stdout.lines().filter(|l| l.starts_with("custom,")).count(),
        4
    );
    let half = bin().args(["oracle", "--k", "1"]).output().unwrap();
    assert!(!half.status.success());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        "# flat neck\nprofile = flat\nr0 = 0.3\neps_list = 1e-2, 5e-3\nm = 4\n",
    )
    .unwrap();
    let out = run(&["sweep", "--config", conf.to_str().unwrap(), "--m", "2"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<_> = stdout.lines().filter(|l| l.contains(",ok,")).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.contains(",flat,")), "{rows:?}");
    fs::write(&conf, "profile = round\n").unwrap();
    let bad = bin()
        .args(["sweep", "--config", conf.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("profile"));
}

#[test]
fn mesh_and_solve_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("m.txt");
    let out = run(&["mesh", "--eps", "1e-3", "--out", mesh.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nodes"));
    let text = fs::read_to_string(&mesh).unwrap();
    assert!(text.len() > 1000);
    let field = dir.path().join("u.txt");
    let out = run(&[
        "solve",
        "--eps",
        "1e-3",
        "--field-out",
        field.to_str().unwrap(),
    ]);
    let row: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(row["grad_max"].as_f64().unwrap() > 1.0);
    assert_eq!(row["a11"].as_array().unwrap().len(), 9);
    assert!(fs::metadata(&field).unwrap().len() > 1000);
}
