use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pursuit-lab"));
    cmd.env_remove("PURSUIT_LAB_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_vector(path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    text.split_whitespace().skip(2).map(|t| t.parse().unwrap()).collect()
}

#[test]
fn recover_identity_example() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write(dir.path(), "phi.txt", "3 3\n1 0 0\n0 1 0\n0 0 1\n");
    let signal = write(dir.path(), "y.txt", "3 1\n0\n3\n0\n");
    let out = dir.path().join("xhat.txt");
    let o = run(&[
        "recover", "--matrix", &matrix, "--signal", &signal, "--alg", "omp", "--k", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("support={1}"), "{text}");
    assert!(text.contains("iterations=1"), "{text}");
    assert!(text.contains("explored_nodes=1"), "{text}");
    assert_eq!(read_vector(&out), vec![0.0, 3.0, 0.0]);
}

#[test]
fn recover_with_reference_settings() {
    let dir = tempfile::tempdir().unwrap();
    let p = pursuit_lab::benchlab::gen_problem(40, 20, 3, 11, &Default::default()).unwrap();
    let mut phi_text = "20 40\n".to_string();
    for r in 0..20 {
        let row: Vec<String> = (0..40).map(|c| format!("{:e}", p.phi.get(r, c))).collect();
        phi_text.push_str(&row.join(" "));
        phi_text.push('\n');
    }
    let matrix = write(dir.path(), "phi.txt", &phi_text);
    let y_text: Vec<String> = p.y.iter().map(|v| format!("{v:e}")).collect();
    let signal = write(dir.path(), "y.txt", &format!("1 20\n{}\n", y_text.join(" ")));
    let runs: [&[&str]; 3] = [
        &["--alg", "aomp", "--i", "3", "--b", "2", "--max-paths", "200", "--cost", "mul", "--alpha", "0.8", "--k", "3"],
        &["--alg", "mmp-df", "--l", "6", "--max-paths", "200", "--eps", "1e-6", "--kmax", "55"],
        &["--alg", "mmp-bf", "--l", "3", "--beam", "4", "--k", "3"],
    ];
    for extra in runs {
        let out = dir.path().join("xhat.txt");
        let mut args = vec!["recover", "--matrix", &matrix, "--signal", &signal, "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = run(&args);
        assert!(o.status.success(), "{extra:?}: {}", stderr(&o));
        let xhat = read_vector(&out);
        let err: f64 = xhat.iter().zip(&p.x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!(err < 1e-8, "{extra:?}");
    }
}

#[test]
fn recover_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write(dir.path(), "zero.txt", "2 3\n0 0 0\n0 0 0\n");
    let y = write(dir.path(), "y.txt", "2 1\n1\n0\n");
    let bad = write(dir.path(), "bad.txt", "2 3\n0 0 zero\n0 0 0\n");
    let o = run(&["recover", "--matrix", &zero, "--signal", &y, "--k", "1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = run(&["recover", "--matrix", &bad, "--signal", &y, "--k", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("zero"));
    let o = run(&["recover", "--matrix", &zero, "--signal", &y, "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["recover", "--matrix", "/nonexistent/phi.txt", "--signal", &y]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bounds_example() {
    let o = run(&["bounds", "--k", "9", "--l", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("loose = 0.4\n"), "{text}");
    assert!(text.contains("tight = 0.285714285714"), "{text}");
    assert!(text.contains("PASS"));
    for (k, l) in [(1, 1), (100, 1), (1, 100), (37, 58)] {
        let o = run(&["bounds", "--k", &k.to_string(), "--l", &l.to_string()]);
        assert!(stdout(&o).contains("ordering loose > tight: PASS"));
    }
}

#[test]
fn rip_on_orthonormal_and_capped_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let eye = write(dir.path(), "eye.txt", "4 4\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n");
    let cert = dir.path().join("cert.json");
    let o = run(&["rip", "--matrix", &eye, "--s", "3", "--out", cert.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("delta_3 = 0\n"), "{text}");
    assert_eq!(text.matches(": PASS").count(), 2, "{text}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(json["delta"], 0.0);
    assert_eq!(json["subset_size"], 3);
    assert_eq!(json["extremal_subset"].as_array().unwrap().len(), 3);
    assert_eq!(json["matrix_digest"].as_str().unwrap().len(), 64);

    let o = run(&["rip", "--matrix", &eye, "--s", "2", "--cap", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("= 6 subsets"), "{}", stderr(&o));
}

#[test]
fn bench_single_cell_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("trials.jsonl");
    let o = run(&[
        "bench", "--n", "64", "--m", "32", "--k", "10", "--trials", "1", "--algs", "OMP-K,AOMP-e", "--seed", "3",
        "--out-dir", dir.path().to_str().unwrap(), "--trial-log", log.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], pursuit_lab::benchlab::CSV_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("10,OMP-K,1,"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["global_seed"], 3);
    assert_eq!(json["cells"].as_array().unwrap().len(), 2);
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 2);
    assert!(stdout(&o).contains("AOMP-e"));
}

fn csv_without_wall_time(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn bench_seed_is_reproducible_and_env_overridable() {
    let dirs: Vec<_> = (0..4).map(|_| tempfile::tempdir().unwrap()).collect();
    let base = ["bench", "--n", "48", "--m", "24", "--k", "4,8", "--trials", "3", "--algs", "MMP-DF-e,AOMP-K"];
    let go = |dir: &Path, extra: &[&str], env: Option<&str>| {
        let mut cmd = bin();
        cmd.args(base).args(extra).args(["--out-dir", dir.to_str().unwrap()]);
        if let Some(v) = env {
            cmd.env("PURSUIT_LAB_SEED", v);
        }
        let o = cmd.output().unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        csv_without_wall_time(&dir.join("report.csv"))
    };
    let a = go(dirs[0].path(), &["--seed", "7"], None);
    let b = go(dirs[1].path(), &["--seed", "7"], Some("99"));
    let c = go(dirs[2].path(), &[], Some("7"));
    let d = go(dirs[3].path(), &["--seed", "8"], None);
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_ne!(a, d);
}

#[test]
fn bench_rejects_invalid_configs_by_key() {
    let o = run(&["bench", "--n", "20", "--m", "30", "--k", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`m`"), "{}", stderr(&o));
    let o = run(&["bench", "--k", "1:0:5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`k`"), "{}", stderr(&o));
    let o = run(&["bench", "--paper-defaults", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"n": 40, "m": 20, "k_values": [3], "trials_per_k": 0, "configs": [], "global_seed": 1, "exact_tol": 0.01}"#,
    );
    let o = run(&["bench", "--config", &cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`configs`"), "{}", stderr(&o));
    let cfg = write(dir.path(), "typo.json", r#"{"n": 40, "mm": 20}"#);
    let o = run(&["bench", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mm"), "{}", stderr(&o));
}

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["--version"], &["bench", "--help"], &["recover", "--help"]] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
    }
    let help = stdout(&run(&["recover", "--help"]));
    for flag in ["--i", "--b", "--l", "--alpha", "--max-paths", "--eps", "--kmax"] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
    assert!(help.contains("reference setting: 3"));
    let o = run(&[]);
    assert_eq!(o.status.code(), Some(1));
}
