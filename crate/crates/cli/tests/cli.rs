use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pulsefront(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pulsefront"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with(scenario: &str, config: &str, dir: &Path, out: &str) -> Output {
    let cfg = dir.join(format!("{out}.toml"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join(out);
    pulsefront(&[
        scenario,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(line: &str, key: &str) -> f64 {
    let pat = format!("{key}=");
    line.split_whitespace()
        .find_map(|w| w.strip_prefix(&pat))
        .unwrap_or_else(|| panic!("no {key} in {line}"))
        .parse()
        .unwrap()
}

#[test]
fn front_summary_reports_the_homogeneous_speed() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with("front", "[profile]\ntheta = 0.3\n", dir.path(), "front");
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    let line = s.lines().find(|l| l.starts_with("front ")).unwrap();
    let c = field(line, "c");
    assert!((c - 0.28284).abs() < 1e-2, "{line}");
    assert!(line.contains("c=0.282"), "{line}");
}

#[test]
fn eigen_echoes_a_constant_potential() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(
        "eigen",
        "[profile]\ntheta = 0.3\n[eigen]\nstate = 0.0\n",
        dir.path(),
        "eig",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    let line = s.lines().next().unwrap();
    let (l, q) = (field(line, "lambda1"), field(line, "q_mean"));
    assert!((l - q).abs() < 1e-10 && (q + 0.3).abs() < 1e-12, "{line}");
}

#[test]
fn missing_profile_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with("front", "workers = 1\n", dir.path(), "np");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`profile`"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_named_and_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(
        "front",
        "[profile]\ntheta = 0.3\n[numerics]\ntime_step = 0.1\n",
        dir.path(),
        "uk",
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("time_step"), "{}", stderr(&o));
    let o = run_with("eigen", "[profile]\ntheta = 1.5\n", dir.path(), "th");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("profile.theta"), "{}", stderr(&o));
}

#[test]
fn numerical_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(
        "stability",
        "[profile]\ntheta = 0.3\n[budget]\nt_max = 1.0\n",
        dir.path(),
        "nf",
    );
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("inconclusive"), "{}", stderr(&o));
}

#[test]
fn help_documents_every_key_with_defaults() {
    for cmd in [
        &["--help"][..],
        &["front", "--help"][..],
        &["quench-scan", "--help"][..],
    ] {
        let o = pulsefront(cmd);
        assert!(o.status.success());
        let s = stdout(&o);
        for key in [
            "workers",
            "profile.family",
            "numerics.dt",
            "budget.t_max",
            "output.prefix",
            "stability.datum",
            "quench.lambdas",
            "steady.tol",
            "decay.mu_max",
        ] {
            assert!(s.contains(key), "{key} missing from {cmd:?}");
        }
        assert!(s.contains("default 1\n"));
    }
    let s = stdout(&pulsefront(&["--help"]));
    for sub in [
        "front",
        "homogenize",
        "eigen",
        "steady",
        "scan-e",
        "stability",
        "decay",
        "quench-scan",
    ] {
        assert!(s.contains(sub), "{sub}");
    }
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn identical_configs_give_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[profile]\ntheta = 0.3\n[numerics]\nnodes_per_period = 32\n";
    assert!(run_with("front", cfg, dir.path(), "a").status.success());
    assert!(run_with("front", cfg, dir.path(), "b").status.success());
    let (a, b) = (
        artifacts(&dir.path().join("a")),
        artifacts(&dir.path().join("b")),
    );
    assert!(a.len() >= 5);
    assert_eq!(a, b);
    let hash = String::from_utf8_lossy(&a.iter().find(|f| f.0 == "summary.txt").unwrap().1)
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert!(hash.starts_with("# config_hash="));
    for (name, bytes) in &a {
        let text = String::from_utf8_lossy(bytes);
        let head: String = text.lines().take(3).collect::<Vec<_>>().join("\n");
        assert!(
            head.contains(&hash[2..])
                || head.contains(&format!("\"config_hash\": \"{}\"", &hash[14..])),
            "{name} lacks the hash"
        );
    }
}

#[test]
fn homogenize_reports_the_closed_form_speed() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(
        "homogenize",
        "[profile]\ntheta = 0.3\na_mean = 2.0\na_amplitude = 1.0\n",
        dir.path(),
        "h",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o).lines().next().unwrap().to_string();
    let c0 = field(&line, "c0");
    assert!(
        (c0 - (2.0 * 3f64.sqrt()).sqrt() * 0.2).abs() < 1e-6,
        "{line}"
    );
    assert!((field(&line, "a_H") - 3f64.sqrt()).abs() < 1e-7);
}

#[test]
fn steady_writes_state_files_with_class_headers() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with("steady", "[profile]\ntheta = 0.3\n", dir.path(), "st");
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("st/steady_0.dat")).unwrap();
    assert!(
        text.contains("# L=1.0000000000e0 lambda1=2.10000000"),
        "{text}"
    );
    assert!(text.contains("class=unstable\n"));
    assert!(text.contains("# x u\n"));
}

#[test]
fn quench_scan_at_zero_lambda_propagates() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(
        "quench-scan",
        "[quench]\nlambdas = [1.0, 0.0]\n",
        dir.path(),
        "q",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().filter(|l| l.contains("lambda=")).collect();
    assert_eq!(lines.len(), 2);
    assert!(
        lines[0].contains("lambda=0 ") && lines[1].contains("lambda=1 "),
        "{s}"
    );
    assert!(lines[0].contains("class=propagating") && field(lines[0], "c_level") > 0.0);
    let csv = fs::read_to_string(dir.path().join("q/quench.csv")).unwrap();
    assert!(csv
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("lambda,classification"));
}

#[test]
fn quench_scan_rejects_nonpositive_diffusivity() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(
        "quench-scan",
        "[quench]\nlambdas = [0.0, 5.0]\n",
        dir.path(),
        "qb",
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("quench.lambdas"));
}
