use std::path::Path;
use std::process::{Command, Output};

fn pqec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqec"))
        .args(args)
        .env_remove("PQEC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows split on commas, skipping `#` lines and the column header.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn header_value(csv: &str, key: &str) -> Option<String> {
    let prefix = format!("# {key}: ");
    csv.lines().find_map(|l| l.strip_prefix(&prefix).map(String::from))
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn example_invocations_parse() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = pqec(&[
        "sweep",
        "--channel",
        "local-depol",
        "--M",
        "2",
        "--p",
        "0:1:5",
        "--ell",
        "0,1,2,3",
        "--cycles",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains("channel,M,p,ell,t_max,gamma_L,F_steady"));
    assert_eq!(rows(&csv).len(), 20);

    let o = pqec(&[
        "threshold",
        "--channel",
        "dephasing",
        "--twirl",
        "0.2",
        "--seed",
        "7",
        "--M",
        "2",
        "--p",
        "0:1:5",
        "--cycles",
        "2",
        "--out",
        dir.path().join("t.csv").to_str().unwrap(),
    ]);
    assert!(
        matches!(o.status.code(), Some(0 | 2)),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn out_of_range_probability_is_a_usage_error() {
    let o = pqec(&["cycle", "--channel", "local-depol", "--p", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("`p`") && err.contains("1.5"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_flag_exits_one_and_help_exits_zero() {
    assert_eq!(pqec(&["cycle", "--bogus"]).status.code(), Some(1));
    assert_eq!(pqec(&["--help"]).status.code(), Some(0));
    assert_eq!(pqec(&["--version"]).status.code(), Some(0));
}

#[test]
fn cycle_reaches_the_werner_steady_state() {
    let csv = stdout(&pqec(&[
        "cycle",
        "--channel",
        "global-depol",
        "--M",
        "1",
        "--p",
        "0.1",
        "--ell",
        "1",
        "--cycles",
        "50",
    ]));
    let rows = rows(&csv);
    assert_eq!(rows.len(), 51);
    let tail = num(&rows.last().unwrap()[2]);
    assert!((tail - 0.996904).abs() < 1e-6, "{tail}");
}

#[test]
fn twirl_check_matches_local_depolarizing() {
    let csv = stdout(&pqec(&["twirl-check", "--M", "2", "--p", "0.37"]));
    let single = rows(&csv);
    assert_eq!(single.len(), 1);
    assert!(num(&single[0][3]) < 1e-10, "{single:?}");
    let defaults = stdout(&pqec(&["twirl-check", "--M", "2"]));
    assert_eq!(rows(&defaults).len(), 3);
}

#[test]
fn purify_fidelity_is_monotone_in_ell() {
    let csv = stdout(&pqec(&[
        "purify",
        "--channel",
        "local-depol",
        "--p",
        "0.3",
        "--ell",
        "0..8",
        "--state",
        "plus^3",
    ]));
    let f: Vec<f64> = rows(&csv).iter().map(|r| num(&r[1])).collect();
    assert_eq!(f.len(), 9);
    assert!(f.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{f:?}");
    assert!(f.iter().all(|&x| x <= 1.0));
    assert!(f[8] > 0.99, "{f:?}");
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "sample",
        "--channel",
        "local-depol",
        "--p",
        "0.2",
        "--M",
        "2",
        "--ell",
        "2",
        "--shots",
        "4000",
        "--batches",
        "4",
        "--seed",
        "11",
    ];
    let a = stdout(&pqec(&args));
    let b = stdout(&pqec(&args));
    assert_eq!(a, b);
    let mut with_jobs = args.to_vec();
    with_jobs.extend(["--jobs", "1"]);
    assert_eq!(a, stdout(&pqec(&with_jobs)));
}

#[test]
fn header_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = stdout(&pqec(&[
        "sweep",
        "--channel",
        "dephasing",
        "--M",
        "2",
        "--p",
        "0:0.6:4",
        "--ell",
        "0,2",
        "--cycles",
        "5",
    ]));
    let config = header_value(&first, "config").unwrap();
    let path = dir.path().join("replay.json");
    std::fs::write(&path, &config).unwrap();
    let second = stdout(&pqec(&["sweep", "--config", path.to_str().unwrap()]));
    assert_eq!(first, second);
    assert_eq!(header_value(&first, "seed").as_deref(), Some("0"));
    assert_eq!(header_value(&first, "config_sha256").unwrap().len(), 64);
}

#[test]
fn no_crossing_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("th.csv");
    let o = pqec(&[
        "threshold",
        "--channel",
        "local-depol",
        "--M",
        "1",
        "--p",
        "0:0.3:4",
        "--ell",
        "0,1",
        "--cycles",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(header_value(&csv, "p_th").as_deref(), Some("none"));
    assert!(dir.path().join("th.sweep.csv").exists());
}

#[test]
fn output_directory_from_environment_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("plot.svg");
    let o = Command::new(env!("CARGO_BIN_EXE_pqec"))
        .args([
            "sweep",
            "--channel",
            "global-depol",
            "--p",
            "0:1:3",
            "--cycles",
            "2",
            "--traces",
            "--svg",
        ])
        .arg(&svg)
        .env("PQEC_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let main = dir.path().join("sweep.csv");
    let traces = dir.path().join("sweep.traces.csv");
    assert!(Path::new(&main).exists());
    // 3 p values × 5 default ℓ × 3 time points.
    assert_eq!(rows(&std::fs::read_to_string(traces).unwrap()).len(), 45);
    assert!(std::fs::read_to_string(svg).unwrap().contains("<polyline"));
}
