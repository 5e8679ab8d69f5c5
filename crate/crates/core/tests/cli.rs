use std::path::Path;
use std::process::{Command, Output};

fn xyprobe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xyprobe")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const POINT: [&str; 8] = ["--n-sites", "8", "--gamma", "1", "--lambda", "0.5", "--g", "0.05"];

#[test]
fn gamma_trivial_values() {
    let o = xyprobe(&[&["gamma", "--t", "0"][..], &POINT].concat());
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "1,0\n"));
    let o = xyprobe(&[&["gamma", "--t", "2.5", "--bra", "01", "--ket", "01"][..], &POINT].concat());
    assert_eq!(stdout(&o), "1,0\n");
}

#[test]
fn gamma_reference_point_matches_oracle() {
    let base = [&["gamma", "--t", "1", "--bra", "11", "--ket", "00"][..], &POINT].concat();
    let formula = xyprobe(&base);
    let oracle = xyprobe(&[&base[..], &["--method", "oracle"]].concat());
    assert_eq!(formula.status.code(), Some(0));
    let parse = |s: String| -> Vec<f64> { s.trim().split(',').map(|x| x.parse().unwrap()).collect() };
    let (f, o) = (parse(stdout(&formula)), parse(stdout(&oracle)));
    assert!((f[0] - 0.8177154574245901).abs() < 1e-13 && (f[1] - 0.35868455980819214).abs() < 1e-13);
    assert!((f[0] - o[0]).abs() < 1e-12 && (f[1] - o[1]).abs() < 1e-12);
}

#[test]
fn malformed_branch_is_a_usage_error() {
    let o = xyprobe(&[&["gamma", "--t", "1", "--bra", "12"][..], &POINT].concat());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--bra"), "{}", stderr(&o));
}

#[test]
fn gamma_needs_single_values() {
    let o = xyprobe(&["gamma", "--n-sites", "8", "--gamma", "0:1:3", "--lambda", "0.5", "--t", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--gamma"));
}

#[test]
fn config_errors_name_line_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "# comment\nn_sites = 7\n").unwrap();
    let o = xyprobe(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("line 2") && e.contains("n_sites"), "{e}");

    std::fs::write(&path, "speed = 3\n").unwrap();
    let o = xyprobe(&["sweep", "--config", path.to_str().unwrap()]);
    assert!(stderr(&o).contains("line 1") && stderr(&o).contains("speed"));
}

#[test]
fn unknown_flag_and_help() {
    assert_eq!(xyprobe(&["sweep", "--bogus", "1"]).status.code(), Some(1));
    assert_eq!(xyprobe(&["nonsense"]).status.code(), Some(1));
    let help = xyprobe(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("sweep"));
    assert_eq!(xyprobe(&[]).status.code(), Some(1));
}

#[test]
fn single_point_sweep_at_t0() {
    let o = xyprobe(&["sweep", "--n-sites", "8", "--lambda", "1", "--gamma", "1", "--t", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "lambda,gamma,t,concurrence,g00_01,g00_10,g00_11,g01_10,g01_11,g10_11");
    assert_eq!(lines[1], "1,1,0,0,1,1,1,1,1,1");
}

#[test]
fn config_file_with_flag_override_and_command_key() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    let out = dir.path().join("out.csv");
    std::fs::write(
        &conf,
        format!("command = sweep\nn_sites = 16\ngamma = 1\nlambda = -2:2:9\nt = 0.5\noutput = {}\n", out.display()),
    )
    .unwrap();
    let o = xyprobe(&["--config", conf.to_str().unwrap(), "--t", "0.75"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(2) == Some("0.75")));
}

#[test]
fn unwritable_output_path() {
    let o = xyprobe(&[
        "sweep",
        "--n-sites",
        "8",
        "--gamma",
        "1",
        "--lambda",
        "0.5",
        "--t",
        "0",
        "--output",
        "/nonexistent/dir/x.csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/dir/x.csv"));
}

#[test]
fn fidelity_scan() {
    let o = xyprobe(&["fidelity", "--n-sites", "16", "--gamma", "1", "--lambda", "0:2:5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,gamma,f00_01,f00_10,f00_11,f01_10,f01_11,f10_11"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!(r[2..].iter().all(|&f| (0.0..=1.0 + 1e-12).contains(&f)));
        // g = h: the 01/10 branches see the same field
        assert_eq!(r[5], 1.0);
    }
}

#[test]
fn validate_default_suite_passes() {
    let o = xyprobe(&["validate", "--seed", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.ends_with("PASS")).count(), 102);
    let t0 = text.lines().find(|l| l.starts_with("t=0")).unwrap();
    assert!(t0.contains("max|delta|=0.000e0"), "{t0}");
    let diag = text.lines().find(|l| l.starts_with("bra==ket")).unwrap();
    assert!(diag.contains("max|delta|=0.000e0"), "{diag}");
}

fn write_sweep(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let o = xyprobe(&[args, &["--output", path.to_str().unwrap()]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    path.to_str().unwrap().to_string()
}

#[test]
fn detect_reads_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_sweep(
        dir.path(),
        "cut.csv",
        &["sweep", "--n-sites", "64", "--gamma", "1", "--lambda", "-2:2:41", "--t", "0.75:1.5:2"],
    );
    let o = xyprobe(&["detect", "--input", &csv, "--axis", "lambda"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("critical features along lambda"));
    assert!(text.contains("2 cuts"));
    assert!(text.contains("peak stability across 2 times"));

    let o = xyprobe(&["detect"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("input"));
}
