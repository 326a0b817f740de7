use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use heckearg::stats::predicted_moment;
use heckearg_cli::commands::plotdata::{histogram, limit_density, trapezoid};
use heckearg_cli::output::read_csv;
use heckearg_cli::{run, Command, RunConfig};

fn config_in(dir: &Path) -> RunConfig {
    RunConfig { cache_dir: dir.join("cache"), out_dir: dir.join("out"), ..RunConfig::default() }
}

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_heckearg"))
}

fn all_files(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn print_config_round_trips() {
    let output = bin().args(["print-config", "--q", "11,37", "--delta", "0.1"]).output().unwrap();
    assert!(output.status.success());
    let config: RunConfig = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(config.q_list, vec![11, 37]);
    assert_eq!(config.delta, 0.1);
    assert_eq!(config.diagnostic.c, 0.25);
    assert_eq!(config.diagnostic.a, 4.0);
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("\"A\": 4.0"));
}

#[test]
fn delta_guard_refuses_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["moments", "--q", "101", "--delta", "0.25", "--n-max", "4", "--out-dir"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn basis_command_and_cache_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig { q_list: vec![11, 13], ..config_in(dir.path()) };
    let first = run(Command::Basis, &config).unwrap();
    assert!(first.passed(), "{:?}", first.failures);
    assert!(dir.path().join("cache/basis/q=11.json").exists());
    let summary_path = config.run_dir().join("basis_summary.json");
    let before = std::fs::read(&summary_path).unwrap();
    let summary: serde_json::Value = serde_json::from_slice(&before).unwrap();
    assert_eq!(summary["levels"][0]["dim"], 1);
    assert_eq!(summary["levels"][1]["dim"], 0);
    assert_eq!(summary["levels"][0]["forms"][0]["fitted_sign"], 1);
    let again = run(Command::Basis, &config).unwrap();
    assert!(again.passed());
    assert_eq!(std::fs::read(&summary_path).unwrap(), before);
}

#[test]
fn nonprime_level_fails_alone() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["basis", "--q", "12,11", "--cache-dir"])
        .arg(dir.path().join("cache"))
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("q=12"));
    assert!(dir.path().join("cache/basis/q=11.json").exists());
}

#[test]
fn moments_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig { q_list: vec![101], ..config_in(dir.path()) };
    let outcome = run(Command::Moments, &config).unwrap();
    assert!(outcome.passed(), "{:?}", outcome.failures);
    let (header, rows) = read_csv(&config.run_dir().join("moments.csv")).unwrap();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(rows.len(), 4);
    let second = &rows[1];
    assert_eq!(second[col("n")], "2");
    let predicted: f64 = second[col("predicted")].parse().unwrap();
    assert!((predicted - predicted_moment(2, 101).unwrap()).abs() < 1e-14);
    assert!((predicted - 101f64.ln().ln() / (2.0 * std::f64::consts::PI.powi(2))).abs() < 1e-14);
    assert_eq!(rows[0][col("predicted")], "0");
    assert_eq!(rows[2][col("predicted")], "0");
    for row in &rows {
        let residual: f64 = row[col("oracle_residual")].parse().unwrap();
        assert!(residual <= 1e-8);
    }
}

#[test]
fn plotdata_and_thread_independence() {
    let dir = tempfile::tempdir().unwrap();
    let base = RunConfig { q_list: vec![37, 101], t_grid: vec![1.0, 2.5], ..config_in(dir.path()) };
    let missing = run(Command::Plotdata, &base).unwrap_err();
    assert!(format!("{missing:#}").contains("moments.csv"));
    for command in [Command::Svalue, Command::Moments, Command::Distribution, Command::Plotdata] {
        assert!(run(command, &RunConfig { threads: 1, ..base.clone() }).unwrap().passed());
    }
    let single = all_files(&base.run_dir());
    for command in [Command::Svalue, Command::Moments, Command::Distribution, Command::Plotdata] {
        assert!(run(command, &RunConfig { threads: 3, ..base.clone() }).unwrap().passed());
    }
    assert_eq!(single, all_files(&base.run_dir()));

    let hist = std::fs::read_to_string(base.run_dir().join("histogram_q=101_t=1.dat")).unwrap();
    let rows: Vec<(f64, f64, f64)> = hist
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|x| x.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .collect();
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(base.run_dir().join("distribution_summary.json")).unwrap()).unwrap();
    let mass = summary.as_array().unwrap().iter().find(|s| s["q"] == 101 && s["t"] == 1.0).unwrap()["weight_sum"]
        .as_f64()
        .unwrap();
    assert!((trapezoid(&rows) - mass).abs() <= 1e-6);
    assert!(base.run_dir().join("trace_q=37_form=1.dat").exists());
    assert!(base.run_dir().join("moments_n=2_t=2.5.dat").exists());
}

#[test]
fn histogram_shape() {
    let values = [(-0.1, 0.25), (0.0, 0.5), (0.3, 0.25)];
    let rows = histogram(&values, 10);
    assert_eq!(rows.len(), 20);
    assert!((trapezoid(&rows) - 1.0).abs() < 1e-12);
    assert_eq!(rows[1].0, rows[2].0);
    assert!((limit_density(0.0) - 1.7724538509055159).abs() < 1e-15);
}

#[test]
fn zeros_command() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig { q_list: vec![11], t_grid: vec![1.0, 5.0], ..config_in(dir.path()) };
    let outcome = run(Command::Zeros, &config).unwrap();
    assert!(outcome.passed(), "{:?}", outcome.failures);
    let (_, census) = read_csv(&config.run_dir().join("zero_census.csv")).unwrap();
    assert_eq!(census[0][4], census[0][5]);
    let (_, sigma) = read_csv(&config.run_dir().join("sigma_x.csv")).unwrap();
    assert_eq!(sigma.len(), 4);
    assert!(sigma.iter().all(|r| r[5] == "true"));
    let (_, density) = read_csv(&config.run_dir().join("zero_density.csv")).unwrap();
    assert_eq!(density.len(), 3);
    assert_eq!(density[2][3], "0");
}

fn fixture_server(requests: usize) -> (String, std::thread::JoinHandle<()>) {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../heckearg-lmfdb/tests/fixtures");
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let handle = std::thread::spawn(move || {
        for stream in listener.incoming().take(requests) {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            loop {
                let mut header = String::new();
                reader.read_line(&mut header).unwrap();
                if header.trim().is_empty() {
                    break;
                }
            }
            let path = line.split_whitespace().nth(1).unwrap().trim_start_matches('/').replace('/', "_");
            let body = std::fs::read_to_string(fixtures.join(format!("{path}.json"))).unwrap();
            write!(stream, "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}", body.len(), body)
                .unwrap();
        }
    });
    (base, handle)
}

#[test]
fn crosscheck_online_then_offline() {
    let dir = tempfile::tempdir().unwrap();
    let (base_url, server) = fixture_server(3);
    let mut config = RunConfig { q_list: vec![37], ..config_in(dir.path()) };
    config.lmfdb.base_url = base_url;
    config.lmfdb.newforms_template = "{base}/newforms/{q}".into();
    config.lmfdb.embeddings_template = "{base}/embeddings/{code}".into();
    let online = run(Command::Crosscheck, &config).unwrap();
    server.join().unwrap();
    assert!(online.passed(), "{:?}", online.failures);
    let report = std::fs::read(config.run_dir().join("crosscheck.json")).unwrap();
    let offline = run(Command::Crosscheck, &RunConfig { offline: true, ..config.clone() }).unwrap();
    assert!(offline.passed());
    assert_eq!(std::fs::read(config.run_dir().join("crosscheck.json")).unwrap(), report);
    let missing = run(Command::Crosscheck, &RunConfig { offline: true, q_list: vec![11], ..config }).unwrap();
    assert!(missing.failures[0].contains("offline"));
}
