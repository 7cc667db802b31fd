use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgdmax"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dgdmax-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(path: &Path, text: &str) -> String {
    std::fs::write(path, text).unwrap();
    path.display().to_string()
}

#[test]
fn run_writes_trace() {
    let trace = scratch("run.csv");
    let cfg = write(
        &scratch("run.conf"),
        &format!("graph.kind = ring\nalgorithm.t_max = 5\noutput.trace = {}\n", trace.display()),
    );
    let out = bin(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let file = dgdmax::harness::read_trace(std::io::BufReader::new(std::fs::File::open(&trace).unwrap())).unwrap();
    assert_eq!(file.rows.len(), 5);
}

#[test]
fn bad_config_exits_2() {
    let cfg = write(&scratch("bad.conf"), "no.such.key = 1\n");
    assert_eq!(bin(&["run", "--config", &cfg]).status.code(), Some(2));
    let ok = write(&scratch("ok.conf"), "algorithm.t_max = 2\n");
    assert_eq!(bin(&["run", "--config", &ok, "--set", "algorithm.t_max"]).status.code(), Some(2));
}

#[test]
fn divergence_exits_3() {
    let cfg = write(
        &scratch("div.conf"),
        "algorithm.name = gda\nalgorithm.eta_x = 1e9\nalgorithm.eta_y = 1e9\nalgorithm.t_max = 100\n",
    );
    assert_eq!(bin(&["run", "--config", &cfg]).status.code(), Some(3));
}

#[test]
fn graph_generation_and_validation() {
    let edges = scratch("g.edges");
    let mixing = scratch("w.csv");
    let (e, w) = (edges.display().to_string(), mixing.display().to_string());
    let out = bin(&["gen-graph", "--nodes", "12", "--seed", "3", "--out", &e, "--mixing", &w]);
    assert_eq!(out.status.code(), Some(0));
    let out = bin(&["validate-mixing", "--matrix", &w, "--graph", &e]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));

    // Weights on a non-edge break the sparsity check.
    let n = 12;
    let uniform = (0..n).map(|_| vec![format!("{}", 1.0 / n as f64); n].join(",")).collect::<Vec<_>>().join("\n");
    let dense = write(&scratch("dense.csv"), &(uniform + "\n"));
    let out = bin(&["validate-mixing", "--matrix", &dense, "--graph", &e]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn data_generation() {
    let path = scratch("d.libsvm");
    let p = path.display().to_string();
    let out = bin(&["gen-data", "--samples", "30", "--features", "4", "--seed", "9", "--out", &p]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 30);
}

#[test]
fn check_suites_pass() {
    for suite in ["invariants", "paper-properties"] {
        let out = bin(&["check", "--suite", suite]);
        let text = String::from_utf8_lossy(&out.stdout);
        assert_eq!(out.status.code(), Some(0), "{text}");
        assert!(text.contains("PASS") && !text.contains("FAIL"));
    }
    assert_ne!(bin(&["check", "--suite", "nope"]).status.code(), Some(0));
}

#[test]
fn grid_writes_summary() {
    let cfg = write(&scratch("grid.conf"), "algorithm.name = gdmax\nalgorithm.t_max = 50\n");
    let out_csv = scratch("grid.csv");
    let o = out_csv.display().to_string();
    let out = bin(&["grid", "--config", &cfg, "--grid", "eta_x=0.01,0.001", "--target", "1e-2", "--out", &o]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&out_csv).unwrap().lines().count(), 3);
}
