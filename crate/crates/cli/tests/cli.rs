//! End-to-end runs of the binary: file layout, exit codes, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn run(sub: &str, config: &str, dir: &Path) -> Output {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_cluster-ising"))
        .args([sub, "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

#[test]
fn two_site_oracle_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("oracle", "[model]\nL = 2\nbeta = 0.0\n[oracle]\nmu = 0.0\n", dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let body = read(dir.path(), "oracle.csv");
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines[0], "N,logZ");
    assert_eq!(lines.len(), 4);
    // β = 0: Z_N = C(2, N)
    let z: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(z[0].abs() < 1e-15 && (z[1] - 2f64.ln()).abs() < 1e-15 && z[2].abs() < 1e-15);
    let gc = read(dir.path(), "grand_canonical.csv");
    let p: f64 = gc.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((p - 1.0).abs() < 1e-14);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = "[model]\nL = 8\n[radii]\nbeta = [0.0, 0.25, 0.5]\n[correlate]\ncases = [{ L = 10, N = 2, beta = 0.2 }]\n";
    let files = ["oracle.csv", "figure1_canonical_radii.csv", "correlation_summary.csv", "correlation_L10_N2_beta0.2.csv"];
    let snapshot = || {
        let dir = tempfile::tempdir().unwrap();
        for sub in ["oracle", "radii", "correlate"] {
            assert!(run(sub, cfg, dir.path()).status.success(), "{sub}");
        }
        files.map(|f| read(dir.path(), f))
    };
    assert_eq!(snapshot(), snapshot());
}

#[test]
fn radii_files_have_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("radii", "[radii]\nbeta = [0.1, 0.2]\nfigures = [{ name = \"only\", pairs = [[1, 1.0], [2, 0.5]] }]\n", dir.path());
    assert!(o.status.success());
    assert_eq!(read(dir.path(), "only.csv").lines().count(), 1 + 2 * 2);
}

#[test]
fn bad_configuration_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for (cfg, key) in [
        ("[radii]\nbeta = []\n", "radii.beta"),
        ("[model]\nd = 4\n", "model.d"),
        ("[deviate]\nalpha = [\"1/3\"]\n", "deviate.alpha"),
        ("[model]\nboundary = \"open\"\n", "model.boundary"),
        ("[model]\nbogus = 1\n", "bogus"),
    ] {
        let o = run("oracle", cfg, dir.path());
        assert_eq!(o.status.code(), Some(2), "{cfg}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(key), "{cfg}: {err}");
    }
}

#[test]
fn guard_violation_exits_with_3() {
    // fourth-order extraction needs N up to 5 in a two-site box
    let dir = tempfile::tempdir().unwrap();
    let o = run("series", "[model]\nL = 2\n[series]\norder = 4\n", dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("guard"));
}
