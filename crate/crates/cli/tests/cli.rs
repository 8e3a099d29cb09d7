use std::path::Path;
use std::process::{Command, Output};

use chiral_cli::io::Table;
use serde_json::Value;

fn chiral(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chiral"))
        .args(args)
        .env_remove("CHIRAL_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = chiral(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Everything after the `#` metadata block.
fn data_section(csv: &str) -> String {
    csv.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sample_writes_one_row_per_eigenvalue() {
    let csv = ok(&["sample", "--beta", "2", "--m", "2", "--n", "3", "--kind", "herm", "--l", "1", "--reps", "1000", "--seed", "7"]);
    let t = Table::from_csv(&csv).unwrap();
    assert_eq!(t.columns, ["rep", "idx", "re", "im", "class"]);
    assert_eq!(t.rows.len(), 4000);
    assert_eq!(t.meta["seed"], "7");
    assert_eq!(t.meta["schema"], "1");
    assert!(t.meta["command"].contains("--reps 1000"));
    assert!(t.meta.contains_key("version"));
    let im = t.f64_column("im").unwrap();
    assert!(im.iter().all(|&y| y == 0.0));
    // the trace of every configuration is l
    let re = t.f64_column("re").unwrap();
    for (_, rows) in t.group_by("rep").unwrap() {
        let s: f64 = rows.iter().map(|&r| re[r]).sum();
        assert!((s - 1.0).abs() < 1e-10);
    }
}

#[test]
fn sampling_is_reproducible_and_thread_independent() {
    let args = ["sample", "--beta", "1", "--m", "3", "--n", "2", "--kind", "antiherm", "--l", "chi", "--reps", "300", "--seed", "11"];
    let a = ok(&args);
    let b = ok(&args);
    assert_eq!(a, b);
    let mut threaded = vec!["--threads", "3"];
    threaded.extend_from_slice(&args);
    assert_eq!(data_section(&a), data_section(&ok(&threaded)));
    let mut other = args.to_vec();
    *other.last_mut().unwrap() = "12";
    assert_ne!(data_section(&a), data_section(&ok(&other)));
}

#[test]
fn seed_defaults_to_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_chiral"))
        .args(["sample", "--beta", "2", "--m", "1", "--n", "1"])
        .env("CHIRAL_SEED", "99")
        .output()
        .unwrap();
    let t = Table::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(t.meta["seed"], "99");
}

#[test]
fn general_beta_gives_jacobi_entries() {
    let t = Table::from_csv(&ok(&["sample", "--beta", "0.7", "--m", "2", "--n", "2", "--kind", "none"])).unwrap();
    assert_eq!(t.columns, ["rep", "j", "a_j"]);
    assert_eq!(t.rows.len(), 3);
    assert!(t.f64_column("a_j").unwrap().iter().all(|&a| a > 0.0));

    let out = chiral(&["sample", "--beta", "0.7", "--m", "2", "--n", "2", "--dense"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
}

#[test]
fn dense_and_jacobi_samples_have_the_same_shape() {
    let dense = Table::from_csv(&ok(&["sample", "--beta", "4", "--m", "2", "--n", "3", "--kind", "herm", "--reps", "5", "--dense"])).unwrap();
    // m + n eigenvalues, including the n − m zeros stripped by the reduction
    assert_eq!(dense.rows.len(), 5 * 5);
    let class = dense.column_index("class").unwrap();
    let zeros = dense.rows.iter().filter(|r| r[class].to_string() == "zero").count();
    assert_eq!(zeros, 5);
}

#[test]
fn eig_and_density_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let jac = dir.path().join("j.csv");
    let eig = dir.path().join("e.json");
    let dens = dir.path().join("d.csv");
    ok(&["sample", "--beta", "2", "--m", "1", "--n", "1", "--reps", "50", "--seed", "3", "--out", path_str(&jac)]);
    ok(&["eig", "--input", path_str(&jac), "--kind", "antiherm", "--l", "1", "--out", path_str(&eig)]);
    let e = Table::read(&eig).unwrap();
    assert_eq!(e.rows.len(), 100);
    assert_eq!(e.meta["beta"], "2");
    ok(&["density", "eval", "--input", path_str(&eig), "--out", path_str(&dens)]);
    let d = Table::read(&dens).unwrap();
    let logpdf = d.f64_column("logpdf").unwrap();
    assert_eq!(logpdf.len(), 50);
    assert!(logpdf.iter().all(|v| v.is_finite()));

    // the same configurations sampled directly
    let direct = ok(&["sample", "--beta", "2", "--m", "1", "--n", "1", "--kind", "antiherm", "--reps", "50", "--seed", "3"]);
    let direct = Table::from_csv(&direct).unwrap();
    let (a, b) = (direct.f64_column("im").unwrap(), e.f64_column("im").unwrap());
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
}

#[test]
fn export_round_trip_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a.csv");
    let json = dir.path().join("a.json");
    let back = dir.path().join("b.csv");
    ok(&["sample", "--beta", "1", "--m", "2", "--n", "2", "--kind", "antiherm", "--reps", "40", "--out", path_str(&csv)]);
    ok(&["export", "--input", path_str(&csv), "--to", "json", "--out", path_str(&json)]);
    ok(&["export", "--input", path_str(&json), "--to", "csv", "--out", path_str(&back)]);
    let (a, b) = (Table::read(&csv).unwrap(), Table::read(&back).unwrap());
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.meta, b.meta);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), std::fs::read_to_string(&back).unwrap());
}

#[test]
fn histogram_and_grid_exports() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("e.csv");
    ok(&["sample", "--beta", "2", "--m", "2", "--n", "2", "--kind", "antiherm", "--reps", "500", "--out", path_str(&csv)]);
    let hist = dir.path().join("h.json");
    ok(&["export", "--input", path_str(&csv), "--to", "histogram", "--column", "im", "--bins", "100", "--out", path_str(&hist)]);
    let h: Value = serde_json::from_str(&std::fs::read_to_string(&hist).unwrap()).unwrap();
    assert_eq!(h["schema"], 1);
    let rows = h["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 100);
    let total: i64 = rows.iter().map(|r| r[2].as_i64().unwrap()).sum();
    assert_eq!(total, 2000);

    let grid = Table::from_csv(&ok(&["export", "--input", path_str(&csv), "--to", "grid", "--bins", "20"])).unwrap();
    assert_eq!(grid.columns, ["x", "y", "count"]);
    assert_eq!(grid.int_column("count").unwrap().iter().sum::<i64>(), 2000);
}

#[test]
fn malformed_input_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "# schema: 1\nrep,j,a_j\n0,1,0.5\n0,2,oops\n").unwrap();
    let out = chiral(&["eig", "--input", path_str(&bad), "--kind", "herm", "--l", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = chiral(args);
    let v = serde_json::from_slice(&out.stdout).expect("JSON report");
    (out.status.code().unwrap(), v)
}

#[test]
fn verify_jacobian_passes() {
    let start = std::time::Instant::now();
    let (code, r) = report(&["verify", "jacobian", "--trials", "100"]);
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["passed"], true);
    assert_eq!(r["checks"][0]["criterion"], "C5");
    assert_eq!(r["checks"][0]["detail"]["cases"].as_array().unwrap().len(), 12);

    let (code, r) = report(&["verify", "jacobian", "--parity", "odd", "--kind", "antiherm", "--s", "4", "--trials", "20"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["checks"][0]["detail"]["cases"].as_array().unwrap().len(), 1);
}

#[test]
fn verify_reports_are_deterministic() {
    let args = ["verify", "equivalence", "--seed", "4", "--reps", "2000", "--seeds-per-case", "5"];
    let a = chiral(&args);
    let b = chiral(&["--threads", "2", "verify", "equivalence", "--seed", "4", "--reps", "2000", "--seeds-per-case", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    let ids: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["criterion"].as_str().unwrap()).collect();
    assert_eq!(ids, ["C1", "C2", "C9"]);
}

#[test]
fn verify_location_small() {
    let (code, r) = report(&["verify", "location", "--reps", "5000"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["checks"][0]["detail"]["herm"]["order"], 0);
}

#[test]
fn filters_only_apply_to_the_jacobian_suite() {
    let out = chiral(&["verify", "location", "--s", "2"]);
    assert_eq!(out.status.code(), Some(1));
}
