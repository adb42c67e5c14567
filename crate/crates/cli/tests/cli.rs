use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fracfact(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracfact"))
        .args(args)
        .current_dir(dir)
        .env_remove("FRACFACT_MAX_FIBER_POINTS")
        .env_remove("FRACFACT_MAX_GRAVER")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/wave_solder")
}

/// 2^(4-1) with D=ABC, main effects, small counts.
fn small_problem() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.txt"), "4 1\nD=ABC\n").unwrap();
    std::fs::write(dir.path().join("m.txt"), "A/B/C/D\n").unwrap();
    std::fs::write(dir.path().join("y.txt"), "3\n1\n0\n2\n1\n4\n0\n1\n").unwrap();
    dir
}

#[test]
fn design_prints_alias_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracfact(dir.path(), &["design", "--bundle", "wave_solder"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("I = ABDE = ABFG = ACDF = ACEG = BCDG = BCEF = DEFG"));
    assert!(s.contains("  E = ABD = ACG = BCF = DFG\n"));
    assert!(s.contains("  AB = DE = FG = ACDG = ACEF = BCDF = BCEG\n"));
    assert!(s.contains("resolution: 4 (IV)"));

    let o = fracfact(dir.path(), &["design", "--bundle", "wave_solder", "--max-alias-len", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["runs"], 16);
    assert_eq!(v["aliases"][7], serde_json::json!(["AB", "DE", "FG"]));
}

#[test]
fn wave_solder_test_reports_both_p_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracfact(
        dir.path(),
        &["test", "--bundle", "wave_solder", "--samples", "20000", "--burn-in", "2000", "--histogram", "h.csv", "--fitted", "f.csv"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("G2 = 19.0927, df = 6"));
    assert!(s.contains("p-value (asymptotic chi-square): 0.0040"));
    assert!(s.contains("p-value (MCMC): "));
    assert!(s.contains("moves: 23 (imported"));
    let h = std::fs::read_to_string(dir.path().join("h.csv")).unwrap();
    assert!(h.starts_with("midpoint,count,density,chisq_density\n"));
    assert_eq!(h.lines().count(), 101);
    let f = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
    let first: Vec<&str> = f.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&first[..2], ["1", "69"]);
    assert!((first[2].parse::<f64>().unwrap() - 64.53).abs() < 0.01);
}

#[test]
fn binomial_bundle_runs() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracfact(dir.path(), &["--format", "json", "test", "--bundle", "windshield", "--samples", "5000", "--burn-in", "500"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["family"], "binomial");
    assert_eq!(v["df"], 3);
    assert_eq!(v["moves_provenance"], "computed");
}

#[test]
fn enumerate_small_and_saturated() {
    let dir = small_problem();
    let o = fracfact(dir.path(), &["--format", "json", "enumerate", "--design", "d.txt", "--model", "m.txt", "--data", "y.txt", "--points", "pts.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["fiber_size"], 10);
    let p = v["p_exact"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
    let pts = std::fs::read_to_string(dir.path().join("pts.csv")).unwrap();
    assert_eq!(pts.lines().count(), 11);
    let total: f64 = pts.lines().skip(1).map(|l| l.split(',').nth(8).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);

    std::fs::write(dir.path().join("sat.txt"), "ABC\n").unwrap();
    let o = fracfact(dir.path(), &["enumerate", "--design", "d.txt", "--model", "sat.txt", "--data", "y.txt"]);
    let s = stdout(&o);
    assert!(s.contains("fiber size: 1\n"), "{s}");
    assert!(s.contains("p-value (exact): 1.0000"));
    assert!(s.contains("G2 = 0.0000"));
}

#[test]
fn basis_import_and_certification() {
    let dir = tempfile::tempdir().unwrap();
    let m = data_dir().join("cd_variant_x0t.mat");
    let b = data_dir().join("cd_variant_basis.mar");
    let o = fracfact(dir.path(), &["basis", "--import", b.to_str().unwrap(), "--matrix", m.to_str().unwrap(), "--output", "out.mar"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("moves: 35 (imported)"));
    assert!(std::fs::read_to_string(dir.path().join("out.mar")).unwrap().starts_with("35 16\n"));

    let small = small_problem();
    let o = fracfact(small.path(), &["basis", "--compute", "--design", "d.txt", "--model", "m.txt", "--verify-connectivity", "--total", "5"]);
    let s = stdout(&o);
    assert!(s.contains("moves: 6 (computed)"));
    assert!(s.contains("all fibers connected"));
}

#[test]
fn correspond_emits_primitive_moves() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.txt"), "3 0\n").unwrap();
    std::fs::write(dir.path().join("m.txt"), "AB/AC\n").unwrap();
    let o = fracfact(dir.path(), &["correspond", "--design", "d.txt", "--model", "m.txt", "--output", "p.mar"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("hierarchical model of the 2^3 table: AB/AC"));
    assert!(s.contains("decomposable: 2 primitive moves"));
    assert!(std::fs::read_to_string(dir.path().join("p.mar")).unwrap().starts_with("2 8\n"));

    let o = fracfact(dir.path(), &["correspond", "--bundle", "wave_solder"]);
    assert!(stdout(&o).contains("parity terms"));
}

#[test]
fn exit_codes() {
    let dir = small_problem();
    let p = dir.path();
    assert_eq!(fracfact(p, &[]).status.code(), Some(1));
    assert_eq!(fracfact(p, &["test", "--bundle", "wave_solder", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(fracfact(p, &["--help"]).status.code(), Some(0));

    std::fs::write(p.join("bad.txt"), "4 1\nD=ABQ\n").unwrap();
    assert_eq!(fracfact(p, &["design", "bad.txt"]).status.code(), Some(2));
    assert_eq!(fracfact(p, &["design", "missing.txt"]).status.code(), Some(2));
    std::fs::write(p.join("short.txt"), "1\n2\n").unwrap();
    assert_eq!(fracfact(p, &["enumerate", "--design", "d.txt", "--model", "m.txt", "--data", "short.txt"]).status.code(), Some(2));
    let o = fracfact(p, &["enumerate", "--design", "d.txt", "--model", "m.txt", "--data", "y.txt", "--family", "binomial"]);
    assert_eq!(o.status.code(), Some(2));

    let o = Command::new(env!("CARGO_BIN_EXE_fracfact"))
        .args(["enumerate", "--design", "d.txt", "--model", "m.txt", "--data", "y.txt"])
        .current_dir(p)
        .env("FRACFACT_MAX_FIBER_POINTS", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    let o = Command::new(env!("CARGO_BIN_EXE_fracfact"))
        .args(["basis", "--compute", "--bundle", "wave_solder"])
        .current_dir(p)
        .env("FRACFACT_MAX_GRAVER", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn manifest_replay_reproduces_outputs() {
    let dir = small_problem();
    let p = dir.path();
    let args = [
        "--manifest", "run.json", "test", "--design", "d.txt", "--model", "m.txt", "--data", "y.txt", "--samples", "20000", "--burn-in",
        "1000", "--seed", "11", "--chains", "2", "--histogram", "h.csv", "--output", "r.json",
    ];
    let first = fracfact(p, &args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("run.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["command"]["batches"], 100);
    assert_eq!(manifest["command"]["budgets"]["max_fiber_points"], 2_000_000);
    assert_eq!(manifest["inputs"].as_object().unwrap().len(), 3);

    let again = fracfact(p, &["replay", "run.json", "--out-dir", "again"]);
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
    assert_eq!(again.stdout, first.stdout);
    for f in ["h.csv", "r.json"] {
        assert_eq!(std::fs::read(p.join(f)).unwrap(), std::fs::read(p.join("again").join(f)).unwrap());
    }

    std::fs::write(p.join("y.txt"), "3\n1\n0\n2\n1\n4\n0\n2\n").unwrap();
    let o = fracfact(p, &["replay", "run.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("y.txt"));
}
