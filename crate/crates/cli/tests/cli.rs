use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_saddleflow"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run_config(name: &str, out: &Path) -> Output {
    bin()
        .args(["run", config(name).to_str().unwrap(), "--output-dir", out.to_str().unwrap(), "--quiet"])
        .output()
        .unwrap()
}

fn report(out: &Path) -> String {
    fs::read_to_string(out.join("report.txt")).unwrap()
}

/// Value after `key: ` on the report line starting with `key`.
fn field<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in report:\n{report}"))
}

fn c_fit(report: &str) -> f64 {
    let f = field(report, "rate_fit");
    f.split(',').next().unwrap().trim_start_matches("c_fit ").parse().unwrap()
}

#[test]
fn quadratic_standard_passes_its_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("quadratic_standard.toml", dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty(), "--quiet must print nothing");
    let r = report(dir.path());
    assert_eq!(field(&r, "rate_verdict"), "pass");
    assert!(c_fit(&r) >= 0.95);
    assert!(field(&r, "certificate").contains("sandwich holds"));
    let header = fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    assert!(header.starts_with("t,residual,distance\n"));
}

#[test]
fn bilinear_standard_is_flagged_as_not_converging() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_config("bilinear_standard.toml", dir.path()).status.success());
    assert!(field(&report(dir.path()), "convergence").starts_with("not converging"));
}

#[test]
fn bilinear_augmented_converges() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_config("bilinear_augmented.toml", dir.path()).status.success());
    let r = report(dir.path());
    assert_eq!(field(&r, "convergence"), "converged");
    assert!(field(&r, "certificate").contains("sandwich holds"));
}

#[test]
fn reruns_are_byte_identical() {
    for name in ["quadratic_standard.toml", "qp_proximal.toml", "separable_reduced.toml"] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert!(run_config(name, a.path()).status.success());
        assert!(run_config(name, b.path()).status.success());
        let ta = fs::read(a.path().join("trajectory.csv")).unwrap();
        let tb = fs::read(b.path().join("trajectory.csv")).unwrap();
        assert_eq!(ta, tb, "{name}");
    }
}

#[test]
fn seed_override_changes_the_start() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let path = config("quadratic_standard.toml");
    for (dir, seed) in [(&a, "1"), (&b, "2")] {
        let out = bin()
            .args(["run", path.to_str().unwrap(), "--seed", seed, "--output-dir", dir.path().to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success());
        assert!(String::from_utf8_lossy(&out.stdout).contains(&format!("seed: {seed}")));
    }
    let ta = fs::read_to_string(a.path().join("trajectory.csv")).unwrap();
    let tb = fs::read_to_string(b.path().join("trajectory.csv")).unwrap();
    assert_ne!(ta.lines().nth(1), tb.lines().nth(1));
}

fn compare_table(names: &[&str], out: &Path) -> Vec<Vec<String>> {
    let mut cmd = bin();
    cmd.arg("compare");
    for n in names {
        cmd.arg(config(n));
    }
    let res = cmd.args(["--output-dir", out.to_str().unwrap(), "--quiet"]).output().unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(out.join("compare.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("config,problem,algorithm,c_bound,c_fit,wall_time,final_residual"));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn preconditioned_beats_proximal_on_the_same_qp() {
    let dir = tempfile::tempdir().unwrap();
    let rows = compare_table(&["qp_proximal.toml", "qp_preconditioned.toml"], dir.path());
    assert_eq!(rows.len(), 2);
    let fit = |row: &Vec<String>| row[4].parse::<f64>().unwrap();
    assert_eq!(rows[0][2], "proximal");
    assert_eq!(rows[1][2], "preconditioned_uy");
    assert!(fit(&rows[1]) >= fit(&rows[0]));
    assert!(dir.path().join("qp_proximal").join("trajectory.csv").exists());
}

#[test]
fn reduced_and_preconditioned_pass_their_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let rows = compare_table(&["separable_reduced.toml", "separable_preconditioned.toml"], dir.path());
    for row in &rows {
        let bound: f64 = row[3].parse().unwrap();
        let fit: f64 = row[4].parse().unwrap();
        assert!(fit >= 0.9 * bound, "{row:?}");
    }
}

#[test]
fn empty_compare_is_a_usage_error() {
    let out = bin().arg("compare").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("usage"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = bin().args(["run", "no/such/file.toml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[problem]\nkind = \"bilinear\"\n[algorithm]\nkind = \"reduced\"\n").unwrap();
    let out = bin()
        .args(["run", bad.to_str().unwrap(), "--output-dir", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not available"));
}

#[test]
fn blow_up_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("blowup.toml");
    fs::write(
        &cfg,
        "initial = [1.0, 0.0]\n[problem]\nkind = \"bilinear\"\n[algorithm]\nkind = \"standard\"\n\
         [integrator]\nmethod = \"euler\"\nstep = 1000.0\nhorizon = 1000000.0\n",
    )
    .unwrap();
    let out = bin()
        .args(["run", cfg.to_str().unwrap(), "--output-dir", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-finite"));
}

#[test]
fn min_cost_flow_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_config("min_cost_flow.toml", dir.path()).status.success());
    let r = report(dir.path());
    assert_eq!(field(&r, "convergence"), "converged");
    let gap: f64 = field(&r, "oracle_objective")
        .split("relative gap ")
        .nth(1)
        .unwrap()
        .trim_end_matches(')')
        .parse()
        .unwrap();
    assert!(gap <= 1e-4);
}

#[test]
fn lasso_pipeline_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_config("lasso_pipeline.toml", dir.path()).status.success());
    let d: f64 = field(&report(dir.path()), "oracle_distance_inf").parse().unwrap();
    assert!(d <= 1e-5);
}

#[test]
fn every_example_config_runs() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        if name == "min_cost_flow.toml" || name == "lasso_pipeline.toml" {
            continue;
        }
        let out = tempfile::tempdir().unwrap();
        let res = run_config(&name, out.path());
        assert!(res.status.success(), "{name}: {}", String::from_utf8_lossy(&res.stderr));
        assert!(out.path().join("trajectory.csv").exists());
    }
}
