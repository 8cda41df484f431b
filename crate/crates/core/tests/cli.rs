//! The `meanvalue` binary: exit codes, outputs and reproducibility.

use std::path::Path;
use std::process::Command;

use meanvalue::io::{read_report_body, strip_timestamp};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_meanvalue"))
}

fn run(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = bin().args(args).arg("--out").arg(dir).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn constants_prints_the_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout) = run(dir.path(), &["constants", "--a", "2", "--b", "0", "--c-constant", "1"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("eps_ab = 0.5  # derived"), "{stdout}");
    assert!(stdout.contains("hbar = 0.125  # derived"), "{stdout}");
    let body = read_report_body(&dir.path().join("constants.report")).unwrap();
    assert!(body.starts_with("# report: constants\n[ledger]\n"), "{body}");
}

#[test]
fn morrey_on_the_standard_family_holds() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout) = run(dir.path(), &["verify-morrey", "--spacing", "0.03125"]);
    assert_eq!(code, 0, "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.contains("Holds")).count(), 12);
}

#[test]
fn an_undersized_constant_fails_the_claim() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(dir.path(), &["verify-morrey", "--spacing", "0.03125", "--c-constant", "0.1"]);
    assert_eq!(code, 1);
}

#[test]
fn boundary_hypothesis_violation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    // ∂e/∂ν = 1 > 0 with B₀ = 0 and no fitting
    std::fs::write(
        &cfg,
        "[domain]\nkind = \"half_ball\"\ncenter = [0.0, 0.0]\nradius = 1.0\nspacing = 0.03125\ndimension = 2\n\
         [input]\ngenerator = { kind = \"linear_x0\", slope = -1.0, offset = 2.0 }\n[ledger]\nc = 0.7\n",
    )
    .unwrap();
    let (code, stdout) = run(dir.path(), &["verify-boundary", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2, "{stdout}");
    assert!(stdout.contains("HypothesisViolated"), "{stdout}");
}

#[test]
fn input_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(dir.path(), &["heinz-scan", "--config", "/nonexistent/run.toml"]);
    assert_eq!(code, 3);
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[params]\nbogus = 1\n").unwrap();
    let out = bin().args(["monotonicity", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
    let (code, _) = run(dir.path(), &["no-such-command"]);
    assert_eq!(code, 3);
}

#[test]
fn monotonicity_and_heinz_write_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[input]\ngenerator = { kind = \"quadratic\", center = [0.0, 0.0], amplitude = 1.0, offset = 1.0 }\n").unwrap();
    let c = cfg.to_str().unwrap();
    assert_eq!(run(dir.path(), &["monotonicity", "--config", c, "--spacing", "0.03125"]).0, 0);
    assert_eq!(run(dir.path(), &["heinz-scan", "--config", c, "--spacing", "0.03125"]).0, 0);
    let shell = std::fs::read_to_string(dir.path().join("monotonicity_profile.csv")).unwrap();
    assert_eq!(shell.lines().next().unwrap(), "r,M_r,quadrature_node_count,clipped_flag");
    let heinz = std::fs::read_to_string(dir.path().join("heinz_profile.csv")).unwrap();
    assert_eq!(heinz.lines().next().unwrap(), "rho,f");
    assert!(heinz.lines().count() > 64);
}

fn detect_config(dir: &Path) -> std::path::PathBuf {
    let cfg = dir.join("detect.toml");
    std::fs::write(
        &cfg,
        r#"
[domain]
kind = "ball"
center = [0.0, 0.0]
radius = 1.0
spacing = 0.00390625
dimension = 2

[ledger]
c = 1.0

[detect]
ledger_a = 0.15915494309189535
ledger_b = 0.0

[detect.planted]
schedule = [0.0625, 0.03125, 0.015625]
templates = [
  { kind = "bubble", center = [0.5, 0.0], lambda = 1.0 },
  { kind = "bubble", center = [-0.25, 0.4375], lambda = 1.0 },
  { kind = "bubble", center = [-0.25, -0.4375], lambda = 1.0 },
]
"#,
    )
    .unwrap();
    cfg
}

#[test]
fn detect_bubbles_finds_three_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = detect_config(dir.path());
    let (code, stdout) = run(dir.path(), &["detect-bubbles", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.starts_with("N = 3 "), "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("detect_bubbles.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "point,i,z_i,R_i,delta_i,energy,branch");
    assert_eq!(csv.lines().count(), 1 + 3 * 3);
}

#[test]
fn reports_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        assert_eq!(run(dir, &["estimate-c", "--spacing", "0.03125", "--seed", "3"]).0, 0);
        assert_eq!(run(dir, &["verify-interior", "--spacing", "0.03125", "--seed", "3"]).0, 0);
    }
    for name in ["estimate-c.report", "verify-interior.report"] {
        let x = std::fs::read_to_string(a.path().join(name)).unwrap();
        let y = std::fs::read_to_string(b.path().join(name)).unwrap();
        assert!(x.starts_with("# timestamp: "));
        assert_eq!(strip_timestamp(&x), strip_timestamp(&y), "{name}");
    }
}

#[test]
fn out_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["constants", "--a", "1", "--c-constant", "1"])
        .env("MEANVALUE_OUT", dir.path())
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(dir.path().join("constants.report").is_file());
}
