use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qma(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qma"))
        .args(args)
        .current_dir(dir)
        .env("QMA_THREADS", "1")
        .output()
        .expect("qma runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn manufacture_t4(dir: &Path) {
    let out = qma(
        &[
            "manufacture",
            "--equation",
            "t4",
            "--seed-spec",
            "0.1*cos(1,0,0,0)*cos(0,1,0,0)",
            "--grid",
            "8,8,8,8",
            "--out-phi",
            "phi.field",
            "--out-f",
            "f.field",
        ],
        dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn reduce_emits_the_n2_t2_equation_as_json() {
    let dir = TempDir::new().unwrap();
    let out = qma(&["reduce", "--group", "n2", "--invariance", "t2", "--emit", "json"], dir.path());
    assert_eq!(code(&out), 0);
    let json: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(json["variant"], "T6");
    let terms = json["terms"].as_array().unwrap();
    // constant term 1 and the cross products -2 phi_15 phi_46, 2 phi_16 phi_45
    assert!(terms.iter().any(|t| t["coeff"] == "1" && t["monomial"].as_array().unwrap().is_empty()));
    assert!(terms
        .iter()
        .any(|t| t["coeff"] == "-2" && t["monomial"] == serde_json::json!([[1, 5], [4, 6]])));
    assert!(terms
        .iter()
        .any(|t| t["coeff"] == "2" && t["monomial"] == serde_json::json!([[1, 6], [4, 5]])));
}

#[test]
fn reduce_latex_ends_with_the_volume_form() {
    let dir = TempDir::new().unwrap();
    let out = qma(&["reduce", "--group", "n1", "--invariance", "t4"], dir.path());
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(
        text.trim(),
        r"\phi_{11} + \phi_{22} + \phi_{33} + \phi_{44} + 1 = \mathrm{e}^F"
    );
}

#[test]
fn usage_errors_exit_64() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&qma(&["bogus"], dir.path())), 64);
    assert_eq!(code(&qma(&["reduce", "--group", "n3", "--invariance", "s1"], dir.path())), 64);
    assert_eq!(code(&qma(&["solve", "--f", "missing.field"], dir.path())), 64);
    let bad_seed = qma(
        &[
            "manufacture",
            "--equation",
            "t5",
            "--seed-spec",
            "0.1*tan(1,0,0,0,0)",
            "--out-phi",
            "p",
            "--out-f",
            "f",
        ],
        dir.path(),
    );
    assert_eq!(code(&bad_seed), 64);
    let bad_grid = qma(
        &[
            "manufacture",
            "--equation",
            "t5",
            "--seed-spec",
            "random(2,0.1)",
            "--grid",
            "8,8",
            "--out-phi",
            "p",
            "--out-f",
            "f",
        ],
        dir.path(),
    );
    assert_eq!(code(&bad_grid), 64);
    assert!(!dir.path().join("p").exists());
}

#[test]
fn help_exits_zero() {
    let dir = TempDir::new().unwrap();
    let out = qma(&["--help"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("check-normalization"));
}

#[test]
fn check_normalization_rejects_constant_one() {
    let dir = TempDir::new().unwrap();
    let grid = qma::fields::PeriodicGrid::new(vec![8; 5]).unwrap();
    let f = qma::fields::ScalarField::constant(&grid, 1.0);
    qma::fields::io::save_field(&f, &dir.path().join("bad.field")).unwrap();
    let out = qma(&["check-normalization", "--f", "bad.field"], dir.path());
    assert_eq!(code(&out), 2);
    let printed: f64 = stdout(&out).trim().parse().unwrap();
    assert!((printed - (1f64.exp() - 1.0)).abs() < 1e-12);
}

#[test]
fn t4_solve_succeeds_and_recovers_the_seed() {
    let dir = TempDir::new().unwrap();
    manufacture_t4(dir.path());
    let check = qma(&["check-normalization", "--f", "f.field"], dir.path());
    assert_eq!(code(&check), 0);
    let out = qma(
        &["solve", "--equation", "t4", "--f", "f.field", "--out", "phi_out.field", "--trace", "trace.csv"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let phi_star = qma::fields::io::load_field(&dir.path().join("phi.field")).unwrap();
    let phi = qma::fields::io::load_field(&dir.path().join("phi_out.field")).unwrap();
    let err = qma::verify::compare_mod_constant(&phi, &phi_star).unwrap();
    assert!(err < 1e-10, "recovery error {err:e}");
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,newton_iters,residual_sup,lambda_min,harnack_margin,minA,minB,strong_margin,krylov_iters_total"
    );
    assert!(lines.last().unwrap().starts_with("1e0,"));
}

#[test]
fn solve_reads_a_config_file() {
    let dir = TempDir::new().unwrap();
    manufacture_t4(dir.path());
    std::fs::write(
        dir.path().join("run.cfg"),
        "# poisson run\nequation = t4\ninput = f.field\noutput = phi_cfg.field\nnewton_tol = 1e-11\n",
    )
    .unwrap();
    let out = qma(&["solve", "--config", "run.cfg"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("phi_cfg.field").exists());

    std::fs::write(dir.path().join("bad.cfg"), "equation = t4\ncolour = blue\n").unwrap();
    let out = qma(&["solve", "--config", "bad.cfg"], dir.path());
    assert_eq!(code(&out), 64);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let first = TempDir::new().unwrap();
    let second = TempDir::new().unwrap();
    for dir in [first.path(), second.path()] {
        manufacture_t4(dir);
        let out = qma(
            &["solve", "--equation", "t4", "--f", "f.field", "--out", "out.field", "--trace", "trace.csv"],
            dir,
        );
        assert_eq!(code(&out), 0);
    }
    for name in ["phi.field", "f.field", "out.field", "trace.csv"] {
        let a = std::fs::read(first.path().join(name)).unwrap();
        let b = std::fs::read(second.path().join(name)).unwrap();
        assert!(a == b, "{name} differs between runs");
    }
}

#[test]
fn audit_reports_a_negative_strong_margin_for_a_bad_t6_field() {
    let dir = TempDir::new().unwrap();
    let grid = qma::fields::PeriodicGrid::new(vec![8; 6]).unwrap();
    let spec: qma::verify::SeedSpec = "0.05*sin(0,0,1,0,0,0)*sin(0,0,0,0,1,0), 0.05*sin(0,0,1,0,0,0)*sin(0,0,0,0,0,1)"
        .parse()
        .unwrap();
    let phi = qma::verify::seed_field(&spec, &grid).unwrap();
    let f = qma::fields::ScalarField::zeros(&grid);
    qma::fields::io::save_field(&phi, &dir.path().join("phi.field")).unwrap();
    qma::fields::io::save_field(&f, &dir.path().join("f.field")).unwrap();
    let out = qma(
        &["audit", "--equation", "t6", "--phi", "phi.field", "--f", "f.field", "--out", "audit.json"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("audit.json")).unwrap()).unwrap();
    let margin = report["ellipticity"]["strong_margin"].as_f64().unwrap();
    assert!(margin < 0.0, "strong margin {margin}");
    assert_eq!(report["ellipticity"]["strong_condition"], false);
}
