//! End-to-end checks of the fracfield binary: flag handling, config
//! errors, artifact layout, and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn fracfield(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracfield"));
    cmd.args(args);
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Lines of a report with the sole timestamp header dropped, for
/// comparing reruns.
fn stable_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with("# timestamp:")).collect()
}

#[test]
fn scheme_table_has_one_row_per_mesh_and_grows_with_beta() {
    let out = run(&mut fracfield(&["scheme-table"]));
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let data: Vec<Vec<usize>> = text
        .lines()
        .skip(2)
        .map(|l| l.split_whitespace().map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(data.len(), 4);
    for row in &data {
        assert_eq!(row.len(), 5);
        for pair in row[1..].windows(2) {
            assert!(pair[0] < pair[1], "node counts should grow with beta: {row:?}");
        }
    }
    assert_eq!(data[0][0], 511);
    assert_eq!(data[3][0], 4095);
}

#[test]
fn scheme_table_detail_prints_node_ranges() {
    let out = run(&mut fracfield(&[
        "scheme-table",
        "--betas",
        "0.5",
        "--meshes",
        "63",
        "--detail",
    ]));
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("K-="), "missing detail lines:\n{text}");
    assert!(text.contains("K+="));
}

#[test]
fn dry_run_plans_cells_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(fracfield(&[
        "study",
        "--dry-run",
        "--betas",
        "0.6,0.8",
        "--meshes",
        "31,63",
    ])
    .arg("--output")
    .arg(dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    for needle in ["beta=0.6", "beta=0.8", "N_h=31", "N_h=63", "k=", "nodes="] {
        assert!(text.contains(needle), "missing {needle}:\n{text}");
    }
    assert_eq!(
        std::fs::read_dir(dir.path()).unwrap().count(),
        0,
        "dry run must not write artifacts"
    );
}

#[test]
fn study_writes_rows_rates_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(fracfield(&[
        "study",
        "--betas",
        "0.8",
        "--meshes",
        "15,31",
        "--n-ok",
        "257",
        "--grid-points",
        "129",
        "--functionals",
        "abs:2",
        "--plot",
    ])
    .arg("--output")
    .arg(dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));

    let rows = read(dir.path(), "rows.csv");
    assert!(rows.starts_with("# fracfield v"));
    assert!(rows.contains("beta,d,N_h,h,k,K_minus,K_plus,functional,E_ref,E_disc,abs_error"));
    assert_eq!(rows.lines().filter(|l| l.starts_with("0.8,1,")).count(), 2);

    let rates = read(dir.path(), "rates.csv");
    assert!(rates.contains("beta,d,functional,rate_observed,rate_theory,intercept"));
    assert_eq!(rates.lines().filter(|l| l.starts_with("0.8,1,")).count(), 1);

    let svg = read(dir.path(), "plot_abs-2.svg");
    assert!(svg.contains("<svg"));
}

#[test]
fn study_reruns_differ_only_in_timestamp() {
    let args = [
        "study",
        "--betas",
        "0.75",
        "--meshes",
        "15,31",
        "--n-ok",
        "129",
        "--grid-points",
        "65",
        "--functionals",
        "abs:2",
        "--threads",
        "2",
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run(fracfield(&args).arg("--output").arg(a.path())).status.success());
    assert!(run(fracfield(&args).arg("--output").arg(b.path())).status.success());
    for name in ["rows.csv", "rates.csv"] {
        let left = read(a.path(), name);
        let right = read(b.path(), name);
        assert_eq!(stable_lines(&left), stable_lines(&right), "{name} drifted");
    }
}

#[test]
fn study_capped_cells_fail_the_run_and_name_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(fracfield(&[
        "study",
        "--betas",
        "0.7",
        "--meshes",
        "15,31",
        "--n-ok",
        "129",
        "--grid-points",
        "65",
        "--functionals",
        "abs:2",
        "--memory-cap",
        "1",
    ])
    .arg("--output")
    .arg(dir.path()));
    assert!(!out.status.success(), "capped cells must fail the run");
    let err = stderr(&out);
    assert!(err.contains("cell beta=0.7, n=15"), "diagnostic should name the cell:\n{err}");
    assert!(err.contains("cell beta=0.7, n=31"), "{err}");
    assert!(err.contains("study incomplete:"), "{err}");
    let rows = read(dir.path(), "rows.csv");
    let body: Vec<&str> = rows.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        body,
        ["beta,d,N_h,h,k,K_minus,K_plus,functional,E_ref,E_disc,abs_error"],
        "failed cells must not emit rows"
    );
}

#[test]
fn sample_is_reproducible_and_respects_count() {
    let args = ["sample", "--mesh", "15", "--beta", "0.6", "--seed", "9", "--count", "3"];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run(fracfield(&args).arg("--output").arg(a.path())).status.success());
    assert!(run(fracfield(&args).arg("--output").arg(b.path())).status.success());
    let left = read(a.path(), "samples.csv");
    let right = read(b.path(), "samples.csv");
    assert_eq!(stable_lines(&left), stable_lines(&right));
    // 3 realizations x 15 interior nodes, plus header material.
    assert_eq!(left.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3 * 15);
}

#[test]
fn sample_count_zero_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(fracfield(&["sample", "--mesh", "7", "--count", "0"])
        .arg("--output")
        .arg(dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    let text = read(dir.path(), "samples.csv");
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, vec!["realization,x,value"]);
}

#[test]
fn sample_over_memory_cap_suggests_operator_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(fracfield(&["sample", "--mesh", "63", "--memory-cap", "100"])
        .arg("--output")
        .arg(dir.path()));
    assert!(!out.status.success());
    assert!(stderr(&out).contains("--operator"), "{}", stderr(&out));
    let out = run(fracfield(&[
        "sample",
        "--mesh",
        "63",
        "--memory-cap",
        "100",
        "--operator",
        "--count",
        "1",
    ])
    .arg("--output")
    .arg(dir.path()));
    assert!(out.status.success(), "operator mode should dodge the cap: {}", stderr(&out));
}

#[test]
fn variance_grid_is_complete_with_boundary_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(fracfield(&[
        "variance",
        "--mesh",
        "31",
        "--beta",
        "0.75",
        "--n-ok",
        "1025",
        "--grid-points",
        "33",
    ])
    .arg("--output")
    .arg(dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    let text = read(dir.path(), "variance.csv");
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "x,sigma2_ref,sigma2_disc");
    assert_eq!(body.len(), 1 + 33);
    assert_eq!(body[1], "0,0e0,0e0");
    assert_eq!(body[33], "1,0e0,0e0");
}

#[test]
fn variance_at_unit_exponent_skips_quadrature() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(fracfield(&[
        "variance",
        "--mesh",
        "63",
        "--beta",
        "1",
        "--n-ok",
        "4097",
        "--grid-points",
        "17",
    ])
    .arg("--output")
    .arg(dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    let text = read(dir.path(), "variance.csv");
    assert!(text.contains("# calibration: exact"));
    let mid = text
        .lines()
        .find(|l| l.starts_with("0.5,"))
        .expect("midpoint row");
    let cols: Vec<f64> = mid.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
    assert!((cols[0] - cols[1]).abs() < 1e-4, "{mid}");
}

#[test]
fn config_file_feeds_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("study.toml");
    std::fs::write(&path, "betas = [0.7]\nmeshes = [15, 31]\nn_ok = 129\ngrid_points = 65\nfunctionals = [\"abs:2\"]\n").unwrap();
    let out = run(fracfield(&["study", "--dry-run"]).arg("--config").arg(&path));
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("beta=0.7"));
    assert!(!text.contains("beta=0.6"));

    let out = run(fracfield(&["study", "--dry-run", "--betas", "0.9"])
        .arg("--config")
        .arg(&path));
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("beta=0.9"));
    assert!(!text.contains("beta=0.7"));
}

#[test]
fn config_errors_name_the_culprit() {
    let out = run(fracfield(&["study"]).arg("--config").arg("/no/such/file.toml"));
    assert!(!out.status.success());
    assert!(stderr(&out).contains("/no/such/file.toml"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "khappa = 1.0\n").unwrap();
    let out = run(fracfield(&["study", "--dry-run"]).arg("--config").arg(&path));
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("bad.toml"), "{err}");
    assert!(err.contains("khappa"), "{err}");

    let out = run(&mut fracfield(&["study", "--dry-run", "--functionals", "abs:x"]));
    assert!(!out.status.success());
    assert!(stderr(&out).contains("abs:x"));
}

#[test]
fn output_env_var_sets_the_default_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(fracfield(&["sample", "--mesh", "7", "--count", "1"])
        .env("FRACFIELD_OUTPUT_DIR", dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("samples.csv").exists());
}

#[test]
fn invalid_dimension_is_rejected() {
    let out = run(&mut fracfield(&["study", "--dry-run", "--dimension", "3"]));
    assert!(!out.status.success());
    assert!(stderr(&out).contains("dimension"));
}
