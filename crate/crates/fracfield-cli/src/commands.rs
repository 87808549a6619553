//! Subcommand implementations.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chrono::{SecondsFormat, Utc};
use log::warn;
use fracfield::fem::{assemble_mass, assemble_stiffness, UniformMesh};
use fracfield::grid::Grid;
use fracfield::linalg::{BandCholesky, SymBandMatrix};
use fracfield::ndarray::Array2;
use fracfield::quadrature::{
    assemble_q, calibrate_k, weak_theory_rho, Calibration, FractionalOperator, SincScheme,
};
use fracfield::report;
use fracfield::sampler::{cholesky_mass, sample_field, sample_field_dense, GENERATOR_NAME};
use fracfield::spectral::SpectralModel;
use fracfield::study::{run_study, CalibrationStrategy, StudyConfig};
use fracfield::Error;

/// Default output directory when `--output` is absent.
pub const OUTPUT_ENV: &str = "FRACFIELD_OUTPUT_DIR";

pub fn resolve_output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn resolve_calibration(
    strategy: CalibrationStrategy,
    dimension: usize,
    beta: f64,
) -> Result<Calibration> {
    Ok(match strategy {
        CalibrationStrategy::Experiment => Calibration::Experiment,
        CalibrationStrategy::WeakTheory => {
            Calibration::WeakTheory { rho: weak_theory_rho(dimension, beta)? }
        }
    })
}

/// Plans or runs the weak convergence study.
pub fn cmd_study(config: &StudyConfig, out_dir: &Path, plot: bool, dry_run: bool) -> Result<()> {
    if dry_run {
        config.validate()?;
        println!("planned study cells (nothing written):");
        for &beta in &config.betas {
            for &interior in &config.meshes {
                let mesh = UniformMesh::new(config.dimension, interior)?;
                let h = mesh.mesh_size();
                let step = calibrate_k(
                    h,
                    beta,
                    resolve_calibration(config.calibration, config.dimension, beta)?,
                )?;
                let scheme = SincScheme::new(beta, step)?;
                println!(
                    "  beta={beta} N_h={} h={h:.6} k={step:.4} nodes={}",
                    mesh.dof_count(),
                    scheme.node_count()
                );
            }
        }
        return Ok(());
    }

    let result = run_study(config)?;
    let stamp = timestamp();
    report::write_rows_csv(&mut create(out_dir, "rows.csv")?, &result, &stamp)?;
    report::write_rates_csv(&mut create(out_dir, "rates.csv")?, &result, &stamp)?;
    if plot {
        for functional in &config.functionals {
            let name = format!("plot_{}.svg", functional.spec_string().replace(':', "-"));
            report::plot_rates_svg(&mut create(out_dir, &name)?, &result, functional)?;
        }
    }
    if result.clamped > 0 {
        warn!("{} grid values were clamped to zero", result.clamped);
    }
    for fit in &result.rates {
        println!(
            "beta={} functional={} rate={:.3} (theory {:.1})",
            fit.beta, fit.functional, fit.rate, fit.rate_theory
        );
    }
    if !result.failures.is_empty() {
        for failure in &result.failures {
            eprintln!("failed: {failure}");
        }
        bail!("study incomplete: {} cells failed", result.failures.len());
    }
    Ok(())
}

/// Prints the quadrature node count table for a mesh/exponent grid.
pub fn cmd_scheme_table(
    dimension: usize,
    betas: &[f64],
    meshes: &[usize],
    detail: bool,
) -> Result<()> {
    if betas.is_empty() {
        bail!("no exponents requested");
    }
    if meshes.is_empty() {
        bail!("no meshes requested");
    }
    println!("d={dimension}, calibration k = -1/(beta ln h)");
    let header: Vec<String> = betas.iter().map(|b| format!("beta={b}")).collect();
    println!("{:>8} {}", "N_h", header.join(" "));
    for &interior in meshes {
        let mesh = UniformMesh::new(dimension, interior)?;
        let step_of = |beta: f64| calibrate_k(mesh.mesh_size(), beta, Calibration::Experiment);
        let mut cells = Vec::new();
        for (&beta, head) in betas.iter().zip(&header) {
            let scheme = SincScheme::new(beta, step_of(beta)?)?;
            cells.push(format!("{:>width$}", scheme.node_count(), width = head.len()));
        }
        println!("{:>8} {}", mesh.dof_count(), cells.join(" "));
        if detail {
            for &beta in betas {
                let step = step_of(beta)?;
                let scheme = SincScheme::new(beta, step)?;
                println!(
                    "         beta={beta}: k={step:.4} K-={} K+={}",
                    scheme.k_minus(),
                    scheme.k_plus()
                );
            }
        }
    }
    Ok(())
}

pub struct SampleParams {
    pub dimension: usize,
    pub kappa: f64,
    pub beta: f64,
    pub interior: usize,
    pub step: Option<f64>,
    pub seed: u64,
    pub count: usize,
    pub operator_mode: bool,
    pub memory_cap: usize,
}

/// Draws realizations and writes them as CSV. Realization i is seeded
/// with `seed + i`, so any single draw can be reproduced alone.
pub fn cmd_sample(params: &SampleParams, out_dir: &Path) -> Result<()> {
    let mesh = UniformMesh::new(params.dimension, params.interior)?;
    let mass = assemble_mass(&mesh);
    let stiffness = assemble_stiffness(&mesh);
    let shifted =
        SymBandMatrix::linear_comb(params.kappa * params.kappa, &mass, 1.0, &stiffness);
    let (step, calibration) = match params.step {
        Some(k) => (k, "manual"),
        None => (
            calibrate_k(mesh.mesh_size(), params.beta, Calibration::Experiment)?,
            "experiment",
        ),
    };
    let scheme = SincScheme::new(params.beta, step)?;
    let factor = cholesky_mass(&mass)?;
    let zeros = vec![0.0; mesh.dof_count()];

    let mut realizations = Vec::with_capacity(params.count);
    if params.operator_mode {
        let op = FractionalOperator::factorize(&mass, &shifted, &scheme)?;
        for i in 0..params.count {
            realizations.push(sample_field(
                &zeros,
                &factor,
                &op,
                &mesh,
                params.seed + i as u64,
            )?);
        }
    } else {
        let q = assemble_q(&mass, &shifted, &scheme, params.memory_cap).map_err(|e| {
            match e {
                Error::MemoryCap { .. } => {
                    anyhow!("{e}; rerun with --operator to sample without the dense matrix")
                }
                other => anyhow!(other),
            }
        })?;
        for i in 0..params.count {
            realizations.push(sample_field_dense(
                &q,
                &zeros,
                &factor,
                &mesh,
                params.seed + i as u64,
            )?);
        }
    }

    let provenance = vec![
        ("command", "sample".to_string()),
        ("dimension", params.dimension.to_string()),
        ("kappa", params.kappa.to_string()),
        ("beta", params.beta.to_string()),
        ("mesh", params.interior.to_string()),
        ("N_h", mesh.dof_count().to_string()),
        ("calibration", calibration.to_string()),
        ("k", step.to_string()),
        ("mode", if params.operator_mode { "operator" } else { "dense" }.to_string()),
        ("seed", params.seed.to_string()),
        ("count", params.count.to_string()),
        ("generator", GENERATOR_NAME.to_string()),
        ("timestamp", timestamp()),
    ];
    report::write_samples_csv(&mut create(out_dir, "samples.csv")?, &realizations, &provenance)?;
    Ok(())
}

pub struct VarianceParams {
    pub dimension: usize,
    pub kappa: f64,
    pub beta: f64,
    pub interior: usize,
    pub n_ok: usize,
    pub grid_points: usize,
    pub step: Option<f64>,
    pub memory_cap: usize,
}

/// Writes reference and discrete pointwise variances side by side.
///
/// The discrete column uses the sinc operator for beta below one and the
/// exact banded solve for beta equal to one.
pub fn cmd_variance(params: &VarianceParams, out_dir: &Path) -> Result<()> {
    let model =
        SpectralModel::new(params.dimension, params.kappa, params.beta, params.n_ok)?;
    let grid = Grid::uniform(params.dimension, params.grid_points)?;
    let sigma2_ref = model.variance_grid(&grid)?;

    let mesh = UniformMesh::new(params.dimension, params.interior)?;
    let mass = assemble_mass(&mesh);
    let stiffness = assemble_stiffness(&mesh);
    let shifted =
        SymBandMatrix::linear_comb(params.kappa * params.kappa, &mass, 1.0, &stiffness);

    let (q, step_label, calibration) = if params.beta < 1.0 {
        let (step, calibration) = match params.step {
            Some(k) => (k, "manual"),
            None => (
                calibrate_k(mesh.mesh_size(), params.beta, Calibration::Experiment)?,
                "experiment",
            ),
        };
        let scheme = SincScheme::new(params.beta, step)?;
        (
            assemble_q(&mass, &shifted, &scheme, params.memory_cap)?,
            step.to_string(),
            calibration,
        )
    } else {
        (dense_inverse(&shifted, params.memory_cap)?, "none".to_string(), "exact")
    };
    let (sigma2_disc, clamped) =
        fracfield::study::discrete_variance_grid(&q, &mass, &mesh, &grid)?;
    if clamped > 0 {
        warn!("{clamped} grid values were clamped to zero");
    }

    let provenance = vec![
        ("command", "variance".to_string()),
        ("dimension", params.dimension.to_string()),
        ("kappa", params.kappa.to_string()),
        ("beta", params.beta.to_string()),
        ("mesh", params.interior.to_string()),
        ("N_h", mesh.dof_count().to_string()),
        ("n_ok", params.n_ok.to_string()),
        ("grid_points", params.grid_points.to_string()),
        ("calibration", calibration.to_string()),
        ("k", step_label),
        ("generator", GENERATOR_NAME.to_string()),
        ("timestamp", timestamp()),
    ];
    report::write_variance_csv(
        &mut create(out_dir, "variance.csv")?,
        &grid,
        &sigma2_ref,
        &sigma2_disc,
        &provenance,
    )?;
    Ok(())
}

/// Dense inverse through the banded Cholesky factorization, for the
/// unit-exponent case where no quadrature is involved.
fn dense_inverse(matrix: &SymBandMatrix, memory_cap: usize) -> Result<Array2<f64>> {
    let n = matrix.dim();
    let required = n * n * std::mem::size_of::<f64>();
    if required > memory_cap {
        return Err(Error::MemoryCap { dim: n, required, cap: memory_cap }.into());
    }
    let chol = BandCholesky::factor(matrix)?;
    let mut columns = vec![0.0; n * n];
    for i in 0..n {
        columns[i * n + i] = 1.0;
    }
    chol.solve_columns_in_place(&mut columns, n);
    Ok(Array2::from_shape_vec((n, n), columns).expect("square layout"))
}
