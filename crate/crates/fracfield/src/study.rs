//! The weak convergence study: discrete variances, functional
//! expectations, weak errors and least-squares rates over a mesh
//! hierarchy.
//!
//! The variance of the sampled field admits the closed form
//! sigma_h(x)^2 = phi(x)^T Q M Q^T phi(x), so expectations of the study
//! functionals reduce to one-dimensional integrals over the pointwise
//! variance and no Monte Carlo estimation enters the error pipeline.

use log::warn;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::fem::{assemble_mass, assemble_stiffness, basis_eval, UniformMesh};
use crate::grid::Grid;
use crate::linalg::{dense_times_band, par_matmul, symmetrize, SymBandMatrix};
use crate::quadrature::{assemble_q, calibrate_k, weak_theory_rho, Calibration, SincScheme};
use crate::spectral::{reference_expectation, Functional, SpectralModel};

/// Grid values below this are a broken operator, not roundoff.
const CLAMP_FLOOR: f64 = -1e-12;

/// Rule selecting the quadrature step for each mesh of the study.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CalibrationStrategy {
    /// `k = -1/(beta ln h)`.
    Experiment,
    /// `k = pi^2 / (2 rho |ln h|)` with `rho` the theoretical weak rate
    /// for the dimension and exponent at hand.
    WeakTheory,
}

impl CalibrationStrategy {
    pub fn name(self) -> &'static str {
        match self {
            CalibrationStrategy::Experiment => "experiment",
            CalibrationStrategy::WeakTheory => "weak-theory",
        }
    }

    fn resolve(self, dimension: usize, beta: f64) -> Result<Calibration> {
        match self {
            CalibrationStrategy::Experiment => Ok(Calibration::Experiment),
            CalibrationStrategy::WeakTheory => {
                Ok(Calibration::WeakTheory { rho: weak_theory_rho(dimension, beta)? })
            }
        }
    }
}

impl std::fmt::Display for CalibrationStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CalibrationStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "experiment" => Ok(CalibrationStrategy::Experiment),
            "weak-theory" => Ok(CalibrationStrategy::WeakTheory),
            other => Err(Error::BadConfig(format!("unknown calibration '{other}'"))),
        }
    }
}

/// Parameters of one study run.
#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub dimension: usize,
    pub kappa: f64,
    pub betas: Vec<f64>,
    /// Interior nodes per axis for each mesh of the hierarchy.
    pub meshes: Vec<usize>,
    pub calibration: CalibrationStrategy,
    /// Series truncation per axis for the reference solution.
    pub n_ok: usize,
    /// Points per axis of the shared evaluation grid.
    pub grid_points: usize,
    pub functionals: Vec<Functional>,
    /// Byte budget for each dense operator assembly.
    pub memory_cap: usize,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimension != 1 && self.dimension != 2 {
            return Err(Error::InvalidDimension(self.dimension));
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::Negative { name: "kappa", value: self.kappa });
        }
        if self.betas.is_empty() {
            return Err(Error::BadConfig("no exponents requested".into()));
        }
        for &beta in &self.betas {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::InvalidBeta(beta));
            }
            if 4.0 * beta / self.dimension as f64 <= 1.0 {
                return Err(Error::VarianceDiverges { beta, d: self.dimension });
            }
        }
        if self.meshes.len() < 2 {
            return Err(Error::TooFewPoints(self.meshes.len()));
        }
        if self.meshes.contains(&0) {
            return Err(Error::InvalidMesh(0));
        }
        if self.n_ok == 0 {
            return Err(Error::InvalidTruncation(0));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidGrid(self.grid_points));
        }
        if self.functionals.is_empty() {
            return Err(Error::BadConfig("no functionals requested".into()));
        }
        for f in &self.functionals {
            f.validate()?;
        }
        Ok(())
    }
}

/// One (beta, mesh, functional) record of the study table.
#[derive(Clone, Debug)]
pub struct StudyRow {
    pub beta: f64,
    pub dimension: usize,
    pub dof_count: usize,
    pub mesh_size: f64,
    pub step: f64,
    pub k_minus: usize,
    pub k_plus: usize,
    pub functional: Functional,
    pub e_ref: f64,
    pub e_disc: f64,
    pub abs_error: f64,
}

/// Fitted line `ln err = intercept + rate ln h` for one (beta, functional).
#[derive(Clone, Debug)]
pub struct RateFit {
    pub beta: f64,
    pub functional: Functional,
    pub intercept: f64,
    pub rate: f64,
    pub rate_theory: f64,
}

/// A study cell or fit that could not be completed.
#[derive(Debug)]
pub enum StudyFailure {
    Cell { beta: f64, interior: usize, error: Error },
    Fit { beta: f64, functional: Functional, error: Error },
}

impl std::fmt::Display for StudyFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StudyFailure::Cell { beta, interior, error } => {
                write!(f, "cell beta={beta}, n={interior}: {error}")
            }
            StudyFailure::Fit { beta, functional, error } => {
                write!(f, "rate fit beta={beta}, functional {functional}: {error}")
            }
        }
    }
}

/// Full study output. Rows are ordered by (beta, mesh, functional) in
/// config order; failed cells are recorded and do not abort the rest.
#[derive(Debug)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
    pub rates: Vec<RateFit>,
    pub failures: Vec<StudyFailure>,
    /// Grid points whose discrete variance was clamped up to zero.
    /// Anything nonzero deserves suspicion.
    pub clamped: usize,
}

/// `min{4 beta - d, 2}`, the weak rate predicted by theory.
pub fn theory_rate(dimension: usize, beta: f64) -> f64 {
    (4.0 * beta - dimension as f64).min(2.0)
}

/// `|E_ref - E_disc|`.
pub fn weak_error(e_ref: f64, e_disc: f64) -> f64 {
    (e_ref - e_disc).abs()
}

/// Ordinary least squares of `ln err` against `ln h`; returns
/// `(intercept, rate)`. Points with zero error are dropped with a
/// warning; fewer than two survivors is an error.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(h, err) in points {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidMeshSize(h));
        }
        if !(err >= 0.0) || !err.is_finite() {
            return Err(Error::Negative { name: "weak error", value: err });
        }
        if err == 0.0 {
            warn!("dropping exact tie at h={h} from the rate fit");
            continue;
        }
        xs.push(h.ln());
        ys.push(err.ln());
    }
    if xs.len() < 2 {
        return Err(Error::TooFewPoints(xs.len()));
    }
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let rate = sxy / sxx;
    Ok((ybar - rate * xbar, rate))
}

/// Discrete pointwise variances `phi(x)^T Q M Q^T phi(x)` on a grid.
///
/// The covariance `C = (Q M) Q^T` is formed once, symmetrized, and read
/// through the sparse basis vectors. Returns the values and the number
/// of negative entries clamped to zero; values below the roundoff floor
/// are rejected outright.
pub fn discrete_variance_grid(
    q: &Array2<f64>,
    mass: &SymBandMatrix,
    mesh: &UniformMesh,
    grid: &Grid,
) -> Result<(Vec<f64>, usize)> {
    let n = mesh.dof_count();
    if q.nrows() != n || q.ncols() != n || mass.dim() != n {
        return Err(Error::ShapeMismatch(format!(
            "operator {}x{}, mass dimension {}, mesh unknowns {}",
            q.nrows(),
            q.ncols(),
            mass.dim(),
            n
        )));
    }
    if grid.dimension() != mesh.dimension() {
        return Err(Error::ShapeMismatch(format!(
            "grid dimension {} against mesh dimension {}",
            grid.dimension(),
            mesh.dimension()
        )));
    }
    let qm = dense_times_band(q, mass);
    let mut cov = par_matmul(qm.view(), q.t());
    symmetrize(&mut cov);

    let mut values = vec![0.0; grid.len()];
    let mut clamped = 0usize;
    for (idx, value) in values.iter_mut().enumerate() {
        let support = basis_eval(mesh, &grid.point(idx))?;
        let mut s = 0.0;
        for &(a, wa) in &support {
            for &(b, wb) in &support {
                s += wa * wb * cov[(a, b)];
            }
        }
        if s < CLAMP_FLOOR {
            return Err(Error::Negative { name: "discrete variance", value: s });
        }
        if s < 0.0 {
            clamped += 1;
            s = 0.0;
        }
        *value = s;
    }
    Ok((values, clamped))
}

/// Expectation of a functional from the discrete variance grid. Same
/// integration path as [`reference_expectation`], fed sigma_h^2.
pub fn discrete_expectation(
    functional: &Functional,
    variance: &[f64],
    grid: &Grid,
) -> Result<f64> {
    reference_expectation(functional, variance, grid)
}

struct CellOutput {
    mesh_size: f64,
    step: f64,
    k_minus: usize,
    k_plus: usize,
    dof_count: usize,
    expectations: Vec<f64>,
    clamped: usize,
}

fn study_cell(
    config: &StudyConfig,
    beta: f64,
    interior: usize,
    grid: &Grid,
) -> Result<CellOutput> {
    let mesh = UniformMesh::new(config.dimension, interior)?;
    let mass = assemble_mass(&mesh);
    let stiffness = assemble_stiffness(&mesh);
    let shifted =
        SymBandMatrix::linear_comb(config.kappa * config.kappa, &mass, 1.0, &stiffness);
    let h = mesh.mesh_size();
    let step = calibrate_k(h, beta, config.calibration.resolve(config.dimension, beta)?)?;
    let scheme = SincScheme::new(beta, step)?;
    let q = assemble_q(&mass, &shifted, &scheme, config.memory_cap)?;
    let (sigma2, clamped) = discrete_variance_grid(&q, &mass, &mesh, grid)?;
    let expectations = config
        .functionals
        .iter()
        .map(|f| discrete_expectation(f, &sigma2, grid))
        .collect::<Result<Vec<f64>>>()?;
    Ok(CellOutput {
        mesh_size: h,
        step,
        k_minus: scheme.k_minus(),
        k_plus: scheme.k_plus(),
        dof_count: mesh.dof_count(),
        expectations,
        clamped,
    })
}

/// Runs the full study: per beta, one reference variance grid and its
/// functional expectations, then every mesh of the hierarchy, then the
/// per-functional rate fits.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let grid = Grid::uniform(config.dimension, config.grid_points)?;
    let mut rows = Vec::new();
    let mut rates = Vec::new();
    let mut failures = Vec::new();
    let mut clamped = 0usize;

    for &beta in &config.betas {
        let model = SpectralModel::new(config.dimension, config.kappa, beta, config.n_ok)?;
        let sigma2_ref = model.variance_grid(&grid)?;
        let e_ref = config
            .functionals
            .iter()
            .map(|f| reference_expectation(f, &sigma2_ref, &grid))
            .collect::<Result<Vec<f64>>>()?;

        for &interior in &config.meshes {
            match study_cell(config, beta, interior, &grid) {
                Ok(cell) => {
                    clamped += cell.clamped;
                    for (fi, functional) in config.functionals.iter().enumerate() {
                        rows.push(StudyRow {
                            beta,
                            dimension: config.dimension,
                            dof_count: cell.dof_count,
                            mesh_size: cell.mesh_size,
                            step: cell.step,
                            k_minus: cell.k_minus,
                            k_plus: cell.k_plus,
                            functional: functional.clone(),
                            e_ref: e_ref[fi],
                            e_disc: cell.expectations[fi],
                            abs_error: weak_error(e_ref[fi], cell.expectations[fi]),
                        });
                    }
                }
                Err(error) => failures.push(StudyFailure::Cell { beta, interior, error }),
            }
        }

        for functional in &config.functionals {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.beta == beta && r.functional == *functional)
                .map(|r| (r.mesh_size, r.abs_error))
                .collect();
            if points.is_empty() {
                continue;
            }
            match fit_rate(&points) {
                Ok((intercept, rate)) => rates.push(RateFit {
                    beta,
                    functional: functional.clone(),
                    intercept,
                    rate,
                    rate_theory: theory_rate(config.dimension, beta),
                }),
                Err(error) => failures.push(StudyFailure::Fit {
                    beta,
                    functional: functional.clone(),
                    error,
                }),
            }
        }
    }

    Ok(StudyResult { config: config.clone(), rows, rates, failures, clamped })
}
