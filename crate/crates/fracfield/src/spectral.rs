//! Spectral reference solution on the unit interval and square.
//!
//! The shifted Dirichlet Laplacian `kappa^2 - Laplacian` has the explicit
//! eigenpairs
//!
//! ```text
//! lambda_j = kappa^2 + pi^2 |j|^2,    e_j(x) = prod_i sqrt(2) sin(pi j_i x_i),
//! ```
//!
//! indexed by integer vectors `j >= 1`. The solution of the fractional SPDE
//! is Gaussian with pointwise variance
//!
//! ```text
//! sigma(x)^2 = sum_j lambda_j^(-2 beta) e_j(x)^2,
//! ```
//!
//! and expectations of the functionals studied here reduce to quadrature of
//! closed-form functions of `sigma^2`. Truncating the sum at `n_ok` modes per
//! dimension and integrating with the trapezoidal rule on a matching grid
//! gives the reference values that discrete samples are measured against.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::par_matmul;
use ndarray::Array2;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Truncated spectral model of the solution field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralModel {
    dimension: usize,
    kappa: f64,
    beta: f64,
    n_ok: usize,
}

impl SpectralModel {
    /// A model in dimension 1 or 2 with `kappa >= 0`, `beta` in `(0, 1]`
    /// (the endpoint is admitted for integer-order reference cases), and at
    /// least one retained mode per dimension.
    pub fn new(dimension: usize, kappa: f64, beta: f64, n_ok: usize) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::InvalidDimension(dimension));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::Negative { name: "kappa", value: kappa });
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidBeta(beta));
        }
        if n_ok == 0 {
            return Err(Error::InvalidTruncation(n_ok));
        }
        Ok(SpectralModel { dimension, kappa, beta, n_ok })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_ok(&self) -> usize {
        self.n_ok
    }

    /// Eigenvalue `kappa^2 + pi^2 |j|^2` for a multi-index with `j_i >= 1`.
    pub fn eigenvalue(&self, j: &[usize]) -> f64 {
        debug_assert_eq!(j.len(), self.dimension);
        debug_assert!(j.iter().all(|&ji| ji >= 1));
        let sq: f64 = j.iter().map(|&ji| (ji * ji) as f64).sum();
        self.kappa * self.kappa + PI * PI * sq
    }

    /// Eigenvalue and L2-normalised eigenfunction for the multi-index `j`.
    pub fn eigenpair(&self, j: &[usize]) -> (f64, Eigenfunction) {
        (self.eigenvalue(j), Eigenfunction { j: j.to_vec() })
    }

    fn require_summable(&self) -> Result<()> {
        // The variance series behaves like sum over |j| of |j|^(d-1) *
        // |j|^(-4 beta), finite iff 4 beta / d > 1.
        if 4.0 * self.beta <= self.dimension as f64 {
            return Err(Error::VarianceDiverges { beta: self.beta, d: self.dimension });
        }
        Ok(())
    }

    /// Variance of the solution at one point, by direct summation of the
    /// truncated series in ascending index order.
    ///
    /// Cost is `n_ok^d` terms; prefer [`Self::variance_grid`] for whole-grid
    /// evaluation.
    pub fn variance_at(&self, x: &[f64]) -> Result<f64> {
        self.require_summable()?;
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                point: x.to_vec(),
                got: x.len(),
                expected: self.dimension,
            });
        }
        if x.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
            return Err(Error::OutOfDomain(x.to_vec()));
        }
        let expo = -2.0 * self.beta;
        let k2 = self.kappa * self.kappa;
        match self.dimension {
            1 => {
                let mut acc = 0.0;
                for j in 1..=self.n_ok {
                    let s = (PI * j as f64 * x[0]).sin();
                    let lam = k2 + PI * PI * (j * j) as f64;
                    acc += 2.0 * s * s * lam.powf(expo);
                }
                Ok(acc)
            }
            _ => {
                let mut acc = 0.0;
                for j2 in 1..=self.n_ok {
                    let s2 = (PI * j2 as f64 * x[1]).sin();
                    let f2 = 2.0 * s2 * s2;
                    for j1 in 1..=self.n_ok {
                        let s1 = (PI * j1 as f64 * x[0]).sin();
                        let lam = k2 + PI * PI * ((j1 * j1 + j2 * j2) as f64);
                        acc += 2.0 * s1 * s1 * f2 * lam.powf(expo);
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Variance on every point of `grid`, boundary values exactly zero.
    ///
    /// One dimension folds the series modulo the grid period and evaluates
    /// all points with a single FFT, which reproduces the direct sums up to
    /// roundoff at a cost of `n_ok + m log m` instead of `n_ok * m`. Two
    /// dimensions evaluate the separable double sum as the matrix product
    /// `T Lambda T^T` with `T[i][j] = 2 sin^2(pi j x_i)`.
    pub fn variance_grid(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.require_summable()?;
        if grid.dimension() != self.dimension {
            return Err(Error::InvalidDimension(grid.dimension()));
        }
        let m = grid.points_per_axis();
        let expo = -2.0 * self.beta;
        let k2 = self.kappa * self.kappa;
        match self.dimension {
            1 => {
                // 2 sin^2(pi j x) = 1 - cos(2 pi j i / bins) on x_i = i/bins,
                // so sigma^2(x_i) = total - Re(DFT of per-residue sums)[i].
                let bins = m - 1;
                let mut folded = vec![Complex::new(0.0, 0.0); bins];
                let mut total = 0.0;
                for j in 1..=self.n_ok {
                    let c = (k2 + PI * PI * (j * j) as f64).powf(expo);
                    total += c;
                    folded[j % bins].re += c;
                }
                let fft = FftPlanner::new().plan_fft_forward(bins);
                fft.process(&mut folded);
                let mut out = vec![0.0; m];
                for (i, v) in out.iter_mut().enumerate().take(bins).skip(1) {
                    *v = (total - folded[i].re).max(0.0);
                }
                // Dirichlet boundary: exactly zero at both endpoints.
                out[0] = 0.0;
                out[m - 1] = 0.0;
                Ok(out)
            }
            _ => {
                let n_ok = self.n_ok;
                let mut t = Array2::zeros((m, n_ok));
                for i in 0..m {
                    let x = grid.axis_point(i);
                    for j in 0..n_ok {
                        let s = (PI * (j + 1) as f64 * x).sin();
                        t[[i, j]] = 2.0 * s * s;
                    }
                }
                let mut lam = Array2::zeros((n_ok, n_ok));
                for j1 in 0..n_ok {
                    for j2 in 0..n_ok {
                        let jj = ((j1 + 1) * (j1 + 1) + (j2 + 1) * (j2 + 1)) as f64;
                        lam[[j1, j2]] = (k2 + PI * PI * jj).powf(expo);
                    }
                }
                let tl = par_matmul(t.view(), lam.view());
                let r = par_matmul(tl.view(), t.t());
                let mut out = vec![0.0; m * m];
                for i2 in 0..m {
                    for i1 in 0..m {
                        let boundary = i1 == 0 || i1 == m - 1 || i2 == 0 || i2 == m - 1;
                        out[i2 * m + i1] =
                            if boundary { 0.0 } else { r[[i1, i2]].max(0.0) };
                    }
                }
                Ok(out)
            }
        }
    }

    /// Closed-form bound on the variance tail dropped by the truncation, for
    /// the interval: `sum_{j > n_ok} 2 lambda_j^(-2 beta) <= 2 pi^(-4 beta)
    /// n_ok^(1 - 4 beta) / (4 beta - 1)`.
    pub fn truncation_tail_bound(&self) -> Result<f64> {
        self.require_summable()?;
        if self.dimension != 1 {
            return Err(Error::InvalidDimension(self.dimension));
        }
        let fb = 4.0 * self.beta;
        Ok(2.0 * PI.powf(-fb) * (self.n_ok as f64).powf(1.0 - fb) / (fb - 1.0))
    }
}

/// L2-normalised Dirichlet eigenfunction `prod_i sqrt(2) sin(pi j_i x_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eigenfunction {
    j: Vec<usize>,
}

impl Eigenfunction {
    pub fn index(&self) -> &[usize] {
        &self.j
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.j.len());
        self.j
            .iter()
            .zip(x)
            .map(|(&ji, &xi)| std::f64::consts::SQRT_2 * (PI * ji as f64 * xi).sin())
            .product()
    }
}

/// Functional of the solution field whose expectation is studied.
#[derive(Clone, Debug, PartialEq)]
pub enum Functional {
    /// `integral over the domain of |u(x)|^p`.
    AbsPower { p: u32 },
    /// `integral over the domain of Phi(c (u(x) - a))` with the standard
    /// normal distribution function `Phi`.
    Probit { a: f64, c: f64 },
}

impl Functional {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Functional::AbsPower { p } => {
                if p < 2 {
                    return Err(Error::InvalidFunctionalOrder(p));
                }
            }
            Functional::Probit { a, c } => {
                if !(c > 0.0) || !c.is_finite() {
                    return Err(Error::NotPositive { name: "probit slope c", value: c });
                }
                if !a.is_finite() {
                    return Err(Error::Negative { name: "probit level a", value: a });
                }
            }
        }
        Ok(())
    }

    /// Compact form accepted back by [`FromStr`]: `abs:p` or `probit:a:c`.
    pub fn spec_string(&self) -> String {
        match *self {
            Functional::AbsPower { p } => format!("abs:{p}"),
            Functional::Probit { a, c } => format!("probit:{a}:{c}"),
        }
    }

    /// Expectation of the pointwise integrand at variance `sigma2`.
    ///
    /// For `|u|^p` with `u ~ N(0, sigma^2)` this is `mu_p sigma^p`; for the
    /// probit functional it is `Phi(-a / sqrt(c^-2 + sigma^2))`, which
    /// degenerates gracefully to `Phi(-a c)` at `sigma = 0`.
    pub fn pointwise_expectation(&self, sigma2: f64) -> f64 {
        debug_assert!(sigma2 >= 0.0);
        match *self {
            Functional::AbsPower { p } => {
                moment_mu(p).expect("validated order") * sigma2.powf(p as f64 / 2.0)
            }
            Functional::Probit { a, c } => std_normal_cdf(-a / (c.powi(-2) + sigma2).sqrt()),
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Functional::AbsPower { p } => write!(f, "|u|^{p}"),
            Functional::Probit { a, c } => {
                if a >= 0.0 {
                    write!(f, "Phi({c}(u-{a}))")
                } else {
                    write!(f, "Phi({c}(u+{}))", -a)
                }
            }
        }
    }
}

impl FromStr for Functional {
    type Err = Error;

    /// Parses `abs:<p>` or `probit:<a>:<c>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadFunctionalSpec(s.to_string());
        let mut parts = s.split(':');
        let f = match parts.next().ok_or_else(bad)? {
            "abs" => {
                let p = parts.next().ok_or_else(bad)?.parse::<u32>().map_err(|_| bad())?;
                Functional::AbsPower { p }
            }
            "probit" => {
                let a = parts.next().ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?;
                let c = parts.next().ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?;
                Functional::Probit { a, c }
            }
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        f.validate()?;
        Ok(f)
    }
}

/// Expectation of the functional from a pointwise variance field, by the
/// trapezoidal rule on the grid carrying the field.
pub fn reference_expectation(
    functional: &Functional,
    variance: &[f64],
    grid: &Grid,
) -> Result<f64> {
    functional.validate()?;
    if variance.len() != grid.len() {
        return Err(Error::GridMismatch { got: variance.len(), expected: grid.len() });
    }
    if let Some(&bad) = variance.iter().find(|&&v| !(v >= 0.0)) {
        return Err(Error::Negative { name: "variance", value: bad });
    }
    let integrand: Vec<f64> =
        variance.iter().map(|&s2| functional.pointwise_expectation(s2)).collect();
    grid.trapezoid(&integrand)
}

/// Absolute moment `mu_p = E|Z|^p = sqrt(2^p / pi) Gamma((p+1)/2)` of a
/// standard normal variable, for `p >= 1`.
pub fn moment_mu(p: u32) -> Result<f64> {
    if p == 0 {
        return Err(Error::InvalidFunctionalOrder(p));
    }
    Ok((2f64.powi(p as i32) / PI).sqrt() * gamma((p as f64 + 1.0) / 2.0))
}

/// Scaling `sigma* (4 pi)^(d/4) kappa^(2 beta - d/2) sqrt(Gamma(2 beta) /
/// Gamma(2 beta - d/2))` that gives the white-noise load unit marginal
/// variance in the Matern regime `2 beta > d/2`.
pub fn matern_scale(sigma_star: f64, kappa: f64, beta: f64, dimension: usize) -> Result<f64> {
    if dimension != 1 && dimension != 2 {
        return Err(Error::InvalidDimension(dimension));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidBeta(beta));
    }
    let d = dimension as f64;
    if 2.0 * beta <= d / 2.0 {
        return Err(Error::MaternUndefined { beta, d: dimension });
    }
    if !(kappa > 0.0) {
        return Err(Error::NotPositive { name: "kappa", value: kappa });
    }
    if !(sigma_star >= 0.0) || !sigma_star.is_finite() {
        return Err(Error::Negative { name: "sigma_star", value: sigma_star });
    }
    let ratio = gamma(2.0 * beta) / gamma(2.0 * beta - d / 2.0);
    Ok(sigma_star * (4.0 * PI).powf(d / 4.0) * kappa.powf(2.0 * beta - d / 2.0) * ratio.sqrt())
}

/// Standard normal distribution function, via the near-ulp-accurate `erfc`
/// from the musl libm port.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn model_validation() {
        assert!(matches!(SpectralModel::new(3, 0.5, 0.5, 10), Err(Error::InvalidDimension(3))));
        assert!(matches!(SpectralModel::new(1, -1.0, 0.5, 10), Err(Error::Negative { .. })));
        assert!(matches!(SpectralModel::new(1, 0.5, 0.0, 10), Err(Error::InvalidBeta(_))));
        assert!(matches!(SpectralModel::new(1, 0.5, 1.1, 10), Err(Error::InvalidBeta(_))));
        assert!(matches!(SpectralModel::new(1, 0.5, 0.5, 0), Err(Error::InvalidTruncation(0))));
        assert!(SpectralModel::new(1, 0.0, 1.0, 1).is_ok());
    }

    #[test]
    fn eigenvalue_of_first_interval_mode() {
        let model = SpectralModel::new(1, 0.5, 0.75, 10).unwrap();
        assert_abs_diff_eq!(model.eigenvalue(&[1]), 0.25 + PI * PI, epsilon = 1e-12);
        let model2 = SpectralModel::new(2, 0.5, 0.75, 10).unwrap();
        assert_abs_diff_eq!(model2.eigenvalue(&[1, 2]), 0.25 + 5.0 * PI * PI, epsilon = 1e-12);
    }

    #[test]
    fn eigenfunctions_are_orthonormal_under_quadrature() {
        let model = SpectralModel::new(1, 0.5, 0.75, 10).unwrap();
        let grid = Grid::uniform(1, 4001).unwrap();
        let (_, e2) = model.eigenpair(&[2]);
        let (_, e3) = model.eigenpair(&[3]);
        let sq: Vec<f64> = (0..grid.len())
            .map(|i| e2.eval(&grid.point(i)).powi(2))
            .collect();
        assert_abs_diff_eq!(grid.trapezoid(&sq).unwrap(), 1.0, epsilon = 1e-6);
        let cross: Vec<f64> = (0..grid.len())
            .map(|i| e2.eval(&grid.point(i)) * e3.eval(&grid.point(i)))
            .collect();
        assert_abs_diff_eq!(grid.trapezoid(&cross).unwrap(), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn variance_at_matches_frozen_high_precision_sums() {
        // Partial sums evaluated independently at 40-digit precision.
        let m1 = SpectralModel::new(1, 0.5, 0.75, 1000).unwrap();
        assert_abs_diff_eq!(
            m1.variance_at(&[0.3]).unwrap(),
            0.049428303534634814543,
            epsilon = 1e-14
        );
        let m2 = SpectralModel::new(1, 0.0, 0.5, 2000).unwrap();
        assert_abs_diff_eq!(
            m2.variance_at(&[0.5]).unwrap(),
            0.24994933941240054562,
            epsilon = 1e-14
        );
        let m3 = SpectralModel::new(2, 0.5, 0.8, 40).unwrap();
        assert_abs_diff_eq!(
            m3.variance_at(&[0.3, 0.7]).unwrap(),
            0.033259994644070380531,
            epsilon = 1e-14
        );
    }

    #[test]
    fn variance_requires_a_summable_series() {
        let m = SpectralModel::new(1, 0.5, 0.25, 100).unwrap();
        assert!(matches!(m.variance_at(&[0.5]), Err(Error::VarianceDiverges { .. })));
        let m2 = SpectralModel::new(2, 0.5, 0.5, 100).unwrap();
        let grid = Grid::uniform(2, 5).unwrap();
        assert!(matches!(m2.variance_grid(&grid), Err(Error::VarianceDiverges { .. })));
    }

    #[test]
    fn interval_grid_variance_matches_direct_sums() {
        // The FFT fold must agree with plain summation at every grid point.
        let model = SpectralModel::new(1, 0.5, 0.6, 777).unwrap();
        let grid = Grid::uniform(1, 65).unwrap();
        let vals = model.variance_grid(&grid).unwrap();
        for i in 0..grid.len() {
            let direct = model.variance_at(&grid.point(i)).unwrap();
            assert_abs_diff_eq!(vals[i], direct, epsilon = 1e-13);
        }
        assert_eq!(vals[0], 0.0);
        assert_eq!(vals[64], 0.0);
    }

    #[test]
    fn interval_grid_variance_handles_modes_beyond_the_grid() {
        // n_ok far larger than the number of grid bins exercises folding.
        let model = SpectralModel::new(1, 0.0, 0.9, 10_000).unwrap();
        let grid = Grid::uniform(1, 9).unwrap();
        let vals = model.variance_grid(&grid).unwrap();
        for i in 0..grid.len() {
            let direct = model.variance_at(&grid.point(i)).unwrap();
            assert_abs_diff_eq!(vals[i], direct, epsilon = 1e-13);
        }
    }

    #[test]
    fn square_grid_variance_matches_direct_sums() {
        let model = SpectralModel::new(2, 0.5, 0.8, 60).unwrap();
        let grid = Grid::uniform(2, 17).unwrap();
        let vals = model.variance_grid(&grid).unwrap();
        for idx in [0, 5, 40, 145, 288] {
            let direct = model.variance_at(&grid.point(idx)).unwrap();
            assert_abs_diff_eq!(vals[idx], direct, epsilon = 1e-12);
        }
        // Boundary row and column are exact zeros.
        for i in 0..17 {
            assert_eq!(vals[i], 0.0);
            assert_eq!(vals[16 * 17 + i], 0.0);
            assert_eq!(vals[i * 17], 0.0);
            assert_eq!(vals[i * 17 + 16], 0.0);
        }
    }

    #[test]
    fn bridge_variance_approaches_the_closed_form() {
        // kappa = 0, beta = 1/2: the covariance operator is the inverse
        // Dirichlet Laplacian, whose kernel diagonal is x(1-x).
        let model = SpectralModel::new(1, 0.0, 0.5, 400_000).unwrap();
        let tail = model.truncation_tail_bound().unwrap();
        assert!(tail < 1e-6, "tail bound {tail:e}");
        let v = model.variance_at(&[0.5]).unwrap();
        assert!((v - 0.25).abs() <= tail, "off by {:e}, bound {tail:e}", (v - 0.25).abs());
    }

    #[test]
    fn tail_bound_dominates_doubling_the_truncation() {
        let coarse = SpectralModel::new(1, 0.5, 0.7, 5_000).unwrap();
        let fine = SpectralModel::new(1, 0.5, 0.7, 10_000).unwrap();
        let bound = coarse.truncation_tail_bound().unwrap();
        for x in [0.21, 0.5, 0.83] {
            let delta =
                (fine.variance_at(&[x]).unwrap() - coarse.variance_at(&[x]).unwrap()).abs();
            assert!(delta <= bound, "delta {delta:e} exceeds bound {bound:e}");
        }
    }

    #[test]
    fn moments_of_the_standard_normal() {
        assert!(matches!(moment_mu(0), Err(Error::InvalidFunctionalOrder(0))));
        assert_abs_diff_eq!(moment_mu(2).unwrap(), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(moment_mu(3).unwrap(), 1.5957691216057308, epsilon = 1e-13);
        assert_abs_diff_eq!(moment_mu(4).unwrap(), 3.0, epsilon = 1e-13);
    }

    #[test]
    fn normal_cdf_matches_frozen_libm_values() {
        assert_abs_diff_eq!(std_normal_cdf(0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(std_normal_cdf(1.0), 0.8413447460685429, epsilon = 1e-12);
        assert_abs_diff_eq!(std_normal_cdf(-2.0), 0.02275013194817922, epsilon = 1e-12);
        let far = std_normal_cdf(-10.0);
        assert!((far - 7.619853024160593e-24).abs() < 1e-32, "got {far:e}");
    }

    #[test]
    fn gamma_matches_frozen_libm_values() {
        assert_abs_diff_eq!(gamma(0.5), 1.7724538509055159, epsilon = 1e-13);
        assert_abs_diff_eq!(gamma(1.5), 0.886226925452758, epsilon = 1e-13);
        assert_abs_diff_eq!(gamma(2.5), 1.3293403881791372, epsilon = 1e-13);
    }

    #[test]
    fn matern_scale_matches_hand_derived_values() {
        // d = 1: (4 pi)^(1/4) * 2 * sqrt(Gamma(1.5)) = 2 sqrt(pi).
        assert_abs_diff_eq!(
            matern_scale(1.0, 2.0, 0.75, 1).unwrap(),
            3.5449077018110318,
            epsilon = 1e-12
        );
        // d = 2 at the same parameters collapses to the same value.
        assert_abs_diff_eq!(
            matern_scale(1.0, 2.0, 0.75, 2).unwrap(),
            3.5449077018110318,
            epsilon = 1e-12
        );
        assert_eq!(matern_scale(0.0, 2.0, 0.75, 1).unwrap(), 0.0);
        assert!(matches!(matern_scale(1.0, 2.0, 0.2, 1), Err(Error::MaternUndefined { .. })));
        assert!(matches!(matern_scale(1.0, 0.0, 0.75, 1), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn functional_parsing_and_display() {
        let f: Functional = "abs:2".parse().unwrap();
        assert_eq!(f, Functional::AbsPower { p: 2 });
        assert_eq!(f.to_string(), "|u|^2");
        let g: Functional = "probit:0.5:20".parse().unwrap();
        assert_eq!(g, Functional::Probit { a: 0.5, c: 20.0 });
        assert_eq!(g.to_string(), "Phi(20(u-0.5))");
        for bad in ["abs", "abs:1", "abs:x", "probit:0.5", "probit:0:0", "huh:1", "abs:2:3"] {
            assert!(bad.parse::<Functional>().is_err(), "{bad} should not parse");
        }
    }

    #[test]
    fn pointwise_expectations_degenerate_correctly() {
        let abs2 = Functional::AbsPower { p: 2 };
        assert_abs_diff_eq!(abs2.pointwise_expectation(0.7), 0.7, epsilon = 1e-14);
        let abs4 = Functional::AbsPower { p: 4 };
        assert_abs_diff_eq!(abs4.pointwise_expectation(0.5), 3.0 * 0.25, epsilon = 1e-13);
        let probit = Functional::Probit { a: 0.5, c: 20.0 };
        let at_zero = probit.pointwise_expectation(0.0);
        assert!((at_zero - 7.619853024160593e-24).abs() < 1e-32, "got {at_zero:e}");
    }

    #[test]
    fn reference_expectation_matches_frozen_values() {
        // Frozen against 40-digit arithmetic with the same truncation and
        // grid: kappa = 0.5, beta = 0.75, n_ok = 500, 129-point grid.
        let model = SpectralModel::new(1, 0.5, 0.75, 500).unwrap();
        let grid = Grid::uniform(1, 129).unwrap();
        let var = model.variance_grid(&grid).unwrap();
        let e2 = reference_expectation(&Functional::AbsPower { p: 2 }, &var, &grid).unwrap();
        assert_abs_diff_eq!(e2, 0.037535441176575671052, epsilon = 1e-14);
        let e3 = reference_expectation(&Functional::AbsPower { p: 3 }, &var, &grid).unwrap();
        assert_abs_diff_eq!(e3, 0.013258925269311129465, epsilon = 1e-14);
        let ep = reference_expectation(
            &Functional::Probit { a: 0.5, c: 20.0 },
            &var,
            &grid,
        )
        .unwrap();
        assert_abs_diff_eq!(ep, 0.011044599164079805098, epsilon = 1e-13);
    }

    #[test]
    fn reference_expectation_rejects_bad_input() {
        let grid = Grid::uniform(1, 5).unwrap();
        let f = Functional::AbsPower { p: 2 };
        assert!(matches!(
            reference_expectation(&f, &[0.0; 4], &grid),
            Err(Error::GridMismatch { .. })
        ));
        assert!(matches!(
            reference_expectation(&f, &[0.0, 0.1, -0.2, 0.1, 0.0], &grid),
            Err(Error::Negative { .. })
        ));
        let bad = Functional::AbsPower { p: 1 };
        assert!(matches!(
            reference_expectation(&bad, &[0.0; 5], &grid),
            Err(Error::InvalidFunctionalOrder(1))
        ));
    }
}
