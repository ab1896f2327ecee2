//! Decides whether a driver admits the diffusion-producing substitution.
//!
//! A driver tau passes iff log tau is affine, i.e. the full Hessian of
//! log tau vanishes and its gradient is constant; then tau = exp(i kappa . y)
//! up to a unit-modulus constant and kappa is the imaginary part of the
//! gradient. The diagonal of the Hessian alone is not enough: the product
//! driver exp(i y_1 y_2) has zero diagonal but mixed entry i, so both
//! residuals are computed and reported separately.
//!
//! [`fiber_variation`] is the dynamic counterpart: it evaluates the
//! effective drift/diffusion coefficients along a fiber
//! {(psi0 tau(y), y) : y in grid} and measures how far they are from being
//! a function of psi0 alone. On the built-in corpus the two tests agree.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::herglotz::HerglotzSpec;
use crate::ito_transform::effective_coefficients;
use crate::tau_driver::{TauDriver, DEFAULT_FD_STEP};

/// Default tolerance when derivatives are analytic.
pub const ANALYTIC_TOL: f64 = 1e-10;
/// Default tolerance when derivatives come from finite differences.
pub const FINITE_DIFFERENCE_TOL: f64 = 1e-4;

/// Shape of the sample grid a classification ran on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSummary {
    pub n_points: usize,
    pub dim: usize,
}

/// Outcome of the log-Hessian admissibility test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierReport {
    pub admissible: bool,
    /// Recovered exponent vector; present iff admissible.
    pub kappa: Option<Vec<f64>>,
    /// max over grid and i of |d^2 log tau / dy_i^2|.
    pub max_diagonal_residual: f64,
    /// max over grid and i != j of |d^2 log tau / dy_i dy_j|.
    pub max_mixed_residual: f64,
    /// max over grid and i of |grad_i log tau - grad_i log tau (first point)|.
    pub kappa_variation: f64,
    pub grid: GridSummary,
    pub tol: f64,
}

/// Classifies a driver on a sample grid: admissible iff every log-Hessian
/// entry and the gradient variation stay below `tol`.
pub fn classify(driver: &TauDriver, grid: &[Vec<f64>], tol: f64) -> Result<ClassifierReport> {
    classify_with_step(driver, grid, tol, DEFAULT_FD_STEP)
}

/// Same as [`classify`] with an explicit finite-difference step for sampled
/// drivers.
pub fn classify_with_step(
    driver: &TauDriver,
    grid: &[Vec<f64>],
    tol: f64,
    fd_step: f64,
) -> Result<ClassifierReport> {
    if grid.is_empty() {
        return Err(Error::EmptyGridOfPoints);
    }
    let dim = driver.dim();
    let mut max_diagonal = 0.0_f64;
    let mut max_mixed = 0.0_f64;
    let mut variation = 0.0_f64;
    let mut first_gradient: Option<Vec<Complex64>> = None;
    let mut gradient_sum = vec![Complex64::new(0.0, 0.0); dim];
    for point in grid {
        let logd = driver.log_derivatives(point, fd_step)?;
        for i in 0..dim {
            for j in 0..dim {
                let entry = logd.hessian_entry(i, j).norm();
                if i == j {
                    max_diagonal = max_diagonal.max(entry);
                } else {
                    max_mixed = max_mixed.max(entry);
                }
            }
        }
        match &first_gradient {
            None => first_gradient = Some(logd.gradient().to_vec()),
            Some(reference) => {
                for (g, r) in logd.gradient().iter().zip(reference) {
                    variation = variation.max((g - r).norm());
                }
            }
        }
        for (sum, g) in gradient_sum.iter_mut().zip(logd.gradient()) {
            *sum += g;
        }
    }
    let admissible = max_diagonal <= tol && max_mixed <= tol && variation <= tol;
    let kappa = admissible.then(|| {
        gradient_sum
            .iter()
            .map(|g| g.im / grid.len() as f64)
            .collect()
    });
    Ok(ClassifierReport {
        admissible,
        kappa,
        max_diagonal_residual: max_diagonal,
        max_mixed_residual: max_mixed,
        kappa_variation: variation,
        grid: GridSummary {
            n_points: grid.len(),
            dim,
        },
        tol,
    })
}

/// Variation of the effective coefficients along the fiber of `psi0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberVariationReport {
    /// Largest pairwise difference over drift and all diffusion entries.
    pub max_variation: f64,
    pub drift_variation: f64,
    pub diffusion_variation: Vec<f64>,
    /// psi0 = 0 kills every psi-proportional term, so the fiber carries no
    /// evidence either way.
    pub degenerate_fiber: bool,
    pub n_points: usize,
}

/// Evaluates the effective coefficients at every fiber point
/// (psi0 tau(y), y) and reports the maximum pairwise modulus difference per
/// coefficient.
pub fn fiber_variation(
    driver: &TauDriver,
    p: &HerglotzSpec,
    psi0: Complex64,
    y_grid: &[Vec<f64>],
) -> Result<FiberVariationReport> {
    let modulus = psi0.norm();
    if !modulus.is_finite() || modulus >= 1.0 {
        return Err(Error::OutsideDisk { modulus });
    }
    if y_grid.is_empty() {
        return Err(Error::EmptyGridOfPoints);
    }
    let dim = driver.dim();
    let mut drifts = Vec::with_capacity(y_grid.len());
    let mut diffusions = Vec::with_capacity(y_grid.len());
    for y in y_grid {
        let tau = driver.evaluate(y)?;
        let coeffs = effective_coefficients(psi0 * tau, y, driver, p)?;
        drifts.push(coeffs.drift);
        diffusions.push(coeffs.diffusion);
    }
    let drift_variation = max_pairwise(&drifts);
    let diffusion_variation: Vec<f64> = (0..dim)
        .map(|d| {
            let column: Vec<Complex64> = diffusions.iter().map(|row| row[d]).collect();
            max_pairwise(&column)
        })
        .collect();
    let max_variation = diffusion_variation
        .iter()
        .fold(drift_variation, |acc, &v| acc.max(v));
    Ok(FiberVariationReport {
        max_variation,
        drift_variation,
        diffusion_variation,
        degenerate_fiber: modulus == 0.0,
        n_points: y_grid.len(),
    })
}

fn max_pairwise(values: &[Complex64]) -> f64 {
    let mut max = 0.0_f64;
    for (index, a) in values.iter().enumerate() {
        for b in &values[index + 1..] {
            max = max.max((a - b).norm());
        }
    }
    max
}

/// The corners of {0,1}^dim, the default classification grid.
pub fn unit_cube_corners(dim: usize) -> Vec<Vec<f64>> {
    (0..1usize << dim)
        .map(|mask| {
            (0..dim)
                .map(|bit| if mask >> bit & 1 == 1 { 1.0 } else { 0.0 })
                .collect()
        })
        .collect()
}
