//! The infinitesimal generator of the transformed diffusion, in closed form
//! and as a Monte Carlo short-time estimate.
//!
//! On analytic test functions the generator acts as
//!
//! ```text
//! A f(z) = ( -z |kappa|^2 / 2 + (1 - z)^2 p(z) ) f'(z)
//!          - (|kappa|^2 / 2) z^2 f''(z),
//! ```
//!
//! and by definition A f(z) = lim_{h -> 0} (E[f(psi_h^z)] - f(z)) / h. The
//! estimator simulates psi_h from z with a few Euler-Maruyama substeps
//! (to push the O(h) discretization bias below the Monte Carlo noise),
//! averages (f(psi_h) - f(z)) / h over independent seeded samples, and
//! reports the standard error of the mean alongside the closed form.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::disk::DiskPoint;
use crate::error::{Error, Result};
use crate::herglotz::HerglotzSpec;
use crate::ito_transform::euler_maruyama_step;
use crate::loewner_flow::EPSILON_BOUNDARY;
use crate::stochastic_paths::stream_seed;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// Largest admissible estimation horizon h.
pub const MAX_ESTIMATE_STEP: f64 = 1e-2;
/// Smallest admissible sample count.
pub const MIN_SAMPLES: usize = 1_000;
/// Euler-Maruyama substeps per sample.
pub const SUBSTEPS: usize = 8;

/// f(z) = sum_j c_j z^j with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialTestFunction {
    coefficients: Vec<Complex64>,
}

impl PolynomialTestFunction {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidCount {
                what: "polynomial coefficients",
                min: 1,
                got: 0,
            });
        }
        if coefficients
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite("polynomial coefficient"));
        }
        Ok(Self { coefficients })
    }

    /// The monomial z^degree.
    pub fn monomial(degree: usize) -> Self {
        let mut coefficients = vec![Complex64::new(0.0, 0.0); degree + 1];
        coefficients[degree] = Complex64::new(1.0, 0.0);
        Self { coefficients }
    }

    pub fn constant(value: Complex64) -> Self {
        Self {
            coefficients: vec![value],
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &c) in self.coefficients.iter().enumerate().skip(1).rev() {
            acc = acc * z + c * j as f64;
        }
        acc
    }

    pub fn second_derivative(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &c) in self.coefficients.iter().enumerate().skip(2).rev() {
            acc = acc * z + c * (j * (j - 1)) as f64;
        }
        acc
    }
}

/// Closed-form generator applied to a polynomial test function at z.
pub fn apply_generator(
    f: &PolynomialTestFunction,
    z: DiskPoint,
    kappa: &[f64],
    p: &HerglotzSpec,
) -> Result<Complex64> {
    let zc = z.value();
    let one = Complex64::new(1.0, 0.0);
    let kappa_sq: f64 = kappa.iter().map(|k| k * k).sum();
    let a = zc * (-0.5 * kappa_sq) + (one - zc) * (one - zc) * p.evaluate(zc, 0)?;
    Ok(a * f.derivative(zc) - (0.5 * kappa_sq) * zc * zc * f.second_derivative(zc))
}

/// Closed form, Monte Carlo estimate and sampling statistics side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratorReport {
    pub z: Complex64,
    pub h: f64,
    pub n_samples: usize,
    pub closed_form: Complex64,
    pub mc_estimate: Complex64,
    /// Standard error of the mean of the per-sample values.
    pub stderr: f64,
    /// Samples dropped because the state left the disk before time h.
    pub excluded: usize,
    /// Set when more than 1% of the samples were excluded.
    pub flagged: bool,
}

/// Estimates (E[f(psi_h^z)] - f(z)) / h by seeded Monte Carlo.
pub fn estimate_generator_mc(
    f: &PolynomialTestFunction,
    z: DiskPoint,
    kappa: &[f64],
    p: &HerglotzSpec,
    h: f64,
    n_samples: usize,
    seed: u64,
) -> Result<GeneratorReport> {
    if !h.is_finite() || h <= 0.0 || h > MAX_ESTIMATE_STEP {
        return Err(Error::StepOutOfRange {
            got: h,
            max: MAX_ESTIMATE_STEP,
        });
    }
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidCount {
            what: "n_samples",
            min: MIN_SAMPLES,
            got: n_samples,
        });
    }
    let closed_form = apply_generator(f, z, kappa, p)?;
    let dt = h / SUBSTEPS as f64;
    let sd = dt.sqrt();
    let kappa_sq: f64 = kappa.iter().map(|k| k * k).sum();
    let f_start = f.evaluate(z.value());

    let samples: Vec<Option<Complex64>> = (0..n_samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha12Rng::seed_from_u64(stream_seed(seed, index as u64, 0, 0));
            let mut psi = z.value();
            for _ in 0..SUBSTEPS {
                if psi.norm() > 1.0 - EPSILON_BOUNDARY {
                    return Ok(None);
                }
                let mut weighted = 0.0;
                for &k in kappa {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    weighted += k * (sd * g);
                }
                psi = match euler_maruyama_step(psi, kappa_sq, p, dt, weighted) {
                    Ok(next) => next,
                    Err(Error::OutsideDisk { .. }) => return Ok(None),
                    Err(other) => return Err(other),
                };
                if !psi.re.is_finite() || !psi.im.is_finite() || psi.norm() >= 1.0 {
                    return Ok(None);
                }
            }
            Ok(Some((f.evaluate(psi) - f_start) / h))
        })
        .collect::<Result<_>>()?;

    let excluded = samples.iter().filter(|s| s.is_none()).count();
    let included: Vec<Complex64> = samples.into_iter().flatten().collect();
    if included.is_empty() {
        return Err(Error::AllSamplesExcluded);
    }
    let n = included.len();
    let mean = included.iter().sum::<Complex64>() / n as f64;
    let stderr = if n > 1 {
        let ss: f64 = included.iter().map(|v| (v - mean).norm_sqr()).sum();
        (ss / (n as f64 * (n - 1) as f64)).sqrt()
    } else {
        0.0
    };
    Ok(GeneratorReport {
        z: z.value(),
        h,
        n_samples,
        closed_form,
        mc_estimate: mean,
        stderr,
        excluded,
        flagged: excluded * 100 > n_samples,
    })
}
