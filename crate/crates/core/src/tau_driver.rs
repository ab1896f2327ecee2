//! Unit-modulus driver functions tau: R^n -> S^1 and derivatives of log tau.
//!
//! The admissible family is tau(y) = exp(i kappa . y) with real kappa; the
//! two non-examples exp(i y_1^2) and exp(i y_1 y_2) are kept as built-ins
//! because they fail the admissibility criterion in the two distinct ways
//! (nonzero diagonal, respectively nonzero mixed, second log-derivative).
//! Arbitrary drivers can be wrapped as [`SampledDriver`] callbacks, for
//! which derivatives are taken by central finite differences on tau itself
//! (differentiating tau rather than log tau avoids branch cuts of the
//! complex logarithm).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default step for finite-difference derivatives of sampled drivers.
pub const DEFAULT_FD_STEP: f64 = 1e-4;
/// Sampled driver values must be unit modulus within this tolerance.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;

type SampleFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// Callback-backed driver with a declared domain dimension.
#[derive(Clone)]
pub struct SampledDriver {
    dim: usize,
    eval: Arc<SampleFn>,
}

impl SampledDriver {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            dim,
            eval: Arc::new(eval),
        }
    }
}

impl fmt::Debug for SampledDriver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledDriver").field("dim", &self.dim).finish()
    }
}

/// A candidate driver for the randomized Loewner chain.
#[derive(Debug, Clone)]
pub enum TauDriver {
    /// tau(y) = exp(i kappa . y); the admissible family.
    Exponential { kappa: Vec<f64> },
    /// tau(y) = exp(i y_1^2); diagonal log-Hessian 2i.
    SquareExponent,
    /// tau(y) = exp(i y_1 y_2); zero diagonal but mixed log-Hessian i.
    ProductExponent,
    /// User-supplied samples; derivatives by finite differences.
    Sampled(SampledDriver),
}

/// Serializable description of the built-in drivers, as used by CLI configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum DriverConfig {
    Exponential { kappa: Vec<f64> },
    SquareExponent,
    ProductExponent,
}

impl DriverConfig {
    pub fn build(&self) -> Result<TauDriver> {
        match self {
            Self::Exponential { kappa } => TauDriver::exponential(kappa.clone()),
            Self::SquareExponent => Ok(TauDriver::SquareExponent),
            Self::ProductExponent => Ok(TauDriver::ProductExponent),
        }
    }
}

/// Gradient and Hessian of log tau at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDerivatives {
    gradient: Vec<Complex64>,
    hessian: Vec<Complex64>,
}

impl LogDerivatives {
    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn gradient(&self) -> &[Complex64] {
        &self.gradient
    }

    pub fn hessian_entry(&self, i: usize, j: usize) -> Complex64 {
        self.hessian[i * self.gradient.len() + j]
    }
}

impl TauDriver {
    pub fn exponential(kappa: Vec<f64>) -> Result<Self> {
        if kappa.is_empty() {
            return Err(Error::InvalidDriver("kappa is empty".into()));
        }
        if kappa.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidDriver("kappa has non-finite entries".into()));
        }
        Ok(Self::Exponential { kappa })
    }

    pub fn sampled<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        Self::Sampled(SampledDriver::new(dim, eval))
    }

    /// Domain dimension n.
    pub fn dim(&self) -> usize {
        match self {
            Self::Exponential { kappa } => kappa.len(),
            Self::SquareExponent => 1,
            Self::ProductExponent => 2,
            Self::Sampled(s) => s.dim,
        }
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: y.len(),
            });
        }
        Ok(())
    }

    /// tau(y); unit modulus by construction for the built-ins and enforced
    /// for sampled drivers.
    pub fn evaluate(&self, y: &[f64]) -> Result<Complex64> {
        self.check_dim(y)?;
        match self {
            Self::Exponential { kappa } => {
                let phase: f64 = kappa.iter().zip(y).map(|(k, v)| k * v).sum();
                Ok(Complex64::from_polar(1.0, phase))
            }
            Self::SquareExponent => Ok(Complex64::from_polar(1.0, y[0] * y[0])),
            Self::ProductExponent => Ok(Complex64::from_polar(1.0, y[0] * y[1])),
            Self::Sampled(s) => {
                let value = (s.eval)(y);
                if !value.re.is_finite() || !value.im.is_finite() {
                    return Err(Error::NonFinite("sampled driver value"));
                }
                let modulus = value.norm();
                if (modulus - 1.0).abs() > UNIT_MODULUS_TOL {
                    return Err(Error::NotUnitModulus(modulus));
                }
                Ok(value)
            }
        }
    }

    /// Gradient and Hessian of log tau at y.
    ///
    /// Analytic for the built-ins (`fd_step` is ignored there); central
    /// differences of tau for sampled drivers, converted through
    /// d log tau = d tau / tau and
    /// dd log tau = dd tau / tau - (d tau)(d tau) / tau^2.
    pub fn log_derivatives(&self, y: &[f64], fd_step: f64) -> Result<LogDerivatives> {
        self.check_dim(y)?;
        let zero = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Self::Exponential { kappa } => Ok(LogDerivatives {
                gradient: kappa.iter().map(|&k| Complex64::new(0.0, k)).collect(),
                hessian: vec![zero; kappa.len() * kappa.len()],
            }),
            Self::SquareExponent => Ok(LogDerivatives {
                gradient: vec![2.0 * i * y[0]],
                hessian: vec![2.0 * i],
            }),
            Self::ProductExponent => Ok(LogDerivatives {
                gradient: vec![i * y[1], i * y[0]],
                hessian: vec![zero, i, i, zero],
            }),
            Self::Sampled(_) => {
                if !fd_step.is_finite() || fd_step <= 0.0 {
                    return Err(Error::InvalidFdStep(fd_step));
                }
                self.finite_difference_log_derivatives(y, fd_step)
            }
        }
    }

    fn finite_difference_log_derivatives(&self, y: &[f64], h: f64) -> Result<LogDerivatives> {
        let n = y.len();
        let center = self.evaluate(y)?;
        let mut point = y.to_vec();
        let mut plus = vec![Complex64::default(); n];
        let mut minus = vec![Complex64::default(); n];
        for k in 0..n {
            point[k] = y[k] + h;
            plus[k] = self.evaluate(&point)?;
            point[k] = y[k] - h;
            minus[k] = self.evaluate(&point)?;
            point[k] = y[k];
        }
        let gradient: Vec<Complex64> = (0..n)
            .map(|k| (plus[k] - minus[k]) / (2.0 * h) / center)
            .collect();
        let mut hessian = vec![Complex64::default(); n * n];
        for a in 0..n {
            for b in a..n {
                let second = if a == b {
                    (plus[a] - 2.0 * center + minus[a]) / (h * h)
                } else {
                    point[a] = y[a] + h;
                    point[b] = y[b] + h;
                    let pp = self.evaluate(&point)?;
                    point[b] = y[b] - h;
                    let pm = self.evaluate(&point)?;
                    point[a] = y[a] - h;
                    let mm = self.evaluate(&point)?;
                    point[b] = y[b] + h;
                    let mp = self.evaluate(&point)?;
                    point[a] = y[a];
                    point[b] = y[b];
                    (pp - pm - mp + mm) / (4.0 * h * h)
                };
                let entry = second / center - gradient[a] * gradient[b];
                hessian[a * n + b] = entry;
                hessian[b * n + a] = entry;
            }
        }
        Ok(LogDerivatives { gradient, hessian })
    }
}
