//! Herglotz functions: holomorphic on the unit disk with nonnegative real
//! part.
//!
//! The workhorse representation is a finite atomic boundary measure,
//!
//! ```text
//! p(w) = sum_j lambda_j * (e^{i theta_j} + w) / (e^{i theta_j} - w),
//! ```
//!
//! with lambda_j >= 0 summing to one, which gives p(0) = 1 and
//! Re p(w) >= 0 on the disk (the real part of each kernel is a Poisson
//! kernel). Two presets round out the family: the constant function 1 and
//! the rational function 1/(1-w) + a with a > 0, which is Herglotz but not
//! normalized at the origin.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights must sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// A validation passes when the minimum real part over the grid clears this.
pub const MIN_REAL_PART: f64 = -1e-9;
/// Default radii of the polar validation grid.
pub const DEFAULT_RADII: [f64; 6] = [0.1, 0.3, 0.5, 0.7, 0.9, 0.95];
/// Default number of angles of the polar validation grid.
pub const DEFAULT_ANGLES: usize = 64;

/// One boundary atom: a point mass of the representing measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Angle of the atom on the unit circle, in radians.
    pub theta: f64,
    /// Nonnegative mass.
    pub weight: f64,
}

/// A representable Herglotz function with exact first and second derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum HerglotzSpec {
    /// The constant function 1.
    Constant,
    /// Convex combination of boundary kernels.
    AtomicMeasure { atoms: Vec<Atom> },
    /// 1/(1-w) + a with a > 0; note p(0) = 1 + a, not 1.
    RationalCayleyPlus { a: f64 },
}

impl HerglotzSpec {
    pub fn constant() -> Self {
        Self::Constant
    }

    /// Single unit atom at angle `theta`.
    pub fn single_atom(theta: f64) -> Self {
        Self::AtomicMeasure {
            atoms: vec![Atom { theta, weight: 1.0 }],
        }
    }

    pub fn atomic(atoms: Vec<Atom>) -> Result<Self> {
        let spec = Self::AtomicMeasure { atoms };
        spec.check_invariants()?;
        Ok(spec)
    }

    pub fn cayley_plus(a: f64) -> Result<Self> {
        let spec = Self::RationalCayleyPlus { a };
        spec.check_invariants()?;
        Ok(spec)
    }

    /// Structural invariants: nonnegative weights summing to one, or a > 0.
    /// Deserialized specs should be checked before use.
    pub fn check_invariants(&self) -> Result<()> {
        match self {
            Self::Constant => Ok(()),
            Self::AtomicMeasure { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidHerglotz("atom list is empty".into()));
                }
                let mut sum = 0.0;
                for atom in atoms {
                    if !atom.theta.is_finite() || !atom.weight.is_finite() {
                        return Err(Error::InvalidHerglotz("non-finite atom".into()));
                    }
                    if atom.weight < 0.0 {
                        return Err(Error::InvalidHerglotz(format!(
                            "atom weight {} is negative",
                            atom.weight
                        )));
                    }
                    sum += atom.weight;
                }
                if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                    return Err(Error::InvalidHerglotz(format!(
                        "atom weights sum to {sum}, expected 1 within {WEIGHT_SUM_TOL:e}"
                    )));
                }
                Ok(())
            }
            Self::RationalCayleyPlus { a } => {
                if !a.is_finite() || *a <= 0.0 {
                    return Err(Error::InvalidHerglotz(format!(
                        "parameter a must be positive and finite, got {a}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// p(w), p'(w) or p''(w) depending on `order` (0, 1 or 2).
    pub fn evaluate(&self, w: Complex64, order: u8) -> Result<Complex64> {
        if order > 2 {
            return Err(Error::UnsupportedOrder(order));
        }
        let modulus = w.norm();
        if !modulus.is_finite() || modulus >= 1.0 {
            return Err(Error::OutsideDisk { modulus });
        }
        let one = Complex64::new(1.0, 0.0);
        Ok(match self {
            Self::Constant => match order {
                0 => one,
                _ => Complex64::new(0.0, 0.0),
            },
            Self::AtomicMeasure { atoms } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for atom in atoms {
                    let sigma = Complex64::from_polar(1.0, atom.theta);
                    let d = sigma - w;
                    acc += atom.weight
                        * match order {
                            0 => (sigma + w) / d,
                            1 => 2.0 * sigma / (d * d),
                            _ => 4.0 * sigma / (d * d * d),
                        };
                }
                acc
            }
            Self::RationalCayleyPlus { a } => {
                let d = one - w;
                match order {
                    0 => one / d + a,
                    1 => one / (d * d),
                    _ => 2.0 * one / (d * d * d),
                }
            }
        })
    }

    /// Checks Re p >= 0 on a polar grid and reports the value at the origin.
    pub fn validate(&self, radii: &[f64], n_angles: usize) -> Result<HerglotzValidation> {
        self.check_invariants()?;
        if radii.is_empty() || n_angles == 0 {
            return Err(Error::EmptyGridOfPoints);
        }
        for &r in radii {
            if !r.is_finite() || r <= 0.0 || r >= 1.0 {
                return Err(Error::InvalidRadius(r));
            }
        }
        let mut min_real_part = f64::INFINITY;
        for &r in radii {
            for k in 0..n_angles {
                let angle = 2.0 * std::f64::consts::PI * k as f64 / n_angles as f64;
                let w = Complex64::from_polar(r, angle);
                let re = self.evaluate(w, 0)?.re;
                if re < min_real_part {
                    min_real_part = re;
                }
            }
        }
        let value_at_origin = self.evaluate(Complex64::new(0.0, 0.0), 0)?;
        Ok(HerglotzValidation {
            min_real_part,
            value_at_origin,
            n_points: radii.len() * n_angles,
            passes: min_real_part >= MIN_REAL_PART,
        })
    }
}

/// Outcome of a positivity scan over a polar grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HerglotzValidation {
    pub min_real_part: f64,
    pub value_at_origin: Complex64,
    pub n_points: usize,
    pub passes: bool,
}
