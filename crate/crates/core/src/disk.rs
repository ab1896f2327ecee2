//! Points of the open unit disk.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A complex number with modulus strictly below one, the state space of the
/// Loewner flow and of the transformed diffusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(value: Complex64) -> Result<Self> {
        let modulus = value.norm();
        if !modulus.is_finite() || modulus >= 1.0 {
            return Err(Error::OutsideDisk { modulus });
        }
        Ok(Self(value))
    }

    pub fn from_parts(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im))
    }

    pub fn origin() -> Self {
        Self(Complex64::new(0.0, 0.0))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(point: DiskPoint) -> Self {
        point.0
    }
}
