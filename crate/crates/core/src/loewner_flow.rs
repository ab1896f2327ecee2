//! Pathwise integration of the radial Loewner flow.
//!
//! Two flavors: the classical autonomous flow
//!
//! ```text
//! d phi / dt = -phi * p(phi),            phi_0 = z,
//! ```
//!
//! and the randomized chain driven by a unit-modulus driver tau evaluated
//! along a Brownian path,
//!
//! ```text
//! d phi / dt = ((tau - phi)^2 / tau) * p(phi / tau),   tau = tau(B_t),
//! ```
//!
//! with tau frozen at the left endpoint of each step. Since |tau| = 1, the
//! argument phi/tau stays in the unit disk exactly as long as phi does;
//! integration stops with an exit record once |phi| crosses 1 - epsilon.
//! The driving path is only Hoelder-1/2 in time, so the randomized flow
//! offers first- and second-order schemes only; RK4 is reserved for the
//! classical flow where its full order is real.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disk::DiskPoint;
use crate::error::{Error, Result};
use crate::herglotz::HerglotzSpec;
use crate::stochastic_paths::{BrownianPath, TimeGrid};
use crate::tau_driver::TauDriver;

/// Integration stops when the state modulus exceeds 1 - EPSILON_BOUNDARY.
pub const EPSILON_BOUNDARY: f64 = 1e-6;

/// Why a trajectory stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitReason {
    /// The state modulus crossed 1 - epsilon, or a scheme stage left the disk.
    Boundary,
    /// The update produced a non-finite value.
    NonFinite,
}

/// Early-stop record. `step` is the index of the first grid point for which
/// no state was recorded, so `step` always equals the number of recorded
/// states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExitRecord {
    pub step: usize,
    pub reason: ExitReason,
}

/// Time-indexed sequence of complex states phi_{t_j}, possibly truncated by
/// a boundary exit. Every recorded state has modulus below one.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    states: Vec<Complex64>,
    exit: Option<ExitRecord>,
}

impl Trajectory {
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn states(&self) -> &[Complex64] {
        &self.states
    }

    pub fn state(&self, j: usize) -> Complex64 {
        self.states[j]
    }

    pub fn final_state(&self) -> Complex64 {
        *self.states.last().expect("trajectory holds the initial state")
    }

    pub fn exit(&self) -> Option<ExitRecord> {
        self.exit
    }

    /// True when the trajectory reached t_end without exiting.
    pub fn is_complete(&self) -> bool {
        self.exit.is_none()
    }

    /// (t_j, phi_{t_j}) pairs for all recorded states.
    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.states
            .iter()
            .enumerate()
            .map(move |(j, &s)| (self.grid.time(j), s))
    }
}

/// Schemes for the classical (smooth-in-time) flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassicalScheme {
    Euler,
    Heun,
    Rk4,
}

/// Schemes for the randomized flow; the rough driver caps the usable order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RandomizedScheme {
    Euler,
    Heun,
}

fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Shared stepping loop: records states while they stay inside the disk,
/// converts out-of-disk stage evaluations into boundary exits, and keeps
/// everything else as a hard error.
pub(crate) fn integrate_with<F>(z: DiskPoint, grid: TimeGrid, mut step: F) -> Result<Trajectory>
where
    F: FnMut(usize, Complex64) -> Result<Complex64>,
{
    let mut states = Vec::with_capacity(grid.n_steps() + 1);
    let mut phi = z.value();
    states.push(phi);
    let mut exit = None;
    for j in 0..grid.n_steps() {
        if phi.norm() > 1.0 - EPSILON_BOUNDARY {
            exit = Some(ExitRecord {
                step: states.len(),
                reason: ExitReason::Boundary,
            });
            break;
        }
        match step(j, phi) {
            Ok(next) => {
                if !is_finite(next) {
                    exit = Some(ExitRecord {
                        step: states.len(),
                        reason: ExitReason::NonFinite,
                    });
                    break;
                }
                if next.norm() >= 1.0 {
                    exit = Some(ExitRecord {
                        step: states.len(),
                        reason: ExitReason::Boundary,
                    });
                    break;
                }
                states.push(next);
                phi = next;
            }
            Err(Error::OutsideDisk { .. }) => {
                exit = Some(ExitRecord {
                    step: states.len(),
                    reason: ExitReason::Boundary,
                });
                break;
            }
            Err(other) => return Err(other),
        }
    }
    Ok(Trajectory { grid, states, exit })
}

/// Classical radial flow d phi/dt = -phi p(phi) with time-independent p.
pub fn integrate_classical(
    z: DiskPoint,
    p: &HerglotzSpec,
    grid: TimeGrid,
    scheme: ClassicalScheme,
) -> Result<Trajectory> {
    let h = grid.step();
    let rhs = |phi: Complex64| -> Result<Complex64> { Ok(-phi * p.evaluate(phi, 0)?) };
    integrate_with(z, grid, move |_, phi| match scheme {
        ClassicalScheme::Euler => Ok(phi + h * rhs(phi)?),
        ClassicalScheme::Heun => {
            let k1 = rhs(phi)?;
            let k2 = rhs(phi + h * k1)?;
            Ok(phi + 0.5 * h * (k1 + k2))
        }
        ClassicalScheme::Rk4 => {
            let k1 = rhs(phi)?;
            let k2 = rhs(phi + 0.5 * h * k1)?;
            let k3 = rhs(phi + 0.5 * h * k2)?;
            let k4 = rhs(phi + h * k3)?;
            Ok(phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        }
    })
}

/// Randomized chain along one Brownian path, with the driver frozen at the
/// left endpoint of each step (both Heun stages see the same tau).
pub fn integrate_randomized(
    z: DiskPoint,
    p: &HerglotzSpec,
    driver: &TauDriver,
    path: &BrownianPath<'_>,
    scheme: RandomizedScheme,
) -> Result<Trajectory> {
    if path.n_dims() != driver.dim() {
        return Err(Error::DimensionMismatch {
            expected: driver.dim(),
            actual: path.n_dims(),
        });
    }
    let grid = path.grid();
    let h = grid.step();
    let mut y = vec![0.0_f64; driver.dim()];
    integrate_with(z, grid, move |j, phi| {
        path.write_state(j, &mut y);
        let tau = driver.evaluate(&y)?;
        let rhs = |w: Complex64| -> Result<Complex64> {
            let d = tau - w;
            Ok(d * d / tau * p.evaluate(w / tau, 0)?)
        };
        match scheme {
            RandomizedScheme::Euler => Ok(phi + h * rhs(phi)?),
            RandomizedScheme::Heun => {
                let k1 = rhs(phi)?;
                let k2 = rhs(phi + h * k1)?;
                Ok(phi + 0.5 * h * (k1 + k2))
            }
        }
    })
}
