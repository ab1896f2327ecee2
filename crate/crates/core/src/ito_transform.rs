//! The substitution psi = phi / tau(B_t) and the diffusion it produces.
//!
//! For the exponential driver tau(y) = exp(i kappa . y) the substituted
//! process solves the SDE
//!
//! ```text
//! d psi = -i psi (kappa . dB_t) + ( -|kappa|^2 psi / 2 + (psi - 1)^2 p(psi) ) dt,
//! ```
//!
//! whose coefficients depend on the state psi alone. For a general driver
//! the Ito expansion of psi = phi * h(B_t) with h = 1/tau gives
//!
//! ```text
//! drift     = (1 - psi)^2 p(psi) + (phi / 2) sum_j d^2 h / dy_j^2
//! diffusion_j = phi * dh / dy_j,
//! ```
//!
//! computed here from the log-derivatives of tau via dh/dy = -g h and
//! d^2 h/dy^2 = (g^2 - H) h, where g and H are the gradient and Hessian of
//! log tau. Whether these coefficients are constant along the fiber
//! {(psi0 tau(y), y)} is exactly the question the admissibility module asks.
//!
//! [`verify_transform`] is the numerical witness of the equivalence: it
//! integrates the randomized chain and the SDE on the same Brownian
//! increments, applies the substitution pathwise, and reports how the
//! discrepancy shrinks under dyadic refinement.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::disk::DiskPoint;
use crate::error::{Error, Result};
use crate::herglotz::HerglotzSpec;
use crate::loewner_flow::{integrate_with, Trajectory};
use crate::loewner_flow::{integrate_randomized, RandomizedScheme};
use crate::stochastic_paths::{BrownianEnsemble, BrownianPath};
use crate::tau_driver::{TauDriver, DEFAULT_FD_STEP};

/// Coefficients of d psi = drift dt + sum_j diffusion_j dB^j at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionCoefficients {
    pub drift: Complex64,
    pub diffusion: Vec<Complex64>,
}

/// psi = phi * exp(-i kappa . y), the substitution for exponential drivers.
pub fn canonical_substitution(phi: Complex64, y: &[f64], kappa: &[f64]) -> Complex64 {
    assert_eq!(y.len(), kappa.len(), "state and kappa dimensions differ");
    let phase: f64 = kappa.iter().zip(y).map(|(k, v)| k * v).sum();
    phi * Complex64::from_polar(1.0, -phase)
}

/// Drift and diffusion of d psi at the joint state (phi, y), for any driver.
pub fn effective_coefficients(
    phi: Complex64,
    y: &[f64],
    driver: &TauDriver,
    p: &HerglotzSpec,
) -> Result<DiffusionCoefficients> {
    let tau = driver.evaluate(y)?;
    let psi = phi / tau;
    let p_value = p.evaluate(psi, 0)?;
    let logd = driver.log_derivatives(y, DEFAULT_FD_STEP)?;
    let one = Complex64::new(1.0, 0.0);
    // phi * h'' summed over dimensions equals psi * sum_j (g_j^2 - H_jj).
    let mut curvature = Complex64::new(0.0, 0.0);
    for (j, &g) in logd.gradient().iter().enumerate() {
        curvature += g * g - logd.hessian_entry(j, j);
    }
    let drift = (one - psi) * (one - psi) * p_value + psi * curvature * 0.5;
    let diffusion = logd.gradient().iter().map(|&g| -(psi * g)).collect();
    Ok(DiffusionCoefficients { drift, diffusion })
}

/// One Euler-Maruyama step of the exponential-driver SDE:
/// psi + (-|kappa|^2 psi/2 + (psi-1)^2 p(psi)) h - i psi (kappa . dB).
pub(crate) fn euler_maruyama_step(
    psi: Complex64,
    kappa_sq: f64,
    p: &HerglotzSpec,
    h: f64,
    weighted_increment: f64,
) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let drift = psi * (-0.5 * kappa_sq) + (psi - one) * (psi - one) * p.evaluate(psi, 0)?;
    Ok(psi + drift * h - i * psi * weighted_increment)
}

// TODO: add a Milstein step so the convergence report can separate scheme
// error from substitution error at order 1.

/// Euler-Maruyama integration of the diffusion on the exact increments of
/// the supplied Brownian path.
pub fn integrate_sde(
    z: DiskPoint,
    kappa: &[f64],
    p: &HerglotzSpec,
    path: &BrownianPath<'_>,
) -> Result<Trajectory> {
    if kappa.len() != path.n_dims() {
        return Err(Error::DimensionMismatch {
            expected: kappa.len(),
            actual: path.n_dims(),
        });
    }
    let grid = path.grid();
    let h = grid.step();
    let kappa_sq: f64 = kappa.iter().map(|k| k * k).sum();
    integrate_with(z, grid, move |j, psi| {
        let weighted: f64 = kappa
            .iter()
            .enumerate()
            .map(|(dim, k)| k * path.increment(dim, j))
            .sum();
        euler_maruyama_step(psi, kappa_sq, p, h, weighted)
    })
}

/// Discrepancy statistics at one refinement level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    /// Step size at this level.
    pub h: f64,
    /// Root mean square over included paths of the max-over-time distance
    /// between the substituted chain and the SDE solution; `None` when every
    /// path was excluded.
    pub rms_discrepancy: Option<f64>,
    /// Paths dropped because either integration exited before t_end.
    pub excluded: usize,
    /// Paths that entered the statistic.
    pub path_count: usize,
}

/// Refinement study of the chain-vs-diffusion discrepancy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelReport>,
    /// Least-squares slope of log(rms) against log(h); `None` if fewer than
    /// two levels have a positive rms.
    pub estimated_order: Option<f64>,
}

/// Integrates the randomized chain and the SDE on shared noise at `levels`
/// dyadic refinements of `ensemble`, measuring the pathwise discrepancy of
/// the substituted states. Exiting paths are dropped and counted, never
/// extrapolated.
pub fn verify_transform(
    z: DiskPoint,
    kappa: &[f64],
    p: &HerglotzSpec,
    ensemble: &BrownianEnsemble,
    levels: usize,
) -> Result<ConvergenceReport> {
    if levels == 0 {
        return Err(Error::InvalidCount {
            what: "levels",
            min: 1,
            got: 0,
        });
    }
    if kappa.len() != ensemble.n_dims() {
        return Err(Error::DimensionMismatch {
            expected: kappa.len(),
            actual: ensemble.n_dims(),
        });
    }
    let driver = TauDriver::exponential(kappa.to_vec())?;
    let mut reports = Vec::with_capacity(levels);
    let mut current = ensemble.clone();
    for level in 0..levels {
        let discrepancies: Vec<Option<f64>> = (0..current.n_paths())
            .into_par_iter()
            .map(|index| path_discrepancy(z, kappa, p, &driver, &current.path(index)))
            .collect::<Result<_>>()?;
        let excluded = discrepancies.iter().filter(|d| d.is_none()).count();
        let included: Vec<f64> = discrepancies.into_iter().flatten().collect();
        let rms = if included.is_empty() {
            None
        } else {
            Some((included.iter().map(|d| d * d).sum::<f64>() / included.len() as f64).sqrt())
        };
        reports.push(LevelReport {
            h: current.grid().step(),
            rms_discrepancy: rms,
            excluded,
            path_count: included.len(),
        });
        if level + 1 < levels {
            current = current.refine();
        }
    }
    let estimated_order = least_squares_order(&reports);
    Ok(ConvergenceReport {
        levels: reports,
        estimated_order,
    })
}

fn path_discrepancy(
    z: DiskPoint,
    kappa: &[f64],
    p: &HerglotzSpec,
    driver: &TauDriver,
    path: &BrownianPath<'_>,
) -> Result<Option<f64>> {
    let chain = integrate_randomized(z, p, driver, path, RandomizedScheme::Euler)?;
    let diffusion = integrate_sde(z, kappa, p, path)?;
    if !chain.is_complete() || !diffusion.is_complete() {
        return Ok(None);
    }
    let mut y = vec![0.0_f64; kappa.len()];
    let mut max_distance = 0.0_f64;
    for j in 0..chain.states().len() {
        path.write_state(j, &mut y);
        let substituted = canonical_substitution(chain.state(j), &y, kappa);
        let distance = (substituted - diffusion.state(j)).norm();
        if distance > max_distance {
            max_distance = distance;
        }
    }
    Ok(Some(max_distance))
}

fn least_squares_order(levels: &[LevelReport]) -> Option<f64> {
    let points: Vec<(f64, f64)> = levels
        .iter()
        .filter_map(|level| {
            level
                .rms_discrepancy
                .filter(|&r| r > 0.0)
                .map(|r| (level.h.ln(), r.ln()))
        })
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let var: f64 = points.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    let cov: f64 = points
        .iter()
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    Some(cov / var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic_paths::TimeGrid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn substitution_examples() {
        let a = canonical_substitution(Complex64::new(0.5, 0.0), &[0.0], &[1.0]);
        assert_eq!(a, Complex64::new(0.5, 0.0));

        let half_pi = std::f64::consts::FRAC_PI_2;
        let b = canonical_substitution(Complex64::from_polar(1.0, half_pi), &[half_pi], &[1.0]);
        assert!((b - Complex64::new(1.0, 0.0)).norm() <= 1e-12);

        // 0.3 * exp(-2i)
        let c = canonical_substitution(Complex64::new(0.3, 0.0), &[1.0, 2.0], &[1.0, 0.5]);
        assert_abs_diff_eq!(c.re, -0.12484405096414272, epsilon = 1e-12);
        assert_abs_diff_eq!(c.im, -0.2727892280477045, epsilon = 1e-12);
    }

    #[test]
    fn effective_coefficients_reproduce_the_exponential_closed_form() {
        let driver = TauDriver::exponential(vec![1.0]).unwrap();
        let coeffs = effective_coefficients(
            Complex64::new(0.3, 0.0),
            &[0.0],
            &driver,
            &HerglotzSpec::constant(),
        )
        .unwrap();
        // (1 - 0.3)^2 - 0.5 * 0.3 = 0.34 and diffusion -0.3i.
        assert_abs_diff_eq!(coeffs.drift.re, 0.34, epsilon = 1e-12);
        assert_abs_diff_eq!(coeffs.drift.im, 0.0, epsilon = 1e-12);
        assert_eq!(coeffs.diffusion.len(), 1);
        assert!((coeffs.diffusion[0] - Complex64::new(0.0, -0.3)).norm() <= 1e-12);
    }

    #[test]
    fn coefficients_at_the_origin_reduce_to_p_of_zero() {
        let driver = TauDriver::exponential(vec![3.0, -2.0]).unwrap();
        let p = HerglotzSpec::single_atom(0.7);
        let coeffs = effective_coefficients(
            Complex64::new(0.0, 0.0),
            &[0.4, -1.1],
            &driver,
            &p,
        )
        .unwrap();
        let p0 = p.evaluate(Complex64::new(0.0, 0.0), 0).unwrap();
        assert!((coeffs.drift - p0).norm() <= 1e-12);
        for d in &coeffs.diffusion {
            assert!(d.norm() <= 1e-12);
        }
    }

    #[test]
    fn square_exponent_drift_varies_along_the_fiber() {
        // With p = 1 and psi0 = 0.5, the phi h''/2 term contributes
        // (psi0/2) * (tau h'')(y) = (psi0/2)(-2i - 4 y^2), so between y = 0
        // and y = 1 the drift moves by exactly (psi0/2) * 4 = 1.
        let driver = TauDriver::SquareExponent;
        let p = HerglotzSpec::constant();
        let psi0 = Complex64::new(0.5, 0.0);
        let tau0 = driver.evaluate(&[0.0]).unwrap();
        let tau1 = driver.evaluate(&[1.0]).unwrap();
        let at0 = effective_coefficients(psi0 * tau0, &[0.0], &driver, &p).unwrap();
        let at1 = effective_coefficients(psi0 * tau1, &[1.0], &driver, &p).unwrap();
        assert_abs_diff_eq!((at0.drift - at1.drift).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn one_euler_maruyama_step_matches_the_scheme_definition() {
        let grid = TimeGrid::new(0.25, 1).unwrap();
        let increments = [0.017, -0.042];
        let ens = BrownianEnsemble::from_increments(2, grid, 1, &increments).unwrap();
        let kappa = [1.0, 0.5];
        let p = HerglotzSpec::single_atom(0.0);
        let z = Complex64::new(0.2, -0.1);
        let traj = integrate_sde(
            DiskPoint::new(z).unwrap(),
            &kappa,
            &p,
            &ens.path(0),
        )
        .unwrap();
        let h = grid.step();
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let k2 = kappa.iter().map(|k| k * k).sum::<f64>();
        let kdb = kappa[0] * increments[0] + kappa[1] * increments[1];
        let expected = z
            + (z * (-0.5 * k2) + (z - one) * (z - one) * p.evaluate(z, 0).unwrap()) * h
            - i * z * kdb;
        assert_eq!(traj.state(1), expected);
    }

    #[test]
    fn first_step_from_the_origin_is_exactly_h() {
        let grid = TimeGrid::new(0.032, 4).unwrap();
        let ens = BrownianEnsemble::generate(1, grid, 1, 4).unwrap();
        let traj = integrate_sde(
            DiskPoint::origin(),
            &[2.0],
            &HerglotzSpec::constant(),
            &ens.path(0),
        )
        .unwrap();
        assert_eq!(traj.state(1), Complex64::new(grid.step(), 0.0));
    }

    #[test]
    fn zero_kappa_collapses_to_the_deterministic_recursion() {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let ens = BrownianEnsemble::generate(2, grid, 8, 2024).unwrap();
        let p = HerglotzSpec::single_atom(0.0);
        let report = verify_transform(
            DiskPoint::from_parts(0.3, 0.1).unwrap(),
            &[0.0, 0.0],
            &p,
            &ens,
            3,
        )
        .unwrap();
        for level in &report.levels {
            assert_eq!(level.rms_discrepancy, Some(0.0));
            assert_eq!(level.excluded, 0);
            assert_eq!(level.path_count, 8);
        }
        assert_eq!(report.estimated_order, None);
    }

    #[test]
    fn discrepancy_shrinks_under_refinement() {
        let grid = TimeGrid::new(0.5, 32).unwrap();
        let ens = BrownianEnsemble::generate(2, grid, 24, 99).unwrap();
        let report = verify_transform(
            DiskPoint::origin(),
            &[1.0, 0.5],
            &HerglotzSpec::single_atom(0.0),
            &ens,
            4,
        )
        .unwrap();
        let rms: Vec<f64> = report
            .levels
            .iter()
            .map(|l| l.rms_discrepancy.unwrap())
            .collect();
        for pair in rms.windows(2) {
            assert!(pair[1] < pair[0], "rms not decreasing: {rms:?}");
        }
        assert!(report.estimated_order.unwrap() > 0.25);
    }

    #[test]
    fn exited_paths_are_dropped_and_counted() {
        // kappa = 0 with the unit atom drives phi(t) = tanh t from the
        // origin deterministically; over t_end = 8 every path exits.
        let grid = TimeGrid::new(8.0, 512).unwrap();
        let ens = BrownianEnsemble::generate(1, grid, 5, 1).unwrap();
        let report = verify_transform(
            DiskPoint::origin(),
            &[0.0],
            &HerglotzSpec::single_atom(0.0),
            &ens,
            1,
        )
        .unwrap();
        assert_eq!(report.levels[0].excluded, 5);
        assert_eq!(report.levels[0].path_count, 0);
        assert_eq!(report.levels[0].rms_discrepancy, None);
    }

    #[test]
    fn report_serializes_with_stable_field_names() {
        let report = ConvergenceReport {
            levels: vec![LevelReport {
                h: 0.125,
                rms_discrepancy: Some(0.5),
                excluded: 1,
                path_count: 9,
            }],
            estimated_order: Some(0.5),
        };
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["levels"][0]["h"], 0.125);
        assert_eq!(json["levels"][0]["rms_discrepancy"], 0.5);
        assert_eq!(json["levels"][0]["excluded"], 1);
        assert_eq!(json["levels"][0]["path_count"], 9);
        assert_eq!(json["estimated_order"], 0.5);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// For exponential drivers the coefficients depend on (phi, y)
            /// only through psi = phi/tau(y): evaluating at fiber points
            /// (psi0 tau(y), y) reproduces the closed form in psi0.
            #[test]
            fn exponential_coefficients_are_functions_of_psi_alone(
                k0 in -3.0f64..3.0,
                k1 in -3.0f64..3.0,
                y0 in -4.0f64..4.0,
                y1 in -4.0f64..4.0,
                radius in 0.0f64..0.8,
                angle in 0.0f64..std::f64::consts::TAU,
            ) {
                let driver = TauDriver::exponential(vec![k0, k1]).unwrap();
                let p = HerglotzSpec::single_atom(0.0);
                let psi0 = Complex64::from_polar(radius, angle);
                let y = [y0, y1];
                let tau = driver.evaluate(&y).unwrap();
                let coeffs = effective_coefficients(psi0 * tau, &y, &driver, &p).unwrap();
                let psi = (psi0 * tau) / tau;
                let one = Complex64::new(1.0, 0.0);
                let k2 = k0 * k0 + k1 * k1;
                let expected_drift = psi * (-0.5 * k2)
                    + (psi - one) * (psi - one) * p.evaluate(psi, 0).unwrap();
                prop_assert!((coeffs.drift - expected_drift).norm() <= 1e-12);
                let i = Complex64::new(0.0, 1.0);
                prop_assert!((coeffs.diffusion[0] - (-(i * k0 * psi))).norm() <= 1e-12);
                prop_assert!((coeffs.diffusion[1] - (-(i * k1 * psi))).norm() <= 1e-12);
            }
        }
    }
}
