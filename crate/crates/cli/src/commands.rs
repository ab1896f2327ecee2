//! The six subcommands. Config-level problems (missing sections, invalid
//! specs, bad grids) exit 1; domain and runtime failures inside the
//! numerics exit 2.

use std::path::Path;

use serde_json::Value;

use loewner_ito::admissibility::{
    classify_with_step, fiber_variation, unit_cube_corners, ANALYTIC_TOL, FINITE_DIFFERENCE_TOL,
};
use loewner_ito::generator::{estimate_generator_mc, PolynomialTestFunction};
use loewner_ito::herglotz::{HerglotzSpec, DEFAULT_ANGLES, DEFAULT_RADII};
use loewner_ito::ito_transform::{integrate_sde, verify_transform};
use loewner_ito::loewner_flow::{
    integrate_classical, integrate_randomized, ClassicalScheme, RandomizedScheme, Trajectory,
};
use loewner_ito::stochastic_paths::{BrownianEnsemble, TimeGrid};
use loewner_ito::tau_driver::{TauDriver, DEFAULT_FD_STEP};
use loewner_ito::{Complex64, DiskPoint};

use crate::config::{ExperimentConfig, FlowKind, GridConfig, SchemeName};
use crate::output::{write_report, write_trajectories};
use crate::CliError;

/// Shared signature of the subcommand entry points.
pub type Runner = fn(&ExperimentConfig, &Value, &Path) -> Result<(), CliError>;

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn runtime(err: loewner_ito::Error) -> CliError {
    CliError::Runtime(err.to_string())
}

fn require_herglotz(config: &ExperimentConfig) -> Result<&HerglotzSpec, CliError> {
    let spec = config
        .herglotz
        .as_ref()
        .ok_or_else(|| validation("config needs a 'herglotz' section"))?;
    spec.check_invariants()
        .map_err(|e| validation(e.to_string()))?;
    Ok(spec)
}

fn require_grid(config: &ExperimentConfig) -> Result<TimeGrid, CliError> {
    let GridConfig { t_end, n_steps } = config
        .grid
        .ok_or_else(|| validation("config needs a 'grid' section"))?;
    TimeGrid::new(t_end, n_steps).map_err(|e| validation(e.to_string()))
}

fn require_points(config: &ExperimentConfig) -> Result<Vec<Complex64>, CliError> {
    let points = config
        .initial_points
        .as_ref()
        .ok_or_else(|| validation("config needs 'initial_points'"))?;
    if points.is_empty() {
        return Err(validation("'initial_points' is empty"));
    }
    Ok(points
        .iter()
        .map(|[re, im]| Complex64::new(*re, *im))
        .collect())
}

fn require_kappa(config: &ExperimentConfig) -> Result<&[f64], CliError> {
    let kappa = config
        .kappa
        .as_ref()
        .ok_or_else(|| validation("config needs 'kappa'"))?;
    if kappa.is_empty() {
        return Err(validation("'kappa' is empty"));
    }
    Ok(kappa)
}

fn require_driver(config: &ExperimentConfig) -> Result<TauDriver, CliError> {
    config
        .driver
        .as_ref()
        .ok_or_else(|| validation("config needs a 'driver' section"))?
        .build()
        .map_err(|e| validation(e.to_string()))
}

fn disk_point(z: Complex64) -> Result<DiskPoint, CliError> {
    DiskPoint::new(z).map_err(runtime)
}

pub fn simulate(
    config: &ExperimentConfig,
    resolved: &Value,
    out: &Path,
) -> Result<(), CliError> {
    let _ = resolved;
    let flow = config
        .flow
        .ok_or_else(|| validation("config needs 'flow': \"classical\" or \"randomized\""))?;
    let spec = require_herglotz(config)?;
    let grid = require_grid(config)?;
    let points = require_points(config)?;
    let mut rows: Vec<(usize, Trajectory)> = Vec::new();
    match flow {
        FlowKind::Classical => {
            let scheme = match config.scheme.unwrap_or(SchemeName::Rk4) {
                SchemeName::Euler => ClassicalScheme::Euler,
                SchemeName::Heun => ClassicalScheme::Heun,
                SchemeName::Rk4 => ClassicalScheme::Rk4,
            };
            for (index, z) in points.iter().enumerate() {
                let trajectory = integrate_classical(disk_point(*z)?, spec, grid, scheme)
                    .map_err(runtime)?;
                rows.push((index, trajectory));
            }
        }
        FlowKind::Randomized => {
            let scheme = match config.scheme.unwrap_or(SchemeName::Euler) {
                SchemeName::Euler => RandomizedScheme::Euler,
                SchemeName::Heun => RandomizedScheme::Heun,
                SchemeName::Rk4 => {
                    return Err(validation(
                        "scheme 'rk4' is only available for the classical flow",
                    ))
                }
            };
            let driver = require_driver(config)?;
            let ensemble =
                BrownianEnsemble::generate(driver.dim(), grid, config.n_paths, config.seed)
                    .map_err(runtime)?;
            for (z_index, z) in points.iter().enumerate() {
                let start = disk_point(*z)?;
                for path_index in 0..ensemble.n_paths() {
                    let trajectory = integrate_randomized(
                        start,
                        spec,
                        &driver,
                        &ensemble.path(path_index),
                        scheme,
                    )
                    .map_err(runtime)?;
                    rows.push((z_index * ensemble.n_paths() + path_index, trajectory));
                }
            }
        }
    }
    write_trajectories(&out.join("trajectories.csv"), &rows)
}

pub fn sde(config: &ExperimentConfig, resolved: &Value, out: &Path) -> Result<(), CliError> {
    let _ = resolved;
    let spec = require_herglotz(config)?;
    let grid = require_grid(config)?;
    let points = require_points(config)?;
    let kappa = require_kappa(config)?;
    let ensemble = BrownianEnsemble::generate(kappa.len(), grid, config.n_paths, config.seed)
        .map_err(runtime)?;
    let mut rows: Vec<(usize, Trajectory)> = Vec::new();
    for (z_index, z) in points.iter().enumerate() {
        let start = disk_point(*z)?;
        for path_index in 0..ensemble.n_paths() {
            let trajectory = integrate_sde(start, kappa, spec, &ensemble.path(path_index))
                .map_err(runtime)?;
            rows.push((z_index * ensemble.n_paths() + path_index, trajectory));
        }
    }
    write_trajectories(&out.join("sde_trajectories.csv"), &rows)
}

pub fn verify_transform_cmd(
    config: &ExperimentConfig,
    resolved: &Value,
    out: &Path,
) -> Result<(), CliError> {
    let spec = require_herglotz(config)?;
    let grid = require_grid(config)?;
    let points = require_points(config)?;
    if points.len() != 1 {
        return Err(validation(
            "verify-transform uses exactly one initial point",
        ));
    }
    let kappa = require_kappa(config)?;
    let levels = config
        .refinement_levels
        .ok_or_else(|| validation("config needs 'refinement_levels'"))?;
    let ensemble = BrownianEnsemble::generate(kappa.len(), grid, config.n_paths, config.seed)
        .map_err(runtime)?;
    let report = verify_transform(disk_point(points[0])?, kappa, spec, &ensemble, levels)
        .map_err(runtime)?;
    write_report(
        &out.join("verify_transform.json"),
        "verify-transform",
        config.seed,
        resolved,
        report,
    )
}

pub fn generator(
    config: &ExperimentConfig,
    resolved: &Value,
    out: &Path,
) -> Result<(), CliError> {
    let spec = require_herglotz(config)?;
    let kappa = require_kappa(config)?;
    let section = config
        .generator
        .as_ref()
        .ok_or_else(|| validation("config needs a 'generator' section"))?;
    if section.poly.is_empty() {
        return Err(validation("'generator.poly' is empty"));
    }
    let coefficients = section
        .poly
        .iter()
        .map(|[re, im]| Complex64::new(*re, *im))
        .collect();
    let f = PolynomialTestFunction::new(coefficients).map_err(|e| validation(e.to_string()))?;
    let z = disk_point(Complex64::new(section.z[0], section.z[1]))?;
    let report = estimate_generator_mc(
        &f,
        z,
        kappa,
        spec,
        section.h,
        section.n_samples,
        config.seed,
    )
    .map_err(runtime)?;
    write_report(
        &out.join("generator.json"),
        "generator",
        config.seed,
        resolved,
        report,
    )
}

pub fn classify(
    config: &ExperimentConfig,
    resolved: &Value,
    out: &Path,
) -> Result<(), CliError> {
    let driver = require_driver(config)?;
    let section = config.classify.clone().unwrap_or_default();
    let grid = match section.grid {
        Some(grid) => {
            if grid.is_empty() {
                return Err(validation("'classify.grid' is empty"));
            }
            grid
        }
        None => unit_cube_corners(driver.dim()),
    };
    let fd_step = section.fd_step.unwrap_or(DEFAULT_FD_STEP);
    let (driver, default_tol) = if section.finite_difference {
        let inner = driver.clone();
        let dim = driver.dim();
        (
            TauDriver::sampled(dim, move |y| {
                inner
                    .evaluate(y)
                    .expect("dimension already checked by the outer driver")
            }),
            FINITE_DIFFERENCE_TOL,
        )
    } else {
        (driver, ANALYTIC_TOL)
    };
    let tol = section.tol.unwrap_or(default_tol);
    let report = classify_with_step(&driver, &grid, tol, fd_step).map_err(runtime)?;
    // The dynamic cross-check on the psi0 = 0.5 fiber rides along when a
    // Herglotz spec is configured.
    let fiber = match &config.herglotz {
        Some(spec) => {
            spec.check_invariants()
                .map_err(|e| validation(e.to_string()))?;
            Some(
                fiber_variation(&driver, spec, Complex64::new(0.5, 0.0), &grid)
                    .map_err(runtime)?,
            )
        }
        None => None,
    };
    #[derive(serde::Serialize)]
    struct ClassifyReport<A: serde::Serialize, B: serde::Serialize> {
        classifier: A,
        #[serde(skip_serializing_if = "Option::is_none")]
        fiber: Option<B>,
    }
    write_report(
        &out.join("classify.json"),
        "classify",
        config.seed,
        resolved,
        ClassifyReport {
            classifier: report,
            fiber,
        },
    )
}

pub fn validate_herglotz(
    config: &ExperimentConfig,
    resolved: &Value,
    out: &Path,
) -> Result<(), CliError> {
    let spec = config
        .herglotz
        .as_ref()
        .ok_or_else(|| validation("config needs a 'herglotz' section"))?;
    let section = config.validate.clone().unwrap_or_default();
    let radii = section.radii.unwrap_or_else(|| DEFAULT_RADII.to_vec());
    let n_angles = section.n_angles.unwrap_or(DEFAULT_ANGLES);
    // Everything this command touches is configuration, so all failures
    // (spec invariants, bad radii, empty grid) are validation errors.
    let report = spec
        .validate(&radii, n_angles)
        .map_err(|e| validation(e.to_string()))?;
    write_report(
        &out.join("herglotz_validation.json"),
        "validate-herglotz",
        config.seed,
        resolved,
        report,
    )
}
