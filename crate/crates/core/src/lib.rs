//! Randomized radial Loewner chains and the substitution that turns them
//! into an Ito diffusion.
//!
//! The classical radial Loewner flow d phi/dt = -phi p(phi) moves points of
//! the unit disk toward the origin under a Herglotz function p. Replacing
//! the target by a unit-modulus driver tau evaluated along Brownian motion
//! gives the randomized chain
//!
//! ```text
//! d phi/dt = ((tau(B_t) - phi)^2 / tau(B_t)) * p(phi / tau(B_t)),
//! ```
//!
//! and for tau(y) = exp(i kappa . y) the substitution psi = phi / tau(B_t)
//! produces a time-homogeneous diffusion with analytic coefficients and an
//! explicit generator. That exponential family is the only one that works:
//! the [`admissibility`] module implements the criterion (vanishing Hessian
//! of log tau) together with a dynamic test on coefficient fibers, and the
//! [`ito_transform`] module carries the substitution, the diffusion
//! integrator and the convergence study tying chain and diffusion together.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`stochastic_paths`] | seeded Brownian ensembles, dyadic bridge refinement |
//! | [`herglotz`] | Herglotz function specs with exact derivatives |
//! | [`tau_driver`] | unit-modulus drivers and log-derivative access |
//! | [`loewner_flow`] | classical and randomized flow integrators |
//! | [`ito_transform`] | substitution, SDE integrator, transform verification |
//! | [`generator`] | closed-form generator and Monte Carlo estimate |
//! | [`admissibility`] | driver classification and fiber variation |

pub mod admissibility;
pub mod disk;
pub mod error;
pub mod generator;
pub mod herglotz;
pub mod ito_transform;
pub mod loewner_flow;
pub mod stochastic_paths;
pub mod tau_driver;

pub use disk::DiskPoint;
pub use error::{Error, Result};

pub use num_complex::Complex64;
