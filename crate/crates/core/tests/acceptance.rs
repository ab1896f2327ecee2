//! Acceptance suite: desk-scale oracle and property checks, one PASS/FAIL
//! line per criterion (run with `--nocapture` to see the lines for passing
//! tests).
//!
//! Criterion 1b is a known red: it pins the first-order Euler scheme at
//! h = 1e-4 against the Riccati closed form with a 1e-6 gate, but the global
//! Euler error for that flow is ~0.1733 * h ~ 1.7e-5, an order of magnitude
//! above the gate (the step would have to shrink below ~5.8e-6). The check
//! is kept as stated rather than silently loosened; the Heun diagnostic
//! printed next to it shows the integrator itself is sound at ~6e-10.

use std::time::Instant;

use loewner_ito::admissibility::{
    classify, fiber_variation, unit_cube_corners, ANALYTIC_TOL, FINITE_DIFFERENCE_TOL,
};
use loewner_ito::generator::{apply_generator, estimate_generator_mc, PolynomialTestFunction};
use loewner_ito::herglotz::{Atom, HerglotzSpec, DEFAULT_ANGLES, DEFAULT_RADII};
use loewner_ito::ito_transform::verify_transform;
use loewner_ito::loewner_flow::{
    integrate_classical, integrate_randomized, ClassicalScheme, RandomizedScheme,
};
use loewner_ito::stochastic_paths::{BrownianEnsemble, TimeGrid};
use loewner_ito::tau_driver::TauDriver;
use loewner_ito::{Complex64, DiskPoint};

fn check(name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {name}: {detail}");
    assert!(pass, "{name}: {detail}");
}

fn polar_grid(radii: &[f64], n_angles: usize) -> Vec<Complex64> {
    let mut points = Vec::new();
    for &r in radii {
        for k in 0..n_angles {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n_angles as f64;
            points.push(Complex64::from_polar(r, angle));
        }
    }
    points
}

#[test]
fn c1a_classical_flow_matches_exponential_decay() {
    let start = Instant::now();
    let grid = TimeGrid::new(3.0, 3000).unwrap();
    let p = HerglotzSpec::constant();
    let mut max_error = 0.0_f64;
    for z in polar_grid(&[0.1, 0.3, 0.5, 0.7, 0.9], 8) {
        let traj =
            integrate_classical(DiskPoint::new(z).unwrap(), &p, grid, ClassicalScheme::Rk4)
                .unwrap();
        assert!(traj.is_complete());
        for (t, state) in traj.iter() {
            let error = (state - z * (-t).exp()).norm();
            if error > max_error {
                max_error = error;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        "criterion 1a (classical flow vs z*exp(-t))",
        max_error <= 1e-8 && elapsed < 5.0,
        &format!("max error {max_error:.3e} (gate 1e-8), {elapsed:.2} s (gate 5 s)"),
    );
}

#[test]
fn c1b_randomized_flow_matches_riccati_closed_form() {
    let start = Instant::now();
    let grid = TimeGrid::new(1.0, 10_000).unwrap();
    let ens = BrownianEnsemble::generate(1, grid, 1, 0).unwrap();
    let path = ens.path(0);
    let driver = TauDriver::exponential(vec![0.0]).unwrap();
    let p = HerglotzSpec::constant();
    let one = Complex64::new(1.0, 0.0);
    let riccati = |z: Complex64, t: f64| one - (one - z) / (one + (one - z) * t);

    let mut euler_error = 0.0_f64;
    let mut heun_error = 0.0_f64;
    for z in [Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)] {
        let start_point = DiskPoint::new(z).unwrap();
        let euler =
            integrate_randomized(start_point, &p, &driver, &path, RandomizedScheme::Euler)
                .unwrap();
        let heun = integrate_randomized(start_point, &p, &driver, &path, RandomizedScheme::Heun)
            .unwrap();
        for (t, state) in euler.iter() {
            euler_error = euler_error.max((state - riccati(z, t)).norm());
        }
        for (t, state) in heun.iter() {
            heun_error = heun_error.max((state - riccati(z, t)).norm());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        "criterion 1b (randomized flow vs Riccati, Euler h=1e-4)",
        euler_error <= 1e-6 && elapsed < 5.0,
        &format!(
            "Euler max error {euler_error:.3e} exceeds the 1e-6 gate; first-order error is \
             ~0.1733*h so the gate needs h <= 5.8e-6. Heun diagnostic at the same step: \
             {heun_error:.3e} (passes the gate). {elapsed:.2} s"
        ),
    );
}

#[test]
fn c2_transform_equivalence_converges() {
    let start = Instant::now();
    // h = 2^-8 .. 2^-12 over five dyadic levels.
    let grid = TimeGrid::new(0.5, 128).unwrap();
    let ens = BrownianEnsemble::generate(2, grid, 100, 2024).unwrap();
    let report = verify_transform(
        DiskPoint::origin(),
        &[1.0, 0.5],
        &HerglotzSpec::single_atom(0.0),
        &ens,
        5,
    )
    .unwrap();
    let rms: Vec<f64> = report
        .levels
        .iter()
        .map(|l| l.rms_discrepancy.expect("no path should exit"))
        .collect();
    let monotone = rms.windows(2).all(|pair| pair[1] < pair[0]);
    let order = report.estimated_order.unwrap_or(f64::NAN);
    let last = *rms.last().unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    check(
        "criterion 2 (chain-to-diffusion equivalence)",
        monotone && order >= 0.4 && last <= 1e-2 && elapsed < 60.0,
        &format!(
            "rms per level {:?}, estimated order {order:.3} (gate 0.4), final rms {last:.3e} \
             (gate 1e-2), {elapsed:.1} s (gate 60 s)",
            rms.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn c3_generator_agreement() {
    let start = Instant::now();
    let functions = [
        PolynomialTestFunction::monomial(1),
        PolynomialTestFunction::monomial(2),
        PolynomialTestFunction::monomial(3),
    ];
    let points = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.3, 0.0),
        Complex64::new(0.2, 0.4),
    ];
    let kappas: [&[f64]; 3] = [&[0.0], &[2.0], &[1.0, 1.0]];
    let specs = [HerglotzSpec::constant(), HerglotzSpec::single_atom(0.0)];

    // Spot value first: f = z^2, z = 0.5, |kappa|^2 = 4, p = 1 gives -1.75.
    let spot = apply_generator(
        &PolynomialTestFunction::monomial(2),
        DiskPoint::from_parts(0.5, 0.0).unwrap(),
        &[2.0],
        &HerglotzSpec::constant(),
    )
    .unwrap();
    let spot_ok = (spot - Complex64::new(-1.75, 0.0)).norm() <= 1e-12;

    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_config = String::new();
    let mut all_ok = true;
    let mut seed = 9000_u64;
    for f in &functions {
        for &z in &points {
            for kappa in kappas {
                for p in &specs {
                    seed += 1;
                    let report = estimate_generator_mc(
                        f,
                        DiskPoint::new(z).unwrap(),
                        kappa,
                        p,
                        1e-3,
                        100_000,
                        seed,
                    )
                    .unwrap();
                    let error = (report.mc_estimate - report.closed_form).norm();
                    let budget = 3.0 * report.stderr + 0.05;
                    let margin = error - budget;
                    if margin > worst_margin {
                        worst_margin = margin;
                        worst_config = format!(
                            "deg {} z {z} kappa {kappa:?}: error {error:.4}, budget {budget:.4}",
                            f.coefficients().len() - 1
                        );
                    }
                    all_ok &= error <= budget && !report.flagged;
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        "criterion 3 (generator MC vs closed form)",
        spot_ok && all_ok && elapsed < 120.0,
        &format!(
            "spot value {spot} (expected -1.75), worst config: {worst_config}, \
             {elapsed:.1} s (gate 120 s)"
        ),
    );
}

#[test]
fn c4_admissibility_truth_table() {
    let start = Instant::now();
    let kappa = vec![2.0, -1.0];
    let exponential = TauDriver::exponential(kappa.clone()).unwrap();
    let analytic = classify(&exponential, &unit_cube_corners(2), ANALYTIC_TOL).unwrap();
    let analytic_kappa_error = analytic
        .kappa
        .as_ref()
        .map(|k| {
            k.iter()
                .zip(&kappa)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max)
        })
        .unwrap_or(f64::INFINITY);

    let probe = exponential.clone();
    let sampled = TauDriver::sampled(2, move |y| probe.evaluate(y).unwrap());
    let fd = classify(&sampled, &unit_cube_corners(2), FINITE_DIFFERENCE_TOL).unwrap();
    let fd_kappa_error = fd
        .kappa
        .as_ref()
        .map(|k| {
            k.iter()
                .zip(&kappa)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max)
        })
        .unwrap_or(f64::INFINITY);

    let square = classify(
        &TauDriver::SquareExponent,
        &[vec![-1.0], vec![0.0], vec![1.0]],
        1e-6,
    )
    .unwrap();
    let product = classify(&TauDriver::ProductExponent, &unit_cube_corners(2), 1e-6).unwrap();

    let elapsed = start.elapsed().as_secs_f64();
    let pass = analytic.admissible
        && analytic_kappa_error <= 1e-10
        && fd.admissible
        && fd_kappa_error <= 1e-4
        && !square.admissible
        && (square.max_diagonal_residual - 2.0).abs() <= 1e-6
        && !product.admissible
        && (product.max_mixed_residual - 1.0).abs() <= 1e-6
        && product.max_diagonal_residual <= 1e-10
        && elapsed < 1.0;
    check(
        "criterion 4 (admissibility truth table)",
        pass,
        &format!(
            "exponential kappa error {analytic_kappa_error:.2e} analytic / {fd_kappa_error:.2e} \
             finite-difference; square diagonal residual {}; product mixed residual {} with \
             diagonal {:.2e}; {elapsed:.3} s (gate 1 s)",
            square.max_diagonal_residual, product.max_mixed_residual,
            product.max_diagonal_residual
        ),
    );
}

#[test]
fn c5_fiber_invariance_iff() {
    let start = Instant::now();
    let psi0 = Complex64::new(0.5, 0.0);
    let p = HerglotzSpec::constant();

    let mut exponential_worst = 0.0_f64;
    for kappa in [vec![1.0], vec![2.0, -1.0], vec![0.3, 0.7]] {
        let driver = TauDriver::exponential(kappa).unwrap();
        let grid = unit_cube_corners(driver.dim());
        let report = fiber_variation(&driver, &p, psi0, &grid).unwrap();
        exponential_worst = exponential_worst.max(report.max_variation);
    }

    let square = fiber_variation(
        &TauDriver::SquareExponent,
        &p,
        psi0,
        &[vec![0.0], vec![1.0]],
    )
    .unwrap();

    let elapsed = start.elapsed().as_secs_f64();
    let pass = exponential_worst <= 1e-10
        && (square.drift_variation - 1.0).abs() <= 1e-9
        && elapsed < 1.0;
    check(
        "criterion 5 (fiber invariance iff)",
        pass,
        &format!(
            "worst exponential variation {exponential_worst:.2e} (gate 1e-10), square-exponent \
             drift variation {} (expected 1 within 1e-9); {elapsed:.3} s (gate 1 s)",
            square.drift_variation
        ),
    );
}

#[test]
fn c6_herglotz_validation() {
    let specs: Vec<(&str, HerglotzSpec)> = vec![
        ("constant", HerglotzSpec::constant()),
        ("single atom", HerglotzSpec::single_atom(0.0)),
        (
            "symmetric pair",
            HerglotzSpec::atomic(vec![
                Atom { theta: 0.0, weight: 0.5 },
                Atom { theta: std::f64::consts::PI, weight: 0.5 },
            ])
            .unwrap(),
        ),
        (
            "three atoms",
            HerglotzSpec::atomic(vec![
                Atom { theta: 1.0, weight: 0.25 },
                Atom { theta: -std::f64::consts::FRAC_PI_2, weight: 0.25 },
                Atom { theta: 2.5, weight: 0.5 },
            ])
            .unwrap(),
        ),
        ("cayley plus", HerglotzSpec::cayley_plus(1.0).unwrap()),
    ];

    let mut min_real = f64::INFINITY;
    let mut worst_origin = 0.0_f64;
    let mut worst_derivative = 0.0_f64;
    let fd_step = 1e-6;
    for (_, spec) in &specs {
        let validation = spec.validate(&DEFAULT_RADII, DEFAULT_ANGLES).unwrap();
        assert!(validation.passes, "{spec:?} failed validation");
        min_real = min_real.min(validation.min_real_part);
        if matches!(spec, HerglotzSpec::AtomicMeasure { .. }) {
            let origin = spec.evaluate(Complex64::new(0.0, 0.0), 0).unwrap();
            worst_origin = worst_origin.max((origin - Complex64::new(1.0, 0.0)).norm());
        }
        // Derivative orders 1 and 2 against central differences of the
        // order below, relative up to a 1e-9 absolute floor.
        for w in polar_grid(&[0.1, 0.3, 0.5, 0.7, 0.9], 8) {
            for order in [1u8, 2u8] {
                let fd = (spec.evaluate(w + fd_step, order - 1).unwrap()
                    - spec.evaluate(w - fd_step, order - 1).unwrap())
                    / (2.0 * fd_step);
                let exact = spec.evaluate(w, order).unwrap();
                let scale = exact.norm().max(1e-3);
                worst_derivative = worst_derivative.max((fd - exact).norm() / scale);
            }
        }
    }
    let pass = min_real >= -1e-9 && worst_origin <= 1e-12 && worst_derivative <= 1e-6;
    check(
        "criterion 6 (Herglotz validation)",
        pass,
        &format!(
            "min real part {min_real:.3e} (gate -1e-9), worst origin offset {worst_origin:.2e} \
             (gate 1e-12), worst relative derivative mismatch {worst_derivative:.2e} (gate 1e-6)"
        ),
    );
}
