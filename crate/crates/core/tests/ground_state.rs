use std::f64::consts::PI;

use gpe_core::ground_state::{
    eigen_residual, gfdn_step, solve_ground_state, solve_ground_state_rotating, tf_ground_state, Discretization,
    GfdnConfig, GradientFlow, InitialGuess,
};
use gpe_core::observables::{angular_momentum, energy, mass, GradientMode, Observer};
use gpe_core::spectral::SineInterpolant;
use gpe_core::{discrete_norm, normalize, ComplexField, Error, Grid, ModelParams};
use proptest::prelude::*;

fn box_1d(m: usize) -> Grid {
    Grid::uniform(1, -16.0, 16.0, m).unwrap()
}

fn oscillator(g: &Grid) -> ComplexField {
    ComplexField::from_real_fn(g, |x| PI.powf(-0.25) * (-0.5 * x[0] * x[0]).exp())
}

fn config(tau: f64, tol: f64) -> GfdnConfig {
    GfdnConfig {
        tau,
        stop_tol: tol,
        ..GfdnConfig::default()
    }
}

#[test]
fn oscillator_is_a_fixed_point_of_one_step() {
    let g = box_1d(256);
    let phi = oscillator(&g);
    let p = ModelParams::new(1, 0.0).unwrap();
    let next = gfdn_step(&phi, &p, 0.01).unwrap();
    assert!(next.max_abs_diff(&phi) <= 1e-6);
}

#[test]
fn linear_energy_decreases_for_large_and_small_steps() {
    let g = box_1d(128);
    let p = ModelParams::new(1, 0.0).unwrap();
    let start = ComplexField::from_real_fn(&g, |x| (1.0 + x[0]).max(0.0) * (-0.2 * x[0] * x[0]).exp());
    for disc in [Discretization::Spectral, Discretization::FiniteDifference] {
        let observer = Observer::new(&g, &p).unwrap().with_gradient_mode(match disc {
            Discretization::Spectral => GradientMode::Spectral,
            Discretization::FiniteDifference => GradientMode::FiniteDifference,
        });
        for tau in [0.1, 0.01] {
            let flow = GradientFlow::new(&g, &p, tau, disc).unwrap();
            let mut phi = normalize(&start).unwrap();
            let mut e = observer.energy(&phi).unwrap().total;
            for it in 1..=100 {
                phi = flow.step(&phi, it).unwrap();
                let next = observer.energy(&phi).unwrap().total;
                assert!(next <= e + 1e-14, "{disc:?} tau={tau} step {it}: {e} -> {next}");
                e = next;
            }
        }
    }
}

#[test]
fn nonlinear_energy_decreases_for_moderate_steps() {
    let g = box_1d(128);
    let p = ModelParams::new(1, 50.0).unwrap();
    let cfg = GfdnConfig {
        record_energy: true,
        initial: InitialGuess::Gaussian,
        ..config(0.05, 1e-6)
    };
    let res = solve_ground_state(&p, &g, &cfg).unwrap();
    for w in res.energy_trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
}

#[test]
fn one_dimensional_linear_ground_state() {
    let g = box_1d(256);
    let p = ModelParams::new(1, 0.0).unwrap();
    for disc in [Discretization::Spectral, Discretization::FiniteDifference] {
        let cfg = GfdnConfig {
            discretization: disc,
            initial: InitialGuess::Field(ComplexField::from_real_fn(&g, |x| (-0.2 * x[0] * x[0]).exp())),
            ..config(0.01, 1e-6)
        };
        let res = solve_ground_state(&p, &g, &cfg).unwrap();
        // centered differences carry an O(h^2) = 1.5e-2 consistency error
        let tol = match disc {
            Discretization::Spectral => 1e-6,
            Discretization::FiniteDifference => 1e-3,
        };
        assert!((res.e_g - 0.5).abs() < tol, "{disc:?}: E = {}", res.e_g);
        assert!((res.mu_g - 0.5).abs() < tol);
        assert!((discrete_norm(&res.phi) - 1.0).abs() < 1e-12);
        assert!(res.residual <= 1e-6);
    }
}

#[test]
fn result_invariants_for_a_repulsive_state() {
    let p = ModelParams::new(1, 50.0).unwrap();
    let g = box_1d(256);
    let res = solve_ground_state(&p, &g, &config(0.01, 1e-8)).unwrap();
    assert!(res.mu_g >= res.e_g);
    assert!(res.eigen_residual <= 1e-4);
    assert!(eigen_residual(&res.phi, res.mu_g, &p).unwrap() <= 1e-4);
    let v = res.phi.values();
    let n = v.len();
    assert!(v[[1]].norm() <= 1e-8 && v[[n - 2]].norm() <= 1e-8);
    assert!(v.iter().skip(1).take(n - 2).all(|z| z.re > 0.0 && z.im == 0.0));
    assert!(res.virial_residual().abs() <= 1e-4 * res.e_g.abs());
}

#[test]
fn tf_profile_examples() {
    let g = Grid::uniform(1, -6.0, 6.0, 2048).unwrap();
    let p = ModelParams::new(1, 18.0).unwrap();
    let (phi, mu, e) = tf_ground_state(&p, &g).unwrap();
    assert!((mu - 4.5).abs() < 1e-12);
    assert!((e - 2.7).abs() < 1e-2);
    assert!((mass(&phi) - 1.0).abs() < 1e-3);
    let support: Vec<f64> = phi
        .values()
        .indexed_iter()
        .filter(|(_, z)| z.re > 0.0)
        .map(|(ix, _)| g.axis(0).node(ix[0]))
        .collect();
    let h = g.spacing(0);
    assert!((support[0] + 3.0).abs() <= h);
    assert!((support[support.len() - 1] - 3.0).abs() <= h);
    assert!(tf_ground_state(&ModelParams::new(1, 0.0).unwrap(), &g).is_err());
}

#[test]
fn nonexistent_ground_states_are_rejected() {
    let g3 = Grid::uniform(3, -4.0, 4.0, 8).unwrap();
    let p = ModelParams::new(3, -1.0).unwrap();
    assert!(matches!(
        solve_ground_state(&p, &g3, &GfdnConfig::default()),
        Err(Error::Nonexistence(_))
    ));
    let g2 = Grid::uniform(2, -4.0, 4.0, 8).unwrap();
    let p = ModelParams::new(2, 1.0).unwrap().with_omega(1.0);
    assert!(matches!(
        solve_ground_state_rotating(&p, &g2, &GfdnConfig::default()),
        Err(Error::Nonexistence(_))
    ));
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let g = box_1d(64);
    let p = ModelParams::new(1, 10.0).unwrap();
    let cfg = GfdnConfig {
        max_iter: 3,
        ..config(0.01, 1e-12)
    };
    assert!(matches!(
        solve_ground_state(&p, &g, &cfg),
        Err(Error::NonConvergence { iterations: 3, .. })
    ));
}

#[test]
fn rotating_solver_at_zero_speed_matches_plain_solver() {
    let g = Grid::uniform(2, -8.0, 8.0, 48).unwrap();
    let p = ModelParams::new(2, 10.0).unwrap();
    let plain = solve_ground_state(&p, &g, &config(0.05, 1e-9)).unwrap();
    let rot = solve_ground_state_rotating(&p, &g, &config(0.05, 1e-9)).unwrap();
    assert!((plain.e_g - rot.e_g).abs() < 1e-8);
}

#[test]
fn radial_symmetry_of_isotropic_ground_state() {
    let g = Grid::uniform(2, -8.0, 8.0, 64).unwrap();
    let p = ModelParams::new(2, 10.0).unwrap();
    let res = solve_ground_state(&p, &g, &config(0.05, 1e-8)).unwrap();
    let interp = SineInterpolant::new(&res.phi).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..40 {
        let r = 0.1 * j as f64;
        let a = interp.eval(&[r, 0.0]).norm();
        for theta in [0.3, 0.9, 1.7, 2.5] {
            let b = interp.eval(&[r * f64::cos(theta), r * f64::sin(theta)]).norm();
            worst = worst.max((a - b).abs());
        }
    }
    assert!(worst <= 1e-4, "radial asymmetry {worst}");
}

#[test]
fn slow_rotation_stays_vortex_free() {
    let g = Grid::uniform(2, -8.0, 8.0, 64).unwrap();
    let slow = ModelParams::new(2, 100.0).unwrap().with_omega(0.2);
    let res = solve_ground_state_rotating(&slow, &g, &config(0.01, 1e-6)).unwrap();
    assert!(angular_momentum(&res.phi).unwrap().abs() < 1e-4);
}

#[test]
fn fast_rotation_prefers_vortices() {
    let g = Grid::uniform(2, -8.0, 8.0, 64).unwrap();
    let still = ModelParams::new(2, 100.0).unwrap();
    let fast = still.clone().with_omega(0.9);
    // The vortex-free candidate is the real nonrotating state, whose
    // rotation energy vanishes.
    let free = solve_ground_state(&still, &g, &config(0.01, 1e-6)).unwrap();
    let e_free = energy(&free.phi, &fast).unwrap();
    assert!(e_free.rotation.abs() < 1e-14);
    // The flow only lowers the energy, so a loosely converged vortex state
    // bounds its limit from above.
    let seeded = GfdnConfig {
        initial: InitialGuess::Vortex { winding: 1 },
        ..config(0.01, 1e-2)
    };
    let vortex = solve_ground_state_rotating(&fast, &g, &seeded).unwrap();
    assert!(vortex.e_g < e_free.total, "{} vs {}", vortex.e_g, e_free.total);
    assert!(angular_momentum(&vortex.phi).unwrap() > 1.0);
    let e = energy(&vortex.phi, &fast).unwrap();
    assert!((e.total - vortex.e_g).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_step_is_normalized(
        amp in 0.1..10.0f64,
        shift in -3.0..3.0f64,
        beta in 0.0..200.0f64,
        tau in 0.001..0.5f64,
    ) {
        let g = box_1d(64);
        let phi = ComplexField::from_real_fn(&g, |x| amp * (-(x[0] - shift).powi(2)).exp());
        let p = ModelParams::new(1, beta).unwrap();
        let next = gfdn_step(&phi, &p, tau).unwrap();
        prop_assert!((discrete_norm(&next) - 1.0).abs() < 1e-12);
    }
}
