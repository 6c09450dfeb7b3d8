use std::f64::consts::PI;

use gpe_core::bogoliubov::{assemble_bdg, mode_residual, solve_bdg, zero_mode_cut, BdgOperator};
use gpe_core::ground_state::{solve_ground_state, Discretization, GfdnConfig};
use gpe_core::{Axis, ComplexField, Error, Grid, ModelParams};
use nalgebra::DVector;
use proptest::prelude::*;

fn box_1d(l: f64, m: usize) -> Grid {
    Grid::uniform(1, -l, l, m).unwrap()
}

fn oscillator(g: &Grid) -> ComplexField {
    ComplexField::from_real_fn(g, |x| PI.powf(-0.25) * (-0.5 * x[0] * x[0]).exp())
}

fn linear_operator() -> BdgOperator {
    let g = box_1d(12.0, 128);
    let p = ModelParams::new(1, 0.0).unwrap();
    let phi = oscillator(&g);
    assemble_bdg(&phi, 0.5, &p, Discretization::Spectral).unwrap()
}

fn repulsive(beta: f64, m: usize) -> (ComplexField, f64, ModelParams) {
    let g = box_1d(10.0, m);
    let p = ModelParams::new(1, beta).unwrap();
    let cfg = GfdnConfig {
        tau: 0.05,
        stop_tol: 1e-10,
        ..GfdnConfig::default()
    };
    let res = solve_ground_state(&p, &g, &cfg).unwrap();
    (res.phi, res.mu_g, p)
}

#[test]
fn linear_trap_excitations_are_oscillator_quanta() {
    let op = linear_operator();
    let spec = solve_bdg(&op).unwrap();
    assert!(spec.unstable.is_empty());
    assert_eq!(spec.zero_modes.len(), 1);
    for (k, w) in spec.frequencies().iter().take(6).enumerate() {
        assert!((w - (k + 1) as f64).abs() < 1e-6, "mode {k}: {w}");
    }
    for mode in &spec.modes {
        let v = mode.v.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(v < 1e-10);
    }
}

#[test]
fn block_structure() {
    let (phi, mu, p) = repulsive(10.0, 64);
    let op = assemble_bdg(&phi, mu, &p, Discretization::Spectral).unwrap();
    let n = op.l_block().nrows();
    let full = op.block_matrix();
    assert_eq!(full.nrows(), 2 * n);
    let l = op.l_block();
    assert!((l - l.transpose()).amax() <= 1e-12);
    for i in 0..n {
        for j in 0..n {
            assert_eq!(full[(i, j)], l[(i, j)]);
            assert_eq!(full[(n + i, n + j)], -l[(i, j)]);
            assert_eq!(full[(n + i, j)], -full[(i, n + j)]);
        }
        let x = phi.grid().axis(0).node(i + 1);
        let want = p.beta * phi.values()[[i + 1]].re.powi(2);
        assert!((op.coupling()[i] - want).abs() < 1e-14 * want.max(1.0), "x = {x}");
    }
}

#[test]
fn ground_state_spans_the_null_direction_of_l() {
    let op = linear_operator();
    let g = op.grid().clone();
    let phi = oscillator(&g);
    let n = op.l_block().nrows();
    let f = DVector::from_fn(n, |i, _| phi.values()[[i + 1]].re);
    assert!((op.l_block() * f).amax() < 1e-8);
}

#[test]
fn repulsive_modes_are_normalized_sorted_and_real() {
    let (phi, mu, p) = repulsive(10.0, 96);
    let op = assemble_bdg(&phi, mu, &p, Discretization::Spectral).unwrap();
    let spec = solve_bdg(&op).unwrap();
    assert!(spec.unstable.is_empty());
    assert!(!spec.zero_modes.is_empty());
    let w = spec.frequencies();
    assert!(w.windows(2).all(|p| p[0] <= p[1]));
    for mode in &spec.modes {
        assert!(mode.norm_defect.abs() < 1e-8);
        assert_eq!(mode.omega.im, 0.0);
    }
    for mode in spec.modes.iter().take(10) {
        let r = mode_residual(&op, mode);
        assert!(r < 1e-6 * mode.omega.re.max(1.0), "{} residual {r}", mode.omega.re);
    }
    // each positive-norm mode has a partner at -omega
    let mut partners: Vec<f64> = spec.partners.iter().map(|v| -v).collect();
    partners.sort_by(f64::total_cmp);
    assert_eq!(partners.len(), w.len());
    for (a, b) in partners.iter().zip(&w) {
        assert!((a - b).abs() < 1e-12 * b.max(1.0));
    }
}

#[test]
fn dipole_mode_sits_at_the_trap_frequency() {
    // The centre of mass oscillates at the trap frequency for any beta.
    let (phi, mu, p) = repulsive(30.0, 128);
    let op = assemble_bdg(&phi, mu, &p, Discretization::Spectral).unwrap();
    let spec = solve_bdg(&op).unwrap();
    let kohn = spec.frequencies()[0];
    assert!((kohn - 1.0).abs() < 1e-5, "{kohn}");
    // the breathing mode lies between the ideal gas value 2 and sqrt(3)
    let breathing = spec.frequencies()[1];
    assert!(breathing > 3f64.sqrt() - 1e-3 && breathing < 2.0, "{breathing}");
}

#[test]
fn finite_difference_operator_tracks_spectral_one() {
    let g = box_1d(12.0, 256);
    let p = ModelParams::new(1, 0.0).unwrap();
    let cfg = GfdnConfig {
        discretization: Discretization::FiniteDifference,
        tau: 0.05,
        stop_tol: 1e-11,
        ..GfdnConfig::default()
    };
    let res = solve_ground_state(&p, &g, &cfg).unwrap();
    let op = assemble_bdg(&res.phi, res.mu_g, &p, Discretization::FiniteDifference).unwrap();
    let spec = solve_bdg(&op).unwrap();
    // centered differences with h = 3/32 are accurate to O(k^4 h^2)
    for (k, w) in spec.frequencies().iter().take(4).enumerate() {
        assert!((w - (k + 1) as f64).abs() < 2e-2, "mode {k}: {w}");
    }
}

#[test]
fn unconverged_states_are_rejected() {
    let g = box_1d(12.0, 64);
    let wide = ComplexField::from_real_fn(&g, |x| (-0.1 * x[0] * x[0]).exp());
    let p = ModelParams::new(1, 0.0).unwrap();
    assert!(assemble_bdg(&wide, 0.5, &p, Discretization::Spectral).is_err());
}

#[test]
fn only_one_dimensional_dirichlet_problems() {
    let g2 = Grid::uniform(2, -4.0, 4.0, 16).unwrap();
    let p2 = ModelParams::new(2, 0.0).unwrap();
    let phi2 = ComplexField::from_real_fn(&g2, |x| (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp());
    assert!(matches!(
        assemble_bdg(&phi2, 1.0, &p2, Discretization::Spectral),
        Err(Error::UnsupportedDimension { dim: 2, .. })
    ));
    let gp = Grid::periodic(vec![Axis::new(-12.0, 12.0, 64).unwrap()]).unwrap();
    let p = ModelParams::new(1, 0.0).unwrap();
    assert!(assemble_bdg(&oscillator(&gp), 0.5, &p, Discretization::Spectral).is_err());
}

#[test]
fn mode_table_layout() {
    let spec = solve_bdg(&linear_operator()).unwrap();
    let table = spec.mode_table();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("index,re_omega,im_omega,norm_defect"));
    assert_eq!(lines.count(), spec.modes.len());
    let summaries = spec.summaries();
    assert_eq!(summaries[2].index, 2);
    assert_eq!(summaries[2].re_omega, spec.modes[2].omega.re);
}

#[test]
fn zero_mode_cut_has_a_floor() {
    assert_eq!(zero_mode_cut(&[0.0, 1.0]), 1e-6);
    assert!(zero_mode_cut(&vec![1e6; 100]) > 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn repulsive_spectrum_is_real_with_kohn_mode(beta in 0.5..40.0f64) {
        let (phi, mu, p) = repulsive(beta, 64);
        let op = assemble_bdg(&phi, mu, &p, Discretization::Spectral).unwrap();
        let spec = solve_bdg(&op).unwrap();
        prop_assert!(spec.unstable.is_empty());
        prop_assert!((spec.frequencies()[0] - 1.0).abs() < 1e-4);
        prop_assert!(spec.modes.iter().all(|m| m.norm_defect.abs() < 1e-8));
    }
}
