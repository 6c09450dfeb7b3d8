use std::f64::consts::PI;

use gpe_core::{discrete_norm, normalize, sine_forward, sine_inverse, ComplexField, Grid, SineCoeffs};
use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use proptest::prelude::*;

/// Direct O(M^2) sum `c_k = sum_j f_j sin(pi j k / M)`.
fn direct_dst(f: &[Complex64], m: usize) -> Vec<Complex64> {
    (1..m)
        .map(|k| (1..m).map(|j| f[j] * (PI * (j * k) as f64 / m as f64).sin()).sum())
        .collect()
}

fn field_1d(m: usize, interior: &[Complex64]) -> ComplexField {
    let g = Grid::uniform(1, -1.0, 2.0, m).unwrap();
    let mut v = ArrayD::zeros(IxDyn(&[m + 1]));
    for (j, z) in interior.iter().enumerate() {
        v[[j + 1]] = *z;
    }
    ComplexField::from_values(&g, v).unwrap()
}

#[test]
fn fast_transform_matches_direct_sum() {
    let m = 48;
    let interior: Vec<Complex64> = (1..m)
        .map(|j| Complex64::new((0.3 * j as f64).sin(), (j as f64).sqrt().cos()))
        .collect();
    let f = field_1d(m, &interior);
    let mut padded = vec![Complex64::new(0.0, 0.0)];
    padded.extend_from_slice(&interior);
    let want = direct_dst(&padded, m);
    let got = sine_forward(&f).unwrap();
    for (a, b) in got.values().iter().zip(&want) {
        assert!((a - b).norm() < 1e-11, "{a} vs {b}");
    }
}

#[test]
fn single_mode_coefficient() {
    let m = 64;
    let g = Grid::uniform(1, 0.0, 1.0, m).unwrap();
    let f = ComplexField::from_real_fn(&g, |x| (PI * x[0]).sin());
    let c = sine_forward(&f).unwrap();
    assert!((c.values()[[0]].re - m as f64 / 2.0).abs() < 1e-10);
    let rest = c.values().iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max);
    assert!(rest < 1e-10);
}

#[test]
fn inverse_of_unit_coefficient_is_a_sine_mode() {
    let m = 32;
    let g = Grid::uniform(1, 0.0, 1.0, m).unwrap();
    let mut c = SineCoeffs::zeros(&g).unwrap();
    c.values_mut()[[2]] = Complex64::new(m as f64 / 2.0, 0.0);
    let f = sine_inverse(&c).unwrap();
    for j in 0..=m {
        let x = j as f64 / m as f64;
        assert!((f.values()[[j]].re - (3.0 * PI * x).sin()).abs() < 1e-13);
    }
}

#[test]
fn round_trip_in_three_dimensions() {
    let g = Grid::uniform(3, -2.0, 2.0, 16).unwrap();
    let f = ComplexField::from_fn(&g, |x| {
        Complex64::new((-x[0] * x[0]).exp() * x[1], x[2] * (4.0 - x[0] * x[0]))
    });
    let back = sine_inverse(&sine_forward(&f).unwrap()).unwrap();
    assert!(back.max_abs_diff(&f) < 1e-12);
}

#[test]
fn discrete_norm_of_single_node_field() {
    let g = Grid::uniform(1, 0.0, 1.0, 8).unwrap();
    let mut v = ArrayD::zeros(IxDyn(&[9]));
    v[[3]] = Complex64::new(0.0, 0.9 * 8f64.sqrt());
    let f = ComplexField::from_values(&g, v).unwrap();
    assert!((discrete_norm(&f) - 0.9).abs() < 1e-15);
}

#[test]
fn sampled_gaussian_has_unit_norm() {
    let g = Grid::uniform(1, -16.0, 16.0, 512).unwrap();
    let f = ComplexField::from_real_fn(&g, |x| PI.powf(-0.25) * (-0.5 * x[0] * x[0]).exp());
    assert!((discrete_norm(&f) - 1.0).abs() < 1e-10);
}

#[test]
fn normalize_rejects_zero_field() {
    let g = Grid::uniform(2, -1.0, 1.0, 8).unwrap();
    assert!(normalize(&ComplexField::zeros(&g)).is_err());
}

#[test]
fn normalize_rescales_constant_interior() {
    let g = Grid::uniform(1, 0.0, 8.0, 8).unwrap();
    let f = ComplexField::from_real_fn(&g, |_| 3.0);
    let n = normalize(&f).unwrap();
    // seven interior nodes, h = 1
    assert!((n.values()[[2]].re - 1.0 / 7f64.sqrt()).abs() < 1e-15);
    assert!((discrete_norm(&n) - 1.0).abs() < 1e-15);
}

fn interior_values(m: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), m - 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_recovers_field(m in prop::sample::select(vec![8usize, 12, 30, 64]), seed in 0u64..1000) {
        let interior: Vec<Complex64> = (1..m)
            .map(|j| {
                let s = (seed as f64 + 1.0) * (j as f64);
                Complex64::new(s.sin(), (0.7 * s).cos())
            })
            .collect();
        let f = field_1d(m, &interior);
        let back = sine_inverse(&sine_forward(&f).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn parseval(vals in interior_values(40)) {
        let m = 40;
        let interior: Vec<Complex64> = vals.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let f = field_1d(m, &interior);
        let c = sine_forward(&f).unwrap();
        let lhs: f64 = interior.iter().map(|z| z.norm_sqr()).sum();
        let rhs: f64 = c.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * 2.0 / m as f64;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn normalize_is_idempotent(vals in interior_values(24), scale in 0.01..100.0f64) {
        let interior: Vec<Complex64> = vals.iter().map(|&(a, b)| Complex64::new(a, b) * scale).collect();
        prop_assume!(interior.iter().any(|z| z.norm() > 1e-3));
        let f = field_1d(24, &interior);
        let once = normalize(&f).unwrap();
        let twice = normalize(&once).unwrap();
        prop_assert!((discrete_norm(&once) - 1.0).abs() < 1e-14);
        prop_assert!(twice.max_abs_diff(&once) < 1e-14);
    }

    #[test]
    fn boundary_nodes_stay_zero(a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let g = Grid::uniform(2, -1.0, 1.0, 10).unwrap();
        let f = ComplexField::from_fn(&g, |x| Complex64::new(a + x[0], b * x[1]));
        for (ix, z) in f.values().indexed_iter() {
            if g.is_boundary(&[ix[0], ix[1]]) {
                prop_assert_eq!(*z, Complex64::new(0.0, 0.0));
            }
        }
    }
}
