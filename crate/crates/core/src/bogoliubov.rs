//! Bogoliubov–de Gennes excitations of a 1D ground state.
//!
//! The operator `[[L, -beta phi^2], [beta phi^2, -L]]` with
//! `L = -(eps^2/2) Lap + V + 2 beta phi^2 - mu` is reduced with `f = u + v`,
//! `g = u - v` to `omega g = (L - beta phi^2) f`, `omega f = (L + beta phi^2) g`,
//! hence `omega^2 f = B A f`. For a ground state both `A` and `B` are positive
//! semidefinite, so the symmetric matrix `B^{1/2} A B^{1/2}` carries the
//! spectrum and a dense symmetric eigensolver suffices.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid};
use crate::ground_state::{eigen_residual_with, Discretization};
use crate::model::ModelParams;

/// Ground states whose eigen-residual exceeds this are rejected.
pub const RESIDUAL_THRESHOLD: f64 = 1e-4;
/// Frequencies below this are treated as the zero (phase) mode. The cut is
/// raised to the eigensolver's resolution when that is coarser, see
/// [`zero_mode_cut`].
pub const ZERO_MODE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct BdgOperator {
    grid: Grid,
    /// `L` on interior nodes.
    l: DMatrix<f64>,
    /// `beta phi_g^2` on interior nodes.
    coupling: DVector<f64>,
}

impl BdgOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn l_block(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn coupling(&self) -> &DVector<f64> {
        &self.coupling
    }

    /// Full `2n x 2n` block matrix.
    pub fn block_matrix(&self) -> DMatrix<f64> {
        let n = self.l.nrows();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.l);
        m.view_mut((n, n), (n, n)).copy_from(&(-&self.l));
        for i in 0..n {
            m[(i, n + i)] = -self.coupling[i];
            m[(n + i, i)] = self.coupling[i];
        }
        m
    }
}

/// Assembles the operator around a converged real ground state.
pub fn assemble_bdg(phi: &ComplexField, mu: f64, params: &ModelParams, disc: Discretization) -> Result<BdgOperator> {
    let grid = phi.grid();
    params.check_grid(grid)?;
    if grid.dim() != 1 {
        return Err(Error::UnsupportedDimension {
            operation: "Bogoliubov-de Gennes",
            dim: grid.dim(),
        });
    }
    if grid.is_periodic() {
        return Err(Error::invalid("BdG operator is assembled on a Dirichlet grid"));
    }
    if params.omega != 0.0 {
        return Err(Error::invalid("rotating BdG is not supported"));
    }
    let res = eigen_residual_with(phi, mu, params, disc)?;
    if !(res <= RESIDUAL_THRESHOLD) {
        return Err(Error::invalid(format!(
            "ground state is not converged: eigen-residual {res:.3e} exceeds {RESIDUAL_THRESHOLD:e}"
        )));
    }
    let m = grid.axis(0).intervals;
    let n = m - 1;
    let h = grid.spacing(0);
    let ck = params.kinetic_coeff();
    let mut l = match disc {
        Discretization::Spectral => {
            let freqs: Vec<f64> = (1..m).map(|k| k as f64 * PI / grid.axis(0).length()).collect();
            let sines = DMatrix::from_fn(n, n, |j, k| (PI * ((j + 1) * (k + 1)) as f64 / m as f64).sin());
            let weighted = DMatrix::from_fn(n, n, |k, j| freqs[k] * freqs[k] * sines[(k, j)]);
            (&sines * weighted) * (2.0 * ck / m as f64)
        }
        Discretization::FiniteDifference => {
            let mut t = DMatrix::zeros(n, n);
            for i in 0..n {
                t[(i, i)] = 2.0 * ck / (h * h);
                if i + 1 < n {
                    t[(i, i + 1)] = -ck / (h * h);
                    t[(i + 1, i)] = -ck / (h * h);
                }
            }
            t
        }
    };
    let beta = params.beta;
    let mut coupling = DVector::zeros(n);
    for i in 0..n {
        let x = grid.axis(0).node(i + 1);
        let p = phi.values()[[i + 1]];
        let p2 = p.re * p.re - p.im * p.im;
        let rho = p.norm_sqr();
        l[(i, i)] += params.potential_at(&[x]) + 2.0 * beta * rho - mu;
        coupling[i] = beta * p2;
    }
    // Enforce exact symmetry of the dense kinetic block.
    let l = (&l + l.transpose()) * 0.5;
    Ok(BdgOperator {
        grid: grid.clone(),
        l,
        coupling,
    })
}

#[derive(Debug, Clone)]
pub struct BdgMode {
    pub omega: Complex64,
    pub u: ComplexField,
    pub v: ComplexField,
    /// `||u||^2 - ||v||^2 - 1` after normalization.
    pub norm_defect: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BdgSpectrum {
    /// Positive-norm modes sorted by `Re omega`.
    pub modes: Vec<BdgMode>,
    /// Frequencies identified as zero modes.
    pub zero_modes: Vec<f64>,
    /// Negative-norm partner frequencies `-omega`.
    pub partners: Vec<f64>,
    /// Purely imaginary frequencies (dynamical instabilities).
    pub unstable: Vec<Complex64>,
}

impl BdgSpectrum {
    pub fn frequencies(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.omega.re).collect()
    }

    /// CSV with columns `index,re_omega,im_omega,norm_defect`.
    pub fn mode_table(&self) -> String {
        let mut s = String::from("index,re_omega,im_omega,norm_defect\n");
        for (i, m) in self.modes.iter().enumerate() {
            s.push_str(&format!("{i},{:e},{:e},{:e}\n", m.omega.re, m.omega.im, m.norm_defect));
        }
        s
    }
}

fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    q * DMatrix::from_diagonal(&vals) * q.transpose()
}

fn to_field(grid: &Grid, interior: &DVector<f64>) -> Result<ComplexField> {
    let n = interior.len();
    let mut values = ArrayD::zeros(IxDyn(&[n + 2]));
    for i in 0..n {
        values[[i + 1]] = Complex64::new(interior[i], 0.0);
    }
    ComplexField::from_values(grid, values)
}

/// Zero-mode cut on `omega`: [`ZERO_MODE_TOL`] or `sqrt(n eps max|omega^2|)`,
/// whichever is larger. The reduced matrix resolves `omega^2` only to about
/// `eps` times its norm, and the square root magnifies that near zero.
pub fn zero_mode_cut(omega_sq: &[f64]) -> f64 {
    let scale = omega_sq.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (omega_sq.len() as f64 * f64::EPSILON * scale).sqrt();
    ZERO_MODE_TOL.max(floor)
}

/// Dense eigensolve of an assembled operator.
pub fn solve_bdg(op: &BdgOperator) -> Result<BdgSpectrum> {
    let n = op.l.nrows();
    let c = DMatrix::from_diagonal(&op.coupling);
    let a = &op.l - &c;
    let b = &op.l + &c;
    let b_half = psd_sqrt(&b);
    let m = &b_half * &a * &b_half;
    let m = (&m + m.transpose()) * 0.5;
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure {
            iteration: 0,
            reason: "non-finite entries in the reduced BdG matrix".into(),
        });
    }
    let eig = SymmetricEigen::new(m);
    let cut = zero_mode_cut(eig.eigenvalues.as_slice());
    let h = op.grid.spacing(0);
    let mut spec = BdgSpectrum::default();
    for k in 0..n {
        let w2 = eig.eigenvalues[k];
        if w2 < -cut * cut {
            spec.unstable.push(Complex64::new(0.0, (-w2).sqrt()));
            continue;
        }
        let omega = w2.max(0.0).sqrt();
        if omega < cut {
            spec.zero_modes.push(omega);
            continue;
        }
        let y = eig.eigenvectors.column(k).into_owned();
        let f = &b_half * y;
        let g = (&a * &f) / omega;
        let norm = h * f.dot(&g);
        if !(norm > 0.0) {
            spec.partners.push(-omega);
            continue;
        }
        let scale = 1.0 / norm.sqrt();
        let u = (&f + &g) * (0.5 * scale);
        let v = (&f - &g) * (0.5 * scale);
        let defect = h * (u.norm_squared() - v.norm_squared()) - 1.0;
        spec.partners.push(-omega);
        spec.modes.push(BdgMode {
            omega: Complex64::new(omega, 0.0),
            u: to_field(&op.grid, &u)?,
            v: to_field(&op.grid, &v)?,
            norm_defect: defect,
        });
    }
    spec.modes.sort_by(|p, q| p.omega.re.total_cmp(&q.omega.re));
    spec.partners.sort_by(|p, q| q.total_cmp(p));
    Ok(spec)
}

/// `max |[[L,-C],[C,-L]] (u,v) - omega (u,v)|` on interior nodes.
pub fn mode_residual(op: &BdgOperator, mode: &BdgMode) -> f64 {
    let n = op.l.nrows();
    let u = DVector::from_fn(n, |i, _| mode.u.values()[[i + 1]].re);
    let v = DVector::from_fn(n, |i, _| mode.v.values()[[i + 1]].re);
    let cu = op.coupling.component_mul(&u);
    let cv = op.coupling.component_mul(&v);
    let w = mode.omega.re;
    let r1 = &op.l * &u - cv - &u * w;
    let r2 = cu - &op.l * &v - &v * w;
    r1.amax().max(r2.amax())
}

/// Mode table entry used for serialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub index: usize,
    pub re_omega: f64,
    pub im_omega: f64,
    pub norm_defect: f64,
}

impl BdgSpectrum {
    pub fn summaries(&self) -> Vec<ModeSummary> {
        self.modes
            .iter()
            .enumerate()
            .map(|(index, m)| ModeSummary {
                index,
                re_omega: m.omega.re,
                im_omega: m.omega.im,
                norm_defect: m.norm_defect,
            })
            .collect()
    }
}
