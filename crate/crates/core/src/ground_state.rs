//! Ground states by gradient flow with discrete normalization.
//!
//! Each step solves the backward-Euler system
//! `(phi1 - phi_n)/tau = (eps^2/2) Lap phi1 - (V + beta |phi_n|^2) phi1 [+ Omega L_z phi_n]`
//! and projects `phi_{n+1} = phi1 / ||phi1||_h`. The default spatial
//! discretization is sine-spectral, with the linear system solved by
//! conjugate gradients preconditioned by the constant-coefficient part
//! (diagonal in sine space). Second-order finite differences are available:
//! a Thomas solve in 1D and per-axis tridiagonal sweeps in 2D/3D.

use ndarray::{ArrayD, Axis as NdAxis, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, ComplexField, Grid};
use crate::model::{ModelParams, PotentialKind};
use crate::observables::{EnergyBreakdown, GradientMode, Observer};
use crate::oracles::{linear_ground_state, tf_estimates};
use crate::spectral::{norm_of, SpectralSpace};
use crate::tridiag;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discretization {
    /// Sine-spectral Laplacian, preconditioned CG solve.
    #[default]
    Spectral,
    /// Centered second differences, tridiagonal solves.
    FiniteDifference,
}

impl Discretization {
    fn gradient_mode(self) -> GradientMode {
        match self {
            Discretization::Spectral => GradientMode::Spectral,
            Discretization::FiniteDifference => GradientMode::FiniteDifference,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// Gaussian for `beta <= 10`, smoothed Thomas–Fermi profile above.
    Auto,
    Gaussian,
    ThomasFermi,
    /// Base profile times `((x + i y)/r)^winding`, for rotating runs.
    Vortex {
        winding: i32,
    },
    Field(ComplexField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GfdnConfig {
    pub tau: f64,
    pub stop_tol: f64,
    pub max_iter: usize,
    pub initial: InitialGuess,
    pub discretization: Discretization,
    /// Keep the energy after every step in the result.
    pub record_energy: bool,
}

impl GfdnConfig {
    /// Default step `0.01` for `beta <= 100` and `0.001` above.
    pub fn for_beta(beta: f64) -> Self {
        Self {
            tau: default_tau(beta),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.stop_tol > 0.0) {
            return Err(Error::invalid(format!(
                "stop tolerance must be positive, got {}",
                self.stop_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

impl Default for GfdnConfig {
    fn default() -> Self {
        Self {
            tau: 0.01,
            stop_tol: 1e-6,
            max_iter: 200_000,
            initial: InitialGuess::Auto,
            discretization: Discretization::Spectral,
            record_energy: false,
        }
    }
}

pub fn default_tau(beta: f64) -> f64 {
    if beta <= 100.0 {
        0.01
    } else {
        0.001
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub phi: ComplexField,
    pub energy: EnergyBreakdown,
    pub e_g: f64,
    pub mu_g: f64,
    pub iterations: usize,
    /// Last `max_j |phi_{n+1} - phi_n| / tau`.
    pub residual: f64,
    /// `||mu phi - H phi||_h` in the solver's discretization.
    pub eigen_residual: f64,
    /// Energies after each step when requested.
    pub energy_trace: Vec<f64>,
}

impl GroundStateResult {
    pub fn virial_residual(&self) -> f64 {
        self.energy.virial_residual(self.phi.grid().dim())
    }
}

/// One gradient-flow stepper bound to a grid, model and time step.
#[derive(Debug, Clone)]
pub struct GradientFlow {
    grid: Grid,
    params: ModelParams,
    space: SpectralSpace,
    potential: ArrayD<f64>,
    tau: f64,
    disc: Discretization,
    keep_phase: bool,
}

impl GradientFlow {
    pub fn new(grid: &Grid, params: &ModelParams, tau: f64, disc: Discretization) -> Result<Self> {
        params.validate()?;
        params.check_grid(grid)?;
        if grid.is_periodic() {
            return Err(Error::invalid("ground states are computed on Dirichlet grids"));
        }
        if !(tau > 0.0) {
            return Err(Error::invalid("tau must be positive"));
        }
        if params.omega != 0.0 && grid.dim() < 2 {
            return Err(Error::UnsupportedDimension {
                operation: "rotating gradient flow",
                dim: grid.dim(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            params: params.clone(),
            space: SpectralSpace::new(grid),
            potential: params.potential_on(grid),
            tau,
            disc,
            keep_phase: params.omega != 0.0,
        })
    }

    /// Keep complex iterates instead of projecting onto `|phi|`.
    pub fn keep_phase(mut self, keep: bool) -> Self {
        self.keep_phase = keep;
        self
    }

    /// One normalized step.
    pub fn step(&self, phi: &ComplexField, iteration: usize) -> Result<ComplexField> {
        if phi.grid() != &self.grid {
            return Err(Error::invalid("field grid differs from gradient-flow grid"));
        }
        let inv_tau = 1.0 / self.tau;
        let w = Zip::from(&self.potential)
            .and(phi.values())
            .map_collect(|v, z| v + self.params.beta * z.norm_sqr());
        let mut rhs = phi.values().mapv(|z| z * inv_tau);
        if self.params.omega != 0.0 {
            let lz = apply_lz(&self.space, &self.grid, phi.values());
            Zip::from(&mut rhs)
                .and(&lz)
                .for_each(|r, l| *r += *l * self.params.omega);
            zero_boundary(&mut rhs, &self.grid);
        }
        let mut next = match self.disc {
            Discretization::Spectral => self.pcg(&rhs, &w, iteration)?,
            Discretization::FiniteDifference => self.sweeps(rhs, &w, iteration)?,
        };
        if !self.keep_phase {
            next.mapv_inplace(|z| C::new(z.norm(), 0.0));
        }
        let n = norm_of(&next, self.grid.cell_volume());
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NumericalFailure {
                iteration,
                reason: format!("projection norm is {n}"),
            });
        }
        next.mapv_inplace(|z| z / n);
        ComplexField::from_values(&self.grid, next)
    }

    fn apply_operator(&self, x: &ArrayD<C>, w: &ArrayD<f64>) -> ArrayD<C> {
        let ck = self.params.kinetic_coeff();
        let mut out = self.space.neg_laplacian(x);
        let inv_tau = 1.0 / self.tau;
        Zip::from(&mut out)
            .and(x)
            .and(w)
            .for_each(|o, xv, wv| *o = *o * ck + *xv * (inv_tau + wv));
        out
    }

    fn pcg(&self, b: &ArrayD<C>, w: &ArrayD<f64>, iteration: usize) -> Result<ArrayD<C>> {
        let ck = self.params.kinetic_coeff();
        let (wmin, wmax) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        });
        let shift = 1.0 / self.tau + 0.5 * (wmin + wmax);
        let precond = self.space.k_squared().mapv(|k2| 1.0 / (shift + ck * k2));
        let apply_p = |r: &ArrayD<C>| self.space.apply_real_symbol(r, &precond);

        let b_norm = dot(b, b).re.sqrt();
        if b_norm == 0.0 {
            return Ok(ArrayD::zeros(b.raw_dim()));
        }
        let tol = 1e-13 * b_norm;
        let mut x = apply_p(b);
        let mut r = b - &self.apply_operator(&x, w);
        let mut z = apply_p(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z).re;
        for _ in 0..500 {
            if dot(&r, &r).re.sqrt() <= tol {
                return Ok(x);
            }
            let ap = self.apply_operator(&p, w);
            let pap = dot(&p, &ap).re;
            if !(pap > 0.0) {
                return Err(Error::NumericalFailure {
                    iteration,
                    reason: format!("linear operator is not positive definite (p.Ap = {pap:e}); reduce tau"),
                });
            }
            let alpha = rz / pap;
            x.scaled_add(C::new(alpha, 0.0), &p);
            r.scaled_add(C::new(-alpha, 0.0), &ap);
            z = apply_p(&r);
            let rz_new = dot(&r, &z).re;
            let beta = rz_new / rz;
            rz = rz_new;
            Zip::from(&mut p).and(&z).for_each(|pv, zv| *pv = *zv + *pv * beta);
        }
        if dot(&r, &r).re.sqrt() <= 1e3 * tol {
            return Ok(x);
        }
        Err(Error::NumericalFailure {
            iteration,
            reason: "conjugate gradients did not converge in 500 iterations".into(),
        })
    }

    /// Finite-difference solve: one Thomas pass per axis, each carrying
    /// `W/d`; exact backward Euler in 1D.
    fn sweeps(&self, rhs: ArrayD<C>, w: &ArrayD<f64>, iteration: usize) -> Result<ArrayD<C>> {
        let d = self.grid.dim();
        let ck = self.params.kinetic_coeff();
        let mut cur = rhs.mapv(|z| z * self.tau);
        let mut lower = Vec::new();
        let mut diag = Vec::new();
        let mut upper = Vec::new();
        let mut work = Vec::new();
        let mut line = Vec::new();
        for axis in 0..d {
            let h = self.grid.spacing(axis);
            let off = -self.tau * ck / (h * h);
            let m = self.grid.axis(axis).intervals;
            let mut failed = None;
            Zip::from(cur.lanes_mut(NdAxis(axis)))
                .and(w.lanes(NdAxis(axis)))
                .for_each(|mut lane, wl| {
                    if failed.is_some() {
                        return;
                    }
                    // Lanes that lie on the boundary of another axis stay zero.
                    if lane.iter().all(|z| *z == C::new(0.0, 0.0)) {
                        return;
                    }
                    lower.clear();
                    diag.clear();
                    upper.clear();
                    line.clear();
                    for j in 1..m {
                        lower.push(off);
                        upper.push(off);
                        diag.push(1.0 - 2.0 * off + self.tau * wl[j] / d as f64);
                        line.push(lane[j]);
                    }
                    if let Err(i) = tridiag::solve_in_place(&lower, &diag, &upper, &mut line, &mut work) {
                        failed = Some(i);
                        return;
                    }
                    for j in 1..m {
                        lane[j] = line[j - 1];
                    }
                });
            if let Some(i) = failed {
                return Err(Error::NumericalFailure {
                    iteration,
                    reason: format!("zero pivot at row {i} of the tridiagonal solve"),
                });
            }
        }
        Ok(cur)
    }
}

fn dot(a: &ArrayD<C>, b: &ArrayD<C>) -> C {
    Zip::from(a)
        .and(b)
        .fold(C::new(0.0, 0.0), |acc, x, y| acc + x.conj() * y)
}

pub(crate) fn zero_boundary(values: &mut ArrayD<C>, grid: &Grid) {
    for k in 0..grid.dim() {
        let m = grid.axis(k).intervals;
        values.index_axis_mut(NdAxis(k), 0).fill(C::new(0.0, 0.0));
        values.index_axis_mut(NdAxis(k), m).fill(C::new(0.0, 0.0));
    }
}

/// `L_z psi = -i (x d_y psi - y d_x psi)` with spectral derivatives.
pub(crate) fn apply_lz(space: &SpectralSpace, grid: &Grid, psi: &ArrayD<C>) -> ArrayD<C> {
    let dx = space.derivative(psi, 0);
    let dy = space.derivative(psi, 1);
    let d = grid.dim();
    let mut out = ArrayD::zeros(psi.raw_dim());
    for (ix, o) in out.indexed_iter_mut() {
        let idx: Vec<usize> = (0..d).map(|k| ix[k]).collect();
        let x = grid.coords(&idx);
        *o = C::new(0.0, -1.0) * (dy[&ix] * x[0] - dx[&ix] * x[1]);
    }
    out
}

/// One normalized gradient-flow step with the default discretization.
pub fn gfdn_step(phi: &ComplexField, params: &ModelParams, tau: f64) -> Result<ComplexField> {
    GradientFlow::new(phi.grid(), params, tau, Discretization::Spectral)?.step(phi, 0)
}

fn check_existence(params: &ModelParams) -> Result<()> {
    if params.dipole.is_some() || params.spin_orbit.is_some() {
        return Err(Error::invalid(
            "ground states are computed for the single-component contact model only",
        ));
    }
    if params.beta < 0.0 {
        match params.dim {
            3 => {
                return Err(Error::Nonexistence(
                    "an attractive gas (beta < 0) in 3D has unbounded-below energy".into(),
                ))
            }
            2 => {
                return Err(Error::invalid(
                    "attractive interaction (beta < 0) in 2D is not supported; \
                     the energy is bounded below only under the critical mass",
                ))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Nonrotating ground state. The iterate is kept real and nonnegative.
pub fn solve_ground_state(params: &ModelParams, grid: &Grid, config: &GfdnConfig) -> Result<GroundStateResult> {
    if params.omega != 0.0 {
        return Err(Error::invalid("omega is nonzero; use the rotating ground-state solver"));
    }
    check_existence(params)?;
    config.validate()?;
    let flow = GradientFlow::new(grid, params, config.tau, config.discretization)?.keep_phase(false);
    let init = initial_field(params, grid, &config.initial)?.map(|_, z| C::new(z.norm(), 0.0));
    iterate(&flow, params, init, config)
}

/// Ground state in a frame rotating at `omega` (`|omega| < 1`, `d >= 2`).
pub fn solve_ground_state_rotating(
    params: &ModelParams,
    grid: &Grid,
    config: &GfdnConfig,
) -> Result<GroundStateResult> {
    if params.dim < 2 {
        return Err(Error::UnsupportedDimension {
            operation: "rotating ground state",
            dim: params.dim,
        });
    }
    if params.omega.abs() >= 1.0 {
        return Err(Error::Nonexistence(format!(
            "rotation speed |omega| = {} is not below the trap frequency 1",
            params.omega.abs()
        )));
    }
    if params.beta < 0.0 {
        return Err(Error::invalid("the rotating solver requires beta >= 0"));
    }
    check_existence(params)?;
    config.validate()?;
    let flow = GradientFlow::new(grid, params, config.tau, config.discretization)?.keep_phase(true);
    let init = initial_field(params, grid, &config.initial)?;
    iterate(&flow, params, init, config)
}

fn iterate(
    flow: &GradientFlow,
    params: &ModelParams,
    init: ComplexField,
    config: &GfdnConfig,
) -> Result<GroundStateResult> {
    let grid = init.grid().clone();
    let observer = Observer::new(&grid, params)?.with_gradient_mode(config.discretization.gradient_mode());
    let mut phi = crate::spectral::normalize(&init)?;
    let mut trace = Vec::new();
    if config.record_energy {
        trace.push(observer.energy(&phi)?.total);
    }
    let mut residual = f64::INFINITY;
    for it in 1..=config.max_iter {
        let next = flow.step(&phi, it)?;
        residual = next.max_abs_diff(&phi) / config.tau;
        if !residual.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: it,
                reason: "non-finite iterate".into(),
            });
        }
        phi = next;
        if config.record_energy {
            trace.push(observer.energy(&phi)?.total);
        }
        if it % 1000 == 0 {
            log::debug!("gradient flow iteration {it}: residual {residual:.3e}");
        }
        if residual <= config.stop_tol {
            let energy = observer.energy(&phi)?;
            let mu = crate::observables::mu_from_energy(&energy);
            let eigen_residual = eigen_residual_with(&phi, mu, params, config.discretization)?;
            return Ok(GroundStateResult {
                phi,
                e_g: energy.total,
                mu_g: mu,
                energy,
                iterations: it,
                residual,
                eigen_residual,
                energy_trace: trace,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: config.max_iter,
        residual,
    })
}

/// `||mu phi - [-(eps^2/2) Lap + V + beta |phi|^2 - Omega L_z] phi||_h`.
pub fn eigen_residual(phi: &ComplexField, mu: f64, params: &ModelParams) -> Result<f64> {
    eigen_residual_with(phi, mu, params, Discretization::Spectral)
}

pub fn eigen_residual_with(phi: &ComplexField, mu: f64, params: &ModelParams, disc: Discretization) -> Result<f64> {
    let grid = phi.grid();
    params.check_grid(grid)?;
    let hphi = apply_hamiltonian(phi, params, disc)?;
    let r = Zip::from(&hphi).and(phi.values()).map_collect(|hv, pv| *pv * mu - *hv);
    Ok(norm_of(&r, grid.cell_volume()))
}

pub(crate) fn apply_hamiltonian(phi: &ComplexField, params: &ModelParams, disc: Discretization) -> Result<ArrayD<C>> {
    let grid = phi.grid();
    let space = SpectralSpace::new(grid);
    let ck = params.kinetic_coeff();
    let mut out = match disc {
        Discretization::Spectral => space.neg_laplacian(phi.values()),
        Discretization::FiniteDifference => fd_neg_laplacian(phi.values(), grid),
    };
    let v = params.potential_on(grid);
    Zip::from(&mut out)
        .and(phi.values())
        .and(&v)
        .for_each(|o, p, vv| *o = *o * ck + *p * (vv + params.beta * p.norm_sqr()));
    if params.omega != 0.0 {
        let lz = apply_lz(&space, grid, phi.values());
        out.scaled_add(C::new(-params.omega, 0.0), &lz);
    }
    zero_boundary(&mut out, grid);
    Ok(out)
}

pub(crate) fn fd_neg_laplacian(values: &ArrayD<C>, grid: &Grid) -> ArrayD<C> {
    let mut out = ArrayD::zeros(values.raw_dim());
    for k in 0..grid.dim() {
        let h2 = grid.spacing(k).powi(2);
        let n = values.shape()[k];
        Zip::from(values.lanes(NdAxis(k)))
            .and(out.lanes_mut(NdAxis(k)))
            .for_each(|src, mut dst| {
                for j in 1..n - 1 {
                    dst[j] += (src[j] * 2.0 - src[j - 1] - src[j + 1]) / h2;
                }
            });
    }
    out
}

/// Thomas–Fermi profile `sqrt((mu_TF - V)_+ / beta)` with the closed-form
/// `mu_TF` and `E_TF = mu_TF - E_int(phi_TF)`.
pub fn tf_ground_state(params: &ModelParams, grid: &Grid) -> Result<(ComplexField, f64, f64)> {
    params.check_grid(grid)?;
    if params.potential != PotentialKind::Harmonic {
        return Err(Error::invalid("Thomas-Fermi profile needs a harmonic trap"));
    }
    let tf = tf_estimates(params.beta, &params.trap, params.dim)?;
    let beta = params.beta;
    let phi = ComplexField::from_real_fn(grid, |x| {
        let v = params.potential_at(x);
        ((tf.mu - v).max(0.0) / beta).sqrt()
    });
    let h = grid.cell_volume();
    let e_int = 0.5 * beta * h * phi.values().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>();
    Ok((phi, tf.mu, tf.mu - e_int))
}

/// Half-width `L = max(8, 1.5 R_TF)` per axis, `R_TF = sqrt(2 mu_TF)/gamma`.
pub fn domain_half_widths(params: &ModelParams) -> Vec<f64> {
    let gammas = params.trap.gammas();
    let mu = if params.beta > 0.0 && params.potential == PotentialKind::Harmonic {
        tf_estimates(params.beta, &params.trap, params.dim).map(|t| t.mu).ok()
    } else {
        None
    };
    (0..params.dim)
        .map(|k| match mu {
            Some(mu) => (1.5 * (2.0 * mu).sqrt() / gammas[k]).max(8.0),
            None => 8.0,
        })
        .collect()
}

/// Symmetric grid `[-L, L]` per axis from [`domain_half_widths`].
pub fn default_grid(params: &ModelParams, intervals: usize) -> Result<Grid> {
    let axes = domain_half_widths(params)
        .into_iter()
        .map(|l| Axis::new(-l, l, intervals))
        .collect::<Result<Vec<_>>>()?;
    Grid::new(axes)
}

/// Builds the starting field for the flow.
pub fn initial_field(params: &ModelParams, grid: &Grid, guess: &InitialGuess) -> Result<ComplexField> {
    params.check_grid(grid)?;
    let base = |use_tf: bool| -> Result<ComplexField> {
        if use_tf && params.beta > 0.0 && params.potential == PotentialKind::Harmonic {
            let (phi, _, _) = tf_ground_state(params, grid)?;
            Ok(smooth(&phi))
        } else {
            let lin = linear_ground_state(params.dim, &params.trap, params.epsilon);
            Ok(ComplexField::from_real_fn(grid, |x| lin.eval(x)))
        }
    };
    let field = match guess {
        InitialGuess::Auto => base(params.beta > 10.0)?,
        InitialGuess::Gaussian => base(false)?,
        InitialGuess::ThomasFermi => base(true)?,
        InitialGuess::Vortex { winding } => {
            if grid.dim() < 2 {
                return Err(Error::UnsupportedDimension {
                    operation: "vortex seeding",
                    dim: grid.dim(),
                });
            }
            let n = *winding;
            base(params.beta > 10.0)?.map(|x, z| {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                if r == 0.0 {
                    C::new(0.0, 0.0)
                } else {
                    let theta = x[1].atan2(x[0]);
                    // Profile r^|n| near the core keeps the seed smooth.
                    let core = (r * r / (1.0 + r * r)).powf(0.5 * n.unsigned_abs() as f64);
                    z * C::from_polar(core, n as f64 * theta)
                }
            })
        }
        InitialGuess::Field(f) => {
            if f.grid() != grid {
                return Err(Error::invalid("initial field lives on a different grid"));
            }
            f.clone()
        }
    };
    crate::spectral::normalize(&field)
}

/// One pass of the `[1/4, 1/2, 1/4]` filter along every axis (interior only).
fn smooth(field: &ComplexField) -> ComplexField {
    let mut v = field.values().clone();
    for k in 0..field.grid().dim() {
        let src = v.clone();
        let n = v.shape()[k];
        Zip::from(src.lanes(NdAxis(k)))
            .and(v.lanes_mut(NdAxis(k)))
            .for_each(|s, mut d| {
                for j in 1..n - 1 {
                    d[j] = s[j - 1] * 0.25 + s[j] * 0.5 + s[j + 1] * 0.25;
                }
            });
    }
    ComplexField::from_values(field.grid(), v).expect("filter keeps Dirichlet boundary")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonexistent_cases() {
        let g = Grid::uniform(3, -4.0, 4.0, 8).unwrap();
        let p = ModelParams::new(3, -1.0).unwrap();
        assert!(matches!(
            solve_ground_state(&p, &g, &GfdnConfig::default()),
            Err(Error::Nonexistence(_))
        ));
        let g2 = Grid::uniform(2, -4.0, 4.0, 8).unwrap();
        let p = ModelParams::new(2, 1.0).unwrap().with_omega(1.2);
        assert!(matches!(
            solve_ground_state_rotating(&p, &g2, &GfdnConfig::default()),
            Err(Error::Nonexistence(_))
        ));
    }

    #[test]
    fn domain_rule() {
        let p = ModelParams::new(1, 400.0).unwrap();
        let l = domain_half_widths(&p)[0];
        let mu = 0.5 * 600f64.powf(2.0 / 3.0);
        assert!((l - 1.5 * (2.0 * mu).sqrt()).abs() < 1e-12);
        assert_eq!(domain_half_widths(&ModelParams::new(2, 0.0).unwrap()), vec![8.0, 8.0]);
    }

    #[test]
    fn smoothing_preserves_boundary_zero() {
        let g = Grid::uniform(1, -3.0, 3.0, 16).unwrap();
        let f = ComplexField::from_real_fn(&g, |_| 1.0);
        let s = smooth(&f);
        assert_eq!(s.values()[[0]], C::new(0.0, 0.0));
        assert!((s.values()[[1]].re - 0.75).abs() < 1e-15);
    }
}
