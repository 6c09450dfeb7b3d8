//! Real-time propagation by Strang time splitting.
//!
//! A step is a half kinetic step (exact in spectral space), a full pointwise
//! phase step (exact because `|psi|` is invariant there) and another half
//! kinetic step. The same structure covers the rotating equation in rotating
//! Lagrangian coordinates, the dipolar equation and the spin-orbit-coupled
//! two-component system.

use ndarray::{ArrayD, IxDyn, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dipolar::DipolarSolver;
use crate::error::{Error, Result};
use crate::grid::{Axis, ComplexField, ComplexFieldPair, Grid};
use crate::model::{rotation_matrix, ModelParams, PotentialKind, SpinOrbitParams};
use crate::observables::{self, cgpe_energy, mass, ObservableRecord, Observer};
use crate::spectral::{SineInterpolant, SpectralSpace};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    Gpe,
    GpeRotating,
    GpeDipolar,
    CgpeSpinorbit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub tau: f64,
    pub t_final: f64,
    /// Record observables every `stride` steps (and at the last step).
    pub stride: usize,
    pub scheme: Scheme,
    /// Keep a field snapshot every this many steps.
    pub snapshot_stride: Option<usize>,
    /// Abort when the mass moves further than this from its initial value.
    pub mass_tol: f64,
    /// Abort when more than this share of the mass sits in the top 20% of
    /// wavenumbers at a record time. The splitting conserves mass exactly, so
    /// this is what catches collapse onto the grid scale.
    pub resolution_tol: f64,
}

impl EvolveConfig {
    pub fn new(tau: f64, t_final: f64, stride: usize) -> Self {
        Self {
            tau,
            t_final,
            stride,
            scheme: Scheme::Gpe,
            snapshot_stride: None,
            mass_tol: 1e-8,
            resolution_tol: 1e-2,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::invalid(format!(
                "final time must be nonnegative, got {}",
                self.t_final
            )));
        }
        if self.stride == 0 {
            return Err(Error::invalid("record stride must be at least 1"));
        }
        if !(self.resolution_tol > 0.0) {
            return Err(Error::invalid("resolution tolerance must be positive"));
        }
        if self.snapshot_stride == Some(0) {
            return Err(Error::invalid("snapshot stride must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps `round(T / tau)`.
    pub fn steps(&self) -> usize {
        (self.t_final / self.tau).round() as usize
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<ObservableRecord>,
    pub snapshots: Vec<(f64, ComplexField)>,
    pub final_field: ComplexField,
    pub final_time: f64,
    /// `max |E(t) - E(0)| / |E(0)|` over the recorded times.
    pub energy_drift: f64,
}

/// Unified single-component splitting stepper on a sine or Fourier grid.
#[derive(Debug, Clone)]
pub struct Tssp {
    grid: Grid,
    params: ModelParams,
    space: SpectralSpace,
    potential: ArrayD<f64>,
    dipolar: Option<DipolarSolver>,
    cached: Option<(f64, ArrayD<C>)>,
}

impl Tssp {
    pub fn new(grid: &Grid, params: &ModelParams) -> Result<Self> {
        params.validate()?;
        params.check_grid(grid)?;
        Ok(Self {
            grid: grid.clone(),
            params: params.clone(),
            space: SpectralSpace::new(grid),
            potential: params.potential_on(grid),
            dipolar: None,
            cached: None,
        })
    }

    /// Adds the nonlocal term; contact coupling comes from the solver.
    pub fn with_dipolar(mut self, solver: DipolarSolver) -> Result<Self> {
        if solver.grid() != &self.grid {
            return Err(Error::invalid("dipolar solver grid differs from stepper grid"));
        }
        self.dipolar = Some(solver);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dipolar(&self) -> Option<&DipolarSolver> {
        self.dipolar.as_ref()
    }

    /// `exp(-i (tau/2) (eps/2) |k|^2)`, cached for the last `tau` used.
    fn half_kinetic(&mut self, tau: f64) -> ArrayD<C> {
        if let Some((t, m)) = &self.cached {
            if *t == tau {
                return m.clone();
            }
        }
        let e = self.params.epsilon;
        let m = self.space.k_squared().mapv(|k2| unit_phase(-0.25 * tau * e * k2));
        self.cached = Some((tau, m.clone()));
        m
    }

    fn kinetic(&mut self, values: &ArrayD<C>, tau: f64) -> ArrayD<C> {
        let mult = self.half_kinetic(tau);
        self.space.apply_symbol(values, &mult)
    }

    pub fn step(&mut self, psi: &ComplexField, tau: f64) -> Result<ComplexField> {
        let pot = std::mem::take(&mut self.potential);
        let out = self.step_with_potential(psi, tau, &pot);
        self.potential = pot;
        out
    }

    /// Step with an explicit external potential array (time-dependent traps).
    pub fn step_with_potential(
        &mut self,
        psi: &ComplexField,
        tau: f64,
        potential: &ArrayD<f64>,
    ) -> Result<ComplexField> {
        if psi.grid() != &self.grid {
            return Err(Error::invalid("field grid differs from stepper grid"));
        }
        let mut v = self.kinetic(psi.values(), tau);
        let rho = v.mapv(|z| z.norm_sqr());
        let beta = self
            .dipolar
            .as_ref()
            .map_or(self.params.beta, DipolarSolver::contact_beta);
        let scale = tau / self.params.epsilon;
        match &self.dipolar {
            Some(solver) => {
                let nonlocal = solver.nonlocal_potential(&rho);
                Zip::from(&mut v)
                    .and(&rho)
                    .and(potential)
                    .and(&nonlocal)
                    .for_each(|z, r, w, p| *z *= C::from_polar(1.0, -scale * (w + beta * r + p)));
            }
            None => {
                Zip::from(&mut v)
                    .and(&rho)
                    .and(potential)
                    .for_each(|z, r, w| *z *= C::from_polar(1.0, -scale * (w + beta * r)));
            }
        }
        let out = self.kinetic(&v, tau);
        ComplexField::from_values(&self.grid, out)
    }
}

/// `exp(i theta)` with the `(cos, sin)` pair nudged by a few ulps so that
/// `cos^2 + sin^2 - 1` is as small as representable. Multipliers that are
/// reused every step would otherwise bias the mass by about one ulp per
/// application.
fn unit_phase(theta: f64) -> C {
    let (s0, c0) = theta.sin_cos();
    let mut best = (c0, s0, unit_defect(c0, s0).abs());
    for i in -3..=3i64 {
        for j in -3..=3i64 {
            let c = nudge(c0, i);
            let s = nudge(s0, j);
            let e = unit_defect(c, s).abs();
            if e < best.2 {
                best = (c, s, e);
            }
        }
    }
    C::new(best.0, best.1)
}

fn nudge(x: f64, ulps: i64) -> f64 {
    let mut y = x;
    for _ in 0..ulps.unsigned_abs() {
        y = if ulps > 0 { y.next_up() } else { y.next_down() };
    }
    y
}

/// `c^2 + s^2 - 1` from exact two-products; the leading sum is exact by
/// Sterbenz' lemma on the unit circle.
fn unit_defect(c: f64, s: f64) -> f64 {
    let (a, b) = if c.abs() >= s.abs() { (c, s) } else { (s, c) };
    let pa = a * a;
    let ea = a.mul_add(a, -pa);
    let pb = b * b;
    let eb = b.mul_add(b, -pb);
    ((pa - 1.0) + pb) + (ea + eb)
}

/// Convenience single step.
pub fn tssp_step(psi: &ComplexField, params: &ModelParams, tau: f64) -> Result<ComplexField> {
    Tssp::new(psi.grid(), params)?.step(psi, tau)
}

/// Stepper for the rotating equation in rotating Lagrangian coordinates
/// `x = A(t) x~`, where the rotation term disappears and the trap becomes
/// `W(x~, t) = V(A(t) x~)`.
#[derive(Debug, Clone)]
pub struct RotatingTssp {
    inner: Tssp,
    omega: f64,
    symmetric: bool,
}

impl RotatingTssp {
    pub fn new(grid: &Grid, params: &ModelParams) -> Result<Self> {
        if params.dim < 2 {
            return Err(Error::UnsupportedDimension {
                operation: "rotating dynamics",
                dim: params.dim,
            });
        }
        let omega = params.omega;
        let mut inner_params = params.clone();
        inner_params.omega = 0.0;
        Ok(Self {
            inner: Tssp::new(grid, &inner_params)?,
            omega,
            symmetric: params.trap.gamma_y == 1.0 || params.potential == PotentialKind::Free,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `W(x~, t)` sampled on the grid.
    pub fn potential_at(&self, t: f64) -> Result<ArrayD<f64>> {
        let grid = self.inner.grid();
        let params = self.inner.params();
        if self.symmetric || self.omega == 0.0 {
            return Ok(params.potential_on(grid));
        }
        let a = rotation_matrix(t, self.omega, grid.dim())?;
        let d = grid.dim();
        Ok(grid.sample_real(|x| {
            let v = nalgebra::Vector3::new(x[0], x[1], if d == 3 { x[2] } else { 0.0 });
            let y = a * v;
            params.potential_at(&y.as_slice()[..d])
        }))
    }

    /// Advances from `t_n` to `t_n + tau` with `W` frozen at the midpoint.
    /// Radially symmetric traps reuse the plain stepper unchanged.
    pub fn step(&mut self, phi: &ComplexField, t_n: f64, tau: f64) -> Result<ComplexField> {
        if self.symmetric || self.omega == 0.0 {
            return self.inner.step(phi, tau);
        }
        let w = self.potential_at(t_n + 0.5 * tau)?;
        self.inner.step_with_potential(phi, tau, &w)
    }

    /// Observables of the laboratory-frame field `psi(x, t) = phi(A(t)^T x, t)`
    /// computed from moments of the Lagrangian field.
    pub fn eulerian_record(&self, phi: &ComplexField, t: f64) -> Result<ObservableRecord> {
        let grid = self.inner.grid();
        let mut params = self.inner.params().clone();
        params.omega = self.omega;
        let observer = Observer::new(grid, &params)?.with_potential(self.potential_at(t)?);
        let mut rec = observer.record(t, phi)?;
        let (s, c) = (self.omega * t).sin_cos();
        let cx = rec.center.clone();
        rec.center[0] = c * cx[0] + s * cx[1];
        rec.center[1] = -s * cx[0] + c * cx[1];
        let w = rec.widths.clone();
        let xy = cross_moment(phi);
        rec.widths[0] = c * c * w[0] + s * s * w[1] + 2.0 * c * s * xy;
        rec.widths[1] = s * s * w[0] + c * c * w[1] - 2.0 * c * s * xy;
        Ok(rec)
    }
}

fn cross_moment(psi: &ComplexField) -> f64 {
    let g = psi.grid();
    let d = g.dim();
    let mut acc = 0.0;
    for (ix, v) in psi.values().indexed_iter() {
        let idx: Vec<usize> = (0..d).map(|k| ix[k]).collect();
        let x = g.coords(&idx);
        acc += x[0] * x[1] * v.norm_sqr();
    }
    acc * g.cell_volume()
}

pub fn tssp_step_rotating(phi: &ComplexField, params: &ModelParams, t_n: f64, tau: f64) -> Result<ComplexField> {
    RotatingTssp::new(phi.grid(), params)?.step(phi, t_n, tau)
}

/// Laboratory-frame field `psi(x, t) = phi(A(t)^T x, t)` by sine-series
/// interpolation of each `z = const` plane; zero outside the box.
pub fn to_eulerian(phi: &ComplexField, t: f64, omega: f64) -> Result<ComplexField> {
    let grid = phi.grid();
    if grid.dim() < 2 {
        return Err(Error::UnsupportedDimension {
            operation: "frame rotation",
            dim: grid.dim(),
        });
    }
    if grid.is_periodic() {
        return Err(Error::invalid("frame rotation needs a Dirichlet grid"));
    }
    let (s, c) = (omega * t).sin_cos();
    let plane_grid = Grid::new(grid.axes()[..2].to_vec())?;
    let planes = if grid.dim() == 3 { grid.shape()[2] } else { 1 };
    let mut out = ArrayD::zeros(IxDyn(&grid.shape()));
    for p in 0..planes {
        let plane_vals = match grid.dim() {
            2 => phi.values().clone(),
            _ => phi.values().index_axis(ndarray::Axis(2), p).to_owned().into_dyn(),
        };
        if plane_vals.iter().all(|z| *z == C::new(0.0, 0.0)) {
            continue;
        }
        let plane = ComplexField::from_values(&plane_grid, plane_vals)?;
        let interp = SineInterpolant::new(&plane)?;
        let mapped = ComplexField::from_fn(&plane_grid, |x| {
            // x~ = A^T x
            let xt = [c * x[0] - s * x[1], s * x[0] + c * x[1]];
            interp.eval(&xt)
        });
        match grid.dim() {
            2 => out.assign(mapped.values()),
            _ => out.index_axis_mut(ndarray::Axis(2), p).assign(
                &mapped
                    .values()
                    .view()
                    .into_dimensionality::<ndarray::Ix2>()
                    .expect("2D plane"),
            ),
        }
    }
    ComplexField::from_values(grid, out)
}

enum Stepper {
    Plain(Tssp),
    Rotating(RotatingTssp),
}

/// Runs a single-component scheme and records observables every `stride`
/// steps.
pub fn evolve(psi0: &ComplexField, params: &ModelParams, config: &EvolveConfig) -> Result<Trajectory> {
    config.validate()?;
    let grid = psi0.grid();
    let mut stepper = match config.scheme {
        Scheme::Gpe => {
            if params.omega != 0.0 {
                return Err(Error::invalid("omega is nonzero; use the rotating scheme"));
            }
            Stepper::Plain(Tssp::new(grid, params)?)
        }
        Scheme::GpeRotating => Stepper::Rotating(RotatingTssp::new(grid, params)?),
        Scheme::GpeDipolar => {
            let dip = params
                .dipole
                .ok_or_else(|| Error::invalid("dipolar scheme needs dipole parameters"))?;
            let solver = DipolarSolver::new(grid, &dip, params.beta, params.trap.gamma_z)?;
            Stepper::Plain(Tssp::new(grid, params)?.with_dipolar(solver)?)
        }
        Scheme::CgpeSpinorbit => return Err(Error::invalid("two-component dynamics run through evolve_cgpe")),
    };
    let observer = match &stepper {
        Stepper::Plain(t) => {
            let o = Observer::new(grid, params)?;
            match t.dipolar() {
                Some(s) => Some(o.with_dipolar(s.clone())),
                None => Some(o),
            }
        }
        Stepper::Rotating(_) => None,
    };
    let record = |stepper: &Stepper, psi: &ComplexField, t: f64| -> Result<ObservableRecord> {
        match (stepper, &observer) {
            (Stepper::Rotating(r), _) => r.eulerian_record(psi, t),
            (_, Some(o)) => o.record(t, psi),
            (_, None) => unreachable!("plain stepper always has an observer"),
        }
    };

    let space = SpectralSpace::new(grid);
    let n = config.steps();
    let tau = config.tau;
    let mut psi = psi0.clone();
    let mass0 = mass(&psi);
    let mut records = vec![record(&stepper, &psi, 0.0)?];
    let mut snapshots = Vec::new();
    if config.snapshot_stride.is_some() {
        snapshots.push((0.0, psi.clone()));
    }
    for step in 1..=n {
        let t_prev = (step - 1) as f64 * tau;
        psi = match &mut stepper {
            Stepper::Plain(s) => s.step(&psi, tau)?,
            Stepper::Rotating(r) => r.step(&psi, t_prev, tau)?,
        };
        let t = step as f64 * tau;
        check_health(&psi, mass0, config.mass_tol, t)?;
        if step % config.stride == 0 || step == n {
            check_resolution(&space, &psi, config.resolution_tol, t)?;
            records.push(record(&stepper, &psi, t)?);
            log::info!("t = {t:.4}: mass {:.15}", records.last().map_or(0.0, |r| r.mass));
        }
        if let Some(k) = config.snapshot_stride {
            if step % k == 0 || step == n {
                snapshots.push((t, psi.clone()));
            }
        }
    }
    let energy_drift = drift(&records);
    Ok(Trajectory {
        records,
        snapshots,
        final_field: psi,
        final_time: n as f64 * tau,
        energy_drift,
    })
}

fn check_health(psi: &ComplexField, mass0: f64, tol: f64, t: f64) -> Result<()> {
    if !psi.is_finite() {
        return Err(Error::BlowUp {
            time: t,
            reason: "non-finite values in the wave function".into(),
        });
    }
    let m = mass(psi);
    if (m - mass0).abs() > tol * mass0.max(1e-300) {
        return Err(Error::BlowUp {
            time: t,
            reason: format!("mass moved from {mass0} to {m}; the grid is under-resolved or the solution blows up"),
        });
    }
    Ok(())
}

/// Fraction of spectral mass above this share of the largest wavenumber
/// counts as unresolved.
const TAIL_CUTOFF: f64 = 0.8;

fn check_resolution(space: &SpectralSpace, psi: &ComplexField, tol: f64, t: f64) -> Result<()> {
    let tail = space.tail_fraction(psi.values(), TAIL_CUTOFF);
    if tail > tol {
        return Err(Error::BlowUp {
            time: t,
            reason: format!(
                "{tail:.2e} of the mass sits in the highest wavenumbers; \
                 the solution has outgrown the grid (collapse or under-resolution)"
            ),
        });
    }
    Ok(())
}

fn drift(records: &[ObservableRecord]) -> f64 {
    let e0 = records.first().map_or(0.0, |r| r.energy.total);
    let scale = if e0 == 0.0 { 1.0 } else { e0.abs() };
    records
        .iter()
        .map(|r| (r.energy.total - e0).abs() / scale)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CgpeForm {
    /// Spin-orbit gradient in the kinetic symbol, uniform Rabi mixing.
    #[default]
    Original,
    /// Gauge-transformed components; plain kinetic symbol and coupling
    /// phases `exp(-+2 i k0 x)`.
    PhaseTransformed,
}

/// Two-component spin-orbit stepper on a periodic grid.
#[derive(Debug, Clone)]
pub struct CgpeTssp {
    grid: Grid,
    params: ModelParams,
    so: SpinOrbitParams,
    form: CgpeForm,
    space: SpectralSpace,
    potential: ArrayD<f64>,
    coupling_phase: ArrayD<C>,
    cached: Option<(f64, ArrayD<C>, ArrayD<C>)>,
}

impl CgpeTssp {
    pub fn new(grid: &Grid, params: &ModelParams, form: CgpeForm) -> Result<Self> {
        params.validate()?;
        params.check_grid(grid)?;
        if !grid.is_periodic() {
            return Err(Error::invalid(
                "the spin-orbit stepper needs a periodic grid (see Grid::padded_periodic)",
            ));
        }
        let so = params
            .spin_orbit
            .ok_or_else(|| Error::invalid("spin-orbit parameters are required"))?;
        let k0 = so.k0;
        Ok(Self {
            grid: grid.clone(),
            params: params.clone(),
            so,
            form,
            space: SpectralSpace::new(grid),
            potential: params.potential_on(grid),
            coupling_phase: grid.sample_real(|x| x[0]).mapv(|x| unit_phase(-2.0 * k0 * x)),
            cached: None,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn multipliers(&mut self, tau: f64) -> (ArrayD<C>, ArrayD<C>) {
        if let Some((t, a, b)) = &self.cached {
            if *t == tau {
                return (a.clone(), b.clone());
            }
        }
        let ck = self.params.kinetic_coeff();
        let k0 = match self.form {
            CgpeForm::Original => self.so.k0,
            CgpeForm::PhaseTransformed => 0.0,
        };
        let kx = self.space.wavenumbers(0).to_vec();
        let k2 = self.space.k_squared();
        let m1 = ArrayD::from_shape_fn(k2.raw_dim(), |ix| {
            unit_phase(-0.5 * tau * (ck * k2[&ix] - k0 * kx[ix[0]]))
        });
        let m2 = ArrayD::from_shape_fn(k2.raw_dim(), |ix| {
            unit_phase(-0.5 * tau * (ck * k2[&ix] + k0 * kx[ix[0]]))
        });
        self.cached = Some((tau, m1.clone(), m2.clone()));
        (m1, m2)
    }

    fn phase_half(&self, p1: &mut ArrayD<C>, p2: &mut ArrayD<C>, tau: f64) {
        let so = &self.so;
        let (d1, d2) = match self.form {
            CgpeForm::Original => (0.5 * so.delta, -0.5 * so.delta),
            CgpeForm::PhaseTransformed => (so.delta, 0.0),
        };
        let h = 0.5 * tau;
        Zip::from(p1).and(p2).and(&self.potential).for_each(|a, b, v| {
            let (r1, r2) = (a.norm_sqr(), b.norm_sqr());
            let e1 = v + d1 + so.beta11 * r1 + so.beta12 * r2;
            let e2 = v + d2 + so.beta12 * r1 + so.beta22 * r2;
            *a *= C::from_polar(1.0, -h * e1);
            *b *= C::from_polar(1.0, -h * e2);
        });
    }

    /// Exact `exp(-i tau (Omega/2) M)` with `M^2 = I`.
    fn rabi(&self, p1: &mut ArrayD<C>, p2: &mut ArrayD<C>, tau: f64) {
        if self.so.rabi == 0.0 {
            return;
        }
        let u = unit_phase(0.5 * self.so.rabi * tau);
        let (s, c) = (u.im, u.re);
        let mis = C::new(0.0, -s);
        match self.form {
            CgpeForm::Original => Zip::from(p1).and(p2).for_each(|a, b| {
                let (x, y) = (*a, *b);
                *a = x * c + mis * y;
                *b = mis * x + y * c;
            }),
            CgpeForm::PhaseTransformed => Zip::from(p1).and(p2).and(&self.coupling_phase).for_each(|a, b, e| {
                let (x, y) = (*a, *b);
                *a = x * c + mis * e * y;
                *b = mis * e.conj() * x + y * c;
            }),
        }
    }

    pub fn step(&mut self, pair: &ComplexFieldPair, tau: f64) -> Result<ComplexFieldPair> {
        if pair.grid() != &self.grid {
            return Err(Error::invalid("field pair grid differs from stepper grid"));
        }
        let (m1, m2) = self.multipliers(tau);
        let mut p1 = self.space.apply_symbol(pair.first.values(), &m1);
        let mut p2 = self.space.apply_symbol(pair.second.values(), &m2);
        self.phase_half(&mut p1, &mut p2, tau);
        self.rabi(&mut p1, &mut p2, tau);
        self.phase_half(&mut p1, &mut p2, tau);
        let p1 = self.space.apply_symbol(&p1, &m1);
        let p2 = self.space.apply_symbol(&p2, &m2);
        ComplexFieldPair::new(
            ComplexField::from_values(&self.grid, p1)?,
            ComplexField::from_values(&self.grid, p2)?,
        )
    }
}

pub fn tssp_step_cgpe(pair: &ComplexFieldPair, params: &ModelParams, tau: f64) -> Result<ComplexFieldPair> {
    CgpeTssp::new(pair.grid(), params, CgpeForm::Original)?.step(pair, tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformDirection {
    /// Original components to gauge-transformed ones.
    Forward,
    Inverse,
}

/// Gauge map `phi_1 = psi_1 e^{-i(w t + k0 x)}`, `phi_2 = psi_2 e^{-i(w t - k0 x)}`
/// with `w = (delta + k0^2)/2`.
pub fn cgpe_phase_transform(
    pair: &ComplexFieldPair,
    direction: TransformDirection,
    so: &SpinOrbitParams,
    t: f64,
) -> Result<ComplexFieldPair> {
    let w = 0.5 * (so.delta + so.k0 * so.k0);
    let sign = match direction {
        TransformDirection::Forward => -1.0,
        TransformDirection::Inverse => 1.0,
    };
    let first = pair
        .first
        .map(|x, z| z * C::from_polar(1.0, sign * (w * t + so.k0 * x[0])));
    let second = pair
        .second
        .map(|x, z| z * C::from_polar(1.0, sign * (w * t - so.k0 * x[0])));
    ComplexFieldPair::new(first, second)
}

#[derive(Debug, Clone)]
pub struct CgpeTrajectory {
    pub records: Vec<ObservableRecord>,
    pub final_pair: ComplexFieldPair,
    pub final_time: f64,
    pub energy_drift: f64,
}

fn cgpe_record(pair: &ComplexFieldPair, params: &ModelParams, t: f64) -> Result<ObservableRecord> {
    let energy = cgpe_energy(pair, params)?;
    let n1 = mass(&pair.first);
    let n2 = mass(&pair.second);
    let total = ComplexField::from_values(
        pair.grid(),
        Zip::from(pair.first.values())
            .and(pair.second.values())
            .map_collect(|a, b| C::new((a.norm_sqr() + b.norm_sqr()).sqrt(), 0.0)),
    )?;
    Ok(ObservableRecord {
        t,
        mass: n1 + n2,
        mu: observables::mu_from_energy(&energy),
        energy,
        widths: observables::widths(&total),
        center: observables::center_of_mass(&total),
        lz: None,
        component_mass: Some([n1, n2]),
    })
}

/// Runs the spin-orbit system. Records are always reported for the original
/// components.
pub fn evolve_cgpe(
    pair0: &ComplexFieldPair,
    params: &ModelParams,
    config: &EvolveConfig,
    form: CgpeForm,
) -> Result<CgpeTrajectory> {
    config.validate()?;
    let so = params
        .spin_orbit
        .ok_or_else(|| Error::invalid("spin-orbit parameters are required"))?;
    let mut stepper = CgpeTssp::new(pair0.grid(), params, form)?;
    let space = SpectralSpace::new(pair0.grid());
    warn_on_seam(pair0);
    let to_original = |p: &ComplexFieldPair, t: f64| -> Result<ComplexFieldPair> {
        match form {
            CgpeForm::Original => Ok(p.clone()),
            CgpeForm::PhaseTransformed => cgpe_phase_transform(p, TransformDirection::Inverse, &so, t),
        }
    };
    let mut state = match form {
        CgpeForm::Original => pair0.clone(),
        CgpeForm::PhaseTransformed => cgpe_phase_transform(pair0, TransformDirection::Forward, &so, 0.0)?,
    };
    let mass0 = mass(&pair0.first) + mass(&pair0.second);
    let mut records = vec![cgpe_record(pair0, params, 0.0)?];
    let n = config.steps();
    for step in 1..=n {
        state = stepper.step(&state, config.tau)?;
        let t = step as f64 * config.tau;
        if !(state.first.is_finite() && state.second.is_finite()) {
            return Err(Error::BlowUp {
                time: t,
                reason: "non-finite values in the wave function".into(),
            });
        }
        let m = mass(&state.first) + mass(&state.second);
        if (m - mass0).abs() > config.mass_tol * mass0 {
            return Err(Error::BlowUp {
                time: t,
                reason: format!("total mass moved from {mass0} to {m}"),
            });
        }
        if step % config.stride == 0 || step == n {
            check_resolution(&space, &state.first, config.resolution_tol, t)?;
            check_resolution(&space, &state.second, config.resolution_tol, t)?;
            records.push(cgpe_record(&to_original(&state, t)?, params, t)?);
        }
    }
    let final_time = n as f64 * config.tau;
    let energy_drift = drift(&records);
    Ok(CgpeTrajectory {
        records,
        final_pair: to_original(&state, final_time)?,
        final_time,
        energy_drift,
    })
}

fn warn_on_seam(pair: &ComplexFieldPair) {
    let seam = seam_amplitude(&pair.first).max(seam_amplitude(&pair.second));
    if seam > 1e-12 {
        log::warn!("wave function is {seam:.2e} at the periodic seam; enlarge the padded domain");
    }
}

/// Largest modulus on the first and last node layers of each axis.
pub fn seam_amplitude(field: &ComplexField) -> f64 {
    let v = field.values();
    let mut m: f64 = 0.0;
    for k in 0..v.ndim() {
        let n = v.shape()[k];
        for j in [0, n - 1] {
            m = v
                .index_axis(ndarray::Axis(k), j)
                .iter()
                .fold(m, |acc, z| acc.max(z.norm()));
        }
    }
    m
}

/// Copies a Dirichlet field into the centred periodic grid of `factor` times
/// the extent.
pub fn embed_periodic(field: &ComplexField, factor: usize) -> Result<ComplexField> {
    let grid = field.grid();
    if grid.is_periodic() {
        return Err(Error::invalid("field is already periodic"));
    }
    let target = grid.padded_periodic(factor)?;
    let offsets: Vec<usize> = grid.axes().iter().map(|a| (factor - 1) * a.intervals / 2).collect();
    let mut out = ArrayD::zeros(IxDyn(&target.shape()));
    for (ix, v) in field.values().indexed_iter() {
        let dst: Vec<usize> = (0..grid.dim()).map(|k| ix[k] + offsets[k]).collect();
        if dst.iter().zip(target.shape()).all(|(a, b)| a < &b) {
            out[IxDyn(&dst)] = *v;
        }
    }
    ComplexField::from_values(&target, out)
}

/// Symmetric periodic grid on `[-half, half)` per axis.
pub fn periodic_grid(dim: usize, half: f64, nodes: usize) -> Result<Grid> {
    Grid::periodic(vec![Axis::new(-half, half, nodes)?; dim])
}
