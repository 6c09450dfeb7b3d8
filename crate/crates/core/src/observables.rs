//! Mass, energy, chemical potential and moment diagnostics.
//!
//! Integrals are h-weighted node sums. Gradients default to the spectral
//! interpolant (exact in coefficient space); centered differences are kept
//! as a cross-check.

use std::fmt::Write as _;

use ndarray::{ArrayD, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dipolar::DipolarSolver;
use crate::error::{Error, Result};
use crate::grid::{ComplexField, ComplexFieldPair, Grid};
use crate::model::ModelParams;
use crate::spectral::SpectralSpace;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub interaction: f64,
    pub rotation: f64,
    pub dipolar: f64,
    pub josephson: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn from_parts(
        kinetic: f64,
        potential: f64,
        interaction: f64,
        rotation: f64,
        dipolar: f64,
        josephson: f64,
    ) -> Self {
        Self {
            kinetic,
            potential,
            interaction,
            rotation,
            dipolar,
            josephson,
            total: kinetic + potential + interaction + rotation + dipolar + josephson,
        }
    }

    /// `2 E_kin - 2 E_pot + d E_int`, zero for harmonic-trap ground states.
    pub fn virial_residual(&self, d: usize) -> f64 {
        2.0 * self.kinetic - 2.0 * self.potential + d as f64 * self.interaction
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: EnergyBreakdown,
    pub mu: f64,
    pub widths: Vec<f64>,
    pub center: Vec<f64>,
    pub lz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component_mass: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    #[default]
    Spectral,
    FiniteDifference,
}

/// Evaluates observables for one grid and model, caching transforms and the
/// sampled potential.
#[derive(Debug, Clone)]
pub struct Observer {
    grid: Grid,
    space: SpectralSpace,
    potential: ArrayD<f64>,
    params: ModelParams,
    mode: GradientMode,
    dipolar: Option<DipolarSolver>,
}

impl Observer {
    pub fn new(grid: &Grid, params: &ModelParams) -> Result<Self> {
        params.validate()?;
        params.check_grid(grid)?;
        Ok(Self {
            grid: grid.clone(),
            space: SpectralSpace::new(grid),
            potential: params.potential_on(grid),
            params: params.clone(),
            mode: GradientMode::Spectral,
            dipolar: None,
        })
    }

    pub fn with_gradient_mode(mut self, mode: GradientMode) -> Self {
        self.mode = mode;
        self
    }

    /// Adds the nonlocal dipolar energy; the contact coupling is then taken
    /// from the solver.
    pub fn with_dipolar(mut self, solver: DipolarSolver) -> Self {
        self.dipolar = Some(solver);
        self
    }

    /// Replaces the sampled external potential (rotating-frame energies use
    /// `W(x, t)` instead of `V`).
    pub fn with_potential(mut self, potential: ArrayD<f64>) -> Self {
        self.potential = potential;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    fn check(&self, psi: &ComplexField) -> Result<()> {
        if psi.grid() != &self.grid {
            return Err(Error::invalid("field grid differs from observer grid"));
        }
        Ok(())
    }

    fn contact_beta(&self) -> f64 {
        self.dipolar
            .as_ref()
            .map_or(self.params.beta, DipolarSolver::contact_beta)
    }

    pub fn mass(&self, psi: &ComplexField) -> f64 {
        mass(psi)
    }

    /// `int |grad psi|^2` in the configured gradient mode.
    pub fn gradient_norm_sq(&self, psi: &ComplexField) -> f64 {
        match self.mode {
            GradientMode::Spectral => self.space.gradient_norm_sq(psi.values()),
            GradientMode::FiniteDifference => fd_gradient_norm_sq(psi),
        }
    }

    pub fn energy(&self, psi: &ComplexField) -> Result<EnergyBreakdown> {
        self.check(psi)?;
        let h = self.grid.cell_volume();
        let kinetic = self.params.kinetic_coeff() * self.gradient_norm_sq(psi);
        let rho = psi.density();
        let potential = h * Zip::from(&rho).and(&self.potential).fold(0.0, |acc, r, v| acc + r * v);
        let interaction = 0.5 * self.contact_beta() * h * rho.iter().map(|r| r * r).sum::<f64>();
        let rotation = if self.params.omega != 0.0 {
            -self.params.omega * self.angular_momentum(psi)?.0
        } else {
            0.0
        };
        let dipolar = match &self.dipolar {
            Some(solver) => {
                let phi = solver.nonlocal_potential(&rho);
                0.5 * h * Zip::from(&rho).and(&phi).fold(0.0, |acc, r, p| acc + r * p)
            }
            None => 0.0,
        };
        Ok(EnergyBreakdown::from_parts(
            kinetic,
            potential,
            interaction,
            rotation,
            dipolar,
            0.0,
        ))
    }

    /// `mu = E + E_int + E_dip` (quartic terms counted twice).
    pub fn chemical_potential(&self, psi: &ComplexField) -> Result<f64> {
        let e = self.energy(psi)?;
        Ok(mu_from_energy(&e))
    }

    /// `(Re, Im)` of `int conj(psi) L_z psi` with `L_z = -i (x d_y - y d_x)`.
    pub fn angular_momentum(&self, psi: &ComplexField) -> Result<(f64, f64)> {
        self.check(psi)?;
        if self.grid.dim() < 2 {
            return Err(Error::UnsupportedDimension {
                operation: "angular momentum",
                dim: self.grid.dim(),
            });
        }
        let (dx, dy) = match self.mode {
            GradientMode::Spectral => (
                self.space.derivative(psi.values(), 0),
                self.space.derivative(psi.values(), 1),
            ),
            GradientMode::FiniteDifference => (fd_derivative(psi, 0), fd_derivative(psi, 1)),
        };
        let d = self.grid.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for (ix, v) in psi.values().indexed_iter() {
            let idx: Vec<usize> = (0..d).map(|k| ix[k]).collect();
            let x = self.grid.coords(&idx);
            let lz = Complex64::new(0.0, -1.0) * (dy[&ix] * x[0] - dx[&ix] * x[1]);
            acc += v.conj() * lz;
        }
        acc *= self.grid.cell_volume();
        Ok((acc.re, acc.im))
    }

    pub fn record(&self, t: f64, psi: &ComplexField) -> Result<ObservableRecord> {
        let energy = self.energy(psi)?;
        let lz = if self.grid.dim() >= 2 {
            Some(self.angular_momentum(psi)?.0)
        } else {
            None
        };
        Ok(ObservableRecord {
            t,
            mass: mass(psi),
            mu: mu_from_energy(&energy),
            energy,
            widths: widths(psi),
            center: center_of_mass(psi),
            lz,
            component_mass: None,
        })
    }
}

pub(crate) fn mu_from_energy(e: &EnergyBreakdown) -> f64 {
    e.total + e.interaction + e.dipolar
}

/// `N = ||psi||_h^2`.
pub fn mass(psi: &ComplexField) -> f64 {
    psi.grid().cell_volume() * psi.values().iter().map(|z| z.norm_sqr()).sum::<f64>()
}

pub fn energy(psi: &ComplexField, params: &ModelParams) -> Result<EnergyBreakdown> {
    Observer::new(psi.grid(), params)?.energy(psi)
}

pub fn chemical_potential(psi: &ComplexField, params: &ModelParams) -> Result<f64> {
    Observer::new(psi.grid(), params)?.chemical_potential(psi)
}

/// Real part of `<L_z>`; the imaginary residual is available from
/// [`Observer::angular_momentum`].
pub fn angular_momentum(psi: &ComplexField) -> Result<f64> {
    let params = ModelParams::new(psi.grid().dim(), 0.0)?;
    Ok(Observer::new(psi.grid(), &params)?.angular_momentum(psi)?.0)
}

fn moment(psi: &ComplexField, f: impl Fn(&[f64; 3]) -> [f64; 3]) -> Vec<f64> {
    let g = psi.grid();
    let d = g.dim();
    let mut acc = [0.0; 3];
    for (ix, v) in psi.values().indexed_iter() {
        let idx: Vec<usize> = (0..d).map(|k| ix[k]).collect();
        let w = f(&g.coords(&idx));
        let r = v.norm_sqr();
        for k in 0..d {
            acc[k] += w[k] * r;
        }
    }
    acc[..d].iter().map(|a| a * g.cell_volume()).collect()
}

/// Second moments `delta_alpha = int alpha^2 |psi|^2`.
pub fn widths(psi: &ComplexField) -> Vec<f64> {
    moment(psi, |x| [x[0] * x[0], x[1] * x[1], x[2] * x[2]])
}

/// First moments `x_c = int x |psi|^2`.
pub fn center_of_mass(psi: &ComplexField) -> Vec<f64> {
    moment(psi, |x| *x)
}

/// `delta^(1)_alpha = 2 int alpha Im(conj(psi) d_alpha psi)`, the initial
/// rate of change of the widths.
pub fn width_rates(psi: &ComplexField) -> Vec<f64> {
    let g = psi.grid();
    let space = SpectralSpace::new(g);
    let d = g.dim();
    (0..d)
        .map(|k| {
            let dpsi = space.derivative(psi.values(), k);
            let mut acc = 0.0;
            for (ix, v) in psi.values().indexed_iter() {
                let idx: Vec<usize> = (0..d).map(|a| ix[a]).collect();
                let x = g.coords(&idx)[k];
                acc += x * (v.conj() * dpsi[&ix]).im;
            }
            2.0 * acc * g.cell_volume()
        })
        .collect()
}

/// `sum over edges |psi_{j+1} - psi_j|^2 / h^2`, h-weighted.
fn fd_gradient_norm_sq(psi: &ComplexField) -> f64 {
    let g = psi.grid();
    let v = psi.values();
    let mut total = 0.0;
    for k in 0..g.dim() {
        let h = g.spacing(k);
        let n = v.shape()[k];
        let mut s = 0.0;
        for lane in v.lanes(ndarray::Axis(k)) {
            for j in 0..n - 1 {
                s += (lane[j + 1] - lane[j]).norm_sqr();
            }
            if g.is_periodic() {
                s += (lane[0] - lane[n - 1]).norm_sqr();
            }
        }
        total += s / (h * h);
    }
    total * g.cell_volume()
}

/// Centered difference along `axis`; one-sided terms use the zero boundary.
fn fd_derivative(psi: &ComplexField, axis: usize) -> ArrayD<Complex64> {
    let g = psi.grid();
    let h = g.spacing(axis);
    let v = psi.values();
    let mut out = ArrayD::zeros(v.raw_dim());
    let n = v.shape()[axis];
    let periodic = g.is_periodic();
    Zip::from(v.lanes(ndarray::Axis(axis)))
        .and(out.lanes_mut(ndarray::Axis(axis)))
        .for_each(|src, mut dst| {
            for j in 0..n {
                let (l, r) = if periodic {
                    (src[(j + n - 1) % n], src[(j + 1) % n])
                } else {
                    let l = if j == 0 { Complex64::new(0.0, 0.0) } else { src[j - 1] };
                    let r = if j + 1 == n {
                        Complex64::new(0.0, 0.0)
                    } else {
                        src[j + 1]
                    };
                    (l, r)
                };
                dst[j] = (r - l) / (2.0 * h);
            }
        });
    out
}

/// Energy of a two-component spin-orbit-coupled state on a periodic grid.
/// The spin-orbit, detuning and Rabi terms are reported as `josephson`.
pub fn cgpe_energy(pair: &ComplexFieldPair, params: &ModelParams) -> Result<EnergyBreakdown> {
    let so = params
        .spin_orbit
        .ok_or_else(|| Error::invalid("spin-orbit parameters are required"))?;
    let grid = pair.grid();
    params.check_grid(grid)?;
    let space = SpectralSpace::new(grid);
    let h = grid.cell_volume();
    let v = params.potential_on(grid);
    let (p1, p2) = (pair.first.values(), pair.second.values());
    let kinetic = params.kinetic_coeff() * (space.gradient_norm_sq(p1) + space.gradient_norm_sq(p2));
    let r1 = pair.first.density();
    let r2 = pair.second.density();
    let potential = h * Zip::from(&r1)
        .and(&r2)
        .and(&v)
        .fold(0.0, |acc, a, b, w| acc + (a + b) * w);
    let interaction = h * Zip::from(&r1).and(&r2).fold(0.0, |acc, a, b| {
        acc + 0.5 * so.beta11 * a * a + so.beta12 * a * b + 0.5 * so.beta22 * b * b
    });
    let d1 = space.derivative(p1, 0);
    let d2 = space.derivative(p2, 0);
    let i = Complex64::new(0.0, 1.0);
    let mut jj = 0.0;
    Zip::from(p1).and(p2).and(&d1).and(&d2).for_each(|a, b, da, db| {
        let so_term = (a.conj() * i * so.k0 * da).re - (b.conj() * i * so.k0 * db).re;
        let detune = 0.5 * so.delta * (a.norm_sqr() - b.norm_sqr());
        let rabi = so.rabi * (a * b.conj()).re;
        jj += so_term + detune + rabi;
    });
    Ok(EnergyBreakdown::from_parts(
        kinetic,
        potential,
        interaction,
        0.0,
        0.0,
        jj * h,
    ))
}

pub const CSV_HEADER: &str = "t,N,E_total,E_kin,E_pot,E_int,E_rot,E_dip,E_jj,mu,delta_x,delta_y,delta_z";

/// CSV header with `xc_1..xc_d` and `Lz` appended.
pub fn csv_header(d: usize) -> String {
    let mut s = String::from(CSV_HEADER);
    for k in 1..=d {
        let _ = write!(s, ",xc_{k}");
    }
    s.push_str(",Lz");
    s
}

impl ObservableRecord {
    pub fn csv_row(&self) -> String {
        let e = &self.energy;
        let mut s = String::new();
        let _ = write!(
            s,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.t,
            self.mass,
            e.total,
            e.kinetic,
            e.potential,
            e.interaction,
            e.rotation,
            e.dipolar,
            e.josephson,
            self.mu
        );
        for k in 0..3 {
            s.push(',');
            if let Some(w) = self.widths.get(k) {
                let _ = write!(s, "{w:e}");
            }
        }
        for c in &self.center {
            let _ = write!(s, ",{c:e}");
        }
        s.push(',');
        if let Some(l) = self.lz {
            let _ = write!(s, "{l:e}");
        }
        s
    }
}

pub fn write_csv<W: std::io::Write>(mut out: W, d: usize, records: &[ObservableRecord]) -> Result<()> {
    writeln!(out, "{}", csv_header(d))?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}
