//! Nonlocal dipolar potential `eta * L_n (G * |psi|^2)`.
//!
//! The free-space convolution with `G` (`1/(4 pi |x|)` in 3D, `1/(2 pi |x|)`
//! for the 2D surface-density model) is evaluated with a truncated kernel:
//! `G` is cut off at radius `R` equal to the box diameter, which leaves the
//! convolution on the box unchanged but makes the Fourier symbol smooth,
//! `(1 - cos(R k))/k^2` in 3D and `(1/k) int_0^{kR} J_0` in 2D. The symbol is
//! sampled on an oversized periodic grid once, brought back to real space,
//! restricted to the offsets a box can produce and stored as the transform
//! of a doubled (`2M` per axis) convolution grid. Each application then costs
//! one forward and one inverse FFT of the doubled grid.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid};
use crate::model::{lnn_symbol, DipoleParams, KernelMode};
use crate::quadrature::GaussLegendre;
use crate::spectral::fourier_wavenumbers;

type C = Complex64;

#[derive(Clone)]
pub struct DipolarSolver {
    grid: Grid,
    dipole: DipoleParams,
    beta: f64,
    eta: f64,
    padded: Vec<usize>,
    kernel_u: ArrayD<C>,
    kernel_phi: ArrayD<C>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    backward: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for DipolarSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DipolarSolver")
            .field("dipole", &self.dipole)
            .field("beta", &self.beta)
            .field("eta", &self.eta)
            .field("padded", &self.padded)
            .finish_non_exhaustive()
    }
}

impl DipolarSolver {
    /// Builds the convolution kernels for `grid`. `kappa` is the bare contact
    /// strength; the effective contact coupling and `eta` follow from the
    /// kernel mode.
    pub fn new(grid: &Grid, dipole: &DipoleParams, kappa: f64, gamma_z: f64) -> Result<Self> {
        dipole.validate()?;
        if grid.dim() != dipole.mode.dim() {
            return Err(Error::invalid(format!(
                "dipolar kernel {:?} needs a {}-dimensional grid, got {}",
                dipole.mode,
                dipole.mode.dim(),
                grid.dim()
            )));
        }
        let (beta, eta) = dipole.coefficients(kappa, gamma_z);
        let d = grid.dim();
        let h: Vec<f64> = (0..d).map(|k| grid.spacing(k)).collect();
        let lengths: Vec<f64> = grid.axes().iter().map(|a| a.length()).collect();
        let radius = lengths.iter().map(|l| l * l).sum::<f64>().sqrt();
        let padded: Vec<usize> = grid.axes().iter().map(|a| 2 * a.intervals).collect();
        let big: Vec<usize> = (0..d)
            .map(|k| {
                let need = ((lengths[k] + radius) / h[k]).floor() as usize + 2;
                fast_size(need.max(padded[k]))
            })
            .collect();

        let mut planner = FftPlanner::new();
        let big_inv: Vec<_> = big.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let forward: Vec<_> = padded.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let backward: Vec<_> = padded.iter().map(|&n| planner.plan_fft_inverse(n)).collect();

        let k_axes: Vec<Vec<f64>> = (0..d)
            .map(|k| fourier_wavenumbers(big[k], big[k] as f64 * h[k]))
            .collect();
        let period_volume: f64 = (0..d).map(|k| big[k] as f64 * h[k]).product();
        let radial = RadialSymbol::new(dipole.mode, radius, &k_axes);

        let symbol_u = ArrayD::from_shape_fn(IxDyn(&big), |ix| {
            let k2: f64 = (0..d).map(|a| k_axes[a][ix[a]].powi(2)).sum();
            radial.eval(k2.sqrt())
        });
        let symbol_phi = ArrayD::from_shape_fn(IxDyn(&big), |ix| {
            let xi: Vec<f64> = (0..d).map(|a| k_axes[a][ix[a]]).collect();
            lnn_symbol(&xi, &dipole.axis, dipole.mode) * symbol_u[&ix]
        });

        let kernel_u = restrict_kernel(&symbol_u, &big, &big_inv, &padded, &forward, period_volume);
        let kernel_phi = restrict_kernel(&symbol_phi, &big, &big_inv, &padded, &forward, period_volume);

        Ok(Self {
            grid: grid.clone(),
            dipole: *dipole,
            beta,
            eta,
            padded,
            kernel_u,
            kernel_phi,
            forward,
            backward,
        })
    }

    pub fn contact_beta(&self) -> f64 {
        self.beta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dipole(&self) -> &DipoleParams {
        &self.dipole
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `u = G * rho` at every node.
    pub fn poisson(&self, density: &ArrayD<f64>) -> ArrayD<f64> {
        self.convolve(density, &self.kernel_u)
    }

    /// `L_n u` at every node.
    pub fn lnn_potential(&self, density: &ArrayD<f64>) -> ArrayD<f64> {
        self.convolve(density, &self.kernel_phi)
    }

    /// `eta L_n (G * rho)`, the term entering the phase step.
    pub fn nonlocal_potential(&self, density: &ArrayD<f64>) -> ArrayD<f64> {
        let mut p = self.lnn_potential(density);
        p.mapv_inplace(|v| v * self.eta);
        p
    }

    /// Nonlocal potential generated by `|psi|^2`.
    pub fn dipolar_term(&self, psi: &ComplexField) -> Result<ArrayD<f64>> {
        if psi.grid() != &self.grid {
            return Err(Error::invalid("field grid differs from dipolar solver grid"));
        }
        Ok(self.nonlocal_potential(&psi.density()))
    }

    fn convolve(&self, density: &ArrayD<f64>, kernel: &ArrayD<C>) -> ArrayD<f64> {
        let shape = density.shape().to_vec();
        let mut buf = ArrayD::<C>::zeros(IxDyn(&self.padded));
        for (ix, r) in density.indexed_iter() {
            buf[&ix] = C::new(*r, 0.0);
        }
        for (k, plan) in self.forward.iter().enumerate() {
            fft_axis(&mut buf, k, plan);
        }
        buf *= kernel;
        for (k, plan) in self.backward.iter().enumerate() {
            fft_axis(&mut buf, k, plan);
        }
        let scale = self.grid.cell_volume() / buf.len() as f64;
        ArrayD::from_shape_fn(IxDyn(&shape), |ix| buf[&ix].re * scale)
    }
}

/// Radially symmetric truncated-kernel symbol, tabulated for the 2D model.
struct RadialSymbol {
    mode: KernelMode,
    radius: f64,
    table: Vec<(f64, f64)>,
}

impl RadialSymbol {
    fn new(mode: KernelMode, radius: f64, k_axes: &[Vec<f64>]) -> Self {
        let mut table = Vec::new();
        if mode == KernelMode::TwoDSdm {
            let mut ks: Vec<f64> = Vec::new();
            for a in k_axes[0].iter() {
                for b in k_axes[1].iter() {
                    ks.push(a * a + b * b);
                }
            }
            ks.sort_by(f64::total_cmp);
            ks.dedup();
            let gl = GaussLegendre::new(16);
            table = ks
                .into_iter()
                .map(|k2| {
                    let k = k2.sqrt();
                    (k2, truncated_2d(k, radius, &gl))
                })
                .collect();
        }
        Self { mode, radius, table }
    }

    fn eval(&self, k: f64) -> f64 {
        match self.mode {
            KernelMode::ThreeD => {
                if k == 0.0 {
                    0.5 * self.radius * self.radius
                } else {
                    // 2 sin^2(kR/2) avoids cancellation in 1 - cos(kR).
                    let s = (0.5 * k * self.radius).sin();
                    2.0 * s * s / (k * k)
                }
            }
            KernelMode::TwoDSdm => {
                let i = nearest(&self.table, k * k);
                self.table[i].1
            }
        }
    }
}

fn nearest(table: &[(f64, f64)], key: f64) -> usize {
    match table.binary_search_by(|(k, _)| k.total_cmp(&key)) {
        Ok(i) => i,
        Err(0) => 0,
        Err(i) if i == table.len() => i - 1,
        Err(i) => {
            if key - table[i - 1].0 < table[i].0 - key {
                i - 1
            } else {
                i
            }
        }
    }
}

/// `int_0^R J_0(k r) dr = (1/(pi k)) int_0^pi sin(kR sin t)/sin t dt`.
pub(crate) fn truncated_2d(k: f64, radius: f64, gl: &GaussLegendre) -> f64 {
    if k == 0.0 {
        return radius;
    }
    let z = k * radius;
    // Integrand is symmetric about pi/2; panels keep a few nodes per oscillation.
    let panels = (z / 2.0).ceil() as usize + 2;
    let f = |t: f64| {
        let s = t.sin();
        if s < 1e-300 {
            z
        } else {
            (z * s).sin() / s
        }
    };
    2.0 * gl.composite(f, 0.0, 0.5 * PI, panels) / (PI * k)
}

fn restrict_kernel(
    symbol: &ArrayD<f64>,
    big: &[usize],
    big_inv: &[Arc<dyn Fft<f64>>],
    padded: &[usize],
    forward: &[Arc<dyn Fft<f64>>],
    period_volume: f64,
) -> ArrayD<C> {
    let d = big.len();
    let mut full = symbol.mapv(|s| C::new(s, 0.0));
    for (k, plan) in big_inv.iter().enumerate() {
        fft_axis(&mut full, k, plan);
    }
    let mut small = ArrayD::<C>::zeros(IxDyn(padded));
    for (ix, v) in small.indexed_iter_mut() {
        let mut src = Vec::with_capacity(d);
        let mut keep = true;
        for k in 0..d {
            let m = padded[k] / 2;
            let j = ix[k];
            // Offsets -(M-1)..=(M-1); offset +-M only couples boundary nodes.
            let o = if j < m {
                j as isize
            } else {
                j as isize - padded[k] as isize
            };
            if j == m {
                keep = false;
            }
            src.push(o.rem_euclid(big[k] as isize) as usize);
        }
        if keep {
            *v = C::new(full[IxDyn(&src)].re / period_volume, 0.0);
        }
    }
    for (k, plan) in forward.iter().enumerate() {
        fft_axis(&mut small, k, plan);
    }
    small
}

fn fft_axis(values: &mut ArrayD<C>, axis: usize, fft: &Arc<dyn Fft<f64>>) {
    let n = values.shape()[axis];
    let mut buf = vec![C::new(0.0, 0.0); n];
    let mut scratch = vec![C::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for mut lane in values.lanes_mut(ndarray::Axis(axis)) {
        for (b, v) in buf.iter_mut().zip(lane.iter()) {
            *b = *v;
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (v, b) in lane.iter_mut().zip(&buf) {
            *v = *b;
        }
    }
}

/// Smallest `2^a 3^b 5^c` that is even and at least `n`.
fn fast_size(n: usize) -> usize {
    let mut m = n.max(2);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 && m.is_multiple_of(2) {
            return m;
        }
        m += 1;
    }
}

/// Applies `symbol(xi)` to the discrete Fourier transform of a real periodic
/// array and returns the real part of the result; `xi` runs over the FFT
/// wavenumbers of `grid`.
pub fn apply_fourier_symbol(grid: &Grid, values: &ArrayD<f64>, symbol: impl Fn(&[f64]) -> f64) -> ArrayD<f64> {
    let d = grid.dim();
    let shape = values.shape().to_vec();
    let k_axes: Vec<Vec<f64>> = (0..d)
        .map(|k| fourier_wavenumbers(shape[k], shape[k] as f64 * grid.spacing(k)))
        .collect();
    let mut planner = FftPlanner::new();
    let mut buf = values.mapv(|v| C::new(v, 0.0));
    for (k, &n) in shape.iter().enumerate() {
        fft_axis(&mut buf, k, &planner.plan_fft_forward(n));
    }
    for (ix, z) in buf.indexed_iter_mut() {
        let xi: Vec<f64> = (0..d).map(|a| k_axes[a][ix[a]]).collect();
        *z *= symbol(&xi);
    }
    for (k, &n) in shape.iter().enumerate() {
        fft_axis(&mut buf, k, &planner.plan_fft_inverse(n));
    }
    let scale = 1.0 / buf.len() as f64;
    buf.mapv(|z| z.re * scale)
}
