//! Sine and Fourier pseudospectral transforms on tensor grids.
//!
//! Sine convention (Dirichlet grids): the forward transform is the plain sum
//! `c_l = sum_{j=1}^{M-1} f_j sin(mu_l (x_j - a))` and the inverse carries the
//! factor: `f_j = (2/M) sum_l c_l sin(mu_l (x_j - a))`. Both are evaluated in
//! `O(M log M)` through a complex FFT of length `2M` applied to the odd
//! extension of the data. Multi-dimensional transforms are tensor products.
//!
//! Periodic grids use the unnormalized DFT forward and `1/N` on the way back.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{ArrayD, ArrayView1, ArrayViewMut1, Axis as NdAxis, IxDyn, Slice, Zip};
use num_complex::Complex64;
use rustfft::{Fft, FftPlannerScalar};

use crate::error::{Error, Result};
use crate::grid::{sine_frequencies, Boundary, ComplexField, Grid, SineCoeffs};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Per-axis transform plans and spectral symbols for one grid.
pub struct SpectralSpace {
    grid: Grid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    backward: Vec<Arc<dyn Fft<f64>>>,
    wavenumbers: Vec<Vec<f64>>,
    k_squared: ArrayD<f64>,
}

impl std::fmt::Debug for SpectralSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralSpace")
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl Clone for SpectralSpace {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            forward: self.forward.clone(),
            backward: self.backward.clone(),
            wavenumbers: self.wavenumbers.clone(),
            k_squared: self.k_squared.clone(),
        }
    }
}

impl SpectralSpace {
    pub fn new(grid: &Grid) -> Self {
        // The scalar kernels: the AVX ones bias the norm by about an ulp per
        // round trip, which accumulates into visible mass drift over 1e4 steps.
        let mut planner = FftPlannerScalar::new();
        let mut forward = Vec::with_capacity(grid.dim());
        let mut backward = Vec::with_capacity(grid.dim());
        let mut wavenumbers = Vec::with_capacity(grid.dim());
        for ax in grid.axes() {
            let m = ax.intervals;
            match grid.boundary() {
                Boundary::Dirichlet => {
                    // The odd/even extensions are real-symmetric, so one
                    // forward plan serves every sine and cosine synthesis.
                    let plan = planner.plan_fft_forward(2 * m);
                    forward.push(plan.clone());
                    backward.push(plan);
                    wavenumbers.push(sine_frequencies(ax));
                }
                Boundary::Periodic => {
                    forward.push(planner.plan_fft_forward(m));
                    backward.push(planner.plan_fft_inverse(m));
                    wavenumbers.push(fourier_wavenumbers(m, ax.length()));
                }
            }
        }
        let shape = grid.spectral_shape();
        let k_squared = ArrayD::from_shape_fn(IxDyn(&shape), |ix| {
            (0..shape.len()).map(|k| wavenumbers[k][ix[k]].powi(2)).sum::<f64>()
        });
        Self {
            grid: grid.clone(),
            forward,
            backward,
            wavenumbers,
            k_squared,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Spectral frequencies along `axis`: `mu_l = l pi/(b-a)` for sine grids,
    /// signed `2 pi k/(b-a)` in FFT order for periodic grids.
    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    /// `|k|^2` on the spectral index set.
    pub fn k_squared(&self) -> &ArrayD<f64> {
        &self.k_squared
    }

    /// Constant `w` with `||f||_h^2 = w * sum |c|^2` for `c = forward(f)`.
    pub fn parseval_weight(&self) -> f64 {
        match self.grid.boundary() {
            Boundary::Dirichlet => self
                .grid
                .axes()
                .iter()
                .map(|ax| 2.0 * ax.length() / (ax.intervals as f64).powi(2))
                .product(),
            Boundary::Periodic => self.grid.cell_volume() / self.grid.len() as f64,
        }
    }

    /// Node values to spectral coefficients.
    pub fn forward(&self, values: &ArrayD<C>) -> ArrayD<C> {
        let mut c = match self.grid.boundary() {
            Boundary::Dirichlet => interior(values),
            Boundary::Periodic => values.clone(),
        };
        for k in 0..self.grid.dim() {
            match self.grid.boundary() {
                Boundary::Dirichlet => c = self.sine_axis(&c, k, 1.0),
                Boundary::Periodic => fft_axis_in_place(&mut c, k, &self.forward[k]),
            }
        }
        c
    }

    /// Spectral coefficients back to node values (Dirichlet boundary nodes zero).
    /// Spectral coefficients back to node values (Dirichlet boundary nodes zero).
    pub fn inverse(&self, coeffs: &ArrayD<C>) -> ArrayD<C> {
        match self.grid.boundary() {
            Boundary::Dirichlet => {
                let mut f = coeffs.clone();
                for k in 0..self.grid.dim() {
                    let scale = 2.0 / self.grid.axis(k).intervals as f64;
                    f = self.sine_axis(&f, k, scale);
                }
                embed(&f, &self.grid.shape(), &vec![1; self.grid.dim()])
            }
            Boundary::Periodic => {
                let mut f = coeffs.clone();
                for k in 0..self.grid.dim() {
                    fft_axis_in_place(&mut f, k, &self.backward[k]);
                }
                let scale = 1.0 / self.grid.len() as f64;
                f.mapv_inplace(|z| z * scale);
                f
            }
        }
    }

    /// Multiplies the spectral coefficients of `values` by `symbol` and
    /// transforms back.
    pub fn apply_symbol(&self, values: &ArrayD<C>, symbol: &ArrayD<C>) -> ArrayD<C> {
        let mut c = self.forward(values);
        c *= symbol;
        self.inverse(&c)
    }

    /// Same as [`apply_symbol`](Self::apply_symbol) for a real symbol.
    pub fn apply_real_symbol(&self, values: &ArrayD<C>, symbol: &ArrayD<f64>) -> ArrayD<C> {
        let mut c = self.forward(values);
        Zip::from(&mut c).and(symbol).for_each(|z, &s| *z *= s);
        self.inverse(&c)
    }

    /// `-Laplacian` of the spectral interpolant, sampled at the nodes.
    pub fn neg_laplacian(&self, values: &ArrayD<C>) -> ArrayD<C> {
        self.apply_real_symbol(values, &self.k_squared)
    }

    /// `||grad f||_h^2` evaluated exactly in coefficient space.
    pub fn gradient_norm_sq(&self, values: &ArrayD<C>) -> f64 {
        let c = self.forward(values);
        let s: f64 = Zip::from(&c)
            .and(&self.k_squared)
            .fold(0.0, |acc, z, &k2| acc + k2 * z.norm_sqr());
        s * self.parseval_weight()
    }

    /// Share of `sum |c|^2` carried by modes with `|k_axis| > cutoff * max |k_axis|`
    /// along some axis. Near zero for resolved fields.
    pub fn tail_fraction(&self, values: &ArrayD<C>, cutoff: f64) -> f64 {
        let c = self.forward(values);
        let limits: Vec<f64> = self
            .wavenumbers
            .iter()
            .map(|k| cutoff * k.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect();
        let (mut tail, mut total) = (0.0, 0.0);
        for (ix, z) in c.indexed_iter() {
            let w = z.norm_sqr();
            total += w;
            if (0..limits.len()).any(|k| self.wavenumbers[k][ix[k]].abs() > limits[k]) {
                tail += w;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    /// Partial derivative along `axis` of the spectral interpolant at every node.
    ///
    /// On sine grids the derivative is a cosine series in `axis`; it is
    /// evaluated at all `M+1` nodes of that axis, including the boundary.
    pub fn derivative(&self, values: &ArrayD<C>, axis: usize) -> ArrayD<C> {
        let mut c = self.forward(values);
        match self.grid.boundary() {
            Boundary::Dirichlet => {
                let mu = &self.wavenumbers[axis];
                for (l, mut lane) in c.axis_iter_mut(NdAxis(axis)).enumerate() {
                    lane.mapv_inplace(|z| z * mu[l]);
                }
                let mut f = c;
                for k in 0..self.grid.dim() {
                    let scale = 2.0 / self.grid.axis(k).intervals as f64;
                    f = if k == axis {
                        self.cosine_axis(&f, k, scale)
                    } else {
                        self.sine_axis(&f, k, scale)
                    };
                }
                let offsets: Vec<usize> = (0..self.grid.dim()).map(|k| usize::from(k != axis)).collect();
                embed(&f, &self.grid.shape(), &offsets)
            }
            Boundary::Periodic => {
                let k = &self.wavenumbers[axis];
                for (l, mut lane) in c.axis_iter_mut(NdAxis(axis)).enumerate() {
                    let ik = C::new(0.0, k[l]);
                    lane.mapv_inplace(|z| z * ik);
                }
                self.inverse(&c)
            }
        }
    }

    fn sine_axis(&self, input: &ArrayD<C>, axis: usize, scale: f64) -> ArrayD<C> {
        let m = self.grid.axis(axis).intervals;
        let fft = &self.forward[axis];
        let mut buf = vec![ZERO; 2 * m];
        let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
        map_lanes(input, axis, m - 1, |src, mut dst| {
            buf[0] = ZERO;
            buf[m] = ZERO;
            for (j, &v) in src.iter().enumerate() {
                buf[j + 1] = v;
                buf[2 * m - j - 1] = -v;
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            // Y_l = -2i sum_j f_j sin(pi l j / M)
            let factor = C::new(0.0, 0.5 * scale);
            for (l, d) in dst.iter_mut().enumerate() {
                *d = buf[l + 1] * factor;
            }
        })
    }

    /// Cosine synthesis `g_j = scale * sum_{l=1}^{M-1} d_l cos(pi l j/M)`,
    /// `j = 0..=M`.
    fn cosine_axis(&self, input: &ArrayD<C>, axis: usize, scale: f64) -> ArrayD<C> {
        let m = self.grid.axis(axis).intervals;
        let fft = &self.forward[axis];
        let mut buf = vec![ZERO; 2 * m];
        let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
        map_lanes(input, axis, m + 1, |src, mut dst| {
            buf[0] = ZERO;
            buf[m] = ZERO;
            for (l, &v) in src.iter().enumerate() {
                buf[l + 1] = v;
                buf[2 * m - l - 1] = v;
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (j, d) in dst.iter_mut().enumerate() {
                *d = buf[j] * (0.5 * scale);
            }
        })
    }
}

/// Signed FFT-ordered wavenumbers `2 pi k / length`.
pub fn fourier_wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let base = 2.0 * PI / length;
    (0..n)
        .map(|k| {
            let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            base * signed
        })
        .collect()
}

fn map_lanes(
    input: &ArrayD<C>,
    axis: usize,
    out_len: usize,
    f: impl FnMut(ArrayView1<C>, ArrayViewMut1<C>),
) -> ArrayD<C> {
    let mut shape = input.shape().to_vec();
    shape[axis] = out_len;
    let mut out = ArrayD::zeros(IxDyn(&shape));
    Zip::from(input.lanes(NdAxis(axis)))
        .and(out.lanes_mut(NdAxis(axis)))
        .for_each(f);
    out
}

fn fft_axis_in_place(values: &mut ArrayD<C>, axis: usize, fft: &Arc<dyn Fft<f64>>) {
    let n = values.shape()[axis];
    let mut buf = vec![ZERO; n];
    let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
    for mut lane in values.lanes_mut(NdAxis(axis)) {
        for (b, v) in buf.iter_mut().zip(lane.iter()) {
            *b = *v;
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (v, b) in lane.iter_mut().zip(&buf) {
            *v = *b;
        }
    }
}

/// Drops the first and last node along every axis.
pub(crate) fn interior<T: Clone>(values: &ArrayD<T>) -> ArrayD<T> {
    values.slice_each_axis(|ad| Slice::from(1..ad.len - 1)).to_owned()
}

/// Places `inner` into a zero array of `shape` starting at `offsets`.
pub(crate) fn embed(inner: &ArrayD<C>, shape: &[usize], offsets: &[usize]) -> ArrayD<C> {
    let mut out = ArrayD::zeros(IxDyn(shape));
    out.slice_each_axis_mut(|ad| {
        let k = ad.axis.index();
        let start = offsets[k];
        Slice::from(start..start + inner.shape()[k])
    })
    .assign(inner);
    out
}

/// Sine coefficients of a Dirichlet field.
pub fn sine_forward(field: &ComplexField) -> Result<SineCoeffs> {
    let grid = field.grid();
    if grid.is_periodic() {
        return Err(Error::invalid("sine transform requires a Dirichlet grid"));
    }
    let space = SpectralSpace::new(grid);
    SineCoeffs::from_values(grid, space.forward(field.values()))
}

/// Field with the given sine coefficients.
pub fn sine_inverse(coeffs: &SineCoeffs) -> Result<ComplexField> {
    let space = SpectralSpace::new(coeffs.grid());
    ComplexField::from_values(coeffs.grid(), space.inverse(coeffs.values()))
}

/// `||f||_h = (h_1...h_d sum_j |f_j|^2)^{1/2}` over all stored nodes.
pub fn discrete_norm(field: &ComplexField) -> f64 {
    norm_of(field.values(), field.grid().cell_volume())
}

pub(crate) fn norm_of(values: &ArrayD<C>, cell_volume: f64) -> f64 {
    (cell_volume * values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

/// `field / ||field||_h`.
pub fn normalize(field: &ComplexField) -> Result<ComplexField> {
    let n = discrete_norm(field);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroNorm(format!(
            "discrete norm is {n}; cannot rescale to unit mass"
        )));
    }
    Ok(field.scaled(C::new(1.0 / n, 0.0)))
}

/// Evaluates the sine-series interpolant of a Dirichlet field at arbitrary
/// points; zero outside the box.
#[derive(Debug, Clone)]
pub struct SineInterpolant {
    grid: Grid,
    coeffs: ArrayD<C>,
}

impl SineInterpolant {
    pub fn new(field: &ComplexField) -> Result<Self> {
        let coeffs = sine_forward(field)?;
        let mut c = coeffs.values().clone();
        let scale: f64 = field.grid().axes().iter().map(|ax| 2.0 / ax.intervals as f64).product();
        c.mapv_inplace(|z| z * scale);
        Ok(Self {
            grid: field.grid().clone(),
            coeffs: c,
        })
    }

    pub fn eval(&self, x: &[f64]) -> C {
        let d = self.grid.dim();
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
        for (k, ax) in self.grid.axes().iter().enumerate() {
            if x[k] <= ax.lower || x[k] >= ax.upper {
                return ZERO;
            }
            let theta = PI * (x[k] - ax.lower) / ax.length();
            basis.push(sine_ladder(theta, ax.intervals - 1));
        }
        match d {
            1 => self.coeffs.iter().zip(&basis[0]).map(|(c, s)| c * s).sum(),
            _ => self
                .coeffs
                .indexed_iter()
                .map(|(ix, c)| {
                    let w: f64 = (0..d).map(|k| basis[k][ix[k]]).product();
                    c * w
                })
                .sum(),
        }
    }
}

/// `sin(l theta)` for `l = 1..=n` by the Chebyshev recurrence.
fn sine_ladder(theta: f64, n: usize) -> Vec<f64> {
    let two_cos = 2.0 * theta.cos();
    let mut out = Vec::with_capacity(n);
    let (mut prev, mut cur) = (0.0, theta.sin());
    for _ in 0..n {
        out.push(cur);
        let next = two_cos * cur - prev;
        prev = cur;
        cur = next;
    }
    out
}
