//! Tensor grids and the complex fields that live on them.
//!
//! A [`Grid`] is a rectangular box `[a_1,b_1] x ... x [a_d,b_d]` cut into `M_i`
//! equal intervals per axis. With the default homogeneous Dirichlet boundary the
//! nodes are `x_j = a + j h` for `j = 0..=M` and the two end nodes carry the
//! boundary value zero. The periodic variant keeps `j = 0..M` only (node `M` is
//! node `0`); it backs the free-space fixtures and the spin-orbit stepper.

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

/// One axis of a tensor grid: endpoints and number of intervals `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub intervals: usize,
}

impl Axis {
    pub fn new(lower: f64, upper: f64, intervals: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || upper <= lower {
            return Err(Error::invalid(format!(
                "axis requires finite endpoints with b > a, got [{lower}, {upper}]"
            )));
        }
        if intervals < 8 || !intervals.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "axis node count M must be even and >= 8, got {intervals}"
            )));
        }
        Ok(Self {
            lower,
            upper,
            intervals,
        })
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.intervals as f64
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        self.lower + j as f64 * self.spacing()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
    boundary: Boundary,
}

impl Grid {
    /// Dirichlet grid from explicit axes.
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        Self::with_boundary(axes, Boundary::Dirichlet)
    }

    pub fn periodic(axes: Vec<Axis>) -> Result<Self> {
        Self::with_boundary(axes, Boundary::Periodic)
    }

    pub fn with_boundary(axes: Vec<Axis>, boundary: Boundary) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::invalid(format!(
                "grid dimension must be 1, 2 or 3, got {}",
                axes.len()
            )));
        }
        for ax in &axes {
            Axis::new(ax.lower, ax.upper, ax.intervals)?;
        }
        Ok(Self { axes, boundary })
    }

    /// Same interval `[lower, upper]` and node count along every axis.
    pub fn uniform(dim: usize, lower: f64, upper: f64, intervals: usize) -> Result<Self> {
        let ax = Axis::new(lower, upper, intervals)?;
        Self::new(vec![ax; dim])
    }

    /// Periodic grid covering `factor` times the extent of `self` around the same
    /// centre, with the same spacing.
    pub fn padded_periodic(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::invalid("padding factor must be >= 1"));
        }
        let axes = self
            .axes
            .iter()
            .map(|ax| {
                let centre = 0.5 * (ax.lower + ax.upper);
                let half = 0.5 * ax.length() * factor as f64;
                Axis::new(centre - half, centre + half, ax.intervals * factor)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::periodic(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    pub fn spacing(&self, i: usize) -> f64 {
        self.axes[i].spacing()
    }

    /// Product of the per-axis spacings: the quadrature weight of one node.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Number of stored nodes along axis `i`.
    pub fn nodes_along(&self, i: usize) -> usize {
        match self.boundary {
            Boundary::Dirichlet => self.axes[i].intervals + 1,
            Boundary::Periodic => self.axes[i].intervals,
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        (0..self.dim()).map(|i| self.nodes_along(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Shape of the spectral coefficient array: `M-1` sine modes per axis, or
    /// `M` Fourier modes on a periodic grid.
    pub fn spectral_shape(&self) -> Vec<usize> {
        self.axes
            .iter()
            .map(|ax| match self.boundary {
                Boundary::Dirichlet => ax.intervals - 1,
                Boundary::Periodic => ax.intervals,
            })
            .collect()
    }

    /// Physical coordinates of the node with multi-index `idx` (unused trailing
    /// components are zero).
    #[inline]
    pub fn coords(&self, idx: &[usize]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for (k, ax) in self.axes.iter().enumerate() {
            x[k] = ax.node(idx[k]);
        }
        x
    }

    #[inline]
    pub fn is_boundary(&self, idx: &[usize]) -> bool {
        self.boundary == Boundary::Dirichlet && self.axes.iter().zip(idx).any(|(ax, &j)| j == 0 || j == ax.intervals)
    }

    /// Samples a real function at every node (boundary nodes included).
    pub fn sample_real(&self, f: impl Fn(&[f64]) -> f64) -> ArrayD<f64> {
        let d = self.dim();
        ArrayD::from_shape_fn(IxDyn(&self.shape()), |ix| {
            let idx: Vec<usize> = (0..d).map(|k| ix[k]).collect();
            let x = self.coords(&idx);
            f(&x[..d])
        })
    }
}

/// Discretized wave function: complex values at every node of a grid, zero on
/// the Dirichlet boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: ArrayD<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            values: ArrayD::zeros(IxDyn(&grid.shape())),
            grid: grid.clone(),
        }
    }

    /// Samples `f` at interior nodes; Dirichlet boundary nodes are set to zero.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let d = grid.dim();
        let values = ArrayD::from_shape_fn(IxDyn(&grid.shape()), |ix| {
            let idx: Vec<usize> = (0..d).map(|k| ix[k]).collect();
            if grid.is_boundary(&idx) {
                Complex64::new(0.0, 0.0)
            } else {
                let x = grid.coords(&idx);
                f(&x[..d])
            }
        });
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_real_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Wraps an existing node array. The shape must match the grid and boundary
    /// nodes must be exactly zero.
    pub fn from_values(grid: &Grid, values: ArrayD<Complex64>) -> Result<Self> {
        let expected = grid.shape();
        if values.shape() != expected.as_slice() {
            return Err(Error::ShapeMismatch {
                expected,
                found: values.shape().to_vec(),
            });
        }
        if grid.boundary() == Boundary::Dirichlet {
            let d = grid.dim();
            for (ix, v) in values.indexed_iter() {
                let idx: Vec<usize> = (0..d).map(|k| ix[k]).collect();
                if grid.is_boundary(&idx) && *v != Complex64::new(0.0, 0.0) {
                    return Err(Error::invalid(format!(
                        "Dirichlet boundary node {idx:?} carries nonzero value {v}"
                    )));
                }
            }
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &ArrayD<Complex64> {
        &self.values
    }

    pub fn into_values(self) -> ArrayD<Complex64> {
        self.values
    }

    /// Pointwise `|psi|^2` at every node.
    pub fn density(&self) -> ArrayD<f64> {
        self.values.mapv(|z| z.norm_sqr())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.mapv(|z| z * factor),
        }
    }

    /// Pointwise map over interior values; boundary nodes stay zero.
    pub fn map(&self, f: impl Fn(&[f64], Complex64) -> Complex64) -> Self {
        let d = self.grid.dim();
        let mut out = self.clone();
        for (ix, v) in out.values.indexed_iter_mut() {
            let idx: Vec<usize> = (0..d).map(|k| ix[k]).collect();
            if !self.grid.is_boundary(&idx) {
                let x = self.grid.coords(&idx);
                *v = f(&x[..d], *v);
            }
        }
        out
    }

    /// Largest pointwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexField) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn same_grid(&self, other: &ComplexField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::invalid("fields live on different grids"));
        }
        Ok(())
    }
}

/// Two-component wave function `(psi_1, psi_2)` on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFieldPair {
    pub first: ComplexField,
    pub second: ComplexField,
}

impl ComplexFieldPair {
    pub fn new(first: ComplexField, second: ComplexField) -> Result<Self> {
        first.same_grid(&second)?;
        Ok(Self { first, second })
    }

    pub fn grid(&self) -> &Grid {
        self.first.grid()
    }
}

/// Sine coefficients `c_l`, `l = 1..M-1` per axis, of a Dirichlet field.
#[derive(Debug, Clone, PartialEq)]
pub struct SineCoeffs {
    grid: Grid,
    values: ArrayD<Complex64>,
}

impl SineCoeffs {
    pub fn from_values(grid: &Grid, values: ArrayD<Complex64>) -> Result<Self> {
        if grid.is_periodic() {
            return Err(Error::invalid("sine coefficients need a Dirichlet grid"));
        }
        let expected = grid.spectral_shape();
        if values.shape() != expected.as_slice() {
            return Err(Error::ShapeMismatch {
                expected,
                found: values.shape().to_vec(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &Grid) -> Result<Self> {
        Self::from_values(grid, ArrayD::zeros(IxDyn(&grid.spectral_shape())))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &ArrayD<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut ArrayD<Complex64> {
        &mut self.values
    }

    /// Frequencies `mu_l = l pi / (b - a)` for `l = 1..M-1` along `axis`.
    pub fn frequencies(&self, axis: usize) -> Vec<f64> {
        sine_frequencies(self.grid.axis(axis))
    }
}

pub(crate) fn sine_frequencies(ax: &Axis) -> Vec<f64> {
    let scale = std::f64::consts::PI / ax.length();
    (1..ax.intervals).map(|l| l as f64 * scale).collect()
}
