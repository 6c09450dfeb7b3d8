//! Numerical solvers for Gross–Pitaevskii equations.
//!
//! Ground states are computed with a gradient flow under discrete
//! normalization, dynamics with Strang time splitting on sine (Dirichlet) or
//! Fourier (periodic) pseudospectral grids. Rotating, dipolar and
//! spin-orbit-coupled variants share the same transforms.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bogoliubov;
pub mod dipolar;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod ground_state;
pub mod io;
pub mod model;
pub mod observables;
pub mod oracles;
pub mod quadrature;
pub mod spectral;
mod tridiag;

pub use error::{Error, Result};
pub use grid::{Axis, Boundary, ComplexField, ComplexFieldPair, Grid, SineCoeffs};
pub use model::{DipoleParams, KernelMode, ModelParams, PotentialKind, SpinOrbitParams, TrapParams};
pub use spectral::{discrete_norm, normalize, sine_forward, sine_inverse, SpectralSpace};
