//! Dimensionless model parameters, trap potentials and interaction kernels.

use nalgebra::{Matrix3, Vector3};
use ndarray::ArrayD;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Trap anisotropies `gamma_y = w_y/w_x`, `gamma_z = w_z/w_x`, both at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    pub gamma_y: f64,
    pub gamma_z: f64,
}

impl TrapParams {
    pub fn new(gamma_y: f64, gamma_z: f64) -> Result<Self> {
        let t = Self { gamma_y, gamma_z };
        t.validate()?;
        Ok(t)
    }

    pub fn isotropic() -> Self {
        Self {
            gamma_y: 1.0,
            gamma_z: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_y >= 1.0 && self.gamma_z >= 1.0) || !self.gamma_y.is_finite() || !self.gamma_z.is_finite() {
            return Err(Error::invalid(format!(
                "trap ratios must satisfy gamma_y >= 1 and gamma_z >= 1, got ({}, {})",
                self.gamma_y, self.gamma_z
            )));
        }
        Ok(())
    }

    /// Squared trap frequencies per axis: `(1, gamma_y^2, gamma_z^2)`.
    pub fn lambda(&self) -> [f64; 3] {
        [1.0, self.gamma_y.powi(2), self.gamma_z.powi(2)]
    }

    pub fn gammas(&self) -> [f64; 3] {
        [1.0, self.gamma_y, self.gamma_z]
    }
}

impl Default for TrapParams {
    fn default() -> Self {
        Self::isotropic()
    }
}

/// External potential shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    #[default]
    Harmonic,
    /// `V = 0`, used for free-space fixtures.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelMode {
    #[serde(rename = "3d")]
    ThreeD,
    #[serde(rename = "2d-sdm")]
    TwoDSdm,
}

impl KernelMode {
    pub fn dim(self) -> usize {
        match self {
            KernelMode::ThreeD => 3,
            KernelMode::TwoDSdm => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleParams {
    pub lambda: f64,
    pub axis: [f64; 3],
    pub mode: KernelMode,
}

impl DipoleParams {
    pub fn new(lambda: f64, axis: [f64; 3], mode: KernelMode) -> Result<Self> {
        let p = Self { lambda, axis, mode };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n2: f64 = self.axis.iter().map(|v| v * v).sum();
        if (n2.sqrt() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "dipole axis must be a unit vector, |n| = {}",
                n2.sqrt()
            )));
        }
        if !self.lambda.is_finite() {
            return Err(Error::invalid("dipolar strength must be finite"));
        }
        Ok(())
    }

    /// Contact coupling and nonlocal coefficient `(beta, eta)` from the bare
    /// contact strength `kappa`. In the 2D-SDM reduction the strongly confined
    /// width is `eps = 1/sqrt(gamma_z)`.
    pub fn coefficients(&self, kappa: f64, gamma_z: f64) -> (f64, f64) {
        match self.mode {
            KernelMode::ThreeD => (kappa - self.lambda, -3.0 * self.lambda),
            KernelMode::TwoDSdm => {
                let eps = 1.0 / gamma_z.sqrt();
                let n3 = self.axis[2];
                let scale = eps * (2.0 * std::f64::consts::PI).sqrt();
                (
                    (kappa + self.lambda * (3.0 * n3 * n3 - 1.0)) / scale,
                    -1.5 * self.lambda / scale,
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpinOrbitParams {
    pub k0: f64,
    pub delta: f64,
    pub rabi: f64,
    pub beta11: f64,
    /// Shared inter-component coupling `beta_12 = beta_21`.
    pub beta12: f64,
    pub beta22: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dim: usize,
    pub beta: f64,
    pub trap: TrapParams,
    #[serde(default)]
    pub potential: PotentialKind,
    #[serde(default)]
    pub omega: f64,
    /// Semiclassical parameter; `1` is the standard scaling.
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default)]
    pub dipole: Option<DipoleParams>,
    #[serde(default)]
    pub spin_orbit: Option<SpinOrbitParams>,
}

fn one() -> f64 {
    1.0
}

impl ModelParams {
    pub fn new(dim: usize, beta: f64) -> Result<Self> {
        let p = Self {
            dim,
            beta,
            trap: TrapParams::isotropic(),
            potential: PotentialKind::Harmonic,
            omega: 0.0,
            epsilon: 1.0,
            dipole: None,
            spin_orbit: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_trap(mut self, gamma_y: f64, gamma_z: f64) -> Result<Self> {
        self.trap = TrapParams::new(gamma_y, gamma_z)?;
        Ok(self)
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_potential(mut self, potential: PotentialKind) -> Self {
        self.potential = potential;
        self
    }

    pub fn with_dipole(mut self, dipole: DipoleParams) -> Result<Self> {
        dipole.validate()?;
        self.dipole = Some(dipole);
        self.validate()?;
        Ok(self)
    }

    pub fn with_spin_orbit(mut self, so: SpinOrbitParams) -> Self {
        self.spin_orbit = Some(so);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::invalid(format!("dimension must be 1, 2 or 3, got {}", self.dim)));
        }
        if !self.beta.is_finite() {
            return Err(Error::invalid("beta must be finite"));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::invalid(format!(
                "semiclassical epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        if !self.omega.is_finite() {
            return Err(Error::invalid("omega must be finite"));
        }
        self.trap.validate()?;
        if let Some(d) = &self.dipole {
            d.validate()?;
            if d.mode.dim() != self.dim {
                return Err(Error::invalid(format!(
                    "dipolar kernel mode {:?} needs dimension {}, model has {}",
                    d.mode,
                    d.mode.dim(),
                    self.dim
                )));
            }
        }
        Ok(())
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != self.dim {
            return Err(Error::invalid(format!(
                "model dimension {} does not match grid dimension {}",
                self.dim,
                grid.dim()
            )));
        }
        Ok(())
    }

    /// Kinetic prefactor `eps^2 / 2`.
    pub fn kinetic_coeff(&self) -> f64 {
        0.5 * self.epsilon * self.epsilon
    }

    pub fn potential_at(&self, x: &[f64]) -> f64 {
        match self.potential {
            PotentialKind::Harmonic => quadratic_form(x, &self.trap),
            PotentialKind::Free => 0.0,
        }
    }

    /// External potential sampled at every node of `grid`.
    pub fn potential_on(&self, grid: &Grid) -> ArrayD<f64> {
        grid.sample_real(|x| self.potential_at(x))
    }
}

fn quadratic_form(x: &[f64], trap: &TrapParams) -> f64 {
    let lam = trap.lambda();
    0.5 * x.iter().zip(lam).map(|(v, l)| l * v * v).sum::<f64>()
}

/// `V(x) = (x^2 + gamma_y^2 y^2 + gamma_z^2 z^2)/2`, truncated to `d` terms.
pub fn harmonic_potential(x: &[f64], trap: &TrapParams, d: usize) -> Result<f64> {
    if x.len() != d || !(1..=3).contains(&d) {
        return Err(Error::invalid(format!(
            "point has {} coordinates, dimension is {d}",
            x.len()
        )));
    }
    Ok(quadratic_form(x, trap))
}

/// Unified-equation interaction strength from the 3D coupling `kappa`.
pub fn beta_from_kappa(kappa: f64, trap: &TrapParams, d: usize) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    match d {
        3 => kappa,
        2 => kappa * (trap.gamma_z / two_pi).sqrt(),
        _ => kappa * (trap.gamma_y * trap.gamma_z).sqrt() / two_pi,
    }
}

/// Rotation by angle `omega t` about the z axis:
/// `[[cos, sin, 0], [-sin, cos, 0], [0, 0, 1]]`.
pub fn rotation_matrix(t: f64, omega: f64, d: usize) -> Result<Matrix3<f64>> {
    if d != 2 && d != 3 {
        return Err(Error::UnsupportedDimension {
            operation: "rotation",
            dim: d,
        });
    }
    let (s, c) = (omega * t).sin_cos();
    Ok(Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0))
}

/// `W(x~, t) = V(A(t) x~)`.
pub fn rotating_potential(x: &[f64], t: f64, omega: f64, trap: &TrapParams, d: usize) -> Result<f64> {
    let a = rotation_matrix(t, omega, d)?;
    if x.len() != d {
        return Err(Error::invalid("point dimension does not match d"));
    }
    let v = Vector3::new(x[0], x[1], if d == 3 { x[2] } else { 0.0 });
    let y = a * v;
    harmonic_potential(&y.as_slice()[..d], trap, d)
}

/// Fourier symbol of the Coulomb-type kernel: `1/|xi|^2` (3D) or `1/|xi|`
/// (2D-SDM). The zero frequency returns 0; callers own the mean mode.
pub fn dipolar_kernel_hat(xi: &[f64], mode: KernelMode) -> f64 {
    let k2: f64 = xi.iter().map(|v| v * v).sum();
    if k2 == 0.0 {
        return 0.0;
    }
    match mode {
        KernelMode::ThreeD => 1.0 / k2,
        KernelMode::TwoDSdm => 1.0 / k2.sqrt(),
    }
}

/// Symbol of the anisotropic second derivative: `-(n.xi)^2` in 3D and
/// `-(n_perp.xi)^2 + n_3^2 |xi|^2` for the 2D-SDM reduction.
pub fn lnn_symbol(xi: &[f64], n: &[f64; 3], mode: KernelMode) -> f64 {
    match mode {
        KernelMode::ThreeD => {
            let nd: f64 = xi.iter().zip(n).map(|(a, b)| a * b).sum();
            -nd * nd
        }
        KernelMode::TwoDSdm => {
            let nd = xi[0] * n[0] + xi[1] * n[1];
            let k2 = xi[0] * xi[0] + xi[1] * xi[1];
            -nd * nd + n[2] * n[2] * k2
        }
    }
}

/// Fourier symbol of the 3D dipole-dipole kernel, `-1 + 3 (n.xi)^2/|xi|^2`,
/// zero at `xi = 0`.
pub fn ddi_symbol(xi: &[f64], n: &[f64; 3]) -> f64 {
    let k2: f64 = xi.iter().map(|v| v * v).sum();
    if k2 == 0.0 {
        return 0.0;
    }
    let nd: f64 = xi.iter().zip(n).map(|(a, b)| a * b).sum();
    -1.0 + 3.0 * nd * nd / k2
}
