//! Closed-form reference solutions: linear and Thomas–Fermi ground states,
//! bright solitons, width and center-of-mass dynamics in a harmonic trap, and
//! the exactly transported stationary state.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::TrapParams;
use crate::quadrature::GaussLegendre;
use crate::spectral::SineInterpolant;

/// Harmonic-oscillator ground state `prod (gamma/(pi eps))^{1/4} exp(-gamma x^2/(2 eps))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearGroundState {
    pub dim: usize,
    pub trap: TrapParams,
    pub epsilon: f64,
}

impl LinearGroundState {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let g = self.trap.gammas();
        (0..self.dim)
            .map(|k| (g[k] / (PI * self.epsilon)).powf(0.25) * (-g[k] * x[k] * x[k] / (2.0 * self.epsilon)).exp())
            .product()
    }

    /// `E = mu = (eps/2)(1 + gamma_y + gamma_z)` truncated to `d` terms.
    pub fn energy(&self) -> f64 {
        0.5 * self.epsilon * self.trap.gammas()[..self.dim].iter().sum::<f64>()
    }

    pub fn chemical_potential(&self) -> f64 {
        self.energy()
    }
}

pub fn linear_ground_state(dim: usize, trap: &TrapParams, epsilon: f64) -> LinearGroundState {
    LinearGroundState {
        dim,
        trap: *trap,
        epsilon,
    }
}

/// `C_d = int |phi_0|^4`, evaluated by quadrature axis by axis.
pub fn weak_interaction_constant(dim: usize, trap: &TrapParams) -> f64 {
    let gl = GaussLegendre::new(20);
    let g = trap.gammas();
    (0..dim)
        .map(|k| {
            let a = (g[k] / PI).sqrt();
            let half = 12.0 / g[k].sqrt();
            gl.adaptive(|x| a * a * (-2.0 * g[k] * x * x).exp(), -half, half, 1e-15)
        })
        .product()
}

/// First-order estimates `(E0 + beta C_d/2, mu0 + beta C_d)` for small `beta`.
pub fn weak_interaction_estimates(beta: f64, trap: &TrapParams, dim: usize) -> (f64, f64) {
    let lin = linear_ground_state(dim, trap, 1.0);
    let c = weak_interaction_constant(dim, trap);
    (lin.energy() + 0.5 * beta * c, lin.chemical_potential() + beta * c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfEstimates {
    pub mu: f64,
    pub energy: f64,
    /// Support half-widths `sqrt(2 mu)/gamma_alpha`.
    pub radii: Vec<f64>,
}

pub fn tf_estimates(beta: f64, trap: &TrapParams, dim: usize) -> Result<TfEstimates> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!(
            "Thomas-Fermi estimates need beta > 0, got {beta}"
        )));
    }
    let (gy, gz) = (trap.gamma_y, trap.gamma_z);
    let mu = match dim {
        1 => 0.5 * (1.5 * beta).powf(2.0 / 3.0),
        2 => (beta * gy / PI).sqrt(),
        3 => 0.5 * (15.0 * beta * gy * gz / (4.0 * PI)).powf(0.4),
        _ => return Err(Error::invalid(format!("dimension {dim} out of range"))),
    };
    let d = dim as f64;
    let g = trap.gammas();
    Ok(TfEstimates {
        mu,
        energy: (d + 2.0) / (d + 4.0) * mu,
        radii: (0..dim).map(|k| (2.0 * mu).sqrt() / g[k]).collect(),
    })
}

/// Bright soliton of the free focusing equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrightSoliton {
    pub amplitude: f64,
    pub velocity: f64,
    pub x0: f64,
    pub theta0: f64,
    pub beta: f64,
}

impl BrightSoliton {
    pub fn new(amplitude: f64, velocity: f64, x0: f64, theta0: f64, beta: f64) -> Result<Self> {
        if !(beta < 0.0) {
            return Err(Error::invalid("bright solitons need beta < 0"));
        }
        if !(amplitude > 0.0) {
            return Err(Error::invalid("soliton amplitude must be positive"));
        }
        Ok(Self {
            amplitude,
            velocity,
            x0,
            theta0,
            beta,
        })
    }

    /// `A/sqrt(-beta) sech(A(x - v t - x0)) exp(i(v x - (v^2 - A^2) t/2 + theta0))`.
    pub fn eval(&self, x: f64, t: f64) -> Complex64 {
        let (a, v) = (self.amplitude, self.velocity);
        let profile = a / (-self.beta).sqrt() / (a * (x - v * t - self.x0)).cosh();
        let phase = v * x - 0.5 * (v * v - a * a) * t + self.theta0;
        Complex64::from_polar(profile, phase)
    }

    pub fn mass(&self) -> f64 {
        -2.0 * self.amplitude / self.beta
    }

    /// `A v^2/(-beta) - A^3/(-3 beta)`: kinetic `A v^2/(-beta) + A^3/(-3 beta)`
    /// plus interaction `-2 A^3/(-3 beta)`.
    pub fn energy(&self) -> f64 {
        let (a, v) = (self.amplitude, self.velocity);
        a * v * v / (-self.beta) - a.powi(3) / (-3.0 * self.beta)
    }
}

pub fn bright_soliton(x: f64, t: f64, soliton: &BrightSoliton) -> Complex64 {
    soliton.eval(x, t)
}

/// Plane-wave frequency `|k|^2/2 + beta |A|^2`.
pub fn dispersion_omega(k: &[f64], amplitude: f64, beta: f64) -> f64 {
    0.5 * k.iter().map(|v| v * v).sum::<f64>() + beta * amplitude * amplitude
}

/// `delta(t) = E0 + (delta0 - E0) cos 2t + (rate0/2) sin 2t` for the
/// noninteracting 1D width (or `delta_r` in a radial 2D trap), where `rate0`
/// is the initial rate `delta'(0)` as returned by
/// [`width_rates`](crate::observables::width_rates).
pub fn width_closed_form(t: f64, e0: f64, delta0: f64, rate0: f64) -> f64 {
    e0 + (delta0 - e0) * (2.0 * t).cos() + 0.5 * rate0 * (2.0 * t).sin()
}

/// Harmonic-oscillator center of mass: position and velocity per axis.
/// `lambda` holds the squared trap frequencies.
pub fn center_of_mass_trajectory(t: f64, x0: &[f64], w0: &[f64], lambda: &[f64]) -> (Vec<f64>, Vec<f64>) {
    x0.iter()
        .zip(w0)
        .zip(lambda)
        .map(|((&x, &w), &l)| {
            let om = l.sqrt();
            let (s, c) = (om * t).sin_cos();
            (x * c + w / om * s, -x * om * s + w * c)
        })
        .unzip()
}

/// Stationary profile used by the transported solution.
#[derive(Debug, Clone)]
pub enum Profile {
    Linear(LinearGroundState),
    /// Spectral interpolant of a computed ground state.
    Sampled(SineInterpolant),
}

impl Profile {
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            Profile::Linear(l) => Complex64::new(l.eval(x), 0.0),
            Profile::Sampled(s) => s.eval(x),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransportedSolutionSpec {
    pub profile: Profile,
    pub mu: f64,
    pub x0: Vec<f64>,
    pub w0: Vec<f64>,
    pub g0: f64,
    pub trap: TrapParams,
}

impl TransportedSolutionSpec {
    fn lambda(&self) -> Vec<f64> {
        self.trap.lambda()[..self.x0.len()].to_vec()
    }

    /// Phase `g(t) = g0 + int_0^t [V(x_c) - |x_c'|^2/2] ds` by adaptive
    /// Gauss–Legendre quadrature.
    pub fn phase(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.g0;
        }
        let lambda = self.lambda();
        let integrand = |s: f64| {
            let (xc, w) = center_of_mass_trajectory(s, &self.x0, &self.w0, &lambda);
            let v: f64 = 0.5 * xc.iter().zip(&lambda).map(|(x, l)| l * x * x).sum::<f64>();
            let kin: f64 = 0.5 * w.iter().map(|u| u * u).sum::<f64>();
            v - kin
        };
        let gl = GaussLegendre::new(16);
        self.g0 + gl.adaptive(integrand, 0.0, t, 1e-12)
    }

    /// `phi_e(x - x_c) exp(-i mu t) exp(i (w . x + g))`.
    pub fn eval(&self, x: &[f64], t: f64) -> Complex64 {
        self.eval_with_phase(x, t, self.phase(t))
    }

    /// Same as [`eval`](Self::eval) with a precomputed `g(t)`, for sampling
    /// whole grids.
    pub fn eval_with_phase(&self, x: &[f64], t: f64, g: f64) -> Complex64 {
        let lambda = self.lambda();
        let (xc, w) = center_of_mass_trajectory(t, &self.x0, &self.w0, &lambda);
        let shifted: Vec<f64> = x.iter().zip(&xc).map(|(a, b)| a - b).collect();
        let wx: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
        self.profile.eval(&shifted) * Complex64::from_polar(1.0, wx + g - self.mu * t)
    }
}

pub fn transported_solution(x: &[f64], t: f64, spec: &TransportedSolutionSpec) -> Complex64 {
    spec.eval(x, t)
}
