//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! nonzero status if any criterion outside `KNOWN_FAILURES` fails.
//!
//! Reference values are computed here from closed forms or by independent
//! quadrature, never through the library's own oracle module.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use gpe_core::bogoliubov::{assemble_bdg, solve_bdg};
use gpe_core::dipolar::{apply_fourier_symbol, DipolarSolver};
use gpe_core::dynamics::{embed_periodic, evolve, evolve_cgpe, to_eulerian, CgpeForm, EvolveConfig, Scheme, Tssp};
use gpe_core::ground_state::{solve_ground_state, Discretization, GfdnConfig, GroundStateResult, InitialGuess};
use gpe_core::model::{ddi_symbol, dipolar_kernel_hat, lnn_symbol};
use gpe_core::observables::{center_of_mass, mass, widths};
use gpe_core::spectral::SineInterpolant;
use gpe_core::{
    Axis, ComplexField, ComplexFieldPair, DipoleParams, Grid, KernelMode, ModelParams, PotentialKind, SpinOrbitParams,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

type C = Complex64;

/// The stated BdG targets `0.5, 1.0, ..., 2.5` are half the oscillator gaps
/// `E_k - mu = k` of `L = H - mu` at `beta = 0`; the correct targets are
/// checked under `13a*`.
const KNOWN_FAILURES: &[&str] = &["13a"];

struct Check {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
}

impl Check {
    fn new(id: &'static str, name: &'static str, pass: bool, detail: String) -> Self {
        Self { id, name, pass, detail }
    }
}

type Outcome = Result<Vec<Check>, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn gaussian_field(grid: &Grid, width: f64, shift: f64) -> ComplexField {
    ComplexField::from_real_fn(grid, |x| {
        (-x.iter().map(|v| (v - shift).powi(2)).sum::<f64>() / (2.0 * width * width)).exp()
    })
}

fn ground_state(params: &ModelParams, grid: &Grid, tau: f64, tol: f64) -> Result<GroundStateResult, String> {
    let config = GfdnConfig {
        tau,
        stop_tol: tol,
        ..GfdnConfig::default()
    };
    solve_ground_state(params, grid, &config).map_err(err)
}

fn max_diff(a: &ndarray::ArrayD<f64>, b: &ndarray::ArrayD<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn linear_1d() -> Outcome {
    let grid = Grid::uniform(1, -16.0, 16.0, 256).map_err(err)?;
    let params = ModelParams::new(1, 0.0).map_err(err)?;
    let start = Instant::now();
    let config = GfdnConfig {
        tau: 0.01,
        stop_tol: 1e-6,
        initial: InitialGuess::Field(gaussian_field(&grid, 1.5, 0.0)),
        ..GfdnConfig::default()
    };
    let gs = solve_ground_state(&params, &grid, &config).map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    let exact = ComplexField::from_real_fn(&grid, |x| PI.powf(-0.25) * (-0.5 * x[0] * x[0]).exp());
    let dev = gs.phi.max_abs_diff(&exact);
    let (de, dmu) = ((gs.e_g - 0.5).abs(), (gs.mu_g - 0.5).abs());
    let virial = gs.virial_residual().abs() / gs.e_g.abs();
    Ok(vec![
        Check::new(
            "1",
            "linear ground state d=1",
            de <= 1e-6 && dmu <= 1e-6 && dev <= 1e-6 && secs < 5.0,
            format!(
                "|E-0.5|={de:.2e} |mu-0.5|={dmu:.2e} max|phi-exact|={dev:.2e} iters={} time={secs:.2}s",
                gs.iterations
            ),
        ),
        Check::new(
            "4.1",
            "virial identity (criterion 1 state)",
            virial <= 1e-4,
            format!("|virial|/|E|={virial:.2e}"),
        ),
    ])
}

fn linear_2d() -> Outcome {
    let params = ModelParams::new(2, 0.0)
        .map_err(err)?
        .with_trap(2.0, 1.0)
        .map_err(err)?;
    let grid = Grid::uniform(2, -8.0, 8.0, 128).map_err(err)?;
    let start = Instant::now();
    let config = GfdnConfig {
        initial: InitialGuess::Field(gaussian_field(&grid, 1.0, 0.0)),
        ..GfdnConfig::default()
    };
    let gs = solve_ground_state(&params, &grid, &config).map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    // (1 + gamma_y)/2
    let de = (gs.e_g - 1.5).abs();
    let virial = gs.virial_residual().abs() / gs.e_g.abs();
    Ok(vec![
        Check::new(
            "2",
            "anisotropic linear ground state d=2",
            de <= 1e-5 && secs < 30.0,
            format!("|E-1.5|={de:.2e} iters={} time={secs:.2}s", gs.iterations),
        ),
        Check::new(
            "4.2",
            "virial identity (criterion 2 state)",
            virial <= 1e-4,
            format!("|virial|/|E|={virial:.2e}"),
        ),
    ])
}

fn thomas_fermi() -> Outcome {
    let beta = 400.0;
    // mu_TF = (1/2)(3 beta/2)^{2/3}, E_TF = (3/5) mu_TF.
    let mu_tf = 0.5 * (1.5f64 * beta).powf(2.0 / 3.0);
    let e_tf = 0.3 * (1.5f64 * beta).powf(2.0 / 3.0);
    let params = ModelParams::new(1, beta).map_err(err)?;
    let half = 1.5 * (2.0 * mu_tf).sqrt();
    let grid = Grid::new(vec![Axis::new(-half, half, 512).map_err(err)?]).map_err(err)?;
    let gs = ground_state(&params, &grid, 1e-3, 1e-6)?;
    let rel_mu = (gs.mu_g - mu_tf).abs() / mu_tf;
    let rel_e = (gs.e_g - e_tf).abs() / e_tf;
    let virial = gs.virial_residual().abs() / gs.e_g.abs();
    Ok(vec![
        Check::new(
            "3",
            "Thomas-Fermi regime beta=400",
            rel_mu <= 0.03 && rel_e <= 0.03,
            format!(
                "mu={:.4} (TF {mu_tf:.4}, rel {rel_mu:.2e}) E={:.4} (TF {e_tf:.4}, rel {rel_e:.2e})",
                gs.mu_g, gs.e_g
            ),
        ),
        Check::new(
            "4.3",
            "virial identity (criterion 3 state)",
            virial <= 1e-4,
            format!("|virial|/|E|={virial:.2e}"),
        ),
    ])
}

fn conservation() -> Outcome {
    let params = ModelParams::new(1, 100.0).map_err(err)?;
    let grid = Grid::uniform(1, -16.0, 16.0, 512).map_err(err)?;
    let gs = ground_state(&params, &grid, 0.01, 1e-10)?;
    let start = Instant::now();
    let config = EvolveConfig::new(1e-3, 10.0, 100);
    let traj = evolve(&gs.phi, &params, &config).map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    let m0 = traj.records[0].mass;
    let mass_drift = traj.records.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max);
    let rho = max_diff(&traj.final_field.density(), &gs.phi.density());
    let e_drift = traj.energy_drift;
    Ok(vec![Check::new(
        "5",
        "TSSP conservation beta=100",
        mass_drift <= 1e-12 && e_drift <= 1e-8 && rho <= 1e-6 && secs < 30.0,
        format!("mass drift={mass_drift:.2e} energy drift={e_drift:.2e} density drift={rho:.2e} time={secs:.2}s"),
    )])
}

fn run_to(psi: &ComplexField, params: &ModelParams, tau: f64, t: f64) -> Result<ComplexField, String> {
    let mut stepper = Tssp::new(psi.grid(), params).map_err(err)?;
    let n = (t / tau).round() as usize;
    let mut out = psi.clone();
    for _ in 0..n {
        out = stepper.step(&out, tau).map_err(err)?;
    }
    Ok(out)
}

fn temporal_order() -> Outcome {
    let params = ModelParams::new(1, 10.0).map_err(err)?;
    let smooth =
        |grid: &Grid| ComplexField::from_fn(grid, |x| C::from_polar((-0.5 * (x[0] - 1.0).powi(2)).exp(), 0.5 * x[0]));
    let grid = Grid::uniform(1, -16.0, 16.0, 256).map_err(err)?;
    let psi0 = smooth(&grid);
    let t = 1.0;
    let runs = [0.04, 0.02, 0.01]
        .iter()
        .map(|&tau| run_to(&psi0, &params, tau, t))
        .collect::<Result<Vec<_>, _>>()?;
    let e12 = runs[0].max_abs_diff(&runs[1]);
    let e23 = runs[1].max_abs_diff(&runs[2]);
    let order = (e12 / e23).log2();

    // Spatial refinement at the finest step, compared on the coarse nodes.
    let fine_grid = Grid::uniform(1, -16.0, 16.0, 512).map_err(err)?;
    let fine = run_to(&smooth(&fine_grid), &params, 0.01, t)?;
    let coarse = &runs[2];
    let spatial = coarse
        .values()
        .iter()
        .enumerate()
        .map(|(j, z)| (z - fine.values()[[2 * j]]).norm())
        .fold(0.0, f64::max);
    Ok(vec![
        Check::new(
            "6a",
            "TSSP temporal order",
            (order - 2.0).abs() <= 0.2,
            format!("order={order:.3} (diffs {e12:.2e}, {e23:.2e})"),
        ),
        Check::new(
            "6b",
            "TSSP spectral spatial accuracy",
            spatial < e23,
            format!("M 256->512 change={spatial:.2e} < temporal {e23:.2e}"),
        ),
    ])
}

fn width_dynamics() -> Outcome {
    let params = ModelParams::new(1, 0.0).map_err(err)?;
    let grid = Grid::uniform(1, -16.0, 16.0, 512).map_err(err)?;
    let s: f64 = 0.5;
    let norm = (PI * s * s).powf(-0.25);
    let psi0 = ComplexField::from_real_fn(&grid, |x| norm * (-x[0] * x[0] / (2.0 * s * s)).exp());
    // Gaussian of width s: E = 1/(4 s^2) + s^2/4, delta(0) = s^2/2, delta'(0) = 0.
    let e0 = 0.25 / (s * s) + 0.25 * s * s;
    let d0 = 0.5 * s * s;
    let oracle = |t: f64| e0 + (d0 - e0) * (2.0 * t).cos();
    let steps = 20_000;
    let tau = 2.0 * PI / steps as f64;
    let mut stepper = Tssp::new(&grid, &params).map_err(err)?;
    let mut psi = psi0;
    let mut err_max: f64 = 0.0;
    let mut series = vec![(0.0, widths(&psi)[0])];
    for n in 1..=steps {
        psi = stepper.step(&psi, tau).map_err(err)?;
        if n % 10 == 0 {
            let t = n as f64 * tau;
            let w = widths(&psi)[0];
            err_max = err_max.max((w - oracle(t)).abs());
            series.push((t, w));
        }
    }
    // Second minimum of delta_x, refined by a parabola through three samples.
    let i = (1..series.len() - 1)
        .filter(|&i| series[i].0 > 0.5 * PI)
        .min_by(|&a, &b| series[a].1.total_cmp(&series[b].1))
        .ok_or("no samples")?;
    let (t0, y0) = series[i - 1];
    let (t1, y1) = series[i];
    let (_, y2) = series[i + 1];
    let h = t1 - t0;
    let period = t1 + 0.5 * h * (y0 - y2) / (y0 - 2.0 * y1 + y2);
    let dp = (period - PI).abs();
    Ok(vec![Check::new(
        "7",
        "width dynamics beta=0",
        err_max <= 1e-6 && dp <= 1e-3,
        format!("max|delta-oracle|={err_max:.2e} period={period:.6} (|T-pi|={dp:.2e})"),
    )])
}

fn transported() -> Outcome {
    let params = ModelParams::new(1, 100.0).map_err(err)?;
    let grid = Grid::uniform(1, -16.0, 16.0, 512).map_err(err)?;
    let gs = ground_state(&params, &grid, 0.01, 1e-10)?;
    let interp = SineInterpolant::new(&gs.phi).map_err(err)?;
    let shifted = ComplexField::from_fn(&grid, |x| interp.eval(&[x[0] - 1.0]));
    let steps = 8_000;
    let tau = 2.0 * PI / steps as f64;
    let mut stepper = Tssp::new(&grid, &params).map_err(err)?;
    let mut psi = shifted;
    let (mut xc_err, mut rho_err): (f64, f64) = (0.0, 0.0);
    for n in 1..=steps {
        psi = stepper.step(&psi, tau).map_err(err)?;
        let t = n as f64 * tau;
        if n % 20 == 0 {
            xc_err = xc_err.max((center_of_mass(&psi)[0] - t.cos()).abs());
        }
        if n % 800 == 0 {
            let c = t.cos();
            let exact = grid.sample_real(|x| interp.eval(&[x[0] - c]).norm_sqr());
            rho_err = rho_err.max(max_diff(&psi.density(), &exact));
        }
    }
    Ok(vec![Check::new(
        "8",
        "center of mass and transported ground state",
        xc_err <= 1e-4 && rho_err <= 1e-4,
        format!("max|x_c-cos t|={xc_err:.2e} max density error={rho_err:.2e}"),
    )])
}

fn soliton() -> Outcome {
    let params = ModelParams::new(1, -1.0)
        .map_err(err)?
        .with_potential(PotentialKind::Free);
    let grid = Grid::periodic(vec![Axis::new(-32.0, 32.0, 1024).map_err(err)?]).map_err(err)?;
    // A sech(A(x - v t)) exp(i(v x - (v^2 - A^2) t/2)) with A = v = 1, beta = -1.
    let (a, v) = (1.0f64, 1.0f64);
    let exact = |x: f64, t: f64| C::from_polar(a / (a * (x - v * t)).cosh(), v * x - 0.5 * (v * v - a * a) * t);
    let psi0 = ComplexField::from_fn(&grid, |x| exact(x[0], 0.0));
    let t_final = 5.0;
    let psi = run_to(&psi0, &params, 1e-3, t_final)?;
    let reference = ComplexField::from_fn(&grid, |x| exact(x[0], t_final));
    let profile = psi.max_abs_diff(&reference);
    let dm = (mass(&psi) - 2.0).abs();
    Ok(vec![Check::new(
        "9",
        "bright soliton on a periodic box",
        profile <= 1e-4 && dm <= 1e-8,
        format!("profile error={profile:.2e} |N-2|={dm:.2e}"),
    )])
}

fn rotating() -> Outcome {
    let base = ModelParams::new(2, 100.0).map_err(err)?;
    let rot = base.clone().with_omega(0.5);
    // The unsettled cloud breathes out past r = 8, so the box is wider than
    // the ground-state default.
    let grid = Grid::uniform(2, -12.0, 12.0, 128).map_err(err)?;
    let asym = ComplexField::from_fn(&grid, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        C::new(x[0] + 0.5, x[1]) * (-0.25 * r2).exp()
    });
    let asym = gpe_core::normalize(&asym).map_err(err)?;
    let config = EvolveConfig::new(5e-3, 5.0, 50).with_scheme(Scheme::GpeRotating);
    let traj = evolve(&asym, &rot, &config).map_err(err)?;
    let lz: Vec<f64> = traj.records.iter().filter_map(|r| r.lz).collect();
    let lz_drift = lz.iter().map(|l| (l - lz[0]).abs()).fold(0.0, f64::max);

    let radial = ComplexField::from_real_fn(&grid, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        (1.0 + 0.2 * r2) * (-0.3 * r2).exp()
    });
    let radial = gpe_core::normalize(&radial).map_err(err)?;
    let still = evolve(&radial, &base, &EvolveConfig::new(5e-3, 5.0, 1000)).map_err(err)?;
    let spun = evolve(&radial, &rot, &config).map_err(err)?;
    let lab = to_eulerian(&spun.final_field, spun.final_time, 0.5).map_err(err)?;
    let agree = max_diff(&lab.density(), &still.final_field.density());
    Ok(vec![
        Check::new(
            "10a",
            "angular momentum conservation Omega=0.5",
            lz_drift <= 1e-5,
            format!("<L_z>(0)={:.6} max drift={lz_drift:.2e}", lz[0]),
        ),
        Check::new(
            "10b",
            "rotating Lagrangian to Eulerian consistency",
            agree <= 1e-6,
            format!("max density difference={agree:.2e}"),
        ),
    ])
}

/// `u(r) = (1/r) int_0^r rho s^2 ds + int_r^inf rho s ds` by composite Simpson.
fn radial_potential(r: f64, rho: impl Fn(f64) -> f64) -> f64 {
    let simpson = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize| {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    };
    let inner = if r == 0.0 {
        0.0
    } else {
        simpson(&|s| rho(s) * s * s, 0.0, r, 2000) / r
    };
    let outer = simpson(&|s| rho(s) * s, r, r.max(14.0), 4000);
    if r == 0.0 {
        outer
    } else {
        inner + outer
    }
}

fn dipolar() -> Outcome {
    let grid = Grid::uniform(3, -8.0, 8.0, 64).map_err(err)?;
    let dip = DipoleParams::new(1.0, [0.0, 0.0, 1.0], KernelMode::ThreeD).map_err(err)?;
    let solver = DipolarSolver::new(&grid, &dip, 1.0, 1.0).map_err(err)?;
    let amp = (2.0 * PI).powf(-1.5);
    let rho_r = |r: f64| amp * (-0.5 * r * r).exp();
    let density = grid.sample_real(|x| rho_r(x.iter().map(|v| v * v).sum::<f64>().sqrt()));
    let u = solver.poisson(&density);
    let mut err_erf: f64 = 0.0;
    let mut err_quad: f64 = 0.0;
    // Quadrature oracle on a subset of radii, closed form everywhere.
    let erf_u = |r: f64| {
        if r < 1e-12 {
            amp * 1.0
        } else {
            statrs::function::erf::erf(r / 2f64.sqrt()) / (4.0 * PI * r)
        }
    };
    for (ix, v) in u.indexed_iter() {
        let x = grid.coords(&[ix[0], ix[1], ix[2]]);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        err_erf = err_erf.max((v - erf_u(r)).abs());
        if ix[1] == 32 && ix[2] == 32 {
            err_quad = err_quad.max((v - radial_potential(r, rho_r)).abs());
        }
    }

    // Decomposition identity on a random periodic density:
    // ddi = -1 - 3 L_n-symbol * G-symbol, away from the zero mode.
    let pgrid = Grid::periodic(vec![Axis::new(-4.0, 4.0, 16).map_err(err)?; 3]).map_err(err)?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut max_id: f64 = 0.0;
    for _ in 0..3 {
        let rho = ndarray::ArrayD::from_shape_fn(ndarray::IxDyn(&pgrid.shape()), |_| rng.gen::<f64>());
        let mean = rho.mean().unwrap_or(0.0);
        let n = {
            let v = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
            let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / l, v[1] / l, v[2] / l]
        };
        let lhs = apply_fourier_symbol(&pgrid, &rho, |xi| ddi_symbol(xi, &n));
        let lnn = apply_fourier_symbol(&pgrid, &rho, |xi| {
            lnn_symbol(xi, &n, KernelMode::ThreeD) * dipolar_kernel_hat(xi, KernelMode::ThreeD)
        });
        for ((l, r), q) in lhs.iter().zip(&rho).zip(&lnn) {
            max_id = max_id.max((l - (-(r - mean) - 3.0 * q)).abs());
        }
    }
    Ok(vec![
        Check::new(
            "11a",
            "dipolar Poisson solve vs radial solution (64^3)",
            err_erf <= 1e-5 && err_quad <= 1e-5,
            format!("erf oracle error={err_erf:.2e} quadrature oracle error={err_quad:.2e}"),
        ),
        Check::new(
            "11b",
            "dipolar Fourier decomposition identity",
            max_id <= 1e-10,
            format!("max residual={max_id:.2e}"),
        ),
    ])
}

fn cgpe_params(rabi: f64) -> Result<ModelParams, String> {
    let so = SpinOrbitParams {
        k0: 1.0,
        delta: 0.5,
        rabi,
        beta11: 10.0,
        beta12: 8.0,
        beta22: 10.0,
    };
    Ok(ModelParams::new(1, 10.0).map_err(err)?.with_spin_orbit(so))
}

fn cgpe_initial() -> Result<ComplexFieldPair, String> {
    let grid = Grid::uniform(1, -16.0, 16.0, 256).map_err(err)?;
    let a = (2.0 * PI.sqrt()).sqrt().recip();
    let first = ComplexField::from_real_fn(&grid, |x| a * (-0.5 * x[0] * x[0]).exp());
    let second = ComplexField::from_fn(&grid, |x| {
        C::from_polar(a * (-0.5 * (x[0] - 0.5).powi(2)).exp(), 0.3 * x[0])
    });
    ComplexFieldPair::new(
        embed_periodic(&first, 2).map_err(err)?,
        embed_periodic(&second, 2).map_err(err)?,
    )
    .map_err(err)
}

fn cgpe() -> Outcome {
    let pair = cgpe_initial()?;
    let mut checks = Vec::new();

    let mut mass_drift: f64 = 0.0;
    for form in [CgpeForm::Original, CgpeForm::PhaseTransformed] {
        let traj = evolve_cgpe(&pair, &cgpe_params(1.0)?, &EvolveConfig::new(1e-3, 1.0, 100), form).map_err(err)?;
        let m0 = traj.records[0].mass;
        mass_drift = traj.records.iter().fold(mass_drift, |m, r| m.max((r.mass - m0).abs()));
    }
    checks.push(Check::new(
        "12a",
        "CGPE total mass over 1000 steps",
        mass_drift <= 1e-12,
        format!("max drift={mass_drift:.2e}"),
    ));

    let traj = evolve_cgpe(
        &pair,
        &cgpe_params(0.0)?,
        &EvolveConfig::new(1e-3, 1.0, 100),
        CgpeForm::Original,
    )
    .map_err(err)?;
    let c0 = traj.records[0].component_mass.ok_or("missing component masses")?;
    let comp = traj
        .records
        .iter()
        .filter_map(|r| r.component_mass)
        .map(|c| (c[0] - c0[0]).abs().max((c[1] - c0[1]).abs()))
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "12b",
        "CGPE component masses at zero Rabi frequency",
        comp <= 1e-10,
        format!("max drift={comp:.2e}"),
    ));

    let config = EvolveConfig::new(1e-3, 0.05, 10);
    let params = cgpe_params(1.0)?;
    let a = evolve_cgpe(&pair, &params, &config, CgpeForm::Original).map_err(err)?;
    let b = evolve_cgpe(&pair, &params, &config, CgpeForm::PhaseTransformed).map_err(err)?;
    let dual = max_diff(&a.final_pair.first.density(), &b.final_pair.first.density())
        .max(max_diff(&a.final_pair.second.density(), &b.final_pair.second.density()));
    checks.push(Check::new(
        "12c",
        "CGPE original vs phase-transformed densities (50 steps)",
        dual <= 1e-6,
        format!("max density difference={dual:.2e}"),
    ));
    Ok(checks)
}

fn bdg() -> Outcome {
    let mut checks = Vec::new();
    let grid = Grid::uniform(1, -12.0, 12.0, 256).map_err(err)?;
    let params = ModelParams::new(1, 0.0).map_err(err)?;
    let gs = ground_state(&params, &grid, 0.01, 1e-10)?;
    let op = assemble_bdg(&gs.phi, gs.mu_g, &params, Discretization::Spectral).map_err(err)?;
    let freqs = solve_bdg(&op).map_err(err)?.frequencies();
    let low: Vec<f64> = freqs.iter().take(5).copied().collect();
    let stated = (1..=5).map(|k| (low.get(k - 1).copied().unwrap_or(f64::NAN) - 0.5 * k as f64).abs());
    let stated = stated.fold(0.0, f64::max);
    let gaps = (1..=5).map(|k| (low.get(k - 1).copied().unwrap_or(f64::NAN) - k as f64).abs());
    let gaps = gaps.fold(0.0, f64::max);
    let shown = low.iter().map(|w| format!("{w:.8}")).collect::<Vec<_>>().join(", ");
    checks.push(Check::new(
        "13a",
        "BdG beta=0 against targets 0.5, 1.0, ..., 2.5",
        stated <= 1e-6,
        format!("lowest five: [{shown}] max deviation={stated:.2e}"),
    ));
    checks.push(Check::new(
        "13a*",
        "BdG beta=0 against oscillator gaps 1, 2, ..., 5",
        gaps <= 1e-6,
        format!("max deviation={gaps:.2e}"),
    ));

    let params = ModelParams::new(1, 100.0).map_err(err)?;
    let grid = Grid::uniform(1, -12.0, 12.0, 256).map_err(err)?;
    let gs = ground_state(&params, &grid, 0.01, 1e-10)?;
    let op = assemble_bdg(&gs.phi, gs.mu_g, &params, Discretization::Spectral).map_err(err)?;
    let kohn = solve_bdg(&op)
        .map_err(err)?
        .frequencies()
        .first()
        .copied()
        .ok_or("no modes")?;

    // x_c oscillation after a small momentum kick, frequency from the
    // spacing of upward zero crossings.
    let kicked = gs.phi.map(|x, z| z * C::from_polar(1.0, 0.01 * x[0]));
    let tau = 1e-3;
    let mut stepper = Tssp::new(&grid, &params).map_err(err)?;
    let mut psi = kicked;
    let mut prev = center_of_mass(&psi)[0];
    let mut crossings = Vec::new();
    for n in 1..=13_000 {
        psi = stepper.step(&psi, tau).map_err(err)?;
        let xc = center_of_mass(&psi)[0];
        if prev < 0.0 && xc >= 0.0 {
            let t = (n as f64 - xc / (xc - prev)) * tau;
            crossings.push(t);
        }
        prev = xc;
    }
    let xc_freq = if crossings.len() >= 2 {
        2.0 * PI * (crossings.len() - 1) as f64 / (crossings[crossings.len() - 1] - crossings[0])
    } else {
        f64::NAN
    };
    let ok = (kohn - 1.0).abs() <= 0.01 && (xc_freq - 1.0).abs() <= 0.01 && (kohn - xc_freq).abs() <= 0.01;
    checks.push(Check::new(
        "13b",
        "BdG beta=100 dipole mode vs x_c oscillation",
        ok,
        format!("BdG omega={kohn:.6} x_c frequency={xc_freq:.6}"),
    ));
    Ok(checks)
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("1", linear_1d),
        ("2", linear_2d),
        ("3", thomas_fermi),
        ("5", conservation),
        ("6", temporal_order),
        ("7", width_dynamics),
        ("8", transported),
        ("9", soliton),
        ("10", rotating),
        ("11", dipolar),
        ("12", cgpe),
        ("13", bdg),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = 0;
    for (id, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let checks = match run() {
            Ok(c) => c,
            Err(e) => vec![Check::new(id, "criterion setup", false, format!("error: {e}"))],
        };
        for c in checks {
            let known = KNOWN_FAILURES.contains(&c.id);
            let status = match (c.pass, known) {
                (true, _) => "PASS",
                (false, true) => "FAIL (known)",
                (false, false) => "FAIL",
            };
            if !c.pass && !known {
                unexpected += 1;
            }
            println!("[{status}] {:<5} {} :: {}", c.id, c.name, c.detail);
        }
        log_time(id, start);
    }
    if unexpected > 0 {
        println!("{unexpected} acceptance check(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn log_time(id: &str, start: Instant) {
    println!("        criterion {id} ran in {:.1}s", start.elapsed().as_secs_f64());
}
