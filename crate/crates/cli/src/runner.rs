//! Solver dispatch and artifact persistence.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gpe_core::bogoliubov::{assemble_bdg, mode_residual, solve_bdg, BdgSpectrum};
use gpe_core::dynamics::{embed_periodic, evolve, evolve_cgpe, CgpeForm, EvolveConfig, Scheme, Trajectory};
use gpe_core::ground_state::{
    solve_ground_state, solve_ground_state_rotating, GfdnConfig, GroundStateResult, InitialGuess,
};
use gpe_core::io::{load_field, save_field, Precision};
use gpe_core::observables::{angular_momentum, mass, widths, write_csv, EnergyBreakdown, ObservableRecord};
use gpe_core::oracles::BrightSoliton;
use gpe_core::spectral::SineInterpolant;
use gpe_core::{normalize, Axis, ComplexField, ComplexFieldPair, Grid, ModelParams};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ConfigErrors, ExperimentConfig, GridSpec, GuessSpec, InitialSpec, Mode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;
pub const EXIT_BLOW_UP: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Solver(#[from] gpe_core::Error),
    #[error("i/o failure on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot serialize the summary: {0}")]
    Json(#[from] serde_json::Error),
    #[error("dynamical instability: {0}")]
    Unstable(String),
    #[error("cannot start worker threads: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        use gpe_core::Error as E;
        match self {
            RunError::Config(_) => EXIT_INVALID,
            RunError::Solver(e) => match e {
                E::InvalidInput(_)
                | E::ShapeMismatch { .. }
                | E::ZeroNorm(_)
                | E::UnsupportedDimension { .. }
                | E::Nonexistence(_) => EXIT_INVALID,
                E::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
                E::NumericalFailure { .. } | E::BlowUp { .. } => EXIT_BLOW_UP,
                E::Io(_) | E::Format(_) => EXIT_IO,
            },
            RunError::Unstable(_) => EXIT_BLOW_UP,
            RunError::Io { .. } | RunError::Json(_) | RunError::Threads(_) => EXIT_IO,
        }
    }

    pub fn kind(&self) -> &'static str {
        use gpe_core::Error as E;
        match self {
            RunError::Config(_) => "invalid-config",
            RunError::Solver(E::Nonexistence(_)) => "nonexistence",
            RunError::Solver(E::NonConvergence { .. }) => "non-convergence",
            RunError::Solver(E::BlowUp { .. }) => "blow-up",
            RunError::Solver(E::NumericalFailure { .. }) => "numerical-failure",
            RunError::Solver(E::Io(_) | E::Format(_)) => "io",
            RunError::Solver(_) => "invalid-input",
            RunError::Unstable(_) => "unstable",
            RunError::Io { .. } | RunError::Json(_) | RunError::Threads(_) => "io",
        }
    }

    /// Individual messages; configuration errors keep their list form.
    pub fn messages(&self) -> Vec<String> {
        match self {
            RunError::Config(c) => c.0.clone(),
            other => vec![other.to_string()],
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Single-threaded, and no wall-clock figures in the summary, so reruns
    /// reproduce every artifact byte for byte.
    pub deterministic: bool,
    pub threads: Option<usize>,
}

#[derive(Debug, Serialize)]
struct ErrorReport {
    kind: &'static str,
    messages: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    mode: Mode,
    status: &'static str,
    exit_code: i32,
    config: Option<&'a ExperimentConfig>,
    results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<ErrorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_seconds: Option<f64>,
}

/// Writes `summary.json` for a run that failed before a config was available.
pub fn write_failure_summary(mode: Mode, out: &Path, err: &RunError) -> Result<(), RunError> {
    let summary = Summary {
        mode,
        status: "error",
        exit_code: err.exit_code(),
        config: None,
        results: Value::Null,
        error: Some(ErrorReport {
            kind: err.kind(),
            messages: err.messages(),
        }),
        elapsed_seconds: None,
    };
    write_summary(out, &summary)
}

/// Runs one experiment, writes its artifacts and summary, and returns the
/// process exit status.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<i32, RunError> {
    create_dir(&opts.out)?;
    let start = Instant::now();
    let mut results = Value::Null;
    let outcome = dispatch(config, opts, &mut results);
    let elapsed = (!opts.deterministic).then(|| start.elapsed().as_secs_f64());
    let (status, code, error) = match &outcome {
        Ok(()) => ("ok", EXIT_OK, None),
        Err(e) => (
            "error",
            e.exit_code(),
            Some(ErrorReport {
                kind: e.kind(),
                messages: e.messages(),
            }),
        ),
    };
    let summary = Summary {
        mode: config.mode,
        status,
        exit_code: code,
        config: Some(config),
        results,
        error,
        elapsed_seconds: elapsed,
    };
    write_summary(&opts.out, &summary)?;
    if let Err(e) = outcome {
        log::error!("{e}");
    }
    Ok(code)
}

fn dispatch(config: &ExperimentConfig, opts: &RunOptions, results: &mut Value) -> Result<(), RunError> {
    let out = opts.out.as_path();
    let grid = build_grid(&config.grid)?;
    let params = config.model.params();
    match config.mode {
        Mode::Groundstate | Mode::GroundstateRotating => {
            let res = ground_state(config, &params, &grid)?;
            save(out, "ground_state.bin", &res.phi)?;
            *results = ground_state_report(&res)?;
            Ok(())
        }
        Mode::Evolve | Mode::EvolveRotating | Mode::EvolveDipolar => {
            let psi0 = initial_data(config, &params, &grid)?;
            let traj = evolve(&psi0, &params, &evolve_config(config, config_tau(config)))?;
            *results = persist_trajectory(out, &params, &traj)?;
            Ok(())
        }
        Mode::EvolveCgpe => run_cgpe(config, &params, &grid, out, results),
        Mode::Bdg => run_bdg(config, &params, &grid, out, results),
        Mode::ConvergenceStudy => run_convergence(config, &params, &grid, opts, results),
    }
}

pub fn build_grid(spec: &GridSpec) -> Result<Grid, RunError> {
    let axes = (0..spec.lower.len())
        .map(|k| Axis::new(spec.lower[k], spec.upper[k], spec.intervals[k]))
        .collect::<gpe_core::Result<Vec<_>>>()?;
    Ok(Grid::with_boundary(axes, spec.boundary)?)
}

fn ground_state(config: &ExperimentConfig, params: &ModelParams, grid: &Grid) -> Result<GroundStateResult, RunError> {
    let gs = config
        .groundstate
        .as_ref()
        .expect("ground-state modes always resolve a [groundstate] section");
    let initial = match &gs.initial {
        GuessSpec::Auto => InitialGuess::Auto,
        GuessSpec::Gaussian => InitialGuess::Gaussian,
        GuessSpec::ThomasFermi => InitialGuess::ThomasFermi,
        GuessSpec::Vortex { winding } => InitialGuess::Vortex { winding: *winding },
        GuessSpec::Field { path } => InitialGuess::Field(load_on(path, grid)?),
    };
    let cfg = GfdnConfig {
        tau: gs.tau,
        stop_tol: gs.stop_tol,
        max_iter: gs.max_iter,
        initial,
        discretization: gs.discretization,
        record_energy: false,
    };
    let res = if params.omega != 0.0 || config.mode == Mode::GroundstateRotating {
        solve_ground_state_rotating(params, grid, &cfg)?
    } else {
        solve_ground_state(params, grid, &cfg)?
    };
    log::info!(
        "ground state after {} iterations: E = {:.12}, mu = {:.12}",
        res.iterations,
        res.e_g,
        res.mu_g
    );
    Ok(res)
}

#[derive(Serialize)]
struct GroundStateReport {
    e_g: f64,
    mu_g: f64,
    energy: EnergyBreakdown,
    iterations: usize,
    residual: f64,
    eigen_residual: f64,
    virial_residual: f64,
    mass: f64,
    widths: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lz: Option<f64>,
}

fn ground_state_report(res: &GroundStateResult) -> Result<Value, RunError> {
    let lz = match res.phi.grid().dim() {
        1 => None,
        _ => Some(angular_momentum(&res.phi)?),
    };
    Ok(serde_json::to_value(GroundStateReport {
        e_g: res.e_g,
        mu_g: res.mu_g,
        energy: res.energy,
        iterations: res.iterations,
        residual: res.residual,
        eigen_residual: res.eigen_residual,
        virial_residual: res.virial_residual(),
        mass: mass(&res.phi),
        widths: widths(&res.phi),
        lz,
    })?)
}

fn load_on(path: &Path, grid: &Grid) -> Result<ComplexField, RunError> {
    let f = load_field(path)?;
    if f.grid() != grid {
        return Err(gpe_core::Error::InvalidInput(format!(
            "field in {} lives on a different grid than the configured one",
            path.display()
        ))
        .into());
    }
    Ok(f)
}

/// Initial wave function on `grid` from the `[initial]` section.
fn initial_data(config: &ExperimentConfig, params: &ModelParams, grid: &Grid) -> Result<ComplexField, RunError> {
    let spec = config.initial.as_ref().expect("dynamic modes always resolve [initial]");
    let field = match spec {
        InitialSpec::GroundState { beta, shift, velocity } => {
            let contact = ModelParams {
                beta: *beta,
                omega: 0.0,
                dipole: None,
                spin_orbit: None,
                ..params.clone()
            };
            let phi = ground_state(config, &contact, grid)?.phi;
            let moved = if shift.iter().any(|s| *s != 0.0) {
                let interp = SineInterpolant::new(&phi)?;
                ComplexField::from_fn(grid, |x| {
                    let y: Vec<f64> = x.iter().zip(shift).map(|(a, s)| a - s).collect();
                    interp.eval(&y)
                })
            } else {
                phi
            };
            kick(&moved, velocity)
        }
        InitialSpec::Gaussian {
            center,
            width,
            velocity,
        } => {
            let g = ComplexField::from_real_fn(grid, |x| {
                let q: f64 = x
                    .iter()
                    .zip(center)
                    .zip(width)
                    .map(|((a, c), w)| ((a - c) / w).powi(2))
                    .sum();
                (-0.5 * q).exp()
            });
            kick(&normalize(&g)?, velocity)
        }
        InitialSpec::Soliton {
            amplitude,
            velocity,
            position,
            phase,
        } => {
            let s = BrightSoliton::new(*amplitude, *velocity, *position, *phase, params.beta)?;
            ComplexField::from_fn(grid, |x| s.eval(x[0], 0.0))
        }
        InitialSpec::Field { path } => load_on(path, grid)?,
    };
    Ok(field)
}

/// Multiplies by the plane wave `exp(i v . x)`.
fn kick(field: &ComplexField, velocity: &[f64]) -> ComplexField {
    if velocity.iter().all(|v| *v == 0.0) {
        return field.clone();
    }
    field.map(|x, z| {
        let phase: f64 = x.iter().zip(velocity).map(|(a, v)| a * v).sum();
        z * Complex64::from_polar(1.0, phase)
    })
}

fn config_tau(config: &ExperimentConfig) -> f64 {
    config.evolve.as_ref().map_or(0.0, |e| e.tau)
}

fn evolve_config(config: &ExperimentConfig, tau: f64) -> EvolveConfig {
    let e = config.evolve.as_ref().expect("dynamic modes always resolve [evolve]");
    let scheme = match config.mode {
        Mode::EvolveRotating => Scheme::GpeRotating,
        Mode::EvolveDipolar => Scheme::GpeDipolar,
        Mode::EvolveCgpe => Scheme::CgpeSpinorbit,
        _ => Scheme::Gpe,
    };
    EvolveConfig {
        snapshot_stride: e.snapshot_stride,
        mass_tol: e.mass_tol,
        resolution_tol: e.resolution_tol,
        ..EvolveConfig::new(tau, e.t_final, e.stride).with_scheme(scheme)
    }
}

#[derive(Serialize)]
struct TrajectoryReport {
    records: usize,
    final_time: f64,
    mass_drift: f64,
    energy_drift: f64,
    initial: Option<ObservableRecord>,
    last: Option<ObservableRecord>,
    snapshots: Vec<String>,
}

fn mass_drift(records: &[ObservableRecord]) -> f64 {
    let m0 = records.first().map_or(0.0, |r| r.mass);
    records.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max)
}

fn persist_trajectory(out: &Path, params: &ModelParams, traj: &Trajectory) -> Result<Value, RunError> {
    write_records(out, "observables.csv", params.dim, &traj.records)?;
    save(out, "final.bin", &traj.final_field)?;
    let mut names = Vec::new();
    if !traj.snapshots.is_empty() {
        create_dir(&out.join("snapshots"))?;
        for (i, (_, field)) in traj.snapshots.iter().enumerate() {
            let name = format!("snapshots/{i:05}.bin");
            save(out, &name, field)?;
            names.push(name);
        }
    }
    Ok(serde_json::to_value(TrajectoryReport {
        records: traj.records.len(),
        final_time: traj.final_time,
        mass_drift: mass_drift(&traj.records),
        energy_drift: traj.energy_drift,
        initial: traj.records.first().cloned(),
        last: traj.records.last().cloned(),
        snapshots: names,
    })?)
}

fn run_cgpe(
    config: &ExperimentConfig,
    params: &ModelParams,
    grid: &Grid,
    out: &Path,
    results: &mut Value,
) -> Result<(), RunError> {
    let evolve_spec = config.evolve.as_ref().expect("evolve-cgpe resolves [evolve]");
    let psi = initial_data(config, params, grid)?;
    let psi = if grid.is_periodic() {
        psi
    } else {
        embed_periodic(&psi, evolve_spec.pad.unwrap_or(2))?
    };
    let f = config.fraction.unwrap_or(0.5);
    let pair = ComplexFieldPair::new(
        psi.scaled(Complex64::new(f.sqrt(), 0.0)),
        psi.scaled(Complex64::new((1.0 - f).sqrt(), 0.0)),
    )?;
    let form = evolve_spec.form.unwrap_or(CgpeForm::Original);
    let traj = evolve_cgpe(&pair, params, &evolve_config(config, evolve_spec.tau), form)?;
    write_records(out, "observables.csv", params.dim, &traj.records)?;
    let mut components = String::from("t,N1,N2\n");
    for r in &traj.records {
        let [n1, n2] = r.component_mass.unwrap_or([f64::NAN; 2]);
        components.push_str(&format!("{:e},{n1:e},{n2:e}\n", r.t));
    }
    write_text(out, "components.csv", &components)?;
    save(out, "final_1.bin", &traj.final_pair.first)?;
    save(out, "final_2.bin", &traj.final_pair.second)?;
    *results = json!({
        "records": traj.records.len(),
        "final_time": traj.final_time,
        "mass_drift": mass_drift(&traj.records),
        "energy_drift": traj.energy_drift,
        "initial": traj.records.first(),
        "last": traj.records.last(),
    });
    Ok(())
}

#[derive(Serialize)]
struct BdgReport {
    e_g: f64,
    mu_g: f64,
    eigen_residual: f64,
    modes: usize,
    lowest: Vec<f64>,
    zero_modes: Vec<f64>,
    unstable: Vec<f64>,
    max_norm_defect: f64,
    max_mode_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    domain_check: Option<DomainCheck>,
}

/// Lowest frequencies on the configured domain and on one of twice the
/// extent at the same spacing; reported, not asserted.
#[derive(Serialize)]
struct DomainCheck {
    doubled_lowest: Vec<f64>,
    max_shift: f64,
}

fn bdg_spectrum(
    config: &ExperimentConfig,
    params: &ModelParams,
    grid: &Grid,
) -> Result<(GroundStateResult, BdgSpectrum, f64), RunError> {
    let gs = ground_state(config, params, grid)?;
    let disc = config
        .groundstate
        .as_ref()
        .map(|g| g.discretization)
        .unwrap_or_default();
    let op = assemble_bdg(&gs.phi, gs.mu_g, params, disc)?;
    let spec = solve_bdg(&op)?;
    let worst = spec.modes.iter().map(|m| mode_residual(&op, m)).fold(0.0, f64::max);
    Ok((gs, spec, worst))
}

fn run_bdg(
    config: &ExperimentConfig,
    params: &ModelParams,
    grid: &Grid,
    out: &Path,
    results: &mut Value,
) -> Result<(), RunError> {
    let bdg = config.bdg.as_ref().expect("bdg mode resolves [bdg]");
    let (gs, spec, worst) = bdg_spectrum(config, params, grid)?;
    save(out, "ground_state.bin", &gs.phi)?;
    write_text(out, "modes.csv", &spec.mode_table())?;
    for (k, mode) in spec.modes.iter().take(bdg.dump_modes).enumerate() {
        save(out, &format!("mode_{k:03}_u.bin"), &mode.u)?;
        save(out, &format!("mode_{k:03}_v.bin"), &mode.v)?;
    }
    let lowest: Vec<f64> = spec.frequencies().into_iter().take(5).collect();
    let domain_check = if bdg.domain_check {
        let g = &config.grid;
        let doubled = GridSpec {
            lower: g.lower.iter().map(|a| 2.0 * a).collect(),
            upper: g.upper.iter().map(|b| 2.0 * b).collect(),
            intervals: g.intervals.iter().map(|m| 2 * m).collect(),
            boundary: g.boundary,
        };
        let (_, wide, _) = bdg_spectrum(config, params, &build_grid(&doubled)?)?;
        let doubled_lowest: Vec<f64> = wide.frequencies().into_iter().take(5).collect();
        let max_shift = lowest
            .iter()
            .zip(&doubled_lowest)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Some(DomainCheck {
            doubled_lowest,
            max_shift,
        })
    } else {
        None
    };
    *results = serde_json::to_value(BdgReport {
        e_g: gs.e_g,
        mu_g: gs.mu_g,
        eigen_residual: gs.eigen_residual,
        modes: spec.modes.len(),
        lowest,
        zero_modes: spec.zero_modes.clone(),
        unstable: spec.unstable.iter().map(|z| z.im).collect(),
        max_norm_defect: spec.modes.iter().map(|m| m.norm_defect.abs()).fold(0.0, f64::max),
        max_mode_residual: worst,
        domain_check,
    })?;
    if !spec.unstable.is_empty() {
        return Err(RunError::Unstable(format!(
            "{} purely imaginary BdG frequencies",
            spec.unstable.len()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ConvergenceRun {
    tau: f64,
    directory: String,
    mass_drift: f64,
    energy_drift: f64,
    final_energy: f64,
}

#[derive(Serialize)]
struct ConvergenceReport {
    runs: Vec<ConvergenceRun>,
    /// `max |psi_tau_i - psi_tau_{i+1}|` at the final time.
    differences: Vec<f64>,
    /// `log(d_i / d_{i+1}) / log(tau_i / tau_{i+1})`.
    orders: Vec<f64>,
    order: f64,
}

/// Temporal order from successive differences of the final fields.
pub fn observed_orders(taus: &[f64], finals: &[ComplexField]) -> (Vec<f64>, Vec<f64>) {
    let diffs: Vec<f64> = finals.windows(2).map(|p| p[0].max_abs_diff(&p[1])).collect();
    let orders = diffs
        .windows(2)
        .zip(taus.windows(2))
        .map(|(d, t)| (d[0] / d[1]).ln() / (t[0] / t[1]).ln())
        .collect();
    (diffs, orders)
}

fn run_convergence(
    config: &ExperimentConfig,
    params: &ModelParams,
    grid: &Grid,
    opts: &RunOptions,
    results: &mut Value,
) -> Result<(), RunError> {
    let taus = &config
        .convergence
        .as_ref()
        .expect("convergence mode resolves [convergence]")
        .taus;
    let psi0 = initial_data(config, params, grid)?;
    let threads = if opts.deterministic {
        1
    } else {
        opts.threads.unwrap_or(0)
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let runs: Vec<Result<(ConvergenceRun, ComplexField), RunError>> = pool.install(|| {
        taus.par_iter()
            .enumerate()
            .map(|(i, &tau)| {
                let dir = format!("tau_{i}");
                let sub = opts.out.join(&dir);
                create_dir(&sub)?;
                let traj = evolve(&psi0, params, &evolve_config(config, tau))?;
                write_records(&sub, "observables.csv", params.dim, &traj.records)?;
                save(&sub, "final.bin", &traj.final_field)?;
                let run = ConvergenceRun {
                    tau,
                    directory: dir,
                    mass_drift: mass_drift(&traj.records),
                    energy_drift: traj.energy_drift,
                    final_energy: traj.records.last().map_or(f64::NAN, |r| r.energy.total),
                };
                Ok((run, traj.final_field))
            })
            .collect()
    });
    let (runs, finals): (Vec<_>, Vec<_>) = runs.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter().unzip();
    let (differences, orders) = observed_orders(taus, &finals);
    let order = orders.last().copied().unwrap_or(f64::NAN);
    log::info!("observed temporal order {order:.3}");
    *results = serde_json::to_value(ConvergenceReport {
        runs,
        differences,
        orders,
        order,
    })?;
    Ok(())
}

fn create_dir(path: &Path) -> Result<(), RunError> {
    fs::create_dir_all(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn save(dir: &Path, name: &str, field: &ComplexField) -> Result<(), RunError> {
    save_field(&dir.join(name), field, Precision::Complex128)?;
    Ok(())
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), RunError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|source| RunError::Io { path, source })
}

fn write_records(dir: &Path, name: &str, dim: usize, records: &[ObservableRecord]) -> Result<(), RunError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, dim, records)?;
    let path = dir.join(name);
    fs::write(&path, buf).map_err(|source| RunError::Io { path, source })
}

fn write_summary(out: &Path, summary: &Summary) -> Result<(), RunError> {
    create_dir(out)?;
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    write_text(out, "summary.json", &text)
}
