//! Experiment configuration: a TOML document with one section per parameter
//! group. Parsing walks the document by hand so that every problem is
//! reported, not just the first one serde would stop at.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gpe_core::dynamics::CgpeForm;
use gpe_core::ground_state::{default_tau, domain_half_widths, Discretization};
use gpe_core::model::beta_from_kappa;
use gpe_core::{Boundary, DipoleParams, KernelMode, ModelParams, PotentialKind, SpinOrbitParams, TrapParams};
use serde::Serialize;
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Groundstate,
    GroundstateRotating,
    Evolve,
    EvolveRotating,
    EvolveDipolar,
    EvolveCgpe,
    Bdg,
    ConvergenceStudy,
}

impl Mode {
    pub const ALL: [Mode; 8] = [
        Mode::Groundstate,
        Mode::GroundstateRotating,
        Mode::Evolve,
        Mode::EvolveRotating,
        Mode::EvolveDipolar,
        Mode::EvolveCgpe,
        Mode::Bdg,
        Mode::ConvergenceStudy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Groundstate => "groundstate",
            Mode::GroundstateRotating => "groundstate-rotating",
            Mode::Evolve => "evolve",
            Mode::EvolveRotating => "evolve-rotating",
            Mode::EvolveDipolar => "evolve-dipolar",
            Mode::EvolveCgpe => "evolve-cgpe",
            Mode::Bdg => "bdg",
            Mode::ConvergenceStudy => "convergence-study",
        }
    }

    pub fn is_dynamic(self) -> bool {
        matches!(
            self,
            Mode::Evolve | Mode::EvolveRotating | Mode::EvolveDipolar | Mode::EvolveCgpe | Mode::ConvergenceStudy
        )
    }

    /// Sections that must be present for this mode.
    fn required_sections(self) -> &'static [&'static str] {
        match self {
            Mode::Groundstate | Mode::GroundstateRotating | Mode::Bdg => &["model"],
            Mode::Evolve | Mode::EvolveRotating | Mode::EvolveDipolar | Mode::EvolveCgpe => {
                &["model", "evolve", "initial"]
            }
            Mode::ConvergenceStudy => &["model", "evolve", "initial", "convergence"],
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

/// All problems found in a configuration.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
pub struct ConfigErrors(pub Vec<String>);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub intervals: Vec<usize>,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub dimension: usize,
    pub beta: f64,
    /// Set when the interaction was given as the 3D coupling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub gamma_y: f64,
    pub gamma_z: f64,
    pub omega: f64,
    pub epsilon: f64,
    pub potential: PotentialKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dipole: Option<DipoleParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin_orbit: Option<SpinOrbitParams>,
}

impl ModelSpec {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            dim: self.dimension,
            beta: self.beta,
            trap: TrapParams {
                gamma_y: self.gamma_y,
                gamma_z: self.gamma_z,
            },
            potential: self.potential,
            omega: self.omega,
            epsilon: self.epsilon,
            dipole: self.dipole,
            spin_orbit: self.spin_orbit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum GuessSpec {
    Auto,
    Gaussian,
    ThomasFermi,
    Vortex { winding: i32 },
    Field { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundStateSpec {
    pub tau: f64,
    pub stop_tol: f64,
    pub max_iter: usize,
    pub discretization: Discretization,
    pub initial: GuessSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveSpec {
    pub tau: f64,
    pub t_final: f64,
    pub stride: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,
    pub mass_tol: f64,
    pub resolution_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<CgpeForm>,
    /// Periodic padding factor applied to Dirichlet-grid data in CGPE runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pad: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InitialSpec {
    /// Ground state of the contact model (interaction `beta`), shifted by
    /// `shift` and kicked with momentum `velocity`.
    GroundState {
        beta: f64,
        shift: Vec<f64>,
        velocity: Vec<f64>,
    },
    Gaussian {
        center: Vec<f64>,
        width: Vec<f64>,
        velocity: Vec<f64>,
    },
    Soliton {
        amplitude: f64,
        velocity: f64,
        position: f64,
        phase: f64,
    },
    Field {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BdgSpec {
    /// Number of lowest modes whose `u` and `v` are dumped.
    pub dump_modes: usize,
    /// Re-solve on a domain of twice the extent and report the shift of the
    /// lowest five frequencies.
    pub domain_check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSpec {
    pub taus: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub grid: GridSpec,
    pub model: ModelSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groundstate: Option<GroundStateSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
    /// Share of the initial profile in the first component (CGPE only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bdg: Option<BdgSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSpec>,
    /// Output directory named in the file; the command line overrides it.
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

const TOP_KEYS: &[&str] = &[
    "mode",
    "output",
    "grid",
    "model",
    "groundstate",
    "evolve",
    "initial",
    "bdg",
    "convergence",
];
const GRID_KEYS: &[&str] = &["lower", "upper", "intervals", "boundary"];
const MODEL_KEYS: &[&str] = &[
    "dimension",
    "beta",
    "kappa",
    "gamma_y",
    "gamma_z",
    "omega",
    "epsilon",
    "potential",
    "dipole",
    "spin_orbit",
];
const DIPOLE_KEYS: &[&str] = &["lambda", "axis", "mode"];
const SO_KEYS: &[&str] = &["k0", "delta", "rabi", "beta11", "beta12", "beta22"];
const GS_KEYS: &[&str] = &[
    "tau",
    "stop_tol",
    "max_iter",
    "discretization",
    "initial",
    "winding",
    "path",
];
const EVOLVE_KEYS: &[&str] = &[
    "tau",
    "t_final",
    "stride",
    "snapshot_stride",
    "mass_tol",
    "resolution_tol",
    "form",
    "pad",
];
const INITIAL_KEYS: &[&str] = &[
    "kind",
    "beta",
    "shift",
    "velocity",
    "center",
    "width",
    "amplitude",
    "position",
    "phase",
    "path",
    "fraction",
];
const BDG_KEYS: &[&str] = &["dump_modes", "domain_check"];
const CONVERGENCE_KEYS: &[&str] = &["taus"];

/// Typed access to one TOML table, recording every problem.
struct Section<'a> {
    path: String,
    table: &'a Table,
}

struct Walker {
    errors: Vec<String>,
}

impl Walker {
    fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn section<'a>(&mut self, parent: &Section<'a>, key: &str, known: &[&str]) -> Option<Section<'a>> {
        let path = join(&parent.path, key);
        match parent.table.get(key)? {
            Value::Table(t) => {
                self.unknown_keys(&path, t, known);
                Some(Section { path, table: t })
            }
            other => {
                self.error(format!("`{path}` must be a table, found {}", other.type_str()));
                None
            }
        }
    }

    fn unknown_keys(&mut self, path: &str, table: &Table, known: &[&str]) {
        for key in table.keys() {
            if !known.contains(&key.as_str()) {
                self.error(format!(
                    "unknown key `{}` (expected one of: {})",
                    join(path, key),
                    known.join(", ")
                ));
            }
        }
    }

    fn float(&mut self, s: &Section, key: &str) -> Option<f64> {
        match s.table.get(key)? {
            Value::Float(v) => Some(*v),
            Value::Integer(v) => Some(*v as f64),
            other => {
                self.error(format!(
                    "`{}` must be a number, found {}",
                    join(&s.path, key),
                    other.type_str()
                ));
                None
            }
        }
    }

    fn float_or(&mut self, s: &Section, key: &str, default: f64) -> f64 {
        self.float(s, key).unwrap_or(default)
    }

    fn integer(&mut self, s: &Section, key: &str) -> Option<i64> {
        match s.table.get(key)? {
            Value::Integer(v) => Some(*v),
            other => {
                self.error(format!(
                    "`{}` must be an integer, found {}",
                    join(&s.path, key),
                    other.type_str()
                ));
                None
            }
        }
    }

    fn count(&mut self, s: &Section, key: &str) -> Option<usize> {
        let v = self.integer(s, key)?;
        match usize::try_from(v) {
            Ok(n) => Some(n),
            Err(_) => {
                self.error(format!("`{}` must be nonnegative, got {v}", join(&s.path, key)));
                None
            }
        }
    }

    fn boolean(&mut self, s: &Section, key: &str) -> Option<bool> {
        match s.table.get(key)? {
            Value::Boolean(b) => Some(*b),
            other => {
                self.error(format!(
                    "`{}` must be a boolean, found {}",
                    join(&s.path, key),
                    other.type_str()
                ));
                None
            }
        }
    }

    fn string(&mut self, s: &Section, key: &str) -> Option<String> {
        match s.table.get(key)? {
            Value::String(v) => Some(v.clone()),
            other => {
                self.error(format!(
                    "`{}` must be a string, found {}",
                    join(&s.path, key),
                    other.type_str()
                ));
                None
            }
        }
    }

    fn choice<T: Copy>(&mut self, s: &Section, key: &str, options: &[(&str, T)]) -> Option<T> {
        let v = self.string(s, key)?;
        match options.iter().find(|(name, _)| *name == v) {
            Some((_, t)) => Some(*t),
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.error(format!(
                    "`{}` must be one of {}, got `{v}`",
                    join(&s.path, key),
                    names.join(", ")
                ));
                None
            }
        }
    }

    /// A number, or an array of numbers; a scalar is repeated `dim` times.
    fn per_axis<T: Clone>(
        &mut self,
        s: &Section,
        key: &str,
        dim: usize,
        item: impl Fn(&Value) -> Option<T>,
    ) -> Option<Vec<T>> {
        let path = join(&s.path, key);
        match s.table.get(key)? {
            Value::Array(items) => {
                let parsed: Option<Vec<T>> = items.iter().map(&item).collect();
                match parsed {
                    Some(v) if v.len() == dim => Some(v),
                    Some(v) => {
                        self.error(format!("`{path}` has {} entries, dimension is {dim}", v.len()));
                        None
                    }
                    None => {
                        self.error(format!("`{path}` has entries of the wrong type"));
                        None
                    }
                }
            }
            scalar => match item(scalar) {
                Some(v) => Some(vec![v; dim]),
                None => {
                    self.error(format!(
                        "`{path}` must be a value or an array, found {}",
                        scalar.type_str()
                    ));
                    None
                }
            },
        }
    }

    fn floats(&mut self, s: &Section, key: &str, dim: usize) -> Option<Vec<f64>> {
        self.per_axis(s, key, dim, as_float)
    }

    fn require<T>(&mut self, s: &Section, key: &str, value: Option<T>, why: &str) -> Option<T> {
        if value.is_none() && !s.table.contains_key(key) {
            self.error(format!("missing `{}` ({why})", join(&s.path, key)));
        }
        value
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn as_count(v: &Value) -> Option<usize> {
    match v {
        Value::Integer(i) => usize::try_from(*i).ok(),
        _ => None,
    }
}

/// Parses and validates a configuration for `mode`. A `mode` key in the file,
/// when present, must agree.
pub fn parse_config(text: &str, mode: Mode) -> Result<ExperimentConfig, ConfigErrors> {
    let doc: Table = toml::from_str(text).map_err(|e| ConfigErrors(vec![format!("malformed TOML: {e}")]))?;
    let mut w = Walker { errors: Vec::new() };
    let root = Section {
        path: String::new(),
        table: &doc,
    };
    w.unknown_keys("", &doc, TOP_KEYS);
    if let Some(m) = w.string(&root, "mode") {
        match m.parse::<Mode>() {
            Ok(m) if m == mode => {}
            Ok(m) => w.error(format!("config is for mode `{m}` but `{mode}` was requested")),
            Err(e) => w.error(e),
        }
    }
    let output = w.string(&root, "output").map(PathBuf::from);
    let missing: Vec<&str> = mode
        .required_sections()
        .iter()
        .copied()
        .filter(|k| !doc.contains_key(*k))
        .collect();
    if !missing.is_empty() {
        w.error(format!(
            "mode `{mode}` requires the sections [{}]; missing: [{}]",
            mode.required_sections().join("], ["),
            missing.join("], [")
        ));
    }

    let model = w
        .section(&root, "model", MODEL_KEYS)
        .and_then(|s| parse_model(&mut w, &s, mode));
    let dim = model.as_ref().map_or(1, |m| m.dimension);
    let grid = parse_grid(&mut w, &root, model.as_ref(), dim, mode);
    let needs_ground_state = matches!(mode, Mode::Groundstate | Mode::GroundstateRotating | Mode::Bdg);
    let gs_section = w.section(&root, "groundstate", GS_KEYS);
    let beta = model.as_ref().map_or(0.0, |m| m.beta);
    let groundstate_spec = |w: &mut Walker| parse_groundstate(w, gs_section.as_ref(), beta, mode);

    let evolve = if mode.is_dynamic() {
        w.section(&root, "evolve", EVOLVE_KEYS)
            .and_then(|s| parse_evolve(&mut w, &s, mode))
    } else {
        forbid(&mut w, &doc, "evolve", mode);
        None
    };
    let (initial, fraction) = if mode.is_dynamic() {
        match w.section(&root, "initial", INITIAL_KEYS) {
            Some(s) => parse_initial(&mut w, &s, model.as_ref(), mode),
            None => (None, None),
        }
    } else {
        forbid(&mut w, &doc, "initial", mode);
        (None, None)
    };
    let groundstate = if needs_ground_state || matches!(initial, Some(InitialSpec::GroundState { .. })) {
        groundstate_spec(&mut w)
    } else {
        None
    };
    let bdg = if mode == Mode::Bdg {
        let s = w.section(&root, "bdg", BDG_KEYS);
        Some(BdgSpec {
            dump_modes: s.as_ref().and_then(|s| w.count(s, "dump_modes")).unwrap_or(0),
            domain_check: s.as_ref().and_then(|s| w.boolean(s, "domain_check")).unwrap_or(true),
        })
    } else {
        forbid(&mut w, &doc, "bdg", mode);
        None
    };
    let convergence = if mode == Mode::ConvergenceStudy {
        w.section(&root, "convergence", CONVERGENCE_KEYS)
            .and_then(|s| parse_convergence(&mut w, &s, evolve.as_ref()))
    } else {
        forbid(&mut w, &doc, "convergence", mode);
        None
    };

    if let (Some(m), Some(g)) = (&model, &grid) {
        check_physics(&mut w, mode, m, g, initial.as_ref());
    }
    match (model, grid) {
        (Some(model), Some(grid)) if w.errors.is_empty() => Ok(ExperimentConfig {
            mode,
            grid,
            model,
            groundstate,
            evolve,
            initial,
            fraction,
            bdg,
            convergence,
            output,
        }),
        _ => {
            if w.errors.is_empty() {
                w.error("configuration is incomplete");
            }
            Err(ConfigErrors(w.errors))
        }
    }
}

fn forbid(w: &mut Walker, doc: &Table, key: &str, mode: Mode) {
    if doc.contains_key(key) {
        w.error(format!("section [{key}] is not used by mode `{mode}`"));
    }
}

fn parse_model(w: &mut Walker, s: &Section, mode: Mode) -> Option<ModelSpec> {
    let dimension = w.count(s, "dimension");
    let dimension = w.require(s, "dimension", dimension, "1, 2 or 3");
    let dim = dimension.unwrap_or(1);
    if !(1..=3).contains(&dim) {
        w.error(format!("`model.dimension` must be 1, 2 or 3, got {dim}"));
    }
    let gamma_y = w.float_or(s, "gamma_y", 1.0);
    let gamma_z = w.float_or(s, "gamma_z", 1.0);
    let trap = TrapParams { gamma_y, gamma_z };
    if let Err(e) = trap.validate() {
        w.error(format!("model: {e}"));
    }
    let omega = w.float_or(s, "omega", 0.0);
    let epsilon = w.float_or(s, "epsilon", 1.0);
    let potential = if s.table.contains_key("potential") {
        w.choice(
            s,
            "potential",
            &[("harmonic", PotentialKind::Harmonic), ("free", PotentialKind::Free)],
        )
        .unwrap_or_default()
    } else {
        PotentialKind::Harmonic
    };
    let dipole = w
        .section(s, "dipole", DIPOLE_KEYS)
        .and_then(|d| parse_dipole(w, &d, dim));
    let spin_orbit = w.section(s, "spin_orbit", SO_KEYS).map(|so| SpinOrbitParams {
        k0: w.float_or(&so, "k0", 0.0),
        delta: w.float_or(&so, "delta", 0.0),
        rabi: w.float_or(&so, "rabi", 0.0),
        beta11: w.float_or(&so, "beta11", 0.0),
        beta12: w.float_or(&so, "beta12", 0.0),
        beta22: w.float_or(&so, "beta22", 0.0),
    });

    let beta = w.float(s, "beta");
    let kappa = w.float(s, "kappa");
    let beta = match (beta, kappa) {
        (Some(_), Some(_)) => {
            w.error("give either `model.beta` or `model.kappa`, not both");
            0.0
        }
        (Some(b), None) => {
            if dipole.is_some() {
                w.error("dipolar models take the contact coupling as `model.kappa`");
            }
            b
        }
        // The dipolar solver splits kappa into contact and nonlocal parts itself.
        (None, Some(k)) if dipole.is_some() => k,
        (None, Some(k)) => beta_from_kappa(k, &trap, dim),
        (None, None) => {
            if mode == Mode::EvolveCgpe && spin_orbit.is_some() {
                0.0
            } else {
                w.error("missing `model.beta` (or `model.kappa`)");
                0.0
            }
        }
    };
    let spec = ModelSpec {
        dimension: dim,
        beta,
        kappa,
        gamma_y,
        gamma_z,
        omega,
        epsilon,
        potential,
        dipole,
        spin_orbit,
    };
    if (1..=3).contains(&dim) {
        if let Err(e) = spec.params().validate() {
            w.error(format!("model: {e}"));
        }
    }
    dimension.map(|_| spec)
}

fn parse_dipole(w: &mut Walker, s: &Section, dim: usize) -> Option<DipoleParams> {
    let lambda = w.float(s, "lambda");
    let lambda = w.require(s, "lambda", lambda, "dipolar strength")?;
    let axis = match s.table.get("axis") {
        None => [0.0, 0.0, 1.0],
        Some(_) => {
            let v = w.floats(s, "axis", 3)?;
            [v[0], v[1], v[2]]
        }
    };
    let default_mode = if dim == 2 {
        KernelMode::TwoDSdm
    } else {
        KernelMode::ThreeD
    };
    let mode = if s.table.contains_key("mode") {
        w.choice(
            s,
            "mode",
            &[("3d", KernelMode::ThreeD), ("2d-sdm", KernelMode::TwoDSdm)],
        )?
    } else {
        default_mode
    };
    let d = DipoleParams { lambda, axis, mode };
    if let Err(e) = d.validate() {
        w.error(format!("model.dipole: {e}"));
    }
    Some(d)
}

fn parse_grid(w: &mut Walker, root: &Section, model: Option<&ModelSpec>, dim: usize, mode: Mode) -> Option<GridSpec> {
    let s = w.section(root, "grid", GRID_KEYS);
    let get = |w: &mut Walker, key: &str| s.as_ref().and_then(|s| w.floats(s, key, dim));
    let lower = get(w, "lower");
    let upper = get(w, "upper");
    let intervals = s
        .as_ref()
        .and_then(|s| w.per_axis(s, "intervals", dim, as_count))
        .unwrap_or_else(|| vec![[256, 128, 64][dim.clamp(1, 3) - 1]; dim]);
    let boundary = match s.as_ref().filter(|s| s.table.contains_key("boundary")) {
        Some(s) => w.choice(
            s,
            "boundary",
            &[("dirichlet", Boundary::Dirichlet), ("periodic", Boundary::Periodic)],
        )?,
        None => Boundary::Dirichlet,
    };
    let (lower, upper) = match (lower, upper) {
        (Some(a), Some(b)) => (a, b),
        (None, None) => {
            // Domain sizing rule: [-L, L] with L = max(8, 1.5 R_TF).
            let half = domain_half_widths(&model?.params());
            (half.iter().map(|l| -l).collect(), half)
        }
        _ => {
            w.error("give both `grid.lower` and `grid.upper`, or neither");
            return None;
        }
    };
    for k in 0..dim {
        if !(upper[k] > lower[k]) {
            w.error(format!(
                "grid axis {k}: upper bound {} is not above lower bound {}",
                upper[k], lower[k]
            ));
        }
        let m = intervals[k];
        if m < 8 || !m.is_multiple_of(2) {
            w.error(format!("grid axis {k}: intervals must be even and at least 8, got {m}"));
        }
    }
    if boundary == Boundary::Periodic && matches!(mode, Mode::Groundstate | Mode::GroundstateRotating | Mode::Bdg) {
        w.error(format!("mode `{mode}` needs a Dirichlet grid"));
    }
    Some(GridSpec {
        lower,
        upper,
        intervals,
        boundary,
    })
}

fn parse_groundstate(w: &mut Walker, s: Option<&Section>, beta: f64, mode: Mode) -> Option<GroundStateSpec> {
    let Some(s) = s else {
        return Some(GroundStateSpec {
            tau: default_tau(beta),
            stop_tol: 1e-6,
            max_iter: 200_000,
            discretization: Discretization::Spectral,
            initial: default_guess(mode),
        });
    };
    let tau = w.float_or(s, "tau", default_tau(beta));
    let stop_tol = w.float_or(s, "stop_tol", 1e-6);
    let max_iter = w.count(s, "max_iter").unwrap_or(200_000);
    if !(tau > 0.0) {
        w.error(format!("`groundstate.tau` must be positive, got {tau}"));
    }
    if !(stop_tol > 0.0) {
        w.error(format!("`groundstate.stop_tol` must be positive, got {stop_tol}"));
    }
    if max_iter == 0 {
        w.error("`groundstate.max_iter` must be at least 1");
    }
    let discretization = if s.table.contains_key("discretization") {
        w.choice(
            s,
            "discretization",
            &[
                ("spectral", Discretization::Spectral),
                ("finite-difference", Discretization::FiniteDifference),
            ],
        )
        .unwrap_or_default()
    } else {
        Discretization::Spectral
    };
    let initial = match w.string(s, "initial").as_deref() {
        None => default_guess(mode),
        Some("auto") => GuessSpec::Auto,
        Some("gaussian") => GuessSpec::Gaussian,
        Some("thomas-fermi") => GuessSpec::ThomasFermi,
        Some("vortex") => GuessSpec::Vortex {
            winding: w.integer(s, "winding").unwrap_or(1) as i32,
        },
        Some("field") => match w.string(s, "path") {
            Some(p) => GuessSpec::Field { path: p.into() },
            None => {
                w.error("`groundstate.initial = \"field\"` needs `groundstate.path`");
                GuessSpec::Auto
            }
        },
        Some(other) => {
            w.error(format!(
                "`groundstate.initial` must be one of auto, gaussian, thomas-fermi, vortex, field, got `{other}`"
            ));
            GuessSpec::Auto
        }
    };
    if !matches!(initial, GuessSpec::Vortex { .. }) && s.table.contains_key("winding") {
        w.error("`groundstate.winding` only applies to the vortex initial guess");
    }
    Some(GroundStateSpec {
        tau,
        stop_tol,
        max_iter,
        discretization,
        initial,
    })
}

fn default_guess(mode: Mode) -> GuessSpec {
    match mode {
        Mode::GroundstateRotating => GuessSpec::Vortex { winding: 1 },
        _ => GuessSpec::Auto,
    }
}

fn parse_evolve(w: &mut Walker, s: &Section, mode: Mode) -> Option<EvolveSpec> {
    let tau = w.float(s, "tau");
    let tau = w.require(s, "tau", tau, "time step");
    let t_final = w.float(s, "t_final");
    let t_final = w.require(s, "t_final", t_final, "final time");
    let stride = w.count(s, "stride").unwrap_or(1);
    let snapshot_stride = w.count(s, "snapshot_stride");
    let mass_tol = w.float_or(s, "mass_tol", 1e-8);
    let resolution_tol = w.float_or(s, "resolution_tol", 1e-2);
    let cgpe = mode == Mode::EvolveCgpe;
    let form = if cgpe {
        Some(if s.table.contains_key("form") {
            w.choice(
                s,
                "form",
                &[
                    ("original", CgpeForm::Original),
                    ("phase-transformed", CgpeForm::PhaseTransformed),
                ],
            )
            .unwrap_or(CgpeForm::Original)
        } else {
            CgpeForm::Original
        })
    } else {
        None
    };
    let pad = if cgpe {
        Some(w.count(s, "pad").unwrap_or(2))
    } else {
        None
    };
    if !cgpe {
        for key in ["form", "pad"] {
            if s.table.contains_key(key) {
                w.error(format!("`evolve.{key}` only applies to mode `evolve-cgpe`"));
            }
        }
    }
    if stride == 0 {
        w.error("`evolve.stride` must be at least 1");
    }
    if snapshot_stride == Some(0) {
        w.error("`evolve.snapshot_stride` must be at least 1");
    }
    if pad.is_some_and(|p| p == 0) {
        w.error("`evolve.pad` must be at least 1");
    }
    if !(mass_tol > 0.0) || !(resolution_tol > 0.0) {
        w.error("`evolve.mass_tol` and `evolve.resolution_tol` must be positive");
    }
    let (tau, t_final) = (tau?, t_final?);
    if !(tau > 0.0 && tau.is_finite()) {
        w.error(format!("`evolve.tau` must be positive, got {tau}"));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        w.error(format!("`evolve.t_final` must be nonnegative, got {t_final}"));
    }
    Some(EvolveSpec {
        tau,
        t_final,
        stride,
        snapshot_stride,
        mass_tol,
        resolution_tol,
        form,
        pad,
    })
}

fn parse_initial(
    w: &mut Walker,
    s: &Section,
    model: Option<&ModelSpec>,
    mode: Mode,
) -> (Option<InitialSpec>, Option<f64>) {
    let dim = model.map_or(1, |m| m.dimension);
    let kind = w.string(s, "kind");
    let Some(kind) = w.require(s, "kind", kind, "ground-state, gaussian, soliton or field") else {
        return (None, None);
    };
    let zeros = vec![0.0; dim];
    let allowed: &[&str] = match kind.as_str() {
        "ground-state" => &["beta", "shift", "velocity"],
        "gaussian" => &["center", "width", "velocity"],
        "soliton" => &["amplitude", "velocity", "position", "phase"],
        "field" => &["path"],
        other => {
            w.error(format!(
                "`initial.kind` must be one of ground-state, gaussian, soliton, field, got `{other}`"
            ));
            return (None, None);
        }
    };
    for key in s.table.keys() {
        if key != "kind" && key != "fraction" && !allowed.contains(&key.as_str()) {
            w.error(format!("`initial.{key}` does not apply to initial kind `{kind}`"));
        }
    }
    let fraction = if mode == Mode::EvolveCgpe {
        let f = w.float_or(s, "fraction", 0.5);
        if !(0.0..=1.0).contains(&f) {
            w.error(format!("`initial.fraction` must lie in [0, 1], got {f}"));
        }
        Some(f)
    } else {
        if s.table.contains_key("fraction") {
            w.error("`initial.fraction` only applies to mode `evolve-cgpe`");
        }
        None
    };
    let spec = match kind.as_str() {
        "ground-state" => InitialSpec::GroundState {
            beta: w.float(s, "beta").unwrap_or_else(|| model.map_or(0.0, |m| m.beta)),
            shift: w.floats(s, "shift", dim).unwrap_or_else(|| zeros.clone()),
            velocity: w.floats(s, "velocity", dim).unwrap_or_else(|| zeros.clone()),
        },
        "gaussian" => InitialSpec::Gaussian {
            center: w.floats(s, "center", dim).unwrap_or_else(|| zeros.clone()),
            width: w.floats(s, "width", dim).unwrap_or_else(|| vec![1.0; dim]),
            velocity: w.floats(s, "velocity", dim).unwrap_or_else(|| zeros.clone()),
        },
        "soliton" => {
            if dim != 1 {
                w.error("soliton initial data is one-dimensional");
            }
            let amplitude = w.float_or(s, "amplitude", 1.0);
            if !(amplitude > 0.0) {
                w.error(format!("`initial.amplitude` must be positive, got {amplitude}"));
            }
            InitialSpec::Soliton {
                amplitude,
                velocity: w.float_or(s, "velocity", 0.0),
                position: w.float_or(s, "position", 0.0),
                phase: w.float_or(s, "phase", 0.0),
            }
        }
        _ => {
            let path = w.string(s, "path");
            match w.require(s, "path", path, "field dump to start from") {
                Some(p) => InitialSpec::Field { path: p.into() },
                None => return (None, fraction),
            }
        }
    };
    if let InitialSpec::Gaussian { width, .. } = &spec {
        if width.iter().any(|v| !(*v > 0.0)) {
            w.error("`initial.width` must be positive");
        }
    }
    (Some(spec), fraction)
}

fn parse_convergence(w: &mut Walker, s: &Section, evolve: Option<&EvolveSpec>) -> Option<ConvergenceSpec> {
    let taus = match s.table.get("taus") {
        None => vec![4e-3, 2e-3, 1e-3],
        Some(Value::Array(items)) => match items.iter().map(as_float).collect::<Option<Vec<_>>>() {
            Some(v) => v,
            None => {
                w.error("`convergence.taus` must be an array of numbers");
                return None;
            }
        },
        Some(other) => {
            w.error(format!(
                "`convergence.taus` must be an array, found {}",
                other.type_str()
            ));
            return None;
        }
    };
    if taus.len() < 3 {
        w.error(format!(
            "`convergence.taus` needs at least three steps, got {}",
            taus.len()
        ));
    }
    if taus.iter().any(|t| !(*t > 0.0)) {
        w.error("`convergence.taus` must be positive");
    }
    if taus.windows(2).any(|p| p[1] >= p[0]) {
        w.error("`convergence.taus` must be strictly decreasing");
    }
    if let Some(e) = evolve {
        for &tau in &taus {
            let n = (e.t_final / tau).round();
            if (n * tau - e.t_final).abs() > 1e-9 * e.t_final.max(1.0) {
                w.error(format!(
                    "final time {} is not a whole number of steps of {tau}",
                    e.t_final
                ));
            }
        }
    }
    Some(ConvergenceSpec { taus })
}

/// Existence and compatibility rules that depend on the mode.
fn check_physics(w: &mut Walker, mode: Mode, m: &ModelSpec, g: &GridSpec, initial: Option<&InitialSpec>) {
    let d = m.dimension;
    let wants_ground_state = matches!(mode, Mode::Groundstate | Mode::GroundstateRotating | Mode::Bdg);
    let gs_beta = match initial {
        Some(InitialSpec::GroundState { beta, .. }) => Some(*beta),
        _ if wants_ground_state => Some(m.beta),
        _ => None,
    };
    if let Some(beta) = gs_beta {
        if d == 3 && beta < 0.0 {
            w.error(
                "no ground state exists: an attractive gas (beta < 0) in 3D has energy unbounded below \
                 (nonexistence case d = 3, beta < 0)",
            );
        }
        if d == 2 && beta < 0.0 {
            w.error("attractive 2D ground states are not supported (beta < 0, d = 2)");
        }
    }
    match mode {
        Mode::Groundstate | Mode::Bdg if m.omega != 0.0 => {
            w.error(format!("mode `{mode}` needs omega = 0; use groundstate-rotating"));
        }
        Mode::GroundstateRotating => {
            if d < 2 {
                w.error("mode `groundstate-rotating` needs dimension 2 or 3");
            }
            if m.omega.abs() >= 1.0 {
                w.error(format!(
                    "no ground state exists for |omega| = {} >= 1: the rotation outruns the trap (case |Omega| > 1)",
                    m.omega.abs()
                ));
            }
            if m.beta < 0.0 {
                w.error("mode `groundstate-rotating` needs beta >= 0");
            }
        }
        Mode::EvolveRotating if d < 2 => w.error("mode `evolve-rotating` needs dimension 2 or 3"),
        Mode::Evolve | Mode::ConvergenceStudy if m.omega != 0.0 => {
            w.error(format!("mode `{mode}` needs omega = 0; use evolve-rotating"));
        }
        Mode::EvolveDipolar if m.dipole.is_none() => {
            w.error("mode `evolve-dipolar` requires a [model.dipole] section");
        }
        Mode::EvolveCgpe if m.spin_orbit.is_none() => {
            w.error("mode `evolve-cgpe` requires a [model.spin_orbit] section");
        }
        _ => {}
    }
    if mode == Mode::Bdg && d != 1 {
        w.error("mode `bdg` is one-dimensional");
    }
    if wants_ground_state && (m.dipole.is_some() || m.spin_orbit.is_some()) {
        w.error(format!(
            "mode `{mode}` uses the single-component contact model; remove dipole/spin_orbit"
        ));
    }
    if mode != Mode::EvolveDipolar && mode != Mode::EvolveCgpe {
        if m.dipole.is_some() && mode.is_dynamic() {
            w.error(format!(
                "[model.dipole] is only used by mode `evolve-dipolar`, not `{mode}`"
            ));
        }
        if m.spin_orbit.is_some() && mode.is_dynamic() {
            w.error(format!(
                "[model.spin_orbit] is only used by mode `evolve-cgpe`, not `{mode}`"
            ));
        }
    }
    if g.boundary == Boundary::Periodic {
        if matches!(initial, Some(InitialSpec::GroundState { .. })) {
            w.error("ground-state initial data needs a Dirichlet grid (CGPE runs pad it to a periodic one)");
        }
        if matches!(mode, Mode::EvolveRotating | Mode::EvolveDipolar) {
            w.error(format!("mode `{mode}` runs on a Dirichlet grid"));
        }
    }
    if let Some(InitialSpec::Soliton { .. }) = initial {
        if m.beta >= 0.0 {
            w.error("soliton initial data needs beta < 0");
        }
    }
}

impl ExperimentConfig {
    /// Resolves relative field paths against `base` and checks they exist.
    pub fn resolve_paths(&mut self, base: &Path) -> Result<(), ConfigErrors> {
        let mut errors = Vec::new();
        let mut fix = |p: &mut PathBuf, key: &str| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
            if !p.is_file() {
                errors.push(format!("`{key}` refers to a missing file: {}", p.display()));
            }
        };
        if let Some(GroundStateSpec {
            initial: GuessSpec::Field { path },
            ..
        }) = &mut self.groundstate
        {
            fix(path, "groundstate.path");
        }
        if let Some(InitialSpec::Field { path }) = &mut self.initial {
            fix(path, "initial.path");
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(errors))
        }
    }
}
