//! Strict JSON experiment configurations.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use dlab_core::dissipative::Tolerances;
use dlab_core::eos::GasLaw;
use dlab_core::fields::io::read_state_csv;
use dlab_core::fields::{DataTriple, FluidState, Grid};
use dlab_core::selection::SelectionSettings;
use dlab_core::solver::{acoustic_pulse, riemann_initial, EnergyRecord, FluxKind, RiemannData, SchemeSpec};
use dlab_core::trajectory::OrderTolerances;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Run,
    Ensemble,
    Diagnose,
    Select,
    Riemann,
    Dt1Demo,
    Dt2Demo,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Run => "run",
            Experiment::Ensemble => "ensemble",
            Experiment::Diagnose => "diagnose",
            Experiment::Select => "select",
            Experiment::Riemann => "riemann",
            Experiment::Dt1Demo => "dt1-demo",
            Experiment::Dt2Demo => "dt2-demo",
        }
    }
}

/// Flux and artificial viscosity; the CFL number sits at the top level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub flux: FluxKind,
    #[serde(default)]
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Initial {
    Constant {
        rho: f64,
        #[serde(default)]
        m: [f64; 2],
    },
    /// Jump along the first axis at `x0` (default: the middle of the domain).
    Riemann {
        left: [f64; 2],
        right: [f64; 2],
        #[serde(default)]
        x0: Option<f64>,
    },
    Acoustic {
        #[serde(default = "one")]
        rho0: f64,
        amplitude: f64,
    },
    /// A state CSV; relative paths are resolved against the config file.
    File { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    /// One member per viscosity.
    pub nu: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemoConfig {
    /// Defect threshold of the reset loop, relative to `E0`.
    pub delta_rel: f64,
    pub order: OrderTolerances,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self { delta_rel: 0.05, order: OrderTolerances::default() }
    }
}

/// Configuration of `run`, `ensemble`, `riemann`, `dt1-demo` and `dt2-demo`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    pub grid: Grid,
    pub law: GasLaw,
    pub scheme: SchemeConfig,
    pub cfl: f64,
    pub t_end: f64,
    pub sample_dt: f64,
    pub initial: Initial,
    /// Initial total energy; defaults to the mean energy of the initial state.
    #[serde(default)]
    pub e0: Option<f64>,
    #[serde(default)]
    pub energy: EnergyRecord,
    #[serde(default)]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default)]
    pub demo: DemoConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(skip)]
    pub base: PathBuf,
}

impl SimulationConfig {
    pub fn spec(&self) -> Result<SchemeSpec, CliError> {
        self.spec_with(self.scheme.nu)
    }

    pub fn spec_with(&self, nu: f64) -> Result<SchemeSpec, CliError> {
        SchemeSpec::new(self.scheme.flux, nu, self.cfl).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Member schemes; fails if the config has no non-empty `ensemble.nu`.
    pub fn ensemble_specs(&self) -> Result<Vec<SchemeSpec>, CliError> {
        let nu = match &self.ensemble {
            Some(e) if !e.nu.is_empty() => &e.nu,
            _ => return Err(CliError::Config("`ensemble.nu` must list at least one viscosity".into())),
        };
        nu.iter().map(|&v| self.spec_with(v)).collect()
    }

    pub fn initial_state(&self) -> Result<FluidState, CliError> {
        let g = &self.grid;
        let state = match &self.initial {
            Initial::Constant { rho, m } => FluidState::uniform(*g, *rho, *m).map_err(config)?,
            Initial::Riemann { .. } => {
                let (data, x0) = self.riemann()?;
                riemann_initial(g, &data, x0).map_err(config)?
            }
            Initial::Acoustic { rho0, amplitude } => acoustic_pulse(g, &self.law, *rho0, *amplitude).map_err(config)?,
            Initial::File { path } => read_state_csv(&self.base.join(path), g)?,
        };
        Ok(state)
    }

    pub fn triple(&self) -> Result<DataTriple, CliError> {
        let state = self.initial_state()?;
        match self.e0 {
            Some(e0) => Ok(DataTriple::new(state, e0)),
            None => DataTriple::with_mean_energy(state, &self.law).map_err(config),
        }
    }

    /// Riemann data and jump position; fails for other initial kinds.
    pub fn riemann(&self) -> Result<(RiemannData, f64), CliError> {
        match &self.initial {
            Initial::Riemann { left, right, x0 } => {
                let mid = 0.5 * (self.grid.lower()[0] + self.grid.upper()[0]);
                Ok((RiemannData { left: *left, right: *right }, x0.unwrap_or(mid)))
            }
            _ => Err(CliError::Config("this experiment needs `initial.kind = \"riemann\"`".into())),
        }
    }
}

/// Configuration of `diagnose`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Configuration of `select`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub selection: SelectionSettings,
    /// Rates of the energy transforms; defaults to 32 log-spaced points in `[0.5, 128]`.
    #[serde(default)]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(default = "minimizer_tol")]
    pub minimizer_tol: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn minimizer_tol() -> f64 {
    1e-9
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            selection: SelectionSettings::default(),
            lambda_grid: None,
            minimizer_tol: 1e-9,
            out: None,
            seed: None,
        }
    }
}

fn config(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn parse<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn check_kind(path: &Path, found: Option<Experiment>, allowed: &[Experiment]) -> Result<(), CliError> {
    match found {
        Some(k) if !allowed.contains(&k) => Err(CliError::Config(format!(
            "{}: config is for `{}`, not `{}`",
            path.display(),
            k.name(),
            allowed[0].name()
        ))),
        _ => Ok(()),
    }
}

pub fn load_simulation(path: &Path, kind: Experiment) -> Result<SimulationConfig, CliError> {
    let mut cfg: SimulationConfig = parse(path)?;
    check_kind(path, cfg.experiment, &[kind])?;
    cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    if !(cfg.t_end > 0.0 && cfg.sample_dt > 0.0) {
        return Err(CliError::Config(format!("{}: `t_end` and `sample_dt` must be positive", path.display())));
    }
    Ok(cfg)
}

pub fn load_diagnose(path: Option<&Path>) -> Result<DiagnoseConfig, CliError> {
    let Some(path) = path else { return Ok(DiagnoseConfig::default()) };
    let cfg: DiagnoseConfig = parse(path)?;
    check_kind(path, cfg.experiment, &[Experiment::Diagnose])?;
    Ok(cfg)
}

pub fn load_select(path: Option<&Path>) -> Result<SelectConfig, CliError> {
    let Some(path) = path else { return Ok(SelectConfig::default()) };
    let cfg: SelectConfig = parse(path)?;
    check_kind(path, cfg.experiment, &[Experiment::Select])?;
    Ok(cfg)
}
