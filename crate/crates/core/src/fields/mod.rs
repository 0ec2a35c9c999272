//! Structured grids, cell-averaged fluid states and initial-data validation.

mod grid;
pub mod io;

pub use grid::{Boundary, Grid, GridSpec};

use serde::Serialize;
use thiserror::Error;

use crate::eos::{ExtendedEnergy, GasLaw};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("field length {got} does not match grid size {expected}")]
    Length { expected: usize, got: usize },
    #[error("non-finite value in cell {cell}")]
    NonFinite { cell: usize },
    #[error("negative density {rho} in cell {cell}")]
    NegativeDensity { cell: usize, rho: f64 },
    #[error("nonzero momentum on the vacuum in cell {cell}")]
    VacuumMomentum { cell: usize },
    #[error("second momentum component must vanish on a 1D grid (cell {cell})")]
    Transverse { cell: usize },
}

/// Cell averages of density and momentum on a grid at one instant.
///
/// Momentum always carries two components; on a 1D grid the second one is
/// identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    grid: Grid,
    rho: Vec<f64>,
    m: Vec<[f64; 2]>,
}

impl FluidState {
    /// Builds a state and enforces every invariant, including vacuum
    /// consistency (`m = 0` wherever `rho = 0`).
    pub fn new(grid: Grid, rho: Vec<f64>, m: Vec<[f64; 2]>) -> Result<Self, FieldError> {
        let s = Self::new_raw(grid, rho, m)?;
        if let Some(cell) = s.first_vacuum_momentum() {
            return Err(FieldError::VacuumMomentum { cell });
        }
        Ok(s)
    }

    /// Builds a state checking shape, finiteness and `rho >= 0` only.
    ///
    /// States with momentum on the vacuum are representable so that ingested
    /// data can be rejected with a diagnostic instead of a parse failure.
    pub fn new_raw(grid: Grid, rho: Vec<f64>, m: Vec<[f64; 2]>) -> Result<Self, FieldError> {
        let n = grid.len();
        if rho.len() != n {
            return Err(FieldError::Length { expected: n, got: rho.len() });
        }
        if m.len() != n {
            return Err(FieldError::Length { expected: n, got: m.len() });
        }
        for (cell, (&r, mm)) in rho.iter().zip(&m).enumerate() {
            if !(r.is_finite() && mm[0].is_finite() && mm[1].is_finite()) {
                return Err(FieldError::NonFinite { cell });
            }
            if r < 0.0 {
                return Err(FieldError::NegativeDensity { cell, rho: r });
            }
            if grid.dim() == 1 && mm[1] != 0.0 {
                return Err(FieldError::Transverse { cell });
            }
        }
        Ok(Self { grid, rho, m })
    }

    /// Constant state.
    pub fn uniform(grid: Grid, rho: f64, m: [f64; 2]) -> Result<Self, FieldError> {
        let n = grid.len();
        Self::new(grid, vec![rho; n], vec![m; n])
    }

    /// Samples `f(x, y) -> (rho, m)` at cell centers.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> (f64, [f64; 2])) -> Result<Self, FieldError> {
        let [nx, ny] = grid.cells();
        let mut rho = Vec::with_capacity(grid.len());
        let mut m = Vec::with_capacity(grid.len());
        for j in 0..ny {
            let y = if grid.dim() == 2 { grid.center(1, j) } else { 0.0 };
            for i in 0..nx {
                let (r, mm) = f(grid.center(0, i), y);
                rho.push(r);
                m.push(mm);
            }
        }
        Self::new(grid, rho, m)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn m(&self) -> &[[f64; 2]] {
        &self.m
    }

    pub fn into_parts(self) -> (Grid, Vec<f64>, Vec<[f64; 2]>) {
        (self.grid, self.rho, self.m)
    }

    pub fn first_vacuum_momentum(&self) -> Option<usize> {
        self.rho.iter().zip(&self.m).position(|(&r, mm)| r == 0.0 && (mm[0] != 0.0 || mm[1] != 0.0))
    }

    /// Velocity in a cell, zero on the vacuum.
    #[inline]
    pub fn velocity(&self, cell: usize) -> [f64; 2] {
        let r = self.rho[cell];
        if r > 0.0 {
            [self.m[cell][0] / r, self.m[cell][1] / r]
        } else {
            [0.0, 0.0]
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn total_momentum(&self) -> [f64; 2] {
        let v = self.grid.cell_volume();
        let (a, b) = self.m.iter().fold((0.0, 0.0), |(a, b), mm| (a + mm[0], b + mm[1]));
        [a * v, b * v]
    }

    /// Volume-weighted L1 distance in (rho, m).
    pub fn l1_distance(&self, other: &FluidState) -> f64 {
        let s: f64 = self
            .rho
            .iter()
            .zip(&other.rho)
            .zip(self.m.iter().zip(&other.m))
            .map(|((a, b), (ma, mb))| (a - b).abs() + (ma[0] - mb[0]).abs() + (ma[1] - mb[1]).abs())
            .sum();
        s * self.grid.cell_volume()
    }

    /// Volume-weighted L1 norm of (rho, m).
    pub fn l1_norm(&self) -> f64 {
        let s: f64 = self.rho.iter().zip(&self.m).map(|(a, m)| a.abs() + m[0].abs() + m[1].abs()).sum();
        s * self.grid.cell_volume()
    }

    /// True when the states agree to `rel_tol` in relative weighted L1.
    pub fn matches(&self, other: &FluidState, rel_tol: f64) -> bool {
        if !self.grid.same_as(&other.grid) {
            return false;
        }
        let scale = self.l1_norm().max(other.l1_norm());
        self.l1_distance(other) <= rel_tol * scale
    }

    /// Cell-wise affine combination `lambda * self + (1 - lambda) * other`.
    pub fn affine(&self, other: &FluidState, lambda: f64) -> FluidState {
        let mu = 1.0 - lambda;
        let rho = self.rho.iter().zip(&other.rho).map(|(a, b)| lambda * a + mu * b).collect();
        let m =
            self.m.iter().zip(&other.m).map(|(a, b)| [lambda * a[0] + mu * b[0], lambda * a[1] + mu * b[1]]).collect();
        FluidState { grid: self.grid, rho, m }
    }

    /// Multiplies density and momentum by `s >= 0`.
    pub fn scaled(&self, s: f64) -> FluidState {
        FluidState {
            grid: self.grid,
            rho: self.rho.iter().map(|r| r * s).collect(),
            m: self.m.iter().map(|m| [m[0] * s, m[1] * s]).collect(),
        }
    }

    /// Equally weighted mean of states sharing a grid.
    pub(crate) fn mean_of(states: &[&FluidState]) -> FluidState {
        let k = states.len() as f64;
        let first = states[0];
        let n = first.rho.len();
        let mut rho = vec![0.0; n];
        let mut m = vec![[0.0; 2]; n];
        for s in states {
            for c in 0..n {
                rho[c] += s.rho[c];
                m[c][0] += s.m[c][0];
                m[c][1] += s.m[c][1];
            }
        }
        for c in 0..n {
            rho[c] /= k;
            m[c][0] /= k;
            m[c][1] /= k;
        }
        FluidState { grid: first.grid, rho, m }
    }
}

/// `sum_i E(rho_i, m_i) |cell|`, or `+inf` if some cell carries momentum on
/// the vacuum.
pub fn integrate_energy(state: &FluidState, law: &GasLaw) -> ExtendedEnergy {
    let mut sum = 0.0;
    for (&r, m) in state.rho.iter().zip(&state.m) {
        match law.energy_unchecked(r, m) {
            ExtendedEnergy::Finite(e) => sum += e,
            ExtendedEnergy::Infinite => return ExtendedEnergy::Infinite,
        }
    }
    ExtendedEnergy::Finite(sum * state.grid.cell_volume())
}

/// Initial density, momentum and total energy.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTriple {
    pub state0: FluidState,
    pub e0: f64,
}

impl DataTriple {
    pub fn new(state0: FluidState, e0: f64) -> Self {
        Self { state0, e0 }
    }

    /// Data whose total energy equals the mean energy of the state.
    pub fn with_mean_energy(state0: FluidState, law: &GasLaw) -> Result<Self, FieldError> {
        if let Some(cell) = state0.first_vacuum_momentum() {
            return Err(FieldError::VacuumMomentum { cell });
        }
        let e0 = integrate_energy(&state0, law).to_f64();
        Ok(Self { state0, e0 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataValidation {
    pub accepted: bool,
    pub mean_energy: f64,
    /// `E0 - mean energy`; `-inf` when the mean energy is infinite.
    pub slack: f64,
    pub tolerance: f64,
    pub diagnostic: Option<String>,
}

/// Default round-off guard `1e-12 max(1, E0)` for the data inequality.
pub fn default_data_tolerance(e0: f64) -> f64 {
    1e-12 * e0.abs().max(1.0)
}

/// Membership of `(rho0, m0, E0)` in the admissible data class.
pub fn validate_initial_data(triple: &DataTriple, law: &GasLaw, tol_data: Option<f64>) -> DataValidation {
    let tolerance = tol_data.unwrap_or_else(|| default_data_tolerance(triple.e0));
    if let Some(cell) = triple.state0.first_vacuum_momentum() {
        return DataValidation {
            accepted: false,
            mean_energy: f64::INFINITY,
            slack: f64::NEG_INFINITY,
            tolerance,
            diagnostic: Some(format!("infinite energy: momentum on the vacuum in cell {cell}")),
        };
    }
    let mean = integrate_energy(&triple.state0, law).to_f64();
    let slack = triple.e0 - mean;
    let e0_ok = triple.e0.is_finite() && triple.e0 >= 0.0;
    let accepted = e0_ok && slack >= -tolerance;
    let diagnostic = if !e0_ok {
        Some(format!("total energy {} is not a nonnegative number", triple.e0))
    } else if !accepted {
        Some(format!("mean energy {mean} exceeds total energy {}", triple.e0))
    } else {
        None
    };
    DataValidation { accepted, mean_energy: mean, slack, tolerance, diagnostic }
}
