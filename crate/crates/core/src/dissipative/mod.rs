//! Discrete diagnostics of dissipative solutions: weak-form residuals,
//! Reynolds stresses of ensembles, energy defect and the defect/stress
//! compatibility inequality.

mod certificate;
mod io;
mod residual;
mod test_function;

pub use certificate::{certify, Check, DissipativeCertificate, TimeRow, Tolerances};
pub use io::{read_reynolds_csv, write_reynolds_csv};
pub use residual::{continuity_residual, dictionary_residuals, momentum_residual, DictionaryResiduals, Residual};
pub use test_function::{default_dictionary, Bump, Dictionary, TestFunction};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eos::{DefectRule, EosError, GasLaw};
use crate::fields::{FluidState, Grid};
use crate::trajectory::{Trajectory, TrajectoryError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DissipativeError {
    #[error("Reynolds field does not match the trajectory: {0}")]
    Mismatch(String),
    #[error("test function: {0}")]
    TestFunction(String),
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("ensemble member {member}: {source}")]
    Member {
        member: usize,
        #[source]
        source: TrajectoryError,
    },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Eos(#[from] EosError),
}

/// Symmetric 2x2 matrix; on 1D grids only `xx` is used.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.xx + self.yy);
        let r = (0.5 * (self.xx - self.yy)).hypot(self.xy);
        [mean - r, mean + r]
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        let [a, b] = self.eigenvalues();
        a.abs().max(b.abs())
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            _ => self.xy,
        }
    }

    fn add_scaled(&mut self, s: f64, o: &Sym2) {
        self.xx += s * o.xx;
        self.xy += s * o.xy;
        self.yy += s * o.yy;
    }
}

/// A symmetric matrix per cell and sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct ReynoldsField {
    grid: Grid,
    times: Vec<f64>,
    stress: Vec<Vec<Sym2>>,
}

impl ReynoldsField {
    pub fn new(grid: Grid, times: Vec<f64>, stress: Vec<Vec<Sym2>>) -> Result<Self, DissipativeError> {
        if stress.len() != times.len() {
            return Err(DissipativeError::Mismatch(format!("{} samples for {} times", stress.len(), times.len())));
        }
        if let Some(k) = stress.iter().position(|s| s.len() != grid.len()) {
            return Err(DissipativeError::Mismatch(format!("sample {k} has {} cells", stress[k].len())));
        }
        let finite = |m: &Sym2| m.xx.is_finite() && m.xy.is_finite() && m.yy.is_finite();
        if stress.iter().flatten().any(|m| !finite(m)) {
            return Err(DissipativeError::Mismatch("non-finite stress".into()));
        }
        if grid.dim() == 1 && stress.iter().flatten().any(|m| m.xy != 0.0 || m.yy != 0.0) {
            return Err(DissipativeError::Mismatch("only the xx entry may be nonzero on a 1D grid".into()));
        }
        Ok(Self { grid, times, stress })
    }

    pub fn zeros(traj: &Trajectory) -> Self {
        Self {
            grid: *traj.grid(),
            times: traj.times().to_vec(),
            stress: vec![vec![Sym2::ZERO; traj.grid().len()]; traj.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn sample(&self, k: usize) -> &[Sym2] {
        &self.stress[k]
    }

    /// Samples `..k` of `self` followed by all samples of `tail`, on the
    /// sample times of a concatenated trajectory.
    pub fn join_at(&self, k: usize, tail: &ReynoldsField, times: Vec<f64>) -> Result<ReynoldsField, DissipativeError> {
        if !self.grid.same_as(&tail.grid) {
            return Err(DissipativeError::Mismatch("different grids".into()));
        }
        let mut stress = self.stress[..k.min(self.stress.len())].to_vec();
        stress.extend_from_slice(&tail.stress);
        ReynoldsField::new(self.grid, times, stress)
    }

    pub fn max_abs(&self) -> f64 {
        self.stress.iter().flatten().map(Sym2::norm).fold(0.0, f64::max)
    }

    /// `int trace R(t_k, x) dx`.
    pub fn integrated_trace(&self, k: usize) -> f64 {
        self.stress[k].iter().map(Sym2::trace).sum::<f64>() * self.grid.cell_volume()
    }

    /// Worst `-lambda_min / |R|` over cells at sample `k` (0 when PSD), with
    /// the offending cell.
    pub fn psd_defect(&self, k: usize) -> (f64, usize) {
        let mut worst = (0.0, 0);
        for (c, m) in self.stress[k].iter().enumerate() {
            let lo = m.eigenvalues()[0];
            if lo < 0.0 {
                let rel = -lo / m.norm();
                if rel > worst.0 {
                    worst = (rel, c);
                }
            }
        }
        worst
    }

    pub fn check_against(&self, traj: &Trajectory) -> Result<(), DissipativeError> {
        if !self.grid.same_as(traj.grid()) {
            return Err(DissipativeError::Mismatch("different grids".into()));
        }
        if self.times.len() != traj.len() {
            return Err(DissipativeError::Mismatch(format!(
                "{} stress samples for {} trajectory samples",
                self.times.len(),
                traj.len()
            )));
        }
        let scale = traj.t_end().max(1.0);
        if let Some(k) = self.times.iter().zip(traj.times()).position(|(a, b)| (a - b).abs() > 1e-12 * scale) {
            return Err(DissipativeError::Mismatch(format!("sample {k} at a different time")));
        }
        Ok(())
    }

    /// Sum of two fields on the same samples.
    pub fn plus(&self, other: &ReynoldsField) -> Result<ReynoldsField, DissipativeError> {
        if !self.grid.same_as(&other.grid) || self.times.len() != other.times.len() {
            return Err(DissipativeError::Mismatch("different grids or samples".into()));
        }
        let stress = self
            .stress
            .iter()
            .zip(&other.stress)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| {
                        let mut s = *x;
                        s.add_scaled(1.0, y);
                        s
                    })
                    .collect()
            })
            .collect();
        ReynoldsField::new(self.grid, self.times.clone(), stress)
    }
}

/// `(1 + x)^gamma - 1 - gamma x >= 0` without cancellation for small `x`.
fn bregman_power(gamma: f64, x: f64) -> f64 {
    if x.abs() < 0.1 {
        let mut coef = gamma * (gamma - 1.0) / 2.0;
        let mut pow = x * x;
        let mut sum = 0.0;
        for n in 2..40 {
            sum += coef * pow;
            coef *= (gamma - n as f64) / (n as f64 + 1.0);
            pow *= x;
        }
        sum
    } else {
        (1.0 + x).powf(gamma) - 1.0 - gamma * x
    }
}

/// Reynolds stress generated by mixing weighted states:
/// `sum_i w_i rho_i (u_i - u)(u_i - u) + (sum_i w_i p(rho_i) - p(rho)) I`
/// with `rho = sum w_i rho_i`, `rho u = sum w_i m_i`. This equals the mean of
/// the convective fluxes minus the flux of the mean, written as a sum of
/// nonnegative terms.
pub fn mixing_stress(states: &[&FluidState], weights: &[f64], law: &GasLaw) -> Vec<Sym2> {
    let g = states[0].grid();
    let two_d = g.dim() == 2;
    (0..g.len())
        .map(|c| {
            let rho: f64 = states.iter().zip(weights).map(|(s, w)| w * s.rho()[c]).sum();
            let same = states.iter().all(|s| s.rho()[c] == states[0].rho()[c] && s.m()[c] == states[0].m()[c]);
            if rho <= 0.0 || same {
                return Sym2::ZERO;
            }
            let mx: f64 = states.iter().zip(weights).map(|(s, w)| w * s.m()[c][0]).sum();
            let my: f64 = states.iter().zip(weights).map(|(s, w)| w * s.m()[c][1]).sum();
            let (ux, uy) = (mx / rho, my / rho);
            let mut out = Sym2::ZERO;
            let mut jensen = 0.0;
            for (s, &w) in states.iter().zip(weights) {
                let r = s.rho()[c];
                if r > 0.0 && w > 0.0 {
                    let dx = s.m()[c][0] / r - ux;
                    let dy = s.m()[c][1] / r - uy;
                    out.xx += w * r * dx * dx;
                    out.xy += w * r * dx * dy;
                    out.yy += w * r * dy * dy;
                }
                if w > 0.0 {
                    jensen += w * bregman_power(law.gamma(), r / rho - 1.0);
                }
            }
            let dp = law.p(rho) * jensen;
            out.xx += dp;
            if two_d {
                out.yy += dp;
            } else {
                out.xy = 0.0;
                out.yy = 0.0;
            }
            out
        })
        .collect()
}

/// Reynolds stress of an equally weighted ensemble together with the
/// averaged trajectory (mean fields, mean energy curve).
pub fn estimate_reynolds(
    ensemble: &[Trajectory],
    law: &GasLaw,
) -> Result<(ReynoldsField, Trajectory), DissipativeError> {
    let first = ensemble.first().ok_or(DissipativeError::EmptyEnsemble)?;
    for (member, t) in ensemble.iter().enumerate() {
        first.aligned_with(t).map_err(|source| DissipativeError::Member { member, source })?;
    }
    let k = ensemble.len() as f64;
    let weights = vec![1.0 / k; ensemble.len()];
    let (stress, states): (Vec<_>, Vec<_>) = (0..first.len())
        .into_par_iter()
        .map(|j| {
            let members: Vec<&FluidState> = ensemble.iter().map(|t| t.state(j)).collect();
            (mixing_stress(&members, &weights, law), FluidState::mean_of(&members))
        })
        .unzip();
    let e0 = ensemble.iter().map(Trajectory::e0).sum::<f64>() / k;
    let energy = (0..first.len()).map(|j| ensemble.iter().map(|t| t.energy()[j]).sum::<f64>() / k).collect();
    let avg = Trajectory::from_parts(*law, first.times().to_vec(), states, e0, energy)?;
    let field = ReynoldsField::new(*first.grid(), first.times().to_vec(), stress)?;
    Ok((field, avg))
}

/// `D_E(t) = E(t+) - mean energy(t)`, clamped at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Defect {
    pub t: f64,
    pub value: f64,
    pub raw: f64,
    /// The raw value fell below `-tolerance`.
    pub negative_excursion: bool,
}

pub fn energy_defect(traj: &Trajectory, t: f64) -> Result<Defect, DissipativeError> {
    let k = traj.sample_index(t).ok_or(TrajectoryError::NotSample(t))?;
    Ok(defect_at(traj, k))
}

pub(crate) fn defect_at(traj: &Trajectory, k: usize) -> Defect {
    let raw = traj.raw_defect(k);
    Defect { t: traj.times()[k], value: raw.max(0.0), raw, negative_excursion: raw < -traj.energy_tol() }
}

/// `D_E(t) - r int trace R(t) dx` and its verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Compatibility {
    pub t: f64,
    pub defect: f64,
    pub trace: f64,
    pub r: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compatibility inequality at sample time `t`; `tol` defaults to
/// `1e-10` times the energy scale of the trajectory.
pub fn check_compatibility(
    traj: &Trajectory,
    reynolds: &ReynoldsField,
    t: f64,
    rule: DefectRule,
    tol: Option<f64>,
) -> Result<Compatibility, DissipativeError> {
    reynolds.check_against(traj)?;
    let k = traj.sample_index(t).ok_or(TrajectoryError::NotSample(t))?;
    let r = rule.value(traj.grid().dim(), traj.law())?;
    Ok(compatibility_at(traj, reynolds, k, r, tol.unwrap_or_else(|| traj.energy_tol())))
}

pub(crate) fn compatibility_at(
    traj: &Trajectory,
    reynolds: &ReynoldsField,
    k: usize,
    r: f64,
    tol: f64,
) -> Compatibility {
    let defect = defect_at(traj, k).value;
    let trace = reynolds.integrated_trace(k);
    let slack = defect - r * trace;
    Compatibility { t: traj.times()[k], defect, trace, r, slack, tolerance: tol, pass: slack >= -tol }
}
