//! Time-sampled solution trajectories and their algebra: shift, concatenation,
//! convex combination, the global and local energy orders, stopping times
//! and the defect-reset and competitor constructions.

mod algebra;
pub mod bundle;
mod construct;
pub(crate) mod norm;
mod order;

pub use algebra::{concatenate, convex_combine, shift};
pub use construct::{
    cap_defect, defect_reset, improve, min_energy_merge, stopping_time, switch_reynolds, DefectCap, Improvement,
    StoppingTime,
};
pub use norm::{exp_weighted_integral, exp_weighted_partial, max_exponent, weighted_norm, weighted_norm_q_power};
pub use order::{compare_admissible, compare_local, OrderResult, OrderTolerances, Relation};

use serde::Serialize;
use thiserror::Error;

use crate::eos::{ExtendedEnergy, GasLaw};
use crate::fields::{integrate_energy, FluidState, Grid};

/// Relative tolerance used for the trajectory invariants.
pub const INVARIANT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("malformed trajectory: {0}")]
    Shape(String),
    #[error("sample times must start at 0 and increase strictly: {0}")]
    Times(String),
    #[error("trajectories live on different grids, laws or sample times: {0}")]
    Mismatch(String),
    #[error("{0} is not a sample time")]
    NotSample(f64),
    #[error("total energy increases at sample {k}: {before} -> {after}")]
    Increasing { k: usize, before: f64, after: f64 },
    #[error("total energy {energy} below the mean energy {mean} at sample {k}")]
    BelowMean { k: usize, energy: f64, mean: f64 },
    #[error("momentum on the vacuum at sample {k}, cell {cell}")]
    Vacuum { k: usize, cell: usize },
    #[error("continuation does not start from the state at the junction (relative L1 gap {gap:e})")]
    FieldMismatch { gap: f64 },
    #[error("continuation energy {e} outside the admissible window [{lo}, {hi}]")]
    EnergyWindow { e: f64, lo: f64, hi: f64 },
    #[error("energy defect {defect:e} at t = {t} is within tolerance {tol:e}: nothing to improve")]
    NothingToImprove { t: f64, defect: f64, tol: f64 },
    #[error("exponent q = {q} outside (1, {max}]")]
    Exponent { q: f64, max: f64 },
    #[error("fields differ after the merge time at sample {k}")]
    MergeFields { k: usize },
}

/// A violated trajectory invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    Increasing { k: usize, before: f64, after: f64 },
    BelowMean { k: usize, energy: f64, mean: f64 },
    Vacuum { k: usize, cell: usize },
}

impl From<Violation> for TrajectoryError {
    fn from(v: Violation) -> Self {
        match v {
            Violation::Increasing { k, before, after } => TrajectoryError::Increasing { k, before, after },
            Violation::BelowMean { k, energy, mean } => TrajectoryError::BelowMean { k, energy, mean },
            Violation::Vacuum { k, cell } => TrajectoryError::Vacuum { k, cell },
        }
    }
}

/// Density, momentum and total energy sampled at `t_0 = 0 < ... < t_N`.
///
/// The total energy is a non-increasing left-continuous step function:
/// `E(0) = e0`, and `energy[k]` is the right limit `E(t_k+)`, i.e. the value
/// on `(t_k, t_{k+1}]`. Beyond `t_N` every quantity is extended by its last
/// sample. Fields are piecewise constant in time with value `state[k]` on
/// `[t_k, t_{k+1})` wherever an integral in time is taken in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    law: GasLaw,
    times: Vec<f64>,
    states: Vec<FluidState>,
    e0: f64,
    energy: Vec<f64>,
}

impl Trajectory {
    /// Builds a trajectory and checks every invariant: non-increasing energy,
    /// energy above the mean energy and vacuum consistency.
    pub fn new(
        law: GasLaw,
        times: Vec<f64>,
        states: Vec<FluidState>,
        e0: f64,
        energy: Vec<f64>,
    ) -> Result<Self, TrajectoryError> {
        let t = Self::from_parts(law, times, states, e0, energy)?;
        if let Some(v) = t.violations().into_iter().next() {
            return Err(v.into());
        }
        Ok(t)
    }

    /// Builds a trajectory checking its shape only; used for ingested data
    /// that is certified afterwards.
    pub fn from_parts(
        law: GasLaw,
        times: Vec<f64>,
        states: Vec<FluidState>,
        e0: f64,
        energy: Vec<f64>,
    ) -> Result<Self, TrajectoryError> {
        if states.is_empty() {
            return Err(TrajectoryError::Shape("no samples".into()));
        }
        if times.len() != states.len() || energy.len() != states.len() {
            return Err(TrajectoryError::Shape(format!(
                "{} times, {} states, {} energy knots",
                times.len(),
                states.len(),
                energy.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(TrajectoryError::Times(format!("first sample at {}", times[0])));
        }
        if let Some(w) = times.windows(2).position(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(TrajectoryError::Times(format!("t[{}] = {} after {}", w + 1, times[w + 1], times[w])));
        }
        let grid = *states[0].grid();
        if let Some(k) = states.iter().position(|s| !s.grid().same_as(&grid)) {
            return Err(TrajectoryError::Mismatch(format!("state {k} has a different grid")));
        }
        if !(e0.is_finite() && e0 >= 0.0) || energy.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(TrajectoryError::Shape("energies must be finite and nonnegative".into()));
        }
        Ok(Self { law, times, states, e0, energy })
    }

    pub fn law(&self) -> &GasLaw {
        &self.law
    }

    pub fn grid(&self) -> &Grid {
        self.states[0].grid()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[FluidState] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &FluidState {
        &self.states[k]
    }

    /// `E(0)`.
    pub fn e0(&self) -> f64 {
        self.e0
    }

    /// Right limits `E(t_k+)`.
    pub fn energy(&self) -> &[f64] {
        &self.energy
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Point value `E(t_k)` of the left-continuous energy.
    pub fn energy_point(&self, k: usize) -> f64 {
        if k == 0 {
            self.e0
        } else {
            self.energy[k - 1]
        }
    }

    /// `E(t)` for any `t >= 0` with the left-continuous convention.
    pub fn energy_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.e0;
        }
        // first sample index with times[k] >= t
        let k = self.times.partition_point(|&s| s < t);
        if k >= self.times.len() {
            *self.energy.last().unwrap()
        } else {
            self.energy[k - 1]
        }
    }

    pub fn mean_energy(&self, k: usize) -> ExtendedEnergy {
        integrate_energy(&self.states[k], &self.law)
    }

    /// `E(t_k+) - mean energy(t_k)`, unclamped.
    pub fn raw_defect(&self, k: usize) -> f64 {
        self.energy[k] - self.mean_energy(k).to_f64()
    }

    /// Absolute tolerance for energy comparisons on this trajectory.
    pub fn energy_tol(&self) -> f64 {
        INVARIANT_REL_TOL * self.energy_scale()
    }

    pub(crate) fn energy_scale(&self) -> f64 {
        self.energy.iter().fold(self.e0, |a, &b| a.max(b)).max(f64::MIN_POSITIVE)
    }

    /// Index of the sample at time `t` (to relative round-off).
    pub fn sample_index(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * self.t_end().max(1.0);
        let k = self.times.partition_point(|&s| s < t - tol);
        (k < self.times.len() && (self.times[k] - t).abs() <= tol).then_some(k)
    }

    pub(crate) fn require_sample(&self, t: f64) -> Result<usize, TrajectoryError> {
        self.sample_index(t).ok_or(TrajectoryError::NotSample(t))
    }

    /// All violated invariants at tolerance [`Self::energy_tol`].
    pub fn violations(&self) -> Vec<Violation> {
        let tol = self.energy_tol();
        let mut out = Vec::new();
        let mut prev = self.e0;
        for (k, &e) in self.energy.iter().enumerate() {
            if e > prev + tol {
                out.push(Violation::Increasing { k, before: prev, after: e });
            }
            prev = e;
        }
        for k in 0..self.len() {
            if let Some(cell) = self.states[k].first_vacuum_momentum() {
                out.push(Violation::Vacuum { k, cell });
                continue;
            }
            let mean = self.mean_energy(k).to_f64();
            if self.energy[k] < mean - tol {
                out.push(Violation::BelowMean { k, energy: self.energy[k], mean });
            }
        }
        out
    }

    /// Same sample times, grid and law (to round-off).
    pub fn aligned_with(&self, other: &Trajectory) -> Result<(), TrajectoryError> {
        if self.law != other.law {
            return Err(TrajectoryError::Mismatch("different gas laws".into()));
        }
        if !self.grid().same_as(other.grid()) {
            return Err(TrajectoryError::Mismatch("different grids".into()));
        }
        if self.times.len() != other.times.len() {
            return Err(TrajectoryError::Mismatch(format!("{} vs {} samples", self.times.len(), other.times.len())));
        }
        let scale = self.t_end().max(1.0);
        if let Some(k) = self.times.iter().zip(&other.times).position(|(a, b)| (a - b).abs() > 1e-12 * scale) {
            return Err(TrajectoryError::Mismatch(format!("sample {k} at different times")));
        }
        Ok(())
    }

    /// Replaces the energy curve, keeping the fields.
    pub fn with_energy(&self, e0: f64, energy: Vec<f64>) -> Result<Trajectory, TrajectoryError> {
        Trajectory::new(self.law, self.times.clone(), self.states.clone(), e0, energy)
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use crate::fields::Boundary;

    pub fn law2() -> GasLaw {
        GasLaw::new(1.0, 2.0).unwrap()
    }

    /// Zero fields on a small 1D grid with the given energy curve.
    pub fn vacuum_traj(times: &[f64], e0: f64, energy: &[f64]) -> Trajectory {
        let g = Grid::unit_1d(4, Boundary::Periodic).unwrap();
        let s = FluidState::uniform(g, 0.0, [0.0; 2]).unwrap();
        Trajectory::new(law2(), times.to_vec(), vec![s; times.len()], e0, energy.to_vec()).unwrap()
    }

    /// Constant state `rho = 1, m = 0` with `E` equal to its mean energy.
    pub fn constant_traj(n: usize, dt: f64) -> Trajectory {
        let g = Grid::unit_1d(8, Boundary::Periodic).unwrap();
        let s = FluidState::uniform(g, 1.0, [0.0; 2]).unwrap();
        let e = integrate_energy(&s, &law2()).to_f64();
        let times = (0..n).map(|k| k as f64 * dt).collect();
        Trajectory::new(law2(), times, vec![s; n], e, vec![e; n]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    #[test]
    fn construction_checks_invariants() {
        let t = [0.0, 1.0, 2.0];
        let g = crate::fields::Grid::unit_1d(4, crate::fields::Boundary::Periodic).unwrap();
        let s = FluidState::uniform(g, 1.0, [0.0; 2]).unwrap();
        let mean = integrate_energy(&s, &law2()).to_f64();
        let err =
            Trajectory::new(law2(), t.to_vec(), vec![s.clone(); 3], mean, vec![mean, 1.5 * mean, mean]).unwrap_err();
        assert!(matches!(err, TrajectoryError::Increasing { k: 1, .. }));
        let err =
            Trajectory::new(law2(), t.to_vec(), vec![s.clone(); 3], mean, vec![mean, mean, 0.5 * mean]).unwrap_err();
        assert!(matches!(err, TrajectoryError::BelowMean { k: 2, .. }));
        let err = Trajectory::new(law2(), vec![0.0, 1.0, 1.0], vec![s.clone(); 3], mean, vec![mean; 3]).unwrap_err();
        assert!(matches!(err, TrajectoryError::Times(_)));
        let err = Trajectory::new(law2(), vec![0.1, 1.0], vec![s; 2], mean, vec![mean; 2]).unwrap_err();
        assert!(matches!(err, TrajectoryError::Times(_)));
    }

    #[test]
    fn left_continuous_point_values() {
        let tr = vacuum_traj(&[0.0, 1.0, 2.0], 3.0, &[2.0, 1.0, 0.5]);
        assert_eq!(tr.energy_at(0.0), 3.0);
        assert_eq!(tr.energy_at(0.5), 2.0);
        assert_eq!(tr.energy_at(1.0), 2.0);
        assert_eq!(tr.energy_at(1.5), 1.0);
        assert_eq!(tr.energy_at(2.0), 1.0);
        assert_eq!(tr.energy_at(7.0), 0.5);
        assert_eq!(tr.energy_point(0), 3.0);
        assert_eq!(tr.energy_point(2), 1.0);
        assert_eq!(tr.sample_index(1.0), Some(1));
        assert_eq!(tr.sample_index(1.5), None);
    }
}
