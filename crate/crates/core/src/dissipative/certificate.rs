use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{compatibility_at, defect_at, dictionary_residuals, Dictionary, DissipativeError, ReynoldsField};
use crate::eos::DefectRule;
use crate::io::{num, write_json, write_table, IoError};
use crate::trajectory::Trajectory;

/// Tolerances of a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Normalized weak-form residual allowed per unit of grid spacing.
    pub residual_per_dx: f64,
    /// Overrides the spacing-scaled residual tolerance when set.
    pub residual: Option<f64>,
    /// Energy monotonicity, negative defect and compatibility slack, relative
    /// to the energy scale of the trajectory.
    pub energy_rel: f64,
    /// Negative eigenvalues of the Reynolds stress relative to its norm.
    pub psd_rel: f64,
    pub defect_rule: DefectRule,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual_per_dx: 4.0,
            residual: None,
            energy_rel: 1e-10,
            psd_rel: 1e-10,
            defect_rule: DefectRule::Standard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes iff `value <= tolerance`.
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

/// One row of the per-time table `t,defect,traceR,slack`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeRow {
    pub t: f64,
    pub defect: f64,
    pub trace: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipativeCertificate {
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Largest normalized momentum residual with the stress left out, for
    /// comparison with the `momentum-residual` check.
    pub momentum_residual_without_stress: f64,
    /// `momentum_residual_without_stress / momentum-residual`.
    pub stress_reduction: f64,
    pub defect_constant: f64,
    pub rows: Vec<TimeRow>,
}

impl DissipativeCertificate {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }

    pub fn write_json(&self, path: &Path) -> Result<(), IoError> {
        write_json(path, self)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), IoError> {
        let rows = self.rows.iter().map(|r| [num(r.t), num(r.defect), num(r.trace), num(r.slack)]);
        write_table(path, &["t", "defect", "traceR", "slack"], rows)
    }
}

/// Checks the weak forms over `dict`, energy monotonicity, vacuum
/// consistency, positive semidefiniteness of `reynolds`, nonnegativity of the
/// energy defect and the defect/stress compatibility at every sample time.
pub fn certify(
    traj: &Trajectory,
    reynolds: &ReynoldsField,
    dict: &Dictionary,
    tol: &Tolerances,
) -> Result<DissipativeCertificate, DissipativeError> {
    reynolds.check_against(traj)?;
    let energy_tol = tol.energy_rel * traj.energy_scale();
    let residual_tol = tol.residual.unwrap_or(tol.residual_per_dx * traj.grid().max_spacing());
    let with = dictionary_residuals(traj, dict, Some(reynolds))?;
    let without = dictionary_residuals(traj, dict, None)?;

    let mut increase: f64 = 0.0;
    let mut prev = traj.e0();
    for &e in traj.energy() {
        increase = increase.max(e - prev);
        prev = e;
    }
    let vacuum = (0..traj.len()).filter(|&k| traj.state(k).first_vacuum_momentum().is_some()).count();
    let psd = (0..traj.len()).map(|k| reynolds.psd_defect(k).0).fold(0.0, f64::max);
    let r = tol.defect_rule.value(traj.grid().dim(), traj.law())?;
    let mut rows = Vec::with_capacity(traj.len());
    let mut worst_defect: f64 = 0.0;
    let mut worst_slack = f64::INFINITY;
    for k in 0..traj.len() {
        worst_defect = worst_defect.min(defect_at(traj, k).raw);
        let c = compatibility_at(traj, reynolds, k, r, energy_tol);
        worst_slack = worst_slack.min(c.slack);
        rows.push(TimeRow { t: c.t, defect: c.defect, trace: c.trace, slack: c.slack });
    }
    let checks = vec![
        Check::at_most("continuity-residual", with.continuity, residual_tol),
        Check::at_most("momentum-residual", with.momentum, residual_tol),
        Check::at_most("energy-monotonicity", increase, energy_tol),
        Check::at_most("vacuum-consistency", vacuum as f64, 0.0),
        Check::at_most("reynolds-psd", psd, tol.psd_rel),
        Check::at_most("defect-nonnegative", -worst_defect, energy_tol),
        Check::at_most("compatibility", -worst_slack, energy_tol),
    ];
    Ok(DissipativeCertificate {
        pass: checks.iter().all(|c| c.pass),
        checks,
        momentum_residual_without_stress: without.momentum,
        stress_reduction: if with.momentum > 0.0 { without.momentum / with.momentum } else { 1.0 },
        defect_constant: r,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipative::default_dictionary;
    use crate::eos::GasLaw;
    use crate::fields::{integrate_energy, Boundary, FluidState, Grid};

    fn constant(energy: Vec<f64>) -> Trajectory {
        let g = Grid::unit_1d(32, Boundary::Reflective).unwrap();
        let law = GasLaw::new(1.0, 2.0).unwrap();
        let s = FluidState::uniform(g, 1.0, [0.0; 2]).unwrap();
        let n = energy.len();
        let times = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
        let e0 = energy[0];
        Trajectory::from_parts(law, times, vec![s; n], e0, energy).unwrap()
    }

    #[test]
    fn constant_state_passes() {
        let tr = constant(vec![1.0; 6]);
        assert_eq!(integrate_energy(tr.state(0), tr.law()).to_f64(), 1.0);
        let dict = default_dictionary(tr.grid(), 1.0).unwrap();
        let c = certify(&tr, &ReynoldsField::zeros(&tr), &dict, &Tolerances::default()).unwrap();
        assert!(c.pass, "{:?}", c.failed());
        assert!(c.check("continuity-residual").unwrap().value <= 1e-12);
        assert!(c.check("momentum-residual").unwrap().value <= 1e-12);
        assert_eq!(c.rows.len(), 6);
    }

    #[test]
    fn increasing_energy_fails() {
        let tr = constant(vec![1.5, 1.5, 2.0, 2.0, 2.0, 2.0]);
        let dict = default_dictionary(tr.grid(), 1.0).unwrap();
        let c = certify(&tr, &ReynoldsField::zeros(&tr), &dict, &Tolerances::default()).unwrap();
        assert!(!c.pass);
        assert_eq!(c.failed(), vec!["energy-monotonicity"]);
    }

    #[test]
    fn oversized_stress_fails_compatibility() {
        let tr = constant(vec![1.5; 6]);
        let g = *tr.grid();
        let big = vec![vec![crate::dissipative::Sym2 { xx: 2.0, xy: 0.0, yy: 0.0 }; g.len()]; 6];
        let r = ReynoldsField::new(g, tr.times().to_vec(), big).unwrap();
        let dict = default_dictionary(&g, 1.0).unwrap();
        let c = certify(&tr, &r, &dict, &Tolerances::default()).unwrap();
        // defect 0.5 against 0.5 * trace 2
        assert!(c.failed().contains(&"compatibility"));
        assert!((c.rows[0].slack + 0.5).abs() < 1e-12);
    }
}
