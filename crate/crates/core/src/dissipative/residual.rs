//! Weak-form residuals of the continuity and momentum equations.
//!
//! Fields are reconstructed as piecewise constant in space (cell averages)
//! and piecewise linear in time between samples; fluxes are evaluated at the
//! samples and interpolated the same way. Against a separable test function
//! both integrals are then exact: spatial cell integrals of the bump and its
//! derivative are closed form, and the time integrals against the hat
//! functions of the samples are polynomial.

use rayon::prelude::*;
use serde::Serialize;

use super::{DissipativeError, ReynoldsField, TestFunction};
use crate::trajectory::Trajectory;

/// A residual together with the same sum taken over absolute values, which
/// sets its scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub value: f64,
    pub magnitude: f64,
}

impl Residual {
    /// `|value| / magnitude`, zero when both vanish.
    pub fn normalized(&self) -> f64 {
        if self.magnitude > 0.0 {
            self.value.abs() / self.magnitude
        } else {
            self.value.abs()
        }
    }
}

fn check(traj: &Trajectory, phi: &TestFunction) -> Result<(), DissipativeError> {
    phi.validate(traj.grid(), traj.t_end())
}

/// `int int rho d_t phi + m . grad phi dx dt`; the boundary terms vanish on
/// the support of `phi`.
pub fn continuity_residual(traj: &Trajectory, phi: &TestFunction) -> Result<Residual, DissipativeError> {
    check(traj, phi)?;
    if phi.component.is_some() {
        return Err(DissipativeError::TestFunction("continuity needs a scalar test function".into()));
    }
    let g = traj.grid();
    let x = phi.cell_integrals(g);
    let dx: Vec<Vec<f64>> = (0..g.dim()).map(|a| phi.cell_derivative_integrals(g, a)).collect();
    let (dw, w) = phi.time_weights(traj.times());
    let mut value = 0.0;
    let mut magnitude = 0.0;
    for k in 0..traj.len() {
        if dw[k] == 0.0 && w[k] == 0.0 {
            continue;
        }
        let s = traj.state(k);
        let (mut a, mut abs_a, mut b, mut abs_b) = (0.0, 0.0, 0.0, 0.0);
        for c in 0..g.len() {
            let t = s.rho()[c] * x[c];
            a += t;
            abs_a += t.abs();
            for (axis, d) in dx.iter().enumerate() {
                let t = s.m()[c][axis] * d[c];
                b += t;
                abs_b += t.abs();
            }
        }
        value += dw[k] * a + w[k] * b;
        magnitude += dw[k].abs() * abs_a + w[k].abs() * abs_b;
    }
    Ok(Residual { value, magnitude })
}

/// `int int m . d_t phi + (1_{rho>0} m m / rho + p I + R) : grad phi dx dt`.
pub fn momentum_residual(
    traj: &Trajectory,
    phi: &TestFunction,
    reynolds: Option<&ReynoldsField>,
) -> Result<Residual, DissipativeError> {
    check(traj, phi)?;
    let i =
        phi.component.ok_or_else(|| DissipativeError::TestFunction("momentum needs a vector test function".into()))?;
    if let Some(r) = reynolds {
        r.check_against(traj)?;
    }
    let law = traj.law();
    let g = traj.grid();
    let x = phi.cell_integrals(g);
    let dx: Vec<Vec<f64>> = (0..g.dim()).map(|a| phi.cell_derivative_integrals(g, a)).collect();
    let (dw, w) = phi.time_weights(traj.times());
    let mut value = 0.0;
    let mut magnitude = 0.0;
    for k in 0..traj.len() {
        if dw[k] == 0.0 && w[k] == 0.0 {
            continue;
        }
        let s = traj.state(k);
        let stress = reynolds.map(|r| r.sample(k));
        let (mut a, mut abs_a, mut b, mut abs_b) = (0.0, 0.0, 0.0, 0.0);
        for c in 0..g.len() {
            let rho = s.rho()[c];
            let m = s.m()[c];
            let t = m[i] * x[c];
            a += t;
            abs_a += t.abs();
            for (j, d) in dx.iter().enumerate() {
                let mut flux = if rho > 0.0 { m[i] * m[j] / rho } else { 0.0 };
                if i == j {
                    flux += law.p(rho);
                }
                if let Some(r) = stress {
                    flux += r[c].get(i, j);
                }
                let t = flux * d[c];
                b += t;
                abs_b += t.abs();
            }
        }
        value += dw[k] * a + w[k] * b;
        magnitude += dw[k].abs() * abs_a + w[k].abs() * abs_b;
    }
    Ok(Residual { value, magnitude })
}

/// Largest normalized residuals over a dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DictionaryResiduals {
    pub continuity: f64,
    pub momentum: f64,
}

impl DictionaryResiduals {
    pub fn max(&self) -> f64 {
        self.continuity.max(self.momentum)
    }
}

pub fn dictionary_residuals(
    traj: &Trajectory,
    dict: &super::Dictionary,
    reynolds: Option<&ReynoldsField>,
) -> Result<DictionaryResiduals, DissipativeError> {
    let continuity = dict
        .scalar
        .par_iter()
        .map(|f| continuity_residual(traj, f).map(|r| r.normalized()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let momentum = dict
        .vector
        .par_iter()
        .map(|f| momentum_residual(traj, f, reynolds).map(|r| r.normalized()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(DictionaryResiduals { continuity, momentum })
}
