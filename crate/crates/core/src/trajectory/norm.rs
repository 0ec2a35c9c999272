use super::{Trajectory, TrajectoryError};
use crate::eos::GasLaw;
use crate::fields::FluidState;

/// `(1 - e^{-rate*dt}) / rate`, accurate for small arguments.
#[inline]
fn window_weight(rate: f64, dt: f64) -> f64 {
    -(-rate * dt).exp_m1() / rate
}

/// `int_0^inf e^{-rate t} g(t) dt` for the step function `g = values[k]` on
/// `[t_k, t_{k+1})`, extended by the last value beyond `t_N`.
pub fn exp_weighted_integral(times: &[f64], values: &[f64], rate: f64) -> f64 {
    let n = times.len();
    let mut sum = 0.0;
    for k in 0..n - 1 {
        sum += values[k] * (-rate * times[k]).exp() * window_weight(rate, times[k + 1] - times[k]);
    }
    sum + values[n - 1] * (-rate * times[n - 1]).exp() / rate
}

/// `int_0^{t_upto} e^{-rate t} g(t) dt` for the same step function.
pub fn exp_weighted_partial(times: &[f64], values: &[f64], rate: f64, upto: usize) -> f64 {
    (0..upto).map(|k| values[k] * (-rate * times[k]).exp() * window_weight(rate, times[k + 1] - times[k])).sum()
}

/// Upper end `2 gamma / (gamma + 1)` of the admissible exponent range.
pub fn max_exponent(law: &GasLaw) -> f64 {
    2.0 * law.gamma() / (law.gamma() + 1.0)
}

pub(crate) fn check_exponent(q: f64, law: &GasLaw) -> Result<(), TrajectoryError> {
    let max = max_exponent(law);
    if q > 1.0 && q <= max * (1.0 + 1e-15) {
        Ok(())
    } else {
        Err(TrajectoryError::Exponent { q, max })
    }
}

/// `||rho||_q^q + ||m||_q^q` with the Euclidean norm of `m` in each cell.
pub(crate) fn field_q_power(state: &FluidState, q: f64) -> f64 {
    let s: f64 = state.rho().iter().zip(state.m()).map(|(r, m)| r.abs().powf(q) + m[0].hypot(m[1]).powf(q)).sum();
    s * state.grid().cell_volume()
}

pub(crate) fn momentum_q_power(state: &FluidState, q: f64) -> f64 {
    let s: f64 = state.m().iter().map(|m| m[0].hypot(m[1]).powf(q)).sum();
    s * state.grid().cell_volume()
}

/// Per-sample density `||rho_k||_q^q + ||m_k||_q^q + |E_k|^q`.
pub(crate) fn full_density(traj: &Trajectory, q: f64) -> Vec<f64> {
    traj.states().iter().zip(traj.energy()).map(|(s, e)| field_q_power(s, q) + e.abs().powf(q)).collect()
}

/// `int_0^inf e^{-t} [||rho||_q^q + ||m||_q^q + |E|^q] dt`.
pub fn weighted_norm_q_power(traj: &Trajectory, q: f64) -> Result<f64, TrajectoryError> {
    check_exponent(q, traj.law())?;
    Ok(exp_weighted_integral(traj.times(), &full_density(traj, q), 1.0))
}

/// Exponentially weighted `L^q` norm of the trajectory.
pub fn weighted_norm(traj: &Trajectory, q: f64) -> Result<f64, TrajectoryError> {
    Ok(weighted_norm_q_power(traj, q)?.powf(1.0 / q))
}
