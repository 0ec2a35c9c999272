use super::{Trajectory, TrajectoryError};
use crate::dissipative::{mixing_stress, ReynoldsField};

/// Relative weighted-L1 tolerance for matching states at a junction.
pub const JUNCTION_TOL: f64 = 1e-10;

/// Time shift `S_T`: the trajectory restarted at the sample time `t`.
///
/// The new `E(0)` is the point value `E(T)`.
pub fn shift(traj: &Trajectory, t: f64) -> Result<Trajectory, TrajectoryError> {
    let k = traj.require_sample(t)?;
    let t0 = traj.times()[k];
    let times = traj.times()[k..].iter().map(|s| s - t0).collect();
    let mut times: Vec<f64> = times;
    times[0] = 0.0;
    Trajectory::new(*traj.law(), times, traj.states()[k..].to_vec(), traj.energy_point(k), traj.energy()[k..].to_vec())
}

/// `u` on `[0, T]` followed by `v` restarted at `T`.
///
/// `v` must start from the state of `u` at `T`, with an initial energy
/// between the mean energy of that state and `E_u(T)`.
pub fn concatenate(u: &Trajectory, v: &Trajectory, t: f64) -> Result<Trajectory, TrajectoryError> {
    let k = u.require_sample(t)?;
    if u.law() != v.law() || !u.grid().same_as(v.grid()) {
        return Err(TrajectoryError::Mismatch("continuation on a different grid or law".into()));
    }
    let junction = u.state(k);
    let start = v.state(0);
    let scale = junction.l1_norm().max(start.l1_norm());
    let gap = if scale > 0.0 { junction.l1_distance(start) / scale } else { 0.0 };
    if gap > JUNCTION_TOL {
        return Err(TrajectoryError::FieldMismatch { gap });
    }
    let tol = u.energy_tol().max(v.energy_tol());
    let lo = u.mean_energy(k).to_f64();
    let hi = u.energy_point(k);
    if v.e0() < lo - tol || v.e0() > hi + tol {
        return Err(TrajectoryError::EnergyWindow { e: v.e0(), lo, hi });
    }
    let t0 = u.times()[k];
    let mut times = u.times()[..=k].to_vec();
    times.extend(v.times()[1..].iter().map(|s| t0 + s));
    let mut states = u.states()[..=k].to_vec();
    states.extend_from_slice(&v.states()[1..]);
    let mut energy = u.energy()[..k].to_vec();
    energy.extend_from_slice(v.energy());
    Trajectory::new(*u.law(), times, states, u.e0(), energy)
}

/// `lambda u + (1 - lambda) v` together with the additional Reynolds stress
/// generated by mixing the two flows.
pub fn convex_combine(
    u: &Trajectory,
    v: &Trajectory,
    lambda: f64,
) -> Result<(Trajectory, ReynoldsField), TrajectoryError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(TrajectoryError::Shape(format!("lambda = {lambda} outside [0, 1]")));
    }
    u.aligned_with(v)?;
    if !u.state(0).matches(v.state(0), super::OrderTolerances::default().eq) || u.e0() != v.e0() {
        return Err(TrajectoryError::Mismatch("different initial data".into()));
    }
    let mu = 1.0 - lambda;
    let states: Vec<_> = u.states().iter().zip(v.states()).map(|(a, b)| a.affine(b, lambda)).collect();
    let energy = u.energy().iter().zip(v.energy()).map(|(a, b)| lambda * a + mu * b).collect();
    let law = *u.law();
    let stress = u.states().iter().zip(v.states()).map(|(a, b)| mixing_stress(&[a, b], &[lambda, mu], &law)).collect();
    let field =
        ReynoldsField::new(*u.grid(), u.times().to_vec(), stress).map_err(|e| TrajectoryError::Shape(e.to_string()))?;
    let mixed = Trajectory::new(law, u.times().to_vec(), states, lambda * u.e0() + mu * v.e0(), energy)?;
    Ok((mixed, field))
}
