use serde::Serialize;

use super::algebra::concatenate;
use super::order::{compare_local, OrderResult, OrderTolerances};
use super::{Trajectory, TrajectoryError};
use crate::dissipative::{DissipativeError, ReynoldsField};
use crate::fields::FluidState;

/// First sample at which the energy defect exceeds a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StoppingTime {
    At {
        t: f64,
        k: usize,
    },
    /// The defect stays below the threshold up to the last sample.
    Horizon,
}

impl StoppingTime {
    pub fn time(&self) -> f64 {
        match self {
            StoppingTime::At { t, .. } => *t,
            StoppingTime::Horizon => f64::INFINITY,
        }
    }
}

/// `T(delta)`: the first sample time with `D_E > delta`.
pub fn stopping_time(traj: &Trajectory, delta: f64) -> StoppingTime {
    (0..traj.len())
        .find(|&k| traj.raw_defect(k) > delta)
        .map_or(StoppingTime::Horizon, |k| StoppingTime::At { t: traj.times()[k], k })
}

/// Concatenates `continuation` at `t`, where it must start from the state of
/// `traj` at `t` with initial energy equal to that state's mean energy.
pub fn defect_reset(traj: &Trajectory, t: f64, continuation: &Trajectory) -> Result<Trajectory, TrajectoryError> {
    let k = traj.require_sample(t)?;
    let mean = traj.mean_energy(k).to_f64();
    let tol = traj.energy_tol().max(continuation.energy_tol());
    if (continuation.e0() - mean).abs() > tol {
        return Err(TrajectoryError::EnergyWindow { e: continuation.e0(), lo: mean, hi: mean });
    }
    concatenate(traj, continuation, t)
}

/// A competitor with smaller energy right after the reset time.
#[derive(Debug, Clone)]
pub struct Improvement {
    pub competitor: Trajectory,
    /// Result of comparing the competitor with the original trajectory.
    pub order: OrderResult,
    /// Energy defect of the original trajectory at the reset time.
    pub epsilon: f64,
    /// `(T, T + delta)` on which the competitor stays at least `epsilon / 2`
    /// below the original energy, clipped at the last sample.
    pub window: (f64, f64),
    /// Smallest energy gap on `window`.
    pub gap: f64,
}

/// Removes the energy defect at `t` by a reset to the mean energy and
/// compares the result with `traj` in the local order.
pub fn improve(
    traj: &Trajectory,
    t: f64,
    continuation: &Trajectory,
    tol: &OrderTolerances,
) -> Result<Improvement, TrajectoryError> {
    let k = traj.require_sample(t)?;
    let epsilon = traj.raw_defect(k);
    let threshold = tol.strict * traj.e0().max(f64::MIN_POSITIVE);
    if epsilon <= threshold {
        return Err(TrajectoryError::NothingToImprove { t, defect: epsilon, tol: threshold });
    }
    let competitor = defect_reset(traj, t, continuation)?;
    let order = compare_local(&competitor, traj, tol)?;
    let diff = |j: usize| traj.energy()[j] - competitor.energy()[j];
    let n = traj.len();
    let mut end = k;
    let mut gap = diff(k);
    while end + 1 < n && diff(end + 1) >= 0.5 * epsilon {
        end += 1;
        gap = gap.min(diff(end));
    }
    let times = traj.times();
    let stop = times[(end + 1).min(n - 1)];
    Ok(Improvement { competitor, order, epsilon, window: (times[k], stop), gap })
}

/// Both trajectories with the energy replaced by `min(E_u, E_v)` from `t` on.
///
/// The fields of `u` and `v` must agree at every sample from `t` on.
pub fn min_energy_merge(
    u: &Trajectory,
    v: &Trajectory,
    t: f64,
    tol: &OrderTolerances,
) -> Result<(Trajectory, Trajectory), TrajectoryError> {
    u.aligned_with(v)?;
    let k0 = u.require_sample(t)?;
    if let Some(k) = (k0..u.len()).find(|&k| !u.state(k).matches(v.state(k), tol.eq)) {
        return Err(TrajectoryError::MergeFields { k });
    }
    let merged = |w: &Trajectory| {
        let energy =
            (0..w.len()).map(|k| if k < k0 { w.energy()[k] } else { u.energy()[k].min(v.energy()[k]) }).collect();
        w.with_energy(w.e0(), energy)
    };
    Ok((merged(u)?, merged(v)?))
}

/// Reynolds stress of a merged trajectory: its own stress before `t`, and
/// from `t` on the stress of whichever of `u`, `v` has the smaller energy
/// (ties go to `u`).
pub fn switch_reynolds(
    u: &Trajectory,
    r_u: &ReynoldsField,
    v: &Trajectory,
    r_v: &ReynoldsField,
    t: f64,
) -> Result<ReynoldsField, TrajectoryError> {
    u.aligned_with(v)?;
    let k0 = u.require_sample(t)?;
    let mismatch = |e: crate::dissipative::DissipativeError| TrajectoryError::Mismatch(e.to_string());
    r_u.check_against(u).map_err(mismatch)?;
    r_v.check_against(v).map_err(mismatch)?;
    let stress = (0..u.len())
        .map(|k| if k >= k0 && u.energy()[k] > v.energy()[k] { r_v.sample(k).to_vec() } else { r_u.sample(k).to_vec() })
        .collect();
    ReynoldsField::new(*u.grid(), u.times().to_vec(), stress).map_err(mismatch)
}

/// Trajectory whose energy defect stays at or below `delta`, built by
/// repeated resets.
#[derive(Debug, Clone)]
pub struct DefectCap {
    pub trajectory: Trajectory,
    pub reynolds: ReynoldsField,
    /// Reset times in increasing order.
    pub resets: Vec<f64>,
}

/// Resets `traj` to the mean energy at every stopping time `T(delta)` until
/// the defect stays below `delta` up to the horizon.
///
/// `continuation(state, e0, horizon)` must return a trajectory from `state`
/// with initial energy `e0` and zero initial defect, sampled like `traj` on
/// `[0, horizon]`, together with its Reynolds stress. A reset at the last
/// sample only lowers the final energy and does not call it.
pub fn cap_defect<E, F>(
    traj: &Trajectory,
    reynolds: &ReynoldsField,
    delta: f64,
    mut continuation: F,
) -> Result<DefectCap, E>
where
    E: From<TrajectoryError> + From<DissipativeError>,
    F: FnMut(&FluidState, f64, f64) -> Result<(Trajectory, ReynoldsField), E>,
{
    reynolds.check_against(traj)?;
    let mut traj = traj.clone();
    let mut reynolds = reynolds.clone();
    let mut resets = Vec::new();
    let mut last: Option<usize> = None;
    while let StoppingTime::At { t, k } = stopping_time(&traj, delta) {
        if last.is_some_and(|j| k <= j) {
            return Err(
                TrajectoryError::Shape(format!("continuation at t = {t} starts with a defect above {delta}")).into()
            );
        }
        let state = traj.state(k);
        let mean = traj.mean_energy(k).to_f64();
        let (tail, tail_stress) = if k + 1 == traj.len() {
            let single = Trajectory::new(*traj.law(), vec![0.0], vec![state.clone()], mean, vec![mean])?;
            let zero = ReynoldsField::zeros(&single);
            (single, zero)
        } else {
            continuation(state, mean, traj.t_end() - t)?
        };
        let next = defect_reset(&traj, t, &tail)?;
        reynolds = reynolds.join_at(k, &tail_stress, next.times().to_vec())?;
        traj = next;
        resets.push(t);
        last = Some(k);
    }
    Ok(DefectCap { trajectory: traj, reynolds, resets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::order::Relation;
    use crate::trajectory::shift;
    use crate::trajectory::testing::*;

    /// Constant fields with the energy curve offset from the mean energy.
    fn offset(offsets: &[f64], e0_offset: f64) -> Trajectory {
        let c = constant_traj(offsets.len(), 0.25);
        let mean = c.e0();
        c.with_energy(mean + e0_offset, offsets.iter().map(|o| mean + o).collect()).unwrap()
    }

    #[test]
    fn stopping_time_examples() {
        let c = constant_traj(5, 0.25);
        assert_eq!(stopping_time(&c, 0.1), StoppingTime::Horizon);
        // the fields lose energy at t = 0.5 while E stays put: D_E jumps to 0.75
        let g = *c.grid();
        let states: Vec<_> =
            [1.0, 1.0, 0.5, 0.5, 0.5].iter().map(|&r| FluidState::uniform(g, r, [0.0; 2]).unwrap()).collect();
        let s = Trajectory::new(law2(), c.times().to_vec(), states, 1.0, vec![1.0; 5]).unwrap();
        assert_eq!(stopping_time(&s, 0.3), StoppingTime::At { t: 0.5, k: 2 });
        assert_eq!(stopping_time(&s, 1.0), StoppingTime::Horizon);
        assert_eq!(StoppingTime::Horizon.time(), f64::INFINITY);
    }

    #[test]
    fn reset_removes_the_defect() {
        let u = offset(&[0.5; 5], 0.5);
        let k = 2;
        let mean = u.mean_energy(k).to_f64();
        let tail = shift(&u, 0.5).unwrap();
        let cont = tail.with_energy(mean, vec![mean; tail.len()]).unwrap();
        let w = defect_reset(&u, 0.5, &cont).unwrap();
        assert!(w.raw_defect(k).abs() < 1e-15);
        assert_eq!(w.energy()[1], u.energy()[1]);

        let c = constant_traj(5, 0.25);
        assert_eq!(defect_reset(&c, 0.5, &shift(&c, 0.5).unwrap()).unwrap(), c);
        assert!(matches!(defect_reset(&u, 0.5, &tail), Err(TrajectoryError::EnergyWindow { .. })));
    }

    #[test]
    fn improvement_drops_energy_by_the_defect() {
        let u = offset(&[1.0; 5], 1.0);
        let tail = shift(&u, 0.5).unwrap();
        let mean = u.mean_energy(2).to_f64();
        let cont = tail.with_energy(mean, vec![mean; tail.len()]).unwrap();
        let imp = improve(&u, 0.5, &cont, &OrderTolerances::default()).unwrap();
        assert_eq!(imp.order.relation, Relation::Less);
        assert!((imp.epsilon - 1.0).abs() < 1e-14);
        assert!(imp.gap >= imp.epsilon / 2.0);
        assert_eq!(imp.order.witness.unwrap().0, 0.5);
        assert_eq!(imp.window, (0.5, 1.0));

        let c = constant_traj(5, 0.25);
        assert!(matches!(
            improve(&c, 0.5, &shift(&c, 0.5).unwrap(), &OrderTolerances::default()),
            Err(TrajectoryError::NothingToImprove { .. })
        ));
    }

    #[test]
    fn merge_takes_the_pointwise_minimum() {
        let u = offset(&[1.0, 0.8, 0.3, 0.3, 0.1], 1.0);
        let v = offset(&[1.0, 0.6, 0.5, 0.2, 0.2], 1.0);
        let (a, b) = min_energy_merge(&u, &v, 0.25, &OrderTolerances::default()).unwrap();
        let mean = u.mean_energy(0).to_f64();
        let want: Vec<f64> = [1.0, 0.6, 0.3, 0.2, 0.1].iter().map(|o| mean + o).collect();
        assert_eq!(a.energy(), &want[..]);
        assert_eq!(b.energy(), &want[..]);
        assert!(a.violations().is_empty());

        let (a, _) = min_energy_merge(&u, &v, 0.75, &OrderTolerances::default()).unwrap();
        assert_eq!(&a.energy()[..3], &u.energy()[..3]);

        let g = *u.grid();
        let moved = FluidState::uniform(g, 1.0, [0.1, 0.0]).unwrap();
        let mut states = u.states().to_vec();
        states[3] = moved;
        let w = Trajectory::from_parts(*u.law(), u.times().to_vec(), states, u.e0(), u.energy().to_vec()).unwrap();
        assert!(matches!(
            min_energy_merge(&u, &w, 0.5, &OrderTolerances::default()),
            Err(TrajectoryError::MergeFields { k: 3 })
        ));
    }

    #[test]
    fn capped_defect_stays_below_the_threshold() {
        // fields lose 0.2 of mean energy per step while E stays at E0
        let c = constant_traj(6, 0.25);
        let g = *c.grid();
        let rho = |k: usize| (1.0 - 0.2 * k as f64).sqrt();
        let states: Vec<_> = (0..6).map(|k| FluidState::uniform(g, rho(k), [0.0; 2]).unwrap()).collect();
        let u = Trajectory::new(law2(), c.times().to_vec(), states.clone(), 1.0, vec![1.0; 6]).unwrap();
        let r = ReynoldsField::zeros(&u);
        let mut calls = 0;
        let cap = cap_defect::<DissipativeError, _>(&u, &r, 0.3, |s, e0, horizon| {
            calls += 1;
            // continuation: the same decay, energy frozen at e0
            let k0 = states.iter().position(|x| x == s).unwrap();
            let n = 6 - k0;
            assert!((horizon - 0.25 * (n - 1) as f64).abs() < 1e-12);
            let times = (0..n).map(|j| 0.25 * j as f64).collect();
            let t = Trajectory::new(law2(), times, states[k0..].to_vec(), e0, vec![e0; n])?;
            let z = ReynoldsField::zeros(&t);
            Ok((t, z))
        })
        .unwrap();
        let w = &cap.trajectory;
        assert!((0..w.len()).all(|k| w.raw_defect(k) <= 0.3 + 1e-12));
        assert_eq!(cap.resets, vec![0.5, 1.0]);
        assert_eq!(calls, 2);
        assert!(w.violations().is_empty());
        assert_eq!(cap.reynolds.times(), w.times());
    }
}
