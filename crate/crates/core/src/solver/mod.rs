//! Finite-volume schemes for the isentropic Euler system, adaptive CFL time
//! stepping and the exact 1D Riemann solver.

mod riemann;

pub use riemann::{exact_riemann, riemann_cell_averages, riemann_initial, RiemannData, RiemannSolution};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eos::GasLaw;
use crate::fields::{integrate_energy, Boundary, DataTriple, FieldError, FluidState, Grid};
use crate::trajectory::{Trajectory, TrajectoryError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("time step {dt:e} exceeds the CFL bound {max:e}")]
    Cfl { dt: f64, max: f64 },
    #[error("negative density {rho:e} in cell {cell} after the update")]
    NegativeDensity { cell: usize, rho: f64 },
    #[error("invalid scheme: {0}")]
    Scheme(String),
    #[error("invalid run parameters: {0}")]
    Run(String),
    #[error("invalid Riemann data: {0}")]
    RiemannData(String),
    #[error("the Riemann data form a vacuum region")]
    Vacuum,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error("ensemble member {member}: {source}")]
    Member {
        member: usize,
        #[source]
        source: Box<SolverError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxKind {
    /// Local Lax-Friedrichs (Rusanov).
    Llf,
    /// Harten-Lax-van Leer with Davis wave-speed estimates.
    Hll,
}

/// Numerical flux, artificial viscosity `nu` (adds `nu dx` times the
/// Laplacian of the conserved variables) and CFL number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    pub flux: FluxKind,
    #[serde(default)]
    pub nu: f64,
    pub cfl: f64,
}

impl SchemeSpec {
    pub fn new(flux: FluxKind, nu: f64, cfl: f64) -> Result<Self, SolverError> {
        let s = Self { flux, nu, cfl };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(SolverError::Scheme(format!("nu = {} must be >= 0", self.nu)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SolverError::Scheme(format!("cfl = {} outside (0, 1]", self.cfl)));
        }
        Ok(())
    }
}

/// How the energy curve of a run is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyRecord {
    /// `E(t_k+) = min(E_0, min_{j <= k} mean energy(t_j))`.
    #[default]
    RunningMin,
    /// Mean energy plus the energy dissipated by the scheme so far, i.e. the
    /// constant `E_0`.
    DissipationBudget,
}

/// Conserved variables `(rho, m_normal, m_tangential)` of a cell, rotated to
/// an axis.
type Cons = [f64; 3];

#[inline]
fn rotate(rho: f64, m: [f64; 2], axis: usize) -> Cons {
    if axis == 0 {
        [rho, m[0], m[1]]
    } else {
        [rho, m[1], m[0]]
    }
}

#[inline]
fn physical_flux(u: &Cons, law: &GasLaw) -> Cons {
    if u[0] <= 0.0 {
        return [0.0; 3];
    }
    let vn = u[1] / u[0];
    [u[1], u[1] * vn + law.p(u[0]), u[2] * vn]
}

/// Normal velocity and sound speed.
#[inline]
fn speeds(u: &Cons, law: &GasLaw) -> (f64, f64) {
    if u[0] <= 0.0 {
        (0.0, 0.0)
    } else {
        (u[1] / u[0], law.sound_speed(u[0]))
    }
}

fn numerical_flux(ul: &Cons, ur: &Cons, spec: &SchemeSpec, law: &GasLaw) -> Cons {
    let fl = physical_flux(ul, law);
    let fr = physical_flux(ur, law);
    let (vl, cl) = speeds(ul, law);
    let (vr, cr) = speeds(ur, law);
    let mut f = [0.0; 3];
    match spec.flux {
        FluxKind::Llf => {
            let s = (vl.abs() + cl).max(vr.abs() + cr);
            for q in 0..3 {
                f[q] = 0.5 * (fl[q] + fr[q]) - 0.5 * s * (ur[q] - ul[q]);
            }
        }
        FluxKind::Hll => {
            let sl = (vl - cl).min(vr - cr);
            let sr = (vl + cl).max(vr + cr);
            if sl >= 0.0 {
                f = fl;
            } else if sr <= 0.0 {
                f = fr;
            } else {
                for q in 0..3 {
                    f[q] = (sr * fl[q] - sl * fr[q] + sl * sr * (ur[q] - ul[q])) / (sr - sl);
                }
            }
        }
    }
    for q in 0..3 {
        f[q] -= spec.nu * (ur[q] - ul[q]);
    }
    f
}

/// Largest time step allowed by the CFL condition,
/// `cfl / sum_axes (max wave speed + 2 nu) / dx`; infinite if nothing moves.
pub fn max_stable_dt(state: &FluidState, spec: &SchemeSpec, law: &GasLaw) -> f64 {
    let g = state.grid();
    let mut rate = 0.0;
    for axis in 0..g.dim() {
        let smax = state
            .rho()
            .iter()
            .zip(state.m())
            .map(|(&r, m)| if r <= 0.0 { 0.0 } else { (m[axis] / r).abs() + law.sound_speed(r) })
            .fold(0.0, f64::max);
        rate += (smax + 2.0 * spec.nu) / g.spacing(axis);
    }
    if rate > 0.0 {
        spec.cfl / rate
    } else {
        f64::INFINITY
    }
}

/// Neighbour of cell `(i, j)` along `axis` in direction `dir` (+1 or -1);
/// `None` with a mirrored ghost value at a reflective wall.
fn neighbour(g: &Grid, i: usize, j: usize, axis: usize, dir: isize) -> Option<usize> {
    let n = g.cells()[axis] as isize;
    let pos = if axis == 0 { i } else { j } as isize + dir;
    let wrapped = if pos < 0 || pos >= n {
        match g.boundary(axis) {
            Boundary::Periodic => pos.rem_euclid(n),
            Boundary::Reflective => return None,
        }
    } else {
        pos
    } as usize;
    Some(if axis == 0 { g.index(wrapped, j) } else { g.index(i, wrapped) })
}

/// One forward-Euler finite-volume update.
pub fn step(state: &FluidState, spec: &SchemeSpec, law: &GasLaw, dt: f64) -> Result<FluidState, SolverError> {
    spec.validate()?;
    let max = max_stable_dt(state, spec, law);
    if !(dt > 0.0) || dt > max * (1.0 + 1e-12) {
        return Err(SolverError::Cfl { dt, max });
    }
    let g = *state.grid();
    let rho = state.rho();
    let m = state.m();
    let mut new_rho = rho.to_vec();
    let mut new_m = m.to_vec();
    for axis in 0..g.dim() {
        let ratio = dt / g.spacing(axis);
        let [nx, ny] = g.cells();
        for j in 0..ny {
            for i in 0..nx {
                let c = g.index(i, j);
                let uc = rotate(rho[c], m[c], axis);
                // only the right face of each cell, plus the left wall face
                let right = match neighbour(&g, i, j, axis, 1) {
                    Some(n) => rotate(rho[n], m[n], axis),
                    None => [uc[0], -uc[1], uc[2]],
                };
                let f = numerical_flux(&uc, &right, spec, law);
                apply(&mut new_rho, &mut new_m, c, axis, -ratio, &f);
                if let Some(n) = neighbour(&g, i, j, axis, 1) {
                    apply(&mut new_rho, &mut new_m, n, axis, ratio, &f);
                }
                if neighbour(&g, i, j, axis, -1).is_none() {
                    let ghost = [uc[0], -uc[1], uc[2]];
                    let f = numerical_flux(&ghost, &uc, spec, law);
                    apply(&mut new_rho, &mut new_m, c, axis, ratio, &f);
                }
            }
        }
    }
    if let Some((cell, &r)) = new_rho.iter().enumerate().find(|(_, r)| **r < 0.0 || !r.is_finite()) {
        return Err(SolverError::NegativeDensity { cell, rho: r });
    }
    Ok(FluidState::new(g, new_rho, new_m)?)
}

#[inline]
fn apply(rho: &mut [f64], m: &mut [[f64; 2]], c: usize, axis: usize, coef: f64, f: &Cons) {
    rho[c] += coef * f[0];
    let (n, t) = if axis == 0 { (0, 1) } else { (1, 0) };
    m[c][n] += coef * f[1];
    m[c][t] += coef * f[2];
}

/// Sample times `0, dt, 2 dt, ...` closed by `t_end`.
pub fn sample_times(t_end: f64, sample_dt: f64) -> Result<Vec<f64>, SolverError> {
    if !(t_end > 0.0 && t_end.is_finite()) || !(sample_dt > 0.0 && sample_dt.is_finite()) {
        return Err(SolverError::Run(format!("t_end = {t_end} and sample_dt = {sample_dt} must be positive")));
    }
    let mut times = vec![0.0];
    let mut k = 1;
    loop {
        let t = k as f64 * sample_dt;
        if t >= t_end * (1.0 - 1e-12) {
            break;
        }
        times.push(t);
        k += 1;
    }
    times.push(t_end);
    Ok(times)
}

/// Advances the data with adaptive CFL steps and records the state at the
/// sample times `k * sample_dt`.
pub fn run(
    triple: &DataTriple,
    spec: &SchemeSpec,
    law: &GasLaw,
    t_end: f64,
    sample_dt: f64,
    record: EnergyRecord,
) -> Result<Trajectory, SolverError> {
    spec.validate()?;
    let times = sample_times(t_end, sample_dt)?;
    let mut state = triple.state0.clone();
    if let Some(cell) = state.first_vacuum_momentum() {
        return Err(FieldError::VacuumMomentum { cell }.into());
    }
    let mut states = vec![state.clone()];
    let mut t = 0.0;
    for &target in &times[1..] {
        while t < target {
            let max = max_stable_dt(&state, spec, law);
            let remaining = target - t;
            // avoid a sliver step right before the sample time
            let dt = if max >= remaining || max.is_infinite() {
                remaining
            } else if max * 1.5 > remaining {
                0.5 * remaining
            } else {
                max
            };
            state = step(&state, spec, law, dt)?;
            t = if dt == remaining { target } else { t + dt };
        }
        states.push(state.clone());
    }
    let energy = match record {
        EnergyRecord::RunningMin => {
            let mut env = triple.e0;
            states
                .iter()
                .map(|s| {
                    env = env.min(integrate_energy(s, law).to_f64());
                    env
                })
                .collect()
        }
        EnergyRecord::DissipationBudget => vec![triple.e0; states.len()],
    };
    Ok(Trajectory::from_parts(*law, times, states, triple.e0, energy)?)
}

/// Runs every scheme from the same data in parallel; the first failure is
/// reported with its member index.
pub fn run_ensemble(
    triple: &DataTriple,
    specs: &[SchemeSpec],
    law: &GasLaw,
    t_end: f64,
    sample_dt: f64,
    record: EnergyRecord,
) -> Result<Vec<Trajectory>, SolverError> {
    specs
        .par_iter()
        .enumerate()
        .map(|(member, spec)| {
            run(triple, spec, law, t_end, sample_dt, record)
                .map_err(|e| SolverError::Member { member, source: Box::new(e) })
        })
        .collect()
}

/// Right-moving simple acoustic wave `rho = rho0 (1 + eps sin(2 pi x / L))`,
/// `m = c0 (rho - rho0)` along the first axis.
pub fn acoustic_pulse(grid: &Grid, law: &GasLaw, rho0: f64, amplitude: f64) -> Result<FluidState, SolverError> {
    let c0 = law.sound_speed(rho0);
    let (lo, hi) = (grid.lower()[0], grid.upper()[0]);
    let k = 2.0 * std::f64::consts::PI / (hi - lo);
    // exact cell averages of the sine profile
    let dx = grid.spacing(0);
    let avg = |x: f64| {
        let a = x - 0.5 * dx - lo;
        let b = x + 0.5 * dx - lo;
        ((k * a).cos() - (k * b).cos()) / (k * dx)
    };
    Ok(FluidState::from_fn(*grid, |x, _| {
        let s = avg(x);
        let rho = rho0 * (1.0 + amplitude * s);
        (rho, [c0 * rho0 * amplitude * s, 0.0])
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law2() -> GasLaw {
        GasLaw::new(1.0, 2.0).unwrap()
    }

    fn llf(nu: f64) -> SchemeSpec {
        SchemeSpec::new(FluxKind::Llf, nu, 0.45).unwrap()
    }

    #[test]
    fn constant_state_is_preserved() {
        for bc in [Boundary::Periodic, Boundary::Reflective] {
            let g = Grid::new_2d([6, 5], [0.0; 2], [1.0; 2], [bc; 2]).unwrap();
            let s = FluidState::uniform(g, 1.3, if bc == Boundary::Periodic { [0.2, -0.1] } else { [0.0; 2] }).unwrap();
            for spec in [llf(0.3), SchemeSpec::new(FluxKind::Hll, 0.0, 0.9).unwrap()] {
                let dt = max_stable_dt(&s, &spec, &law2());
                let next = step(&s, &spec, &law2(), dt).unwrap();
                for c in 0..g.len() {
                    assert!((next.rho()[c] - 1.3).abs() < 1e-14);
                    assert!((next.m()[c][0] - s.m()[c][0]).abs() < 1e-14);
                    assert!((next.m()[c][1] - s.m()[c][1]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn cfl_violation_is_an_error() {
        let g = Grid::unit_1d(10, Boundary::Periodic).unwrap();
        let s = FluidState::uniform(g, 1.0, [0.5, 0.0]).unwrap();
        let max = max_stable_dt(&s, &llf(0.0), &law2());
        assert!((max - 0.45 * 0.1 / (0.5 + 2f64.sqrt())).abs() < 1e-15);
        assert!(matches!(step(&s, &llf(0.0), &law2(), 1.01 * max), Err(SolverError::Cfl { .. })));
    }

    #[test]
    fn invalid_schemes_are_rejected() {
        assert!(SchemeSpec::new(FluxKind::Llf, -1.0, 0.5).is_err());
        assert!(SchemeSpec::new(FluxKind::Llf, 0.0, 0.0).is_err());
        assert!(SchemeSpec::new(FluxKind::Llf, 0.0, 1.5).is_err());
    }

    #[test]
    fn vacuum_is_a_fixed_point() {
        let g = Grid::unit_1d(4, Boundary::Reflective).unwrap();
        let s = FluidState::uniform(g, 0.0, [0.0; 2]).unwrap();
        assert_eq!(max_stable_dt(&s, &llf(0.0), &law2()), f64::INFINITY);
        let tr = run(&DataTriple::new(s.clone(), 0.0), &llf(0.0), &law2(), 1.0, 0.5, EnergyRecord::RunningMin).unwrap();
        assert!(tr.states().iter().all(|x| *x == s));
    }

    #[test]
    fn sample_times_close_at_the_horizon() {
        assert_eq!(sample_times(1.0, 0.25).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let t = sample_times(1.0, 0.3).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(*t.last().unwrap(), 1.0);
        assert!(sample_times(0.0, 0.1).is_err());
    }

    #[test]
    fn shock_moves_at_the_jump_speed() {
        // a single right shock: left state on the Hugoniot curve of the right
        let law = law2();
        let (rr, ur) = (1.0, 0.0);
        let rl = 2.0;
        let ul = ur + ((law.p(rl) - law.p(rr)) * (rl - rr) / (rl * rr)).sqrt();
        let data = RiemannData { left: [rl, ul], right: [rr, ur] };
        let sol = RiemannSolution::new(data, law).unwrap();
        assert!(sol.right_is_shock());
        assert!((sol.star()[0] - rl).abs() < 1e-9);
        let speed = (rl * ul - rr * ur) / (rl - rr);
        let n = 400;
        let g = Grid::new_1d(n, 0.0, 1.0, Boundary::Reflective).unwrap();
        let s0 = riemann_initial(&g, &data, 0.3).unwrap();
        let tr =
            run(&DataTriple::with_mean_energy(s0, &law).unwrap(), &llf(0.0), &law, 0.2, 0.2, EnergyRecord::RunningMin)
                .unwrap();
        // locate the shock as the point where rho crosses the midpoint value
        let s = tr.state(1);
        let mid = 0.5 * (rl + rr);
        let i = (0..n - 1).find(|&i| s.rho()[i] >= mid && s.rho()[i + 1] < mid).unwrap();
        let x = g.center(0, i) + g.spacing(0) * (s.rho()[i] - mid) / (s.rho()[i] - s.rho()[i + 1]);
        let want = 0.3 + speed * 0.2;
        assert!((x - want).abs() < 3.0 * g.spacing(0), "{x} vs {want}");
    }

    #[test]
    fn acoustic_pulse_has_the_requested_mass() {
        let g = Grid::unit_1d(32, Boundary::Periodic).unwrap();
        let s = acoustic_pulse(&g, &law2(), 1.0, 1e-2).unwrap();
        assert!((s.total_mass() - 1.0).abs() < 1e-14);
        assert!(s.total_momentum()[0].abs() < 1e-14);
    }
}
