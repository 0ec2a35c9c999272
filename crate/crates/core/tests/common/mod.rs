//! Seeded generators of valid states and trajectories.
#![allow(dead_code)]

use dlab_core::eos::GasLaw;
use dlab_core::fields::{integrate_energy, Boundary, FluidState, Grid};
use dlab_core::trajectory::Trajectory;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn grid_1d(n: usize) -> Grid {
    Grid::unit_1d(n, Boundary::Periodic).unwrap()
}

pub fn grid_2d(n: usize) -> Grid {
    Grid::new_2d([n, n], [0.0; 2], [1.0; 2], [Boundary::Periodic; 2]).unwrap()
}

pub fn random_state(rng: &mut ChaCha8Rng, grid: Grid) -> FluidState {
    let n = grid.len();
    let two_d = grid.dim() == 2;
    let rho = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
    let m = (0..n).map(|_| [rng.gen_range(-1.0..1.0), if two_d { rng.gen_range(-1.0..1.0) } else { 0.0 }]).collect();
    FluidState::new(grid, rho, m).unwrap()
}

pub fn mean_energy(state: &FluidState, law: &GasLaw) -> f64 {
    integrate_energy(state, law).to_f64()
}

/// Largest mean energy from each sample on.
pub fn suffix_max(states: &[FluidState], law: &GasLaw) -> Vec<f64> {
    let mut s: Vec<f64> = states.iter().map(|st| mean_energy(st, law)).collect();
    for k in (0..s.len().saturating_sub(1)).rev() {
        s[k] = s[k].max(s[k + 1]);
    }
    s
}

pub fn random_times(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut t = vec![0.0];
    for _ in 1..n {
        let last = *t.last().unwrap();
        t.push(last + rng.gen_range(0.1..1.0));
    }
    t
}

/// Valid trajectory from `start` with `E(0) = e0`; later fields are random
/// when their energy fits below `e0`, otherwise `start` is kept.
pub fn trajectory_from(rng: &mut ChaCha8Rng, law: GasLaw, start: &FluidState, times: &[f64], e0: f64) -> Trajectory {
    let mut states = vec![start.clone(); times.len()];
    for _ in 0..20 {
        let mut fresh = vec![start.clone()];
        fresh.extend((1..times.len()).map(|_| random_state(rng, *start.grid())));
        if suffix_max(&fresh, &law)[0] <= e0 {
            states = fresh;
            break;
        }
    }
    let floor = suffix_max(&states, &law);
    let mut margin = e0 - floor[0];
    let energy = floor
        .iter()
        .map(|&f| {
            margin *= rng.gen_range(0.3..1.0);
            (f + margin).min(e0)
        })
        .collect();
    Trajectory::new(law, times.to_vec(), states, e0, energy).unwrap()
}

/// Random trajectory whose `E(0)` lies one unit above the largest mean energy.
pub fn random_trajectory(rng: &mut ChaCha8Rng, law: GasLaw, grid: Grid, times: &[f64]) -> Trajectory {
    let start = random_state(rng, grid);
    let mut states = vec![start.clone()];
    states.extend((1..times.len()).map(|_| random_state(rng, grid)));
    let e0 = suffix_max(&states, &law)[0] + 1.0;
    trajectory_from(rng, law, &start, times, e0)
}

/// Two trajectories from the same data.
pub fn random_pair(rng: &mut ChaCha8Rng, law: GasLaw, grid: Grid, times: &[f64]) -> (Trajectory, Trajectory) {
    let u = random_trajectory(rng, law, grid, times);
    let v = trajectory_from(rng, law, u.state(0), times, u.e0());
    (u, v)
}

/// Continuation of `u` at sample `k`: starts from its state with an initial
/// energy inside the admissible window.
pub fn continuation(rng: &mut ChaCha8Rng, u: &Trajectory, k: usize, times: &[f64]) -> Trajectory {
    let lo = u.mean_energy(k).to_f64();
    let hi = u.energy_point(k);
    let e0 = lo + rng.gen_range(0.0..=1.0) * (hi - lo);
    trajectory_from(rng, *u.law(), u.state(k), times, e0)
}

pub fn law(rng: &mut ChaCha8Rng) -> GasLaw {
    GasLaw::new(rng.gen_range(0.5..2.0), rng.gen_range(1.1..3.0)).unwrap()
}
