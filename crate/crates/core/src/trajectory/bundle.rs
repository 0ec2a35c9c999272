//! Trajectory bundle on disk: a directory with `meta.json` (grid, law,
//! sample times, initial energy), one state CSV per sample and `energy.csv`
//! with columns `t,E` holding the right limits `E(t_k+)`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::eos::GasLaw;
use crate::fields::io::{read_state_csv, write_state_csv};
use crate::fields::Grid;
use crate::io::{create_dir, num, read_json, read_table, write_json, write_table, IoError};

pub const META: &str = "meta.json";
pub const ENERGY: &str = "energy.csv";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub grid: Grid,
    pub law: GasLaw,
    pub times: Vec<f64>,
    /// `E(0)`.
    pub e0: f64,
}

pub fn state_file(k: usize) -> String {
    format!("state_{k:05}.csv")
}

pub fn save(dir: &Path, traj: &Trajectory) -> Result<(), IoError> {
    create_dir(dir)?;
    let meta = Meta { grid: *traj.grid(), law: *traj.law(), times: traj.times().to_vec(), e0: traj.e0() };
    write_json(&dir.join(META), &meta)?;
    for (k, s) in traj.states().iter().enumerate() {
        write_state_csv(&dir.join(state_file(k)), s)?;
    }
    let rows = traj.times().iter().zip(traj.energy()).map(|(t, e)| [num(*t), num(*e)]);
    write_table(&dir.join(ENERGY), &["t", "E"], rows)
}

/// Loads a bundle checking its shape only, so that invariant violations can
/// be diagnosed afterwards.
pub fn load(dir: &Path) -> Result<Trajectory, IoError> {
    let meta_path = dir.join(META);
    let meta: Meta = read_json(&meta_path)?;
    let energy_path = dir.join(ENERGY);
    let table = read_table(&energy_path, &[&["t", "E"]])?;
    if table.rows.len() != meta.times.len() {
        return Err(IoError::invalid(
            &energy_path,
            format!("{} rows for {} sample times", table.rows.len(), meta.times.len()),
        ));
    }
    let mut energy = Vec::with_capacity(table.rows.len());
    for ((line, row), t) in table.rows.iter().zip(&meta.times) {
        if (row[0] - t).abs() > 1e-12 * t.abs().max(1.0) {
            return Err(IoError::Parse {
                path: energy_path.clone(),
                line: *line,
                msg: format!("time {} does not match sample time {t}", row[0]),
            });
        }
        energy.push(row[1]);
    }
    let states = (0..meta.times.len())
        .map(|k| read_state_csv(&dir.join(state_file(k)), &meta.grid))
        .collect::<Result<Vec<_>, _>>()?;
    Trajectory::from_parts(meta.law, meta.times, states, meta.e0, energy)
        .map_err(|e| IoError::invalid(&meta_path, e.to_string()))
}

pub fn member_dir(root: &Path, i: usize) -> PathBuf {
    root.join(format!("member_{i:03}"))
}
