//! CSV form of a [`FluidState`]: one row per cell, columns `i,rho,mx` in 1D
//! and `i,j,rho,mx,my` in 2D.

use std::path::Path;

use super::{FluidState, Grid};
use crate::io::{num, read_table, write_table, IoError};

pub const COLUMNS_1D: &[&str] = &["i", "rho", "mx"];
pub const COLUMNS_2D: &[&str] = &["i", "j", "rho", "mx", "my"];

pub fn write_state_csv(path: &Path, state: &FluidState) -> Result<(), IoError> {
    let g = state.grid();
    let two_d = g.dim() == 2;
    let header = if two_d { COLUMNS_2D } else { COLUMNS_1D };
    let rows = (0..g.len()).map(|c| {
        let (i, j) = g.coords(c);
        let m = state.m()[c];
        let mut row = vec![i.to_string()];
        if two_d {
            row.push(j.to_string());
        }
        row.push(num(state.rho()[c]));
        row.push(num(m[0]));
        if two_d {
            row.push(num(m[1]));
        }
        row
    });
    write_table(path, header, rows)
}

/// Reads a state on `grid`. Vacuum consistency is not enforced here so that
/// diagnostics can report it.
pub fn read_state_csv(path: &Path, grid: &Grid) -> Result<FluidState, IoError> {
    let two_d = grid.dim() == 2;
    let cols = if two_d { COLUMNS_2D } else { COLUMNS_1D };
    let table = read_table(path, &[cols])?;
    let n = grid.len();
    let mut rho = vec![f64::NAN; n];
    let mut m = vec![[f64::NAN, 0.0]; n];
    let mut seen = vec![false; n];
    let [nx, ny] = grid.cells();
    for (line, row) in &table.rows {
        let bad = |msg: String| IoError::Parse { path: path.to_path_buf(), line: *line, msg };
        let idx = |v: f64, lim: usize, name: &str| -> Result<usize, IoError> {
            if v.fract() == 0.0 && v >= 0.0 && (v as usize) < lim {
                Ok(v as usize)
            } else {
                Err(bad(format!("{name} index {v} out of range 0..{lim}")))
            }
        };
        let i = idx(row[0], nx, "i")?;
        let (j, off) = if two_d { (idx(row[1], ny, "j")?, 2) } else { (0, 1) };
        let c = grid.index(i, j);
        if seen[c] {
            return Err(bad(format!("duplicate cell ({i}, {j})")));
        }
        seen[c] = true;
        rho[c] = row[off];
        m[c] = [row[off + 1], if two_d { row[off + 2] } else { 0.0 }];
    }
    if let Some(c) = seen.iter().position(|s| !s) {
        return Err(IoError::invalid(path, format!("missing cell {:?}", grid.coords(c))));
    }
    FluidState::new_raw(*grid, rho, m).map_err(|e| IoError::invalid(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Boundary;

    #[test]
    fn roundtrip_2d_and_column_errors() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new_2d([3, 2], [0.0; 2], [1.0; 2], [Boundary::Periodic; 2]).unwrap();
        let s = FluidState::from_fn(g, |x, y| (1.0 + x + 0.1 * y, [x * 0.3, -y / 7.0])).unwrap();
        let p = dir.path().join("s.csv");
        write_state_csv(&p, &s).unwrap();
        assert_eq!(read_state_csv(&p, &g).unwrap(), s);

        let g1 = Grid::unit_1d(3, Boundary::Periodic).unwrap();
        let err = read_state_csv(&p, &g1).unwrap_err();
        assert!(err.to_string().contains("i,rho,mx"), "{err}");

        std::fs::write(&p, "i,rho,mx\n0,1,0\n1,abc,0\n2,1,0\n").unwrap();
        let err = read_state_csv(&p, &g1).unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 3, .. }), "{err}");
    }
}
