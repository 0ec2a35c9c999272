use std::path::Path;

use super::{ReynoldsField, Sym2};
use crate::fields::Grid;
use crate::io::{num, read_table, write_table, IoError};

const COLUMNS: &[&str] = &["t", "cell", "xx", "xy", "yy"];

/// One row per sample time and cell: `t,cell,xx,xy,yy`.
pub fn write_reynolds_csv(path: &Path, field: &ReynoldsField) -> Result<(), IoError> {
    let rows = field.times().iter().enumerate().flat_map(|(k, &t)| {
        field.sample(k).iter().enumerate().map(move |(c, m)| [num(t), c.to_string(), num(m.xx), num(m.xy), num(m.yy)])
    });
    write_table(path, COLUMNS, rows)
}

/// Reads a field written by [`write_reynolds_csv`] for the given grid and
/// sample times.
pub fn read_reynolds_csv(path: &Path, grid: &Grid, times: &[f64]) -> Result<ReynoldsField, IoError> {
    let table = read_table(path, &[COLUMNS])?;
    let n = grid.len();
    if table.rows.len() != n * times.len() {
        return Err(IoError::invalid(
            path,
            format!("{} rows for {} samples of {n} cells", table.rows.len(), times.len()),
        ));
    }
    let mut stress = vec![Vec::with_capacity(n); times.len()];
    for (r, (line, row)) in table.rows.iter().enumerate() {
        let (k, c) = (r / n, r % n);
        let bad = |msg: String| IoError::Parse { path: path.to_path_buf(), line: *line, msg };
        if (row[0] - times[k]).abs() > 1e-12 * times[k].abs().max(1.0) {
            return Err(bad(format!("time {} where sample time {} was expected", row[0], times[k])));
        }
        if row[1] != c as f64 {
            return Err(bad(format!("cell {} where cell {c} was expected", row[1])));
        }
        stress[k].push(Sym2 { xx: row[2], xy: row[3], yy: row[4] });
    }
    ReynoldsField::new(*grid, times.to_vec(), stress).map_err(|e| IoError::invalid(path, e.to_string()))
}
