use serde::{Deserialize, Serialize};

use super::FieldError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Impermeable wall, `u . n = 0`.
    Reflective,
    Periodic,
}

/// Axis-aligned structured grid in one or two dimensions.
///
/// Cells are stored x-fastest: the linear index of `(i, j)` is `i + nx * j`.
/// In one dimension the second axis is a single dummy cell of unit width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    dim: usize,
    cells: [usize; 2],
    lower: [f64; 2],
    upper: [f64; 2],
    boundary: [Boundary; 2],
}

/// On-disk / config form of a [`Grid`]; every list has one entry per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub cells: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub boundary: Vec<Boundary>,
}

impl TryFrom<GridSpec> for Grid {
    type Error = FieldError;
    fn try_from(s: GridSpec) -> Result<Self, FieldError> {
        let dim = s.cells.len();
        if !(dim == 1 || dim == 2) {
            return Err(FieldError::Grid(format!("grid must have 1 or 2 axes, got {dim}")));
        }
        if s.lower.len() != dim || s.upper.len() != dim || s.boundary.len() != dim {
            return Err(FieldError::Grid("cells, lower, upper and boundary must have one entry per axis".into()));
        }
        if dim == 1 {
            Grid::new_1d(s.cells[0], s.lower[0], s.upper[0], s.boundary[0])
        } else {
            Grid::new_2d(
                [s.cells[0], s.cells[1]],
                [s.lower[0], s.lower[1]],
                [s.upper[0], s.upper[1]],
                [s.boundary[0], s.boundary[1]],
            )
        }
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        let d = g.dim;
        GridSpec {
            cells: g.cells[..d].to_vec(),
            lower: g.lower[..d].to_vec(),
            upper: g.upper[..d].to_vec(),
            boundary: g.boundary[..d].to_vec(),
        }
    }
}

fn check_axis(n: usize, lo: f64, hi: f64) -> Result<(), FieldError> {
    if n < 2 {
        return Err(FieldError::Grid(format!("need at least 2 cells per axis, got {n}")));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(FieldError::Grid(format!("invalid bounds [{lo}, {hi}]")));
    }
    Ok(())
}

impl Grid {
    pub fn new_1d(n: usize, lower: f64, upper: f64, boundary: Boundary) -> Result<Self, FieldError> {
        check_axis(n, lower, upper)?;
        Ok(Self {
            dim: 1,
            cells: [n, 1],
            lower: [lower, 0.0],
            upper: [upper, 1.0],
            boundary: [boundary, Boundary::Periodic],
        })
    }

    pub fn new_2d(
        cells: [usize; 2],
        lower: [f64; 2],
        upper: [f64; 2],
        boundary: [Boundary; 2],
    ) -> Result<Self, FieldError> {
        for ax in 0..2 {
            check_axis(cells[ax], lower[ax], upper[ax])?;
        }
        Ok(Self { dim: 2, cells, lower, upper, boundary })
    }

    /// Unit interval `[0, 1]` with `n` cells.
    pub fn unit_1d(n: usize, boundary: Boundary) -> Result<Self, FieldError> {
        Self::new_1d(n, 0.0, 1.0, boundary)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> [usize; 2] {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lower(&self) -> [f64; 2] {
        self.lower
    }

    pub fn upper(&self) -> [f64; 2] {
        self.upper
    }

    pub fn boundary(&self, axis: usize) -> Boundary {
        self.boundary[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.cells[axis] as f64
    }

    /// Largest cell width over the active axes.
    pub fn max_spacing(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Measure of the domain.
    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|a| self.upper[a] - self.lower[a]).product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.cells[0] * j
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.cells[0], idx / self.cells[0])
    }

    /// Lower and upper face coordinate of cell `i` along `axis`.
    pub fn faces(&self, axis: usize, i: usize) -> (f64, f64) {
        let h = self.spacing(axis);
        (self.lower[axis] + i as f64 * h, self.lower[axis] + (i + 1) as f64 * h)
    }

    pub fn center(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + (i as f64 + 0.5) * self.spacing(axis)
    }

    /// Grids agree up to relative round-off in their geometry.
    pub fn same_as(&self, other: &Grid) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
        self.dim == other.dim
            && self.cells == other.cells
            && self.boundary == other.boundary
            && (0..2).all(|a| close(self.lower[a], other.lower[a]) && close(self.upper[a], other.upper[a]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_axes() {
        assert!(Grid::new_1d(1, 0.0, 1.0, Boundary::Periodic).is_err());
        assert!(Grid::new_1d(4, 1.0, 1.0, Boundary::Periodic).is_err());
        assert!(Grid::new_2d([4, 1], [0.0; 2], [1.0; 2], [Boundary::Periodic; 2]).is_err());
    }

    #[test]
    fn geometry() {
        let g = Grid::new_2d([4, 2], [0.0, -1.0], [2.0, 1.0], [Boundary::Reflective; 2]).unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.spacing(0), 0.5);
        assert_eq!(g.spacing(1), 1.0);
        assert_eq!(g.cell_volume(), 0.5);
        assert_eq!(g.volume(), 4.0);
        assert_eq!(g.coords(g.index(3, 1)), (3, 1));
        assert_eq!(g.center(1, 0), -0.5);
    }

    #[test]
    fn spec_roundtrip_through_json() {
        let g = Grid::new_1d(16, -1.0, 1.0, Boundary::Reflective).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(serde_json::from_str::<Grid>(&json).unwrap(), g);
        let bad = r#"{"cells":[4],"lower":[0.0],"upper":[1.0],"boundary":["periodic"],"extra":1}"#;
        assert!(serde_json::from_str::<Grid>(bad).is_err());
    }
}
