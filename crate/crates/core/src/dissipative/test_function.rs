use serde::Serialize;

use super::DissipativeError;
use crate::fields::Grid;

/// Quartic bump `(1 - s^2)^2`, `s = (x - center) / radius`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
}

impl Bump {
    pub fn new(center: f64, radius: f64) -> Result<Self, DissipativeError> {
        if !(radius > 0.0 && radius.is_finite() && center.is_finite()) {
            return Err(DissipativeError::TestFunction(format!("bad bump ({center}, {radius})")));
        }
        Ok(Self { center, radius })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }

    pub fn value(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.radius;
        if s.abs() >= 1.0 {
            0.0
        } else {
            let q = 1.0 - s * s;
            q * q
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.radius;
        if s.abs() >= 1.0 {
            0.0
        } else {
            -4.0 * s * (1.0 - s * s) / self.radius
        }
    }

    /// `int_a^b bump`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let prim = |x: f64| {
            let s = ((x - self.center) / self.radius).clamp(-1.0, 1.0);
            self.radius * (s - 2.0 * s * s * s / 3.0 + s.powi(5) / 5.0)
        };
        prim(b) - prim(a)
    }
}

/// Separable test function `psi(t) chi_x(x) chi_y(y)`; `component` selects
/// the direction of a vector-valued test function for the momentum equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunction {
    pub time: Bump,
    pub space: Vec<Bump>,
    pub component: Option<usize>,
}

impl TestFunction {
    /// Checks that the support lies in `(0, t_end)` and at least one cell away
    /// from the spatial boundary.
    pub fn validate(&self, grid: &Grid, t_end: f64) -> Result<(), DissipativeError> {
        let err = |m: String| Err(DissipativeError::TestFunction(m));
        let (t0, t1) = self.time.support();
        if !(t0 > 0.0 && t1 < t_end) {
            return err(format!("time support ({t0}, {t1}) not inside (0, {t_end})"));
        }
        if self.space.len() != grid.dim() {
            return err(format!("{} spatial factors on a {}D grid", self.space.len(), grid.dim()));
        }
        if let Some(c) = self.component {
            if c >= grid.dim() {
                return err(format!("component {c} on a {}D grid", grid.dim()));
            }
        }
        for (axis, b) in self.space.iter().enumerate() {
            let (lo, hi) = b.support();
            let h = grid.spacing(axis);
            if lo < grid.lower()[axis] + h * (1.0 - 1e-12) || hi > grid.upper()[axis] - h * (1.0 - 1e-12) {
                return err(format!("spatial support ({lo}, {hi}) within one cell of the boundary on axis {axis}"));
            }
        }
        Ok(())
    }

    /// `int_cell chi dx` for every cell.
    pub fn cell_integrals(&self, grid: &Grid) -> Vec<f64> {
        let factors: Vec<Vec<f64>> = self
            .space
            .iter()
            .enumerate()
            .map(|(axis, b)| {
                (0..grid.cells()[axis])
                    .map(|i| {
                        let (a, c) = grid.faces(axis, i);
                        b.integral(a, c)
                    })
                    .collect()
            })
            .collect();
        per_cell(grid, &factors)
    }

    /// `int_cell d chi / dx_axis dx` for every cell, taken exactly from the endpoint values.
    pub fn cell_derivative_integrals(&self, grid: &Grid, axis: usize) -> Vec<f64> {
        let factors: Vec<Vec<f64>> = self
            .space
            .iter()
            .enumerate()
            .map(|(ax, b)| {
                (0..grid.cells()[ax])
                    .map(|i| {
                        let (a, c) = grid.faces(ax, i);
                        if ax == axis {
                            b.value(c) - b.value(a)
                        } else {
                            b.integral(a, c)
                        }
                    })
                    .collect()
            })
            .collect();
        per_cell(grid, &factors)
    }

    /// Weights `(int psi' l_k dt, int psi l_k dt)` against the hat functions
    /// `l_k` of the sample times.
    pub fn time_weights(&self, times: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = times.len();
        let mut dw = vec![0.0; n];
        let mut w = vec![0.0; n];
        let (s0, s1) = self.time.support();
        for k in 0..n - 1 {
            let (a, b) = (times[k].max(s0), times[k + 1].min(s1));
            if b <= a {
                continue;
            }
            let len = times[k + 1] - times[k];
            // the integrands are polynomials of degree <= 5 on [a, b]
            let half = 0.5 * (b - a);
            let mid = 0.5 * (b + a);
            for (node, weight) in GAUSS4 {
                let t = mid + half * node;
                let right = (t - times[k]) / len;
                let (v, d) = (self.time.value(t), self.time.derivative(t));
                w[k] += weight * half * v * (1.0 - right);
                w[k + 1] += weight * half * v * right;
                dw[k] += weight * half * d * (1.0 - right);
                dw[k + 1] += weight * half * d * right;
            }
        }
        (dw, w)
    }
}

/// Four-point Gauss-Legendre rule, exact up to degree 7.
const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

fn per_cell(grid: &Grid, factors: &[Vec<f64>]) -> Vec<f64> {
    (0..grid.len())
        .map(|c| {
            let (i, j) = grid.coords(c);
            let mut v = factors[0][i];
            if let Some(f) = factors.get(1) {
                v *= f[j];
            }
            v
        })
        .collect()
}

/// Scalar test functions for the continuity equation and vector-valued ones
/// for the momentum equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dictionary {
    pub scalar: Vec<TestFunction>,
    pub vector: Vec<TestFunction>,
}

/// Bumps at three dyadic scales (radius `L/4`, `L/8`, `L/16`) with eight
/// centers per scale (a 4 x 2 lattice in 2D), all kept one cell away from the
/// boundary; one time bump on `(0.05, 0.95) t_end`. The i-th vector member
/// points along axis `i mod d`.
pub fn default_dictionary(grid: &Grid, t_end: f64) -> Result<Dictionary, DissipativeError> {
    let time = Bump::new(0.5 * t_end, 0.45 * t_end)?;
    let d = grid.dim();
    let counts: &[usize] = if d == 1 { &[8] } else { &[4, 2] };
    let mut scalar = Vec::new();
    for level in 0..3 {
        let mut per_axis = Vec::new();
        for (axis, &n) in counts.iter().enumerate() {
            let (lo, hi) = (grid.lower()[axis], grid.upper()[axis]);
            let h = grid.spacing(axis);
            let radius = (hi - lo) / f64::from(4u32 << level);
            let (a, b) = (lo + h + radius, hi - h - radius);
            if b < a {
                return Err(DissipativeError::TestFunction(format!(
                    "grid too coarse for radius {radius} on axis {axis}"
                )));
            }
            let bumps: Vec<Bump> = (0..n)
                .map(|j| {
                    let c = if n == 1 { 0.5 * (a + b) } else { a + (b - a) * j as f64 / (n - 1) as f64 };
                    Bump { center: c, radius }
                })
                .collect();
            per_axis.push(bumps);
        }
        if d == 1 {
            for b in &per_axis[0] {
                scalar.push(TestFunction { time, space: vec![*b], component: None });
            }
        } else {
            for by in &per_axis[1] {
                for bx in &per_axis[0] {
                    scalar.push(TestFunction { time, space: vec![*bx, *by], component: None });
                }
            }
        }
    }
    let vector = scalar.iter().enumerate().map(|(i, f)| TestFunction { component: Some(i % d), ..f.clone() }).collect();
    let dict = Dictionary { scalar, vector };
    for f in dict.scalar.iter().chain(&dict.vector) {
        f.validate(grid, t_end)?;
    }
    Ok(dict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Boundary;

    #[test]
    fn bump_calculus() {
        let b = Bump::new(0.3, 0.2).unwrap();
        assert!((b.integral(0.0, 1.0) - 0.2 * 16.0 / 15.0).abs() < 1e-15);
        assert_eq!(b.value(0.3), 1.0);
        assert_eq!(b.value(0.6), 0.0);
        let h = 1e-6;
        for x in [0.15, 0.22, 0.31, 0.45] {
            let fd = (b.value(x + h) - b.value(x - h)) / (2.0 * h);
            assert!((fd - b.derivative(x)).abs() < 1e-8);
            let fi = (b.integral(0.0, x + h) - b.integral(0.0, x - h)) / (2.0 * h);
            assert!((fi - b.value(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn time_weights_integrate_exactly() {
        let f = TestFunction { time: Bump::new(0.5, 0.45).unwrap(), space: vec![], component: None };
        let times: Vec<f64> = (0..=13).map(|k| k as f64 / 13.0).collect();
        let (dw, w) = f.time_weights(&times);
        // sum of hats is one: weights add up to the integral of psi and psi'
        assert!((w.iter().sum::<f64>() - 0.45 * 16.0 / 15.0).abs() < 1e-14);
        assert!(dw.iter().sum::<f64>().abs() < 1e-14);
        // int psi' t dt = -int psi dt
        let lin: f64 = dw.iter().zip(&times).map(|(a, t)| a * t).sum();
        assert!((lin + 0.45 * 16.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn dictionary_layout() {
        let g = Grid::unit_1d(64, Boundary::Reflective).unwrap();
        let d = default_dictionary(&g, 1.0).unwrap();
        assert_eq!((d.scalar.len(), d.vector.len()), (24, 24));
        assert!(d.vector.iter().all(|f| f.component == Some(0)));
        let g2 = Grid::new_2d([16, 16], [0.0; 2], [1.0; 2], [Boundary::Periodic; 2]).unwrap();
        let d2 = default_dictionary(&g2, 2.0).unwrap();
        assert_eq!(d2.scalar.len(), 24);
        assert_eq!(d2.vector.iter().filter(|f| f.component == Some(1)).count(), 12);
        assert!(default_dictionary(&Grid::unit_1d(2, Boundary::Periodic).unwrap(), 1.0).is_err());
    }

    #[test]
    fn support_checks() {
        let g = Grid::unit_1d(10, Boundary::Reflective).unwrap();
        let f = TestFunction {
            time: Bump::new(0.5, 0.45).unwrap(),
            space: vec![Bump::new(0.5, 0.3).unwrap()],
            component: None,
        };
        assert!(f.validate(&g, 1.0).is_ok());
        assert!(f.validate(&g, 0.9).is_err());
        let near = TestFunction { space: vec![Bump::new(0.3, 0.25).unwrap()], ..f.clone() };
        assert!(near.validate(&g, 1.0).is_err());
        // derivative integrals telescope to zero
        let d = f.cell_derivative_integrals(&g, 0);
        assert!(d.iter().sum::<f64>().abs() < 1e-15);
    }
}
