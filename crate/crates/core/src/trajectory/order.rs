use serde::{Deserialize, Serialize};

use super::{Trajectory, TrajectoryError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Less,
    Greater,
    Equal,
    Incomparable,
}

impl Relation {
    pub fn mirrored(self) -> Relation {
        match self {
            Relation::Less => Relation::Greater,
            Relation::Greater => Relation::Less,
            other => other,
        }
    }
}

/// Tolerances of the two orders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrderTolerances {
    /// Relative tolerance for "equal": weighted L1 per sample for fields, and
    /// relative to the energy scale for energies.
    pub eq: f64,
    /// Strict energy gap, relative to `max(E_u(0), E_v(0))`.
    pub strict: f64,
}

impl Default for OrderTolerances {
    fn default() -> Self {
        Self { eq: 1e-9, strict: 1e-6 }
    }
}

impl OrderTolerances {
    fn absolute(&self, u: &Trajectory, v: &Trajectory) -> (f64, f64) {
        let scale = u.energy_scale().max(v.energy_scale());
        let e0 = u.e0().max(v.e0()).max(f64::MIN_POSITIVE);
        (self.eq * scale, self.strict * e0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderResult {
    pub relation: Relation,
    /// `(T, T + delta)` on which one energy is strictly below the other.
    pub witness: Option<(f64, f64)>,
    /// Smallest energy gap on the witness window.
    pub gap: f64,
}

impl OrderResult {
    fn plain(relation: Relation) -> Self {
        Self { relation, witness: None, gap: 0.0 }
    }

    pub fn mirrored(self) -> Self {
        Self { relation: self.relation.mirrored(), ..self }
    }
}

/// Global order: `less` iff `E_u <= E_v` everywhere with a strict gap somewhere.
pub fn compare_admissible(
    u: &Trajectory,
    v: &Trajectory,
    tol: &OrderTolerances,
) -> Result<OrderResult, TrajectoryError> {
    u.aligned_with(v)?;
    let (eq, strict) = tol.absolute(u, v);
    let mut diffs = vec![u.e0() - v.e0()];
    diffs.extend(u.energy().iter().zip(v.energy()).map(|(a, b)| a - b));
    if diffs.iter().all(|d| d.abs() <= eq) {
        return Ok(OrderResult::plain(Relation::Equal));
    }
    let lo = diffs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let relation = if hi <= eq && lo < -strict {
        Relation::Less
    } else if lo >= -eq && hi > strict {
        Relation::Greater
    } else {
        Relation::Incomparable
    };
    Ok(OrderResult::plain(relation))
}

/// Local order: after the longest common prefix `[0, T]` (fields and energy
/// equal), `less` iff `E_u < E_v - tol_strict` on at least one sample window.
pub fn compare_local(u: &Trajectory, v: &Trajectory, tol: &OrderTolerances) -> Result<OrderResult, TrajectoryError> {
    u.aligned_with(v)?;
    let (eq, strict) = tol.absolute(u, v);
    let n = u.len();
    let same = |k: usize| u.state(k).matches(v.state(k), tol.eq) && (u.energy_point(k) - v.energy_point(k)).abs() <= eq;
    let mut last = None;
    for k in 0..n {
        if !same(k) {
            break;
        }
        last = Some(k);
    }
    let Some(t) = last else {
        return Ok(OrderResult::plain(Relation::Incomparable));
    };
    let diff = |k: usize| u.energy()[k] - v.energy()[k];
    let d0 = diff(t);
    if t == n - 1 && d0.abs() <= eq {
        return Ok(OrderResult::plain(Relation::Equal));
    }
    if d0.abs() <= strict {
        return Ok(OrderResult::plain(Relation::Incomparable));
    }
    let sign = d0.signum();
    let mut end = t;
    let mut gap = d0.abs();
    while end + 1 < n && diff(end + 1) * sign > strict {
        end += 1;
        gap = gap.min(diff(end).abs());
    }
    let times = u.times();
    let stop = if end + 1 < n {
        times[end + 1]
    } else {
        // constant extension: one more step beyond the horizon
        times[n - 1] + (times[n - 1] - times[n.saturating_sub(2)]).max(f64::MIN_POSITIVE)
    };
    let relation = if sign < 0.0 { Relation::Less } else { Relation::Greater };
    Ok(OrderResult { relation, witness: Some((times[t], stop)), gap })
}
