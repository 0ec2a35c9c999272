//! Two-step selection on finite candidate sets and the exponentially weighted
//! energy transforms used to compare trajectories.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{num, write_json, write_table, IoError};
use crate::trajectory::norm::{check_exponent, full_density, momentum_q_power};
use crate::trajectory::{
    concatenate, convex_combine, exp_weighted_integral, exp_weighted_partial, max_exponent, shift, OrderResult,
    OrderTolerances, Relation, Trajectory, TrajectoryError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("empty candidate set")]
    Empty,
    #[error("member {member} is inconsistent with member 0: {reason}")]
    Inconsistent { member: usize, reason: String },
    #[error("lambda = {0} must be positive")]
    Lambda(f64),
    #[error("bad lambda grid: {0}")]
    LambdaGrid(String),
    #[error("member index {0} out of range")]
    Member(usize),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

/// Trajectories sharing grid, law, sample times and initial data.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    members: Vec<Trajectory>,
}

impl CandidateSet {
    /// Initial fields must agree to relative weighted L1 distance `tol_eq`;
    /// initial energies to round-off.
    pub fn new(members: Vec<Trajectory>, tol_eq: f64) -> Result<Self, SelectionError> {
        let first = members.first().ok_or(SelectionError::Empty)?;
        for (i, m) in members.iter().enumerate() {
            let bad = |reason: String| Err(SelectionError::Inconsistent { member: i, reason });
            if let Some(v) = m.violations().first() {
                return bad(format!("invalid trajectory: {v:?}"));
            }
            if i == 0 {
                continue;
            }
            if let Err(e) = first.aligned_with(m) {
                return bad(e.to_string());
            }
            if !first.state(0).matches(m.state(0), tol_eq) {
                return bad("different initial fields".into());
            }
            if (first.e0() - m.e0()).abs() > 1e-12 * first.e0().abs().max(m.e0().abs()) {
                return bad(format!("initial energy {} vs {}", m.e0(), first.e0()));
            }
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[Trajectory] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Largest initial energy; all members share it.
    pub fn e0(&self) -> f64 {
        self.members[0].e0()
    }
}

/// `int_0^inf e^{-t} E(t) dt`.
pub fn f1(traj: &Trajectory) -> f64 {
    exp_weighted_integral(traj.times(), traj.energy(), 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum F2Variant {
    /// `int e^{-t} (||rho||_q^q + ||m||_q^q + |E|^q) dt`.
    #[default]
    Full,
    /// `int e^{-t} ||m||_q^q dt`.
    MomentumOnly,
}

/// `min(4/3, 2 gamma / (gamma + 1))`.
pub fn default_exponent(traj: &Trajectory) -> f64 {
    (4.0f64 / 3.0).min(max_exponent(traj.law()))
}

fn f2_density(traj: &Trajectory, variant: F2Variant, q: f64) -> Vec<f64> {
    match variant {
        F2Variant::Full => full_density(traj, q),
        F2Variant::MomentumOnly => traj.states().iter().map(|s| momentum_q_power(s, q)).collect(),
    }
}

pub fn f2(traj: &Trajectory, variant: F2Variant, q: f64) -> Result<f64, SelectionError> {
    check_exponent(q, traj.law())?;
    Ok(exp_weighted_integral(traj.times(), &f2_density(traj, variant, q), 1.0))
}

/// `(F2(u) + F2(v)) / 2 - F2((u + v) / 2)` for the full variant.
pub fn convexity_margin(u: &Trajectory, v: &Trajectory, q: f64) -> Result<f64, SelectionError> {
    let (mid, _) = convex_combine(u, v, 0.5)?;
    let full = F2Variant::Full;
    Ok(0.5 * (f2(u, full, q)? + f2(v, full, q)?) - f2(&mid, full, q)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionSettings {
    pub variant: F2Variant,
    /// Defaults to [`default_exponent`].
    pub q: Option<f64>,
    /// Relative tolerance for ties in either step.
    pub tie_tol: f64,
}

impl Default for SelectionSettings {
    fn default() -> Self {
        Self { variant: F2Variant::Full, q: None, tie_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    pub variant: F2Variant,
    pub q: f64,
    pub f1: Vec<f64>,
    pub survivors: Vec<usize>,
    /// `None` for members eliminated in the first step.
    pub f2: Vec<Option<f64>>,
    pub selected: usize,
    /// Survivors whose `F2` ties with the selected member, itself included.
    pub tied: Vec<usize>,
    pub tie: bool,
}

impl SelectionReport {
    pub fn write_json(&self, path: &Path) -> Result<(), IoError> {
        write_json(path, self)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), IoError> {
        let rows = (0..self.f1.len()).map(|i| {
            [
                i.to_string(),
                num(self.f1[i]),
                u8::from(self.survivors.contains(&i)).to_string(),
                self.f2[i].map(num).unwrap_or_default(),
                u8::from(i == self.selected).to_string(),
            ]
        });
        write_table(path, &["member", "F1", "survived", "F2", "selected"], rows)
    }
}

/// Indices whose value is within `tie_tol` (relative) of the minimum.
fn near_minimum(values: &[(usize, f64)], tie_tol: f64) -> Vec<usize> {
    let min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let bound = min + tie_tol * min.abs().max(f64::MIN_POSITIVE);
    values.iter().filter(|v| v.1 <= bound).map(|v| v.0).collect()
}

/// Minimizes `F1`, then `F2` over the `F1` minimizers; remaining ties go to
/// the lowest index and are flagged.
pub fn select(set: &CandidateSet, settings: &SelectionSettings) -> Result<SelectionReport, SelectionError> {
    let members = set.members();
    let q = settings.q.unwrap_or_else(|| default_exponent(&members[0]));
    check_exponent(q, members[0].law())?;
    let f1s: Vec<f64> = members.par_iter().map(f1).collect();
    let indexed: Vec<(usize, f64)> = f1s.iter().cloned().enumerate().collect();
    let survivors = near_minimum(&indexed, settings.tie_tol);
    let values = survivors
        .par_iter()
        .map(|&i| f2(&members[i], settings.variant, q).map(|v| (i, v)))
        .collect::<Result<Vec<_>, _>>()?;
    let tied = near_minimum(&values, settings.tie_tol);
    let mut f2s = vec![None; members.len()];
    for &(i, v) in &values {
        f2s[i] = Some(v);
    }
    Ok(SelectionReport {
        variant: settings.variant,
        q,
        f1: f1s,
        selected: tied[0],
        tie: tied.len() > 1,
        tied,
        survivors,
        f2: f2s,
    })
}

/// `int_0^inf e^{-lambda t} E(t) dt` with constant extension beyond the horizon.
pub fn laplace_energy(traj: &Trajectory, lambda: f64) -> Result<f64, SelectionError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(SelectionError::Lambda(lambda));
    }
    Ok(exp_weighted_integral(traj.times(), traj.energy(), lambda))
}

/// `n` log-spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|j| if j + 1 == n { hi } else { lo * (r * j as f64).exp() }).collect()
}

/// 32 log-spaced points in `[0.5, 128]`.
pub fn default_lambda_grid() -> Vec<f64> {
    log_grid(0.5, 128.0, 32)
}

fn check_lambda_grid(grid: &[f64]) -> Result<(), SelectionError> {
    let err = |m: &str| Err(SelectionError::LambdaGrid(m.into()));
    if grid.is_empty() || !(grid[0] > 0.0) {
        return err("must be non-empty and positive");
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return err("must increase strictly");
    }
    if grid[0] > 1.0 || *grid.last().unwrap() < 100.0 {
        return err("must span [1, 100]");
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompetitorBound {
    pub member: usize,
    /// Smallest grid point from which the candidate's transform stays below
    /// the competitor's; relative to the grid, not a continuum bound.
    pub lambda_lower: Option<f64>,
    /// Grid point preceding `lambda_lower`, if any.
    pub previous: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizerVerdict {
    pub candidate: usize,
    pub is_minimizer: bool,
    pub competitors: Vec<CompetitorBound>,
}

/// Checks that the energy transform of member `candidate` eventually stays
/// below that of every other member, up to `tol * E0 / lambda`.
pub fn is_absolute_minimizer(
    candidate: usize,
    set: &CandidateSet,
    lambda_grid: &[f64],
    tol: f64,
) -> Result<MinimizerVerdict, SelectionError> {
    check_lambda_grid(lambda_grid)?;
    let members = set.members();
    let me = members.get(candidate).ok_or(SelectionError::Member(candidate))?;
    let mine: Vec<f64> = lambda_grid.iter().map(|&l| laplace_energy(me, l)).collect::<Result<_, _>>()?;
    let scale = set.e0().abs();
    let mut competitors = Vec::new();
    for (i, other) in members.iter().enumerate() {
        if i == candidate {
            continue;
        }
        let mut first = lambda_grid.len();
        for j in (0..lambda_grid.len()).rev() {
            let l = lambda_grid[j];
            if mine[j] > laplace_energy(other, l)? + tol * scale / l {
                break;
            }
            first = j;
        }
        let found = first < lambda_grid.len();
        competitors.push(CompetitorBound {
            member: i,
            lambda_lower: found.then(|| lambda_grid[first]),
            previous: (found && first > 0).then(|| lambda_grid[first - 1]),
        });
    }
    Ok(MinimizerVerdict { candidate, is_minimizer: competitors.iter().all(|c| c.lambda_lower.is_some()), competitors })
}

/// Equal energy transforms on the grid, up to `tol * max(E0) / lambda`.
pub fn lerch_equal(u: &Trajectory, v: &Trajectory, lambda_grid: &[f64], tol: f64) -> Result<bool, SelectionError> {
    let scale = u.e0().abs().max(v.e0().abs());
    for &l in lambda_grid {
        if (laplace_energy(u, l)? - laplace_energy(v, l)?).abs() > tol * scale / l {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `L_u(lambda) - L_v(lambda)`, integrated from the difference of the energy
/// curves of two aligned trajectories.
pub fn laplace_gap(u: &Trajectory, v: &Trajectory, lambda: f64) -> Result<f64, SelectionError> {
    scaled_gap(u, v, lambda, 0.0)
}

/// `e^{lambda t0} (L_u(lambda) - L_v(lambda))`, which keeps its sign when the
/// curves agree up to `t0` and `e^{-lambda t0}` underflows.
fn scaled_gap(u: &Trajectory, v: &Trajectory, lambda: f64, t0: f64) -> Result<f64, SelectionError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(SelectionError::Lambda(lambda));
    }
    u.aligned_with(v)?;
    let times: Vec<f64> = u.times().iter().map(|t| t - t0).collect();
    let diff: Vec<f64> = u.energy().iter().zip(v.energy()).map(|(a, b)| a - b).collect();
    Ok(exp_weighted_integral(&times, &diff, lambda))
}

/// Rate above which a strict local order forces the same sign of the energy
/// transform gap.
///
/// With equal energies on `[0, T]`, a gap of at least `g` on `(T, T + delta]`
/// and `|E_u - E_v| <= E_max` afterwards, the transform gap has the sign of
/// the local order once `e^{lambda delta} > 1 + E_max / g`.
pub fn laplace_threshold(u: &Trajectory, v: &Trajectory, order: &OrderResult) -> Option<f64> {
    if !matches!(order.relation, Relation::Less | Relation::Greater) {
        return None;
    }
    let (t0, t1) = order.witness?;
    let e_max = u.e0().max(v.e0());
    Some((e_max / order.gap).ln_1p() / (t1 - t0))
}

/// Grid points at or above the threshold where the transform gap has the
/// wrong sign.
pub fn order_violations(
    u: &Trajectory,
    v: &Trajectory,
    order: &OrderResult,
    lambda_grid: &[f64],
) -> Result<Vec<f64>, SelectionError> {
    let (Some(threshold), Some((t0, _))) = (laplace_threshold(u, v, order), order.witness) else {
        return Ok(Vec::new());
    };
    let sign = if order.relation == Relation::Less { 1.0 } else { -1.0 };
    let mut out = Vec::new();
    for &l in lambda_grid.iter().filter(|&&l| l >= threshold) {
        if sign * scaled_gap(u, v, l, t0)? >= 0.0 {
            out.push(l);
        }
    }
    Ok(out)
}

/// A functional of the form `int e^{-t} density(t) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Functional {
    F1,
    F2 { variant: F2Variant, q: f64 },
}

impl Functional {
    fn density(&self, traj: &Trajectory) -> Result<Vec<f64>, SelectionError> {
        match *self {
            Functional::F1 => Ok(traj.energy().to_vec()),
            Functional::F2 { variant, q } => {
                check_exponent(q, traj.law())?;
                Ok(f2_density(traj, variant, q))
            }
        }
    }

    pub fn eval(&self, traj: &Trajectory) -> Result<f64, SelectionError> {
        Ok(exp_weighted_integral(traj.times(), &self.density(traj)?, 1.0))
    }
}

/// `|F(S_T u) - e^T (F(u) - int_0^T e^{-t} density(u) dt)|`.
pub fn check_shift_identity(traj: &Trajectory, t: f64, f: &Functional) -> Result<f64, SelectionError> {
    let k = traj.sample_index(t).ok_or(TrajectoryError::NotSample(t))?;
    let left = f.eval(&shift(traj, t)?)?;
    let head = exp_weighted_partial(traj.times(), &f.density(traj)?, 1.0, k);
    let right = traj.times()[k].exp() * (f.eval(traj)? - head);
    Ok((left - right).abs())
}

/// `F(u) - F(u joined at T with v)`.
pub fn check_concatenation_inequality(
    u: &Trajectory,
    v: &Trajectory,
    t: f64,
    f: &Functional,
) -> Result<f64, SelectionError> {
    let joined = concatenate(u, v, t)?;
    Ok(f.eval(u)? - f.eval(&joined)?)
}

/// Default tolerances for candidate-set construction.
pub fn default_candidate_tol() -> f64 {
    OrderTolerances::default().eq
}
