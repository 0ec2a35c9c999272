//! The subcommands. Each `cmd_*` computes, writes its files under `out` and
//! returns what it wrote so that callers can inspect the results.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use dlab_core::dissipative::{
    certify, check_compatibility, default_dictionary, estimate_reynolds, read_reynolds_csv, write_reynolds_csv,
    Compatibility, DissipativeCertificate, ReynoldsField,
};
use dlab_core::eos::DefectRule;
use dlab_core::fields::{integrate_energy, DataTriple, FluidState};
use dlab_core::io::{write_json, write_table};
use dlab_core::selection::{
    default_lambda_grid, is_absolute_minimizer, laplace_threshold, order_violations, select, CandidateSet,
    MinimizerVerdict, SelectionReport,
};
use dlab_core::solver::{riemann_cell_averages, run, run_ensemble, sample_times, RiemannSolution, SchemeSpec};
use dlab_core::trajectory::bundle::{self, member_dir};
use dlab_core::trajectory::{cap_defect, improve, Relation, Trajectory, TrajectoryError};

use crate::config::{DiagnoseConfig, Experiment, SelectConfig, SimulationConfig};
use crate::CliError;

fn create(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    seed: Option<u64>,
    version: &'a str,
}

/// `manifest.json` with the experiment name and seed.
pub fn write_manifest(out: &Path, experiment: Experiment, seed: Option<u64>) -> Result<(), CliError> {
    create(out)?;
    let m = Manifest { experiment: experiment.name(), seed, version: env!("CARGO_PKG_VERSION") };
    Ok(write_json(&out.join("manifest.json"), &m)?)
}

fn defect_rows(rows: &[Compatibility]) -> impl Iterator<Item = [String; 4]> + '_ {
    rows.iter().map(|c| [c.t.to_string(), c.defect.to_string(), c.trace.to_string(), c.slack.to_string()])
}

fn write_defect_csv(path: &Path, rows: &[Compatibility]) -> Result<(), CliError> {
    Ok(write_table(path, &["t", "defect", "traceR", "slack"], defect_rows(rows))?)
}

/// Compatibility rows at every sample time.
pub fn compatibility_rows(
    traj: &Trajectory,
    reynolds: &ReynoldsField,
    rule: DefectRule,
) -> Result<Vec<Compatibility>, CliError> {
    traj.times().iter().map(|&t| Ok(check_compatibility(traj, reynolds, t, rule, None)?)).collect()
}

pub fn cmd_run(cfg: &SimulationConfig, out: &Path) -> Result<Trajectory, CliError> {
    let traj = run(&cfg.triple()?, &cfg.spec()?, &cfg.law, cfg.t_end, cfg.sample_dt, cfg.energy)?;
    bundle::save(out, &traj)?;
    Ok(traj)
}

/// Ensemble members, their average and its Reynolds stress.
pub struct Ensemble {
    pub members: Vec<Trajectory>,
    pub average: Trajectory,
    pub reynolds: ReynoldsField,
}

fn run_average(
    cfg: &SimulationConfig,
    specs: &[SchemeSpec],
    triple: &DataTriple,
    t_end: f64,
) -> Result<Ensemble, CliError> {
    let members = run_ensemble(triple, specs, &cfg.law, t_end, cfg.sample_dt, cfg.energy)?;
    let (reynolds, average) = estimate_reynolds(&members, &cfg.law)?;
    Ok(Ensemble { members, average, reynolds })
}

pub fn ensemble(cfg: &SimulationConfig) -> Result<Ensemble, CliError> {
    run_average(cfg, &cfg.ensemble_specs()?, &cfg.triple()?, cfg.t_end)
}

#[derive(Serialize)]
struct EnsembleSummary<'a> {
    nu: &'a [f64],
    defect_constant: f64,
    e0: f64,
    max_defect: f64,
    min_slack: f64,
}

/// Writes `members/member_XXX`, `average`, `reynolds.csv`, `defect.csv` and
/// `ensemble.json`.
pub fn cmd_ensemble(cfg: &SimulationConfig, out: &Path) -> Result<(Ensemble, Vec<Compatibility>), CliError> {
    let ens = ensemble(cfg)?;
    let members_root = out.join("members");
    for (i, m) in ens.members.iter().enumerate() {
        bundle::save(&member_dir(&members_root, i), m)?;
    }
    bundle::save(&out.join("average"), &ens.average)?;
    write_reynolds_csv(&out.join("reynolds.csv"), &ens.reynolds)?;
    let rows = compatibility_rows(&ens.average, &ens.reynolds, cfg.tolerances.defect_rule)?;
    write_defect_csv(&out.join("defect.csv"), &rows)?;
    let summary = EnsembleSummary {
        nu: &cfg.ensemble.as_ref().map(|e| e.nu.clone()).unwrap_or_default(),
        defect_constant: rows.first().map_or(0.0, |c| c.r),
        e0: ens.average.e0(),
        max_defect: rows.iter().map(|c| c.defect).fold(0.0, f64::max),
        min_slack: rows.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min),
    };
    write_json(&out.join("ensemble.json"), &summary)?;
    Ok((ens, rows))
}

/// Certifies a bundle with the default dictionary; writes
/// `certificate.json` and `certificate.csv`.
pub fn cmd_diagnose(
    bundle_dir: &Path,
    reynolds: Option<&Path>,
    cfg: &DiagnoseConfig,
    out: &Path,
) -> Result<DissipativeCertificate, CliError> {
    let traj = bundle::load(bundle_dir)?;
    let stress = match reynolds {
        Some(p) => read_reynolds_csv(p, traj.grid(), traj.times())?,
        None => ReynoldsField::zeros(&traj),
    };
    let dict = default_dictionary(traj.grid(), traj.t_end())?;
    let cert = certify(&traj, &stress, &dict, &cfg.tolerances)?;
    create(out)?;
    cert.write_json(&out.join("certificate.json"))?;
    cert.write_csv(&out.join("certificate.csv"))?;
    Ok(cert)
}

/// Bundles in the immediate subdirectories of `dir` that contain a
/// `meta.json`, in name order.
pub fn load_candidates(dir: &Path) -> Result<(Vec<String>, Vec<Trajectory>), CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> =
        entries.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.join(bundle::META).is_file()).collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Usage(format!("{}: no trajectory bundles found", dir.display())));
    }
    let names = paths.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    let trajs = paths.iter().map(|p| bundle::load(p)).collect::<Result<_, _>>()?;
    Ok((names, trajs))
}

#[derive(Debug, Serialize)]
pub struct SelectionOutcome {
    pub members: Vec<String>,
    pub report: SelectionReport,
    pub minimizer: MinimizerVerdict,
}

/// Two-step selection over the bundles in `dir`; writes `selection.json`
/// and `selection.csv`.
pub fn cmd_select(dir: &Path, cfg: &SelectConfig, out: &Path) -> Result<SelectionOutcome, CliError> {
    let (names, trajs) = load_candidates(dir)?;
    let set = CandidateSet::new(trajs, dlab_core::trajectory::OrderTolerances::default().eq).map_err(|e| match e {
        dlab_core::selection::SelectionError::Inconsistent { member, reason } => {
            CliError::Usage(format!("candidate `{}` is inconsistent: {reason}", names[member]))
        }
        other => other.into(),
    })?;
    let report = select(&set, &cfg.selection)?;
    let grid = cfg.lambda_grid.clone().unwrap_or_else(default_lambda_grid);
    let minimizer = is_absolute_minimizer(report.selected, &set, &grid, cfg.minimizer_tol)?;
    create(out)?;
    report.write_csv(&out.join("selection.csv"))?;
    let outcome = SelectionOutcome { members: names, report, minimizer };
    write_json(&out.join("selection.json"), &outcome)?;
    Ok(outcome)
}

/// Exact cell averages of the Riemann solution at the sample times, with the
/// energy recorded as the running minimum of the mean energy.
pub fn cmd_riemann(cfg: &SimulationConfig, out: &Path) -> Result<Trajectory, CliError> {
    let (data, x0) = cfg.riemann()?;
    let sol = RiemannSolution::new(data, cfg.law)?;
    let times = sample_times(cfg.t_end, cfg.sample_dt)?;
    let states =
        times.iter().map(|&t| riemann_cell_averages(&cfg.grid, &sol, x0, t)).collect::<Result<Vec<FluidState>, _>>()?;
    let e0 = integrate_energy(&states[0], &cfg.law).to_f64();
    let mut env = e0;
    let energy = states
        .iter()
        .map(|s| {
            env = env.min(integrate_energy(s, &cfg.law).to_f64());
            env
        })
        .collect();
    let traj = Trajectory::from_parts(cfg.law, times, states, e0, energy)?;
    bundle::save(out, &traj)?;
    Ok(traj)
}

/// Starting point of the demos: the ensemble average with its stress, or a
/// single run with zero stress when no ensemble is configured.
fn demo_start(cfg: &SimulationConfig) -> Result<(Vec<SchemeSpec>, Trajectory, ReynoldsField), CliError> {
    let specs = match &cfg.ensemble {
        Some(_) => cfg.ensemble_specs()?,
        None => vec![cfg.spec()?],
    };
    let ens = run_average(cfg, &specs, &cfg.triple()?, cfg.t_end)?;
    Ok((specs, ens.average, ens.reynolds))
}

fn continuation(
    cfg: &SimulationConfig,
    specs: &[SchemeSpec],
    state: &FluidState,
    e0: f64,
    horizon: f64,
) -> Result<(Trajectory, ReynoldsField), CliError> {
    let ens = run_average(cfg, specs, &DataTriple::new(state.clone(), e0), horizon)?;
    Ok((ens.average, ens.reynolds))
}

#[derive(Debug, Clone, Serialize)]
pub struct Dt1Outcome {
    pub delta: f64,
    pub e0: f64,
    pub resets: Vec<f64>,
    pub max_defect_before: f64,
    pub max_defect: f64,
    pub pass: bool,
}

/// Resets the ensemble average at its stopping times until the defect
/// stays below `delta_rel * E0`; writes the capped trajectory to
/// `trajectory`, its stress to `reynolds.csv`, `defect.csv` and `dt1.json`.
pub fn cmd_dt1(cfg: &SimulationConfig, out: &Path) -> Result<(Dt1Outcome, Trajectory), CliError> {
    let (specs, start, stress) = demo_start(cfg)?;
    let delta = cfg.demo.delta_rel * start.e0();
    let cap = cap_defect::<CliError, _>(&start, &stress, delta, |s, e0, h| continuation(cfg, &specs, s, e0, h))?;
    let defects = |t: &Trajectory| (0..t.len()).map(|k| t.raw_defect(k)).fold(f64::NEG_INFINITY, f64::max);
    let max_defect = defects(&cap.trajectory);
    let outcome = Dt1Outcome {
        delta,
        e0: start.e0(),
        resets: cap.resets.clone(),
        max_defect_before: defects(&start),
        max_defect,
        pass: max_defect <= delta,
    };
    bundle::save(&out.join("trajectory"), &cap.trajectory)?;
    write_reynolds_csv(&out.join("reynolds.csv"), &cap.reynolds)?;
    let rows = compatibility_rows(&cap.trajectory, &cap.reynolds, cfg.tolerances.defect_rule)?;
    write_defect_csv(&out.join("defect.csv"), &rows)?;
    write_json(&out.join("dt1.json"), &outcome)?;
    Ok((outcome, cap.trajectory))
}

#[derive(Debug, Clone, Serialize)]
pub struct ImprovementRow {
    pub t: f64,
    pub epsilon: f64,
    pub relation: Relation,
    pub gap: f64,
    pub window: (f64, f64),
    /// Rate above which the energy transforms must be ordered.
    pub threshold: Option<f64>,
    /// Default-grid rates above the threshold with the wrong sign.
    pub order_violations: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Dt2Outcome {
    pub e0: f64,
    pub rows: Vec<ImprovementRow>,
    pub pass: bool,
}

/// At every sample time before the horizon where the ensemble average has a
/// defect above the strict tolerance, builds the reset competitor and checks
/// that it is locally smaller with a gap of at least half the defect;
/// writes `dt2.csv` and `dt2.json`.
pub fn cmd_dt2(cfg: &SimulationConfig, out: &Path) -> Result<Dt2Outcome, CliError> {
    let (specs, start, _) = demo_start(cfg)?;
    let tol = cfg.demo.order;
    let threshold = tol.strict * start.e0();
    let grid = default_lambda_grid();
    let mut rows = Vec::new();
    for k in 0..start.len() - 1 {
        let epsilon = start.raw_defect(k);
        if epsilon <= threshold {
            continue;
        }
        let t = start.times()[k];
        let (cont, _) = continuation(cfg, &specs, start.state(k), start.mean_energy(k).to_f64(), start.t_end() - t)?;
        let imp = match improve(&start, t, &cont, &tol) {
            Ok(imp) => imp,
            Err(TrajectoryError::NothingToImprove { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let violations = order_violations(&imp.competitor, &start, &imp.order, &grid)?.len();
        let pass = imp.order.relation == Relation::Less && imp.gap >= 0.5 * epsilon && violations == 0;
        rows.push(ImprovementRow {
            t,
            epsilon,
            relation: imp.order.relation,
            gap: imp.gap,
            window: imp.window,
            threshold: laplace_threshold(&imp.competitor, &start, &imp.order),
            order_violations: violations,
            pass,
        });
    }
    let outcome = Dt2Outcome { e0: start.e0(), pass: rows.iter().all(|r| r.pass), rows };
    create(out)?;
    let csv = outcome.rows.iter().map(|r| {
        [
            r.t.to_string(),
            r.epsilon.to_string(),
            u8::from(r.relation == Relation::Less).to_string(),
            r.gap.to_string(),
            r.window.1.to_string(),
            u8::from(r.pass).to_string(),
        ]
    });
    write_table(&out.join("dt2.csv"), &["t", "epsilon", "less", "gap", "window_end", "pass"], csv)?;
    write_json(&out.join("dt2.json"), &outcome)?;
    Ok(outcome)
}
