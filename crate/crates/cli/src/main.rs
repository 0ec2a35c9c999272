use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dlab_cli::commands::{
    cmd_diagnose, cmd_dt1, cmd_dt2, cmd_ensemble, cmd_riemann, cmd_run, cmd_select, write_manifest,
};
use dlab_cli::config::{load_diagnose, load_select, load_simulation, Experiment};
use dlab_cli::plot::{cmd_plot, PlotKind};
use dlab_cli::CliError;

#[derive(Parser)]
#[command(name = "dlab", version, about = "Dissipative-solution experiments for the isentropic Euler equations")]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed recorded in the manifest; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single solver run; writes a trajectory bundle.
    Run,
    /// Viscosity ensemble with its average and Reynolds stress.
    Ensemble,
    /// Weak-form certificate of a bundle. Exits 1 if a check fails.
    Diagnose {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        reynolds: Option<PathBuf>,
    },
    /// Two-step energy selection over a directory of bundles.
    Select {
        #[arg(long)]
        candidates: PathBuf,
    },
    /// Exact Riemann cell averages as a bundle.
    Riemann,
    /// Defect capping by repeated resets. Exits 1 if the cap is exceeded.
    #[command(name = "dt1-demo")]
    Dt1Demo,
    /// Local improvement at every defective sample time. Exits 1 on failure.
    #[command(name = "dt2-demo")]
    Dt2Demo,
    /// SVG line plot of a CSV written by another command.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// SVG file; defaults to the CSV name with an `.svg` extension inside `--out`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn out_dir(flag: &Option<PathBuf>, from_config: &Option<PathBuf>, experiment: Experiment) -> PathBuf {
    flag.clone().or_else(|| from_config.clone()).unwrap_or_else(|| Path::new("out").join(experiment.name()))
}

fn require_config(cli: &Cli) -> Result<&Path, CliError> {
    cli.config.as_deref().ok_or_else(|| CliError::Usage("this command needs `--config <path>`".into()))
}

/// Returns whether the command's own checks passed.
fn execute(cli: &Cli) -> Result<bool, CliError> {
    let simulation = |kind: Experiment| -> Result<_, CliError> {
        let cfg = load_simulation(require_config(cli)?, kind)?;
        let out = out_dir(&cli.out, &cfg.out, kind);
        write_manifest(&out, kind, cli.seed.or(cfg.seed))?;
        Ok((cfg, out))
    };
    match &cli.command {
        Command::Run => {
            let (cfg, out) = simulation(Experiment::Run)?;
            cmd_run(&cfg, &out)?;
            Ok(true)
        }
        Command::Ensemble => {
            let (cfg, out) = simulation(Experiment::Ensemble)?;
            cmd_ensemble(&cfg, &out)?;
            Ok(true)
        }
        Command::Riemann => {
            let (cfg, out) = simulation(Experiment::Riemann)?;
            cmd_riemann(&cfg, &out)?;
            Ok(true)
        }
        Command::Dt1Demo => {
            let (cfg, out) = simulation(Experiment::Dt1Demo)?;
            let (outcome, _) = cmd_dt1(&cfg, &out)?;
            eprintln!(
                "max defect {:.3e} (cap {:.3e}), {} reset(s)",
                outcome.max_defect,
                outcome.delta,
                outcome.resets.len()
            );
            Ok(outcome.pass)
        }
        Command::Dt2Demo => {
            let (cfg, out) = simulation(Experiment::Dt2Demo)?;
            let outcome = cmd_dt2(&cfg, &out)?;
            eprintln!("{} improvement(s) checked", outcome.rows.len());
            Ok(outcome.pass)
        }
        Command::Diagnose { bundle, reynolds } => {
            let cfg = load_diagnose(cli.config.as_deref())?;
            let out = out_dir(&cli.out, &cfg.out, Experiment::Diagnose);
            write_manifest(&out, Experiment::Diagnose, cli.seed.or(cfg.seed))?;
            let cert = cmd_diagnose(bundle, reynolds.as_deref(), &cfg, &out)?;
            for name in cert.failed() {
                if let Some(c) = cert.check(name) {
                    eprintln!("failed: {name} = {:.3e} > {:.3e}", c.value, c.tolerance);
                }
            }
            Ok(cert.pass)
        }
        Command::Select { candidates } => {
            let cfg = load_select(cli.config.as_deref())?;
            let out = out_dir(&cli.out, &cfg.out, Experiment::Select);
            write_manifest(&out, Experiment::Select, cli.seed.or(cfg.seed))?;
            let outcome = cmd_select(candidates, &cfg, &out)?;
            eprintln!("selected {}", outcome.members[outcome.report.selected]);
            Ok(true)
        }
        Command::Plot { csv, kind, output } => {
            let target = match output {
                Some(p) => p.clone(),
                None => {
                    let name = csv.file_stem().map(|s| s.to_os_string()).unwrap_or_else(|| "plot".into());
                    cli.out.clone().unwrap_or_else(|| PathBuf::from("out")).join(name).with_extension("svg")
                }
            };
            cmd_plot(csv, *kind, &target)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
