use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cdrfem::estimator::EstimatorMode;
use cdrfem::formulation::FormulationKind;
use cdrfem::study::{run_study, LineSampleSpec, StudyConfig, StudyError};

#[derive(Parser)]
#[command(name = "cdrfem", version, about = "Stabilized FEM solver and a posteriori error estimation studies for the convection-diffusion-reaction equation")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a study: solve over a mesh sequence, tabulate errors, rates and
    /// effectivities, optionally writing CSV/VTK artifacts.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; individual flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Benchmark case: convection, diffusion, layer or lshape.
    #[arg(long)]
    case: Option<String>,
    /// Formulation: galerkin, asgs or osgs.
    #[arg(long)]
    formulation: Option<String>,
    /// Estimator modes (repeatable or comma-separated): osgs, asgs, verfurth0.
    #[arg(long, value_delimiter = ',')]
    estimator: Vec<String>,
    /// Mesh sequence: subdivisions (square domains) or levels (L-shape).
    #[arg(long, value_delimiter = ',')]
    meshes: Vec<usize>,
    /// Output directory for table.csv, VTK maps and profiles.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sample u_h along the line y = <value> on the finest mesh.
    #[arg(long)]
    profile_y: Option<f64>,
}

fn parse_formulation(s: &str) -> Result<FormulationKind, String> {
    match s {
        "galerkin" => Ok(FormulationKind::Galerkin),
        "asgs" => Ok(FormulationKind::Asgs),
        "osgs" => Ok(FormulationKind::Osgs),
        other => Err(format!("unknown formulation '{other}'")),
    }
}

fn parse_estimator(s: &str) -> Result<EstimatorMode, String> {
    match s {
        "osgs" => Ok(EstimatorMode::Osgs),
        "asgs" => Ok(EstimatorMode::Asgs),
        "verfurth0" => Ok(EstimatorMode::Verfurth0),
        other => Err(format!("unknown estimator mode '{other}'")),
    }
}

fn build_config(args: &RunArgs) -> Result<StudyConfig, String> {
    let mut cfg = match &args.config {
        Some(path) => {
            let body = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            serde_json::from_str(&body).map_err(|e| format!("bad config: {e}"))?
        }
        None => StudyConfig::default(),
    };
    if let Some(case) = &args.case {
        cfg.case = case.clone();
    }
    if let Some(f) = &args.formulation {
        cfg.formulation = parse_formulation(f)?;
    }
    if !args.estimator.is_empty() {
        cfg.estimators = args
            .estimator
            .iter()
            .map(|s| parse_estimator(s))
            .collect::<Result<_, _>>()?;
    }
    if !args.meshes.is_empty() {
        cfg.meshes = args.meshes.clone();
    }
    if let Some(out) = &args.out {
        cfg.out_dir = Some(out.clone());
    }
    if let Some(y) = args.profile_y {
        cfg.line_sample = Some(LineSampleSpec {
            y,
            ..Default::default()
        });
    }
    Ok(cfg)
}

fn run(args: &RunArgs) -> ExitCode {
    let cfg = match build_config(args) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(3);
        }
    };
    let out = match run_study(&cfg) {
        Ok(out) => out,
        Err(e @ (StudyError::UnknownCase(_) | StudyError::Config(_))) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let mut header = String::from("      h    ndofs       relL2  rateL2     relStab rateStab");
    for m in &out.table.modes {
        header.push_str(&format!("  eta_{:<9}", m.label()));
    }
    for m in &out.table.modes {
        header.push_str(&format!(" ieff_{:<9}", m.label()));
    }
    println!("{header}  iters");
    let rate_l2 = out.table.rates(|r| r.rel_l2);
    let rate_stab = out.table.rates(|r| r.rel_stab);
    for (i, r) in out.table.rows.iter().enumerate() {
        let mut line = format!(
            "{:>9.5} {:>8} {:>11.4e} {:>7.3} {:>11.4e} {:>8.3}",
            r.h, r.n_dofs, r.rel_l2, rate_l2[i], r.rel_stab, rate_stab[i]
        );
        for v in &r.eta {
            line.push_str(&format!(" {:>13.4e}", v));
        }
        for v in &r.ieff {
            line.push_str(&format!(" {:>14.4}", v));
        }
        println!("{line} {:>6}", r.iters);
    }
    if let Some(dir) = &cfg.out_dir {
        println!("artifacts written to {}", dir.display());
    }
    if let Some(msg) = &out.failure {
        eprintln!("study aborted: {msg}");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            if e.use_stderr() {
                e.print().ok();
                return ExitCode::from(3);
            }
            e.print().ok();
            return ExitCode::SUCCESS;
        }
    };
    match cli.cmd {
        Command::Run(args) => run(&args),
    }
}
