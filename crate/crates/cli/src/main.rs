use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use radvisc::config::RunConfig;
use radvisc::diagnostics::{build_report, DiagnosticsReport};
use radvisc::initdata::initial_functionals;
use radvisc::io::{self, Model};
use radvisc::ladder::{compare_to_inviscid, run_ladder_to, LadderParameter, LadderSpec};
use radvisc::solver::Trajectory;
use radvisc::{Error, ViscosityParams};

/// Radial viscous compressible flow: initial data, runs, diagnostics and ladders.
#[derive(Parser, Debug)]
#[command(name = "radvisc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for ladder jobs and the initial-data pipeline.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Accepted for compatibility; every computation is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the initial data and its energy functionals.
    InitData(Common),
    /// Run the viscous solver and write the trajectory and report.
    Run(Common),
    /// Recompute the report from a trajectory directory.
    Diagnose {
        /// Directory written by `run`.
        trajectory: PathBuf,
        /// Report directory, defaults to the trajectory directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the parameter ladder of the configuration.
    Ladder(Common),
    /// Run the viscous and inviscid solvers and measure their distance.
    Compare(Common),
}

#[derive(clap::Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; falls back to `output` in the configuration, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Verdict(Value),
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type Outcome = Result<Value, Failure>;

fn load(c: &Common) -> Result<(RunConfig, PathBuf), Error> {
    let text = fs::read_to_string(&c.config)
        .map_err(|e| Error::config("config", format!("cannot read {}: {e}", c.config.display())))?;
    let cfg = RunConfig::from_json(&text)?;
    cfg.resolve()?;
    let out = c
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok((cfg, out))
}

fn verdict(passed: bool, body: Value) -> Outcome {
    if passed {
        Ok(body)
    } else {
        Err(Failure::Verdict(body))
    }
}

fn report_for(cfg: &RunConfig, traj: &Trajectory, model: Model) -> Result<DiagnosticsReport, Error> {
    let r = cfg.resolve()?;
    let visc = match model {
        Model::NavierStokes => r.visc,
        Model::Euler => ViscosityParams::new(0.0, 1.0, r.gas.dim())?,
    };
    build_report(&traj.pairs(), &r.gas, &visc, &cfg.diagnostics, cfg.solver.density_floor)
}

fn init_data(c: &Common) -> Outcome {
    let (cfg, out) = load(c)?;
    let r = cfg.resolve()?;
    let field = cfg.initial_field()?;
    let f = initial_functionals(&field, &r.gas, &r.visc, cfg.diagnostics.vartheta);
    let csv = out.join("initial_data.csv");
    let sidecar = io::write_initial_data(&csv, &field, &f, &cfg.hash())?;
    Ok(json!({
        "config_hash": cfg.hash(),
        "csv": csv,
        "sidecar": sidecar,
        "e0": f.e0, "e1": f.e1, "e2": f.e2, "e0_tilde": f.e0_tilde,
    }))
}

fn run(c: &Common) -> Outcome {
    let (cfg, out) = load(c)?;
    let (_, traj) = cfg.run()?;
    io::write_trajectory(&out.join("trajectory"), &cfg, &traj, Model::NavierStokes)?;
    let report = report_for(&cfg, &traj, Model::NavierStokes)?;
    io::write_report(&out, &report, &cfg.hash())?;
    verdict(
        report.summary.passed,
        json!({ "config_hash": cfg.hash(), "steps": traj.steps, "summary": report.summary }),
    )
}

fn diagnose(dir: &Path, out: Option<&Path>) -> Outcome {
    if !dir.join(io::MANIFEST).is_file() {
        return Err(Error::config("trajectory", format!("no manifest in {}", dir.display())).into());
    }
    let (manifest, traj) = io::read_trajectory(dir)?;
    let report = report_for(&manifest.config, &traj, manifest.model)?;
    let target = out.unwrap_or(dir);
    io::write_report(target, &report, &manifest.config_hash)?;
    verdict(
        report.summary.passed,
        json!({ "config_hash": manifest.config_hash, "summary": report.summary }),
    )
}

fn ladder(c: &Common) -> Outcome {
    let (cfg, out) = load(c)?;
    let spec = cfg
        .ladder
        .clone()
        .ok_or_else(|| Error::config("ladder", "the configuration has no ladder block"))?;
    let table = run_ladder_to(&spec, &cfg, Some(&out.join("points")))?;
    io::write_ladder(&out, &table, &cfg.hash())?;
    verdict(
        table.verdicts.passed,
        json!({ "config_hash": cfg.hash(), "verdicts": table.verdicts }),
    )
}

fn compare(c: &Common) -> Outcome {
    let (cfg, out) = load(c)?;
    let dim = cfg.gas.dim;
    let spec = cfg.ladder.clone().unwrap_or(LadderSpec {
        parameter: LadderParameter::Epsilon,
        values: vec![],
        window: cfg.diagnostics.local_window,
        p: 1.0,
        q: 1.0,
        window_cells: 200,
        compare_inviscid: true,
    });
    let (_, ns) = cfg.run()?;
    let euler = cfg.run_inviscid()?;
    io::write_trajectory(&out.join("navier_stokes"), &cfg, &ns, Model::NavierStokes)?;
    io::write_trajectory(&out.join("euler"), &cfg, &euler, Model::Euler)?;
    let d = compare_to_inviscid(&ns, &euler, &spec, dim)?;
    let body = json!({
        "config_hash": cfg.hash(),
        "window": spec.window,
        "p": spec.p,
        "q": spec.q,
        "d_rho": d[0],
        "d_m": d[1],
        "d_sqrt_rho_u": d[2],
    });
    fs::create_dir_all(&out).map_err(Error::from)?;
    fs::write(out.join("compare.json"), format!("{body:#}\n")).map_err(Error::from)?;
    Ok(body)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", json!({ "status": "error", "kind": "config", "message": e.to_string() }));
            return ExitCode::from(2);
        }
    }
    let outcome = match &cli.command {
        Command::InitData(c) => init_data(c),
        Command::Run(c) => run(c),
        Command::Diagnose { trajectory, out } => diagnose(trajectory, out.as_deref()),
        Command::Ladder(c) => ladder(c),
        Command::Compare(c) => compare(c),
    };
    match outcome {
        Ok(body) => {
            println!("{}", json!({ "status": "pass", "result": body }));
            ExitCode::SUCCESS
        }
        Err(Failure::Verdict(body)) => {
            println!("{}", json!({ "status": "fail", "result": body }));
            ExitCode::from(1)
        }
        Err(Failure::Error(e)) => {
            let (kind, code) = if e.is_config() { ("config", 2) } else { ("runtime", 3) };
            let mut body = json!({ "status": "error", "kind": kind, "message": e.to_string() });
            if let Error::Config { field, .. } = &e {
                body["field"] = json!(field);
            }
            if let Error::Parse { row, .. } = &e {
                body["row"] = json!(row);
            }
            eprintln!("{body}");
            ExitCode::from(code)
        }
    }
}
