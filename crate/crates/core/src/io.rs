//! Output tree: snapshot CSVs, trajectory manifest, report and ladder tables.
//!
//! Every number is written with 17 significant digits, so reading a trajectory back
//! reproduces the stored `f64` values bit for bit. CSV outputs start with a
//! `# config_hash=<hash>` comment line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::diagnostics::{Accumulators, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::grid::RadialField;
use crate::initdata::InitialFunctionals;
use crate::ladder::LadderTable;
use crate::solver::{Snapshot, Trajectory};

pub const MANIFEST: &str = "manifest.json";
pub const ACCUMULATORS: &str = "accumulators.csv";

/// 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    NavierStokes,
    Euler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub model: Model,
    pub steps: usize,
    pub wall_time_s: f64,
    pub snapshots: Vec<SnapshotEntry>,
    pub config: RunConfig,
}

fn csv_writer(path: &Path, hash: &str) -> Result<csv::Writer<fs::File>> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "# config_hash={hash}")?;
    Ok(csv::Writer::from_writer(f))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?)
}

fn parse_row(rec: &csv::StringRecord, row: usize) -> Result<Vec<f64>> {
    rec.iter()
        .map(|s| {
            s.trim().parse::<f64>().map_err(|e| Error::Parse {
                row,
                message: format!("`{s}`: {e}"),
            })
        })
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// Writes one field as `t, r, rho, m, u`.
pub fn write_snapshot(path: &Path, field: &RadialField, hash: &str) -> Result<()> {
    let mut w = csv_writer(path, hash)?;
    w.write_record(["t", "r", "rho", "m", "u"])?;
    let u = field.velocity();
    for (i, r) in field.grid.r().iter().enumerate() {
        w.write_record([fmt(field.t), fmt(*r), fmt(field.rho[i]), fmt(field.m[i]), fmt(u[i])])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns of a snapshot CSV; `u` is not read back since it is derived.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotColumns {
    pub t: f64,
    pub r: Vec<f64>,
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
}

pub fn read_snapshot(path: &Path) -> Result<SnapshotColumns> {
    let mut rd = csv_reader(path)?;
    let (mut t, mut r, mut rho, mut m) = (None, vec![], vec![], vec![]);
    for (k, rec) in rd.records().enumerate() {
        let v = parse_row(&rec?, k + 2)?;
        if v.len() != 5 {
            return Err(Error::Parse {
                row: k + 2,
                message: format!("expected 5 columns, found {}", v.len()),
            });
        }
        t.get_or_insert(v[0]);
        r.push(v[1]);
        rho.push(v[2]);
        m.push(v[3]);
    }
    let t = t.ok_or_else(|| Error::InputContract(format!("{} holds no rows", path.display())))?;
    Ok(SnapshotColumns { t, r, rho, m })
}

/// Writes the whole trajectory under `dir`.
pub fn write_trajectory(dir: &Path, cfg: &RunConfig, traj: &Trajectory, model: Model) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let hash = cfg.hash();
    let mut entries = Vec::with_capacity(traj.snapshots.len());
    for (k, s) in traj.snapshots.iter().enumerate() {
        let file = format!("snapshot_{k:05}.csv");
        write_snapshot(&dir.join(&file), &s.field, &hash)?;
        entries.push(SnapshotEntry { file, t: s.field.t });
    }
    let n_probes = traj.snapshots[0].acc.probes.len();
    let mut w = csv_writer(&dir.join(ACCUMULATORS), &hash)?;
    let mut header = vec!["t".to_string()];
    header.extend(Accumulators::column_names(n_probes));
    w.write_record(&header)?;
    for s in &traj.snapshots {
        let mut row = vec![fmt(s.field.t)];
        row.extend(s.acc.to_row().into_iter().map(fmt));
        w.write_record(&row)?;
    }
    w.flush()?;
    let manifest = Manifest {
        config_hash: hash,
        model,
        steps: traj.steps,
        wall_time_s: traj.wall_time_s,
        snapshots: entries,
        config: cfg.clone(),
    };
    write_json(&dir.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

/// Reads a directory written by [`write_trajectory`].
pub fn read_trajectory(dir: &Path) -> Result<(Manifest, Trajectory)> {
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST))?)?;
    let grid = manifest.config.resolve()?.grid;
    let mut rd = csv_reader(&dir.join(ACCUMULATORS))?;
    let mut accs = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let v = parse_row(&rec?, k + 3)?;
        accs.push(Accumulators::from_row(&v[1..])?);
    }
    if accs.len() != manifest.snapshots.len() {
        return Err(Error::InputContract(format!(
            "{} accumulator rows for {} snapshots",
            accs.len(),
            manifest.snapshots.len()
        )));
    }
    let mut snapshots = Vec::with_capacity(accs.len());
    for (entry, acc) in manifest.snapshots.iter().zip(accs) {
        let SnapshotColumns { t, r, rho, m } = read_snapshot(&dir.join(&entry.file))?;
        if r.len() != grid.len() || r.iter().zip(grid.r()).any(|(a, b)| a != b) {
            return Err(Error::InputContract(format!(
                "{} does not match the configured grid",
                entry.file
            )));
        }
        let field = RadialField::new(grid.clone(), rho, m, t)?;
        snapshots.push(Snapshot { field, acc });
    }
    let traj = Trajectory {
        snapshots,
        steps: manifest.steps,
        wall_time_s: manifest.wall_time_s,
    };
    Ok((manifest, traj))
}

/// `report.csv` with one row per snapshot and `report.json` with the summary.
pub fn write_report(dir: &Path, report: &DiagnosticsReport, hash: &str) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join("report.csv");
    let mut w = csv_writer(&csv_path, hash)?;
    let mut header: Vec<String> = [
        "t", "e_rel", "bd", "mass", "rho_min", "rho_max", "grad_rho", "decay_w_sup", "ur_l2",
        "log_slope", "energy_residual", "bd_residual",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(Accumulators::column_names(report.probe_radii.len()));
    header.extend((0..report.probe_radii.len()).map(|k| format!("decay_probe_{k}")));
    w.write_record(&header)?;
    for row in &report.rows {
        let x = &row.values;
        let mut rec: Vec<String> = [
            x.t, x.e_rel, x.bd, x.mass, x.rho_min, x.rho_max, x.grad_rho, x.decay_w_sup, x.ur_l2,
            x.log_slope, row.energy_residual, row.bd_residual,
        ]
        .into_iter()
        .map(fmt)
        .collect();
        rec.extend(row.acc.to_row().into_iter().map(fmt));
        rec.extend(row.decay_probes.iter().copied().map(fmt));
        w.write_record(&rec)?;
    }
    w.flush()?;
    let json_path = dir.join("report.json");
    write_json(
        &json_path,
        &serde_json::json!({
            "config_hash": hash,
            "probe_radii": report.probe_radii,
            "summary": report.summary,
        }),
    )?;
    Ok((csv_path, json_path))
}

/// `ladder.csv` (value, distances, wall time) and `ladder.json` (full table).
pub fn write_ladder(dir: &Path, table: &LadderTable, hash: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv_writer(&dir.join("ladder.csv"), hash)?;
    let opt = |x: Option<f64>| x.map(fmt).unwrap_or_default();
    let mut header = vec![table.parameter.name().to_string()];
    header.extend(["d_rho", "d_m", "d_sqrt_rho_u", "wall_time_s"].map(String::from));
    let with_ref = table.rows.iter().any(|r| r.inviscid.is_some());
    if with_ref {
        header.extend(["euler_d_rho", "euler_d_m", "euler_d_sqrt_rho_u"].map(String::from));
    }
    w.write_record(&header)?;
    for r in &table.rows {
        let mut rec = vec![fmt(r.value), opt(r.d_rho), opt(r.d_m), opt(r.d_sqrt_rho_u), fmt(r.wall_time_s)];
        if with_ref {
            let e = r.inviscid.unwrap_or([f64::NAN; 3]);
            rec.extend(e.into_iter().map(fmt));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    write_json(
        &dir.join("ladder.json"),
        &serde_json::json!({ "config_hash": hash, "table": table }),
    )
}

/// Initial-data CSV (`r, rho, m`) and a JSON sidecar with the initial functionals.
pub fn write_initial_data(path: &Path, field: &RadialField, f: &InitialFunctionals, hash: &str) -> Result<PathBuf> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv_writer(path, hash)?;
    w.write_record(["r", "rho", "m"])?;
    for (i, r) in field.grid.r().iter().enumerate() {
        w.write_record([fmt(*r), fmt(field.rho[i]), fmt(field.m[i])])?;
    }
    w.flush()?;
    let sidecar = path.with_extension("json");
    write_json(
        &sidecar,
        &serde_json::json!({
            "config_hash": hash,
            "e0": f.e0,
            "e1": f.e1,
            "e2": f.e2,
            "e0_tilde": f.e0_tilde,
        }),
    )?;
    Ok(sidecar)
}
