//! Parameter ladders in `b`, `delta` or `epsilon` with space-time `L^p` distances on a
//! fixed window, and comparison of viscous runs against the inviscid reference.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::diagnostics::sample_at;
use crate::eos::GasParams;
use crate::error::{Error, Result};
use crate::io::{write_trajectory, Model};
use crate::quadrature::midpoint_nodes;
use crate::solver::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderParameter {
    B,
    Delta,
    Epsilon,
}

impl LadderParameter {
    pub fn name(&self) -> &'static str {
        match self {
            LadderParameter::B => "b",
            LadderParameter::Delta => "delta",
            LadderParameter::Epsilon => "epsilon",
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_window_cells() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSpec {
    pub parameter: LadderParameter,
    pub values: Vec<f64>,
    /// Compact radial window `[d, D]` of the metrics.
    pub window: [f64; 2],
    /// Exponent for `rho`.
    #[serde(default = "one")]
    pub p: f64,
    /// Exponent for `m` and `sqrt(rho) u`.
    #[serde(default = "one")]
    pub q: f64,
    /// Cells of the common window grid.
    #[serde(default = "default_window_cells")]
    pub window_cells: usize,
    /// Also measure every point against the inviscid reference.
    #[serde(default)]
    pub compare_inviscid: bool,
}

impl LadderSpec {
    pub fn validate(&self, base: &RunConfig, g: &GasParams) -> Result<()> {
        if self.values.len() < 3 {
            return Err(Error::config(
                "ladder.values",
                format!("a ladder needs at least 3 values, got {}", self.values.len()),
            ));
        }
        let inc = self.values.windows(2).all(|w| w[1] > w[0]);
        let dec = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(inc || dec) {
            return Err(Error::config("ladder.values", "values must be strictly monotone"));
        }
        let gamma = g.gamma();
        if !(self.p >= 1.0 && self.p < gamma + 1.0) {
            return Err(Error::config(
                "ladder.p",
                format!("need p in [1, {}), got {}", gamma + 1.0, self.p),
            ));
        }
        let qmax = 3.0 * (gamma + 1.0) / (gamma + 3.0);
        if !(self.q >= 1.0 && self.q < qmax) {
            return Err(Error::config(
                "ladder.q",
                format!("need q in [1, {qmax}), got {}", self.q),
            ));
        }
        if self.window_cells == 0 {
            return Err(Error::config("ladder.window_cells", "need at least one cell"));
        }
        let pick = |p: LadderParameter, base_v: f64, f: fn(f64, f64) -> f64| {
            if self.parameter == p {
                self.values.iter().copied().reduce(f).unwrap_or(base_v)
            } else {
                base_v
            }
        };
        let delta_max = pick(LadderParameter::Delta, base.viscosity.delta, f64::max);
        let b_min = pick(LadderParameter::B, base.grid.b, f64::min);
        let [d, dd] = self.window;
        if !(d > delta_max && dd < b_min && d < dd) {
            return Err(Error::config(
                "ladder.window",
                format!("window [{d}, {dd}] must lie inside ({delta_max}, {b_min})"),
            ));
        }
        Ok(())
    }
}

/// Field quantity compared by the metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Rho,
    M,
    /// `sqrt(rho) u`, zero on vacuum.
    SqrtRhoU,
}

/// A quantity resampled onto midpoint nodes of a window at each snapshot time.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSeries {
    pub times: Vec<f64>,
    pub r: Vec<f64>,
    pub dr: f64,
    pub values: Vec<Vec<f64>>,
}

impl WindowSeries {
    /// Series with a prescribed value at each `(t, r)`.
    pub fn from_fn(times: &[f64], window: [f64; 2], cells: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let nodes: Vec<(f64, f64)> = midpoint_nodes(window[0], window[1], cells).collect();
        let r: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        let values = times
            .iter()
            .map(|&t| r.iter().map(|&x| f(t, x)).collect())
            .collect();
        Self {
            times: times.to_vec(),
            dr: nodes.first().map_or(0.0, |n| n.1),
            r,
            values,
        }
    }
}

fn quantity_values(q: Quantity, rho: &[f64], m: &[f64]) -> Vec<f64> {
    match q {
        Quantity::Rho => rho.to_vec(),
        Quantity::M => m.to_vec(),
        Quantity::SqrtRhoU => rho
            .iter()
            .zip(m)
            .map(|(&r, &mm)| if r > 0.0 { mm / r.sqrt() } else { 0.0 })
            .collect(),
    }
}

/// Linear interpolation of a trajectory quantity onto `cells` midpoint nodes of `window`.
pub fn resample(traj: &Trajectory, q: Quantity, window: [f64; 2], cells: usize) -> Result<WindowSeries> {
    let [d, dd] = window;
    let mut times = Vec::with_capacity(traj.snapshots.len());
    let mut values = Vec::with_capacity(traj.snapshots.len());
    let nodes: Vec<(f64, f64)> = midpoint_nodes(d, dd, cells).collect();
    for snap in &traj.snapshots {
        let f = &snap.field;
        let (lo, hi) = (f.grid.r()[0], f.grid.r()[f.len() - 1]);
        if !(d >= lo && dd <= hi && d < dd) {
            return Err(Error::EmptyWindow(format!(
                "window [{d}, {dd}] not covered by cell centres [{lo}, {hi}]"
            )));
        }
        let vals = quantity_values(q, &f.rho, &f.m);
        values.push(nodes.iter().map(|&(x, _)| sample_at(f, &vals, x)).collect());
        times.push(f.t);
    }
    Ok(WindowSeries {
        times,
        r: nodes.iter().map(|n| n.0).collect(),
        dr: nodes.first().map_or(0.0, |n| n.1),
        values,
    })
}

/// `(int int |f - g|^p r^{N-1} dr dt)^{1/p}`: midpoint in `r`, trapezoidal in `t`. With a
/// single time level the time integral is dropped.
pub fn lp_distance(f: &WindowSeries, g: &WindowSeries, p: f64, dim: usize) -> Result<f64> {
    if f.times.len() != g.times.len() || f.r.len() != g.r.len() {
        return Err(Error::InputContract(format!(
            "series shapes differ: {}x{} vs {}x{}",
            f.times.len(),
            f.r.len(),
            g.times.len(),
            g.r.len()
        )));
    }
    if f.r.is_empty() || f.times.is_empty() {
        return Err(Error::EmptyWindow("no nodes in the window".into()));
    }
    let scale = f64::EPSILON.sqrt() * f.times.last().unwrap().abs().max(1.0);
    if f.times.iter().zip(&g.times).any(|(a, b)| (a - b).abs() > scale)
        || f.r.iter().zip(&g.r).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
    {
        return Err(Error::InputContract("series are sampled at different points".into()));
    }
    let weights: Vec<f64> = f.r.iter().map(|r| r.powi(dim as i32 - 1) * f.dr).collect();
    let spatial: Vec<f64> = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| {
            a.iter()
                .zip(b)
                .zip(&weights)
                .map(|((x, y), w)| (x - y).abs().powf(p) * w)
                .sum()
        })
        .collect();
    let total = if spatial.len() == 1 {
        spatial[0]
    } else {
        f.times
            .windows(2)
            .zip(spatial.windows(2))
            .map(|(t, s)| 0.5 * (t[1] - t[0]) * (s[0] + s[1]))
            .sum()
    };
    Ok(total.powf(1.0 / p))
}

/// Distances `(rho, m, sqrt(rho) u)` between two trajectories on the ladder window.
pub fn trajectory_distances(a: &Trajectory, b: &Trajectory, spec: &LadderSpec, dim: usize) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (k, (q, p)) in [(Quantity::Rho, spec.p), (Quantity::M, spec.q), (Quantity::SqrtRhoU, spec.q)]
        .into_iter()
        .enumerate()
    {
        let fa = resample(a, q, spec.window, spec.window_cells)?;
        let fb = resample(b, q, spec.window, spec.window_cells)?;
        out[k] = lp_distance(&fa, &fb, p, dim)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub value: f64,
    /// Distances to the previous ladder point; `None` for the first.
    pub d_rho: Option<f64>,
    pub d_m: Option<f64>,
    pub d_sqrt_rho_u: Option<f64>,
    /// Distances to the inviscid reference when requested.
    pub inviscid: Option<[f64; 3]>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderVerdicts {
    pub rho_decreasing: bool,
    pub m_decreasing: bool,
    pub sqrt_rho_u_decreasing: bool,
    pub inviscid_decreasing: Option<bool>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderTable {
    pub parameter: LadderParameter,
    pub rows: Vec<LadderRow>,
    pub verdicts: LadderVerdicts,
}

/// `d_{k+1} < d_k` for every consecutive pair; a pair of exact zeros also counts.
pub fn strictly_decreasing(d: &[f64]) -> bool {
    d.windows(2)
        .all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0))
}

/// Viscous trajectory compared with an inviscid one over the same grid and times.
pub fn compare_to_inviscid(ns: &Trajectory, euler: &Trajectory, spec: &LadderSpec, dim: usize) -> Result<[f64; 3]> {
    let (a, b) = (&ns.snapshots[0].field, &euler.snapshots[0].field);
    if a.grid != b.grid || ns.snapshots.len() != euler.snapshots.len() {
        return Err(Error::config(
            "ladder",
            "viscous and inviscid runs differ in grid or snapshot times",
        ));
    }
    trajectory_distances(ns, euler, spec, dim)
}

/// Runs every ladder point (concurrently) and tabulates successive distances.
pub fn run_ladder(spec: &LadderSpec, base: &RunConfig) -> Result<LadderTable> {
    run_ladder_to(spec, base, None)
}

/// As [`run_ladder`], also writing each point's trajectory to `out/point_<k>`.
pub fn run_ladder_to(spec: &LadderSpec, base: &RunConfig, out: Option<&Path>) -> Result<LadderTable> {
    let resolved = base.resolve()?;
    spec.validate(base, &resolved.gas)?;
    let dim = resolved.gas.dim();
    let reference = if spec.compare_inviscid {
        Some(base.run_inviscid()?)
    } else {
        None
    };
    let runs: Vec<Result<(Trajectory, f64)>> = spec
        .values
        .par_iter()
        .enumerate()
        .map(|(k, &val)| {
            let clock = Instant::now();
            let cfg = base.with_parameter(spec.parameter, val);
            let (_, traj) = cfg.run()?;
            if let Some(dir) = out {
                write_trajectory(&dir.join(format!("point_{k:02}")), &cfg, &traj, Model::NavierStokes)?;
            }
            Ok((traj, clock.elapsed().as_secs_f64()))
        })
        .collect();
    let runs: Vec<(Trajectory, f64)> = runs.into_iter().collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(runs.len());
    for (k, (traj, wall)) in runs.iter().enumerate() {
        let d = if k == 0 {
            None
        } else {
            Some(trajectory_distances(&runs[k - 1].0, traj, spec, dim)?)
        };
        let inviscid = match &reference {
            Some(r) => Some(compare_to_inviscid(traj, r, spec, dim)?),
            None => None,
        };
        rows.push(LadderRow {
            value: spec.values[k],
            d_rho: d.map(|x| x[0]),
            d_m: d.map(|x| x[1]),
            d_sqrt_rho_u: d.map(|x| x[2]),
            inviscid,
            wall_time_s: *wall,
        });
    }
    let col = |f: fn(&LadderRow) -> Option<f64>| -> Vec<f64> { rows.iter().filter_map(f).collect() };
    let rho_decreasing = strictly_decreasing(&col(|r| r.d_rho));
    let m_decreasing = strictly_decreasing(&col(|r| r.d_m));
    let sqrt_rho_u_decreasing = strictly_decreasing(&col(|r| r.d_sqrt_rho_u));
    let inviscid_decreasing = reference.as_ref().map(|_| {
        (0..3).all(|k| {
            let d: Vec<f64> = rows.iter().filter_map(|r| r.inviscid.map(|x| x[k])).collect();
            strictly_decreasing(&d)
        })
    });
    let passed = rho_decreasing
        && m_decreasing
        && sqrt_rho_u_decreasing
        && inviscid_decreasing.unwrap_or(true);
    Ok(LadderTable {
        parameter: spec.parameter,
        rows,
        verdicts: LadderVerdicts {
            rho_decreasing,
            m_decreasing,
            sqrt_rho_u_decreasing,
            inviscid_decreasing,
            passed,
        },
    })
}
