//! Finite-volume solver for the radial compressible Navier-Stokes system on `[delta, b]`
//! with `u(delta) = u(b) = 0`.
//!
//! Each step is split into a convective stage (Rusanov fluxes, forward Euler) and a
//! viscous stage acting on the velocity only. The convective stage uses area-weighted
//! fluxes `r^{N-1} F` so that `sum rho_i r_i^{N-1} dr` changes only through the wall
//! fluxes, which vanish under the reflective ghost states. The momentum equation is
//! written as `(r^{N-1}(m^2/rho + p))_r / r^{N-1} - (N-1) p / r`, with the pressure source
//! combined into the flux difference so that a uniform state at rest is reproduced
//! exactly.
//!
//! The viscous stage minimises `sum rho_i V_i (u_i - u_i^*)^2 / 2 + dt eps a_h(u) / 2`, where
//! `a_h` is a discrete version of
//!
//! ```text
//! int [ mu (u_r^2 + (N-1) u^2 / r^2) + lambda (u_r + (N-1) u / r)^2 ] r^{N-1} dr,
//! ```
//!
//! the dissipation rate of the viscous term. The resulting tridiagonal system is symmetric,
//! and the kinetic energy lost in the stage equals `dt eps a_h(u^{n+1})` plus a
//! non-negative splitting remainder, which is what the energy ledger accumulates.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{rates, Accumulators, DiagnosticsSpec, Rates};
use crate::eos::{pressure_unchecked, sound_speed_unchecked, GasParams, ViscosityParams};
use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};

fn default_cfl() -> f64 {
    0.4
}
fn default_floor() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViscousTreatment {
    #[default]
    Implicit,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    /// Convection then viscosity.
    #[default]
    Lie,
    /// Half convection, viscosity, half convection.
    Strang,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    /// Spacing of snapshots; only the initial and final states are kept when absent.
    #[serde(default)]
    pub snapshot_interval: Option<f64>,
    #[serde(default)]
    pub viscous: ViscousTreatment,
    #[serde(default)]
    pub splitting: Splitting,
    #[serde(default = "default_floor")]
    pub density_floor: f64,
    #[serde(default)]
    pub max_steps: Option<usize>,
    #[serde(default)]
    pub wall_clock_budget_s: Option<f64>,
}

impl SolverConfig {
    pub fn new(t_end: f64) -> Self {
        Self {
            cfl: default_cfl(),
            t_end,
            snapshot_interval: None,
            viscous: ViscousTreatment::Implicit,
            splitting: Splitting::Lie,
            density_floor: default_floor(),
            max_steps: None,
            wall_clock_budget_s: None,
        }
    }

    pub fn with_snapshots(mut self, interval: f64) -> Self {
        self.snapshot_interval = Some(interval);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::config("solver.cfl", format!("need cfl in (0, 1), got {}", self.cfl)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::config(
                "solver.t_end",
                format!("need t_end >= 0, got {}", self.t_end),
            ));
        }
        if let Some(s) = self.snapshot_interval {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::config(
                    "solver.snapshot_interval",
                    format!("need a positive interval, got {s}"),
                ));
            }
        }
        if !(self.density_floor >= 0.0) {
            return Err(Error::config("solver.density_floor", "need a non-negative floor"));
        }
        Ok(())
    }
}

/// Which system is advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Model {
    NavierStokes,
    Euler,
}

/// Source term `(S_rho, S_m)(t, r)` added to the right-hand side.
pub type SourceFn = Box<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

pub struct Solver {
    g: GasParams,
    v: ViscosityParams,
    cfg: SolverConfig,
    diag: DiagnosticsSpec,
    source: Option<SourceFn>,
    model: Model,
}

/// One stored state with the time integrals up to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: RadialField,
    pub acc: Accumulators,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    pub wall_time_s: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &Snapshot {
        self.snapshots.last().expect("a trajectory holds at least the initial state")
    }

    pub fn pairs(&self) -> Vec<(RadialField, Accumulators)> {
        self.snapshots
            .iter()
            .map(|s| (s.field.clone(), s.acc.clone()))
            .collect()
    }
}

/// Increment of the three dissipation integrals over one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepInfo {
    pub dissipation: [f64; 3],
}

#[inline]
fn physical_flux(rho: f64, m: f64, g: &GasParams) -> (f64, f64, f64) {
    if rho > 0.0 {
        let u = m / rho;
        (m, m * u + pressure_unchecked(rho, g), u.abs() + sound_speed_unchecked(rho, g))
    } else {
        (0.0, 0.0, 0.0)
    }
}

#[inline]
fn rusanov(l: (f64, f64), r: (f64, f64), g: &GasParams) -> (f64, f64) {
    let (fl0, fl1, sl) = physical_flux(l.0, l.1, g);
    let (fr0, fr1, sr) = physical_flux(r.0, r.1, g);
    let s = sl.max(sr);
    (
        0.5 * (fl0 + fr0) - 0.5 * s * (r.0 - l.0),
        0.5 * (fl1 + fr1) - 0.5 * s * (r.1 - l.1),
    )
}

/// Convective update of `(rho, m)` over `dt` in place.
pub(crate) fn convective_update(grid: &RadialGrid, rho: &mut [f64], m: &mut [f64], dt: f64, g: &GasParams) {
    let n = rho.len();
    // face fluxes with reflective ghost states at both walls
    let mut fr = vec![0.0; n + 1];
    let mut fm = vec![0.0; n + 1];
    for f in 0..=n {
        let (l, r) = if f == 0 {
            ((rho[0], -m[0]), (rho[0], m[0]))
        } else if f == n {
            ((rho[n - 1], m[n - 1]), (rho[n - 1], -m[n - 1]))
        } else {
            ((rho[f - 1], m[f - 1]), (rho[f], m[f]))
        };
        let (a, b) = rusanov(l, r, g);
        fr[f] = a;
        fm[f] = b;
    }
    fr[0] = 0.0;
    fr[n] = 0.0;
    for i in 0..n {
        let (al, ar) = (grid.area(i), grid.area(i + 1));
        let k = dt / grid.volume(i);
        let p = pressure_unchecked(rho[i], g);
        rho[i] -= k * (ar * fr[i + 1] - al * fr[i]);
        m[i] -= k * (ar * (fm[i + 1] - p) - al * (fm[i] - p));
    }
}

/// Tridiagonal viscous operator `K` with `a_h(u) = u^T K u` (without the `eps` factor).
struct ViscousOperator {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

fn viscous_operator(grid: &RadialGrid, rho: &[f64], v: &ViscosityParams) -> ViscousOperator {
    let n = rho.len();
    let h = grid.dr();
    let geo = (grid.dim() - 1) as f64;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for f in 1..n {
        let (i, j) = (f - 1, f);
        let rf = grid.face(f);
        let rho_f = 0.5 * (rho[i] + rho[j]);
        let (mu, la) = (v.mu(rho_f), v.lambda(rho_f));
        let w = grid.area(f) * h;
        let (g0, g1) = (-1.0 / h, 1.0 / h);
        let c = 0.5 * geo / rf;
        let (d0, d1) = (g0 + c, g1 + c);
        diag[i] += w * (mu * g0 * g0 + la * d0 * d0);
        diag[j] += w * (mu * g1 * g1 + la * d1 * d1);
        off[i] += w * (mu * g0 * g1 + la * d0 * d1);
    }
    let c2 = (2.0 / h).powi(2);
    for (f, i) in [(0, 0), (n, n - 1)] {
        let w = 0.5 * grid.area(f) * h;
        diag[i] += w * (v.mu(rho[i]) + v.lambda(rho[i])) * c2;
    }
    for i in 0..n {
        let r = grid.r()[i];
        diag[i] += grid.volume(i) * geo * v.mu(rho[i]) / (r * r);
    }
    ViscousOperator {
        lower: off.clone(),
        diag,
        upper: off,
    }
}

/// Splits `a_h(u)` into the `rho u_r^2`, `(N-1) rho u^2 / r^2` and `delta rho^alpha` parts.
fn dissipation_parts(grid: &RadialGrid, rho: &[f64], u: &[f64], v: &ViscosityParams) -> [f64; 3] {
    let n = rho.len();
    let h = grid.dr();
    let geo = (grid.dim() - 1) as f64;
    let (d, a) = (v.delta, v.alpha);
    let mut parts = [0.0; 3];
    let face = |w: f64, rho_f: f64, gr: f64, dv: f64, parts: &mut [f64; 3]| {
        parts[0] += w * rho_f * gr * gr;
        let ra = rho_f.powf(a);
        parts[2] += w * (d * ra * gr * gr + d * (a - 1.0) * ra * dv * dv);
    };
    for f in 1..n {
        let (i, j) = (f - 1, f);
        let rho_f = 0.5 * (rho[i] + rho[j]);
        let gr = (u[j] - u[i]) / h;
        let dv = gr + geo * 0.5 * (u[i] + u[j]) / grid.face(f);
        face(grid.area(f) * h, rho_f, gr, dv, &mut parts);
    }
    let g0 = 2.0 * u[0] / h;
    face(0.5 * grid.area(0) * h, rho[0], g0, g0, &mut parts);
    let gn = -2.0 * u[n - 1] / h;
    face(0.5 * grid.area(n) * h, rho[n - 1], gn, gn, &mut parts);
    for i in 0..n {
        let r = grid.r()[i];
        let q = grid.volume(i) * geo * u[i] * u[i] / (r * r);
        parts[1] += q * rho[i];
        parts[2] += q * d * rho[i].powf(a);
    }
    parts
}

/// Solves a tridiagonal system in place (Thomas algorithm); `rhs` becomes the solution.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut b = diag[0];
    c[0] = if n > 1 { upper[0] / b } else { 0.0 };
    rhs[0] /= b;
    for i in 1..n {
        b = diag[i] - lower[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / b;
        }
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / b;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

impl Solver {
    pub fn new(g: GasParams, v: ViscosityParams, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            g,
            v,
            cfg,
            diag: DiagnosticsSpec::default(),
            source: None,
            model: Model::NavierStokes,
        })
    }

    pub(crate) fn inviscid(g: GasParams, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let v = ViscosityParams::new(0.0, 1.0, g.dim())?;
        Ok(Self {
            g,
            v,
            cfg,
            diag: DiagnosticsSpec::default(),
            source: None,
            model: Model::Euler,
        })
    }

    pub fn with_diagnostics(mut self, spec: DiagnosticsSpec) -> Result<Self> {
        spec.validate()?;
        self.diag = spec;
        Ok(self)
    }

    pub fn with_source(mut self, source: SourceFn) -> Self {
        self.source = Some(source);
        self
    }

    pub fn gas(&self) -> &GasParams {
        &self.g
    }

    pub fn viscosity(&self) -> &ViscosityParams {
        &self.v
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn diagnostics_spec(&self) -> &DiagnosticsSpec {
        &self.diag
    }

    fn check_field(&self, field: &RadialField) -> Result<()> {
        if let Some(cell) = field.first_nonfinite() {
            return Err(Error::NonFinite { cell, t: field.t });
        }
        if field.grid.dim() != self.g.dim() {
            return Err(Error::InputContract(format!(
                "grid dimension {} differs from gas dimension {}",
                field.grid.dim(),
                self.g.dim()
            )));
        }
        Ok(())
    }

    fn viscous_active(&self) -> bool {
        self.model == Model::NavierStokes && self.v.epsilon > 0.0
    }

    /// Largest stable step for the current state.
    pub fn cfl_dt(&self, field: &RadialField) -> Result<f64> {
        self.check_field(field)?;
        let mut smax: f64 = 0.0;
        for (&r, &m) in field.rho.iter().zip(&field.m) {
            smax = smax.max(physical_flux(r, m, &self.g).2);
        }
        let mut dt = if smax > 0.0 {
            self.cfg.cfl * field.grid.dr() / smax
        } else {
            f64::INFINITY
        };
        if self.viscous_active() && self.cfg.viscous == ViscousTreatment::Explicit {
            let k = viscous_operator(&field.grid, &field.rho, &self.v);
            let n = field.len();
            for i in 0..n {
                let mut row = k.diag[i].abs();
                if i > 0 {
                    row += k.lower[i - 1].abs();
                }
                if i + 1 < n {
                    row += k.upper[i].abs();
                }
                let mass = field.rho[i] * field.grid.volume(i);
                dt = dt.min(self.cfg.cfl * mass / (self.v.epsilon * row));
            }
        }
        if dt.is_nan() || dt <= 0.0 {
            return Err(Error::NonFinite { cell: 0, t: field.t });
        }
        Ok(dt)
    }

    fn check_vacuum(&self, field: &RadialField) -> Result<()> {
        for (cell, (&r, &m)) in field.rho.iter().zip(&field.m).enumerate() {
            if r == 0.0 && m != 0.0 {
                return Err(Error::VacuumContract { cell, m });
            }
        }
        Ok(())
    }

    fn convect(&self, field: &mut RadialField, dt: f64, t: f64) {
        convective_update(&field.grid, &mut field.rho, &mut field.m, dt, &self.g);
        if let Some(src) = &self.source {
            for i in 0..field.len() {
                let (sr, sm) = src(t, field.grid.r()[i]);
                field.rho[i] += dt * sr;
                field.m[i] += dt * sm;
            }
        }
    }

    fn viscous(&self, field: &mut RadialField, dt: f64) -> [f64; 3] {
        let grid = &field.grid;
        let n = field.len();
        let mass: Vec<f64> = (0..n).map(|i| field.rho[i] * grid.volume(i)).collect();
        let u_star = field.velocity();
        let eps = self.v.epsilon;
        let k = viscous_operator(grid, &field.rho, &self.v);
        let u_new = match self.cfg.viscous {
            ViscousTreatment::Implicit => {
                let lower: Vec<f64> = k.lower.iter().map(|x| dt * eps * x).collect();
                let upper: Vec<f64> = k.upper.iter().map(|x| dt * eps * x).collect();
                let diag: Vec<f64> = (0..n).map(|i| mass[i] + dt * eps * k.diag[i]).collect();
                let mut rhs: Vec<f64> = (0..n).map(|i| mass[i] * u_star[i]).collect();
                thomas(&lower, &diag, &upper, &mut rhs);
                rhs
            }
            ViscousTreatment::Explicit => (0..n)
                .map(|i| {
                    let mut ku = k.diag[i] * u_star[i];
                    if i > 0 {
                        ku += k.lower[i - 1] * u_star[i - 1];
                    }
                    if i + 1 < n {
                        ku += k.upper[i] * u_star[i + 1];
                    }
                    u_star[i] - dt * eps * ku / mass[i]
                })
                .collect(),
        };
        let u_rate = match self.cfg.viscous {
            ViscousTreatment::Implicit => &u_new,
            ViscousTreatment::Explicit => &u_star,
        };
        let parts = dissipation_parts(grid, &field.rho, u_rate, &self.v);
        for ((m, rho), u) in field.m.iter_mut().zip(&field.rho).zip(&u_new) {
            *m = rho * u;
        }
        parts.map(|p| dt * eps * p)
    }

    fn check_positivity(&self, field: &RadialField, t: f64) -> Result<()> {
        if let Some(cell) = field.first_nonfinite() {
            return Err(Error::NonFinite { cell, t });
        }
        let floor = match self.model {
            Model::NavierStokes => self.cfg.density_floor,
            Model::Euler => 0.0,
        };
        for (cell, &r) in field.rho.iter().enumerate() {
            let bad = match self.model {
                Model::NavierStokes => r <= floor,
                Model::Euler => r < 0.0,
            };
            if bad {
                return Err(Error::Positivity {
                    cell,
                    t,
                    value: r,
                    floor,
                });
            }
        }
        Ok(())
    }

    /// Advances `field` by `dt` and returns the dissipation increments. `field.t` is
    /// advanced by `dt`.
    pub fn step(&self, field: &mut RadialField, dt: f64) -> Result<StepInfo> {
        self.check_field(field)?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InputContract(format!("time step {dt} is not positive")));
        }
        if self.model == Model::Euler {
            self.check_vacuum(field)?;
        }
        let t = field.t;
        let mut info = StepInfo::default();
        let visc = self.viscous_active();
        match (self.cfg.splitting, visc) {
            (Splitting::Strang, true) => {
                self.convect(field, 0.5 * dt, t);
                self.check_positivity(field, t + 0.5 * dt)?;
                info.dissipation = self.viscous(field, dt);
                self.convect(field, 0.5 * dt, t + 0.5 * dt);
            }
            (_, true) => {
                self.convect(field, dt, t);
                self.check_positivity(field, t + dt)?;
                info.dissipation = self.viscous(field, dt);
            }
            (_, false) => self.convect(field, dt, t),
        }
        if self.model == Model::Euler {
            for i in 0..field.len() {
                if field.rho[i] == 0.0 {
                    field.m[i] = 0.0;
                }
            }
        }
        field.t = t + dt;
        self.check_positivity(field, field.t)?;
        Ok(info)
    }

    fn rates(&self, field: &RadialField) -> Rates {
        rates(field, &self.g, &self.v, &self.diag)
    }

    /// Advances `initial` to `t_end`, storing snapshots at every multiple of the snapshot
    /// interval and at `t_end`; time steps are shortened to land on them exactly.
    pub fn run(&self, initial: &RadialField) -> Result<Trajectory> {
        self.check_field(initial)?;
        if self.model == Model::Euler {
            self.check_vacuum(initial)?;
        } else {
            self.check_positivity(initial, initial.t)?;
        }
        let clock = Instant::now();
        let t0 = initial.t;
        let t_end = t0 + self.cfg.t_end;
        let mut targets = Vec::new();
        if let Some(dt_snap) = self.cfg.snapshot_interval {
            let mut k = 1usize;
            loop {
                let ts = t0 + k as f64 * dt_snap;
                if ts >= t_end * (1.0 - 1e-12) {
                    break;
                }
                targets.push(ts);
                k += 1;
            }
        }
        targets.push(t_end);

        let mut field = initial.clone();
        let mut acc = Accumulators::new(self.diag.probe_radii.len());
        let mut snapshots = vec![Snapshot {
            field: field.clone(),
            acc: acc.clone(),
        }];
        if self.cfg.t_end == 0.0 {
            return Ok(Trajectory {
                snapshots,
                steps: 0,
                wall_time_s: clock.elapsed().as_secs_f64(),
            });
        }
        let mut rates_old = self.rates(&field);
        let mut steps = 0usize;
        for &target in &targets {
            while field.t < target {
                if let Some(limit) = self.cfg.max_steps {
                    if steps >= limit {
                        return Err(Error::StepLimit { steps, t: field.t });
                    }
                }
                if let Some(budget) = self.cfg.wall_clock_budget_s {
                    if clock.elapsed().as_secs_f64() > budget {
                        return Err(Error::Budget {
                            budget_s: budget,
                            t: field.t,
                        });
                    }
                }
                let mut dt = self.cfl_dt(&field)?;
                let remaining = target - field.t;
                let hit = dt >= remaining * (1.0 - 1e-10);
                if hit {
                    dt = remaining;
                }
                let info = self.step(&mut field, dt)?;
                if hit {
                    field.t = target;
                }
                steps += 1;
                for (a, d) in acc.dissipation.iter_mut().zip(info.dissipation) {
                    *a += d;
                }
                let rates_new = self.rates(&field);
                acc.add_trapezoid(dt, &rates_old, &rates_new);
                rates_old = rates_new;
            }
            snapshots.push(Snapshot {
                field: field.clone(),
                acc: acc.clone(),
            });
        }
        Ok(Trajectory {
            snapshots,
            steps,
            wall_time_s: clock.elapsed().as_secs_f64(),
        })
    }
}
