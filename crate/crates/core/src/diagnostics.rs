//! Energy, BD entropy, integrability and decay functionals on radial fields.
//!
//! Every spatial integral is the midpoint rule on the solver grid with weight
//! `r^{N-1}` (or no weight where noted). Windowed integrals weight each cell by the
//! fraction of it that lies inside the window, so constants integrate exactly.
//! Time integrals are accumulated by the solvers with the trapezoidal rule from the
//! rates computed here.

use serde::{Deserialize, Serialize};

use crate::eos::{pressure_unchecked, relative_internal_energy_unchecked, GasParams, ViscosityParams};
use crate::error::{Error, Result};
use crate::grid::RadialField;
use crate::initdata::DEFAULT_VARTHETA;

fn default_local_window() -> [f64; 2] {
    [1.0, 2.0]
}
fn default_origin_radius() -> f64 {
    2.0
}
fn default_vartheta() -> f64 {
    DEFAULT_VARTHETA
}
fn default_probes() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSpec {
    /// `[d, D]` for the local `rho^{gamma+1}` integral.
    #[serde(default = "default_local_window")]
    pub local_window: [f64; 2],
    /// Outer radius `D` of the integrability window reaching down to the inner wall.
    #[serde(default = "default_origin_radius")]
    pub origin_radius: f64,
    #[serde(default = "default_vartheta")]
    pub vartheta: f64,
    /// Radii at which `int (|u| + |u|^3) dt` is recorded.
    #[serde(default = "default_probes")]
    pub probe_radii: Vec<f64>,
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        Self {
            local_window: default_local_window(),
            origin_radius: default_origin_radius(),
            vartheta: default_vartheta(),
            probe_radii: default_probes(),
        }
    }
}

impl DiagnosticsSpec {
    pub fn validate(&self) -> Result<()> {
        let [d, dd] = self.local_window;
        if !(d.is_finite() && dd.is_finite() && d < dd) {
            return Err(Error::config(
                "diagnostics.local_window",
                format!("need d < D, got [{d}, {dd}]"),
            ));
        }
        if !(self.origin_radius > 0.0) {
            return Err(Error::config(
                "diagnostics.origin_radius",
                format!("need > 0, got {}", self.origin_radius),
            ));
        }
        if !(self.vartheta > 0.0 && self.vartheta < 1.0) {
            return Err(Error::config(
                "diagnostics.vartheta",
                format!("need vartheta in (0, 1), got {}", self.vartheta),
            ));
        }
        if self.probe_radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::config("diagnostics.probe_radii", "radii must be positive"));
        }
        Ok(())
    }
}

/// Spatial integrands whose time integrals are tracked during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    /// `eps int (p_r / rho) mu_r r^{N-1} dr`.
    pub bd_cross: f64,
    /// `eps int (1 + delta rho^{alpha-1}) rho^{gamma-2} rho_r^2 r^{N-1} dr`.
    pub grad_rho: f64,
    /// `int_d^D rho^{gamma+1} dr`.
    pub hi_local: f64,
    /// `int_delta^D (rho |u|^3 + rho^{gamma+theta}) r^{N-1} dr`.
    pub hi_origin: f64,
    /// `|u| + |u|^3` at each probe radius.
    pub probes: Vec<f64>,
}

/// Time integrals accumulated along a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Accumulators {
    /// `eps int int rho u_r^2`, `eps int int (N-1) rho u^2/r^2` and the `eps delta rho^alpha`
    /// part of the viscous dissipation, all with weight `r^{N-1}`.
    pub dissipation: [f64; 3],
    pub bd_cross: f64,
    pub grad_rho: f64,
    pub hi_local: f64,
    pub hi_origin: f64,
    pub probes: Vec<f64>,
}

impl Accumulators {
    pub fn new(n_probes: usize) -> Self {
        Self {
            probes: vec![0.0; n_probes],
            ..Default::default()
        }
    }

    pub fn dissipation_total(&self) -> f64 {
        self.dissipation.iter().sum()
    }

    /// Adds `int_{t}^{t+dt}` of the tracked rates by the trapezoidal rule.
    pub fn add_trapezoid(&mut self, dt: f64, a: &Rates, b: &Rates) {
        let h = 0.5 * dt;
        self.bd_cross += h * (a.bd_cross + b.bd_cross);
        self.grad_rho += h * (a.grad_rho + b.grad_rho);
        self.hi_local += h * (a.hi_local + b.hi_local);
        self.hi_origin += h * (a.hi_origin + b.hi_origin);
        for (acc, (x, y)) in self.probes.iter_mut().zip(a.probes.iter().zip(&b.probes)) {
            *acc += h * (x + y);
        }
    }

    /// Flat list of values in [`Accumulators::column_names`] order.
    pub fn to_row(&self) -> Vec<f64> {
        let mut v = vec![
            self.dissipation[0],
            self.dissipation[1],
            self.dissipation[2],
            self.bd_cross,
            self.grad_rho,
            self.hi_local,
            self.hi_origin,
        ];
        v.extend_from_slice(&self.probes);
        v
    }

    pub fn from_row(row: &[f64]) -> Result<Self> {
        if row.len() < 7 {
            return Err(Error::InputContract(format!(
                "accumulator row has {} values, need at least 7",
                row.len()
            )));
        }
        Ok(Self {
            dissipation: [row[0], row[1], row[2]],
            bd_cross: row[3],
            grad_rho: row[4],
            hi_local: row[5],
            hi_origin: row[6],
            probes: row[7..].to_vec(),
        })
    }

    pub fn column_names(n_probes: usize) -> Vec<String> {
        let mut v: Vec<String> = [
            "diss_rho_ur2",
            "diss_rho_u2_r2",
            "diss_delta",
            "bd_cross",
            "grad_rho_time",
            "hi_local",
            "hi_origin",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        v.extend((0..n_probes).map(|k| format!("probe_{k}")));
        v
    }
}

/// Linear interpolation of cell values at radius `r`, constant beyond the end cells.
pub fn sample_at(field: &RadialField, values: &[f64], r: f64) -> f64 {
    let rr = field.grid.r();
    let n = rr.len();
    if r <= rr[0] {
        return values[0];
    }
    if r >= rr[n - 1] {
        return values[n - 1];
    }
    let k = (((r - rr[0]) / field.grid.dr()).floor() as usize).min(n - 2);
    let w = (r - rr[k]) / field.grid.dr();
    values[k] + w * (values[k + 1] - values[k])
}

/// `int (rho u^2/2 + e(rho, rho_bar)) r^{N-1} dr`.
pub fn relative_energy(field: &RadialField, g: &GasParams) -> f64 {
    let u = field.velocity();
    let dens: Vec<f64> = field
        .rho
        .iter()
        .zip(&u)
        .map(|(&r, &uu)| 0.5 * r * uu * uu + relative_internal_energy_unchecked(r, g))
        .collect();
    field.grid.integrate(&dens)
}

/// `int (rho |u + eps mu_r / rho|^2 / 2 + e) r^{N-1} dr`.
pub fn bd_functional(field: &RadialField, g: &GasParams, v: &ViscosityParams) -> f64 {
    let u = field.velocity();
    let mu: Vec<f64> = field.rho.iter().map(|&r| v.mu(r)).collect();
    let dmu = field.grid.gradient(&mu);
    let dens: Vec<f64> = (0..field.len())
        .map(|i| {
            let rho = field.rho[i];
            let e = relative_internal_energy_unchecked(rho, g);
            if rho > 0.0 {
                let w = u[i] + v.epsilon * dmu[i] / rho;
                0.5 * rho * w * w + e
            } else {
                e
            }
        })
        .collect();
    field.grid.integrate(&dens)
}

/// The same functional assembled as `E_rel + eps int u mu_r r^{N-1} + (eps^2/2) int mu_r^2/rho r^{N-1}`.
pub fn bd_functional_expanded(field: &RadialField, g: &GasParams, v: &ViscosityParams) -> f64 {
    let u = field.velocity();
    let mu: Vec<f64> = field.rho.iter().map(|&r| v.mu(r)).collect();
    let dmu = field.grid.gradient(&mu);
    let eps = v.epsilon;
    let cross: Vec<f64> = (0..field.len()).map(|i| u[i] * dmu[i]).collect();
    let quad: Vec<f64> = (0..field.len())
        .map(|i| {
            if field.rho[i] > 0.0 {
                dmu[i] * dmu[i] / field.rho[i]
            } else {
                0.0
            }
        })
        .collect();
    relative_energy(field, g)
        + eps * field.grid.integrate(&cross)
        + 0.5 * eps * eps * field.grid.integrate(&quad)
}

pub fn rates(field: &RadialField, g: &GasParams, v: &ViscosityParams, spec: &DiagnosticsSpec) -> Rates {
    let grid = &field.grid;
    let n = field.len();
    let u = field.velocity();
    let (a, d, eps) = (v.alpha, v.delta, v.epsilon);
    let p: Vec<f64> = field.rho.iter().map(|&r| pressure_unchecked(r, g)).collect();
    let mu: Vec<f64> = field.rho.iter().map(|&r| v.mu(r)).collect();
    let dp = grid.gradient(&p);
    let dmu = grid.gradient(&mu);
    let drho = grid.gradient(&field.rho);
    let [lo, hi] = spec.local_window;

    let mut bd_cross = 0.0;
    let mut grad_rho = 0.0;
    let mut hi_local = 0.0;
    let mut hi_origin = 0.0;
    for i in 0..n {
        let rho = field.rho[i];
        let vol = grid.volume(i);
        if rho > 0.0 {
            bd_cross += dp[i] / rho * dmu[i] * vol;
            grad_rho +=
                (1.0 + d * rho.powf(a - 1.0)) * rho.powf(g.gamma() - 2.0) * drho[i] * drho[i] * vol;
        }
        let wl = grid.overlap(i, lo, hi);
        if wl > 0.0 {
            hi_local += wl * rho.powf(g.gamma() + 1.0) * grid.dr();
        }
        let wo = grid.overlap(i, 0.0, spec.origin_radius);
        if wo > 0.0 {
            hi_origin +=
                wo * (rho * u[i].abs().powi(3) + rho.powf(g.gamma() + g.theta())) * vol;
        }
    }
    let speed: Vec<f64> = u.iter().map(|x| x.abs() + x.abs().powi(3)).collect();
    let probes = spec
        .probe_radii
        .iter()
        .map(|&r| sample_at(field, &speed, r))
        .collect();
    Rates {
        bd_cross: eps * bd_cross,
        grad_rho: eps * grad_rho,
        hi_local,
        hi_origin,
        probes,
    }
}

/// Functionals that depend on a single snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstantValues {
    pub t: f64,
    pub e_rel: f64,
    pub bd: f64,
    pub mass: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// `eps^2 int (1 + delta rho^{alpha-1} + delta^2 rho^{2(alpha-1)}) rho_r^2 / rho r^{N-1} dr`.
    pub grad_rho: f64,
    /// `sup_{r >= 1} |rho - rho_bar| r^{3(N-1)/4 + vartheta/4}`.
    pub decay_w_sup: f64,
    /// `(int u_r^2 r^{N-1} dr)^{1/2}`.
    pub ur_l2: f64,
    /// `int (rho_r / rho)^{2N} r^{N-1} dr`.
    pub log_slope: f64,
}

pub fn instant_values(
    field: &RadialField,
    g: &GasParams,
    v: &ViscosityParams,
    spec: &DiagnosticsSpec,
) -> InstantValues {
    let grid = &field.grid;
    let u = field.velocity();
    let drho = grid.gradient(&field.rho);
    let du = grid.gradient(&u);
    let (a, d, eps) = (v.alpha, v.delta, v.epsilon);
    let nn = g.dim() as i32;
    let expo = 0.75 * g.geom() + 0.25 * spec.vartheta;

    let mut grad = 0.0;
    let mut ur2 = 0.0;
    let mut logs = 0.0;
    let mut sup: f64 = 0.0;
    for i in 0..field.len() {
        let rho = field.rho[i];
        let vol = grid.volume(i);
        ur2 += du[i] * du[i] * vol;
        if rho > 0.0 {
            let w = 1.0 + d * rho.powf(a - 1.0) + d * d * rho.powf(2.0 * (a - 1.0));
            grad += w * drho[i] * drho[i] / rho * vol;
            logs += (drho[i] / rho).powi(2 * nn) * vol;
        }
        let r = grid.r()[i];
        if r >= 1.0 {
            sup = sup.max((rho - g.rho_bar()).abs() * r.powf(expo));
        }
    }
    InstantValues {
        t: field.t,
        e_rel: relative_energy(field, g),
        bd: bd_functional(field, g, v),
        mass: field.mass(),
        rho_min: field.rho.iter().copied().fold(f64::INFINITY, f64::min),
        rho_max: field.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        grad_rho: eps * eps * grad,
        decay_w_sup: sup,
        ur_l2: ur2.sqrt(),
        log_slope: logs,
    }
}

/// One row of a [`DiagnosticsReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub values: InstantValues,
    pub acc: Accumulators,
    /// `|E_rel(t) + D_visc(0, t) - E_rel(0)|`.
    pub energy_residual: f64,
    /// `|BD(t) + BD_cross(0, t) - BD(0)|`.
    pub bd_residual: f64,
    /// `int_0^t (|u| + |u|^3) dt r^{N-1+vartheta/2}` at each probe.
    pub decay_probes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub final_t: f64,
    pub energy_residual: f64,
    pub bd_residual: f64,
    pub max_relative_mass_drift: f64,
    pub rho_min: f64,
    pub e_rel_nonnegative: bool,
    pub all_finite: bool,
    /// Fitted log-log slope of `|rho - rho_bar|` over `r >= 1` at the final time.
    pub decay_slope: Option<f64>,
    /// `-3(N-1)/4 - vartheta/4`.
    pub decay_slope_reference: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub probe_radii: Vec<f64>,
    pub rows: Vec<ReportRow>,
    pub summary: ReportSummary,
}

/// Mass drift above this relative level fails the report.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Builds the report from snapshots paired with the accumulators at the same times.
pub fn build_report(
    snapshots: &[(RadialField, Accumulators)],
    g: &GasParams,
    v: &ViscosityParams,
    spec: &DiagnosticsSpec,
    density_floor: f64,
) -> Result<DiagnosticsReport> {
    let Some((first, acc0)) = snapshots.first() else {
        return Err(Error::InputContract("no snapshots to report on".into()));
    };
    let v0 = instant_values(first, g, v, spec);
    let probe_w: Vec<f64> = spec
        .probe_radii
        .iter()
        .map(|r| r.powf(g.geom() + 0.5 * spec.vartheta))
        .collect();
    let mut rows = Vec::with_capacity(snapshots.len());
    for (field, acc) in snapshots {
        let vals = instant_values(field, g, v, spec);
        let energy_residual = (vals.e_rel + acc.dissipation_total()
            - acc0.dissipation_total()
            - v0.e_rel)
            .abs();
        let bd_residual = (vals.bd + acc.bd_cross - acc0.bd_cross - v0.bd).abs();
        let decay_probes = acc.probes.iter().zip(&probe_w).map(|(a, w)| a * w).collect();
        rows.push(ReportRow {
            values: vals,
            acc: acc.clone(),
            energy_residual,
            bd_residual,
            decay_probes,
        });
    }
    let last = rows.last().expect("non-empty");
    let max_drift = rows
        .iter()
        .map(|r| ((r.values.mass - v0.mass) / v0.mass.abs().max(f64::MIN_POSITIVE)).abs())
        .fold(0.0, f64::max);
    let rho_min = rows.iter().map(|r| r.values.rho_min).fold(f64::INFINITY, f64::min);
    let all_finite = rows.iter().all(|r| {
        let x = &r.values;
        [x.e_rel, x.bd, x.mass, x.rho_min, x.rho_max, x.grad_rho, x.decay_w_sup, x.ur_l2, x.log_slope]
            .iter()
            .chain(r.acc.to_row().iter())
            .all(|v| v.is_finite())
    });
    let e_rel_nonnegative = rows.iter().all(|r| r.values.e_rel >= 0.0);
    let (final_field, _) = snapshots.last().expect("non-empty");
    let summary = ReportSummary {
        final_t: last.values.t,
        energy_residual: last.energy_residual,
        bd_residual: last.bd_residual,
        max_relative_mass_drift: max_drift,
        rho_min,
        e_rel_nonnegative,
        all_finite,
        decay_slope: decay_slope(final_field, g),
        decay_slope_reference: -0.75 * g.geom() - 0.25 * spec.vartheta,
        passed: all_finite && e_rel_nonnegative && max_drift <= MASS_TOLERANCE && rho_min > density_floor,
    };
    Ok(DiagnosticsReport {
        probe_radii: spec.probe_radii.clone(),
        rows,
        summary,
    })
}

/// Least-squares slope of `log |rho - rho_bar|` against `log r` over cells with `r >= 1`
/// and a non-negligible deviation. `None` when fewer than 3 such cells exist.
pub fn decay_slope(field: &RadialField, g: &GasParams) -> Option<f64> {
    let pts: Vec<(f64, f64)> = field
        .grid
        .r()
        .iter()
        .zip(&field.rho)
        .filter(|(r, rho)| **r >= 1.0 && (**rho - g.rho_bar()).abs() > 1e-300)
        .map(|(r, rho)| (r.ln(), (rho - g.rho_bar()).abs().ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Energy-identity residual series of a report.
pub fn energy_identity_residual(report: &DiagnosticsReport) -> Vec<f64> {
    report.rows.iter().map(|r| r.energy_residual).collect()
}

/// BD-identity residual series of a report.
pub fn bd_identity_residual(report: &DiagnosticsReport) -> Vec<f64> {
    report.rows.iter().map(|r| r.bd_residual).collect()
}
