//! Approximate initial data: clamping, far-field cut-off, N-dimensional mollification
//! of `sqrt(rho)`, windowed velocity, and restriction to the annulus `[delta, b]`.

use std::cell::Cell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eos::{relative_internal_energy_unchecked, GasParams, ViscosityParams};
use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::profile::{Profile, ProfileSpec};

pub const DEFAULT_BETA: f64 = 1e-3;
pub const DEFAULT_VARTHETA: f64 = 0.5;

fn default_beta() -> f64 {
    DEFAULT_BETA
}
fn default_radial_nodes() -> usize {
    48
}
fn default_angular_nodes() -> usize {
    96
}

/// How the grid data is produced from the profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataMode {
    /// Full regularisation pipeline.
    #[default]
    Pipeline,
    /// Profile sampled at cell centres as is.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDataSpec {
    pub profile: ProfileSpec,
    #[serde(default)]
    pub mode: DataMode,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Width of the density mollifier; `epsilon^{1/4}` when absent.
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default = "default_radial_nodes")]
    pub radial_nodes: usize,
    #[serde(default = "default_angular_nodes")]
    pub angular_nodes: usize,
}

impl InitialDataSpec {
    pub fn new(profile: ProfileSpec) -> Self {
        Self {
            profile,
            mode: DataMode::Pipeline,
            beta: DEFAULT_BETA,
            sigma: None,
            radial_nodes: default_radial_nodes(),
            angular_nodes: default_angular_nodes(),
        }
    }

    pub fn direct(profile: ProfileSpec) -> Self {
        Self {
            mode: DataMode::Direct,
            ..Self::new(profile)
        }
    }

    pub fn sigma_for(&self, eps: f64) -> f64 {
        self.sigma.unwrap_or_else(|| eps.powf(0.25))
    }
}

/// `[(beta eps)^{1/4}, (beta eps)^{-1/2}]`.
pub fn clamp_band(eps: f64, beta: f64) -> (f64, f64) {
    let be = beta * eps;
    (be.powf(0.25), be.powf(-0.5))
}

pub fn clamp_density(rho: f64, eps: f64, beta: f64) -> f64 {
    let (lo, hi) = clamp_band(eps, beta);
    rho.clamp(lo, hi)
}

/// `(beta eps)^{-1/(2N)}`.
pub fn cutoff_radius(eps: f64, beta: f64, dim: usize) -> f64 {
    (beta * eps).powf(-1.0 / (2.0 * dim as f64))
}

pub fn farfield_cutoff(rho: f64, r: f64, eps: f64, beta: f64, dim: usize, rho_bar: f64) -> f64 {
    if r > cutoff_radius(eps, beta, dim) {
        rho_bar
    } else {
        rho
    }
}

/// Checks the smallness conditions on `beta` for a profile that is at the far-field
/// state beyond `far_radius`.
pub fn check_beta(eps: f64, beta: f64, dim: usize, far_radius: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::config("initdata.beta", format!("need beta > 0, got {beta}")));
    }
    if !(eps > 0.0) {
        return Err(Error::config(
            "viscosity.epsilon",
            "the regularisation pipeline needs epsilon > 0",
        ));
    }
    let (lo, hi) = clamp_band(eps, beta);
    if !(lo < hi) {
        return Err(Error::config(
            "initdata.beta",
            format!("empty clamp band [{lo}, {hi}] for beta * epsilon = {}", beta * eps),
        ));
    }
    let rc = cutoff_radius(eps, beta, dim);
    if rc < far_radius + 2.0 {
        return Err(Error::config(
            "initdata.beta",
            format!(
                "cut-off radius {rc} is below far-field radius + 2 = {}; decrease beta",
                far_radius + 2.0
            ),
        ));
    }
    Ok(())
}

/// Standard bump mollifier of width `sigma` in R^N applied to radial functions.
///
/// The offset `y` is written as radius `s in [0, sigma]` and polar angle `phi` against
/// `x`; the measure is `s^{N-1} sin^{N-2}(phi) ds dphi`. Weights are normalised to unit
/// sum, so constants are reproduced exactly and bounds are preserved.
#[derive(Debug, Clone)]
pub struct Mollifier {
    sigma: f64,
    /// `(s, cos phi, weight)`.
    nodes: Vec<(f64, f64, f64)>,
}

impl Mollifier {
    pub fn new(sigma: f64, dim: usize, radial: usize, angular: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::config("initdata.sigma", format!("need sigma > 0, got {sigma}")));
        }
        if radial < 2 || angular < 2 {
            return Err(Error::config(
                "initdata.nodes",
                format!("need at least 2 nodes per direction, got ({radial}, {angular})"),
            ));
        }
        let n = dim as i32;
        let ds = sigma / radial as f64;
        let dphi = std::f64::consts::PI / angular as f64;
        let mut nodes = Vec::with_capacity(radial * angular);
        for i in 0..radial {
            let s = (i as f64 + 0.5) * ds;
            let t = s / sigma;
            let kernel = (-1.0 / (1.0 - t * t)).exp();
            for j in 0..angular {
                let phi = (j as f64 + 0.5) * dphi;
                let w = kernel * s.powi(n - 1) * phi.sin().powi(n - 2);
                nodes.push((s, phi.cos(), w));
            }
        }
        let total: f64 = nodes.iter().map(|n| n.2).sum();
        for nd in nodes.iter_mut() {
            nd.2 /= total;
        }
        Ok(Self { sigma, nodes })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `(J_sigma * f(|.|))(x)` at `|x| = r`.
    pub fn apply(&self, f: impl Fn(f64) -> f64, r: f64) -> f64 {
        self.nodes
            .iter()
            .map(|&(s, c, w)| w * f((r * r + s * s - 2.0 * r * s * c).max(0.0).sqrt()))
            .sum()
    }

    /// Radial component of `J_sigma * (f(|z|) z/|z|)` at `|x| = r`.
    pub fn apply_radial(&self, f: impl Fn(f64) -> f64, r: f64) -> f64 {
        self.nodes
            .iter()
            .map(|&(s, c, w)| {
                let z = (r * r + s * s - 2.0 * r * s * c).max(0.0).sqrt();
                if z == 0.0 {
                    0.0
                } else {
                    w * f(z) * (r - s * c) / z
                }
            })
            .sum()
    }
}

/// `(J_sigma * sqrt(rho_hat))^2` at radius `r`.
pub fn mollify_sqrt_density(rho_hat: impl Fn(f64) -> f64, mol: &Mollifier, r: f64) -> f64 {
    mol.apply(|z| rho_hat(z).max(0.0).sqrt(), r).powi(2)
}

/// `(m0 / sqrt(rho0)) / sqrt(rho_eps)`; zero where `rho0 = 0 = m0`.
pub fn approx_velocity(m0: f64, rho0: f64, rho_eps: f64) -> Result<f64> {
    if rho0 <= 0.0 {
        if m0 != 0.0 {
            return Err(Error::InputContract(format!("m0 = {m0} where rho0 = 0")));
        }
        return Ok(0.0);
    }
    if !(rho_eps > 0.0) {
        return Err(Error::InputContract(format!("regularised density {rho_eps} not positive")));
    }
    Ok(m0 / rho0.sqrt() / rho_eps.sqrt())
}

/// Velocity from the mollified, windowed field `(m0/sqrt(rho0)) 1_{[4 delta, 1/delta]}`,
/// divided by `sqrt(rho_eps(r))`. `mol` must have width `delta`.
pub fn windowed_velocity(
    profile: &Profile,
    rho_eps: f64,
    delta: f64,
    mol: &Mollifier,
    r: f64,
) -> Result<f64> {
    let violated = Cell::new(None);
    let (lo, hi) = (4.0 * delta, 1.0 / delta);
    let v = mol.apply_radial(
        |z| {
            if z < lo || z > hi {
                return 0.0;
            }
            let (rho0, m0) = (profile.rho0(z), profile.m0(z));
            if rho0 <= 0.0 {
                if m0 != 0.0 {
                    violated.set(Some(z));
                }
                0.0
            } else {
                m0 / rho0.sqrt()
            }
        },
        r,
    );
    if let Some(z) = violated.get() {
        return Err(Error::InputContract(format!("m0 != 0 on vacuum at r = {z}")));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    Ok(v / rho_eps.sqrt())
}

/// Samples `(rho, rho u)` on `grid`; requires `b >= 1 + 1/delta`.
pub fn restrict_annulus(
    rho: impl Fn(f64) -> f64,
    u: impl Fn(f64) -> f64,
    grid: RadialGrid,
) -> Result<RadialField> {
    let need = 1.0 + 1.0 / grid.delta();
    if grid.b() < need {
        return Err(Error::config(
            "grid.b",
            format!("need b >= 1 + 1/delta = {need}, got {}", grid.b()),
        ));
    }
    Ok(RadialField::from_fn(grid, &rho, |r| rho(r) * u(r)))
}

/// Builds initial data on `grid` for the given parameters.
pub fn build_initial_field(
    spec: &InitialDataSpec,
    g: &GasParams,
    v: &ViscosityParams,
    grid: RadialGrid,
) -> Result<RadialField> {
    let profile = Profile::from_spec(&spec.profile, g.rho_bar())?;
    build_from_profile(spec, &profile, g, v, grid)
}

pub fn build_from_profile(
    spec: &InitialDataSpec,
    profile: &Profile,
    g: &GasParams,
    v: &ViscosityParams,
    grid: RadialGrid,
) -> Result<RadialField> {
    if spec.mode == DataMode::Direct {
        for &r in grid.r() {
            let (rho, m) = (profile.rho0(r), profile.m0(r));
            if rho < 0.0 || (rho == 0.0 && m != 0.0) {
                return Err(Error::InputContract(format!(
                    "profile state ({rho}, {m}) at r = {r} is not admissible"
                )));
            }
        }
        return Ok(RadialField::from_fn(grid, |r| profile.rho0(r), |r| profile.m0(r)));
    }

    let eps = v.epsilon;
    let beta = spec.beta;
    check_beta(eps, beta, g.dim(), profile.far_field_radius())?;
    let need = 1.0 + 1.0 / grid.delta();
    if grid.b() < need {
        return Err(Error::config(
            "grid.b",
            format!("need b >= 1 + 1/delta = {need}, got {}", grid.b()),
        ));
    }
    let (lo, hi) = clamp_band(eps, beta);
    let rho_hat = |z: f64| {
        farfield_cutoff(
            clamp_density(profile.rho0(z), eps, beta),
            z,
            eps,
            beta,
            g.dim(),
            g.rho_bar(),
        )
    };
    let mol = Mollifier::new(spec.sigma_for(eps), g.dim(), spec.radial_nodes, spec.angular_nodes)?;
    let mol_u = Mollifier::new(grid.delta(), g.dim(), spec.radial_nodes, spec.angular_nodes)?;

    let states: Vec<Result<(f64, f64)>> = grid
        .r()
        .par_iter()
        .map(|&r| {
            let rho = mollify_sqrt_density(rho_hat, &mol, r).clamp(lo, hi);
            let u = windowed_velocity(profile, rho, grid.delta(), &mol_u, r)?;
            Ok((rho, u))
        })
        .collect();
    let mut rho = Vec::with_capacity(grid.len());
    let mut m = Vec::with_capacity(grid.len());
    for s in states {
        let (r, u) = s?;
        rho.push(r);
        m.push(r * u);
    }
    RadialField::new(grid, rho, m, 0.0)
}

/// Initial-data functionals written next to generated data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialFunctionals {
    /// `omega_N int (rho u^2/2 + e) r^{N-1} dr`.
    pub e0: f64,
    /// `eps^2 int (1 + 2 alpha delta rho^{alpha-1} + alpha^2 delta^2 rho^{2 alpha - 2}) |(sqrt rho)_r|^2 r^{N-1} dr`.
    pub e1: f64,
    /// `int rho (u^{2N} + |mu_r / rho|^{2N}) r^{N-1} dr`.
    pub e2: f64,
    /// `int (rho u^2/2 + e) r^{2(N-1) + vartheta} dr`.
    pub e0_tilde: f64,
}

pub fn initial_functionals(
    field: &RadialField,
    g: &GasParams,
    v: &ViscosityParams,
    vartheta: f64,
) -> InitialFunctionals {
    let grid = &field.grid;
    let u = field.velocity();
    let n = g.dim() as i32;
    let (a, d, eps) = (v.alpha, v.delta, v.epsilon);
    let energy: Vec<f64> = field
        .rho
        .iter()
        .zip(&u)
        .map(|(&r, &uu)| 0.5 * r * uu * uu + relative_internal_energy_unchecked(r, g))
        .collect();
    let sqrt_rho: Vec<f64> = field.rho.iter().map(|r| r.sqrt()).collect();
    let dsq = grid.gradient(&sqrt_rho);
    let mu: Vec<f64> = field.rho.iter().map(|&r| v.mu(r)).collect();
    let dmu = grid.gradient(&mu);

    let mut e1 = 0.0;
    let mut e2 = 0.0;
    let mut e0t = 0.0;
    for i in 0..field.len() {
        let rho = field.rho[i];
        let vol = grid.volume(i);
        if rho > 0.0 {
            let w = 1.0 + 2.0 * a * d * rho.powf(a - 1.0) + a * a * d * d * rho.powf(2.0 * a - 2.0);
            e1 += w * dsq[i] * dsq[i] * vol;
            e2 += rho * (u[i].powi(2 * n) + (dmu[i] / rho).powi(2 * n)) * vol;
        }
        e0t += energy[i] * grid.r()[i].powf(2.0 * (n - 1) as f64 + vartheta) * grid.dr();
    }
    InitialFunctionals {
        e0: g.omega_n() * grid.integrate(&energy),
        e1: eps * eps * e1,
        e2,
        e0_tilde: e0t,
    }
}
