//! Run configuration: one JSON document describing gas, viscosity, grid, solver,
//! initial data, diagnostics and an optional parameter ladder.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::DiagnosticsSpec;
use crate::eos::{default_alpha, GasParams, ViscosityParams};
use crate::error::{Error, Result};
use crate::euler::EulerSolver;
use crate::grid::{RadialField, RadialGrid};
use crate::initdata::{build_initial_field, DataMode, InitialDataSpec};
use crate::ladder::{LadderParameter, LadderSpec};
use crate::solver::{Solver, SolverConfig, Trajectory};

fn default_dim() -> usize {
    2
}
fn default_rho_bar() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasConfig {
    pub gamma: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_rho_bar")]
    pub rho_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscosityConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// `(2N - 1) / (2N)` when absent.
    #[serde(default)]
    pub alpha: Option<f64>,
}

/// Grid on `[delta, b]`, with `delta` taken from the viscosity block. Exactly one of
/// `cells` and `dr` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub b: f64,
    #[serde(default)]
    pub cells: Option<usize>,
    #[serde(default)]
    pub dr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gas: GasConfig,
    pub viscosity: ViscosityConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub initdata: InitialDataSpec,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
    #[serde(default)]
    pub ladder: Option<LadderSpec>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Parameter objects built from a validated [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Resolved {
    pub gas: GasParams,
    pub visc: ViscosityParams,
    pub grid: RadialGrid,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks every block and builds the parameter objects.
    pub fn resolve(&self) -> Result<Resolved> {
        let gas = GasParams::new(self.gas.gamma, self.gas.dim, self.gas.rho_bar)?;
        let alpha = self.viscosity.alpha.unwrap_or_else(|| default_alpha(self.gas.dim));
        let visc =
            ViscosityParams::with_alpha(self.viscosity.epsilon, self.viscosity.delta, alpha, self.gas.dim)?;
        let grid = match (self.grid.cells, self.grid.dr) {
            (Some(c), None) => RadialGrid::new(c, visc.delta, self.grid.b, gas.dim())?,
            (None, Some(h)) => RadialGrid::with_spacing(h, visc.delta, self.grid.b, gas.dim())?,
            _ => {
                return Err(Error::config(
                    "grid",
                    "give exactly one of `cells` and `dr`",
                ))
            }
        };
        self.solver.validate()?;
        self.diagnostics.validate()?;
        self.initdata.profile.validate()?;
        if self.initdata.mode == DataMode::Pipeline && visc.epsilon == 0.0 {
            return Err(Error::config(
                "viscosity.epsilon",
                "the regularisation pipeline needs epsilon > 0; use mode \"direct\"",
            ));
        }
        if let Some(l) = &self.ladder {
            l.validate(self, &gas)?;
        }
        Ok(Resolved { gas, visc, grid })
    }

    /// Short SHA-256 digest of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("configuration serialises");
        let digest = Sha256::digest(text.as_bytes());
        hex::encode(digest)[..16].to_string()
    }

    /// Copy with one ladder parameter replaced.
    pub fn with_parameter(&self, p: LadderParameter, value: f64) -> Self {
        let mut c = self.clone();
        match p {
            LadderParameter::B => c.grid.b = value,
            LadderParameter::Delta => c.viscosity.delta = value,
            LadderParameter::Epsilon => c.viscosity.epsilon = value,
        }
        c.ladder = None;
        c
    }

    pub fn initial_field(&self) -> Result<RadialField> {
        let r = self.resolve()?;
        build_initial_field(&self.initdata, &r.gas, &r.visc, r.grid)
    }

    pub fn solver(&self) -> Result<Solver> {
        let r = self.resolve()?;
        Solver::new(r.gas, r.visc, self.solver.clone())?.with_diagnostics(self.diagnostics.clone())
    }

    /// Viscous run from the configured initial data.
    pub fn run(&self) -> Result<(RadialField, Trajectory)> {
        let init = self.initial_field()?;
        let traj = self.solver()?.run(&init)?;
        Ok((init, traj))
    }

    /// Inviscid reference on the same grid from the profile sampled directly.
    pub fn run_inviscid(&self) -> Result<Trajectory> {
        let r = self.resolve()?;
        let spec = InitialDataSpec {
            mode: DataMode::Direct,
            ..self.initdata.clone()
        };
        let init = build_initial_field(&spec, &r.gas, &r.visc, r.grid)?;
        EulerSolver::new(r.gas, self.solver.clone())?
            .with_diagnostics(self.diagnostics.clone())?
            .run(&init)
    }
}
