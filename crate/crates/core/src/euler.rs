//! Inviscid reference solver on the same grids as the viscous one.
//!
//! Uses the convective stage of [`crate::solver`] alone. Vacuum cells (`rho = 0`) must
//! carry `m = 0`; fluxes treat them as `u = 0`, and a cell that ends a step at exactly
//! zero density has its momentum reset to zero.

use crate::diagnostics::relative_energy;
use crate::eos::GasParams;
use crate::error::Result;
use crate::grid::RadialField;
use crate::solver::{Solver, SolverConfig, Trajectory};
use crate::diagnostics::DiagnosticsSpec;

pub struct EulerSolver {
    inner: Solver,
}

impl EulerSolver {
    pub fn new(g: GasParams, cfg: SolverConfig) -> Result<Self> {
        Ok(Self {
            inner: Solver::inviscid(g, cfg)?,
        })
    }

    pub fn with_diagnostics(self, spec: DiagnosticsSpec) -> Result<Self> {
        Ok(Self {
            inner: self.inner.with_diagnostics(spec)?,
        })
    }

    pub fn gas(&self) -> &GasParams {
        self.inner.gas()
    }

    pub fn cfl_dt(&self, field: &RadialField) -> Result<f64> {
        self.inner.cfl_dt(field)
    }

    /// One conservative update; faults on momentum carried by a vacuum cell.
    pub fn euler_step(&self, field: &mut RadialField, dt: f64) -> Result<()> {
        self.inner.step(field, dt).map(|_| ())
    }

    pub fn run(&self, initial: &RadialField) -> Result<Trajectory> {
        self.inner.run(initial)
    }
}

/// `int (m^2 / (2 rho) + e(rho, rho_bar)) r^{N-1} dr`, with vacuum cells contributing
/// `e(0, rho_bar)`.
pub fn relative_energy_monitor(field: &RadialField, g: &GasParams) -> f64 {
    relative_energy(field, g)
}
