//! Uniform cell-centred grids on `[delta, b]` and the fields living on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    delta: f64,
    b: f64,
    dim: usize,
    dr: f64,
    r: Vec<f64>,
}

impl RadialGrid {
    pub fn new(cells: usize, delta: f64, b: f64, dim: usize) -> Result<Self> {
        if cells < 3 {
            return Err(Error::config("grid.cells", format!("need at least 3 cells, got {cells}")));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::config("grid.delta", format!("need delta > 0, got {delta}")));
        }
        if !(b.is_finite() && b > delta) {
            return Err(Error::config("grid.b", format!("need b > delta = {delta}, got {b}")));
        }
        if dim < 2 {
            return Err(Error::config("grid.dim", format!("need N >= 2, got {dim}")));
        }
        let dr = (b - delta) / cells as f64;
        let r = (0..cells).map(|i| delta + (i as f64 + 0.5) * dr).collect();
        Ok(Self { delta, b, dim, dr, r })
    }

    /// Grid with spacing as close as possible to `dr`.
    pub fn with_spacing(dr: f64, delta: f64, b: f64, dim: usize) -> Result<Self> {
        if !(dr > 0.0) {
            return Err(Error::config("grid.dr", format!("need dr > 0, got {dr}")));
        }
        let cells = ((b - delta) / dr).round().max(3.0) as usize;
        Self::new(cells, delta, b, dim)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// Radius of face `f`, `0 <= f <= M`.
    #[inline]
    pub fn face(&self, f: usize) -> f64 {
        self.delta + f as f64 * self.dr
    }

    /// `r_f^{N-1}` at face `f`.
    #[inline]
    pub fn area(&self, f: usize) -> f64 {
        self.face(f).powi(self.dim as i32 - 1)
    }

    /// `r_i^{N-1} dr`, the midpoint volume of cell `i`.
    #[inline]
    pub fn volume(&self, i: usize) -> f64 {
        self.r[i].powi(self.dim as i32 - 1) * self.dr
    }

    /// Midpoint-rule `int f(r) r^{N-1} dr` over the whole grid.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.volume(i))
            .sum()
    }

    /// Fraction of cell `i` inside `[lo, hi]`.
    pub fn overlap(&self, i: usize, lo: f64, hi: f64) -> f64 {
        let a = self.face(i).max(lo);
        let c = self.face(i + 1).min(hi);
        ((c - a) / self.dr).clamp(0.0, 1.0)
    }

    /// `d/dr` by centred differences, second-order one-sided at the walls.
    pub fn gradient(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let h = self.dr;
        let mut g = vec![0.0; n];
        if n < 3 {
            return g;
        }
        g[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
        g[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
        for i in 1..n - 1 {
            g[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
        }
        g
    }

    /// Index of the cell containing `r`, clamped to the grid.
    pub fn locate(&self, r: f64) -> usize {
        let k = ((r - self.delta) / self.dr).floor();
        (k.max(0.0) as usize).min(self.len() - 1)
    }
}

/// Density and momentum on a [`RadialGrid`] at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialField {
    pub grid: RadialGrid,
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub t: f64,
}

impl RadialField {
    pub fn new(grid: RadialGrid, rho: Vec<f64>, m: Vec<f64>, t: f64) -> Result<Self> {
        if rho.len() != grid.len() || m.len() != grid.len() {
            return Err(Error::InputContract(format!(
                "field length ({}, {}) does not match grid ({})",
                rho.len(),
                m.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, rho, m, t })
    }

    /// Samples `rho(r)` and `m(r)` at cell centres.
    pub fn from_fn(grid: RadialGrid, rho: impl Fn(f64) -> f64, m: impl Fn(f64) -> f64) -> Self {
        let rv = grid.r().iter().map(|&r| rho(r)).collect();
        let mv = grid.r().iter().map(|&r| m(r)).collect();
        Self {
            grid,
            rho: rv,
            m: mv,
            t: 0.0,
        }
    }

    pub fn uniform(grid: RadialGrid, rho: f64, u: f64) -> Self {
        Self::from_fn(grid, |_| rho, |_| rho * u)
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Velocity `m/rho`, zero on vacuum cells.
    pub fn velocity(&self) -> Vec<f64> {
        self.rho
            .iter()
            .zip(&self.m)
            .map(|(&r, &m)| if r > 0.0 { m / r } else { 0.0 })
            .collect()
    }

    /// `int rho r^{N-1} dr`.
    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.rho)
    }

    /// First non-finite cell, if any.
    pub fn first_nonfinite(&self) -> Option<usize> {
        self.rho
            .iter()
            .zip(&self.m)
            .position(|(r, m)| !(r.is_finite() && m.is_finite()))
    }
}
