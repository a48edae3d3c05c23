//! Gamma-law equation of state and the density-dependent viscosity laws.
//!
//! Pressure is `p = kappa rho^gamma` with the normalisation
//! `kappa = (gamma - 1)^2 / (4 gamma)`, which makes the entropy kernel exponent
//! `theta = (gamma - 1)/2` coincide with the sound-speed exponent `c = theta rho^theta`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;

use crate::error::{Error, Result};

/// Constants of a gamma-law gas in `N` space dimensions with far-field density `rho_bar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParams {
    gamma: f64,
    kappa: f64,
    theta: f64,
    ell: f64,
    dim: usize,
    rho_bar: f64,
    omega_n: f64,
}

impl GasParams {
    pub fn new(gamma: f64, dim: usize, rho_bar: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::config("gas.gamma", format!("need gamma > 1, got {gamma}")));
        }
        if dim < 2 {
            return Err(Error::config("gas.dim", format!("need N >= 2, got {dim}")));
        }
        if !(rho_bar.is_finite() && rho_bar > 0.0) {
            return Err(Error::config("gas.rho_bar", format!("need rho_bar > 0, got {rho_bar}")));
        }
        let n = dim as f64;
        Ok(Self {
            gamma,
            kappa: (gamma - 1.0).powi(2) / (4.0 * gamma),
            theta: 0.5 * (gamma - 1.0),
            ell: (3.0 - gamma) / (2.0 * (gamma - 1.0)),
            dim,
            rho_bar,
            omega_n: 2.0 * std::f64::consts::PI.powf(0.5 * n) / gamma_fn(0.5 * n),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    /// Kernel exponent `(3 - gamma) / (2 (gamma - 1))`, always `> -1/2`.
    pub fn ell(&self) -> f64 {
        self.ell
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    /// `N - 1` as a float, the coefficient of every geometric term.
    pub fn geom(&self) -> f64 {
        (self.dim - 1) as f64
    }
    pub fn rho_bar(&self) -> f64 {
        self.rho_bar
    }
    /// Surface area of the unit sphere in R^N.
    pub fn omega_n(&self) -> f64 {
        self.omega_n
    }

    pub fn with_rho_bar(&self, rho_bar: f64) -> Result<Self> {
        Self::new(self.gamma, self.dim, rho_bar)
    }
}

fn check_density(rho: f64) -> Result<()> {
    if rho >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("negative density {rho}")))
    }
}

pub fn pressure(rho: f64, g: &GasParams) -> Result<f64> {
    check_density(rho)?;
    Ok(pressure_unchecked(rho, g))
}

pub fn sound_speed(rho: f64, g: &GasParams) -> Result<f64> {
    check_density(rho)?;
    Ok(sound_speed_unchecked(rho, g))
}

/// Relative internal energy `e(rho, rho_bar)`: the second-order Taylor remainder of
/// `kappa rho^gamma / (gamma - 1)` about the far-field density.
pub fn relative_internal_energy(rho: f64, g: &GasParams) -> Result<f64> {
    check_density(rho)?;
    Ok(relative_internal_energy_unchecked(rho, g))
}

#[inline]
pub(crate) fn pressure_unchecked(rho: f64, g: &GasParams) -> f64 {
    g.kappa * rho.powf(g.gamma)
}

#[inline]
pub(crate) fn sound_speed_unchecked(rho: f64, g: &GasParams) -> f64 {
    if rho <= 0.0 {
        0.0
    } else {
        (g.gamma * g.kappa * rho.powf(g.gamma - 1.0)).sqrt()
    }
}

#[inline]
pub(crate) fn relative_internal_energy_unchecked(rho: f64, g: &GasParams) -> f64 {
    let rb = g.rho_bar;
    let val = g.kappa / (g.gamma - 1.0)
        * (rho.powf(g.gamma) - rb.powf(g.gamma) - g.gamma * rb.powf(g.gamma - 1.0) * (rho - rb));
    // round-off can push the remainder a few ulps below zero next to rho_bar
    val.max(0.0)
}

/// Viscosity scale `epsilon`, degeneracy `delta` and exponent `alpha` of
/// `mu = rho + delta rho^alpha`, `lambda = delta (alpha - 1) rho^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViscosityParams {
    pub epsilon: f64,
    pub delta: f64,
    pub alpha: f64,
}

impl ViscosityParams {
    /// Uses the default exponent `alpha = (2N - 1) / (2N)`.
    pub fn new(epsilon: f64, delta: f64, dim: usize) -> Result<Self> {
        Self::with_alpha(epsilon, delta, default_alpha(dim), dim)
    }

    pub fn with_alpha(epsilon: f64, delta: f64, alpha: f64, dim: usize) -> Result<Self> {
        if !(epsilon.is_finite() && (0.0..=1.0).contains(&epsilon)) {
            return Err(Error::config(
                "viscosity.epsilon",
                format!("need epsilon in [0, 1], got {epsilon}"),
            ));
        }
        if !(delta.is_finite() && delta > 0.0 && delta <= 1.0) {
            return Err(Error::config(
                "viscosity.delta",
                format!("need delta in (0, 1], got {delta}"),
            ));
        }
        let n = dim as f64;
        let lo = (n - 1.0) / n;
        if !(alpha > lo && alpha < 1.0) {
            return Err(Error::config(
                "viscosity.alpha",
                format!("need alpha in ({lo}, 1) for N = {dim}, got {alpha}"),
            ));
        }
        Ok(Self {
            epsilon,
            delta,
            alpha,
        })
    }

    /// Same parameters with a different viscosity scale. `epsilon = 0` gives the inviscid limit.
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }

    #[inline]
    pub fn mu(&self, rho: f64) -> f64 {
        rho + self.delta * rho.powf(self.alpha)
    }

    #[inline]
    pub fn lambda(&self, rho: f64) -> f64 {
        self.delta * (self.alpha - 1.0) * rho.powf(self.alpha)
    }

    /// `d mu / d rho`; infinite at vacuum because `alpha < 1`.
    #[inline]
    pub fn mu_prime(&self, rho: f64) -> f64 {
        1.0 + self.alpha * self.delta * rho.powf(self.alpha - 1.0)
    }

    /// `lambda - (rho mu' - mu)`; zero for the laws above.
    pub fn bd_residual(&self, rho: f64) -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        self.lambda(rho) - (rho * self.mu_prime(rho) - self.mu(rho))
    }
}

pub fn default_alpha(dim: usize) -> f64 {
    let n = dim as f64;
    (2.0 * n - 1.0) / (2.0 * n)
}

/// `(mu, lambda)` at density `rho`.
pub fn viscosities(rho: f64, v: &ViscosityParams) -> Result<(f64, f64)> {
    check_density(rho)?;
    Ok((v.mu(rho), v.lambda(rho)))
}

/// Symmetric matrix of the `delta rho^alpha` part of the viscous dissipation as a
/// quadratic form in `(u_r, u/r)`.
pub fn dissipation_form(alpha: f64, dim: usize) -> [[f64; 2]; 2] {
    let n1 = (dim - 1) as f64;
    let off = (alpha - 1.0) * n1;
    [[alpha, off], [off, n1 * (1.0 + (alpha - 1.0) * n1)]]
}

/// `4 b^2 - 4 a c` of [`dissipation_form`]; negative exactly when the form is definite.
pub fn dissipation_discriminant(alpha: f64, dim: usize) -> f64 {
    let m = dissipation_form(alpha, dim);
    4.0 * m[0][1] * m[0][1] - 4.0 * m[0][0] * m[1][1]
}

/// Smallest eigenvalue of [`dissipation_form`]: the constant `c_N` in the lower bound
/// `Q(u_r, u/r) >= c_N (u_r^2 + u^2/r^2)`.
pub fn dissipation_constant(alpha: f64, dim: usize) -> f64 {
    let m = dissipation_form(alpha, dim);
    let tr = m[0][0] + m[1][1];
    let diff = m[0][0] - m[1][1];
    0.5 * (tr - (diff * diff + 4.0 * m[0][1] * m[0][1]).sqrt())
}
