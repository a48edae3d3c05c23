//! Weak entropy pairs of the one-dimensional isentropic Euler system.
//!
//! A pair is generated from a test function `psi` through the kernel
//! `chi(rho; s - u) = [rho^{2 theta} - (s - u)^2]_+^ell`:
//!
//! ```text
//! eta = int chi psi ds,     q = int (theta s + (1 - theta) u) chi psi ds.
//! ```
//!
//! Substituting `s = u + rho^theta tau` turns the kernel into `rho^{2 theta ell}
//! (1 - tau^2)^ell` and `ds` into `rho^theta d tau`; since `2 theta ell + theta = 1`
//! every pair is `rho` times a Gauss-Jacobi integral in `tau`. The representation is
//! used unnormalised, so `psi = s^2/2` yields `B(1/2, ell + 1)` times the mechanical
//! energy.
//!
//! `psi = s|s|/2` gives the pair `(eta#, q#)` whose integrands have a kink where
//! `u + rho^theta tau = 0`. Those integrals are split at the kink: the shorter piece is
//! integrated with an endpoint rule and the longer one as the full symmetric integral
//! minus the shorter piece, so both pieces see only polynomial integrands.

use crate::eos::{pressure_unchecked, GasParams};
use crate::error::{Error, Result};
use crate::quadrature::{EndpointJacobi, SymmetricJacobi};

/// Value of a weak entropy pair, optionally with its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPairValue {
    pub eta: f64,
    pub q: f64,
    pub eta_rho: Option<f64>,
    pub eta_m: Option<f64>,
}

impl EntropyPairValue {
    fn plain(eta: f64, q: f64) -> Self {
        Self {
            eta,
            q,
            eta_rho: None,
            eta_m: None,
        }
    }
}

/// `chi(rho; s - u)`.
pub fn kernel_chi(rho: f64, u: f64, s: f64, g: &GasParams) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let d = s - u;
    let base = rho.powf(2.0 * g.theta()) - d * d;
    if base <= 0.0 {
        0.0
    } else {
        base.powf(g.ell())
    }
}

/// Quadrature-backed evaluator of entropy pairs for one gas. Immutable after construction.
#[derive(Debug, Clone)]
pub struct EntropyEvaluator {
    g: GasParams,
    full: SymmetricJacobi,
    piece: EndpointJacobi,
    quad_order: usize,
}

impl EntropyEvaluator {
    pub const DEFAULT_ORDER: usize = 48;

    pub fn new(g: GasParams, quad_order: usize) -> Result<Self> {
        if quad_order < 8 {
            return Err(Error::config(
                "entropy.quad_order",
                format!("need at least 8 nodes, got {quad_order}"),
            ));
        }
        Ok(Self {
            g,
            full: SymmetricJacobi::new(quad_order, g.ell())?,
            piece: EndpointJacobi::new(quad_order, g.ell())?,
            quad_order,
        })
    }

    pub fn with_default_order(g: GasParams) -> Result<Self> {
        Self::new(g, Self::DEFAULT_ORDER)
    }

    pub fn gas(&self) -> &GasParams {
        &self.g
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    /// `int_{-1}^{1} f(tau) (1 - tau^2)^ell d tau` for smooth `f`.
    pub fn weighted_integral(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.full.integrate(f)
    }

    /// Same integral for an integrand equal to `left` below `kink` and `right` above it,
    /// each smooth on its side.
    pub fn weighted_integral_split(
        &self,
        kink: f64,
        left: impl Fn(f64) -> f64,
        right: impl Fn(f64) -> f64,
    ) -> f64 {
        if kink <= -1.0 {
            return self.full.integrate(right);
        }
        if kink >= 1.0 {
            return self.full.integrate(left);
        }
        if kink == 0.0 {
            return self.piece.integrate_to_one(0.0, |t| left(-t)) + self.piece.integrate_to_one(0.0, right);
        }
        if kink > 0.0 {
            // minority piece is [kink, 1]
            self.full.integrate(&left) - self.piece.integrate_to_one(kink, &left)
                + self.piece.integrate_to_one(kink, &right)
        } else {
            // minority piece is [-1, kink], mirrored onto [-kink, 1]
            self.full.integrate(&right) - self.piece.integrate_to_one(-kink, |t| right(-t))
                + self.piece.integrate_to_one(-kink, |t| left(-t))
        }
    }

    /// `A_0 = int (1 - s^2)^ell ds`.
    pub fn moment0(&self) -> f64 {
        self.full.integrate(|_| 1.0)
    }

    /// `A_2 = int s^2 (1 - s^2)^ell ds`.
    pub fn moment2(&self) -> f64 {
        self.full.integrate(|s| s * s)
    }

    /// `int_0^1 s (1 - s^2)^ell ds`, by quadrature.
    pub fn half_moment1(&self) -> f64 {
        0.5 * self.weighted_integral_split(0.0, |s| -s, |s| s)
    }

    /// `int_0^1 s^3 (1 - s^2)^ell ds`, by quadrature.
    pub fn half_moment3(&self) -> f64 {
        0.5 * self.weighted_integral_split(0.0, |s| -s * s * s, |s| s * s * s)
    }

    fn check_rho(rho: f64) -> Result<()> {
        if rho >= 0.0 && rho.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid density {rho}")))
        }
    }

    /// Pair generated by a smooth `psi` at `(rho, u)`.
    pub fn generate_pair(
        &self,
        psi: impl Fn(f64) -> f64,
        rho: f64,
        u: f64,
    ) -> Result<EntropyPairValue> {
        Self::check_rho(rho)?;
        if rho == 0.0 {
            return Ok(EntropyPairValue::plain(0.0, 0.0));
        }
        let a = rho.powf(self.g.theta());
        let th = self.g.theta();
        let eta = rho * self.full.integrate(|t| psi(u + a * t));
        let q = rho * self.full.integrate(|t| (u + th * a * t) * psi(u + a * t));
        Ok(EntropyPairValue::plain(eta, q))
    }

    /// Pair generated by `psi = psi_left` below `s_kink` and `psi_right` above it, where
    /// both branches are smooth on the whole line.
    pub fn generate_pair_piecewise(
        &self,
        psi_left: impl Fn(f64) -> f64,
        psi_right: impl Fn(f64) -> f64,
        s_kink: f64,
        rho: f64,
        u: f64,
    ) -> Result<EntropyPairValue> {
        Self::check_rho(rho)?;
        if rho == 0.0 {
            return Ok(EntropyPairValue::plain(0.0, 0.0));
        }
        let a = rho.powf(self.g.theta());
        let th = self.g.theta();
        let kink = (s_kink - u) / a;
        let eta = rho
            * self.weighted_integral_split(kink, |t| psi_left(u + a * t), |t| psi_right(u + a * t));
        let q = rho
            * self.weighted_integral_split(
                kink,
                |t| (u + th * a * t) * psi_left(u + a * t),
                |t| (u + th * a * t) * psi_right(u + a * t),
            );
        Ok(EntropyPairValue::plain(eta, q))
    }

    /// `(rho^theta, -u / rho^theta)`: kernel half-width and kink location in `tau`.
    fn sharp_frame(&self, rho: f64, m: f64) -> (f64, f64, f64) {
        let u = m / rho;
        let a = rho.powf(self.g.theta());
        (u, a, -u / a)
    }

    /// `int F(tau) |u + a tau| w(tau) d tau` with `F` smooth.
    fn abs_weighted(&self, u: f64, a: f64, kink: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.weighted_integral_split(
            kink,
            |t| -f(t) * (u + a * t),
            |t| f(t) * (u + a * t),
        )
    }

    /// `eta#` of `psi(s) = s|s|/2`; zero at vacuum.
    pub fn eta_sharp(&self, rho: f64, m: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let (u, a, k) = self.sharp_frame(rho, m);
        0.5 * rho * self.abs_weighted(u, a, k, |t| u + a * t)
    }

    /// `q#` of `psi(s) = s|s|/2`; zero at vacuum.
    pub fn q_sharp(&self, rho: f64, m: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let (u, a, k) = self.sharp_frame(rho, m);
        let th = self.g.theta();
        0.5 * rho * self.abs_weighted(u, a, k, |t| (u + th * a * t) * (u + a * t))
    }

    pub fn sharp_pair(&self, rho: f64, m: f64) -> Result<EntropyPairValue> {
        Self::check_rho(rho)?;
        let (eta_rho, eta_m) = self.eta_sharp_derivatives(rho, m);
        Ok(EntropyPairValue {
            eta: self.eta_sharp(rho, m),
            q: self.q_sharp(rho, m),
            eta_rho: Some(eta_rho),
            eta_m: Some(eta_m),
        })
    }

    /// `(d eta#/d rho, d eta#/d m)` from their own integral representations.
    /// Returns `(0, 0)` at vacuum.
    pub fn eta_sharp_derivatives(&self, rho: f64, m: f64) -> (f64, f64) {
        if rho <= 0.0 {
            return (0.0, 0.0);
        }
        let (u, a, k) = self.sharp_frame(rho, m);
        let th = self.g.theta();
        let d_rho = self.abs_weighted(u, a, k, |t| -0.5 * u + (th + 0.5) * a * t);
        let d_m = self.abs_weighted(u, a, k, |_| 1.0);
        (d_rho, d_m)
    }

    /// Relative pair `(eta~, q~)` about the far-field state `(rho_bar, 0)`.
    pub fn relative_pair(&self, rho: f64, m: f64) -> Result<(f64, f64)> {
        Self::check_rho(rho)?;
        let rb = self.g.rho_bar();
        let (_, eta_m_bar) = self.eta_sharp_derivatives(rb, 0.0);
        let eta = self.eta_sharp(rho, m) - self.eta_sharp(rb, 0.0) - eta_m_bar * m;
        let convective = if rho > 0.0 { m * m / rho } else { 0.0 };
        let q = self.q_sharp(rho, m)
            - self.q_sharp(rb, 0.0)
            - eta_m_bar
                * (convective + pressure_unchecked(rho, &self.g) - pressure_unchecked(rb, &self.g));
        Ok((eta, q))
    }

    /// `m eta#_rho + (m^2/rho) eta#_m - q#` assembled from the derivative integrals.
    pub fn flux_defect_direct(&self, rho: f64, m: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let (er, em) = self.eta_sharp_derivatives(rho, m);
        m * er + m * m / rho * em - self.q_sharp(rho, m)
    }

    /// The same quantity in its reduced form
    /// `(theta/2) rho^{1+theta} int (u - a tau) tau |u + a tau| w d tau`.
    pub fn flux_defect_reduced(&self, rho: f64, m: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let (u, a, k) = self.sharp_frame(rho, m);
        let th = self.g.theta();
        0.5 * th * rho.powf(1.0 + th) * self.abs_weighted(u, a, k, |t| (u - a * t) * t)
    }

    /// `(lhs, bound)` of the flux inequality for `(eta#, q#)`: `lhs <= bound = 0`.
    pub fn check_flux_inequality(&self, rho: f64, m: f64) -> (f64, f64) {
        if rho <= 0.0 {
            return (0.0, 0.0);
        }
        (self.flux_defect_reduced(rho, m), 0.0)
    }

    /// Residuals of the two far-field identities for `(eta#, q#)` at density `rho`
    /// (momentum zero), together with the Beta-function moment identity.
    pub fn check_far_field_identities(&self, rho: f64) -> Result<IdentityResiduals> {
        Self::check_rho(rho)?;
        let g = &self.g;
        let rb = g.rho_bar();
        let th = g.theta();
        let i1 = self.half_moment1();
        let i3 = self.half_moment3();
        let p = |r: f64| pressure_unchecked(r, g);
        let dp_bar = g.gamma() * g.kappa() * rb.powf(g.gamma() - 1.0);

        let (_, eta_m_bar) = self.eta_sharp_derivatives(rb, 0.0);
        let q_rho = self.q_sharp(rho, 0.0);
        let q_bar = self.q_sharp(rb, 0.0);

        let lhs1 = eta_m_bar * (p(rho) - p(rb)) - q_rho + q_bar;
        let e3 = 1.0 + 3.0 * th;
        let rhs1 = 2.0 * rb.powf(th) * i1 * (p(rho) - p(rb) - dp_bar * (rho - rb))
            - 4.0 * th * th / (3.0 * g.gamma() - 1.0)
                * i1
                * (rho.powf(e3) - rb.powf(e3) - e3 * rb.powf(3.0 * th) * (rho - rb));

        let lhs2 = eta_m_bar * (p(rho) - p(rb)) + q_bar;
        let rhs2 = i1
            * (2.0 * rb.powf(th) * p(rho)
                - 4.0 * th.powi(3) / (g.gamma() * (3.0 * g.gamma() - 1.0))
                    * rb.powf(g.gamma() + th));

        Ok(IdentityResiduals {
            first: (lhs1 - rhs1).abs(),
            second: (lhs2 - rhs2).abs(),
            beta: (i3 - i1 / (2.0 + g.ell())).abs(),
            rhs_first: rhs1,
            rhs_second: rhs2,
        })
    }
}

/// Output of [`EntropyEvaluator::check_far_field_identities`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    pub first: f64,
    pub second: f64,
    pub beta: f64,
    pub rhs_first: f64,
    pub rhs_second: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.first.max(self.second).max(self.beta)
    }
}
