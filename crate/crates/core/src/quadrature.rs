//! Gauss-Jacobi rules for integrals against `(1 - x)^a (1 + x)^b` on `[-1, 1]`.
//!
//! Nodes come from the Golub-Welsch eigenproblem and are then polished by Newton
//! iteration on the Jacobi polynomial; weights use the closed-form Christoffel
//! numbers, which keeps the small weights next to a singular endpoint accurate.

use nalgebra::DMatrix;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GaussJacobi {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    alpha: f64,
    beta: f64,
}

/// `(P_n, P_{n-1})` of the Jacobi family at `x`.
fn jacobi_pair(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    if n == 0 {
        return (p0, 0.0);
    }
    let mut p1 = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x;
    for k in 2..=n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let c1 = 2.0 * kf * (kf + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * s;
        let p2 = (c2 * p1 - c3 * p0) / c1;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// `P_n'(x)` from `(1 - x^2)(2n + a + b) P_n' = n[(a - b) - (2n + a + b)x] P_n + 2(n + a)(n + b) P_{n-1}`.
fn jacobi_derivative(n: usize, a: f64, b: f64, x: f64, pn: f64, pn1: f64) -> f64 {
    let nf = n as f64;
    let s = 2.0 * nf + a + b;
    (nf * ((a - b) - s * x) * pn + 2.0 * (nf + a) * (nf + b) * pn1) / (s * (1.0 - x * x))
}

impl GaussJacobi {
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::config("quadrature.order", format!("need at least 2 nodes, got {n}")));
        }
        if !(alpha > -1.0 && beta > -1.0) {
            return Err(Error::config(
                "quadrature.exponents",
                format!("need exponents > -1, got ({alpha}, {beta})"),
            ));
        }
        let (a, b) = (alpha, beta);

        let mut jm = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let k = i as f64;
            let s = 2.0 * k + a + b;
            jm[(i, i)] = if i == 0 {
                (b - a) / (a + b + 2.0)
            } else {
                (b * b - a * a) / (s * (s + 2.0))
            };
            if i + 1 < n {
                let k1 = k + 1.0;
                let s1 = 2.0 * k1 + a + b;
                let off = (4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b)
                    / (s1 * s1 * (s1 + 1.0) * (s1 - 1.0)))
                    .sqrt();
                jm[(i, i + 1)] = off;
                jm[(i + 1, i)] = off;
            }
        }
        let mut nodes: Vec<f64> = jm.symmetric_eigenvalues().iter().copied().collect();
        nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());

        let nf = n as f64;
        let log_const = ln_gamma(nf + a + 1.0) + ln_gamma(nf + b + 1.0)
            - ln_gamma(nf + a + b + 1.0)
            - ln_gamma(nf + 1.0)
            + (a + b + 1.0) * std::f64::consts::LN_2;
        let cst = log_const.exp();

        let mut weights = Vec::with_capacity(n);
        for x in nodes.iter_mut() {
            for _ in 0..4 {
                let (pn, pn1) = jacobi_pair(n, a, b, *x);
                let dp = jacobi_derivative(n, a, b, *x, pn, pn1);
                let dx = pn / dp;
                *x -= dx;
                if dx.abs() < 1e-17 {
                    break;
                }
            }
            let (pn, pn1) = jacobi_pair(n, a, b, *x);
            let dp = jacobi_derivative(n, a, b, *x, pn, pn1);
            weights.push(cst / ((1.0 - *x * *x) * dp * dp));
        }
        // the Christoffel constant carries the round-off of large log-gamma values; pin
        // the zeroth moment to its exact value instead
        let mu0 = 2f64.powf(a + b + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(a + b + 2.0);
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w *= mu0 / total;
        }
        Ok(Self {
            nodes,
            weights,
            alpha,
            beta,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exponents(&self) -> (f64, f64) {
        (self.alpha, self.beta)
    }

    /// `sum w_i f(x_i)` approximating `int_{-1}^{1} (1-x)^a (1+x)^b f(x) dx`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Rule for the symmetric weight `(1 - s^2)^ell`, summed over mirrored node pairs so
/// that odd integrands integrate to exactly zero.
#[derive(Debug, Clone)]
pub struct SymmetricJacobi {
    /// Positive nodes with their weights, ascending.
    pairs: Vec<(f64, f64)>,
    /// Weight of the node at the origin (odd order only).
    center: Option<f64>,
    ell: f64,
}

impl SymmetricJacobi {
    pub fn new(n: usize, ell: f64) -> Result<Self> {
        let gj = GaussJacobi::new(n, ell, ell)?;
        let half = n / 2;
        let mut pairs = Vec::with_capacity(half);
        for k in 0..half {
            let lo = n - 1 - k;
            let x = 0.5 * (gj.nodes[lo] - gj.nodes[k]);
            let w = 0.5 * (gj.weights[lo] + gj.weights[k]);
            pairs.push((x, w));
        }
        pairs.reverse();
        let center = (n % 2 == 1).then(|| gj.weights[half]);
        Ok(Self { pairs, center, ell })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn order(&self) -> usize {
        2 * self.pairs.len() + usize::from(self.center.is_some())
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut acc = self.center.map_or(0.0, |w| w * f(0.0));
        for &(x, w) in &self.pairs {
            acc += w * (f(x) + f(-x));
        }
        acc
    }
}

/// Integrates `(1 - s^2)^ell f(s)` over `[k, 1]` for `k in (-1, 1)` using the
/// `(1 - x)^ell` rule on the mapped interval; `(1 + s)^ell` is treated as smooth.
#[derive(Debug, Clone)]
pub struct EndpointJacobi {
    rule: GaussJacobi,
    ell: f64,
}

impl EndpointJacobi {
    pub fn new(n: usize, ell: f64) -> Result<Self> {
        Ok(Self {
            rule: GaussJacobi::new(n, ell, 0.0)?,
            ell,
        })
    }

    pub fn integrate_to_one(&self, k: f64, f: impl Fn(f64) -> f64) -> f64 {
        if k >= 1.0 {
            return 0.0;
        }
        let half = 0.5 * (1.0 - k);
        let scale = half.powf(self.ell + 1.0);
        let ell = self.ell;
        scale
            * self.rule.integrate(|x| {
                let s = k + half * (1.0 + x);
                f(s) * (1.0 + s).powf(ell)
            })
    }
}

/// Composite midpoint nodes on `[a, b]` as `(x, dx)` pairs.
pub fn midpoint_nodes(a: f64, b: f64, n: usize) -> impl Iterator<Item = (f64, f64)> {
    let h = (b - a) / n as f64;
    (0..n).map(move |i| (a + (i as f64 + 0.5) * h, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::beta::beta;

    #[test]
    fn legendre_matches_known_rule() {
        let gl = GaussJacobi::new(3, 0.0, 0.0).unwrap();
        let x = (0.6f64).sqrt();
        assert_relative_eq!(gl.nodes()[0], -x, epsilon = 1e-15);
        assert_relative_eq!(gl.nodes()[1], 0.0, epsilon = 1e-15);
        assert_relative_eq!(gl.weights()[0], 5.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(gl.weights()[1], 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn polynomial_exactness() {
        for &(a, b) in &[(0.5, 0.5), (-0.4, -0.4), (2.0, 0.0), (-0.3, 0.0), (0.7, -0.2)] {
            let n = 8;
            let gj = GaussJacobi::new(n, a, b).unwrap();
            for k in 0..2 * n {
                // int (1-x)^a (1+x)^b x^k via expansion around x = -1 is awkward; use
                // (1+x)^k instead, whose moment is a Beta function
                let got = gj.integrate(|x| (1.0 + x).powi(k as i32));
                let want = 2f64.powf(a + b + 1.0 + k as f64) * beta(a + 1.0, b + 1.0 + k as f64);
                assert_relative_eq!(got, want, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_rule_kills_odd_integrands() {
        for n in [8, 9, 40] {
            let r = SymmetricJacobi::new(n, 0.5).unwrap();
            assert_eq!(r.order(), n);
            assert_eq!(r.integrate(|s| s * (3.0 - 7.0 * s * s)), 0.0);
            assert_relative_eq!(r.integrate(|_| 1.0), beta(0.5, 1.5), max_relative = 1e-14);
        }
    }

    #[test]
    fn endpoint_rule_partial_moment() {
        // int_k^1 s (1-s^2)^ell ds = (1-k^2)^(ell+1) / (2 (ell+1))
        for ell in [-0.4, 0.0, 0.5, 2.0] {
            let r = EndpointJacobi::new(40, ell).unwrap();
            for k in [-0.9, -0.3, 0.0, 0.4, 0.99] {
                let got = r.integrate_to_one(k, |s| s);
                let want = (1.0 - k * k).powf(ell + 1.0) / (2.0 * (ell + 1.0));
                assert_relative_eq!(got, want, max_relative = 1e-12, epsilon = 1e-15);
            }
        }
    }
}
