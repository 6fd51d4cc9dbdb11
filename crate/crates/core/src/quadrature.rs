//! Gauss quadrature rules.
//!
//! [`GaussRule`] holds raw Legendre / generalized Laguerre nodes.
//! [`ExpectationRule`] turns them into expectations over central or
//! noncentral chi-square laws, with weights that sum to one.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::{bessel_i_scaled, ln_gamma, NeumaierSum};

#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Gauss-Legendre on [-1, 1].
    pub fn legendre(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("legendre rule needs at least one node".into()));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp;
            let mut iters = 0;
            loop {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
                }
                pp = nf * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                iters += 1;
                if (z - z1).abs() <= 1e-15 || iters > 100 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    /// Generalized Gauss-Laguerre for the weight t^α e^{-t} on [0, ∞).
    pub fn laguerre(n: usize, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("laguerre rule needs at least one node".into()));
        }
        if !(alpha > -1.0) {
            return Err(Error::Domain(format!("laguerre alpha must exceed -1, got {alpha}")));
        }
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let ln_norm = ln_gamma(alpha + nf) - ln_gamma(nf);
        let mut z = 0.0f64;
        for i in 0..n {
            z = match i {
                0 => (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * nf + 1.8 * alpha),
                1 => z + (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    z + ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alpha / (1.0 + 3.5 * ai))
                        * (z - nodes[i - 2])
                        / (1.0 + 0.3 * alpha)
                }
            };
            let mut converged = false;
            for _ in 0..200 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf - 1.0 + alpha - z) * p2 - (jf - 1.0 + alpha) * p3) / jf;
                }
                let pp = (nf * p1 - (nf + alpha) * p2) / z;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-14 * z.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged || !z.is_finite() {
                return Err(Error::NonConvergence { what: "laguerre nodes", terms: 200 });
            }
            // recompute p2 at the converged node for the weight
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0 + alpha - z) * p2 - (jf - 1.0 + alpha) * p3) / jf;
            }
            let pp = (nf * p1 - (nf + alpha) * p2) / z;
            nodes[i] = z;
            weights[i] = -(ln_norm.exp()) / (pp * nf * p2);
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ w_i f(x_i).
    pub fn sum<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = NeumaierSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(*x));
        }
        acc.value()
    }

    /// Legendre nodes mapped to [a, b], weights scaled accordingly.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }
}

/// Nodes and probability weights approximating E[h(V)] for a chi-square
/// variable V.
#[derive(Debug, Clone)]
pub struct ExpectationRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ExpectationRule {
    /// V ~ χ² with `dof` degrees of freedom (dof even or odd, > 0), via
    /// generalized Laguerre in t = V/2.
    pub fn chi_square(dof: f64, n: usize) -> Result<Self> {
        if !(dof > 0.0) {
            return Err(Error::Domain(format!("chi-square dof must be positive, got {dof}")));
        }
        let nu = 0.5 * dof;
        let rule = GaussRule::laguerre(n, nu - 1.0)?;
        let norm = (-ln_gamma(nu)).exp();
        Ok(Self {
            nodes: rule.nodes.iter().map(|t| 2.0 * t).collect(),
            weights: rule.weights.iter().map(|w| w * norm).collect(),
        })
    }

    /// V ~ noncentral χ²(dof, λ) with even dof. Substitutes V = w² and uses
    /// Gauss-Legendre on a window in w that covers the bulk of the law. Also
    /// valid for λ = 0, which gives an independent route to the central case.
    pub fn noncentral_chi_square(dof: u32, lambda: f64, n: usize) -> Result<Self> {
        if dof == 0 || !dof.is_multiple_of(2) {
            return Err(Error::Domain(format!("noncentral rule needs positive even dof, got {dof}")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("noncentrality must be finite and >= 0, got {lambda}")));
        }
        let sl = lambda.sqrt();
        let lo = (sl - 10.0).max(0.0);
        let hi = sl + (dof as f64).sqrt() + 10.0;
        let rule = GaussRule::legendre(n)?;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (w, wt) in rule.mapped(lo, hi) {
            let v = w * w;
            nodes.push(v);
            weights.push(wt * 2.0 * w * ncx2_pdf(v, dof, lambda));
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = NeumaierSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(*x));
        }
        acc.value()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().copied().collect::<NeumaierSum>().value()
    }
}

/// Density of a noncentral chi-square with even `dof` at x.
pub fn ncx2_pdf(x: f64, dof: u32, lambda: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let half = 0.5 * dof as f64;
    if x == 0.0 {
        return if dof == 2 { 0.5 * (-0.5 * lambda).exp() } else if dof < 2 { f64::INFINITY } else { 0.0 };
    }
    if lambda == 0.0 {
        let ln = (half - 1.0) * x.ln() - 0.5 * x - half * 2f64.ln() - ln_gamma(half);
        return ln.exp();
    }
    let order = dof / 2 - 1;
    let z = (lambda * x).sqrt();
    // e^{-(x+λ)/2} I(z) = e^{-(√x-√λ)²/2} * e^{-z} I(z)
    let ln = -(2f64).ln() + 0.5 * (order as f64) * (x / lambda).ln()
        - 0.5 * (x.sqrt() - lambda.sqrt()).powi(2);
    ln.exp() * bessel_i_scaled(order, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = GaussRule::legendre(10).unwrap();
        for k in 0..20 {
            let got = r.sum(|x| x.powi(k));
            let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn laguerre_moments() {
        for &alpha in &[0.0, 0.5, 1.0, 3.0, 7.0] {
            let n = 24;
            let r = GaussRule::laguerre(n, alpha).unwrap();
            for k in 0..(2 * n as i32).min(30) {
                let got = r.sum(|t| t.powi(k));
                let want = ln_gamma(alpha + k as f64 + 1.0);
                assert!(((got.ln() - want) / want.abs().max(1.0)).abs() < 1e-12, "alpha={alpha} k={k}");
            }
        }
    }

    #[test]
    fn chi_square_rule_mean() {
        let r = ExpectationRule::chi_square(8.0, 30).unwrap();
        assert!((r.total_weight() - 1.0).abs() < 1e-13);
        assert!((r.expect(|v| v) - 8.0).abs() < 1e-11);
        assert!((r.expect(|v| v * v) - 80.0).abs() < 1e-9);
    }

    #[test]
    fn noncentral_rule_moments() {
        for &(dof, lambda) in &[(2u32, 0.0), (8, 0.0), (2, 3.0), (10, 40.0), (4, 400.0)] {
            let r = ExpectationRule::noncentral_chi_square(dof, lambda, 64).unwrap();
            let k = dof as f64;
            assert!((r.total_weight() - 1.0).abs() < 1e-10, "dof={dof} λ={lambda}");
            assert!((r.expect(|v| v) - (k + lambda)).abs() < 1e-8 * (k + lambda));
            let var = r.expect(|v| v * v) - (k + lambda).powi(2);
            assert!((var - 2.0 * (k + 2.0 * lambda)).abs() < 1e-6 * var);
        }
    }

    #[test]
    fn pdf_reduces_to_central() {
        for &x in &[0.1, 1.0, 5.0] {
            let c = ncx2_pdf(x, 6, 0.0);
            let nc = ncx2_pdf(x, 6, 1e-12);
            assert!((c - nc).abs() < 1e-9 * c);
        }
    }
}
