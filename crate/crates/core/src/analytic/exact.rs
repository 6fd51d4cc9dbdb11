//! Exact outage probabilities as expectations over the common components.

use rayon::prelude::*;

use super::kernel::{interval_mass, ratio_cdf, ratio_density_truncated};
use super::{evaluate, Evaluation, KernelContext, QuadratureSpec};
use crate::error::{Error, Result};
use crate::quadrature::{ncx2_pdf, ExpectationRule, GaussRule};
use crate::specfun::{marcum_p, marcum_q, NeumaierSum};

/// p^k in log space; zero for p <= 0.
fn kth_power(p: f64, k: usize) -> f64 {
    if k == 0 {
        1.0
    } else if p <= 0.0 {
        0.0
    } else {
        (k as f64 * p.min(1.0).ln()).exp()
    }
}

fn require_rayleigh(ctx: &KernelContext, what: &str) -> Result<()> {
    ctx.validate()?;
    if ctx.rician_k > 0.0 {
        return Err(Error::Unsupported(format!("{what} is only available for Rayleigh fading")));
    }
    if ctx.mu >= 1.0 {
        return Err(Error::Domain(format!("{what} needs mu < 1, got {}", ctx.mu)));
    }
    Ok(())
}

fn require_users(ctx: &KernelContext, what: &str) -> Result<()> {
    if ctx.n_users < 2 {
        return Err(Error::Domain(format!("{what} needs at least two users, got {}", ctx.n_users)));
    }
    Ok(())
}

fn require_rician(ctx: &KernelContext, what: &str) -> Result<()> {
    ctx.validate()?;
    if !(ctx.mu > 0.0 && ctx.mu < 1.0) {
        return Err(Error::Domain(format!("{what} needs mu in (0, 1), got {}", ctx.mu)));
    }
    Ok(())
}

/// Σ_i Σ_j w1_i w2_j f(i, j), parallel over i with the partial sums added in
/// index order.
fn expect_pair<F>(w1: &[f64], w2: &[f64], f: F) -> Result<f64>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let rows: Vec<Result<f64>> = (0..w1.len())
        .into_par_iter()
        .map(|i| {
            let mut s = NeumaierSum::new();
            for (j, w) in w2.iter().enumerate() {
                s.add(w * f(i, j)?);
            }
            Ok(s.value())
        })
        .collect();
    let mut total = NeumaierSum::new();
    for (w, row) in w1.iter().zip(rows) {
        total.add(w * row?);
    }
    Ok(total.value())
}

fn expect_single<F>(rule: &ExpectationRule, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let vals: Vec<Result<f64>> = rule.nodes.par_iter().map(|&r| f(r)).collect();
    let mut total = NeumaierSum::new();
    for (w, v) in rule.weights.iter().zip(vals) {
        total.add(w * v?);
    }
    Ok(total.value())
}

fn central_rules(ctx: &KernelContext, n: usize) -> Result<(ExpectationRule, ExpectationRule)> {
    Ok((
        ExpectationRule::chi_square(2.0, n)?,
        ExpectationRule::chi_square(2.0 * (ctx.n_users as f64 - 1.0), n)?,
    ))
}

/// Point beyond which ncχ²(dof, λ) carries no mass in double precision.
fn tail_point(dof: u32, lambda: f64) -> f64 {
    (lambda.sqrt() + (dof as f64).sqrt() + 9.0).powi(2)
}

/// WDT outage under max-SINR selection:
/// E[P(X < γ_th Y | r₁, r₂)^K].
pub fn wdt_sinr_exact(ctx: &KernelContext, quad: &QuadratureSpec) -> Result<Evaluation> {
    const WHAT: &str = "wdt_sinr_exact";
    require_rayleigh(ctx, WHAT)?;
    require_users(ctx, WHAT)?;
    let c = ctx.c();
    evaluate(WHAT, quad, |q| q.nodes_semiinfinite.pow(2), |q| {
        let (r1, r2) = central_rules(ctx, q.nodes_semiinfinite)?;
        expect_pair(&r1.weights, &r2.weights, |i, j| {
            let p = ratio_cdf(ctx.n_users, ctx.gamma_th, c * r1.nodes[i], c * r2.nodes[j])?;
            Ok(kth_power(p, ctx.n_ports))
        })
    })
}

/// WET outage under max-SINR selection.
///
/// Given (r₁, r₂), with G the conditional CDF of Z = X/Y,
/// P(T_{k*} < Q̂) = K ∫ G(z)^{K-1} ∫₀^{Q̂/(1+z)} y f_X(zy) f_Y(y) dy dz.
/// The z-axis is mapped to [0, 1) by z = z₀ s/(1-s) with z₀ the ratio of
/// the conditional means.
pub fn wet_sinr_exact(ctx: &KernelContext, quad: &QuadratureSpec) -> Result<Evaluation> {
    const WHAT: &str = "wet_sinr_exact";
    require_rayleigh(ctx, WHAT)?;
    require_users(ctx, WHAT)?;
    if ctx.q_hat == 0.0 {
        return Ok(Evaluation::exact(0.0));
    }
    if ctx.q_hat.is_infinite() {
        return Ok(Evaluation::exact(1.0));
    }
    let c = ctx.c();
    let n = ctx.n_users;
    let k = ctx.n_ports;
    let q_hat = ctx.q_hat;
    let grid = |q: &QuadratureSpec| q.nodes_semiinfinite.pow(2) * q.nodes_finite.pow(2);
    evaluate(WHAT, quad, grid, |q| {
        let (r1, r2) = central_rules(ctx, q.nodes_semiinfinite)?;
        let fin = GaussRule::legendre(q.nodes_finite)?;
        expect_pair(&r1.weights, &r2.weights, |i, j| {
            let l1 = c * r1.nodes[i];
            let l2 = c * r2.nodes[j];
            if k == 1 {
                return marcum_p(n as u32, (l1 + l2).sqrt(), q_hat.sqrt());
            }
            let z0 = (2.0 + l1) / (2.0 * (n as f64 - 1.0) + l2);
            let mut s = NeumaierSum::new();
            for (u, w) in fin.mapped(0.0, 1.0) {
                let z = z0 * u / (1.0 - u);
                let jac = z0 / ((1.0 - u) * (1.0 - u));
                let g = ratio_cdf(n, z, l1, l2)?;
                let gk = kth_power(g, k - 1);
                if gk == 0.0 {
                    continue;
                }
                let y_max = (q_hat / (1.0 + z)).min(tail_point(2 * (n as u32 - 1), l2));
                let h = ratio_density_truncated(n, z, l1, l2, y_max, &fin);
                s.add(w * jac * gk * h);
            }
            Ok(k as f64 * s.value())
        })
    })
}

/// WET outage under max-EHP selection:
/// E_{r ~ χ²_{2N}}[(1 - Q_N(√(c r), √Q̂))^K].
pub fn wet_ehp_exact(ctx: &KernelContext, quad: &QuadratureSpec) -> Result<Evaluation> {
    const WHAT: &str = "wet_ehp_exact";
    require_rayleigh(ctx, WHAT)?;
    sum_energy_outage(WHAT, ctx, quad, ctx.q_hat, |n| ExpectationRule::chi_square(2.0 * ctx.n_users as f64, n))
}

fn sum_energy_outage(
    what: &'static str,
    ctx: &KernelContext,
    quad: &QuadratureSpec,
    threshold: f64,
    rule: impl Fn(usize) -> Result<ExpectationRule>,
) -> Result<Evaluation> {
    if threshold == 0.0 {
        return Ok(Evaluation::exact(0.0));
    }
    if threshold.is_infinite() {
        return Ok(Evaluation::exact(1.0));
    }
    let c = ctx.c();
    let b = threshold.sqrt();
    evaluate(what, quad, |q| q.nodes_semiinfinite, |q| {
        let r = rule(q.nodes_semiinfinite)?;
        expect_single(&r, |v| Ok(kth_power(marcum_p(ctx.n_users as u32, (c * v).sqrt(), b)?, ctx.n_ports)))
    })
}

/// WDT outage under max-EHP selection.
///
/// Given (r₁, r₂), with T = X + Y ~ ncχ²_{2N}(λ₁+λ₂) and F_T its CDF,
/// P = K ∫ F_T(t)^{K-1} ∫₀^{γ_th t/(1+γ_th)} f_X(x) f_Y(t-x) dx dt.
/// The t-axis is restricted to the window holding the maximum of K draws of
/// T and integrated in √t.
pub fn wdt_ehp_exact(ctx: &KernelContext, quad: &QuadratureSpec) -> Result<Evaluation> {
    const WHAT: &str = "wdt_ehp_exact";
    require_rayleigh(ctx, WHAT)?;
    require_users(ctx, WHAT)?;
    let c = ctx.c();
    let n = ctx.n_users as u32;
    let k = ctx.n_ports;
    let frac = ctx.gamma_th / (1.0 + ctx.gamma_th);
    let grid = |q: &QuadratureSpec| q.nodes_semiinfinite.pow(3) * q.nodes_finite;
    evaluate(WHAT, quad, grid, |q| {
        let (r1, r2) = central_rules(ctx, q.nodes_semiinfinite)?;
        let fin = GaussRule::legendre(q.nodes_finite)?;
        let outer = GaussRule::legendre(q.nodes_semiinfinite)?;
        expect_pair(&r1.weights, &r2.weights, |i, j| {
            let l1 = c * r1.nodes[i];
            let l2 = c * r2.nodes[j];
            let a = (l1 + l2).sqrt();
            let (lo, hi) = max_window(n, a, k)?;
            let mut s = NeumaierSum::new();
            for (w, ww) in outer.mapped(lo, hi) {
                let t = w * w;
                let mut joint = NeumaierSum::new();
                for (x, wx) in fin.mapped(0.0, frac * t) {
                    joint.add(wx * ncx2_pdf(x, 2, l1) * ncx2_pdf(t - x, 2 * (n - 1), l2));
                }
                let fk = if k == 1 { 1.0 } else { kth_power(marcum_p(n, a, w)?, k - 1) };
                s.add(ww * 2.0 * w * fk * joint.value());
            }
            Ok(k as f64 * s.value())
        })
    })
}

/// Window [lo, hi] in √t outside which the density of the largest of K
/// draws of T ~ ncχ²_{2N}(a²) is negligible.
fn max_window(n: u32, a: f64, k: usize) -> Result<(f64, f64)> {
    const NEGLIGIBLE: f64 = 1e-18;
    const STEPS: usize = 24;
    let top = a + (2.0 * n as f64).sqrt() + 15.0;
    // 1 - F_T(hi²) <= NEGLIGIBLE / K
    let (mut x0, mut x1) = (0.0, top);
    for _ in 0..STEPS {
        let m = 0.5 * (x0 + x1);
        if marcum_q(n, a, m)? * (k as f64) > NEGLIGIBLE {
            x0 = m;
        } else {
            x1 = m;
        }
    }
    let hi = x1;
    if k == 1 {
        return Ok((0.0, hi));
    }
    // F_T(lo²)^{K-1} <= NEGLIGIBLE
    let target = NEGLIGIBLE.ln() / (k - 1) as f64;
    let (mut y0, mut y1) = (0.0, hi);
    for _ in 0..STEPS {
        let m = 0.5 * (y0 + y1);
        let p = marcum_p(n, a, m)?;
        if p > 0.0 && p.ln() > target {
            y1 = m;
        } else {
            y0 = m;
        }
    }
    Ok((y0, hi))
}

/// Special IDET outage (both services fail at every port):
/// E[P(X < γ_th Y, X + Y < Q̂ | r₁, r₂)^K].
pub fn idet_special_exact(ctx: &KernelContext, quad: &QuadratureSpec) -> Result<Evaluation> {
    const WHAT: &str = "idet_special_exact";
    require_rayleigh(ctx, WHAT)?;
    require_users(ctx, WHAT)?;
    if ctx.q_hat == 0.0 {
        return Ok(Evaluation::exact(0.0));
    }
    if ctx.q_hat.is_infinite() {
        return wdt_sinr_exact(ctx, quad);
    }
    let c = ctx.c();
    let n = ctx.n_users;
    let gamma = ctx.gamma_th;
    let q_hat = ctx.q_hat;
    let x_max = q_hat * gamma / (1.0 + gamma);
    let grid = |q: &QuadratureSpec| q.nodes_semiinfinite.pow(2) * q.nodes_finite;
    evaluate(WHAT, quad, grid, |q| {
        let (r1, r2) = central_rules(ctx, q.nodes_semiinfinite)?;
        let fin = GaussRule::legendre(q.nodes_finite)?;
        expect_pair(&r1.weights, &r2.weights, |i, j| {
            let l1 = c * r1.nodes[i];
            let l2 = c * r2.nodes[j];
            let mut inner = NeumaierSum::new();
            // in √x, where the density of X is a bump of unit width
            for (v, w) in fin.mapped(0.0, x_max.min(tail_point(2, l1)).sqrt()) {
                let x = v * v;
                inner.add(w * 2.0 * v * ncx2_pdf(x, 2, l1) * interval_mass(n, l2, x / gamma, q_hat - x)?);
            }
            Ok(kth_power(inner.value(), ctx.n_ports))
        })
    })
}

/// WDT outage under max-SINR selection with Rician fading. The common
/// components are noncentral: r₁ ~ ncχ²₂(2κ/μ²), r₂ ~ ncχ²_{2(N-1)}(2(N-1)κ/μ²).
pub fn rician_wdt_sinr_exact(ctx: &KernelContext, quad: &QuadratureSpec) -> Result<Evaluation> {
    const WHAT: &str = "rician_wdt_sinr_exact";
    require_rician(ctx, WHAT)?;
    require_users(ctx, WHAT)?;
    let c = ctx.c();
    let nc = 2.0 * ctx.rician_k / (ctx.mu * ctx.mu);
    let m = ctx.n_users as u32 - 1;
    evaluate(WHAT, quad, |q| q.nodes_semiinfinite.pow(2), |q| {
        let r1 = ExpectationRule::noncentral_chi_square(2, nc, q.nodes_semiinfinite)?;
        let r2 = ExpectationRule::noncentral_chi_square(2 * m, m as f64 * nc, q.nodes_semiinfinite)?;
        expect_pair(&r1.weights, &r2.weights, |i, j| {
            let p = ratio_cdf(ctx.n_users, ctx.gamma_th, c * r1.nodes[i], c * r2.nodes[j])?;
            Ok(kth_power(p, ctx.n_ports))
        })
    })
}

/// WET outage under max-EHP selection with Rician fading. The statistic is
/// normalized by the diffuse power, so the threshold becomes (κ+1) Q̂.
pub fn rician_wet_ehp_exact(ctx: &KernelContext, quad: &QuadratureSpec) -> Result<Evaluation> {
    const WHAT: &str = "rician_wet_ehp_exact";
    require_rician(ctx, WHAT)?;
    let n = ctx.n_users as u32;
    let nc = 2.0 * n as f64 * ctx.rician_k / (ctx.mu * ctx.mu);
    sum_energy_outage(WHAT, ctx, quad, (ctx.rician_k + 1.0) * ctx.q_hat, |nodes| {
        ExpectationRule::noncentral_chi_square(2 * n, nc, nodes)
    })
}
