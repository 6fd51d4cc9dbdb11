//! Closed-form approximations and the IDET composition laws.

use serde::Serialize;

use super::KernelContext;
use crate::error::{Error, Result};
use crate::specfun::{gamma_lower_reg, gamma_upper_reg, hyp1f1, ln_factorial, pochhammer};

/// Slack allowed when checking special <= min(wdt, wet).
pub const CONSISTENCY_TOL: f64 = 1e-4;

fn plus(x: f64) -> f64 {
    x.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WdtSinrApprox {
    /// Large-threshold approximation with the full correction term.
    pub full: f64,
    /// Small-μ simplification of the correction term.
    pub small_mu: f64,
}

/// Closed-form approximations of the WDT outage under max-SINR selection.
pub fn wdt_sinr_approx(ctx: &KernelContext) -> WdtSinrApprox {
    let n = ctx.n_users as i32;
    let k = ctx.n_ports as f64;
    let g = ctx.gamma_th;
    let m2 = ctx.mu * ctx.mu;
    let lead = k * (m2 / (g + 1.0)).powi(n - 1);
    let ratio = (2.0 * g * (1.0 - m2) + 1.0) / (2.0 * g * g + (3.0 - m2) * g + 1.0);
    let mut s = 0.0;
    for kk in 0..(n - 1).max(0) {
        for j in 0..(n - kk - 1) {
            s += g.powi(j) * (g + 1.0).powi(kk + 1) * pochhammer((n - j - kk - 1) as f64, j as u32)
                / pochhammer(1.0, j as u32)
                * m2.powi(j + kk)
                / ((1.0 - m2) * g + 1.0).powi(j + kk + 1);
        }
    }
    let c_full = ratio.powi(n - 1) * (1.0 - m2) * s;
    let c_simple = ((1.0 - m2) / (g + 1.0)).powi(n - 1);
    WdtSinrApprox { full: plus(1.0 - lead - k * c_full), small_mu: plus(1.0 - lead - k * c_simple) }
}

/// Lower bound on the simplified WDT closed form, with the correction term
/// replaced by its small-μ upper bound ((1-μ²)/γ_th)^{N-1}.
pub fn wdt_sinr_lower_bound(ctx: &KernelContext) -> f64 {
    let n = ctx.n_users as i32;
    let k = ctx.n_ports as f64;
    let m2 = ctx.mu * ctx.mu;
    plus(1.0 - k * (m2 / (ctx.gamma_th + 1.0)).powi(n - 1) - k * ((1.0 - m2) / ctx.gamma_th).powi(n - 1))
}

/// Small-μ limit of the WET outage under max-SINR selection: P(N, Q̃/2).
pub fn wet_sinr_approx(ctx: &KernelContext) -> Result<f64> {
    let qt = ctx.q_tilde();
    if qt.is_infinite() {
        return Ok(1.0);
    }
    gamma_lower_reg(ctx.n_users as f64, 0.5 * qt)
}

/// Closed-form approximation of the WET outage under max-EHP selection,
/// accurate when the threshold is high.
pub fn wet_ehp_approx(ctx: &KernelContext) -> Result<f64> {
    let q = ctx.q_hat;
    if q.is_infinite() {
        return Ok(1.0);
    }
    if q == 0.0 {
        return Ok(plus(1.0 - ctx.n_ports as f64));
    }
    let n = ctx.n_users;
    let k = ctx.n_ports as f64;
    let m2 = ctx.mu * ctx.mu;
    let upper = gamma_upper_reg(n as f64, 0.5 * q)?;
    let mut third = 0.0;
    if m2 > 0.0 {
        let mut s = 0.0;
        for l in 0..n {
            s += (1.0 - m2).powi(l as i32) * hyp1f1(l as f64 + 1.0, n as f64 + 1.0, 0.5 * m2 * q)?;
        }
        let ln = m2.ln() + n as f64 * (0.5 * q).ln() - 0.5 * q - ln_factorial(n as u64) + s.ln();
        third = ln.exp();
    }
    Ok(plus(1.0 - k * upper - k * third))
}

/// Large-W limit of the WDT outage under max-EHP selection.
pub fn wdt_ehp_approx(ctx: &KernelContext) -> f64 {
    1.0 - (ctx.gamma_th + 1.0).powi(-(ctx.n_users as i32 - 1))
}

/// Which service drives the special IDET outage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IdetRegime {
    /// Energy almost always fails (typical for small N), so the special
    /// outage tracks the data outage.
    DataLimited,
    /// Data almost always fails (typical for large N), so the special
    /// outage tracks the energy outage.
    EnergyLimited,
    Mixed,
}

/// Level above which an outage counts as near-certain for regime labels.
pub const REGIME_LEVEL: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdetApprox {
    pub value: f64,
    pub regime: IdetRegime,
}

/// Product approximation of the special IDET outage, treating the data and
/// energy events as independent.
pub fn idet_special_approx(wdt: f64, wet: f64) -> Result<IdetApprox> {
    check_prob(wdt, "wdt")?;
    check_prob(wet, "wet")?;
    let regime = if wet >= REGIME_LEVEL && wet >= wdt {
        IdetRegime::DataLimited
    } else if wdt >= REGIME_LEVEL {
        IdetRegime::EnergyLimited
    } else {
        IdetRegime::Mixed
    };
    Ok(IdetApprox { value: wdt * wet, regime })
}

/// General IDET outage by the addition law.
pub fn idet_general(wdt: f64, wet: f64, special: f64) -> Result<f64> {
    check_prob(wdt, "wdt")?;
    check_prob(wet, "wet")?;
    check_prob(special, "special")?;
    if special > wdt.min(wet) + CONSISTENCY_TOL {
        return Err(Error::Inconsistent(format!(
            "special outage {special} exceeds min(wdt={wdt}, wet={wet})"
        )));
    }
    Ok((wdt + wet - special).clamp(0.0, 1.0))
}

fn check_prob(p: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("{name} must be a probability, got {p}")));
    }
    Ok(())
}
