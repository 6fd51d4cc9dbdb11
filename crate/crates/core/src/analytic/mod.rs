//! Deterministic evaluation of the outage probabilities: exact integral
//! forms by Gauss quadrature, closed-form approximations, and the IDET
//! composition laws.
//!
//! Conditionally on the common components r₁ ~ χ²₂ and r₂ ~ χ²_{2(N-1)} of
//! the desired and interfering channels, the per-port statistics are
//! independent across ports with X_k ~ ncχ²₂(c r₁) and
//! Y_k ~ ncχ²_{2(N-1)}(c r₂), c = μ²/(1-μ²). Every exact form is an
//! expectation over (r₁, r₂) of a per-port probability raised to the K-th
//! power or integrated against an order-statistic density.

mod closed;
mod exact;
mod kernel;

pub use closed::{
    idet_general, idet_special_approx, wdt_ehp_approx, wdt_sinr_approx, wdt_sinr_lower_bound,
    wet_ehp_approx, wet_sinr_approx, IdetApprox, IdetRegime, WdtSinrApprox,
};
pub use exact::{
    idet_special_exact, rician_wdt_sinr_exact, rician_wet_ehp_exact, wdt_ehp_exact,
    wdt_sinr_exact, wet_ehp_exact, wet_sinr_exact,
};
pub use kernel::{interval_mass, ratio_cdf, ratio_density_truncated};

use serde::Serialize;

use crate::channel::SystemConfig;
use crate::error::{Error, Result};

/// Node counts and accuracy target for the exact evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    /// Nodes per semi-infinite axis.
    pub nodes_semiinfinite: usize,
    /// Nodes per finite axis.
    pub nodes_finite: usize,
    pub rel_tol_target: f64,
    /// Re-evaluate at 1.5x nodes and fail if the two disagree.
    pub richardson_check: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { nodes_semiinfinite: 48, nodes_finite: 64, rel_tol_target: 1e-6, richardson_check: true }
    }
}

/// Largest base grid any evaluator may use: two semi-infinite and two
/// finite axes at the default counts.
pub const MAX_GRID_POINTS: usize = 48 * 48 * 64 * 64;

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_semiinfinite < 8 || self.nodes_finite < 8 {
            return Err(Error::InvalidConfig(format!(
                "quadrature needs at least 8 nodes per axis, got {} and {}",
                self.nodes_semiinfinite, self.nodes_finite
            )));
        }
        if !(self.rel_tol_target > 0.0 && self.rel_tol_target < 1.0) {
            return Err(Error::InvalidConfig(format!("rel_tol_target must lie in (0, 1), got {}", self.rel_tol_target)));
        }
        Ok(())
    }

    fn refined(&self) -> Self {
        Self {
            nodes_semiinfinite: self.nodes_semiinfinite * 3 / 2,
            nodes_finite: self.nodes_finite * 3 / 2,
            ..*self
        }
    }

    // Allowed gap between the base and refined values.
    fn allowed_deviation(&self, value: f64) -> f64 {
        10.0 * self.rel_tol_target * value.abs().max(1e-3)
    }
}

/// Model parameters seen by the analytic kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelContext {
    pub mu: f64,
    /// Linear SIR threshold.
    pub gamma_th: f64,
    /// Q̂_th, the WET threshold on X_k + Y_k under Rayleigh fading.
    pub q_hat: f64,
    pub n_users: usize,
    pub n_ports: usize,
    pub rician_k: f64,
}

impl KernelContext {
    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let ctx = Self {
            mu: cfg.mu()?,
            gamma_th: cfg.sinr_threshold,
            q_hat: cfg.q_hat()?,
            n_users: cfg.n_users,
            n_ports: cfg.n_ports,
            rician_k: cfg.rician_k,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q_hat >= 0.0) {
            return Err(Error::InvalidConfig(format!("q_hat must be >= 0, got {}", self.q_hat)));
        }
        if !(self.gamma_th > 0.0) {
            return Err(Error::InvalidConfig(format!("gamma_th must be > 0, got {}", self.gamma_th)));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::InvalidConfig(format!("mu must lie in [0, 1], got {}", self.mu)));
        }
        if self.n_users == 0 || self.n_ports == 0 {
            return Err(Error::InvalidConfig("n_users and n_ports must be positive".into()));
        }
        if !(self.rician_k >= 0.0) || !self.rician_k.is_finite() {
            return Err(Error::InvalidConfig(format!("rician_k must be finite and >= 0, got {}", self.rician_k)));
        }
        Ok(())
    }

    /// μ²/(1-μ²).
    pub fn c(&self) -> f64 {
        let m2 = self.mu * self.mu;
        m2 / (1.0 - m2)
    }

    /// Q̃_th = (1-μ²) Q̂_th, the threshold on Σ_m |g_m|².
    pub fn q_tilde(&self) -> f64 {
        if self.q_hat.is_infinite() {
            return f64::INFINITY;
        }
        self.q_hat * (1.0 - self.mu * self.mu)
    }
}

/// An exact evaluation and its Richardson deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    /// Probability at the refined node count (base count when the check is
    /// off), clamped to [0, 1].
    pub value: f64,
    /// |refined - base| before clamping, when the check ran.
    pub deviation: Option<f64>,
    /// Points in the base grid.
    pub grid_points: usize,
}

impl Evaluation {
    fn exact(value: f64) -> Self {
        Self { value, deviation: None, grid_points: 0 }
    }
}

/// Runs `eval` at the base (and refined) node counts, enforcing the cost
/// guard, the Richardson check and the range check.
fn evaluate<F>(what: &'static str, quad: &QuadratureSpec, grid: impl Fn(&QuadratureSpec) -> usize, eval: F) -> Result<Evaluation>
where
    F: Fn(&QuadratureSpec) -> Result<f64>,
{
    quad.validate()?;
    let points = grid(quad);
    if points > MAX_GRID_POINTS {
        return Err(Error::CostGuard(format!(
            "{what}: {points} grid points exceeds the cap of {MAX_GRID_POINTS}"
        )));
    }
    let base = eval(quad)?;
    let (value, deviation) = if quad.richardson_check {
        let fine = eval(&quad.refined())?;
        let dev = (fine - base).abs();
        if dev > quad.allowed_deviation(fine) {
            return Err(Error::Quadrature { what, deviation: dev });
        }
        (fine, Some(dev))
    } else {
        (base, None)
    };
    let slack = 10.0 * quad.rel_tol_target;
    if !(value >= -slack && value <= 1.0 + slack) {
        return Err(Error::Quadrature { what, deviation: if value < 0.0 { -value } else { value - 1.0 } });
    }
    Ok(Evaluation { value: value.clamp(0.0, 1.0), deviation, grid_points: points })
}
