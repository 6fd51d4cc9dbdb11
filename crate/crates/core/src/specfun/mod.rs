//! Special functions used by the channel model and the analytic kernels.
//!
//! Everything here is self-contained `f64` code. Series that suffer from
//! cancellation are summed in double-double arithmetic and report an error
//! when the achievable precision falls short of the requested tolerance.

mod bessel;
mod dd;
mod gamma;
mod hyper;
mod marcum;
mod mu;
mod sum;

pub use bessel::{bessel_i, bessel_i_ln, bessel_i_scaled, bessel_j0, bessel_j1};
pub use gamma::{
    gamma_lower_reg, gamma_lower_reg_with, gamma_reg_pair, gamma_upper_reg,
    gamma_upper_reg_with, ln_factorial, ln_gamma,
};
pub use hyper::{hyp1f1, hyp1f1_with, hyp1f2, hyp1f2_with};
pub use marcum::{marcum_p, marcum_p_with, marcum_q, marcum_q_with};
pub use mu::{mu_from_w, mu_from_w_bessel, mu_from_w_hypergeometric};
pub use sum::NeumaierSum;

use crate::error::{Error, Result};

/// Accuracy contract and work bound for series evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Tolerance {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
            return Err(Error::InvalidConfig(format!(
                "rel_tol must lie in (0, 1e-3], got {rel_tol}"
            )));
        }
        if max_terms < 16 {
            return Err(Error::InvalidConfig(format!(
                "max_terms must be at least 16, got {max_terms}"
            )));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_terms: 10_000,
        }
    }
}

/// Rising factorial (t)_k.
pub fn pochhammer(t: f64, k: u32) -> f64 {
    let mut p = 1.0;
    for i in 0..k {
        p *= t + i as f64;
    }
    p
}
