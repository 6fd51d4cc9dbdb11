#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

//! Performance analysis of fluid-antenna multiple access (FAMA) with
//! simultaneous wireless information and energy transfer.
//!
//! The crate is layered bottom-up:
//!
//! - [`specfun`]: incomplete gamma, Bessel, Marcum Q and hypergeometric
//!   functions, plus the port-correlation parameter μ(W).
//! - [`quadrature`]: Gauss rules and expectation rules over chi-square laws.
//! - [`channel`]: system configuration, correlated Rayleigh/Rician port gains
//!   and per-port statistics.
//! - [`strategy`]: the WDT / WET port-selection rules.
//! - [`montecarlo`]: seeded, worker-count independent outage and
//!   energy-efficiency estimation.
//! - [`analytic`]: exact integral forms and closed-form approximations.
//! - [`cli`]: configuration files, sweeps and result tables.

pub mod analytic;
pub mod channel;
pub mod cli;
pub mod error;
pub mod metric;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod specfun;
pub mod strategy;

pub use error::{Error, Result};
