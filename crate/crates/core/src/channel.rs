//! System configuration, port-channel generation and per-port statistics.
//!
//! Port k of UE i sees BS antenna m through
//! g_k = √(1-μ²)(x_k + j y_k) + μ(x_0 + j y_0), with all components
//! standard normal. The Rician variant adds a constant LoS term shared by
//! every port.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{SeedKey, MAX_ANTENNAS, MAX_UES};
use crate::specfun::mu_from_w;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// N, BS antenna / UE pairs.
    pub n_users: usize,
    /// K, ports per fluid antenna.
    pub n_ports: usize,
    /// W, antenna size in wavelengths.
    pub fa_size: f64,
    /// Replaces μ(W) when set.
    pub mu_override: Option<f64>,
    /// ρ, fraction of received power routed to the decoder.
    pub ps_ratio: f64,
    /// P, watts.
    pub tx_power: f64,
    /// d, meters.
    pub distance: f64,
    /// β.
    pub pathloss_exp: f64,
    /// γ_th, linear.
    pub sinr_threshold: f64,
    /// Q_th, watts.
    pub ehp_threshold: f64,
    /// κ; zero means Rayleigh.
    pub rician_k: f64,
    /// B, hertz.
    pub bandwidth: f64,
    /// P_C, watts.
    pub fixed_power: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::baseline()
    }
}

impl SystemConfig {
    /// Baseline scenario: N=5, K=200, W=5, ρ=0.5, P=1 W, d=10 m, β=2,
    /// γ_th=3 dB, Q_th=10 mW, B=1 MHz, P_C=0.5 W.
    pub fn baseline() -> Self {
        Self {
            n_users: 5,
            n_ports: 200,
            fa_size: 5.0,
            mu_override: None,
            ps_ratio: 0.5,
            tx_power: 1.0,
            distance: 10.0,
            pathloss_exp: 2.0,
            sinr_threshold: db_to_linear(3.0),
            ehp_threshold: 0.01,
            rician_k: 0.0,
            bandwidth: 1e6,
            fixed_power: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_users < 2 {
            return bad(format!("n_users must be >= 2, got {}", self.n_users));
        }
        if self.n_users > MAX_ANTENNAS.min(MAX_UES) {
            return bad(format!("n_users above {} not supported", MAX_ANTENNAS.min(MAX_UES)));
        }
        if self.n_ports < 1 {
            return bad("n_ports must be >= 1".into());
        }
        let positive = [
            ("fa_size", self.fa_size),
            ("tx_power", self.tx_power),
            ("distance", self.distance),
            ("sinr_threshold", self.sinr_threshold),
            ("bandwidth", self.bandwidth),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        let nonneg = [
            ("pathloss_exp", self.pathloss_exp),
            ("ehp_threshold", self.ehp_threshold),
            ("rician_k", self.rician_k),
            ("fixed_power", self.fixed_power),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be >= 0 and finite, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.ps_ratio) {
            return bad(format!("ps_ratio must lie in [0, 1], got {}", self.ps_ratio));
        }
        if let Some(mu) = self.mu_override {
            if !(0.0..=1.0).contains(&mu) {
                return bad(format!("mu must lie in [0, 1], got {mu}"));
            }
        }
        Ok(())
    }

    /// Correlation parameter, derived from W unless overridden.
    pub fn mu(&self) -> Result<f64> {
        match self.mu_override {
            Some(mu) => Ok(mu),
            None => mu_from_w(self.fa_size),
        }
    }

    /// d^{-β}.
    pub fn path_gain(&self) -> f64 {
        self.distance.powf(-self.pathloss_exp)
    }

    /// Q̃_th = d^β Q_th / ((1-ρ) P), the EHP threshold on Σ_m |g|².
    pub fn q_tilde(&self) -> f64 {
        if self.ehp_threshold == 0.0 {
            return 0.0;
        }
        let denom = (1.0 - self.ps_ratio) * self.tx_power;
        if denom <= 0.0 {
            return f64::INFINITY;
        }
        self.ehp_threshold / (self.path_gain() * denom)
    }

    /// Threshold on Σ_m |entry|² of a realization from this config, i.e.
    /// Q_th / ((1-ρ) P · power gain).
    pub fn raw_energy_threshold(&self) -> f64 {
        if self.ehp_threshold == 0.0 {
            return 0.0;
        }
        let denom = (1.0 - self.ps_ratio) * self.tx_power;
        if denom <= 0.0 {
            return f64::INFINITY;
        }
        let gain = if self.is_rician() { 2.0 } else { self.path_gain() };
        self.ehp_threshold / (denom * gain)
    }

    /// Threshold on X_k + Y_k. For Rayleigh this is
    /// Q̂_th = Q̃_th / (1-μ²); under Rician fading the statistics are scaled by
    /// the diffuse power Ω/(2(κ+1)) and the threshold picks up (κ+1).
    pub fn statistic_threshold(&self) -> Result<f64> {
        let q = self.q_hat()?;
        Ok(if self.is_rician() { q * (self.rician_k + 1.0) } else { q })
    }

    /// Q̂_th = Q̃_th / (1-μ²), the threshold on X_k + Y_k.
    pub fn q_hat(&self) -> Result<f64> {
        let qt = self.q_tilde();
        if qt == 0.0 {
            return Ok(0.0);
        }
        let mu = self.mu()?;
        let s = 1.0 - mu * mu;
        if s <= 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(qt / s)
    }

    pub fn is_rician(&self) -> bool {
        self.rician_k > 0.0
    }
}

/// K×N gains seen by one UE in one coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub n_ports: usize,
    pub n_users: usize,
    pub ue_index: usize,
    /// Row-major, entry [k * n_users + m].
    pub gains: Vec<Complex64>,
    /// Multiplier taking Σ_m |g|² to received power per unit (1-ρ)P.
    pub power_gain: f64,
    /// Per-component variance of the diffuse part (1 for Rayleigh).
    pub fading_scale: f64,
}

impl ChannelRealization {
    pub fn zeros(n_ports: usize, n_users: usize, ue_index: usize) -> Self {
        Self {
            n_ports,
            n_users,
            ue_index,
            gains: vec![Complex64::new(0.0, 0.0); n_ports * n_users],
            power_gain: 1.0,
            fading_scale: 1.0,
        }
    }

    pub fn gain(&self, port: usize, antenna: usize) -> Complex64 {
        self.gains[port * self.n_users + antenna]
    }

    pub fn row(&self, port: usize) -> &[Complex64] {
        &self.gains[port * self.n_users..(port + 1) * self.n_users]
    }

    /// (desired, interference) powers at one port, in raw |g|² units.
    pub fn port_powers(&self, port: usize) -> (f64, f64) {
        let row = self.row(port);
        let mut desired = 0.0;
        let mut interference = 0.0;
        for (m, g) in row.iter().enumerate() {
            if m == self.ue_index {
                desired = g.norm_sqr();
            } else {
                interference += g.norm_sqr();
            }
        }
        (desired, interference)
    }
}

fn check_ue(cfg: &SystemConfig, ue: usize) -> Result<()> {
    if ue >= cfg.n_users {
        return Err(Error::InvalidConfig(format!("ue {ue} out of range for N={}", cfg.n_users)));
    }
    Ok(())
}

// Normals are drawn per antenna stream as x0, y0, then (x_k, y_k) for k in
// port order, so a larger K only appends draws and a larger N only adds
// streams.
fn fill_diffuse(real: &mut ChannelRealization, mu: f64, key: &SeedKey, trial: u64, scale: f64) {
    let n = real.n_users;
    let a = (1.0 - mu * mu).max(0.0).sqrt() * scale;
    let b = mu * scale;
    for m in 0..n {
        let mut rng = key.antenna(trial, real.ue_index, m);
        let x0: f64 = rng.sample(StandardNormal);
        let y0: f64 = rng.sample(StandardNormal);
        let common = Complex64::new(b * x0, b * y0);
        for k in 0..real.n_ports {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            real.gains[k * n + m] = Complex64::new(a * x, a * y) + common;
        }
    }
}

/// Correlated Rayleigh realization for UE `ue` in trial `trial`.
pub fn generate_rayleigh(cfg: &SystemConfig, ue: usize, key: &SeedKey, trial: u64) -> Result<ChannelRealization> {
    check_ue(cfg, ue)?;
    let mu = cfg.mu()?;
    let mut real = ChannelRealization::zeros(cfg.n_ports, cfg.n_users, ue);
    fill_rayleigh(&mut real, cfg, mu, key, trial);
    Ok(real)
}

pub(crate) fn fill_rayleigh(real: &mut ChannelRealization, cfg: &SystemConfig, mu: f64, key: &SeedKey, trial: u64) {
    fill_diffuse(real, mu, key, trial, 1.0);
    real.power_gain = cfg.path_gain();
    real.fading_scale = 1.0;
}

/// Per-scenario LoS phases ω^{(m,ue)} for m = 0..N, uniform on [0, 2π).
pub fn los_phases(cfg: &SystemConfig, key: &SeedKey, ue: usize) -> Vec<f64> {
    let mut rng = key.scenario();
    let mut all = Vec::with_capacity(cfg.n_users * (ue + 1));
    for _ in 0..cfg.n_users * (ue + 1) {
        all.push(rng.random::<f64>() * 2.0 * PI);
    }
    all.split_off(cfg.n_users * ue)
}

/// Rician realization h = √(κΩ/(κ+1)) e^{jω} + √(Ω/(2(κ+1))) g with
/// Ω = d^{-β}. Path loss is folded into the gains; see
/// [`ChannelRealization::power_gain`] for the harvested-power convention.
pub fn generate_rician(
    cfg: &SystemConfig,
    ue: usize,
    phases: &[f64],
    key: &SeedKey,
    trial: u64,
) -> Result<ChannelRealization> {
    check_ue(cfg, ue)?;
    if phases.len() != cfg.n_users {
        return Err(Error::InvalidConfig(format!(
            "expected {} LoS phases, got {}",
            cfg.n_users,
            phases.len()
        )));
    }
    let mu = cfg.mu()?;
    let mut real = ChannelRealization::zeros(cfg.n_ports, cfg.n_users, ue);
    let los = los_terms(cfg, phases);
    fill_rician(&mut real, cfg, mu, &los, key, trial);
    Ok(real)
}

pub(crate) fn los_terms(cfg: &SystemConfig, phases: &[f64]) -> Vec<Complex64> {
    let omega = cfg.path_gain();
    let k = cfg.rician_k;
    let amp = (k * omega / (k + 1.0)).sqrt();
    phases.iter().map(|&w| Complex64::from_polar(amp, w)).collect()
}

pub(crate) fn rician_fading_scale(cfg: &SystemConfig) -> f64 {
    cfg.path_gain() / (2.0 * (cfg.rician_k + 1.0))
}

pub(crate) fn fill_rician(
    real: &mut ChannelRealization,
    cfg: &SystemConfig,
    mu: f64,
    los: &[Complex64],
    key: &SeedKey,
    trial: u64,
) {
    let fs = rician_fading_scale(cfg);
    fill_diffuse(real, mu, key, trial, fs.sqrt());
    let n = real.n_users;
    for row in real.gains.chunks_mut(n) {
        for (g, l) in row.iter_mut().zip(los) {
            *g += l;
        }
    }
    // Ω is already in the gains. The factor 2 matches the Rayleigh model,
    // whose diffuse entries carry power 2 rather than 1, so that κ = 0
    // harvests exactly what the Rayleigh path does.
    real.power_gain = 2.0;
    real.fading_scale = fs;
}

/// X_k and Y_k per port, normalized so that conditionally on the common
/// components they are noncentral chi-square with 2 and 2(N-1) dof.
#[derive(Debug, Clone, PartialEq)]
pub struct PortStatistics {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// μ = 1: x and y are the raw powers, not normalized.
    pub degenerate: bool,
}

pub fn port_statistics(real: &ChannelRealization, cfg: &SystemConfig) -> Result<PortStatistics> {
    let mu = cfg.mu()?;
    let s = 1.0 - mu * mu;
    let degenerate = s <= 0.0;
    let norm = if degenerate { 1.0 } else { 1.0 / (s * real.fading_scale) };
    let mut x = Vec::with_capacity(real.n_ports);
    let mut y = Vec::with_capacity(real.n_ports);
    for k in 0..real.n_ports {
        let (d, i) = real.port_powers(k);
        x.push(d * norm);
        y.push(i * norm);
    }
    Ok(PortStatistics { x, y, degenerate })
}

/// Signal-to-interference ratio at a port; +∞ if no interference.
pub fn sinr_at_port(real: &ChannelRealization, port: usize) -> Result<f64> {
    if real.n_users < 2 {
        return Err(Error::InvalidConfig("SINR needs N >= 2".into()));
    }
    if port >= real.n_ports {
        return Err(Error::InvalidConfig(format!("port {port} out of range")));
    }
    let (d, i) = real.port_powers(port);
    Ok(ratio(d, i))
}

pub(crate) fn ratio(d: f64, i: f64) -> f64 {
    if i > 0.0 {
        d / i
    } else if d > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Harvested power at a port, watts.
pub fn ehp_at_port(real: &ChannelRealization, port: usize, cfg: &SystemConfig) -> f64 {
    let total: f64 = real.row(port).iter().map(|g| g.norm_sqr()).sum();
    (1.0 - cfg.ps_ratio) * cfg.tx_power * real.power_gain * total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, k: usize, mu: f64) -> SystemConfig {
        SystemConfig {
            n_users: n,
            n_ports: k,
            mu_override: Some(mu),
            ..SystemConfig::baseline()
        }
    }

    #[test]
    fn full_correlation_gives_identical_rows() {
        let c = cfg(3, 4, 1.0);
        let r = generate_rayleigh(&c, 0, &SeedKey::new(1), 0).unwrap();
        for k in 1..4 {
            assert_eq!(r.row(k), r.row(0));
        }
    }

    #[test]
    fn sinr_and_ehp_arithmetic() {
        let mut r = ChannelRealization::zeros(1, 3, 0);
        r.gains[0] = Complex64::new(2.0, 0.0);
        r.gains[1] = Complex64::new(1.0, 0.0);
        r.gains[2] = Complex64::new(0.0, 1.0);
        assert_eq!(sinr_at_port(&r, 0).unwrap(), 2.0);
        let c = SystemConfig { ps_ratio: 0.5, tx_power: 1.0, distance: 1.0, pathloss_exp: 2.0, ..SystemConfig::baseline() };
        r.power_gain = c.path_gain();
        // Σ|g|² = 6 here
        assert!((ehp_at_port(&r, 0, &c) - 3.0).abs() < 1e-15);
        let c1 = SystemConfig { ps_ratio: 1.0, ..c };
        assert_eq!(ehp_at_port(&r, 0, &c1), 0.0);
        r.gains[0] = Complex64::new(0.0, 0.0);
        assert_eq!(sinr_at_port(&r, 0).unwrap(), 0.0);
    }

    #[test]
    fn statistics_reproduce_sinr() {
        let c = cfg(4, 6, 0.6);
        let r = generate_rayleigh(&c, 2, &SeedKey::new(9), 5).unwrap();
        let s = port_statistics(&r, &c).unwrap();
        for k in 0..6 {
            let a = sinr_at_port(&r, k).unwrap();
            assert!((a - s.x[k] / s.y[k]).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn threshold_identity_is_pathwise() {
        let c = SystemConfig { n_ports: 5, fa_size: 1.0, ..SystemConfig::baseline() };
        let key = SeedKey::new(3);
        let qh = c.q_hat().unwrap();
        for t in 0..2000 {
            let r = generate_rayleigh(&c, 0, &key, t).unwrap();
            let s = port_statistics(&r, &c).unwrap();
            for k in 0..5 {
                let ehp = ehp_at_port(&r, k, &c);
                let sum = s.x[k] + s.y[k];
                if (sum - qh).abs() > 1e-9 * qh {
                    assert_eq!(ehp >= c.ehp_threshold, sum >= qh);
                }
            }
        }
    }

    #[test]
    fn rician_with_zero_k_is_scaled_rayleigh() {
        let c = cfg(3, 4, 0.4);
        let key = SeedKey::new(11);
        let ray = generate_rayleigh(&c, 1, &key, 2).unwrap();
        let phases = los_phases(&c, &key, 1);
        let ric = generate_rician(&c, 1, &phases, &key, 2).unwrap();
        let s = (c.path_gain() / 2.0).sqrt();
        for (a, b) in ray.gains.iter().zip(&ric.gains) {
            assert!((a * s - b).norm() < 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::baseline().validate().is_ok());
        let mut c = SystemConfig::baseline();
        c.n_users = 1;
        assert!(c.validate().is_err());
        let mut c = SystemConfig::baseline();
        c.ps_ratio = 1.5;
        assert!(c.validate().is_err());
        let mut c = SystemConfig::baseline();
        c.mu_override = Some(-0.1);
        assert!(c.validate().is_err());
    }

    #[test]
    fn q_hat_edge_cases() {
        let mut c = SystemConfig::baseline();
        c.ehp_threshold = 0.0;
        c.ps_ratio = 1.0;
        assert_eq!(c.q_hat().unwrap(), 0.0);
        c.ehp_threshold = 0.01;
        assert_eq!(c.q_hat().unwrap(), f64::INFINITY);
        let t = SystemConfig::baseline();
        // 100 * 0.01 / 0.5 = 2
        assert!((t.q_tilde() - 2.0).abs() < 1e-12);
    }
}
