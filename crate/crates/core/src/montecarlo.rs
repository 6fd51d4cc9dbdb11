//! Monte Carlo estimation of outage probabilities, multiplexing gains and
//! energy efficiency.
//!
//! Trials are processed in fixed-size blocks on the rayon pool. Each trial
//! draws from its own counter-derived streams and block results are merged
//! in block order, so estimates do not depend on the number of workers.
//!
//! Only UE 0 is simulated for outages (all UEs are statistically identical);
//! its desired BS antenna is antenna 0.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{fill_rayleigh, fill_rician, los_phases, los_terms, ratio, ChannelRealization, SystemConfig};
use crate::error::{Error, Result};
use crate::metric::{IdetKind, Method, Metric, OutageEstimate, OutageKind};
use crate::rng::SeedKey;
use crate::specfun::NeumaierSum;
use crate::strategy::{wdt_port, wet_port, Strategy};

const BLOCK: u64 = 512;
pub const MIN_TRIALS: u64 = 1000;

/// Thresholds in the units of a realization: linear SIR and Σ_m |entry|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub sinr: f64,
    pub energy: f64,
}

impl Thresholds {
    pub fn from_config(cfg: &SystemConfig) -> Self {
        Self { sinr: cfg.sinr_threshold, energy: cfg.raw_energy_threshold() }
    }
}

/// Indicator counts for all six outage events over the same trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OutageCounts {
    pub trials: u64,
    pub wdt_sinr: u64,
    pub wet_sinr: u64,
    pub wdt_ehp: u64,
    pub wet_ehp: u64,
    pub idet_special: u64,
    pub idet_general: u64,
}

impl OutageCounts {
    fn merge(&mut self, o: &OutageCounts) {
        self.trials += o.trials;
        self.wdt_sinr += o.wdt_sinr;
        self.wet_sinr += o.wet_sinr;
        self.wdt_ehp += o.wdt_ehp;
        self.wet_ehp += o.wet_ehp;
        self.idet_special += o.idet_special;
        self.idet_general += o.idet_general;
    }

    pub fn count(&self, metric: Metric) -> u64 {
        match metric {
            Metric::WdtSinr => self.wdt_sinr,
            Metric::WetSinr => self.wet_sinr,
            Metric::WdtEhp => self.wdt_ehp,
            Metric::WetEhp => self.wet_ehp,
            Metric::IdetSpecial => self.idet_special,
            Metric::IdetGeneral => self.idet_general,
        }
    }

    pub fn estimate(&self, metric: Metric) -> OutageEstimate {
        let n = self.trials.max(1) as f64;
        let p = self.count(metric) as f64 / n;
        OutageEstimate {
            value: p,
            ci_half_width: 1.96 * (p * (1.0 - p) / n).sqrt(),
            trials: self.trials,
            metric,
            method: Method::Mc,
        }
    }
}

struct Workspace {
    real: ChannelRealization,
    desired: Vec<f64>,
    interference: Vec<f64>,
}

struct Sampler<'a> {
    cfg: &'a SystemConfig,
    mu: f64,
    key: SeedKey,
    // per-UE LoS terms, only under Rician fading
    los: Vec<Vec<Complex64>>,
}

impl<'a> Sampler<'a> {
    fn new(cfg: &'a SystemConfig, seed: u64, ues: usize) -> Result<Self> {
        cfg.validate()?;
        let mu = cfg.mu()?;
        let key = SeedKey::new(seed);
        let los = if cfg.is_rician() {
            (0..ues).map(|ue| los_terms(cfg, &los_phases(cfg, &key, ue))).collect()
        } else {
            Vec::new()
        };
        Ok(Self { cfg, mu, key, los })
    }

    fn workspace(&self, ue: usize) -> Workspace {
        let k = self.cfg.n_ports;
        Workspace {
            real: ChannelRealization::zeros(k, self.cfg.n_users, ue),
            desired: vec![0.0; k],
            interference: vec![0.0; k],
        }
    }

    fn draw(&self, ws: &mut Workspace, trial: u64) {
        let ue = ws.real.ue_index;
        if self.cfg.is_rician() {
            fill_rician(&mut ws.real, self.cfg, self.mu, &self.los[ue], &self.key, trial);
        } else {
            fill_rayleigh(&mut ws.real, self.cfg, self.mu, &self.key, trial);
        }
        for k in 0..ws.real.n_ports {
            let (d, i) = ws.real.port_powers(k);
            ws.desired[k] = d;
            ws.interference[k] = i;
        }
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidConfig(format!("at least {MIN_TRIALS} trials required, got {trials}")));
    }
    Ok(())
}

fn blocks(trials: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let n = trials.div_ceil(BLOCK) as usize;
    (0..n).into_par_iter().map(move |b| {
        let b = b as u64;
        (b * BLOCK, ((b + 1) * BLOCK).min(trials))
    })
}

/// Counts for several threshold pairs from one set of channel draws.
pub fn simulate_counts(
    cfg: &SystemConfig,
    thresholds: &[Thresholds],
    trials: u64,
    seed: u64,
) -> Result<Vec<OutageCounts>> {
    check_trials(trials)?;
    let sampler = Sampler::new(cfg, seed, 1)?;
    let per_block: Vec<Vec<OutageCounts>> = blocks(trials)
        .map(|(start, end)| {
            let mut ws = sampler.workspace(0);
            let mut counts = vec![OutageCounts::default(); thresholds.len()];
            for t in start..end {
                sampler.draw(&mut ws, t);
                let d = &ws.desired;
                let i = &ws.interference;
                let kd = wdt_port(d, i);
                let ke = wet_port(d, i);
                let sinr_d = kd.criterion_value;
                let sinr_e = ratio(d[ke.port], i[ke.port]);
                let energy_d = d[kd.port] + i[kd.port];
                let energy_e = ke.criterion_value;
                for (c, th) in counts.iter_mut().zip(thresholds) {
                    let data_out = sinr_d < th.sinr;
                    let energy_out = energy_e < th.energy;
                    c.trials += 1;
                    c.wdt_sinr += data_out as u64;
                    c.wet_sinr += (energy_d < th.energy) as u64;
                    c.wdt_ehp += (sinr_e < th.sinr) as u64;
                    c.wet_ehp += energy_out as u64;
                    c.idet_special += (data_out && energy_out) as u64;
                    c.idet_general += (data_out || energy_out) as u64;
                }
            }
            counts
        })
        .collect();
    let mut total = vec![OutageCounts::default(); thresholds.len()];
    for block in &per_block {
        for (t, c) in total.iter_mut().zip(block) {
            t.merge(c);
        }
    }
    Ok(total)
}

/// All six outage counts at the thresholds of `cfg`.
pub fn estimate_all(cfg: &SystemConfig, trials: u64, seed: u64) -> Result<OutageCounts> {
    Ok(simulate_counts(cfg, &[Thresholds::from_config(cfg)], trials, seed)?[0])
}

/// Outage of service `kind` when ports are selected by `strategy`.
pub fn estimate_outage(
    cfg: &SystemConfig,
    strategy: Strategy,
    kind: OutageKind,
    trials: u64,
    seed: u64,
) -> Result<OutageEstimate> {
    Ok(estimate_all(cfg, trials, seed)?.estimate(Metric::from_parts(strategy, kind)))
}

pub fn estimate_idet(cfg: &SystemConfig, trials: u64, seed: u64, kind: IdetKind) -> Result<OutageEstimate> {
    Ok(estimate_all(cfg, trials, seed)?.estimate(Metric::idet(kind)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainReport {
    pub m_wdt: f64,
    pub m_wet: f64,
    pub m_idet_special: f64,
    pub m_idet_general: f64,
}

/// N(1-ε) for the WDT-SINR, WET-EHP and both IDET outages.
pub fn multiplexing_gains(outages: &[OutageEstimate], n_users: usize) -> Result<GainReport> {
    let find = |m: Metric| {
        outages
            .iter()
            .find(|o| o.metric == m)
            .map(|o| n_users as f64 * (1.0 - o.value))
            .ok_or_else(|| Error::InvalidConfig(format!("multiplexing gains need a {m} estimate")))
    };
    Ok(GainReport {
        m_wdt: find(Metric::WdtSinr)?,
        m_wet: find(Metric::WetEhp)?,
        m_idet_special: find(Metric::IdetSpecial)?,
        m_idet_general: find(Metric::IdetGeneral)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyEfficiencyReport {
    /// Mean sum rate over all N UEs, bit/s.
    pub sum_rate: f64,
    /// Mean total harvested power, watts.
    pub harvested: f64,
    /// N P + P_C - harvested, watts.
    pub total_power: f64,
    /// sum_rate / total_power (ratio of means), bit/J.
    pub ee: f64,
    /// Trial average of the per-trial ratio, bit/J.
    pub ee_mean_of_ratios: f64,
    pub strategy: Strategy,
    pub trials: u64,
    /// False when some trial or the average had a non-positive denominator.
    pub valid: bool,
}

#[derive(Default, Clone, Copy)]
struct EeSums {
    rate: NeumaierSum,
    harvested: NeumaierSum,
    ratio: NeumaierSum,
    bad: u64,
}

/// Energy efficiency with every UE choosing its port by `strategy`.
pub fn estimate_energy_efficiency(
    cfg: &SystemConfig,
    strategy: Strategy,
    trials: u64,
    seed: u64,
) -> Result<EnergyEfficiencyReport> {
    check_trials(trials)?;
    let n = cfg.n_users;
    let sampler = Sampler::new(cfg, seed, n)?;
    let fixed = n as f64 * cfg.tx_power + cfg.fixed_power;
    let harvest_scale = (1.0 - cfg.ps_ratio) * cfg.tx_power;
    let per_block: Vec<EeSums> = blocks(trials)
        .map(|(start, end)| {
            let mut ws: Vec<Workspace> = (0..n).map(|ue| sampler.workspace(ue)).collect();
            let mut s = EeSums::default();
            for t in start..end {
                let mut rate = 0.0;
                let mut q = 0.0;
                for w in ws.iter_mut() {
                    sampler.draw(w, t);
                    let d = &w.desired;
                    let i = &w.interference;
                    let k = match strategy {
                        Strategy::Wdt => wdt_port(d, i).port,
                        Strategy::Wet => wet_port(d, i).port,
                    };
                    let sinr = ratio(d[k], i[k]);
                    rate += cfg.bandwidth * (1.0 + sinr).log2();
                    q += harvest_scale * w.real.power_gain * (d[k] + i[k]);
                }
                let denom = fixed - q;
                s.rate.add(rate);
                s.harvested.add(q);
                if denom > 0.0 {
                    s.ratio.add(rate / denom);
                } else {
                    s.bad += 1;
                }
            }
            s
        })
        .collect();
    let mut rate = NeumaierSum::new();
    let mut harvested = NeumaierSum::new();
    let mut ratio_sum = NeumaierSum::new();
    let mut bad = 0;
    for b in &per_block {
        rate.add(b.rate.value());
        harvested.add(b.harvested.value());
        ratio_sum.add(b.ratio.value());
        bad += b.bad;
    }
    let nt = trials as f64;
    let sum_rate = rate.value() / nt;
    let harvested = harvested.value() / nt;
    let total_power = fixed - harvested;
    let valid = total_power > 0.0 && bad == 0;
    Ok(EnergyEfficiencyReport {
        sum_rate,
        harvested,
        total_power,
        ee: if total_power > 0.0 { sum_rate / total_power } else { f64::NAN },
        ee_mean_of_ratios: if bad == 0 { ratio_sum.value() / nt } else { f64::NAN },
        strategy,
        trials,
        valid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub rank_correlation: f64,
    /// 3/√trials.
    pub threshold: f64,
    pub independent: bool,
    pub trials: u64,
}

/// Rank correlation between X+Y and X/Y at the SINR-selected port.
///
/// With K = 1 this is the single-port marginal, where the two are
/// independent for any μ. With several ports the shared components induce
/// dependence unless μ = 0.
pub fn independence_diagnostic(cfg: &SystemConfig, trials: u64, seed: u64) -> Result<IndependenceReport> {
    check_trials(trials)?;
    let sampler = Sampler::new(cfg, seed, 1)?;
    let per_block: Vec<Vec<(f64, f64)>> = blocks(trials)
        .map(|(start, end)| {
            let mut ws = sampler.workspace(0);
            let mut out = Vec::with_capacity((end - start) as usize);
            for t in start..end {
                sampler.draw(&mut ws, t);
                let c = wdt_port(&ws.desired, &ws.interference);
                let k = c.port;
                out.push((ws.desired[k] + ws.interference[k], c.criterion_value));
            }
            out
        })
        .collect();
    let pairs: Vec<(f64, f64)> = per_block.into_iter().flatten().collect();
    let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let rho = spearman(&a, &b);
    let threshold = 3.0 / (trials as f64).sqrt();
    Ok(IndependenceReport { rank_correlation: rho, threshold, independent: rho.abs() < threshold, trials })
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Pearson correlation of the rank-transformed samples.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let ra = ranks(a);
    let rb = ranks(b);
    let n = ra.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SystemConfig {
        SystemConfig { n_users: 3, n_ports: 4, fa_size: 1.0, ..SystemConfig::baseline() }
    }

    #[test]
    fn count_identity_holds_exactly() {
        let c = estimate_all(&SystemConfig { n_ports: 20, ..SystemConfig::baseline() }, 4000, 5).unwrap();
        assert_eq!(c.idet_general + c.idet_special, c.wdt_sinr + c.wet_ehp);
    }

    #[test]
    fn extreme_thresholds() {
        let mut c = small();
        c.sinr_threshold = 1e12;
        let e = estimate_outage(&c, Strategy::Wdt, OutageKind::Wdt, 2000, 1).unwrap();
        assert_eq!(e.value, 1.0);
        c.ehp_threshold = 0.0;
        let all = estimate_all(&c, 2000, 1).unwrap();
        assert_eq!(all.wet_ehp, 0);
        assert_eq!(all.idet_special, 0);
        assert_eq!(all.idet_general, all.wdt_sinr);
    }

    #[test]
    fn strategy_dominance() {
        let c = estimate_all(&small(), 5000, 3).unwrap();
        assert!(c.wet_sinr >= c.wet_ehp);
        assert!(c.wdt_ehp >= c.wdt_sinr);
    }

    #[test]
    fn rejects_too_few_trials() {
        assert!(estimate_all(&small(), 10, 1).is_err());
    }

    #[test]
    fn gains_are_linear() {
        let mk = |m, v| OutageEstimate::deterministic(v, m, Method::Exact);
        let o = [
            mk(Metric::WdtSinr, 0.25),
            mk(Metric::WetEhp, 0.0),
            mk(Metric::IdetSpecial, 1.0),
            mk(Metric::IdetGeneral, 0.5),
        ];
        let g = multiplexing_gains(&o, 4).unwrap();
        assert_eq!((g.m_wdt, g.m_wet, g.m_idet_special, g.m_idet_general), (3.0, 4.0, 0.0, 2.0));
        assert!(multiplexing_gains(&o[..2], 4).is_err());
    }

    #[test]
    fn ee_without_harvesting() {
        let c = SystemConfig { ps_ratio: 1.0, bandwidth: 1.0, ..small() };
        let r = estimate_energy_efficiency(&c, Strategy::Wdt, 1000, 2).unwrap();
        assert_eq!(r.harvested, 0.0);
        assert_eq!(r.total_power, 3.0 * c.tx_power + c.fixed_power);
        assert!(r.valid);
        assert!((r.ee - r.sum_rate / r.total_power).abs() < 1e-12 * r.ee);
    }

    #[test]
    fn spearman_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&a, &[10.0, 20.0, 30.0, 40.0]) - 1.0).abs() < 1e-15);
        assert!((spearman(&a, &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
    }
}
