//! Scenario files: flat `key = value` lines with unit suffixes.
//!
//! ```text
//! # baseline deployment, sweep over the number of users
//! N = 5
//! K = 200
//! W = 5
//! gamma_th = 3 dB
//! Q_th = 10 mW
//! sweep.axis = N
//! sweep.values = 2..8
//! sweep.metric = WDT_SINR: MC, EXACT
//! sweep.metric = WET_EHP: MC
//! ```
//!
//! Unknown keys, repeated scalar keys and out-of-range values are errors
//! reported with their line number.

use std::fmt;

use serde::Serialize;

use crate::analytic::QuadratureSpec;
use crate::channel::{db_to_linear, SystemConfig};
use crate::error::{Error, Result};
use crate::metric::{Method, Metric};
use crate::strategy::Strategy;

/// A quantity a sweep can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Quantity {
    Outage(Metric),
    /// N(1 - outage) for one of the outage metrics.
    Gain(Metric),
    EnergyEfficiency(Strategy),
}

impl Quantity {
    pub fn parse(s: &str) -> Option<Quantity> {
        let s = s.trim().to_ascii_uppercase();
        if let Some(m) = Metric::parse(&s) {
            return Some(Quantity::Outage(m));
        }
        match s.as_str() {
            "GAIN_WDT" => Some(Quantity::Gain(Metric::WdtSinr)),
            "GAIN_WET" => Some(Quantity::Gain(Metric::WetEhp)),
            "GAIN_IDET_SPECIAL" => Some(Quantity::Gain(Metric::IdetSpecial)),
            "GAIN_IDET_GENERAL" => Some(Quantity::Gain(Metric::IdetGeneral)),
            "EE_WDT" => Some(Quantity::EnergyEfficiency(Strategy::Wdt)),
            "EE_WET" => Some(Quantity::EnergyEfficiency(Strategy::Wet)),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Quantity::Outage(m) => m.name().to_string(),
            Quantity::Gain(Metric::WdtSinr) => "GAIN_WDT".into(),
            Quantity::Gain(Metric::WetEhp) => "GAIN_WET".into(),
            Quantity::Gain(m) => format!("GAIN_{}", m.name()),
            Quantity::EnergyEfficiency(Strategy::Wdt) => "EE_WDT".into(),
            Quantity::EnergyEfficiency(Strategy::Wet) => "EE_WET".into(),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Sweepable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    N,
    K,
    W,
    GammaTh,
    QTh,
    Kappa,
    Rho,
}

impl Axis {
    pub fn parse(s: &str) -> Option<Axis> {
        Some(match s.trim() {
            "N" | "n_users" => Axis::N,
            "K" | "n_ports" => Axis::K,
            "W" | "fa_size" => Axis::W,
            "gamma_th" | "sinr_threshold" => Axis::GammaTh,
            "Q_th" | "ehp_threshold" => Axis::QTh,
            "kappa" | "rician_k" => Axis::Kappa,
            "rho" | "ps_ratio" => Axis::Rho,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::N => "N",
            Axis::K => "K",
            Axis::W => "W",
            Axis::GammaTh => "gamma_th",
            Axis::QTh => "Q_th",
            Axis::Kappa => "kappa",
            Axis::Rho => "rho",
        }
    }

    fn unit(self) -> Unit {
        match self {
            Axis::N | Axis::K => Unit::Count,
            Axis::W => Unit::Wavelengths,
            Axis::GammaTh | Axis::Kappa => Unit::Ratio,
            Axis::QTh => Unit::Power,
            Axis::Rho => Unit::Plain,
        }
    }

    /// Sets this parameter of `cfg` to `value` (already in base units).
    pub fn apply(self, cfg: &mut SystemConfig, value: f64) {
        match self {
            Axis::N => cfg.n_users = value as usize,
            Axis::K => cfg.n_ports = value as usize,
            Axis::W => cfg.fa_size = value,
            Axis::GammaTh => cfg.sinr_threshold = value,
            Axis::QTh => cfg.ehp_threshold = value,
            Axis::Kappa => cfg.rician_k = value,
            Axis::Rho => cfg.ps_ratio = value,
        }
    }
}

/// One sweep point: the value in base units and the text it was written as.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisValue {
    pub value: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Request {
    pub quantity: Quantity,
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub base: SystemConfig,
    pub axis: Option<Axis>,
    pub values: Vec<AxisValue>,
    pub requests: Vec<Request>,
    pub trials: u64,
    pub seed: u64,
    pub quad: QuadratureSpec,
}

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Copy)]
enum Unit {
    Count,
    Plain,
    Ratio,
    Power,
    Wavelengths,
    Meters,
    Hertz,
}

fn parse_number(line: usize, field: &str, text: &str) -> Result<(f64, String)> {
    let t = text.trim();
    let split = t
        .char_indices()
        .find(|&(i, c)| !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+' || ((c == 'e' || c == 'E') && i > 0 && t[i + 1..].starts_with(|d: char| d.is_ascii_digit() || d == '-' || d == '+'))))
        .map(|(i, _)| i)
        .unwrap_or(t.len());
    let (num, suffix) = t.split_at(split);
    let v: f64 = num
        .parse()
        .map_err(|_| perr(line, field, format!("expected a number, got '{t}'")))?;
    if !v.is_finite() {
        return Err(perr(line, field, format!("value must be finite, got '{t}'")));
    }
    Ok((v, suffix.trim().to_string()))
}

fn perr(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Parse { line, field: field.to_string(), message: message.into() }
}

fn parse_with_unit(line: usize, field: &str, text: &str, unit: Unit) -> Result<f64> {
    let (v, suffix) = parse_number(line, field, text)?;
    let bad = || perr(line, field, format!("unit '{suffix}' not accepted here"));
    Ok(match unit {
        Unit::Count => {
            if !suffix.is_empty() || v.fract() != 0.0 || v < 0.0 {
                return Err(perr(line, field, format!("expected a non-negative integer, got '{}'", text.trim())));
            }
            v
        }
        Unit::Plain => match suffix.as_str() {
            "" => v,
            _ => return Err(bad()),
        },
        Unit::Ratio => match suffix.as_str() {
            "" => v,
            "dB" => db_to_linear(v),
            _ => return Err(bad()),
        },
        Unit::Power => match suffix.as_str() {
            "" | "W" => v,
            "mW" => v * 1e-3,
            "uW" => v * 1e-6,
            "dBm" => db_to_linear(v) * 1e-3,
            _ => return Err(bad()),
        },
        Unit::Wavelengths => match suffix.as_str() {
            "" | "wl" | "λ" | "lambda" => v,
            _ => return Err(bad()),
        },
        Unit::Meters => match suffix.as_str() {
            "" | "m" => v,
            _ => return Err(bad()),
        },
        Unit::Hertz => match suffix.as_str() {
            "" | "Hz" => v,
            "kHz" => v * 1e3,
            "MHz" => v * 1e6,
            _ => return Err(bad()),
        },
    })
}

fn parse_values(line: usize, text: &str, axis: Axis) -> Result<Vec<AxisValue>> {
    const FIELD: &str = "sweep.values";
    let t = text.trim();
    if let Some((a, b)) = t.split_once("..") {
        let lo = parse_with_unit(line, FIELD, a, Unit::Count)? as u64;
        let hi = parse_with_unit(line, FIELD, b, Unit::Count)? as u64;
        if hi < lo {
            return Err(perr(line, FIELD, format!("empty range {t}")));
        }
        return Ok((lo..=hi).map(|v| AxisValue { value: v as f64, label: v.to_string() }).collect());
    }
    t.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            Ok(AxisValue { value: parse_with_unit(line, FIELD, s, axis.unit())?, label: s.trim().to_string() })
        })
        .collect()
}

fn parse_request(line: usize, text: &str) -> Result<Request> {
    const FIELD: &str = "sweep.metric";
    let (q, methods) = text.split_once(':').unwrap_or((text, "MC"));
    let quantity = Quantity::parse(q).ok_or_else(|| perr(line, FIELD, format!("unknown metric '{}'", q.trim())))?;
    let mut ms = Vec::new();
    for m in methods.split(',').filter(|s| !s.trim().is_empty()) {
        let m = Method::parse(m).ok_or_else(|| perr(line, FIELD, format!("unknown method '{}'", m.trim())))?;
        if !ms.contains(&m) {
            ms.push(m);
        }
    }
    if ms.is_empty() {
        return Err(perr(line, FIELD, "no methods given"));
    }
    Ok(Request { quantity, methods: ms })
}

/// Parses a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut cfg = SystemConfig::baseline();
    let mut seen: Vec<&str> = Vec::new();
    let mut axis: Option<(usize, Axis)> = None;
    let mut values_text: Option<(usize, String)> = None;
    let mut requests = Vec::new();
    let mut trials = DEFAULT_TRIALS;
    let mut seed = DEFAULT_SEED;
    let mut quad = QuadratureSpec::default();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| perr(line, body, "expected 'key = value'"))?;
        let key = key.trim();
        let value = value.trim();
        if key != "sweep.metric" {
            if seen.contains(&key) {
                return Err(perr(line, key, "key given twice"));
            }
            seen.push(key);
        }
        let num = |unit| parse_with_unit(line, key, value, unit);
        match key {
            "N" | "n_users" => cfg.n_users = num(Unit::Count)? as usize,
            "K" | "n_ports" => cfg.n_ports = num(Unit::Count)? as usize,
            "W" | "fa_size" => cfg.fa_size = num(Unit::Wavelengths)?,
            "mu" => cfg.mu_override = Some(num(Unit::Plain)?),
            "rho" | "ps_ratio" => cfg.ps_ratio = num(Unit::Plain)?,
            "P" | "tx_power" => cfg.tx_power = num(Unit::Power)?,
            "d" | "distance" => cfg.distance = num(Unit::Meters)?,
            "beta" | "pathloss_exp" => cfg.pathloss_exp = num(Unit::Plain)?,
            "gamma_th" | "sinr_threshold" => cfg.sinr_threshold = num(Unit::Ratio)?,
            "Q_th" | "ehp_threshold" => cfg.ehp_threshold = num(Unit::Power)?,
            "kappa" | "rician_k" => cfg.rician_k = num(Unit::Ratio)?,
            "B" | "bandwidth" => cfg.bandwidth = num(Unit::Hertz)?,
            "P_C" | "fixed_power" => cfg.fixed_power = num(Unit::Power)?,
            "trials" => trials = num(Unit::Count)? as u64,
            "seed" => seed = num(Unit::Count)? as u64,
            "quad.nodes_semiinfinite" => quad.nodes_semiinfinite = num(Unit::Count)? as usize,
            "quad.nodes_finite" => quad.nodes_finite = num(Unit::Count)? as usize,
            "quad.rel_tol" => quad.rel_tol_target = num(Unit::Plain)?,
            "quad.richardson_check" => {
                quad.richardson_check = match value {
                    "true" | "yes" | "on" => true,
                    "false" | "no" | "off" => false,
                    _ => return Err(perr(line, key, format!("expected true or false, got '{value}'"))),
                }
            }
            "sweep.axis" => {
                let a = Axis::parse(value).ok_or_else(|| perr(line, key, format!("unknown axis '{value}'")))?;
                axis = Some((line, a));
            }
            "sweep.values" => values_text = Some((line, value.to_string())),
            "sweep.metric" => requests.push(parse_request(line, value)?),
            _ => return Err(perr(line, key, "unknown key")),
        }
    }

    let values = match (axis, values_text) {
        (Some((_, a)), Some((line, v))) => {
            let vals = parse_values(line, &v, a)?;
            if vals.is_empty() {
                return Err(perr(line, "sweep.values", "no values given"));
            }
            for v in &vals {
                let mut c = cfg.clone();
                a.apply(&mut c, v.value);
                c.validate().map_err(|e| perr(line, "sweep.values", format!("{}: {e}", v.label)))?;
            }
            vals
        }
        (Some((line, _)), None) => return Err(perr(line, "sweep.values", "sweep.axis needs sweep.values")),
        (None, Some((line, _))) => return Err(perr(line, "sweep.axis", "sweep.values needs sweep.axis")),
        (None, None) => Vec::new(),
    };
    cfg.validate()?;
    quad.validate()?;
    Ok(Scenario { base: cfg, axis: axis.map(|a| a.1), values, requests, trials, seed, quad })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_units() {
        let s = parse_scenario(
            "N = 4\nK=20\nW = 2.5 wl\ngamma_th = 3 dB # threshold\nQ_th = 14 mW\nP = 30 dBm\nB = 1 MHz\nkappa = 0\n",
        )
        .unwrap();
        assert_eq!(s.base.n_users, 4);
        assert_eq!(s.base.n_ports, 20);
        assert_eq!(s.base.fa_size, 2.5);
        assert_eq!(s.base.sinr_threshold, db_to_linear(3.0));
        assert!((s.base.ehp_threshold - 0.014).abs() < 1e-18);
        assert!((s.base.tx_power - 1.0).abs() < 1e-12);
        assert_eq!(s.base.bandwidth, 1e6);
        assert!(s.axis.is_none());
    }

    #[test]
    fn parses_sweeps() {
        let s = parse_scenario("sweep.axis = gamma_th\nsweep.values = 0 dB, 3 dB, 2.5\nsweep.metric = WDT_SINR: MC, EXACT\nsweep.metric = ee_wet\n").unwrap();
        assert_eq!(s.axis, Some(Axis::GammaTh));
        assert_eq!(s.values.len(), 3);
        assert_eq!(s.values[0].value, 1.0);
        assert_eq!(s.values[1].label, "3 dB");
        assert_eq!(s.values[2].value, 2.5);
        assert_eq!(s.requests[0].methods, vec![Method::Mc, Method::Exact]);
        assert_eq!(s.requests[1].quantity, Quantity::EnergyEfficiency(Strategy::Wet));
        let r = parse_scenario("sweep.axis = N\nsweep.values = 2..8\n").unwrap();
        assert_eq!(r.values.iter().map(|v| v.value).collect::<Vec<_>>(), vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
    }

    #[test]
    fn parse_numbers_with_exponents() {
        assert_eq!(parse_number(1, "x", "1e-3 W").unwrap(), (1e-3, "W".to_string()));
        assert_eq!(parse_number(1, "x", "2.5E2").unwrap(), (250.0, String::new()));
        assert_eq!(parse_number(1, "x", "-3dB").unwrap(), (-3.0, "dB".to_string()));
    }

    fn line_of(e: Error) -> (usize, String) {
        match e {
            Error::Parse { line, field, .. } => (line, field),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        assert_eq!(line_of(parse_scenario("N = 3\nfoo = 2\n").unwrap_err()), (2, "foo".into()));
        assert_eq!(line_of(parse_scenario("\n\nQ_th = 3 dB\n").unwrap_err()), (3, "Q_th".into()));
        assert_eq!(line_of(parse_scenario("K = 2.5\n").unwrap_err()), (1, "K".into()));
        assert_eq!(line_of(parse_scenario("N = 2\nN = 3\n").unwrap_err()), (2, "N".into()));
        assert_eq!(line_of(parse_scenario("sweep.axis = N\nsweep.values = ,\n").unwrap_err()).0, 2);
        assert_eq!(line_of(parse_scenario("sweep.axis = N\nsweep.values = 0, 2\n").unwrap_err()).1, "sweep.values");
        assert_eq!(line_of(parse_scenario("sweep.metric = WDT_SINR: FAST\n").unwrap_err()).0, 1);
        assert_eq!(line_of(parse_scenario("just text\n").unwrap_err()).0, 1);
    }

    #[test]
    fn quantity_names_round_trip() {
        for n in ["WDT_SINR", "IDET_GENERAL", "GAIN_WDT", "GAIN_WET", "GAIN_IDET_SPECIAL", "EE_WDT", "EE_WET"] {
            assert_eq!(Quantity::parse(n).unwrap().name(), n);
        }
    }
}
