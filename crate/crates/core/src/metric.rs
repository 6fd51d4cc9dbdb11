//! Names for the outage metrics and the ways of computing them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::strategy::Strategy;

/// Which service fails: data (SINR below γ_th) or energy (EHP below Q_th).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutageKind {
    Wdt,
    Wet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdetKind {
    /// Both services fail at every port.
    Special,
    /// At least one service fails at its own preferred port.
    General,
}

/// Outage metric, named <service>-<selection rule>: `WetSinr` is the energy
/// outage when the port is chosen for the best SINR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Metric {
    WdtSinr,
    WetSinr,
    WdtEhp,
    WetEhp,
    IdetSpecial,
    IdetGeneral,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::WdtSinr,
        Metric::WetSinr,
        Metric::WdtEhp,
        Metric::WetEhp,
        Metric::IdetSpecial,
        Metric::IdetGeneral,
    ];

    pub fn from_parts(strategy: Strategy, kind: OutageKind) -> Metric {
        match (kind, strategy) {
            (OutageKind::Wdt, Strategy::Wdt) => Metric::WdtSinr,
            (OutageKind::Wet, Strategy::Wdt) => Metric::WetSinr,
            (OutageKind::Wdt, Strategy::Wet) => Metric::WdtEhp,
            (OutageKind::Wet, Strategy::Wet) => Metric::WetEhp,
        }
    }

    pub fn idet(kind: IdetKind) -> Metric {
        match kind {
            IdetKind::Special => Metric::IdetSpecial,
            IdetKind::General => Metric::IdetGeneral,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::WdtSinr => "WDT_SINR",
            Metric::WetSinr => "WET_SINR",
            Metric::WdtEhp => "WDT_EHP",
            Metric::WetEhp => "WET_EHP",
            Metric::IdetSpecial => "IDET_SPECIAL",
            Metric::IdetGeneral => "IDET_GENERAL",
        }
    }

    pub fn parse(s: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Mc,
    Exact,
    /// The main closed-form approximation of each metric.
    ClosedForm,
    /// The further simplified WDT-SINR closed form.
    Simplified,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mc => "MC",
            Method::Exact => "EXACT",
            Method::ClosedForm => "CLOSED_FORM",
            Method::Simplified => "SIMPLIFIED",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        [Method::Mc, Method::Exact, Method::ClosedForm, Method::Simplified]
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub value: f64,
    /// 95% normal-approximation half width; zero for deterministic methods.
    pub ci_half_width: f64,
    pub trials: u64,
    pub metric: Metric,
    pub method: Method,
}

impl OutageEstimate {
    pub fn deterministic(value: f64, metric: Metric, method: Method) -> Self {
        Self { value, ci_half_width: 0.0, trials: 0, metric, method }
    }
}
