//! Port selection rules. Ties go to the lowest port index.

use serde::{Deserialize, Serialize};

use crate::channel::{ratio, PortStatistics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Maximize SINR.
    Wdt,
    /// Maximize harvested power.
    Wet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortChoice {
    pub port: usize,
    pub criterion_value: f64,
}

fn argmax(values: impl Iterator<Item = f64>) -> PortChoice {
    let mut best = PortChoice { port: 0, criterion_value: f64::NEG_INFINITY };
    for (k, v) in values.enumerate() {
        if v > best.criterion_value {
            best = PortChoice { port: k, criterion_value: v };
        }
    }
    best
}

/// argmax_k x_k / y_k.
pub fn wdt_port(x: &[f64], y: &[f64]) -> PortChoice {
    argmax(x.iter().zip(y).map(|(&a, &b)| ratio(a, b)))
}

/// argmax_k x_k + y_k.
pub fn wet_port(x: &[f64], y: &[f64]) -> PortChoice {
    argmax(x.iter().zip(y).map(|(&a, &b)| a + b))
}

pub fn select_wdt_port(stats: &PortStatistics) -> PortChoice {
    wdt_port(&stats.x, &stats.y)
}

pub fn select_wet_port(stats: &PortStatistics) -> PortChoice {
    wet_port(&stats.x, &stats.y)
}

pub fn select_port(stats: &PortStatistics, strategy: Strategy) -> PortChoice {
    match strategy {
        Strategy::Wdt => select_wdt_port(stats),
        Strategy::Wet => select_wet_port(stats),
    }
}
