//! Cell evaluation for sweeps, single evaluations and MC/exact comparisons.

use std::collections::HashMap;
use std::time::Instant;

use serde::Serialize;

use super::config::{Quantity, Request, Scenario};
use crate::analytic::{self, Evaluation, KernelContext, QuadratureSpec};
use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::metric::{Method, Metric};
use crate::montecarlo::{estimate_all, estimate_energy_efficiency, OutageCounts};

/// One (cell, quantity, method) result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub axis: String,
    pub axis_value: String,
    pub metric: String,
    pub method: Method,
    /// NaN when the evaluation failed.
    pub value: f64,
    pub ci: Option<f64>,
    pub trials: Option<u64>,
    pub seconds: f64,
    /// Richardson deviation of exact evaluations.
    pub deviation: Option<f64>,
    /// Error kind when the evaluation failed.
    pub error: Option<String>,
    #[serde(skip)]
    pub numerical_failure: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: String,
    pub seed: u64,
    pub trials: u64,
    pub quadrature: QuadratureSpec,
    pub rows: Vec<Row>,
}

impl SweepResult {
    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.error.is_some())
    }
}

// (error kind, numerical?, message)
type Failure = (String, bool, String);
type Outcome = std::result::Result<(f64, Option<f64>), Failure>;

fn failed(e: &Error) -> Failure {
    (e.kind().to_string(), e.is_numerical(), e.to_string())
}

// Exact and closed-form values within one cell, shared between quantities.
struct Analytic<'a> {
    cfg: &'a SystemConfig,
    quad: &'a QuadratureSpec,
    ctx: Option<std::result::Result<KernelContext, Failure>>,
    cache: HashMap<(Metric, Method), Outcome>,
}

impl<'a> Analytic<'a> {
    fn new(cfg: &'a SystemConfig, quad: &'a QuadratureSpec) -> Self {
        Self { cfg, quad, ctx: None, cache: HashMap::new() }
    }

    fn ctx(&mut self) -> std::result::Result<KernelContext, Failure> {
        self.ctx
            .get_or_insert_with(|| KernelContext::from_config(self.cfg).map_err(|e| failed(&e)))
            .clone()
    }

    fn get(&mut self, metric: Metric, method: Method) -> Outcome {
        if let Some(v) = self.cache.get(&(metric, method)) {
            return v.clone();
        }
        let v = self.compute(metric, method);
        self.cache.insert((metric, method), v.clone());
        v
    }

    fn compute(&mut self, metric: Metric, method: Method) -> Outcome {
        let ctx = self.ctx()?;
        let quad = *self.quad;
        let eval = |r: Result<Evaluation>| r.map(|e| (e.value, e.deviation)).map_err(|e| failed(&e));
        let plain = |r: Result<f64>| r.map(|v| (v, None)).map_err(|e| failed(&e));
        let unsupported = || {
            let e = Error::Unsupported(format!("{metric} has no {method} evaluation"));
            Err(failed(&e))
        };
        let rician = ctx.rician_k > 0.0;
        if rician && method != Method::Exact {
            let e = Error::Unsupported(format!("{metric} {method} is only available for Rayleigh fading"));
            return Err(failed(&e));
        }
        match (metric, method) {
            (Metric::WdtSinr, Method::Exact) if rician => eval(analytic::rician_wdt_sinr_exact(&ctx, &quad)),
            (Metric::WetEhp, Method::Exact) if rician => eval(analytic::rician_wet_ehp_exact(&ctx, &quad)),
            (Metric::WdtSinr, Method::Exact) => eval(analytic::wdt_sinr_exact(&ctx, &quad)),
            (Metric::WdtSinr, Method::ClosedForm) => Ok((analytic::wdt_sinr_approx(&ctx).full, None)),
            (Metric::WdtSinr, Method::Simplified) => Ok((analytic::wdt_sinr_approx(&ctx).small_mu, None)),
            (Metric::WetSinr, Method::Exact) => eval(analytic::wet_sinr_exact(&ctx, &quad)),
            (Metric::WetSinr, Method::ClosedForm) => plain(analytic::wet_sinr_approx(&ctx)),
            (Metric::WdtEhp, Method::Exact) => eval(analytic::wdt_ehp_exact(&ctx, &quad)),
            (Metric::WdtEhp, Method::ClosedForm) => Ok((analytic::wdt_ehp_approx(&ctx), None)),
            (Metric::WetEhp, Method::Exact) => eval(analytic::wet_ehp_exact(&ctx, &quad)),
            (Metric::WetEhp, Method::ClosedForm) => plain(analytic::wet_ehp_approx(&ctx)),
            (Metric::IdetSpecial, Method::Exact) => eval(analytic::idet_special_exact(&ctx, &quad)),
            (Metric::IdetSpecial, Method::ClosedForm) => {
                // independence approximation on the exact factors
                let (a, _) = self.get(Metric::WdtSinr, Method::Exact)?;
                let (b, _) = self.get(Metric::WetEhp, Method::Exact)?;
                plain(analytic::idet_special_approx(a, b).map(|x| x.value))
            }
            (Metric::IdetGeneral, Method::Exact | Method::ClosedForm) => {
                let (a, _) = self.get(Metric::WdtSinr, Method::Exact)?;
                let (b, _) = self.get(Metric::WetEhp, Method::Exact)?;
                let (s, _) = self.get(Metric::IdetSpecial, method)?;
                plain(analytic::idet_general(a, b, s))
            }
            _ => unsupported(),
        }
    }
}

/// Evaluates every requested quantity for one configuration.
pub fn evaluate_cell(
    cfg: &SystemConfig,
    requests: &[Request],
    trials: u64,
    seed: u64,
    quad: &QuadratureSpec,
    axis: &str,
    axis_value: &str,
) -> Vec<Row> {
    let mut rows = Vec::new();
    let mut mc: Option<(std::result::Result<OutageCounts, Failure>, f64)> = None;
    let mut analytic = Analytic::new(cfg, quad);
    for req in requests {
        for &method in &req.methods {
            let start = Instant::now();
            let (outcome, ci, n, shared_seconds): (Outcome, Option<f64>, Option<u64>, Option<f64>) =
                match (req.quantity, method) {
                    (Quantity::Outage(m) | Quantity::Gain(m), Method::Mc) => {
                        let (counts, secs) = mc.get_or_insert_with(|| {
                            let t = Instant::now();
                            let c = estimate_all(cfg, trials, seed).map_err(|e| failed(&e));
                            (c, t.elapsed().as_secs_f64())
                        });
                        match counts {
                            Ok(c) => {
                                let e = c.estimate(m);
                                let scale = if matches!(req.quantity, Quantity::Gain(_)) { cfg.n_users as f64 } else { 1.0 };
                                let value = if scale == 1.0 { e.value } else { scale * (1.0 - e.value) };
                                (Ok((value, None)), Some(scale * e.ci_half_width), Some(e.trials), Some(*secs))
                            }
                            Err(err) => (Err(err.clone()), None, None, Some(*secs)),
                        }
                    }
                    (Quantity::Outage(m), _) => (analytic.get(m, method), None, None, None),
                    (Quantity::Gain(m), _) => {
                        let o = analytic.get(m, method).map(|(v, d)| (cfg.n_users as f64 * (1.0 - v), d));
                        (o, None, None, None)
                    }
                    (Quantity::EnergyEfficiency(s), Method::Mc) => {
                        match estimate_energy_efficiency(cfg, s, trials, seed) {
                            Ok(r) if r.valid => (Ok((r.ee, None)), None, Some(r.trials), None),
                            Ok(_) => {
                                let e = Error::Domain("total consumed power is not positive".into());
                                (Err(failed(&e)), None, Some(trials), None)
                            }
                            Err(e) => (Err(failed(&e)), None, None, None),
                        }
                    }
                    (Quantity::EnergyEfficiency(_), _) => {
                        let e = Error::Unsupported(format!("{} is only estimated by MC", req.quantity));
                        (Err(failed(&e)), None, None, None)
                    }
                };
            let seconds = shared_seconds.unwrap_or_else(|| start.elapsed().as_secs_f64());
            let mut row = Row {
                axis: axis.to_string(),
                axis_value: axis_value.to_string(),
                metric: req.quantity.name(),
                method,
                value: f64::NAN,
                ci,
                trials: n,
                seconds,
                deviation: None,
                error: None,
                numerical_failure: false,
            };
            match outcome {
                Ok((v, d)) => {
                    row.value = v;
                    row.deviation = d;
                }
                Err((kind, numerical, message)) => {
                    let cell = if axis.is_empty() { String::new() } else { format!("{axis}={axis_value} ") };
                    eprintln!("{cell}{} {method}: {message}", req.quantity);
                    row.error = Some(kind);
                    row.numerical_failure = numerical;
                }
            }
            rows.push(row);
        }
    }
    rows
}

/// Runs every sweep point, or the base configuration when there is no
/// sweep. All cells share the seed, so neighbouring cells see common
/// random numbers.
pub fn run_sweep(scenario: &Scenario) -> Result<SweepResult> {
    if scenario.requests.is_empty() {
        return Err(Error::InvalidConfig("no sweep.metric requested".into()));
    }
    let mut rows = Vec::new();
    let axis_name = scenario.axis.map(|a| a.name()).unwrap_or("");
    match scenario.axis {
        Some(axis) => {
            for v in &scenario.values {
                let mut cfg = scenario.base.clone();
                axis.apply(&mut cfg, v.value);
                rows.extend(evaluate_cell(&cfg, &scenario.requests, scenario.trials, scenario.seed, &scenario.quad, axis_name, &v.label));
            }
        }
        None => rows.extend(evaluate_cell(
            &scenario.base,
            &scenario.requests,
            scenario.trials,
            scenario.seed,
            &scenario.quad,
            "",
            "",
        )),
    }
    Ok(SweepResult { axis: axis_name.to_string(), seed: scenario.seed, trials: scenario.trials, quadrature: scenario.quad, rows })
}

/// One MC-vs-exact check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub axis_value: String,
    pub metric: String,
    pub mc: f64,
    pub exact: f64,
    pub diff: f64,
    /// 3 x the MC confidence half width.
    pub limit: f64,
    pub pass: bool,
    pub error: Option<String>,
}

/// Pairs the MC and EXACT rows of every cell. Requires at least one metric
/// requested with both methods.
pub fn compare(scenario: &Scenario) -> Result<(SweepResult, Vec<Comparison>)> {
    let paired: Vec<&Request> = scenario
        .requests
        .iter()
        .filter(|r| r.methods.contains(&Method::Mc) && r.methods.contains(&Method::Exact))
        .collect();
    if paired.is_empty() {
        return Err(Error::InvalidConfig("compare needs a metric requested with both MC and EXACT".into()));
    }
    let result = run_sweep(scenario)?;
    let mut out = Vec::new();
    for mc in result.rows.iter().filter(|r| r.method == Method::Mc) {
        let Some(ex) = result
            .rows
            .iter()
            .find(|r| r.method == Method::Exact && r.metric == mc.metric && r.axis_value == mc.axis_value)
        else {
            continue;
        };
        let diff = (mc.value - ex.value).abs();
        let limit = 3.0 * mc.ci.unwrap_or(f64::NAN);
        let error = mc.error.clone().or_else(|| ex.error.clone());
        out.push(Comparison {
            axis_value: mc.axis_value.clone(),
            metric: mc.metric.clone(),
            mc: mc.value,
            exact: ex.value,
            diff,
            limit,
            // a zero-width interval still accepts an exact match
            pass: error.is_none() && diff <= limit,
            error,
        });
    }
    Ok((result, out))
}
