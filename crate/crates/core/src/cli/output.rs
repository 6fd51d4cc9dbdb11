//! CSV and JSON emission.
//!
//! CSV columns, one row per (cell, quantity, method):
//!
//! `axis,axis_value,metric,method,value,ci,trials,seconds,deviation,error`
//!
//! `axis_value` repeats the label from the scenario file (so `3 dB` stays
//! `3 dB`). `ci` and `trials` are filled for MC rows, `deviation` for
//! quadrature rows. `seconds` is empty unless timings were requested, which
//! keeps repeated runs byte-identical. Failed rows carry `value = NaN` and
//! the error kind.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::sweep::{Comparison, Row, SweepResult};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub const CSV_HEADER: &str = "axis,axis_value,metric,method,value,ci,trials,seconds,deviation,error";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Shortest round-trip form, in exponent notation for very small or large
/// magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x.is_finite() && a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv(result: &SweepResult, timings: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        let seconds = if timings { format!("{:.3}", r.seconds) } else { String::new() };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            quote(&r.axis),
            quote(&r.axis_value),
            r.metric,
            r.method,
            num(r.value),
            opt_num(r.ci),
            opt(r.trials),
            seconds,
            opt_num(r.deviation),
            opt(r.error.as_deref()),
        ));
    }
    out
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    axis: &'a str,
    seed: u64,
    trials: u64,
    quadrature: &'a crate::analytic::QuadratureSpec,
    rows: &'a [Row],
    #[serde(skip_serializing_if = "Option::is_none")]
    comparisons: Option<&'a [Comparison]>,
}

/// NaN and the optional timings are mapped to JSON null.
pub fn json(result: &SweepResult, comparisons: Option<&[Comparison]>, timings: bool) -> String {
    let rows: Vec<Row> = result
        .rows
        .iter()
        .cloned()
        .map(|mut r| {
            if !timings {
                r.seconds = f64::NAN;
            }
            r
        })
        .collect();
    let doc = JsonDoc {
        axis: &result.axis,
        seed: result.seed,
        trials: result.trials,
        quadrature: &result.quadrature,
        rows: &rows,
        comparisons,
    };
    // serde_json writes non-finite floats as null
    let mut s = serde_json::to_string_pretty(&doc).expect("result tables always serialize");
    s.push('\n');
    s
}

pub fn comparison_table(cmp: &[Comparison]) -> String {
    let mut out = String::from("axis_value,metric,mc,exact,diff,limit,pass,error\n");
    for c in cmp {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            quote(&c.axis_value),
            c.metric,
            num(c.mc),
            num(c.exact),
            num(c.diff),
            num(c.limit),
            if c.pass { "PASS" } else { "FAIL" },
            opt(c.error.as_deref()),
        ));
    }
    out
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial table.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
