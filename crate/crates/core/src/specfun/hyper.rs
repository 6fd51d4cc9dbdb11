use super::dd::Dd;
use super::Tolerance;
use crate::error::{Error, Result};

// Roughly 2^-104, the relative precision of a double-double.
const DD_EPS: f64 = 5e-32;

fn is_nonpositive_integer(b: f64) -> bool {
    b <= 0.0 && b == b.floor()
}

/// Sums pFq(num; den; x) as a power series in double-double.
///
/// Fails when the estimated rounding error of the partial sums, relative to
/// the result, exceeds `tol.rel_tol`.
fn series(num: &[f64], den: &[f64], x: f64, what: &'static str, tol: &Tolerance) -> Result<f64> {
    for &b in den {
        if is_nonpositive_integer(b) {
            return Err(Error::Domain(format!("{what}: lower parameter {b} is a non-positive integer")));
        }
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let mut term = Dd::from_f64(1.0);
    let mut sum = Dd::from_f64(1.0);
    let mut max_term = 1.0f64;
    for k in 0..tol.max_terms {
        let kf = k as f64;
        let mut up = x;
        for &a in num {
            up *= a + kf;
        }
        let mut down = kf + 1.0;
        for &b in den {
            down *= b + kf;
        }
        if up == 0.0 {
            // terminating series
            return finish(sum, max_term, k, what, tol);
        }
        // factor by factor so each step stays exact to double-double
        term = term.mul_f64(x);
        for &a in num {
            term = term.mul_f64(a + kf);
        }
        term = term.div_f64(kf + 1.0);
        for &b in den {
            term = term.div_f64(b + kf);
        }
        sum = sum.add(term);
        let t = term.abs_hi();
        max_term = max_term.max(t);
        if !t.is_finite() || !sum.hi.is_finite() {
            return Err(Error::Overflow(format!("{what}: series terms overflow")));
        }
        let shrinking = (up / down).abs() < 0.5;
        if shrinking && t <= 1e-3 * f64::EPSILON * sum.abs_hi() {
            return finish(sum, max_term, k, what, tol);
        }
    }
    Err(Error::NonConvergence { what, terms: tol.max_terms })
}

fn finish(sum: Dd, max_term: f64, k: usize, what: &'static str, tol: &Tolerance) -> Result<f64> {
    let value = sum.to_f64();
    let err = max_term * DD_EPS * (k as f64 + 2.0);
    if err > tol.rel_tol * value.abs() {
        return Err(Error::NonConvergence { what, terms: k + 1 });
    }
    Ok(value)
}

/// Confluent hypergeometric ₁F₁(a; b; x).
pub fn hyp1f1(a: f64, b: f64, x: f64) -> Result<f64> {
    hyp1f1_with(a, b, x, &Tolerance::default())
}

pub fn hyp1f1_with(a: f64, b: f64, x: f64, tol: &Tolerance) -> Result<f64> {
    if x < 0.0 {
        // Kummer: ₁F₁(a;b;x) = e^x ₁F₁(b-a;b;-x)
        let f = series(&[b - a], &[b], -x, "hyp1f1", tol)?;
        return Ok(x.exp() * f);
    }
    series(&[a], &[b], x, "hyp1f1", tol)
}

/// Generalized hypergeometric ₁F₂(a; b1, b2; x).
pub fn hyp1f2(a: f64, b1: f64, b2: f64, x: f64) -> Result<f64> {
    hyp1f2_with(a, b1, b2, x, &Tolerance::default())
}

pub fn hyp1f2_with(a: f64, b1: f64, b2: f64, x: f64, tol: &Tolerance) -> Result<f64> {
    series(&[a], &[b1, b2], x, "hyp1f2", tol)
}
