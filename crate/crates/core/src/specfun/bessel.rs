use super::gamma::ln_factorial;
use crate::error::{Error, Result};

const RESCALE_AT: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// e^{-x} I_n(x) for x >= 0 (integer order).
pub fn bessel_i_scaled(n: u32, x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < 1.0 {
        return (-x).exp() * i_series(n, x);
    }
    i_miller_scaled(n, x)
}

/// ln I_n(x) for x >= 0. Returns -inf when I_n(x) = 0.
pub fn bessel_i_ln(n: u32, x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if x < 1.0 {
        return i_series_ln(n, x);
    }
    let s = i_miller_scaled(n, x);
    if s < 1e-290 {
        // large order: keep the leading factor in log form
        return i_series_ln(n, x);
    }
    s.ln() + x
}

/// I_n(x), failing with `Overflow` where the value is not representable.
pub fn bessel_i(n: u32, x: f64) -> Result<f64> {
    let ln = bessel_i_ln(n, x);
    if ln > 709.0 {
        return Err(Error::Overflow(format!("I_{n}({x}) exceeds f64 range")));
    }
    Ok(ln.exp())
}

// Σ (x/2)^{2m} / (m! (n+m)!) times (x/2)^n / n!, ratio form.
fn i_series(n: u32, x: f64) -> f64 {
    i_series_ln(n, x).exp()
}

fn i_series_ln(n: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0u32;
    loop {
        m += 1;
        term *= q / (m as f64 * (n + m) as f64);
        sum += term;
        if term < sum * 1e-17 || m > 500 {
            break;
        }
    }
    n as f64 * (0.5 * x).ln() - ln_factorial(n as u64) + sum.ln()
}

fn i_miller_scaled(n: u32, x: f64) -> f64 {
    let mut m = n as usize + 20 + (100.0 * x).sqrt().ceil() as usize;
    m += m % 2;
    let two_over_x = 2.0 / x;
    let mut i_next = 0.0f64;
    let mut i_cur = 1.0f64;
    let mut ans = 0.0f64;
    let mut norm = 0.0f64;
    for j in (1..=m).rev() {
        if j == n as usize {
            ans = i_cur;
        }
        norm += 2.0 * i_cur;
        let i_prev = i_next + (j as f64) * two_over_x * i_cur;
        i_next = i_cur;
        i_cur = i_prev;
        if i_cur.abs() > RESCALE_AT {
            i_cur *= RESCALE_BY;
            i_next *= RESCALE_BY;
            ans *= RESCALE_BY;
            norm *= RESCALE_BY;
        }
    }
    norm += i_cur;
    if n == 0 {
        ans = i_cur;
    }
    ans / norm
}

/// J_0(x).
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 8.0 {
        j_series(0, x)
    } else {
        j_miller(x).0
    }
}

/// J_1(x).
pub fn bessel_j1(x: f64) -> f64 {
    if x < 0.0 {
        return -bessel_j1(-x);
    }
    if x < 8.0 {
        j_series(1, x)
    } else {
        j_miller(x).1
    }
}

/// Σ_{k>=0} J_{2k+1}(x) for x >= 0.
pub(crate) fn bessel_j_odd_sum(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    j_miller(x).2
}

fn j_series(n: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200u32 {
        term *= q / (m as f64 * (n + m) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    let mut lead = 1.0;
    for k in 1..=n {
        lead *= 0.5 * x / k as f64;
    }
    lead * sum
}

// Backward recurrence normalised by J_0 + 2 Σ J_{2k} = 1.
// Returns (J_0, J_1, Σ_k J_{2k+1}).
fn j_miller(x: f64) -> (f64, f64, f64) {
    let mut m = x.ceil() as usize + 40 + (10.0 * x.cbrt()).ceil() as usize;
    m += m % 2;
    let two_over_x = 2.0 / x;
    let mut j_next = 0.0f64;
    let mut j_cur = 1.0f64;
    let mut even = 0.0f64;
    let mut odd = 0.0f64;
    let mut j1 = 0.0f64;
    for j in (1..=m).rev() {
        if j % 2 == 0 {
            even += j_cur;
        } else {
            odd += j_cur;
        }
        if j == 1 {
            j1 = j_cur;
        }
        let j_prev = (j as f64) * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > RESCALE_AT {
            j_cur *= RESCALE_BY;
            j_next *= RESCALE_BY;
            even *= RESCALE_BY;
            odd *= RESCALE_BY;
            j1 *= RESCALE_BY;
        }
    }
    let norm = j_cur + 2.0 * even;
    (j_cur / norm, j1 / norm, odd / norm)
}
