//! Per-port conditional probabilities given the noncentralities
//! λ₁ = c r₁ of X ~ ncχ²₂ and λ₂ = c r₂ of Y ~ ncχ²_{2(N-1)}.

use crate::error::{Error, Result};
use crate::quadrature::{ncx2_pdf, GaussRule};
use crate::specfun::{bessel_i_ln, ln_gamma, marcum_p, marcum_q, NeumaierSum};

fn check_users(n_users: usize) -> Result<()> {
    if n_users < 2 {
        return Err(Error::Domain(format!("needs at least two users, got {n_users}")));
    }
    Ok(())
}

// ln[(b/a)^n I_n(ab) e^{-(a²+b²)/2}], or -inf when the term vanishes.
fn ln_bessel_term(n: u32, a: f64, b: f64) -> f64 {
    let e = -0.5 * (a * a + b * b);
    if b == 0.0 {
        return if n == 0 { e } else { f64::NEG_INFINITY };
    }
    let ab = a * b;
    if ab <= 1.0 {
        // (b/a)^n I_n(ab) = (b²/2)^n Σ_m (a²b²/4)^m / (m! (n+m)!)
        let q = 0.25 * ab * ab;
        let mut term = 1.0;
        let mut s = 1.0;
        let mut m = 0.0;
        while term > 1e-17 * s {
            term *= q / ((m + 1.0) * (n as f64 + m + 1.0));
            s += term;
            m += 1.0;
        }
        n as f64 * (0.5 * b * b).ln() - ln_gamma(n as f64 + 1.0) + s.ln() + e
    } else {
        n as f64 * (b.ln() - a.ln()) + bessel_i_ln(n, ab) + e
    }
}

/// P(X < z Y) for X ~ ncχ²₂(λ₁) and Y ~ ncχ²_{2(N-1)}(λ₂), as a Marcum Q
/// function minus a finite Bessel sum.
pub fn ratio_cdf(n_users: usize, z: f64, l1: f64, l2: f64) -> Result<f64> {
    check_users(n_users)?;
    if !(z >= 0.0) || !(l1 >= 0.0) || !(l2 >= 0.0) {
        return Err(Error::Domain(format!("ratio_cdf needs z, λ >= 0, got z={z}, λ1={l1}, λ2={l2}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(1.0);
    }
    let n = n_users as u32;
    let a = (z * l2 / (z + 1.0)).sqrt();
    let b = (l1 / (z + 1.0)).sqrt();
    let q = marcum_q(n - 1, a, b)?;
    let terms: Vec<f64> = (0..n - 1).map(|m| ln_bessel_term(m, a, b)).collect();
    let ln_z = z.ln();
    let ln_z1 = (z + 1.0).ln();
    let nf = n as f64;
    let mut s = NeumaierSum::new();
    for k in 0..n - 1 {
        for j in 0..n - k - 1 {
            let (jf, kf) = (j as f64, k as f64);
            // (N-j-k-1)_j / j!
            let ln_coef = ln_gamma(nf - kf - 1.0) - ln_gamma(nf - jf - kf - 1.0) - ln_gamma(jf + 1.0)
                + (kf - (nf - 1.0)) * ln_z1
                + jf * ln_z;
            s.add((ln_coef + terms[(j + k) as usize]).exp());
        }
    }
    Ok((q - s.value()).clamp(0.0, 1.0))
}

/// ∫₀^{y_max} y f_X(z y) f_Y(y) dy, the density of X/Y at z restricted to
/// Y < y_max, by Gauss-Legendre.
pub fn ratio_density_truncated(n_users: usize, z: f64, l1: f64, l2: f64, y_max: f64, rule: &GaussRule) -> f64 {
    let dof_y = 2 * (n_users as u32 - 1);
    rule.mapped(0.0, y_max)
        .map(|(y, w)| w * y * ncx2_pdf(z * y, 2, l1) * ncx2_pdf(y, dof_y, l2))
        .collect::<NeumaierSum>()
        .value()
}

/// P(lo < Y < hi) for Y ~ ncχ²_{2(N-1)}(λ₂).
pub fn interval_mass(n_users: usize, l2: f64, lo: f64, hi: f64) -> Result<f64> {
    check_users(n_users)?;
    if !(hi > lo) {
        return Ok(0.0);
    }
    let order = n_users as u32 - 1;
    let a = l2.sqrt();
    let lo = lo.max(0.0);
    // whichever tail is smaller carries less cancellation
    let upper = marcum_q(order, a, lo.sqrt())?;
    if upper < 0.5 {
        Ok((upper - marcum_q(order, a, hi.sqrt())?).max(0.0))
    } else {
        Ok((marcum_p(order, a, hi.sqrt())? - marcum_p(order, a, lo.sqrt())?).max(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::ExpectationRule;

    // Independent route: E_Y[P(X < zY)] with P(X < x) = 1 - Q₁(√λ₁, √x).
    fn ratio_cdf_by_quadrature(n: usize, z: f64, l1: f64, l2: f64) -> f64 {
        let rule = ExpectationRule::noncentral_chi_square(2 * (n as u32 - 1), l2, 200).unwrap();
        rule.expect(|y| marcum_p(1, l1.sqrt(), (z * y).sqrt()).unwrap())
    }

    #[test]
    fn ratio_cdf_matches_direct_integral() {
        for &(n, z, l1, l2) in &[
            (2, 2.0, 0.333, 1.0),
            (3, 2.0, 0.81, 0.23),
            (5, 2.5, 0.27, 0.67),
            (4, 1.3, 10.0, 3.3),
            (5, 0.4, 0.0, 0.0),
            (6, 8.0, 25.0, 0.0),
            (3, 1.0, 0.0, 40.0),
        ] {
            let got = ratio_cdf(n, z, l1, l2).unwrap();
            let want = ratio_cdf_by_quadrature(n, z, l1, l2);
            assert!((got - want).abs() < 1e-10, "{n} {z} {l1} {l2}: {got} vs {want}");
        }
    }

    #[test]
    fn central_case_has_closed_form() {
        // λ = 0: P(X < zY) = 1 - (1+z)^{-(N-1)}
        for n in 2..7 {
            for &z in &[0.1, 1.0, 3.0, 20.0] {
                let got = ratio_cdf(n, z, 0.0, 0.0).unwrap();
                let want = 1.0 - (1.0 + z).powi(-(n as i32 - 1));
                assert!((got - want).abs() < 1e-13, "{n} {z}");
            }
        }
    }

    #[test]
    fn density_integrates_to_cdf_increment() {
        let (n, l1, l2) = (3, 1.5, 2.0);
        let rule = GaussRule::legendre(64).unwrap();
        let zr = GaussRule::legendre(64).unwrap();
        let total: f64 = zr.mapped(0.5, 2.0).map(|(z, w)| w * ratio_density_truncated(n, z, l1, l2, 200.0, &rule)).sum();
        let want = ratio_cdf(n, 2.0, l1, l2).unwrap() - ratio_cdf(n, 0.5, l1, l2).unwrap();
        assert!((total - want).abs() < 1e-8, "{total} vs {want}");
    }

    #[test]
    fn interval_mass_edges() {
        assert_eq!(interval_mass(3, 1.0, 2.0, 1.0).unwrap(), 0.0);
        let all = interval_mass(3, 1.0, 0.0, f64::INFINITY).unwrap();
        assert!((all - 1.0).abs() < 1e-14);
        let a = interval_mass(3, 1.0, 0.0, 2.0).unwrap();
        let b = interval_mass(3, 1.0, 2.0, 5.0).unwrap();
        let c = interval_mass(3, 1.0, 0.0, 5.0).unwrap();
        assert!((a + b - c).abs() < 1e-14);
    }

    #[test]
    fn one_user_is_rejected() {
        assert!(ratio_cdf(1, 1.0, 0.0, 0.0).is_err());
    }
}
