use fama_core::analytic::*;
use fama_core::channel::SystemConfig;
use fama_core::specfun::gamma_lower_reg;
use fama_core::Error;
use proptest::prelude::*;

fn quad(semi: usize, fin: usize) -> QuadratureSpec {
    QuadratureSpec { nodes_semiinfinite: semi, nodes_finite: fin, ..QuadratureSpec::default() }
}

fn ctx(n: usize, k: usize, mu: f64, gamma: f64, q_hat: f64) -> KernelContext {
    KernelContext { mu, gamma_th: gamma, q_hat, n_users: n, n_ports: k, rician_k: 0.0 }
}

// Per-port SIR CDF without correlation: P(X < γY) with X ~ χ²₂, Y ~ χ²_{2(N-1)}.
fn ratio_cdf_central(n: usize, gamma: f64) -> f64 {
    1.0 - (1.0 + gamma).powi(-(n as i32 - 1))
}

fn energy_cdf_central(n: usize, q: f64) -> f64 {
    gamma_lower_reg(n as f64, 0.5 * q).unwrap()
}

#[test]
fn single_port_reduces_to_marginals() {
    let q = quad(24, 32);
    for &(n, mu, g, qh) in &[(2, 0.5, 2.0, 3.0), (4, 0.3, 1.0, 8.0), (3, 0.8, 0.5, 5.0)] {
        let c = ctx(n, 1, mu, g, qh);
        let qt = c.q_tilde();
        let wdt = wdt_sinr_exact(&c, &q).unwrap().value;
        assert!((wdt - ratio_cdf_central(n, g)).abs() < 1e-9, "wdt {n} {mu}");
        let wet = wet_ehp_exact(&c, &q).unwrap().value;
        assert!((wet - energy_cdf_central(n, qt)).abs() < 1e-9, "wet {n} {mu}");
        let ws = wet_sinr_exact(&c, &q).unwrap().value;
        assert!((ws - energy_cdf_central(n, qt)).abs() < 1e-9, "wet_sinr {n} {mu}");
        // sum and ratio of one port are independent for any μ
        let sp = idet_special_exact(&c, &q).unwrap().value;
        let want = ratio_cdf_central(n, g) * energy_cdf_central(n, qt);
        assert!((sp - want).abs() < 1e-9, "special {n} {mu}: {sp} vs {want}");
    }
}

#[test]
fn uncorrelated_ports_are_independent_draws() {
    let q = quad(32, 32);
    for &(n, k, g, qh) in &[(2, 3, 2.0, 3.0), (4, 5, 1.0, 8.0)] {
        let c = ctx(n, k, 0.0, g, qh);
        let pz = ratio_cdf_central(n, g);
        let pt = energy_cdf_central(n, qh);
        let kk = k as i32;
        assert!((wdt_sinr_exact(&c, &q).unwrap().value - pz.powi(kk)).abs() < 1e-10);
        assert!((wet_ehp_exact(&c, &q).unwrap().value - pt.powi(kk)).abs() < 1e-10);
        assert!((wet_sinr_exact(&c, &q).unwrap().value - pt).abs() < 1e-8);
        assert!((wdt_ehp_exact(&c, &q).unwrap().value - pz).abs() < 1e-8);
        assert!((idet_special_exact(&c, &q).unwrap().value - (pz * pt).powi(kk)).abs() < 1e-10);
    }
}

// The max-EHP choice depends only on port norms, and the law of the channel
// is invariant under unitary mixing of the BS antennas, so the chosen port's
// SIR has the single-port law whatever μ is.
#[test]
fn energy_choice_leaves_sir_law_unchanged() {
    let q = quad(24, 32);
    for &(n, k, mu, g) in &[(2, 2, 0.556, 2.0), (3, 4, 0.4, 1.5), (4, 6, 0.8, 0.7)] {
        let got = wdt_ehp_exact(&ctx(n, k, mu, g, 1.0), &q).unwrap().value;
        assert!((got - ratio_cdf_central(n, g)).abs() < 1e-6, "{n} {k} {mu}: {got}");
        assert!((got - wdt_ehp_approx(&ctx(n, k, mu, g, 1.0))).abs() < 1e-6);
    }
}

#[test]
fn weak_correlation_matches_closed_limits() {
    let q = quad(24, 32);
    let c = ctx(3, 4, 0.05, 1.5, 6.0);
    let ws = wet_sinr_exact(&c, &q).unwrap().value;
    let approx = wet_sinr_approx(&c).unwrap();
    assert!((ws - approx).abs() / approx <= 0.02, "{ws} vs {approx}");
    let wd = wdt_ehp_exact(&c, &q).unwrap().value;
    let approx = wdt_ehp_approx(&c);
    assert!((wd - approx).abs() / approx <= 0.02);
}

#[test]
fn trivial_thresholds() {
    let q = quad(16, 16);
    let c = ctx(3, 4, 0.5, 1.0, 0.0);
    assert_eq!(wet_sinr_exact(&c, &q).unwrap().value, 0.0);
    assert_eq!(wet_ehp_exact(&c, &q).unwrap().value, 0.0);
    assert_eq!(idet_special_exact(&c, &q).unwrap().value, 0.0);
    let c = ctx(3, 4, 0.5, 1e-9, 5.0);
    assert!(wdt_sinr_exact(&c, &q).unwrap().value < 1e-8);
    assert!(wdt_ehp_exact(&c, &q).unwrap().value < 1e-8);
    let c = ctx(3, 4, 0.5, 1.0, f64::INFINITY);
    assert_eq!(wet_ehp_exact(&c, &q).unwrap().value, 1.0);
    assert_eq!(wet_sinr_exact(&c, &q).unwrap().value, 1.0);
    let c = ctx(3, 4, 0.5, 1e9, 1e9);
    assert!(idet_special_exact(&c, &q).unwrap().value > 1.0 - 1e-6);
}

#[test]
fn closed_form_sinr_is_accurate_at_high_threshold() {
    // baseline deployment at γ_th = 8 dB
    let cfg = SystemConfig { sinr_threshold: 10f64.powf(0.8), ..SystemConfig::baseline() };
    let c = KernelContext::from_config(&cfg).unwrap();
    let exact = wdt_sinr_exact(&c, &QuadratureSpec::default()).unwrap().value;
    let approx = wdt_sinr_approx(&c);
    for v in [approx.full, approx.small_mu] {
        assert!((v - exact).abs() / exact < 0.02, "{v} vs {exact}");
    }
}

// The high-threshold energy form is a first-order union bound, and averaging
// the Marcum Q over r gives the single-port marginal tail.
#[test]
fn closed_form_energy_is_the_union_bound() {
    for &(n, k, mu, qh) in &[(3, 2, 0.5, 12.0), (5, 10, 0.25, 30.0), (2, 4, 0.8, 20.0)] {
        let c = ctx(n, k, mu, 1.0, qh);
        let tail = 1.0 - energy_cdf_central(n, c.q_tilde());
        let want = (1.0 - k as f64 * tail).max(0.0);
        assert!((wet_ehp_approx(&c).unwrap() - want).abs() < 1e-10);
        assert!(wet_ehp_exact(&c, &quad(48, 16)).unwrap().value >= want - 1e-9);
    }
}

#[test]
fn frechet_bounds_hold() {
    let q = quad(16, 24);
    for &(n, k, mu, g, qh) in &[(2, 2, 0.556, 2.0, 3.0), (3, 4, 0.4, 1.5, 6.0), (4, 8, 0.3, 0.5, 12.0)] {
        let c = ctx(n, k, mu, g, qh);
        let wdt = wdt_sinr_exact(&c, &q).unwrap().value;
        let wet = wet_ehp_exact(&c, &q).unwrap().value;
        let sp = idet_special_exact(&c, &q).unwrap().value;
        assert!(sp <= wdt.min(wet) + 1e-9);
        assert!(sp >= (wdt + wet - 1.0).max(0.0) - 1e-9);
        let general = idet_general(wdt, wet, sp).unwrap();
        assert!(general >= wdt.max(wet) - 1e-9);
    }
}

#[test]
fn rician_reduces_to_rayleigh() {
    let q = quad(32, 32);
    for &(n, k, mu, g, qh) in &[(2, 2, 0.556, 2.0, 3.0), (5, 10, 0.556, 2.0, 20.0)] {
        let ray = ctx(n, k, mu, g, qh);
        let ric = KernelContext { rician_k: 0.0, ..ray };
        let a = rician_wdt_sinr_exact(&ric, &q).unwrap().value;
        let b = wdt_sinr_exact(&ray, &q).unwrap().value;
        assert!((a - b).abs() < 1e-8);
        let a = rician_wet_ehp_exact(&ric, &q).unwrap().value;
        let b = wet_ehp_exact(&ray, &q).unwrap().value;
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn rayleigh_forms_refuse_rician_inputs() {
    let c = KernelContext { rician_k: 2.0, ..ctx(3, 2, 0.5, 1.0, 2.0) };
    assert!(matches!(wdt_sinr_exact(&c, &quad(16, 16)), Err(Error::Unsupported(_))));
}

#[test]
fn refinement_check_reports_unresolved_integrals() {
    let q = QuadratureSpec { nodes_semiinfinite: 8, nodes_finite: 8, rel_tol_target: 1e-12, richardson_check: true };
    let err = wet_sinr_exact(&ctx(5, 50, 0.5, 2.0, 20.0), &q).unwrap_err();
    assert!(matches!(err, Error::Quadrature { .. }));
    assert!(err.is_numerical());
}

#[test]
fn cost_guard_refuses_huge_grids() {
    let q = quad(100, 100);
    let err = wet_sinr_exact(&ctx(3, 2, 0.5, 1.0, 2.0), &q).unwrap_err();
    assert!(matches!(err, Error::CostGuard(_)));
}

#[test]
fn spec_validation() {
    assert!(quad(4, 16).validate().is_err());
    assert!(QuadratureSpec { rel_tol_target: 0.0, ..QuadratureSpec::default() }.validate().is_err());
    assert!(ctx(3, 2, 0.5, 0.0, 1.0).validate().is_err());
    assert!(ctx(3, 2, 0.5, 1.0, -1.0).validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sinr_outage_grows_with_threshold(n in 2usize..5, k in 1usize..6, mu in 0.05f64..0.9, g in 0.1f64..5.0, dg in 0.01f64..3.0) {
        let q = quad(16, 16);
        let a = wdt_sinr_exact(&ctx(n, k, mu, g, 1.0), &q).unwrap().value;
        let b = wdt_sinr_exact(&ctx(n, k, mu, g + dg, 1.0), &q).unwrap().value;
        prop_assert!(b >= a - 1e-9);
    }

    #[test]
    fn energy_outage_monotone(n in 1usize..6, k in 1usize..10, mu in 0.05f64..0.9, qh in 0.1f64..30.0, dq in 0.01f64..5.0) {
        let q = quad(48, 16);
        let base = wet_ehp_exact(&ctx(n, k, mu, 1.0, qh), &q).unwrap().value;
        let higher = wet_ehp_exact(&ctx(n, k, mu, 1.0, qh + dq), &q).unwrap().value;
        let more_ports = wet_ehp_exact(&ctx(n, k + 1, mu, 1.0, qh), &q).unwrap().value;
        prop_assert!(higher >= base - 1e-9);
        prop_assert!(more_ports <= base + 1e-9);
    }

    #[test]
    fn probabilities_stay_in_range(n in 2usize..5, k in 1usize..5, mu in 0.0f64..0.95, g in 0.05f64..10.0, qh in 0.0f64..20.0) {
        let q = QuadratureSpec { richardson_check: false, ..quad(12, 12) };
        let c = ctx(n, k, mu, g, qh);
        for v in [
            wdt_sinr_exact(&c, &q).unwrap().value,
            wet_ehp_exact(&c, &q).unwrap().value,
            idet_special_exact(&c, &q).unwrap().value,
            wdt_sinr_approx(&c).full,
            wdt_sinr_approx(&c).small_mu,
            wet_ehp_approx(&c).unwrap(),
        ] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
