//! Adaptive quadrature against closed forms, midpoint sums and the `H₁/H₂` dichotomy.

use std::f64::consts::{LN_2, PI};

use approx::assert_relative_eq;
use hardylab::quadrature::*;
use hardylab::ExtReal;
use proptest::prelude::*;

fn fin(x: f64) -> ExtReal<f64> {
    ExtReal::Finite(x)
}

fn midpoint(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

fn bumps() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.5f64..2.0, 0.0f64..1.0, 0.05f64..0.3), 1..=5)
}

fn gaussian_sum(b: Vec<(f64, f64, f64)>) -> impl Fn(f64) -> f64 + Sync {
    move |t| b.iter().map(|&(a, c, w)| a * (-((t - c) / w).powi(2)).exp()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn agrees_with_midpoint_sum(b in bumps()) {
        let f = gaussian_sum(b);
        let q = integrate(&Integrand::new(&f), 0.0, fin(1.0), 1e-14, 1e-12).unwrap();
        let r = midpoint(&f, 0.0, 1.0, 1_000_000);
        prop_assert!(((q.value - r) / r).abs() <= 1e-7);
    }

    #[test]
    fn split_at_kink_is_additive(b in bumps(), kink in 0.1f64..0.9) {
        let g = gaussian_sum(b);
        let f = |t: f64| g(t) * (1.0 + (t - kink).abs());
        let whole = integrate(&Integrand::new(f).with_breakpoints([kink]), 0.0, fin(1.0), 1e-14, 1e-11).unwrap();
        let left = integrate(&Integrand::new(f), 0.0, fin(kink), 1e-14, 1e-11).unwrap();
        let right = integrate(&Integrand::new(f), kink, fin(1.0), 1e-14, 1e-11).unwrap();
        let err = whole.abs_error_est + left.abs_error_est + right.abs_error_est;
        prop_assert!((whole.value - left.value - right.value).abs() <= err.max(1e-13 * whole.value));
    }

    #[test]
    fn tighter_tolerance_never_moves_away(b in bumps()) {
        let f = gaussian_sum(b);
        let exact = midpoint(&f, 0.0, 1.0, 1_000_000);
        let loose = integrate(&Integrand::new(&f), 0.0, fin(1.0), 0.0, 1e-6).unwrap();
        let tight = integrate(&Integrand::new(&f), 0.0, fin(1.0), 0.0, 1e-7).unwrap();
        let (dl, dt) = ((loose.value - exact).abs(), (tight.value - exact).abs());
        // the oracle itself is only good to about 1e-12 relative
        prop_assert!(dt <= dl + 1e-11 * exact);
    }

    #[test]
    fn power_singularity_exponents(gamma in -0.95f64..2.0) {
        let f = Integrand::new(move |t: f64| t.powf(gamma));
        let q = integrate(&f, 0.0, fin(1.0), 1e-14, 1e-10).unwrap();
        assert_relative_eq!(q.value, 1.0 / (gamma + 1.0), max_relative = 1e-8);
    }
}

#[test]
fn closed_form_cases() {
    let q = integrate(&Integrand::new(|t: f64| t.powf(-0.5)), 0.0, fin(1.0), 1e-12, 1e-9).unwrap();
    assert!((q.value - 2.0).abs() <= 1e-9);
    let q = integrate(&Integrand::new(f64::cos), 0.0, fin(PI / 2.0), 1e-12, 1e-9).unwrap();
    assert!((q.value - 1.0).abs() <= 1e-12);
    let q = integrate(&Integrand::new(|s: f64| (1.0 / s).ln().powi(-2) / s), 0.0, fin(0.5), 1e-12, 1e-9).unwrap();
    assert_relative_eq!(q.value, 1.0 / LN_2, max_relative = 1e-9);
}

#[test]
fn h2_values() {
    // with s1 = s2 = 0 the density is 1
    let r = h1_h2(0.0, 0.0, 0.0, 1.0, 0.25, 0.5).unwrap();
    assert_relative_eq!(r.h1.value().unwrap(), 0.25, max_relative = 1e-12);
    assert_relative_eq!(r.h2.value().unwrap(), 0.25, max_relative = 1e-12);
    // sigma (1 - log sigma) between 1/4 and 1/2 gives exactly 1/4
    let r = h1_h2(0.0, 1.0, 0.0, 1.0, 0.25, 0.5).unwrap();
    assert_relative_eq!(r.h2.value().unwrap(), 0.25, max_relative = 1e-12);
    assert_relative_eq!(r.h1.value().unwrap(), 0.25 * (1.0 + 4.0f64.ln()), max_relative = 1e-10);
}

#[test]
fn h1_divergent_at_the_borderline() {
    let r = h1_h2(0.0, -1.0, -1.0, 1.0, 0.25, 0.5).unwrap();
    assert!(!r.h1.is_finite());
    assert_eq!(r.h1_slope_check, Integrability::Divergent);
}

#[test]
fn finiteness_dichotomy_matches_classifier() {
    let mut cases = 0;
    for s1 in [-2.5, -1.6, -1.0, -0.7, -0.3, 0.0, 0.4, 1.0, 1.5, 2.5] {
        for s2 in [-1.8, -1.0, -0.6, 0.0, 0.7] {
            for (d, at_d) in [(1.0, true), (1.0, false), (0.8, true), (1.3, false)] {
                let l2 = if at_d { d } else { 0.7 * d };
                let r = h1_h2(0.0, s1, s2, d, 0.3 * d, l2).unwrap();
                assert_eq!(r.h1.is_finite(), h1_is_finite(s1, s2));
                assert_eq!(r.h2.is_finite(), h2_is_finite(s1, at_d));
                let want1 = if r.h1.is_finite() { Integrability::Convergent } else { Integrability::Divergent };
                let want2 = if r.h2.is_finite() { Integrability::Convergent } else { Integrability::Divergent };
                assert_eq!(r.h1_slope_check, want1, "H1 at s1 = {s1}, s2 = {s2}");
                assert_eq!(r.h2_slope_check, want2, "H2 at s1 = {s1}, D = {d}, l2 = D: {at_d}");
                cases += 1;
            }
        }
    }
    assert_eq!(cases, 200);
}

#[test]
fn log_slope_examples() {
    let f = Integrand::new(|t: f64| 1.0 / t);
    assert_eq!(log_slope_divergence_test(&f, 0.0, 1.0).unwrap(), Integrability::Divergent);
    let f = Integrand::new(|t: f64| t.powf(-0.5));
    assert_eq!(log_slope_divergence_test(&f, 0.0, 1.0).unwrap(), Integrability::Convergent);
    let f = Integrand::new(|t: f64| t.powf(-1.5));
    assert_eq!(log_slope_divergence_test(&f, 0.0, 1.0).unwrap(), Integrability::Divergent);
    let f = Integrand::new(|t: f64| (1.0 / t).ln().powi(-2) / t);
    assert_eq!(log_slope_divergence_test(&f, 0.0, 0.5).unwrap(), Integrability::Convergent);
    let f = Integrand::new(|t: f64| 1.0 / (t * t));
    assert_eq!(log_slope_divergence_test_infinite(&f, 1.0).unwrap(), Integrability::Convergent);
    let f = Integrand::new(|t: f64| 1.0 / (t * t.ln()));
    assert_eq!(log_slope_divergence_test_infinite(&f, 2.0).unwrap(), Integrability::Divergent);
}
