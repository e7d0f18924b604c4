//! Space-form Jacobians against the model Laplacian and the comparison bracket.

use approx::assert_relative_eq;
use hardylab::model_geometry::{jacobian_bounds, tube_integral, DomainKind, DomainSpec, ModelGeometry};
use hardylab::quadrature::QuadOptions;
use hardylab::*;
use proptest::prelude::*;

const MODELS: [(usize, usize, f64, f64); 5] =
    [(3, 0, 0.0, 0.0), (5, 2, 0.0, 0.5), (2, 1, 1.0, 0.0), (4, 1, -1.0, 0.5), (3, 2, -1.0, 0.0)];

proptest! {
    #[test]
    fn log_jacobian_derivative_is_g(model in 0usize..5, frac in 0.02f64..0.98) {
        let (m, n, lam, kap) = MODELS[model];
        let geom = ModelGeometry::space_form(m, n, lam, kap).unwrap();
        let end = geom.t_end().finite().unwrap_or(4.0).min(4.0);
        let t = frac * end;
        let h = 1e-5 * t;
        let fd = (geom.ln_jacobian(t + h) - geom.ln_jacobian(t - h)) / (2.0 * h);
        let g = GProfile::new(m, n, geom.pair()).unwrap().eval(t).unwrap();
        prop_assert!((fd - g).abs() <= 1e-6 * (1.0 + g.abs()));
        prop_assert!((geom.log_jacobian_derivative(t).unwrap() - g).abs() <= 1e-12 * (1.0 + g.abs()));
    }

    #[test]
    fn matched_bracket_is_equality(model in 0usize..5, frac in 0.02f64..0.98) {
        let (m, n, lam, kap) = MODELS[model];
        let geom = ModelGeometry::space_form(m, n, lam, kap).unwrap();
        let t = frac * geom.t_end().finite().unwrap_or(4.0).min(4.0);
        let (lo, hi) = jacobian_bounds(&geom, geom.pair(), geom.pair(), t).unwrap();
        let j = geom.radial_jacobian(t).unwrap();
        prop_assert_eq!(lo, j);
        prop_assert_eq!(hi, j);
    }

    #[test]
    fn bracket_is_ordered(dl in 0.0f64..1.0, dk in 0.0f64..1.0, frac in 0.02f64..0.98) {
        let geom = ModelGeometry::space_form(4, 1, -1.0, 0.0).unwrap();
        let low = CurvaturePair::new(-1.0, 0.0).unwrap();
        let up = CurvaturePair::new(-1.0 + dl, dk).unwrap();
        let end = t_lambda_kappa(4, 1, up).unwrap().finite().unwrap_or(3.0).min(3.0);
        let (lo, hi) = jacobian_bounds(&geom, low, up, frac * end).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-14));
    }

    #[test]
    fn ln_jacobian_matches_direct(model in 0usize..5, frac in 0.02f64..0.98) {
        let (m, n, lam, kap) = MODELS[model];
        let geom = ModelGeometry::space_form(m, n, lam, kap).unwrap();
        let t = frac * geom.t_end().finite().unwrap_or(4.0).min(4.0);
        let direct = geom.radial_jacobian(t).unwrap().ln();
        prop_assert!((geom.ln_jacobian(t) - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
    }
}

#[test]
fn hyperbolic_jacobian_stays_finite_in_log_space() {
    let geom = ModelGeometry::space_form(3, 0, -1.0, 0.0).unwrap();
    let l = geom.ln_jacobian(2000.0);
    assert_relative_eq!(l, 2.0 * (2000.0 - 2.0f64.ln()), max_relative = 1e-12);
}

#[test]
fn ball_volume_from_tube_integral() {
    // volume of the unit ball in R^3
    let geom = ModelGeometry::space_form(3, 0, 0.0, 0.0).unwrap();
    let dom = DomainSpec::new(DomainKind::Tube, 0.0, ExtReal::Finite(1.0));
    let tube = tube_integral(&geom, &dom, &|_| 1.0, &QuadOptions::default()).unwrap();
    assert_relative_eq!(tube.value(), 1.0 / 3.0, max_relative = 1e-10);
    assert_relative_eq!(tube.value() * tube.factor.numeric(), 4.0 * std::f64::consts::PI / 3.0, max_relative = 1e-10);
}
