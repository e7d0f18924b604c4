//! Built-in scenarios for the classical model examples.

use std::f64::consts::{FRAC_PI_2, PI};

use hardylab::model_geometry::{ConditionDirection, DomainKind};
use hardylab::{ExtReal, QuotientForm, SplineConstraint};

use crate::config::{
    Action, ConditionConfig, DomainConfig, GeometryConfig, ImprovedConfig, MinimizeConfig, OracleConfig, PairConfig,
    ScenarioConfig, SweepConfig, SweepVariant, Theorem, VerifyConfig,
};

/// Names accepted by `--preset`.
pub const PRESET_NAMES: [&str; 6] = [
    "euclidean-point",
    "sphere-hemisphere",
    "hyperbolic-point",
    "exterior-ball",
    "sphere-great-sphere",
    "cylinder-counterexample",
];

/// Scenarios of a named preset, or `None` for an unknown name.
pub fn preset(name: &str) -> Option<Vec<ScenarioConfig>> {
    let list = match name {
        "euclidean-point" => vec![euclidean_point()],
        "sphere-hemisphere" => vec![sphere_hemisphere()],
        "hyperbolic-point" => hyperbolic_point(),
        "exterior-ball" => vec![exterior_ball()],
        "sphere-great-sphere" => sphere_great_sphere(),
        "cylinder-counterexample" => vec![cylinder_counterexample()],
        _ => return None,
    };
    Some(list)
}

/// Every preset in declaration order.
pub fn all_presets() -> Vec<ScenarioConfig> {
    PRESET_NAMES.iter().flat_map(|n| preset(n).expect("known preset")).collect()
}

fn base(name: &str, theorems: Vec<Theorem>, geometry: GeometryConfig, domain: DomainConfig, pair: PairConfig) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        theorems,
        actions: Action::ALL.to_vec(),
        p: 2.0,
        form: QuotientForm::General,
        seed: 5,
        sharp_constant_scale: 1.0,
        expect_audit_failure: Vec::new(),
        geometry,
        domain,
        condition: None,
        pair,
        verify: VerifyConfig::default(),
        sweep: SweepConfig::default(),
        minimize: MinimizeConfig::default(),
        oracle: OracleConfig::default(),
        improved: None,
    }
}

fn geometry(m: usize, n: usize, lambda: f64, kappa: f64) -> GeometryConfig {
    GeometryConfig { m, n, lambda, kappa }
}

fn domain(kind: DomainKind, t_max: ExtReal<f64>) -> DomainConfig {
    DomainConfig {
        kind,
        t_min: 0.0,
        t_max,
        t_max_attained: false,
        one_sided: false,
    }
}

fn power(big_lambda: f64, big_k: f64, beta: f64) -> PairConfig {
    PairConfig::Power { big_lambda, big_k, beta }
}

fn condition(direction: ConditionDirection) -> Option<ConditionConfig> {
    Some(ConditionConfig {
        direction,
        lambda: None,
        kappa: None,
    })
}

/// `R³` around a point with `|x|^{-2}` weights.
fn euclidean_point() -> ScenarioConfig {
    base(
        "euclidean-point",
        vec![Theorem::T3_4, Theorem::T4_4],
        geometry(3, 0, 0.0, 0.0),
        domain(DomainKind::Punctured, ExtReal::PosInf),
        power(0.0, 0.0, -2.0),
    )
}

/// Upper hemisphere of `S²` with its boundary circle.
fn sphere_hemisphere() -> ScenarioConfig {
    let mut s = base(
        "sphere-hemisphere",
        vec![Theorem::T3_4],
        geometry(2, 1, 1.0, 0.0),
        DomainConfig {
            t_max_attained: true,
            one_sided: true,
            ..domain(DomainKind::HemisphereBoundary, ExtReal::Finite(FRAC_PI_2))
        },
        power(0.0, 0.0, -2.0),
    );
    s.form = QuotientForm::Theorem;
    s.sweep.variant = SweepVariant::Decreasing;
    s.minimize.constraint = SplineConstraint::VanishAtSigma;
    s
}

/// `H³` around a point: hyperbolic weights, and the boundary family at `β = 0`.
fn hyperbolic_point() -> Vec<ScenarioConfig> {
    let mut s = base(
        "hyperbolic-point",
        vec![Theorem::T5_2],
        geometry(3, 0, -1.0, 0.0),
        domain(DomainKind::FullSpace, ExtReal::PosInf),
        power(-1.0, 0.0, -2.0),
    );
    s.form = QuotientForm::Theorem;
    s.condition = condition(ConditionDirection::Upper);
    let mut t = s.clone();
    t.name = "hyperbolic-point-boundary-family".to_string();
    t.pair = power(-1.0, 0.0, 0.0);
    t.sweep.variant = SweepVariant::Truncated;
    t.sweep.epsilons = vec![1e-1, 1e-2, 1e-3, 1e-4];
    t.sweep.iota = 1.0;
    vec![s, t]
}

/// `R³` outside the closed unit ball, distance measured from the unit sphere.
fn exterior_ball() -> ScenarioConfig {
    let mut s = base(
        "exterior-ball",
        vec![Theorem::T5_2],
        geometry(3, 2, 0.0, -1.0),
        DomainConfig {
            one_sided: true,
            ..domain(DomainKind::Exterior, ExtReal::PosInf)
        },
        power(0.0, -1.0, 0.0),
    );
    s.form = QuotientForm::Theorem;
    s.condition = condition(ConditionDirection::Upper);
    s
}

/// `S²` around a great circle, three comparison curvatures below the model one.
fn sphere_great_sphere() -> Vec<ScenarioConfig> {
    [("0.25", 0.25), ("0", 0.0), ("-1", -1.0)]
        .into_iter()
        .map(|(tag, big_lambda)| {
            let mut s = base(
                &format!("sphere-great-sphere-lambda-{tag}"),
                vec![Theorem::T6_3],
                geometry(2, 1, 1.0, 0.0),
                DomainConfig {
                    t_max_attained: true,
                    ..domain(DomainKind::Punctured, ExtReal::Finite(FRAC_PI_2))
                },
                power(big_lambda, 0.0, -2.0),
            );
            s.form = QuotientForm::Theorem;
            s.condition = condition(ConditionDirection::Lower);
            s.sweep.variant = SweepVariant::Decreasing;
            s.minimize.constraint = SplineConstraint::VanishAtSigma;
            s
        })
        .collect()
}

/// `R × S¹` around `R × {0}`: the logarithmic weights fail local integrability at `r = π`.
fn cylinder_counterexample() -> ScenarioConfig {
    let mut s = base(
        "cylinder-counterexample",
        vec![Theorem::T5_10],
        geometry(2, 1, 0.0, 0.0),
        DomainConfig {
            t_max_attained: true,
            ..domain(DomainKind::Tube, ExtReal::Finite(PI))
        },
        PairConfig::LogGlobal {
            big_lambda: 0.0,
            big_k: 0.0,
            s1: -2.0,
            s2: -1.0,
            d: PI,
            s: None,
        },
    );
    s.actions = vec![Action::Audit];
    s.condition = condition(ConditionDirection::Upper);
    s.expect_audit_failure = vec!["local_integrability".to_string()];
    s
}

/// Template for the improved inequality on a ball, used by the schema example.
pub fn improved_ball() -> ScenarioConfig {
    let mut s = base(
        "improved-ball",
        vec![Theorem::R5_6],
        geometry(3, 0, 0.0, 0.0),
        domain(DomainKind::Tube, ExtReal::Finite(1.0)),
        power(0.0, 0.0, -1.0),
    );
    s.actions = vec![Action::Audit, Action::Verify];
    s.form = QuotientForm::Theorem;
    s.condition = condition(ConditionDirection::Upper);
    s.improved = Some(ImprovedConfig { d: 2.0, tau: 2.0 });
    s
}
