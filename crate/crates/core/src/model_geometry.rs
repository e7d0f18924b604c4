//! Model triples `(M, Σ, Ω)`: space forms with a totally geodesic or umbilical
//! submanifold `Σ`, the exact radial Jacobian of the distance `r = d(·, Σ)`, the
//! comparison bracket for it, and the reduction of tube integrals to one dimension.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::comparison_kernel::{t_lambda_kappa, CurvaturePair, GProfile};
use crate::error::{HardyError, Result};
use crate::ext_real::ExtReal;
use crate::quadrature::{integrate_with, Integrand, QuadOptions, QuadResult};

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied radial Jacobian with trusted curvature bounds.
#[derive(Clone)]
pub struct CustomJacobian {
    pub det: RadialFn,
    pub log_derivative: RadialFn,
    /// Lower curvature pair `(λ_low, κ_low)`.
    pub lower: CurvaturePair<f64>,
    /// Upper curvature pair `(λ_high, κ_high)`.
    pub upper: CurvaturePair<f64>,
    /// End of the interval on which `det` is positive.
    pub t_end: ExtReal<f64>,
}

impl fmt::Debug for CustomJacobian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomJacobian")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("t_end", &self.t_end)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum JacobianKind {
    ExactSpaceForm,
    Custom(CustomJacobian),
}

/// Ambient dimension `m`, submanifold dimension `n`, curvature `λ`, and umbilical
/// mean-curvature parameter `κ` (zero for totally geodesic `Σ`).
#[derive(Debug, Clone)]
pub struct ModelGeometry {
    pub m: usize,
    pub n: usize,
    pub lambda: f64,
    pub kappa: f64,
    pub jacobian: JacobianKind,
}

/// `(c_λ − κ s_λ)ⁿ s_λ^{m−n−1}`.
pub fn space_form_jacobian(m: usize, n: usize, pair: CurvaturePair<f64>, t: f64) -> f64 {
    let s = pair.basis().s(t);
    let h = pair.h(t);
    h.powi(n as i32) * s.powi((m - n - 1) as i32)
}

impl ModelGeometry {
    /// Space form of curvature `λ` with an umbilical `Σ` of mean-curvature parameter `κ`.
    pub fn space_form(m: usize, n: usize, lambda: f64, kappa: f64) -> Result<Self> {
        let pair = CurvaturePair::new(lambda, kappa)?;
        t_lambda_kappa(m, n, pair)?;
        Ok(Self {
            m,
            n,
            lambda,
            kappa,
            jacobian: JacobianKind::ExactSpaceForm,
        })
    }

    /// Radial model with a user-supplied Jacobian. The bounds are trusted, not verified.
    pub fn custom(m: usize, n: usize, jac: CustomJacobian) -> Result<Self> {
        t_lambda_kappa(m, n, jac.lower)?;
        if !jac.lower.le(&jac.upper) {
            return Err(HardyError::config(format!(
                "custom Jacobian bounds not ordered: {} is not <= {}",
                jac.lower, jac.upper
            )));
        }
        Ok(Self {
            m,
            n,
            lambda: jac.lower.lambda,
            kappa: jac.lower.kappa,
            jacobian: JacobianKind::Custom(jac),
        })
    }

    pub fn pair(&self) -> CurvaturePair<f64> {
        CurvaturePair {
            lambda: self.lambda,
            kappa: self.kappa,
        }
    }

    /// `𝔱_{λ,κ}` for exact models, the declared end for custom ones.
    pub fn t_end(&self) -> ExtReal<f64> {
        match &self.jacobian {
            JacobianKind::ExactSpaceForm => {
                t_lambda_kappa(self.m, self.n, self.pair()).expect("dimensions validated at construction")
            }
            JacobianKind::Custom(c) => c.t_end,
        }
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && self.t_end().exceeds(t)) {
            return Err(HardyError::domain(format!(
                "t = {t} outside (0, {}) for the radial Jacobian",
                self.t_end()
            )));
        }
        Ok(())
    }

    /// `detA(t)` without the domain check; may be zero or negative past `𝔱_{λ,κ}`.
    pub fn jacobian_unchecked(&self, t: f64) -> f64 {
        match &self.jacobian {
            JacobianKind::ExactSpaceForm => space_form_jacobian(self.m, self.n, self.pair(), t),
            JacobianKind::Custom(c) => (c.det)(t),
        }
    }

    /// `log detA(t)`, finite for large hyperbolic radii.
    pub fn ln_jacobian(&self, t: f64) -> f64 {
        match &self.jacobian {
            JacobianKind::ExactSpaceForm => {
                let pair = self.pair();
                let lh = if self.n == 0 { 0.0 } else { self.n as f64 * pair.ln_h(t) };
                lh + (self.m - self.n - 1) as f64 * pair.basis().ln_s(t)
            }
            JacobianKind::Custom(c) => (c.det)(t).ln(),
        }
    }

    /// `(log detA)'(t)`; equals `G_{λ,κ}(t)` for exact models.
    pub fn log_jacobian_derivative(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(match &self.jacobian {
            JacobianKind::ExactSpaceForm => GProfile::new(self.m, self.n, self.pair())?.eval_unchecked(t),
            JacobianKind::Custom(c) => (c.log_derivative)(t),
        })
    }

    /// Radial Jacobian `detA(t)` on `(0, 𝔱_{λ,κ})`.
    pub fn radial_jacobian(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.jacobian_unchecked(t))
    }

    /// Curvature bounds: the model's own pair for exact space forms.
    pub fn curvature_bounds(&self) -> (CurvaturePair<f64>, CurvaturePair<f64>) {
        match &self.jacobian {
            JacobianKind::ExactSpaceForm => (self.pair(), self.pair()),
            JacobianKind::Custom(c) => (c.lower, c.upper),
        }
    }
}

/// `radial_jacobian` as a free function.
pub fn radial_jacobian(geom: &ModelGeometry, t: f64) -> Result<f64> {
    geom.radial_jacobian(t)
}

/// Comparison bracket for `detA(t)` when the curvature lies between `lower` and `upper`.
///
/// The lower end is the space-form Jacobian of `upper` and the upper end is that of
/// `lower`, since `G` decreases in both curvature parameters and `detA ~ t^{m−n−1}`.
pub fn jacobian_bounds(
    geom: &ModelGeometry,
    lower: CurvaturePair<f64>,
    upper: CurvaturePair<f64>,
    t: f64,
) -> Result<(f64, f64)> {
    if !lower.le(&upper) {
        return Err(HardyError::config(format!("bounds not ordered: {lower} is not <= {upper}")));
    }
    let t_up = t_lambda_kappa(geom.m, geom.n, upper)?;
    if !(t > 0.0 && t_up.exceeds(t)) {
        return Err(HardyError::domain(format!(
            "t = {t} outside (0, {t_up}), the validity interval of the upper bound {upper}"
        )));
    }
    Ok((
        space_form_jacobian(geom.m, geom.n, upper, t),
        space_form_jacobian(geom.m, geom.n, lower, t),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// `Ω = M`, the radial coordinate covers everything.
    FullSpace,
    /// `Ω_Σ = Ω \ Σ` with `Σ` interior.
    Punctured,
    /// Tube `T_D` around `Σ`, possibly one-sided.
    Tube,
    /// `Σ = ∂Ω` with `n = m − 1`.
    HemisphereBoundary,
    /// Complement of a closed tube.
    Exterior,
}

/// Radial extent of `Ω` in the distance coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub t_min: f64,
    pub t_max: ExtReal<f64>,
    /// Whether `r = t_max` is attained inside `Ω` (a focal point such as a pole).
    #[serde(default)]
    pub t_max_attained: bool,
    /// For a hypersurface `Σ`, whether only one normal side lies in `Ω`.
    #[serde(default)]
    pub one_sided: bool,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, t_min: f64, t_max: ExtReal<f64>) -> Self {
        Self {
            kind,
            t_min,
            t_max,
            t_max_attained: false,
            one_sided: false,
        }
    }

    pub fn attained(mut self, yes: bool) -> Self {
        self.t_max_attained = yes;
        self
    }

    pub fn one_sided(mut self, yes: bool) -> Self {
        self.one_sided = yes;
        self
    }

    pub fn validate(&self, geom: &ModelGeometry) -> Result<()> {
        if !(self.t_min >= 0.0 && ExtReal::Finite(self.t_min) < self.t_max) {
            return Err(HardyError::config(format!(
                "domain needs 0 <= t_min < t_max, got ({}, {})",
                self.t_min, self.t_max
            )));
        }
        if self.t_max > geom.t_end() {
            return Err(HardyError::config(format!(
                "t_max = {} exceeds the focal distance {}",
                self.t_max,
                geom.t_end()
            )));
        }
        if self.kind == DomainKind::HemisphereBoundary && geom.n + 1 != geom.m {
            return Err(HardyError::config("a boundary domain requires n = m - 1"));
        }
        if self.one_sided && geom.n + 1 != geom.m {
            return Err(HardyError::config("one-sided domains require a hypersurface (n = m - 1)"));
        }
        Ok(())
    }

    /// Whether `t` lies in the open radial interval.
    pub fn contains(&self, t: f64) -> bool {
        t > self.t_min && self.t_max.exceeds(t)
    }
}

/// `vol(𝕊^k)`.
pub fn sphere_volume(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_volume(k - 2),
    }
}

/// Constant factor dropped by the one-dimensional reduction:
/// `vol(𝕊^{m−n−1}) · vol(Σ)`, halved for one-sided hypersurface domains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransverseFactor {
    pub sphere_dim: usize,
    pub sphere_volume: f64,
    /// `vol(Σ)` is left symbolic; `Σ` is a point when `n = 0`.
    pub includes_sigma_volume: bool,
    pub one_sided_half: bool,
}

impl TransverseFactor {
    pub fn for_domain(geom: &ModelGeometry, dom: &DomainSpec) -> Self {
        let k = geom.m - geom.n - 1;
        Self {
            sphere_dim: k,
            sphere_volume: sphere_volume(k),
            includes_sigma_volume: geom.n > 0,
            one_sided_half: dom.one_sided,
        }
    }

    /// Numeric part of the factor.
    pub fn numeric(&self) -> f64 {
        self.sphere_volume * if self.one_sided_half { 0.5 } else { 1.0 }
    }
}

/// A reduced tube integral `∫ f detA dt` with its transverse factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TubeIntegral {
    pub quad: QuadResult,
    pub factor: TransverseFactor,
}

impl TubeIntegral {
    pub fn value(&self) -> f64 {
        self.quad.value
    }
}

/// `∫_{t_min}^{t_max} f(t) detA(t) dt`, reported without the transverse factor.
pub fn tube_integral(
    geom: &ModelGeometry,
    dom: &DomainSpec,
    f: &(dyn Fn(f64) -> f64 + Sync),
    opts: &QuadOptions,
) -> Result<TubeIntegral> {
    dom.validate(geom)?;
    let integrand = Integrand::new(|t: f64| {
        let v = f(t);
        if v == 0.0 {
            0.0
        } else {
            v * geom.jacobian_unchecked(t)
        }
    });
    let quad = integrate_with(&integrand, dom.t_min, dom.t_max, opts)?.require_converged("tube integral")?;
    Ok(TubeIntegral {
        quad,
        factor: TransverseFactor::for_domain(geom, dom),
    })
}

/// Direction of a curvature condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionDirection {
    /// The model curvature is bounded above by `(λ, κ)`.
    Upper,
    /// The model curvature is bounded below by `(λ, κ)`.
    Lower,
}

/// Curvature bound `(λ, κ)` of the model together with the comparison pair `(Λ, K)`
/// used to build the weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureCondition {
    pub direction: ConditionDirection,
    pub pair: CurvaturePair<f64>,
    pub comparison: CurvaturePair<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseResult {
    pub clause: String,
    pub passed: bool,
    pub detail: String,
}

/// Clause-by-clause check of a curvature condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub direction: ConditionDirection,
    pub clauses: Vec<ClauseResult>,
    /// Relaxed hypotheses that hold although the strict one fails.
    pub relaxations: Vec<ClauseResult>,
    pub passed: bool,
}

impl ConditionReport {
    pub fn violated(&self) -> Vec<&str> {
        self.clauses.iter().filter(|c| !c.passed).map(|c| c.clause.as_str()).collect()
    }
}

fn clause(name: &str, passed: bool, detail: String) -> ClauseResult {
    ClauseResult {
        clause: name.to_string(),
        passed,
        detail,
    }
}

/// Audits the admissibility of `(Λ, K)` against the curvature bound `(λ, κ)`.
pub fn validate_condition(cond: &CurvatureCondition, m: usize, n: usize) -> ConditionReport {
    let (l, kap) = (cond.pair.lambda, cond.pair.kappa);
    let (bl, bk) = (cond.comparison.lambda, cond.comparison.kappa);
    let mut clauses = Vec::new();
    let mut relaxations = Vec::new();
    let dims_ok = m >= 2 && n < m;
    clauses.push(clause("dimensions", dims_ok, format!("m = {m}, n = {n}")));
    let middle = n >= 1 && n + 2 <= m;
    match cond.direction {
        ConditionDirection::Upper => {
            clauses.push(clause(
                "(λ,κ) ≤ (Λ,K)",
                cond.pair.le(&cond.comparison),
                format!("{} vs {}", cond.pair, cond.comparison),
            ));
            let case_i = bl <= 0.0 && bk <= 0.0;
            let case_ii = bl <= 0.0 && bk >= 0.0 && bk * bk <= -bl;
            clauses.push(clause(
                "(Λ,K) ≤ (0,0) or [Λ ≤ 0, K ≥ 0, K² ≤ −Λ]",
                case_i || case_ii,
                format!("Λ = {bl}, K = {bk}"),
            ));
            if middle {
                clauses.push(clause("κ ≥ 0 when 1 ≤ n ≤ m−2", kap >= 0.0, format!("κ = {kap}")));
            }
        }
        ConditionDirection::Lower => {
            let kmin = kap.min(0.0);
            clauses.push(clause(
                "(Λ,K) ≤ (λ, min{κ,0})",
                bl <= l && bk <= kmin,
                format!("({bl}, {bk}) vs ({l}, {kmin})"),
            ));
            let strict = !(l > 0.0) || bl < l / 4.0;
            clauses.push(clause("Λ < λ/4 if λ > 0", strict, format!("Λ = {bl}, λ/4 = {}", l / 4.0)));
            if !strict && l > 0.0 && n > 0 {
                if bl <= l / 4.0 {
                    relaxations.push(clause("Λ ≤ λ/4 (n > 0)", true, format!("Λ = {bl}")));
                }
                if kap == 0.0 && bl < l {
                    relaxations.push(clause("Λ < λ (n > 0, κ = 0)", true, format!("Λ = {bl}, λ = {l}")));
                }
            }
            if middle {
                clauses.push(clause("κ ≤ 0 when 1 ≤ n ≤ m−2", kap <= 0.0, format!("κ = {kap}")));
            }
        }
    }
    let strict_pass = clauses.iter().all(|c| c.passed);
    let relaxed_pass = !strict_pass
        && !relaxations.is_empty()
        && clauses.iter().filter(|c| !c.passed).all(|c| c.clause == "Λ < λ/4 if λ > 0");
    ConditionReport {
        direction: cond.direction,
        passed: strict_pass || relaxed_pass,
        clauses,
        relaxations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pair(l: f64, k: f64) -> CurvaturePair<f64> {
        CurvaturePair::new(l, k).unwrap()
    }

    #[test]
    fn jacobian_examples() {
        let g = ModelGeometry::space_form(3, 0, 0.0, 0.0).unwrap();
        assert_relative_eq!(g.radial_jacobian(2.0).unwrap(), 4.0);
        let h = ModelGeometry::space_form(2, 1, 1.0, 0.0).unwrap();
        assert_relative_eq!(h.radial_jacobian(PI / 3.0).unwrap(), 0.5, epsilon = 1e-15);
        let k = ModelGeometry::space_form(4, 1, -1.0, 0.0).unwrap();
        assert_relative_eq!(k.radial_jacobian(1.0).unwrap(), 2.1311453402406305, max_relative = 1e-14);
        assert!(h.radial_jacobian(PI / 2.0).is_err());
    }

    #[test]
    fn bounds_examples() {
        let g = ModelGeometry::space_form(3, 0, 0.0, 0.0).unwrap();
        let (lo, hi) = jacobian_bounds(&g, pair(-1.0, 0.0), pair(1.0, 0.0), 1.0).unwrap();
        assert_relative_eq!(lo, 1f64.sin().powi(2));
        assert_relative_eq!(hi, 1f64.sinh().powi(2));
        let h = ModelGeometry::space_form(2, 1, 1.0, 0.0).unwrap();
        let (lo, hi) = jacobian_bounds(&h, pair(0.0, -1.0), pair(1.0, 0.0), 0.5).unwrap();
        assert!(lo <= 0.5f64.cos() && 0.5f64.cos() <= hi);
        assert_relative_eq!(hi, 1.5);
        let (a, b) = jacobian_bounds(&h, h.pair(), h.pair(), 0.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tube_integral_examples() {
        let opts = QuadOptions::default();
        let g = ModelGeometry::space_form(3, 0, 0.0, 0.0).unwrap();
        let dom = DomainSpec::new(DomainKind::Punctured, 0.0, ExtReal::Finite(1.0));
        assert_relative_eq!(tube_integral(&g, &dom, &|_| 1.0, &opts).unwrap().value(), 1.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(tube_integral(&g, &dom, &|t| 1.0 / t, &opts).unwrap().value(), 0.5, max_relative = 1e-12);
        let h = ModelGeometry::space_form(2, 1, 1.0, 0.0).unwrap();
        let hemi = DomainSpec::new(DomainKind::HemisphereBoundary, 0.0, ExtReal::Finite(PI / 2.0))
            .attained(true)
            .one_sided(true);
        let r = tube_integral(&h, &hemi, &|_| 1.0, &opts).unwrap();
        assert_relative_eq!(r.value(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.factor.numeric(), 1.0);
    }

    #[test]
    fn sphere_volumes() {
        assert_relative_eq!(sphere_volume(2), 4.0 * PI);
        assert_relative_eq!(sphere_volume(3), 2.0 * PI * PI);
    }

    #[test]
    fn condition_examples() {
        let cond = |d, l, k, bl, bk| CurvatureCondition {
            direction: d,
            pair: pair(l, k),
            comparison: pair(bl, bk),
        };
        assert!(validate_condition(&cond(ConditionDirection::Lower, 1.0, 0.0, 0.0, 0.0), 3, 0).passed);
        let up = validate_condition(&cond(ConditionDirection::Upper, 0.0, 0.0, 1.0, 0.0), 3, 0);
        assert!(!up.passed);
        assert_eq!(up.violated(), vec!["(Λ,K) ≤ (0,0) or [Λ ≤ 0, K ≥ 0, K² ≤ −Λ]"]);
        let low = validate_condition(&cond(ConditionDirection::Lower, 1.0, 0.0, 0.3, 0.0), 3, 0);
        assert!(!low.passed);
        assert_eq!(low.violated(), vec!["Λ < λ/4 if λ > 0"]);
        let relaxed = validate_condition(&cond(ConditionDirection::Lower, 1.0, 0.0, 0.25, 0.0), 3, 2);
        assert!(relaxed.passed && relaxed.relaxations.len() == 2);
        let case_ii = validate_condition(&cond(ConditionDirection::Upper, -1.0, 0.5, -1.0, 1.0), 3, 2);
        assert!(case_ii.passed);
    }
}
