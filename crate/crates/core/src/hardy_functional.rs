//! Hardy numerators, denominators and Rayleigh quotients of radial test functions.
//!
//! Every quotient is computed in the reduced form
//! `∫|u'|^p w_num detA dt / ∫|u|^p w_den detA dt` and compared with either the
//! general constant `p^{−p}` or the pulled-out constant of the theorem form. The
//! module also builds the almost-extremal families `ν_ε`, the truncated boundary
//! family, spline-space minimizers, and a randomized bump oracle.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::ext_real::ExtReal;
use crate::model_geometry::{DomainSpec, ModelGeometry};
use crate::quadrature::{
    gauss_legendre, integrate_with, log_slope_divergence_test, log_slope_divergence_test_infinite,
    log_slope_divergence_test_right, Integrability, Integrand, QuadOptions, QuadResult,
};
use crate::weight_pairs::{make_power_pair, PairParams, WeightPair};

/// Default `ε` schedule for sharpness sweeps.
pub const DEFAULT_EPSILONS: [f64; 8] = [0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001];

/// Knot grading ratio toward the singular end.
pub const KNOT_RATIO: f64 = 0.7;

/// Multiplier turning quadrature error estimates into a verdict slack.
pub const SLACK_FACTOR: f64 = 10.0;

/// Shape of an almost-extremal profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuVariant {
    /// `(ψ/ψ(s₀))^{c(ε)}` inside `s₀`, `(ψ/ψ(s₀))^{−c(ε/2)}` outside.
    Increasing,
    /// `(ψ/ψ(s₀))^{−c(ε/2)}` inside `s₀`, `(ψ/ψ(s₀))^{c(ε)}` outside.
    Decreasing,
    /// `η·v_ε` with `v_ε` constant below `ε` and `ψ^{−1/p}` above.
    TruncatedBoundary,
}

/// Parameters of a `ν_ε` profile. For the truncated variant `s0` is the cutoff
/// radius `ι`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuEpsilon {
    pub variant: NuVariant,
    pub epsilon: f64,
    pub s0: f64,
}

impl NuEpsilon {
    /// `c(ε) = (1+ε)/p`.
    pub fn c_of(epsilon: f64, p: f64) -> f64 {
        (1.0 + epsilon) / p
    }

    /// Upper end `c(ε)^p` of the quotient bracket.
    pub fn bracket_upper(&self, p: f64) -> f64 {
        Self::c_of(self.epsilon, p).powf(p)
    }
}

/// Smooth bump `A·exp(1 − 1/(1 − x²))`, `x = (t − center)/half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: f64,
}

impl Bump {
    fn x(&self, t: f64) -> Option<f64> {
        let x = (t - self.center) / self.half_width;
        (x.abs() < 1.0).then_some(x)
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.x(t) {
            Some(x) => self.amplitude * (1.0 - 1.0 / (1.0 - x * x)).exp(),
            None => 0.0,
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match self.x(t) {
            Some(x) => {
                let q = 1.0 - x * x;
                self.value(t) * (-2.0 * x / (q * q)) / self.half_width
            }
            None => 0.0,
        }
    }
}

/// Clamped cubic B-spline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spline {
    pub knots: Vec<f64>,
    pub coeffs: Vec<f64>,
}

const DEGREE: usize = 3;

impl Spline {
    fn span(&self, t: f64) -> usize {
        span_of(&self.knots, t)
    }

    pub fn value(&self, t: f64) -> f64 {
        let (a, b) = (self.knots[0], self.knots[self.knots.len() - 1]);
        if t < a || t > b {
            return 0.0;
        }
        let span = self.span(t);
        let (n, _) = basis_ders(&self.knots, span, t);
        (0..=DEGREE).map(|r| self.coeffs[span - DEGREE + r] * n[r]).sum()
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let (a, b) = (self.knots[0], self.knots[self.knots.len() - 1]);
        if t < a || t > b {
            return 0.0;
        }
        let span = self.span(t);
        let (_, d) = basis_ders(&self.knots, span, t);
        (0..=DEGREE).map(|r| self.coeffs[span - DEGREE + r] * d[r]).sum()
    }
}

/// Index `k` with `knots[k] ≤ t < knots[k+1]`, clamped to the last non-empty span.
fn span_of(knots: &[f64], t: f64) -> usize {
    let n = knots.len() - DEGREE - 1;
    if t >= knots[n] {
        return n - 1;
    }
    if t <= knots[DEGREE] {
        return DEGREE;
    }
    let (mut lo, mut hi) = (DEGREE, n);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if t < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Values and first derivatives of the four cubic basis functions active on `span`.
fn basis_ders(knots: &[f64], span: usize, t: f64) -> ([f64; 4], [f64; 4]) {
    let p = DEGREE;
    let mut ndu = [[0.0f64; 4]; 4];
    let mut left = [0.0f64; 4];
    let mut right = [0.0f64; 4];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let mut n = [0.0; 4];
    let mut d = [0.0; 4];
    for r in 0..=p {
        n[r] = ndu[r][p];
        let mut v = 0.0;
        if r >= 1 {
            v += ndu[r - 1][p - 1] / ndu[p][r - 1];
        }
        if r < p {
            v -= ndu[r][p - 1] / ndu[p][r];
        }
        d[r] = p as f64 * v;
    }
    (n, d)
}

/// Clamped knot vector on `[a, b]` with `dof − 4` interior knots at
/// `a + (b−a)·0.7^j`, `j = 1..dof−4`.
pub fn graded_knots(a: f64, b: f64, dof: usize) -> Result<Vec<f64>> {
    if dof < 4 {
        return Err(HardyError::config(format!("spline dimension {dof} must be at least 4")));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(HardyError::config(format!("spline support needs a < b, got [{a}, {b}]")));
    }
    let mut interior: Vec<f64> = (1..=dof - 4).map(|j| a + (b - a) * KNOT_RATIO.powi(j as i32)).collect();
    interior.reverse();
    let mut knots = vec![a; DEGREE + 1];
    knots.extend(interior);
    knots.extend(std::iter::repeat_n(b, DEGREE + 1));
    Ok(knots)
}

/// Closed-form profile data shared by `ν_ε` and the truncated family.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    pub pair: WeightPair,
    pub nu: NuEpsilon,
    /// `log ψ(s₀)`, or `log ψ(ε)` for the truncated variant.
    ln_anchor: f64,
}

impl ClosedForm {
    fn ln_psi(&self, t: f64) -> f64 {
        self.pair.ln_psi(t)
    }

    fn ln_value(&self, t: f64) -> f64 {
        match self.nu.variant {
            NuVariant::TruncatedBoundary => {
                let base = if t <= self.nu.epsilon { self.ln_anchor } else { self.ln_psi(t) };
                -base / self.pair.p() + cutoff(t, self.nu.s0).0.ln()
            }
            _ => self.exponent(t) * (self.ln_psi(t) - self.ln_anchor),
        }
    }

    fn ln_abs_deriv(&self, t: f64) -> f64 {
        match self.nu.variant {
            NuVariant::TruncatedBoundary => self.deriv(t).abs().ln(),
            _ => {
                let e = self.exponent(t);
                e.abs().ln() + e * (self.ln_psi(t) - self.ln_anchor) + self.pair.ln_abs_log_dpsi(t)
            }
        }
    }

    /// Exponent of `ψ/ψ(s₀)` at `t` for the two-sided variants.
    fn exponent(&self, t: f64) -> f64 {
        let p = self.pair.p();
        let inner = t < self.nu.s0;
        let (c_full, c_half) = (NuEpsilon::c_of(self.nu.epsilon, p), NuEpsilon::c_of(self.nu.epsilon / 2.0, p));
        match (self.nu.variant, inner) {
            (NuVariant::Increasing, true) | (NuVariant::Decreasing, false) => c_full,
            _ => -c_half,
        }
    }

    fn value(&self, t: f64) -> f64 {
        match self.nu.variant {
            NuVariant::TruncatedBoundary => {
                let p = self.pair.p();
                let v = if t <= self.nu.epsilon {
                    (-self.ln_anchor / p).exp()
                } else {
                    (-self.ln_psi(t) / p).exp()
                };
                v * cutoff(t, self.nu.s0).0
            }
            _ => (self.exponent(t) * (self.ln_psi(t) - self.ln_anchor)).exp(),
        }
    }

    fn deriv(&self, t: f64) -> f64 {
        match self.nu.variant {
            NuVariant::TruncatedBoundary => {
                let p = self.pair.p();
                let (eta, deta) = cutoff(t, self.nu.s0);
                if t <= self.nu.epsilon {
                    return (-self.ln_anchor / p).exp() * deta;
                }
                let v = (-self.ln_psi(t) / p).exp();
                let dv = -v * self.pair.log_dpsi(t) / p;
                eta * dv + deta * v
            }
            _ => {
                let e = self.exponent(t);
                e * (e * (self.ln_psi(t) - self.ln_anchor)).exp() * self.pair.log_dpsi(t)
            }
        }
    }
}

/// Smooth cutoff `η` equal to 1 on `[0, ι]` and 0 beyond `2ι`, with `η'`.
fn cutoff(t: f64, iota: f64) -> (f64, f64) {
    if t <= iota {
        return (1.0, 0.0);
    }
    if t >= 2.0 * iota {
        return (0.0, 0.0);
    }
    let x = (2.0 * iota - t) / iota;
    let f = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let df = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() / (x * x) };
    let (a, b) = (f(x), f(1.0 - x));
    let s = a / (a + b);
    let ds = (df(x) * b + a * df(1.0 - x)) / ((a + b) * (a + b));
    (s, -ds / iota)
}

/// Representation of a radial test function.
#[derive(Debug, Clone)]
pub enum Representation {
    ClosedForm(Box<ClosedForm>),
    BumpSum(Vec<Bump>),
    Spline(Spline),
}

/// A radial test function `u(t)` supported in `[a, b]`.
#[derive(Debug, Clone)]
pub struct RadialTestFunction {
    pub repr: Representation,
    support: (f64, ExtReal<f64>),
    kinks: Vec<f64>,
    scale: f64,
}

impl RadialTestFunction {
    /// Sum of smooth bumps; the support is the hull of the bump supports.
    pub fn bump_sum(bumps: Vec<Bump>) -> Result<Self> {
        if bumps.is_empty() {
            return Err(HardyError::config("a bump sum needs at least one bump"));
        }
        for b in &bumps {
            if !(b.half_width > 0.0 && b.center.is_finite() && b.amplitude.is_finite()) {
                return Err(HardyError::config(format!("invalid bump {b:?}")));
            }
        }
        let a = bumps.iter().map(|b| b.center - b.half_width).fold(f64::INFINITY, f64::min);
        let z = bumps.iter().map(|b| b.center + b.half_width).fold(f64::NEG_INFINITY, f64::max);
        if a < 0.0 {
            return Err(HardyError::config(format!("bump support starts at {a} < 0")));
        }
        let mut kinks: Vec<f64> = bumps
            .iter()
            .flat_map(|b| [b.center - b.half_width, b.center + b.half_width])
            .filter(|&k| k > a && k < z)
            .collect();
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();
        Ok(Self {
            repr: Representation::BumpSum(bumps),
            support: (a, ExtReal::Finite(z)),
            kinks,
            scale: 1.0,
        })
    }

    /// Clamped cubic spline with the given knot vector and coefficients.
    pub fn spline(knots: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 * (DEGREE + 1) || coeffs.len() + DEGREE + 1 != knots.len() {
            return Err(HardyError::config(format!(
                "{} knots do not match {} cubic coefficients",
                knots.len(),
                coeffs.len()
            )));
        }
        if knots.windows(2).any(|w| !(w[0] <= w[1])) || knots[0] < 0.0 {
            return Err(HardyError::config("knots must be non-negative and non-decreasing"));
        }
        let (a, b) = (knots[0], knots[knots.len() - 1]);
        if knots[..=DEGREE].iter().any(|&k| k != a) || knots[knots.len() - DEGREE - 1..].iter().any(|&k| k != b) {
            return Err(HardyError::config("knot vector must be clamped"));
        }
        let mut kinks: Vec<f64> = knots.iter().copied().filter(|&k| k > a && k < b).collect();
        kinks.dedup();
        Ok(Self {
            repr: Representation::Spline(Spline { knots, coeffs }),
            support: (a, ExtReal::Finite(b)),
            kinks,
            scale: 1.0,
        })
    }

    /// `c·u`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.scale *= c;
        out
    }

    pub fn support(&self) -> (f64, ExtReal<f64>) {
        self.support
    }

    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    fn inside(&self, t: f64) -> bool {
        t >= self.support.0 && self.support.1 >= ExtReal::Finite(t)
    }

    pub fn value(&self, t: f64) -> f64 {
        if !self.inside(t) {
            return 0.0;
        }
        self.scale
            * match &self.repr {
                Representation::ClosedForm(c) => c.value(t),
                Representation::BumpSum(b) => b.iter().map(|b| b.value(t)).sum(),
                Representation::Spline(s) => s.value(t),
            }
    }

    /// `log|u(t)|`; `−∞` outside the support.
    pub fn ln_abs_value(&self, t: f64) -> f64 {
        if !self.inside(t) {
            return f64::NEG_INFINITY;
        }
        match &self.repr {
            Representation::ClosedForm(c) => c.ln_value(t) + self.scale.abs().ln(),
            _ => self.value(t).abs().ln(),
        }
    }

    /// `log|u'(t)|`; `−∞` outside the support.
    pub fn ln_abs_deriv(&self, t: f64) -> f64 {
        if !self.inside(t) {
            return f64::NEG_INFINITY;
        }
        match &self.repr {
            Representation::ClosedForm(c) => c.ln_abs_deriv(t) + self.scale.abs().ln(),
            _ => self.deriv(t).abs().ln(),
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        if !self.inside(t) {
            return 0.0;
        }
        self.scale
            * match &self.repr {
                Representation::ClosedForm(c) => c.deriv(t),
                Representation::BumpSum(b) => b.iter().map(|b| b.deriv(t)).sum(),
                Representation::Spline(s) => s.deriv(t),
            }
    }
}

/// Which inequality the quotient is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientForm {
    /// Weights `w_num`, `w_den` and constant `p^{−p}`.
    #[default]
    General,
    /// Theorem weights with the pulled-out constant.
    Theorem,
}

/// Outcome of a lower-bound check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Verified,
    Violated,
    Inconclusive,
}

/// Options for [`hardy_eval_with`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    pub form: QuotientForm,
    pub quad: QuadOptions,
    pub scenario: String,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            form: QuotientForm::General,
            quad: QuadOptions {
                atol: 0.0,
                rtol: 1e-10,
                ..QuadOptions::default()
            },
            scenario: String::new(),
        }
    }
}

impl EvalOptions {
    pub fn theorem() -> Self {
        Self {
            form: QuotientForm::Theorem,
            ..Self::default()
        }
    }

    pub fn scenario(mut self, id: impl Into<String>) -> Self {
        self.scenario = id.into();
        self
    }
}

/// Numerator, denominator and verdict of one quotient evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct HardyReport {
    pub numerator: QuadResult,
    pub denominator: QuadResult,
    pub quotient: f64,
    pub sharp_constant: f64,
    pub bracket_upper: Option<f64>,
    pub slack: f64,
    pub verdict: Verdict,
    pub scenario: String,
}

impl HardyReport {
    /// `quotient/sharp_constant − 1`.
    pub fn relative_gap(&self) -> f64 {
        self.quotient / self.sharp_constant - 1.0
    }
}

fn combined_slack(a: &QuadResult, b: &QuadResult) -> f64 {
    SLACK_FACTOR * (a.rel_error() + b.rel_error())
}

fn check_p(pair: &WeightPair, p: f64) -> Result<()> {
    if (pair.p() - p).abs() > 1e-12 * p {
        return Err(HardyError::config(format!("p = {p} differs from the pair exponent {}", pair.p())));
    }
    Ok(())
}

fn check_geometry(pair: &WeightPair, geom: &ModelGeometry, dom: &DomainSpec) -> Result<()> {
    dom.validate(geom)?;
    if pair.m() != geom.m || pair.n() != geom.n {
        return Err(HardyError::config(format!(
            "pair dimensions (m, n) = ({}, {}) differ from the geometry ({}, {})",
            pair.m(),
            pair.n(),
            geom.m,
            geom.n
        )));
    }
    if dom.t_max > pair.t_end() {
        return Err(HardyError::config(format!(
            "domain end {} exceeds the validity end {} of the pair",
            dom.t_max,
            pair.t_end()
        )));
    }
    Ok(())
}

/// Integration range: support of `u` intersected with the domain.
fn range(dom: &DomainSpec, u: &RadialTestFunction) -> Result<(f64, ExtReal<f64>)> {
    let (a, b) = u.support();
    let lo = a.max(dom.t_min);
    let hi = b.min(dom.t_max);
    if !(ExtReal::Finite(lo) < hi) {
        return Err(HardyError::config(format!(
            "support [{a}, {b}] misses the domain ({}, {})",
            dom.t_min, dom.t_max
        )));
    }
    if a < dom.t_min || b > dom.t_max {
        return Err(HardyError::config(format!(
            "support [{a}, {b}] is not contained in the domain [{}, {}]",
            dom.t_min, dom.t_max
        )));
    }
    Ok((lo, hi))
}

/// `∫ |u'|^p w_num detA` and `∫ |u|^p w_den detA` over `[lo, hi]`.
fn integrals(
    geom: &ModelGeometry,
    pair: &WeightPair,
    u: &RadialTestFunction,
    form: QuotientForm,
    lo: f64,
    hi: ExtReal<f64>,
    quad: &QuadOptions,
) -> Result<(QuadResult, QuadResult)> {
    let p = pair.p();
    let kinks: Vec<f64> = u.kinks().to_vec();
    let num = Integrand::new(|t: f64| {
        let ld = u.ln_abs_deriv(t);
        if ld == f64::NEG_INFINITY {
            return 0.0;
        }
        let lw = match form {
            QuotientForm::General => pair.ln_w_num(t),
            QuotientForm::Theorem => pair.ln_theorem_num_weight(t),
        };
        (p * ld + lw + geom.ln_jacobian(t)).exp()
    })
    .with_breakpoints(kinks.clone());
    let den = Integrand::new(|t: f64| {
        let lv = u.ln_abs_value(t);
        if lv == f64::NEG_INFINITY {
            return 0.0;
        }
        let lw = match form {
            QuotientForm::General => pair.ln_w_den(t),
            QuotientForm::Theorem => pair.ln_theorem_den_weight(t),
        };
        (p * lv + lw + geom.ln_jacobian(t)).exp()
    })
    .with_breakpoints(kinks);
    let n = integrate_with(&num, lo, hi, quad)?;
    let d = integrate_with(&den, lo, hi, quad)?;
    Ok((n, d))
}

fn sharp_constant(pair: &WeightPair, form: QuotientForm) -> Result<f64> {
    Ok(match form {
        QuotientForm::General => pair.p().powf(-pair.p()),
        QuotientForm::Theorem => pair.theorem_form()?.constant,
    })
}

/// [`hardy_eval_with`] in the general form with default tolerances.
pub fn hardy_eval(
    geom: &ModelGeometry,
    dom: &DomainSpec,
    pair: &WeightPair,
    p: f64,
    u: &RadialTestFunction,
) -> Result<HardyReport> {
    hardy_eval_with(geom, dom, pair, p, u, &EvalOptions::default())
}

/// Rayleigh quotient of `u` and its verdict against the sharp constant.
///
/// The verdict is verified when `quotient ≥ C·(1 − slack)` with
/// `slack = 10·(relative error of numerator + relative error of denominator)`,
/// violated when below, and inconclusive when a quadrature did not converge.
pub fn hardy_eval_with(
    geom: &ModelGeometry,
    dom: &DomainSpec,
    pair: &WeightPair,
    p: f64,
    u: &RadialTestFunction,
    opts: &EvalOptions,
) -> Result<HardyReport> {
    check_p(pair, p)?;
    check_geometry(pair, geom, dom)?;
    let (lo, hi) = range(dom, u)?;
    let quad = opts.quad;
    let (n, d) = integrals(geom, pair, u, opts.form, lo, hi, &quad)?;
    if !(d.value.abs() > 0.0) {
        return Err(HardyError::config("denominator vanishes: u is identically zero on its support"));
    }
    let constant = sharp_constant(pair, opts.form)?;
    let quotient = n.value / d.value;
    let slack = combined_slack(&n, &d);
    let verdict = if !(n.converged && d.converged) || !quotient.is_finite() {
        Verdict::Inconclusive
    } else if quotient >= constant * (1.0 - slack) {
        Verdict::Verified
    } else {
        Verdict::Violated
    };
    let bracket_upper = match &u.repr {
        Representation::ClosedForm(c) if c.nu.variant != NuVariant::TruncatedBoundary => {
            let upper = c.nu.bracket_upper(p);
            Some(match opts.form {
                QuotientForm::General => upper,
                QuotientForm::Theorem => upper * constant / p.powf(-p),
            })
        }
        _ => None,
    };
    Ok(HardyReport {
        numerator: n,
        denominator: d,
        quotient,
        sharp_constant: constant,
        bracket_upper,
        slack,
        verdict,
        scenario: opts.scenario.clone(),
    })
}

/// Singular end of an integrability test.
#[derive(Debug, Clone, Copy, PartialEq)]
enum End {
    Left(f64, f64),
    Right(f64, f64),
    Infinity(f64),
}

/// Integrability of `f` at one singular end, from the local log-slope exponent
/// with the decade classifier as fallback for logarithmic borderline cases.
fn end_integrability(f: &Integrand<'_>, ln_f: &dyn Fn(f64) -> f64, end: End) -> Result<Integrability> {
    let (t1, t2, d1, d2) = match end {
        End::Left(a, t0) => {
            let h = t0 - a;
            (a + 1e-9 * h, a + 1e-8 * h, 1e-9 * h, 1e-8 * h)
        }
        End::Right(t0, b) => {
            let h = b - t0;
            (b - 1e-9 * h, b - 1e-8 * h, 1e-9 * h, 1e-8 * h)
        }
        End::Infinity(t0) => (1e6 * t0, 2e6 * t0, 1e6 * t0, 2e6 * t0),
    };
    let (l1, l2) = (ln_f(t1), ln_f(t2));
    if l1.is_finite() && l2.is_finite() {
        let gamma = (l2 - l1) / (d2 / d1).ln();
        if (gamma + 1.0).abs() > 1e-6 {
            let ok = match end {
                End::Infinity(_) => gamma < -1.0,
                _ => gamma > -1.0,
            };
            return Ok(if ok { Integrability::Convergent } else { Integrability::Divergent });
        }
    }
    match end {
        End::Left(a, t0) => log_slope_divergence_test(f, a, t0),
        End::Right(t0, b) => log_slope_divergence_test_right(f, t0, b),
        End::Infinity(t0) => log_slope_divergence_test_infinite(f, t0),
    }
}

/// `s₀` at the midpoint of the domain in the `s_Λ` variable; 1 on unbounded domains.
pub fn default_s0(pair: &WeightPair, dom: &DomainSpec) -> f64 {
    let basis = pair.comparison().basis();
    let ExtReal::Finite(b) = dom.t_max.min(pair.t_end()) else {
        return 1.0_f64.max(2.0 * dom.t_min);
    };
    let top = match basis.r() {
        ExtReal::Finite(r) => b.min(r),
        _ => b,
    };
    let a = dom.t_min;
    let target = 0.5 * (basis.s(a) + basis.s(top));
    let (mut lo, mut hi) = (a, top);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if basis.s(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Builds `ν_ε` after checking integrability of `ν_ε^p w_den detA` on both sides of `s₀`.
pub fn make_nu_epsilon(
    pair: &WeightPair,
    geom: &ModelGeometry,
    dom: &DomainSpec,
    variant: NuVariant,
    epsilon: f64,
    s0: f64,
) -> Result<RadialTestFunction> {
    check_geometry(pair, geom, dom)?;
    if variant == NuVariant::TruncatedBoundary {
        return Err(HardyError::config("use truncated_boundary_family for the truncated variant"));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(HardyError::config(format!("epsilon = {epsilon} must be positive")));
    }
    if !dom.contains(s0) {
        return Err(HardyError::config(format!(
            "s0 = {s0} is not strictly inside ({}, {})",
            dom.t_min, dom.t_max
        )));
    }
    let ln_anchor = pair.ln_psi(s0);
    let form = ClosedForm {
        pair: pair.clone(),
        nu: NuEpsilon { variant, epsilon, s0 },
        ln_anchor,
    };
    let condition = match variant {
        NuVariant::Increasing => "psi^(1+eps) w_den inside s0 and psi^-(1+eps/2) w_den outside",
        _ => "psi^-(1+eps/2) w_den inside s0 and psi^(1+eps) w_den outside",
    };
    let p = pair.p();
    let mut ends = Vec::new();
    if dom.t_min == 0.0 {
        ends.push(End::Left(0.0, s0));
    }
    match dom.t_max {
        ExtReal::PosInf => ends.push(End::Infinity(s0.max(1.0))),
        ExtReal::Finite(b) if !dom.t_max_attained => ends.push(End::Right(s0, b)),
        _ => {}
    }
    let ln_f = |t: f64| p * form.ln_value(t) + pair.ln_w_den(t) + geom.ln_jacobian(t);
    let f = Integrand::new(|t: f64| ln_f(t).exp());
    for end in ends {
        match end_integrability(&f, &ln_f, end)? {
            Integrability::Convergent => {}
            Integrability::Divergent => {
                return Err(HardyError::config(format!(
                    "integrability precondition fails ({condition}): divergent at {}",
                    describe(end)
                )))
            }
            Integrability::Inconclusive => {
                log::warn!("integrability of nu_eps at {} is inconclusive; proceeding", describe(end));
            }
        }
    }
    drop(f);
    Ok(RadialTestFunction {
        repr: Representation::ClosedForm(Box::new(form)),
        support: (dom.t_min, dom.t_max),
        kinks: vec![s0],
        scale: 1.0,
    })
}

fn describe(end: End) -> String {
    match end {
        End::Left(a, _) => format!("t -> {a}"),
        End::Right(_, b) => format!("t -> {b}"),
        End::Infinity(_) => "t -> infinity".into(),
    }
}

/// One row of a sharpness sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub quotient: f64,
    pub lower: f64,
    pub upper: f64,
    pub slack: f64,
    pub in_bracket: bool,
    pub report: HardyReport,
}

/// Overall outcome of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVerdict {
    Sharp,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub verdict: SweepVerdict,
    /// Index of the first out-of-bracket row.
    pub offending: Option<usize>,
}

fn check_schedule(epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() {
        return Err(HardyError::config("empty epsilon schedule"));
    }
    if epsilons.iter().any(|&e| !(e > 0.0)) || epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(HardyError::config("epsilons must be positive and strictly decreasing"));
    }
    Ok(())
}

/// Quotients of `ν_ε` for a decreasing `ε` schedule against `(p^{−p}, c(ε)^p)`.
///
/// Rows are evaluated in parallel. The sweep is sharp when every row is inside its
/// bracket up to slack and the last bracket is narrower than 1% of `p^{−p}`.
pub fn sharpness_sweep(
    pair: &WeightPair,
    geom: &ModelGeometry,
    dom: &DomainSpec,
    variant: NuVariant,
    epsilons: &[f64],
    s0: f64,
) -> Result<SweepReport> {
    check_schedule(epsilons)?;
    let p = pair.p();
    let lower = p.powf(-p);
    let rows: Vec<SweepRow> = epsilons
        .par_iter()
        .map(|&eps| -> Result<SweepRow> {
            let u = make_nu_epsilon(pair, geom, dom, variant, eps, s0)?;
            // Outer tails of ν_ε decay like exp(−εt/2) on hyperbolic models.
            let mut opts = EvalOptions::default();
            opts.quad.t_max_cap = opts.quad.t_max_cap.max(100.0 / eps);
            let report = hardy_eval_with(geom, dom, pair, p, &u, &opts)?;
            let upper = NuEpsilon::c_of(eps, p).powf(p);
            let q = report.quotient;
            let slack = report.slack;
            let in_bracket = report.verdict != Verdict::Inconclusive
                && q > lower * (1.0 - slack)
                && q < upper * (1.0 + slack);
            Ok(SweepRow {
                epsilon: eps,
                quotient: q,
                lower,
                upper,
                slack,
                in_bracket,
                report,
            })
        })
        .collect::<Result<_>>()?;
    let offending = rows
        .iter()
        .position(|r| !r.in_bracket && r.report.verdict != Verdict::Inconclusive);
    let inconclusive = rows.iter().any(|r| r.report.verdict == Verdict::Inconclusive);
    let last = rows.last().expect("non-empty schedule");
    let verdict = if offending.is_some() {
        SweepVerdict::Violated
    } else if inconclusive || last.upper - last.lower > 0.01 * lower {
        SweepVerdict::Inconclusive
    } else {
        SweepVerdict::Sharp
    };
    Ok(SweepReport { rows, verdict, offending })
}

/// `η·v_ε` with `v_ε = ψ(ε)^{−1/p}` on `[0, ε]`, `ψ^{−1/p}` above, and a smooth
/// cutoff `η` from 1 at `ι` to 0 at `2ι`.
///
/// Requires `∫_0^ι φ^{p−1}|(log ψ)'| detA = ∞`, checked by the log-slope tests.
pub fn truncated_boundary_family(
    pair: &WeightPair,
    geom: &ModelGeometry,
    dom: &DomainSpec,
    epsilon: f64,
    iota: f64,
) -> Result<RadialTestFunction> {
    check_geometry(pair, geom, dom)?;
    if dom.t_min != 0.0 {
        return Err(HardyError::config("the truncated boundary family needs a domain reaching r = 0"));
    }
    if !(epsilon > 0.0 && epsilon < iota && dom.t_max.exceeds(2.0 * iota)) {
        return Err(HardyError::config(format!(
            "need 0 < epsilon < iota and 2 iota < t_max, got epsilon = {epsilon}, iota = {iota}"
        )));
    }
    if pair.psi_sign() < 0.0 {
        return Err(HardyError::config("the truncated boundary family needs an increasing psi"));
    }
    let ln_f = |t: f64| pair.ln_w_den(t) + geom.ln_jacobian(t) - pair.ln_psi(t);
    let f = Integrand::new(|t: f64| ln_f(t).exp());
    match end_integrability(&f, &ln_f, End::Left(0.0, iota))? {
        Integrability::Divergent => {}
        Integrability::Convergent => {
            return Err(HardyError::config(
                "sharpness route of the boundary family inapplicable: phi^(p-1)|(log psi)'| detA is integrable at r = 0",
            ))
        }
        Integrability::Inconclusive => log::warn!("non-integrability at r = 0 is inconclusive; proceeding"),
    }
    let form = ClosedForm {
        pair: pair.clone(),
        nu: NuEpsilon {
            variant: NuVariant::TruncatedBoundary,
            epsilon,
            s0: iota,
        },
        ln_anchor: pair.ln_psi(epsilon),
    };
    Ok(RadialTestFunction {
        repr: Representation::ClosedForm(Box::new(form)),
        support: (0.0, ExtReal::Finite(2.0 * iota)),
        kinks: vec![epsilon, iota],
        scale: 1.0,
    })
}

/// One row of a truncated-family sweep, in the general form.
#[derive(Debug, Clone, Serialize)]
pub struct TruncatedRow {
    pub epsilon: f64,
    pub quotient: f64,
    /// Quotient in the theorem form.
    pub theorem_quotient: f64,
    pub lower: f64,
    /// `p^{−p} + N_cut/I(ε)` with `N_cut` the numerator over `[ι, 2ι]` and `I(ε)` the
    /// denominator over `[ε, ι]`.
    pub upper: f64,
    pub denominator_core: f64,
    pub numerator: QuadResult,
    pub denominator: QuadResult,
    pub slack: f64,
    pub in_bracket: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncatedSweep {
    pub rows: Vec<TruncatedRow>,
    pub theorem_constant: f64,
    /// Quotients strictly decrease along the schedule and every row is in its bracket.
    pub converging: bool,
}

/// Quotients of the truncated boundary family along a decreasing `ε` schedule.
pub fn truncated_boundary_sweep(
    pair: &WeightPair,
    geom: &ModelGeometry,
    dom: &DomainSpec,
    epsilons: &[f64],
    iota: f64,
) -> Result<TruncatedSweep> {
    check_schedule(epsilons)?;
    let p = pair.p();
    let lower = p.powf(-p);
    let thm = pair.theorem_form()?;
    let opts = EvalOptions::default();
    let quad = opts.quad;
    let rows: Vec<TruncatedRow> = epsilons
        .par_iter()
        .map(|&eps| -> Result<TruncatedRow> {
            let u = truncated_boundary_family(pair, geom, dom, eps, iota)?;
            let rep = hardy_eval_with(geom, dom, pair, p, &u, &opts)?;
            let (cut_n, _) = integrals(geom, pair, &u, QuotientForm::General, iota, ExtReal::Finite(2.0 * iota), &quad)?;
            let (_, core_d) = integrals(geom, pair, &u, QuotientForm::General, eps, ExtReal::Finite(iota), &quad)?;
            let upper = lower + cut_n.value / core_d.value;
            let q = rep.quotient;
            let slack = rep.slack + combined_slack(&cut_n, &core_d);
            Ok(TruncatedRow {
                epsilon: eps,
                quotient: q,
                theorem_quotient: q * thm.factor,
                lower,
                upper,
                denominator_core: core_d.value,
                numerator: rep.numerator,
                denominator: rep.denominator,
                slack,
                in_bracket: rep.verdict == Verdict::Verified && q <= upper * (1.0 + slack),
            })
        })
        .collect::<Result<_>>()?;
    let converging =
        rows.iter().all(|r| r.in_bracket) && rows.windows(2).all(|w| w[1].quotient < w[0].quotient);
    Ok(TruncatedSweep {
        rows,
        theorem_constant: thm.constant,
        converging,
    })
}

/// Boundary conditions imposed on the spline space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplineConstraint {
    /// `u = 0` at the inner end only. The outer end must be an attained `t_max`.
    VanishAtSigma,
    /// `u = 0` at both ends.
    VanishBothEnds,
}

/// Outcome of a spline-space Rayleigh minimization.
#[derive(Debug, Clone, Serialize)]
pub struct MinimizationResult {
    pub dof: usize,
    pub min_quotient: f64,
    pub sharp_constant: f64,
    /// Fraction of `∫|u|^p w_den detA` in the innermost tenth of the support.
    pub concentration: f64,
    pub converged: bool,
    /// `‖A x − θ B x‖/‖B x‖` for `p = 2`; relative gradient norm otherwise.
    pub residual: f64,
    pub iterations: usize,
    pub support: (f64, f64),
    pub coefficients: Vec<f64>,
}

/// Options for [`minimize_rayleigh_with`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeOptions {
    /// Outer end of the spline support; defaults to `t_max`, or 1 on unbounded domains.
    pub support_end: Option<f64>,
    pub max_iterations: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            support_end: None,
            max_iterations: 20_000,
        }
    }
}

/// Spline setup shared by the assembly paths.
struct SplineSpace {
    knots: Vec<f64>,
    free: Vec<usize>,
    n_basis: usize,
}

impl SplineSpace {
    fn new(dom: &DomainSpec, dof: usize, constraint: SplineConstraint, end: Option<f64>) -> Result<Self> {
        let a = dom.t_min;
        let b = match (end, dom.t_max) {
            (Some(b), _) => b,
            (None, ExtReal::Finite(b)) => b,
            (None, _) => 1.0_f64.max(2.0 * a),
        };
        if dom.t_max < ExtReal::Finite(b) {
            return Err(HardyError::config(format!("support end {b} exceeds the domain end {}", dom.t_max)));
        }
        if constraint == SplineConstraint::VanishAtSigma && !(dom.t_max_attained && dom.t_max == ExtReal::Finite(b)) {
            return Err(HardyError::config(
                "a free outer end needs the support to reach an attained t_max; use vanish_both_ends",
            ));
        }
        let knots = graded_knots(a, b, dof)?;
        let n_basis = dof;
        let free: Vec<usize> = match constraint {
            SplineConstraint::VanishAtSigma => (1..n_basis).collect(),
            SplineConstraint::VanishBothEnds => (1..n_basis - 1).collect(),
        };
        if free.is_empty() {
            return Err(HardyError::config("no free spline coefficients remain"));
        }
        Ok(Self { knots, free, n_basis })
    }

    fn spans(&self) -> Vec<usize> {
        (DEGREE..self.n_basis).filter(|&k| self.knots[k] < self.knots[k + 1]).collect()
    }

    fn full(&self, x: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; self.n_basis];
        for (&i, &v) in self.free.iter().zip(x) {
            c[i] = v;
        }
        c
    }

    fn index(&self, basis: usize) -> Option<usize> {
        self.free.iter().position(|&i| i == basis)
    }
}

/// Stiffness and mass matrices `∫B_i'B_j' w_num detA`, `∫B_iB_j w_den detA` over the
/// free basis, assembled span by span with the adaptive engine.
fn assemble_quadratic(
    space: &SplineSpace,
    geom: &ModelGeometry,
    pair: &WeightPair,
    quad: &QuadOptions,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let nf = space.free.len();
    let mut a = DMatrix::zeros(nf, nf);
    let mut m = DMatrix::zeros(nf, nf);
    let knots = &space.knots;
    let spans = space.spans();
    // Per span, entries (r, s) with r ≤ s over the four active functions.
    let pieces: Vec<(usize, usize, usize, f64, f64)> = spans
        .par_iter()
        .map(|&k| -> Result<Vec<(usize, usize, usize, f64, f64)>> {
            let (lo, hi) = (knots[k], knots[k + 1]);
            let mut out = Vec::new();
            for r in 0..=DEGREE {
                for s in r..=DEGREE {
                    let (i, j) = (k - DEGREE + r, k - DEGREE + s);
                    if space.index(i).is_none() || space.index(j).is_none() {
                        continue;
                    }
                    let fa = Integrand::new(|t: f64| {
                        let (_, d) = basis_ders(knots, k, t);
                        d[r] * d[s] * pair.w_num(t) * geom.jacobian_unchecked(t)
                    });
                    let fm = Integrand::new(|t: f64| {
                        let (n, _) = basis_ders(knots, k, t);
                        n[r] * n[s] * pair.w_den(t) * geom.jacobian_unchecked(t)
                    });
                    let qa = integrate_with(&fa, lo, ExtReal::Finite(hi), quad)?;
                    let qm = integrate_with(&fm, lo, ExtReal::Finite(hi), quad)?;
                    out.push((k, i, j, qa.value, qm.value));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    for (_, i, j, va, vm) in pieces {
        let (fi, fj) = (space.index(i).unwrap(), space.index(j).unwrap());
        a[(fi, fj)] += va;
        m[(fi, fj)] += vm;
        if fi != fj {
            a[(fj, fi)] += va;
            m[(fj, fi)] += vm;
        }
    }
    Ok((a, m))
}

/// Smallest eigenpair of `A x = θ M x` by Cholesky reduction, refined with
/// shifted inverse iteration. Returns `(θ, x, residual)`.
fn smallest_eigenpair(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(f64, DVector<f64>, f64)> {
    let n = a.nrows();
    let scale = DVector::from_iterator(n, (0..n).map(|i| 1.0 / m[(i, i)].sqrt()));
    if scale.iter().any(|s| !s.is_finite()) {
        return Err(HardyError::numerical("mass matrix has a non-positive diagonal", f64::NAN, f64::NAN));
    }
    let s = DMatrix::from_diagonal(&scale);
    let as_ = &s * a * &s;
    let ms = &s * m * &s;
    let chol = ms
        .clone()
        .cholesky()
        .ok_or_else(|| HardyError::numerical("mass matrix is not positive definite", f64::NAN, f64::NAN))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| HardyError::numerical("Cholesky factor is singular", f64::NAN, f64::NAN))?;
    let mut c = &linv * &as_ * linv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let (k, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty spectrum");
    let y = eig.eigenvectors.column(k).into_owned();
    let mut x = linv.transpose() * y;
    let rq = |x: &DVector<f64>| x.dot(&(&as_ * x)) / x.dot(&(&ms * x));
    let resid = |x: &DVector<f64>, th: f64| {
        let bx = &ms * x;
        (&as_ * x - &bx * th).norm() / bx.norm()
    };
    let mut theta = rq(&x);
    let mut r = resid(&x, theta);
    for _ in 0..6 {
        if r <= 1e-14 {
            break;
        }
        let shifted = &as_ - &ms * theta;
        let Some(z) = shifted.lu().solve(&(&ms * &x)) else { break };
        let z = &z / z.norm();
        if !z.iter().all(|v| v.is_finite()) {
            break;
        }
        let th = rq(&z);
        let rz = resid(&z, th);
        if rz >= r {
            break;
        }
        x = z;
        theta = th;
        r = rz;
    }
    let x = s * x;
    let bx = m * &x;
    let residual = (a * &x - &bx * theta).norm() / bx.norm();
    Ok((theta, x, residual))
}

/// Fixed composite rule on the spline support: Gauss-Legendre on each span and
/// dyadic cells toward the inner end of the first span.
struct CompositeRule {
    /// `(span, t, weight·w_num·detA, weight·w_den·detA, N, N')`.
    nodes: Vec<(usize, f64, f64, f64, [f64; 4], [f64; 4])>,
}

impl CompositeRule {
    fn new(space: &SplineSpace, geom: &ModelGeometry, pair: &WeightPair) -> Self {
        let (x20, w20) = gauss_legendre(20);
        let (x10, w10) = gauss_legendre(10);
        let knots = &space.knots;
        let mut nodes = Vec::new();
        let mut push = |k: usize, lo: f64, hi: f64, xs: &[f64], ws: &[f64]| {
            let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (x, w) in xs.iter().zip(ws) {
                let t = c + h * x;
                let j = geom.jacobian_unchecked(t);
                let (n, d) = basis_ders(knots, k, t);
                nodes.push((k, t, h * w * pair.w_num(t) * j, h * w * pair.w_den(t) * j, n, d));
            }
        };
        for (idx, k) in space.spans().into_iter().enumerate() {
            let (lo, hi) = (knots[k], knots[k + 1]);
            if idx == 0 {
                let mut top = hi;
                for _ in 0..80 {
                    let bottom = lo + 0.5 * (top - lo);
                    push(k, bottom, top, &x10, &w10);
                    top = bottom;
                }
            } else {
                push(k, lo, hi, &x20, &w20);
            }
        }
        Self { nodes }
    }

    /// `(N, D, ∇N, ∇D)` over the full coefficient vector.
    fn eval(&self, c: &[f64], p: f64, grad: bool) -> (f64, f64, Vec<f64>, Vec<f64>) {
        let mut n_val = 0.0;
        let mut d_val = 0.0;
        let mut gn = vec![0.0; if grad { c.len() } else { 0 }];
        let mut gd = gn.clone();
        for (k, _, wn, wd, nb, db) in &self.nodes {
            let base = k - DEGREE;
            let (mut u, mut du) = (0.0, 0.0);
            for r in 0..=DEGREE {
                u += c[base + r] * nb[r];
                du += c[base + r] * db[r];
            }
            n_val += du.abs().powf(p) * wn;
            d_val += u.abs().powf(p) * wd;
            if grad {
                let sn = p * du.abs().powf(p - 1.0) * du.signum() * wn;
                let sd = p * u.abs().powf(p - 1.0) * u.signum() * wd;
                for r in 0..=DEGREE {
                    gn[base + r] += sn * db[r];
                    gd[base + r] += sd * nb[r];
                }
            }
        }
        (n_val, d_val, gn, gd)
    }

    fn quadratic(&self, space: &SplineSpace) -> (DMatrix<f64>, DMatrix<f64>) {
        let nf = space.free.len();
        let mut a = DMatrix::zeros(nf, nf);
        let mut m = DMatrix::zeros(nf, nf);
        for (k, _, wn, wd, nb, db) in &self.nodes {
            for r in 0..=DEGREE {
                for s in 0..=DEGREE {
                    let (Some(i), Some(j)) = (space.index(k - DEGREE + r), space.index(k - DEGREE + s)) else {
                        continue;
                    };
                    a[(i, j)] += db[r] * db[s] * wn;
                    m[(i, j)] += nb[r] * nb[s] * wd;
                }
            }
        }
        (a, m)
    }
}

/// Rayleigh quotient and its gradient over the free coefficients.
fn rayleigh(rule: &CompositeRule, space: &SplineSpace, x: &[f64], p: f64) -> (f64, Vec<f64>) {
    let c = space.full(x);
    let (n, d, gn, gd) = rule.eval(&c, p, true);
    let r = n / d;
    let g = space.free.iter().map(|&i| (gn[i] - r * gd[i]) / d).collect();
    (r, g)
}

/// [`minimize_rayleigh_with`] with default options.
pub fn minimize_rayleigh(
    pair: &WeightPair,
    geom: &ModelGeometry,
    dom: &DomainSpec,
    p: f64,
    dof: usize,
    constraint: SplineConstraint,
) -> Result<MinimizationResult> {
    minimize_rayleigh_with(pair, geom, dom, p, dof, constraint, &MinimizeOptions::default())
}

/// Minimizes the general-form Rayleigh quotient over cubic splines of dimension `dof`
/// on knots graded toward the inner end.
///
/// For `p = 2` the generalized eigenproblem is assembled with the adaptive engine and
/// solved for its smallest eigenpair. Otherwise gradient descent with backtracking
/// runs from the quadratic minimizer under a fixed composite rule.
pub fn minimize_rayleigh_with(
    pair: &WeightPair,
    geom: &ModelGeometry,
    dom: &DomainSpec,
    p: f64,
    dof: usize,
    constraint: SplineConstraint,
    opts: &MinimizeOptions,
) -> Result<MinimizationResult> {
    check_p(pair, p)?;
    check_geometry(pair, geom, dom)?;
    let space = SplineSpace::new(dom, dof, constraint, opts.support_end)?;
    let quad = QuadOptions {
        atol: 0.0,
        rtol: 1e-12,
        ..QuadOptions::default()
    };
    let (theta, coeffs, residual, converged, iterations) = if (p - 2.0).abs() < 1e-15 {
        let (a, m) = assemble_quadratic(&space, geom, pair, &quad)?;
        let (theta, x, residual) = smallest_eigenpair(&a, &m)?;
        let converged = residual <= 1e-8;
        if !converged {
            return Err(HardyError::numerical(
                format!("eigen-solver residual {residual:e} above 1e-8"),
                theta,
                residual,
            ));
        }
        (theta, x.iter().copied().collect::<Vec<_>>(), residual, converged, 1)
    } else {
        let rule = CompositeRule::new(&space, geom, pair);
        let (a, m) = rule.quadratic(&space);
        let (_, x0, _) = smallest_eigenpair(&a, &m)?;
        descend(&rule, &space, &m, x0.iter().copied().collect(), p, opts.max_iterations)?
    };
    let full = space.full(&coeffs);
    let u = RadialTestFunction::spline(space.knots.clone(), full.clone())?;
    let (a, b) = (space.knots[0], space.knots[space.knots.len() - 1]);
    let concentration = {
        let dens = Integrand::new(|t: f64| {
            let v = u.value(t);
            v.abs().powf(p) * pair.w_den(t) * geom.jacobian_unchecked(t)
        })
        .with_breakpoints(u.kinks().to_vec());
        let cut = a + 0.1 * (b - a);
        let inner = integrate_with(&dens, a, ExtReal::Finite(cut), &quad)?;
        let outer = integrate_with(&dens, cut, ExtReal::Finite(b), &quad)?;
        inner.value / (inner.value + outer.value)
    };
    Ok(MinimizationResult {
        dof,
        min_quotient: theta,
        sharp_constant: p.powf(-p),
        concentration,
        converged,
        residual,
        iterations,
        support: (a, b),
        coefficients: full,
    })
}

type Descent = (f64, Vec<f64>, f64, bool, usize);

/// Preconditioned gradient descent with Armijo backtracking on the sphere `‖Sx‖ = 1`.
fn descend(
    rule: &CompositeRule,
    space: &SplineSpace,
    mass: &DMatrix<f64>,
    x0: Vec<f64>,
    p: f64,
    max_iter: usize,
) -> Result<Descent> {
    let s: Vec<f64> = (0..x0.len()).map(|i| mass[(i, i)].sqrt()).collect();
    let to_x = |y: &[f64]| -> Vec<f64> { y.iter().zip(&s).map(|(y, s)| y / s).collect() };
    let norm = |y: &mut Vec<f64>| {
        let n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= n);
    };
    let mut y: Vec<f64> = x0.iter().zip(&s).map(|(x, s)| x * s).collect();
    norm(&mut y);
    let (mut r, g) = rayleigh(rule, space, &to_x(&y), p);
    let mut gy: Vec<f64> = g.iter().zip(&s).map(|(g, s)| g / s).collect();
    let mut step = 1.0;
    let mut quiet = 0;
    let mut gnorm = f64::INFINITY;
    for it in 0..max_iter {
        gnorm = gy.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm <= 1e-9 * r {
            return Ok((r, to_x(&y), gnorm / r, true, it));
        }
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial: Vec<f64> = y.iter().zip(&gy).map(|(y, g)| y - step * g).collect();
            norm(&mut trial);
            let (rt, gt) = rayleigh(rule, space, &to_x(&trial), p);
            if rt <= r - 1e-4 * step * gnorm * gnorm {
                accepted = Some((trial, rt, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, rt, gt)) = accepted else {
            return Ok((r, to_x(&y), gnorm / r, gnorm <= 1e-6 * r, it));
        };
        quiet = if (r - rt) <= 1e-14 * r { quiet + 1 } else { 0 };
        y = trial;
        r = rt;
        gy = gt.iter().zip(&s).map(|(g, s)| g / s).collect();
        step *= 2.0;
        if quiet >= 20 {
            return Ok((r, to_x(&y), gnorm / r, gnorm <= 1e-6 * r, it));
        }
    }
    log::warn!("gradient descent stopped at the iteration cap with relative gradient {:e}", gnorm / r);
    Ok((r, to_x(&y), gnorm / r, false, max_iter))
}

/// Largest relative deviation between the analytic Rayleigh gradient and central
/// finite differences at 5 random coefficient vectors.
pub fn rayleigh_gradient_check(
    pair: &WeightPair,
    geom: &ModelGeometry,
    dom: &DomainSpec,
    dof: usize,
    constraint: SplineConstraint,
    seed: u64,
) -> Result<f64> {
    check_geometry(pair, geom, dom)?;
    let p = pair.p();
    let space = SplineSpace::new(dom, dof, constraint, None)?;
    let rule = CompositeRule::new(&space, geom, pair);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let x: Vec<f64> = (0..space.free.len()).map(|_| rng.gen_range(0.5..1.5)).collect();
        let (_, g) = rayleigh(&rule, &space, &x, p);
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..x.len() {
            let h = 1e-6 * x[i].abs().max(1e-3);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (rayleigh(&rule, &space, &xp, p).0 - rayleigh(&rule, &space, &xm, p).0) / (2.0 * h);
            worst = worst.max((fd - g[i]).abs() / gmax.max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

/// Summary of a randomized bump oracle run.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub trials: usize,
    pub min_quotient: f64,
    pub sharp_constant: f64,
    pub worst: HardyReport,
    pub violations: usize,
    pub inconclusive: usize,
    pub verdict: Verdict,
}

/// Random sum of one to four bumps strictly inside the domain.
pub fn random_bump_sum(rng: &mut impl Rng, dom: &DomainSpec) -> Result<RadialTestFunction> {
    let hi = match dom.t_max {
        ExtReal::Finite(b) => b,
        _ => 10.0_f64.max(10.0 * dom.t_min),
    };
    let lo = if dom.t_min > 0.0 { dom.t_min } else { 1e-3 * hi };
    let count = rng.gen_range(1..=4);
    let mut bumps = Vec::with_capacity(count);
    for _ in 0..count {
        let center = (lo.ln() + rng.gen_range(0.02..0.98) * (hi / lo).ln()).exp();
        let room = (center - dom.t_min).min(hi - center);
        let half_width = room * rng.gen_range(0.05..0.95);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        bumps.push(Bump {
            center,
            half_width,
            amplitude: sign * rng.gen_range(0.2..1.0),
        });
    }
    RadialTestFunction::bump_sum(bumps)
}

/// [`random_testfn_oracle_with`] in the general form.
pub fn random_testfn_oracle(
    pair: &WeightPair,
    geom: &ModelGeometry,
    dom: &DomainSpec,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<OracleReport> {
    random_testfn_oracle_with(pair, geom, dom, p, trials, seed, &EvalOptions::default())
}

/// Evaluates `trials` random bump sums in parallel and reports the worst quotient.
///
/// Bump parameters are drawn sequentially from a ChaCha stream seeded with `seed`,
/// so the result does not depend on the thread count.
pub fn random_testfn_oracle_with(
    pair: &WeightPair,
    geom: &ModelGeometry,
    dom: &DomainSpec,
    p: f64,
    trials: usize,
    seed: u64,
    opts: &EvalOptions,
) -> Result<OracleReport> {
    if trials == 0 {
        return Err(HardyError::config("trials must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let funcs: Vec<RadialTestFunction> = (0..trials).map(|_| random_bump_sum(&mut rng, dom)).collect::<Result<_>>()?;
    let reports: Vec<HardyReport> = funcs
        .par_iter()
        .map(|u| hardy_eval_with(geom, dom, pair, p, u, opts))
        .collect::<Result<_>>()?;
    let violations = reports.iter().filter(|r| r.verdict == Verdict::Violated).count();
    let inconclusive = reports.iter().filter(|r| r.verdict == Verdict::Inconclusive).count();
    let worst = reports
        .iter()
        .min_by(|a, b| a.relative_gap().total_cmp(&b.relative_gap()))
        .expect("at least one trial")
        .clone();
    let verdict = if violations > 0 {
        Verdict::Violated
    } else if inconclusive > 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Verified
    };
    Ok(OracleReport {
        trials,
        min_quotient: worst.quotient,
        sharp_constant: worst.sharp_constant,
        worst,
        violations,
        inconclusive,
        verdict,
    })
}

/// Terms of the improved inequality with a logarithmic remainder.
#[derive(Debug, Clone, Serialize)]
pub struct ImprovedReport {
    pub delta: f64,
    pub lhs: f64,
    /// `|δ|^p ∫|u|^p w`.
    pub hardy_term: f64,
    /// `(p−1)/(2p)|δ|^{p−2} ∫|u|^p w log^{−2}(s_λ(D)/s_λ(r))`.
    pub log_term: f64,
    pub residual: f64,
    pub slack: f64,
    pub holds: bool,
}

/// `LHS − |δ|^p ∫|u|^p w − (p−1)/(2p)|δ|^{p−2} ∫|u|^p w log^{−2}(s_λ(D)/s_λ(r))` with
/// theorem-form power weights and `δ = (m−n+β)/p`.
///
/// Requires a bounded domain and `s_λ(D) ≥ τ s_λ(sup r)` for the user constant `τ > 1`.
pub fn improved_inequality_check(
    geom: &ModelGeometry,
    dom: &DomainSpec,
    pair_params: &PairParams,
    d: f64,
    tau: f64,
    u: &RadialTestFunction,
) -> Result<ImprovedReport> {
    let PairParams::Power {
        big_lambda,
        big_k,
        beta,
        p,
        m,
        n,
    } = *pair_params
    else {
        return Err(HardyError::config("the improved inequality uses a power pair"));
    };
    let delta = (m as f64 - n as f64 + beta) / p;
    if (delta * p).abs() < 1e-6 {
        return Err(HardyError::config("delta = 0: beta = -(m - n) is excluded"));
    }
    if !(tau > 1.0) {
        return Err(HardyError::config(format!("tau = {tau} must exceed 1")));
    }
    let ExtReal::Finite(sup_r) = dom.t_max else {
        return Err(HardyError::config("the improved inequality needs sup r < infinity"));
    };
    let pair = make_power_pair(big_lambda, big_k, beta, p, m, n)?;
    check_geometry(&pair, geom, dom)?;
    let basis = pair.comparison().basis();
    if !(pair.t_end().exceeds(d) || pair.t_end() == ExtReal::Finite(d)) || !(basis.s(d) >= tau * basis.s(sup_r)) {
        return Err(HardyError::config(format!(
            "D = {d} too small: need s(D) >= {tau} s(sup r) with sup r = {sup_r}"
        )));
    }
    let (lo, hi) = range(dom, u)?;
    let opts = EvalOptions::theorem();
    let quad = opts.quad;
    let (num, den) = integrals(geom, &pair, u, QuotientForm::Theorem, lo, hi, &quad)?;
    let sd = basis.s(d);
    let logw = Integrand::new(|t: f64| {
        let v = u.value(t);
        if v == 0.0 {
            return 0.0;
        }
        let l = (sd / basis.s(t)).ln();
        v.abs().powf(p) * pair.theorem_den_weight(t) * geom.jacobian_unchecked(t) / (l * l)
    })
    .with_breakpoints(u.kinks().to_vec());
    let lg = integrate_with(&logw, lo, hi, &quad)?;
    let hardy_term = delta.abs().powf(p) * den.value;
    let log_term = (p - 1.0) / (2.0 * p) * delta.abs().powf(p - 2.0) * lg.value;
    let residual = num.value - hardy_term - log_term;
    let slack = SLACK_FACTOR * (num.abs_error_est + delta.abs().powf(p) * den.abs_error_est + lg.abs_error_est);
    Ok(ImprovedReport {
        delta,
        lhs: num.value,
        hardy_term,
        log_term,
        residual,
        slack,
        holds: residual >= -slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_geometry::DomainKind;

    fn euclid() -> (ModelGeometry, DomainSpec, WeightPair) {
        (
            ModelGeometry::space_form(3, 0, 0.0, 0.0).unwrap(),
            DomainSpec::new(DomainKind::Punctured, 0.0, ExtReal::PosInf),
            make_power_pair(0.0, 0.0, -2.0, 2.0, 3, 0).unwrap(),
        )
    }

    #[test]
    fn bump_derivative_matches_finite_difference() {
        let b = Bump {
            center: 1.5,
            half_width: 0.5,
            amplitude: -0.7,
        };
        for t in [1.1, 1.3, 1.5, 1.8, 1.95] {
            let h = 1e-6;
            let fd = (b.value(t + h) - b.value(t - h)) / (2.0 * h);
            assert!((fd - b.deriv(t)).abs() < 1e-7, "{t}");
        }
        assert_eq!(b.value(2.0), 0.0);
    }

    #[test]
    fn spline_basis_is_a_partition_of_unity() {
        let knots = graded_knots(0.0, 1.0, 12).unwrap();
        for t in [0.0, 1e-3, 0.05, 0.3, 0.77, 1.0] {
            let k = span_of(&knots, t);
            let (n, d) = basis_ders(&knots, k, t);
            assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(d.iter().sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn spline_derivative_matches_finite_difference() {
        let knots = graded_knots(0.0, 2.0, 9).unwrap();
        let coeffs = vec![0.0, 1.0, -2.0, 0.5, 3.0, 1.0, -1.0, 2.0, 0.0];
        let u = RadialTestFunction::spline(knots, coeffs).unwrap();
        for t in [0.01, 0.2, 0.5, 1.1, 1.9] {
            let h = 1e-6;
            let fd = (u.value(t + h) - u.value(t - h)) / (2.0 * h);
            assert!((fd - u.deriv(t)).abs() < 1e-6 * (1.0 + fd.abs()), "{t}");
        }
    }

    #[test]
    fn cutoff_is_smooth_and_monotone() {
        let mut prev = 1.0;
        for i in 0..=100 {
            let t = 1.0 + i as f64 / 100.0;
            let (v, _) = cutoff(t, 1.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        let h = 1e-6;
        let fd = (cutoff(1.4 + h, 1.0).0 - cutoff(1.4 - h, 1.0).0) / (2.0 * h);
        assert!((fd - cutoff(1.4, 1.0).1).abs() < 1e-7);
    }

    #[test]
    fn euclidean_bump_exceeds_quarter() {
        let (g, d, pair) = euclid();
        let u = RadialTestFunction::bump_sum(vec![Bump {
            center: 1.5,
            half_width: 0.5,
            amplitude: 1.0,
        }])
        .unwrap();
        let r = hardy_eval(&g, &d, &pair, 2.0, &u).unwrap();
        assert_eq!(r.verdict, Verdict::Verified);
        assert!(r.quotient > 0.25);
    }

    #[test]
    fn nu_epsilon_is_one_at_seam() {
        let (g, d, pair) = euclid();
        {
            let v = NuVariant::Increasing;
            let u = make_nu_epsilon(&pair, &g, &d, v, 0.1, 1.3).unwrap();
            assert!((u.value(1.3) - 1.0).abs() < 1e-14);
            assert!((u.value(1.3 - 1e-12) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_function_is_rejected() {
        let (g, d, pair) = euclid();
        let u = RadialTestFunction::bump_sum(vec![Bump {
            center: 1.5,
            half_width: 0.5,
            amplitude: 0.0,
        }])
        .unwrap();
        assert!(matches!(hardy_eval(&g, &d, &pair, 2.0, &u), Err(HardyError::Config(_))));
    }
}
