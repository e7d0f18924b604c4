//! The weight pairs `(φ, ψ)` of the curvature-sensitive Hardy inequalities, their
//! Hardy weight densities, and audits of the standing assumptions on a pair.
//!
//! Every family shares `φ^{p−1} = (c_Λ − K s_Λ)^{−n} s_Λ^{−(m−n−1)}`. The power family
//! has `ψ = s_Λ^{β+m−n}`; the two logarithmic families integrate
//! `[log(s_Λ(D)/s_Λ(τ))]^{s₁} s_Λ(τ)^{s₂} c_Λ(τ)` from `0` or up to `L`.
//!
//! Logarithmic `ψ` values use the substitution `u = log(s_Λ(D)/s_Λ(τ))`, which turns
//! the integrand into `S^{s₂+1} u^{s₁} e^{−(s₂+1)u}` with `S = s_Λ(D)`. The integral
//! is tabulated once per pair on a 2048-node grid, geometric toward both ends, with
//! 20-point Gauss–Legendre cells; off-grid values add one Gauss–Legendre completion
//! to the neighbouring node on the anchored side, so every value is a sum of
//! positive terms.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::comparison_kernel::{r_lambda, t_lambda_kappa, ComparisonBasis, CurvaturePair, GProfile};
use crate::error::{HardyError, Result};
use crate::ext_real::ExtReal;
use crate::model_geometry::{DomainKind, DomainSpec, JacobianKind, ModelGeometry};
use crate::quadrature::{
    gauss_legendre, integrate_with, log_slope_divergence_test, log_slope_divergence_test_right,
    Integrability, Integrand, QuadOptions,
};

/// Smallest admissible `|β + m − n|` for a power pair.
pub const MIN_POWER_EXPONENT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairFamily {
    Power,
    LogGlobal,
    LogGeneral,
}

/// Family and parameters of a weight pair. `big_lambda`, `big_k` are `(Λ, K)`.
///
/// The optional `s` of the logarithmic families is the constant of the `ψ` bound;
/// it defaults to the largest admissible value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PairParams {
    Power {
        big_lambda: f64,
        big_k: f64,
        beta: f64,
        p: f64,
        m: usize,
        n: usize,
    },
    LogGlobal {
        big_lambda: f64,
        big_k: f64,
        s1: f64,
        s2: f64,
        d: f64,
        p: f64,
        m: usize,
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s: Option<f64>,
    },
    LogGeneral {
        big_lambda: f64,
        big_k: f64,
        s1: f64,
        s2: f64,
        d: f64,
        l: f64,
        p: f64,
        m: usize,
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s: Option<f64>,
    },
}

impl PairParams {
    pub fn family(&self) -> PairFamily {
        match self {
            PairParams::Power { .. } => PairFamily::Power,
            PairParams::LogGlobal { .. } => PairFamily::LogGlobal,
            PairParams::LogGeneral { .. } => PairFamily::LogGeneral,
        }
    }

}

/// Tabulated `ψ` in the variable `w = u − u_E`, where `u_E` is `u` at the end `E`
/// of the validity interval (`E = D` for the global family, `E = L` for the general).
struct PsiTable {
    s1: f64,
    s2: f64,
    ln_big_s: f64,
    u_e: f64,
    /// `true`: `Ψ(w) = ∫_w^∞ h` (global); `false`: `Ψ(w) = ∫_0^w h` (general).
    global: bool,
    nodes: Vec<f64>,
    cum: Vec<f64>,
    gl_x: Vec<f64>,
    gl_w: Vec<f64>,
}

const TABLE_HALF: usize = 1024;

impl PsiTable {
    fn build(s1: f64, s2: f64, big_s: f64, u_e: f64, global: bool) -> Result<Self> {
        let (gl_x, gl_w) = gauss_legendre(20);
        let w_lo = 2f64.powi(-64);
        // Beyond `σ = 1e-300` the radius is not representable.
        let w_hi = ((big_s / 1e-300).ln() - u_e).max(4.0);
        let mut nodes = Vec::with_capacity(2 * TABLE_HALF);
        for i in 0..TABLE_HALF {
            nodes.push(w_lo.powf(1.0 - i as f64 / (TABLE_HALF - 1) as f64));
        }
        for j in 1..=TABLE_HALF {
            nodes.push(w_hi.powf(j as f64 / TABLE_HALF as f64));
        }
        let mut table = Self {
            s1,
            s2,
            ln_big_s: big_s.ln(),
            u_e,
            global,
            nodes,
            cum: Vec::new(),
            gl_x,
            gl_w,
        };
        let n = table.nodes.len();
        let mut cum = vec![0.0; n];
        if global {
            cum[n - 1] = table.tail_from(table.nodes[n - 1])?;
            for i in (0..n - 1).rev() {
                cum[i] = cum[i + 1] + table.gl(table.nodes[i], table.nodes[i + 1]);
            }
        } else {
            cum[0] = table.engine(0.0, table.nodes[0])?;
            for i in 1..n {
                cum[i] = cum[i - 1] + table.gl(table.nodes[i - 1], table.nodes[i]);
            }
        }
        table.cum = cum;
        Ok(table)
    }

    fn ln_h(&self, w: f64) -> f64 {
        let u = self.u_e + w;
        self.s1 * u.ln() + (self.s2 + 1.0) * (self.ln_big_s - u)
    }

    /// `h(w) = S^{s₂+1} u^{s₁} e^{−(s₂+1)u}`.
    fn h(&self, w: f64) -> f64 {
        self.ln_h(w).exp()
    }

    fn gl(&self, a: f64, b: f64) -> f64 {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        r * self.gl_x.iter().zip(&self.gl_w).map(|(x, wt)| wt * self.h(c + r * x)).sum::<f64>()
    }

    fn opts() -> QuadOptions {
        QuadOptions {
            max_evals: 2_000_000,
            ..QuadOptions::with_tol(0.0, 1e-13)
        }
    }

    fn engine(&self, a: f64, b: f64) -> Result<f64> {
        let f = Integrand::new(|w: f64| self.h(w));
        let q = integrate_with(&f, a, ExtReal::Finite(b), &Self::opts())?;
        Ok(q.value)
    }

    /// `∫_W^∞ h` through `w = 1/v`.
    fn tail_from(&self, w: f64) -> Result<f64> {
        let f = Integrand::new(|v: f64| {
            if v == 0.0 {
                return 0.0;
            }
            let w = 1.0 / v;
            (self.ln_h(w) + 2.0 * w.ln()).exp()
        });
        let q = integrate_with(&f, 0.0, ExtReal::Finite(1.0 / w), &Self::opts())?;
        Ok(q.value)
    }

    fn value(&self, w: f64) -> Result<f64> {
        let n = self.nodes.len();
        let j = self.nodes.partition_point(|&x| x <= w);
        if self.global {
            if w <= 0.0 {
                return Ok(f64::INFINITY);
            }
            if j == n {
                self.tail_from(w)
            } else if j == 0 {
                Ok(self.cum[0] + self.engine(w, self.nodes[0])?)
            } else {
                Ok(self.cum[j] + self.gl(w, self.nodes[j]))
            }
        } else if w <= 0.0 {
            Ok(0.0)
        } else if j == 0 {
            self.engine(0.0, w)
        } else if j == n {
            Ok(self.cum[n - 1] + self.engine(self.nodes[n - 1], w)?)
        } else {
            Ok(self.cum[j - 1] + self.gl(self.nodes[j - 1], w))
        }
    }

    /// Direct adaptive quadrature of `Ψ(w)`, independent of the table. The global
    /// integral is split at decades of `w` below `1`, the general one at unit steps.
    fn direct(&self, w: f64) -> Result<f64> {
        if self.global {
            let mut acc = 0.0;
            let mut prev = w;
            while prev < 1.0 {
                let next = (10.0 * prev).min(1.0);
                acc += self.engine(prev, next)?;
                prev = next;
            }
            Ok(acc + self.tail_from(prev)?)
        } else {
            let mut acc = self.engine(0.0, w.min(1.0))?;
            let mut prev = 1.0;
            while prev < w {
                let next = (prev + 1.0).min(w);
                acc += self.engine(prev, next)?;
                prev = next;
            }
            Ok(acc)
        }
    }
}

/// Data of the logarithmic families.
struct LogData {
    s1: f64,
    s2: f64,
    d: f64,
    /// End of the validity interval: `D` (global) or `L` (general).
    e: f64,
    s_e: f64,
    /// Largest admissible constant of the `ψ` bound.
    max_bound_s: f64,
    table: PsiTable,
}

/// A validated pair `(φ, ψ)`; cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct WeightPair {
    params: PairParams,
    basis: ComparisonBasis<f64>,
    big_k: f64,
    p: f64,
    m: usize,
    n: usize,
    t_end: ExtReal<f64>,
    psi_sign: f64,
    log: Option<Arc<LogData>>,
    /// Constant `s` of the `ψ` bound for logarithmic pairs.
    bound_s: Option<f64>,
}

impl fmt::Debug for WeightPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightPair")
            .field("params", &self.params)
            .field("t_end", &self.t_end)
            .field("psi_sign", &self.psi_sign)
            .finish_non_exhaustive()
    }
}

fn check_common(big_lambda: f64, big_k: f64, p: f64, m: usize, n: usize) -> Result<ExtReal<f64>> {
    if !(p.is_finite() && p > 1.0) {
        return Err(HardyError::config(format!("p = {p} must be finite and > 1")));
    }
    if !(big_lambda.is_finite() && big_k.is_finite()) {
        return Err(HardyError::config("Lambda and K must be finite"));
    }
    let pair = CurvaturePair::new(big_lambda, big_k)?;
    let t = t_lambda_kappa(m, n, pair)?;
    Ok(r_lambda(big_lambda).min(t))
}

/// Power pair `φ^{p−1} = (c_Λ − K s_Λ)^{−n} s_Λ^{−(m−n−1)}`, `ψ = s_Λ^{β+m−n}`.
pub fn make_power_pair(big_lambda: f64, big_k: f64, beta: f64, p: f64, m: usize, n: usize) -> Result<WeightPair> {
    let t_end = check_common(big_lambda, big_k, p, m, n)?;
    if !beta.is_finite() {
        return Err(HardyError::config(format!("beta = {beta} must be finite")));
    }
    let alpha = beta + m as f64 - n as f64;
    if alpha.abs() < MIN_POWER_EXPONENT {
        return Err(HardyError::config(format!(
            "psi constant: beta + m - n = {alpha} (beta = -(m - n) is excluded)"
        )));
    }
    Ok(WeightPair {
        params: PairParams::Power { big_lambda, big_k, beta, p, m, n },
        basis: ComparisonBasis::new(big_lambda)?,
        big_k,
        p,
        m,
        n,
        t_end,
        psi_sign: alpha.signum(),
        log: None,
        bound_s: None,
    })
}

fn check_d(big_lambda: f64, big_k: f64, p: f64, m: usize, n: usize, d: f64) -> Result<()> {
    let limit = check_common(big_lambda, big_k, p, m, n)?;
    if !(d.is_finite() && d > 0.0 && ExtReal::Finite(d) <= limit) {
        return Err(HardyError::config(format!(
            "D = {d} must be finite and lie in (0, min(r_Lambda, t_Lambda,K)] = (0, {limit}]"
        )));
    }
    Ok(())
}

/// Global logarithmic pair: `ψ(t) = ∫₀ᵗ [log(s_Λ(D)/s_Λ)]^{s₁} s_Λ^{s₂} c_Λ`, increasing.
#[allow(clippy::too_many_arguments)]
pub fn make_log_global_pair(
    big_lambda: f64,
    big_k: f64,
    s1: f64,
    s2: f64,
    d: f64,
    p: f64,
    m: usize,
    n: usize,
) -> Result<WeightPair> {
    check_d(big_lambda, big_k, p, m, n, d)?;
    if !(s2 > -1.0 || (s2 == -1.0 && s1 < -1.0)) {
        return Err(HardyError::config(format!(
            "H1 diverges for (s1, s2) = ({s1}, {s2}): needs s2 > -1, or s2 = -1 with s1 < -1"
        )));
    }
    if !(s1 < -1.0 && s2 >= -1.0) {
        return Err(HardyError::config(format!(
            "the global logarithmic pair needs s1 < -1 and s2 >= -1, got ({s1}, {s2})"
        )));
    }
    let basis = ComparisonBasis::new(big_lambda)?;
    let big_s = basis.s(d);
    let table = PsiTable::build(s1, s2, big_s, 0.0, true)?;
    Ok(WeightPair {
        params: PairParams::LogGlobal { big_lambda, big_k, s1, s2, d, p, m, n, s: None },
        basis,
        big_k,
        p,
        m,
        n,
        t_end: ExtReal::Finite(d),
        psi_sign: 1.0,
        log: Some(Arc::new(LogData {
            s1,
            s2,
            d,
            e: d,
            s_e: big_s,
            max_bound_s: -(s1 + 1.0),
            table,
        })),
        bound_s: Some(-(s1 + 1.0)),
    })
}

/// General logarithmic pair: `ψ(t) = ∫ₜᴸ [log(s_Λ(D)/s_Λ)]^{s₁} s_Λ^{s₂} c_Λ`, decreasing.
#[allow(clippy::too_many_arguments)]
pub fn make_log_general_pair(
    big_lambda: f64,
    big_k: f64,
    s1: f64,
    s2: f64,
    d: f64,
    l: f64,
    p: f64,
    m: usize,
    n: usize,
) -> Result<WeightPair> {
    check_d(big_lambda, big_k, p, m, n, d)?;
    if !(s1.is_finite() && s2.is_finite()) {
        return Err(HardyError::config("s1 and s2 must be finite"));
    }
    if !(l > 0.0 && l <= d) {
        return Err(HardyError::config(format!("L = {l} must lie in (0, D] = (0, {d}]")));
    }
    if l == d && s1 <= -1.0 {
        return Err(HardyError::config(format!(
            "H2 diverges: L = D needs s1 > -1, got s1 = {s1}"
        )));
    }
    let basis = ComparisonBasis::new(big_lambda)?;
    let big_s = basis.s(d);
    let s_e = basis.s(l);
    let u_e = if l == d { 0.0 } else { (big_s / s_e).ln() };
    let table = PsiTable::build(s1, s2, big_s, u_e, false)?;
    Ok(WeightPair {
        params: PairParams::LogGeneral { big_lambda, big_k, s1, s2, d, l, p, m, n, s: None },
        basis,
        big_k,
        p,
        m,
        n,
        t_end: ExtReal::Finite(l),
        psi_sign: -1.0,
        log: Some(Arc::new(LogData {
            s1,
            s2,
            d,
            e: l,
            s_e,
            max_bound_s: s1 + 1.0 - (s2 + 1.0) * u_e,
            table,
        })),
        bound_s: Some(s1 + 1.0 - (s2 + 1.0) * u_e),
    })
}

/// `s_Λ(a) − s_Λ(b)` without cancellation, by the product-to-sum formulas.
fn s_difference(lambda: f64, a: f64, b: f64) -> f64 {
    if lambda > 0.0 {
        let k = lambda.sqrt();
        2.0 / k * (0.5 * k * (a + b)).cos() * (0.5 * k * (a - b)).sin()
    } else if lambda < 0.0 {
        let k = (-lambda).sqrt();
        2.0 / k * (0.5 * k * (a + b)).cosh() * (0.5 * k * (a - b)).sinh()
    } else {
        a - b
    }
}

/// `s_Λ(D)/s_Λ(L)`.
pub fn log_ratio_base(big_lambda: f64, d: f64, l: f64) -> Result<f64> {
    if !(l > 0.0 && l <= d && ExtReal::Finite(d) <= r_lambda(big_lambda)) {
        return Err(HardyError::domain(format!(
            "need 0 < L <= D <= r_Lambda, got L = {l}, D = {d}, Lambda = {big_lambda}"
        )));
    }
    let b = ComparisonBasis::new(big_lambda)?;
    Ok(b.s(d) / b.s(l))
}

/// Whether `Λ ↦ s_Λ(D)/s_Λ(L)` is non-increasing along the given increasing chain.
pub fn log_ratio_monotone(chain: &[f64], d: f64, l: f64) -> Result<bool> {
    if chain.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HardyError::config("the Lambda chain must be strictly increasing"));
    }
    let vals = chain
        .iter()
        .map(|&lam| log_ratio_base(lam, d, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(vals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14)))
}

/// Theorem-form weights and constant; see [`WeightPair::theorem_form`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremForm {
    pub constant: f64,
    /// `Q_theorem = factor · Q_general` holds identically when `exact` is set.
    pub factor: f64,
    pub exact: bool,
}

impl WeightPair {
    /// Builds a pair from its parameter record, applying the bound constant `s` if set.
    pub fn new(params: PairParams) -> Result<Self> {
        let pair = match params {
            PairParams::Power { big_lambda, big_k, beta, p, m, n } => {
                make_power_pair(big_lambda, big_k, beta, p, m, n)?
            }
            PairParams::LogGlobal { big_lambda, big_k, s1, s2, d, p, m, n, .. } => {
                make_log_global_pair(big_lambda, big_k, s1, s2, d, p, m, n)?
            }
            PairParams::LogGeneral { big_lambda, big_k, s1, s2, d, l, p, m, n, .. } => {
                make_log_general_pair(big_lambda, big_k, s1, s2, d, l, p, m, n)?
            }
        };
        match params {
            PairParams::LogGlobal { s: Some(s), .. } | PairParams::LogGeneral { s: Some(s), .. } => {
                pair.with_bound_s(s)
            }
            _ => Ok(pair),
        }
    }

    /// Sets the constant `s` of the `ψ` bound and of the theorem-form constant `(s/p)^p`.
    pub fn with_bound_s(mut self, s: f64) -> Result<Self> {
        let Some(log) = &self.log else {
            return Err(HardyError::config("the bound constant s applies to logarithmic pairs only"));
        };
        let max = log.max_bound_s;
        if !(s > 0.0 && s <= max * (1.0 + 1e-12)) {
            let cond = if self.family() == PairFamily::LogGlobal {
                "s1 + 1 + s <= 0"
            } else {
                "s1 + 1 >= s + (s2 + 1) log(s_Lambda(D)/s_Lambda(L))"
            };
            return Err(HardyError::config(format!(
                "bound constant s = {s} must satisfy s > 0 and {cond} (largest admissible {max})"
            )));
        }
        self.bound_s = Some(s);
        match &mut self.params {
            PairParams::LogGlobal { s: slot, .. } | PairParams::LogGeneral { s: slot, .. } => *slot = Some(s),
            PairParams::Power { .. } => {}
        }
        Ok(self)
    }

    pub fn params(&self) -> &PairParams {
        &self.params
    }

    pub fn family(&self) -> PairFamily {
        self.params.family()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(Λ, K)`.
    pub fn comparison(&self) -> CurvaturePair<f64> {
        CurvaturePair {
            lambda: self.basis.lambda,
            kappa: self.big_k,
        }
    }

    /// End of the validity interval `(0, t_end)`.
    pub fn t_end(&self) -> ExtReal<f64> {
        self.t_end
    }

    /// Sign of `ψ'`.
    pub fn psi_sign(&self) -> f64 {
        self.psi_sign
    }

    /// `β + m − n` for power pairs.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.params {
            PairParams::Power { beta, m, n, .. } => Some(beta + m as f64 - n as f64),
            _ => None,
        }
    }

    /// The constant `s` of the `ψ` bound for logarithmic pairs.
    pub fn bound_s(&self) -> Option<f64> {
        self.bound_s
    }

    /// `(s₁, s₂)` for logarithmic pairs.
    pub fn log_exponents(&self) -> Option<(f64, f64)> {
        self.log.as_ref().map(|l| (l.s1, l.s2))
    }

    /// `D` for logarithmic pairs.
    pub fn log_radius(&self) -> Option<f64> {
        self.log.as_ref().map(|l| l.d)
    }

    fn q(&self, t: f64) -> f64 {
        self.basis.c(t) - self.big_k * self.basis.s(t)
    }

    /// `φ^{p−1}`.
    pub fn phi_pm1(&self, t: f64) -> f64 {
        let s = self.basis.s(t);
        self.q(t).powi(-(self.n as i32)) * s.powi(-((self.m - self.n - 1) as i32))
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.phi_pm1(t).powf(1.0 / (self.p - 1.0))
    }

    /// `w = u − u_E` at radius `t` for logarithmic pairs.
    fn log_w(&self, log: &LogData, t: f64) -> f64 {
        let diff = s_difference(self.basis.lambda, log.e, t);
        if diff <= 0.0 {
            0.0
        } else if diff <= 0.5 * log.s_e {
            -(-diff / log.s_e).ln_1p()
        } else {
            (log.s_e / self.basis.s(t)).ln()
        }
    }

    /// `log(s_Λ(D)/s_Λ(t))` for logarithmic pairs, accurate near `t = D`.
    pub fn log_factor(&self, t: f64) -> Option<f64> {
        self.log.as_ref().map(|log| log.table.u_e + self.log_w(log, t))
    }

    pub fn psi(&self, t: f64) -> f64 {
        match &self.log {
            None => {
                let alpha = self.power_exponent().expect("power pair");
                self.basis.s(t).powf(alpha)
            }
            Some(log) => log.table.value(self.log_w(log, t)).unwrap_or_else(|e| {
                log::warn!("psi({t}) fell back to quadrature and failed: {e}");
                f64::NAN
            }),
        }
    }

    /// `ψ` by direct adaptive quadrature, bypassing the table.
    pub fn psi_direct(&self, t: f64) -> Result<f64> {
        match &self.log {
            None => Ok(self.psi(t)),
            Some(log) => log.table.direct(self.log_w(log, t)),
        }
    }

    /// `|ψ'|`.
    pub fn dpsi_abs(&self, t: f64) -> f64 {
        let (s, c) = (self.basis.s(t), self.basis.c(t));
        match &self.log {
            None => {
                let alpha = self.power_exponent().expect("power pair");
                alpha.abs() * s.powf(alpha - 1.0) * c
            }
            Some(log) => {
                let ell = log.table.u_e + self.log_w(log, t);
                ell.powf(log.s1) * s.powf(log.s2) * c
            }
        }
    }

    pub fn dpsi(&self, t: f64) -> f64 {
        self.psi_sign * self.dpsi_abs(t)
    }

    /// `(log ψ)'`.
    pub fn log_dpsi(&self, t: f64) -> f64 {
        match self.power_exponent() {
            Some(alpha) => alpha * self.basis.c(t) / self.basis.s(t),
            None => self.dpsi(t) / self.psi(t),
        }
    }

    /// Denominator density `φ^{p−1}|ψ'|`.
    pub fn w_den(&self, t: f64) -> f64 {
        let (s, c) = (self.basis.s(t), self.basis.c(t));
        let qn = self.q(t).powi(self.n as i32);
        match self.params {
            PairParams::Power { beta, .. } => {
                let alpha = self.power_exponent().expect("power pair");
                alpha.abs() * c * s.powf(beta) / qn
            }
            _ => self.phi_pm1(t) * self.dpsi_abs(t),
        }
    }

    /// Numerator density `φ^{p−1}ψ^p/|ψ'|^{p−1}`.
    pub fn w_num(&self, t: f64) -> f64 {
        let (s, c) = (self.basis.s(t), self.basis.c(t));
        let qn = self.q(t).powi(self.n as i32);
        let p = self.p;
        match self.params {
            PairParams::Power { beta, .. } => {
                let a = self.power_exponent().expect("power pair").abs();
                a.powf(1.0 - p) * c.powf(1.0 - p) * s.powf(p + beta) / qn
            }
            _ => self.phi_pm1(t) * self.psi(t).powf(p) / self.dpsi_abs(t).powf(p - 1.0),
        }
    }

    /// Constant and normalisation of the inequality in theorem form.
    ///
    /// Power pairs: weights `c_Λ^{1−p}s_Λ^{p+β}/qⁿ` and `c_Λ s_Λ^β/qⁿ`, constant
    /// `|(β+m−n)/p|^p`. Logarithmic pairs: weights `ℓ^{p+s₁}c_Λ^{1−p}s_Λ^{α}/qⁿ` and
    /// `ℓ^{s₁}c_Λ s_Λ^{α−p}/qⁿ` with `α = s₂ + p − (m−n) + 1`, `ℓ = log(s_Λ(D)/s_Λ)`,
    /// constant `(s/p)^p`; exact only in the equality case of the `ψ` bound.
    pub fn theorem_form(&self) -> Result<TheoremForm> {
        let p = self.p;
        match &self.log {
            None => {
                let a = self.power_exponent().expect("power pair").abs();
                Ok(TheoremForm {
                    constant: (a / p).powf(p),
                    factor: a.powf(p),
                    exact: true,
                })
            }
            Some(log) => {
                let s = self.bound_s.unwrap_or(log.max_bound_s);
                if s <= 0.0 {
                    return Err(HardyError::config(format!(
                        "no admissible bound constant s > 0 for this pair (largest admissible {s})"
                    )));
                }
                let equality = log.s2 == -1.0
                    && (s - log.max_bound_s).abs() <= 1e-12 * s
                    && log.table.u_e == 0.0
                    && match self.family() {
                        PairFamily::LogGlobal => (s + log.s1 + 1.0).abs() <= 1e-12 * s,
                        _ => (s - log.s1 - 1.0).abs() <= 1e-12 * s,
                    };
                Ok(TheoremForm {
                    constant: (s / p).powf(p),
                    factor: s.powf(p),
                    exact: equality,
                })
            }
        }
    }

    /// Numerator weight of the theorem form.
    pub fn theorem_num_weight(&self, t: f64) -> f64 {
        let (s, c) = (self.basis.s(t), self.basis.c(t));
        let qn = self.q(t).powi(self.n as i32);
        let p = self.p;
        match (&self.log, self.params) {
            (None, PairParams::Power { beta, .. }) => c.powf(1.0 - p) * s.powf(p + beta) / qn,
            (Some(log), _) => {
                let ell = log.table.u_e + self.log_w(log, t);
                let alpha = self.log_alpha(log);
                ell.powf(p + log.s1) * c.powf(1.0 - p) * s.powf(alpha) / qn
            }
            _ => unreachable!("power parameters always come without log data"),
        }
    }

    /// Denominator weight of the theorem form.
    pub fn theorem_den_weight(&self, t: f64) -> f64 {
        let (s, c) = (self.basis.s(t), self.basis.c(t));
        let qn = self.q(t).powi(self.n as i32);
        match (&self.log, self.params) {
            (None, PairParams::Power { beta, .. }) => c * s.powf(beta) / qn,
            (Some(log), _) => {
                let ell = log.table.u_e + self.log_w(log, t);
                let alpha = self.log_alpha(log);
                ell.powf(log.s1) * c * s.powf(alpha - self.p) / qn
            }
            _ => unreachable!("power parameters always come without log data"),
        }
    }

    /// Logarithms `(log s_Λ, log c_Λ, log qⁿ)` at `t`.
    fn ln_parts(&self, t: f64) -> (f64, f64, f64) {
        let lq = if self.n == 0 { 0.0 } else { self.n as f64 * self.comparison().ln_h(t) };
        (self.basis.ln_s(t), self.basis.ln_c(t), lq)
    }

    /// `log ψ`, computed without forming `ψ` for power pairs.
    pub fn ln_psi(&self, t: f64) -> f64 {
        match self.power_exponent() {
            Some(alpha) => alpha * self.basis.ln_s(t),
            None => self.psi(t).ln(),
        }
    }

    /// `log|(log ψ)'|`, finite for large hyperbolic radii.
    pub fn ln_abs_log_dpsi(&self, t: f64) -> f64 {
        match self.power_exponent() {
            Some(alpha) => alpha.abs().ln() + self.basis.ln_c(t) - self.basis.ln_s(t),
            None => (self.dpsi_abs(t) / self.psi(t)).ln(),
        }
    }

    /// `log w_den`, finite where `w_den` itself would overflow.
    pub fn ln_w_den(&self, t: f64) -> f64 {
        let (ls, lc, lq) = self.ln_parts(t);
        match (&self.log, self.params) {
            (None, PairParams::Power { beta, .. }) => {
                let a = self.power_exponent().expect("power pair").abs();
                a.ln() + lc + beta * ls - lq
            }
            (Some(log), _) => {
                let ell = log.table.u_e + self.log_w(log, t);
                let k = (self.m - self.n - 1) as f64;
                -lq - k * ls + log.s1 * ell.ln() + log.s2 * ls + lc
            }
            _ => unreachable!("power parameters always come without log data"),
        }
    }

    /// `log w_num`, finite where `w_num` itself would overflow.
    pub fn ln_w_num(&self, t: f64) -> f64 {
        let (ls, lc, lq) = self.ln_parts(t);
        let p = self.p;
        match (&self.log, self.params) {
            (None, PairParams::Power { beta, .. }) => {
                let a = self.power_exponent().expect("power pair").abs();
                (1.0 - p) * (a.ln() + lc) + (p + beta) * ls - lq
            }
            (Some(log), _) => {
                let ell = log.table.u_e + self.log_w(log, t);
                let k = (self.m - self.n - 1) as f64;
                let ln_dpsi = log.s1 * ell.ln() + log.s2 * ls + lc;
                -lq - k * ls + p * self.psi(t).ln() - (p - 1.0) * ln_dpsi
            }
            _ => unreachable!("power parameters always come without log data"),
        }
    }

    /// `log` of [`Self::theorem_num_weight`].
    pub fn ln_theorem_num_weight(&self, t: f64) -> f64 {
        let (ls, lc, lq) = self.ln_parts(t);
        let p = self.p;
        match (&self.log, self.params) {
            (None, PairParams::Power { beta, .. }) => (1.0 - p) * lc + (p + beta) * ls - lq,
            (Some(log), _) => {
                let ell = log.table.u_e + self.log_w(log, t);
                (p + log.s1) * ell.ln() + (1.0 - p) * lc + self.log_alpha(log) * ls - lq
            }
            _ => unreachable!("power parameters always come without log data"),
        }
    }

    /// `log` of [`Self::theorem_den_weight`].
    pub fn ln_theorem_den_weight(&self, t: f64) -> f64 {
        let (ls, lc, lq) = self.ln_parts(t);
        match (&self.log, self.params) {
            (None, PairParams::Power { beta, .. }) => lc + beta * ls - lq,
            (Some(log), _) => {
                let ell = log.table.u_e + self.log_w(log, t);
                log.s1 * ell.ln() + lc + (self.log_alpha(log) - self.p) * ls - lq
            }
            _ => unreachable!("power parameters always come without log data"),
        }
    }

    fn log_alpha(&self, log: &LogData) -> f64 {
        log.s2 + self.p - (self.m - self.n) as f64 + 1.0
    }

    /// Right-hand side `s^{−1} ℓ^{s₁+1} s_Λ^{s₂+1}` of the `ψ` bound.
    pub fn psi_bound(&self, t: f64) -> Option<f64> {
        self.log.as_ref().map(|log| {
            let ell = log.table.u_e + self.log_w(log, t);
            let s = self.bound_s.unwrap_or(log.max_bound_s);
            ell.powf(log.s1 + 1.0) * self.basis.s(t).powf(log.s2 + 1.0) / s
        })
    }

    /// Closed form of `ψ` when `s₂ = −1`.
    pub fn psi_closed_form(&self, t: f64) -> Option<f64> {
        let log = self.log.as_ref()?;
        if log.s2 != -1.0 {
            return None;
        }
        let ell = log.table.u_e + self.log_w(log, t);
        let e1 = log.s1 + 1.0;
        Some(match self.family() {
            PairFamily::LogGlobal => ell.powf(e1) / e1.abs(),
            _ => (ell.powf(e1) - log.table.u_e.powf(e1)) / e1,
        })
    }

    /// Largest relative deviation of the tabulated `ψ` from direct quadrature over
    /// `points` radii placed between table nodes.
    pub fn psi_table_check(&self, points: usize) -> Result<f64> {
        let Some(log) = &self.log else { return Ok(0.0) };
        let table = &log.table;
        let n = table.nodes.len();
        let mut worst = 0.0f64;
        for k in 0..points {
            let i = 1 + (k * (n - 3)) / points.max(1);
            let w = (table.nodes[i] * table.nodes[i + 1]).sqrt();
            let a = table.value(w)?;
            let b = table.direct(w)?;
            if a.is_finite() && b.is_finite() && b != 0.0 {
                worst = worst.max(((a - b) / b).abs());
            }
        }
        Ok(worst)
    }

    /// Checked densities on the validity interval.
    pub fn densities(&self) -> WeightDensities<'_> {
        WeightDensities {
            pair: self,
            breakpoints: Vec::new(),
        }
    }
}

/// Hardy weight densities of a pair, with argument checks.
#[derive(Debug, Clone)]
pub struct WeightDensities<'a> {
    pub pair: &'a WeightPair,
    /// Interior kinks; the three families are smooth on their validity intervals.
    pub breakpoints: Vec<f64>,
}

impl WeightDensities<'_> {
    fn check(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && self.pair.t_end.exceeds(t)) {
            return Err(HardyError::domain(format!(
                "t = {t} outside the validity interval (0, {})",
                self.pair.t_end
            )));
        }
        if self.pair.dpsi_abs(t) == 0.0 {
            return Err(HardyError::domain(format!("t = {t} is an excluded point: psi' = 0")));
        }
        Ok(())
    }

    pub fn w_num(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.pair.w_num(t))
    }

    pub fn w_den(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.pair.w_den(t))
    }

    pub fn log_dpsi(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.pair.log_dpsi(t))
    }
}

/// Checked densities of `pair`.
pub fn densities(pair: &WeightPair) -> WeightDensities<'_> {
    pair.densities()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assumption {
    /// Test functions in `C₀^∞(Ω_Σ)`.
    A3_1,
    /// Test functions in `C₀^∞(Ω)`.
    A4_1,
    /// Test functions in `C₀^∞(Ω, Σ)`.
    A4_5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseStatus {
    Verified,
    VerifiedNumerically,
    UserAsserted,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditClause {
    pub id: String,
    pub status: ClauseStatus,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionAudit {
    pub assumption: Assumption,
    pub clauses: Vec<AuditClause>,
    pub passed: bool,
}

impl AssumptionAudit {
    pub fn clause(&self, id: &str) -> Option<&AuditClause> {
        self.clauses.iter().find(|c| c.id == id)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.clauses
            .iter()
            .filter(|c| c.status == ClauseStatus::Failed)
            .map(|c| c.id.as_str())
            .collect()
    }
}

const GRID_POINTS: usize = 1000;

/// Open radial interval examined by an audit.
fn audit_range(pair: &WeightPair, geom: &ModelGeometry, dom: &DomainSpec) -> (f64, ExtReal<f64>) {
    let hi = dom.t_max.min(pair.t_end).min(geom.t_end());
    (dom.t_min, hi)
}

/// Grid in the open interval `(lo, hi)`, clustered toward both finite ends.
pub fn audit_grid(lo: f64, hi: ExtReal<f64>, n: usize) -> Vec<f64> {
    match hi {
        ExtReal::Finite(h) => (0..n)
            .map(|i| {
                let theta = (i as f64 + 0.5) / n as f64;
                let x = 0.5 * (1.0 - (std::f64::consts::PI * theta).cos());
                lo + (h - lo) * x
            })
            .filter(|&t| t > lo && t < h)
            .collect(),
        _ => {
            let a = if lo > 0.0 { lo * (1.0 + 1e-6) } else { 1e-6 };
            // Far enough for the decay of every family, short of hyperbolic overflow.
            let b = a.max(1.0) * 50.0;
            (0..n)
                .map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64))
                .collect()
        }
    }
}

fn clause(id: &str, status: ClauseStatus, evidence: impl Into<String>) -> AuditClause {
    AuditClause {
        id: id.into(),
        status,
        evidence: evidence.into(),
    }
}

fn well_defined(pair: &WeightPair, dom: &DomainSpec, grid: &[f64]) -> AuditClause {
    let covers = if dom.t_max_attained && pair.family() == PairFamily::Power {
        pair.t_end.exceeds(dom.t_max.to_float())
    } else {
        dom.t_max <= pair.t_end
    };
    if !covers {
        return clause(
            "well_defined",
            ClauseStatus::Failed,
            format!("domain reaches t = {} beyond the validity end {}", dom.t_max, pair.t_end),
        );
    }
    if let Some(&t) = grid.iter().find(|&&t| {
        let (phi, psi) = (pair.phi(t), pair.psi(t));
        !(phi.is_finite() && phi > 0.0 && psi.is_finite() && psi >= 0.0)
    }) {
        return clause(
            "well_defined",
            ClauseStatus::Failed,
            format!("phi or psi not finite and positive at t = {t:e}"),
        );
    }
    clause(
        "well_defined",
        ClauseStatus::VerifiedNumerically,
        format!("phi > 0 and psi >= 0 finite on {} grid points", grid.len()),
    )
}

fn monotone(pair: &WeightPair, grid: &[f64]) -> AuditClause {
    let sign = pair.psi_sign;
    let bad_derivative = grid.iter().find(|&&t| !(pair.dpsi(t) * sign > 0.0));
    let values: Vec<f64> = grid.iter().map(|&t| pair.psi(t)).collect();
    let bad_values = values.windows(2).position(|w| (w[1] - w[0]) * sign < 0.0);
    let dir = if sign > 0.0 { "increasing" } else { "decreasing" };
    match (bad_derivative, bad_values) {
        (None, None) => clause(
            "psi_monotone",
            ClauseStatus::VerifiedNumerically,
            format!("psi strictly {dir}; sign of psi' constant on {} grid points", grid.len()),
        ),
        (Some(&t), _) => clause(
            "psi_monotone",
            ClauseStatus::Failed,
            format!("psi' has the wrong sign at t = {t:e}"),
        ),
        (None, Some(i)) => clause(
            "psi_monotone",
            ClauseStatus::Failed,
            format!("psi not {dir} between t = {:e} and {:e}", grid[i], grid[i + 1]),
        ),
    }
}

/// `sgn(ψ')·(Δr − G_{Λ,K}) ≥ 0` through the comparison profile of the geometry.
fn sign_condition(pair: &WeightPair, geom: &ModelGeometry, grid: &[f64]) -> AuditClause {
    let pair_g = match GProfile::new(pair.m, pair.n, pair.comparison()) {
        Ok(g) => g,
        Err(e) => return clause("sign_condition", ClauseStatus::UserAsserted, format!("user_asserted required: {e}")),
    };
    let (lower, upper) = geom.curvature_bounds();
    let (route, bound) = match (&geom.jacobian, pair.psi_sign > 0.0) {
        (JacobianKind::ExactSpaceForm, _) => ("exact G of the model", geom.pair()),
        (JacobianKind::Custom(_), true) => ("Delta r >= G of the upper bound", upper),
        (JacobianKind::Custom(_), false) => ("Delta r <= G of the lower bound", lower),
    };
    let geom_g = match GProfile::new(geom.m, geom.n, bound) {
        Ok(g) => g,
        Err(e) => return clause("sign_condition", ClauseStatus::UserAsserted, format!("user_asserted required: {e}")),
    };
    let mut worst = f64::INFINITY;
    let mut worst_t = f64::NAN;
    for &t in grid {
        if !(pair_g.domain_end.exceeds(t) && geom_g.domain_end.exceeds(t)) {
            continue;
        }
        let (a, b) = (geom_g.eval_unchecked(t), pair_g.eval_unchecked(t));
        let margin = pair.psi_sign * (a - b);
        let scaled = margin / (1.0 + a.abs().max(b.abs()));
        if scaled < worst {
            worst = scaled;
            worst_t = t;
        }
    }
    if worst >= -1e-9 {
        clause(
            "sign_condition",
            ClauseStatus::VerifiedNumerically,
            format!("{route}: sgn(psi')(G_geom - G_Lambda,K) >= 0 on the grid, worst scaled margin {worst:e}"),
        )
    } else {
        clause(
            "sign_condition",
            ClauseStatus::UserAsserted,
            format!("user_asserted required: {route} gives scaled margin {worst:e} at t = {worst_t:e}"),
        )
    }
}

fn zero_set() -> AuditClause {
    clause(
        "negligible_zero_set",
        ClauseStatus::Verified,
        "phi and psi vanish at most at isolated radii for all three families",
    )
}

/// Functions whose local integrability the assumptions require, times `detA`.
fn integrability_targets<'a>(
    pair: &'a WeightPair,
    geom: &'a ModelGeometry,
) -> Vec<(&'static str, Box<dyn Fn(f64) -> f64 + Sync + 'a>)> {
    let jac = move |t: f64| geom.jacobian_unchecked(t).abs();
    vec![
        ("phi^(p-1)", Box::new(move |t| pair.phi_pm1(t) * jac(t))),
        ("phi^(p-1) psi", Box::new(move |t| pair.phi_pm1(t) * pair.psi(t) * jac(t))),
        ("phi^(p-1) |psi'|", Box::new(move |t| pair.w_den(t) * jac(t))),
        ("w_num", Box::new(move |t| pair.w_num(t) * jac(t))),
    ]
}

/// Log-slope test at `t → lo` or `t → hi` from a reference point inside `(lo, hi)`.
fn end_test(f: &(dyn Fn(f64) -> f64 + Sync), at_lo: bool, lo: f64, hi: f64) -> Result<Integrability> {
    let g = Integrand::new(f);
    let reach = 0.5 * (hi - lo).min(1.0);
    if at_lo {
        log_slope_divergence_test(&g, lo, lo + reach)
    } else {
        log_slope_divergence_test_right(&g, hi - reach, hi)
    }
}

/// Tests local integrability of the selected targets at `t → 0` and at an attained `t_max`.
fn integrability(
    id: &str,
    targets: &[(&'static str, Box<dyn Fn(f64) -> f64 + Sync + '_>)],
    at_zero: &[&str],
    at_max: &[&str],
    lo: f64,
    hi: ExtReal<f64>,
    max_attained: bool,
) -> AuditClause {
    let mut notes = Vec::new();
    let mut failed = false;
    let mut inconclusive = false;
    let span_hi = match hi {
        ExtReal::Finite(h) => h,
        _ => lo + 2.0,
    };
    for (name, f) in targets {
        for (which, names, active) in [("t -> 0", at_zero, lo == 0.0), ("t -> t_max", at_max, max_attained)] {
            if !active || !names.contains(name) {
                continue;
            }
            match end_test(f.as_ref(), which == "t -> 0", lo, span_hi) {
                Ok(Integrability::Convergent) => notes.push(format!("{name} convergent as {which}")),
                Ok(Integrability::Divergent) => {
                    failed = true;
                    notes.push(format!("{name} divergent as {which}"));
                }
                Ok(Integrability::Inconclusive) => {
                    inconclusive = true;
                    notes.push(format!("{name} inconclusive as {which}"));
                }
                Err(e) => {
                    failed = true;
                    notes.push(format!("{name} not evaluable as {which}: {e}"));
                }
            }
        }
    }
    let status = if failed {
        ClauseStatus::Failed
    } else if inconclusive {
        ClauseStatus::UserAsserted
    } else if notes.is_empty() {
        ClauseStatus::Verified
    } else {
        ClauseStatus::VerifiedNumerically
    };
    if notes.is_empty() {
        notes.push("no singular end inside the domain; continuous densities are locally integrable".into());
    }
    clause(id, status, notes.join("; "))
}

fn sigma_inside(dom: &DomainSpec) -> bool {
    dom.t_min == 0.0 && matches!(dom.kind, DomainKind::FullSpace | DomainKind::Punctured | DomainKind::Tube)
}

/// Behaviour of `ψ'` as `t → 0`: `Some(true)` bounded, `Some(false)` unbounded.
fn dpsi_bounded_at_zero(pair: &WeightPair) -> bool {
    match pair.params {
        PairParams::Power { .. } => pair.power_exponent().expect("power pair") >= 1.0,
        // ψ' ~ ℓ^{s₁} t^{s₂} with ℓ → ∞.
        PairParams::LogGlobal { s1, s2, .. } | PairParams::LogGeneral { s1, s2, .. } => {
            s2 > 0.0 || (s2 == 0.0 && s1 <= 0.0)
        }
    }
}

/// `ψ(0⁺)` finite.
fn psi_finite_at_zero(pair: &WeightPair) -> bool {
    match pair.params {
        PairParams::Power { .. } => pair.power_exponent().expect("power pair") > 0.0,
        PairParams::LogGlobal { .. } => true,
        PairParams::LogGeneral { s1, s2, .. } => s2 > -1.0 || (s2 == -1.0 && s1 < -1.0),
    }
}

/// Audits the machine-checkable clauses of an assumption for `(pair, geom, dom)`.
///
/// Divergence-type clauses are certified only through the `G`-comparison sufficient
/// condition; when it fails the clause is reported as user-asserted, never failed.
pub fn audit_assumption(pair: &WeightPair, geom: &ModelGeometry, dom: &DomainSpec, which: Assumption) -> AssumptionAudit {
    let (lo, hi) = audit_range(pair, geom, dom);
    let mut clauses = Vec::new();
    if let Err(e) = dom.validate(geom) {
        clauses.push(clause("domain", ClauseStatus::Failed, e.to_string()));
    }
    if pair.m != geom.m || pair.n != geom.n {
        clauses.push(clause(
            "dimensions",
            ClauseStatus::Failed,
            format!("pair built for (m, n) = ({}, {}), geometry has ({}, {})", pair.m, pair.n, geom.m, geom.n),
        ));
    }
    if !(ExtReal::Finite(lo) < hi) {
        clauses.push(clause("domain", ClauseStatus::Failed, "empty radial interval"));
        return finish(which, clauses);
    }
    let grid = audit_grid(lo, hi, GRID_POINTS);
    let targets = integrability_targets(pair, geom);
    let max_attained = dom.t_max_attained && dom.t_max.is_finite();
    let all = ["phi^(p-1)", "phi^(p-1) psi", "phi^(p-1) |psi'|", "w_num"];
    if pair.log.is_some() {
        match pair.psi_table_check(50) {
            Ok(err) if err <= 1e-9 => clauses.push(clause(
                "psi_table",
                ClauseStatus::VerifiedNumerically,
                format!("tabulated psi within {err:e} of direct quadrature at 50 points"),
            )),
            Ok(err) => clauses.push(clause(
                "psi_table",
                ClauseStatus::Failed,
                format!("tabulated psi deviates by {err:e} from direct quadrature"),
            )),
            Err(e) => clauses.push(clause("psi_table", ClauseStatus::Failed, e.to_string())),
        }
    }
    match which {
        Assumption::A3_1 => {
            clauses.push(well_defined(pair, dom, &grid));
            clauses.push(monotone(pair, &grid));
            clauses.push(sign_condition(pair, geom, &grid));
            clauses.push(integrability("local_integrability", &targets, &[], &all, lo, hi, max_attained));
            clauses.push(zero_set());
        }
        Assumption::A4_1 => {
            let inside = sigma_inside(dom);
            let mut a = well_defined(pair, dom, &grid);
            if inside && a.status != ClauseStatus::Failed {
                if psi_finite_at_zero(pair) {
                    a.evidence.push_str("; psi(0+) finite");
                } else {
                    a = clause("well_defined", ClauseStatus::Failed, "psi(0+) is infinite: no continuous extension to Sigma");
                }
            }
            clauses.push(a);
            clauses.push(monotone(pair, &grid));
            clauses.push(if !inside {
                clause("dpsi_at_sigma", ClauseStatus::Verified, "Sigma is not inside the domain")
            } else if dpsi_bounded_at_zero(pair) {
                clause("dpsi_at_sigma", ClauseStatus::Verified, "psi'(0+) is finite")
            } else if pair.psi_sign < 0.0 {
                clause("dpsi_at_sigma", ClauseStatus::Failed, "psi'(0+) is unbounded and psi' < 0")
            } else {
                let f = |t: f64| pair.phi_pm1(t) * pair.psi(t).powf(pair.p) * geom.jacobian_unchecked(t).abs();
                let h = hi.finite().unwrap_or(lo + 2.0);
                match end_test(&f, true, lo, h) {
                    Ok(Integrability::Convergent) => clause(
                        "dpsi_at_sigma",
                        ClauseStatus::VerifiedNumerically,
                        "psi'(0+) = +inf with psi' > 0; phi^(p-1) psi^p locally integrable at Sigma",
                    ),
                    Ok(v) => clause(
                        "dpsi_at_sigma",
                        ClauseStatus::Failed,
                        format!("psi'(0+) = +inf and phi^(p-1) psi^p is {v:?} at Sigma"),
                    ),
                    Err(e) => clause("dpsi_at_sigma", ClauseStatus::Failed, e.to_string()),
                }
            });
            clauses.push(sign_condition(pair, geom, &grid));
            let zero: &[&str] = if inside { &all } else { &[] };
            clauses.push(integrability("local_integrability", &targets, zero, &all, lo, hi, max_attained));
            clauses.push(zero_set());
        }
        Assumption::A4_5 => {
            let whole = geom.t_end();
            let covers = match whole {
                ExtReal::Finite(w) => pair.t_end.exceeds(w),
                _ => pair.t_end == ExtReal::PosInf,
            };
            clauses.push(if covers {
                let mut c = well_defined(pair, dom, &grid);
                c.evidence.push_str(&format!("; validity (0, {}) covers M minus Sigma", pair.t_end));
                c
            } else {
                clause(
                    "well_defined",
                    ClauseStatus::Failed,
                    format!("validity (0, {}) does not cover M minus Sigma, which reaches r = {whole}", pair.t_end),
                )
            });
            clauses.push(monotone(pair, &grid));
            clauses.push(sign_condition(pair, geom, &grid));
            // w_num must be integrable up to Σ; the others only away from it.
            let zero: &[&str] = if lo == 0.0 { &["w_num"] } else { &[] };
            clauses.push(integrability("local_integrability", &targets, zero, &all[..3], lo, hi, max_attained));
            clauses.push(zero_set());
            let logw: Vec<(f64, f64)> = grid.iter().map(|&t| (t, pair.w_num(t).ln())).collect();
            let slope = logw
                .windows(2)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(0.0f64, f64::max);
            clauses.push(if slope.is_finite() {
                clause(
                    "log_w_num_derivative",
                    ClauseStatus::VerifiedNumerically,
                    format!("max |d/dr log w_num| on the grid = {slope:e}"),
                )
            } else {
                clause("log_w_num_derivative", ClauseStatus::Failed, "d/dr log w_num not finite on the grid")
            });
        }
    }
    finish(which, clauses)
}

fn finish(which: Assumption, clauses: Vec<AuditClause>) -> AssumptionAudit {
    let passed = clauses.iter().all(|c| c.status != ClauseStatus::Failed);
    AssumptionAudit {
        assumption: which,
        clauses,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn euclidean_power_pair_values() {
        let pair = make_power_pair(0.0, 0.0, -2.0, 2.0, 3, 0).unwrap();
        assert_relative_eq!(pair.phi(2.0), 0.25, max_relative = 1e-15);
        assert_relative_eq!(pair.psi(2.0), 2.0, max_relative = 1e-15);
        assert_relative_eq!(pair.w_den(2.0), 0.25, max_relative = 1e-15);
        assert_relative_eq!(pair.w_num(1.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(pair.w_den(1.0), 1.0, max_relative = 1e-15);
        assert_eq!(pair.t_end(), ExtReal::PosInf);
    }

    #[test]
    fn constant_psi_is_rejected() {
        let err = make_power_pair(0.0, 0.0, -3.0, 2.0, 3, 0).unwrap_err();
        assert!(matches!(err, HardyError::Config(_)));
    }

    #[test]
    fn log_global_closed_form_point() {
        let pair = make_log_global_pair(0.0, 0.0, -2.0, -1.0, 1.0, 2.0, 3, 0).unwrap();
        let t = (-1.0f64).exp();
        assert_relative_eq!(pair.psi(t), 1.0, max_relative = 1e-12);
        assert_relative_eq!(pair.psi_closed_form(t).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn log_general_closed_form_point() {
        let pair = make_log_general_pair(0.0, 0.0, 0.0, -1.0, 1.0, 1.0, 2.0, 3, 0).unwrap();
        assert_relative_eq!(pair.psi(0.5), std::f64::consts::LN_2, max_relative = 1e-12);
        assert_eq!(pair.psi(1.0), 0.0);
    }

    #[test]
    fn log_global_divergent_region_is_rejected() {
        assert!(make_log_global_pair(0.0, 0.0, -0.5, -1.0, 1.0, 2.0, 3, 0).is_err());
        assert!(make_log_global_pair(0.0, 0.0, -2.0, -1.5, 1.0, 2.0, 3, 0).is_err());
    }

    #[test]
    fn s_difference_matches_direct_away_from_cancellation() {
        for lam in [-2.0, 0.0, 0.7] {
            let b = ComparisonBasis::new(lam).unwrap();
            assert_relative_eq!(s_difference(lam, 1.5, 0.4), b.s(1.5) - b.s(0.4), max_relative = 1e-13);
        }
    }

    #[test]
    fn table_agrees_with_direct_quadrature() {
        let pair = make_log_global_pair(-1.0, 0.0, -1.5, 0.3, 1.2, 2.0, 3, 0).unwrap();
        assert!(pair.psi_table_check(20).unwrap() < 1e-9);
        let pair = make_log_general_pair(0.5, 0.0, 0.4, -1.7, 1.5, 1.1, 2.0, 3, 1).unwrap();
        assert!(pair.psi_table_check(20).unwrap() < 1e-9);
    }
}
