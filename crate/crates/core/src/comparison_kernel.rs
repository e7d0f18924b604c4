//! Curvature comparison functions `s_λ`, `c_λ`, their zeros, and the mean-curvature
//! comparison function `G_{λ,κ}`.
//!
//! All items are generic over the scalar type. Near `λ = 0` (when `|λ|·t² < 1e-8`)
//! the trigonometric and hyperbolic forms are replaced by a four-term Taylor series
//! in `λt²`, which keeps the three branches continuous in `λ`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::ext_real::ExtReal;
use crate::Scalar;

#[inline]
fn k<T: Scalar>(x: f64) -> T {
    T::from(x).expect("constant representable in scalar type")
}

fn series_threshold<T: Scalar>() -> T {
    k(1e-8)
}

/// `s_λ(t)` without argument checks.
fn s_raw<T: Scalar>(lambda: T, t: T) -> T {
    let x = lambda * t * t;
    if x.abs() < series_threshold() {
        t * (T::one() - x / k(6.0) + x * x / k(120.0) - x * x * x / k(5040.0))
    } else if lambda > T::zero() {
        let q = lambda.sqrt();
        (q * t).sin() / q
    } else {
        let q = (-lambda).sqrt();
        (q * t).sinh() / q
    }
}

/// `c_λ(t)` without argument checks.
fn c_raw<T: Scalar>(lambda: T, t: T) -> T {
    let x = lambda * t * t;
    if x.abs() < series_threshold() {
        T::one() - x / k(2.0) + x * x / k(24.0) - x * x * x / k(720.0)
    } else if lambda > T::zero() {
        (lambda.sqrt() * t).cos()
    } else {
        ((-lambda).sqrt() * t).cosh()
    }
}

/// `(√−λ·t, √−λ)` when `λ < 0` and `√−λ·t > 20`.
fn large_hyperbolic<T: Scalar>(lambda: T, t: T) -> Option<(T, T)> {
    if lambda < T::zero() {
        let q = (-lambda).sqrt();
        let x = q * t;
        if x > k(20.0) {
            return Some((x, q));
        }
    }
    None
}

fn check_arg<T: Scalar>(name: &str, x: T) -> Result<()> {
    if x.is_nan() {
        return Err(HardyError::domain(format!("{name} is NaN")));
    }
    Ok(())
}

fn check_t<T: Scalar>(t: T) -> Result<()> {
    check_arg("t", t)?;
    if t < T::zero() {
        return Err(HardyError::domain(format!("t = {t} is negative")));
    }
    Ok(())
}

/// `s_λ(t)`: `sin(√λ t)/√λ`, `t`, or `sinh(√−λ t)/√−λ` by the sign of `λ`.
///
/// Values with `t > 2𝔯_λ` (for `λ > 0`) are returned but lie outside the range
/// on which the comparison theory is used; see [`ComparisonBasis::in_range`].
pub fn s_lambda<T: Scalar>(lambda: T, t: T) -> Result<T> {
    check_arg("lambda", lambda)?;
    check_t(t)?;
    Ok(s_raw(lambda, t))
}

/// `c_λ(t) = s_λ'(t)`: `cos(√λ t)`, `1`, or `cosh(√−λ t)`.
pub fn c_lambda<T: Scalar>(lambda: T, t: T) -> Result<T> {
    check_arg("lambda", lambda)?;
    check_t(t)?;
    Ok(c_raw(lambda, t))
}

/// `𝔯_λ`: `π/(2√λ)` for `λ > 0`, `+inf` otherwise.
pub fn r_lambda<T: Scalar>(lambda: T) -> ExtReal<T> {
    if lambda > T::zero() {
        ExtReal::Finite(T::FRAC_PI_2() / lambda.sqrt())
    } else {
        ExtReal::PosInf
    }
}

/// Evaluator for `s_λ`, `c_λ` at a fixed curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonBasis<T> {
    pub lambda: T,
}

impl<T: Scalar> ComparisonBasis<T> {
    pub fn new(lambda: T) -> Result<Self> {
        check_arg("lambda", lambda)?;
        Ok(Self { lambda })
    }

    pub fn s(&self, t: T) -> T {
        s_raw(self.lambda, t)
    }

    pub fn c(&self, t: T) -> T {
        c_raw(self.lambda, t)
    }

    /// `log s_λ(t)`, finite for large hyperbolic arguments.
    pub fn ln_s(&self, t: T) -> T {
        match large_hyperbolic(self.lambda, t) {
            Some((x, q)) => x - k::<T>(2.0).ln() + (-(-x - x).exp()).ln_1p() - q.ln(),
            None => self.s(t).ln(),
        }
    }

    /// `log c_λ(t)`, finite for large hyperbolic arguments.
    pub fn ln_c(&self, t: T) -> T {
        match large_hyperbolic(self.lambda, t) {
            Some((x, _)) => x - k::<T>(2.0).ln() + (-x - x).exp().ln_1p(),
            None => self.c(t).ln(),
        }
    }

    /// `s_λ' = c_λ`.
    pub fn ds(&self, t: T) -> T {
        self.c(t)
    }

    /// `c_λ' = −λ s_λ`.
    pub fn dc(&self, t: T) -> T {
        -self.lambda * self.s(t)
    }

    pub fn r(&self) -> ExtReal<T> {
        r_lambda(self.lambda)
    }

    /// `true` when `0 ≤ t ≤ 2𝔯_λ` (always for `λ ≤ 0`).
    pub fn in_range(&self, t: T) -> bool {
        t >= T::zero() && self.r().scale(k(2.0)) >= ExtReal::Finite(t)
    }
}

/// Curvature bound `(λ, κ)`: sectional curvature and umbilical mean curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvaturePair<T> {
    pub lambda: T,
    pub kappa: T,
}

impl<T: Scalar> fmt::Display for CurvaturePair<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lambda, self.kappa)
    }
}

impl<T: Scalar> CurvaturePair<T> {
    pub fn new(lambda: T, kappa: T) -> Result<Self> {
        check_arg("lambda", lambda)?;
        check_arg("kappa", kappa)?;
        Ok(Self { lambda, kappa })
    }

    /// Componentwise partial order `(λ,κ) ≤ (Λ,K)`.
    pub fn le(&self, other: &Self) -> bool {
        self.lambda <= other.lambda && self.kappa <= other.kappa
    }

    pub fn basis(&self) -> ComparisonBasis<T> {
        ComparisonBasis {
            lambda: self.lambda,
        }
    }

    /// `c_λ(t) − κ s_λ(t)`.
    pub fn h(&self, t: T) -> T {
        c_raw(self.lambda, t) - self.kappa * s_raw(self.lambda, t)
    }

    /// `log(c_λ(t) − κ s_λ(t))`, finite for large hyperbolic arguments.
    pub fn ln_h(&self, t: T) -> T {
        match large_hyperbolic(self.lambda, t) {
            Some((x, q)) => {
                let r = self.kappa / q;
                let e = (-x - x).exp();
                x - k::<T>(2.0).ln() + (T::one() - r + e * (T::one() + r)).ln()
            }
            None => self.h(t).ln(),
        }
    }

    /// `(c_λ − κ s_λ)'(t) = −λ s_λ(t) − κ c_λ(t)`.
    pub fn dh(&self, t: T) -> T {
        -self.lambda * s_raw(self.lambda, t) - self.kappa * c_raw(self.lambda, t)
    }

    /// `𝔠_{λ,κ}`, the first positive zero of `c_λ − κ s_λ`, from the closed-form table.
    ///
    /// Debug builds cross-check the table against [`CurvaturePair::first_zero_bisect`].
    pub fn first_zero(&self) -> ExtReal<T> {
        let z = self.first_zero_table();
        #[cfg(debug_assertions)]
        self.assert_against_bisection(z);
        z
    }

    fn first_zero_table(&self) -> ExtReal<T> {
        let (l, kap) = (self.lambda, self.kappa);
        let zero = T::zero();
        if l > zero {
            let q = l.sqrt();
            if kap > zero {
                ExtReal::Finite((q / kap).atan() / q)
            } else if kap == zero {
                ExtReal::Finite(T::FRAC_PI_2() / q)
            } else {
                ExtReal::Finite((T::PI() - (q / kap.abs()).atan()) / q)
            }
        } else if l == zero {
            if kap > zero {
                ExtReal::Finite(T::one() / kap)
            } else {
                ExtReal::PosInf
            }
        } else {
            let q = (-l).sqrt();
            if kap > zero && kap * kap > -l {
                ExtReal::Finite((q / kap).atanh() / q)
            } else {
                ExtReal::PosInf
            }
        }
    }

    /// Sign-safe form of `c_λ − κ s_λ`; for `λ < 0` rescales by `2e^{−√−λ t}` to avoid overflow.
    fn h_scaled(&self, t: T) -> T {
        if self.lambda < T::zero() && (-self.lambda * t * t) >= series_threshold() {
            let q = (-self.lambda).sqrt();
            let ratio = self.kappa / q;
            let e = (-k::<T>(2.0) * q * t).exp();
            (T::one() - ratio) + (T::one() + ratio) * e
        } else {
            self.h(t)
        }
    }

    /// `𝔠_{λ,κ}` by bracketing and bisection on `c_λ − κ s_λ`, independent of the table.
    pub fn first_zero_bisect(&self) -> ExtReal<T> {
        let zero = T::zero();
        let two = k::<T>(2.0);
        let (mut lo, mut hi);
        if self.lambda > zero {
            // c − κ s = −1 at t = π/√λ, and c − κ s has exactly one zero before it.
            lo = zero;
            hi = T::PI() / self.lambda.sqrt();
        } else {
            lo = zero;
            hi = T::one();
            let mut iters = 0;
            while self.h_scaled(hi) >= zero {
                lo = hi;
                hi = hi * two;
                iters += 1;
                if !hi.is_finite() || iters > 4000 {
                    return ExtReal::PosInf;
                }
            }
        }
        for _ in 0..400 {
            let mid = (lo + hi) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.h_scaled(mid) >= zero {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        ExtReal::Finite((lo + hi) / two)
    }

    #[cfg(debug_assertions)]
    fn assert_against_bisection(&self, z: ExtReal<T>) {
        let b = self.first_zero_bisect();
        match (z, b) {
            (ExtReal::Finite(zt), ExtReal::Finite(zb)) => {
                // Root conditioning: roundoff in c − κ s divided by its slope.
                let noise = k::<T>(16.0)
                    * T::epsilon()
                    * (c_raw(self.lambda, zt).abs() + (self.kappa * s_raw(self.lambda, zt)).abs());
                let slope = self.dh(zt).abs();
                let cond = if slope > T::zero() {
                    noise / slope
                } else {
                    T::infinity()
                };
                let tol = k::<T>(1e-12).max(k::<T>(64.0) * T::epsilon()) * zt.max(T::one()) + cond;
                debug_assert!(
                    (zt - zb).abs() <= tol,
                    "first_zero table {zt} disagrees with bisection {zb} for {self}"
                );
            }
            (ExtReal::PosInf, ExtReal::PosInf) => {}
            // Zeros beyond the representable search range are treated as infinite.
            (ExtReal::Finite(zt), ExtReal::PosInf) => {
                debug_assert!(zt > k(1e30), "table zero {zt} missed by bisection for {self}")
            }
            (ExtReal::PosInf, ExtReal::Finite(zb)) => {
                debug_assert!(false, "table gives inf, bisection gives {zb} for {self}")
            }
        }
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m < 2 {
        return Err(HardyError::config(format!("ambient dimension m = {m} must be at least 2")));
    }
    if n > m - 1 {
        return Err(HardyError::config(format!(
            "submanifold dimension n = {n} must lie in [0, m-1] = [0, {}]",
            m - 1
        )));
    }
    Ok(())
}

/// `𝔱_{λ,κ}`: `𝔠_{λ,κ}` when `n > 0` and `2𝔯_λ` when `n = 0`.
pub fn t_lambda_kappa<T: Scalar>(m: usize, n: usize, pair: CurvaturePair<T>) -> Result<ExtReal<T>> {
    check_dims(m, n)?;
    Ok(if n > 0 {
        pair.first_zero()
    } else {
        r_lambda(pair.lambda).scale(k(2.0))
    })
}

/// The function `G_{λ,κ}` in dimensions `(m, n)` on `(0, 𝔱_{λ,κ})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub struct GProfile<T> {
    pub m: usize,
    pub n: usize,
    pub pair: CurvaturePair<T>,
    pub domain_end: ExtReal<T>,
}

impl<T: Scalar> GProfile<T> {
    pub fn new(m: usize, n: usize, pair: CurvaturePair<T>) -> Result<Self> {
        let domain_end = t_lambda_kappa(m, n, pair)?;
        Ok(Self {
            m,
            n,
            pair,
            domain_end,
        })
    }

    /// Evaluates `G` without the domain check.
    pub fn eval_unchecked(&self, t: T) -> T {
        let basis = self.pair.basis();
        let (s, c) = (basis.s(t), basis.c(t));
        let tail = k::<T>((self.m - self.n - 1) as f64);
        let radial = if self.m - self.n - 1 > 0 {
            tail * c / s
        } else {
            T::zero()
        };
        if self.n == 0 {
            radial
        } else {
            let nn = k::<T>(self.n as f64);
            let (l, kap) = (self.pair.lambda, self.pair.kappa);
            -nn * (l * s + kap * c) / (c - kap * s) + radial
        }
    }

    pub fn eval(&self, t: T) -> Result<T> {
        check_arg("t", t)?;
        if !(t > T::zero() && self.domain_end.exceeds(t)) {
            return Err(HardyError::domain(format!(
                "t = {t} outside (0, {}) for G with (m, n) = ({}, {}) and pair {}",
                self.domain_end, self.m, self.n, self.pair
            )));
        }
        Ok(self.eval_unchecked(t))
    }
}

/// `G_{λ,κ}(t)` for the given dimensions.
pub fn g_profile<T: Scalar>(profile: &GProfile<T>, t: T) -> Result<T> {
    profile.eval(t)
}

/// Outcome of [`check_g_monotone`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotoneCheck<T> {
    pub holds: bool,
    /// `min_t (G_{λ,κ}(t) − G_{Λ,K}(t))` over the grid.
    pub worst_margin: T,
    pub worst_t: T,
}

/// Checks `G_{Λ,K} ≤ G_{λ,κ}` pointwise for `(λ,κ) ≤ (Λ,K)`.
pub fn check_g_monotone<T: Scalar>(
    m: usize,
    n: usize,
    lower: CurvaturePair<T>,
    upper: CurvaturePair<T>,
    grid: &[T],
) -> Result<MonotoneCheck<T>> {
    if grid.is_empty() {
        return Err(HardyError::config("check_g_monotone needs a non-empty grid"));
    }
    if !lower.le(&upper) {
        return Err(HardyError::config(format!(
            "pairs not ordered: {lower} is not <= {upper}"
        )));
    }
    let g_low = GProfile::new(m, n, lower)?;
    let g_up = GProfile::new(m, n, upper)?;
    let mut worst = T::infinity();
    let mut worst_t = grid[0];
    let mut holds = true;
    for &t in grid {
        let a = g_low.eval(t)?;
        let b = g_up.eval(t)?;
        let margin = a - b;
        let tol = k::<T>(1e3) * T::epsilon() * a.abs().max(b.abs()).max(T::one());
        if margin < -tol {
            holds = false;
        }
        if margin < worst {
            worst = margin;
            worst_t = t;
        }
    }
    Ok(MonotoneCheck {
        holds,
        worst_margin: worst,
        worst_t,
    })
}

/// Both sides of the Lagrange-sum inequality
/// `Σᵢ (c−κᵢs)'/(c−κᵢs) ≤ n (c−κ̄s)'/(c−κ̄s)` with `κ̄` the mean of the `κᵢ`.
pub fn lagrange_sum_bound<T: Scalar>(lambda: T, kappas: &[T], t: T) -> Result<(T, T)> {
    if kappas.is_empty() {
        return Err(HardyError::config("lagrange_sum_bound needs at least one kappa"));
    }
    check_arg("t", t)?;
    if t <= T::zero() {
        return Err(HardyError::domain(format!("t = {t} must be positive")));
    }
    let nn = k::<T>(kappas.len() as f64);
    let mut lhs = T::zero();
    let mut sum_kappa = T::zero();
    for &kap in kappas {
        let pair = CurvaturePair::new(lambda, kap)?;
        let z = pair.first_zero();
        if !z.exceeds(t) {
            return Err(HardyError::domain(format!(
                "t = {t} is not below the first zero {z} of c - kappa s for kappa = {kap}"
            )));
        }
        lhs = lhs + pair.dh(t) / pair.h(t);
        sum_kappa = sum_kappa + kap;
    }
    let mean = CurvaturePair::new(lambda, sum_kappa / nn)?;
    let rhs = nn * mean.dh(t) / mean.h(t);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn s_and_c_examples() {
        assert_eq!(s_lambda(0.0, 2.0).unwrap(), 2.0);
        assert_relative_eq!(s_lambda(1.0, PI / 2.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(c_lambda(0.0, 7.0).unwrap(), 1.0);
        assert!(c_lambda(1.0, PI / 2.0).unwrap().abs() < 1e-15);
        assert!(s_lambda(f64::NAN, 1.0).is_err());
        assert!(c_lambda(1.0, -1.0).is_err());
    }

    #[test]
    fn r_lambda_examples() {
        assert_relative_eq!(r_lambda(4.0_f64).to_float(), PI / 4.0);
        assert_eq!(r_lambda(0.0_f64), ExtReal::PosInf);
        assert_eq!(r_lambda(-3.0_f64), ExtReal::PosInf);
    }

    #[test]
    fn first_zero_table_cases() {
        let z = |l: f64, kap: f64| CurvaturePair::new(l, kap).unwrap().first_zero();
        assert_relative_eq!(z(0.0, 2.0).to_float(), 0.5);
        assert_relative_eq!(z(1.0, 0.0).to_float(), PI / 2.0);
        assert_relative_eq!(z(-1.0, 2.0).to_float(), 0.5f64.atanh(), epsilon = 1e-15);
        assert_relative_eq!(z(1.0, -1.0).to_float(), 3.0 * PI / 4.0, epsilon = 1e-15);
        assert_eq!(z(0.0, -1.0), ExtReal::PosInf);
        assert_eq!(z(-1.0, 0.5), ExtReal::PosInf);
        assert_eq!(z(-1.0, 1.0), ExtReal::PosInf);
    }

    #[test]
    fn bisection_agrees_with_table() {
        for &(l, kap) in &[(1.0, 2.0), (4.0, -3.0), (0.0, 0.25), (-4.0, 2.5), (-1.0, 1.5)] {
            let p = CurvaturePair::new(l, kap).unwrap();
            let a = p.first_zero().to_float();
            let b = p.first_zero_bisect().to_float();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn t_lambda_kappa_examples() {
        let p = |l: f64, kap: f64| CurvaturePair::new(l, kap).unwrap();
        assert_relative_eq!(t_lambda_kappa(3, 0, p(1.0, 9.0)).unwrap().to_float(), PI);
        assert_relative_eq!(t_lambda_kappa(3, 2, p(0.0, 2.0)).unwrap().to_float(), 0.5);
        assert_eq!(t_lambda_kappa(3, 1, p(-1.0, -5.0)).unwrap(), ExtReal::PosInf);
        assert!(t_lambda_kappa(3, 3, p(0.0, 0.0)).is_err());
    }

    #[test]
    fn g_profile_examples() {
        let g = |m, n, l: f64, kap: f64| GProfile::new(m, n, CurvaturePair::new(l, kap).unwrap()).unwrap();
        assert_relative_eq!(g(3, 0, 0.0, 0.0).eval(2.0).unwrap(), 1.0);
        assert_eq!(g(4, 3, 0.0, 0.0).eval(0.5).unwrap(), 0.0);
        // tanh(1) + 2 coth(1), frozen from a 30-digit evaluation.
        assert_relative_eq!(
            g(4, 1, -1.0, 0.0).eval(1.0).unwrap(),
            3.3876647269544275,
            max_relative = 1e-14
        );
        assert!(g(3, 2, 0.0, 2.0).eval(0.5).is_err());
        assert!(g(3, 2, 0.0, 2.0).eval(0.0).is_err());
    }

    #[test]
    fn check_g_monotone_examples() {
        let p = |l: f64, kap: f64| CurvaturePair::new(l, kap).unwrap();
        let grid: Vec<f64> = (1..=100).map(|i| 10.0 * i as f64 / 101.0).collect();
        let r = check_g_monotone(5, 2, p(-1.0, -1.0), p(0.0, 0.0), &grid).unwrap();
        assert!(r.holds && r.worst_margin > 0.0);
        let same = check_g_monotone(5, 2, p(0.0, 0.0), p(0.0, 0.0), &grid).unwrap();
        assert!(same.holds);
        assert_eq!(same.worst_margin, 0.0);
        let g2: Vec<f64> = (1..100).map(|i| PI / 2.0 * i as f64 / 100.0).collect();
        assert!(check_g_monotone(3, 0, p(0.0, 0.0), p(1.0, 0.0), &g2).unwrap().holds);
        assert!(check_g_monotone(3, 0, p(0.0, 0.0), p(1.0, 0.0), &[]).is_err());
        assert!(check_g_monotone(3, 0, p(1.0, 0.0), p(0.0, 0.0), &g2).is_err());
    }

    #[test]
    fn lagrange_examples() {
        let (l, r) = lagrange_sum_bound(0.0, &[1.0, -1.0], 0.5).unwrap();
        assert_relative_eq!(l, -4.0 / 3.0, epsilon = 1e-15);
        assert_eq!(r, 0.0);
        let (l, r) = lagrange_sum_bound(1.0, &[0.3, 0.3, 0.3], 0.7).unwrap();
        assert_relative_eq!(l, r, max_relative = 1e-14);
        assert!(lagrange_sum_bound(0.0, &[2.0], 0.6).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let b = ComparisonBasis::<f32>::new(-1.0).unwrap();
        assert!((b.s(1.0) - 1.175_201_2).abs() < 1e-6);
        let z = CurvaturePair::<f32>::new(0.0, 2.0).unwrap().first_zero();
        assert_eq!(z, ExtReal::Finite(0.5));
    }
}
