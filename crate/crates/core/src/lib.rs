//! Numerical verification of sharp Hardy inequalities with curvature-dependent weights
//! on rotationally symmetric model geometries.
//!
//! The crate reduces tube integrals around a totally geodesic or umbilical submanifold
//! to one-dimensional radial integrals, builds the weight pairs `(φ, ψ)` of the
//! curvature-sensitive Hardy inequalities, and evaluates Rayleigh quotients of radial
//! test functions with a singularity-aware quadrature engine.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::type_complexity)]

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst};

pub mod comparison_kernel;
pub mod error;
pub mod ext_real;
pub mod hardy_functional;
pub mod model_geometry;
pub mod quadrature;
pub mod weight_pairs;

pub use comparison_kernel::{
    c_lambda, check_g_monotone, g_profile, lagrange_sum_bound, r_lambda, s_lambda,
    t_lambda_kappa, ComparisonBasis, CurvaturePair, GProfile, MonotoneCheck,
};
pub use error::{HardyError, Result};
pub use ext_real::ExtReal;
pub use hardy_functional::{
    hardy_eval, hardy_eval_with, improved_inequality_check, make_nu_epsilon, minimize_rayleigh,
    random_testfn_oracle, sharpness_sweep, truncated_boundary_family, Bump, EvalOptions, HardyReport,
    MinimizationResult, NuEpsilon, NuVariant, QuotientForm, RadialTestFunction, SplineConstraint, Verdict,
};
pub use weight_pairs::{
    audit_assumption, densities, make_log_general_pair, make_log_global_pair, make_power_pair, Assumption,
    AssumptionAudit, ClauseStatus, PairFamily, PairParams, WeightDensities, WeightPair,
};

/// Scalar types accepted by the generic comparison kernel.
pub trait Scalar: Float + FloatConst + Debug + Display + Send + Sync + 'static {}

impl<T: Float + FloatConst + Debug + Display + Send + Sync + 'static> Scalar for T {}

pub type ComparisonBasisF32 = ComparisonBasis<f32>;
pub type ComparisonBasisF64 = ComparisonBasis<f64>;
pub type CurvaturePairF32 = CurvaturePair<f32>;
pub type CurvaturePairF64 = CurvaturePair<f64>;
pub type GProfileF32 = GProfile<f32>;
pub type GProfileF64 = GProfile<f64>;
pub type ExtRealF64 = ExtReal<f64>;
