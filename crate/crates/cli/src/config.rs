//! Scenario configuration: the TOML schema, normalization and validation.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use hardylab::hardy_functional::DEFAULT_EPSILONS;
use hardylab::model_geometry::{
    validate_condition, ConditionDirection, CurvatureCondition, DomainKind, DomainSpec, ModelGeometry,
};
use hardylab::{Assumption, CurvaturePair, ExtReal, PairParams, QuotientForm, SplineConstraint, WeightPair};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Theorems a scenario can be checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Theorem {
    /// General inequality on `C₀^∞(Ω_Σ)`.
    T3_4,
    /// General inequality on `C₀^∞(Ω)`.
    T4_4,
    /// General inequality on `C₀^∞(Ω, Σ)`.
    T4_12,
    /// Power weights under an upper curvature bound.
    T5_2,
    /// Global logarithmic weights under an upper curvature bound.
    T5_10,
    /// Power weights under a lower curvature bound.
    T6_3,
    /// General logarithmic weights under a lower curvature bound.
    T6_9,
    /// Improved inequality with a logarithmic remainder.
    R5_6,
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Theorem {
    /// Test-function class audited for this theorem on the given domain.
    pub fn assumption(self, kind: DomainKind) -> Assumption {
        match self {
            Theorem::T3_4 => Assumption::A3_1,
            Theorem::T4_4 => Assumption::A4_1,
            Theorem::T4_12 => Assumption::A4_5,
            _ if kind == DomainKind::FullSpace => Assumption::A4_1,
            _ => Assumption::A3_1,
        }
    }

    fn required_direction(self) -> Option<ConditionDirection> {
        match self {
            Theorem::T5_2 | Theorem::T5_10 | Theorem::R5_6 => Some(ConditionDirection::Upper),
            Theorem::T6_3 | Theorem::T6_9 => Some(ConditionDirection::Lower),
            _ => None,
        }
    }
}

/// Work a scenario can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Audit,
    Verify,
    Sweep,
    Minimize,
    Oracle,
}

impl Action {
    pub const ALL: [Action; 5] = [Action::Audit, Action::Verify, Action::Sweep, Action::Minimize, Action::Oracle];
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Action::Audit => "audit",
            Action::Verify => "verify",
            Action::Sweep => "sweep",
            Action::Minimize => "minimize",
            Action::Oracle => "oracle",
        };
        f.write_str(s)
    }
}

/// Top level of a configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, rename = "scenario")]
    pub scenarios: Vec<ScenarioConfig>,
}

/// One `[[scenario]]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub theorems: Vec<Theorem>,
    #[serde(default = "default_actions")]
    pub actions: Vec<Action>,
    pub p: f64,
    #[serde(default)]
    pub form: QuotientForm,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Multiplier applied to the sharp constant before every comparison.
    #[serde(default = "one")]
    pub sharp_constant_scale: f64,
    /// Audit clauses this scenario is expected to fail.
    #[serde(default)]
    pub expect_audit_failure: Vec<String>,
    pub geometry: GeometryConfig,
    pub domain: DomainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionConfig>,
    pub pair: PairConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub minimize: MinimizeConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub improved: Option<ImprovedConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub m: usize,
    pub n: usize,
    pub lambda: f64,
    #[serde(default)]
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: DomainKind,
    #[serde(default)]
    pub t_min: f64,
    pub t_max: ExtReal<f64>,
    #[serde(default)]
    pub t_max_attained: bool,
    #[serde(default)]
    pub one_sided: bool,
}

/// Curvature bound; `lambda` and `kappa` default to the model values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionConfig {
    pub direction: ConditionDirection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

/// Weight family and its parameters; `p`, `m` and `n` come from the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PairConfig {
    Power {
        big_lambda: f64,
        #[serde(default)]
        big_k: f64,
        beta: f64,
    },
    LogGlobal {
        big_lambda: f64,
        #[serde(default)]
        big_k: f64,
        s1: f64,
        s2: f64,
        d: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s: Option<f64>,
    },
    LogGeneral {
        big_lambda: f64,
        #[serde(default)]
        big_k: f64,
        s1: f64,
        s2: f64,
        d: f64,
        l: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s: Option<f64>,
    },
}

impl PairConfig {
    pub fn params(&self, p: f64, m: usize, n: usize) -> PairParams {
        match *self {
            PairConfig::Power { big_lambda, big_k, beta } => PairParams::Power { big_lambda, big_k, beta, p, m, n },
            PairConfig::LogGlobal { big_lambda, big_k, s1, s2, d, s } => {
                PairParams::LogGlobal { big_lambda, big_k, s1, s2, d, p, m, n, s }
            }
            PairConfig::LogGeneral { big_lambda, big_k, s1, s2, d, l, s } => {
                PairParams::LogGeneral { big_lambda, big_k, s1, s2, d, l, p, m, n, s }
            }
        }
    }

    fn comparison(&self) -> (f64, f64) {
        match *self {
            PairConfig::Power { big_lambda, big_k, .. }
            | PairConfig::LogGlobal { big_lambda, big_k, .. }
            | PairConfig::LogGeneral { big_lambda, big_k, .. } => (big_lambda, big_k),
        }
    }

    fn family(&self) -> &'static str {
        match self {
            PairConfig::Power { .. } => "power",
            PairConfig::LogGlobal { .. } => "log_global",
            PairConfig::LogGeneral { .. } => "log_general",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpConfig {
    pub center: f64,
    pub half_width: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

/// Fixed test functions; empty means three bumps spread over the domain.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub bumps: Vec<BumpConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariant {
    #[default]
    Increasing,
    Decreasing,
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub variant: SweepVariant,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    /// Seam of the `ν_ε` profiles; defaults to the domain midpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    /// Cutoff radius of the truncated family.
    #[serde(default = "one")]
    pub iota: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            variant: SweepVariant::default(),
            epsilons: default_epsilons(),
            s0: None,
            iota: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeConfig {
    #[serde(default = "default_dofs")]
    pub dofs: Vec<usize>,
    #[serde(default = "default_constraint")]
    pub constraint: SplineConstraint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_end: Option<f64>,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            dofs: default_dofs(),
            constraint: default_constraint(),
            support_end: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            trials: default_trials(),
        }
    }
}

/// Outer radius `D` and ratio `τ` of the improved inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImprovedConfig {
    pub d: f64,
    pub tau: f64,
}

fn default_actions() -> Vec<Action> {
    Action::ALL.to_vec()
}

fn default_seed() -> u64 {
    1
}

fn one() -> f64 {
    1.0
}

fn default_epsilons() -> Vec<f64> {
    DEFAULT_EPSILONS.to_vec()
}

fn default_dofs() -> Vec<usize> {
    vec![8, 16, 32, 64]
}

fn default_constraint() -> SplineConstraint {
    SplineConstraint::VanishBothEnds
}

fn default_trials() -> usize {
    100
}

/// A validated scenario with its numerical objects built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub geometry: ModelGeometry,
    pub domain: DomainSpec,
    pub pair: WeightPair,
    pub params: PairParams,
    pub condition: Option<CurvatureCondition>,
}

impl Scenario {
    pub fn name(&self) -> &str {
        &self.config.name
    }

    pub fn wants(&self, action: Action) -> bool {
        self.config.actions.contains(&action)
    }

    /// Sharp constant of the configured quotient form, before scaling.
    pub fn sharp_constant(&self, form: QuotientForm) -> f64 {
        match form {
            QuotientForm::General => self.pair.p().powf(-self.pair.p()),
            QuotientForm::Theorem => self.pair.theorem_form().map_or(f64::NAN, |t| t.constant),
        }
    }
}

/// Parses a TOML configuration file.
pub fn parse_config(text: &str) -> Result<ConfigFile, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(vec![e.to_string()]))
}

/// Reads, parses and validates a configuration file.
pub fn load_config(path: &Path) -> Result<Vec<Scenario>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    validate(parse_config(&text)?.scenarios)
}

/// Serializes a configuration back to TOML with every default spelled out.
pub fn to_toml(file: &ConfigFile) -> String {
    toml::to_string(file).expect("configuration types serialize to TOML")
}

/// Validates every scenario and collects all problems before failing.
pub fn validate(configs: Vec<ScenarioConfig>) -> Result<Vec<Scenario>, CliError> {
    let mut problems = Vec::new();
    let mut names = BTreeSet::new();
    let mut out = Vec::with_capacity(configs.len());
    for cfg in configs {
        if !names.insert(cfg.name.clone()) {
            problems.push(format!("scenario '{}': duplicate name", cfg.name));
        }
        match build(cfg) {
            Ok(s) => out.push(s),
            Err((name, list)) => problems.extend(list.into_iter().map(|p| format!("scenario '{name}': {p}"))),
        }
    }
    if problems.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Config(problems))
    }
}

fn build(cfg: ScenarioConfig) -> Result<Scenario, (String, Vec<String>)> {
    let mut problems = Vec::new();
    let GeometryConfig { m, n, lambda, kappa } = cfg.geometry;
    if cfg.name.trim().is_empty() {
        problems.push("empty name".to_string());
    }
    if cfg.theorems.is_empty() {
        problems.push("no theorem given".to_string());
    }
    if !(cfg.p > 1.0 && cfg.p.is_finite()) {
        problems.push(format!("p = {} must exceed 1", cfg.p));
    }
    if !(cfg.sharp_constant_scale > 0.0 && cfg.sharp_constant_scale.is_finite()) {
        problems.push(format!("sharp_constant_scale = {} must be positive", cfg.sharp_constant_scale));
    }
    if !cfg.expect_audit_failure.is_empty() && !cfg.actions.contains(&Action::Audit) {
        problems.push("expect_audit_failure needs the audit action".to_string());
    }
    theorem_constraints(&cfg, &mut problems);
    action_settings(&cfg, &mut problems);

    let geometry = ModelGeometry::space_form(m, n, lambda, kappa).map_err(|e| problems.push(format!("geometry: {e}")));
    let d = cfg.domain;
    let domain = DomainSpec::new(d.kind, d.t_min, d.t_max).attained(d.t_max_attained).one_sided(d.one_sided);
    if let Ok(g) = &geometry {
        if let Err(e) = domain.validate(g) {
            problems.push(format!("domain: {e}"));
        }
    }
    let params = cfg.pair.params(cfg.p, m, n);
    let pair = WeightPair::new(params).map_err(|e| problems.push(format!("pair: {e}")));
    let condition = cfg.condition.map(|c| -> Result<CurvatureCondition, ()> {
        let pair = CurvaturePair::new(c.lambda.unwrap_or(lambda), c.kappa.unwrap_or(kappa))
            .map_err(|e| problems.push(format!("condition: {e}")))?;
        let (big_lambda, big_k) = cfg.pair.comparison();
        let comparison =
            CurvaturePair::new(big_lambda, big_k).map_err(|e| problems.push(format!("condition: {e}")))?;
        let cond = CurvatureCondition {
            direction: c.direction,
            pair,
            comparison,
        };
        let report = validate_condition(&cond, m, n);
        if !report.passed {
            problems.push(format!("curvature condition fails: {}", report.violated().join(", ")));
        }
        Ok(cond)
    });
    match (geometry, pair, condition.transpose()) {
        (Ok(geometry), Ok(pair), Ok(condition)) if problems.is_empty() => Ok(Scenario {
            config: cfg,
            geometry,
            domain,
            pair,
            params,
            condition,
        }),
        _ => Err((cfg.name, problems)),
    }
}

fn theorem_constraints(cfg: &ScenarioConfig, problems: &mut Vec<String>) {
    let codim = cfg.geometry.m as f64 - cfg.geometry.n as f64;
    let beta = match cfg.pair {
        PairConfig::Power { beta, .. } => Some(beta),
        _ => None,
    };
    for &thm in &cfg.theorems {
        let family = match thm {
            Theorem::T5_2 | Theorem::T6_3 | Theorem::R5_6 => Some("power"),
            Theorem::T5_10 => Some("log_global"),
            Theorem::T6_9 => Some("log_general"),
            _ => None,
        };
        if let Some(f) = family {
            if cfg.pair.family() != f {
                problems.push(format!("{thm} needs the {f} family, got {}", cfg.pair.family()));
            }
        }
        if let (Some(dir), Some(c)) = (thm.required_direction(), cfg.condition) {
            if c.direction != dir {
                problems.push(format!("{thm} needs a {dir:?} curvature condition"));
            }
        }
        let Some(beta) = beta else { continue };
        match thm {
            Theorem::T5_2 | Theorem::R5_6 if !(beta > -codim) => {
                problems.push(format!("{thm} requires beta > -(m - n) = {}, got {beta}", -codim));
            }
            Theorem::T6_3 if !(beta < -codim) => {
                problems.push(format!("{thm} requires beta < -(m - n) = {}, got {beta}", -codim));
            }
            Theorem::T6_3 if cfg.domain.kind == DomainKind::FullSpace && !(cfg.p + beta > -codim) => {
                problems.push(format!(
                    "{thm} on the full space requires p + beta > -(m - n) = {}, got {}",
                    -codim,
                    cfg.p + beta
                ));
            }
            _ => {}
        }
    }
    if cfg.theorems.contains(&Theorem::R5_6) {
        if cfg.improved.is_none() {
            problems.push("R5_6 needs an [improved] table with d and tau".to_string());
        }
        if cfg.domain.t_max == ExtReal::PosInf {
            problems.push("R5_6 needs a bounded domain".to_string());
        }
    }
}

fn action_settings(cfg: &ScenarioConfig, problems: &mut Vec<String>) {
    let eps = &cfg.sweep.epsilons;
    if cfg.actions.contains(&Action::Sweep) {
        if eps.len() < 2 {
            problems.push("sweep needs at least two epsilons".to_string());
        }
        if eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
            problems.push("sweep epsilons must lie in (0, 1) and strictly decrease".to_string());
        }
        if cfg.sweep.variant == SweepVariant::Truncated && !(cfg.sweep.iota > 0.0 && eps[0] < cfg.sweep.iota) {
            problems.push("truncated sweep needs 0 < epsilon < iota".to_string());
        }
    }
    if cfg.actions.contains(&Action::Minimize) {
        let m = &cfg.minimize;
        if m.dofs.is_empty() || m.dofs.iter().any(|&d| d < 4) {
            problems.push("minimize dofs must be non-empty and at least 4".to_string());
        }
        if m.constraint == SplineConstraint::VanishAtSigma
            && !(cfg.domain.t_max_attained && cfg.domain.t_max.finite().is_some() && m.support_end.is_none())
        {
            problems.push("vanish_at_sigma needs an attained finite t_max as the support end".to_string());
        }
    }
    if cfg.actions.contains(&Action::Oracle) && cfg.oracle.trials == 0 {
        problems.push("oracle trials must be at least 1".to_string());
    }
    for b in &cfg.verify.bumps {
        if !(b.half_width > 0.0 && b.amplitude != 0.0) {
            problems.push(format!("verify bump at {} needs a positive half_width and nonzero amplitude", b.center));
        }
    }
    let mut seen = BTreeSet::new();
    for a in &cfg.actions {
        if !seen.insert(a) {
            problems.push(format!("action {a} listed twice"));
        }
    }
}
