//! Scenario execution, verdicts and report assembly.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use hardylab::hardy_functional::{
    default_s0, minimize_rayleigh_with, random_testfn_oracle_with, truncated_boundary_sweep, MinimizeOptions, SweepReport, TruncatedSweep,
};
use hardylab::model_geometry::{validate_condition, ConditionReport};
use hardylab::quadrature::QuadResult;
use hardylab::{
    audit_assumption, hardy_eval_with, improved_inequality_check, sharpness_sweep,
    AssumptionAudit, Bump, ClauseStatus, CurvaturePair, EvalOptions, ExtReal, GProfile, HardyError, NuVariant,
    QuotientForm, RadialTestFunction, Verdict,
};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Action, ConfigFile, Scenario, SweepVariant, Theorem};
use crate::plot::{emit_plot, PlotRow};
use crate::report::{fmt_f64, write_csv, write_json, CsvRow};
use crate::{CliError, ExitStatus};

/// Outcome class of one action, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Verified,
    NumericalFailure,
    ConfigError,
    Violated,
}

impl Status {
    fn from_error(e: &HardyError) -> Self {
        match e {
            HardyError::Config(_) | HardyError::Domain(_) => Status::ConfigError,
            HardyError::Numerical { .. } | HardyError::Evaluation { .. } => Status::NumericalFailure,
        }
    }

    fn exit(self) -> ExitStatus {
        match self {
            Status::Verified => ExitStatus::Verified,
            Status::Violated => ExitStatus::Violated,
            Status::ConfigError => ExitStatus::ConfigError,
            Status::NumericalFailure => ExitStatus::NumericalFailure,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ActionOutcome {
    pub action: Action,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub status: Status,
    pub actions: Vec<ActionOutcome>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub exit_code: i32,
    pub scenarios: Vec<ScenarioSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremAudit {
    pub theorem: Theorem,
    pub audit: AssumptionAudit,
}

/// One entry of `audit.json`.
#[derive(Debug, Clone, Serialize)]
pub struct AuditRecord {
    pub scenario: String,
    pub condition: Option<ConditionReport>,
    pub assumptions: Vec<TheoremAudit>,
    pub failed_clauses: Vec<String>,
    pub expected_failures: Vec<String>,
    pub status: Status,
}

#[derive(Debug, Clone)]
pub struct VerifyRow {
    pub scenario: String,
    pub test_function: String,
    pub form: QuotientForm,
    pub numerator: QuadResult,
    pub denominator: QuadResult,
    pub quotient: f64,
    pub sharp_constant: f64,
    pub slack: f64,
    pub improved_residual: Option<f64>,
    pub improved_slack: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct SweepCsvRow {
    pub scenario: String,
    pub epsilon: f64,
    pub numerator: QuadResult,
    pub denominator: QuadResult,
    pub quotient: f64,
    pub lower_bound: f64,
    pub upper_bracket: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct MinimizeRow {
    pub scenario: String,
    pub dof: usize,
    pub min_quotient: f64,
    pub sharp_constant: f64,
    pub concentration: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct OracleRow {
    pub scenario: String,
    pub trials: usize,
    pub seed: u64,
    pub form: QuotientForm,
    pub min_quotient: f64,
    pub sharp_constant: f64,
    pub worst: QuotientParts,
    pub violations: usize,
    pub inconclusive: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct QuotientParts {
    pub numerator: QuadResult,
    pub denominator: QuadResult,
    pub slack: f64,
}

#[derive(Debug, Clone)]
pub struct BasisRow {
    pub scenario: String,
    pub t: f64,
    pub s: f64,
    pub c: f64,
    pub g: f64,
    pub first_zero: ExtReal<f64>,
    pub t_lambda_kappa: ExtReal<f64>,
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Verified => "verified",
        Verdict::Violated => "violated",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn form_name(f: QuotientForm) -> &'static str {
    match f {
        QuotientForm::General => "general",
        QuotientForm::Theorem => "theorem",
    }
}

fn ext(x: ExtReal<f64>) -> String {
    x.finite().map_or_else(|| "inf".to_string(), fmt_f64)
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

impl CsvRow for VerifyRow {
    const HEADER: &'static [&'static str] = &[
        "scenario",
        "test_function",
        "form",
        "numerator",
        "num_err",
        "denominator",
        "den_err",
        "quotient",
        "sharp_constant",
        "slack",
        "improved_residual",
        "improved_slack",
        "verdict",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.scenario.clone(),
            self.test_function.clone(),
            form_name(self.form).to_string(),
            fmt_f64(self.numerator.value),
            fmt_f64(self.numerator.abs_error_est),
            fmt_f64(self.denominator.value),
            fmt_f64(self.denominator.abs_error_est),
            fmt_f64(self.quotient),
            fmt_f64(self.sharp_constant),
            fmt_f64(self.slack),
            opt(self.improved_residual),
            opt(self.improved_slack),
            verdict_name(self.verdict).to_string(),
        ]
    }
}

impl CsvRow for SweepCsvRow {
    const HEADER: &'static [&'static str] = &[
        "scenario",
        "epsilon",
        "numerator",
        "num_err",
        "denominator",
        "den_err",
        "quotient",
        "lower_bound",
        "upper_bracket",
        "verdict",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.scenario.clone(),
            fmt_f64(self.epsilon),
            fmt_f64(self.numerator.value),
            fmt_f64(self.numerator.abs_error_est),
            fmt_f64(self.denominator.value),
            fmt_f64(self.denominator.abs_error_est),
            fmt_f64(self.quotient),
            fmt_f64(self.lower_bound),
            fmt_f64(self.upper_bracket),
            verdict_name(self.verdict).to_string(),
        ]
    }
}

impl CsvRow for MinimizeRow {
    const HEADER: &'static [&'static str] = &[
        "scenario",
        "dof",
        "min_quotient",
        "sharp_constant",
        "relative_gap",
        "concentration",
        "residual",
        "iterations",
        "converged",
        "verdict",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.scenario.clone(),
            self.dof.to_string(),
            fmt_f64(self.min_quotient),
            fmt_f64(self.sharp_constant),
            fmt_f64(self.min_quotient / self.sharp_constant - 1.0),
            fmt_f64(self.concentration),
            fmt_f64(self.residual),
            self.iterations.to_string(),
            self.converged.to_string(),
            verdict_name(self.verdict).to_string(),
        ]
    }
}

impl CsvRow for OracleRow {
    const HEADER: &'static [&'static str] = &[
        "scenario",
        "trials",
        "seed",
        "form",
        "min_quotient",
        "sharp_constant",
        "worst_numerator",
        "worst_num_err",
        "worst_denominator",
        "worst_den_err",
        "worst_slack",
        "violations",
        "inconclusive",
        "verdict",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.scenario.clone(),
            self.trials.to_string(),
            self.seed.to_string(),
            form_name(self.form).to_string(),
            fmt_f64(self.min_quotient),
            fmt_f64(self.sharp_constant),
            fmt_f64(self.worst.numerator.value),
            fmt_f64(self.worst.numerator.abs_error_est),
            fmt_f64(self.worst.denominator.value),
            fmt_f64(self.worst.denominator.abs_error_est),
            fmt_f64(self.worst.slack),
            self.violations.to_string(),
            self.inconclusive.to_string(),
            verdict_name(self.verdict).to_string(),
        ]
    }
}

impl CsvRow for BasisRow {
    const HEADER: &'static [&'static str] =
        &["scenario", "t", "s_lambda", "c_lambda", "g_lambda_kappa", "first_zero", "t_lambda_kappa"];

    fn cells(&self) -> Vec<String> {
        vec![
            self.scenario.clone(),
            fmt_f64(self.t),
            fmt_f64(self.s),
            fmt_f64(self.c),
            fmt_f64(self.g),
            ext(self.first_zero),
            ext(self.t_lambda_kappa),
        ]
    }
}

/// Everything produced for one scenario.
#[derive(Debug, Clone, Default)]
pub struct ScenarioOutput {
    pub outcomes: Vec<ActionOutcome>,
    pub audit: Option<AuditRecord>,
    pub verify: Vec<VerifyRow>,
    pub sweep: Vec<SweepCsvRow>,
    pub plot: Vec<PlotRow>,
    pub minimize: Vec<MinimizeRow>,
    pub oracle: Option<OracleRow>,
}

/// Options of one `run`.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Actions selected by the subcommand; each runs only where the scenario lists it.
    pub actions: Vec<Action>,
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub plot: bool,
}

/// `c·(1 − slack) ≤ q`, or inconclusive when the quadrature did not converge.
fn judge(q: f64, c: f64, slack: f64, converged: bool) -> Verdict {
    if !converged || !q.is_finite() {
        Verdict::Inconclusive
    } else if q >= c * (1.0 - slack) {
        Verdict::Verified
    } else {
        Verdict::Violated
    }
}

fn fold_verdicts(verdicts: impl IntoIterator<Item = Verdict>) -> Status {
    let v: Vec<Verdict> = verdicts.into_iter().collect();
    if v.contains(&Verdict::Violated) {
        Status::Violated
    } else if v.contains(&Verdict::Inconclusive) {
        Status::NumericalFailure
    } else {
        Status::Verified
    }
}

fn outcome(action: Action, status: Status, detail: String) -> ActionOutcome {
    ActionOutcome { action, status, detail }
}

fn failure(action: Action, e: &HardyError) -> ActionOutcome {
    outcome(action, Status::from_error(e), e.to_string())
}

fn run_audit(s: &Scenario, out: &mut ScenarioOutput) {
    let condition = s
        .condition
        .as_ref()
        .map(|c| validate_condition(c, s.config.geometry.m, s.config.geometry.n));
    let mut seen = BTreeSet::new();
    let assumptions: Vec<TheoremAudit> = s
        .config
        .theorems
        .iter()
        .filter(|t| seen.insert(t.assumption(s.domain.kind) as u8))
        .map(|&theorem| TheoremAudit {
            theorem,
            audit: audit_assumption(&s.pair, &s.geometry, &s.domain, theorem.assumption(s.domain.kind)),
        })
        .collect();
    let failed: BTreeSet<String> = assumptions
        .iter()
        .flat_map(|a| a.audit.clauses.iter())
        .filter(|c| c.status == ClauseStatus::Failed)
        .map(|c| c.id.clone())
        .collect();
    let condition_ok = condition.as_ref().is_none_or(|c| c.passed);
    let expected = &s.config.expect_audit_failure;
    let (status, detail) = if expected.is_empty() {
        let ok = failed.is_empty() && condition_ok;
        let detail = if ok {
            format!("{} assumption audit(s) passed", assumptions.len())
        } else {
            format!("failed clauses: {}", failed.iter().cloned().collect::<Vec<_>>().join(", "))
        };
        (if ok { Status::Verified } else { Status::Violated }, detail)
    } else {
        let missing: Vec<&String> = expected.iter().filter(|c| !failed.contains(*c)).collect();
        if missing.is_empty() {
            (Status::Verified, format!("expected failure reproduced: {}", expected.join(", ")))
        } else {
            (
                Status::Violated,
                format!("expected failures not observed: {}", missing.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", ")),
            )
        }
    };
    out.outcomes.push(outcome(Action::Audit, status, detail));
    out.audit = Some(AuditRecord {
        scenario: s.name().to_string(),
        condition,
        assumptions,
        failed_clauses: failed.into_iter().collect(),
        expected_failures: expected.clone(),
        status,
    });
}

fn default_bumps(s: &Scenario) -> Vec<Bump> {
    let lo = s.domain.t_min;
    let hi = s.domain.t_max.min(s.pair.t_end()).finite().unwrap_or_else(|| 4.0_f64.max(4.0 * lo));
    let w = hi - lo;
    [0.25, 0.5, 0.75]
        .iter()
        .map(|&f| Bump {
            center: lo + f * w,
            half_width: 0.2 * w,
            amplitude: 1.0,
        })
        .collect()
}

fn run_verify(s: &Scenario, out: &mut ScenarioOutput) -> Result<(), HardyError> {
    let cfg = &s.config;
    let bumps: Vec<Bump> = if cfg.verify.bumps.is_empty() {
        default_bumps(s)
    } else {
        cfg.verify
            .bumps
            .iter()
            .map(|b| Bump {
                center: b.center,
                half_width: b.half_width,
                amplitude: b.amplitude,
            })
            .collect()
    };
    let opts = EvalOptions {
        form: cfg.form,
        ..EvalOptions::default()
    }
    .scenario(s.name());
    let improved = cfg.improved.filter(|_| cfg.theorems.contains(&Theorem::R5_6));
    for b in bumps {
        let u = RadialTestFunction::bump_sum(vec![b])?;
        let r = hardy_eval_with(&s.geometry, &s.domain, &s.pair, cfg.p, &u, &opts)?;
        let c = r.sharp_constant * cfg.sharp_constant_scale;
        let mut verdict = judge(r.quotient, c, r.slack, r.numerator.converged && r.denominator.converged);
        let mut row = VerifyRow {
            scenario: s.name().to_string(),
            test_function: format!(
                "bump(center={}, half_width={}, amplitude={})",
                fmt_f64(b.center),
                fmt_f64(b.half_width),
                fmt_f64(b.amplitude)
            ),
            form: cfg.form,
            numerator: r.numerator,
            denominator: r.denominator,
            quotient: r.quotient,
            sharp_constant: c,
            slack: r.slack,
            improved_residual: None,
            improved_slack: None,
            verdict,
        };
        if let Some(imp) = improved {
            let rep = improved_inequality_check(&s.geometry, &s.domain, &s.params, imp.d, imp.tau, &u)?;
            row.improved_residual = Some(rep.residual);
            row.improved_slack = Some(rep.slack);
            if !rep.holds && verdict == Verdict::Verified {
                verdict = Verdict::Violated;
            }
            row.verdict = verdict;
        }
        out.verify.push(row);
    }
    let status = fold_verdicts(out.verify.iter().map(|r| r.verdict));
    let min = out.verify.iter().map(|r| r.quotient / r.sharp_constant).fold(f64::INFINITY, f64::min);
    out.outcomes.push(outcome(
        Action::Verify,
        status,
        format!("{} test function(s), min quotient/constant {min:.6}", out.verify.len()),
    ));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep_row(s: &Scenario, eps: f64, n: &QuadResult, d: &QuadResult, q: f64, lower: f64, upper: f64, slack: f64) -> SweepCsvRow {
    let verdict = if !(n.converged && d.converged && q.is_finite()) {
        Verdict::Inconclusive
    } else if q >= lower * (1.0 - slack) && q <= upper * (1.0 + slack) {
        Verdict::Verified
    } else {
        Verdict::Violated
    };
    SweepCsvRow {
        scenario: s.name().to_string(),
        epsilon: eps,
        numerator: *n,
        denominator: *d,
        quotient: q,
        lower_bound: lower,
        upper_bracket: upper,
        verdict,
    }
}

fn run_sweep(s: &Scenario, out: &mut ScenarioOutput) -> Result<(), HardyError> {
    let cfg = &s.config;
    let scale = cfg.sharp_constant_scale;
    let eps = &cfg.sweep.epsilons;
    match cfg.sweep.variant {
        SweepVariant::Truncated => {
            let TruncatedSweep { rows, .. } = truncated_boundary_sweep(&s.pair, &s.geometry, &s.domain, eps, cfg.sweep.iota)?;
            for r in &rows {
                out.sweep.push(sweep_row(s, r.epsilon, &r.numerator, &r.denominator, r.quotient, r.lower * scale, r.upper, r.slack));
            }
        }
        variant => {
            let v = if variant == SweepVariant::Increasing { NuVariant::Increasing } else { NuVariant::Decreasing };
            let s0 = cfg.sweep.s0.unwrap_or_else(|| default_s0(&s.pair, &s.domain));
            let SweepReport { rows, .. } = sharpness_sweep(&s.pair, &s.geometry, &s.domain, v, eps, s0)?;
            for r in &rows {
                let rep = &r.report;
                out.sweep.push(sweep_row(s, r.epsilon, &rep.numerator, &rep.denominator, r.quotient, r.lower * scale, r.upper, r.slack));
            }
        }
    }
    out.plot = out
        .sweep
        .iter()
        .map(|r| PlotRow {
            epsilon: r.epsilon,
            quotient: r.quotient,
            lower: r.lower_bound,
            upper: r.upper_bracket,
        })
        .collect();
    let status = fold_verdicts(out.sweep.iter().map(|r| r.verdict));
    let last = out.sweep.last().expect("validated schedule is non-empty");
    out.outcomes.push(outcome(
        Action::Sweep,
        status,
        format!(
            "{} rows, eps {} quotient {:.10} in ({:.10}, {:.10})",
            out.sweep.len(),
            fmt_f64(last.epsilon),
            last.quotient,
            last.lower_bound,
            last.upper_bracket
        ),
    ));
    Ok(())
}

fn run_minimize(s: &Scenario, out: &mut ScenarioOutput) -> Result<(), HardyError> {
    let cfg = &s.config;
    let opts = MinimizeOptions {
        support_end: cfg.minimize.support_end,
        ..MinimizeOptions::default()
    };
    for &dof in &cfg.minimize.dofs {
        let r = minimize_rayleigh_with(&s.pair, &s.geometry, &s.domain, cfg.p, dof, cfg.minimize.constraint, &opts)?;
        let c = r.sharp_constant * cfg.sharp_constant_scale;
        let verdict = judge(r.min_quotient, c, 10.0 * r.residual.max(1e-12), r.converged);
        out.minimize.push(MinimizeRow {
            scenario: s.name().to_string(),
            dof,
            min_quotient: r.min_quotient,
            sharp_constant: c,
            concentration: r.concentration,
            residual: r.residual,
            iterations: r.iterations,
            converged: r.converged,
            verdict,
        });
    }
    let status = fold_verdicts(out.minimize.iter().map(|r| r.verdict));
    let last = out.minimize.last().expect("validated dofs are non-empty");
    out.outcomes.push(outcome(
        Action::Minimize,
        status,
        format!("dof {} min quotient {:.10} vs {:.10}", last.dof, last.min_quotient, last.sharp_constant),
    ));
    Ok(())
}

fn run_oracle(s: &Scenario, seed: u64, out: &mut ScenarioOutput) -> Result<(), HardyError> {
    let cfg = &s.config;
    let opts = EvalOptions {
        form: cfg.form,
        ..EvalOptions::default()
    }
    .scenario(s.name());
    let r = random_testfn_oracle_with(&s.pair, &s.geometry, &s.domain, cfg.p, cfg.oracle.trials, seed, &opts)?;
    let c = r.sharp_constant * cfg.sharp_constant_scale;
    let w = &r.worst;
    let verdict = match judge(w.quotient, c, w.slack, w.numerator.converged && w.denominator.converged) {
        Verdict::Violated => Verdict::Violated,
        _ if r.violations > 0 => Verdict::Violated,
        _ if r.inconclusive > 0 => Verdict::Inconclusive,
        v => v,
    };
    out.outcomes.push(outcome(
        Action::Oracle,
        fold_verdicts([verdict]),
        format!("{} trials, min quotient {:.6} vs {:.6}", r.trials, r.min_quotient, c),
    ));
    out.oracle = Some(OracleRow {
        scenario: s.name().to_string(),
        trials: r.trials,
        seed,
        form: cfg.form,
        min_quotient: r.min_quotient,
        sharp_constant: c,
        worst: QuotientParts {
            numerator: w.numerator,
            denominator: w.denominator,
            slack: w.slack,
        },
        violations: r.violations,
        inconclusive: r.inconclusive,
        verdict,
    });
    Ok(())
}

/// Runs the selected actions of one scenario; failures are recorded, not propagated.
pub fn run_scenario(s: &Scenario, actions: &[Action], seed: Option<u64>) -> ScenarioOutput {
    let mut out = ScenarioOutput::default();
    for &action in &Action::ALL {
        if !actions.contains(&action) || !s.wants(action) {
            continue;
        }
        info!("scenario {}: {action}", s.name());
        let res = match action {
            Action::Audit => {
                run_audit(s, &mut out);
                Ok(())
            }
            Action::Verify => run_verify(s, &mut out),
            Action::Sweep => run_sweep(s, &mut out),
            Action::Minimize => run_minimize(s, &mut out),
            Action::Oracle => run_oracle(s, seed.unwrap_or(s.config.seed), &mut out),
        };
        if let Err(e) = res {
            warn!("scenario {}: {action} failed: {e}", s.name());
            out.outcomes.push(failure(action, &e));
        }
    }
    out
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

/// Runs every scenario on a bounded pool and writes the report bundle to `opts.out`.
pub fn run(scenarios: &[Scenario], opts: &RunOptions) -> Result<RunSummary, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let outputs: Vec<ScenarioOutput> =
        pool.install(|| scenarios.par_iter().map(|s| run_scenario(s, &opts.actions, opts.seed)).collect());

    let out = &opts.out;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let echo = ConfigFile {
        scenarios: scenarios.iter().map(|s| s.config.clone()).collect(),
    };
    let path = out.join("scenarios.toml");
    fs::write(&path, crate::config::to_toml(&echo)).map_err(io_err(&path))?;

    let selected = |a: Action| opts.actions.contains(&a);
    if selected(Action::Audit) {
        let records: Vec<&AuditRecord> = outputs.iter().filter_map(|o| o.audit.as_ref()).collect();
        let path = out.join("audit.json");
        write_json(&path, &records).map_err(io_err(&path))?;
    }
    macro_rules! csv_out {
        ($action:expr, $file:literal, $rows:expr) => {
            if selected($action) {
                let rows: Vec<_> = outputs.iter().flat_map($rows).cloned().collect();
                let path = out.join($file);
                write_csv(&path, &rows).map_err(io_err(&path))?;
            }
        };
    }
    csv_out!(Action::Verify, "verify.csv", |o: &ScenarioOutput| o.verify.iter());
    csv_out!(Action::Sweep, "sweep.csv", |o: &ScenarioOutput| o.sweep.iter());
    csv_out!(Action::Minimize, "minimize.csv", |o: &ScenarioOutput| o.minimize.iter());
    csv_out!(Action::Oracle, "oracle.csv", |o: &ScenarioOutput| o.oracle.iter());
    if opts.plot {
        let dir = out.join("plots");
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for (s, o) in scenarios.iter().zip(&outputs) {
            if o.plot.len() >= 2 {
                emit_plot(&format!("{} sweep", s.name()), &o.plot, &dir.join(format!("{}.svg", s.name())))?;
            }
        }
    }

    let summaries: Vec<ScenarioSummary> = scenarios
        .iter()
        .zip(outputs)
        .map(|(s, o)| ScenarioSummary {
            name: s.name().to_string(),
            status: o.outcomes.iter().map(|a| a.status).max().unwrap_or(Status::Verified),
            actions: o.outcomes,
        })
        .collect();
    let worst = summaries.iter().map(|s| s.status).max().unwrap_or(Status::Verified);
    let summary = RunSummary {
        exit_code: worst.exit() as i32,
        scenarios: summaries,
    };
    let path = out.join("summary.json");
    write_json(&path, &summary).map_err(io_err(&path))?;
    Ok(summary)
}

/// Tabulates `s_λ`, `c_λ`, `G_{λ,κ}` and the first zero of each scenario's model pair.
pub fn basis_rows(scenarios: &[Scenario], points: usize) -> Result<Vec<BasisRow>, CliError> {
    let mut rows = Vec::new();
    for s in scenarios {
        let g = &s.config.geometry;
        let pair = CurvaturePair::new(g.lambda, g.kappa).map_err(|e| CliError::Config(vec![e.to_string()]))?;
        let profile = GProfile::new(g.m, g.n, pair).map_err(|e| CliError::Config(vec![e.to_string()]))?;
        let t_end = s.geometry.t_end();
        let end = s.domain.t_max.min(t_end).finite().map_or(4.0, |e| e.min(4.0));
        let basis = pair.basis();
        for i in 1..=points {
            let t = end * i as f64 / (points + 1) as f64;
            rows.push(BasisRow {
                scenario: s.name().to_string(),
                t,
                s: basis.s(t),
                c: basis.c(t),
                g: profile.eval_unchecked(t),
                first_zero: pair.first_zero(),
                t_lambda_kappa: t_end,
            });
        }
    }
    Ok(rows)
}

/// Writes `basis.csv` for the scenarios.
pub fn write_basis(scenarios: &[Scenario], out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let rows = basis_rows(scenarios, 100)?;
    let path = out.join("basis.csv");
    write_csv(&path, &rows).map_err(io_err(&path))
}
