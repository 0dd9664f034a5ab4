//! Run manifests: everything needed to reproduce and audit a command.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use kwc_core::elliptic::{SolveMethod, SolveReport, SolverOptions};
use kwc_core::evolution::StepReports;
use kwc_core::model::{AssumptionReport, ModelBounds};
use kwc_experiments::Assertion;

use crate::config::RunConfig;

pub const MANIFEST_VERSION: u32 = 1;

/// Aggregate diagnostics of one solver across all steps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverStats {
    pub solves: usize,
    pub all_converged: bool,
    pub total_iterations: usize,
    pub max_iterations: usize,
    pub max_final_residual: f64,
    /// Solve count per method.
    pub methods: BTreeMap<String, usize>,
}

impl SolverStats {
    fn from_reports<'a>(reports: impl Iterator<Item = &'a SolveReport<f64>>) -> Self {
        let mut s = Self { all_converged: true, ..Self::default() };
        for r in reports {
            s.solves += 1;
            s.all_converged &= r.converged;
            s.total_iterations += r.iterations;
            s.max_iterations = s.max_iterations.max(r.iterations);
            s.max_final_residual = s.max_final_residual.max(r.final_residual_h);
            *s.methods.entry(method_name(r.method)).or_default() += 1;
        }
        s
    }
}

fn method_name(m: SolveMethod) -> String {
    serde_json::to_value(m).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

/// Compact per-step solver record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSolve {
    pub step: usize,
    pub eta_method: SolveMethod,
    pub eta_iterations: usize,
    pub eta_residual: f64,
    pub theta_method: SolveMethod,
    pub theta_iterations: usize,
    pub theta_residual: f64,
    pub eta_equation_residual: f64,
    pub theta_equation_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSummary {
    pub eta: SolverStats,
    pub theta: SolverStats,
    pub per_step: Vec<StepSolve>,
}

impl SolveSummary {
    pub fn from_steps(steps: &[StepReports<f64>]) -> Self {
        Self {
            eta: SolverStats::from_reports(steps.iter().map(|s| &s.eta)),
            theta: SolverStats::from_reports(steps.iter().map(|s| &s.theta)),
            per_step: steps
                .iter()
                .enumerate()
                .map(|(i, s)| StepSolve {
                    step: i + 1,
                    eta_method: s.eta.method,
                    eta_iterations: s.eta.iterations,
                    eta_residual: s.eta.final_residual_h,
                    theta_method: s.theta.method,
                    theta_iterations: s.theta.iterations,
                    theta_residual: s.theta.final_residual_h,
                    eta_equation_residual: s.eta_equation_residual,
                    theta_equation_residual: s.theta_equation_residual,
                })
                .collect(),
        }
    }
}

/// Written next to every command's artifacts. Feeding it back through
/// `--config` reproduces the command: only the `config` block is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub versions: BTreeMap<String, String>,
    pub solver_tolerances: SolverOptions,
    #[serde(default)]
    pub model_bounds: Option<ModelBounds<f64>>,
    #[serde(default)]
    pub assumptions: Option<AssumptionReport<f64>>,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    #[serde(default)]
    pub solves: Option<SolveSummary>,
    pub assertions: Vec<Assertion>,
    #[serde(default)]
    pub failure: Option<String>,
    pub passed: bool,
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("kwc-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("kwc-core".to_string(), kwc_core::VERSION.to_string()),
        ("kwc-experiments".to_string(), kwc_experiments::VERSION.to_string()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(method: SolveMethod, iterations: usize, converged: bool) -> SolveReport<f64> {
        SolveReport { method, iterations, inner_iterations: iterations, final_residual_h: 1e-12, tolerance: 1e-10, converged }
    }

    #[test]
    fn stats_aggregate_methods_and_convergence() {
        let steps = vec![
            StepReports {
                eta: report(SolveMethod::ConjugateGradient, 4, true),
                theta: report(SolveMethod::Newton, 3, true),
                eta_equation_residual: 0.0,
                theta_equation_residual: 0.0,
            },
            StepReports {
                eta: report(SolveMethod::ConjugateGradient, 6, true),
                theta: report(SolveMethod::LaggedDiffusivity, 40, false),
                eta_equation_residual: 0.0,
                theta_equation_residual: 0.0,
            },
        ];
        let s = SolveSummary::from_steps(&steps);
        assert_eq!(s.eta.total_iterations, 10);
        assert!(s.eta.all_converged);
        assert!(!s.theta.all_converged);
        assert_eq!(s.theta.max_iterations, 40);
        assert_eq!(s.theta.methods["lagged_diffusivity"], 1);
        assert_eq!(s.per_step[1].step, 2);
    }
}
