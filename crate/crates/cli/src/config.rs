//! Run configuration: strict JSON parsing, defaults and validation.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use kwc_core::calculus::Grid;
use kwc_core::elliptic::SolverOptions;
use kwc_core::evolution::{InitialProfile, StepperKind};
use kwc_core::model::{ModelSpec, Parameters};
use kwc_experiments::{
    ContinuousDependenceConfig, DissipationConfig, EpsilonLimitConfig, H2UniformityConfig, ManufacturedConfig,
    MuNuLimitConfig, Scenario,
};

use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    /// Cells per axis; a single entry is used for every axis.
    pub cells: Vec<usize>,
    /// Domain length per axis; a single entry is used for every axis.
    pub extent: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { dim: 1, cells: vec![64], extent: vec![1.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParameterSpec {
    pub kappa: f64,
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Defaults to `1e-3 T`.
    pub dt: Option<f64>,
    pub mu: f64,
    pub nu: f64,
}

impl Default for ParameterSpec {
    fn default() -> Self {
        Self { kappa: 0.1, epsilon: 0.1, t_final: 1.0, dt: None, mu: 0.0, nu: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSpec {
    pub eta: InitialProfile,
    pub theta: InitialProfile,
    /// Replace `θ₀` by its resolvent image before running.
    pub prepare_theta: bool,
}

impl Default for InitialSpec {
    fn default() -> Self {
        let s = Scenario::default();
        Self { eta: s.eta0, theta: s.theta0, prepare_theta: s.prepare_theta }
    }
}

/// Forcing expressions in `t`, `x`, `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcingSpec {
    pub u: String,
    pub v: String,
}

impl Default for ForcingSpec {
    fn default() -> Self {
        Self { u: "0".into(), v: "0".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub snapshot_stride: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), snapshot_stride: 10 }
    }
}

/// Optional per-experiment settings; absent blocks use the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentsSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_dissipation: Option<DissipationConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_limit: Option<EpsilonLimitConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub munu_limit: Option<MuNuLimitConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub continuous_dependence: Option<ContinuousDependenceConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h2_uniformity: Option<H2UniformityConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manufactured_convergence: Option<ManufacturedConfig>,
}

impl ExperimentsSpec {
    /// Inserts the default block for experiment `name` when absent.
    pub fn ensure(&mut self, name: &str) {
        match name {
            "energy_dissipation" => drop(self.energy_dissipation.get_or_insert_with(Default::default)),
            "epsilon_limit" => drop(self.epsilon_limit.get_or_insert_with(Default::default)),
            "munu_limit" => drop(self.munu_limit.get_or_insert_with(Default::default)),
            "continuous_dependence" => drop(self.continuous_dependence.get_or_insert_with(Default::default)),
            "h2_uniformity" => drop(self.h2_uniformity.get_or_insert_with(Default::default)),
            "manufactured_convergence" => drop(self.manufactured_convergence.get_or_insert_with(Default::default)),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub parameters: ParameterSpec,
    pub model: ModelSpec,
    pub initial: InitialSpec,
    pub forcing: ForcingSpec,
    pub stepper: StepperKind,
    pub output: OutputSpec,
    pub solver: SolverOptions,
    /// Seed for every random initial profile; `eta` gets `seed`, `theta` gets `seed + 1`.
    pub seed: Option<u64>,
    pub experiments: ExperimentsSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            parameters: ParameterSpec::default(),
            model: ModelSpec::default(),
            initial: InitialSpec::default(),
            forcing: ForcingSpec::default(),
            stepper: StepperKind::Parabolic,
            output: OutputSpec::default(),
            solver: SolverOptions::default(),
            seed: None,
            experiments: ExperimentsSpec::default(),
        }
    }
}

/// One problem found in a configuration, located by its key path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl ConfigError {
    fn single(path: &str, message: impl Into<String>) -> Self {
        Self { violations: vec![Violation { path: path.into(), message: message.into() }] }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problem(s)):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Names inside backticks, in order: `unknown field `a`, expected one of `b`, `c``.
fn backticked(msg: &str) -> Vec<&str> {
    msg.split('`').skip(1).step_by(2).collect()
}

fn suggestion(unknown: &str, candidates: &[&str]) -> Option<String> {
    candidates
        .iter()
        .map(|c| (strsim::damerau_levenshtein(unknown, c), *c))
        .filter(|(d, c)| *d <= 2.max(c.len() / 3))
        .min()
        .map(|(_, c)| c.to_string())
}

fn path_segments(path: &serde_path_to_error::Path) -> Vec<serde_path_to_error::Segment> {
    path.iter().cloned().collect()
}

/// Removes `key` from the object found by following `segments` from `root`.
fn remove_key(root: &mut Value, segments: &[serde_path_to_error::Segment], key: &str) -> bool {
    use serde_path_to_error::Segment;
    let mut cur = root;
    for seg in segments {
        let next = match (seg, cur) {
            (Segment::Map { key: k }, Value::Object(m)) => m.get_mut(k),
            (Segment::Seq { index }, Value::Array(a)) => a.get_mut(*index),
            _ => None,
        };
        match next {
            Some(v) => cur = v,
            None => return false,
        }
    }
    match cur {
        Value::Object(m) => m.remove(key).is_some(),
        _ => false,
    }
}

fn strict_from_value<T: for<'de> Deserialize<'de>>(mut value: Value) -> Result<T, ConfigError> {
    let mut violations = Vec::new();
    // Unknown keys are collected one at a time: report, drop, and re-parse.
    for _ in 0..256 {
        match serde_path_to_error::deserialize::<_, T>(value.clone()) {
            Ok(v) if violations.is_empty() => return Ok(v),
            Ok(_) => return Err(ConfigError { violations }),
            Err(err) => {
                let path = err.path().to_string();
                let msg = err.inner().to_string();
                let names = backticked(&msg);
                let unknown = msg.starts_with("unknown field") || msg.starts_with("unknown variant");
                let mut message = msg.clone();
                if unknown {
                    if let Some(s) = names.first().and_then(|u| suggestion(u, &names[1..])) {
                        message = format!("{msg}; did you mean `{s}`?");
                    }
                }
                let shown = if path == "." { String::new() } else { path };
                violations.push(Violation { path: shown, message });
                if !(msg.starts_with("unknown field") && names.first().is_some()) {
                    return Err(ConfigError { violations });
                }
                let segments = path_segments(err.path());
                let key = names[0];
                let removed = remove_key(&mut value, &segments, key)
                    || (!segments.is_empty() && remove_key(&mut value, &segments[..segments.len() - 1], key));
                if !removed {
                    return Err(ConfigError { violations });
                }
            }
        }
    }
    Err(ConfigError { violations })
}

fn resolve_path(p: &Path, base: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn broadcast<T: Copy>(v: &[T], dim: usize) -> Vec<T> {
    if v.len() == 1 {
        vec![v[0]; dim]
    } else {
        v.to_vec()
    }
}

fn reseed(p: &mut InitialProfile, seed: u64) {
    if let InitialProfile::RandomSmooth { seed: s, .. } = p {
        *s = seed;
    }
}

impl RunConfig {
    /// Physical parameters with `dt` defaulted.
    pub fn params(&self) -> Parameters<f64> {
        let p = &self.parameters;
        let base = Parameters::new(p.kappa, p.epsilon, p.t_final).with_damping(p.mu, p.nu);
        match p.dt {
            Some(dt) => base.with_dt(dt),
            None => base,
        }
    }

    pub fn grid(&self) -> kwc_core::Result<Grid<f64>> {
        Grid::new(self.grid.dim, &self.grid.cells, &self.grid.extent)
    }

    /// The `(u, v)` forcing expressions.
    pub fn forcing_exprs(&self) -> Result<(Expr, Expr), ConfigError> {
        let mut violations = Vec::new();
        let mut parse = |key: &str, src: &str| match Expr::parse(src) {
            Ok(e) => Some(e),
            Err(e) => {
                violations.push(Violation { path: format!("forcing.{key}"), message: e.to_string() });
                None
            }
        };
        let u = parse("u", &self.forcing.u);
        let v = parse("v", &self.forcing.v);
        match (u, v) {
            (Some(u), Some(v)) => Ok((u, v)),
            _ => Err(ConfigError { violations }),
        }
    }

    /// Applies `seed` to every random profile, including the experiment scenarios.
    pub fn apply_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        reseed(&mut self.initial.eta, seed);
        reseed(&mut self.initial.theta, seed.wrapping_add(1));
        let ex = &mut self.experiments;
        let scenarios = [
            ex.energy_dissipation.as_mut().map(|c| &mut c.scenario),
            ex.epsilon_limit.as_mut().map(|c| &mut c.scenario),
            ex.munu_limit.as_mut().map(|c| &mut c.scenario),
            ex.continuous_dependence.as_mut().map(|c| &mut c.scenario),
            ex.h2_uniformity.as_mut().map(|c| &mut c.scenario),
        ];
        for s in scenarios.into_iter().flatten() {
            *s = s.clone().reseeded(seed);
        }
        if let Some(c) = ex.continuous_dependence.as_mut() {
            c.seed = seed;
        }
    }

    /// Fills defaults (`dt`, per-axis grid lists, seeds, absolute file paths
    /// relative to `base`) and checks every invariant, collecting all
    /// violations.
    pub fn resolve(mut self, base: &Path) -> Result<Self, ConfigError> {
        let mut v = Vec::new();
        let mut bad = |path: &str, message: String| v.push(Violation { path: path.into(), message });

        let dim = self.grid.dim;
        if !(1..=2).contains(&dim) {
            bad("grid.dim", format!("must be 1 or 2, got {dim}"));
        } else {
            for (key, len) in [("grid.cells", self.grid.cells.len()), ("grid.extent", self.grid.extent.len())] {
                if len != 1 && len != dim {
                    bad(key, format!("needs 1 or {dim} entries, got {len}"));
                }
            }
            self.grid.cells = broadcast(&self.grid.cells, dim);
            self.grid.extent = broadcast(&self.grid.extent, dim);
            if self.grid.cells.len() == dim && self.grid.extent.len() == dim {
                if let Err(e) = self.grid() {
                    bad("grid", e.to_string());
                }
            }
        }

        if self.parameters.dt.is_none() {
            self.parameters.dt = Some(self.params().dt);
        }
        let params = self.params();
        for msg in params.violations() {
            let (key, rest) = msg.split_once(": ").unwrap_or(("", msg.as_str()));
            bad(&format!("parameters.{key}"), rest.to_string());
        }
        if params.violations().is_empty() {
            if let Err(e) = params.step_count() {
                bad("parameters.dt", e.to_string());
            }
        }
        if self.stepper == StepperKind::Parabolic && !params.is_parabolic() {
            bad("stepper", "the parabolic stepper needs mu = nu = 0; use \"pseudo_parabolic\"".into());
        }
        if self.output.snapshot_stride == 0 {
            bad("output.snapshot_stride", "must be at least 1".into());
        }
        if let Err(e) = self.model.build::<f64>() {
            bad("model.name", e.to_string());
        }
        for (key, p) in [("initial.eta", &mut self.initial.eta), ("initial.theta", &mut self.initial.theta)] {
            if let InitialProfile::File { path } = p {
                *path = resolve_path(path, base);
                if !path.is_file() {
                    bad(&format!("{key}.path"), format!("file {} does not exist", path.display()));
                }
            }
        }
        if let Err(e) = self.forcing_exprs() {
            v.extend(e.violations);
        }
        if let Some(seed) = self.seed {
            self.apply_seed(seed);
        }
        if v.is_empty() {
            Ok(self)
        } else {
            Err(ConfigError { violations: v })
        }
    }
}

/// Parses a configuration document. A run manifest is accepted as well, in
/// which case its `config` block is used.
pub fn parse_config_str(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| ConfigError::single("", format!("not valid JSON: {e}")))?;
    let value = match value {
        Value::Object(ref m) if m.contains_key("manifest_version") => {
            let manifest: crate::manifest::RunManifest = strict_from_value(value)?;
            return manifest.config.resolve(base);
        }
        Value::Object(_) => value,
        _ => return Err(ConfigError::single("", "top level must be a JSON object")),
    };
    strict_from_value::<RunConfig>(value)?.resolve(base)
}

/// Reads and parses a configuration file; relative file paths inside are
/// taken relative to the file's directory.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::single("", format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, &base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_config_str(text, Path::new("."))
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse("{}").unwrap();
        assert_eq!(c.parameters.dt, Some(1e-3));
        assert_eq!(c.model.name, "reference");
        assert_eq!(c.grid.cells, vec![64]);
        let c = parse(r#"{"parameters": {"T": 0.5}, "grid": {"dim": 2, "cells": [8]}}"#).unwrap();
        assert_eq!(c.parameters.dt, Some(5e-4));
        assert_eq!(c.grid.cells, vec![8, 8]);
        assert_eq!(c.grid.extent, vec![1.0, 1.0]);
    }

    #[test]
    fn negative_kappa_names_assumption() {
        let e = parse(r#"{"parameters": {"kappa": -1}}"#).unwrap_err();
        assert_eq!(e.violations.len(), 1);
        assert_eq!(e.violations[0].path, "parameters.kappa");
        assert!(e.violations[0].message.contains("(A1)"));
    }

    #[test]
    fn unknown_keys_are_all_reported_with_suggestions() {
        let e = parse(r#"{"parameters": {"kapa": 0.1, "epsilom": 0.2}, "gird": {}}"#).unwrap_err();
        let text = e.to_string();
        assert_eq!(e.violations.len(), 3, "{text}");
        assert!(text.contains("did you mean `kappa`?"), "{text}");
        assert!(text.contains("did you mean `epsilon`?"), "{text}");
        assert!(text.contains("did you mean `grid`?"), "{text}");
        assert!(e.violations.iter().any(|v| v.path == "parameters.kapa"), "{text}");
    }

    #[test]
    fn type_errors_carry_key_paths() {
        let e = parse(r#"{"grid": {"cells": ["many"]}}"#).unwrap_err();
        assert_eq!(e.violations[0].path, "grid.cells[0]");
        let e = parse(r#"{"initial": {"eta": {"kind": "constnt", "value": 1}}}"#).unwrap_err();
        assert!(e.to_string().contains("did you mean `constant`?"), "{e}");
    }

    #[test]
    fn semantic_violations_are_collected() {
        let e = parse(
            r#"{"parameters": {"epsilon": 2, "T": 1, "dt": 0.3, "mu": 0.1},
                "forcing": {"u": "sin(", "v": "q"}, "output": {"snapshot_stride": 0},
                "model": {"name": "other"}}"#,
        )
        .unwrap_err();
        let paths: Vec<&str> = e.violations.iter().map(|v| v.path.as_str()).collect();
        for p in ["parameters.epsilon", "stepper", "output.snapshot_stride", "model.name", "forcing.u", "forcing.v"] {
            assert!(paths.contains(&p), "{p} missing from {paths:?}");
        }
    }

    #[test]
    fn missing_snapshot_file_is_reported() {
        let e = parse(r#"{"initial": {"eta": {"kind": "file", "path": "nope.csv"}}}"#).unwrap_err();
        assert_eq!(e.violations[0].path, "initial.eta.path");
    }

    #[test]
    fn serialize_parse_round_trip() {
        let mut c = parse(r#"{"parameters": {"kappa": 0.3, "T": 0.1}, "forcing": {"u": "sin(pi*x)"}}"#).unwrap();
        c.experiments.manufactured_convergence = Some(ManufacturedConfig::default());
        c.apply_seed(11);
        let text = serde_json::to_string_pretty(&c).unwrap();
        assert_eq!(parse(&text).unwrap(), c);
    }

    #[test]
    fn seed_reaches_profiles_and_scenarios() {
        let c = parse(r#"{"seed": 5, "experiments": {"energy_dissipation": {}}}"#).unwrap();
        assert!(matches!(c.initial.eta, InitialProfile::RandomSmooth { seed: 5, .. }));
        let s = &c.experiments.energy_dissipation.as_ref().unwrap().scenario;
        assert!(matches!(s.eta0, InitialProfile::RandomSmooth { seed: 5, .. }));
    }
}
