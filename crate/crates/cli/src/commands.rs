//! The `run`, `experiment` and `validate` commands.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

use kwc_core::calculus::{write_snapshot, ScalarField};
use kwc_core::evolution::{
    prepare_initial_theta, run, write_timeseries, ConstantForcing, FnForcing, Forcings, RunOptions,
    SystemState, Trajectory,
};
use kwc_core::model::{validate_assumptions, ReferenceModel, DEFAULT_SAMPLES, DEFAULT_SAMPLE_RANGE};
use kwc_experiments::{
    exp_continuous_dependence, exp_energy_dissipation, exp_epsilon_limit, exp_h2_uniformity,
    exp_manufactured_convergence, exp_munu_limit, write_artifacts, Assertion, ExperimentReport,
};

use crate::config::RunConfig;
use crate::manifest::{versions, RunManifest, SolveSummary, MANIFEST_VERSION};

pub const EXIT_OK: i32 = 0;
/// An assertion failed or the computation stopped.
pub const EXIT_FAILED: i32 = 1;
/// The configuration or command line was rejected.
pub const EXIT_USAGE: i32 = 2;

pub const EXPERIMENTS: [&str; 6] = [
    "energy_dissipation",
    "epsilon_limit",
    "munu_limit",
    "continuous_dependence",
    "h2_uniformity",
    "manufactured_convergence",
];

/// Relative per-step energy increase tolerated in unforced runs.
pub const ENERGY_SLACK: f64 = 1e-9;

/// Outcome of a command: exit code plus the machine-readable summary printed on stdout.
#[derive(Debug, Clone, Serialize)]
pub struct CommandResult {
    #[serde(skip)]
    pub exit_code: i32,
    pub status: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub assertions: Vec<Assertion>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

impl CommandResult {
    fn new(command: &str, out_dir: Option<PathBuf>, assertions: Vec<Assertion>, errors: Vec<String>) -> Self {
        let ok = errors.is_empty() && assertions.iter().all(|a| a.passed);
        Self {
            exit_code: if ok { EXIT_OK } else { EXIT_FAILED },
            status: if ok { "passed" } else { "failed" },
            command: command.to_string(),
            out_dir,
            assertions,
            errors,
        }
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    fs::write(path, text + "\n")
}

/// Initial state described by the configuration, with `θ₀` prepared when requested.
pub fn initial_state(cfg: &RunConfig, model: &ReferenceModel<f64>) -> kwc_core::Result<SystemState<f64>> {
    let grid = cfg.grid()?;
    let eta = cfg.initial.eta.sample(&grid)?;
    let mut theta = cfg.initial.theta.sample(&grid)?;
    if cfg.initial.prepare_theta {
        let p = cfg.params();
        theta = prepare_initial_theta(&eta, &theta, &ScalarField::zeros(grid), p.epsilon, p.kappa, model)?;
    }
    SystemState::new(eta, theta, 0.0)
}

/// Forcing built from the configured expressions.
pub fn forcing(cfg: &RunConfig) -> Result<Box<dyn Forcings<f64>>, String> {
    let (u, v) = cfg.forcing_exprs().map_err(|e| e.to_string())?;
    Ok(match (u.constant_value(), v.constant_value()) {
        (Some(u), Some(v)) => Box::new(ConstantForcing { u, v }),
        _ => Box::new(FnForcing::new(move |t, x| u.eval(t, x[0], x[1]), move |t, x| v.eval(t, x[0], x[1]))),
    })
}

fn write_run_outputs(traj: &Trajectory<f64>, dt: f64, out: &Path) -> io::Result<()> {
    let mut csv = Vec::new();
    write_timeseries(&traj.records, &mut csv).map_err(io::Error::other)?;
    fs::write(out.join("timeseries.csv"), csv)?;
    let snaps = out.join("snapshots");
    fs::create_dir_all(&snaps)?;
    for s in &traj.snapshots {
        let step = (s.time / dt).round() as usize;
        for (name, field) in [("eta", &s.eta), ("theta", &s.theta)] {
            let mut buf = Vec::new();
            write_snapshot(field, &mut buf).map_err(io::Error::other)?;
            fs::write(snaps.join(format!("{name}_{step:06}.csv")), buf)?;
        }
    }
    Ok(())
}

fn run_assertions(traj: &Trajectory<f64>, unforced: bool) -> Vec<Assertion> {
    let converged = traj.solve_reports.iter().all(|r| r.eta.converged && r.theta.converged);
    let mut out = vec![Assertion::new(
        "solvers_converged",
        converged,
        format!("{} steps", traj.solve_reports.len()),
    )];
    if unforced {
        let e: Vec<f64> = traj.energies().collect();
        let worst = e.windows(2).map(|w| (w[1] - w[0]) / w[0].abs().max(1.0)).fold(f64::NEG_INFINITY, f64::max);
        out.push(Assertion::new(
            "energy_nonincreasing",
            e.len() < 2 || worst <= ENERGY_SLACK,
            format!("max relative increase {worst:e}, slack {ENERGY_SLACK:e}"),
        ));
    }
    out
}

/// Integrates the configured system and writes `timeseries.csv`,
/// `snapshots/` and `manifest.json` into `out`.
pub fn cmd_run(cfg: &RunConfig, out: &Path) -> CommandResult {
    let started = unix_now();
    let clock = Instant::now();
    let mut errors = Vec::new();
    let mut assertions = Vec::new();
    let mut solves = None;
    let mut bounds = None;
    let mut assumptions = None;

    let outcome = (|| -> Result<(), String> {
        fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
        let model: ReferenceModel<f64> = cfg.model.build().map_err(|e| e.to_string())?;
        let report = validate_assumptions(&model, DEFAULT_SAMPLE_RANGE, DEFAULT_SAMPLES).map_err(|e| e.to_string())?;
        bounds = Some(report.bounds);
        assumptions = Some(report);
        let state = initial_state(cfg, &model).map_err(|e| e.to_string())?;
        let f = forcing(cfg)?;
        let params = cfg.params();
        let opts = RunOptions { snapshot_stride: cfg.output.snapshot_stride, delta_alpha: None, solver: cfg.solver };
        let result = run(&state, &model, &params, f.as_ref(), cfg.stepper, &opts);
        let (traj, failure) = match result {
            Ok(t) => (t, None),
            Err(fail) => {
                let msg = fail.to_string();
                (fail.partial, Some(msg))
            }
        };
        write_run_outputs(&traj, params.dt, out).map_err(|e| e.to_string())?;
        solves = Some(SolveSummary::from_steps(&traj.solve_reports));
        assertions = run_assertions(&traj, f.is_zero());
        match failure {
            Some(msg) => Err(msg),
            None => Ok(()),
        }
    })();
    if let Err(e) = outcome {
        errors.push(e);
    }
    assertions.insert(0, Assertion::new("run_completed", errors.is_empty(), errors.join("; ")));
    let result = CommandResult::new("run", Some(out.to_path_buf()), assertions, errors);
    let manifest = RunManifest {
        manifest_version: MANIFEST_VERSION,
        command: "run".into(),
        config: cfg.clone(),
        versions: versions(),
        solver_tolerances: cfg.solver,
        model_bounds: bounds,
        assumptions,
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        solves,
        assertions: result.assertions.clone(),
        failure: result.errors.first().cloned(),
        passed: result.exit_code == EXIT_OK,
    };
    finish(result, out, &manifest)
}

fn finish(mut result: CommandResult, dir: &Path, manifest: &RunManifest) -> CommandResult {
    if fs::create_dir_all(dir).is_ok() {
        if let Err(e) = write_json(&dir.join("manifest.json"), manifest) {
            result.errors.push(format!("cannot write manifest: {e}"));
        }
        if result.exit_code != EXIT_OK {
            let _ = write_json(&dir.join("failure.json"), &result);
        }
    }
    if !result.errors.is_empty() {
        result.exit_code = EXIT_FAILED;
        result.status = "failed";
    }
    result
}

fn experiment_report(name: &str, cfg: &mut RunConfig) -> Result<Box<dyn ExperimentReportObject>, String> {
    let ex = &mut cfg.experiments;
    let err = |e: kwc_core::Error| e.to_string();
    Ok(match name {
        "energy_dissipation" => {
            Box::new(exp_energy_dissipation(ex.energy_dissipation.get_or_insert_with(Default::default)).map_err(err)?)
        }
        "epsilon_limit" => Box::new(exp_epsilon_limit(ex.epsilon_limit.get_or_insert_with(Default::default)).map_err(err)?),
        "munu_limit" => Box::new(exp_munu_limit(ex.munu_limit.get_or_insert_with(Default::default)).map_err(err)?),
        "continuous_dependence" => Box::new(
            exp_continuous_dependence(ex.continuous_dependence.get_or_insert_with(Default::default)).map_err(err)?,
        ),
        "h2_uniformity" => Box::new(exp_h2_uniformity(ex.h2_uniformity.get_or_insert_with(Default::default)).map_err(err)?),
        "manufactured_convergence" => Box::new(
            exp_manufactured_convergence(ex.manufactured_convergence.get_or_insert_with(Default::default)).map_err(err)?,
        ),
        other => return Err(unknown_experiment(other)),
    })
}

fn unknown_experiment(name: &str) -> String {
    let best = EXPERIMENTS.iter().min_by_key(|e| strsim::damerau_levenshtein(name, e)).expect("nonempty list");
    format!("unknown experiment `{name}`; did you mean `{best}`? (known: {}, all)", EXPERIMENTS.join(", "))
}

/// Object-safe view of an experiment report.
trait ExperimentReportObject {
    fn assertions(&self) -> Vec<Assertion>;
    fn write(&self, root: &Path) -> io::Result<PathBuf>;
}

impl<R: ExperimentReport> ExperimentReportObject for R {
    fn assertions(&self) -> Vec<Assertion> {
        ExperimentReport::assertions(self).to_vec()
    }
    fn write(&self, root: &Path) -> io::Result<PathBuf> {
        write_artifacts(self, root)
    }
}

/// Runs one named experiment (or `all`), writing `report.json`, CSVs and a
/// manifest into `out/<name>/`.
pub fn cmd_experiment(name: &str, cfg: &RunConfig, out: &Path) -> CommandResult {
    if name == "all" {
        let results: Vec<CommandResult> = EXPERIMENTS.iter().map(|n| cmd_experiment(n, cfg, out)).collect();
        let assertions = results
            .iter()
            .flat_map(|r| r.assertions.iter().map(move |a| Assertion { name: format!("{}/{}", r.command, a.name), ..a.clone() }))
            .collect();
        let errors = results.iter().flat_map(|r| r.errors.iter().map(move |e| format!("{}: {e}", r.command))).collect();
        return CommandResult::new("all", Some(out.to_path_buf()), assertions, errors);
    }
    if !EXPERIMENTS.contains(&name) {
        let mut r = CommandResult::new(name, None, Vec::new(), vec![unknown_experiment(name)]);
        r.exit_code = EXIT_USAGE;
        return r;
    }
    let started = unix_now();
    let clock = Instant::now();
    let mut cfg = cfg.clone();
    cfg.experiments.ensure(name);
    if let Some(seed) = cfg.seed {
        cfg.apply_seed(seed);
    }
    let report = experiment_report(name, &mut cfg);
    let dir = out.join(name);
    let (assertions, errors) = match report {
        Ok(rep) => match rep.write(out) {
            Ok(_) => (rep.assertions(), Vec::new()),
            Err(e) => (rep.assertions(), vec![format!("cannot write artifacts: {e}")]),
        },
        Err(e) => (Vec::new(), vec![e]),
    };
    let result = CommandResult::new(name, Some(dir.clone()), assertions, errors);
    let manifest = RunManifest {
        manifest_version: MANIFEST_VERSION,
        command: format!("experiment {name}"),
        config: cfg.clone(),
        versions: versions(),
        solver_tolerances: cfg.solver,
        model_bounds: None,
        assumptions: None,
        started_unix_seconds: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        solves: None,
        assertions: result.assertions.clone(),
        failure: result.errors.first().cloned(),
        passed: result.exit_code == EXIT_OK,
    };
    finish(result, &dir, &manifest)
}

/// Checks the model assumptions and parameter invariants. Writes
/// `validation.json` when `out` is given.
pub fn cmd_validate(cfg: &RunConfig, out: Option<&Path>) -> CommandResult {
    let mut assertions = Vec::new();
    let mut errors = Vec::new();
    let mut report = None;
    match cfg.model.build::<f64>() {
        Ok(model) => match validate_assumptions(&model, DEFAULT_SAMPLE_RANGE, DEFAULT_SAMPLES) {
            Ok(r) => {
                for c in &r.checks {
                    assertions.push(Assertion::new(
                        format!("{}: {}", c.assumption, c.description),
                        c.passed,
                        c.detail.clone(),
                    ));
                }
                report = Some(r);
            }
            Err(e) => errors.push(e.to_string()),
        },
        Err(e) => errors.push(e.to_string()),
    }
    let violations = cfg.params().violations();
    assertions.push(Assertion::new("parameters", violations.is_empty(), violations.join("; ")));
    let result = CommandResult::new("validate", out.map(Path::to_path_buf), assertions, errors);
    if let Some(dir) = out {
        let doc = json!({
            "config": cfg,
            "assumptions": report,
            "passed": result.exit_code == EXIT_OK,
            "assertions": result.assertions,
        });
        if let Err(e) = fs::create_dir_all(dir).and_then(|_| write_json(&dir.join("validation.json"), &doc)) {
            let mut r = result;
            r.errors.push(format!("cannot write validation report: {e}"));
            r.exit_code = EXIT_FAILED;
            r.status = "failed";
            return r;
        }
    }
    result
}
