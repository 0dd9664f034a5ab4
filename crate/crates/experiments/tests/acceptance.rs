//! Acceptance suite. Runs every criterion, prints one verdict line per
//! criterion and exits nonzero if any of them fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kwc_core::calculus::{laplacian_neumann, norm_h, norm_v, Grid, ScalarField};
use kwc_core::elliptic::{
    linear_resolvent, singular_residual, singular_resolvent, LinearResolventProblem, SingularResolventProblem,
};
use kwc_core::evolution::{run, RunOptions, StepperKind, SystemState, TabulatedForcing};
use kwc_core::model::{gamma_cell, gamma_eps, grad_gamma_eps, hess_gamma_eps, ModelFunctions, Parameters, ReferenceModel};
use kwc_experiments::h2::battery_ratios;
use kwc_experiments::{
    exp_continuous_dependence, exp_energy_dissipation, exp_epsilon_limit, exp_manufactured_convergence, exp_munu_limit,
    BatteryEntry, ContinuousDependenceConfig, DissipationConfig, EpsilonLimitConfig, ExperimentReport,
    ManufacturedConfig, MuNuLimitConfig, Scenario,
};

type Outcome = Result<(bool, String), String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn random_field(g: Grid<f64>, rng: &mut ChaCha8Rng, amp: f64) -> ScalarField<f64> {
    let vals = (0..g.len()).map(|_| rng.gen_range(-amp..amp)).collect();
    ScalarField::from_values(g, vals).unwrap()
}

fn sci(a: &[f64]) -> String {
    let cells: Vec<String> = a.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", cells.join(", "))
}

fn c01_gradient_bound() -> Outcome {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let dim = rng.gen_range(1..=3);
        let scale = 10f64.powf(rng.gen_range(-6.0..3.0));
        let y: Vec<f64> = (0..dim).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
        let eps = 1.0 - rng.gen::<f64>();
        let q = grad_gamma_eps(&y, eps).map_err(|e| e.to_string())?;
        worst = worst.max(q.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    Ok((worst <= 1.0 + TOL, format!("max |∇γ_ε| = {worst:.15}")))
}

fn c02_convexity() -> Outcome {
    const SLACK: f64 = -1e-12;
    const HESS_TOL: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_slack = f64::INFINITY;
    for _ in 0..100_000 {
        let eps = 1.0 - rng.gen::<f64>();
        let a: Vec<f64> = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let q = grad_gamma_eps(&a, eps).map_err(|e| e.to_string())?;
        let lin: f64 = q.iter().zip(a.iter().zip(&b)).map(|(qi, (ai, bi))| qi * (bi - ai)).sum();
        let s = gamma_eps(&b, eps) - gamma_eps(&a, eps) - lin;
        worst_slack = worst_slack.min(s / gamma_eps(&b, eps).max(1.0));
    }
    let mut worst_hess = 0.0f64;
    for _ in 0..10_000 {
        let eps = rng.gen_range(0.1..1.0);
        let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let hess = hess_gamma_eps(&y, eps).map_err(|e| e.to_string())?;
        let h = 1e-5;
        let mut err = 0.0f64;
        let mut size = 0.0f64;
        for j in 0..2 {
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[j] += h;
            ym[j] -= h;
            let gp = grad_gamma_eps(&yp, eps).map_err(|e| e.to_string())?;
            let gm = grad_gamma_eps(&ym, eps).map_err(|e| e.to_string())?;
            for i in 0..2 {
                let fd = (gp[i] - gm[i]) / (2.0 * h);
                err = err.max((fd - hess[i][j]).abs());
                size = size.max(hess[i][j].abs());
            }
        }
        worst_hess = worst_hess.max(err / size);
    }
    Ok((
        worst_slack >= SLACK && worst_hess <= HESS_TOL,
        format!("min subgradient slack {worst_slack:.3e}, max Hessian rel. error {worst_hess:.3e}"),
    ))
}

fn c03_nonexpansive() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_h = 0.0f64;
    let mut worst_v = 0.0f64;
    for g in [Grid::unit_1d(64).unwrap(), Grid::unit_2d(32).unwrap()] {
        for _ in 0..100 {
            let lambda = rng.gen_range(1e-3..1.0);
            let z1 = random_field(g, &mut rng, 1.0);
            let z2 = random_field(g, &mut rng, 1.0);
            let solve = |z: &ScalarField<f64>| linear_resolvent(&LinearResolventProblem::unit_weight(lambda, z.clone()));
            let (w1, _) = solve(&z1).map_err(|e| e.to_string())?;
            let (w2, _) = solve(&z2).map_err(|e| e.to_string())?;
            let (dw, dz) = (&w1 - &w2, &z1 - &z2);
            worst_h = worst_h.max(norm_h(&dw) / norm_h(&dz));
            worst_v = worst_v.max(norm_v(&dw) / norm_v(&dz));
        }
    }
    Ok((
        worst_h <= 1.0 + TOL && worst_v <= 1.0 + TOL,
        format!("max ratio H {worst_h:.6}, V {worst_v:.6}"),
    ))
}

fn c04_cosine_mode() -> Outcome {
    const BAND: [f64; 2] = [3.5, 4.5];
    let lambda = 1.0;
    let mut errors = Vec::new();
    for n in [32, 64, 128] {
        let g = Grid::unit_1d(n).unwrap();
        let mode = |x: [f64; 2]| (std::f64::consts::PI * x[0]).cos();
        let z = ScalarField::from_fn(g, mode);
        let (w, _) = linear_resolvent(&LinearResolventProblem::unit_weight(lambda, z)).map_err(|e| e.to_string())?;
        let exact = ScalarField::from_fn(g, |x| mode(x) / (1.0 + lambda * std::f64::consts::PI.powi(2)));
        errors.push(norm_h(&(&w - &exact)));
    }
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = ratios.iter().all(|r| (BAND[0]..=BAND[1]).contains(r));
    Ok((ok, format!("errors {}, ratios {ratios:.4?}", sci(&errors))))
}

/// Independent 1D discretization of
/// `h Σ (β_i γ̄_i + m_i w_i²/2 - z_i w_i) + (κ h / 2) Σ_faces D²`,
/// `γ̄_i` the mean of `γ_ε` over the two faces of cell `i` (zero slope on the
/// boundary).
struct Oracle1d {
    h: f64,
    beta: Vec<f64>,
    m: Vec<f64>,
    z: Vec<f64>,
    kappa: f64,
    eps: f64,
}

impl Oracle1d {
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let n = w.len();
        let gp = |s: f64| s / (self.eps * self.eps + s * s).sqrt();
        let mut out: Vec<f64> = (0..n).map(|i| self.h * (self.m[i] * w[i] - self.z[i])).collect();
        for f in 0..n - 1 {
            let d = (w[f + 1] - w[f]) / self.h;
            let flux = 0.5 * (self.beta[f] + self.beta[f + 1]) * gp(d) + self.kappa * d;
            out[f] -= flux;
            out[f + 1] += flux;
        }
        out
    }

    fn solve(&self) -> Vec<f64> {
        let n = self.z.len();
        let mut w = self.z.clone();
        for _ in 0..100 {
            let r = self.gradient(&w);
            let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rn < 1e-14 {
                break;
            }
            let step = 1e-7;
            let mut jac = vec![vec![0.0; n]; n];
            for j in 0..n {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[j] += step;
                wm[j] -= step;
                let (rp, rm) = (self.gradient(&wp), self.gradient(&wm));
                for i in 0..n {
                    jac[i][j] = (rp[i] - rm[i]) / (2.0 * step);
                }
            }
            let dx = dense_solve(jac, r.iter().map(|v| -v).collect());
            let mut t = 1.0;
            loop {
                let trial: Vec<f64> = w.iter().zip(&dx).map(|(a, b)| a + t * b).collect();
                let tn = self.gradient(&trial).iter().map(|v| v * v).sum::<f64>().sqrt();
                if tn < rn || t < 1e-8 {
                    w = trial;
                    break;
                }
                t *= 0.5;
            }
        }
        w
    }
}

fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

fn c05_singular_resolvent() -> Outcome {
    const LINEAR_TOL: f64 = 1e-10;
    const CONST_TOL: f64 = 1e-12;
    const ORACLE_TOL: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let err = |e: kwc_core::Error| e.to_string();

    let mut linear_gap = 0.0f64;
    for g in [Grid::unit_1d(64).unwrap(), Grid::unit_2d(16).unwrap()] {
        let z = random_field(g, &mut rng, 1.0);
        let kappa = 0.3;
        let p = SingularResolventProblem::unit_weight(ScalarField::zeros(g), kappa, z.clone(), 0.05);
        let (ws, _) = singular_resolvent(&p).map_err(err)?;
        let (wl, _) = linear_resolvent(&LinearResolventProblem::unit_weight(kappa, z)).map_err(err)?;
        linear_gap = linear_gap.max(norm_h(&(&ws - &wl)));
    }

    let mut const_gap = 0.0f64;
    for g in [Grid::unit_1d(64).unwrap(), Grid::unit_2d(16).unwrap()] {
        for c in [-2.0f64, 0.0, 0.7] {
            let beta = random_field(g, &mut rng, 1.0).map(|b| b + 1.0);
            let p = SingularResolventProblem::unit_weight(beta, 0.1, ScalarField::constant(g, c), 0.01);
            let (w, _) = singular_resolvent(&p).map_err(err)?;
            const_gap = const_gap.max(w.values().iter().map(|v| (v - c).abs()).fold(0.0, f64::max));
        }
    }

    let n = 32;
    let g = Grid::unit_1d(n).unwrap();
    let step = |x: [f64; 2]| ((x[0] - 0.4) / 0.05).tanh();
    let battery: [(ScalarField<f64>, ScalarField<f64>, ScalarField<f64>, f64, f64); 3] = [
        (ScalarField::constant(g, 1.0), ScalarField::constant(g, 1.0), ScalarField::from_fn(g, step), 0.05, 0.2),
        (
            ScalarField::from_fn(g, |x| 0.5 + x[0] * x[0]),
            ScalarField::from_fn(g, |x| 1.0 + 0.5 * x[0]),
            ScalarField::from_fn(g, |x| 3.0 * (std::f64::consts::PI * x[0]).cos()),
            0.1,
            0.05,
        ),
        (
            ScalarField::from_fn(g, |x| 1.0 + (3.0 * x[0]).sin()),
            ScalarField::constant(g, 0.5),
            random_field(g, &mut rng, 2.0),
            0.02,
            0.1,
        ),
    ];
    let mut oracle_gap = 0.0f64;
    for (beta, m, z, eps, kappa) in battery {
        let oracle = Oracle1d {
            h: 1.0 / n as f64,
            beta: beta.values().to_vec(),
            m: m.values().to_vec(),
            z: z.values().to_vec(),
            kappa,
            eps,
        };
        let reference = ScalarField::from_values(g, oracle.solve()).map_err(err)?;
        let p = SingularResolventProblem { beta, kappa_eff: kappa, m, z, epsilon: eps };
        let (w, rep) = singular_resolvent(&p).map_err(err)?;
        if !rep.converged {
            return Ok((false, format!("solver did not converge: {rep:?}")));
        }
        let check = norm_h(&singular_residual(&p, &reference));
        if check > 1e-9 {
            return Ok((false, format!("oracle residual under the crate operator {check:.3e}")));
        }
        oracle_gap = oracle_gap.max(norm_h(&(&w - &reference)));
    }
    Ok((
        linear_gap <= LINEAR_TOL && const_gap <= CONST_TOL && oracle_gap <= ORACLE_TOL,
        format!("β≡0 gap {linear_gap:.2e}, constants gap {const_gap:.2e}, oracle gap {oracle_gap:.2e}"),
    ))
}

fn c06_h2_uniformity() -> Outcome {
    const MAX_SPREAD: f64 = 2.0;
    let grid = Grid::unit_1d(128).unwrap();
    let epsilons: Vec<f64> = (0..=8).map(|k| 2f64.powi(-k)).collect();
    let mut spreads = Vec::new();
    for entry in BatteryEntry::ALL {
        let res = battery_ratios(entry, &grid, 20.0, 0.1, &epsilons).map_err(|e| e.to_string())?;
        spreads.push(res.spread);
    }
    Ok((spreads.iter().all(|&s| s <= MAX_SPREAD), format!("max/min ratio per entry {spreads:.3?}")))
}

fn c07_dissipation() -> Outcome {
    let cfg = DissipationConfig {
        scenario: Scenario { dim: 1, cells: 64, t_final: 1.0, dt: Some(1e-3), ..Scenario::default() },
        energy_slack: 1e-9,
        damping: vec![[0.0, 0.0], [0.1, 0.1]],
        refine: true,
        ratio_band: [1.5, 2.5],
    };
    let rep = exp_energy_dissipation(&cfg).map_err(|e| e.to_string())?;
    let monotone = rep.runs.iter().all(|r| r.max_energy_increase <= 1e-9);
    let lower = rep.runs.iter().all(|r| {
        let k = cfg.damping.iter().position(|d| *d == [r.mu, r.nu]).unwrap();
        r.worst_residual >= -rep.fitted_c[k] * r.dt - 1e-12
    });
    let halving = rep.halving_ratios.iter().all(|q| (1.5..=2.5).contains(q));
    let steppers = rep.runs.iter().any(|r| r.mu > 0.0) && rep.runs.iter().any(|r| r.mu == 0.0);
    Ok((
        monotone && lower && halving && steppers && rep.passed(),
        format!(
            "max ΔE {:.2e}, fitted C {:.3?}, halving ratios {:.4?}",
            rep.runs.iter().map(|r| r.max_energy_increase).fold(f64::NEG_INFINITY, f64::max),
            rep.fitted_c,
            rep.halving_ratios
        ),
    ))
}

fn c08_stationary() -> Outcome {
    const TOL: f64 = 1e-10;
    let model = ReferenceModel::<f64>::default();
    let (kappa, eps) = (0.1, 0.1);
    let g = Grid::<f64>::unit_1d(64).unwrap();
    let eta = ScalarField::from_fn(g, |x| 0.8 + 0.2 * (std::f64::consts::PI * x[0]).cos());
    let theta = ScalarField::from_fn(g, |x| 0.5 * ((x[0] - 0.5) / 0.1).tanh());
    let gamma = gamma_cell(&theta, eps);
    let lap = laplacian_neumann(&eta);
    let u = ScalarField::from_values(
        g,
        (0..g.len())
            .map(|i| {
                let r = eta.values()[i];
                -lap.values()[i] + model.g(r) + model.alpha_d1(r) * gamma.values()[i]
            })
            .collect(),
    )
    .map_err(|e| e.to_string())?;
    let p = SingularResolventProblem::unit_weight(eta.map(|r| model.alpha(r)), kappa, ScalarField::zeros(g), eps);
    let v = &singular_residual(&p, &theta) - &theta;
    let forcing = TabulatedForcing::new(vec![(0.0, u)], vec![(0.0, v)]).map_err(|e| e.to_string())?;
    let initial = SystemState::new(eta.clone(), theta.clone(), 0.0).map_err(|e| e.to_string())?;

    let mut worst = 0.0f64;
    for (mu, nu) in [(0.0, 0.0), (0.1, 0.0), (0.0, 0.1), (0.1, 0.1)] {
        let params = Parameters::new(kappa, eps, 0.1).with_dt(1e-3).with_damping(mu, nu);
        let mut kinds = vec![StepperKind::PseudoParabolic];
        if mu == 0.0 && nu == 0.0 {
            kinds.push(StepperKind::Parabolic);
        }
        for kind in kinds {
            let traj = run(&initial, &model, &params, &forcing, kind, &RunOptions::default()).map_err(|e| e.to_string())?;
            if traj.records.len() != 101 {
                return Ok((false, format!("expected 100 steps, got {}", traj.records.len() - 1)));
            }
            for s in &traj.snapshots {
                worst = worst.max((&s.eta - &eta).max_abs()).max((&s.theta - &theta).max_abs());
            }
        }
    }
    Ok((worst <= TOL, format!("max deviation over 100 steps {worst:.2e}")))
}

fn c09_continuous_dependence() -> Outcome {
    let cfg = ContinuousDependenceConfig { delta: 1e-3, envelope_margin: 0.1, linearity_tolerance: 0.2, ..Default::default() };
    let rep = exp_continuous_dependence(&cfg).map_err(|e| e.to_string())?;
    let mut ok = rep.passed();
    for g in [&rep.full, &rep.half] {
        ok &= g.c_hat.is_finite();
        ok &= g.j.iter().zip(&g.envelope).all(|(j, e)| *j <= 1.1 * e);
    }
    ok &= (rep.linearity_ratio - 2.0).abs() <= 0.2 * 2.0;
    ok &= rep.zero_perturbation_sup_j == 0.0;
    Ok((
        ok,
        format!(
            "C_hat {:.4e}/{:.4e}, √supJ ratio {:.4}, J(δ=0) sup {:e}",
            rep.full.c_hat, rep.half.c_hat, rep.linearity_ratio, rep.zero_perturbation_sup_j
        ),
    ))
}

fn strictly_decreasing(a: &[f64]) -> bool {
    a.windows(2).all(|w| w[1] < w[0])
}

fn c10_epsilon_limit() -> Outcome {
    let cfg = EpsilonLimitConfig { epsilons: vec![0.5, 0.3, 0.2, 0.15, 0.11], epsilon0: 0.1, ..Default::default() };
    let rep = exp_epsilon_limit(&cfg).map_err(|e| e.to_string())?;
    let ok = strictly_decreasing(&rep.initial_data.errors) && strictly_decreasing(&rep.trajectory_h.errors);
    Ok((
        ok && rep.passed(),
        format!("initial V {}, trajectory sup-H {}", sci(&rep.initial_data.errors), sci(&rep.trajectory_h.errors)),
    ))
}

fn c11_munu_limit() -> Outcome {
    let cfg = MuNuLimitConfig { damping: vec![0.2, 0.1, 0.05, 0.025], ..Default::default() };
    let rep = exp_munu_limit(&cfg).map_err(|e| e.to_string())?;
    let ok = strictly_decreasing(&rep.trajectory_h.errors) && rep.undamped_identical;
    Ok((
        ok && rep.passed(),
        format!("sup-H {}, undamped identical {}", sci(&rep.trajectory_h.errors), rep.undamped_identical),
    ))
}

fn c12_manufactured() -> Outcome {
    let cfg = ManufacturedConfig { spatial_band: [3.5, 4.5], temporal_band: [1.7, 2.3], ..Default::default() };
    let rep = exp_manufactured_convergence(&cfg).map_err(|e| e.to_string())?;
    let ok = rep.spatial_ratios.iter().all(|r| (3.5..=4.5).contains(r))
        && rep.temporal_ratios.iter().all(|r| (1.7..=2.3).contains(r));
    Ok((
        ok && rep.passed(),
        format!("spatial ratios {:.4?}, temporal ratios {:.4?}", rep.spatial_ratios, rep.temporal_ratios),
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "gradient bound of γ_ε", budget: secs(1), check: c01_gradient_bound },
        Criterion { id: 2, name: "convexity and Hessian of γ_ε", budget: secs(5), check: c02_convexity },
        Criterion { id: 3, name: "linear resolvent non-expansive", budget: secs(10), check: c03_nonexpansive },
        Criterion { id: 4, name: "Neumann cosine mode accuracy", budget: secs(5), check: c04_cosine_mode },
        Criterion { id: 5, name: "singular resolvent correctness", budget: secs(30), check: c05_singular_resolvent },
        Criterion { id: 6, name: "H² bound uniform in ε", budget: secs(60), check: c06_h2_uniformity },
        Criterion { id: 7, name: "energy dissipation", budget: secs(60), check: c07_dissipation },
        Criterion { id: 8, name: "stationary preservation", budget: secs(10), check: c08_stationary },
        Criterion { id: 9, name: "continuous dependence", budget: secs(120), check: c09_continuous_dependence },
        Criterion { id: 10, name: "ε-limit", budget: secs(180), check: c10_epsilon_limit },
        Criterion { id: 11, name: "(μ,ν)-limit", budget: secs(180), check: c11_munu_limit },
        Criterion { id: 12, name: "manufactured-solution orders", budget: secs(120), check: c12_manufactured },
    ];
    let filter: Option<u32> = std::env::var("KWC_ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failures = 0;
    for c in criteria.iter().filter(|c| filter.map_or(true, |id| id == c.id)) {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok((ok, detail)) => (ok && elapsed <= c.budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<32} {}  [{:.2}s / {}s]  {}",
            c.id,
            c.name,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            detail
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
