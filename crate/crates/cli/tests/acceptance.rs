//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riesz_core::decay::{fit_exponent, FitMode, DEFAULT_WINDOW};
use riesz_core::diagnostics::NormSeries;
use riesz_core::flow::{burgers_evaluate, compute_k, verify_background_bounds, InitialFlow};
use riesz_core::gronwall::{
    find_threshold_m, integrate_inequality, verify_lemma, GronwallParams, DEFAULT_HORIZON, DEFAULT_RESOLUTION,
};
use riesz_core::inequality::{commutator, resolution_study, EnsembleSpec, Inequality};
use riesz_core::solver::{
    simulate, step_rk4, Derivative, EulerRiesz, InitialData, ModelParams, Outcome, RightHandSide, SimConfig, State,
};
use riesz_core::spectral::{apply_fractional_laplacian, Grid, ScalarField, VectorField};

struct Checked {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Checked {
    Checked { pass, detail: detail.into() }
}

fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values().iter().zip(b.values()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn plane_waves(grid: &Grid, s: f64) -> f64 {
    let n = grid.n() as i64;
    let length = grid.length();
    let d = grid.dim();
    let mut modes: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..d {
        modes = modes
            .into_iter()
            .flat_map(|p| {
                (-n / 2 + 1..n / 2).map(move |m| {
                    let mut v = p.clone();
                    v.push(m);
                    v
                })
            })
            .collect();
    }
    let mut worst: f64 = 0.0;
    for m in modes.iter().filter(|m| m.iter().any(|&v| v != 0)) {
        let k: Vec<f64> = m.iter().map(|&v| 2.0 * PI * v as f64 / length).collect();
        let kn = k.iter().map(|x| x * x).sum::<f64>().sqrt();
        for cosine in [true, false] {
            let wave = ScalarField::from_fn(grid, |x| {
                let arg: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
                if cosine { arg.cos() } else { arg.sin() }
            });
            let out = apply_fractional_laplacian(&wave, s).unwrap();
            let expected = wave.scale(kn.powf(s));
            worst = worst.max(max_diff(&out, &expected) / kn.powf(s).max(1.0));
        }
    }
    worst
}

fn spectral_exactness() -> Checked {
    let grids = [Grid::new(1, 64, 2.5).unwrap(), Grid::new(2, 16, 3.0).unwrap()];
    let mut worst: f64 = 0.0;
    for s in [-1.5, -0.5, 0.5, 1.0, 1.5, 2.0] {
        for g in &grids {
            worst = worst.max(plane_waves(g, s));
        }
    }
    check(worst <= 1e-12, format!("max scaled error {worst:.2e} (limit 1e-12)"))
}

fn p1d(n: usize, length: f64, support: f64, tau_end: f64) -> SimConfig {
    let mut c = SimConfig::new(ModelParams::pressureless(0.5), 1, n, length, 0.01, tau_end);
    c.initial = InitialData { n_amplitude: 0.1, w_amplitude: 0.05, support_fraction: support, perturbation: None };
    c.record_every = 5;
    c
}

fn mass_law() -> Checked {
    let out = simulate(&p1d(256, 40.0, 0.5, 3.0)).unwrap();
    let mass = out.series.series("mass", 0.0, 2.0);
    let (_, r0, p0) = mass[0];
    let mut worst_rescaled: f64 = 0.0;
    let mut worst_physical: f64 = 0.0;
    for &(tau, r, p) in &mass {
        worst_rescaled = worst_rescaled.max((r * r * tau.exp() / (r0 * r0) - 1.0).abs());
        worst_physical = worst_physical.max((p / p0 - 1.0).abs());
    }
    let ok = out.outcome == Outcome::Completed && worst_rescaled <= 1e-6 && worst_physical <= 1e-6;
    check(ok, format!("rescaled drift {worst_rescaled:.2e}, physical drift {worst_physical:.2e} (limit 1e-6)"))
}

fn rate(series: &NormSeries, quantity: &str, l: f64) -> f64 {
    let samples: Vec<(f64, f64)> = series.series(quantity, l, 2.0).into_iter().map(|(t, r, _)| (t, r)).collect();
    fit_exponent(&samples, FitMode::Tau, DEFAULT_WINDOW).map(|f| f.rate).unwrap_or(f64::NAN)
}

fn pressureless_rates(config: &SimConfig) -> Vec<(String, f64)> {
    let out = simulate(config).unwrap();
    assert_eq!(out.outcome, Outcome::Completed, "{:?}", out.outcome);
    let mut rates = Vec::new();
    for q in ["n", "w"] {
        for l in [0.0, 1.0, 2.0] {
            rates.push((format!("{q}{l}"), rate(&out.series, q, l)));
        }
    }
    rates
}

fn format_rates(rates: &[(String, f64)]) -> String {
    rates.iter().map(|(k, v)| format!("{k} {v:.3}")).collect::<Vec<_>>().join(", ")
}

fn pressureless_exponents() -> Checked {
    let rates = pressureless_rates(&p1d(256, 40.0, 0.5, 4.0));
    let ok = rates.iter().all(|(k, r)| if k.starts_with('n') { *r >= 0.4 } else { *r >= 0.15 });
    check(ok, format!("{} (need N >= 0.4, W >= 0.15)", format_rates(&rates)))
}

fn pressured_exponents() -> Checked {
    let mut parts = Vec::new();
    let mut ok = true;
    for lambda in [1.0, -1.0] {
        let mut c = SimConfig::new(ModelParams::pressured(lambda, 1.2, 1.5), 2, 128, 20.0, 5e-3, 3.0);
        c.record_every = 10;
        let out = simulate(&c).unwrap();
        ok &= out.outcome == Outcome::Completed;
        for q in ["n", "w"] {
            for l in [0.0, 1.0, 2.0] {
                let r = rate(&out.series, q, l);
                ok &= r >= 0.4;
                parts.push(format!("λ={lambda:+} {q}{l} {r:.3}"));
            }
        }
    }
    check(ok, format!("{} (need >= 0.4)", parts.join(", ")))
}

fn gronwall_certification() -> Checked {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0;
    for _ in 0..100 {
        let p = GronwallParams::random(&mut rng);
        let th = find_threshold_m(&p, DEFAULT_HORIZON, DEFAULT_RESOLUTION).unwrap();
        for frac in [0.999, 0.5, 0.1, 1e-3] {
            if !verify_lemma(&p, th.m * frac, DEFAULT_HORIZON).unwrap() {
                violations += 1;
            }
        }
    }
    let mut worst: f64 = 0.0;
    for a in [1.5, 2.0, 3.7] {
        let traj = integrate_inequality(&GronwallParams::quadratic(a, 0.0), 0.7, DEFAULT_HORIZON).unwrap();
        for (&t, &y) in traj.times.iter().zip(&traj.values) {
            worst = worst.max((y / (0.7 * (1.0 + t).powf(-a)) - 1.0).abs());
        }
    }
    check(
        violations == 0 && worst <= 1e-9,
        format!("{violations} violations over 100 sets; C*=0 closed-form error {worst:.2e} (limit 1e-9)"),
    )
}

fn background_flow() -> Checked {
    let eps = 0.2;
    let flow = InitialFlow::sine_1d(eps);
    let grid = Grid::new(1, 512, 1.0).unwrap();
    let times = [0.0, 1.0, 10.0, 100.0];
    let mut worst: f64 = 0.0;
    for t in times {
        let sample = compute_k(&flow, &grid, t).unwrap();
        for i in 0..sample.grid.len() {
            let x = sample.grid.coordinates(i)[0];
            let c = eps * burgers_evaluate(&flow, &[x], t).unwrap().alpha[0].cos();
            worst = worst.max((sample.k.at(i)[(0, 0)] - (1.0 + t) * c / (1.0 + t * (1.0 + c))).abs());
        }
    }
    let report = verify_background_bounds(&flow, &grid, &times, &[], 0.05).unwrap();
    check(
        worst <= 1e-8 && report.sup_k_bounded && report.second_gradient_bounded,
        format!(
            "K error {worst:.2e} (limit 1e-8); sup|K| growth {:.2e}, (1+t)^3 sup|D^2 v| growth {:.2e} (limit 0.05)",
            report.sup_k_growth, report.second_gradient_growth
        ),
    )
}

fn inequality_stability() -> Checked {
    let battery = Inequality::battery(1);
    let summaries = resolution_study(&EnsembleSpec::default(), &battery).unwrap().summaries;
    let worst = summaries.iter().map(|s| s.resolution_delta).fold(0.0, f64::max);
    let grid = Grid::new(1, 128, 2.0 * PI).unwrap();
    let c = ScalarField::constant(&grid, 0.7);
    let h = ScalarField::from_fn(&grid, |x| (2.0 * x[0]).sin() + 0.1 * (7.0 * x[0]).cos());
    let zero = ScalarField::zeros(&grid);
    let mut nonzero = Vec::new();
    for ineq in &battery {
        // product estimates vanish on f = 0, commutator-type ones on constant f
        let f = if matches!(ineq, Inequality::KatoPonce { .. }) { &zero } else { &c };
        if ineq.ratio(f, &h).unwrap() != 0.0 {
            nonzero.push(ineq.label());
        }
    }
    for s in [0.5, 1.0, 1.5, 2.0] {
        if commutator(&c, s, &h).unwrap().values().iter().any(|&v| v != 0.0) {
            nonzero.push(format!("commutator s={s}"));
        }
    }
    check(
        worst < 0.2 && nonzero.is_empty(),
        format!("max delta {worst:.2e} over {} inequalities (limit 0.2); non-zero structural cases: {nonzero:?}", summaries.len()),
    )
}

/// Pressureless right-hand side plus the forcing that makes
/// `N = a(τ) cos y`, `W = b(τ) sin y` an exact solution.
struct Manufactured {
    inner: EulerRiesz,
    grid: Grid,
}

fn amplitudes(tau: f64) -> (f64, f64, f64, f64) {
    let a = 0.1 * (-0.3 * tau).exp() * (1.0 + 0.5 * (2.0 * tau).sin());
    let da = 0.1 * (-0.3 * tau).exp() * (-0.3 * (1.0 + 0.5 * (2.0 * tau).sin()) + (2.0 * tau).cos());
    let b = 0.05 * (0.5 * tau).cos();
    let db = -0.025 * (0.5 * tau).sin();
    (a, da, b, db)
}

fn exact(grid: &Grid, tau: f64) -> State {
    let (a, _, b, _) = amplitudes(tau);
    State {
        n: ScalarField::from_fn(grid, |x| a * x[0].cos()),
        w: VectorField::from_fn(grid, |x, _| b * x[0].sin()),
        tau,
    }
}

impl RightHandSide for Manufactured {
    fn eval(&self, state: &State) -> riesz_core::Result<Derivative> {
        let mut d = self.inner.eval(state)?;
        let star = exact(&self.grid, state.tau);
        let at_star = self.inner.eval(&star)?;
        let (_, da, _, db) = amplitudes(state.tau);
        let dn_star = ScalarField::from_fn(&self.grid, |x| da * x[0].cos());
        let dw_star = ScalarField::from_fn(&self.grid, |x| db * x[0].sin());
        d.dn.axpy(1.0, &(&dn_star - &at_star.dn));
        d.dw.components_mut()[0].axpy(1.0, &(&dw_star - at_star.dw.component(0)));
        Ok(d)
    }
}

fn integrator_order() -> Checked {
    let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
    let rhs = Manufactured { inner: EulerRiesz::new(ModelParams::pressureless(0.5), 1).unwrap(), grid: grid.clone() };
    let mut errors = Vec::new();
    for steps in [10, 20, 40, 80] {
        let h = 1.0 / steps as f64;
        let mut state = exact(&grid, 0.0);
        for k in 0..steps {
            state = step_rk4(&state, h, &rhs, 0.5).unwrap();
            state.tau = (k + 1) as f64 * h;
        }
        let target = exact(&grid, 1.0);
        errors.push(max_diff(&state.n, &target.n).max(max_diff(state.w.component(0), target.w.component(0))));
    }
    let orders: Vec<f64> = errors.windows(2).map(|p| (p[0] / p[1]).log2()).collect();
    let ok = orders.iter().all(|&o| o >= 3.5);
    let shown: Vec<String> = orders.iter().map(|o| format!("{o:.3}")).collect();
    check(ok, format!("observed orders [{}] (need >= 3.5)", shown.join(", ")))
}

fn run_simulate(config: &Path, out: &Path) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_riesz-lab"))
        .args(["simulate", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .status()
        .unwrap();
    assert!(status.success(), "simulate exited with {status}");
    std::fs::read(out.join("norms.csv")).unwrap()
}

fn determinism() -> Checked {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    let mut c = p1d(128, 40.0, 0.5, 1.0);
    c.params = ModelParams::pressured(-1.0, 0.5, 1.5);
    std::fs::write(&config, serde_json::to_string(&c).unwrap()).unwrap();
    let first = run_simulate(&config, &dir.path().join("a"));
    let second = run_simulate(&config, &dir.path().join("b"));
    check(first == second && !first.is_empty(), format!("{} bytes, identical: {}", first.len(), first == second))
}

fn box_robustness() -> Checked {
    let base = pressureless_rates(&p1d(256, 40.0, 0.5, 4.0));
    let doubled = pressureless_rates(&p1d(512, 80.0, 0.25, 4.0));
    let worst = base.iter().zip(&doubled).map(|(a, b)| (a.1 - b.1).abs()).fold(0.0, f64::max);
    check(worst < 0.05, format!("max rate change {worst:.2e} (limit 0.05)"))
}

fn main() {
    type Criterion = (&'static str, Duration, fn() -> Checked);
    let criteria: [Criterion; 10] = [
        ("spectral exactness", Duration::from_secs(10), spectral_exactness),
        ("mass law", Duration::from_secs(60), mass_law),
        ("pressureless exponents", Duration::from_secs(300), pressureless_exponents),
        ("pressured exponents", Duration::from_secs(600), pressured_exponents),
        ("gronwall certification", Duration::from_secs(120), gronwall_certification),
        ("background flow", Duration::from_secs(60), background_flow),
        ("inequality stability", Duration::from_secs(300), inequality_stability),
        ("integrator order", Duration::from_secs(60), integrator_order),
        ("determinism", Duration::from_secs(300), determinism),
        ("box robustness", Duration::from_secs(300), box_robustness),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed < *budget;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<24} {}  {}; {:.1}s of {}s",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
