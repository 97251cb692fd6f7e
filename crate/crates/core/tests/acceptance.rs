//! Acceptance checks, one PASS/FAIL line per criterion. Runs with
//! `cargo test -p ham-core --test acceptance`.

use ham_core::analytics::{
    check_stability, growth_difference, momentum_variance, profitability, stationary_moments,
};
use ham_core::io::{estimates_rows, write_estimates_csv, write_path_csv};
use ham_core::params::{Horizon, ModelParams};
use ham_core::simulator::{
    integrate, monte_carlo, monte_carlo_with_path, run_paths, Estimate, Execution, InitialState,
    SimConfig, SimError,
};
use nalgebra::{Matrix2, Matrix4, Vector4};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::VecDeque;
use std::time::Instant;

type Outcome = Result<String, String>;

fn theta_of(p: &ModelParams) -> Matrix2<f64> {
    let (q_f, q_c) = (p.beta * p.p_f * p.alpha_f, p.beta * p.p_c * p.alpha_c);
    Matrix2::new(q_f, -q_c, q_f, p.k - q_c)
}

/// Solves `A X + X Aᵀ = S` through the Kronecker form of the equation.
fn kron_lyapunov(a: &Matrix2<f64>, s: &Matrix2<f64>) -> Matrix2<f64> {
    let id = Matrix2::<f64>::identity();
    let op: Matrix4<f64> = id.kronecker(a) + a.kronecker(&id);
    let rhs = Vector4::new(s[(0, 0)], s[(1, 0)], s[(0, 1)], s[(1, 1)]);
    let x = op.lu().solve(&rhs).expect("nonsingular Lyapunov operator");
    Matrix2::new(x[0], x[2], x[1], x[3])
}

fn sample_params(rng: &mut StdRng) -> ModelParams {
    let p_f = rng.random_range(0.0..=1.0);
    ModelParams {
        beta: rng.random_range(0.0..=2.0),
        alpha_f: rng.random_range(0.0..=3.0),
        alpha_c: rng.random_range(0.0..=3.0),
        p_f,
        p_c: 1.0 - p_f,
        k: rng.random_range(0.1..=2.0),
        sigma_f: [rng.random_range(0.05..0.5), rng.random_range(-0.2..0.2)],
        sigma_n: [rng.random_range(-0.2..0.2), rng.random_range(0.05..0.5)],
        ..ModelParams::reference()
    }
}

fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}

fn stability_verdicts() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let mut sets = Vec::new();
    while sets.len() < 2000 {
        let p = sample_params(&mut rng);
        let c1 = p.k - p.beta * (p.p_c * p.alpha_c - p.p_f * p.alpha_f);
        let c2 = p.beta * p.p_f * p.alpha_f;
        if c1.abs() > 1e-6 && c2.abs() > 1e-6 {
            sets.push(p);
        }
    }
    let start = Instant::now();
    let reports: Vec<_> = sets.iter().map(|p| check_stability(p).unwrap()).collect();
    let elapsed = start.elapsed().as_secs_f64();
    let mut disagreements = 0;
    let mut n_stable = 0;
    for (p, r) in sets.iter().zip(&reports) {
        let oracle = theta_of(p).complex_eigenvalues().iter().all(|l| l.re > 0.0);
        n_stable += usize::from(oracle);
        if r.stable_by_conditions != oracle || r.stable_by_spectrum != oracle {
            disagreements += 1;
        }
    }
    let detail = format!(
        "{} sets ({n_stable} stable), {disagreements} disagreements, {elapsed:.4} s",
        sets.len()
    );
    if disagreements == 0 && elapsed < 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn moments_match_lyapunov() -> Outcome {
    let mut rng = StdRng::seed_from_u64(12);
    let mut worst = 0.0_f64;
    let mut checked = 0;
    while checked < 2000 {
        let p = sample_params(&mut rng);
        let Ok(m) = stationary_moments(&p) else { continue };
        let big_sigma = Matrix2::new(
            p.sigma_n[0] - p.sigma_f[0],
            p.sigma_n[1] - p.sigma_f[1],
            p.sigma_n[0],
            p.sigma_n[1],
        );
        let rho = kron_lyapunov(&theta_of(&p), &(big_sigma * big_sigma.transpose()));
        // The covariance can cross zero, so its error is measured on the
        // correlation scale.
        let cov_scale = (rho[(0, 0)] * rho[(1, 1)]).sqrt();
        worst = worst
            .max(rel_err(m.var_u, rho[(0, 0)]))
            .max((m.cov_um - rho[(0, 1)]).abs() / cov_scale)
            .max(rel_err(m.var_m, rho[(1, 1)]));
        checked += 1;
    }
    let detail = format!("{checked} stable sets, worst relative error {worst:.2e}");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reference_run() -> Result<ham_core::simulator::ErgodicEstimates, SimError> {
    let cfg = SimConfig {
        burn_in_t: Some(100.0),
        n_paths: 32,
        seed: 2024,
        ..SimConfig::new(1e-3, 2000.0)
    };
    monte_carlo(&ModelParams::reference(), &cfg)
}

fn check_within(name: &str, e: &Estimate, target: f64, n_se: f64) -> (bool, String) {
    let z = e.z_score(target).unwrap_or(f64::INFINITY);
    (z.abs() <= n_se, format!("{name} {:.5} (target {target}, z {z:+.2})", e.value))
}

fn all_within(parts: Vec<(bool, String)>) -> Outcome {
    let ok = parts.iter().all(|(b, _)| *b);
    let detail = parts.into_iter().map(|(_, s)| s).collect::<Vec<_>>().join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn simulated_moments(est: &ham_core::simulator::ErgodicEstimates) -> Outcome {
    all_within(vec![
        check_within("var_u", &est.var_u, 0.22, 3.0),
        check_within("cov_um", &est.cov_um, 0.09, 3.0),
        check_within("var_m", &est.var_m, 0.13, 3.0),
    ])
}

fn simulated_growth(est: &ham_core::simulator::ErgodicEstimates) -> Outcome {
    let p = ModelParams::reference();
    let g = profitability(&p).map_err(|e| e.to_string())?;
    let m = stationary_moments(&p).map_err(|e| e.to_string())?;
    let identity = (g.gap - growth_difference(&p, &m)).abs();
    let mut parts = vec![
        check_within("pi_f", &est.pi_f, 0.08135, 3.0),
        check_within("pi_c", &est.pi_c, 0.0404, 3.0),
    ];
    parts.push((identity <= 1e-12, format!("gap identity residual {identity:.1e}")));
    all_within(parts)
}

fn limiting_cases() -> Outcome {
    let base = ModelParams::reference();
    let mut parts = Vec::new();

    let no_chartists = ModelParams { alpha_c: 0.0, ..base };
    let q_f = no_chartists.beta * no_chartists.p_f * no_chartists.alpha_f;
    let su = [base.sigma_f[0] - base.sigma_n[0], base.sigma_f[1] - base.sigma_n[1]];
    let expected = (su[0] * su[0] + su[1] * su[1]) / (2.0 * q_f);
    let got = stationary_moments(&no_chartists).map_err(|e| e.to_string())?.var_u;
    let e1 = rel_err(got, expected);
    parts.push((e1 <= 1e-12, format!("q_c = 0: var_u rel err {e1:.1e}")));

    let passive = ModelParams { beta: 0.0, ..base };
    let nn = base.sigma_n[0] * base.sigma_n[0] + base.sigma_n[1] * base.sigma_n[1];
    let expected = nn / (2.0 * base.k);
    let e2 = rel_err(momentum_variance(&passive).map_err(|e| e.to_string())?, expected);
    parts.push((e2 <= 1e-12, format!("beta = 0: var_m rel err {e2:.1e}")));

    // Both limits are approached continuously.
    let near = stationary_moments(&ModelParams { alpha_c: 1e-9, ..base }).unwrap().var_u;
    let e3 = rel_err(near, stationary_moments(&no_chartists).unwrap().var_u);
    parts.push((e3 <= 1e-6, format!("alpha_c -> 0 rel err {e3:.1e}")));
    let near = momentum_variance(&ModelParams { beta: 1e-9, ..base }).unwrap();
    let e4 = rel_err(near, expected);
    parts.push((e4 <= 1e-6, format!("beta -> 0 rel err {e4:.1e}")));
    all_within(parts)
}

fn delay_agrees_and_reconstructs() -> Outcome {
    let p = ModelParams::reference();
    let tau = 10.0 / p.k;
    let delayed = ModelParams { tau: Horizon::Finite(tau), ..p };
    let cfg = SimConfig { n_paths: 32, seed: 5, ..SimConfig::new(0.01, 2000.0) };
    let inf = monte_carlo(&p, &cfg).map_err(|e| e.to_string())?;
    let fin = monte_carlo(&delayed, &SimConfig { seed: 6, ..cfg }).map_err(|e| e.to_string())?;
    let se = inf.var_m.std_error.unwrap().hypot(fin.var_m.std_error.unwrap());
    let z = (fin.var_m.value - inf.var_m.value) / se;
    let mut parts = vec![(
        z.abs() <= 3.0,
        format!("var_m tau=20 {:.5} vs tau=inf {:.5} (z {z:+.2})", fin.var_m.value, inf.var_m.value),
    )];

    let dt = 0.01;
    let lags = (tau / dt - 1e-9).ceil() as usize;
    let weights: Vec<f64> = (0..lags).map(|j| (-p.k * j as f64 * dt).exp()).collect();
    let recon_cfg = SimConfig { burn_in_t: Some(0.0), seed: 9, ..SimConfig::new(dt, 100.0) };
    let mut window: VecDeque<f64> = VecDeque::with_capacity(lags + 1);
    let mut worst = 0.0_f64;
    let mut checked = 0u64;
    integrate(&delayed, &recon_cfg, 0, |v| {
        if v.step == 0 {
            return;
        }
        window.push_front(v.ds_prime);
        window.truncate(lags);
        if v.state.t > tau {
            let (mut sum, mut mass) = (0.0, 0.0);
            for (w, ds) in weights.iter().zip(&window) {
                sum += w * ds;
                mass += w * ds.abs();
            }
            worst = worst.max((v.state.m - sum).abs() / sum.abs().max(mass));
            checked += 1;
        }
    })
    .map_err(|e| e.to_string())?;
    let budget = 5.0 * p.k * dt;
    parts.push((
        worst <= budget && checked > 0,
        format!("window sum at {checked} steps, worst rel err {worst:.2e} (budget {budget:.3})"),
    ));
    all_within(parts)
}

fn csv_bytes(p: &ModelParams, cfg: &SimConfig) -> Vec<u8> {
    let run = monte_carlo_with_path(p, cfg, 0, Execution::Parallel).unwrap();
    let mut buf = Vec::new();
    write_path_csv(&mut buf, &run.path).unwrap();
    write_estimates_csv(&mut buf, &estimates_rows(p, &run.estimates)).unwrap();
    buf
}

fn reproducible() -> Outcome {
    let p = ModelParams::reference();
    let cfg = SimConfig { n_paths: 8, seed: 7, burn_in_t: Some(5.0), ..SimConfig::new(0.01, 50.0) };
    let same_bytes = csv_bytes(&p, &cfg) == csv_bytes(&p, &cfg);
    let par = run_paths(&p, &cfg, Execution::Parallel);
    let ser = run_paths(&p, &cfg, Execution::Serial);
    let bits = |r: &Vec<Result<ham_core::simulator::PathSummary, SimError>>| -> Vec<u64> {
        r.iter()
            .map(|s| s.as_ref().unwrap())
            .flat_map(|s| [s.mean_uu, s.mean_um, s.mean_mm, s.growth_f, s.growth_c, s.terminal.m])
            .map(f64::to_bits)
            .collect()
    };
    let same_exec = bits(&par) == bits(&ser);
    let detail = format!("rerun byte-identical: {same_bytes}, parallel == serial: {same_exec}");
    if same_bytes && same_exec {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn instability_detected() -> Outcome {
    let unstable = ModelParams { alpha_c: 4.0, k: 1.0, ..ModelParams::reference() };
    let cfg = SimConfig { n_paths: 16, seed: 3, ..SimConfig::new(0.01, 500.0) };
    let blown = run_paths(&unstable, &cfg, Execution::Parallel)
        .iter()
        .filter(|r| matches!(r, Err(SimError::Overflow(_))))
        .count();
    let mut parts = vec![(blown == 16, format!("{blown}/16 paths overflowed"))];

    let quiet = ModelParams { sigma_f: [0.0, 0.0], sigma_n: [0.0, 0.0], ..ModelParams::reference() };
    let theta = theta_of(&quiet);
    let energy = kron_lyapunov(&theta.transpose(), &Matrix2::identity());
    let cfg = SimConfig {
        initial: InitialState { u: 1.0, m: -0.5, ..InitialState::default() },
        burn_in_t: Some(0.0),
        ..SimConfig::new(0.01, 50.0)
    };
    let mut prev = f64::INFINITY;
    let mut increases = 0;
    integrate(&quiet, &cfg, 0, |v| {
        let x = nalgebra::Vector2::new(v.state.u, v.state.m);
        let e = (x.transpose() * energy * x)[(0, 0)];
        if e >= prev {
            increases += 1;
        }
        prev = e;
    })
    .map_err(|e| e.to_string())?;
    parts.push((increases == 0, format!("noise-free energy increased at {increases} steps, final {prev:.2e}")));
    all_within(parts)
}

fn main() {
    let start = Instant::now();
    let reference = reference_run();
    let from_reference = |f: fn(&ham_core::simulator::ErgodicEstimates) -> Outcome| -> Outcome {
        match &reference {
            Ok(est) => f(est),
            Err(e) => Err(e.to_string()),
        }
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("stability conditions match spectrum", stability_verdicts()),
        ("closed-form moments match Lyapunov solve", moments_match_lyapunov()),
        ("simulated moments at reference parameters", from_reference(simulated_moments)),
        ("simulated growth rates at reference parameters", from_reference(simulated_growth)),
        ("limiting reductions", limiting_cases()),
        ("finite look-back momentum", delay_agrees_and_reconstructs()),
        ("determinism", reproducible()),
        ("instability detection", instability_detected()),
    ];
    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(d) => println!("criterion {}: PASS  {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {d}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1} s)",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
