//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use liouville_core::machinery::{
    bootstrap_schedule, doubling_select, ladder, time_select, DiscreteField, TimeSelectInput,
};
use liouville_core::nonlinearity::{check_identities, CustomField, IdentityCheck};
use liouville_core::selfsimilar::{
    check_energy_nonnegative, energy_trace, kappa, verify_gk2, weighted_energy, EnergyTrace, RescaledField,
    RescaledFrame, YGrid, TAIL_TOL,
};
use liouville_core::stationary::{scan, shoot, Classification, ShootMode, ShootOptions};
use liouville_core::zeronumber::zero_number_trace;
use liouville_core::{
    fit_blowup_rate, is_subcritical, zero_number, Boundary, Cadence, ConeSpec, DiffusionScheme, Geometry, Grid,
    HomogeneousGradientField, InitialData, Perturbation, Solver, SolverConfig, StopReason, StopRule,
};
use liouville_lab::certificate::{verify_ladder, verify_schedule};
use liouville_lab::config::{CampaignConfig, Family, SimulationConfig};
use liouville_lab::harness::run_campaign;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let o = f();
    let took = start.elapsed();
    let in_time = took < limit;
    outcome(
        o.passed && in_time,
        format!("{}; {:.2}s (limit {}s{})", o.detail, took.as_secs_f64(), limit.as_secs(), if in_time { "" } else { ", EXCEEDED" }),
    )
}

fn solver(geometry: Geometry, nodes: usize, field: HomogeneousGradientField, cfg: SolverConfig) -> Solver {
    let grid = Arc::new(Grid::new(geometry, nodes).unwrap());
    Solver::new(grid, field, Perturbation::NONE, cfg).unwrap()
}

fn algebraic_suite() -> Outcome {
    let cubic = |u: &[f64]| u[0].abs().powi(4) / 4.0 + u[1].abs().powi(4) / 4.0 + 0.5 * u[0] * u[0] * u[1] * u[1];
    let custom = CustomField {
        name: "cubic pair".into(),
        potential: Arc::new(cubic),
        force: Arc::new(|u: &[f64], out: &mut [f64]| {
            out[0] = u[0].powi(3) + u[0] * u[1] * u[1];
            out[1] = u[1].powi(3) + u[1] * u[0] * u[0];
        }),
        hyperplane_margin: 0.0,
    };
    let fields = [
        HomogeneousGradientField::scalar_power(3.0).unwrap(),
        HomogeneousGradientField::scalar_power(1.5).unwrap(),
        HomogeneousGradientField::gradient_coupled(0.0, 1.0).unwrap(),
        HomogeneousGradientField::gradient_coupled(0.5, -0.5).unwrap(),
        HomogeneousGradientField::gradient_coupled(-0.5, 0.7).unwrap(),
        HomogeneousGradientField::scalar_quadratic(),
        HomogeneousGradientField::quadratic_system(1.0).unwrap(),
        HomogeneousGradientField::quadratic_system(0.3).unwrap(),
        HomogeneousGradientField::custom(2, 3.0, custom).unwrap(),
    ];
    let check = IdentityCheck { samples: 1000, ..IdentityCheck::default() };
    let mut failed = Vec::new();
    let (mut euler, mut homog, mut grad) = (0.0f64, 0.0f64, 0.0f64);
    for f in &fields {
        let r = check_identities(f, &check);
        euler = euler.max(r.euler);
        homog = homog.max(r.homogeneity);
        grad = grad.max(r.gradient);
        if !(r.passed && r.samples == 1000 && r.euler <= 1e-10 && r.homogeneity <= 1e-10 && r.gradient <= 1e-6) {
            failed.push(f.name().to_string());
        }
    }
    outcome(
        failed.is_empty(),
        format!(
            "{} fields x 1000 samples, max euler {euler:.1e}, homogeneity {homog:.1e}, gradient {grad:.1e}, failed {failed:?}",
            fields.len()
        ),
    )
}

fn flat_blowup() -> Outcome {
    let p = 3.0;
    let field = HomogeneousGradientField::scalar_power(p).unwrap();
    let geo = Geometry::line(1.0, Boundary::Neumann, Boundary::Neumann);
    let mut s = solver(geo, 11, field, SolverConfig::default());
    let init = s.state(InitialData::Flat { values: vec![5.0] }.sample(s.grid(), 1).unwrap()).unwrap();
    let trace = s.run_until(init, &StopRule::sup_norm(1e3), &Cadence::EverySteps(1)).unwrap();
    let t_exact = 0.02;
    let mut worst = 0.0f64;
    for snap in &trace.snapshots {
        let exact = 1.0 / ((p - 1.0) * (t_exact - snap.t)).sqrt();
        for v in &snap.fields[0] {
            worst = worst.max((v / exact - 1.0).abs());
        }
    }
    let t_est = fit_blowup_rate(&trace).map(|r| r.t_est).unwrap_or(f64::NAN);
    let t_err = (t_est / t_exact - 1.0).abs();
    outcome(
        trace.stop == StopReason::SupNormReached && t_err < 0.01 && worst < 1e-3,
        format!("T = {t_est:.6} (rel err {t_err:.1e}), profile rel err {worst:.1e} over {} snapshots", trace.snapshots.len()),
    )
}

fn bump_rate(p: f64, amplitude: f64) -> (f64, Duration) {
    let start = Instant::now();
    let field = HomogeneousGradientField::scalar_power(p).unwrap();
    let geo = Geometry::line(20.0, Boundary::FarField, Boundary::FarField);
    let mut s = solver(geo, 801, field, SolverConfig::default());
    let data = InitialData::Gaussian { amplitudes: vec![amplitude], center: 0.0, width: 1.0 };
    let init = s.state(data.sample(s.grid(), 1).unwrap()).unwrap();
    let trace = s.run_until(init, &StopRule::sup_norm(1e6), &Cadence::EverySteps(0)).unwrap();
    let beta = if trace.stop == StopReason::SupNormReached {
        fit_blowup_rate(&trace).map(|r| r.beta_fit).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    (beta, start.elapsed())
}

fn blowup_rates() -> Outcome {
    let (b3, t3) = bump_rate(3.0, 5.0);
    let (b2, t2) = bump_rate(2.0, 10.0);
    let limit = Duration::from_secs(60);
    outcome(
        (b3 - 0.5).abs() < 0.05 && (b2 - 1.0).abs() < 0.1 && t3 < limit && t2 < limit,
        format!(
            "p=3: {b3:.4} (target 0.5 ± 0.05, {:.1}s), p=2: {b2:.4} (target 1.0 ± 0.1, {:.1}s)",
            t3.as_secs_f64(),
            t2.as_secs_f64()
        ),
    )
}

/// Energy along a cubic bump blow-up, sampled every `ds` in `s` over four units.
fn blowup_energy(nodes: usize, ds: f64) -> EnergyTrace {
    let field = HomogeneousGradientField::scalar_power(3.0).unwrap();
    let geo = Geometry::line(16.0, Boundary::FarField, Boundary::FarField);
    let cfg = SolverConfig { scheme: DiffusionScheme::TrBdf2, safety: ds, dt_max: ds * 1e-2, ..SolverConfig::default() };
    let data = InitialData::Gaussian { amplitudes: vec![3.0], center: 0.0, width: 1.0 };
    let mut s = solver(geo, nodes, field.clone(), cfg);
    let init = s.state(data.sample(s.grid(), 1).unwrap()).unwrap();
    let probe = s.run_until(init.clone(), &StopRule::sup_norm(1e6), &Cadence::EverySteps(0)).unwrap();
    let t_blow = fit_blowup_rate(&probe).unwrap().t_est;
    let s0 = -t_blow.ln() + 0.5;
    let count = (4.0 / ds).round() as usize;
    let times: Vec<f64> = (0..=count).map(|j| t_blow - (-(s0 + j as f64 * ds)).exp()).collect();
    let mut s = solver(geo, nodes, field.clone(), cfg);
    let tr = s.run_until(init, &StopRule::time(times[count]), &Cadence::Times(times.clone())).unwrap();
    let snaps: Vec<_> = tr.snapshots.into_iter().filter(|x| x.t >= times[0]).collect();
    energy_trace(&snaps, &RescaledFrame::new(t_blow, 0.0, 0.5), &YGrid::default(), &field).unwrap()
}

fn rescaled_energy() -> Outcome {
    let field = HomogeneousGradientField::scalar_power(3.0).unwrap();
    let g = YGrid::default();
    let n = g.points().len();
    let w = RescaledField::from_values(g, 0.0, vec![vec![kappa(0.5); n]]);
    let e_const = weighted_energy(&w, &field, 0.5, TAIL_TOL).unwrap().energy;
    let exact = std::f64::consts::PI.sqrt() / 8.0;
    let a = (e_const - exact).abs() <= 1e-6;

    let tol = 1e-4;
    let coarse = blowup_energy(1601, 0.1);
    let fine = blowup_energy(3201, 0.05);
    let (g0, g1) = (verify_gk2(&coarse, tol), verify_gk2(&fine, tol));
    let b = g0.passed && g1.passed && g0.max_residual >= 2.0 * g1.max_residual;
    let c = check_energy_nonnegative(&coarse, tol) && check_energy_nonnegative(&fine, tol);
    let min_e = coarse.energy().into_iter().chain(fine.energy()).fold(f64::INFINITY, f64::min);
    outcome(
        a && b && c,
        format!(
            "(a) E = {e_const:.12} vs {exact:.12}; (b) max increase {:.1e}/{:.1e}, residual {:.2e} -> {:.2e} (x{:.2}); (c) min E {min_e:.4e} (tol {tol:.0e})",
            g0.max_increase,
            g1.max_increase,
            g0.max_residual,
            g1.max_residual,
            g0.max_residual / g1.max_residual
        ),
    )
}

/// Longest chain `i_0 < … < i_k` with consecutive entries of opposite strict sign.
fn chain_length(v: &[f64]) -> usize {
    let mut best = vec![0usize; v.len()];
    for j in 0..v.len() {
        for i in 0..j {
            if v[i] * v[j] < 0.0 {
                best[j] = best[j].max(best[i] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

fn zero_numbers() -> Outcome {
    let mut exhaustive = 0usize;
    let mut mismatches = 0usize;
    for len in 0..=12u32 {
        for code in 0..3u32.pow(len) {
            let mut c = code;
            let s: Vec<f64> = (0..len)
                .map(|_| {
                    let d = c % 3;
                    c /= 3;
                    d as f64 - 1.0
                })
                .collect();
            exhaustive += 1;
            if zero_number(&s) != chain_length(&s) {
                mismatches += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10_000 {
        let len = rng.gen_range(13..80);
        let v: Vec<f64> =
            (0..len).map(|_| if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
        if zero_number(&v) != chain_length(&v) {
            mismatches += 1;
        }
    }

    let field = HomogeneousGradientField::gradient_coupled(0.0, 0.5).unwrap();
    let geo = Geometry::line(12.0, Boundary::Dirichlet, Boundary::Dirichlet);
    let grid = Arc::new(Grid::new(geo, 241).unwrap());
    let spec = ConeSpec::pair([8, 8, 8, 8]);
    let times: Vec<f64> = (1..=40).map(|j| 0.025 * j as f64).collect();
    let mut passed = 0;
    for seed in 0..50 {
        let data = InitialData::RandomInCone { spec: spec.clone(), seed, amplitude: 1.0, bumps: 4 };
        let mut s = Solver::new(grid.clone(), field.clone(), Perturbation::NONE, SolverConfig::default()).unwrap();
        let init = s.state(data.sample(&grid, 2).unwrap()).unwrap();
        let tr = s.run_until(init, &StopRule::time(1.0).or_sup_norm(1e3), &Cadence::Times(times.clone())).unwrap();
        if zero_number_trace(&tr, &spec).passed() == Some(true) {
            passed += 1;
        }
    }
    outcome(
        mismatches == 0 && passed * 100 >= 95 * 50,
        format!("{exhaustive} exhaustive + 10000 random sequences, {mismatches} mismatches; nonincreasing on {passed}/50 runs"),
    )
}

fn shooting() -> Outcome {
    let cubic = HomogeneousGradientField::scalar_power(3.0).unwrap();
    let opts = ShootOptions::default();
    // five periods of -u'' = u³ from u(0) = 1, period ≈ 7.4163
    let prof = shoot(&cubic, 1, &[1.0], 38.0, ShootMode::Radial, &opts).unwrap();
    let drift = prof.hamiltonian(&cubic).iter().map(|h| (h - 0.25).abs()).fold(0.0, f64::max);

    let grid: Vec<Vec<f64>> = (0..50).map(|i| vec![0.1 + 9.9 * i as f64 / 49.0]).collect();
    let table = scan(&cubic, 3, &grid, 60.0, &ConeSpec::signs(vec![0]), &opts);
    let signless = table
        .rows
        .iter()
        .filter(|r| matches!(r.classification, Classification::DecayCandidate { .. }) && r.zero_numbers.iter().all(|z| *z == 0))
        .count();
    let scan_ok = table.rows.len() == 50 && table.failures.is_empty() && signless == 0;

    let sys = HomogeneousGradientField::quadratic_system(1.0).unwrap();
    let scalar = HomogeneousGradientField::scalar_quadratic();
    let mut sum_err = 0.0f64;
    let mut compared = true;
    for (a, b) in [(0.3, 0.2), (1.0, 0.5), (0.05, 2.0)] {
        let two = shoot(&sys, 3, &[a, b], 30.0, ShootMode::Radial, &opts).unwrap();
        let one = shoot(&scalar, 3, &[a + b], 30.0, ShootMode::Radial, &opts).unwrap();
        let m = one.r.len().min(two.r.len());
        compared &= m > 10;
        for j in 0..m {
            compared &= one.r[j] == two.r[j];
            let w = two.u[0][j] + two.u[1][j];
            sum_err = sum_err.max((w - one.u[0][j]).abs() / (1.0 + w.abs()));
        }
    }
    outcome(
        drift < 1e-8 && scan_ok && compared && sum_err < 1e-8,
        format!(
            "hamiltonian drift {drift:.1e}; scan {} rows, {} failures, {signless} signless decay candidates; sum-reduction err {sum_err:.1e}",
            table.rows.len(),
            table.failures.len()
        ),
    )
}

fn random_field(rng: &mut ChaCha8Rng) -> DiscreteField {
    let n = rng.gen_range(5..120);
    let dim = rng.gen_range(1..=3);
    let points: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect();
    let values =
        (0..n).map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0f64..3.0).exp() - 1.0 }).collect();
    DiscreteField::new(points, values).unwrap()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
    let h = (b - a) / pieces as f64;
    let mut acc = f(a) + f(b);
    for i in 1..pieces {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn machinery() -> Outcome {
    let mut notes = Vec::new();
    let sched = bootstrap_schedule(3, 3.0, 2.0).unwrap();
    let v = verify_schedule(&sched);
    let sched_ok = sched.l == 4 && v.passed && v.min_strict_slack() > 0.0;
    notes.push(format!("schedule(3,3): L = {}, min strict slack {:.2e}", sched.l, v.min_strict_slack()));

    let mut ladders = 0;
    let mut ladder_fail = Vec::new();
    for n in 1..=6u32 {
        for p in [1.5, 2.0, 3.0, 4.0] {
            if !is_subcritical(n, p) {
                continue;
            }
            ladders += 1;
            match ladder(n, p) {
                Ok(l) if l.bottom() < l.mu && verify_ladder(&l).passed => {}
                _ => ladder_fail.push((n, p)),
            }
        }
    }
    notes.push(format!("{ladders} ladders, failed {ladder_fail:?}"));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut doubling_bad = 0;
    let mut checked = 0;
    while checked < 1000 {
        let f = random_field(&mut rng);
        let start = rng.gen_range(0..f.values.len());
        if f.values[start] <= 0.0 {
            continue;
        }
        let k = [1.0, 2.0, 4.0][checked % 3];
        checked += 1;
        let Ok(r) = doubling_select(&f, start, k) else {
            doubling_bad += 1;
            continue;
        };
        let m = f.values[r.index];
        let ball_ok = (0..f.values.len()).all(|j| f.distance(r.index, j) > k / m || f.values[j] <= 2.0 * m);
        if !(m >= f.values[start] && ball_ok) {
            doubling_bad += 1;
        }
    }
    notes.push(format!("doubling {doubling_bad}/1000 bad"));

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut instances, mut selected, mut time_bad) = (0, 0, 0);
    while instances < 1000 {
        let sigma = rng.gen_range(-3.0..3.0);
        let k: f64 = rng.gen_range(2.0f64..1e3);
        let alphas: Vec<f64> = (0..rng.gen_range(1..4)).map(|_| rng.gen_range(0.0..0.9)).collect();
        let bumps: Vec<Vec<(f64, f64, f64)>> = (0..rng.gen_range(1..4))
            .map(|_| {
                (0..rng.gen_range(1..5))
                    .map(|_| (sigma + rng.gen_range(0.0..1.0), rng.gen_range(0.01..0.2), rng.gen_range(0.0..50.0)))
                    .collect()
            })
            .collect();
        let funcs: Vec<Box<dyn Fn(f64) -> f64>> = bumps
            .into_iter()
            .map(|b| {
                Box::new(move |s: f64| 1.0 + b.iter().map(|(c, w, a)| a * (-((s - c) / w).powi(2)).exp()).sum::<f64>())
                    as Box<dyn Fn(f64) -> f64>
            })
            .collect();
        let family: Vec<&dyn Fn(f64) -> f64> = funcs.iter().map(|f| f.as_ref()).collect();
        let input = TimeSelectInput { sigma, alphas, gamma: rng.gen_range(0.0..1.0), eps: 0.05, c1: 2.0, k };
        instances += 1;
        let Ok(sel) = time_select(&family, &input) else { continue };
        selected += 1;
        let mut ok = sel.s_star >= sigma + 0.5 && sel.s_star <= sigma + 1.0;
        for f in &family {
            for ell in 0..input.alphas.len() {
                let w = input.window(ell);
                ok &= simpson(*f, sel.s_star - w, sel.s_star, 40_960) <= input.bound(ell) * (1.0 + 1e-6);
            }
        }
        if !ok {
            time_bad += 1;
        }
    }
    notes.push(format!("time selection {time_bad}/{selected} selected of 1000 bad"));
    outcome(
        sched_ok && ladder_fail.is_empty() && ladders > 0 && doubling_bad == 0 && time_bad == 0 && selected > 0,
        notes.join("; "),
    )
}

fn campaign_sim() -> SimulationConfig {
    SimulationConfig {
        geometry: Geometry::line(20.0, Boundary::FarField, Boundary::FarField),
        nodes: 401,
        initial: InitialData::Flat { values: vec![0.0, 0.0] },
        perturbation: Perturbation::NONE,
        solver: SolverConfig::default(),
        stop: StopRule::time(5.0).or_sup_norm(1e6),
        cadence: Cadence::default(),
    }
}

fn envelope_campaign() -> Outcome {
    let field = HomogeneousGradientField::gradient_coupled(0.0, 0.5).unwrap();
    let sim = campaign_sim();
    let base = CampaignConfig {
        runs: 20,
        family: Family::RandomInCone { amplitude: 5.0, bumps: 3 },
        cone: ConeSpec::pair([4, 4, 4, 4]),
        amplitude_scale: 1.0,
        check_every: 10,
    };
    let scaled = CampaignConfig { amplitude_scale: 10.0, ..base.clone() };
    let (r1, _) = run_campaign(&field, &sim, &base, 1).unwrap();
    let (r10, _) = run_campaign(&field, &sim, &scaled, 1).unwrap();
    let finite = |r: &liouville_lab::harness::EnvelopeReport| r.c_tilde.is_finite() && r.c.is_finite() && r.c > 0.0;
    let ratio = (r10.c / r1.c).max(r1.c / r10.c);
    let used = |r: &liouville_lab::harness::EnvelopeReport| r.runs.len() - r.failures().count() - r.excluded().count();
    outcome(
        finite(&r1) && finite(&r10) && r1.violations == 0 && r10.violations == 0 && ratio < 2.0 && used(&r1) > 0 && used(&r10) > 0,
        format!(
            "x1: C~ = {:.3e}, C = {:.4}, {} violations, {} usable runs; x10: C~ = {:.3e}, C = {:.4}, {} violations, {} usable runs; ratio {ratio:.3}",
            r1.c_tilde,
            r1.c,
            r1.violations,
            used(&r1),
            r10.c_tilde,
            r10.c,
            r10.violations,
            used(&r10)
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("algebraic identities", 5, algebraic_suite),
        ("flat blow-up", 10, flat_blowup),
        ("blow-up rate", 120, blowup_rates),
        ("rescaled energy", 600, rescaled_energy),
        ("zero number", 600, zero_numbers),
        ("shooting", 120, shooting),
        ("machinery certificates", 60, machinery),
        ("envelope campaign", 600, envelope_campaign),
    ];
    let mut all = true;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let o = timed(Duration::from_secs(limit), f);
        all &= o.passed;
        println!("criterion {}: {} {name}: {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
