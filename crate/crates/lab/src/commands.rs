//! The work behind each CLI subcommand. Each function writes its files under
//! `out` and returns the text printed to stdout.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use liouville_core::dynamics::{
    fit_blowup_rate, Cadence, Grid, InitialData, SolutionState, Solver, StopReason, StopRule, Trace,
};
use liouville_core::machinery::{bootstrap_schedule, ladder, MachineryError};
use liouville_core::nonlinearity::{check_identities, IdentityCheck};
use liouville_core::selfsimilar::{
    check_energy_nonnegative, energy_trace, verify_gk1, verify_gk2, EnergyTrace, RescaledFrame,
};
use liouville_core::stationary::{shoot, EvidenceTable, ShootMode};
use liouville_core::zeronumber::zero_number_trace;
use liouville_core::{is_subcritical, HomogeneousGradientField};
use rayon::prelude::*;
use serde::Serialize;

use crate::certificate::{verify_ladder, Certificate};
use crate::config::{missing, RescaleConfig, RunConfig, ShootConfig, SimulationConfig};
use crate::error::{LabError, Result};
use crate::harness::{run_campaign, with_pool};
use crate::output::{num, write_csv, write_history, write_json};

fn seeded(sim: &SimulationConfig, seed: Option<u64>) -> InitialData {
    match (&sim.initial, seed) {
        (InitialData::RandomInCone { spec, amplitude, bumps, .. }, Some(seed)) => {
            InitialData::RandomInCone { spec: spec.clone(), seed, amplitude: *amplitude, bumps: *bumps }
        }
        (data, _) => data.clone(),
    }
}

fn setup(field: &HomogeneousGradientField, sim: &SimulationConfig, seed: Option<u64>) -> Result<(Solver, SolutionState)> {
    let grid = Arc::new(Grid::new(sim.geometry, sim.nodes)?);
    let solver = Solver::new(grid.clone(), field.clone(), sim.perturbation, sim.solver)?;
    let data = seeded(sim, seed).sample(&grid, field.components())?;
    let init = solver.state(data)?;
    Ok((solver, init))
}

/// Runs the configured simulation.
pub fn simulate_trace(field: &HomogeneousGradientField, sim: &SimulationConfig, seed: Option<u64>) -> Result<Trace> {
    let (mut solver, init) = setup(field, sim, seed)?;
    Ok(solver.run_until(init, &sim.stop, &sim.cadence)?)
}

#[derive(Debug, Serialize)]
struct SimulationSummary {
    stop: String,
    steps: u64,
    final_time: f64,
    final_sup: f64,
    snapshots: usize,
    blowup: Option<liouville_core::dynamics::BlowupReport>,
    blowup_fit_error: Option<String>,
}

fn write_snapshots(path: &Path, trace: &Trace) -> Result<()> {
    let comps = trace.field.components();
    let mut header = vec!["t".to_string(), "x".to_string()];
    header.extend((0..comps).map(|c| format!("u{c}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::new();
    for s in &trace.snapshots {
        for (i, x) in s.grid.x.iter().enumerate() {
            let mut row = vec![num(s.t), num(*x)];
            row.extend(s.fields.iter().map(|f| num(f[i])));
            rows.push(row);
        }
    }
    write_csv(path, &header, &rows)
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<String> {
    let field = cfg.nonlinearity()?;
    let sim = cfg.simulation()?;
    let trace = simulate_trace(&field, sim, cfg.seed)?;
    write_history(&out.join("trace.csv"), &trace.history)?;
    write_snapshots(&out.join("snapshots.csv"), &trace)?;
    let last = trace.final_state();
    let (blowup, blowup_fit_error) = if trace.stop.is_blowup() || trace.stop == StopReason::SupNormReached {
        match fit_blowup_rate(&trace) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    let summary = SimulationSummary {
        stop: format!("{:?}", trace.stop),
        steps: last.steps,
        final_time: last.t,
        final_sup: last.sup_norm,
        snapshots: trace.snapshots.len(),
        blowup,
        blowup_fit_error,
    };
    write_json(&out.join("summary.json"), &summary)?;
    let mut s = format!("stop: {}\nsteps: {}\nt: {}\nsup: {}\n", summary.stop, summary.steps, num(last.t), num(last.sup_norm));
    if let Some(b) = summary.blowup {
        let _ = writeln!(s, "T: {}\nrate: {:.6}", num(b.t_est), b.beta_fit);
    }
    Ok(s)
}

/// Blow-up trajectory sampled on a uniform `s`-grid and its energy trace.
pub fn rescaled_energy(
    field: &HomogeneousGradientField,
    sim: &SimulationConfig,
    rescale: &RescaleConfig,
    seed: Option<u64>,
) -> Result<EnergyTrace> {
    if !(rescale.ds > 0.0 && rescale.span >= 2.0 * rescale.ds) {
        return Err(LabError::Config("rescale needs ds > 0 and span >= 2 ds".into()));
    }
    let (mut solver, init) = setup(field, sim, seed)?;
    let probe_stop = StopRule { time: sim.stop.time, sup_norm: Some(sim.stop.sup_norm.unwrap_or(1e6)), steps: None };
    let probe = solver.run_until(init.clone(), &probe_stop, &Cadence::EverySteps(0))?;
    if probe.stop == StopReason::TimeReached {
        return Err(LabError::Numerical("no blow-up before the stop time".into()));
    }
    let t_blow = fit_blowup_rate(&probe)?.t_est;
    let center = rescale.center.unwrap_or_else(|| {
        let last = probe.final_state();
        if last.grid.is_radial() {
            0.0
        } else {
            last.grid.x[last.argmax()]
        }
    });
    let s0 = -t_blow.ln() + rescale.offset;
    let count = (rescale.span / rescale.ds).round() as usize;
    let times: Vec<f64> = (0..=count).map(|j| t_blow - (-(s0 + j as f64 * rescale.ds)).exp()).collect();
    if times[0] <= 0.0 {
        return Err(LabError::Config("rescale offset puts the first sample before t = 0".into()));
    }
    let trace = solver.run_until(init, &StopRule::time(times[count]), &Cadence::Times(times.clone()))?;
    let snaps: Vec<SolutionState> = trace.snapshots.into_iter().filter(|s| s.t >= times[0]).collect();
    let frame = RescaledFrame::new(t_blow, center, field.beta());
    Ok(energy_trace(&snaps, &frame, &rescale.y_grid, field)?)
}

#[derive(Debug, Serialize)]
struct RescaleSummary {
    t_blowup: f64,
    center: f64,
    samples: usize,
    gk2_max_residual: f64,
    gk1_max_residual: f64,
    max_energy_increase: f64,
    energy_nonnegative: bool,
    max_tail_bound: f64,
    passed: bool,
}

pub fn rescale(cfg: &RunConfig, out: &Path) -> Result<String> {
    let field = cfg.nonlinearity()?;
    let sim = cfg.simulation()?;
    let rc = cfg.rescale.clone().unwrap_or_default();
    let tr = rescaled_energy(&field, sim, &rc, cfg.seed)?;
    let gk2 = verify_gk2(&tr, rc.energy_tol);
    let gk1 = verify_gk1(&tr, rc.energy_tol);
    let rows: Vec<Vec<String>> = tr
        .samples
        .iter()
        .enumerate()
        .map(|(j, x)| {
            vec![
                num(x.s),
                num(x.t),
                num(x.energy),
                num(x.dissipation),
                num(x.mass),
                num(x.gradient_term),
                num(gk2.residuals.get(j).copied().unwrap_or(f64::NAN)),
                num(gk1.residuals.get(j).copied().unwrap_or(f64::NAN)),
            ]
        })
        .collect();
    write_csv(
        &out.join("energy.csv"),
        &["s", "t", "energy", "dissipation", "mass", "gradient_term", "gk2_residual", "gk1_residual"],
        &rows,
    )?;
    let nonneg = check_energy_nonnegative(&tr, rc.energy_tol);
    let summary = RescaleSummary {
        t_blowup: tr.frame.k,
        center: tr.frame.a,
        samples: tr.samples.len(),
        gk2_max_residual: gk2.max_residual,
        gk1_max_residual: gk1.max_residual,
        max_energy_increase: gk2.max_increase,
        energy_nonnegative: nonneg,
        max_tail_bound: tr.max_tail_bound,
        passed: gk2.passed && nonneg,
    };
    write_json(&out.join("energy.json"), &summary)?;
    let text = format!(
        "T: {}\nsamples: {}\nE: {} -> {}\ndE/ds + D residual: {:.3e}\nmass identity residual: {:.3e}\nmax increase: {:.3e}\nnonnegative: {}\n",
        num(summary.t_blowup),
        summary.samples,
        num(tr.samples[0].energy),
        num(tr.samples[tr.samples.len() - 1].energy),
        summary.gk2_max_residual,
        summary.gk1_max_residual,
        summary.max_energy_increase,
        nonneg
    );
    if !summary.passed {
        return Err(LabError::Numerical(format!("energy checks failed\n{text}")));
    }
    Ok(text)
}

pub fn zeros(cfg: &RunConfig, out: &Path) -> Result<String> {
    let field = cfg.nonlinearity()?;
    let sim = cfg.simulation()?;
    let spec = &cfg.zeros.as_ref().ok_or_else(|| missing("zeros"))?.cone;
    spec.validate(field.components()).map_err(|m| LabError::Config(format!("cone: {m}")))?;
    let trace = simulate_trace(&field, sim, cfg.seed)?;
    let z = zero_number_trace(&trace, spec);
    let mut header = vec!["t".to_string()];
    header.extend(z.labels.iter().cloned());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = z
        .times
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let mut row = vec![num(*t)];
            row.extend(z.values.iter().map(|v| v[j].to_string()));
            row
        })
        .collect();
    write_csv(&out.join("zeros.csv"), &header, &rows)?;
    write_json(&out.join("zeros.json"), &z)?;
    let verdict = match z.passed() {
        Some(true) => "nonincreasing",
        Some(false) => "INCREASED",
        None => "not asserted",
    };
    let mut s = format!("snapshots: {}\nverdict: {verdict}\n", z.times.len());
    for (l, v) in z.labels.iter().zip(&z.values) {
        let _ = writeln!(s, "z({l}): {} -> {}", v.first().copied().unwrap_or(0), v.last().copied().unwrap_or(0));
    }
    if z.passed() == Some(false) {
        return Err(LabError::Numerical(format!("zero number increased\n{s}")));
    }
    Ok(s)
}

/// Shoots every starting value in parallel; rows keep the grid order.
pub fn parallel_scan(field: &HomogeneousGradientField, shot: &ShootConfig) -> Result<EvidenceTable> {
    let grid = shot.grid()?;
    if grid.iter().any(|xi| xi.len() != field.components()) {
        return Err(LabError::Config(format!("every ξ needs {} components", field.components())));
    }
    shot.cone.validate(field.components()).map_err(|m| LabError::Config(format!("cone: {m}")))?;
    let outcomes = with_pool(|| {
        grid.par_iter()
            .map(|xi| (xi.clone(), shoot(field, shot.dim, xi, shot.r_max, shot.mode, &shot.options)))
            .collect()
    });
    Ok(EvidenceTable::from_outcomes(outcomes, &shot.cone))
}

pub fn shoot_scan(cfg: &RunConfig, out: &Path) -> Result<String> {
    let field = cfg.nonlinearity()?;
    let shot = cfg.shoot.as_ref().ok_or_else(|| missing("shoot"))?;
    if shot.mode == ShootMode::HalfLineSlope && shot.dim != 1 {
        return Err(LabError::Config("half-line shots need dim = 1".into()));
    }
    let table = parallel_scan(&field, shot)?;
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let class = match &r.classification {
                liouville_core::stationary::Classification::Constant => "constant".to_string(),
                liouville_core::stationary::Classification::Unbounded { r_escape } => format!("unbounded@{}", num(*r_escape)),
                liouville_core::stationary::Classification::DecayCandidate { residual } => {
                    format!("decay-candidate({})", num(*residual))
                }
                liouville_core::stationary::Classification::SignChanges { .. } => "sign-changes".to_string(),
            };
            vec![
                r.xi.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" "),
                class,
                r.zero_numbers.iter().map(|z| z.to_string()).collect::<Vec<_>>().join(" "),
                r.in_cone.to_string(),
                r.cone_decaying.to_string(),
            ]
        })
        .collect();
    write_csv(&out.join("evidence.csv"), &["xi", "class", "zero_numbers", "in_cone", "cone_decaying"], &rows)?;
    write_json(&out.join("evidence.json"), &table)?;
    let decaying = table.rows.iter().filter(|r| r.cone_decaying).count();
    Ok(format!(
        "profiles: {}\nfailures: {}\ndecaying cone members: {decaying}\n",
        table.rows.len(),
        table.failures.len()
    ))
}

pub fn nl_check(field: &HomogeneousGradientField, samples: usize, seed: u64, out: &Path) -> Result<String> {
    let check = IdentityCheck { samples, seed, ..IdentityCheck::default() };
    let report = check_identities(field, &check);
    write_json(&out.join("nl-check.json"), &report)?;
    let text = format!(
        "field: {} (N = {}, p = {})\nsamples: {}\neuler identity max residual: {:.3e}\nhomogeneity max residual: {:.3e}\ngradient max residual: {:.3e} ({} samples)\npassed: {}\n",
        field.name(),
        field.components(),
        field.degree(),
        report.samples,
        report.euler,
        report.homogeneity,
        report.gradient,
        report.gradient_samples,
        report.passed
    );
    if !report.passed {
        return Err(LabError::Numerical(format!("identity check failed\n{text}")));
    }
    Ok(text)
}

fn machinery_error(n: u32, p: f64, e: MachineryError) -> LabError {
    if is_subcritical(n, p) {
        LabError::Numerical(e.to_string())
    } else {
        LabError::Config(e.to_string())
    }
}

pub fn schedule(n: u32, p: f64, out: &Path) -> Result<String> {
    let top = (p + 1.0) / (p - 1.0);
    let sched = bootstrap_schedule(n, p, top).map_err(|e| machinery_error(n, p, e))?;
    let lad = ladder(n, p).map_err(|e| machinery_error(n, p, e))?;
    let cert = Certificate::new(sched);
    let lad_check = verify_ladder(&lad);
    write_json(&out.join("certificate.json"), &cert)?;
    write_json(&out.join("ladder.json"), &serde_json::json!({ "ladder": lad, "verification": lad_check }))?;
    let s = &cert.schedule;
    let mut t = String::new();
    let _ = writeln!(t, "n = {n}, p = {p}");
    let _ = writeln!(t, "β = {}, μ = {}", s.beta, s.mu);
    let _ = writeln!(t, "L = {}", s.l);
    let _ = writeln!(t, "γ = {}, δ = {}, ε = {}", s.gamma, s.delta, s.eps);
    let _ = writeln!(t, "\n{:>3} {:>14} {:>14} {:>14}", "ℓ", "ξ", "α", "ω");
    for l in 0..s.l {
        let _ = writeln!(t, "{:>3} {:>14.8} {:>14.8} {:>14.8}", l + 1, s.xi[l], s.alpha[l], s.omega[l]);
    }
    let _ = writeln!(t, "\n{:<48} {:>12} exact", "inequality", "slack");
    for c in &cert.exact.checks {
        let _ = writeln!(t, "{:<48} {:>12.4e} {}", c.label, c.slack, if c.holds { "ok" } else { "FAIL" });
    }
    let _ = writeln!(t, "\nladder: M = {}, γ_1 = {:.6} < μ = {:.6}, min gain = {:.6}", lad.m(), lad.bottom(), lad.mu, lad.min_gain);
    let _ = writeln!(t, "certificate verified: {}", cert.exact.passed && lad_check.passed);
    if !(cert.exact.passed && lad_check.passed) {
        return Err(LabError::Numerical(format!("certificate rejected by the exact verifier\n{t}")));
    }
    Ok(t)
}

pub fn bounds(cfg: &RunConfig, out: &Path) -> Result<String> {
    let field = cfg.nonlinearity()?;
    let sim = cfg.simulation()?;
    let campaign = cfg.campaign.as_ref().ok_or_else(|| missing("campaign"))?;
    let (report, outcomes) = run_campaign(&field, sim, campaign, cfg.seed.unwrap_or(0))?;
    crate::output::write_campaign(out, &report, &outcomes)?;
    Ok(format!(
        "runs: {} ({} failed, {} excluded)\nC~ = {}\nC = {}\nviolations: {}\n",
        report.runs.len(),
        report.failures().count(),
        report.excluded().count(),
        num(report.c_tilde),
        num(report.c),
        report.violations
    ))
}

pub fn report(out: &Path) -> Result<String> {
    let r = crate::output::regenerate(out)?;
    Ok(format!("regenerated report for {} runs in {}\n", r.runs.len(), out.display()))
}
