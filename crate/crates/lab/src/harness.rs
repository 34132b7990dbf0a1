//! Simulation campaigns and the envelope `‖U(t)‖_∞ <= C̃ + C (t^{-β} + (T-t)^{-β})`.

use std::sync::Arc;

use liouville_core::dynamics::{
    fit_blowup_rate, Cadence, Grid, HistoryPoint, InitialData, SolutionState, Solver, StopReason, Trace,
};
use liouville_core::numeric::golden_section;
use liouville_core::zeronumber::{cone_membership, random_in_cone};
use liouville_core::HomogeneousGradientField;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{CampaignConfig, Family, SimulationConfig};
use crate::error::{LabError, Result};

/// Sign tolerance of the per-snapshot cone test.
pub const CONE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    /// Blew up; `T` is the fitted blow-up time.
    Blowup,
    /// Reached the stop time; `T = ∞`.
    Global,
    /// Left the cone at some snapshot; excluded from the fit.
    LeftCone,
    Failed,
}

/// One run of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: String,
    pub seed: u64,
    pub status: RunStatus,
    /// Fitted blow-up time, `None` for `T = ∞`.
    pub t_blowup: Option<f64>,
    pub beta_fit: Option<f64>,
    pub samples: usize,
    pub final_time: f64,
    pub final_sup: f64,
    /// Failure or exclusion reason.
    pub note: Option<String>,
}

/// A run with its per-step history.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub history: Vec<HistoryPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub runs: Vec<RunRecord>,
    pub beta: f64,
    pub c_tilde: f64,
    pub c: f64,
    /// Whether `C̃ = 0` was imposed (`λ = γ = 0` on a whole-space geometry).
    pub c_tilde_forced: bool,
    pub violations: usize,
    pub samples: usize,
}

impl EnvelopeReport {
    pub fn failures(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(|r| r.status == RunStatus::Failed)
    }

    pub fn excluded(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(|r| r.status == RunStatus::LeftCone)
    }
}

/// `t^{-β} + (T-t)^{-β}`, the second term dropped for `T = ∞`.
pub fn envelope_weight(t: f64, t_blowup: Option<f64>, beta: f64) -> f64 {
    let near = t_blowup.map_or(0.0, |tb| (tb - t).powf(-beta));
    t.powf(-beta) + near
}

/// Sample `(S, w)` pairs of a run, skipping `t = 0` and times at or past `T`.
fn samples(outcome: &RunOutcome, beta: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    let tb = outcome.record.t_blowup;
    outcome
        .history
        .iter()
        .filter(move |h| h.t > 0.0 && tb.map_or(true, |tb| h.t < tb))
        .map(move |h| (h.sup_norm, envelope_weight(h.t, tb, beta)))
}

/// Fits `(C̃, C)`. For a given `C̃` the slope is `C(C̃) = max_i (S_i - C̃)⁺ / w_i`;
/// `C̃ ∈ [0, max S]` minimizes the mean ratio `(C̃ + C(C̃) w_i) / S_i`, which
/// is convex in `C̃`. With `force_zero`, `C̃ = 0`.
pub fn fit_envelope(points: &[(f64, f64)], force_zero: bool) -> (f64, f64) {
    let c_of = |ct: f64| points.iter().map(|(s, w)| (s - ct).max(0.0) / w).fold(0.0, f64::max);
    let positive: Vec<(f64, f64)> = points.iter().copied().filter(|(s, _)| *s > 0.0).collect();
    if force_zero || positive.is_empty() {
        return (0.0, c_of(0.0));
    }
    let s_max = positive.iter().map(|p| p.0).fold(0.0, f64::max);
    let objective = |ct: f64| {
        let c = c_of(ct);
        positive.iter().map(|(s, w)| (ct + c * w) / s).sum::<f64>() / positive.len() as f64
    };
    let ct = golden_section(objective, 0.0, s_max, 200);
    let ct = [0.0, s_max].into_iter().fold(ct, |best, x| if objective(x) < objective(best) { x } else { best });
    (ct, c_of(ct))
}

fn worker_count() -> Option<usize> {
    std::env::var("LIOUVILLE_LAB_THREADS").ok()?.parse().ok().filter(|n| *n > 0)
}

/// Runs `f` on the lab's worker pool (capped by `LIOUVILLE_LAB_THREADS`).
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count() {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn initial_profiles(
    grid: &Grid,
    field: &HomogeneousGradientField,
    campaign: &CampaignConfig,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let n = field.components();
    let mut fields = match &campaign.family {
        Family::RandomInCone { amplitude, bumps } => random_in_cone(grid, n, &campaign.cone, seed, *amplitude, *bumps)
            .ok_or_else(|| LabError::Numerical(format!("no cone member found for seed {seed}")))?,
        Family::Fixed { data } => data.sample(grid, n)?,
    };
    for f in fields.iter_mut() {
        for v in f.iter_mut() {
            *v *= campaign.amplitude_scale;
        }
    }
    Ok(fields)
}

/// Runs one member of a campaign; errors become `Failed` records.
pub fn run_member(
    field: &HomogeneousGradientField,
    sim: &SimulationConfig,
    campaign: &CampaignConfig,
    index: usize,
    seed: u64,
) -> RunOutcome {
    let id = format!("run-{index:04}");
    let result = (|| -> Result<(Trace, bool)> {
        let grid = Arc::new(Grid::new(sim.geometry, sim.nodes)?);
        let profiles = initial_profiles(&grid, field, campaign, seed)?;
        let mut solver = Solver::new(grid, field.clone(), sim.perturbation, sim.solver)?;
        let init = solver.state(profiles)?;
        let trace = solver.run_until(init, &sim.stop, &Cadence::EverySteps(campaign.check_every))?;
        let in_cone = trace.snapshots.iter().all(|s| cone_membership(s, &campaign.cone, CONE_TOL).in_cone);
        Ok((trace, in_cone))
    })();
    let blank = |status, note: String| RunRecord {
        id: id.clone(),
        seed,
        status,
        t_blowup: None,
        beta_fit: None,
        samples: 0,
        final_time: 0.0,
        final_sup: 0.0,
        note: Some(note),
    };
    match result {
        Err(e) => RunOutcome { record: blank(RunStatus::Failed, e.to_string()), history: Vec::new() },
        Ok((trace, in_cone)) => {
            let last: &SolutionState = trace.final_state();
            let (status, t_blowup, beta_fit, note) = if !in_cone {
                (RunStatus::LeftCone, None, None, Some("left the cone".to_string()))
            } else if matches!(trace.stop, StopReason::TimeReached) {
                (RunStatus::Global, None, None, None)
            } else if matches!(trace.stop, StopReason::SupNormReached | StopReason::BlowUp(_)) {
                match fit_blowup_rate(&trace) {
                    Ok(r) => (RunStatus::Blowup, Some(r.t_est), Some(r.beta_fit), None),
                    Err(e) => (RunStatus::Failed, None, None, Some(format!("rate fit: {e}"))),
                }
            } else {
                (RunStatus::Failed, None, None, Some(format!("stopped by {:?}", trace.stop)))
            };
            let record = RunRecord {
                id: id.clone(),
                seed,
                status,
                t_blowup,
                beta_fit,
                samples: trace.history.len(),
                final_time: last.t,
                final_sup: last.sup_norm,
                note,
            };
            RunOutcome { record, history: trace.history }
        }
    }
}

/// Runs every member in parallel and fits the envelope to the runs that
/// stayed in the cone and ended cleanly.
pub fn run_campaign(
    field: &HomogeneousGradientField,
    sim: &SimulationConfig,
    campaign: &CampaignConfig,
    seed: u64,
) -> Result<(EnvelopeReport, Vec<RunOutcome>)> {
    if campaign.runs == 0 {
        return Err(LabError::EmptyCampaign);
    }
    if let Err(m) = campaign.cone.validate(field.components()) {
        return Err(LabError::Config(format!("cone: {m}")));
    }
    if !(campaign.amplitude_scale.is_finite() && campaign.amplitude_scale > 0.0) {
        return Err(LabError::Config("amplitude_scale must be positive".into()));
    }
    sim.stop.validate()?;
    if let InitialData::RandomInCone { .. } = sim.initial {
        return Err(LabError::Config("campaign data comes from [campaign.family]".into()));
    }
    let outcomes: Vec<RunOutcome> = with_pool(|| {
        (0..campaign.runs)
            .into_par_iter()
            .map(|i| run_member(field, sim, campaign, i, seed.wrapping_add(i as u64)))
            .collect()
    });
    Ok((envelope_from(field.beta(), sim, &outcomes), outcomes))
}

/// Fits the envelope over the usable runs of a finished campaign.
pub fn envelope_from(beta: f64, sim: &SimulationConfig, outcomes: &[RunOutcome]) -> EnvelopeReport {
    let usable = |o: &&RunOutcome| matches!(o.record.status, RunStatus::Blowup | RunStatus::Global);
    let points: Vec<(f64, f64)> = outcomes.iter().filter(usable).flat_map(|o| samples(o, beta)).collect();
    let forced = sim.perturbation.is_zero() && sim.geometry.is_whole_space();
    let (c_tilde, c) = fit_envelope(&points, forced);
    let violations = points.iter().filter(|(s, w)| *s > (c_tilde + c * w) * (1.0 + 1e-12)).count();
    EnvelopeReport {
        runs: outcomes.iter().map(|o| o.record.clone()).collect(),
        beta,
        c_tilde,
        c,
        c_tilde_forced: forced,
        violations,
        samples: points.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_fit_is_the_largest_ratio() {
        let pts = [(1.0, 2.0), (3.0, 2.0), (4.0, 8.0)];
        assert_eq!(fit_envelope(&pts, true), (0.0, 1.5));
    }

    #[test]
    fn free_fit_dominates_every_sample() {
        let pts: Vec<(f64, f64)> = (1..50).map(|i| (5.0 + (i as f64).sqrt(), 1.0 + i as f64)).collect();
        // a flat plateau: an offset is cheaper than a slope
        let flat: Vec<(f64, f64)> = (1..50).map(|i| (3.0, 1.0 + i as f64)).chain([(9.0, 1.0)]).collect();
        let (ct_flat, _) = fit_envelope(&flat, false);
        assert!(ct_flat > 2.0, "{ct_flat}");
        let (ct, c) = fit_envelope(&pts, false);
        assert!(ct >= 0.0);
        assert!(pts.iter().all(|(s, w)| *s <= (ct + c * w) * (1.0 + 1e-12)));
        let obj = |t: f64| {
            let c = pts.iter().map(|(s, w)| (s - t).max(0.0) / w).fold(0.0, f64::max);
            pts.iter().map(|(s, w)| (t + c * w) / s).sum::<f64>() / pts.len() as f64
        };
        let best = (0..=1200).map(|i| obj(i as f64 * 0.01)).fold(f64::INFINITY, f64::min);
        assert!(obj(ct) <= best + 1e-9);
    }

    #[test]
    fn weight_drops_the_blowup_term_for_global_runs() {
        assert_eq!(envelope_weight(4.0, None, 0.5), 0.5);
        assert_eq!(envelope_weight(1.0, Some(2.0), 1.0), 2.0);
    }
}
