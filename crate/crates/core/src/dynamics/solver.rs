use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{Grid, Perturbation, SolutionState, SolverError};
use crate::nonlinearity::HomogeneousGradientField;
use crate::numeric::solve_tridiagonal;

/// Time discretisation of the diffusion substep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DiffusionScheme {
    /// First order, L-stable. The step matrix is an M-matrix, so positivity and
    /// the number of sign changes are preserved.
    #[default]
    BackwardEuler,
    /// Second order, L-stable (`γ = 2 - √2`). Not sign-change diminishing.
    TrBdf2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct SolverConfig {
    pub scheme: DiffusionScheme,
    /// Fraction of the reaction time scale `1/(p‖U‖^{p-1})` used per step.
    pub safety: f64,
    pub dt_max: f64,
    /// Sup-norm at which the run is flagged as blowing up.
    pub blowup_sup: f64,
    /// Time step below which the run is flagged as blowing up.
    pub dt_min: f64,
    /// Hard cap on the number of steps in one `run_until` call.
    pub max_steps: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: DiffusionScheme::BackwardEuler,
            safety: 0.1,
            dt_max: 1e-2,
            blowup_sup: 1e6,
            dt_min: 1e-14,
            max_steps: 50_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(SolverError::InvalidConfig("safety must lie in (0, 1]"));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(SolverError::InvalidConfig("dt_max must be positive"));
        }
        if !(self.blowup_sup > 0.0) || !(self.dt_min >= 0.0) {
            return Err(SolverError::InvalidConfig("blow-up thresholds must be positive"));
        }
        Ok(())
    }
}

/// When `run_until` stops. Any combination may be set; the first one met wins.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct StopRule {
    pub time: Option<f64>,
    pub sup_norm: Option<f64>,
    pub steps: Option<u64>,
}

impl StopRule {
    pub fn time(t: f64) -> Self {
        Self { time: Some(t), ..Self::default() }
    }

    pub fn sup_norm(s: f64) -> Self {
        Self { sup_norm: Some(s), ..Self::default() }
    }

    pub fn steps(n: u64) -> Self {
        Self { steps: Some(n), ..Self::default() }
    }

    pub fn or_time(mut self, t: f64) -> Self {
        self.time = Some(t);
        self
    }

    pub fn or_sup_norm(mut self, s: f64) -> Self {
        self.sup_norm = Some(s);
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.time.is_none() && self.sup_norm.is_none() && self.steps.is_none() {
            return Err(SolverError::InvalidConfig("stop rule needs a time, sup-norm or step count"));
        }
        if self.time.is_some_and(|t| !t.is_finite()) || self.sup_norm.is_some_and(|s| !(s > 0.0)) {
            return Err(SolverError::InvalidConfig("stop values must be finite and positive"));
        }
        Ok(())
    }
}

/// Which intermediate states `run_until` keeps. The initial and final states
/// are always kept.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub enum Cadence {
    /// Every `n` steps; `0` keeps only the end points.
    EverySteps(u64),
    /// At these times, which the step size is adjusted to hit exactly.
    Times(Vec<f64>),
}

impl Default for Cadence {
    fn default() -> Self {
        Cadence::EverySteps(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum BlowupFlag {
    SupThreshold,
    DtCollapse,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum StopReason {
    TimeReached,
    SupNormReached,
    StepsReached,
    BlowUp(BlowupFlag),
    StepLimit,
}

impl StopReason {
    pub fn is_blowup(&self) -> bool {
        matches!(self, StopReason::BlowUp(_))
    }
}

/// Sup-norm after every accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HistoryPoint {
    pub t: f64,
    pub sup_norm: f64,
    pub dt: f64,
}

/// Output of [`Solver::run_until`].
#[derive(Debug, Clone)]
pub struct Trace {
    pub grid: Arc<Grid>,
    pub field: HomogeneousGradientField,
    pub perturbation: Perturbation,
    pub scheme: DiffusionScheme,
    pub snapshots: Vec<SolutionState>,
    pub history: Vec<HistoryPoint>,
    pub stop: StopReason,
}

impl Trace {
    pub fn final_state(&self) -> &SolutionState {
        self.snapshots.last().expect("a trace always holds its initial state")
    }

    pub fn initial_state(&self) -> &SolutionState {
        &self.snapshots[0]
    }
}

/// One solver instance: a field, a grid, and reusable work arrays.
#[derive(Debug, Clone)]
pub struct Solver {
    field: HomogeneousGradientField,
    perturbation: Perturbation,
    config: SolverConfig,
    grid: Arc<Grid>,
    lap: (Vec<f64>, Vec<f64>, Vec<f64>),
    pinned: Vec<bool>,
    // work arrays
    mat: (Vec<f64>, Vec<f64>, Vec<f64>),
    rhs: Vec<f64>,
    scratch: Vec<f64>,
    keep: Vec<f64>,
    prev: Vec<Vec<f64>>,
    rk: Vec<f64>,
}

impl Solver {
    pub fn new(
        grid: Arc<Grid>,
        field: HomogeneousGradientField,
        perturbation: Perturbation,
        config: SolverConfig,
    ) -> Result<Self, SolverError> {
        config.validate()?;
        if perturbation.gamma != 0.0 && field.components() != 2 {
            return Err(SolverError::InvalidConfig("the γ coupling needs a two-component field"));
        }
        if !(perturbation.lambda.is_finite() && perturbation.gamma.is_finite()) {
            return Err(SolverError::InvalidConfig("λ and γ must be finite"));
        }
        let m = grid.len();
        let n = field.components();
        let lap = grid.laplacian();
        let pinned = (0..m).map(|i| grid.is_pinned(i)).collect();
        Ok(Self {
            field,
            perturbation,
            config,
            lap,
            pinned,
            mat: (vec![0.0; m], vec![0.0; m], vec![0.0; m]),
            rhs: vec![0.0; m],
            scratch: vec![0.0; m],
            keep: vec![0.0; m],
            prev: vec![vec![0.0; m]; n],
            rk: vec![0.0; 6 * n],
            grid,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn field(&self) -> &HomogeneousGradientField {
        &self.field
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn perturbation(&self) -> Perturbation {
        self.perturbation
    }

    /// Wraps component arrays into a state at `t = 0`, zeroing pinned boundary nodes.
    pub fn state(&self, mut fields: Vec<Vec<f64>>) -> Result<SolutionState, SolverError> {
        if fields.len() != self.field.components() {
            return Err(SolverError::ComponentMismatch {
                expected: self.field.components(),
                got: fields.len(),
            });
        }
        for f in fields.iter_mut() {
            for (v, &p) in f.iter_mut().zip(&self.pinned) {
                if p {
                    *v = 0.0;
                }
            }
        }
        SolutionState::new(self.grid.clone(), fields)
    }

    /// Reaction stiffness `p‖U‖^{p-1} + |λ| + |γ|`.
    fn stiffness(&self, sup: f64) -> f64 {
        let p = self.field.degree();
        let reaction = if sup > 0.0 { p * libm::pow(sup, p - 1.0) } else { 0.0 };
        reaction + self.perturbation.rate()
    }

    /// The adaptive step for the current state.
    pub fn adaptive_dt(&self, state: &SolutionState) -> f64 {
        let k = self.stiffness(state.sup_norm);
        if k > 0.0 {
            self.config.dt_max.min(self.config.safety / k)
        } else {
            self.config.dt_max
        }
    }

    /// Advances one adaptive step and returns the step size used.
    pub fn step(&mut self, state: &mut SolutionState) -> Result<f64, SolverError> {
        let dt = self.adaptive_dt(state);
        self.step_with(state, dt)?;
        Ok(dt)
    }

    /// Advances one step of size `dt`. Fails with `CflViolation` when
    /// `dt (p‖U‖^{p-1} + |λ| + |γ|) > 1`; on `NonFinite` the state is left unchanged.
    pub fn step_with(&mut self, state: &mut SolutionState, dt: f64) -> Result<(), SolverError> {
        if state.components() != self.field.components() {
            return Err(SolverError::ComponentMismatch {
                expected: self.field.components(),
                got: state.components(),
            });
        }
        let k = self.stiffness(state.sup_norm);
        if !(dt > 0.0) || dt * k > 1.0 {
            return Err(SolverError::CflViolation { dt, limit: if k > 0.0 { 1.0 / k } else { f64::INFINITY } });
        }
        for (p, f) in self.prev.iter_mut().zip(&state.fields) {
            p.copy_from_slice(f);
        }
        self.react(&mut state.fields, 0.5 * dt);
        self.diffuse(&mut state.fields, dt);
        self.react(&mut state.fields, 0.5 * dt);
        if !state.is_finite() {
            for (f, p) in state.fields.iter_mut().zip(&self.prev) {
                f.copy_from_slice(p);
            }
            return Err(SolverError::NonFinite { t: state.t + dt });
        }
        state.t += dt;
        state.dt_last = dt;
        state.steps += 1;
        state.refresh_sup();
        Ok(())
    }

    fn react(&mut self, fields: &mut [Vec<f64>], h: f64) {
        let n = fields.len();
        let (u0, rest) = self.rk.split_at_mut(n);
        let (tmp, rest) = rest.split_at_mut(n);
        let (k1, rest) = rest.split_at_mut(n);
        let (k2, rest) = rest.split_at_mut(n);
        let (k3, k4) = rest.split_at_mut(n);
        let field = &self.field;
        let pert = self.perturbation;
        let rhs = |u: &[f64], out: &mut [f64]| {
            field.force_into(u, out);
            pert.add_into(u, out);
        };
        for i in 0..self.pinned.len() {
            if self.pinned[i] {
                continue;
            }
            for c in 0..n {
                u0[c] = fields[c][i];
            }
            rhs(u0, k1);
            for c in 0..n {
                tmp[c] = u0[c] + 0.5 * h * k1[c];
            }
            rhs(tmp, k2);
            for c in 0..n {
                tmp[c] = u0[c] + 0.5 * h * k2[c];
            }
            rhs(tmp, k3);
            for c in 0..n {
                tmp[c] = u0[c] + h * k3[c];
            }
            rhs(tmp, k4);
            for c in 0..n {
                fields[c][i] = u0[c] + h / 6.0 * (k1[c] + 2.0 * (k2[c] + k3[c]) + k4[c]);
            }
        }
    }

    /// Builds `I - θ A` into `self.mat`, with identity rows at pinned nodes.
    fn assemble(&mut self, theta: f64) {
        let (l, d, u) = &self.lap;
        let (ml, md, mu) = &mut self.mat;
        for i in 0..d.len() {
            if self.pinned[i] {
                ml[i] = 0.0;
                md[i] = 1.0;
                mu[i] = 0.0;
            } else {
                ml[i] = -theta * l[i];
                md[i] = 1.0 - theta * d[i];
                mu[i] = -theta * u[i];
            }
        }
    }

    /// `out = v + θ A v`.
    fn explicit(&self, v: &[f64], theta: f64, out: &mut [f64]) {
        let (l, d, u) = &self.lap;
        let m = v.len();
        for i in 0..m {
            let mut av = d[i] * v[i];
            if i > 0 {
                av += l[i] * v[i - 1];
            }
            if i + 1 < m {
                av += u[i] * v[i + 1];
            }
            out[i] = v[i] + theta * av;
        }
    }

    fn solve_into(&mut self, target: &mut [f64]) {
        for (v, &p) in self.rhs.iter_mut().zip(&self.pinned) {
            if p {
                *v = 0.0;
            }
        }
        let (l, d, u) = &self.mat;
        solve_tridiagonal(l, d, u, &mut self.rhs, &mut self.scratch);
        target.copy_from_slice(&self.rhs);
    }

    fn diffuse(&mut self, fields: &mut [Vec<f64>], dt: f64) {
        match self.config.scheme {
            DiffusionScheme::BackwardEuler => {
                self.assemble(dt);
                for f in fields.iter_mut() {
                    self.rhs.copy_from_slice(f);
                    self.solve_into(f);
                }
            }
            DiffusionScheme::TrBdf2 => {
                let g = 2.0 - core::f64::consts::SQRT_2;
                let w = (1.0 - g) / (2.0 - g);
                let a = 1.0 / (g * (2.0 - g));
                let b = (1.0 - g) * (1.0 - g) / (g * (2.0 - g));
                for f in fields.iter_mut() {
                    // trapezoid stage to t + g dt
                    self.assemble(0.5 * g * dt);
                    self.keep.copy_from_slice(f);
                    let mut rhs = core::mem::take(&mut self.rhs);
                    self.explicit(f, 0.5 * g * dt, &mut rhs);
                    self.rhs = rhs;
                    self.solve_into(f);
                    // BDF2 stage to t + dt
                    self.assemble(w * dt);
                    for ((r, s), u) in self.rhs.iter_mut().zip(f.iter()).zip(&self.keep) {
                        *r = a * s - b * u;
                    }
                    self.solve_into(f);
                }
            }
        }
    }

    /// Steps from `initial` until `stop` is met or the run blows up.
    ///
    /// Blow-up (sup-norm above `blowup_sup`, `dt < dt_min`, or a non-finite
    /// step) ends the run normally with `StopReason::BlowUp`.
    pub fn run_until(
        &mut self,
        initial: SolutionState,
        stop: &StopRule,
        cadence: &Cadence,
    ) -> Result<Trace, SolverError> {
        stop.validate()?;
        if initial.components() != self.field.components() {
            return Err(SolverError::ComponentMismatch {
                expected: self.field.components(),
                got: initial.components(),
            });
        }
        let times: &[f64] = match cadence {
            Cadence::Times(ts) => {
                if ts.windows(2).any(|w| !(w[0] < w[1])) || ts.iter().any(|t| !t.is_finite()) {
                    return Err(SolverError::InvalidConfig("snapshot times must be finite and increasing"));
                }
                ts
            }
            Cadence::EverySteps(_) => &[],
        };
        let every = match cadence {
            Cadence::EverySteps(n) => *n,
            Cadence::Times(_) => 0,
        };

        let mut state = initial;
        let start_steps = state.steps;
        let mut next = times.partition_point(|&t| t <= state.t);
        let mut snapshots = vec![state.clone()];
        let mut history =
            vec![HistoryPoint { t: state.t, sup_norm: state.sup_norm, dt: state.dt_last }];

        let reason = loop {
            let taken = state.steps - start_steps;
            if stop.steps.is_some_and(|n| taken >= n) {
                break StopReason::StepsReached;
            }
            if stop.time.is_some_and(|t| state.t >= t) {
                break StopReason::TimeReached;
            }
            if stop.sup_norm.is_some_and(|s| state.sup_norm >= s) {
                break StopReason::SupNormReached;
            }
            if state.sup_norm > self.config.blowup_sup {
                break StopReason::BlowUp(BlowupFlag::SupThreshold);
            }
            if taken >= self.config.max_steps {
                break StopReason::StepLimit;
            }
            let mut dt = self.adaptive_dt(&state);
            if dt < self.config.dt_min {
                break StopReason::BlowUp(BlowupFlag::DtCollapse);
            }
            let mut target = stop.time.unwrap_or(f64::INFINITY);
            if next < times.len() {
                target = target.min(times[next]);
            }
            let landing = state.t + dt >= target;
            if landing {
                dt = target - state.t;
            }
            match self.step_with(&mut state, dt) {
                Ok(()) => {}
                Err(SolverError::NonFinite { .. }) => break StopReason::BlowUp(BlowupFlag::NonFinite),
                Err(e) => return Err(e),
            }
            if landing {
                state.t = target;
            }
            history.push(HistoryPoint { t: state.t, sup_norm: state.sup_norm, dt });
            let mut keep = every > 0 && (state.steps - start_steps) % every == 0;
            while next < times.len() && times[next] <= state.t {
                keep = true;
                next += 1;
            }
            if keep {
                snapshots.push(state.clone());
            }
        };
        if snapshots.last().map(|s| s.steps) != Some(state.steps) {
            snapshots.push(state);
        }
        Ok(Trace {
            grid: self.grid.clone(),
            field: self.field.clone(),
            perturbation: self.perturbation,
            scheme: self.config.scheme,
            snapshots,
            history,
            stop: reason,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Boundary, Geometry};
    use crate::nonlinearity::CustomField;

    fn zero_field() -> HomogeneousGradientField {
        HomogeneousGradientField::custom(
            1,
            3.0,
            CustomField {
                name: "zero".into(),
                potential: Arc::new(|_: &[f64]| 0.0),
                force: Arc::new(|_: &[f64], out: &mut [f64]| out.fill(0.0)),
                hyperplane_margin: 0.0,
            },
        )
        .unwrap()
    }

    fn heat_decay(scheme: DiffusionScheme, dt: f64) -> f64 {
        let length = 2.0;
        let grid = Arc::new(Grid::new(Geometry::line(length, Boundary::Dirichlet, Boundary::Dirichlet), 401).unwrap());
        let u0 = grid.x.iter().map(|x| libm::sin(core::f64::consts::PI * (x + 0.5 * length) / length)).collect();
        let config = SolverConfig { scheme, dt_max: dt, ..SolverConfig::default() };
        let mut solver = Solver::new(grid, zero_field(), Perturbation::NONE, config).unwrap();
        let state = solver.state(vec![u0]).unwrap();
        let t_end = length * length;
        let trace = solver.run_until(state, &StopRule::time(t_end), &Cadence::default()).unwrap();
        assert_eq!(trace.stop, StopReason::TimeReached);
        assert_eq!(trace.final_state().t, t_end);
        let k = core::f64::consts::PI / length;
        trace.final_state().sup_norm / libm::exp(-k * k * t_end) - 1.0
    }

    #[test]
    fn dirichlet_eigenmode_decays_at_the_heat_rate() {
        assert!(heat_decay(DiffusionScheme::BackwardEuler, 1e-4).abs() < 0.01);
        assert!(heat_decay(DiffusionScheme::TrBdf2, 1e-2).abs() < 0.01);
    }

    #[test]
    fn trbdf2_is_second_order_in_time() {
        let e1 = heat_decay(DiffusionScheme::TrBdf2, 0.2).abs();
        let e2 = heat_decay(DiffusionScheme::TrBdf2, 0.1).abs();
        assert!(e1 / e2 > 3.0, "{e1} {e2}");
    }

    #[test]
    fn zero_data_stays_zero() {
        let grid = Arc::new(Grid::new(Geometry::radial_ball(3, 5.0, Boundary::Dirichlet), 64).unwrap());
        let field = HomogeneousGradientField::gradient_coupled(0.0, 1.0).unwrap();
        let mut solver = Solver::new(grid.clone(), field, Perturbation::new(0.5, 0.2), SolverConfig::default()).unwrap();
        let state = solver.state(vec![vec![0.0; 64]; 2]).unwrap();
        let trace = solver.run_until(state, &StopRule::steps(200), &Cadence::EverySteps(50)).unwrap();
        assert_eq!(trace.snapshots.len(), 5);
        assert!(trace.snapshots.iter().all(|s| s.fields.iter().flatten().all(|&v| v == 0.0)));
    }

    #[test]
    fn zero_steps_returns_the_initial_state_only() {
        let grid = Arc::new(Grid::new(Geometry::line(1.0, Boundary::Neumann, Boundary::Neumann), 8).unwrap());
        let mut solver = Solver::new(grid, HomogeneousGradientField::scalar_power(3.0).unwrap(), Perturbation::NONE, SolverConfig::default()).unwrap();
        let state = solver.state(vec![vec![1.0; 8]]).unwrap();
        let trace = solver.run_until(state, &StopRule::steps(0), &Cadence::EverySteps(1)).unwrap();
        assert_eq!(trace.snapshots.len(), 1);
        assert_eq!(trace.stop, StopReason::StepsReached);
    }

    #[test]
    fn snapshot_times_are_hit_exactly() {
        let grid = Arc::new(Grid::new(Geometry::line(4.0, Boundary::Dirichlet, Boundary::Dirichlet), 41).unwrap());
        let mut solver = Solver::new(grid.clone(), HomogeneousGradientField::scalar_power(2.0).unwrap(), Perturbation::NONE, SolverConfig { dt_max: 0.03, ..SolverConfig::default() }).unwrap();
        let u0 = grid.x.iter().map(|x| libm::exp(-x * x)).collect();
        let state = solver.state(vec![u0]).unwrap();
        let times = vec![0.1, 0.25, 0.5];
        let trace = solver.run_until(state, &StopRule::time(0.5), &Cadence::Times(times.clone())).unwrap();
        let got: Vec<f64> = trace.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(got, [0.0, 0.1, 0.25, 0.5]);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let grid = Arc::new(Grid::new(Geometry::line(1.0, Boundary::Neumann, Boundary::Neumann), 8).unwrap());
        let mut solver = Solver::new(grid, HomogeneousGradientField::scalar_power(3.0).unwrap(), Perturbation::NONE, SolverConfig::default()).unwrap();
        let mut state = solver.state(vec![vec![10.0; 8]]).unwrap();
        assert!(matches!(solver.step_with(&mut state, 0.1), Err(SolverError::CflViolation { .. })));
        assert_eq!(state.t, 0.0);
    }

    #[test]
    fn gamma_needs_two_components() {
        let grid = Arc::new(Grid::new(Geometry::line(1.0, Boundary::Neumann, Boundary::Neumann), 8).unwrap());
        let field = HomogeneousGradientField::scalar_power(3.0).unwrap();
        assert!(Solver::new(grid, field, Perturbation::new(0.0, 1.0), SolverConfig::default()).is_err());
    }
}
