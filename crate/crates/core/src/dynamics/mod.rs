//! Method-of-lines solver for `U_t = ΔU + F(U) + F̃(U)` on lines, half-lines and
//! radial domains.
//!
//! Each step is a Strang splitting: a pointwise RK4 reaction half step, an
//! implicit diffusion step, and a second reaction half step. The time step
//! follows the reaction stiffness, `dt = min(dt_max, safety / (p‖U‖^{p-1}))`.

mod geometry;
mod initial;
mod rate;
mod solver;

use alloc::sync::Arc;
use alloc::vec::Vec;

pub use geometry::{Boundary, Geometry, GeometryKind, Grid};
pub use initial::{eigenmode, eigenvalue, InitialData};
pub use rate::{fit_blowup_rate, BlowupReport, RateError};
pub use solver::{
    BlowupFlag, Cadence, DiffusionScheme, HistoryPoint, Solver, SolverConfig, StopReason,
    StopRule, Trace,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("initial data has {got} components, the field has {expected}")]
    ComponentMismatch { expected: usize, got: usize },
    #[error("initial data has {got} nodes, the grid has {expected}")]
    NodeMismatch { expected: usize, got: usize },
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("time step {dt} exceeds the stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("unsupported initial data: {0}")]
    UnsupportedInitialData(&'static str),
}

/// Linear coupling `F̃(u, v) = (-λu - γv, -λv - γu)`. Scalar runs use `-λu`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct Perturbation {
    pub lambda: f64,
    pub gamma: f64,
}

impl Perturbation {
    pub const NONE: Self = Self { lambda: 0.0, gamma: 0.0 };

    pub fn new(lambda: f64, gamma: f64) -> Self {
        Self { lambda, gamma }
    }

    pub fn is_zero(&self) -> bool {
        self.lambda == 0.0 && self.gamma == 0.0
    }

    /// Adds `F̃(u)` to `out`.
    #[inline]
    pub fn add_into(&self, u: &[f64], out: &mut [f64]) {
        if self.lambda != 0.0 {
            for (o, x) in out.iter_mut().zip(u) {
                *o -= self.lambda * x;
            }
        }
        if self.gamma != 0.0 && u.len() == 2 {
            out[0] -= self.gamma * u[1];
            out[1] -= self.gamma * u[0];
        }
    }

    /// Bound on the Lipschitz constant of `F̃`.
    pub fn rate(&self) -> f64 {
        self.lambda.abs() + self.gamma.abs()
    }
}

/// Fields `U(·, t)` on a grid.
#[derive(Debug, Clone)]
pub struct SolutionState {
    pub grid: Arc<Grid>,
    pub t: f64,
    /// One array per component, each of grid length.
    pub fields: Vec<Vec<f64>>,
    pub dt_last: f64,
    pub sup_norm: f64,
    pub steps: u64,
}

impl SolutionState {
    pub fn new(grid: Arc<Grid>, fields: Vec<Vec<f64>>) -> Result<Self, SolverError> {
        if fields.is_empty() {
            return Err(SolverError::ComponentMismatch { expected: 1, got: 0 });
        }
        for f in &fields {
            if f.len() != grid.len() {
                return Err(SolverError::NodeMismatch { expected: grid.len(), got: f.len() });
            }
        }
        let mut state = Self { grid, t: 0.0, fields, dt_last: 0.0, sup_norm: 0.0, steps: 0 };
        state.refresh_sup();
        Ok(state)
    }

    pub fn components(&self) -> usize {
        self.fields.len()
    }

    /// Euclidean norm of `U(x_i)`.
    pub fn magnitude_at(&self, i: usize) -> f64 {
        libm::sqrt(self.fields.iter().map(|f| f[i] * f[i]).sum())
    }

    /// Index of the node where `|U|` is largest (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for i in 0..self.grid.len() {
            let m = self.magnitude_at(i);
            if m > best.1 {
                best = (i, m);
            }
        }
        best.0
    }

    pub fn refresh_sup(&mut self) {
        self.sup_norm = (0..self.grid.len()).map(|i| self.magnitude_at(i)).fold(0.0, f64::max);
    }

    pub fn is_finite(&self) -> bool {
        self.fields.iter().all(|f| f.iter().all(|v| v.is_finite()))
    }
}
