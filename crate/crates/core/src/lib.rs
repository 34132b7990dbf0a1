//! Numerical core for scaling-invariant parabolic systems `U_t - ΔU = F(U)`
//! with `F = ∇G` homogeneous of degree `p > 1`.
//!
//! The crate is `no_std` (it needs `alloc` only) and performs no IO. It covers
//!
//! - [`nonlinearity`]: homogeneous gradient fields and algebraic self-checks,
//! - [`dynamics`]: a method-of-lines solver on intervals, half-lines and radial
//!   balls, with blow-up detection and rate fitting,
//! - [`selfsimilar`]: self-similar variables and the Gaussian-weighted energy,
//! - [`zeronumber`]: sign-change counting and invariant cone checks,
//! - [`stationary`]: radial shooting for stationary problems,
//! - [`machinery`]: doubling selection, time selection, bootstrap schedules and
//!   covering counts.
//!
//! File formats, configuration, campaigns and the command line live in the
//! `liouville-lab` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod dynamics;
pub mod machinery;
pub mod nonlinearity;
pub mod numeric;
pub mod selfsimilar;
pub mod stationary;
pub mod zeronumber;

pub use dynamics::{
    fit_blowup_rate, BlowupReport, Boundary, Cadence, DiffusionScheme, Geometry, GeometryKind,
    Grid, InitialData, Perturbation, SolutionState, Solver, SolverConfig, StopReason, StopRule,
    Trace,
};
pub use nonlinearity::{FieldKind, HomogeneousGradientField, VectorValue};
pub use zeronumber::{zero_number, ConeSpec, ZeroCap};

/// Sobolev critical exponent `(n+2)/(n-2)` for `n >= 3`, infinite otherwise.
pub fn sobolev_exponent(dim: u32) -> f64 {
    if dim <= 2 {
        f64::INFINITY
    } else {
        (dim as f64 + 2.0) / (dim as f64 - 2.0)
    }
}

/// `true` when `1 < p < p_S(n)`.
pub fn is_subcritical(dim: u32, p: f64) -> bool {
    p > 1.0 && p < sobolev_exponent(dim)
}
