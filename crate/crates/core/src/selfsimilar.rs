//! Self-similar variables `W(y, s) = (k-t)^β U(y√(k-t) + a, t)`, `s = -log(k-t)`,
//! and the Gaussian-weighted energy
//!
//! `E(s) = ½∫(|∇W|² + β|W|²)ρ dy - ∫G(W)ρ dy`,  `ρ(y) = e^{-|y|²/4}`.
//!
//! Along exact solutions `dE/ds = -∫|W_s|²ρ` and
//! `½ d/ds ∫|W|²ρ = -(p+1)E + ((p-1)/2)∫(|∇W|² + β|W|²)ρ`; the `verify_*`
//! functions measure how well sampled traces satisfy these identities.

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::{SolutionState, Trace};
use crate::nonlinearity::HomogeneousGradientField;
use crate::numeric::{gaussian_tail_mass, gradient, integrate_linear, interp_cubic, lagrange_derivative, linspace, sphere_area};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelfSimilarError {
    #[error("y-grid maps to x = {x}, outside the computational domain")]
    OutOfDomain { x: f64 },
    #[error("time {t} is not before the anchor k = {k}")]
    TimeBeyondAnchor { t: f64, k: f64 },
    #[error("Gaussian tail bound {tail:.3e} exceeds the tolerance {tol:.3e}")]
    TruncationTooSmall { tail: f64, tol: f64 },
    #[error("at least three samples are needed")]
    TooFewSamples,
    #[error("invalid frame: {0}")]
    InvalidFrame(&'static str),
}

/// Anchor `(k, a)` and exponent `β` of the rescaling.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct RescaledFrame {
    pub k: f64,
    pub a: f64,
    pub beta: f64,
}

impl RescaledFrame {
    pub fn new(k: f64, a: f64, beta: f64) -> Self {
        Self { k, a, beta }
    }

    /// Anchored at the final argmax of `|U|` and the given blow-up time.
    pub fn at_blowup(trace: &Trace, t_blowup: f64) -> Self {
        let last = trace.final_state();
        let a = if trace.grid.is_radial() { 0.0 } else { trace.grid.x[last.argmax()] };
        Self { k: t_blowup, a, beta: trace.field.beta() }
    }

    pub fn s_of_t(&self, t: f64) -> f64 {
        -libm::log(self.k - t)
    }

    pub fn t_of_s(&self, s: f64) -> f64 {
        self.k - libm::exp(-s)
    }

    /// `s_k = -log k`.
    pub fn s_anchor(&self) -> f64 {
        -libm::log(self.k)
    }
}

/// Sampling of the rescaled variable `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub enum YGrid {
    /// `y ∈ [-R, R]`.
    Line { radius: f64, nodes: usize },
    /// `|y| ∈ [0, R]` in `R^dim`.
    Radial { dim: u32, radius: f64, nodes: usize },
}

impl Default for YGrid {
    fn default() -> Self {
        YGrid::Line { radius: DEFAULT_RADIUS, nodes: 961 }
    }
}

/// Default truncation radius; `ρ(12) = e^{-36}`.
pub const DEFAULT_RADIUS: f64 = 12.0;

impl YGrid {
    pub fn points(&self) -> Vec<f64> {
        match *self {
            YGrid::Line { radius, nodes } => linspace(-radius, radius, nodes),
            YGrid::Radial { radius, nodes, .. } => linspace(0.0, radius, nodes),
        }
    }

    pub fn dim(&self) -> u32 {
        match *self {
            YGrid::Line { .. } => 1,
            YGrid::Radial { dim, .. } => dim,
        }
    }

    pub fn radius(&self) -> f64 {
        match *self {
            YGrid::Line { radius, .. } | YGrid::Radial { radius, .. } => radius,
        }
    }

    /// Trapezoid weights for `∫ f ρ dy` (including the sphere area for radial grids).
    pub fn weights(&self) -> Vec<f64> {
        let y = self.points();
        let n = y.len();
        let h = if n > 1 { y[1] - y[0] } else { 0.0 };
        let (dim, radial) = match *self {
            YGrid::Line { .. } => (1, false),
            YGrid::Radial { dim, .. } => (dim, true),
        };
        y.iter()
            .enumerate()
            .map(|(i, &v)| {
                let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
                let rho = libm::exp(-v * v / 4.0);
                if radial {
                    w * rho * sphere_area(dim) * libm::pow(v, dim as f64 - 1.0)
                } else {
                    w * rho
                }
            })
            .collect()
    }

    /// `∫_{|y|>R} ρ dy`.
    pub fn tail_mass(&self) -> f64 {
        gaussian_tail_mass(self.dim(), self.radius())
    }
}

/// `W(·, s)` and `∇W(·, s)` (the radial derivative for radial grids) on a y-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledField {
    pub grid: YGrid,
    pub s: f64,
    pub y: Vec<f64>,
    pub w: Vec<Vec<f64>>,
    pub grad: Vec<Vec<f64>>,
}

impl RescaledField {
    /// Builds a field from nodal values, differentiating numerically.
    pub fn from_values(grid: YGrid, s: f64, w: Vec<Vec<f64>>) -> Self {
        let y = grid.points();
        let grad = w.iter().map(|c| gradient(&y, c)).collect();
        Self { grid, s, y, w, grad }
    }

    pub fn sup(&self) -> f64 {
        (0..self.y.len()).map(|i| libm::sqrt(self.w.iter().map(|c| c[i] * c[i]).sum())).fold(0.0, f64::max)
    }

    pub fn sup_grad(&self) -> f64 {
        (0..self.y.len()).map(|i| libm::sqrt(self.grad.iter().map(|c| c[i] * c[i]).sum())).fold(0.0, f64::max)
    }
}

/// Transforms a state into self-similar variables by cubic interpolation of
/// `U` and of its centred-difference gradient.
pub fn to_selfsimilar(
    state: &SolutionState,
    frame: &RescaledFrame,
    ygrid: &YGrid,
) -> Result<RescaledField, SelfSimilarError> {
    let tau = frame.k - state.t;
    if !(tau > 0.0) {
        return Err(SelfSimilarError::TimeBeyondAnchor { t: state.t, k: frame.k });
    }
    let grid = &state.grid;
    match (ygrid, grid.is_radial()) {
        (YGrid::Line { .. }, false) => {}
        (YGrid::Radial { dim, .. }, true) if Some(*dim) == grid.geometry.radial_dim() => {
            if frame.a != 0.0 {
                return Err(SelfSimilarError::InvalidFrame("radial frames are centred at the origin"));
            }
        }
        _ => return Err(SelfSimilarError::InvalidFrame("y-grid does not match the geometry")),
    }
    let x = &grid.x;
    let (x_lo, x_hi) = (x[0], x[x.len() - 1]);
    let root = libm::sqrt(tau);
    let y = ygrid.points();
    let slack = 1e-12 * (x_hi - x_lo);
    for &yy in [y[0], y[y.len() - 1]].iter() {
        let xx = frame.a + yy * root;
        if xx < x_lo - slack || xx > x_hi + slack {
            return Err(SelfSimilarError::OutOfDomain { x: xx });
        }
    }
    let amp = libm::pow(tau, frame.beta);
    let amp_grad = amp * root;
    let mut w = Vec::with_capacity(state.components());
    let mut grad = Vec::with_capacity(state.components());
    for f in &state.fields {
        let ux = gradient(x, f);
        w.push(y.iter().map(|&yy| amp * interp_cubic(x, f, frame.a + yy * root)).collect());
        grad.push(y.iter().map(|&yy| amp_grad * interp_cubic(x, &ux, frame.a + yy * root)).collect());
    }
    Ok(RescaledField { grid: *ygrid, s: frame.s_of_t(state.t), y, w, grad })
}

/// Inverse map: `U(x, t) = (k-t)^{-β} W((x-a)/√(k-t), s)` at the given points.
/// Points mapping outside the y-grid get `None`.
pub fn to_physical(field: &RescaledField, frame: &RescaledFrame, x: &[f64]) -> Vec<Vec<Option<f64>>> {
    let tau = libm::exp(-field.s);
    let root = libm::sqrt(tau);
    let amp = libm::pow(tau, -frame.beta);
    let (lo, hi) = (field.y[0], field.y[field.y.len() - 1]);
    field
        .w
        .iter()
        .map(|c| {
            x.iter()
                .map(|&xx| {
                    let yy = (xx - frame.a) / root;
                    (yy >= lo && yy <= hi).then(|| amp * interp_cubic(&field.y, c, yy))
                })
                .collect()
        })
        .collect()
}

/// Parts of the weighted energy of one rescaled field.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EnergyParts {
    pub energy: f64,
    /// `½∫|W|²ρ`.
    pub mass: f64,
    /// `∫(|∇W|² + β|W|²)ρ`.
    pub gradient_term: f64,
    /// `sup|energy density| · ∫_{|y|>R} ρ`.
    pub tail_bound: f64,
}

/// Default bound on the neglected Gaussian tail.
pub const TAIL_TOL: f64 = 1e-8;

/// Weighted energy by the trapezoid rule on the y-grid.
pub fn weighted_energy(
    field_w: &RescaledField,
    field: &HomogeneousGradientField,
    beta: f64,
    tail_tol: f64,
) -> Result<EnergyParts, SelfSimilarError> {
    let weights = field_w.grid.weights();
    let n = field_w.w.len();
    let mut u = vec![0.0; n];
    let (mut energy, mut mass, mut gradient_term) = (0.0, 0.0, 0.0);
    let mut sup_density = 0.0f64;
    for (i, wt) in weights.iter().enumerate() {
        let mut w2 = 0.0;
        let mut g2 = 0.0;
        for c in 0..n {
            u[c] = field_w.w[c][i];
            w2 += u[c] * u[c];
            g2 += field_w.grad[c][i] * field_w.grad[c][i];
        }
        let g = field.potential(&u);
        let density = 0.5 * (g2 + beta * w2) - g;
        sup_density = sup_density.max(density.abs()).max(0.5 * w2).max(g2 + beta * w2);
        energy += wt * density;
        mass += wt * 0.5 * w2;
        gradient_term += wt * (g2 + beta * w2);
    }
    let tail_bound = sup_density * field_w.grid.tail_mass();
    if tail_bound > tail_tol {
        return Err(SelfSimilarError::TruncationTooSmall { tail: tail_bound, tol: tail_tol });
    }
    Ok(EnergyParts { energy, mass, gradient_term, tail_bound })
}

/// One sample of an [`EnergyTrace`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EnergySample {
    pub s: f64,
    pub t: f64,
    pub energy: f64,
    /// `D(s) = ∫|W_s|²ρ`.
    pub dissipation: f64,
    pub mass: f64,
    pub gradient_term: f64,
    pub sup_w: f64,
    pub sup_grad_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EnergyTrace {
    pub frame: RescaledFrame,
    pub degree: f64,
    pub samples: Vec<EnergySample>,
    pub max_tail_bound: f64,
}

impl EnergyTrace {
    pub fn s(&self) -> Vec<f64> {
        self.samples.iter().map(|x| x.s).collect()
    }

    pub fn energy(&self) -> Vec<f64> {
        self.samples.iter().map(|x| x.energy).collect()
    }
}

fn three_point(s: &[f64], v: &[f64], j: usize) -> f64 {
    let n = s.len();
    let (start, at) = if j == 0 {
        (0, 0)
    } else if j == n - 1 {
        (n - 3, 2)
    } else {
        (j - 1, 1)
    };
    lagrange_derivative([s[start], s[start + 1], s[start + 2]], [v[start], v[start + 1], v[start + 2]], at)
}

/// Transforms each snapshot (times strictly increasing, all before `k`) and
/// evaluates the energy parts; `W_s` comes from three-point differences in `s`
/// at fixed `y`.
pub fn energy_trace(
    snapshots: &[SolutionState],
    frame: &RescaledFrame,
    ygrid: &YGrid,
    field: &HomogeneousGradientField,
) -> Result<EnergyTrace, SelfSimilarError> {
    if snapshots.len() < 3 {
        return Err(SelfSimilarError::TooFewSamples);
    }
    if snapshots.windows(2).any(|w| !(w[0].t < w[1].t)) {
        return Err(SelfSimilarError::InvalidFrame("snapshot times must increase"));
    }
    let fields: Vec<RescaledField> =
        snapshots.iter().map(|st| to_selfsimilar(st, frame, ygrid)).collect::<Result<_, _>>()?;
    let s: Vec<f64> = fields.iter().map(|f| f.s).collect();
    let weights = ygrid.weights();
    let comps = fields[0].w.len();
    let mut samples = Vec::with_capacity(fields.len());
    let mut max_tail = 0.0f64;
    let mut column = vec![0.0; fields.len()];
    for (j, wf) in fields.iter().enumerate() {
        let parts = weighted_energy(wf, field, frame.beta, TAIL_TOL)?;
        max_tail = max_tail.max(parts.tail_bound);
        let (start, _) = if j == 0 { (0, 0) } else if j == fields.len() - 1 { (fields.len() - 3, 0) } else { (j - 1, 0) };
        let mut dissipation = 0.0;
        for (i, wt) in weights.iter().enumerate() {
            let mut ws2 = 0.0;
            for c in 0..comps {
                for q in start..start + 3 {
                    column[q] = fields[q].w[c][i];
                }
                let d = three_point(&s, &column, j);
                ws2 += d * d;
            }
            dissipation += wt * ws2;
        }
        samples.push(EnergySample {
            s: wf.s,
            t: snapshots[j].t,
            energy: parts.energy,
            dissipation,
            mass: parts.mass,
            gradient_term: parts.gradient_term,
            sup_w: wf.sup(),
            sup_grad_w: wf.sup_grad(),
        });
    }
    Ok(EnergyTrace { frame: *frame, degree: field.degree(), samples, max_tail_bound: max_tail })
}

/// Residuals of one energy identity along a trace.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IdentityResiduals {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Indices `j` with `E(s_{j+1}) > E(s_j) + tol`.
    pub increases: Vec<usize>,
    pub max_increase: f64,
    pub passed: bool,
}

/// `dE/ds + D(s)` at every sample, plus monotonicity of `E`.
pub fn verify_gk2(trace: &EnergyTrace, tol: f64) -> IdentityResiduals {
    let s = trace.s();
    let e = trace.energy();
    let residuals: Vec<f64> = if s.len() < 3 {
        Vec::new()
    } else {
        (0..s.len()).map(|j| (three_point(&s, &e, j) + trace.samples[j].dissipation).abs()).collect()
    };
    let max_residual = residuals.iter().fold(0.0f64, |m, r| m.max(*r));
    let mut increases = Vec::new();
    let mut max_increase = 0.0f64;
    for j in 0..e.len().saturating_sub(1) {
        let inc = e[j + 1] - e[j];
        max_increase = max_increase.max(inc);
        if inc > tol {
            increases.push(j);
        }
    }
    let passed = s.len() >= 3 && max_residual <= tol && increases.is_empty();
    IdentityResiduals { residuals, max_residual, increases, max_increase, passed }
}

/// `d/ds(½∫|W|²ρ) + (p+1)E - ((p-1)/2)∫(|∇W|² + β|W|²)ρ` at every sample.
pub fn verify_gk1(trace: &EnergyTrace, tol: f64) -> IdentityResiduals {
    let p = trace.degree;
    let s = trace.s();
    let mass: Vec<f64> = trace.samples.iter().map(|x| x.mass).collect();
    let residuals: Vec<f64> = if s.len() < 3 {
        Vec::new()
    } else {
        (0..s.len())
            .map(|j| {
                let x = &trace.samples[j];
                (three_point(&s, &mass, j) + (p + 1.0) * x.energy - 0.5 * (p - 1.0) * x.gradient_term).abs()
            })
            .collect()
    };
    let max_residual = residuals.iter().fold(0.0f64, |m, r| m.max(*r));
    let passed = s.len() >= 3 && max_residual <= tol;
    IdentityResiduals { residuals, max_residual, increases: Vec::new(), max_increase: 0.0, passed }
}

/// `min_s E(s) >= -tol`.
pub fn check_energy_nonnegative(trace: &EnergyTrace, tol: f64) -> bool {
    trace.samples.iter().all(|x| x.energy >= -tol)
}

/// The three inequalities of the energy estimate chain at anchor `σ`:
/// `∫_σ^{σ+1} D ≤ E(σ) ≤ ∫_{σ-1}^σ E ≤ ∫|W(σ-1)|²ρ/(2(p+1)) + (p-1)/(2(p+1)) ∫_{σ-1}^σ ∫(|∇W|²+β|W|²)ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChainReport {
    pub anchor: f64,
    pub dissipation_integral: f64,
    pub energy_at_anchor: f64,
    pub energy_integral: f64,
    pub upper_bound: f64,
    pub holds: [bool; 3],
}

/// Evaluates the chain with linear interpolation in `s`; the trace must cover
/// `[anchor - 1, anchor + 1]`.
pub fn estimate_chain(trace: &EnergyTrace, anchor: f64, tol: f64) -> Option<ChainReport> {
    let s = trace.s();
    let (first, last) = (*s.first()?, *s.last()?);
    if anchor - 1.0 < first - 1e-12 || anchor + 1.0 > last + 1e-12 {
        return None;
    }
    let p = trace.degree;
    let col = |f: fn(&EnergySample) -> f64| -> Vec<f64> { trace.samples.iter().map(f).collect() };
    let d = col(|x| x.dissipation);
    let e = col(|x| x.energy);
    let m = col(|x| x.mass);
    let g = col(|x| x.gradient_term);
    let lo = (anchor - 1.0).max(first);
    let hi = (anchor + 1.0).min(last);
    let dissipation_integral = integrate_linear(&s, &d, anchor, hi);
    let energy_at_anchor = crate::numeric::interp_linear(&s, &e, anchor);
    let energy_integral = integrate_linear(&s, &e, lo, anchor);
    let upper_bound = crate::numeric::interp_linear(&s, &m, lo) / (p + 1.0)
        + (p - 1.0) / (2.0 * (p + 1.0)) * integrate_linear(&s, &g, lo, anchor);
    Some(ChainReport {
        anchor,
        dissipation_integral,
        energy_at_anchor,
        energy_integral,
        upper_bound,
        holds: [
            dissipation_integral <= energy_at_anchor + tol,
            energy_at_anchor <= energy_integral + tol,
            energy_integral <= upper_bound + tol,
        ],
    })
}

/// `C₀ = e^{(M+1)(β+1/2)}` from the a priori bound on rescaled solutions.
pub fn c0_constant(m: u32, beta: f64) -> f64 {
    libm::exp((m as f64 + 1.0) * (beta + 0.5))
}

/// `κ = β^β`, the constant self-similar profile.
pub fn kappa(beta: f64) -> f64 {
    libm::pow(beta, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Boundary, Geometry, Grid};
    use alloc::sync::Arc;

    fn constant_field(value: f64) -> RescaledField {
        let g = YGrid::default();
        let n = g.points().len();
        RescaledField::from_values(g, 0.0, vec![vec![value; n]])
    }

    #[test]
    fn energy_of_the_constant_profile() {
        let f = HomogeneousGradientField::scalar_power(3.0).unwrap();
        let e = weighted_energy(&constant_field(kappa(0.5)), &f, 0.5, TAIL_TOL).unwrap();
        let exact = libm::sqrt(core::f64::consts::PI) / 8.0;
        assert!((e.energy - exact).abs() < 1e-10, "{}", e.energy);
        assert!(e.tail_bound < 1e-15);
    }

    #[test]
    fn zero_profile_has_zero_energy() {
        let f = HomogeneousGradientField::scalar_power(3.0).unwrap();
        let e = weighted_energy(&constant_field(0.0), &f, 0.5, TAIL_TOL).unwrap();
        assert_eq!(e.energy, 0.0);
    }

    #[test]
    fn short_truncation_is_rejected() {
        let f = HomogeneousGradientField::scalar_power(3.0).unwrap();
        let g = YGrid::Line { radius: 3.0, nodes: 101 };
        let w = RescaledField::from_values(g, 0.0, vec![vec![1.0; 101]]);
        assert!(matches!(weighted_energy(&w, &f, 0.5, TAIL_TOL), Err(SelfSimilarError::TruncationTooSmall { .. })));
    }

    #[test]
    fn radial_gaussian_mass_is_exact() {
        // ½∫ρ dy over R^3 = ½(4π)^{3/2}
        let g = YGrid::Radial { dim: 3, radius: 12.0, nodes: 2001 };
        let n = g.points().len();
        let w = RescaledField::from_values(g, 0.0, vec![vec![1.0; n]]);
        let f = HomogeneousGradientField::scalar_power(3.0).unwrap();
        let e = weighted_energy(&w, &f, 0.5, TAIL_TOL).unwrap();
        let exact = 0.5 * libm::pow(4.0 * core::f64::consts::PI, 1.5);
        assert!((e.mass - exact).abs() < 1e-8 * exact);
    }

    fn flat_state(grid: &Arc<Grid>, t: f64, k: f64) -> SolutionState {
        // u(t) = ((p-1)(k-t))^{-1/2} for p = 3
        let u = 1.0 / libm::sqrt(2.0 * (k - t));
        let mut s = SolutionState::new(grid.clone(), vec![vec![u; grid.len()]]).unwrap();
        s.t = t;
        s
    }

    #[test]
    fn exact_flat_solution_is_the_constant_profile() {
        let grid = Arc::new(Grid::new(Geometry::line(40.0, Boundary::Neumann, Boundary::Neumann), 201).unwrap());
        let frame = RescaledFrame::new(1.0, 0.0, 0.5);
        let f = HomogeneousGradientField::scalar_power(3.0).unwrap();
        let snaps: Vec<SolutionState> = [0.0, 0.3, 0.6, 0.9].iter().map(|&t| flat_state(&grid, t, 1.0)).collect();
        let trace = energy_trace(&snaps, &frame, &YGrid::default(), &f).unwrap();
        for x in &trace.samples {
            assert!((x.sup_w - libm::sqrt(0.5)).abs() < 1e-12);
            assert!(x.dissipation < 1e-20);
        }
        assert!(verify_gk2(&trace, 1e-10).passed);
        assert!(verify_gk1(&trace, 1e-10).passed);
        assert!(check_energy_nonnegative(&trace, 0.0));
    }

    #[test]
    fn out_of_domain_is_reported() {
        let grid = Arc::new(Grid::new(Geometry::line(4.0, Boundary::Neumann, Boundary::Neumann), 41).unwrap());
        let frame = RescaledFrame::new(1.0, 0.0, 0.5);
        let state = flat_state(&grid, 0.0, 1.0);
        assert!(matches!(to_selfsimilar(&state, &frame, &YGrid::default()), Err(SelfSimilarError::OutOfDomain { .. })));
        let late = flat_state(&grid, 0.99, 1.0);
        assert!(to_selfsimilar(&late, &frame, &YGrid::default()).is_ok());
        let after = flat_state(&grid, 1.0, 1.0);
        assert!(matches!(to_selfsimilar(&after, &frame, &YGrid::default()), Err(SelfSimilarError::TimeBeyondAnchor { .. })));
    }

    #[test]
    fn increasing_energy_is_flagged() {
        let mk = |s: f64, e: f64| EnergySample { s, t: 0.0, energy: e, dissipation: 0.0, mass: 0.0, gradient_term: 0.0, sup_w: 0.0, sup_grad_w: 0.0 };
        let trace = EnergyTrace {
            frame: RescaledFrame::new(1.0, 0.0, 0.5),
            degree: 3.0,
            samples: vec![mk(0.0, 1.0), mk(0.1, 1.1), mk(0.2, 1.2), mk(0.3, 1.3)],
            max_tail_bound: 0.0,
        };
        let r = verify_gk2(&trace, 1e-6);
        assert!(!r.passed);
        assert_eq!(r.increases, [0, 1, 2]);
    }

    #[test]
    fn transform_then_invert_round_trips() {
        let grid = Arc::new(Grid::new(Geometry::line(20.0, Boundary::FarField, Boundary::FarField), 801).unwrap());
        let u: Vec<f64> = grid.x.iter().map(|x| libm::exp(-(x - 0.5) * (x - 0.5))).collect();
        let mut state = SolutionState::new(grid.clone(), vec![u.clone()]).unwrap();
        state.t = 0.5;
        let frame = RescaledFrame::new(0.75, 0.3, 0.5);
        let w = to_selfsimilar(&state, &frame, &YGrid::Line { radius: 12.0, nodes: 2401 }).unwrap();
        let back = to_physical(&w, &frame, &grid.x);
        let mut worst = 0.0f64;
        for (i, b) in back[0].iter().enumerate() {
            if let Some(v) = b {
                worst = worst.max((v - u[i]).abs());
            }
        }
        assert!(worst < 1e-5, "{worst}");
    }
}
