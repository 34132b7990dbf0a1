//! Shooting for radial stationary solutions `U'' + ((n-1)/r)U' + F(U) = 0`.
//!
//! Profiles start from `U(0) = ξ, U'(0) = 0` (radial) or `U(0) = 0, U'(0) = ξ`
//! (half-line) and are integrated with an adaptive Dormand–Prince 5(4) pair.
//! The classification is evidence, not proof: a "decay candidate" is a profile
//! that is small at `r_max`.

use alloc::vec;
use alloc::vec::Vec;

use crate::nonlinearity::HomogeneousGradientField;
use crate::numeric::norm;
use crate::zeronumber::{cone_check, zero_number, ConeSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum ShootError {
    #[error("step size collapsed at r = {r}")]
    StepFailure { r: f64 },
    #[error("initial vector has {got} components, the field has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid shooting parameter: {0}")]
    InvalidParameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ShootMode {
    /// `U(0) = ξ`, `U'(0) = 0` in `R^n`.
    #[default]
    Radial,
    /// `U(0) = 0`, `U'(0) = ξ` on the half-line (`n` is taken as 1).
    HalfLineSlope,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct ShootOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Spacing of the recorded profile; steps are shortened to land on it.
    pub dr_out: f64,
    /// End of the series start for radial shots.
    pub r_start: f64,
    /// `|U| > escape_factor (1 + |ξ|)` counts as escape to infinity.
    pub escape_factor: f64,
    /// `|U(r_max)| + |U'(r_max)| <= decay_tol |ξ|` marks a decay candidate.
    pub decay_tol: f64,
    pub max_steps: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            dr_out: 0.05,
            r_start: 1e-4,
            escape_factor: 1e6,
            decay_tol: 1e-6,
            max_steps: 20_000_000,
        }
    }
}

/// Default outer radius of a shot.
pub const DEFAULT_R_MAX: f64 = 200.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Classification {
    /// `F(ξ) = 0`: the profile is the constant `ξ`.
    Constant,
    /// `|U|` exceeded the escape threshold at `r_escape`.
    Unbounded { r_escape: f64 },
    /// Small at `r_max`: `residual = |U(r_max)| + |U'(r_max)|`.
    DecayCandidate { residual: f64 },
    /// Bounded but not small at `r_max`; sign changes per component.
    SignChanges { counts: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingProfile {
    pub xi: Vec<f64>,
    pub mode: ShootMode,
    pub dim: u32,
    pub r: Vec<f64>,
    /// `u[c][j] = U_c(r_j)`.
    pub u: Vec<Vec<f64>>,
    pub du: Vec<Vec<f64>>,
    pub classification: Classification,
    /// Sign changes of each component over the recorded range.
    pub zero_numbers: Vec<usize>,
}

impl ShootingProfile {
    /// `H(r) = ½|U'|² + G(U)` at every recorded radius.
    pub fn hamiltonian(&self, field: &HomogeneousGradientField) -> Vec<f64> {
        let n = self.u.len();
        let mut v = vec![0.0; n];
        (0..self.r.len())
            .map(|j| {
                let mut k = 0.0;
                for c in 0..n {
                    v[c] = self.u[c][j];
                    k += self.du[c][j] * self.du[c][j];
                }
                0.5 * k + field.potential(&v)
            })
            .collect()
    }

    pub fn is_decay_candidate(&self) -> bool {
        matches!(self.classification, Classification::DecayCandidate { .. })
    }

    /// Decay candidate whose components never change sign.
    pub fn is_signless_decay_candidate(&self) -> bool {
        self.is_decay_candidate() && self.zero_numbers.iter().all(|z| *z == 0)
    }
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Outcome of one adaptive integration.
enum Stop {
    Done,
    Escaped(f64),
}

struct Dp45<'a> {
    field: &'a HomogeneousGradientField,
    n: usize,
    /// `(n-1)` of the radial Laplacian.
    curvature: f64,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y5: Vec<f64>,
    force: Vec<f64>,
}

impl<'a> Dp45<'a> {
    fn new(field: &'a HomogeneousGradientField, curvature: f64) -> Self {
        let n = field.components();
        let z = || vec![0.0; 2 * n];
        Self { field, n, curvature, k: [z(), z(), z(), z(), z(), z(), z()], tmp: z(), y5: z(), force: vec![0.0; n] }
    }

    /// `y = (U, U')`, `y' = (U', -(n-1)U'/r - F(U))`.
    fn rhs(&mut self, r: f64, y: &[f64], out: &mut [f64]) {
        let n = self.n;
        self.field.force_into(&y[..n], &mut self.force);
        for c in 0..n {
            out[c] = y[n + c];
            let damping = if self.curvature != 0.0 { self.curvature * y[n + c] / r } else { 0.0 };
            out[n + c] = -damping - self.force[c];
        }
    }

    /// Attempts a step of size `h`; returns the scaled error norm and leaves the
    /// candidate in `self.y5`.
    fn attempt(&mut self, r: f64, y: &[f64], h: f64, opts: &ShootOptions) -> f64 {
        let d = y.len();
        let mut k = core::mem::take(&mut self.k);
        let mut tmp = core::mem::take(&mut self.tmp);
        for s in 0..7 {
            for i in 0..d {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h * A[s][j] * kj[i];
                }
                tmp[i] = acc;
            }
            self.rhs(r + C[s] * h, &tmp, &mut k[s]);
        }
        let mut err = 0.0f64;
        for i in 0..d {
            let mut hi = y[i];
            let mut lo = y[i];
            for s in 0..7 {
                hi += h * B5[s] * k[s][i];
                lo += h * B4[s] * k[s][i];
            }
            self.y5[i] = hi;
            let scale = opts.atol + opts.rtol * y[i].abs().max(hi.abs());
            err = err.max((hi - lo).abs() / scale);
        }
        self.k = k;
        self.tmp = tmp;
        err
    }
}

/// Integrates one shot.
pub fn shoot(
    field: &HomogeneousGradientField,
    dim: u32,
    xi: &[f64],
    r_max: f64,
    mode: ShootMode,
    opts: &ShootOptions,
) -> Result<ShootingProfile, ShootError> {
    let n = field.components();
    if xi.len() != n {
        return Err(ShootError::DimensionMismatch { expected: n, got: xi.len() });
    }
    if !(r_max > 0.0) || !(opts.dr_out > 0.0) || dim == 0 {
        return Err(ShootError::InvalidParameter("r_max, dr_out and the dimension must be positive"));
    }
    let xi_norm = norm(xi);
    let dim = if mode == ShootMode::HalfLineSlope { 1 } else { dim };
    let outputs = libm::ceil(r_max / opts.dr_out - 1e-9) as usize;
    let r_out = |j: usize| if j == outputs { r_max } else { j as f64 * opts.dr_out };

    let mut r_rec = vec![0.0];
    let mut u_rec: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut du_rec: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut y = vec![0.0; 2 * n];
    match mode {
        ShootMode::Radial => y[..n].copy_from_slice(xi),
        ShootMode::HalfLineSlope => y[n..].copy_from_slice(xi),
    }
    for c in 0..n {
        u_rec[c].push(y[c]);
        du_rec[c].push(y[n + c]);
    }

    let mut f0 = vec![0.0; n];
    field.force_into(xi, &mut f0);
    let constant = mode == ShootMode::Radial && norm(&f0) <= 1e-14 * libm::pow(xi_norm, field.degree());
    if xi_norm == 0.0 || constant {
        for j in 1..=outputs {
            r_rec.push(r_out(j));
            for c in 0..n {
                u_rec[c].push(y[c]);
                du_rec[c].push(y[n + c]);
            }
        }
        return Ok(ShootingProfile {
            xi: xi.to_vec(),
            mode,
            dim,
            zero_numbers: u_rec.iter().map(|c| zero_number(c)).collect(),
            r: r_rec,
            u: u_rec,
            du: du_rec,
            classification: Classification::Constant,
        });
    }

    let mut r = 0.0;
    if mode == ShootMode::Radial && dim > 1 {
        // series start: U ≈ ξ - F(ξ)r²/(2n), U' ≈ -F(ξ)r/n
        r = opts.r_start.min(0.5 * opts.dr_out);
        for c in 0..n {
            y[c] = xi[c] - f0[c] * r * r / (2.0 * dim as f64);
            y[n + c] = -f0[c] * r / dim as f64;
        }
    }

    let escape = opts.escape_factor * (1.0 + xi_norm);
    let mut stepper = Dp45::new(field, dim as f64 - 1.0);
    let mut h = (1e-3 * opts.dr_out).max(1e-8);
    let mut next = 1;
    let mut steps = 0;
    let outcome = loop {
        if next > outputs {
            break Stop::Done;
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(ShootError::StepFailure { r });
        }
        let target = r_out(next);
        let landing = r + h >= target;
        let h_try = if landing { target - r } else { h };
        let err = stepper.attempt(r, &y, h_try, opts);
        if err.is_finite() && err <= 1.0 {
            r = if landing { target } else { r + h_try };
            y.copy_from_slice(&stepper.y5);
            let factor = if err == 0.0 { 5.0 } else { (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0) };
            if !landing || factor < 1.0 {
                h = h_try * factor;
            }
            if norm(&y[..n]) > escape || !y.iter().all(|v| v.is_finite()) {
                break Stop::Escaped(r);
            }
            if landing {
                r_rec.push(r);
                for c in 0..n {
                    u_rec[c].push(y[c]);
                    du_rec[c].push(y[n + c]);
                }
                next += 1;
            }
        } else {
            let factor = if err.is_finite() { (0.9 * libm::pow(err, -0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h = h_try * factor;
            if h < 1e-13 * r.max(1.0) {
                if norm(&y[..n]) > 1e3 * (1.0 + xi_norm) {
                    break Stop::Escaped(r);
                }
                return Err(ShootError::StepFailure { r });
            }
        }
    };

    let zero_numbers: Vec<usize> = u_rec.iter().map(|c| zero_number(c)).collect();
    let classification = match outcome {
        Stop::Escaped(r_escape) => Classification::Unbounded { r_escape },
        Stop::Done => {
            let residual = norm(&y[..n]) + norm(&y[n..]);
            if residual <= opts.decay_tol * xi_norm {
                Classification::DecayCandidate { residual }
            } else {
                Classification::SignChanges { counts: zero_numbers.clone() }
            }
        }
    };
    Ok(ShootingProfile { xi: xi.to_vec(), mode, dim, r: r_rec, u: u_rec, du: du_rec, classification, zero_numbers })
}

/// One row of an evidence table.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EvidenceRow {
    pub xi: Vec<f64>,
    pub classification: Classification,
    pub zero_numbers: Vec<usize>,
    /// Zero numbers of the cone's combinations over the profile.
    pub combo_zero_numbers: Vec<usize>,
    pub in_cone: bool,
    /// A decay candidate that also satisfies the cone conditions.
    pub cone_decaying: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EvidenceTable {
    pub rows: Vec<EvidenceRow>,
    /// Some profile was a bounded, decaying cone member.
    pub headline: bool,
    pub failures: Vec<(Vec<f64>, ShootError)>,
}

impl EvidenceTable {
    /// Assembles a table from per-ξ outcomes, in the given order.
    pub fn from_outcomes(
        outcomes: Vec<(Vec<f64>, Result<ShootingProfile, ShootError>)>,
        cone: &ConeSpec,
    ) -> Self {
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for (xi, outcome) in outcomes {
            match outcome {
                Ok(p) => rows.push(evidence_row(&p, cone)),
                Err(e) => failures.push((xi, e)),
            }
        }
        let headline = rows.iter().any(|r| r.cone_decaying);
        Self { rows, headline, failures }
    }
}

/// Cone evaluation of one profile.
pub fn evidence_row(profile: &ShootingProfile, cone: &ConeSpec) -> EvidenceRow {
    let report = cone_check(&profile.u, cone, 0.0);
    let decaying = profile.is_decay_candidate();
    EvidenceRow {
        xi: profile.xi.clone(),
        classification: profile.classification.clone(),
        zero_numbers: profile.zero_numbers.clone(),
        combo_zero_numbers: report.zero_numbers,
        in_cone: report.in_cone,
        cone_decaying: decaying && report.in_cone,
    }
}

/// Sequential scan over `xi_grid`.
pub fn scan(
    field: &HomogeneousGradientField,
    dim: u32,
    xi_grid: &[Vec<f64>],
    r_max: f64,
    cone: &ConeSpec,
    opts: &ShootOptions,
) -> EvidenceTable {
    let outcomes = xi_grid
        .iter()
        .map(|xi| (xi.clone(), shoot(field, dim, xi, r_max, ShootMode::Radial, opts)))
        .collect();
    EvidenceTable::from_outcomes(outcomes, cone)
}
