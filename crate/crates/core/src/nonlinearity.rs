//! Homogeneous gradient nonlinearities `F = ∇G : R^N → R^N` with
//! `F(λU) = λ^p F(U)` for `λ > 0`.
//!
//! Built-in families:
//!
//! | kind | N | p | F |
//! |------|---|---|---|
//! | `ScalarPower(p)` | 1 | p | `|u|^{p-1} u` |
//! | `GradientCoupled(q, β)` | 2 | `2q+3` | `(|u₁|^{2q+2}u₁ + β|u₂|^{q+2}|u₁|^q u₁, …)` |
//! | `ScalarQuadratic` | 1 | 2 | `u²` |
//! | `QuadraticSystem(δ)` | 2 | 2 | `(2uv, u² + δv²)` |
//!
//! plus user supplied [`CustomField`]s.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numeric::{abs_pow, dot, norm, signed_pow};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("homogeneity degree must satisfy p > 1 (got {0})")]
    InvalidDegree(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// A point of `R^N`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VectorValue(pub Vec<f64>);

impl VectorValue {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl From<Vec<f64>> for VectorValue {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

pub type PotentialFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type ForceFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A user supplied pair `(G, F)`. Nothing checks that `F = ∇G`; run
/// [`check_identities`] for that.
#[derive(Clone)]
pub struct CustomField {
    pub name: String,
    pub potential: PotentialFn,
    pub force: ForceFn,
    /// Points closer than this to a coordinate hyperplane are skipped by the
    /// finite-difference gradient check.
    pub hyperplane_margin: f64,
}

impl fmt::Debug for CustomField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomField").field("name", &self.name).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum FieldKind {
    ScalarPower { p: f64 },
    GradientCoupled { q: f64, coupling: f64 },
    ScalarQuadratic,
    QuadraticSystem { delta: f64 },
    Custom(CustomField),
}

/// A nonlinearity `F = ∇G` with `N` components, homogeneous of degree `p`.
#[derive(Debug, Clone)]
pub struct HomogeneousGradientField {
    kind: FieldKind,
    components: usize,
    degree: f64,
}

impl HomogeneousGradientField {
    /// `F(u) = |u|^{p-1} u`.
    pub fn scalar_power(p: f64) -> Result<Self, FieldError> {
        check_degree(p)?;
        Ok(Self { kind: FieldKind::ScalarPower { p }, components: 1, degree: p })
    }

    /// The coupled cubic-type system with `p = 2q + 3`.
    pub fn gradient_coupled(q: f64, coupling: f64) -> Result<Self, FieldError> {
        if !q.is_finite() || !coupling.is_finite() {
            return Err(FieldError::InvalidParameter("q and the coupling must be finite"));
        }
        let p = 2.0 * q + 3.0;
        check_degree(p)?;
        Ok(Self { kind: FieldKind::GradientCoupled { q, coupling }, components: 2, degree: p })
    }

    /// `F(u) = u²`.
    pub fn scalar_quadratic() -> Self {
        Self { kind: FieldKind::ScalarQuadratic, components: 1, degree: 2.0 }
    }

    /// `F(u, v) = (2uv, u² + δv²)`.
    pub fn quadratic_system(delta: f64) -> Result<Self, FieldError> {
        if !delta.is_finite() {
            return Err(FieldError::InvalidParameter("delta must be finite"));
        }
        Ok(Self { kind: FieldKind::QuadraticSystem { delta }, components: 2, degree: 2.0 })
    }

    pub fn custom(components: usize, p: f64, field: CustomField) -> Result<Self, FieldError> {
        check_degree(p)?;
        if components == 0 {
            return Err(FieldError::InvalidParameter("a field needs at least one component"));
        }
        Ok(Self { kind: FieldKind::Custom(field), components, degree: p })
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    /// Number of components `N`.
    pub fn components(&self) -> usize {
        self.components
    }

    /// Homogeneity degree `p` of `F`.
    pub fn degree(&self) -> f64 {
        self.degree
    }

    /// Self-similar exponent `β = 1/(p-1)`.
    pub fn beta(&self) -> f64 {
        1.0 / (self.degree - 1.0)
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            FieldKind::ScalarPower { .. } => "scalar-power",
            FieldKind::GradientCoupled { .. } => "gradient-coupled",
            FieldKind::ScalarQuadratic => "scalar-quadratic",
            FieldKind::QuadraticSystem { .. } => "quadratic-system",
            FieldKind::Custom(c) => &c.name,
        }
    }

    /// Distance from the coordinate hyperplanes below which finite-difference
    /// gradients are unreliable (the potential is only `C^{1+α}` there).
    pub fn hyperplane_margin(&self) -> f64 {
        match &self.kind {
            FieldKind::ScalarPower { p } if *p < 2.0 => 1e-3,
            FieldKind::GradientCoupled { q, .. } if *q < 0.0 => 1e-3,
            FieldKind::Custom(c) => c.hyperplane_margin,
            _ => 0.0,
        }
    }

    /// Writes `F(u)` into `out`. Both slices must have length `N`.
    pub fn force_into(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.components);
        match &self.kind {
            FieldKind::ScalarPower { p } => out[0] = signed_pow(u[0], p - 1.0),
            FieldKind::GradientCoupled { q, coupling } => {
                let (a, b) = (u[0], u[1]);
                out[0] = signed_pow(a, 2.0 * q + 2.0) + coupling * abs_pow(b, q + 2.0) * signed_pow(a, *q);
                out[1] = signed_pow(b, 2.0 * q + 2.0) + coupling * abs_pow(a, q + 2.0) * signed_pow(b, *q);
            }
            FieldKind::ScalarQuadratic => out[0] = u[0] * u[0],
            FieldKind::QuadraticSystem { delta } => {
                out[0] = 2.0 * u[0] * u[1];
                out[1] = u[0] * u[0] + delta * u[1] * u[1];
            }
            FieldKind::Custom(c) => (c.force)(u, out),
        }
    }

    /// `G(u)`; the slice must have length `N`.
    pub fn potential(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.components);
        match &self.kind {
            FieldKind::ScalarPower { p } => abs_pow(u[0], p + 1.0) / (p + 1.0),
            FieldKind::GradientCoupled { q, coupling } => {
                let p1 = 2.0 * q + 4.0;
                (abs_pow(u[0], p1) + abs_pow(u[1], p1)) / p1
                    + 2.0 * coupling / p1 * abs_pow(u[0] * u[1], q + 2.0)
            }
            FieldKind::ScalarQuadratic => u[0] * u[0] * u[0] / 3.0,
            FieldKind::QuadraticSystem { delta } => {
                u[0] * u[0] * u[1] + delta * u[1] * u[1] * u[1] / 3.0
            }
            FieldKind::Custom(c) => (c.potential)(u),
        }
    }

    fn check_len(&self, u: &VectorValue) -> Result<(), FieldError> {
        if u.len() == self.components {
            Ok(())
        } else {
            Err(FieldError::DimensionMismatch { expected: self.components, got: u.len() })
        }
    }

    /// `F(U)`.
    pub fn eval_f(&self, u: &VectorValue) -> Result<VectorValue, FieldError> {
        self.check_len(u)?;
        let mut out = vec![0.0; self.components];
        self.force_into(&u.0, &mut out);
        Ok(VectorValue(out))
    }

    /// `G(U)`.
    pub fn eval_g(&self, u: &VectorValue) -> Result<f64, FieldError> {
        self.check_len(u)?;
        Ok(self.potential(&u.0))
    }
}

fn check_degree(p: f64) -> Result<(), FieldError> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(FieldError::InvalidDegree(p))
    }
}

/// Settings for [`check_identities`].
#[derive(Debug, Clone, Copy)]
pub struct IdentityCheck {
    pub samples: usize,
    /// Relative tolerance for the exact identities (Euler, homogeneity).
    pub tol: f64,
    /// Relative tolerance for the finite-difference gradient check.
    pub gradient_tol: f64,
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for IdentityCheck {
    fn default() -> Self {
        Self { samples: 1000, tol: 1e-10, gradient_tol: 1e-6, fd_step: 1e-5, seed: 0x5eed_f1e1d }
    }
}

/// Largest relative residuals found by [`check_identities`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IdentityReport {
    pub samples: usize,
    pub gradient_samples: usize,
    /// `max |F(U)·U - (p+1)G(U)| / (1 + |G(U)|)`
    pub euler: f64,
    /// `max |F(λU) - λ^p F(U)| / (1 + |λ^p F(U)|)`
    pub homogeneity: f64,
    /// `max |∇_h G(U) - F(U)| / (1 + |F(U)|)` with central differences of step `h`
    pub gradient: f64,
    pub passed: bool,
}

/// Checks `F·U = (p+1)G`, `F(λU) = λ^p F(U)` and `F = ∇G` on random
/// `U ∈ [-2, 2]^N`, `λ ∈ [0.1, 10]` drawn from a seeded generator.
pub fn check_identities(field: &HomogeneousGradientField, check: &IdentityCheck) -> IdentityReport {
    let n = field.components();
    let p = field.degree();
    let margin = field.hyperplane_margin();
    let mut rng = ChaCha8Rng::seed_from_u64(check.seed);

    let mut u = vec![0.0; n];
    let mut scaled = vec![0.0; n];
    let mut f = vec![0.0; n];
    let mut f_scaled = vec![0.0; n];
    let mut fd = vec![0.0; n];
    let mut probe = vec![0.0; n];

    let (mut euler, mut homogeneity, mut gradient) = (0.0f64, 0.0f64, 0.0f64);
    let mut gradient_samples = 0;
    for _ in 0..check.samples {
        for x in u.iter_mut() {
            *x = rng.gen_range(-2.0..=2.0);
        }
        let lambda: f64 = rng.gen_range(0.1..=10.0);
        field.force_into(&u, &mut f);
        let g = field.potential(&u);

        let e = (dot(&f, &u) - (p + 1.0) * g).abs() / (1.0 + g.abs());
        euler = euler.max(e);

        for (s, x) in scaled.iter_mut().zip(&u) {
            *s = lambda * x;
        }
        field.force_into(&scaled, &mut f_scaled);
        let lp = libm::pow(lambda, p);
        let mut diff = 0.0;
        let mut reference = 0.0;
        for (a, b) in f_scaled.iter().zip(&f) {
            diff += (a - lp * b) * (a - lp * b);
            reference += (lp * b) * (lp * b);
        }
        homogeneity = homogeneity.max(libm::sqrt(diff) / (1.0 + libm::sqrt(reference)));

        if u.iter().all(|x| x.abs() > margin) {
            gradient_samples += 1;
            let h = check.fd_step;
            for i in 0..n {
                probe.copy_from_slice(&u);
                probe[i] = u[i] + h;
                let gp = field.potential(&probe);
                probe[i] = u[i] - h;
                let gm = field.potential(&probe);
                fd[i] = (gp - gm) / (2.0 * h);
            }
            let mut diff = 0.0;
            for (a, b) in fd.iter().zip(&f) {
                diff += (a - b) * (a - b);
            }
            gradient = gradient.max(libm::sqrt(diff) / (1.0 + norm(&f)));
        }
    }
    let passed = euler <= check.tol && homogeneity <= check.tol && gradient <= check.gradient_tol;
    IdentityReport { samples: check.samples, gradient_samples, euler, homogeneity, gradient, passed }
}
