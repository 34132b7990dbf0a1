//! Spatial domains and their uniform grids.

use alloc::vec::Vec;

use super::SolverError;

/// Boundary condition at one end of a one-dimensional or radial domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Boundary {
    Dirichlet,
    Neumann,
    /// Artificial boundary standing in for decay at infinity. Numerically it
    /// is a homogeneous Dirichlet condition.
    FarField,
}

impl Boundary {
    /// `true` when the boundary value is pinned to zero.
    pub fn is_pinned(self) -> bool {
        matches!(self, Boundary::Dirichlet | Boundary::FarField)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub enum GeometryKind {
    /// `[-L/2, L/2]`.
    Line { length: f64 },
    /// `[0, L]` with a Dirichlet condition at `0`.
    HalfLine { length: f64 },
    /// Radial profiles on the ball `|x| < R` of `R^dim`.
    RadialBall { dim: u32, radius: f64 },
    /// Radial profiles on `R^dim`, truncated at `|x| = R` by a far-field condition.
    RadialTruncatedSpace { dim: u32, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Geometry {
    pub kind: GeometryKind,
    /// Condition at the left end. Ignored for radial kinds (symmetry at `r = 0`).
    pub left: Boundary,
    pub right: Boundary,
}

impl Geometry {
    pub fn line(length: f64, left: Boundary, right: Boundary) -> Self {
        Self { kind: GeometryKind::Line { length }, left, right }
    }

    pub fn half_line(length: f64, right: Boundary) -> Self {
        Self { kind: GeometryKind::HalfLine { length }, left: Boundary::Dirichlet, right }
    }

    pub fn radial_ball(dim: u32, radius: f64, outer: Boundary) -> Self {
        Self { kind: GeometryKind::RadialBall { dim, radius }, left: Boundary::Neumann, right: outer }
    }

    pub fn radial_space(dim: u32, radius: f64) -> Self {
        Self {
            kind: GeometryKind::RadialTruncatedSpace { dim, radius },
            left: Boundary::Neumann,
            right: Boundary::FarField,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let extent = self.extent();
        if !(extent.is_finite() && extent > 0.0) {
            return Err(SolverError::InvalidGeometry("length and radius must be positive"));
        }
        match self.kind {
            GeometryKind::HalfLine { .. } if self.left != Boundary::Dirichlet => {
                Err(SolverError::InvalidGeometry("the half-line carries a Dirichlet condition at 0"))
            }
            GeometryKind::RadialBall { dim, .. } | GeometryKind::RadialTruncatedSpace { dim, .. }
                if dim == 0 =>
            {
                Err(SolverError::InvalidGeometry("radial dimension must be at least 1"))
            }
            _ => Ok(()),
        }
    }

    /// Length of the line or half-line, radius of radial kinds.
    pub fn extent(&self) -> f64 {
        match self.kind {
            GeometryKind::Line { length } | GeometryKind::HalfLine { length } => length,
            GeometryKind::RadialBall { radius, .. }
            | GeometryKind::RadialTruncatedSpace { radius, .. } => radius,
        }
    }

    /// Spatial dimension of radial kinds.
    pub fn radial_dim(&self) -> Option<u32> {
        match self.kind {
            GeometryKind::RadialBall { dim, .. } | GeometryKind::RadialTruncatedSpace { dim, .. } => {
                Some(dim)
            }
            _ => None,
        }
    }

    /// Spatial dimension of the underlying problem.
    pub fn dim(&self) -> u32 {
        self.radial_dim().unwrap_or(1)
    }

    /// Domains whose solutions are (restrictions of) whole-space solutions:
    /// lines with Neumann or far-field ends (Neumann data extends by even
    /// reflection) and truncated radial space.
    pub fn is_whole_space(&self) -> bool {
        match self.kind {
            GeometryKind::Line { .. } => {
                self.left != Boundary::Dirichlet && self.right != Boundary::Dirichlet
            }
            GeometryKind::RadialTruncatedSpace { .. } => true,
            GeometryKind::RadialBall { .. } => self.right == Boundary::Neumann,
            GeometryKind::HalfLine { .. } => false,
        }
    }
}

/// Uniform nodes of a geometry, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub geometry: Geometry,
    pub x: Vec<f64>,
    pub dx: f64,
}

impl Grid {
    pub fn new(geometry: Geometry, nodes: usize) -> Result<Self, SolverError> {
        geometry.validate()?;
        if nodes < 3 {
            return Err(SolverError::InvalidGrid("at least 3 nodes are required"));
        }
        let (a, b) = match geometry.kind {
            GeometryKind::Line { length } => (-0.5 * length, 0.5 * length),
            _ => (0.0, geometry.extent()),
        };
        let x = crate::numeric::linspace(a, b, nodes);
        Ok(Self { geometry, dx: (b - a) / (nodes - 1) as f64, x })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn is_radial(&self) -> bool {
        self.geometry.radial_dim().is_some()
    }

    /// Whether node `i` carries a pinned (zero) boundary value.
    pub fn is_pinned(&self, i: usize) -> bool {
        let last = self.x.len() - 1;
        (i == 0 && !self.is_radial() && self.geometry.left.is_pinned())
            || (i == last && self.geometry.right.is_pinned())
    }

    /// Tridiagonal discrete Laplacian `(lower, diag, upper)`. Pinned rows are zero.
    ///
    /// Radial rows use the flux form
    /// `(r_{i+1/2}^{n-1}(u_{i+1}-u_i) - r_{i-1/2}^{n-1}(u_i-u_{i-1})) / (V_i dr)`
    /// with the exact shell volume `V_i = (r_{i+1/2}^n - r_{i-1/2}^n)/n`, and
    /// `2n(u_1-u_0)/dr²` at the origin; Neumann ends reflect a ghost node.
    pub fn laplacian(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let m = self.x.len();
        let h2 = self.dx * self.dx;
        let mut lower = alloc::vec![0.0; m];
        let mut diag = alloc::vec![0.0; m];
        let mut upper = alloc::vec![0.0; m];
        let weights = |i: usize| -> (f64, f64) {
            match self.geometry.radial_dim() {
                Some(n) if n > 1 => {
                    let e = (n - 1) as f64;
                    let (rm, rp) = (self.x[i] - 0.5 * self.dx, self.x[i] + 0.5 * self.dx);
                    let vol = (libm::pow(rp, e + 1.0) - libm::pow(rm, e + 1.0)) / (e + 1.0);
                    (libm::pow(rm, e) * self.dx / vol, libm::pow(rp, e) * self.dx / vol)
                }
                _ => (1.0, 1.0),
            }
        };
        for i in 0..m {
            if self.is_pinned(i) {
                continue;
            }
            if i == 0 {
                let w = match self.geometry.radial_dim() {
                    Some(n) => 2.0 * n as f64,
                    None => 2.0,
                };
                diag[0] = -w / h2;
                upper[0] = w / h2;
            } else if i == m - 1 {
                let (wl, wr) = weights(i);
                lower[i] = (wl + wr) / h2;
                diag[i] = -(wl + wr) / h2;
            } else {
                let (wl, wr) = weights(i);
                lower[i] = wl / h2;
                upper[i] = wr / h2;
                diag[i] = -(wl + wr) / h2;
            }
        }
        (lower, diag, upper)
    }

    /// Quadrature weights for `∫ f dx` (line) or `∫ f |x|^{n-1} dr` (radial,
    /// without the sphere area), trapezoid rule.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let m = self.x.len();
        let power = self.geometry.radial_dim().map(|n| n as f64 - 1.0).unwrap_or(0.0);
        (0..m)
            .map(|i| {
                let w = if i == 0 || i == m - 1 { 0.5 * self.dx } else { self.dx };
                if power > 0.0 {
                    w * libm::pow(self.x[i], power)
                } else {
                    w
                }
            })
            .collect()
    }
}
