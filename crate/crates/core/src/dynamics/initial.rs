use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{Boundary, Geometry, GeometryKind, Grid, SolverError};
use crate::zeronumber::{random_in_cone, ConeSpec};

/// Named initial-data presets.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub enum InitialData {
    /// `a_c exp(-(x - center)² / width²)` per component.
    Gaussian { amplitudes: Vec<f64>, center: f64, width: f64 },
    /// `a_c φ_m(x)` with `φ_m` the `m`-th Laplacian eigenfunction of the domain, `max|φ_m| = 1`.
    Eigenmode { amplitudes: Vec<f64>, mode: u32 },
    Flat { values: Vec<f64> },
    /// Sum of random bumps accepted by the cone membership test.
    RandomInCone { spec: ConeSpec, seed: u64, amplitude: f64, bumps: usize },
    /// Explicit nodal values, one array per component.
    Profiles(Vec<Vec<f64>>),
}

impl InitialData {
    /// Nodal values on `grid`; pinned boundary values are not yet zeroed.
    pub fn sample(&self, grid: &Grid, components: usize) -> Result<Vec<Vec<f64>>, SolverError> {
        let check = |got: usize| {
            if got == components {
                Ok(())
            } else {
                Err(SolverError::ComponentMismatch { expected: components, got })
            }
        };
        match self {
            InitialData::Gaussian { amplitudes, center, width } => {
                check(amplitudes.len())?;
                if !(*width > 0.0) {
                    return Err(SolverError::UnsupportedInitialData("gaussian width must be positive"));
                }
                let shape: Vec<f64> =
                    grid.x.iter().map(|x| libm::exp(-(x - center) * (x - center) / (width * width))).collect();
                Ok(amplitudes.iter().map(|a| shape.iter().map(|s| a * s).collect()).collect())
            }
            InitialData::Eigenmode { amplitudes, mode } => {
                check(amplitudes.len())?;
                let shape = eigenmode(grid, *mode)?;
                Ok(amplitudes.iter().map(|a| shape.iter().map(|s| a * s).collect()).collect())
            }
            InitialData::Flat { values } => {
                check(values.len())?;
                Ok(values.iter().map(|v| vec![*v; grid.len()]).collect())
            }
            InitialData::RandomInCone { spec, seed, amplitude, bumps } => {
                random_in_cone(grid, components, spec, *seed, *amplitude, *bumps)
                    .ok_or(SolverError::UnsupportedInitialData("no random state in the cone was found"))
            }
            InitialData::Profiles(p) => {
                check(p.len())?;
                for f in p {
                    if f.len() != grid.len() {
                        return Err(SolverError::NodeMismatch { expected: grid.len(), got: f.len() });
                    }
                }
                Ok(p.clone())
            }
        }
    }
}

enum Mode {
    Sin(f64),
    Cos(f64),
    Sinc(f64),
}

fn mode_shape(geometry: &Geometry, mode: u32) -> Result<Mode, SolverError> {
    let m = mode as f64;
    let pinned = |b: Boundary| b.is_pinned();
    let need_positive = || {
        if mode == 0 {
            Err(SolverError::UnsupportedInitialData("mode 0 exists only with Neumann conditions"))
        } else {
            Ok(())
        }
    };
    let l = geometry.extent();
    match geometry.kind {
        GeometryKind::Line { .. } | GeometryKind::HalfLine { .. } => {
            match (pinned(geometry.left), pinned(geometry.right)) {
                (true, true) => need_positive().map(|_| Mode::Sin(m * PI / l)),
                (false, false) => Ok(Mode::Cos(m * PI / l)),
                (true, false) => need_positive().map(|_| Mode::Sin((m - 0.5) * PI / l)),
                (false, true) => need_positive().map(|_| Mode::Cos((m - 0.5) * PI / l)),
            }
        }
        GeometryKind::RadialBall { dim: 1, .. } | GeometryKind::RadialTruncatedSpace { dim: 1, .. } => {
            if pinned(geometry.right) {
                need_positive().map(|_| Mode::Cos((m - 0.5) * PI / l))
            } else {
                Ok(Mode::Cos(m * PI / l))
            }
        }
        GeometryKind::RadialBall { dim: 3, .. } | GeometryKind::RadialTruncatedSpace { dim: 3, .. }
            if pinned(geometry.right) =>
        {
            need_positive().map(|_| Mode::Sinc(m * PI / l))
        }
        _ => Err(SolverError::UnsupportedInitialData(
            "eigenmodes are available on lines, half-lines, and Dirichlet balls in dimensions 1 and 3",
        )),
    }
}

/// The `mode`-th eigenfunction of `-Δ` on the grid's domain, normalised to `max = 1`.
pub fn eigenmode(grid: &Grid, mode: u32) -> Result<Vec<f64>, SolverError> {
    let offset = match grid.geometry.kind {
        GeometryKind::Line { length } => 0.5 * length,
        _ => 0.0,
    };
    let shape = mode_shape(&grid.geometry, mode)?;
    Ok(grid
        .x
        .iter()
        .map(|&x| {
            let s = x + offset;
            match shape {
                Mode::Sin(k) => libm::sin(k * s),
                Mode::Cos(k) => libm::cos(k * s),
                Mode::Sinc(k) => {
                    if s == 0.0 {
                        1.0
                    } else {
                        libm::sin(k * s) / (k * s)
                    }
                }
            }
        })
        .collect())
}

/// Eigenvalue `k²` of `-Δ` belonging to [`eigenmode`].
pub fn eigenvalue(geometry: &Geometry, mode: u32) -> Result<f64, SolverError> {
    let k = match mode_shape(geometry, mode)? {
        Mode::Sin(k) | Mode::Cos(k) | Mode::Sinc(k) => k,
    };
    Ok(k * k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_line_mode_vanishes_at_both_ends() {
        let g = Grid::new(Geometry::line(3.0, Boundary::Dirichlet, Boundary::Dirichlet), 31).unwrap();
        let phi = eigenmode(&g, 2).unwrap();
        assert!(phi[0].abs() < 1e-12 && phi[30].abs() < 1e-12);
        assert!((eigenvalue(&g.geometry, 2).unwrap() - (2.0 * PI / 3.0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn radial_modes_satisfy_the_discrete_eigen_equation() {
        for dim in [1, 3] {
            let geo = Geometry::radial_ball(dim, 2.0, Boundary::Dirichlet);
            let g = Grid::new(geo, 801).unwrap();
            let phi = eigenmode(&g, 1).unwrap();
            let lam = eigenvalue(&geo, 1).unwrap();
            let (l, d, u) = g.laplacian();
            for i in (1..800).step_by(37).chain([2, 5]) {
                let lap = l[i] * phi[i - 1] + d[i] * phi[i] + u[i] * phi[i + 1];
                assert!((lap + lam * phi[i]).abs() < 1e-3, "dim {dim} node {i}: {}", lap + lam * phi[i]);
            }
        }
    }

    #[test]
    fn amplitudes_must_match_components() {
        let g = Grid::new(Geometry::line(1.0, Boundary::Neumann, Boundary::Neumann), 5).unwrap();
        let data = InitialData::Flat { values: vec![1.0, 2.0] };
        assert!(data.sample(&g, 1).is_err());
        assert_eq!(data.sample(&g, 2).unwrap()[1], vec![2.0; 5]);
    }
}
