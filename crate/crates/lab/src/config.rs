//! TOML run configuration. Every table rejects unknown keys.
//!
//! ```toml
//! seed = 7
//! output_dir = "out"
//!
//! [nonlinearity]
//! kind = "scalar-power"
//! p = 3.0
//!
//! [simulation]
//! geometry = { kind = { line = { length = 20.0 } }, left = "far-field", right = "far-field" }
//! nodes = 801
//! initial = { gaussian = { amplitudes = [5.0], center = 0.0, width = 1.0 } }
//! stop = { sup_norm = 1e6 }
//! ```

use std::path::{Path, PathBuf};

use liouville_core::dynamics::{Cadence, Geometry, InitialData, Perturbation, SolverConfig, StopRule};
use liouville_core::selfsimilar::YGrid;
use liouville_core::stationary::{ShootMode, ShootOptions};
use liouville_core::{ConeSpec, HomogeneousGradientField};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub nonlinearity: Option<NonlinearityConfig>,
    pub simulation: Option<SimulationConfig>,
    pub rescale: Option<RescaleConfig>,
    pub zeros: Option<ZerosConfig>,
    pub shoot: Option<ShootConfig>,
    pub schedule: Option<ScheduleConfig>,
    pub campaign: Option<CampaignConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    ScalarPower { p: f64 },
    GradientCoupled { q: f64, coupling: f64 },
    ScalarQuadratic,
    QuadraticSystem { delta: f64 },
}

impl NonlinearityConfig {
    pub fn build(&self) -> Result<HomogeneousGradientField> {
        Ok(match *self {
            NonlinearityConfig::ScalarPower { p } => HomogeneousGradientField::scalar_power(p)?,
            NonlinearityConfig::GradientCoupled { q, coupling } => HomogeneousGradientField::gradient_coupled(q, coupling)?,
            NonlinearityConfig::ScalarQuadratic => HomogeneousGradientField::scalar_quadratic(),
            NonlinearityConfig::QuadraticSystem { delta } => HomogeneousGradientField::quadratic_system(delta)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub geometry: Geometry,
    pub nodes: usize,
    pub initial: InitialData,
    #[serde(default)]
    pub perturbation: Perturbation,
    #[serde(default)]
    pub solver: SolverConfig,
    pub stop: StopRule,
    #[serde(default)]
    pub cadence: Cadence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RescaleConfig {
    pub y_grid: YGrid,
    /// Blow-up point `a`; the location of the final maximum when absent.
    pub center: Option<f64>,
    /// Snapshot spacing in `s`.
    pub ds: f64,
    /// Length of the sampled `s`-interval.
    pub span: f64,
    /// First sample at `s = -log T + offset`.
    pub offset: f64,
    pub energy_tol: f64,
}

impl Default for RescaleConfig {
    fn default() -> Self {
        Self { y_grid: YGrid::default(), center: None, ds: 0.1, span: 4.0, offset: 0.5, energy_tol: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZerosConfig {
    pub cone: ConeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootConfig {
    pub dim: u32,
    /// Explicit starting values; overrides `xi_range`.
    #[serde(default)]
    pub xi: Vec<Vec<f64>>,
    /// Scalar starting values `(from, to, count)`.
    pub xi_range: Option<(f64, f64, usize)>,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default)]
    pub mode: ShootMode,
    #[serde(default)]
    pub options: ShootOptions,
    #[serde(default)]
    pub cone: ConeSpec,
}

fn default_r_max() -> f64 {
    liouville_core::stationary::DEFAULT_R_MAX
}

impl ShootConfig {
    pub fn grid(&self) -> Result<Vec<Vec<f64>>> {
        if !self.xi.is_empty() {
            return Ok(self.xi.clone());
        }
        match self.xi_range {
            Some((a, b, n)) if n >= 2 => Ok((0..n).map(|i| vec![a + (b - a) * i as f64 / (n - 1) as f64]).collect()),
            Some((a, _, 1)) => Ok(vec![vec![a]]),
            _ => Err(LabError::Config("shoot needs `xi` or `xi_range` with count >= 1".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub n: u32,
    pub p: f64,
}

/// Family of initial data for a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Family {
    /// Random bumps inside the cone, one seed per run.
    RandomInCone { amplitude: f64, bumps: usize },
    /// The same data for every run.
    Fixed { data: InitialData },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub runs: usize,
    pub family: Family,
    #[serde(default)]
    pub cone: ConeSpec,
    /// Factor applied to every initial profile.
    #[serde(default = "one")]
    pub amplitude_scale: f64,
    /// Snapshot cadence for the cone check, in steps.
    #[serde(default = "default_check_every")]
    pub check_every: u64,
}

fn one() -> f64 {
    1.0
}

fn default_check_every() -> u64 {
    10
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            LabError::Config(m) => LabError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn nonlinearity(&self) -> Result<HomogeneousGradientField> {
        self.nonlinearity.as_ref().ok_or_else(|| missing("nonlinearity"))?.build()
    }

    pub fn simulation(&self) -> Result<&SimulationConfig> {
        self.simulation.as_ref().ok_or_else(|| missing("simulation"))
    }
}

pub fn missing(table: &str) -> LabError {
    LabError::Config(format!("missing [{table}] table"))
}
