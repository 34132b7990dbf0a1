//! Zero numbers of sampled profiles and membership in cones defined by sign
//! conditions and caps on the zero numbers of linear combinations.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{Grid, Trace};
use crate::nonlinearity::FieldKind;

/// Samples with `|v| <= ZERO_TOL * max|v|` count as zeros and are skipped.
pub const ZERO_TOL: f64 = 1e-9;

/// Number of strict sign changes of `samples` after discarding (near-)zeros.
pub fn zero_number(samples: &[f64]) -> usize {
    let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0) {
        return 0;
    }
    let cut = ZERO_TOL * scale;
    let mut count = 0;
    let mut last = 0.0f64;
    for &v in samples {
        if v.abs() <= cut {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}

/// A cap `z(Σ_i α_i u_i) <= cap`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ZeroCap {
    pub label: String,
    pub coeffs: Vec<f64>,
    pub cap: usize,
}

impl ZeroCap {
    pub fn new(label: &str, coeffs: Vec<f64>, cap: usize) -> Self {
        Self { label: label.into(), coeffs, cap }
    }

    /// `Σ_i α_i u_i` at every node.
    pub fn combine(&self, fields: &[Vec<f64>]) -> Vec<f64> {
        let m = fields.first().map_or(0, |f| f.len());
        let mut out = vec![0.0; m];
        for (a, f) in self.coeffs.iter().zip(fields) {
            if *a != 0.0 {
                for (o, v) in out.iter_mut().zip(f) {
                    *o += a * v;
                }
            }
        }
        out
    }
}

/// Sign constraints `u_i >= 0` for `i ∈ nonneg` (0-based) plus zero-number caps.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct ConeSpec {
    pub nonneg: Vec<usize>,
    pub combos: Vec<ZeroCap>,
}

impl ConeSpec {
    /// Sign conditions only.
    pub fn signs(nonneg: Vec<usize>) -> Self {
        Self { nonneg, combos: Vec::new() }
    }

    /// `z(u) <= c`.
    pub fn scalar(cap: usize) -> Self {
        Self { nonneg: Vec::new(), combos: vec![ZeroCap::new("u", vec![1.0], cap)] }
    }

    /// `z(u) <= c1, z(v) <= c2, z(u-v) <= c3, z(u+v) <= c4`.
    pub fn pair(caps: [usize; 4]) -> Self {
        Self {
            nonneg: Vec::new(),
            combos: vec![
                ZeroCap::new("u", vec![1.0, 0.0], caps[0]),
                ZeroCap::new("v", vec![0.0, 1.0], caps[1]),
                ZeroCap::new("u-v", vec![1.0, -1.0], caps[2]),
                ZeroCap::new("u+v", vec![1.0, 1.0], caps[3]),
            ],
        }
    }

    /// `u, v >= 0, z(u-v) <= c3`.
    pub fn positive_pair(cap: usize) -> Self {
        Self { nonneg: vec![0, 1], combos: vec![ZeroCap::new("u-v", vec![1.0, -1.0], cap)] }
    }

    /// Checks indices and coefficient lengths against `components`.
    pub fn validate(&self, components: usize) -> Result<(), &'static str> {
        if self.nonneg.iter().any(|&i| i >= components) {
            return Err("sign index out of range");
        }
        if self.combos.iter().any(|c| c.coeffs.len() != components) {
            return Err("combination length differs from the component count");
        }
        Ok(())
    }

    fn combos_within(&self, allowed: &[[f64; 2]]) -> bool {
        self.combos.iter().all(|c| {
            c.coeffs.len() == 2
                && allowed.iter().any(|a| {
                    // proportional with a nonzero factor
                    let cross = c.coeffs[0] * a[1] - c.coeffs[1] * a[0];
                    cross == 0.0 && (c.coeffs[0] != 0.0 || c.coeffs[1] != 0.0)
                })
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConeReport {
    pub in_cone: bool,
    /// `min_x u_i(x)` for each constrained index, paired with the index.
    pub sign_minima: Vec<(usize, f64)>,
    /// Zero number of each configured combination.
    pub zero_numbers: Vec<usize>,
}

/// Membership of nodal `fields` in the cone; sign conditions are relaxed to `>= -tol`.
pub fn cone_check(fields: &[Vec<f64>], spec: &ConeSpec, tol: f64) -> ConeReport {
    let sign_minima: Vec<(usize, f64)> = spec
        .nonneg
        .iter()
        .map(|&i| (i, fields.get(i).map_or(f64::NAN, |f| f.iter().fold(f64::INFINITY, |m, v| m.min(*v)))))
        .collect();
    let zero_numbers: Vec<usize> = spec.combos.iter().map(|c| zero_number(&c.combine(fields))).collect();
    let in_cone = spec.validate(fields.len()).is_ok()
        && sign_minima.iter().all(|(_, m)| *m >= -tol)
        && zero_numbers.iter().zip(&spec.combos).all(|(z, c)| *z <= c.cap);
    ConeReport { in_cone, sign_minima, zero_numbers }
}

/// [`cone_check`] on a solution state (radial states use the radial profile).
pub fn cone_membership(state: &crate::dynamics::SolutionState, spec: &ConeSpec, tol: f64) -> ConeReport {
    cone_check(&state.fields, spec, tol)
}

/// Zero numbers of each configured combination along a trace.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ZeroTrace {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    /// `values[c][j]`: combination `c` at snapshot `j`.
    pub values: Vec<Vec<usize>>,
    /// Whether the run satisfies the hypotheses under which the zero numbers
    /// cannot increase. When `false`, `nonincreasing` is left empty.
    pub asserted: bool,
    pub nonincreasing: Vec<bool>,
}

impl ZeroTrace {
    /// `Some(all combinations nonincreasing)` when asserted.
    pub fn passed(&self) -> Option<bool> {
        self.asserted.then(|| self.nonincreasing.iter().all(|b| *b))
    }
}

/// `true` if `z` never increases, except for isolated one-snapshot spikes
/// (`z_j` above its predecessor but `z_{j+1}` back at or below it).
pub fn nonincreasing_with_transients(z: &[usize]) -> bool {
    let Some(&first) = z.first() else { return true };
    let mut level = first;
    let mut j = 1;
    while j < z.len() {
        if z[j] > level {
            if j + 1 < z.len() && z[j + 1] <= level {
                j += 1;
                continue;
            }
            return false;
        }
        level = z[j];
        j += 1;
    }
    true
}

/// Zero numbers along `trace`.
///
/// Monotonicity is asserted for scalar runs, for the coupled gradient system
/// with `γ = 0` and combinations among `u, v, u - v, u + v`, and with `γ < 0`
/// for sign-constrained `u, v` and the combination `u - v`. Other runs are
/// reported without a verdict.
pub fn zero_number_trace(trace: &Trace, spec: &ConeSpec) -> ZeroTrace {
    let labels = spec.combos.iter().map(|c| c.label.clone()).collect();
    let times = trace.snapshots.iter().map(|s| s.t).collect();
    let values: Vec<Vec<usize>> = spec
        .combos
        .iter()
        .map(|c| trace.snapshots.iter().map(|s| zero_number(&c.combine(&s.fields))).collect())
        .collect();
    let gamma = trace.perturbation.gamma;
    let asserted = match trace.field.kind() {
        _ if trace.field.components() == 1 => true,
        FieldKind::GradientCoupled { .. } if gamma == 0.0 => {
            spec.combos_within(&[[1.0, 0.0], [0.0, 1.0], [1.0, -1.0], [1.0, 1.0]])
        }
        FieldKind::GradientCoupled { .. } if gamma < 0.0 => {
            spec.nonneg.contains(&0) && spec.nonneg.contains(&1) && spec.combos_within(&[[1.0, -1.0]])
        }
        _ => false,
    };
    let nonincreasing =
        if asserted { values.iter().map(|z| nonincreasing_with_transients(z)).collect() } else { Vec::new() };
    ZeroTrace { labels, times, values, asserted, nonincreasing }
}

/// Random nodal data in the cone: each component is a sum of up to `bumps`
/// Gaussians with random centres, widths and signed amplitudes (nonnegative
/// for sign-constrained components). Candidates are drawn until one passes
/// [`cone_check`]; `None` after 10 000 rejections.
pub fn random_in_cone(
    grid: &Grid,
    components: usize,
    spec: &ConeSpec,
    seed: u64,
    amplitude: f64,
    bumps: usize,
) -> Option<Vec<Vec<f64>>> {
    if spec.validate(components).is_err() || bumps == 0 || !(amplitude > 0.0) {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (grid.x[0], grid.x[grid.len() - 1]);
    let width = b - a;
    let m = grid.len();
    for _ in 0..10_000 {
        let mut fields = vec![vec![0.0; m]; components];
        for (c, f) in fields.iter_mut().enumerate() {
            let count = rng.gen_range(1..=bumps);
            for _ in 0..count {
                let centre = if grid.is_radial() {
                    rng.gen_range(0.0..0.6) * width
                } else {
                    a + rng.gen_range(0.2..0.8) * width
                };
                let w = rng.gen_range(0.04..0.15) * width;
                let mut amp = rng.gen_range(-amplitude..=amplitude);
                if spec.nonneg.contains(&c) {
                    amp = amp.abs();
                }
                for (v, x) in f.iter_mut().zip(&grid.x) {
                    *v += amp * libm::exp(-(x - centre) * (x - centre) / (w * w));
                }
            }
            for (i, v) in f.iter_mut().enumerate() {
                if grid.is_pinned(i) {
                    *v = 0.0;
                }
            }
        }
        if cone_check(&fields, spec, 0.0).in_cone {
            return Some(fields);
        }
    }
    None
}
