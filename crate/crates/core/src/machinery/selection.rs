use alloc::format;
use alloc::vec::Vec;

use super::MachineryError;
use crate::dynamics::SolutionState;
use crate::numeric::{abs_pow, gradient, interp_linear};

/// Nonnegative values on a point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl DiscreteField {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self, MachineryError> {
        if points.len() != values.len() || points.is_empty() {
            return Err(MachineryError::InvalidInput(format!(
                "{} points, {} values",
                points.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(MachineryError::InvalidInput("values must be finite and nonnegative".into()));
        }
        Ok(Self { points, values })
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let s: f64 = self.points[i].iter().zip(&self.points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
        libm::sqrt(s)
    }
}

/// `M_U = |U|^{(p-1)/2} + |∇U|^{(p-1)/(p+1)}` on the solver grid.
pub fn m_indicator(state: &SolutionState, p: f64) -> DiscreteField {
    let x = &state.grid.x;
    let grads: Vec<Vec<f64>> = state.fields.iter().map(|u| gradient(x, u)).collect();
    let values = (0..x.len())
        .map(|i| {
            let u2: f64 = state.fields.iter().map(|u| u[i] * u[i]).sum();
            let g2: f64 = grads.iter().map(|g| g[i] * g[i]).sum();
            abs_pow(libm::sqrt(u2), (p - 1.0) / 2.0) + abs_pow(libm::sqrt(g2), (p - 1.0) / (p + 1.0))
        })
        .collect();
    DiscreteField { points: x.iter().map(|&v| Vec::from([v])).collect(), values }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublingResult {
    pub index: usize,
    /// Indices visited, starting point first.
    pub path: Vec<usize>,
}

impl DoublingResult {
    pub fn jumps(&self) -> usize {
        self.path.len() - 1
    }
}

/// Moves from `start` to a point `b` with `M(y) <= 2M(b)` whenever
/// `|y - b| <= k/M(b)`. Each jump goes to the largest violating value, so `M`
/// at least doubles per jump.
pub fn doubling_select(field: &DiscreteField, start: usize, k: f64) -> Result<DoublingResult, MachineryError> {
    if start >= field.values.len() {
        return Err(MachineryError::InvalidInput(format!("start index {start} out of range")));
    }
    if !(k > 0.0) {
        return Err(MachineryError::InvalidInput(format!("k = {k}")));
    }
    if !(field.values[start] > 0.0) {
        return Err(MachineryError::NonPositiveStart);
    }
    let mut cur = start;
    let mut path = Vec::from([start]);
    loop {
        let m = field.values[cur];
        let reach = k / m;
        let mut best: Option<usize> = None;
        for j in 0..field.values.len() {
            if field.values[j] > 2.0 * m
                && field.distance(cur, j) <= reach
                && best.map_or(true, |b| field.values[j] > field.values[b])
            {
                best = Some(j);
            }
        }
        match best {
            Some(j) => {
                cur = j;
                path.push(j);
            }
            None => return Ok(DoublingResult { index: cur, path }),
        }
    }
}

/// Samples per unit of `s` used by [`time_select`].
pub const SAMPLES_PER_UNIT: usize = 4096;

/// Window bounds on `J = [σ, σ+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSelectInput {
    pub sigma: f64,
    pub alphas: Vec<f64>,
    pub gamma: f64,
    pub eps: f64,
    pub c1: f64,
    pub k: f64,
}

impl TimeSelectInput {
    pub fn window(&self, ell: usize) -> f64 {
        0.5 * libm::pow(self.k, -self.alphas[ell])
    }

    pub fn bound(&self, ell: usize) -> f64 {
        self.c1 * libm::pow(self.k, self.gamma - self.alphas[ell] + self.eps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSelection {
    pub s_star: f64,
    /// Measure of inadmissible times in `[σ+½, σ+1]`.
    pub bad_measure: f64,
    /// Smallest `bound - window integral` at `s_star`.
    pub margin: f64,
    /// `max_i ∫_J f_i / (C1 k^γ)`, at most 1 under the hypothesis.
    pub hypothesis_ratio: f64,
}

/// Finds `s* ∈ [σ+½, σ+1]` with
/// `∫_{s*-½k^{-α_ℓ}}^{s*} f_i <= C1 k^{γ-α_ℓ+ε}` for every `i` and `ℓ`.
///
/// Windows are evaluated from cumulative trapezoid sums; `s*` is the middle
/// of the longest admissible run of sample times.
pub fn time_select(family: &[&dyn Fn(f64) -> f64], input: &TimeSelectInput) -> Result<TimeSelection, MachineryError> {
    if input.alphas.is_empty() || family.is_empty() {
        return Err(MachineryError::InvalidInput("empty family or schedule".into()));
    }
    if !(input.k >= 1.0) || input.alphas.iter().any(|a| !(*a >= 0.0)) || !(input.c1 > 0.0) {
        return Err(MachineryError::InvalidInput("need k >= 1, α >= 0, C1 > 0".into()));
    }
    let n = SAMPLES_PER_UNIT;
    let s: Vec<f64> = (0..=n).map(|i| input.sigma + i as f64 / n as f64).collect();
    let h = 1.0 / n as f64;
    let half = n / 2;
    let mut ok = alloc::vec![true; n + 1 - half];
    let mut margin = alloc::vec![f64::INFINITY; n + 1 - half];
    let mut hypothesis_ratio: f64 = 0.0;
    let mut cum = alloc::vec![0.0; n + 1];
    for f in family {
        let v: Vec<f64> = s.iter().map(|&t| f(t)).collect();
        for i in 1..=n {
            cum[i] = cum[i - 1] + 0.5 * h * (v[i - 1] + v[i]);
        }
        hypothesis_ratio = hypothesis_ratio.max(cum[n] / (input.c1 * libm::pow(input.k, input.gamma)));
        for ell in 0..input.alphas.len() {
            let (w, bound) = (input.window(ell), input.bound(ell));
            for (j, i) in (half..=n).enumerate() {
                let integral = cum[i] - interp_linear(&s, &cum, s[i] - w);
                let gap = bound - integral;
                margin[j] = margin[j].min(gap);
                if !(gap >= 0.0) {
                    ok[j] = false;
                }
            }
        }
    }
    let bad = ok.iter().filter(|b| !**b).count();
    let bad_measure = bad as f64 * h;
    let (mut best, mut run_start) = ((0usize, 0usize), None);
    for j in 0..=ok.len() {
        let good = j < ok.len() && ok[j];
        match (good, run_start) {
            (true, None) => run_start = Some(j),
            (false, Some(a)) => {
                if j - a > best.1 - best.0 {
                    best = (a, j);
                }
                run_start = None;
            }
            _ => {}
        }
    }
    if best.1 == best.0 {
        return Err(MachineryError::NoAdmissibleTime { bad_measure });
    }
    let j = (best.0 + best.1 - 1) / 2;
    Ok(TimeSelection { s_star: s[half + j], bad_measure, margin: margin[j], hypothesis_ratio })
}
