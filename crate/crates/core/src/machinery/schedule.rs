//! Bootstrap schedules `(L, δ, ε, ξ_ℓ, α_ℓ, ω_ℓ)` and the exponent ladder
//! `γ_M = (p+1)β > … > γ_1`, `γ_1 < μ`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::MachineryError;
use crate::{is_subcritical, sobolev_exponent};

/// Relative slack used for every strict "close to" choice.
pub const ETA: f64 = 1e-3;
/// `δ` is rounded down to a multiple of `2^-DYADIC_BITS`.
pub const DYADIC_BITS: i32 = 20;
/// Ratio `ε / δ`.
pub const EPS_PER_DELTA: f64 = 0.125;

/// Margin that keeps float rounding on the safe side of non-strict bounds.
const ROUND_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BootstrapSchedule {
    pub n: u32,
    pub p: f64,
    pub beta: f64,
    pub mu: f64,
    pub gamma: f64,
    pub l: usize,
    pub eps: f64,
    pub delta: f64,
    pub xi: Vec<f64>,
    pub alpha: Vec<f64>,
    pub omega: Vec<f64>,
}

/// One inequality of a certificate, `slack > 0` (strict) or `slack >= 0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Inequality {
    pub label: String,
    pub slack: f64,
    pub strict: bool,
}

impl Inequality {
    pub fn holds(&self) -> bool {
        if self.strict {
            self.slack > 0.0
        } else {
            self.slack >= 0.0
        }
    }
}

/// `β = 1/(p-1)` and `μ = 2β - (n-2)/2`.
pub fn exponents(n: u32, p: f64) -> (f64, f64) {
    let beta = 1.0 / (p - 1.0);
    (beta, 2.0 * beta - (n as f64 - 2.0) / 2.0)
}

/// Smallest `L` with `(μ/(p+1)) (2p/(p+1))^L > β`.
pub fn minimal_l(n: u32, p: f64) -> Result<usize, MachineryError> {
    check_exponent(n, p)?;
    let (beta, mu) = exponents(n, p);
    let ratio = 2.0 * p / (p + 1.0);
    let mut lhs = mu / (p + 1.0) * ratio;
    let mut l = 1;
    while lhs <= beta {
        l += 1;
        lhs *= ratio;
        if l > 100_000 {
            return Err(MachineryError::Infeasible(format!("no bootstrap length for n={n}, p={p}")));
        }
    }
    Ok(l)
}

fn check_exponent(n: u32, p: f64) -> Result<(), MachineryError> {
    if n == 0 || !is_subcritical(n, p) {
        return Err(MachineryError::Infeasible(format!(
            "p = {p} is not in (1, p_S) = (1, {}) for n = {n}",
            sobolev_exponent(n)
        )));
    }
    let (_, mu) = exponents(n, p);
    if !(mu > 0.0) {
        return Err(MachineryError::Infeasible(format!("μ = {mu} is not positive")));
    }
    Ok(())
}

/// Greedy construction for a given total slack `s = δ + ε`. Returns `None`
/// when the chain of inequalities cannot be closed.
fn greedy(n: u32, p: f64, gamma: f64, l: usize, delta: f64, eps: f64) -> Option<BootstrapSchedule> {
    let (beta, mu) = exponents(n, p);
    let half_n = n as f64 / 2.0;
    let s = delta + eps;
    let mut xi = Vec::with_capacity(l);
    let mut alpha = Vec::with_capacity(l);
    let mut omega = Vec::with_capacity(l);
    let x1 = (gamma - delta) / (p + 1.0) * (1.0 - ROUND_GUARD);
    if !(x1 > 0.0) {
        return None;
    }
    xi.push(x1.min(beta * (1.0 - ROUND_GUARD)));
    for ell in 0..l {
        let x = xi[ell];
        let a = (1.0 - ETA) * x / beta;
        // (p+1) ξ_{ℓ+1} must stay below this for the ω-interval to be nonempty
        let bound = (a * (1.0 + half_n) + x * mu / beta - s) / (p + 1.0);
        let next = if ell + 1 == l {
            beta
        } else {
            ((1.0 - ETA) * bound).min(beta * (1.0 - ROUND_GUARD)).max(x)
        };
        if !(next < bound) {
            return None;
        }
        let lo = gamma - a + eps - x * mu / beta;
        let hi = gamma - delta - (p + 1.0) * next + half_n * a;
        alpha.push(a);
        omega.push(0.5 * (lo + hi));
        if ell + 1 < l {
            xi.push(next);
        }
    }
    Some(BootstrapSchedule { n, p, beta, mu, gamma, l, eps, delta, xi, alpha, omega })
}

/// A schedule for exponent `γ ∈ [μ, (p+1)β]`.
///
/// `ξ_1` is as large as `(p+1)ξ_1 <= γ - δ` allows and each later `ξ_{ℓ+1}`
/// takes `1 - η` of its largest admissible value, `α_ℓ = (1-η)ξ_ℓ/β`, and
/// `ω_ℓ` is the midpoint of its admissible interval. The total slack
/// `δ + ε` is bisected to its largest feasible value `s*`; then `δ` is the
/// dyadic floor of `(1-η)·(8/9)s*` and `ε = δ/8`.
pub fn bootstrap_schedule(n: u32, p: f64, gamma: f64) -> Result<BootstrapSchedule, MachineryError> {
    check_exponent(n, p)?;
    let (beta, mu) = exponents(n, p);
    let top = (p + 1.0) * beta;
    if !(gamma >= mu * (1.0 - 1e-12) && gamma <= top * (1.0 + 1e-12)) {
        return Err(MachineryError::Infeasible(format!("γ = {gamma} outside [μ, (p+1)β] = [{mu}, {top}]")));
    }
    let l = minimal_l(n, p)?;
    let split = |s: f64| {
        let delta = s / (1.0 + EPS_PER_DELTA);
        (delta, delta * EPS_PER_DELTA)
    };
    let feasible = |s: f64| {
        let (d, e) = split(s);
        greedy(n, p, gamma, l, d, e).is_some()
    };
    let (mut lo, mut hi) = (0.0, gamma);
    if !feasible(1e-9 * gamma) {
        return Err(MachineryError::Infeasible(format!("no positive slack at γ = {gamma}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let scale = libm::ldexp(1.0, DYADIC_BITS);
    let (d_star, _) = split((1.0 - ETA) * lo);
    let delta = libm::floor(d_star * scale) / scale;
    if !(delta > 0.0) {
        return Err(MachineryError::Infeasible(format!("δ underflows the dyadic grid at γ = {gamma}")));
    }
    greedy(n, p, gamma, l, delta, delta * EPS_PER_DELTA)
        .ok_or_else(|| MachineryError::Infeasible(format!("rounded schedule infeasible at γ = {gamma}")))
}

impl BootstrapSchedule {
    /// Guaranteed decrease of the energy exponent per ladder step.
    pub fn gain(&self) -> f64 {
        0.5 * self.delta
    }

    /// Every inequality with its slack (float arithmetic).
    pub fn inequalities(&self) -> Vec<Inequality> {
        let (p, beta, mu, gamma) = (self.p, self.beta, self.mu, self.gamma);
        let mut out = Vec::new();
        let mut push = |label: String, slack: f64, strict: bool| out.push(Inequality { label, slack, strict });
        let ratio = 2.0 * p / (p + 1.0);
        push(
            "(μ/(p+1))(2p/(p+1))^L > β".into(),
            mu / (p + 1.0) * libm::pow(ratio, self.l as f64) - beta,
            true,
        );
        push("ε > 0".into(), self.eps, true);
        push("δ > 0".into(), self.delta, true);
        push("(p+1)ξ_1 <= γ - δ".into(), gamma - self.delta - (p + 1.0) * self.xi[0], false);
        for ell in 0..self.l {
            let x = self.xi[ell];
            let next = if ell + 1 < self.l { self.xi[ell + 1] } else { beta };
            let (a, w) = (self.alpha[ell], self.omega[ell]);
            let i = ell + 1;
            push(format!("ξ_{i} <= ξ_{}", i + 1), next - x, false);
            push(format!("α_{i} >= 0"), a, false);
            push(format!("α_{i} < ξ_{i}/β"), x / beta - a, true);
            push(format!("ξ_{i}μ/β > γ - α_{i} + ε - ω_{i}"), x * mu / beta - (gamma - a + self.eps - w), true);
            push(
                format!("ω_{i} - nα_{i}/2 <= γ - δ - (p+1)ξ_{}", i + 1),
                gamma - self.delta - (p + 1.0) * next - (w - self.n as f64 * a / 2.0),
                false,
            );
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.inequalities().iter().all(Inequality::holds)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Ladder {
    pub n: u32,
    pub p: f64,
    pub beta: f64,
    pub mu: f64,
    /// `γ_M, γ_{M-1}, …, γ_1` (descending); `gammas[0] = (p+1)β`.
    pub gammas: Vec<f64>,
    /// The schedule used at each `γ_m`, `m = M, …, 2`.
    pub schedules: Vec<BootstrapSchedule>,
    pub min_gain: f64,
}

impl Ladder {
    /// Ladder length `M`.
    pub fn m(&self) -> usize {
        self.gammas.len()
    }

    /// `γ_1`.
    pub fn bottom(&self) -> f64 {
        *self.gammas.last().expect("a ladder has at least one rung")
    }
}

/// Steps down from `(p+1)β` by each schedule's gain until `γ < μ`.
pub fn ladder(n: u32, p: f64) -> Result<Ladder, MachineryError> {
    check_exponent(n, p)?;
    let (beta, mu) = exponents(n, p);
    let mut gammas = Vec::from([(p + 1.0) * beta]);
    let mut schedules = Vec::new();
    let mut min_gain = f64::INFINITY;
    while *gammas.last().unwrap() >= mu {
        let g = *gammas.last().unwrap();
        let sched = bootstrap_schedule(n, p, g)?;
        min_gain = min_gain.min(sched.gain());
        gammas.push(g - sched.gain());
        schedules.push(sched);
        if gammas.len() > 1_000_000 {
            return Err(MachineryError::Infeasible("ladder does not terminate".into()));
        }
    }
    Ok(Ladder { n, p, beta, mu, gammas, schedules, min_gain })
}

/// Smallest schedule gain over `points` equally spaced `γ ∈ [μ, (p+1)β]`.
pub fn min_gain_over_range(n: u32, p: f64, points: usize) -> Result<f64, MachineryError> {
    check_exponent(n, p)?;
    let (beta, mu) = exponents(n, p);
    let top = (p + 1.0) * beta;
    let points = points.max(2);
    let mut best = f64::INFINITY;
    for i in 0..points {
        let g = mu + (top - mu) * i as f64 / (points - 1) as f64;
        best = best.min(bootstrap_schedule(n, p, g)?.gain());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_lengths() {
        assert_eq!(minimal_l(3, 3.0).unwrap(), 4);
        assert_eq!(minimal_l(1, 2.0).unwrap(), 1);
        assert!(minimal_l(3, 5.0).is_err());
    }

    #[test]
    fn direct_minimal_l_search_agrees() {
        for n in 1..=6 {
            for p in [1.5, 2.0, 3.0, 4.0] {
                let Ok(l) = minimal_l(n, p) else { continue };
                let (beta, mu) = exponents(n, p);
                let f = |l: i32| mu / (p + 1.0) * (2.0 * p / (p + 1.0)).powi(l);
                assert!(f(l as i32) > beta);
                assert!(l == 1 || f(l as i32 - 1) <= beta);
            }
        }
    }

    #[test]
    fn schedule_three_three() {
        let s = bootstrap_schedule(3, 3.0, 2.0).unwrap();
        assert_eq!(s.l, 4);
        assert_eq!((s.beta, s.mu), (0.5, 0.5));
        assert!(s.is_valid(), "{:#?}", s.inequalities());
        let scale = libm::ldexp(1.0, DYADIC_BITS);
        assert_eq!(s.delta * scale, (s.delta * scale).floor());
    }

    #[test]
    fn critical_exponent_is_infeasible() {
        assert!(matches!(bootstrap_schedule(3, 5.0, 1.0), Err(MachineryError::Infeasible(_))));
        assert!(ladder(3, 5.0).is_err());
    }

    #[test]
    fn ladders_terminate_below_mu() {
        for n in 1..=6 {
            for p in [1.5, 2.0, 3.0, 4.0] {
                if !is_subcritical(n, p) {
                    continue;
                }
                let lad = ladder(n, p).unwrap();
                assert!(lad.bottom() < lad.mu);
                assert!(lad.gammas.windows(2).all(|w| w[1] < w[0]));
                assert!(lad.schedules.iter().all(BootstrapSchedule::is_valid));
                assert!(lad.m() >= 2);
            }
        }
    }

    #[test]
    fn slack_is_near_maximal() {
        // doubling δ (with ε = δ/8) must break the greedy chain
        let s = bootstrap_schedule(1, 2.0, 3.0).unwrap();
        assert!(greedy(1, 2.0, 3.0, s.l, 2.0 * s.delta, 0.25 * s.delta).is_none());
    }
}
