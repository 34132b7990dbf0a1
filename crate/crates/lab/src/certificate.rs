//! Exact re-check of bootstrap schedules and ladders.
//!
//! Every float in a schedule is converted to the rational number it denotes and
//! each inequality is evaluated in `BigRational`. Only the raw numbers are
//! taken from the schedule; `β`, `μ` and all inequalities are recomputed here.

use liouville_core::machinery::{BootstrapSchedule, Ladder};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

/// One exactly evaluated inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactCheck {
    pub label: String,
    pub strict: bool,
    pub holds: bool,
    /// The exact slack, rounded to `f64` for display.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub checks: Vec<ExactCheck>,
    pub passed: bool,
}

impl Verification {
    fn new(checks: Vec<ExactCheck>) -> Self {
        let passed = checks.iter().all(|c| c.holds);
        Self { checks, passed }
    }

    pub fn failures(&self) -> impl Iterator<Item = &ExactCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }

    pub fn min_strict_slack(&self) -> f64 {
        self.checks.iter().filter(|c| c.strict).map(|c| c.slack).fold(f64::INFINITY, f64::min)
    }
}

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite schedule entry")
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

struct Checks(Vec<ExactCheck>);

impl Checks {
    fn push(&mut self, label: impl Into<String>, slack: BigRational, strict: bool) {
        let holds = if strict { slack.is_positive() } else { !slack.is_negative() };
        self.0.push(ExactCheck { label: label.into(), strict, holds, slack: slack.to_f64().unwrap_or(f64::NAN) });
    }

    fn flag(&mut self, label: impl Into<String>, ok: bool) {
        self.0.push(ExactCheck { label: label.into(), strict: false, holds: ok, slack: if ok { 0.0 } else { -1.0 } });
    }
}

fn exponents(n: u32, p: &BigRational) -> (BigRational, BigRational) {
    let beta = BigRational::one() / (p - BigRational::one());
    let mu = int(2) * &beta - (int(n as i64) - int(2)) / int(2);
    (beta, mu)
}

fn length_lhs(l: usize, p: &BigRational, mu: &BigRational) -> BigRational {
    let p1 = p + BigRational::one();
    let ratio = int(2) * p / &p1;
    let mut acc = mu / &p1;
    for _ in 0..l {
        acc *= &ratio;
    }
    acc
}

/// Verifies one schedule at its own `γ`.
pub fn verify_schedule(s: &BootstrapSchedule) -> Verification {
    let mut c = Checks(Vec::new());
    let p = q(s.p);
    let n = int(s.n as i64);
    let (beta, mu) = exponents(s.n, &p);
    let p1 = &p + BigRational::one();
    let gamma = q(s.gamma);
    let (eps, delta) = (q(s.eps), q(s.delta));

    c.flag("1 < p", p > BigRational::one());
    c.push("μ > 0", mu.clone(), true);
    c.push("γ >= μ", &gamma - &mu, false);
    c.push("γ <= (p+1)β", &p1 * &beta - &gamma, false);
    c.flag("L >= 1", s.l >= 1);
    c.flag("ξ, α, ω have length L", s.xi.len() == s.l && s.alpha.len() == s.l && s.omega.len() == s.l);
    if s.l == 0 || s.xi.len() != s.l || s.alpha.len() != s.l || s.omega.len() != s.l {
        return Verification::new(c.0);
    }
    c.push("(μ/(p+1))(2p/(p+1))^L > β", length_lhs(s.l, &p, &mu) - &beta, true);
    if s.l > 1 {
        c.push("L is minimal", &beta - length_lhs(s.l - 1, &p, &mu), false);
    }
    c.push("ε > 0", eps.clone(), true);
    c.push("δ > 0", delta.clone(), true);

    let xi: Vec<BigRational> = s.xi.iter().map(|x| q(*x)).collect();
    let alpha: Vec<BigRational> = s.alpha.iter().map(|x| q(*x)).collect();
    let omega: Vec<BigRational> = s.omega.iter().map(|x| q(*x)).collect();
    c.push("(p+1)ξ_1 <= γ - δ", &gamma - &delta - &p1 * &xi[0], false);
    for l in 0..s.l {
        let i = l + 1;
        let next = if l + 1 < s.l { xi[l + 1].clone() } else { beta.clone() };
        c.push(format!("ξ_{i} <= ξ_{}", i + 1), &next - &xi[l], false);
        c.push(format!("α_{i} >= 0"), alpha[l].clone(), false);
        c.push(format!("α_{i} < ξ_{i}/β"), &xi[l] / &beta - &alpha[l], true);
        c.push(
            format!("ξ_{i}μ/β > γ - α_{i} + ε - ω_{i}"),
            &xi[l] * &mu / &beta - (&gamma - &alpha[l] + &eps - &omega[l]),
            true,
        );
        c.push(
            format!("ω_{i} - nα_{i}/2 <= γ - δ - (p+1)ξ_{}", i + 1),
            &gamma - &delta - &p1 * &next - (&omega[l] - &n * &alpha[l] / int(2)),
            false,
        );
    }
    Verification::new(c.0)
}

/// Verifies every rung of a ladder and the ladder's own conditions.
pub fn verify_ladder(ladder: &Ladder) -> Verification {
    let mut c = Checks(Vec::new());
    let p = q(ladder.p);
    let (beta, mu) = exponents(ladder.n, &p);
    let top = (&p + BigRational::one()) * &beta;
    let g: Vec<BigRational> = ladder.gammas.iter().map(|x| q(*x)).collect();
    c.flag("ladder has a rung", !g.is_empty());
    c.flag("one schedule per step", ladder.schedules.len() + 1 == g.len());
    if g.is_empty() || ladder.schedules.len() + 1 != g.len() {
        return Verification::new(c.0);
    }
    // γ_M is the float nearest (p+1)β
    let ulp = q(f64::EPSILON) * top.abs();
    c.push("γ_M = (p+1)β", ulp - (&g[0] - &top).abs(), false);
    c.push("γ_1 < μ", &mu - &g[g.len() - 1], true);
    for (m, sched) in ladder.schedules.iter().enumerate() {
        c.flag(format!("rung {m}: schedule at γ"), q(sched.gamma) == g[m] && sched.n == ladder.n && sched.p == ladder.p);
        c.push(format!("rung {m}: γ_m >= μ"), &g[m] - &mu, false);
        c.push(format!("rung {m}: decreasing"), &g[m] - &g[m + 1], true);
        c.push(format!("rung {m}: step within δ/2"), &g[m + 1] - (&g[m] - q(sched.delta) / int(2)), false);
        for check in verify_schedule(sched).checks {
            c.0.push(ExactCheck { label: format!("rung {m}: {}", check.label), ..check });
        }
    }
    Verification::new(c.0)
}

/// Schedule plus both the float and the exact inequality tables.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub schedule: BootstrapSchedule,
    pub float_slacks: Vec<liouville_core::machinery::Inequality>,
    pub exact: Verification,
}

impl Certificate {
    pub fn new(schedule: BootstrapSchedule) -> Self {
        let float_slacks = schedule.inequalities();
        let exact = verify_schedule(&schedule);
        Self { schedule, float_slacks, exact }
    }
}
