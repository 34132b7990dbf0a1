use alloc::vec::Vec;

use super::Trace;
use crate::numeric::{fit_line, golden_section};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum RateError {
    #[error("sup-norm grew by a factor {growth:.3e} in the fit window, at least 100 is needed")]
    InsufficientGrowth { growth: f64 },
    #[error("sup-norm is not monotone in the fit window")]
    NonMonotone,
}

/// Fitted `‖U(t)‖_∞ ≈ A (T - t)^{-β}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BlowupReport {
    pub t_est: f64,
    pub beta_fit: f64,
    /// `log A`.
    pub log_amplitude: f64,
    pub fit_window: (f64, f64),
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub samples: usize,
    pub growth: f64,
}

/// Minimum sup-norm growth across the fit window.
pub const MIN_GROWTH: f64 = 100.0;

/// Fits the blow-up time and rate to the per-step sup-norm history.
///
/// The window is the final stretch where `‖U‖_∞ ≥ ‖U(t_last)‖_∞ / 1000`. For a
/// trial `T = t_last + e^θ`, `log‖U‖_∞` is regressed on `-log(T - t)`; `θ` is
/// chosen by a coarse scan followed by golden-section refinement of the RMS residual.
pub fn fit_blowup_rate(trace: &Trace) -> Result<BlowupReport, RateError> {
    let h = &trace.history;
    let s_final = h.last().map(|p| p.sup_norm).unwrap_or(0.0);
    let threshold = s_final / 1e3;
    let start = h.iter().rposition(|p| p.sup_norm < threshold).map(|i| i + 1).unwrap_or(0);
    let window = &h[start..];
    let growth = if window.is_empty() || !(window[0].sup_norm > 0.0) {
        0.0
    } else {
        s_final / window[0].sup_norm
    };
    if window.len() < 3 || !(growth >= MIN_GROWTH) {
        return Err(RateError::InsufficientGrowth { growth });
    }
    if window.windows(2).any(|w| w[1].sup_norm < w[0].sup_norm * (1.0 - 1e-12)) {
        return Err(RateError::NonMonotone);
    }

    let t: Vec<f64> = window.iter().map(|p| p.t).collect();
    let y: Vec<f64> = window.iter().map(|p| libm::log(p.sup_norm)).collect();
    let t_last = *t.last().unwrap();
    let span = t_last - t[0];
    let mut x = Vec::with_capacity(t.len());
    let mut rms = |theta: f64| -> f64 {
        let big_t = t_last + libm::exp(theta);
        x.clear();
        x.extend(t.iter().map(|ti| -libm::log(big_t - ti)));
        fit_line(&x, &y).map(|f| f.2).unwrap_or(f64::INFINITY)
    };

    let lo = libm::log(span) - 30.0;
    let hi = libm::log(span) + 5.0;
    let n_scan = 351;
    let step = (hi - lo) / (n_scan - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..n_scan {
        let r = rms(lo + step * i as f64);
        if r < best.1 {
            best = (i, r);
        }
    }
    let a = lo + step * best.0.saturating_sub(1) as f64;
    let b = lo + step * (best.0 + 1).min(n_scan - 1) as f64;
    let theta = golden_section(&mut rms, a, b, 80);

    let t_est = t_last + libm::exp(theta);
    let x: Vec<f64> = t.iter().map(|ti| -libm::log(t_est - ti)).collect();
    let (c0, c1, residual) = fit_line(&x, &y).ok_or(RateError::InsufficientGrowth { growth })?;
    Ok(BlowupReport {
        t_est,
        beta_fit: c1,
        log_amplitude: c0,
        fit_window: (t[0], t_last),
        residual,
        samples: t.len(),
        growth,
    })
}
