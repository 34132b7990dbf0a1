//! Small numerical kernels shared across modules.

use alloc::vec::Vec;

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n).map(|i| if i + 1 == n { b } else { a + h * i as f64 }).collect()
        }
    }
}

/// `|u|^a u`, with the value 0 at `u = 0` for every `a > -1`.
#[inline]
pub fn signed_pow(u: f64, a: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        libm::pow(u.abs(), a) * u
    }
}

/// `|u|^a`, with `0^a = 0` for `a > 0`.
#[inline]
pub fn abs_pow(u: f64, a: f64) -> f64 {
    if u == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        libm::pow(u.abs(), a)
    }
}

pub fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the tridiagonal system `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`
/// in place (`rhs` is overwritten with the solution). `scratch` must have the same length.
///
/// Thomas algorithm; stable for the diagonally dominant matrices produced by
/// implicit diffusion steps.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) {
    let n = diag.len();
    if n == 0 {
        return;
    }
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n && scratch.len() == n);
    let mut beta = diag[0];
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
}

/// Trapezoid rule for samples `y` on the abscissae `x`.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Piecewise-linear interpolation of `(x, y)` at `at`; `x` must be increasing.
/// Values outside the range are clamped to the end samples.
pub fn interp_linear(x: &[f64], y: &[f64], at: f64) -> f64 {
    let n = x.len();
    if n == 0 {
        return f64::NAN;
    }
    if at <= x[0] {
        return y[0];
    }
    if at >= x[n - 1] {
        return y[n - 1];
    }
    let j = x.partition_point(|&v| v <= at).max(1);
    let (x0, x1) = (x[j - 1], x[j]);
    let w = (at - x0) / (x1 - x0);
    y[j - 1] * (1.0 - w) + y[j] * w
}

/// Four-point Lagrange interpolation of `(x, y)` at `at`; `x` increasing with
/// at least four samples. Values outside the range are clamped.
pub fn interp_cubic(x: &[f64], y: &[f64], at: f64) -> f64 {
    let n = x.len();
    if n < 4 {
        return interp_linear(x, y, at);
    }
    if at <= x[0] {
        return y[0];
    }
    if at >= x[n - 1] {
        return y[n - 1];
    }
    let j = x.partition_point(|&v| v <= at).clamp(2, n - 2);
    let s = j - 2;
    let mut total = 0.0;
    for a in s..s + 4 {
        let mut w = 1.0;
        for b in s..s + 4 {
            if a != b {
                w *= (at - x[b]) / (x[a] - x[b]);
            }
        }
        total += w * y[a];
    }
    total
}

/// Integral over `[a, b]` of the piecewise-linear interpolant of `(x, y)`.
/// `[a, b]` must lie inside `[x[0], x[last]]`.
pub fn integrate_linear(x: &[f64], y: &[f64], a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut total = 0.0;
    let mut left = a;
    let mut y_left = interp_linear(x, y, a);
    let start = x.partition_point(|&v| v <= a);
    for (&xi, &yi) in x.iter().zip(y).skip(start) {
        if xi >= b {
            break;
        }
        total += 0.5 * (xi - left) * (y_left + yi);
        left = xi;
        y_left = yi;
    }
    total + 0.5 * (b - left) * (y_left + interp_linear(x, y, b))
}

/// Derivative at `x[at]` (`at` in 0..3) of the quadratic through three points.
pub fn lagrange_derivative(x: [f64; 3], y: [f64; 3], at: usize) -> f64 {
    let t = x[at];
    let d0 = ((t - x[1]) + (t - x[2])) / ((x[0] - x[1]) * (x[0] - x[2]));
    let d1 = ((t - x[0]) + (t - x[2])) / ((x[1] - x[0]) * (x[1] - x[2]));
    let d2 = ((t - x[0]) + (t - x[1])) / ((x[2] - x[0]) * (x[2] - x[1]));
    d0 * y[0] + d1 * y[1] + d2 * y[2]
}

/// Second-order derivative estimate of `y(x)` at every sample.
pub fn gradient(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    match n {
        0 => Vec::new(),
        1 => alloc::vec![0.0],
        2 => {
            let d = (y[1] - y[0]) / (x[1] - x[0]);
            alloc::vec![d, d]
        }
        _ => (0..n)
            .map(|i| {
                let (j, at) = if i == 0 {
                    (0, 0)
                } else if i == n - 1 {
                    (n - 3, 2)
                } else {
                    (i - 1, 1)
                };
                lagrange_derivative([x[j], x[j + 1], x[j + 2]], [y[j], y[j + 1], y[j + 2]], at)
            })
            .collect(),
    }
}

/// Surface area of the unit sphere in `R^dim` (`2` for `dim = 1`).
pub fn sphere_area(dim: u32) -> f64 {
    use core::f64::consts::PI;
    match dim {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        d => 2.0 * PI * sphere_area(d - 2) / (d as f64 - 2.0),
    }
}

/// `∫_R^∞ r^k e^{-r²/4} dr` for `R >= 0`, by the exact recurrence
/// `I_k = 2 R^{k-1} e^{-R²/4} + 2(k-1) I_{k-2}`.
pub fn gaussian_tail_moment(k: u32, radius: f64) -> f64 {
    let g = libm::exp(-radius * radius / 4.0);
    match k {
        0 => libm::sqrt(core::f64::consts::PI) * libm::erfc(radius / 2.0),
        1 => 2.0 * g,
        _ => {
            2.0 * libm::pow(radius, (k - 1) as f64) * g
                + 2.0 * (k - 1) as f64 * gaussian_tail_moment(k - 2, radius)
        }
    }
}

/// Gaussian weight `∫_{|y|>R} e^{-|y|²/4} dy` in `R^dim`.
pub fn gaussian_tail_mass(dim: u32, radius: f64) -> f64 {
    sphere_area(dim) * gaussian_tail_moment(dim.saturating_sub(1), radius)
}

/// Ordinary least squares `y ≈ c0 + c1 x`; returns `(c0, c1, rms residual)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    Some((intercept, slope, libm::sqrt(ss / nf)))
}

/// Minimises a unimodal function on `[a, b]` by golden-section search.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let ratio = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
