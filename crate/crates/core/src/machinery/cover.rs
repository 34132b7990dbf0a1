use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::MachineryError;

/// `C(M) = 8n e^{M+1}`.
pub fn c_of_m(n: u32, m: f64) -> f64 {
    8.0 * n as f64 * libm::exp(m + 1.0)
}

/// `R_k = √(8n log k)`.
pub fn r_k(n: u32, k: f64) -> f64 {
    libm::sqrt(8.0 * n as f64 * libm::log(k))
}

/// Centres of closed balls of radius `r_small` covering the closed ball of
/// radius `r_big` about the origin, for `n <= 3`.
///
/// Centres sit on a cubic lattice through the origin with spacing `2r/√n`, so
/// each lattice cell lies inside the ball around its centre. Cells that miss
/// the big ball are dropped. The origin is always the first centre.
pub fn cover_ball(r_big: f64, r_small: f64, n: u32) -> Result<Vec<Vec<f64>>, MachineryError> {
    if !(1..=3).contains(&n) {
        return Err(MachineryError::InvalidInput(format!("dimension {n} not in 1..=3")));
    }
    if !(r_small > 0.0 && r_big >= 0.0 && r_big.is_finite()) {
        return Err(MachineryError::InvalidInput(format!("radii R = {r_big}, r = {r_small}")));
    }
    let dim = n as usize;
    if r_big <= r_small {
        return Ok(vec![vec![0.0; dim]]);
    }
    let h = 2.0 * r_small / libm::sqrt(n as f64);
    let reach = libm::ceil(r_big / h) as i64 + 1;
    let side = (2 * reach + 1) as usize;
    let total = side.pow(n);
    let mut out = vec![vec![0.0; dim]];
    let mut idx = vec![0i64; dim];
    for flat in 0..total {
        let mut rem = flat;
        for d in idx.iter_mut() {
            *d = (rem % side) as i64 - reach;
            rem /= side;
        }
        if idx.iter().all(|&j| j == 0) {
            continue;
        }
        // squared distance from the origin to the cell
        let gap2: f64 = idx
            .iter()
            .map(|&j| {
                let g = ((j.abs() as f64) - 0.5).max(0.0) * h;
                g * g
            })
            .sum();
        if gap2 < r_big * r_big {
            out.push(idx.iter().map(|&j| j as f64 * h).collect());
        }
    }
    Ok(out)
}
