//! Binary entropy, its inverse, and the rate-distance reference curves.
//! Logs are base 2 throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateDistancePoint {
    pub rate: f64,
    pub rel_distance: f64,
}

impl RateDistancePoint {
    pub fn new(rate: f64, rel_distance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) || !(0.0..=1.0).contains(&rel_distance) {
            return Err(Error::InvalidParameter(format!(
                "point ({rate}, {rel_distance}) outside [0,1]^2"
            )));
        }
        Ok(RateDistancePoint { rate, rel_distance })
    }
}

pub fn h2(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!(
            "h2 argument {x} outside [0,1]"
        )));
    }
    Ok(h2_unchecked(x))
}

fn h2_unchecked(x: f64) -> f64 {
    if x == 0.0 || x == 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

/// The `x` in `[0, 1/2]` with `h2(x) = y`, by bisection to machine precision.
pub fn h2_inv(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::InvalidParameter(format!(
            "h2_inv argument {y} outside [0,1]"
        )));
    }
    if y == 1.0 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h2_unchecked(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if y - h2_unchecked(lo) <= h2_unchecked(hi) - y {
        lo
    } else {
        hi
    })
}

/// `1 - h2(delta)` on `[0, 1/2]`, zero beyond.
pub fn gv_rate(delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "delta={delta} outside [0,1]"
        )));
    }
    Ok(if delta >= 0.5 {
        0.0
    } else {
        1.0 - h2_unchecked(delta)
    })
}

/// Rate at least `eps^2` and relative distance at least `1/2 - c eps`.
pub fn gv_check(point: RateDistancePoint, epsilon: f64, c: f64) -> bool {
    point.rate >= epsilon * epsilon && point.rel_distance >= 0.5 - c * epsilon
}

const ZYABLOV_GRID: usize = 10_000;

/// `max over delta0 in (delta, 1/2] of (1 - h2(delta0)) (1 - delta/delta0)`.
pub fn zyablov_rate(delta: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "delta={delta} outside [0, 1/2)"
        )));
    }
    if delta == 0.0 {
        return Ok(1.0);
    }
    let f = |d0: f64| (1.0 - h2_unchecked(d0)) * (1.0 - delta / d0);
    let step = (0.5 - delta) / ZYABLOV_GRID as f64;
    let (best_i, _) = (1..=ZYABLOV_GRID)
        .map(|i| (i, f(delta + i as f64 * step)))
        .fold((1, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    // golden-section search on the bracketing cell pair
    let mut a = delta + (best_i as f64 - 1.0) * step;
    let mut b = (delta + (best_i as f64 + 1.0) * step).min(0.5);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if f(x1) < f(x2) {
            a = x1;
        } else {
            b = x2;
        }
    }
    let grid_best = f(delta + best_i as f64 * step);
    Ok(f(0.5 * (a + b)).max(grid_best).max(0.0))
}
