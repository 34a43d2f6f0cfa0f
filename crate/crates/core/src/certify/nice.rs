use serde::{Deserialize, Serialize};

use crate::codes::{weight_distribution_with, BinaryCode};
use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NicenessReport {
    pub tau: f64,
    pub epsilon: f64,
    pub ok: bool,
    /// `(count, bound)` for weights `1..=n0`.
    pub per_weight: Vec<(u64, f64)>,
    /// Largest `count / bound` over all weights.
    pub worst_ratio: f64,
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn check_nice(inner: &BinaryCode, tau: f64, budget: u128) -> Result<NicenessReport> {
    check_nice_with(inner, tau, budget, Exec::default())
}

/// Counts the inner dual codewords of each weight `i` and compares against
/// `C(n0, i) * 2^(-n0 (eps - tau))`.
pub fn check_nice_with(
    inner: &BinaryCode,
    tau: f64,
    budget: u128,
    exec: Exec,
) -> Result<NicenessReport> {
    let n0 = inner.n();
    let eps = inner.rate();
    if !(tau > 0.0 && tau < eps) {
        return Err(Error::InvalidParameter(format!(
            "tau={tau} outside (0, {eps})"
        )));
    }
    let wd = weight_distribution_with(&inner.dual_generator(), budget, exec)?;
    let scale = (-(n0 as f64) * (eps - tau)).exp2();
    let per_weight: Vec<(u64, f64)> = (1..=n0)
        .map(|i| (wd.delta[i], binomial(n0, i) * scale))
        .collect();
    let ok = per_weight.iter().all(|&(c, b)| c as f64 <= b);
    let worst_ratio = per_weight
        .iter()
        .map(|&(c, b)| c as f64 / b)
        .fold(0.0, f64::max);
    Ok(NicenessReport {
        tau,
        epsilon: eps,
        ok,
        per_weight,
        worst_ratio,
    })
}
