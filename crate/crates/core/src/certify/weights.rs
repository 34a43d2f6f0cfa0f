use serde::{Deserialize, Serialize};

use crate::codes::WeightDistribution;
use crate::error::{Error, Result};

/// Prefix statistics of a weight distribution at threshold `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightStats {
    pub t: u128,
    pub j_star: usize,
    pub alpha: f64,
    /// Mean weight of the prefix divided by `j_star`; 0 when `j_star = 0`.
    pub avg_weight_ratio: f64,
    pub next_slab_ratio: f64,
}

pub fn weight_stats(delta: &WeightDistribution, t: u128) -> Result<WeightStats> {
    let total = delta.total();
    if t < 1 || t > total {
        return Err(Error::InvalidParameter(format!(
            "T={t} outside [1, {total}]"
        )));
    }
    let n = delta.length();
    let mut prefix: u128 = 0;
    let mut moment: u128 = 0;
    let mut j_star = 0;
    for (j, &d) in delta.delta.iter().enumerate() {
        prefix += d as u128;
        moment += j as u128 * d as u128;
        if prefix >= t {
            j_star = j;
            break;
        }
    }
    let avg_weight_ratio = if j_star == 0 {
        0.0
    } else {
        moment as f64 / (j_star as f64 * prefix as f64)
    };
    let next = delta.delta.get(j_star + 1).copied().unwrap_or(0);
    Ok(WeightStats {
        t,
        j_star,
        alpha: if n == 0 {
            0.0
        } else {
            j_star as f64 / n as f64
        },
        avg_weight_ratio,
        next_slab_ratio: next as f64 / prefix as f64,
    })
}
