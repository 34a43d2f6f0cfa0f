use serde::{Deserialize, Serialize};

use super::pmf::Pmf;
use crate::codes::{outer_dual_membership, OuterCode};
use crate::error::{check_budget, sat_pow, Error, Result};
use crate::exec::Exec;
use crate::field::FieldElement;
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SoftMode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftReport {
    /// `Pr[x in dual \ {0}]` for `x ~ pmf^n`, exact or estimated.
    pub prob: f64,
    /// `prob * q^k - 1`.
    pub delta: f64,
    pub is_exact: bool,
    /// 95% Wilson interval on `prob` (Monte Carlo only).
    pub ci: Option<(f64, f64)>,
    /// Dual codewords summed, or draws taken.
    pub samples: u64,
}

const Z95: f64 = 1.959_963_984_540_054;

fn wilson(hits: u64, n: u64) -> (f64, f64) {
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

pub fn soft_condition(
    outer: &OuterCode,
    pmf: &Pmf,
    mode: SoftMode,
    budget: u128,
    seed: u64,
) -> Result<SoftReport> {
    soft_condition_with(outer, pmf, mode, budget, seed, Exec::default())
}

/// Exact mode enumerates the `q^(n-k)` dual codewords; Monte Carlo mode
/// takes `budget` draws of `x ~ pmf^n` and tests dual membership.
pub fn soft_condition_with(
    outer: &OuterCode,
    pmf: &Pmf,
    mode: SoftMode,
    budget: u128,
    seed: u64,
    exec: Exec,
) -> Result<SoftReport> {
    if **pmf.ctx() != **outer.ctx() {
        return Err(Error::FieldMismatch(
            "pmf and outer code use different fields".into(),
        ));
    }
    let q = outer.ctx().order() as u128;
    let qk = sat_pow(q, outer.k() as u32) as f64;
    match mode {
        SoftMode::Exact => {
            let total = sat_pow(q, (outer.n() - outer.k()) as u32);
            check_budget(total, budget)?;
            let prob = exact_sum(outer, pmf, total as u64, exec);
            Ok(SoftReport {
                prob,
                delta: prob * qk - 1.0,
                is_exact: true,
                ci: None,
                samples: total as u64,
            })
        }
        SoftMode::MonteCarlo => {
            let draws = budget.clamp(1, u64::MAX as u128) as u64;
            let sampler = pmf.sampler();
            let hits: u64 = exec
                .map_chunks(draws, |range| {
                    let chunk = range.start / crate::exec::CHUNK;
                    let mut rng = rng_from_seed(derive_seed(seed, chunk));
                    let mut x = vec![FieldElement::ZERO; outer.n()];
                    let mut hits = 0u64;
                    for _ in range {
                        for s in x.iter_mut() {
                            *s = sampler.sample(&mut rng);
                        }
                        if x.iter().any(|s| !s.is_zero())
                            && outer_dual_membership(outer, &x).expect("length n")
                        {
                            hits += 1;
                        }
                    }
                    hits
                })
                .into_iter()
                .sum();
            let prob = hits as f64 / draws as f64;
            Ok(SoftReport {
                prob,
                delta: prob * qk - 1.0,
                is_exact: false,
                ci: Some(wilson(hits, draws)),
                samples: draws,
            })
        }
    }
}

/// Sum over nonzero dual codewords, indexed by their coefficient vector in
/// the dual basis; chunk partial sums are added in chunk order.
fn exact_sum(outer: &OuterCode, pmf: &Pmf, total: u64, exec: Exec) -> f64 {
    let ctx = outer.ctx();
    let h = outer.dual_generator();
    let n = outer.n();
    let k0 = ctx.k0();
    let q = ctx.order() as usize;
    // mult[j][a] = a * h_j, as raw values
    let mult: Vec<Vec<Vec<u32>>> = (0..h.num_rows())
        .map(|j| {
            (0..q as u32)
                .map(|a| {
                    h.row(j)
                        .iter()
                        .map(|&x| ctx.mul(FieldElement::from_raw(a), x).value())
                        .collect()
                })
                .collect()
        })
        .collect();
    let probs = pmf.probs();
    let mask = (q - 1) as u64;
    let parts = exec.map_chunks(total, |range| {
        let mut word = vec![0u32; n];
        let mut acc = 0.0;
        for idx in range {
            if idx == 0 {
                continue;
            }
            word.iter_mut().for_each(|w| *w = 0);
            for (j, table) in mult.iter().enumerate() {
                let a = (idx >> (j as u32 * k0)) & mask;
                if a != 0 {
                    for (w, &v) in word.iter_mut().zip(&table[a as usize]) {
                        *w ^= v;
                    }
                }
            }
            acc += word.iter().map(|&w| probs[w as usize]).product::<f64>();
        }
        acc
    });
    parts.into_iter().sum()
}

/// `(c eps / 2)^(lambda + 100 sqrt(lambda))` with `lambda = c_tilde eps^2 N`,
/// returned as `(value, log2 value)`.
pub fn soft_delta_threshold(c: f64, c_tilde: f64, eps: f64, big_n: usize) -> (f64, f64) {
    let lambda = c_tilde * eps * eps * big_n as f64;
    let expo = lambda + 100.0 * lambda.sqrt();
    let log2 = expo * (c * eps / 2.0).log2();
    (log2.exp2(), log2)
}
