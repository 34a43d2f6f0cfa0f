//! Exact checks of the r-th moment identity for the bias statistic, the
//! bad-message bound derived from it, the count of tuples whose parity
//! matrix annihilates the inner generator, and the Poissonization
//! product law.
//!
//! Tuples are ordered sequences of `r` pairs `(alpha, j)` with `alpha` an
//! outer coordinate and `j` an index into `omega`. Enumeration packs each
//! pair into a word (`u128`) whose XOR over a tuple vanishes exactly when
//! the tuple is counted, so the inner loop is one XOR per step.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::certify::{check_nice, d_pmf, soft_bernoulli_p};
use crate::codes::ConcatCode;
use crate::error::{check_budget, sat_pow, Error, Result};
use crate::exec::Exec;
use crate::field::FieldElement;

/// Ordered tuple of `(alpha, omega index)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TupleSeq {
    pub entries: Vec<(usize, usize)>,
}

impl TupleSeq {
    pub fn new(entries: Vec<(usize, usize)>) -> Self {
        TupleSeq { entries }
    }

    pub fn r(&self) -> usize {
        self.entries.len()
    }

    fn validate(&self, n: usize, n0: usize) -> Result<()> {
        for &(a, j) in &self.entries {
            if a >= n || j >= n0 {
                return Err(Error::InvalidParameter(format!(
                    "pair ({a}, {j}) out of range for n={n}, |omega|={n0}"
                )));
            }
        }
        Ok(())
    }

    /// `V[alpha][j]`: multiplicity of each pair.
    pub fn counts(&self, n: usize, n0: usize) -> Result<Vec<Vec<u32>>> {
        self.validate(n, n0)?;
        let mut v = vec![vec![0u32; n0]; n];
        for &(a, j) in &self.entries {
            v[a][j] += 1;
        }
        Ok(v)
    }

    /// `B = V mod 2`.
    pub fn parity(&self, n: usize, n0: usize) -> Result<crate::binlin::BitMatrix> {
        let v = self.counts(n, n0)?;
        let rows: Vec<Vec<u8>> = v
            .iter()
            .map(|row| row.iter().map(|&c| (c & 1) as u8).collect())
            .collect();
        if n == 0 {
            return Ok(crate::binlin::BitMatrix::zeros(0, n0));
        }
        crate::binlin::BitMatrix::from_bit_rows(&rows)
    }
}

/// `(g_V)_alpha = sum of omega[j]` over the pairs at `alpha`.
pub fn g_of_tuple(cc: &ConcatCode, v: &TupleSeq) -> Result<Vec<FieldElement>> {
    let n = cc.outer().n();
    let omega = cc.omega();
    v.validate(n, omega.len())?;
    let mut g = vec![FieldElement::ZERO; n];
    for &(a, j) in &v.entries {
        g[a] += omega[j];
    }
    Ok(g)
}

fn q_pow_k(cc: &ConcatCode) -> BigInt {
    BigInt::from(cc.ctx().order()).pow(cc.outer().k() as u32)
}

fn message_budget(cc: &ConcatCode, budget: u128) -> Result<u64> {
    let total = cc.outer().num_messages();
    check_budget(total, budget)?;
    Ok(total as u64)
}

fn tuple_budget(cc: &ConcatCode, r: u32, budget: u128) -> Result<()> {
    check_budget(sat_pow(cc.big_n() as u128, r), budget)
}

/// Biases `X_m` for all nonzero messages in index order.
fn all_biases(cc: &ConcatCode, total: u64, exec: Exec) -> Vec<i64> {
    let outer = cc.outer();
    exec.map_chunks(total - 1, |range| {
        range
            .map(|i| {
                cc.bias(&outer.message_from_index(i + 1))
                    .expect("valid message")
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

pub fn moment_direct(cc: &ConcatCode, r: u32, budget: u128) -> Result<BigRational> {
    moment_direct_with(cc, r, budget, Exec::default())
}

/// `E_{m != 0}[X_m^r]` by enumerating messages.
pub fn moment_direct_with(
    cc: &ConcatCode,
    r: u32,
    budget: u128,
    exec: Exec,
) -> Result<BigRational> {
    let total = message_budget(cc, budget)?;
    let sum: BigInt = all_biases(cc, total, exec)
        .into_iter()
        .map(|x| BigInt::from(x).pow(r))
        .sum();
    Ok(BigRational::new(sum, BigInt::from(total - 1)))
}

/// Counts ordered `r`-tuples over `words` whose XOR is zero. Shards by the
/// leading digit; the last digit is resolved by a multiplicity lookup.
fn count_zero_xor(words: &[u128], r: u32, exec: Exec) -> u64 {
    if r == 0 {
        return 1;
    }
    let mut mult: HashMap<u128, u64> = HashMap::new();
    for &w in words {
        *mult.entry(w).or_insert(0) += 1;
    }
    if r == 1 {
        return mult.get(&0).copied().unwrap_or(0);
    }
    fn dfs(words: &[u128], mult: &HashMap<u128, u64>, acc: u128, left: u32) -> u64 {
        if left == 1 {
            return mult.get(&acc).copied().unwrap_or(0);
        }
        words
            .iter()
            .map(|&w| dfs(words, mult, acc ^ w, left - 1))
            .sum()
    }
    exec.map(words.len(), |lead| dfs(words, &mult, words[lead], r - 1))
        .into_iter()
        .sum()
}

/// Pair words whose XOR over a tuple is the outer syndrome `G g_V`.
fn syndrome_words(cc: &ConcatCode) -> Result<Vec<u128>> {
    let ctx = cc.ctx();
    let k0 = ctx.k0();
    let gen = cc.outer().gen();
    let k = cc.outer().k();
    if k as u32 * k0 > 128 {
        return Err(Error::InvalidParameter(format!(
            "syndrome of {} bits exceeds 128",
            k as u32 * k0
        )));
    }
    let mut words = Vec::with_capacity(cc.big_n());
    for a in 0..cc.outer().n() {
        for &b in cc.omega() {
            let w = (0..k).fold(0u128, |acc, i| {
                acc | (ctx.mul(gen.get(i, a), b).value() as u128) << (i as u32 * k0)
            });
            words.push(w);
        }
    }
    Ok(words)
}

/// Number of ordered `r`-tuples `V` with `g_V` in the outer dual.
pub fn dual_tuple_count(cc: &ConcatCode, r: u32, budget: u128, exec: Exec) -> Result<u64> {
    tuple_budget(cc, r, budget)?;
    Ok(count_zero_xor(&syndrome_words(cc)?, r, exec))
}

/// `sum_V (q^k 1[g_V in dual] - 1)`.
fn dual_sum(cc: &ConcatCode, r: u32, budget: u128, exec: Exec) -> Result<BigInt> {
    let count = dual_tuple_count(cc, r, budget, exec)?;
    Ok(q_pow_k(cc) * BigInt::from(count) - BigInt::from(cc.big_n()).pow(r))
}

pub fn moment_dual(cc: &ConcatCode, r: u32, budget: u128) -> Result<BigRational> {
    moment_dual_with(cc, r, budget, Exec::default())
}

/// `(1/(q^k - 1)) sum_V (q^k 1[g_V in dual] - 1)` by tuple enumeration.
pub fn moment_dual_with(cc: &ConcatCode, r: u32, budget: u128, exec: Exec) -> Result<BigRational> {
    let s = dual_sum(cc, r, budget, exec)?;
    Ok(BigRational::new(s, q_pow_k(cc) - 1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BadBound {
    pub b_r: BigRational,
    pub bad_count: u64,
    /// `c * eps * N` with `eps = k/n`.
    pub cutoff: BigRational,
}

impl BadBound {
    pub fn b_r_f64(&self) -> f64 {
        ratio_to_f64(&self.b_r)
    }

    pub fn holds(&self) -> bool {
        BigRational::from_integer(BigInt::from(self.bad_count)) <= self.b_r
    }
}

pub fn ratio_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn bad_bound(cc: &ConcatCode, r: u32, c: f64, budget: u128) -> Result<BadBound> {
    bad_bound_with(cc, r, c, budget, Exec::default())
}

/// Messages with `|X_m| >= c eps N` are bad; `c` enters as its exact binary
/// value so the cutoff comparison is exact.
pub fn bad_bound_with(
    cc: &ConcatCode,
    r: u32,
    c: f64,
    budget: u128,
    exec: Exec,
) -> Result<BadBound> {
    if r % 2 == 1 {
        return Err(Error::InvalidParameter(format!("r={r} must be even")));
    }
    let c = BigRational::from_float(c)
        .filter(|c| c.is_positive())
        .ok_or_else(|| Error::InvalidParameter(format!("c={c} must be positive and finite")))?;
    let total = message_budget(cc, budget)?;
    let s = dual_sum(cc, r, budget, exec)?;
    let n0 = cc.inner().n();
    let cutoff = c * BigRational::from_integer(BigInt::from(cc.outer().k() * n0));
    let qk = q_pow_k(cc);
    let b_r = BigRational::new(qk.clone(), qk - 1) * BigRational::from_integer(s)
        / num_traits::pow(cutoff.clone(), r as usize);
    let bad_count = all_biases(cc, total, exec)
        .into_iter()
        .filter(|&x| BigRational::from_integer(BigInt::from(x.abs())) >= cutoff)
        .count() as u64;
    Ok(BadBound {
        b_r,
        bad_count,
        cutoff,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WCount {
    pub r: u32,
    pub count: u64,
    pub bound: f64,
    pub bound_log2: f64,
    /// Inner code passed the niceness check at `tau = 1/sqrt(n0)`.
    pub nice: bool,
}

impl WCount {
    /// `count <= bound`, or vacuously true when the bound is not asserted.
    pub fn holds(&self) -> bool {
        !self.nice || self.count as f64 <= self.bound
    }
}

/// `log2` of `(8N)^r (r/N)^(r/2) 2^(2N/sqrt(n0) + log2 N) max(1, (r e/(eps^2 N))^(r/2))`
/// with `eps = k0/n0`.
pub fn w_bound_log2(big_n: usize, n0: usize, k0: usize, r: u32) -> f64 {
    let nn = big_n as f64;
    let rr = r as f64;
    let eps = k0 as f64 / n0 as f64;
    let mut l = rr * (8.0 * nn).log2() + 2.0 * nn / (n0 as f64).sqrt() + nn.log2();
    if r > 0 {
        l += rr / 2.0 * (rr / nn).log2();
        l += (rr / 2.0 * (rr * std::f64::consts::E / (eps * eps * nn)).log2()).max(0.0);
    }
    l
}

pub fn count_w(cc: &ConcatCode, r: u32, budget: u128) -> Result<WCount> {
    count_w_with(cc, r, budget, Exec::default())
}

/// Counts tuples with `B(V) G0 = 0`, i.e. `g_V = 0`.
pub fn count_w_with(cc: &ConcatCode, r: u32, budget: u128, exec: Exec) -> Result<WCount> {
    tuple_budget(cc, r, budget)?;
    let k0 = cc.ctx().k0();
    let n = cc.outer().n();
    if n as u32 * k0 > 128 {
        return Err(Error::InvalidParameter(format!(
            "tuple image of {} bits exceeds 128",
            n as u32 * k0
        )));
    }
    let ctx = cc.ctx();
    let words: Vec<u128> = (0..n)
        .flat_map(|a| {
            cc.omega()
                .iter()
                .map(move |&b| (ctx.to_coords(b) as u128) << (a as u32 * k0))
        })
        .collect();
    let count = count_zero_xor(&words, r, exec);
    let n0 = cc.inner().n();
    let nice = check_nice(cc.inner(), 1.0 / (n0 as f64).sqrt(), budget)
        .map(|rep| rep.ok)
        .unwrap_or(false);
    let bound_log2 = w_bound_log2(cc.big_n(), n0, k0 as usize, r);
    Ok(WCount {
        r,
        count,
        bound: bound_log2.exp2(),
        bound_log2,
        nice,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonCheck {
    pub gap: f64,
    /// Poisson terms mixed before the tail dropped below `tail_eps`.
    pub terms: usize,
    pub tail: f64,
}

/// Tabulation limit on `q^n` for [`poisson_product_check`].
pub const POISSON_TABLE_LIMIT: u128 = 1 << 20;

pub fn poisson_product_check(cc: &ConcatCode, lambda: f64, tail_eps: f64) -> Result<PoissonCheck> {
    poisson_product_check_with(cc, lambda, tail_eps, Exec::default())
}

/// Compares the law of `g_V` with `r ~ Poisson(lambda N)` and uniform
/// pairs against the product of `d_pmf(omega, p)` over coordinates,
/// `p = (1 - e^(-2 lambda))/2`. Returns the largest pointwise gap.
pub fn poisson_product_check_with(
    cc: &ConcatCode,
    lambda: f64,
    tail_eps: f64,
    exec: Exec,
) -> Result<PoissonCheck> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda={lambda}")));
    }
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(Error::InvalidParameter(format!("tail_eps={tail_eps}")));
    }
    let ctx = cc.ctx();
    let k0 = ctx.k0();
    let n = cc.outer().n();
    let size = sat_pow(ctx.order() as u128, n as u32);
    check_budget(size, POISSON_TABLE_LIMIT)?;
    let size = size as usize;
    let big_n = cc.big_n() as f64;
    let mean = lambda * big_n;
    if mean > 700.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda N = {mean} too large for the Poisson weights"
        )));
    }
    let steps: Vec<usize> = (0..n)
        .flat_map(|a| {
            cc.omega()
                .iter()
                .map(move |b| (b.value() as usize) << (a as u32 * k0))
        })
        .collect();

    let mut cur = vec![0.0; size];
    cur[0] = 1.0;
    let mut weight = (-mean).exp();
    let mut mixed: Vec<f64> = cur.iter().map(|&x| weight * x).collect();
    let mut taken = weight;
    let mut terms = 1;
    while 1.0 - taken >= tail_eps {
        if terms > 100_000 {
            return Err(Error::InvalidParameter(
                "Poisson series did not converge".into(),
            ));
        }
        cur = exec
            .map_chunks(size as u64, |range| {
                range
                    .map(|g| {
                        let g = g as usize;
                        steps.iter().map(|&s| cur[g ^ s]).sum::<f64>() / big_n
                    })
                    .collect::<Vec<f64>>()
            })
            .into_iter()
            .flatten()
            .collect();
        weight *= mean / terms as f64;
        for (m, &c) in mixed.iter_mut().zip(&cur) {
            *m += weight * c;
        }
        taken += weight;
        terms += 1;
    }

    let p = soft_bernoulli_p(lambda, 1.0);
    let coord = d_pmf(ctx.clone(), cc.omega(), p)?;
    let mask = (ctx.order() - 1) as usize;
    let gap = mixed
        .iter()
        .enumerate()
        .map(|(g, &a)| {
            let b: f64 = (0..n)
                .map(|i| coord.probs()[(g >> (i as u32 * k0)) & mask])
                .product();
            (a - b).abs()
        })
        .fold(0.0, f64::max);
    Ok(PoissonCheck {
        gap,
        terms,
        tail: (1.0 - taken).max(0.0),
    })
}

/// Exact rational rendered as `num/den`, or `num` when integral.
pub fn ratio_string(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
