//! Inner, outer and concatenated codes; the derived multiset of inner
//! generator columns; the bias statistic; weight distributions and minimum
//! distance.
//!
//! Generators multiply messages on the left everywhere: a binary inner code
//! has a `k0 x n0` generator and encodes `x` as `x * G`.

use std::ops::Range;
use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::binlin::{BitMatrix, BitVector, FieldMatrix, Side};
use crate::error::{check_budget, Error, Result};
use crate::exec::Exec;
use crate::field::{FieldCtx, FieldElement};
use crate::rng::rng_from_seed;

/// Default exhaustive enumeration budget (codewords).
pub const DEFAULT_BUDGET: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryCode {
    gen: BitMatrix,
}

impl BinaryCode {
    pub fn new(gen: BitMatrix) -> Result<Self> {
        let k = gen.num_rows();
        if k == 0 || gen.rank() != k {
            return Err(Error::InvalidParameter(format!(
                "generator has rank {} but {} rows",
                gen.rank(),
                k
            )));
        }
        Ok(BinaryCode { gen })
    }

    pub fn repetition(n: usize) -> Self {
        BinaryCode {
            gen: BitMatrix::from_bit_rows(&[vec![1; n]]).expect("one row"),
        }
    }

    pub fn full_space(n: usize) -> Self {
        BinaryCode {
            gen: BitMatrix::identity(n),
        }
    }

    pub fn random(n: usize, k: usize, seed: u64) -> Result<Self> {
        Ok(BinaryCode {
            gen: crate::binlin::sample_binary_code(n, k, seed)?,
        })
    }

    pub fn gen(&self) -> &BitMatrix {
        &self.gen
    }

    pub fn n(&self) -> usize {
        self.gen.num_cols()
    }

    pub fn k(&self) -> usize {
        self.gen.num_rows()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    /// Parity-check rows: a basis of the dual code.
    pub fn dual_generator(&self) -> BitMatrix {
        self.gen.nullspace_basis(Side::Right)
    }

    pub fn encode(&self, msg: &BitVector) -> BitVector {
        self.gen.mul_left(msg)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OuterCode {
    gen: FieldMatrix,
}

impl OuterCode {
    pub fn new(gen: FieldMatrix) -> Result<Self> {
        let k = gen.num_rows();
        if k == 0 || gen.rank() != k {
            return Err(Error::InvalidParameter(format!(
                "outer generator has rank {} but {} rows",
                gen.rank(),
                k
            )));
        }
        Ok(OuterCode { gen })
    }

    pub fn random(ctx: Arc<FieldCtx>, n: usize, k: usize, seed: u64) -> Result<Self> {
        Ok(OuterCode {
            gen: crate::binlin::sample_field_code(ctx, n, k, seed)?,
        })
    }

    pub fn full_space(ctx: Arc<FieldCtx>, n: usize) -> Self {
        OuterCode {
            gen: FieldMatrix::identity(ctx, n),
        }
    }

    pub fn repetition(ctx: Arc<FieldCtx>, n: usize) -> Self {
        let row = vec![FieldElement::ONE; n];
        OuterCode {
            gen: FieldMatrix::from_rows(ctx, &[row]).expect("one row"),
        }
    }

    pub fn gen(&self) -> &FieldMatrix {
        &self.gen
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.gen.ctx()
    }

    pub fn n(&self) -> usize {
        self.gen.num_cols()
    }

    pub fn k(&self) -> usize {
        self.gen.num_rows()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    /// Number of messages `q^k`, saturating.
    pub fn num_messages(&self) -> u128 {
        crate::error::sat_pow(self.ctx().order() as u128, self.k() as u32)
    }

    pub fn encode(&self, m: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if m.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                got: m.len(),
            });
        }
        for e in m {
            self.ctx().element(e.value())?;
        }
        Ok(self.gen.mul_left(m))
    }

    /// Message with index `idx`: symbol `i` takes bits `i*k0 .. (i+1)*k0`.
    pub fn message_from_index(&self, idx: u64) -> Vec<FieldElement> {
        let k0 = self.ctx().k0();
        let mask = (1u64 << k0) - 1;
        (0..self.k())
            .map(|i| FieldElement::from_raw(((idx >> (i as u32 * k0)) & mask) as u32))
            .collect()
    }

    pub fn dual_generator(&self) -> FieldMatrix {
        self.gen.nullspace_basis(Side::Right)
    }
}

/// `true` iff `x` is orthogonal to every generator row, i.e. `x` lies in
/// the dual of the outer code.
pub fn outer_dual_membership(outer: &OuterCode, x: &[FieldElement]) -> Result<bool> {
    if x.len() != outer.n() {
        return Err(Error::DimensionMismatch {
            expected: outer.n(),
            got: x.len(),
        });
    }
    Ok(outer.gen.mul_right(x).iter().all(|e| e.is_zero()))
}

/// `C_out ∘ C_in` with the ordered multiset `omega` of inner generator
/// columns (rows of the `n0 x k0` generator), identified into GF(q).
#[derive(Clone, Debug)]
pub struct ConcatCode {
    outer: OuterCode,
    inner: BinaryCode,
    omega: Vec<FieldElement>,
    /// `omega` in self-dual coordinates.
    omega_coords: Vec<u32>,
}

impl ConcatCode {
    pub fn new(outer: OuterCode, inner: BinaryCode) -> Result<Self> {
        let k0 = outer.ctx().k0() as usize;
        if inner.k() != k0 {
            return Err(Error::FieldMismatch(format!(
                "inner dimension {} does not match outer alphabet GF(2^{k0})",
                inner.k()
            )));
        }
        let omega_coords: Vec<u32> = (0..inner.n())
            .map(|j| {
                (0..k0)
                    .filter(|&t| inner.gen().get(t, j))
                    .fold(0u32, |acc, t| acc | 1 << t)
            })
            .collect();
        let omega = omega_coords
            .iter()
            .map(|&c| outer.ctx().from_coords(c))
            .collect();
        Ok(ConcatCode {
            outer,
            inner,
            omega,
            omega_coords,
        })
    }

    pub fn outer(&self) -> &OuterCode {
        &self.outer
    }

    pub fn inner(&self) -> &BinaryCode {
        &self.inner
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.outer.ctx()
    }

    pub fn omega(&self) -> &[FieldElement] {
        &self.omega
    }

    /// Total length `N = n * n0`.
    pub fn big_n(&self) -> usize {
        self.outer.n() * self.inner.n()
    }

    /// Total dimension `K = k * k0`.
    pub fn big_k(&self) -> usize {
        self.outer.k() * self.inner.k()
    }

    pub fn rate(&self) -> f64 {
        self.big_k() as f64 / self.big_n() as f64
    }

    /// Inner encoding of one outer symbol.
    pub fn encode_symbol(&self, c: FieldElement) -> BitVector {
        let coords = self.ctx().to_coords(c);
        let mut out = BitVector::zeros(self.inner.n());
        for (t, row) in self.inner.gen().rows().iter().enumerate() {
            if coords >> t & 1 == 1 {
                out.xor_assign(row);
            }
        }
        out
    }

    pub fn encode_codeword(&self, c: &[FieldElement]) -> BitVector {
        let n0 = self.inner.n();
        let mut out = BitVector::zeros(self.big_n());
        for (a, &sym) in c.iter().enumerate() {
            let block = self.encode_symbol(sym);
            for j in 0..n0 {
                if block.get(j) {
                    out.set(a * n0 + j, true);
                }
            }
        }
        out
    }

    pub fn encode_concat(&self, m: &[FieldElement]) -> Result<BitVector> {
        Ok(self.encode_codeword(&self.outer.encode(m)?))
    }

    /// `sum_a sum_{b in omega} (-1)^<c_a, b>` for an outer codeword `c`.
    pub fn bias_of_codeword(&self, c: &[FieldElement]) -> i64 {
        let ctx = self.ctx();
        c.iter()
            .map(|&sym| {
                let x = ctx.to_coords(sym);
                self.omega_coords
                    .iter()
                    .map(|&b| {
                        if (x & b).count_ones() & 1 == 0 {
                            1i64
                        } else {
                            -1
                        }
                    })
                    .sum::<i64>()
            })
            .sum()
    }

    /// Bias `X_m`: zeros minus ones of the concatenated codeword of `m`.
    pub fn bias(&self, m: &[FieldElement]) -> Result<i64> {
        Ok(self.bias_of_codeword(&self.outer.encode(m)?))
    }
}

/// Exact weight enumerator `delta[j]` = number of codewords of weight `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightDistribution {
    pub delta: Vec<u64>,
}

impl WeightDistribution {
    pub fn length(&self) -> usize {
        self.delta.len() - 1
    }

    pub fn total(&self) -> u128 {
        self.delta.iter().map(|&d| d as u128).sum()
    }

    /// Smallest nonzero weight, if any nonzero codeword exists.
    pub fn min_nonzero_weight(&self) -> Option<usize> {
        self.delta
            .iter()
            .skip(1)
            .position(|&d| d > 0)
            .map(|j| j + 1)
    }

    fn merge(&mut self, other: &WeightDistribution) {
        for (a, b) in self.delta.iter_mut().zip(&other.delta) {
            *a += b;
        }
    }
}

/// A binary linear code given by an F_2 generator matrix.
pub trait LinearCode {
    fn binary_generator(&self) -> BitMatrix;
}

impl LinearCode for BinaryCode {
    fn binary_generator(&self) -> BitMatrix {
        self.gen.clone()
    }
}

impl LinearCode for BitMatrix {
    fn binary_generator(&self) -> BitMatrix {
        self.clone()
    }
}

impl LinearCode for ConcatCode {
    /// Row `i*k0 + t` encodes the message whose symbol `i` is `x^t`, so row
    /// order matches [`OuterCode::message_from_index`].
    fn binary_generator(&self) -> BitMatrix {
        let k0 = self.ctx().k0();
        let rows = (0..self.outer.k())
            .flat_map(|i| (0..k0).map(move |t| (i, t)))
            .map(|(i, t)| {
                let mut m = vec![FieldElement::ZERO; self.outer.k()];
                m[i] = FieldElement::from_raw(1 << t);
                self.encode_concat(&m).expect("valid message")
            })
            .collect();
        BitMatrix::from_rows(self.big_n(), rows).expect("consistent length")
    }
}

fn gray_span(gen: &BitMatrix, mask: u64) -> BitVector {
    let mut acc = BitVector::zeros(gen.num_cols());
    for (i, row) in gen.rows().iter().enumerate() {
        if mask >> i & 1 == 1 {
            acc.xor_assign(row);
        }
    }
    acc
}

/// Weight counts of the codewords indexed by Gray-code positions in `range`.
/// Shards over disjoint ranges sum to the full distribution.
pub fn weight_distribution_range(gen: &BitMatrix, range: Range<u64>) -> WeightDistribution {
    let mut delta = vec![0u64; gen.num_cols() + 1];
    if range.is_empty() {
        return WeightDistribution { delta };
    }
    let mut word = gray_span(gen, range.start ^ (range.start >> 1));
    if gen.num_cols() <= 64 {
        let rows: Vec<u64> = gen
            .rows()
            .iter()
            .map(|r| r.words().first().copied().unwrap_or(0))
            .collect();
        let mut w = word.words().first().copied().unwrap_or(0);
        delta[w.count_ones() as usize] += 1;
        for i in range.start + 1..range.end {
            w ^= rows[i.trailing_zeros() as usize];
            delta[w.count_ones() as usize] += 1;
        }
        return WeightDistribution { delta };
    }
    delta[word.weight() as usize] += 1;
    for i in range.start + 1..range.end {
        word.xor_assign(gen.row(i.trailing_zeros() as usize));
        delta[word.weight() as usize] += 1;
    }
    WeightDistribution { delta }
}

pub fn weight_distribution(code: &impl LinearCode, budget: u128) -> Result<WeightDistribution> {
    weight_distribution_with(code, budget, Exec::default())
}

pub fn weight_distribution_with(
    code: &impl LinearCode,
    budget: u128,
    exec: Exec,
) -> Result<WeightDistribution> {
    let gen = code.binary_generator();
    let k = gen.num_rows();
    if k >= 63 {
        return Err(Error::BudgetExceeded {
            needed: u128::MAX,
            budget,
        });
    }
    let total = 1u64 << k;
    check_budget(total as u128, budget)?;
    let parts = exec.map_chunks(total, |r| weight_distribution_range(&gen, r));
    let mut out = WeightDistribution {
        delta: vec![0; gen.num_cols() + 1],
    };
    for p in &parts {
        out.merge(p);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMode {
    Exact,
    MonteCarlo,
}

/// Minimum distance. Exact mode enumerates the code; Monte Carlo mode
/// returns the least weight among `budget` random nonzero codewords, an
/// upper bound flagged `is_exact = false`.
pub fn min_distance(
    code: &impl LinearCode,
    mode: DistanceMode,
    budget: u128,
    seed: u64,
) -> Result<(usize, bool)> {
    min_distance_with(code, mode, budget, seed, Exec::default())
}

pub fn min_distance_with(
    code: &impl LinearCode,
    mode: DistanceMode,
    budget: u128,
    seed: u64,
    exec: Exec,
) -> Result<(usize, bool)> {
    match mode {
        DistanceMode::Exact => {
            let wd = weight_distribution_with(code, budget, exec)?;
            wd.min_nonzero_weight()
                .map(|d| (d, true))
                .ok_or_else(|| Error::InvalidParameter("code has no nonzero codeword".into()))
        }
        DistanceMode::MonteCarlo => {
            let gen = code.binary_generator();
            let k = gen.num_rows();
            let mut rng = rng_from_seed(seed);
            let mut best = usize::MAX;
            let samples = budget.min(u64::MAX as u128) as u64;
            for _ in 0..samples.max(1) {
                let mut msg = BitVector::zeros(k);
                while msg.is_zero() {
                    for i in 0..k {
                        msg.set(i, rng.random::<bool>());
                    }
                }
                best = best.min(gen.mul_left(&msg).weight() as usize);
            }
            Ok((best, false))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use proptest::prelude::*;

    fn f(k0: u32) -> Arc<FieldCtx> {
        Arc::new(make_field(k0).unwrap())
    }

    fn fe(v: u32) -> FieldElement {
        FieldElement::from_raw(v)
    }

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn repetition_weights_and_distance() {
        for n in 1..12 {
            let wd = weight_distribution(&BinaryCode::repetition(n), DEFAULT_BUDGET).unwrap();
            let mut want = vec![0u64; n + 1];
            want[0] += 1;
            want[n] += 1;
            assert_eq!(wd.delta, want);
            let (d, exact) = min_distance(
                &BinaryCode::repetition(n),
                DistanceMode::Exact,
                DEFAULT_BUDGET,
                0,
            )
            .unwrap();
            assert_eq!((d, exact), (n, true));
        }
    }

    #[test]
    fn full_space_is_binomial() {
        for n in 1..14u64 {
            let wd =
                weight_distribution(&BinaryCode::full_space(n as usize), DEFAULT_BUDGET).unwrap();
            let want: Vec<u64> = (0..=n).map(|j| binom(n, j)).collect();
            assert_eq!(wd.delta, want);
            assert_eq!(wd.total(), 1u128 << n);
        }
    }

    #[test]
    fn budget_enforced() {
        let c = BinaryCode::full_space(10);
        assert!(matches!(
            weight_distribution(&c, 1000),
            Err(Error::BudgetExceeded {
                needed: 1024,
                budget: 1000
            })
        ));
        assert!(min_distance(&c, DistanceMode::Exact, 1000, 0).is_err());
    }

    #[test]
    fn sharded_enumeration_matches_whole() {
        let g = crate::binlin::sample_binary_code(20, 13, 3).unwrap();
        let whole = weight_distribution_range(&g, 0..1 << 13);
        let mut parts = weight_distribution_range(&g, 0..1000);
        parts.merge(&weight_distribution_range(&g, 1000..5000));
        parts.merge(&weight_distribution_range(&g, 5000..1 << 13));
        assert_eq!(whole, parts);
        let seq = weight_distribution_with(&g, DEFAULT_BUDGET, Exec::Sequential).unwrap();
        assert_eq!(whole, seq);
    }

    #[test]
    fn zero_message_encodes_to_zero() {
        let ctx = f(3);
        let cc = ConcatCode::new(
            OuterCode::random(ctx.clone(), 5, 2, 1).unwrap(),
            BinaryCode::random(7, 3, 2).unwrap(),
        )
        .unwrap();
        let z = cc.encode_concat(&[FieldElement::ZERO; 2]).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.len(), 35);
        assert_eq!(cc.bias(&[FieldElement::ZERO; 2]).unwrap(), 35);
        assert!((cc.rate() - cc.outer().rate() * cc.inner().rate()).abs() < 1e-15);
        assert_eq!((cc.big_n(), cc.big_k()), (35, 6));
    }

    #[test]
    fn identity_inner_gives_identified_outer() {
        let ctx = f(3);
        let outer = OuterCode::random(ctx.clone(), 4, 2, 9).unwrap();
        let cc = ConcatCode::new(outer.clone(), BinaryCode::full_space(3)).unwrap();
        for idx in 0..64 {
            let m = outer.message_from_index(idx);
            let c = outer.encode(&m).unwrap();
            let want: Vec<u8> = c.iter().flat_map(|&s| ctx.identify(s)).collect();
            assert_eq!(cc.encode_concat(&m).unwrap().to_bits(), want);
        }
    }

    #[test]
    fn alphabet_mismatch_rejected() {
        let ctx = f(2);
        let outer = OuterCode::full_space(ctx, 2);
        assert!(ConcatCode::new(outer, BinaryCode::random(5, 3, 0).unwrap()).is_err());
    }

    #[test]
    fn bias_matches_weight_exhaustively_tiny() {
        // q=4, n=2, n0=2
        let ctx = f(2);
        for seed in 0..20 {
            let outer = OuterCode::random(ctx.clone(), 2, 1, seed).unwrap();
            let inner = BinaryCode::random(2, 2, seed + 100).unwrap();
            let cc = ConcatCode::new(outer.clone(), inner).unwrap();
            for idx in 0..4 {
                let m = outer.message_from_index(idx);
                let x = cc.bias(&m).unwrap();
                let w = cc.encode_concat(&m).unwrap().weight() as i64;
                assert_eq!(w, (cc.big_n() as i64 - x) / 2);
                assert_eq!((cc.big_n() as i64 - x) % 2, 0);
                assert!(x.abs() <= cc.big_n() as i64);
            }
        }
    }

    #[test]
    fn omega_keeps_duplicates_in_order() {
        let ctx = f(2);
        let inner = BinaryCode::new(
            BitMatrix::from_bit_rows(&[vec![1, 1, 0, 1], vec![0, 0, 1, 1]]).unwrap(),
        )
        .unwrap();
        let cc = ConcatCode::new(OuterCode::full_space(ctx.clone(), 1), inner).unwrap();
        let coords: Vec<u32> = cc.omega().iter().map(|&w| ctx.to_coords(w)).collect();
        assert_eq!(coords, vec![0b01, 0b01, 0b10, 0b11]);
    }

    #[test]
    fn outer_dual_membership_examples() {
        let ctx = f(2);
        let full = OuterCode::full_space(ctx.clone(), 3);
        assert!(outer_dual_membership(&full, &[fe(0); 3]).unwrap());
        assert!(!outer_dual_membership(&full, &[fe(0), fe(2), fe(0)]).unwrap());
        let rep = OuterCode::repetition(ctx.clone(), 2);
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(
                    outer_dual_membership(&rep, &[fe(a), fe(b)]).unwrap(),
                    a == b
                );
            }
        }
        assert!(outer_dual_membership(&rep, &[fe(1)]).is_err());
    }

    #[test]
    fn concat_distance_at_least_product() {
        let ctx = f(2);
        for seed in 0..30 {
            let outer = OuterCode::random(ctx.clone(), 4, 2, seed).unwrap();
            let inner = BinaryCode::random(5, 2, seed ^ 0xabc).unwrap();
            let cc = ConcatCode::new(outer.clone(), inner.clone()).unwrap();
            let (d, _) = min_distance(&cc, DistanceMode::Exact, DEFAULT_BUDGET, 0).unwrap();
            let (din, _) = min_distance(&inner, DistanceMode::Exact, DEFAULT_BUDGET, 0).unwrap();
            let dout = (1..16u64)
                .map(|i| {
                    outer
                        .encode(&outer.message_from_index(i))
                        .unwrap()
                        .iter()
                        .filter(|s| !s.is_zero())
                        .count()
                })
                .min()
                .unwrap();
            assert!(d >= dout * din, "d={d} dout={dout} din={din}");
            let (mc, exact) = min_distance(&cc, DistanceMode::MonteCarlo, 20, seed).unwrap();
            assert!(!exact);
            assert!(mc >= d);
        }
    }

    #[test]
    fn binary_generator_matches_message_index() {
        let ctx = f(3);
        let outer = OuterCode::random(ctx, 3, 2, 4).unwrap();
        let cc = ConcatCode::new(outer.clone(), BinaryCode::random(6, 3, 5).unwrap()).unwrap();
        let g = cc.binary_generator();
        for idx in 0..64u64 {
            let bits: Vec<u8> = (0..6).map(|i| (idx >> i & 1) as u8).collect();
            let via_g = g.mul_left(&BitVector::from_bits(&bits));
            let direct = cc.encode_concat(&outer.message_from_index(idx)).unwrap();
            assert_eq!(via_g, direct);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn concat_encoding_is_linear(seed: u64, a: u64, b: u64) {
            let ctx = f(3);
            let outer = OuterCode::random(ctx, 4, 2, seed).unwrap();
            let cc = ConcatCode::new(outer.clone(), BinaryCode::random(5, 3, seed.wrapping_add(1)).unwrap()).unwrap();
            let (ia, ib) = (a % 64, b % 64);
            let ma = outer.message_from_index(ia);
            let mb = outer.message_from_index(ib);
            let sum: Vec<FieldElement> = ma.iter().zip(&mb).map(|(&x, &y)| x + y).collect();
            let mut lhs = cc.encode_concat(&ma).unwrap();
            lhs.xor_assign(&cc.encode_concat(&mb).unwrap());
            prop_assert_eq!(lhs, cc.encode_concat(&sum).unwrap());
        }
    }
}
