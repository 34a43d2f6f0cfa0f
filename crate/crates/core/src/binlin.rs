//! Dense linear algebra over F_2 (bit-packed rows) and over GF(2^k0).

use std::sync::Arc;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::rng::{rng_from_seed, Rng};

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// Fixed-length vector over F_2, packed little-endian into u64 words.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    #[inline]
    pub fn weight(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Inner product over F_2.
    pub fn dot(&self, other: &BitVector) -> u8 {
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        (ones & 1) as u8
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| u8::from(self.get(i))).collect()
    }
}

/// Dense matrix over F_2, one [`BitVector`] per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Ok(BitMatrix { cols, rows })
    }

    /// Builds a matrix from rows of 0/1 bytes.
    pub fn from_bit_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(cols, rows.iter().map(|r| BitVector::from_bits(r)).collect())
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.rows[r].set(c, v)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            for c in 0..self.cols {
                if row.get(c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// `v * self` for a row vector `v` of length `num_rows`.
    pub fn mul_left(&self, v: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.cols);
        for (i, row) in self.rows.iter().enumerate() {
            if v.get(i) {
                out.xor_assign(row);
            }
        }
        out
    }

    /// `self * v` for a column vector `v` of length `num_cols`.
    pub fn mul_right(&self, v: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(v) == 1 {
                out.set(i, true);
            }
        }
        out
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows.len() {
                break;
            }
            let Some(p) = (r..self.rows.len()).find(|&i| self.rows[i].get(c)) else {
                continue;
            };
            self.rows.swap(r, p);
            let pivot = self.rows[r].clone();
            for (i, row) in self.rows.iter_mut().enumerate() {
                if i != r && row.get(c) {
                    row.xor_assign(&pivot);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of `{x : self * x = 0}` as the rows of the returned matrix.
    pub fn right_kernel(&self) -> BitMatrix {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let rows = free
            .iter()
            .map(|&f| {
                let mut v = BitVector::zeros(self.cols);
                v.set(f, true);
                for (i, &p) in pivots.iter().enumerate() {
                    if m.rows[i].get(f) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect();
        BitMatrix {
            cols: self.cols,
            rows,
        }
    }

    pub fn nullspace_basis(&self, side: Side) -> BitMatrix {
        match side {
            Side::Right => self.right_kernel(),
            Side::Left => self.transpose().right_kernel(),
        }
    }

    /// True when both matrices have the same row space.
    pub fn same_row_space(&self, other: &BitMatrix) -> bool {
        if self.cols != other.cols {
            return false;
        }
        let r = self.rank();
        if r != other.rank() {
            return false;
        }
        let mut stacked = self.clone();
        stacked.rows.extend(other.rows.iter().cloned());
        stacked.rank() == r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `{x : x * G = 0}`
    Left,
    /// `{x : G * x = 0}`; for a generator this is the dual code.
    Right,
}

/// Dense matrix over GF(2^k0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldMatrix {
    ctx: Arc<FieldCtx>,
    rows: usize,
    cols: usize,
    entries: Vec<FieldElement>,
}

impl FieldMatrix {
    pub fn zeros(ctx: Arc<FieldCtx>, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            ctx,
            rows,
            cols,
            entries: vec![FieldElement::ZERO; rows * cols],
        }
    }

    pub fn identity(ctx: Arc<FieldCtx>, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, FieldElement::ONE);
        }
        m
    }

    pub fn from_rows(ctx: Arc<FieldCtx>, rows: &[Vec<FieldElement>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            for &e in r {
                ctx.element(e.value())?;
                entries.push(e);
            }
        }
        Ok(FieldMatrix {
            ctx,
            rows: rows.len(),
            cols,
            entries,
        })
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut t = FieldMatrix::zeros(self.ctx.clone(), self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// `m * self` for a row vector `m`.
    pub fn mul_left(&self, m: &[FieldElement]) -> Vec<FieldElement> {
        debug_assert_eq!(m.len(), self.rows);
        let mut out = vec![FieldElement::ZERO; self.cols];
        for (i, &mi) in m.iter().enumerate() {
            if mi.is_zero() {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                *o += self.ctx.mul(mi, self.get(i, c));
            }
        }
        out
    }

    /// `self * x` for a column vector `x`.
    pub fn mul_right(&self, x: &[FieldElement]) -> Vec<FieldElement> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(FieldElement::ZERO, |acc, (&a, &b)| acc + self.ctx.mul(a, b))
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rref(&mut self) -> Vec<usize> {
        let ctx = self.ctx.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = ctx.inv(self.get(r, c)).expect("pivot is nonzero");
            for cc in 0..self.cols {
                let v = ctx.mul(self.get(r, cc), inv);
                self.set(r, cc, v);
            }
            for i in 0..self.rows {
                let f = self.get(i, c);
                if i == r || f.is_zero() {
                    continue;
                }
                for cc in 0..self.cols {
                    let v = self.get(i, cc) + ctx.mul(f, self.get(r, cc));
                    self.set(i, cc, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn right_kernel(&self) -> FieldMatrix {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = FieldMatrix::zeros(self.ctx.clone(), free.len(), self.cols);
        for (row, &f) in free.iter().enumerate() {
            k.set(row, f, FieldElement::ONE);
            for (i, &p) in pivots.iter().enumerate() {
                // characteristic 2: -a = a
                k.set(row, p, m.get(i, f));
            }
        }
        k
    }

    pub fn nullspace_basis(&self, side: Side) -> FieldMatrix {
        match side {
            Side::Right => self.right_kernel(),
            Side::Left => self.transpose().right_kernel(),
        }
    }

    pub fn same_row_space(&self, other: &FieldMatrix) -> bool {
        if self.cols != other.cols {
            return false;
        }
        let r = self.rank();
        if r != other.rank() {
            return false;
        }
        let mut stacked = FieldMatrix::zeros(self.ctx.clone(), self.rows + other.rows, self.cols);
        stacked.entries[..self.entries.len()].copy_from_slice(&self.entries);
        stacked.entries[self.entries.len()..].copy_from_slice(&other.entries);
        stacked.rank() == r
    }
}

fn check_dims(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k <= n, got n={n} k={k}"
        )));
    }
    Ok(())
}

fn random_bit_matrix(rng: &mut Rng, rows: usize, cols: usize) -> BitMatrix {
    let mut m = BitMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            if rng.random::<bool>() {
                m.set(r, c, true);
            }
        }
    }
    m
}

/// Uniform dimension-`k` subspace of F_2^n as a full-rank `k x n`
/// generator: a uniform matrix conditioned on full rank.
pub fn sample_binary_code(n: usize, k: usize, seed: u64) -> Result<BitMatrix> {
    check_dims(n, k)?;
    let mut rng = rng_from_seed(seed);
    sample_binary_code_with(&mut rng, n, k)
}

pub fn sample_binary_code_with(rng: &mut Rng, n: usize, k: usize) -> Result<BitMatrix> {
    check_dims(n, k)?;
    loop {
        let g = random_bit_matrix(rng, k, n);
        if g.rank() == k {
            return Ok(g);
        }
    }
}

/// Uniform dimension-`k` subspace of GF(q)^n, same rejection scheme.
pub fn sample_field_code(ctx: Arc<FieldCtx>, n: usize, k: usize, seed: u64) -> Result<FieldMatrix> {
    let mut rng = rng_from_seed(seed);
    sample_field_code_with(&mut rng, ctx, n, k)
}

pub fn sample_field_code_with(
    rng: &mut Rng,
    ctx: Arc<FieldCtx>,
    n: usize,
    k: usize,
) -> Result<FieldMatrix> {
    check_dims(n, k)?;
    let q = ctx.order();
    loop {
        let mut g = FieldMatrix::zeros(ctx.clone(), k, n);
        for r in 0..k {
            for c in 0..n {
                g.set(r, c, FieldElement::from_raw(rng.random_range(0..q)));
            }
        }
        if g.rank() == k {
            return Ok(g);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use proptest::prelude::*;

    #[test]
    fn rank_basics() {
        assert_eq!(BitMatrix::identity(5).rank(), 5);
        assert_eq!(BitMatrix::zeros(3, 4).rank(), 0);
        let m = BitMatrix::from_bit_rows(&[vec![1, 0, 1], vec![1, 0, 1]]).unwrap();
        assert_eq!(m.rank(), 1);

        let f = Arc::new(make_field(3).unwrap());
        assert_eq!(FieldMatrix::identity(f.clone(), 4).rank(), 4);
        assert_eq!(FieldMatrix::zeros(f.clone(), 2, 5).rank(), 0);
        let row = vec![FieldElement::from_raw(3), FieldElement::from_raw(5)];
        let m = FieldMatrix::from_rows(f, &[row.clone(), row]).unwrap();
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        assert_eq!(BitMatrix::identity(4).right_kernel().num_rows(), 0);
        let f = Arc::new(make_field(2).unwrap());
        assert_eq!(FieldMatrix::identity(f, 3).right_kernel().num_rows(), 0);
    }

    #[test]
    fn repetition_dual_is_even_weight() {
        for n in 2..10 {
            let rep = BitMatrix::from_bit_rows(&[vec![1; n]]).unwrap();
            let h = rep.nullspace_basis(Side::Right);
            assert_eq!(h.num_rows(), n - 1);
            assert_eq!(h.rank(), n - 1);
            for r in h.rows() {
                assert_eq!(r.weight() % 2, 0);
            }
            // membership: every even-weight word is in the span
            let mut even = BitVector::zeros(n);
            even.set(0, true);
            even.set(n - 1, true);
            let mut stacked = h.clone();
            stacked.rows.push(even);
            assert_eq!(stacked.rank(), n - 1);
        }
    }

    #[test]
    fn left_kernel_annihilates() {
        let g = sample_binary_code(9, 4, 5).unwrap().transpose(); // 9 x 4
        let l = g.nullspace_basis(Side::Left);
        assert_eq!(l.num_rows(), 5);
        for r in l.rows() {
            assert!(g.mul_left(r).is_zero());
        }
    }

    #[test]
    fn field_dual_dimension() {
        let f = Arc::new(make_field(3).unwrap());
        for seed in 0..20 {
            let g = sample_field_code(f.clone(), 6, 2, seed).unwrap();
            let h = g.nullspace_basis(Side::Right);
            assert_eq!(h.num_rows(), 4);
            for r in 0..h.num_rows() {
                assert!(g.mul_right(h.row(r)).iter().all(|e| e.is_zero()));
            }
        }
        let full = FieldMatrix::identity(f, 4);
        assert_eq!(full.nullspace_basis(Side::Right).num_rows(), 0);
    }

    #[test]
    fn sample_unique_subspace() {
        let g = sample_binary_code(1, 1, 99).unwrap();
        assert_eq!(g, BitMatrix::identity(1));
    }

    #[test]
    fn sample_one_dim_subspaces_uniform() {
        // three 1-dim subspaces of F_2^2: {01}, {10}, {11}
        let mut counts = [0u32; 4];
        let trials = 30_000;
        for seed in 0..trials {
            let g = sample_binary_code(2, 1, seed).unwrap();
            let r = g.row(0);
            counts[(u8::from(r.get(0)) | u8::from(r.get(1)) << 1) as usize] += 1;
        }
        assert_eq!(counts[0], 0);
        let p = 1.0 / 3.0;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for &c in &counts[1..] {
            assert!(
                (c as f64 - trials as f64 * p).abs() <= 3.0 * sigma,
                "{counts:?}"
            );
        }
    }

    #[test]
    fn sampled_codes_have_full_rank() {
        for seed in 0..50 {
            assert_eq!(sample_binary_code(10, 4, seed).unwrap().rank(), 4);
        }
        assert!(sample_binary_code(3, 4, 0).is_err());
        assert!(sample_binary_code(3, 0, 0).is_err());
    }

    #[test]
    fn negative_correlation_of_membership() {
        // Pr[x,y in C] <= Pr[x in C] Pr[y in C] for random codes, n=8, k=3
        let x = BitVector::from_bits(&[1, 0, 1, 1, 0, 0, 1, 0]);
        let y = BitVector::from_bits(&[0, 1, 1, 0, 1, 0, 0, 1]);
        let trials = 100_000u64;
        let (mut cx, mut cy, mut cxy) = (0u64, 0u64, 0u64);
        let mut rng = rng_from_seed(2024);
        for _ in 0..trials {
            let g = sample_binary_code_with(&mut rng, 8, 3).unwrap();
            let h = g.right_kernel();
            let inx = h.mul_right(&x).is_zero();
            let iny = h.mul_right(&y).is_zero();
            cx += u64::from(inx);
            cy += u64::from(iny);
            cxy += u64::from(inx && iny);
        }
        let t = trials as f64;
        let pxy = cxy as f64 / t;
        let prod = (cx as f64 / t) * (cy as f64 / t);
        let sigma = (pxy * (1.0 - pxy) / t).sqrt();
        assert!(pxy <= prod + 3.0 * sigma, "pxy={pxy} prod={prod}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn double_dual_binary(n in 2usize..12, kfrac in 0.1f64..1.0, seed: u64) {
            let k = ((n as f64 * kfrac).ceil() as usize).clamp(1, n);
            let g = sample_binary_code(n, k, seed).unwrap();
            let h = g.nullspace_basis(Side::Right);
            prop_assert_eq!(h.num_rows(), n - k);
            if n > k {
                let back = h.nullspace_basis(Side::Right);
                prop_assert!(back.same_row_space(&g));
            }
        }

        #[test]
        fn double_dual_field(n in 2usize..8, k in 1usize..4, seed: u64) {
            prop_assume!(k < n);
            let f = Arc::new(make_field(2).unwrap());
            let g = sample_field_code(f, n, k, seed).unwrap();
            let h = g.nullspace_basis(Side::Right);
            prop_assert_eq!(h.num_rows(), n - k);
            prop_assert!(h.nullspace_basis(Side::Right).same_row_space(&g));
        }
    }
}
