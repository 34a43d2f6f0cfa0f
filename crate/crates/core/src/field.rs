//! Arithmetic in GF(2^k0) for 1 <= k0 <= 16, the trace map, and a self-dual
//! basis that identifies the field with F_2^k0 so that `Tr(a*b)` is the bit
//! dot product of the identified vectors.
//!
//! Elements are stored in the polynomial basis: bit `i` of the value is the
//! coefficient of `x^i`. Addition is XOR in both the polynomial and the
//! identified representation, since identification is F_2-linear.

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DEGREE: u32 = 16;

/// Lexicographically smallest irreducible polynomial of each degree 1..=16,
/// as a bitmask including the leading term.
pub const SMALLEST_IRREDUCIBLE: [u32; 16] = [
    0x2, 0x7, 0xb, 0x13, 0x25, 0x43, 0x83, 0x11b, 0x203, 0x409, 0x805, 0x1009, 0x201b, 0x4021,
    0x8003, 0x1002b,
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Wraps a raw polynomial-basis value. Validity against a particular
    /// field is checked by [`FieldCtx::element`].
    pub const fn from_raw(value: u32) -> Self {
        FieldElement(value)
    }

    pub const fn value(self) -> u32 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Characteristic-2 addition.
impl Add for FieldElement {
    type Output = FieldElement;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: FieldElement) -> FieldElement {
        FieldElement(self.0 ^ rhs.0)
    }
}

impl AddAssign for FieldElement {
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: FieldElement) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

fn degree(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

/// Trial division by every polynomial of degree at most half.
pub fn is_irreducible(poly: u32) -> bool {
    let d = degree(poly);
    if d < 1 {
        return false;
    }
    let half = d / 2;
    (2u32..(1u32 << (half + 1))).all(|f| poly_rem(poly, f) != 0)
}

/// Carry-less multiply reduced modulo `modulus`; used only to bootstrap the
/// log tables.
fn slow_mul(mut a: u32, mut b: u32, modulus: u32, k0: u32) -> u32 {
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> k0 & 1 == 1 {
            a ^= modulus;
        }
    }
    acc
}

fn slow_pow(mut a: u32, mut e: u64, modulus: u32, k0: u32) -> u32 {
    let mut acc = 1u32;
    while e > 0 {
        if e & 1 == 1 {
            acc = slow_mul(acc, a, modulus, k0);
        }
        a = slow_mul(a, a, modulus, k0);
        e >>= 1;
    }
    acc
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Serializable description of a field: degree, modulus and basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDescriptor {
    pub k0: u32,
    pub modulus: String,
    pub basis: Vec<String>,
}

/// A concrete GF(2^k0). Immutable after construction.
#[derive(Clone)]
pub struct FieldCtx {
    k0: u32,
    modulus: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    /// Bit `i` holds `Tr(x^i)`, so `Tr(v) = parity(v & trace_mask)`.
    trace_mask: u32,
    basis: Vec<FieldElement>,
    to_coords: Vec<u32>,
    from_coords: Vec<u32>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("k0", &self.k0)
            .field("modulus", &format_args!("{:#x}", self.modulus))
            .field("basis", &self.basis)
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.k0 == other.k0 && self.modulus == other.modulus && self.basis == other.basis
    }
}

impl Eq for FieldCtx {}

impl FieldCtx {
    /// GF(2^k0) with the smallest irreducible modulus of that degree.
    pub fn new(k0: u32) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&k0) {
            return Err(Error::DegreeOutOfRange(k0));
        }
        Self::with_modulus(k0, SMALLEST_IRREDUCIBLE[k0 as usize - 1])
    }

    pub fn with_modulus(k0: u32, modulus: u32) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&k0) {
            return Err(Error::DegreeOutOfRange(k0));
        }
        if degree(modulus) != k0 as i32 || !is_irreducible(modulus) {
            return Err(Error::NotIrreducible { modulus, k0 });
        }
        let q = 1u32 << k0;
        let order = (q - 1) as u64;

        let factors = prime_factors(order);
        let generator = (1..q)
            .find(|&g| {
                factors
                    .iter()
                    .all(|&p| order == 1 || slow_pow(g, order / p, modulus, k0) != 1)
            })
            .expect("multiplicative group of a finite field is cyclic");

        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; q as usize];
        let mut x = 1u32;
        for i in 0..order as usize {
            exp[i] = x;
            exp[i + order as usize] = x;
            log[x as usize] = i as u32;
            x = slow_mul(x, generator, modulus, k0);
        }

        let mut ctx = FieldCtx {
            k0,
            modulus,
            exp,
            log,
            trace_mask: 0,
            basis: Vec::new(),
            to_coords: Vec::new(),
            from_coords: Vec::new(),
        };
        ctx.trace_mask = (0..k0)
            .filter(|&i| ctx.trace_by_definition(FieldElement(1 << i)) == 1)
            .fold(0, |m, i| m | 1 << i);
        ctx.basis = ctx.find_self_dual_basis()?;

        let mut from = vec![0u32; q as usize];
        let mut to = vec![0u32; q as usize];
        for coords in 0..q {
            let v = (0..k0)
                .filter(|&i| coords >> i & 1 == 1)
                .fold(0, |acc, i| acc ^ ctx.basis[i as usize].0);
            from[coords as usize] = v;
            to[v as usize] = coords;
        }
        ctx.from_coords = from;
        ctx.to_coords = to;
        Ok(ctx)
    }

    pub fn k0(&self) -> u32 {
        self.k0
    }

    /// Field size `q = 2^k0`.
    pub fn order(&self) -> u32 {
        1 << self.k0
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn basis(&self) -> &[FieldElement] {
        &self.basis
    }

    pub fn element(&self, value: u32) -> Result<FieldElement> {
        if value < self.order() {
            Ok(FieldElement(value))
        } else {
            Err(Error::InvalidParameter(format!(
                "value {value:#x} not in GF(2^{})",
                self.k0
            )))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.order()).map(FieldElement)
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement(0);
        }
        FieldElement(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Option<FieldElement> {
        if a.is_zero() {
            return None;
        }
        let order = self.order() - 1;
        let l = self.log[a.0 as usize];
        Some(FieldElement(self.exp[((order - l) % order) as usize]))
    }

    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut acc = FieldElement::ONE;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Trace via the precomputed linear functional.
    #[inline]
    pub fn trace(&self, x: FieldElement) -> u8 {
        ((x.0 & self.trace_mask).count_ones() & 1) as u8
    }

    /// Trace from the defining sum `x + x^2 + ... + x^(2^(k0-1))`.
    pub fn trace_by_definition(&self, x: FieldElement) -> u8 {
        let mut acc = FieldElement::ZERO;
        let mut term = x;
        for _ in 0..self.k0 {
            acc += term;
            term = self.square(term);
        }
        debug_assert!(acc.0 <= 1, "trace must land in F_2");
        acc.0 as u8
    }

    /// Greedy orthonormalisation of the trace form `B(x, y) = Tr(xy)`.
    ///
    /// Each step picks the numerically smallest `x` orthogonal to the
    /// chosen elements with `Tr(x^2) = Tr(x) = 1`. Before the last step the
    /// candidate must also keep `1` outside the chosen span, otherwise the
    /// remaining complement carries an alternating form and has no
    /// unit-norm vector. One admissible candidate always exists.
    pub fn find_self_dual_basis(&self) -> Result<Vec<FieldElement>> {
        let k0 = self.k0 as usize;
        let mut chosen: Vec<FieldElement> = Vec::with_capacity(k0);
        for step in 0..k0 {
            let last = step + 1 == k0;
            // projection of 1 onto the complement of the chosen span
            let one_residue = chosen.iter().fold(FieldElement::ONE, |acc, &v| acc + v);
            let pick = self.elements().skip(1).find(|&x| {
                self.trace(x) == 1
                    && chosen.iter().all(|&v| self.trace(self.mul(x, v)) == 0)
                    && (last || x != one_residue)
            });
            match pick {
                Some(x) => chosen.push(x),
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "self-dual basis search exhausted at step {step} for GF(2^{k0})"
                    )))
                }
            }
        }
        for (i, &a) in chosen.iter().enumerate() {
            for (j, &b) in chosen.iter().enumerate() {
                let want = u8::from(i == j);
                if self.trace(self.mul(a, b)) != want {
                    return Err(Error::InvalidParameter(
                        "self-dual basis failed verification".into(),
                    ));
                }
            }
        }
        Ok(chosen)
    }

    /// Coordinates of `x` in the self-dual basis, packed: bit `i` is the
    /// coefficient of `basis[i]`, equal to `Tr(x * basis[i])`.
    #[inline]
    pub fn to_coords(&self, x: FieldElement) -> u32 {
        self.to_coords[x.0 as usize]
    }

    #[inline]
    pub fn from_coords(&self, coords: u32) -> FieldElement {
        FieldElement(self.from_coords[coords as usize])
    }

    /// Coordinates as an explicit bit vector of length k0.
    pub fn identify(&self, x: FieldElement) -> Vec<u8> {
        let c = self.to_coords(x);
        (0..self.k0).map(|i| (c >> i & 1) as u8).collect()
    }

    /// Inverse of [`FieldCtx::identify`].
    pub fn unidentify(&self, bits: &[u8]) -> Result<FieldElement> {
        if bits.len() != self.k0 as usize {
            return Err(Error::DimensionMismatch {
                expected: self.k0 as usize,
                got: bits.len(),
            });
        }
        let coords = bits
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &b)| acc | u32::from(b & 1) << i);
        Ok(self.from_coords(coords))
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            k0: self.k0,
            modulus: format!("{:x}", self.modulus),
            basis: self.basis.iter().map(|b| format!("{:x}", b.0)).collect(),
        }
    }

    /// Rebuilds a field from a descriptor and checks the stored basis
    /// against the recomputed one.
    pub fn from_descriptor(d: &FieldDescriptor) -> Result<Self> {
        let modulus = u32::from_str_radix(d.modulus.trim_start_matches("0x"), 16)
            .map_err(|e| Error::InvalidParameter(format!("modulus: {e}")))?;
        let ctx = Self::with_modulus(d.k0, modulus)?;
        let basis: Vec<u32> = d
            .basis
            .iter()
            .map(|s| u32::from_str_radix(s.trim_start_matches("0x"), 16))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidParameter(format!("basis: {e}")))?;
        if basis != ctx.basis.iter().map(|b| b.0).collect::<Vec<_>>() {
            return Err(Error::FieldMismatch(
                "descriptor basis differs from the canonical self-dual basis".into(),
            ));
        }
        Ok(ctx)
    }
}

/// Convenience constructor matching [`FieldCtx::new`].
pub fn make_field(k0: u32) -> Result<FieldCtx> {
    FieldCtx::new(k0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn dot(a: u32, b: u32) -> u8 {
        ((a & b).count_ones() & 1) as u8
    }

    #[test]
    fn table_matches_search() {
        for k0 in 1..=MAX_DEGREE {
            let found = ((1u32 << k0)..(1u32 << (k0 + 1)))
                .find(|&p| is_irreducible(p))
                .unwrap();
            assert_eq!(found, SMALLEST_IRREDUCIBLE[k0 as usize - 1], "k0={k0}");
        }
    }

    #[test]
    fn gf2_is_identity_trace() {
        let f = make_field(1).unwrap();
        assert_eq!(f.basis(), &[FieldElement::ONE]);
        assert_eq!(f.trace(FieldElement::ONE), 1);
        assert_eq!(f.trace(FieldElement::ZERO), 0);
        assert_eq!(
            f.mul(FieldElement::ONE, FieldElement::ONE),
            FieldElement::ONE
        );
    }

    #[test]
    fn gf4_basis_is_omega_omega_squared() {
        let f = make_field(2).unwrap();
        let w = FieldElement::from_raw(0b10);
        let w2 = f.square(w);
        assert_eq!(w2, FieldElement::from_raw(0b11));
        assert_eq!(f.basis(), &[w, w2]);
        assert_eq!(f.trace(FieldElement::ZERO), 0);
        assert_eq!(f.trace(w), 1);
        assert_eq!(f.trace(f.mul(w, w)), 1);
        assert_eq!(f.trace(f.mul(w, w2)), 0);
        assert_eq!(f.trace(f.mul(w2, w2)), 1);
        assert_eq!(f.identify(w), vec![1, 0]);
        assert_eq!(f.identify(FieldElement::ZERO), vec![0, 0]);
    }

    #[test]
    fn gf4_self_dual_bases_by_exhaustion() {
        // every ordered pair of distinct nonzero elements that is a basis
        // and satisfies the Gram condition
        let f = make_field(2).unwrap();
        let mut found = Vec::new();
        for a in 1..4u32 {
            for b in 1..4u32 {
                if a == b {
                    continue;
                }
                let (a, b) = (FieldElement(a), FieldElement(b));
                let gram = [
                    f.trace(f.mul(a, a)),
                    f.trace(f.mul(a, b)),
                    f.trace(f.mul(b, b)),
                ];
                if gram == [1, 0, 1] {
                    found.push((a.0, b.0));
                }
            }
        }
        assert_eq!(found, vec![(2, 3), (3, 2)]);
    }

    #[test]
    fn degree_out_of_range() {
        assert!(matches!(make_field(17), Err(Error::DegreeOutOfRange(17))));
        assert!(matches!(make_field(0), Err(Error::DegreeOutOfRange(0))));
    }

    #[test]
    fn reducible_modulus_rejected() {
        assert!(FieldCtx::with_modulus(2, 0b101).is_err());
        assert!(FieldCtx::with_modulus(3, 0b1011).is_ok());
    }

    #[test]
    fn gram_is_identity_for_all_degrees() {
        for k0 in 1..=MAX_DEGREE {
            let f = make_field(k0).unwrap();
            let b = f.basis();
            assert_eq!(b.len(), k0 as usize);
            for i in 0..b.len() {
                for j in 0..b.len() {
                    assert_eq!(f.trace(f.mul(b[i], b[j])), u8::from(i == j));
                }
            }
        }
    }

    #[test]
    fn exhaustive_small_field_identities() {
        for k0 in 1..=6 {
            let f = make_field(k0).unwrap();
            for a in f.elements() {
                let t = f.trace_by_definition(a);
                assert_eq!(t, f.trace(a));
                assert_eq!(f.trace(f.square(a)), t, "Frobenius invariance");
                assert_eq!(f.unidentify(&f.identify(a)).unwrap(), a);
                for b in f.elements() {
                    assert_eq!(f.trace(f.mul(a, b)), dot(f.to_coords(a), f.to_coords(b)));
                    assert_eq!(f.trace(a + b), f.trace(a) ^ f.trace(b));
                }
            }
        }
    }

    #[test]
    fn field_axioms_spot_check() {
        let mut rng = crate::rng::rng_from_seed(11);
        for k0 in [3u32, 8, 13, 16] {
            let f = make_field(k0).unwrap();
            let q = f.order();
            for _ in 0..10_000 {
                let a = FieldElement(rng.random_range(0..q));
                let b = FieldElement(rng.random_range(0..q));
                let c = FieldElement(rng.random_range(0..q));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
                assert_eq!(f.mul(a, b), FieldElement(slow_mul(a.0, b.0, f.modulus, k0)));
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
                }
            }
        }
    }

    #[test]
    fn unidentify_length_checked() {
        let f = make_field(3).unwrap();
        assert!(matches!(
            f.unidentify(&[1, 0]),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 2
            })
        ));
    }

    #[test]
    fn descriptor_roundtrip() {
        let f = make_field(5).unwrap();
        let d = f.descriptor();
        let json = serde_json::to_string(&d).unwrap();
        let back: FieldDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(FieldCtx::from_descriptor(&back).unwrap(), f);
    }
}
