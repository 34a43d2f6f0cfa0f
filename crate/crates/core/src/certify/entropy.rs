use serde::{Deserialize, Serialize};

use super::pmf::{empirical_dist, Pmf};
use crate::codes::OuterCode;
use crate::error::{check_budget, Error, Result};
use crate::exec::Exec;

/// Total-variation convention for the smoothing radius.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TvConvention {
    /// `1/2 * sum |P - Q|`
    #[default]
    Halved,
    /// `sum |P - Q|`
    Unhalved,
}

impl TvConvention {
    /// Probability mass that may be moved within radius `eta`.
    fn movable(self, eta: f64) -> f64 {
        match self {
            TvConvention::Halved => eta,
            TvConvention::Unhalved => eta / 2.0,
        }
    }
}

pub fn smooth_min_entropy(pmf: &Pmf, eta: f64) -> Result<f64> {
    smooth_min_entropy_with(pmf, eta, TvConvention::Halved)
}

/// Largest min-entropy (bits) of any distribution within TV distance `eta`
/// of `pmf`. The optimum caps every mass at the level `t >= 1/q` with
/// `sum max(P - t, 0) = eta`, so `t` is solved piecewise on the sorted
/// masses rather than searched.
pub fn smooth_min_entropy_with(pmf: &Pmf, eta: f64, conv: TvConvention) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("eta={eta} outside [0, 1)")));
    }
    let budget = conv.movable(eta);
    let mut p = pmf.probs().to_vec();
    p.sort_by(|a, b| b.total_cmp(a));
    let q = p.len();
    let mut top = 0.0;
    let mut t = 0.0;
    for m in 1..=q {
        top += p[m - 1];
        let level = (top - budget) / m as f64;
        let below = if m < q { p[m] } else { 0.0 };
        if level >= below {
            t = level;
            break;
        }
    }
    let t = t.max(1.0 / q as f64);
    Ok(-t.log2())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub epsilon: f64,
    pub c_gamma: f64,
    pub c_eta: f64,
    pub eta: f64,
    pub convention: TvConvention,
    /// Smoothed min-entropy of every nonzero codeword, by message index - 1.
    pub per_codeword: Vec<f64>,
    pub min: f64,
    /// Message index attaining `min`.
    pub argmin: u64,
    pub threshold: f64,
    pub ok: bool,
    /// `n0 eps^2 / log2(1/eps)`, when an inner length is attached.
    pub n0_scale: Option<f64>,
}

impl EntropyReport {
    pub fn with_n0(mut self, n0: usize) -> Self {
        self.n0_scale = Some(n0_scale(n0, self.epsilon));
        self
    }
}

pub fn n0_scale(n0: usize, eps: f64) -> f64 {
    n0 as f64 * eps * eps / (1.0 / eps).log2()
}

pub fn entropy_hypothesis(
    outer: &OuterCode,
    c_gamma: f64,
    c_eta: f64,
    budget: u128,
) -> Result<EntropyReport> {
    entropy_hypothesis_with(
        outer,
        c_gamma,
        c_eta,
        budget,
        TvConvention::Halved,
        Exec::default(),
    )
}

/// Checks `H^(c_eta eps)(c) >= (1 - c_gamma eps) log2 q` for every nonzero
/// codeword, with `eps = k/n`.
pub fn entropy_hypothesis_with(
    outer: &OuterCode,
    c_gamma: f64,
    c_eta: f64,
    budget: u128,
    conv: TvConvention,
    exec: Exec,
) -> Result<EntropyReport> {
    let total = outer.num_messages();
    check_budget(total, budget)?;
    let eps = outer.rate();
    let eta = c_eta * eps;
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("eta={eta} outside [0, 1)")));
    }
    let ctx = outer.ctx();
    let per_codeword: Vec<f64> = exec
        .map_chunks(total as u64 - 1, |range| {
            range
                .map(|i| {
                    let c = outer
                        .encode(&outer.message_from_index(i + 1))
                        .expect("valid message");
                    let d = empirical_dist(ctx.clone(), &c).expect("nonempty word");
                    smooth_min_entropy_with(&d, eta, conv).expect("eta checked")
                })
                .collect::<Vec<f64>>()
        })
        .into_iter()
        .flatten()
        .collect();
    let (argmin, min) = per_codeword
        .iter()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |acc, (i, &h)| if h < acc.1 { (i, h) } else { acc },
        );
    let threshold = (1.0 - c_gamma * eps) * ctx.k0() as f64;
    Ok(EntropyReport {
        epsilon: eps,
        c_gamma,
        c_eta,
        eta,
        convention: conv,
        ok: min >= threshold,
        per_codeword,
        min,
        argmin: argmin as u64 + 1,
        threshold,
        n0_scale: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binlin::FieldMatrix;
    use crate::codes::DEFAULT_BUDGET;
    use crate::field::{make_field, FieldElement};
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng as _;
    use std::sync::Arc;

    /// Independent oracle: bisection on the cap level.
    fn cap_oracle(p: &[f64], movable: f64) -> f64 {
        let excess = |t: f64| p.iter().map(|&x| (x - t).max(0.0)).sum::<f64>();
        let (mut lo, mut hi) = (1.0 / p.len() as f64, 1.0f64);
        if excess(lo) <= movable {
            return -lo.log2();
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if excess(mid) <= movable {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        -hi.log2()
    }

    fn gf(k0: u32) -> Arc<crate::field::FieldCtx> {
        Arc::new(make_field(k0).unwrap())
    }

    #[test]
    fn examples() {
        let ctx = gf(2);
        let point = Pmf::point_mass(ctx.clone(), FieldElement::ZERO);
        assert_eq!(smooth_min_entropy(&point, 0.0).unwrap(), 0.0);
        assert!((smooth_min_entropy(&point, 0.5).unwrap() - 1.0).abs() < 1e-15);
        let u = Pmf::uniform(ctx);
        for eta in [0.0, 0.3, 0.9] {
            assert!((smooth_min_entropy(&u, eta).unwrap() - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unhalved_halves_the_radius() {
        let point = Pmf::point_mass(gf(2), FieldElement::ONE);
        let a = smooth_min_entropy_with(&point, 0.5, TvConvention::Unhalved).unwrap();
        let b = smooth_min_entropy_with(&point, 0.25, TvConvention::Halved).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn eta_range() {
        let u = Pmf::uniform(gf(1));
        assert!(smooth_min_entropy(&u, -0.1).is_err());
        assert!(smooth_min_entropy(&u, 1.0).is_err());
    }

    #[test]
    fn matches_bisection_oracle() {
        let mut rng = rng_from_seed(21);
        for _ in 0..1000 {
            let k0 = rng.random_range(1..=3);
            let ctx = gf(k0);
            let q = ctx.order() as usize;
            let atoms = rng.random_range(1..=q);
            let mut raw = vec![0.0; q];
            for _ in 0..atoms {
                raw[rng.random_range(0..q)] += rng.random::<f64>() + 1e-3;
            }
            let s: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let pmf = Pmf::new(ctx, p.clone()).unwrap();
            for eta in [0.0, 0.1, 0.3] {
                let got = smooth_min_entropy(&pmf, eta).unwrap();
                assert!((got - cap_oracle(&p, eta)).abs() < 1e-6);
            }
        }
    }

    proptest! {
        #[test]
        fn nondecreasing_in_eta(raw in prop::collection::vec(0.0f64..1.0, 8), a in 0.0f64..0.99, b in 0.0f64..0.99) {
            let s: f64 = raw.iter().sum::<f64>() + 1e-9;
            let mut p: Vec<f64> = raw.iter().map(|x| x / s).collect();
            p[0] += 1.0 - p.iter().sum::<f64>();
            let pmf = Pmf::new(gf(3), p).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(smooth_min_entropy(&pmf, lo).unwrap() <= smooth_min_entropy(&pmf, hi).unwrap() + 1e-12);
        }
    }

    #[test]
    fn constant_codeword_fails() {
        let ctx = gf(2);
        let outer = OuterCode::repetition(ctx, 4);
        // eps = 1/4; eta = 0.25 < 3/4
        let r = entropy_hypothesis(&outer, 1.0, 1.0, DEFAULT_BUDGET).unwrap();
        assert!(!r.ok);
        assert_eq!(r.per_codeword.len(), 3);
        assert!(r.min < r.threshold);
    }

    #[test]
    fn permutation_codewords_pass() {
        // generator (0, 1, w, w^2): every nonzero multiple lists all of GF(4)
        let ctx = gf(2);
        let row: Vec<FieldElement> = (0..4).map(FieldElement::from_raw).collect();
        let outer = OuterCode::new(FieldMatrix::from_rows(ctx, &[row]).unwrap()).unwrap();
        let r = entropy_hypothesis(&outer, 0.0, 0.5, DEFAULT_BUDGET).unwrap();
        assert!(r.ok);
        assert!(r.per_codeword.iter().all(|&h| (h - 2.0).abs() < 1e-15));
    }

    #[test]
    fn min_is_minimum_and_budget() {
        let ctx = gf(2);
        let outer = OuterCode::random(ctx, 5, 2, 8).unwrap();
        let r = entropy_hypothesis(&outer, 1.0, 0.5, DEFAULT_BUDGET)
            .unwrap()
            .with_n0(8);
        let m = r.per_codeword.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(r.min, m);
        assert_eq!(r.per_codeword[r.argmin as usize - 1], m);
        assert!(r.n0_scale.is_some());
        assert!(entropy_hypothesis(&outer, 1.0, 0.5, 15).is_err());
    }
}
