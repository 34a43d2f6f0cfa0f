use std::sync::Arc;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::rng::{rng_from_seed, Rng};

/// Probability mass function over the elements of a field, indexed by the
/// element's raw value.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    ctx: Arc<FieldCtx>,
    probs: Vec<f64>,
}

pub const PMF_SUM_TOL: f64 = 1e-12;

impl Pmf {
    pub fn new(ctx: Arc<FieldCtx>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != ctx.order() as usize {
            return Err(Error::DimensionMismatch {
                expected: ctx.order() as usize,
                got: probs.len(),
            });
        }
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidParameter(
                "negative or non-finite mass".into(),
            ));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidParameter(format!("masses sum to {s}")));
        }
        Ok(Pmf { ctx, probs })
    }

    pub fn point_mass(ctx: Arc<FieldCtx>, at: FieldElement) -> Self {
        let mut probs = vec![0.0; ctx.order() as usize];
        probs[at.value() as usize] = 1.0;
        Pmf { ctx, probs }
    }

    pub fn uniform(ctx: Arc<FieldCtx>) -> Self {
        let q = ctx.order() as usize;
        Pmf {
            ctx,
            probs: vec![1.0 / q as f64; q],
        }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, x: FieldElement) -> f64 {
        self.probs[x.value() as usize]
    }

    /// Sampler by inversion of the cumulative table.
    pub fn sampler(&self) -> PmfSampler {
        let mut cdf = Vec::with_capacity(self.probs.len());
        let mut acc = 0.0;
        for &p in &self.probs {
            acc += p;
            cdf.push(acc);
        }
        PmfSampler { cdf }
    }
}

pub struct PmfSampler {
    cdf: Vec<f64>,
}

impl PmfSampler {
    pub fn sample(&self, rng: &mut Rng) -> FieldElement {
        let u = rng.random::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        let i = self.cdf.partition_point(|&c| c <= u);
        FieldElement::from_raw(i.min(self.cdf.len() - 1) as u32)
    }
}

/// Coin bias `(1 - exp(-2 c_tilde eps^2)) / 2` of the distribution `D`.
pub fn soft_bernoulli_p(c_tilde: f64, eps: f64) -> f64 {
    -(-2.0 * c_tilde * eps * eps).exp_m1() / 2.0
}

fn check_d_args(omega: &[FieldElement], p: f64) -> Result<()> {
    if omega.is_empty() {
        return Err(Error::InvalidParameter("omega must be nonempty".into()));
    }
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::InvalidParameter(format!("p={p} outside [0, 1/2]")));
    }
    Ok(())
}

/// Exact law of `Y = sum_b zeta_b * b`, `zeta_b` i.i.d. Bernoulli(p), by
/// folding one coin at a time: `new[v] = (1-p) old[v] + p old[v + b]`.
pub fn d_pmf(ctx: Arc<FieldCtx>, omega: &[FieldElement], p: f64) -> Result<Pmf> {
    check_d_args(omega, p)?;
    let q = ctx.order() as usize;
    let mut cur = vec![0.0; q];
    cur[0] = 1.0;
    let mut next = vec![0.0; q];
    for b in omega {
        let b = ctx.element(b.value())?.value() as usize;
        for (v, slot) in next.iter_mut().enumerate() {
            *slot = (1.0 - p) * cur[v] + p * cur[v ^ b];
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(Pmf { ctx, probs: cur })
}

/// One draw of `Y` using the given generator.
pub fn sample_d_with(rng: &mut Rng, omega: &[FieldElement], p: f64) -> FieldElement {
    omega
        .iter()
        .filter(|_| rng.random::<f64>() < p)
        .fold(FieldElement::ZERO, |acc, &b| acc + b)
}

/// One draw of `Y` from a fresh stream seeded with `seed`.
pub fn sample_d(omega: &[FieldElement], p: f64, seed: u64) -> Result<FieldElement> {
    check_d_args(omega, p)?;
    Ok(sample_d_with(&mut rng_from_seed(seed), omega, p))
}

/// Empirical symbol distribution of a word.
pub fn empirical_dist(ctx: Arc<FieldCtx>, c: &[FieldElement]) -> Result<Pmf> {
    if c.is_empty() {
        return Err(Error::InvalidParameter("empty word".into()));
    }
    let mut counts = vec![0usize; ctx.order() as usize];
    for &s in c {
        counts[ctx.element(s.value())?.value() as usize] += 1;
    }
    let n = c.len() as f64;
    Ok(Pmf {
        ctx,
        probs: counts.into_iter().map(|k| k as f64 / n).collect(),
    })
}
