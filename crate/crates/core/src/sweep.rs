//! Ensemble sweeps: sample inner and outer codes per trial, measure the
//! concatenated code, and evaluate the enabled certificates.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bounds::{gv_check, RateDistancePoint};
use crate::certify::{
    check_nice_with, d_pmf, entropy_hypothesis_with, soft_bernoulli_p, soft_condition_with,
    soft_delta_threshold, SoftMode, TvConvention,
};
use crate::codes::{
    min_distance_with, weight_distribution_with, BinaryCode, ConcatCode, DistanceMode, OuterCode,
};
use crate::error::{sat_pow, Error, Result};
use crate::exec::Exec;
use crate::field::FieldCtx;
use crate::moments::{bad_bound_with, moment_direct_with, moment_dual_with};
use crate::rng::derive_seed;

fn default_true() -> bool {
    true
}

/// Proof-artifact constant `128 sqrt(e)`.
pub fn default_c() -> f64 {
    128.0 * std::f64::consts::E.sqrt()
}

/// Proof-artifact constant `4 ln 2`.
pub fn default_c_tilde() -> f64 {
    4.0 * std::f64::consts::LN_2
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_c_tilde")]
    pub c_tilde: f64,
    #[serde(default = "one")]
    pub c_gamma: f64,
    #[serde(default = "one")]
    pub c_eta: f64,
    /// Niceness parameter; `None` means `k0 / (2 n0)`.
    #[serde(default)]
    pub tau: Option<f64>,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            c: default_c(),
            c_tilde: default_c_tilde(),
            c_gamma: 1.0,
            c_eta: 1.0,
            tau: None,
        }
    }
}

/// Per-operation limits. Exact modes run when the enumeration fits the
/// exact limit; otherwise Monte Carlo with the given sample count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    pub distance_exact: u64,
    pub distance_samples: u64,
    pub nice: u64,
    pub soft_exact: u64,
    pub soft_samples: u64,
    pub entropy: u64,
    pub moments: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            distance_exact: 1 << 20,
            distance_samples: 1 << 14,
            nice: 1 << 20,
            soft_exact: 1 << 20,
            soft_samples: 1 << 16,
            entropy: 1 << 20,
            moments: 1 << 24,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub k0: u32,
    pub n0: usize,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default)]
    pub run_nice: bool,
    #[serde(default)]
    pub run_soft: bool,
    #[serde(default)]
    pub run_entropy: bool,
    #[serde(default)]
    pub run_moments: bool,
    #[serde(default)]
    pub r_list: Vec<u32>,
    #[serde(default = "default_true")]
    pub equal_rate: bool,
    #[serde(default)]
    pub tv_convention: TvConvention,
    /// Adds a wall-time column; output is then no longer reproducible.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl SweepConfig {
    pub fn new(k0: u32, n0: usize, n: usize, k: usize, trials: usize, master_seed: u64) -> Self {
        SweepConfig {
            k0,
            n0,
            n,
            k,
            trials,
            master_seed,
            budgets: Budgets::default(),
            constants: Constants::default(),
            run_nice: false,
            run_soft: false,
            run_entropy: false,
            run_moments: false,
            r_list: Vec::new(),
            equal_rate: true,
            tv_convention: TvConvention::Halved,
            record_wall_time: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// `sqrt(K/N)`; equals `k/n = k0/n0` under the equal-rate convention.
    pub fn epsilon(&self) -> f64 {
        self.rate().sqrt()
    }

    pub fn rate(&self) -> f64 {
        (self.k * self.k0 as usize) as f64 / (self.n * self.n0) as f64
    }

    pub fn tau(&self) -> f64 {
        self.constants
            .tau
            .unwrap_or((self.k0 as f64 / self.n0 as f64) / 2.0)
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        crate::report::sha256_hex(json.as_bytes())
    }

    /// Rejects inconsistent parameters and budget conflicts before any
    /// trial runs.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.k0 == 0 || self.k0 > crate::field::MAX_DEGREE {
            return Err(Error::DegreeOutOfRange(self.k0));
        }
        if self.k == 0 || self.k > self.n {
            return bad(format!("need 1 <= k <= n, got k={} n={}", self.k, self.n));
        }
        if self.k0 as usize > self.n0 {
            return bad(format!("need k0 <= n0, got k0={} n0={}", self.k0, self.n0));
        }
        if self.equal_rate && self.k * self.n0 != self.k0 as usize * self.n {
            return bad(format!(
                "equal_rate requires k/n = k0/n0, got {}/{} and {}/{}",
                self.k, self.n, self.k0, self.n0
            ));
        }
        let q = 1u128 << self.k0;
        let k0_ratio = self.k0 as f64 / self.n0 as f64;
        let tau = self.tau();
        if self.run_nice && !(tau > 0.0 && tau < k0_ratio) {
            return bad(format!("tau={tau} outside (0, {k0_ratio})"));
        }
        if self.run_entropy {
            let need = sat_pow(q, self.k as u32);
            if need > self.budgets.entropy as u128 {
                return Err(Error::BudgetExceeded {
                    needed: need,
                    budget: self.budgets.entropy as u128,
                });
            }
            let eta = self.constants.c_eta * self.k as f64 / self.n as f64;
            if !(0.0..1.0).contains(&eta) {
                return bad(format!("c_eta * eps = {eta} outside [0, 1)"));
            }
        }
        if self.run_moments {
            if self.r_list.is_empty() {
                return bad("run_moments needs a nonempty r_list".into());
            }
            let budget = self.budgets.moments as u128;
            let big_n = (self.n * self.n0) as u128;
            for &r in &self.r_list {
                let need = sat_pow(big_n, r).max(sat_pow(q, self.k as u32));
                if need > budget {
                    return Err(Error::BudgetExceeded {
                        needed: need,
                        budget,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRow {
    pub trial: u64,
    pub inner_seed: u64,
    pub outer_seed: u64,
    pub mc_seed: u64,
    pub epsilon: f64,
    pub rate: f64,
    pub distance_mode: DistanceMode,
    pub min_distance: u64,
    pub rel_distance: f64,
    pub x_max: Option<u64>,
    pub gv_ok: bool,
    pub nice_ok: Option<bool>,
    pub nice_worst_ratio: Option<f64>,
    pub soft_exact: Option<bool>,
    pub soft_delta: Option<f64>,
    pub soft_threshold_log2: Option<f64>,
    pub entropy_min: Option<f64>,
    pub entropy_ok: Option<bool>,
    pub moments_equal: Option<bool>,
    pub bad_bound_ok: Option<bool>,
    pub wall_ms: Option<f64>,
}

/// Column names in CSV order.
pub const COLUMNS: [&str; 21] = [
    "trial",
    "inner_seed",
    "outer_seed",
    "mc_seed",
    "epsilon",
    "rate",
    "distance_mode",
    "min_distance",
    "rel_distance",
    "x_max",
    "gv_ok",
    "nice_ok",
    "nice_worst_ratio",
    "soft_exact",
    "soft_delta",
    "soft_threshold_log2",
    "entropy_min",
    "entropy_ok",
    "moments_equal",
    "bad_bound_ok",
    "wall_ms",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregate {
    pub trials: u64,
    /// No trials ran; the statistics below are absent.
    pub vacuous: bool,
    pub min_rel_distance: Option<f64>,
    pub median_rel_distance: Option<f64>,
    pub frac_gv_ok: Option<f64>,
    pub frac_nice: Option<f64>,
    pub frac_exact_distance: Option<f64>,
}

pub fn aggregate(rows: &[SweepRow]) -> Aggregate {
    let t = rows.len();
    if t == 0 {
        return Aggregate {
            trials: 0,
            vacuous: true,
            min_rel_distance: None,
            median_rel_distance: None,
            frac_gv_ok: None,
            frac_nice: None,
            frac_exact_distance: None,
        };
    }
    let mut d: Vec<f64> = rows.iter().map(|r| r.rel_distance).collect();
    d.sort_by(f64::total_cmp);
    let median = if t % 2 == 1 {
        d[t / 2]
    } else {
        0.5 * (d[t / 2 - 1] + d[t / 2])
    };
    let frac = |k: usize| k as f64 / t as f64;
    let nice: Vec<bool> = rows.iter().filter_map(|r| r.nice_ok).collect();
    Aggregate {
        trials: t as u64,
        vacuous: false,
        min_rel_distance: Some(d[0]),
        median_rel_distance: Some(median),
        frac_gv_ok: Some(frac(rows.iter().filter(|r| r.gv_ok).count())),
        frac_nice: (!nice.is_empty())
            .then(|| nice.iter().filter(|&&b| b).count() as f64 / nice.len() as f64),
        frac_exact_distance: Some(frac(
            rows.iter()
                .filter(|r| r.distance_mode == DistanceMode::Exact)
                .count(),
        )),
    }
}

/// Seeds of trial `t`: inner code, outer code, Monte Carlo streams.
pub fn trial_seeds(master: u64, t: u64) -> (u64, u64, u64) {
    let s = derive_seed(master, t);
    (derive_seed(s, 0), derive_seed(s, 1), derive_seed(s, 2))
}

pub fn run_trial(cfg: &SweepConfig, ctx: &Arc<FieldCtx>, t: u64) -> Result<SweepRow> {
    let start = Instant::now();
    let exec = Exec::Sequential;
    let (inner_seed, outer_seed, mc_seed) = trial_seeds(cfg.master_seed, t);
    let inner = BinaryCode::random(cfg.n0, cfg.k0 as usize, inner_seed)?;
    let outer = OuterCode::random(ctx.clone(), cfg.n, cfg.k, outer_seed)?;
    let cc = ConcatCode::new(outer, inner)?;
    let big_n = cc.big_n();
    let eps = cfg.epsilon();
    let b = &cfg.budgets;

    let messages = cc.outer().num_messages();
    let (min_distance, distance_mode, x_max) = if messages <= b.distance_exact as u128 {
        let wd = weight_distribution_with(&cc, b.distance_exact as u128, exec)?;
        let d = wd
            .min_nonzero_weight()
            .ok_or_else(|| Error::InvalidParameter("code has no nonzero codeword".into()))?;
        let x_max = wd
            .delta
            .iter()
            .enumerate()
            .skip(1)
            .filter(|&(_, &c)| c > 0)
            .map(|(w, _)| (big_n as i64 - 2 * w as i64).unsigned_abs())
            .max()
            .unwrap_or(0);
        (d, DistanceMode::Exact, Some(x_max))
    } else {
        let (d, _) = min_distance_with(
            &cc,
            DistanceMode::MonteCarlo,
            b.distance_samples as u128,
            derive_seed(mc_seed, 0),
            exec,
        )?;
        (d, DistanceMode::MonteCarlo, None)
    };
    let rel_distance = min_distance as f64 / big_n as f64;
    let rate = cc.rate();
    let gv_ok = gv_check(
        RateDistancePoint { rate, rel_distance },
        eps,
        cfg.constants.c,
    );

    let (mut nice_ok, mut nice_worst_ratio) = (None, None);
    if cfg.run_nice {
        let dual_size = 1u128 << (cfg.n0 - cfg.k0 as usize).min(127);
        if dual_size <= b.nice as u128 {
            let rep = check_nice_with(cc.inner(), cfg.tau(), b.nice as u128, exec)?;
            nice_ok = Some(rep.ok);
            nice_worst_ratio = Some(rep.worst_ratio);
        }
    }

    let (mut soft_exact, mut soft_delta, mut soft_threshold_log2) = (None, None, None);
    if cfg.run_soft {
        let p = soft_bernoulli_p(cfg.constants.c_tilde, eps);
        let pmf = d_pmf(ctx.clone(), cc.omega(), p)?;
        let dual = sat_pow(ctx.order() as u128, (cfg.n - cfg.k) as u32);
        let (mode, budget) = if dual <= b.soft_exact as u128 {
            (SoftMode::Exact, b.soft_exact as u128)
        } else {
            (SoftMode::MonteCarlo, b.soft_samples as u128)
        };
        let rep = soft_condition_with(
            cc.outer(),
            &pmf,
            mode,
            budget,
            derive_seed(mc_seed, 1),
            exec,
        )?;
        soft_exact = Some(rep.is_exact);
        soft_delta = Some(rep.delta);
        soft_threshold_log2 =
            Some(soft_delta_threshold(cfg.constants.c, cfg.constants.c_tilde, eps, big_n).1);
    }

    let (mut entropy_min, mut entropy_ok) = (None, None);
    if cfg.run_entropy {
        let rep = entropy_hypothesis_with(
            cc.outer(),
            cfg.constants.c_gamma,
            cfg.constants.c_eta,
            b.entropy as u128,
            cfg.tv_convention,
            exec,
        )?;
        entropy_min = Some(rep.min);
        entropy_ok = Some(rep.ok);
    }

    let (mut moments_equal, mut bad_bound_ok) = (None, None);
    if cfg.run_moments {
        let budget = b.moments as u128;
        let mut eq = true;
        let mut bad_ok = true;
        for &r in &cfg.r_list {
            eq &= moment_direct_with(&cc, r, budget, exec)?
                == moment_dual_with(&cc, r, budget, exec)?;
            if r % 2 == 0 {
                bad_ok &= bad_bound_with(&cc, r, cfg.constants.c, budget, exec)?.holds();
            }
        }
        moments_equal = Some(eq);
        bad_bound_ok = Some(bad_ok);
    }

    Ok(SweepRow {
        trial: t,
        inner_seed,
        outer_seed,
        mc_seed,
        epsilon: eps,
        rate,
        distance_mode,
        min_distance: min_distance as u64,
        rel_distance,
        x_max,
        gv_ok,
        nice_ok,
        nice_worst_ratio,
        soft_exact,
        soft_delta,
        soft_threshold_log2,
        entropy_min,
        entropy_ok,
        moments_equal,
        bad_bound_ok,
        wall_ms: cfg
            .record_wall_time
            .then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<(Vec<SweepRow>, Aggregate)> {
    run_sweep_with(cfg, Exec::default())
}

/// Runs every trial (in parallel when `exec` allows) and returns rows in
/// trial order.
pub fn run_sweep_with(cfg: &SweepConfig, exec: Exec) -> Result<(Vec<SweepRow>, Aggregate)> {
    cfg.validate()?;
    let ctx = Arc::new(FieldCtx::new(cfg.k0)?);
    let rows = exec
        .map(cfg.trials, |t| run_trial(cfg, &ctx, t as u64))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let agg = aggregate(&rows);
    Ok((rows, agg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::weight_distribution;

    #[test]
    fn zero_trials_is_vacuous() {
        let (rows, agg) = run_sweep(&SweepConfig::new(2, 4, 4, 2, 0, 1)).unwrap();
        assert!(rows.is_empty());
        assert!(agg.vacuous);
        assert_eq!(agg.median_rel_distance, None);
    }

    #[test]
    fn rate_and_independent_distance() {
        let cfg = SweepConfig::new(2, 4, 4, 2, 6, 3);
        let (rows, _) = run_sweep(&cfg).unwrap();
        let ctx = Arc::new(FieldCtx::new(2).unwrap());
        for row in &rows {
            assert_eq!(row.rate, 0.25);
            assert_eq!(row.epsilon, 0.5);
            let inner = BinaryCode::random(4, 2, row.inner_seed).unwrap();
            let outer = OuterCode::random(ctx.clone(), 4, 2, row.outer_seed).unwrap();
            let cc = ConcatCode::new(outer, inner).unwrap();
            let wd = weight_distribution(&cc, 1 << 20).unwrap();
            assert_eq!(row.min_distance as usize, wd.min_nonzero_weight().unwrap());
        }
    }

    #[test]
    fn sequential_equals_parallel() {
        let mut cfg = SweepConfig::new(2, 4, 4, 2, 8, 11);
        cfg.run_nice = true;
        cfg.run_soft = true;
        cfg.run_entropy = true;
        cfg.run_moments = true;
        cfg.r_list = vec![1, 2];
        let a = run_sweep_with(&cfg, Exec::Sequential).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.0.iter().all(|r| r.moments_equal == Some(true)));
        assert!(a.0.iter().all(|r| r.bad_bound_ok == Some(true)));
    }

    #[test]
    fn validation() {
        let mut cfg = SweepConfig::new(2, 4, 4, 3, 1, 0);
        assert!(cfg.validate().is_err());
        cfg.equal_rate = false;
        assert!(cfg.validate().is_ok());
        cfg.run_moments = true;
        assert!(cfg.validate().is_err());
        cfg.r_list = vec![9];
        assert!(matches!(cfg.validate(), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn config_json_rejects_unknown_keys() {
        let ok = r#"{"k0":2,"n0":4,"n":4,"k":2,"trials":1,"master_seed":5}"#;
        let cfg = SweepConfig::from_json(ok).unwrap();
        assert_eq!(cfg.constants.c, default_c());
        assert!(cfg.equal_rate);
        let typo = r#"{"k0":2,"n0":4,"n":4,"k":2,"trials":1,"master_seed":5,"trails":3}"#;
        assert!(SweepConfig::from_json(typo).is_err());
        let nested =
            r#"{"k0":2,"n0":4,"n":4,"k":2,"trials":1,"master_seed":5,"constants":{"cc":1}}"#;
        assert!(SweepConfig::from_json(nested).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = SweepConfig::new(2, 4, 4, 2, 1, 0);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.master_seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
