use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use concatgv::bounds::{gv_check, gv_rate, zyablov_rate, RateDistancePoint};
use concatgv::certify::{
    check_nice, d_pmf, entropy_hypothesis_with, soft_bernoulli_p, soft_condition,
    soft_delta_threshold, SoftMode, TvConvention,
};
use concatgv::codes::{
    min_distance, weight_distribution, BinaryCode, ConcatCode, DistanceMode, LinearCode, OuterCode,
};
use concatgv::exec::Exec;
use concatgv::field::FieldCtx;
use concatgv::io::{write_file, CodeFile};
use concatgv::moments::{
    bad_bound, count_w, moment_direct, moment_dual, poisson_product_check, ratio_string,
};
use concatgv::report::{curve_dat, SweepReport};
use concatgv::sweep::{default_c, default_c_tilde, run_sweep, SweepConfig};

use crate::{emit, emit_report, hex_list, parse_list, read_to_string, require, Common};

/// Exact enumeration is chosen automatically up to this many codewords.
const AUTO_EXACT_LIMIT: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Auto,
    Exact,
    Montecarlo,
}

fn load_outer(path: &Path) -> Result<OuterCode> {
    CodeFile::load(path)?
        .to_outer()
        .with_context(|| format!("outer code {}", path.display()))
}

fn load_inner(path: &Path) -> Result<BinaryCode> {
    CodeFile::load(path)?
        .to_binary()
        .with_context(|| format!("inner code {}", path.display()))
}

fn load_concat(outer: &Path, inner: &Path) -> Result<ConcatCode> {
    Ok(ConcatCode::new(load_outer(outer)?, load_inner(inner)?)?)
}

fn instance(cc: &ConcatCode) -> Value {
    json!({
        "field": cc.ctx().descriptor(),
        "n": cc.outer().n(),
        "k": cc.outer().k(),
        "n0": cc.inner().n(),
        "k0": cc.inner().k(),
        "omega": hex_list(cc.omega().iter().map(|b| b.value())),
    })
}

#[derive(Args)]
pub struct FieldArgs {
    #[arg(long)]
    k0: u32,
    #[command(flatten)]
    common: Common,
}

pub fn field(a: FieldArgs) -> Result<()> {
    let ctx = FieldCtx::new(a.k0)?;
    let mut result = json!({
        "descriptor": ctx.descriptor(),
        "order": ctx.order(),
    });
    if a.k0 <= 8 {
        result["trace"] = json!(ctx.elements().map(|x| ctx.trace(x)).collect::<Vec<_>>());
    }
    emit_report(&a.common, "field", json!({"k0": a.k0}), result)
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CodeKind {
    Inner,
    Outer,
}

#[derive(Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    kind: CodeKind,
    /// Outer alphabet degree (ignored for inner codes).
    #[arg(long, default_value_t = 1)]
    k0: u32,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Also write the code file here.
    #[arg(long)]
    code: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

pub fn sample_code(a: SampleArgs) -> Result<()> {
    let seed = a.common.seed();
    let file = match a.kind {
        CodeKind::Inner => CodeFile::from_binary(&BinaryCode::random(a.n, a.k, seed)?),
        CodeKind::Outer => {
            let ctx = Arc::new(FieldCtx::new(a.k0)?);
            CodeFile::from_outer(&OuterCode::random(ctx, a.n, a.k, seed)?)
        }
    };
    let text = file.render();
    if let Some(path) = &a.code {
        write_file(path, &text)?;
        eprintln!("wrote {}", path.display());
    }
    let params =
        json!({"kind": format!("{:?}", a.kind).to_lowercase(), "k0": a.k0, "n": a.n, "k": a.k});
    let result = json!({
        "field": file.ctx.descriptor(),
        "n": file.n,
        "k": file.k(),
        "rows": file.rows.iter().map(|r| hex_list(r.iter().map(|e| e.value()))).collect::<Vec<_>>(),
        "code_file": text,
    });
    emit_report(&a.common, "sample-code", params, result)
}

#[derive(Args)]
pub struct ConcatArgs {
    #[arg(long)]
    outer: PathBuf,
    #[arg(long)]
    inner: PathBuf,
    #[command(flatten)]
    common: Common,
}

pub fn concat(a: ConcatArgs) -> Result<()> {
    let cc = load_concat(&a.outer, &a.inner)?;
    let mut result = instance(&cc);
    result["big_n"] = json!(cc.big_n());
    result["big_k"] = json!(cc.big_k());
    result["rate"] = json!(cc.rate());
    let params = json!({"outer": a.outer, "inner": a.inner});
    emit_report(&a.common, "concat", params, result)
}

#[derive(Args)]
pub struct DistanceArgs {
    /// A binary code file; alternatively give --outer and --inner.
    #[arg(long, conflicts_with_all = ["outer", "inner"])]
    code: Option<PathBuf>,
    #[arg(long, requires = "inner")]
    outer: Option<PathBuf>,
    #[arg(long, requires = "outer")]
    inner: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    #[command(flatten)]
    common: Common,
}

fn distance_of(code: &impl LinearCode, n: usize, mode: ModeArg, common: &Common) -> Result<Value> {
    let k = code.binary_generator().num_rows();
    let exact = match mode {
        ModeArg::Exact => true,
        ModeArg::Montecarlo => false,
        ModeArg::Auto => (1u128 << k.min(127)) <= AUTO_EXACT_LIMIT.min(common.budget()),
    };
    if exact {
        let wd = weight_distribution(code, common.budget())?;
        let d = wd
            .min_nonzero_weight()
            .context("code has no nonzero codeword")?;
        Ok(json!({
            "n": n, "k": k, "mode": DistanceMode::Exact,
            "min_distance": d, "rel_distance": d as f64 / n as f64,
            "is_exact": true, "weight_distribution": wd.delta,
        }))
    } else {
        let (d, _) = min_distance(
            code,
            DistanceMode::MonteCarlo,
            common.budget(),
            common.seed(),
        )?;
        Ok(json!({
            "n": n, "k": k, "mode": DistanceMode::MonteCarlo,
            "min_distance": d, "rel_distance": d as f64 / n as f64,
            "is_exact": false,
        }))
    }
}

pub fn distance(a: DistanceArgs) -> Result<()> {
    let result = match (&a.code, &a.outer, &a.inner) {
        (Some(path), _, _) => {
            let code = load_inner(path)?;
            distance_of(&code, code.n(), a.mode, &a.common)?
        }
        (None, Some(o), Some(i)) => {
            let cc = load_concat(o, i)?;
            distance_of(&cc, cc.big_n(), a.mode, &a.common)?
        }
        _ => anyhow::bail!("give --code, or both --outer and --inner"),
    };
    let params = json!({"code": a.code, "outer": a.outer, "inner": a.inner, "mode": format!("{:?}", a.mode).to_lowercase()});
    emit_report(&a.common, "distance", params, result)
}

#[derive(Args)]
pub struct NiceArgs {
    #[arg(long)]
    inner: PathBuf,
    /// Niceness parameter [default: k0 / (2 n0)].
    #[arg(long)]
    tau: Option<f64>,
    #[command(flatten)]
    common: Common,
}

pub fn nice_check(a: NiceArgs) -> Result<()> {
    let inner = load_inner(&a.inner)?;
    let tau = a.tau.unwrap_or(inner.rate() / 2.0);
    let rep = check_nice(&inner, tau, a.common.budget())?;
    let params = json!({"inner": a.inner, "tau": tau, "n0": inner.n(), "k0": inner.k()});
    emit_report(&a.common, "nice-check", params, serde_json::to_value(rep)?)
}

#[derive(Args)]
pub struct SoftArgs {
    #[arg(long)]
    outer: PathBuf,
    #[arg(long)]
    inner: PathBuf,
    #[arg(long, default_value_t = default_c_tilde())]
    c_tilde: f64,
    /// Constant in the reported threshold.
    #[arg(long, default_value_t = default_c())]
    c: f64,
    /// Coin bias; overrides the value derived from --c-tilde.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    #[command(flatten)]
    common: Common,
}

pub fn soft_check(a: SoftArgs) -> Result<()> {
    let cc = load_concat(&a.outer, &a.inner)?;
    let eps = cc.rate().sqrt();
    let p = a.p.unwrap_or_else(|| soft_bernoulli_p(a.c_tilde, eps));
    let pmf = d_pmf(cc.ctx().clone(), cc.omega(), p)?;
    let outer = cc.outer();
    let dual = (cc.ctx().order() as u128).saturating_pow((outer.n() - outer.k()) as u32);
    let mode = match a.mode {
        ModeArg::Exact => SoftMode::Exact,
        ModeArg::Montecarlo => SoftMode::MonteCarlo,
        ModeArg::Auto if dual <= a.common.budget() => SoftMode::Exact,
        ModeArg::Auto => SoftMode::MonteCarlo,
    };
    let rep = soft_condition(outer, &pmf, mode, a.common.budget(), a.common.seed())?;
    let (thr, thr_log2) = soft_delta_threshold(a.c, a.c_tilde, eps, cc.big_n());
    let mut result = serde_json::to_value(rep)?;
    result["threshold"] = json!(thr);
    result["threshold_log2"] = json!(thr_log2);
    let mut params = instance(&cc);
    params["c_tilde"] = json!(a.c_tilde);
    params["c"] = json!(a.c);
    params["p"] = json!(p);
    params["epsilon"] = json!(eps);
    emit_report(&a.common, "soft-check", params, result)
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TvArg {
    Halved,
    Unhalved,
}

#[derive(Args)]
pub struct EntropyArgs {
    #[arg(long)]
    outer: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    c_gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    c_eta: f64,
    #[arg(long, value_enum, default_value_t = TvArg::Halved)]
    tv: TvArg,
    /// Inner length, recorded as n0 eps^2 / log2(1/eps).
    #[arg(long)]
    n0: Option<usize>,
    #[command(flatten)]
    common: Common,
}

pub fn entropy_check(a: EntropyArgs) -> Result<()> {
    let outer = load_outer(&a.outer)?;
    let conv = match a.tv {
        TvArg::Halved => TvConvention::Halved,
        TvArg::Unhalved => TvConvention::Unhalved,
    };
    let mut rep = entropy_hypothesis_with(
        &outer,
        a.c_gamma,
        a.c_eta,
        a.common.budget(),
        conv,
        Exec::default(),
    )?;
    if let Some(n0) = a.n0 {
        rep = rep.with_n0(n0);
    }
    let params =
        json!({"outer": a.outer, "c_gamma": a.c_gamma, "c_eta": a.c_eta, "tv": conv, "n0": a.n0});
    emit_report(
        &a.common,
        "entropy-check",
        params,
        serde_json::to_value(rep)?,
    )
}

#[derive(Args)]
pub struct MomentArgs {
    #[arg(long)]
    outer: PathBuf,
    #[arg(long)]
    inner: PathBuf,
    /// Comma-separated moment orders.
    #[arg(long, default_value = "1,2,3")]
    r: String,
    /// Bad-message constant.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Also run the Poissonization check at this rate.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    tail_eps: f64,
    #[command(flatten)]
    common: Common,
}

pub fn moment_check(a: MomentArgs) -> Result<()> {
    let cc = load_concat(&a.outer, &a.inner)?;
    let rs = parse_list(&a.r)?;
    let budget = a.common.budget();
    let mut records = Vec::new();
    for &r in &rs {
        let direct = moment_direct(&cc, r, budget)?;
        let dual = moment_dual(&cc, r, budget)?;
        let w = count_w(&cc, r, budget)?;
        let mut rec = json!({
            "instance": instance(&cc),
            "r": r,
            "direct": ratio_string(&direct),
            "dual": ratio_string(&dual),
            "equal": direct == dual,
            "w_count": w.count,
            "w_bound_log2": w.bound_log2,
            "w_bound_asserted": w.nice,
            "w_holds": w.holds(),
        });
        if r % 2 == 0 {
            let b = bad_bound(&cc, r, a.c, budget)?;
            rec["bad_count"] = json!(b.bad_count);
            rec["b_r"] = json!(b.b_r_f64());
            rec["bad_holds"] = json!(b.holds());
        }
        records.push(rec);
    }
    let mut result = json!({ "records": records });
    if let Some(lambda) = a.lambda {
        result["poisson"] = serde_json::to_value(poisson_product_check(&cc, lambda, a.tail_eps)?)?;
    }
    let params = json!({"outer": a.outer, "inner": a.inner, "r": rs, "c": a.c, "lambda": a.lambda, "tail_eps": a.tail_eps});
    emit_report(&a.common, "moment-check", params, result)
}

#[derive(Args)]
pub struct GvArgs {
    /// Sweep report (JSON) whose rows become measured points.
    #[arg(long)]
    sweep: Option<PathBuf>,
    /// Extra measured point `rate,rel_distance`; repeatable.
    #[arg(long)]
    point: Vec<String>,
    /// Target epsilon for the gv_check verdicts [default: sqrt(rate) per point].
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    #[command(flatten)]
    common: Common,
}

pub fn gv_compare(a: GvArgs) -> Result<()> {
    require(a.grid >= 2, "--grid must be at least 2")?;
    let deltas: Vec<f64> = (0..a.grid)
        .map(|i| 0.5 * i as f64 / a.grid as f64)
        .collect();
    let gv: Vec<(f64, f64)> = deltas
        .iter()
        .map(|&d| Ok((d, gv_rate(d)?)))
        .collect::<Result<_>>()?;
    let zy: Vec<(f64, f64)> = deltas
        .iter()
        .map(|&d| Ok((d, zyablov_rate(d)?)))
        .collect::<Result<_>>()?;

    let mut measured = Vec::new();
    if let Some(path) = &a.sweep {
        let rep = SweepReport::from_json(&read_to_string(path)?)?;
        measured.extend(rep.rows.iter().map(|r| (r.rel_distance, r.rate)));
    }
    for p in &a.point {
        let (r, d) = p
            .split_once(',')
            .context("--point expects rate,rel_distance")?;
        measured.push((d.trim().parse()?, r.trim().parse()?));
    }
    let verdicts: Vec<Value> = measured
        .iter()
        .map(|&(d, r)| {
            let eps = a.eps.unwrap_or(r.sqrt());
            let pt = RateDistancePoint::new(r, d)?;
            Ok(json!({"rate": r, "rel_distance": d, "epsilon": eps, "gv_ok": gv_check(pt, eps, a.c),
                      "gv_rate_at_distance": gv_rate(d)?}))
        })
        .collect::<Result<_>>()?;

    let dir = a.common.directory("gv-compare");
    write_file(&dir.join("gv.dat"), &curve_dat("gv", &gv))?;
    write_file(&dir.join("zyablov.dat"), &curve_dat("zyablov", &zy))?;
    write_file(&dir.join("measured.dat"), &curve_dat("measured", &measured))?;
    eprintln!("wrote curves to {}", dir.display());

    let params =
        json!({"sweep": a.sweep, "point": a.point, "eps": a.eps, "c": a.c, "grid": a.grid});
    let result = json!({"directory": dir, "points": verdicts});
    let common = Common {
        out: Some(dir.join(format!("gv-compare.{}", a.common.fmt().extension()))),
        ..a.common.clone()
    };
    emit_report(&common, "gv-compare", params, result)
}

#[derive(Args)]
pub struct SweepArgs {
    /// JSON sweep configuration.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let mut cfg = SweepConfig::from_json(&read_to_string(&a.config)?)
        .with_context(|| format!("config {}", a.config.display()))?;
    if let Some(seed) = a.common.seed {
        cfg.master_seed = seed;
    }
    if let Some(cap) = a.common.budget {
        let b = &mut cfg.budgets;
        for v in [
            &mut b.distance_exact,
            &mut b.distance_samples,
            &mut b.nice,
            &mut b.soft_exact,
            &mut b.soft_samples,
            &mut b.entropy,
            &mut b.moments,
        ] {
            *v = (*v).min(cap);
        }
    }
    let (rows, agg) = run_sweep(&cfg)?;
    let report = SweepReport::new(cfg, rows, agg);
    emit(&a.common, "sweep", &report.render(a.common.fmt()))
}
