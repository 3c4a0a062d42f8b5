use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;
use serde_json::{json, Value};

use mosaic_wiretap::check::{run_check, run_check_twice, CheckConfig};
use mosaic_wiretap::derand::{
    choose_block_count, compose, composite_channel, pgm_seed_code, rate_report, rate_report_counts, suggest_block_size,
    RateReport,
};
use mosaic_wiretap::designs::verify_mosaic;
use mosaic_wiretap::designs::{DesignParams, GddParams, Mosaic};
use mosaic_wiretap::format::{
    leakage_csv, parse_channel, parse_classes, parse_distribution, parse_mosaic, write_mosaic,
};
use mosaic_wiretap::gf::FieldCtx;
use mosaic_wiretap::mosaic_build::Ex2Mosaic;
use mosaic_wiretap::quantum::Tolerances;
use mosaic_wiretap::wiretap::{
    avg_error, bound_c_bibd, build_modular_family, corollary3_check, max_error, max_leakage_search, pgm_public_code,
    CqChannel, LeakageEvaluator, LeakageReport, LeakageSearch, SecurityFunction,
};

use crate::output::{emit, read, report, write_atomic};
use crate::{CheckArgs, FieldOpts, GlobalOpts, LeakageArgs, RatesArgs, SimulateArgs, SourceOpts};

pub enum Outcome {
    Success,
    VerificationFailed(String),
}

type CmdResult = Result<Outcome, String>;

fn field_params(f: &FieldOpts) -> Result<(u32, u32, u32), String> {
    match (f.q, f.t, f.ell) {
        (Some(q), Some(t), Some(l)) => Ok((q, t, l)),
        _ => Err("--q, --t and --ell are all required".into()),
    }
}

fn build_ex2(f: &FieldOpts) -> Result<Ex2Mosaic, String> {
    let (q, t, l) = field_params(f)?;
    Ex2Mosaic::build(q, t, l).map_err(|e| e.to_string())
}

fn ex2_mosaic(ex: &Ex2Mosaic) -> Result<Mosaic, String> {
    ex.mosaic().map_err(|e| e.to_string())
}

fn field_echo(f: &FieldOpts) -> Value {
    json!({ "q": f.q, "t": f.t, "ell": f.ell })
}

pub fn mosaic_build(g: &GlobalOpts, f: &FieldOpts) -> CmdResult {
    let ex = build_ex2(f)?;
    let mos = ex2_mosaic(&ex)?;
    let p = ex.expected_params();
    eprintln!(
        "mosaic of ({},{},{}) BIBDs: {} colors, {} seeds",
        p.v,
        p.k,
        p.lambda,
        mos.color_count(),
        mos.seeds()
    );
    emit(g.out.as_deref(), &write_mosaic(&mos)).map_err(|e| e.to_string())?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct MemberEntry<'a> {
    color: &'a str,
    params: &'a Option<DesignParams>,
}

pub fn mosaic_verify(g: &GlobalOpts, input: &Path, classes: Option<&Path>) -> CmdResult {
    let mos = parse_mosaic(&read(input)?).map_err(|e| format!("{}: {e}", input.display()))?;
    let classes = match classes {
        Some(p) => Some(parse_classes(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?),
        None => None,
    };
    if let Some(c) = &classes {
        if c.points() != mos.points() {
            return Err(format!(
                "classes cover {} points, mosaic has {}",
                c.points(),
                mos.points()
            ));
        }
    }
    let rep = verify_mosaic(&mos, classes.as_ref());
    let verdict = rep.verdict();
    let members: Vec<MemberEntry> = rep
        .member_params
        .iter()
        .map(|(c, p)| MemberEntry { color: c, params: p })
        .collect();
    let result = json!({
        "verdict": verdict,
        "is_mosaic": rep.is_mosaic,
        "members_nonempty": rep.members_nonempty,
        "points": mos.points(),
        "seeds": mos.seeds(),
        "members": members,
    });
    let config = json!({ "in": input.display().to_string(), "classes": classes.is_some() });
    emit(g.out.as_deref(), &report("mosaic verify", config, result)).map_err(|e| e.to_string())?;
    eprintln!("{verdict}");
    let unclassified = rep.member_params.iter().filter(|(_, p)| p.is_none()).count();
    if !rep.is_mosaic {
        return Ok(Outcome::VerificationFailed(verdict));
    }
    if unclassified > 0 {
        return Ok(Outcome::VerificationFailed(format!(
            "{unclassified} members are not tactical configurations"
        )));
    }
    Ok(Outcome::Success)
}

struct Source {
    sf: SecurityFunction,
    labels: Vec<String>,
    channel: CqChannel<f64>,
    echo: Value,
}

fn load_source(s: &SourceOpts, tol: &Tolerances) -> Result<Source, String> {
    let (mos, echo) = match &s.mosaic {
        Some(p) => {
            let m = parse_mosaic(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?;
            (m, json!({ "mosaic": p.display().to_string() }))
        }
        None => (ex2_mosaic(&build_ex2(&s.field)?)?, field_echo(&s.field)),
    };
    let classes = match &s.classes {
        Some(p) => Some(parse_classes(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?),
        None => None,
    };
    let sf = SecurityFunction::from_mosaic(&mos, classes).map_err(|e| e.to_string())?;
    let channel: CqChannel<f64> =
        parse_channel(&read(&s.channel)?, tol).map_err(|e| format!("{}: {e}", s.channel.display()))?;
    if channel.inputs() != mos.points() {
        return Err(format!(
            "channel has {} inputs but the mosaic has {} points",
            channel.inputs(),
            mos.points()
        ));
    }
    let mut echo = echo;
    echo["channel"] = json!(s.channel.display().to_string());
    Ok(Source {
        sf,
        labels: mos.colors().to_vec(),
        channel,
        echo,
    })
}

fn margin_check(label: &str, margin: f64, tol: f64) -> Option<String> {
    (margin < -tol || margin.is_nan()).then(|| format!("{label} margin {margin:e} below -{tol:e}"))
}

fn finish(failures: Vec<String>) -> CmdResult {
    if failures.is_empty() {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::VerificationFailed(failures.join("; ")))
    }
}

#[derive(Serialize)]
struct BoundResult {
    params: GddParams,
    bound: f64,
    log2_bound: f64,
    closed_form: Option<f64>,
    trace_distance_bound: f64,
    /// `C − 1`
    margin: f64,
}

pub fn bound(g: &GlobalOpts, s: &SourceOpts) -> CmdResult {
    let tol = Tolerances::default();
    let src = load_source(s, &tol)?;
    let c = src.sf.bound(&src.channel, &tol).map_err(|e| e.to_string())?;
    let p = *src.sf.params();
    let closed_form = if p.lambda1 == p.lambda2 && p.u == 1 {
        let b = mosaic_wiretap::designs::BibdParams {
            v: p.v,
            b: p.b,
            k: p.k,
            r: p.r,
            lambda: p.lambda1,
        };
        Some(bound_c_bibd(&src.channel, &b, &tol).map_err(|e| e.to_string())?)
    } else {
        None
    };
    let result = BoundResult {
        params: p,
        bound: c,
        log2_bound: c.log2(),
        closed_form,
        trace_distance_bound: mosaic_wiretap::wiretap::corollary3_rhs(c),
        margin: c - 1.0,
    };
    emit(g.out.as_deref(), &report("bound", src.echo, &result)).map_err(|e| e.to_string())?;
    finish(margin_check("bound", result.margin, g.tol).into_iter().collect())
}

fn parse_dists(spec: &str, labels: &[String]) -> Result<Vec<Vec<f64>>, String> {
    let n = labels.len();
    if spec == "uniform" {
        return Ok(vec![vec![1.0 / n as f64; n]]);
    }
    if let Some(alpha) = spec.strip_prefix("point:") {
        let idx = labels
            .iter()
            .position(|l| l == alpha)
            .or_else(|| alpha.parse::<usize>().ok().filter(|&i| i < n))
            .ok_or_else(|| format!("unknown color {alpha:?}"))?;
        let mut d = vec![0.0; n];
        d[idx] = 1.0;
        return Ok(vec![d]);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let d = parse_distribution(&read(Path::new(path))?).map_err(|e| format!("{path}: {e}"))?;
        return Ok(vec![d]);
    }
    if let Some(rest) = spec.strip_prefix("random:") {
        let (seed, count) = rest
            .split_once(':')
            .ok_or_else(|| "expected random:<seed>:<count>".to_string())?;
        let seed: u64 = seed.parse().map_err(|e| format!("bad seed: {e}"))?;
        let count: usize = count.parse().map_err(|e| format!("bad count: {e}"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok((0..count)
            .map(|_| {
                let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
                let total: f64 = raw.iter().sum();
                raw.iter().map(|x| x / total).collect()
            })
            .collect());
    }
    Err(format!(
        "unknown distribution spec {spec:?} (uniform | point:<color> | file:<path> | random:<seed>:<count>)"
    ))
}

#[derive(Serialize)]
struct SearchResult {
    #[serde(flatten)]
    search: LeakageSearch,
    exp_value: f64,
    margin: f64,
}

#[derive(Serialize)]
struct LeakageResult {
    bound: f64,
    reports: Vec<LeakageReport>,
    min_margin: f64,
    search: Option<SearchResult>,
}

pub fn leakage(g: &GlobalOpts, a: &LeakageArgs) -> CmdResult {
    let tol = Tolerances::default();
    let src = load_source(&a.source, &tol)?;
    let dists = parse_dists(&a.dist, &src.labels)?;
    let eval = LeakageEvaluator::new(src.sf.form(), &src.channel, &tol).map_err(|e| e.to_string())?;
    let c = src.sf.bound(&src.channel, &tol).map_err(|e| e.to_string())?;
    let reports = dists
        .iter()
        .map(|d| eval.report(d, c))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut failures: Vec<String> = reports
        .iter()
        .enumerate()
        .filter_map(|(i, r)| margin_check(&format!("distribution {i}"), r.margin, g.tol))
        .collect();
    let search = a.search.then(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(g.rng_seed);
        let s = max_leakage_search(&eval, a.iterations, &mut rng);
        let exp_value = s.value.exp2();
        SearchResult {
            search: s,
            exp_value,
            margin: c - exp_value,
        }
    });
    if let Some(s) = &search {
        failures.extend(margin_check("search", s.margin, g.tol));
    }
    if let Some(path) = &a.csv {
        let csv = leakage_csv(&eval, &dists).map_err(|e| e.to_string())?;
        write_atomic(path, &csv).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let result = LeakageResult {
        bound: c,
        min_margin: reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min),
        reports,
        search,
    };
    let mut echo = src.echo;
    echo["dist"] = json!(a.dist);
    echo["rng_seed"] = json!(g.rng_seed);
    echo["search"] = json!(a.search);
    echo["iterations"] = json!(a.iterations);
    echo["tol"] = json!(g.tol);
    emit(g.out.as_deref(), &report("leakage", echo, &result)).map_err(|e| e.to_string())?;
    finish(failures)
}

pub fn corollary3(g: &GlobalOpts, s: &SourceOpts) -> CmdResult {
    let tol = Tolerances::default();
    let src = load_source(s, &tol)?;
    let rep = corollary3_check(&src.sf, &src.channel, &tol).map_err(|e| e.to_string())?;
    let margin = rep.rhs - rep.lhs;
    let result = json!({
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "bound": rep.bound,
        "margin": margin,
    });
    let mut echo = src.echo;
    echo["tol"] = json!(g.tol);
    emit(g.out.as_deref(), &report("corollary3", echo, result)).map_err(|e| e.to_string())?;
    finish(margin_check("trace-distance", margin, g.tol).into_iter().collect())
}

#[derive(Serialize)]
struct SeedErrors {
    seed: usize,
    avg_error: f64,
    max_error: f64,
}

#[derive(Serialize)]
struct CompositeResult {
    blocks: usize,
    seed_uses: usize,
    seed_code_avg_error: f64,
    avg_error: Option<f64>,
    max_error: Option<f64>,
    /// `seed error + N · max_s avg_error(C^s)`
    union_bound: f64,
    skipped: Option<String>,
}

#[derive(Serialize)]
struct SimulateResult {
    public_avg_error: f64,
    public_max_error: f64,
    per_seed: Vec<SeedErrors>,
    composite: CompositeResult,
    rates: RateReport,
}

pub fn simulate(g: &GlobalOpts, a: &SimulateArgs) -> CmdResult {
    let tol = Tolerances::default();
    let (mos, mut echo, fraction) = match &a.mosaic {
        Some(p) => {
            let m = parse_mosaic(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?;
            (m, json!({ "mosaic": p.display().to_string() }), None)
        }
        None => {
            let ex = build_ex2(&a.field)?;
            let (_, t, l) = field_params(&a.field)?;
            (ex2_mosaic(&ex)?, field_echo(&a.field), Some((t - l) as f64 / t as f64))
        }
    };
    let form = mos.functional_form().map_err(|e| e.to_string())?;
    let w: CqChannel<f64> =
        parse_channel(&read(&a.channel)?, &tol).map_err(|e| format!("{}: {e}", a.channel.display()))?;
    if w.inputs() != form.points() {
        return Err(format!(
            "channel has {} inputs but the mosaic has {} points",
            w.inputs(),
            form.points()
        ));
    }
    echo["channel"] = json!(a.channel.display().to_string());
    echo["N"] = json!(a.blocks);

    let public = pgm_public_code(&w, &tol);
    let family = build_modular_family(&public, &form).map_err(|e| e.to_string())?;
    let per_seed = family
        .codes()
        .iter()
        .enumerate()
        .map(|(seed, c)| {
            Ok(SeedErrors {
                seed,
                avg_error: avg_error(c, &w)?,
                max_error: max_error(c, &w)?,
            })
        })
        .collect::<Result<Vec<_>, mosaic_wiretap::wiretap::WiretapError>>()
        .map_err(|e| e.to_string())?;
    let worst_seed = per_seed.iter().map(|s| s.avg_error).fold(0.0, f64::max);

    let (seed_code, seed_ch) = pgm_seed_code(&w, form.seeds(), &tol).map_err(|e| e.to_string())?;
    let seed_err = avg_error(&seed_code, &seed_ch).map_err(|e| e.to_string())?;
    let mu = mosaic_wiretap::derand::seed_uses(w.inputs(), form.seeds());
    let mut composite = CompositeResult {
        blocks: a.blocks,
        seed_uses: mu,
        seed_code_avg_error: seed_err,
        avg_error: None,
        max_error: None,
        union_bound: seed_err + a.blocks as f64 * worst_seed,
        skipped: None,
    };
    match compose(seed_code, family, a.blocks) {
        Ok(comp) => {
            let code = comp.to_code(&tol).map_err(|e| e.to_string())?;
            let ch = composite_channel(&seed_ch, &w, a.blocks);
            composite.avg_error = Some(avg_error(&code, &ch).map_err(|e| e.to_string())?);
            composite.max_error = Some(max_error(&code, &ch).map_err(|e| e.to_string())?);
        }
        Err(e) => composite.skipped = Some(e.to_string()),
    }

    let mut rates = rate_report(&form, 1, mu, a.blocks).map_err(|e| e.to_string())?;
    rates.message_fraction = fraction;

    if let Some(path) = &a.csv {
        let mut csv = String::from("seed,avg_error,max_error\n");
        for s in &per_seed {
            csv.push_str(&format!("{},{:.16e},{:.16e}\n", s.seed, s.avg_error, s.max_error));
        }
        write_atomic(path, &csv).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let result = SimulateResult {
        public_avg_error: avg_error(&public, &w).map_err(|e| e.to_string())?,
        public_max_error: max_error(&public, &w).map_err(|e| e.to_string())?,
        per_seed,
        composite,
        rates,
    };
    emit(g.out.as_deref(), &report("simulate", echo, &result)).map_err(|e| e.to_string())?;
    Ok(Outcome::Success)
}

pub fn rates(g: &GlobalOpts, a: &RatesArgs) -> CmdResult {
    let (q, t, l) = field_params(&a.field)?;
    let ctx = FieldCtx::new(q, t).map_err(|e| e.to_string())?;
    ctx.complementary_subspaces(l).map_err(|e| e.to_string())?;
    if a.n == 0 {
        return Err("--n must be positive".into());
    }
    let points = ctx.size();
    let messages = (q as usize).pow(t - l);
    let seeds = (points - 1) * messages;
    let blocks = match (a.blocks, a.pe, a.eps_leak) {
        (Some(n), _, _) => n,
        (None, Some(pe), Some(eps)) => choose_block_count(pe, eps).map_err(|e| e.to_string())?,
        _ => return Err("give --N, or both --pe and --eps-leak".into()),
    };
    if blocks == 0 {
        return Err("--N must be positive".into());
    }
    let mu = a.mu.unwrap_or_else(|| (seeds as f64).log2().ceil() as usize);
    let mut rep = rate_report_counts(points, messages, seeds, a.n, mu, blocks);
    rep.message_fraction = Some((t - l) as f64 / t as f64);

    let mut suggested_ell = None;
    if let Some(path) = &a.channel {
        let tol = Tolerances::default();
        let v: CqChannel<f64> = parse_channel(&read(path)?, &tol).map_err(|e| format!("{}: {e}", path.display()))?;
        let ex = Ex2Mosaic::build(q, t, l).map_err(|e| e.to_string())?;
        let sf = SecurityFunction::from_mosaic(&ex2_mosaic(&ex)?, None).map_err(|e| e.to_string())?;
        rep.slot_leakage_bound = Some(sf.bound(&v, &tol).map_err(|e| e.to_string())?.log2());
        suggested_ell = suggest_block_size(q, t, &v, 0.0, &tol).map_err(|e| e.to_string())?;
    }
    let echo = json!({
        "q": q, "t": t, "ell": l, "n": a.n, "N": a.blocks, "pe": a.pe, "eps_leak": a.eps_leak,
        "mu": a.mu, "channel": a.channel.as_ref().map(|p| p.display().to_string()),
    });
    let mut result = serde_json::to_value(&rep).map_err(|e| e.to_string())?;
    result["suggested_ell"] = json!(suggested_ell);
    emit(g.out.as_deref(), &report("rates", echo, result)).map_err(|e| e.to_string())?;
    Ok(Outcome::Success)
}

pub fn check(g: &GlobalOpts, a: &CheckArgs) -> CmdResult {
    let cfg = if a.quick {
        CheckConfig::quick(g.rng_seed)
    } else {
        CheckConfig::full(g.rng_seed)
    };
    let run = if a.single {
        run_check(&cfg)
    } else {
        run_check_twice(&cfg)
    };
    for (label, t) in &run.timings {
        eprintln!("{label}: {:.3} s", t.as_secs_f64());
    }
    for c in &run.report.criteria {
        eprintln!("{}", c.line());
    }
    emit(g.out.as_deref(), &run.report.to_json()).map_err(|e| e.to_string())?;
    if run.report.pass {
        Ok(Outcome::Success)
    } else {
        let failed: Vec<String> = run
            .report
            .criteria
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.id.to_string())
            .collect();
        Ok(Outcome::VerificationFailed(format!(
            "criteria {} failed",
            failed.join(", ")
        )))
    }
}
