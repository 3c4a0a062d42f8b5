//! Property suite behind the `check` command.
//!
//! Every criterion draws its randomness from `(rng_seed, criterion, item)`
//! streams and collects parallel results in item order, so the report is a
//! pure function of the configuration. Wall-clock time is returned beside the
//! report, never inside it.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::designs::{bibd_identity_residual, verify_mosaic, BibdParams, ClassPartition, DesignParams, GddParams};
use crate::mosaic_build::Ex2Mosaic;
use crate::quantum::{pinsker_rhs, rel_entropy, renyi2, trace_distance, DensityOperator, Tolerances};
use crate::wiretap::{
    asz_state, avg_error, bound_c, bound_c_bibd, build_modular_code, corollary3_rhs, max_error, max_leakage_search,
    pgm_public_code, sigma_x, CqChannel, LeakageEvaluator, SecurityFunction, ASZ_DIM_CAP,
};

pub const TAU_NUM: f64 = 1e-7;
pub const TAU_IDENTITY: f64 = 1e-9;
pub const TAU_REDUCTION: f64 = 1e-12;
pub const TAU_SEARCH: f64 = 1e-4;
pub const CHI_SQUARE_SIGNIFICANCE: f64 = 1e-3;
pub const DESIGN_TIME_LIMIT: Duration = Duration::from_secs(10);
pub const SWEEP_TIME_LIMIT: Duration = Duration::from_secs(300);

const DESIGN_CONFIGS: [(u32, u32, u32); 4] = [(2, 2, 1), (2, 3, 1), (2, 3, 2), (3, 2, 1)];
const SWEEP_CONFIGS: [(u32, u32, u32); 7] = [
    (2, 2, 1),
    (2, 3, 1),
    (2, 3, 2),
    (3, 2, 1),
    (2, 4, 1),
    (2, 4, 2),
    (2, 4, 3),
];

#[derive(Clone, Debug, Serialize)]
pub struct CheckConfig {
    pub rng_seed: u64,
    pub sweep_channels: usize,
    pub sweep_distributions: usize,
    pub search_iterations: usize,
    pub divergence_pairs: usize,
    pub inverse_pairs: usize,
    pub inverse_draws: usize,
    pub reliability_channels: usize,
    pub search_instances: usize,
    pub grid_steps: usize,
}

impl CheckConfig {
    pub fn full(rng_seed: u64) -> Self {
        Self {
            rng_seed,
            sweep_channels: 105,
            sweep_distributions: 100,
            search_iterations: 300,
            divergence_pairs: 1000,
            inverse_pairs: 10,
            inverse_draws: 10_000,
            reliability_channels: 20,
            search_instances: 10,
            grid_steps: 1000,
        }
    }

    /// Reduced counts for smoke runs; criteria keep their tolerances.
    pub fn quick(rng_seed: u64) -> Self {
        Self {
            rng_seed,
            sweep_channels: 14,
            sweep_distributions: 20,
            search_iterations: 100,
            divergence_pairs: 100,
            inverse_pairs: 2,
            inverse_draws: 2000,
            reliability_channels: 4,
            search_instances: 2,
            grid_steps: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
}

impl CriterionResult {
    fn new(id: u8, name: &str, pass: bool, detail: String, metrics: &[(&str, f64)]) -> Self {
        Self {
            id,
            name: name.to_string(),
            pass,
            detail,
            metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    /// `PASS [3] constant-channel identity: ...`
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub tool_version: String,
    pub config: CheckConfig,
    pub criteria: Vec<CriterionResult>,
    pub pass: bool,
}

impl CheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[derive(Clone, Debug)]
pub struct CheckRun {
    pub report: CheckReport,
    /// Wall-clock time per step, labelled.
    pub timings: Vec<(String, Duration)>,
}

fn item_rng(seed: u64, criterion: u64, item: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((criterion << 32) | item);
    rng
}

fn timed<R>(f: impl FnOnce() -> R) -> (R, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Criteria 1–9.
pub fn run_check(cfg: &CheckConfig) -> CheckRun {
    let mut criteria = Vec::new();
    let mut timings = Vec::new();

    let (c1, t1) = timed(design_identities);
    criteria.push(with_time_limit(c1, t1, DESIGN_TIME_LIMIT));
    timings.push(("criterion 1".to_string(), t1));

    let (sweep, t2) = timed(|| leakage_sweep(cfg));
    let [c2, c4, c5] = sweep;
    criteria.push(with_time_limit(c2, t2, SWEEP_TIME_LIMIT));
    timings.push(("criterion 2".to_string(), t2));

    let (c3, t3) = timed(|| constant_channel_identity(cfg));
    criteria.push(c3);
    timings.push(("criterion 3".to_string(), t3));
    criteria.push(c4);
    criteria.push(c5);

    type Step = fn(&CheckConfig) -> CriterionResult;
    let rest: [(u8, Step); 4] = [
        (6, divergence_properties),
        (7, inverse_uniformity),
        (8, reliability_separation),
        (9, search_oracle),
    ];
    for (id, step) in rest {
        let (c, t) = timed(|| step(cfg));
        criteria.push(c);
        timings.push((format!("criterion {id}"), t));
    }

    criteria.sort_by_key(|c| c.id);
    let pass = criteria.iter().all(|c| c.pass);
    CheckRun {
        report: CheckReport {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
            criteria,
            pass,
        },
        timings,
    }
}

/// Criteria 1–9 twice, plus criterion 10 comparing the two serialized reports.
pub fn run_check_twice(cfg: &CheckConfig) -> CheckRun {
    let first = run_check(cfg);
    let second = run_check(cfg);
    let a = first.report.to_json();
    let b = second.report.to_json();
    let same = a == b;
    let c10 = CriterionResult::new(
        10,
        "determinism",
        same,
        format!(
            "two runs with rng seed {} {}",
            cfg.rng_seed,
            if same { "are byte-identical" } else { "differ" }
        ),
        &[("report_bytes", a.len() as f64)],
    );
    let mut run = first;
    run.timings
        .extend(second.timings.into_iter().map(|(label, t)| (label + " (repeat)", t)));
    run.report.criteria.push(c10);
    run.report.pass = run.report.criteria.iter().all(|c| c.pass);
    run
}

fn with_time_limit(mut c: CriterionResult, elapsed: Duration, limit: Duration) -> CriterionResult {
    if elapsed >= limit {
        c.pass = false;
        c.detail
            .push_str(&format!("; exceeded time limit of {} s", limit.as_secs()));
    }
    c
}

pub fn design_identities() -> CriterionResult {
    let mut failures = Vec::new();
    let mut members = 0usize;
    for &(q, t, l) in &DESIGN_CONFIGS {
        let ex = match Ex2Mosaic::build(q, t, l) {
            Ok(ex) => ex,
            Err(e) => {
                failures.push(format!("({q},{t},{l}): {e}"));
                continue;
            }
        };
        let mos = match ex.mosaic() {
            Ok(m) => m,
            Err(e) => {
                failures.push(format!("({q},{t},{l}): {e}"));
                continue;
            }
        };
        let (qq, ll) = (q as usize, l as usize);
        let v = qq.pow(t);
        let expected = BibdParams {
            v,
            b: qq.pow(t - l) * (v - 1),
            k: qq.pow(l),
            r: v - 1,
            lambda: qq.pow(ll as u32) - 1,
        };
        let report = verify_mosaic(&mos, None);
        if !report.is_mosaic {
            failures.push(format!("({q},{t},{l}): not a mosaic"));
        }
        for ((label, params), inc) in report.member_params.iter().zip(mos.members()) {
            members += 1;
            if *params != Some(DesignParams::Bibd(expected)) {
                failures.push(format!("({q},{t},{l}) member {label}: {params:?}"));
            }
            if let Some(cell) = bibd_identity_residual(&inc.gram(), &expected) {
                failures.push(format!("({q},{t},{l}) member {label}: NN* residual at {cell:?}"));
            }
        }
    }
    let pass = failures.is_empty();
    let detail = if pass {
        format!(
            "{} mosaics, {members} members, all BIBDs with the expected parameters and exact NN* identity",
            DESIGN_CONFIGS.len()
        )
    } else {
        failures.join("; ")
    };
    CriterionResult::new(
        1,
        "design identities",
        pass,
        detail,
        &[("members", members as f64), ("failures", failures.len() as f64)],
    )
}

fn random_channel(rng: &mut ChaCha8Rng, inputs: usize, dim: usize, pure: bool) -> CqChannel<f64> {
    let states = (0..inputs)
        .map(|_| {
            if pure {
                DensityOperator::random_pure(dim, rng)
            } else {
                DensityOperator::random(dim, rng)
            }
        })
        .collect();
    CqChannel::from_states(states).expect("nonempty")
}

fn dirichlet(rng: &mut ChaCha8Rng, n: usize, concentration: f64) -> Vec<f64> {
    let raw: Vec<f64> = if concentration == 1.0 {
        (0..n).map(|_| Exp1.sample(rng)).collect()
    } else {
        let g = Gamma::new(concentration, 1.0).expect("positive shape");
        (0..n).map(|_| g.sample(rng)).collect()
    };
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.iter().map(|x| x / total).collect()
    } else {
        vec![1.0 / n as f64; n]
    }
}

struct SweepOutcome {
    distributions: usize,
    violations: usize,
    min_margin: f64,
    reduction_gap: f64,
    c3_checked: bool,
    c3_violations: usize,
    c3_min_slack: f64,
    c3_marginal_err: f64,
    error: Option<String>,
}

fn sweep_instance(
    cfg: &CheckConfig,
    item: usize,
    sf: &SecurityFunction,
    bibd: &BibdParams,
    tol: &Tolerances,
) -> SweepOutcome {
    let mut out = SweepOutcome {
        distributions: 0,
        violations: 0,
        min_margin: f64::INFINITY,
        reduction_gap: 0.0,
        c3_checked: false,
        c3_violations: 0,
        c3_min_slack: f64::INFINITY,
        c3_marginal_err: 0.0,
        error: None,
    };
    let mut rng = item_rng(cfg.rng_seed, 2, item as u64);
    let dim = 2 + (item / SWEEP_CONFIGS.len()) % 3;
    let pure = item % 3 == 2;
    let v = random_channel(&mut rng, sf.form().points(), dim, pure);
    let mut run = || -> Result<(), String> {
        let eval = LeakageEvaluator::new(sf.form(), &v, tol).map_err(|e| e.to_string())?;
        let c = sf.bound(&v, tol).map_err(|e| e.to_string())?;
        let c_closed = bound_c_bibd(&v, bibd, tol).map_err(|e| e.to_string())?;
        out.reduction_gap = (c - c_closed).abs();

        let n = eval.colors();
        let mut dists: Vec<Vec<f64>> = vec![vec![1.0 / n as f64; n]];
        for a in 0..n {
            let mut d = vec![0.0; n];
            d[a] = 1.0;
            dists.push(d);
        }
        let search = max_leakage_search(&eval, cfg.search_iterations, &mut rng);
        dists.push(search.distribution);
        let mut i = 0;
        while dists.len() < cfg.sweep_distributions.max(n + 2) {
            let conc = if i % 2 == 0 { 1.0 } else { 0.3 };
            dists.push(dirichlet(&mut rng, n, conc));
            i += 1;
        }
        for d in &dists {
            let chi = eval.avg_chi(d).map_err(|e| e.to_string())?;
            let margin = c - chi.exp2();
            out.min_margin = out.min_margin.min(margin);
            if margin < -TAU_NUM {
                out.violations += 1;
            }
        }
        out.distributions = dists.len();

        let total = n * sf.form().seeds() * dim;
        if total <= ASZ_DIM_CAP {
            out.c3_checked = true;
            let st = asz_state(sf.form(), &v).map_err(|e| e.to_string())?;
            let lhs = st.distance_to_product();
            let rhs = corollary3_rhs(c);
            out.c3_min_slack = rhs - lhs;
            if lhs > rhs + TAU_NUM {
                out.c3_violations += 1;
            }
            out.c3_marginal_err = st.reduced_z().matrix().max_abs_diff(sigma_x(&v).matrix());
        }
        Ok(())
    };
    if let Err(e) = run() {
        out.error = Some(format!("instance {item}: {e}"));
    }
    out
}

/// Criteria 2, 4 and 5 share one sweep of random eavesdropper channels.
pub fn leakage_sweep(cfg: &CheckConfig) -> [CriterionResult; 3] {
    let tol = Tolerances::default();
    let functions: Vec<Result<(SecurityFunction, BibdParams), String>> = SWEEP_CONFIGS
        .iter()
        .map(|&(q, t, l)| {
            let ex = Ex2Mosaic::build(q, t, l).map_err(|e| e.to_string())?;
            let mos = ex.mosaic().map_err(|e| e.to_string())?;
            let sf = SecurityFunction::from_mosaic(&mos, None).map_err(|e| e.to_string())?;
            Ok((sf, ex.expected_params()))
        })
        .collect();

    let outcomes: Vec<SweepOutcome> = (0..cfg.sweep_channels)
        .into_par_iter()
        .map(|item| match &functions[item % SWEEP_CONFIGS.len()] {
            Ok((sf, bibd)) => sweep_instance(cfg, item, sf, bibd, &tol),
            Err(e) => SweepOutcome {
                distributions: 0,
                violations: 0,
                min_margin: f64::NAN,
                reduction_gap: f64::NAN,
                c3_checked: false,
                c3_violations: 0,
                c3_min_slack: f64::NAN,
                c3_marginal_err: f64::NAN,
                error: Some(e.clone()),
            },
        })
        .collect();

    let errors: Vec<&str> = outcomes.iter().filter_map(|o| o.error.as_deref()).collect();
    let distributions: usize = outcomes.iter().map(|o| o.distributions).sum();
    let violations: usize = outcomes.iter().map(|o| o.violations).sum();
    let min_margin = outcomes.iter().map(|o| o.min_margin).fold(f64::INFINITY, f64::min);
    let min_per_channel = outcomes.iter().map(|o| o.distributions).min().unwrap_or(0);
    let enough = cfg.sweep_channels >= 100 && min_per_channel >= 100;
    let c2_pass = errors.is_empty() && violations == 0 && !min_margin.is_nan();
    let mut c2_detail = format!(
        "{} channels x >= {min_per_channel} distributions ({distributions} total): {violations} violations of exp2(avg chi) <= C, min margin {min_margin:.3e}",
        cfg.sweep_channels
    );
    if !enough {
        c2_detail.push_str(" (reduced sweep)");
    }
    if !errors.is_empty() {
        c2_detail.push_str(&format!("; errors: {}", errors.join("; ")));
    }
    let c2 = CriterionResult::new(
        2,
        "leakage bound sweep",
        c2_pass && enough_or_quick(cfg, enough),
        c2_detail,
        &[
            ("channels", cfg.sweep_channels as f64),
            ("distributions", distributions as f64),
            ("violations", violations as f64),
            ("min_margin", min_margin),
        ],
    );

    let max_gap = outcomes.iter().map(|o| o.reduction_gap).fold(0.0, f64::max);
    let gap_nan = outcomes.iter().any(|o| o.reduction_gap.is_nan());
    let c4 = CriterionResult::new(
        4,
        "BIBD closed-form reduction",
        errors.is_empty() && !gap_nan && max_gap <= TAU_REDUCTION,
        format!(
            "max |C - closed form| = {max_gap:.3e} over {} channels (tolerance {TAU_REDUCTION:e})",
            cfg.sweep_channels
        ),
        &[("max_gap", max_gap)],
    );

    let checked: Vec<&SweepOutcome> = outcomes.iter().filter(|o| o.c3_checked).collect();
    let c3_viol: usize = checked.iter().map(|o| o.c3_violations).sum();
    let min_slack = checked.iter().map(|o| o.c3_min_slack).fold(f64::INFINITY, f64::min);
    let marg = checked.iter().map(|o| o.c3_marginal_err).fold(0.0, f64::max);
    let c5 = CriterionResult::new(
        5,
        "trace-distance bound",
        errors.is_empty() && !checked.is_empty() && c3_viol == 0 && marg <= TAU_IDENTITY,
        format!(
            "{} instances within the size cap: {c3_viol} violations, min slack {min_slack:.3e}, max |tr_AS eta - sigma_X| = {marg:.3e}",
            checked.len()
        ),
        &[
            ("instances", checked.len() as f64),
            ("violations", c3_viol as f64),
            ("min_slack", min_slack),
            ("max_marginal_error", marg),
        ],
    );
    [c2, c4, c5]
}

/// Quick configurations are allowed to run below the acceptance counts.
fn enough_or_quick(cfg: &CheckConfig, enough: bool) -> bool {
    enough || cfg.sweep_channels < CheckConfig::full(cfg.rng_seed).sweep_channels
}

/// Valid GDD/BIBD parameter sets, all satisfying `r(k−1) = λ₁(u−1) + λ₂(m−1)u`.
pub fn constant_channel_params() -> Vec<GddParams> {
    let mut out = Vec::new();
    for &(q, t, l) in &SWEEP_CONFIGS {
        let ex = Ex2Mosaic::build(q, t, l).expect("valid configuration");
        out.push(GddParams::from_bibd(&ex.expected_params()));
    }
    let bibds = [
        (7, 7, 3, 3, 1),
        (9, 12, 3, 4, 1),
        (13, 13, 4, 4, 1),
        (11, 11, 5, 5, 2),
        (16, 16, 6, 6, 2),
        (15, 15, 7, 7, 3),
        (13, 26, 3, 6, 1),
    ];
    for (v, b, k, r, lambda) in bibds {
        out.push(GddParams::from_bibd(&BibdParams { v, b, k, r, lambda }));
    }
    // transversal designs TD(k, n): k groups of size n, b = n², r = n
    for (k, n) in [(2, 2), (3, 2), (2, 3), (3, 3), (4, 3), (3, 4), (4, 4), (5, 4), (3, 5)] {
        out.push(GddParams {
            v: k * n,
            b: n * n,
            k,
            r: n,
            u: n,
            m: k,
            lambda1: 0,
            lambda2: 1,
        });
    }
    out.push(GddParams {
        v: 6,
        b: 6,
        k: 3,
        r: 3,
        u: 2,
        m: 3,
        lambda1: 2,
        lambda2: 1,
    });
    out.push(GddParams {
        v: 4,
        b: 10,
        k: 2,
        r: 5,
        u: 2,
        m: 2,
        lambda1: 3,
        lambda2: 1,
    });
    out
}

pub fn constant_channel_identity(cfg: &CheckConfig) -> CriterionResult {
    let tol = Tolerances::default();
    let sets = constant_channel_params();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (i, p) in sets.iter().enumerate() {
        if !p.satisfies_relation() {
            failures.push(format!("{p:?} violates the GDD relation"));
            continue;
        }
        let mut rng = item_rng(cfg.rng_seed, 3, i as u64);
        let dim = rng.random_range(1..=4);
        let state = DensityOperator::<f64>::random(dim, &mut rng);
        let ch = CqChannel::constant(p.v, state);
        let classes = ClassPartition::contiguous(p.m, p.u);
        match bound_c(&ch, p, &classes, &tol) {
            Ok(c) => {
                worst = worst.max((c - 1.0).abs());
                if (c - 1.0).abs() > TAU_IDENTITY {
                    failures.push(format!("{p:?}: C = {c}"));
                }
            }
            Err(e) => failures.push(format!("{p:?}: {e}")),
        }
    }
    // the relation is enforced as a precondition
    let mut rejected = 0;
    let invalid: Vec<GddParams> = sets
        .iter()
        .filter(|p| p.u > 1)
        .map(|p| GddParams {
            lambda2: p.lambda2 + 1,
            ..*p
        })
        .collect();
    for p in &invalid {
        let ch = CqChannel::constant(p.v, DensityOperator::<f64>::maximally_mixed(2));
        if bound_c(&ch, p, &ClassPartition::contiguous(p.m, p.u), &tol).is_err() {
            rejected += 1;
        }
    }
    if rejected != invalid.len() {
        failures.push(format!(
            "{} of {} invalid parameter sets accepted",
            invalid.len() - rejected,
            invalid.len()
        ));
    }
    let pass = failures.is_empty() && sets.len() >= 20;
    CriterionResult::new(
        3,
        "constant-channel identity",
        pass,
        if failures.is_empty() {
            format!(
                "{} parameter sets, max |C - 1| = {worst:.3e}; {rejected} invalid sets rejected",
                sets.len()
            )
        } else {
            failures.join("; ")
        },
        &[
            ("parameter_sets", sets.len() as f64),
            ("max_deviation", worst),
            ("invalid_rejected", rejected as f64),
        ],
    )
}

pub fn divergence_properties(cfg: &CheckConfig) -> CriterionResult {
    let tol = Tolerances::default();
    #[derive(Default)]
    struct Worst {
        d_neg: f64,
        d2_neg: f64,
        d_over_d2: f64,
        pinsker: f64,
        self_div: f64,
        failures: usize,
    }
    let rows: Vec<Result<[f64; 5], String>> = (0..cfg.divergence_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = item_rng(cfg.rng_seed, 6, i as u64);
            let d = 1 + i % 4;
            let rho = DensityOperator::<f64>::random(d, &mut rng);
            let sigma = DensityOperator::<f64>::random(d, &mut rng);
            let dv = rel_entropy(&rho, &sigma, &tol).map_err(|e| e.to_string())?;
            let d2 = renyi2(&rho, &sigma, &tol).map_err(|e| e.to_string())?;
            let td = trace_distance(&rho, &sigma).map_err(|e| e.to_string())?;
            let self_d = rel_entropy(&rho, &rho, &tol).map_err(|e| e.to_string())?;
            let self_d2 = renyi2(&rho, &rho, &tol).map_err(|e| e.to_string())?;
            Ok([
                -dv,
                -d2,
                dv - d2,
                td * td - pinsker_rhs(dv),
                self_d.abs().max(self_d2.abs()),
            ])
        })
        .collect();
    let mut w = Worst {
        d_neg: f64::NEG_INFINITY,
        d2_neg: f64::NEG_INFINITY,
        d_over_d2: f64::NEG_INFINITY,
        pinsker: f64::NEG_INFINITY,
        ..Worst::default()
    };
    for r in &rows {
        match r {
            Ok([a, b, c, d, e]) => {
                w.d_neg = w.d_neg.max(*a);
                w.d2_neg = w.d2_neg.max(*b);
                w.d_over_d2 = w.d_over_d2.max(*c);
                w.pinsker = w.pinsker.max(*d);
                w.self_div = w.self_div.max(*e);
            }
            Err(_) => w.failures += 1,
        }
    }
    let pass = w.failures == 0
        && w.d_neg <= TAU_NUM
        && w.d2_neg <= TAU_NUM
        && w.d_over_d2 <= TAU_NUM
        && w.pinsker <= TAU_NUM
        && w.self_div <= TAU_IDENTITY;
    CriterionResult::new(
        6,
        "divergence properties",
        pass,
        format!(
            "{} pairs: max(-D) {:.3e}, max(-D2) {:.3e}, max(D - D2) {:.3e}, max Pinsker excess {:.3e}, max |D(rho||rho)| {:.3e}, {} errors",
            cfg.divergence_pairs, w.d_neg, w.d2_neg, w.d_over_d2, w.pinsker, w.self_div, w.failures
        ),
        &[
            ("pairs", cfg.divergence_pairs as f64),
            ("max_neg_d", w.d_neg),
            ("max_neg_d2", w.d2_neg),
            ("max_d_minus_d2", w.d_over_d2),
            ("max_pinsker_excess", w.pinsker),
            ("max_self_divergence", w.self_div),
        ],
    )
}

pub fn inverse_uniformity(cfg: &CheckConfig) -> CriterionResult {
    let ex = Ex2Mosaic::build(2, 3, 2).expect("valid configuration");
    let k = ex.expected_params().k;
    let critical = ChiSquared::new((k - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - CHI_SQUARE_SIGNIFICANCE);
    let mut pick = item_rng(cfg.rng_seed, 7, 0);
    let pairs: Vec<(usize, usize)> = (0..cfg.inverse_pairs)
        .map(|_| {
            (
                pick.random_range(0..ex.seeds().len()),
                pick.random_range(0..ex.colors().len()),
            )
        })
        .collect();
    let stats: Vec<(f64, usize)> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(s, a))| {
            let seed = &ex.seeds()[s];
            let alpha = &ex.colors()[a];
            let block = ex.preimage(seed, alpha).expect("valid seed and color");
            let mut counts = vec![0usize; block.len()];
            let mut misses = 0;
            let mut rng = item_rng(cfg.rng_seed, 7, i as u64 + 1);
            for _ in 0..cfg.inverse_draws {
                let x = ex
                    .randomized_inverse(seed, alpha, &mut rng)
                    .expect("valid seed and color");
                if ex.f_eval(seed, &x).ok().as_ref() != Some(alpha) {
                    misses += 1;
                }
                match block.iter().position(|b| b == &x) {
                    Some(p) => counts[p] += 1,
                    None => misses += 1,
                }
            }
            let expected = cfg.inverse_draws as f64 / block.len() as f64;
            let chi2 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
            (chi2, misses)
        })
        .collect();
    let max_stat = stats.iter().map(|s| s.0).fold(0.0, f64::max);
    let rejected = stats.iter().filter(|s| s.0 > critical).count();
    let misses: usize = stats.iter().map(|s| s.1).sum();
    CriterionResult::new(
        7,
        "randomized-inverse uniformity",
        rejected == 0 && misses == 0 && !pairs.is_empty(),
        format!(
            "{} (seed, color) pairs x {} draws over blocks of {k}: max chi-square {max_stat:.3} vs critical {critical:.3}, {rejected} rejections, {misses} round-trip misses",
            pairs.len(),
            cfg.inverse_draws
        ),
        &[
            ("max_statistic", max_stat),
            ("critical_value", critical),
            ("rejections", rejected as f64),
            ("round_trip_misses", misses as f64),
        ],
    )
}

pub fn reliability_separation(cfg: &CheckConfig) -> CriterionResult {
    let tol = Tolerances::default();
    let functions: Vec<SecurityFunction> = DESIGN_CONFIGS
        .iter()
        .map(|&(q, t, l)| {
            let mos = Ex2Mosaic::build(q, t, l)
                .and_then(|e| Ok(e.mosaic()?))
                .expect("valid configuration");
            SecurityFunction::from_mosaic(&mos, None).expect("mosaic of BIBDs")
        })
        .collect();

    let rows: Vec<Result<(usize, f64), String>> = (0..cfg.reliability_channels)
        .into_par_iter()
        .map(|i| {
            let sf = &functions[i % functions.len()];
            let mut rng = item_rng(cfg.rng_seed, 8, i as u64);
            let dim = 2 + (i / functions.len()) % 3;
            let w = random_channel(&mut rng, sf.form().points(), dim, false);
            let public = pgm_public_code(&w, &tol);
            let worst_public = max_error(&public, &w).map_err(|e| e.to_string())?;
            let mut bad = 0;
            let mut slack = f64::INFINITY;
            for s in 0..sf.form().seeds() {
                let code = build_modular_code(&public, sf.form(), s).map_err(|e| e.to_string())?;
                let e = avg_error(&code, &w).map_err(|e| e.to_string())?;
                slack = slack.min(worst_public - e);
                if e > worst_public + TAU_IDENTITY {
                    bad += 1;
                }
            }
            Ok((bad, slack))
        })
        .collect();
    let errors = rows.iter().filter(|r| r.is_err()).count();
    let bad: usize = rows.iter().filter_map(|r| r.as_ref().ok()).map(|r| r.0).sum();
    let min_slack = rows
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .map(|r| r.1)
        .fold(f64::INFINITY, f64::min);

    let mut nonzero = 0;
    for sf in &functions {
        let v = sf.form().points();
        let w =
            CqChannel::from_states((0..v).map(|i| DensityOperator::<f64>::basis(v, i)).collect()).expect("nonempty");
        let public = pgm_public_code(&w, &tol);
        for s in 0..sf.form().seeds() {
            let err = build_modular_code(&public, sf.form(), s)
                .ok()
                .and_then(|c| avg_error(&c, &w).ok());
            if err != Some(0.0) {
                nonzero += 1;
            }
        }
    }
    CriterionResult::new(
        8,
        "reliability separation",
        errors == 0 && bad == 0 && nonzero == 0,
        format!(
            "{} random channels: {bad} seeds above the worst public error, min slack {min_slack:.3e}; orthogonal channels: {nonzero} nonzero modular errors; {errors} errors",
            cfg.reliability_channels
        ),
        &[
            ("channels", cfg.reliability_channels as f64),
            ("violations", bad as f64),
            ("min_slack", min_slack),
            ("orthogonal_nonzero", nonzero as f64),
        ],
    )
}

/// `(a, c, b)` for the 2×2 Hermitian `[[a, b], [b*, c]]`.
type Qubit = (f64, f64, num_complex::Complex<f64>);

fn qubit_entropy((a, c, b): Qubit) -> f64 {
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b.norm_sqr()).sqrt();
    [mean + rad, mean - rad]
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum()
}

/// Brute-force grid maximum of the seed-averaged Holevo quantity for qubit outputs.
pub fn grid_max_qubit(states: &[Vec<Qubit>], steps: usize) -> f64 {
    let colors = states[0].len();
    let entropies: Vec<Vec<f64>> = states
        .iter()
        .map(|row| row.iter().map(|&z| qubit_entropy(z)).collect())
        .collect();
    let value = |p: &[f64]| -> f64 {
        let mut total = 0.0;
        for (row, ent) in states.iter().zip(&entropies) {
            let mut mix = (0.0, 0.0, num_complex::Complex::new(0.0, 0.0));
            let mut avg_ent = 0.0;
            for ((z, h), &w) in row.iter().zip(ent).zip(p) {
                mix.0 += w * z.0;
                mix.1 += w * z.1;
                mix.2 += z.2 * w;
                avg_ent += w * h;
            }
            total += qubit_entropy(mix) - avg_ent;
        }
        total / states.len() as f64
    };
    let h = 1.0 / steps as f64;
    match colors {
        2 => (0..=steps)
            .map(|i| value(&[i as f64 * h, 1.0 - i as f64 * h]))
            .fold(f64::NEG_INFINITY, f64::max),
        3 => (0..=steps)
            .into_par_iter()
            .map(|i| {
                (0..=steps - i)
                    .map(|j| {
                        let (p, q) = (i as f64 * h, j as f64 * h);
                        value(&[p, q, (1.0 - p - q).max(0.0)])
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect::<Vec<f64>>()
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max),
        _ => panic!("grid oracle supports two or three colors"),
    }
}

const SEARCH_CONFIGS: [(u32, u32, u32); 5] = [(2, 2, 1), (2, 3, 2), (2, 4, 3), (3, 2, 1), (3, 2, 1)];

pub fn search_oracle(cfg: &CheckConfig) -> CriterionResult {
    let tol = Tolerances::default();
    let rows: Vec<Result<(f64, f64, usize), String>> = (0..cfg.search_instances)
        .map(|i| {
            let (q, t, l) = SEARCH_CONFIGS[i % SEARCH_CONFIGS.len()];
            let mos = Ex2Mosaic::build(q, t, l)
                .and_then(|e| Ok(e.mosaic()?))
                .map_err(|e| e.to_string())?;
            let form = mos.functional_form().map_err(|e| e.to_string())?;
            let mut rng = item_rng(cfg.rng_seed, 9, i as u64);
            let v = random_channel(&mut rng, form.points(), 2, false);
            let eval = LeakageEvaluator::new(&form, &v, &tol).map_err(|e| e.to_string())?;
            let res = max_leakage_search(&eval, 5000, &mut rng);
            let qubits: Vec<Vec<Qubit>> = (0..eval.seeds())
                .map(|s| {
                    (0..eval.colors())
                        .map(|a| {
                            let m = eval.state(s, a).matrix();
                            (m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)])
                        })
                        .collect()
                })
                .collect();
            let grid = grid_max_qubit(&qubits, cfg.grid_steps);
            Ok((res.value, grid, eval.colors()))
        })
        .collect();
    let errors: Vec<String> = rows.iter().filter_map(|r| r.as_ref().err().cloned()).collect();
    let ok: Vec<&(f64, f64, usize)> = rows.iter().filter_map(|r| r.as_ref().ok()).collect();
    let max_diff = ok.iter().map(|r| (r.0 - r.1).abs()).fold(0.0, f64::max);
    let three = ok.iter().filter(|r| r.2 == 3).count();
    CriterionResult::new(
        9,
        "leakage search vs grid",
        errors.is_empty() && !ok.is_empty() && max_diff <= TAU_SEARCH,
        format!(
            "{} instances ({three} with three colors), grid step 1/{}: max |search - grid| = {max_diff:.3e}{}",
            ok.len(),
            cfg.grid_steps,
            if errors.is_empty() {
                String::new()
            } else {
                format!("; errors: {}", errors.join("; "))
            }
        ),
        &[("instances", ok.len() as f64), ("max_difference", max_diff)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_list_is_valid() {
        let sets = constant_channel_params();
        assert!(sets.len() >= 20);
        assert!(sets.iter().all(|p| p.satisfies_relation() && p.b * p.k == p.v * p.r));
    }

    #[test]
    fn qubit_entropy_examples() {
        let z = num_complex::Complex::new(0.0, 0.0);
        assert!((qubit_entropy((0.5, 0.5, z)) - 1.0).abs() < 1e-15);
        assert_eq!(qubit_entropy((1.0, 0.0, z)), 0.0);
    }

    #[test]
    fn design_criterion_passes() {
        assert!(design_identities().pass);
    }
}
