//! Execution of a parsed scenario.
//!
//! Every task produces a [`TaskOutput`]: a pass/fail verdict, a summary, one
//! record per evaluated point, the failing points and the artifact files.
//! Core errors that mean "the check did not hold" become failures in the
//! report; errors that mean "the input is malformed" abort the run.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use hfree_core::contour::Grid;
use hfree_core::genericity::{run_map, summarize, too_few_targets_report, requires_sampling, GenericityReport, PairOutcome, TrialSpec};
use hfree_core::hfree::{assemble_d_with, infinitesimal_invert_with, is_hfree_at_with, Diagonal, RankOptions};
use hfree_core::transversal::{glue, verify_transversal, BumpProfile, Tube, TubeOptions, Window};
use hfree_core::{
    build_cis, build_rp, cis_constant, compose_1d, curve_freeness, induced_metric, lie, rp_bracket, sym_dim, Chart,
    DMatrix, Distribution, Error, Expr, FreeCurve, MapSpec, VectorField,
};

use crate::output::{csv_number, csv_text};
use crate::scenario::{PointSpec, Scenario, TaskSpec, TransversalMode};
use crate::svg::{level_plot, render_svg};

/// Settings resolved from command line flags, the scenario and defaults.
pub struct Context<'a> {
    pub seed: u64,
    pub tol: f64,
    pub pool: &'a rayon::ThreadPool,
}

impl Context<'_> {
    fn rank_options(&self) -> RankOptions {
        RankOptions {
            tol: self.tol,
            ..RankOptions::default()
        }
    }
}

#[derive(Debug, Default)]
pub struct TaskOutput {
    pub pass: bool,
    pub summary: Map<String, Value>,
    pub points: Vec<Value>,
    pub failures: Vec<Value>,
    pub warnings: Vec<String>,
    /// File name and contents.
    pub files: Vec<(String, String)>,
}

impl TaskOutput {
    fn failed(message: String) -> TaskOutput {
        TaskOutput {
            pass: false,
            failures: vec![json!({ "error": message })],
            ..TaskOutput::default()
        }
    }
}

/// An error that makes the scenario unusable, as opposed to a failed check.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct InputError(pub String);

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Syntax { .. }
            | Error::UnknownFunction { .. }
            | Error::UnknownCoordinate(_)
            | Error::InvalidChart(_)
            | Error::DimensionMismatch { .. }
            | Error::ChartMismatch
            | Error::NotSymmetric
            | Error::NotFree { .. }
            | Error::NotPeriodic { .. }
            | Error::InvalidArgument(_)
    )
}

/// Turns a task-level core error into either an input error or a failed report.
fn task_error(e: Error) -> Result<TaskOutput, InputError> {
    if is_input_error(&e) {
        Err(InputError(e.to_string()))
    } else {
        Ok(TaskOutput::failed(e.to_string()))
    }
}

macro_rules! attempt {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return task_error(e),
        }
    };
}

/// Explicit points first, then `random` uniform points drawn from ChaCha8 keyed by `seed`.
pub fn sample_points(spec: &PointSpec, seed: u64) -> Vec<Vec<f64>> {
    let mut points = spec.explicit.clone();
    if let Some(bounds) = &spec.bounds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..spec.random {
            points.push(
                bounds
                    .iter()
                    .map(|(lo, hi)| lo + (hi - lo) * (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
                    .collect(),
            );
        }
    }
    points
}

/// The evidence behind a rank decision.
fn rank_record(m: &DMatrix, tol: f64) -> Value {
    let c = &m.certificate;
    json!({
        "certified": c.rank,
        "required": m.required_rank(),
        "rows": m.rows,
        "cols": m.cols,
        "smallest_retained_sv": c.smallest_retained(),
        "largest_discarded_sv": c.largest_discarded(),
        "threshold": c.threshold,
        "tol": tol,
        "uncertain": c.uncertain(),
    })
}

fn min_or_null(values: impl Iterator<Item = f64>) -> Value {
    values.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v)))).map_or(Value::Null, Value::from)
}

pub fn execute(scenario: &Scenario, ctx: &Context) -> Result<TaskOutput, InputError> {
    let points = sample_points(&scenario.points, ctx.seed);
    match &scenario.task {
        TaskSpec::CheckHfree { distribution, map } => Ok(check_hfree(distribution, map, &points, ctx)),
        TaskSpec::InducedMetric { distribution, map } => Ok(induced_metric_task(distribution, map, &points, ctx)),
        TaskSpec::Invert {
            distribution,
            map,
            delta_g,
            psi,
        } => Ok(invert(distribution, map, delta_g, psi, &points, ctx)),
        TaskSpec::Construct1d {
            field,
            f,
            curve,
            identity_tol,
        } => construct_1d(&scenario.chart, field, f, curve, *identity_tol, &points, ctx),
        TaskSpec::ConstructCis {
            distribution,
            functions,
            curves,
            constant,
            identity_tol,
        } => construct_cis(&scenario.chart, distribution, functions, curves, *constant, *identity_tol, &points, ctx),
        TaskSpec::ConstructRp {
            bracket,
            h,
            f,
            curve,
            identity_tol,
        } => {
            let rp = match build_rp(bracket, h.clone(), f.clone(), curve.clone()) {
                Ok(rp) => rp,
                Err(e) => return task_error(e),
            };
            construct_rp(&rp, *identity_tol, &points, ctx)
        }
        TaskSpec::RpBracket { bracket, f, g } => {
            let values: Vec<_> = ctx.pool.install(|| points.par_iter().map(|p| rp_bracket(bracket, f, g, p)).collect());
            let mut out = TaskOutput {
                pass: true,
                ..TaskOutput::default()
            };
            for (p, v) in points.iter().zip(values) {
                match v {
                    Ok(v) => out.points.push(json!({ "point": p, "value": v })),
                    Err(e) => {
                        out.pass = false;
                        out.points.push(json!({ "point": p, "error": e.to_string() }));
                        out.failures.push(json!({ "point": p, "error": e.to_string() }));
                    }
                }
            }
            out.summary.insert("points".into(), points.len().into());
            Ok(out)
        }
        TaskSpec::Transversal { field, mode } => {
            let window = scenario.window.as_ref().expect("checked at parse time");
            transversal(&scenario.chart, field, mode, window, ctx)
        }
        TaskSpec::Genericity {
            distribution,
            q,
            degree,
            n_maps,
            n_points,
        } => {
            let bounds = scenario.points.bounds.clone().expect("checked at parse time");
            genericity(distribution, q, *degree, *n_maps, *n_points, bounds, ctx)
        }
        TaskSpec::RenderLevels {
            functions,
            levels,
            include_levels,
        } => {
            let window = scenario.window.as_ref().expect("checked at parse time");
            render_levels(&scenario.chart, functions, *levels, include_levels, window)
        }
    }
}

fn check_hfree(d: &Distribution, map: &MapSpec, points: &[Vec<f64>], ctx: &Context) -> TaskOutput {
    let required = d.rank() + sym_dim(d.rank());
    if map.target_dim() < required {
        return TaskOutput::failed(Error::TooFewTargets { q: map.target_dim(), required }.to_string());
    }
    let opts = ctx.rank_options();
    let verdicts: Vec<_> = ctx.pool.install(|| points.par_iter().map(|p| is_hfree_at_with(d, map, p, opts)).collect());
    let mut out = TaskOutput::default();
    let (mut uncertain, mut dets, mut retained) = (0, Vec::new(), Vec::new());
    for (p, verdict) in points.iter().zip(verdicts) {
        match verdict {
            Ok(v) => {
                let m = &v.matrix;
                let unsure = m.certificate.uncertain();
                uncertain += usize::from(unsure);
                let det = m.determinant();
                dets.extend(det.map(f64::abs));
                retained.extend(m.certificate.smallest_retained());
                out.points.push(json!({
                    "point": p,
                    "hfree": v.hfree,
                    "determinant": det,
                    "rank": rank_record(m, ctx.tol),
                }));
                if !v.hfree || unsure {
                    let reason = if v.hfree { "rank decision is uncertain" } else { "rank deficient" };
                    out.failures.push(json!({ "point": p, "reason": reason, "certified_rank": m.certified_rank() }));
                }
            }
            Err(e) => {
                out.points.push(json!({ "point": p, "error": e.to_string() }));
                out.failures.push(json!({ "point": p, "reason": e.to_string() }));
            }
        }
    }
    out.pass = out.failures.is_empty();
    let s = &mut out.summary;
    s.insert("points".into(), points.len().into());
    s.insert("failed".into(), out.failures.len().into());
    s.insert("uncertain".into(), uncertain.into());
    s.insert("required_rank".into(), required.into());
    s.insert("min_abs_determinant".into(), min_or_null(dets.into_iter()));
    s.insert("min_smallest_retained_sv".into(), min_or_null(retained.into_iter()));
    out
}

fn induced_metric_task(d: &Distribution, map: &MapSpec, points: &[Vec<f64>], ctx: &Context) -> TaskOutput {
    let opts = ctx.rank_options();
    let results: Vec<_> = ctx.pool.install(|| {
        points
            .par_iter()
            .map(|p| Ok::<_, Error>((induced_metric(d, map, p)?, assemble_d_with(d, map, p, opts)?)))
            .collect()
    });
    let k = d.rank();
    let mut out = TaskOutput::default();
    for (p, r) in points.iter().zip(results) {
        match r {
            Ok((g, m)) => {
                let pd = g.is_positive_definite();
                let rows: Vec<Vec<f64>> = (0..k).map(|a| (0..k).map(|b| g.get(a, b)).collect()).collect();
                out.points.push(json!({
                    "point": p,
                    "metric": rows,
                    "positive_definite": pd,
                    "rank": rank_record(&m, ctx.tol),
                }));
                if !pd {
                    out.failures.push(json!({ "point": p, "reason": "induced metric is not positive definite" }));
                }
            }
            Err(e) => {
                out.points.push(json!({ "point": p, "error": e.to_string() }));
                out.failures.push(json!({ "point": p, "reason": e.to_string() }));
            }
        }
    }
    out.pass = out.failures.is_empty();
    out.summary.insert("points".into(), points.len().into());
    out.summary.insert("failed".into(), out.failures.len().into());
    out
}

fn invert(
    d: &Distribution,
    map: &MapSpec,
    delta_g: &[Vec<Expr>],
    psi: &[Expr],
    points: &[Vec<f64>],
    ctx: &Context,
) -> TaskOutput {
    let opts = RankOptions {
        tol: ctx.tol,
        diagonal: Diagonal::Anticommutator,
    };
    let results: Vec<_> = ctx.pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let m = assemble_d_with(d, map, p, opts);
                (m, infinitesimal_invert_with(d, map, p, delta_g, psi, ctx.tol))
            })
            .collect()
    });
    let mut out = TaskOutput::default();
    let mut worst = 0.0f64;
    for (p, (m, inv)) in points.iter().zip(results) {
        let rank = m.as_ref().map_or(Value::Null, |m| rank_record(m, ctx.tol));
        match inv {
            Ok(inv) => {
                worst = worst.max(inv.residual);
                out.points.push(json!({
                    "point": p,
                    "delta_f": inv.delta_f,
                    "residual": inv.residual,
                    "bound": inv.bound,
                    "rank": rank,
                }));
            }
            Err(e) => {
                out.points.push(json!({ "point": p, "error": e.to_string(), "rank": rank }));
                out.failures.push(json!({ "point": p, "reason": e.to_string() }));
            }
        }
    }
    out.pass = out.failures.is_empty();
    out.summary.insert("points".into(), points.len().into());
    out.summary.insert("failed".into(), out.failures.len().into());
    out.summary.insert("max_residual".into(), worst.into());
    out
}

/// Outcome of comparing an assembled determinant with its closed form.
struct IdentityCheck {
    record: Value,
    pass: bool,
    reason: Option<String>,
    relative_error: Option<f64>,
}

fn identity_check(
    p: &[f64],
    matrix: hfree_core::Result<DMatrix>,
    predicted: hfree_core::Result<f64>,
    identity_tol: f64,
    rank_tol: f64,
    mut extra: Map<String, Value>,
) -> IdentityCheck {
    let (m, predicted) = match (matrix, predicted) {
        (Ok(m), Ok(predicted)) => (m, predicted),
        (Err(e), _) | (_, Err(e)) => {
            return IdentityCheck {
                record: json!({ "point": p, "error": e.to_string() }),
                pass: false,
                reason: Some(e.to_string()),
                relative_error: None,
            }
        }
    };
    let det = m.determinant().unwrap_or(f64::NAN);
    let relative_error = (det - predicted).abs() / det.abs().max(1.0);
    let identity_ok = relative_error <= identity_tol;
    let hfree = m.is_full_rank();
    let reason = if !identity_ok {
        Some("determinant differs from the closed form".to_string())
    } else if !hfree {
        Some("rank deficient".to_string())
    } else {
        None
    };
    extra.insert("point".into(), json!(p));
    extra.insert("determinant".into(), det.into());
    extra.insert("predicted".into(), predicted.into());
    extra.insert("relative_error".into(), relative_error.into());
    extra.insert("identity_ok".into(), identity_ok.into());
    extra.insert("hfree".into(), hfree.into());
    extra.insert("rank".into(), rank_record(&m, rank_tol));
    IdentityCheck {
        record: Value::Object(extra),
        pass: reason.is_none(),
        reason,
        relative_error: Some(relative_error),
    }
}

fn collect_identity(points: &[Vec<f64>], checks: Vec<IdentityCheck>, identity_tol: f64) -> TaskOutput {
    let mut out = TaskOutput::default();
    let mut worst = 0.0f64;
    for (p, c) in points.iter().zip(checks) {
        worst = worst.max(c.relative_error.unwrap_or(0.0));
        if let Some(reason) = c.reason {
            out.failures.push(json!({ "point": p, "reason": reason }));
        }
        out.points.push(c.record);
    }
    out.pass = out.failures.is_empty();
    out.summary.insert("points".into(), points.len().into());
    out.summary.insert("failed".into(), out.failures.len().into());
    out.summary.insert("identity_tol".into(), identity_tol.into());
    out.summary.insert("max_relative_error".into(), worst.into());
    out
}

fn construct_1d(
    chart: &Chart,
    field: &Distribution,
    f: &Expr,
    curve: &FreeCurve,
    identity_tol: f64,
    points: &[Vec<f64>],
    ctx: &Context,
) -> Result<TaskOutput, InputError> {
    let composed = attempt!(compose_1d(chart, f.clone(), curve.clone()));
    let opts = ctx.rank_options();
    let checks: Vec<_> = ctx.pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let m = assemble_d_with(field, &composed.map, p, opts);
                let predicted = composed.predicted_determinant(field, p);
                identity_check(p, m, predicted, identity_tol, ctx.tol, Map::new())
            })
            .collect()
    });
    let mut out = collect_identity(points, checks, identity_tol);
    out.summary.insert("components".into(), components(&composed.map));
    Ok(out)
}

fn components(map: &MapSpec) -> Value {
    map.components().iter().map(|e| e.to_string()).collect()
}

#[allow(clippy::too_many_arguments)]
fn construct_cis(
    chart: &Chart,
    d: &Distribution,
    functions: &[Expr],
    curves: &[FreeCurve],
    constant: Option<f64>,
    identity_tol: f64,
    points: &[Vec<f64>],
    ctx: &Context,
) -> Result<TaskOutput, InputError> {
    let cis = attempt!(build_cis(chart, functions.to_vec(), curves.to_vec()));
    let (constant, source) = match constant {
        Some(c) => (c, "scenario"),
        None => (attempt!(cis_constant(cis.n())), "measured"),
    };
    let opts = ctx.rank_options();
    let checks: Vec<_> = ctx.pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let g = match cis.diagonal_derivatives(d, p) {
                    Ok(g) => g,
                    Err(e) => return identity_check(p, Err(e), Ok(0.0), identity_tol, ctx.tol, Map::new()),
                };
                let m = assemble_d_with(d, &cis.map, p, opts);
                let predicted = cis.predicted_determinant(d, p, constant);
                let mut extra = Map::new();
                extra.insert("g".into(), json!(g));
                let mut c = identity_check(p, m, predicted, identity_tol, ctx.tol, extra);
                if c.reason.is_none() && g.iter().any(|v| !(*v > 0.0)) {
                    c.pass = false;
                    c.reason = Some("some L_xi_i f^i is not positive".into());
                }
                c
            })
            .collect()
    });
    let mut out = collect_identity(points, checks, identity_tol);
    out.summary.insert("constant".into(), constant.into());
    out.summary.insert("constant_source".into(), source.into());
    out.summary.insert("components".into(), components(&cis.map));
    Ok(out)
}

fn construct_rp(rp: &hfree_core::RpMap, identity_tol: f64, points: &[Vec<f64>], ctx: &Context) -> Result<TaskOutput, InputError> {
    let d = attempt!(rp.distribution());
    let opts = ctx.rank_options();
    let checks: Vec<_> = ctx.pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let bracket = rp_bracket(&rp.spec, &rp.hamiltonian, &rp.composed.f, p);
                let m = assemble_d_with(&d, rp.map(), p, opts);
                let predicted = bracket.clone().and_then(|b| {
                    let value = rp.composed.f.eval(rp.spec.chart(), p)?;
                    Ok(curve_freeness(&rp.composed.curve, value)? * b * b * b)
                });
                let mut extra = Map::new();
                extra.insert("bracket".into(), bracket.clone().map_or(Value::Null, Value::from));
                let mut c = identity_check(p, m, predicted, identity_tol, ctx.tol, extra);
                if let Ok(b) = bracket {
                    if !(b > 0.0) {
                        c.pass = false;
                        c.reason = Some(Error::NonTransversal { value: b }.to_string());
                    }
                }
                c
            })
            .collect()
    });
    let mut out = collect_identity(points, checks, identity_tol);
    out.summary.insert("components".into(), components(rp.map()));
    Ok(out)
}

fn transversal(
    chart: &Chart,
    field: &VectorField,
    mode: &TransversalMode,
    window: &Window,
    ctx: &Context,
) -> Result<TaskOutput, InputError> {
    let nodes: Vec<(usize, usize)> = (0..window.ny).flat_map(|j| (0..window.nx).map(move |i| (i, j))).collect();
    let mut out = TaskOutput::default();
    let rows: Vec<Vec<String>> = match mode {
        TransversalMode::Verify(f) => {
            let check = attempt!(verify_transversal(field, f, window));
            out.pass = check.is_transversal();
            out.summary.insert("min_lie".into(), check.min.into());
            out.summary.insert("argmin".into(), json!(check.argmin));
            out.summary.insert("max_lie".into(), check.max.into());
            if !out.pass {
                out.failures.push(json!({ "point": check.argmin, "reason": "L_xi f is not positive", "value": check.min }));
            }
            ctx.pool.install(|| {
                nodes
                    .par_iter()
                    .map(|&(i, j)| {
                        let q = window.node(i, j);
                        let value = f.eval(chart, &q).unwrap_or(f64::NAN);
                        let d = lie(field, f, &q).unwrap_or(f64::NAN);
                        vec![csv_number(q[0]), csv_number(q[1]), csv_number(value), csv_number(d)]
                    })
                    .collect()
            })
        }
        TransversalMode::Glue { seeds, weights } => {
            let opts = TubeOptions::default();
            let tubes: Vec<_> = ctx.pool.install(|| seeds.par_iter().map(|s| Tube::new(field, *s, window, &opts)).collect());
            let tubes = attempt!(tubes.into_iter().collect::<hfree_core::Result<Vec<_>>>());
            let truncated = tubes.iter().filter(|t| t.truncated).count();
            let glued = match glue(field, tubes, weights.clone(), BumpProfile::new(), window) {
                Ok(g) => g,
                Err(Error::CoverageGap { nodes }) => {
                    let mut out = TaskOutput::failed(Error::CoverageGap { nodes: nodes.clone() }.to_string());
                    out.failures.extend(
                        nodes
                            .iter()
                            .map(|&(i, j)| json!({ "point": window.node(i, j), "reason": "not covered by any tube band" })),
                    );
                    out.summary.insert("uncovered_nodes".into(), nodes.len().into());
                    return Ok(out);
                }
                Err(e) => return task_error(e),
            };
            out.pass = glued.is_transversal();
            out.summary.insert("min_lie".into(), glued.min_lie.into());
            out.summary.insert("argmin".into(), json!(glued.argmin));
            out.summary.insert("tubes".into(), glued.tubes.len().into());
            out.summary.insert("truncated_tubes".into(), truncated.into());
            if truncated > 0 {
                out.warnings.push(format!("{truncated} tube transversals did not clear the window"));
            }
            if !out.pass {
                out.failures.push(json!({ "point": glued.argmin, "reason": "L_xi f is not positive", "value": glued.min_lie }));
            }
            nodes
                .iter()
                .map(|&(i, j)| {
                    let q = window.node(i, j);
                    let k = window.index(i, j);
                    let d = glued.lie[k].map_or(String::new(), csv_number);
                    vec![csv_number(q[0]), csv_number(q[1]), csv_number(glued.values[k]), d]
                })
                .collect()
        }
    };
    out.summary.insert("nodes".into(), nodes.len().into());
    out.files.push(("transversal.csv".into(), csv_text(&["x", "y", "f", "L_xi_f"], rows)));
    Ok(out)
}

fn outcome_name(o: PairOutcome) -> &'static str {
    match o {
        PairOutcome::Free => "free",
        PairOutcome::NotFree => "not-free",
        PairOutcome::Marginal => "marginal",
        PairOutcome::Failed => "failed",
    }
}

fn genericity_json(r: &GenericityReport) -> Value {
    json!({
        "q": r.q,
        "degree": r.degree,
        "n": r.n,
        "successes": r.successes,
        "marginals": r.marginals,
        "fraction": r.fraction,
        "ci_low": r.ci_low,
        "ci_high": r.ci_high,
        "seed": r.seed,
        "too_few_targets": r.too_few_targets,
        "failing": r.failing.iter().map(|f| json!({
            "map": f.map,
            "point": f.point,
            "outcome": outcome_name(f.outcome),
        })).collect::<Vec<_>>(),
    })
}

/// One trial per target dimension; maps are evaluated in parallel and
/// combined in index order, so the result does not depend on the thread count.
pub fn parallel_trial(d: &Distribution, spec: &TrialSpec, pool: &rayon::ThreadPool) -> hfree_core::Result<GenericityReport> {
    if spec.degree < 2 {
        return Err(Error::InvalidArgument("degree must be at least 2".into()));
    }
    if !requires_sampling(d, spec) {
        return Ok(too_few_targets_report(spec));
    }
    let outcomes = pool.install(|| {
        (0..spec.n_maps)
            .into_par_iter()
            .map(|i| run_map(d, spec, i))
            .collect::<hfree_core::Result<Vec<_>>>()
    })?;
    Ok(summarize(spec, outcomes))
}

fn genericity(
    d: &Distribution,
    qs: &[usize],
    degree: u32,
    n_maps: usize,
    n_points: usize,
    bounds: Vec<(f64, f64)>,
    ctx: &Context,
) -> Result<TaskOutput, InputError> {
    let mut out = TaskOutput {
        pass: true,
        ..TaskOutput::default()
    };
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for &q in qs {
        let mut spec = TrialSpec::new(q, degree, n_maps, n_points, ctx.seed, bounds.clone());
        spec.tol = ctx.tol;
        let r = attempt!(parallel_trial(d, &spec, ctx.pool));
        if r.too_few_targets {
            out.warnings.push(format!(
                "q = {q} is below k + s_k = {}: no map can be free, nothing was sampled",
                d.rank() + sym_dim(d.rank())
            ));
        }
        rows.push(vec![
            r.q.to_string(),
            r.degree.to_string(),
            r.n.to_string(),
            r.successes.to_string(),
            r.marginals.to_string(),
            csv_number(r.fraction),
            csv_number(r.ci_low),
            csv_number(r.ci_high),
            r.seed.to_string(),
        ]);
        results.push(genericity_json(&r));
    }
    out.summary.insert("trials".into(), Value::Array(results));
    out.files.push((
        "genericity.csv".into(),
        csv_text(&["q", "degree", "n", "successes", "marginals", "fraction", "ci_low", "ci_high", "seed"], rows),
    ));
    Ok(out)
}

fn render_levels(
    chart: &Chart,
    functions: &[(String, Expr)],
    n_levels: usize,
    include: &[f64],
    window: &Window,
) -> Result<TaskOutput, InputError> {
    let mut out = TaskOutput {
        pass: true,
        ..TaskOutput::default()
    };
    let mut plots = Map::new();
    for (name, f) in functions {
        let grid = attempt!(Grid::sample(f, chart, window));
        let plot = level_plot(&grid, n_levels, include);
        if plot.constant {
            out.warnings.push(format!("{name} is constant on the window: no contours drawn"));
        }
        if plot.skipped_nodes > 0 {
            out.warnings.push(format!("{name}: {} grid nodes could not be evaluated and were skipped", plot.skipped_nodes));
        }
        let file = format!("levels_{name}.svg");
        let levels: Vec<Value> = plot
            .levels
            .iter()
            .map(|(level, lines)| json!({ "level": level, "polylines": lines.len() }))
            .collect();
        plots.insert(
            name.clone(),
            json!({
                "function": f.to_string(),
                "file": file,
                "levels": levels,
                "skipped_nodes": plot.skipped_nodes,
                "constant": plot.constant,
                "range": grid.range().map(|(lo, hi)| vec![lo, hi]),
            }),
        );
        out.files.push((file, render_svg(&f.to_string(), window, &plot)));
    }
    out.summary.insert("plots".into(), Value::Object(plots));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_depend_only_on_the_seed() {
        let spec = PointSpec {
            explicit: vec![vec![9.0, 9.0]],
            random: 3,
            bounds: Some(vec![(-1.0, 1.0), (0.0, 2.0)]),
        };
        let a = sample_points(&spec, 5);
        assert_eq!(a, sample_points(&spec, 5));
        assert_ne!(a, sample_points(&spec, 6));
        assert_eq!(a[0], vec![9.0, 9.0]);
        assert!(a[1..].iter().all(|p| (-1.0..1.0).contains(&p[0]) && (0.0..2.0).contains(&p[1])));
    }

    #[test]
    fn error_classes() {
        assert!(is_input_error(&Error::InvalidArgument("x".into())));
        assert!(!is_input_error(&Error::CoverageGap { nodes: vec![] }));
        assert!(!is_input_error(&Error::NonTransversal { value: -1.0 }));
    }
}
