//! Monte-Carlo estimates of how often random polynomial maps are free.
//!
//! Randomness comes from ChaCha8 keyed by the seed, with one stream per map
//! for its coefficients and one for its sample points, so every map of a
//! trial can be evaluated independently and in any order.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::expr::{Chart, Expr};
use crate::geometry::{Distribution, DEFAULT_RANK_TOL};
use crate::hfree::{is_hfree_at_with, MapSpec, RankOptions};
use crate::sym_dim;

/// `z` for a two-sided 95% interval.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomMapSpec {
    pub m: usize,
    pub q: usize,
    pub degree: u32,
    pub seed: u64,
    /// Independent maps under one seed use different streams.
    pub stream: u64,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Uniform on `[0, 1)` with 53 random bits.
fn unit(r: &mut ChaCha8Rng) -> f64 {
    (r.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(r)
}

/// Exponent tuples of total degree `<= degree`, graded then lexicographic.
fn monomials(m: usize, degree: u32) -> Vec<Vec<u32>> {
    fn fill(prefix: &mut Vec<u32>, m: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == m {
            if remaining == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for e in (0..=remaining).rev() {
            prefix.push(e);
            fill(prefix, m, remaining - e, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=degree {
        fill(&mut Vec::with_capacity(m), m, total, &mut out);
    }
    out
}

fn monomial(chart: &Chart, exponents: &[u32]) -> Option<Expr> {
    let mut acc: Option<Expr> = None;
    for (name, &e) in chart.names().iter().zip(exponents) {
        let factor = match e {
            0 => continue,
            1 => Expr::coord(name),
            _ => Expr::coord(name).pow(Expr::num(f64::from(e))),
        };
        acc = Some(match acc {
            Some(a) => a * factor,
            None => factor,
        });
    }
    acc
}

/// `q` dense polynomials of total degree `<= degree` with coefficients
/// uniform on `[-1, 1]`.
pub fn random_poly_map(chart: &Chart, spec: &RandomMapSpec) -> Result<MapSpec> {
    if spec.degree < 2 {
        return Err(Error::InvalidArgument(format!(
            "degree must be at least 2 (got {}): affine maps have no second derivatives",
            spec.degree
        )));
    }
    if spec.m != chart.dim() {
        return Err(Error::DimensionMismatch {
            what: "chart dimension",
            expected: spec.m,
            found: chart.dim(),
        });
    }
    let terms = monomials(spec.m, spec.degree);
    let mut r = rng(spec.seed, spec.stream);
    let mut components = Vec::with_capacity(spec.q);
    for _ in 0..spec.q {
        let mut poly: Option<Expr> = None;
        for exponents in &terms {
            let c = uniform(&mut r, -1.0, 1.0);
            let magnitude = Expr::num(c.abs());
            let term = match monomial(chart, exponents) {
                Some(x) => magnitude * x,
                None => magnitude,
            };
            poly = Some(match (poly, c < 0.0) {
                (None, false) => term,
                (None, true) => -term,
                (Some(p), false) => p + term,
                (Some(p), true) => p - term,
            });
        }
        components.push(poly.unwrap_or(Expr::num(0.0)));
    }
    MapSpec::new(chart, components)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialSpec {
    pub q: usize,
    pub degree: u32,
    pub n_maps: usize,
    pub n_points: usize,
    pub seed: u64,
    /// Sampling box, one interval per coordinate.
    pub bounds: Vec<(f64, f64)>,
    pub tol: f64,
}

impl TrialSpec {
    pub fn new(q: usize, degree: u32, n_maps: usize, n_points: usize, seed: u64, bounds: Vec<(f64, f64)>) -> Self {
        TrialSpec {
            q,
            degree,
            n_maps,
            n_points,
            seed,
            bounds,
            tol: DEFAULT_RANK_TOL,
        }
    }

    pub fn pairs(&self) -> usize {
        self.n_maps * self.n_points
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairOutcome {
    Free,
    NotFree,
    /// A singular value lies within the safety margin of the threshold.
    Marginal,
    /// The matrix could not be assembled (degenerate frame or domain error).
    Failed,
}

/// A (map, point) pair that was not certified free.
#[derive(Clone, Debug, PartialEq)]
pub struct FailingPair {
    pub map: usize,
    pub point: Vec<f64>,
    pub outcome: PairOutcome,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct MapOutcome {
    pub successes: usize,
    pub marginals: usize,
    pub failing: Vec<FailingPair>,
}

pub fn evaluate_pair(d: &Distribution, map: &MapSpec, p: &[f64], tol: f64) -> PairOutcome {
    let opts = RankOptions {
        tol,
        ..RankOptions::default()
    };
    match is_hfree_at_with(d, map, p, opts) {
        Ok(v) if v.matrix.certificate.uncertain() => PairOutcome::Marginal,
        Ok(v) if v.hfree => PairOutcome::Free,
        Ok(_) => PairOutcome::NotFree,
        Err(_) => PairOutcome::Failed,
    }
}

/// The `index`-th random map of a trial and its sample points.
pub fn trial_map(d: &Distribution, spec: &TrialSpec, index: usize) -> Result<(MapSpec, Vec<Vec<f64>>)> {
    let m = d.chart().dim();
    if spec.bounds.len() != m {
        return Err(Error::DimensionMismatch {
            what: "sampling box",
            expected: m,
            found: spec.bounds.len(),
        });
    }
    let map_spec = RandomMapSpec {
        m,
        q: spec.q,
        degree: spec.degree,
        seed: spec.seed,
        stream: 2 * index as u64,
    };
    let map = random_poly_map(d.chart(), &map_spec)?;
    let mut r = rng(spec.seed, 2 * index as u64 + 1);
    let points = (0..spec.n_points)
        .map(|_| spec.bounds.iter().map(|&(lo, hi)| uniform(&mut r, lo, hi)).collect())
        .collect();
    Ok((map, points))
}

pub fn run_map(d: &Distribution, spec: &TrialSpec, index: usize) -> Result<MapOutcome> {
    let (map, points) = trial_map(d, spec, index)?;
    let mut outcome = MapOutcome::default();
    for p in points {
        match evaluate_pair(d, &map, &p, spec.tol) {
            PairOutcome::Free => outcome.successes += 1,
            other => {
                if other == PairOutcome::Marginal {
                    outcome.marginals += 1;
                }
                outcome.failing.push(FailingPair {
                    map: index,
                    point: p,
                    outcome: other,
                });
            }
        }
    }
    Ok(outcome)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenericityReport {
    pub q: usize,
    pub degree: u32,
    /// Number of (map, point) pairs.
    pub n: usize,
    pub successes: usize,
    pub marginals: usize,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    /// `q < k + s_k`: no map can be free and nothing was sampled.
    pub too_few_targets: bool,
    pub failing: Vec<FailingPair>,
}

/// Wilson score interval for `successes` out of `n` at 95%.
pub fn wilson_interval(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z95 * crate::math::sqrt(p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)) / denom;
    // the interval closes exactly at the boundary estimates
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Combines per-map outcomes, which must be given in map order.
pub fn summarize(spec: &TrialSpec, outcomes: impl IntoIterator<Item = MapOutcome>) -> GenericityReport {
    let mut report = GenericityReport {
        q: spec.q,
        degree: spec.degree,
        n: spec.pairs(),
        successes: 0,
        marginals: 0,
        fraction: 0.0,
        ci_low: 0.0,
        ci_high: 0.0,
        seed: spec.seed,
        too_few_targets: false,
        failing: Vec::new(),
    };
    for o in outcomes {
        report.successes += o.successes;
        report.marginals += o.marginals;
        report.failing.extend(o.failing);
    }
    if report.n > 0 {
        report.fraction = report.successes as f64 / report.n as f64;
    }
    (report.ci_low, report.ci_high) = wilson_interval(report.successes, report.n);
    report
}

/// The report for `q < k + s_k`, where the freeness matrix has fewer columns
/// than the rank required and every pair fails.
pub fn too_few_targets_report(spec: &TrialSpec) -> GenericityReport {
    let mut report = summarize(spec, core::iter::empty());
    report.too_few_targets = true;
    report
}

pub fn requires_sampling(d: &Distribution, spec: &TrialSpec) -> bool {
    spec.q >= d.rank() + sym_dim(d.rank())
}

/// Fraction of free (map, point) pairs, evaluated sequentially.
pub fn genericity_trial(d: &Distribution, spec: &TrialSpec) -> Result<GenericityReport> {
    if spec.degree < 2 {
        return Err(Error::InvalidArgument("degree must be at least 2".into()));
    }
    if !requires_sampling(d, spec) {
        return Ok(too_few_targets_report(spec));
    }
    let outcomes = (0..spec.n_maps).map(|i| run_map(d, spec, i)).collect::<Result<Vec<_>>>()?;
    Ok(summarize(spec, outcomes))
}
