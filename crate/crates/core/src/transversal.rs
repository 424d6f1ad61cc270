//! Transversal functions for planar line fields: flows, tube charts built
//! from the flow and an orthogonal transversal, smooth step profiles, and the
//! glued function whose derivative along the field is positive.
//!
//! A tube around a seed `p` is the chart `(s, t) -> Phi^t(phi(s))`, where
//! `phi` is the unit-speed integral curve through `p` of the field orthogonal
//! to `xi`, and `Phi^t` the flow of `xi / |xi|`. The tube function is `l(t)`
//! inside the chart and `0` or `1` outside, according to the side of the
//! transversal the point lies on.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jets::{lie_from, VectorField};
use crate::math;

/// Rectangle `[x0, x1] x [y0, y1]` sampled on an `nx x ny` grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Window {
    pub fn new(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<Window> {
        let ordered = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
        if !ordered(x) || !ordered(y) {
            return Err(Error::InvalidArgument("window bounds must satisfy lo < hi".into()));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument("window resolution must be at least 2".into()));
        }
        Ok(Window {
            x0: x.0,
            x1: x.1,
            y0: y.0,
            y1: y.1,
            nx,
            ny,
        })
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y1 - self.y0) / (self.ny - 1) as f64
    }

    /// Node `(i, j)` with `i` along `x`. The last node sits exactly on the upper bound.
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let x = if i + 1 == self.nx { self.x1 } else { self.x0 + i as f64 * self.dx() };
        let y = if j + 1 == self.ny { self.y1 } else { self.y0 + j as f64 * self.dy() };
        [x, y]
    }

    /// Row-major index, rows of constant `y`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn contains(&self, q: [f64; 2]) -> bool {
        (self.x0..=self.x1).contains(&q[0]) && (self.y0..=self.y1).contains(&q[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions {
    /// Largest step the integrator may take.
    pub h_max: f64,
    /// Local error tolerance per step, mixed absolute and relative.
    pub tol: f64,
    /// The trajectory must stay in `|x^alpha| <= bound`.
    pub bound: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            h_max: 0.1,
            tol: 1e-10,
            bound: 1e6,
        }
    }
}

// Dormand-Prince 5(4) tableau; the field is autonomous so the nodes are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive integration of `y' = rhs(y)` from time 0, returning the state at
/// each of `times` (monotone, all of one sign).
fn integrate<F>(rhs: &F, y0: &[f64], times: &[f64], opts: &FlowOptions) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let m = y0.len();
    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut h = opts.h_max.min(0.01);
    let mut out = Vec::with_capacity(times.len());
    let mut k: [Vec<f64>; 7] = Default::default();
    let mut stage = vec![0.0; m];
    for &target in times {
        let direction = if target >= t { 1.0 } else { -1.0 };
        while (target - t) * direction > 0.0 {
            let remaining = (target - t).abs();
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            k[0] = rhs(&y)?;
            for s in 1..7 {
                for a in 0..m {
                    stage[a] = y[a] + direction * step * (0..s).map(|r| A[s][r] * k[r][a]).sum::<f64>();
                }
                k[s] = rhs(&stage)?;
            }
            // the last stage is evaluated at the fifth-order solution
            let y_new = stage.clone();
            let mut err = 0.0_f64;
            for a in 0..m {
                let e = step * (0..7).map(|r| E[r] * k[r][a]).sum::<f64>();
                let scale = opts.tol * (1.0 + y[a].abs().max(y_new[a].abs()));
                err = err.max(e.abs() / scale);
            }
            if !err.is_finite() {
                return Err(Error::BlowUp { time: t });
            }
            if err <= 1.0 {
                t = if last { target } else { t + direction * step };
                y = y_new;
                if y.iter().any(|v| !(v.abs() <= opts.bound)) {
                    return Err(Error::BlowUp { time: t });
                }
                if last {
                    // a step shortened to hit the target says nothing about the next one
                    continue;
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0) };
            h = (step * factor).min(opts.h_max);
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { time: t });
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// `Phi^t_xi(p)`: the flow of `xi` for time `t` starting at `p`.
pub fn flow(xi: &VectorField, p: &[f64], t: f64, opts: &FlowOptions) -> Result<Vec<f64>> {
    let rhs = |y: &[f64]| xi.eval(y);
    Ok(integrate(&rhs, p, &[t], opts)?.remove(0))
}

/// The flow sampled at several monotone times.
pub fn flow_samples(xi: &VectorField, p: &[f64], times: &[f64], opts: &FlowOptions) -> Result<Vec<Vec<f64>>> {
    let rhs = |y: &[f64]| xi.eval(y);
    integrate(&rhs, p, times, opts)
}

fn planar(xi: &VectorField) -> Result<()> {
    if xi.chart().dim() != 2 {
        return Err(Error::DimensionMismatch {
            what: "chart dimension",
            expected: 2,
            found: xi.chart().dim(),
        });
    }
    Ok(())
}

fn unit(xi: &VectorField, y: &[f64], rotate: bool) -> Result<Vec<f64>> {
    let v = xi.eval(y)?;
    let norm = math::sqrt(v[0] * v[0] + v[1] * v[1]);
    if !(norm > 0.0) {
        return Err(Error::Domain { op: "normalize", value: norm });
    }
    Ok(if rotate {
        vec![-v[1] / norm, v[0] / norm]
    } else {
        vec![v[0] / norm, v[1] / norm]
    })
}

/// The smooth step `l` and bump `b(t) = exp(-1/(1-t^2))` on `(-1, 1)`, with
/// `l(t) = int_{-1}^t b / int_{-1}^1 b`.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpProfile {
    /// Cumulative integral of `b` at `-1 + i / PANELS`, `i = 0..=PANELS`.
    cumulative: Vec<f64>,
    total: f64,
}

const PANELS: usize = 256;

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    let mut sum = 0.0;
    for (x, w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
        sum += w * (f(mid - half * x) + f(mid + half * x));
    }
    sum * half
}

impl Default for BumpProfile {
    fn default() -> Self {
        BumpProfile::new()
    }
}

impl BumpProfile {
    pub fn new() -> BumpProfile {
        let h = 1.0 / PANELS as f64;
        let mut cumulative = Vec::with_capacity(PANELS + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 0..PANELS {
            let a = -1.0 + i as f64 * h;
            acc += gauss_legendre(Self::bump, a, a + h);
            cumulative.push(acc);
        }
        BumpProfile {
            total: 2.0 * acc,
            cumulative,
        }
    }

    pub fn bump(t: f64) -> f64 {
        if t.abs() >= 1.0 {
            0.0
        } else {
            math::exp(-1.0 / (1.0 - t * t))
        }
    }

    /// `int_{-1}^t b` for `t <= 0`.
    fn left_integral(&self, t: f64) -> f64 {
        let h = 1.0 / PANELS as f64;
        let i = (((t + 1.0) / h) as usize).min(PANELS - 1);
        let a = -1.0 + i as f64 * h;
        self.cumulative[i] + gauss_legendre(Self::bump, a, t)
    }

    /// The step `l`, symmetric so that `l(t) + l(-t) = 1`.
    pub fn step(&self, t: f64) -> f64 {
        if t <= -1.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else if t <= 0.0 {
            self.left_integral(t) / self.total
        } else {
            1.0 - self.left_integral(-t) / self.total
        }
    }

    pub fn step_derivative(&self, t: f64) -> f64 {
        Self::bump(t) / self.total
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeOptions {
    /// Spacing along the transversal.
    pub ds: f64,
    /// Spacing in flow time.
    pub dt: f64,
    /// Tabulated flow times are `[-half_time, half_time]`; must exceed 1.
    pub half_time: f64,
    /// Extra distance beyond `half_time` by which the transversal must clear the window.
    pub margin: f64,
    /// Longest transversal traced in each direction.
    pub max_length: f64,
    pub flow: FlowOptions,
}

impl Default for TubeOptions {
    fn default() -> Self {
        TubeOptions {
            ds: 0.05,
            dt: 0.05,
            half_time: 1.25,
            margin: 0.1,
            max_length: 50.0,
            flow: FlowOptions {
                h_max: 0.05,
                ..FlowOptions::default()
            },
        }
    }
}

/// Tube coordinates of a point relative to one tube.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TubeCoord {
    Inside { s: f64, t: f64 },
    /// Beyond the tabulated chart; `positive` is the side where the step is 1.
    Outside { positive: bool },
}

/// A tabulated chart `psi_p(s, t)` around a seed point.
#[derive(Clone, Debug, PartialEq)]
pub struct Tube {
    pub seed: [f64; 2],
    /// Transversal parameters, increasing, with `0` at the seed.
    pub s: Vec<f64>,
    /// Flow times, increasing, symmetric around `0`.
    pub t: Vec<f64>,
    /// `points[i * t.len() + j] = psi_p(s[i], t[j])`.
    pub points: Vec<[f64; 2]>,
    /// The transversal did not clear the enlarged window in one of its directions.
    pub truncated: bool,
    reference: [f64; 2],
    index: BucketIndex,
}

impl Tube {
    pub fn new(xi: &VectorField, seed: [f64; 2], window: &Window, opts: &TubeOptions) -> Result<Tube> {
        planar(xi)?;
        if !(opts.half_time > 1.0) || !(opts.ds > 0.0) || !(opts.dt > 0.0) {
            return Err(Error::InvalidArgument("tube options need half_time > 1 and positive spacings".into()));
        }
        let clearance = opts.half_time + opts.margin;
        let outer = [
            window.x0 - clearance,
            window.x1 + clearance,
            window.y0 - clearance,
            window.y1 + clearance,
        ];
        let inside = |q: &[f64]| q[0] > outer[0] && q[0] < outer[1] && q[1] > outer[2] && q[1] < outer[3];

        let orthogonal = |y: &[f64]| unit(xi, y, true);
        let mut truncated = false;
        let mut branches: [Vec<[f64; 2]>; 2] = [Vec::new(), Vec::new()];
        for (branch, direction) in branches.iter_mut().zip([1.0, -1.0]) {
            let mut q = vec![seed[0], seed[1]];
            let mut length = 0.0;
            loop {
                if !inside(&q) {
                    break;
                }
                if length >= opts.max_length {
                    truncated = true;
                    break;
                }
                q = integrate(&orthogonal, &q, &[direction * opts.ds], &opts.flow)?.remove(0);
                length += opts.ds;
                branch.push([q[0], q[1]]);
            }
        }
        let [forward, backward] = branches;
        let transversal: Vec<[f64; 2]> = backward.iter().rev().copied().chain([seed]).chain(forward.iter().copied()).collect();
        let s: Vec<f64> = (0..transversal.len())
            .map(|i| (i as f64 - backward.len() as f64) * opts.ds)
            .collect();

        let steps = libm::ceil(opts.half_time / opts.dt) as usize;
        let t: Vec<f64> = (0..=2 * steps).map(|j| (j as f64 - steps as f64) * opts.dt).collect();
        let forward_times: Vec<f64> = t[steps + 1..].to_vec();
        let backward_times: Vec<f64> = t[..steps].iter().rev().copied().collect();
        let along = |y: &[f64]| unit(xi, y, false);
        let mut points = Vec::with_capacity(transversal.len() * t.len());
        for base in &transversal {
            let back = integrate(&along, base, &backward_times, &opts.flow)?;
            let fwd = integrate(&along, base, &forward_times, &opts.flow)?;
            points.extend(back.iter().rev().map(|q| [q[0], q[1]]));
            points.push(*base);
            points.extend(fwd.iter().map(|q| [q[0], q[1]]));
        }
        let reference = points[backward.len() * t.len()];
        let index = BucketIndex::new(&points, transversal.len(), t.len());
        Ok(Tube {
            seed,
            s,
            t,
            points,
            truncated,
            reference,
            index,
        })
    }

    fn corner(&self, i: usize, j: usize) -> [f64; 2] {
        self.points[i * self.t.len() + j]
    }

    /// The transversal `t = 0` as a polyline.
    pub fn transversal(&self) -> Vec<[f64; 2]> {
        let mid = self.t.len() / 2;
        (0..self.s.len()).map(|i| self.corner(i, mid)).collect()
    }

    /// Locates `q` in the chart by bilinear inversion of the tabulated cells.
    pub fn locate(&self, q: [f64; 2]) -> Result<TubeCoord> {
        let nt = self.t.len();
        for &cell in self.index.candidates(q) {
            let (i, j) = (cell / (nt - 1), cell % (nt - 1));
            let corners = [
                self.corner(i, j),
                self.corner(i + 1, j),
                self.corner(i, j + 1),
                self.corner(i + 1, j + 1),
            ];
            if let Some((u, v)) = bilinear_inverse(&corners, q) {
                let s = self.s[i] + u * (self.s[i + 1] - self.s[i]);
                let t = self.t[j] + v * (self.t[j + 1] - self.t[j]);
                return Ok(TubeCoord::Inside { s, t });
            }
        }
        if self.truncated {
            return Err(Error::OutsideTube { x: q[0], y: q[1] });
        }
        // the reference point lies on the negative side; every crossing of the
        // transversal switches side
        let transversal = self.transversal();
        let crossings = transversal
            .windows(2)
            .filter(|e| segments_cross(q, self.reference, e[0], e[1]))
            .count();
        Ok(TubeCoord::Outside {
            positive: crossings % 2 == 1,
        })
    }

    /// `f_p(q)`.
    pub fn value(&self, profile: &BumpProfile, q: [f64; 2]) -> Result<f64> {
        Ok(match self.locate(q)? {
            TubeCoord::Inside { t, .. } => profile.step(t),
            TubeCoord::Outside { positive } => f64::from(u8::from(positive)),
        })
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Half-open crossing test, so that a segment through a shared vertex counts once.
fn segments_cross(p: [f64; 2], q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    (orient(p, q, a) > 0.0) != (orient(p, q, b) > 0.0) && (orient(a, b, p) > 0.0) != (orient(a, b, q) > 0.0)
}

/// Solves `X(u, v) = q` for the bilinear patch through the corners
/// `[X(0,0), X(1,0), X(0,1), X(1,1)]`.
fn bilinear_inverse(c: &[[f64; 2]; 4], q: [f64; 2]) -> Option<(f64, f64)> {
    let (lo_x, hi_x) = c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p[0]), h.max(p[0])));
    let (lo_y, hi_y) = c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p[1]), h.max(p[1])));
    let slack = 1e-12 * (1.0 + hi_x.abs().max(hi_y.abs()));
    if q[0] < lo_x - slack || q[0] > hi_x + slack || q[1] < lo_y - slack || q[1] > hi_y + slack {
        return None;
    }
    let (mut u, mut v) = (0.5, 0.5);
    for _ in 0..30 {
        let mut x = [0.0; 2];
        let mut du = [0.0; 2];
        let mut dv = [0.0; 2];
        for k in 0..2 {
            x[k] = (1.0 - u) * (1.0 - v) * c[0][k] + u * (1.0 - v) * c[1][k] + (1.0 - u) * v * c[2][k] + u * v * c[3][k];
            du[k] = (1.0 - v) * (c[1][k] - c[0][k]) + v * (c[3][k] - c[2][k]);
            dv[k] = (1.0 - u) * (c[2][k] - c[0][k]) + u * (c[3][k] - c[1][k]);
        }
        let r = [x[0] - q[0], x[1] - q[1]];
        let det = du[0] * dv[1] - du[1] * dv[0];
        if det == 0.0 {
            return None;
        }
        let step_u = (r[0] * dv[1] - r[1] * dv[0]) / det;
        let step_v = (du[0] * r[1] - du[1] * r[0]) / det;
        u -= step_u;
        v -= step_v;
        if step_u.abs() < 1e-14 && step_v.abs() < 1e-14 {
            break;
        }
    }
    let eps = 1e-9;
    ((-eps..=1.0 + eps).contains(&u) && (-eps..=1.0 + eps).contains(&v)).then(|| (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0)))
}

/// Uniform buckets over the bounding box of the tabulated points, each
/// listing the cells whose bounding boxes overlap it.
#[derive(Clone, Debug, PartialEq)]
struct BucketIndex {
    origin: [f64; 2],
    size: [f64; 2],
    shape: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl BucketIndex {
    fn new(points: &[[f64; 2]], ns: usize, nt: usize) -> BucketIndex {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let cells = (ns - 1) * (nt - 1);
        let per_axis = (math::sqrt(cells as f64) as usize / 2).max(1);
        let shape = [per_axis, per_axis];
        let size = [
            ((hi[0] - lo[0]) / per_axis as f64).max(f64::MIN_POSITIVE),
            ((hi[1] - lo[1]) / per_axis as f64).max(f64::MIN_POSITIVE),
        ];
        let mut index = BucketIndex {
            origin: lo,
            size,
            shape,
            buckets: vec![Vec::new(); per_axis * per_axis],
        };
        for i in 0..ns - 1 {
            for j in 0..nt - 1 {
                let corners = [
                    points[i * nt + j],
                    points[(i + 1) * nt + j],
                    points[i * nt + j + 1],
                    points[(i + 1) * nt + j + 1],
                ];
                let (mut a, mut b) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
                for c in &corners {
                    for k in 0..2 {
                        a[k] = a[k].min(c[k]);
                        b[k] = b[k].max(c[k]);
                    }
                }
                let (ba, bb) = (index.bucket_of(a), index.bucket_of(b));
                for bx in ba[0]..=bb[0] {
                    for by in ba[1]..=bb[1] {
                        index.buckets[by * shape[0] + bx].push(i * (nt - 1) + j);
                    }
                }
            }
        }
        index
    }

    fn bucket_of(&self, q: [f64; 2]) -> [usize; 2] {
        let mut b = [0; 2];
        for k in 0..2 {
            let x = ((q[k] - self.origin[k]) / self.size[k]).max(0.0);
            b[k] = (x as usize).min(self.shape[k] - 1);
        }
        b
    }

    fn candidates(&self, q: [f64; 2]) -> &[usize] {
        for k in 0..2 {
            let far = self.origin[k] + self.size[k] * self.shape[k] as f64;
            if q[k] < self.origin[k] || q[k] > far {
                return &[];
            }
        }
        let b = self.bucket_of(q);
        &self.buckets[b[1] * self.shape[0] + b[0]]
    }
}

/// `f_p` sampled on the window nodes, row-major.
pub fn tube_function(tube: &Tube, profile: &BumpProfile, window: &Window) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(window.node_count());
    for j in 0..window.ny {
        for i in 0..window.nx {
            out.push(tube.value(profile, window.node(i, j))?);
        }
    }
    Ok(out)
}

/// A weighted sum of tube functions on a window.
#[derive(Clone, Debug, PartialEq)]
pub struct GluedFunction {
    pub window: Window,
    pub tubes: Vec<Tube>,
    pub weights: Vec<f64>,
    pub profile: BumpProfile,
    /// Node values, row-major.
    pub values: Vec<f64>,
    /// Centered-difference `L_xi f`, `None` on the boundary.
    pub lie: Vec<Option<f64>>,
    pub min_lie: f64,
    pub argmin: [f64; 2],
    xi: VectorField,
}

impl GluedFunction {
    pub fn value_at(&self, q: [f64; 2]) -> Result<f64> {
        let mut sum = 0.0;
        for (tube, w) in self.tubes.iter().zip(&self.weights) {
            sum += w * tube.value(&self.profile, q)?;
        }
        Ok(sum)
    }

    /// `L_xi f` from the tube charts: inside a chart `f_p = l(t)` and `t`
    /// grows at rate `|xi|` along `xi`.
    pub fn exact_lie_at(&self, q: [f64; 2]) -> Result<f64> {
        let v = self.xi.eval(&q)?;
        let speed = math::sqrt(v[0] * v[0] + v[1] * v[1]);
        let mut sum = 0.0;
        for (tube, w) in self.tubes.iter().zip(&self.weights) {
            if let TubeCoord::Inside { t, .. } = tube.locate(q)? {
                sum += w * self.profile.step_derivative(t) * speed;
            }
        }
        Ok(sum)
    }

    pub fn is_transversal(&self) -> bool {
        self.min_lie > 0.0
    }
}

/// Sums `weights[j] * f_{p_j}` over the window after checking that every node
/// lies in the open band `|t| < 1` of some tube, then differentiates along
/// `xi` by centered differences.
pub fn glue(xi: &VectorField, tubes: Vec<Tube>, weights: Vec<f64>, profile: BumpProfile, window: &Window) -> Result<GluedFunction> {
    planar(xi)?;
    if tubes.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            what: "weights",
            expected: tubes.len(),
            found: weights.len(),
        });
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidArgument("weights must be non-negative".into()));
    }
    let mut values = vec![0.0; window.node_count()];
    let mut covered = vec![false; window.node_count()];
    for (tube, w) in tubes.iter().zip(&weights) {
        for j in 0..window.ny {
            for i in 0..window.nx {
                let q = window.node(i, j);
                let k = window.index(i, j);
                match tube.locate(q)? {
                    TubeCoord::Inside { t, .. } => {
                        covered[k] |= t.abs() < 1.0;
                        values[k] += w * profile.step(t);
                    }
                    TubeCoord::Outside { positive } => {
                        if positive {
                            values[k] += w;
                        }
                    }
                }
            }
        }
    }
    let gaps: Vec<(usize, usize)> = (0..window.ny)
        .flat_map(|j| (0..window.nx).map(move |i| (i, j)))
        .filter(|&(i, j)| !covered[window.index(i, j)])
        .collect();
    if !gaps.is_empty() {
        return Err(Error::CoverageGap { nodes: gaps });
    }

    let (dx, dy) = (window.dx(), window.dy());
    let mut lie = vec![None; window.node_count()];
    let mut min_lie = f64::INFINITY;
    let mut argmin = window.node(0, 0);
    for j in 1..window.ny - 1 {
        for i in 1..window.nx - 1 {
            let q = window.node(i, j);
            let v = xi.eval(&q)?;
            let fx = (values[window.index(i + 1, j)] - values[window.index(i - 1, j)]) / (2.0 * dx);
            let fy = (values[window.index(i, j + 1)] - values[window.index(i, j - 1)]) / (2.0 * dy);
            let d = v[0] * fx + v[1] * fy;
            lie[window.index(i, j)] = Some(d);
            if d < min_lie {
                min_lie = d;
                argmin = q;
            }
        }
    }
    Ok(GluedFunction {
        window: *window,
        tubes,
        weights,
        profile,
        values,
        lie,
        min_lie,
        argmin,
        xi: xi.clone(),
    })
}

/// Extremes of the exact `L_xi f` over the window nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransversalCheck {
    pub min: f64,
    pub argmin: [f64; 2],
    pub max: f64,
}

impl TransversalCheck {
    pub fn is_transversal(&self) -> bool {
        self.min > 0.0
    }
}

pub fn verify_transversal(xi: &VectorField, f: &Expr, window: &Window) -> Result<TransversalCheck> {
    planar(xi)?;
    let chart = xi.chart();
    let mut check = TransversalCheck {
        min: f64::INFINITY,
        argmin: window.node(0, 0),
        max: f64::NEG_INFINITY,
    };
    for j in 0..window.ny {
        for i in 0..window.nx {
            let q = window.node(i, j);
            let d = lie_from(&xi.eval(&q)?, &f.eval_jet2(chart, &q)?);
            if d < check.min {
                check.min = d;
                check.argmin = q;
            }
            check.max = check.max.max(d);
        }
    }
    Ok(check)
}
