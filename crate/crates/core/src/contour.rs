//! Level sets of a function sampled on a window, by marching squares.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::expr::{Chart, Expr};
use crate::transversal::Window;

/// Node values of a function on a window, `None` where evaluation failed.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub window: Window,
    /// Row-major, rows of constant `y`.
    pub values: Vec<Option<f64>>,
}

impl Grid {
    pub fn sample(f: &Expr, chart: &Chart, window: &Window) -> Result<Grid> {
        f.check_coordinates(chart)?;
        let mut values = Vec::with_capacity(window.node_count());
        for j in 0..window.ny {
            for i in 0..window.nx {
                let v = f.eval(chart, &window.node(i, j)).ok().filter(|v| v.is_finite());
                values.push(v);
            }
        }
        Ok(Grid { window: *window, values })
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[self.window.index(i, j)]
    }

    pub fn skipped_nodes(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Smallest and largest finite node value.
    pub fn range(&self) -> Option<(f64, f64)> {
        self.values.iter().flatten().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }
}

/// `n` levels strictly between `min` and `max`, equally spaced:
/// `min + (i + 1) (max - min) / (n + 1)`.
pub fn equally_spaced_levels(min: f64, max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| min + (i + 1) as f64 * (max - min) / (n + 1) as f64).collect()
}

pub type Polyline = Vec<[f64; 2]>;

/// Edge of the grid: `(i, j, horizontal)` is the edge from node `(i, j)`
/// to `(i + 1, j)` when horizontal, else to `(i, j + 1)`.
type EdgeId = (usize, usize, bool);

/// Polylines of `{f = level}` through cells whose four corners are known.
/// Saddle cells are resolved by the mean of the corners.
pub fn contour(grid: &Grid, level: f64) -> Vec<Polyline> {
    let w = &grid.window;
    let mut points: BTreeMap<EdgeId, [f64; 2]> = BTreeMap::new();
    let mut segments: Vec<[EdgeId; 2]> = Vec::new();

    let mut crossing = |e: EdgeId, a: f64, b: f64| -> EdgeId {
        points.entry(e).or_insert_with(|| {
            let (i, j, horizontal) = e;
            let p = w.node(i, j);
            let q = if horizontal { w.node(i + 1, j) } else { w.node(i, j + 1) };
            let s = (level - a) / (b - a);
            [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]
        });
        e
    };

    for j in 0..w.ny - 1 {
        for i in 0..w.nx - 1 {
            let (Some(v00), Some(v10), Some(v01), Some(v11)) =
                (grid.get(i, j), grid.get(i + 1, j), grid.get(i, j + 1), grid.get(i + 1, j + 1))
            else {
                continue;
            };
            let above = |v: f64| v > level;
            let case = usize::from(above(v00))
                | usize::from(above(v10)) << 1
                | usize::from(above(v11)) << 2
                | usize::from(above(v01)) << 3;
            if case == 0 || case == 15 {
                continue;
            }
            let bottom = (i, j, true);
            let right = (i + 1, j, false);
            let top = (i, j + 1, true);
            let left = (i, j, false);
            let mut edge = |e: EdgeId| match e {
                e if e == bottom => crossing(e, v00, v10),
                e if e == right => crossing(e, v10, v11),
                e if e == top => crossing(e, v01, v11),
                _ => crossing(e, v00, v01),
            };
            let centre_above = (v00 + v10 + v01 + v11) / 4.0 > level;
            let pairs: &[(EdgeId, EdgeId)] = match case {
                1 | 14 => &[(left, bottom)],
                2 | 13 => &[(bottom, right)],
                3 | 12 => &[(left, right)],
                4 | 11 => &[(right, top)],
                6 | 9 => &[(bottom, top)],
                7 | 8 => &[(left, top)],
                5 if centre_above => &[(left, top), (bottom, right)],
                5 => &[(left, bottom), (right, top)],
                10 if centre_above => &[(left, bottom), (right, top)],
                _ => &[(left, top), (bottom, right)],
            };
            for &(a, b) in pairs {
                segments.push([edge(a), edge(b)]);
            }
        }
    }
    chain(&segments, &points)
}

/// Joins segments sharing an edge crossing into maximal polylines.
fn chain(segments: &[[EdgeId; 2]], points: &BTreeMap<EdgeId, [f64; 2]>) -> Vec<Polyline> {
    let mut incident: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
    for (k, s) in segments.iter().enumerate() {
        for e in s {
            incident.entry(*e).or_default().push(k);
        }
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let next = |at: EdgeId, used: &[bool]| incident[&at].iter().copied().find(|k| !used[*k]);
    // open chains start at an edge with one incident segment; loops anywhere
    let mut starts: Vec<usize> = (0..segments.len())
        .filter(|&k| segments[k].iter().any(|e| incident[e].len() == 1))
        .collect();
    starts.extend(0..segments.len());
    for start in starts {
        if used[start] {
            continue;
        }
        used[start] = true;
        let [a, b] = segments[start];
        let (first, mut at) = if incident[&a].len() == 1 { (a, b) } else { (b, a) };
        let mut line = vec![points[&first], points[&at]];
        while let Some(k) = next(at, &used) {
            used[k] = true;
            let [a, b] = segments[k];
            at = if a == at { b } else { a };
            line.push(points[&at]);
        }
        lines.push(line);
    }
    lines
}

/// Contours at `n_levels` equally spaced levels between the grid extremes.
/// A constant grid has no levels.
pub fn level_sets(grid: &Grid, n_levels: usize) -> Vec<(f64, Vec<Polyline>)> {
    match grid.range() {
        Some((lo, hi)) if hi > lo => equally_spaced_levels(lo, hi, n_levels)
            .into_iter()
            .map(|level| (level, contour(grid, level)))
            .collect(),
        _ => Vec::new(),
    }
}
