//! SVG 1.1 level-set plots.
//!
//! The view box is the sampling window itself. SVG's `y` axis points down,
//! so a point `(x, y)` is drawn at `(x, y0 + y1 - y)`.

use std::fmt::Write;

use hfree_core::contour::{contour, equally_spaced_levels, Grid, Polyline};
use hfree_core::transversal::Window;

/// Contours of one function, ready to draw.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPlot {
    pub levels: Vec<(f64, Vec<Polyline>)>,
    /// Grid nodes where the function could not be evaluated.
    pub skipped_nodes: usize,
    /// The sampled function took a single value (or none at all).
    pub constant: bool,
}

/// `n_levels` equally spaced levels strictly inside the grid range, plus the
/// requested extra levels, in increasing order without duplicates.
pub fn level_plot(grid: &Grid, n_levels: usize, extra: &[f64]) -> LevelPlot {
    let skipped_nodes = grid.skipped_nodes();
    let (lo, hi) = match grid.range() {
        Some((lo, hi)) if hi > lo => (lo, hi),
        _ => {
            return LevelPlot {
                levels: Vec::new(),
                skipped_nodes,
                constant: true,
            }
        }
    };
    let mut values = equally_spaced_levels(lo, hi, n_levels);
    values.extend(extra.iter().copied().filter(|v| v.is_finite()));
    values.sort_by(f64::total_cmp);
    values.dedup();
    LevelPlot {
        levels: values.into_iter().map(|v| (v, contour(grid, v))).collect(),
        skipped_nodes,
        constant: false,
    }
}

fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    // "-0.000000" and "0.000000" must print the same
    if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
        "0.000000".to_string()
    } else {
        s
    }
}

pub fn render_svg(title: &str, window: &Window, plot: &LevelPlot) -> String {
    let (w, h) = (window.x1 - window.x0, window.y1 - window.y0);
    let stroke = w.max(h) / 400.0;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"600\" height=\"{}\" viewBox=\"{} {} {} {}\">",
        (600.0 * h / w).round().max(1.0) as u32,
        fmt6(window.x0),
        fmt6(window.y0),
        fmt6(w),
        fmt6(h)
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"white\" stroke=\"black\" stroke-width=\"{}\"/>",
        fmt6(window.x0),
        fmt6(window.y0),
        fmt6(w),
        fmt6(h),
        fmt6(stroke)
    );
    let flip = |y: f64| window.y0 + window.y1 - y;
    let count = plot.levels.len();
    for (index, (level, lines)) in plot.levels.iter().enumerate() {
        let _ = writeln!(
            out,
            "<g class=\"level\" data-level=\"{:?}\" stroke=\"{}\" stroke-width=\"{}\" fill=\"none\">",
            level,
            colour(index, count),
            fmt6(stroke)
        );
        let _ = writeln!(out, "<title>level {level:?}</title>");
        for line in lines {
            let mut points: Vec<String> = line.iter().map(|p| format!("{},{}", fmt6(p[0]), fmt6(flip(p[1])))).collect();
            // a level through a grid node yields the same crossing twice
            points.dedup();
            let _ = writeln!(out, "<polyline points=\"{}\"/>", points.join(" "));
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Blue for the lowest level through red for the highest.
fn colour(index: usize, count: usize) -> String {
    let t = if count > 1 { index as f64 / (count - 1) as f64 } else { 0.5 };
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
