//! Explicit free maps: compositions with free curves along a single field,
//! completely integrable systems, and Riemann-Poisson brackets.
//!
//! Every builder comes with a verifier that compares the numerically
//! assembled freeness determinant with its closed form at sample points.

mod cis;
mod curve;
mod poisson;

use alloc::vec::Vec;

pub use cis::{build_cis, cis_constant, CisMap};
pub use curve::{compose_1d, curve_freeness, Composed1d, CurveDomain, CurveKind, FreeCurve, CUSTOM_SAMPLES};
pub use poisson::{build_rp, rp_bracket, RpBracketSpec, RpMap};

/// Outcome of a determinant identity check at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCheck {
    pub point: Vec<f64>,
    pub determinant: f64,
    pub predicted: f64,
    /// `|determinant - predicted| <= tol * max(1, |determinant|)`.
    pub identity_ok: bool,
    /// The freeness matrix has full certified rank.
    pub hfree: bool,
    pub pass: bool,
}

impl PointCheck {
    pub(crate) fn new(point: &[f64], determinant: f64, predicted: f64, hfree: bool, tol: f64) -> PointCheck {
        let identity_ok = (determinant - predicted).abs() <= tol * determinant.abs().max(1.0);
        PointCheck {
            point: point.to_vec(),
            determinant,
            predicted,
            identity_ok,
            hfree,
            pass: identity_ok && hfree,
        }
    }

    pub fn relative_error(&self) -> f64 {
        (self.determinant - self.predicted).abs() / self.determinant.abs().max(1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Verification {
    pub checks: Vec<PointCheck>,
}

impl Verification {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PointCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn max_relative_error(&self) -> f64 {
        self.checks.iter().map(PointCheck::relative_error).fold(0.0, f64::max)
    }

    pub fn min_abs_determinant(&self) -> f64 {
        self.checks.iter().map(|c| c.determinant.abs()).fold(f64::INFINITY, f64::min)
    }
}
