use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::expr::{Chart, Expr, Function};
use crate::geometry::Distribution;
use crate::hfree::{assemble_d_with, MapSpec, RankOptions};
use crate::jets::lie;
use crate::math;

use super::{PointCheck, Verification};

/// Number of samples used to validate a custom curve.
pub const CUSTOM_SAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub enum CurveKind {
    /// `t -> (t, e^t)`
    Exp,
    /// `t -> (sin t, cos t)`
    Circle,
    /// `t -> (a(t), b(t))` in the named variable, validated on `interval`.
    Custom {
        variable: String,
        a: Expr,
        b: Expr,
        interval: (f64, f64),
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveDomain {
    Line,
    /// Parameters are taken modulo `2 pi`.
    Circle,
}

/// A free curve `psi = (a, b): R -> R^2`, meaning `a'b'' - a''b'` never vanishes.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeCurve {
    kind: CurveKind,
    domain: CurveDomain,
}

/// `(value, first, second)` derivatives of one component.
type Taylor = (f64, f64, f64);

impl FreeCurve {
    pub fn exp() -> FreeCurve {
        FreeCurve {
            kind: CurveKind::Exp,
            domain: CurveDomain::Line,
        }
    }

    pub fn circle() -> FreeCurve {
        FreeCurve {
            kind: CurveKind::Circle,
            domain: CurveDomain::Circle,
        }
    }

    /// A user curve, accepted only if it is free at `CUSTOM_SAMPLES` evenly
    /// spaced parameters of `interval` (and `2 pi` periodic there when the
    /// domain is a circle).
    pub fn custom(variable: &str, a: Expr, b: Expr, interval: (f64, f64), domain: CurveDomain) -> Result<FreeCurve> {
        let chart = Chart::new([variable])?;
        a.check_coordinates(&chart)?;
        b.check_coordinates(&chart)?;
        let (lo, hi) = interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument("curve interval must satisfy lo < hi".to_string()));
        }
        let curve = FreeCurve {
            kind: CurveKind::Custom {
                variable: variable.to_string(),
                a: a.clone(),
                b: b.clone(),
                interval,
            },
            domain,
        };
        for i in 0..CUSTOM_SAMPLES {
            let t = lo + (hi - lo) * i as f64 / (CUSTOM_SAMPLES - 1) as f64;
            let value = curve_freeness(&curve, t)?;
            if value == 0.0 || !value.is_finite() {
                return Err(Error::NotFree { t, value });
            }
            if domain == CurveDomain::Circle {
                let (a0, b0) = (a.eval(&chart, &[t])?, b.eval(&chart, &[t])?);
                let (a1, b1) = (a.eval(&chart, &[t + TAU])?, b.eval(&chart, &[t + TAU])?);
                if (a0 - a1).abs() > 1e-9 * (1.0 + a0.abs()) || (b0 - b1).abs() > 1e-9 * (1.0 + b0.abs()) {
                    return Err(Error::NotPeriodic { t });
                }
            }
        }
        Ok(curve)
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn domain(&self) -> CurveDomain {
        self.domain
    }

    pub fn point(&self, t: f64) -> Result<[f64; 2]> {
        let [a, b] = self.taylor(t)?;
        Ok([a.0, b.0])
    }

    fn taylor(&self, t: f64) -> Result<[Taylor; 2]> {
        if !t.is_finite() {
            return Err(Error::Domain { op: "curve", value: t });
        }
        match &self.kind {
            CurveKind::Exp => {
                let e = math::exp(t);
                Ok([(t, 1.0, 0.0), (e, e, e)])
            }
            CurveKind::Circle => {
                let (s, c) = (math::sin(t), math::cos(t));
                Ok([(s, c, -s), (c, -s, -c)])
            }
            CurveKind::Custom {
                variable,
                a,
                b,
                interval,
            } => {
                // a periodic curve is known on one full turn starting at the interval's left end
                let t = match self.domain {
                    CurveDomain::Line if t < interval.0 || t > interval.1 => {
                        return Err(Error::Domain { op: "curve", value: t });
                    }
                    CurveDomain::Line => t,
                    CurveDomain::Circle => wrap(t, interval.0),
                };
                let chart = Chart::new([variable.as_str()])?;
                let component = |e: &Expr| -> Result<Taylor> {
                    let j = e.eval_jet2(&chart, &[t])?;
                    Ok((j.value(), j.gradient()[0], j.hessian(0, 0)))
                };
                Ok([component(a)?, component(b)?])
            }
        }
    }

    /// `(a(f), b(f))` as expressions.
    pub fn compose(&self, f: &Expr) -> [Expr; 2] {
        match &self.kind {
            CurveKind::Exp => [f.clone(), Expr::call(Function::Exp, f.clone())],
            CurveKind::Circle => [Expr::call(Function::Sin, f.clone()), Expr::call(Function::Cos, f.clone())],
            CurveKind::Custom { variable, a, b, .. } => [a.substitute(variable, f), b.substitute(variable, f)],
        }
    }
}

/// Shifts `t` by multiples of `2 pi` into `[lo, lo + 2 pi)`.
fn wrap(t: f64, lo: f64) -> f64 {
    let turns = libm::floor((t - lo) / TAU);
    t - turns * TAU
}

/// `D psi(t) = a'(t) b''(t) - a''(t) b'(t)`.
pub fn curve_freeness(psi: &FreeCurve, t: f64) -> Result<f64> {
    let [a, b] = psi.taylor(t)?;
    Ok(a.1 * b.2 - a.2 * b.1)
}

/// `F = psi o f` for a single function `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct Composed1d {
    pub f: Expr,
    pub curve: FreeCurve,
    pub map: MapSpec,
}

pub fn compose_1d(chart: &Chart, f: Expr, psi: FreeCurve) -> Result<Composed1d> {
    f.check_coordinates(chart)?;
    let map = MapSpec::new(chart, psi.compose(&f).into())?;
    Ok(Composed1d { f, curve: psi, map })
}

impl Composed1d {
    /// `D psi(f(p)) (L_xi f(p))^3`, the determinant the freeness matrix must have.
    pub fn predicted_determinant(&self, d: &Distribution, p: &[f64]) -> Result<f64> {
        check_line_field(d)?;
        let value = self.f.eval(self.map.chart(), p)?;
        let g = lie(&d.frame()[0], &self.f, p)?;
        Ok(curve_freeness(&self.curve, value)? * g * g * g)
    }

    /// Compares the assembled determinant with the prediction at each point.
    /// Tolerance is relative to `max(1, |det|)`.
    pub fn verify(&self, d: &Distribution, points: &[Vec<f64>], tol: f64) -> Result<Verification> {
        check_line_field(d)?;
        let mut checks = Vec::with_capacity(points.len());
        for p in points {
            let m = assemble_d_with(d, &self.map, p, RankOptions::default())?;
            let det = m.determinant().unwrap_or(0.0);
            let predicted = self.predicted_determinant(d, p)?;
            checks.push(PointCheck::new(p, det, predicted, m.is_full_rank(), tol));
        }
        Ok(Verification { checks })
    }
}

fn check_line_field(d: &Distribution) -> Result<()> {
    if d.rank() != 1 {
        return Err(Error::DimensionMismatch {
            what: "distribution rank",
            expected: 1,
            found: d.rank(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use alloc::vec;

    fn parabola() -> FreeCurve {
        FreeCurve::custom("t", parse("t").unwrap(), parse("t^2").unwrap(), (-20.0, 20.0), CurveDomain::Line).unwrap()
    }

    #[test]
    fn freeness_of_standard_curves() {
        for t in [-3.0, -0.5, 0.0, 1.0, 2.5] {
            assert!((curve_freeness(&FreeCurve::exp(), t).unwrap() - libm::exp(t)).abs() < 1e-15 * libm::exp(t).max(1.0));
            // a'b'' - a''b' = cos(-cos) - (-sin)(-sin)
            assert!((curve_freeness(&FreeCurve::circle(), t).unwrap() + 1.0).abs() < 1e-15);
            assert_eq!(curve_freeness(&parabola(), t).unwrap(), 2.0);
        }
    }

    #[test]
    fn custom_curves_are_validated() {
        let line = FreeCurve::custom("t", parse("t").unwrap(), parse("2*t").unwrap(), (0.0, 1.0), CurveDomain::Line);
        assert!(matches!(line, Err(Error::NotFree { .. })));
        let not_periodic =
            FreeCurve::custom("t", parse("t").unwrap(), parse("t^2").unwrap(), (0.0, 6.0), CurveDomain::Circle);
        assert!(matches!(not_periodic, Err(Error::NotPeriodic { .. })));
        let circle = FreeCurve::custom(
            "s",
            parse("2*cos(s)").unwrap(),
            parse("sin(s)").unwrap(),
            (0.0, TAU),
            CurveDomain::Circle,
        )
        .unwrap();
        // periodic curves accept any parameter
        assert!((curve_freeness(&circle, 100.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(curve_freeness(&parabola(), 30.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn compose_renders_components() {
        let chart = Chart::new(["x", "y"]).unwrap();
        let c = compose_1d(&chart, parse("y*exp(x)").unwrap(), FreeCurve::exp()).unwrap();
        let rendered: Vec<_> = c.map.components().iter().map(|e| e.to_string()).collect();
        assert_eq!(rendered, vec!["y*exp(x)", "exp(y*exp(x))"]);
    }

    #[test]
    fn exp_of_coordinate_has_determinant_exp() {
        let chart = Chart::new(["x"]).unwrap();
        let d = Distribution::parse(&chart, &[&["1"]]).unwrap();
        let c = compose_1d(&chart, parse("x").unwrap(), FreeCurve::exp()).unwrap();
        let points: Vec<_> = [-1.0, 0.0, 0.7].iter().map(|x| vec![*x]).collect();
        let report = c.verify(&d, &points, 1e-12).unwrap();
        assert!(report.all_pass());
        for check in &report.checks {
            assert!((check.determinant - libm::exp(check.point[0])).abs() < 1e-14);
        }
    }

    #[test]
    fn first_integral_fails_everywhere() {
        let chart = Chart::new(["x", "y"]).unwrap();
        let d = Distribution::parse(&chart, &[&["2*y", "1-y^2"]]).unwrap();
        let c = compose_1d(&chart, parse("(y^2-1)*exp(x)").unwrap(), FreeCurve::exp()).unwrap();
        let points = vec![vec![0.0, 0.0], vec![0.5, -1.5], vec![-1.0, 0.3]];
        let report = c.verify(&d, &points, 1e-9).unwrap();
        assert!(report.checks.iter().all(|c| !c.pass && !c.hfree));
    }
}
