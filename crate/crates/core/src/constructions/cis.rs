use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{Chart, Expr};
use crate::geometry::Distribution;
use crate::hfree::{assemble_d, MapSpec};
use crate::jets::lie;

use super::{curve_freeness, FreeCurve, PointCheck, Verification};

/// Absolute tolerance for the commutation pattern `L_{xi_i} f^j = 0`, `i != j`.
const COMMUTATION_TOL: f64 = 1e-9;

/// The map `(psi_1(f^1), .., psi_n(f^n), f^1 f^2, .., f^{n-1} f^n)` built
/// from functions adapted to a completely integrable system.
#[derive(Clone, Debug, PartialEq)]
pub struct CisMap {
    pub functions: Vec<Expr>,
    pub curves: Vec<FreeCurve>,
    pub map: MapSpec,
}

/// Components: the `2n` curve components in order, then the products
/// `f^i f^j` for `i < j` in lexicographic order.
pub fn build_cis(chart: &Chart, functions: Vec<Expr>, curves: Vec<FreeCurve>) -> Result<CisMap> {
    let n = functions.len();
    if n == 0 || curves.len() != n {
        return Err(Error::DimensionMismatch {
            what: "curves",
            expected: n,
            found: curves.len(),
        });
    }
    let mut components = Vec::with_capacity(2 * n + n * (n - 1) / 2);
    for (f, psi) in functions.iter().zip(&curves) {
        f.check_coordinates(chart)?;
        components.extend(psi.compose(f));
    }
    for i in 0..n {
        for j in i + 1..n {
            components.push(functions[i].clone() * functions[j].clone());
        }
    }
    Ok(CisMap {
        map: MapSpec::new(chart, components)?,
        functions,
        curves,
    })
}

/// The constant `C` in `det D = C prod_i g_i^{n+2} D psi_i(f^i)`, measured as
/// a plain numerical determinant on the model with `f^i = phi^i`,
/// `xi_i = d/d phi^i` and exponential curves at the origin, where every
/// other factor equals one.
pub fn cis_constant(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let actions = (1..=n).map(|i| format!("I{i}"));
    let angles: Vec<_> = (1..=n).map(|i| format!("phi{i}")).collect();
    let chart = Chart::new(actions.chain(angles.iter().cloned()))?;
    let frame = (0..n)
        .map(|i| {
            let components = (0..2 * n).map(|a| Expr::num(if a == n + i { 1.0 } else { 0.0 })).collect();
            crate::jets::VectorField::new(&chart, components)
        })
        .collect::<Result<Vec<_>>>()?;
    let d = Distribution::new(frame)?;
    let functions = angles.iter().map(|a| Expr::coord(a)).collect();
    let cis = build_cis(&chart, functions, (0..n).map(|_| FreeCurve::exp()).collect())?;
    let m = assemble_d(&d, &cis.map, &alloc::vec![0.0; 2 * n])?;
    m.determinant().ok_or(Error::Numerical("freeness matrix is not square"))
}

impl CisMap {
    pub fn n(&self) -> usize {
        self.functions.len()
    }

    /// `g_i = L_{xi_i} f^i`, after checking `L_{xi_i} f^j = 0` for `i != j`.
    pub fn diagonal_derivatives(&self, d: &Distribution, p: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if d.rank() != n {
            return Err(Error::DimensionMismatch {
                what: "distribution rank",
                expected: n,
                found: d.rank(),
            });
        }
        let mut g = Vec::with_capacity(n);
        for (i, xi) in d.frame().iter().enumerate() {
            for (j, f) in self.functions.iter().enumerate() {
                let value = lie(xi, f, p)?;
                if i == j {
                    g.push(value);
                } else if value.abs() > COMMUTATION_TOL {
                    return Err(Error::CommutationViolation {
                        field: i + 1,
                        function: j + 1,
                        value,
                    });
                }
            }
        }
        Ok(g)
    }

    pub fn predicted_determinant(&self, d: &Distribution, p: &[f64], constant: f64) -> Result<f64> {
        let g = self.diagonal_derivatives(d, p)?;
        let exponent = self.n() as i32 + 2;
        let mut det = constant;
        for ((gi, f), psi) in g.iter().zip(&self.functions).zip(&self.curves) {
            det *= crate::math::powi(*gi, exponent) * curve_freeness(psi, f.eval(self.map.chart(), p)?)?;
        }
        Ok(det)
    }

    /// Compares the assembled determinant with `constant * prod g_i^{n+2} D psi_i`.
    /// A point with some `g_i <= 0` fails.
    pub fn verify(&self, d: &Distribution, points: &[Vec<f64>], constant: f64, tol: f64) -> Result<Verification> {
        let mut checks = Vec::with_capacity(points.len());
        for p in points {
            let positive = self.diagonal_derivatives(d, p)?.iter().all(|g| *g > 0.0);
            let predicted = self.predicted_determinant(d, p, constant)?;
            let m = assemble_d(d, &self.map, p)?;
            let det = m.determinant().unwrap_or(0.0);
            let mut check = PointCheck::new(p, det, predicted, m.is_full_rank(), tol);
            check.pass &= positive;
            checks.push(check);
        }
        Ok(Verification { checks })
    }
}
