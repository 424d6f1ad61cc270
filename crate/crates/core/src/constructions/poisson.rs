use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{Chart, Expr};
use crate::geometry::{Distribution, DEFAULT_RANK_TOL};
use crate::hfree::assemble_d;
use crate::jets::{FieldJet, Jet2, VectorField};
use crate::linalg;
use crate::math;

use super::{compose_1d, curve_freeness, Composed1d, FreeCurve, PointCheck, Verification};

/// The bracket `{f, g} = *(dh_1 ^ .. ^ dh_{n-2} ^ df ^ dg)` on an oriented
/// Riemannian `n`-manifold with Casimirs `h_1, .., h_{n-2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RpBracketSpec {
    chart: Chart,
    casimirs: Vec<Expr>,
    /// `None` is the Euclidean metric.
    metric: Option<Vec<Vec<Expr>>>,
    orientation: f64,
}

impl RpBracketSpec {
    pub fn new(chart: &Chart, casimirs: Vec<Expr>, metric: Option<Vec<Vec<Expr>>>, orientation: i8) -> Result<Self> {
        let n = chart.dim();
        if n < 2 {
            return Err(Error::InvalidArgument("a Riemann-Poisson bracket needs dimension at least 2".into()));
        }
        if casimirs.len() != n - 2 {
            return Err(Error::DimensionMismatch {
                what: "casimirs",
                expected: n - 2,
                found: casimirs.len(),
            });
        }
        for h in &casimirs {
            h.check_coordinates(chart)?;
        }
        if let Some(g) = &metric {
            if g.len() != n || g.iter().any(|row| row.len() != n) {
                return Err(Error::DimensionMismatch {
                    what: "metric",
                    expected: n,
                    found: g.len(),
                });
            }
            for e in g.iter().flatten() {
                e.check_coordinates(chart)?;
            }
        }
        let orientation = match orientation {
            1 => 1.0,
            -1 => -1.0,
            _ => return Err(Error::InvalidArgument("orientation must be +1 or -1".into())),
        };
        Ok(RpBracketSpec {
            chart: chart.clone(),
            casimirs,
            metric,
            orientation,
        })
    }

    pub fn euclidean(chart: &Chart, casimirs: Vec<Expr>) -> Result<Self> {
        RpBracketSpec::new(chart, casimirs, None, 1)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn casimirs(&self) -> &[Expr] {
        &self.casimirs
    }

    fn jets(&self, exprs: &[&Expr], p: &[f64]) -> Result<Vec<Jet2>> {
        exprs.iter().map(|e| e.eval_jet2(&self.chart, p)).collect()
    }

    fn casimir_jets(&self, p: &[f64]) -> Result<Vec<Jet2>> {
        self.casimirs.iter().map(|h| h.eval_jet2(&self.chart, p)).collect()
    }

    fn check_casimirs(&self, jets: &[Jet2]) -> Result<()> {
        let n = self.chart.dim();
        let rows = jets.len();
        if rows == 0 {
            return Ok(());
        }
        let data: Vec<f64> = jets.iter().flat_map(|j| j.gradient().iter().copied()).collect();
        let rank = linalg::numerical_rank(rows, n, &data, DEFAULT_RANK_TOL)?.rank;
        if rank < rows {
            return Err(Error::DegenerateCasimirs { rank, required: rows });
        }
        Ok(())
    }

    /// `orientation / sqrt(det G)` and its gradient.
    fn volume_factor(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = self.chart.dim();
        let metric = match &self.metric {
            None => return Ok((self.orientation, vec![0.0; n])),
            Some(g) => g,
        };
        let mut values = vec![0.0; n * n];
        let mut jets = Vec::with_capacity(n * n);
        for (a, row) in metric.iter().enumerate() {
            for (b, e) in row.iter().enumerate() {
                let j = e.eval_jet2(&self.chart, p)?;
                values[a * n + b] = j.value();
                jets.push(j);
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                let (u, v) = (values[a * n + b], values[b * n + a]);
                if (u - v).abs() > 1e-12 * (1.0 + u.abs().max(v.abs())) {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        let det = linalg::determinant(n, &values);
        if !(det > 0.0) {
            return Err(Error::Domain { op: "metric determinant", value: det });
        }
        let inverse = nalgebra::DMatrix::from_row_slice(n, n, &values)
            .try_inverse()
            .ok_or(Error::Numerical("metric is singular"))?;
        let s = self.orientation / math::sqrt(det);
        // d(det^{-1/2}) = -1/2 det^{-1/2} tr(G^{-1} dG)
        let gradient = (0..n)
            .map(|alpha| {
                let mut trace = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        trace += inverse[(b, a)] * jets[a * n + b].gradient()[alpha];
                    }
                }
                -0.5 * s * trace
            })
            .collect();
        Ok((s, gradient))
    }

    /// The Hamiltonian field of `h` and its first derivatives at `p`:
    /// `xi_h^beta` is `1/sqrt(det G)` times the cofactor of the last row of
    /// `[dh_1; ..; dh_{n-2}; dh; e_beta]`, so that `L_{xi_h} g = {h, g}`.
    pub fn hamiltonian_field_jet(&self, h: &Expr, p: &[f64]) -> Result<FieldJet> {
        let n = self.chart.dim();
        let mut rows = self.casimir_jets(p)?;
        rows.push(h.eval_jet2(&self.chart, p)?);
        let (s, ds) = self.volume_factor(p)?;

        let mut matrix = vec![0.0; n * n];
        for (r, j) in rows.iter().enumerate() {
            matrix[r * n..(r + 1) * n].copy_from_slice(j.gradient());
        }
        let mut value = vec![0.0; n];
        let mut jacobian = vec![0.0; n * n];
        for beta in 0..n {
            let last = (n - 1) * n;
            matrix[last..].fill(0.0);
            matrix[last + beta] = 1.0;
            let cofactor = linalg::determinant(n, &matrix);
            value[beta] = s * cofactor;
            for alpha in 0..n {
                // multilinearity: differentiate one gradient row at a time
                let mut derivative = 0.0;
                for (r, j) in rows.iter().enumerate() {
                    let mut replaced = matrix.clone();
                    for c in 0..n {
                        replaced[r * n + c] = j.hessian(alpha, c);
                    }
                    derivative += linalg::determinant(n, &replaced);
                }
                jacobian[beta * n + alpha] = ds[alpha] * cofactor + s * derivative;
            }
        }
        Ok(FieldJet { value, jacobian })
    }
}

/// `{f, g}` at `p`: the determinant of the gradient rows of the Casimirs,
/// `f` and `g`, times `orientation / sqrt(det G)`.
pub fn rp_bracket(spec: &RpBracketSpec, f: &Expr, g: &Expr, p: &[f64]) -> Result<f64> {
    let n = spec.chart.dim();
    let casimirs = spec.casimir_jets(p)?;
    spec.check_casimirs(&casimirs)?;
    let fg = spec.jets(&[f, g], p)?;
    let mut matrix = Vec::with_capacity(n * n);
    for j in casimirs.iter().chain(&fg) {
        matrix.extend_from_slice(j.gradient());
    }
    let (s, _) = spec.volume_factor(p)?;
    Ok(s * linalg::determinant(n, &matrix))
}

/// `F = psi o f`, free along the Hamiltonian field of `h` wherever `{h, f} > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RpMap {
    pub spec: RpBracketSpec,
    pub hamiltonian: Expr,
    pub field: VectorField,
    pub composed: Composed1d,
}

pub fn build_rp(spec: &RpBracketSpec, h: Expr, f: Expr, psi: FreeCurve) -> Result<RpMap> {
    let field = VectorField::hamiltonian(spec, h.clone())?;
    let composed = compose_1d(spec.chart(), f, psi)?;
    Ok(RpMap {
        spec: spec.clone(),
        hamiltonian: h,
        field,
        composed,
    })
}

impl RpMap {
    pub fn map(&self) -> &crate::hfree::MapSpec {
        &self.composed.map
    }

    pub fn distribution(&self) -> Result<Distribution> {
        Distribution::new(vec![self.field.clone()])
    }

    /// Checks `{h, f} > 0` and the identity
    /// `det D = D psi(f) {h, f}^3` at each point.
    pub fn verify(&self, points: &[Vec<f64>], tol: f64) -> Result<Verification> {
        let d = self.distribution()?;
        let mut checks = Vec::with_capacity(points.len());
        for p in points {
            let bracket = rp_bracket(&self.spec, &self.hamiltonian, &self.composed.f, p)?;
            if !(bracket > 0.0) {
                return Err(Error::NonTransversal { value: bracket });
            }
            let m = assemble_d(&d, &self.composed.map, p)?;
            let det = m.determinant().unwrap_or(0.0);
            let value = self.composed.f.eval(self.spec.chart(), p)?;
            let predicted = curve_freeness(&self.composed.curve, value)? * bracket * bracket * bracket;
            checks.push(PointCheck::new(p, det, predicted, m.is_full_rank(), tol));
        }
        Ok(Verification { checks })
    }
}
