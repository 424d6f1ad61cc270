//! Distributions given by explicit frames, and changes of frame.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{Chart, Expr};
use crate::jets::VectorField;
use crate::linalg;

/// Default relative threshold for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// A `k`-dimensional distribution spanned by a frame `xi_1, .., xi_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    chart: Chart,
    frame: Vec<VectorField>,
}

impl Distribution {
    pub fn new(frame: Vec<VectorField>) -> Result<Distribution> {
        let chart = match frame.first() {
            Some(f) => f.chart().clone(),
            None => return Err(Error::InvalidArgument("a frame needs at least one field".into())),
        };
        if frame.len() > chart.dim() {
            return Err(Error::DimensionMismatch {
                what: "frame size",
                expected: chart.dim(),
                found: frame.len(),
            });
        }
        if frame.iter().any(|f| *f.chart() != chart) {
            return Err(Error::ChartMismatch);
        }
        Ok(Distribution { chart, frame })
    }

    /// Convenience constructor from component strings, one slice per field.
    pub fn parse(chart: &Chart, fields: &[&[&str]]) -> Result<Distribution> {
        let frame = fields
            .iter()
            .map(|c| VectorField::parse(chart, c))
            .collect::<Result<Vec<_>>>()?;
        Distribution::new(frame)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn frame(&self) -> &[VectorField] {
        &self.frame
    }

    pub fn rank(&self) -> usize {
        self.frame.len()
    }
}

/// Pointwise change of frame `zeta_a = lambda_a^b xi_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameChange {
    matrix: Vec<Vec<Expr>>,
}

impl FrameChange {
    pub fn new(matrix: Vec<Vec<Expr>>) -> Result<FrameChange> {
        let k = matrix.len();
        if let Some(row) = matrix.iter().find(|r| r.len() != k) {
            return Err(Error::DimensionMismatch {
                what: "frame change row",
                expected: k,
                found: row.len(),
            });
        }
        Ok(FrameChange { matrix })
    }

    pub fn parse(rows: &[&[&str]]) -> Result<FrameChange> {
        let matrix = rows
            .iter()
            .map(|r| r.iter().map(|s| crate::expr::parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        FrameChange::new(matrix)
    }

    pub fn identity(k: usize) -> FrameChange {
        let matrix = (0..k)
            .map(|a| (0..k).map(|b| Expr::num(if a == b { 1.0 } else { 0.0 })).collect())
            .collect();
        FrameChange { matrix }
    }

    pub fn size(&self) -> usize {
        self.matrix.len()
    }

    pub fn entries(&self) -> &[Vec<Expr>] {
        &self.matrix
    }

    pub fn determinant_at(&self, chart: &Chart, p: &[f64]) -> Result<f64> {
        let k = self.size();
        let mut values = Vec::with_capacity(k * k);
        for row in &self.matrix {
            for e in row {
                values.push(e.eval(chart, p)?);
            }
        }
        Ok(linalg::determinant(k, &values))
    }
}

/// Numerical rank of the `k x m` matrix of frame components at `p`, counting
/// singular values above `tol * sigma_max`.
pub fn frame_rank(d: &Distribution, p: &[f64], tol: f64) -> Result<usize> {
    let m = d.chart.dim();
    let mut data = Vec::with_capacity(d.rank() * m);
    for field in &d.frame {
        data.extend(field.eval(p)?);
    }
    Ok(linalg::numerical_rank(d.rank(), m, &data, tol)?.rank)
}

/// Applies `zeta_a = lambda_a^b xi_b`. Frames given by component expressions
/// are combined into new component expressions; other frames are combined
/// pointwise.
pub fn change_frame(d: &Distribution, lambda: &FrameChange) -> Result<Distribution> {
    let k = d.rank();
    if lambda.size() != k {
        return Err(Error::DimensionMismatch {
            what: "frame change",
            expected: k,
            found: lambda.size(),
        });
    }
    let symbolic: Option<Vec<&[Expr]>> = d.frame.iter().map(|f| f.components()).collect();
    let mut frame = Vec::with_capacity(k);
    for row in &lambda.matrix {
        let field = match &symbolic {
            Some(components) => {
                let combined = (0..d.chart.dim())
                    .map(|alpha| linear_combination(row.iter().zip(components.iter().map(|c| &c[alpha]))))
                    .collect();
                VectorField::new(&d.chart, combined)?
            }
            None => VectorField::combination(&d.chart, row.clone(), d.frame.clone())?,
        };
        frame.push(field);
    }
    Distribution::new(frame)
}

/// `sum c_b * e_b`, dropping terms with a literal zero factor and unit
/// coefficients so that the identity change returns the original expressions.
fn linear_combination<'a>(terms: impl Iterator<Item = (&'a Expr, &'a Expr)>) -> Expr {
    let mut acc: Option<Expr> = None;
    for (c, e) in terms {
        let term = match (c.as_constant(), e.as_constant()) {
            (Some(0.0), _) | (_, Some(0.0)) => continue,
            (Some(1.0), _) => e.clone(),
            (_, Some(1.0)) => c.clone(),
            _ => c.clone() * e.clone(),
        };
        acc = Some(match acc {
            Some(a) => a + term,
            None => term,
        });
    }
    acc.unwrap_or(Expr::num(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use alloc::vec;

    fn contact() -> Distribution {
        let c = Chart::new(["x", "y", "z"]).unwrap();
        Distribution::parse(&c, &[&["0", "1", "0"], &["1", "0", "-y"]]).unwrap()
    }

    #[test]
    fn frame_ranks() {
        let d = contact();
        for p in [[0.0, 0.0, 0.0], [1.0, 2.0, -3.0]] {
            assert_eq!(frame_rank(&d, &p, DEFAULT_RANK_TOL).unwrap(), 2);
        }
        let c = Chart::new(["x", "y"]).unwrap();
        let zero = Distribution::parse(&c, &[&["0", "0"]]).unwrap();
        assert_eq!(frame_rank(&zero, &[1.0, 1.0], DEFAULT_RANK_TOL).unwrap(), 0);
        let colinear = Distribution::parse(&c, &[&["1", "0"], &["2", "0"]]).unwrap();
        assert_eq!(frame_rank(&colinear, &[1.0, 1.0], DEFAULT_RANK_TOL).unwrap(), 1);
    }

    #[test]
    fn identity_change_keeps_the_frame() {
        let d = contact();
        let same = change_frame(&d, &FrameChange::identity(2)).unwrap();
        assert_eq!(same, d);
    }

    #[test]
    fn scalar_rescale() {
        let c = Chart::new(["x", "y"]).unwrap();
        let d = Distribution::parse(&c, &[&["1", "0"]]).unwrap();
        let lambda = FrameChange::new(vec![vec![parse("exp(x)").unwrap()]]).unwrap();
        let z = change_frame(&d, &lambda).unwrap();
        let v = z.frame()[0].eval(&[0.5, 2.0]).unwrap();
        assert_eq!(v, vec![0.5_f64.exp(), 0.0]);
    }

    #[test]
    fn frame_change_shape_is_checked() {
        assert!(FrameChange::parse(&[&["1", "0"], &["1"]]).is_err());
        assert!(change_frame(&contact(), &FrameChange::identity(3)).is_err());
    }

    #[test]
    fn rejects_oversized_frames() {
        let c = Chart::new(["x"]).unwrap();
        assert!(Distribution::parse(&c, &[&["1"], &["x"]]).is_err());
        assert!(Distribution::new(Vec::new()).is_err());
    }
}
