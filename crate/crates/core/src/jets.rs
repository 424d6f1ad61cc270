//! Second-order jets and the Lie derivatives built on them.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::constructions::RpBracketSpec;
use crate::error::{Error, Result};
use crate::expr::{Chart, Expr};

/// Value, gradient and Hessian of a scalar function at a point.
///
/// The Hessian is stored as its upper triangle, so mirrored reads are
/// identical by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    value: f64,
    gradient: Vec<f64>,
    hessian: Vec<f64>,
}

#[inline]
fn upper(i: usize, j: usize, m: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * m - i + 1) / 2 + (j - i)
}

impl Jet2 {
    pub fn constant(value: f64, m: usize) -> Jet2 {
        Jet2 {
            value,
            gradient: vec![0.0; m],
            hessian: vec![0.0; m * (m + 1) / 2],
        }
    }

    /// The coordinate function `x^index` evaluated at `value`.
    pub fn variable(value: f64, index: usize, m: usize) -> Jet2 {
        let mut j = Jet2::constant(value, m);
        j.gradient[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn gradient(&self) -> &[f64] {
        &self.gradient
    }

    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        self.hessian[upper(i, j, self.dim())]
    }

    pub fn hessian_matrix(&self) -> Vec<Vec<f64>> {
        let m = self.dim();
        (0..m).map(|i| (0..m).map(|j| self.hessian(i, j)).collect()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|g| g.is_finite())
            && self.hessian.iter().all(|h| h.is_finite())
    }

    fn zip(&self, other: &Jet2, f: impl Fn(f64, f64) -> f64) -> Jet2 {
        Jet2 {
            value: f(self.value, other.value),
            gradient: self.gradient.iter().zip(&other.gradient).map(|(a, b)| f(*a, *b)).collect(),
            hessian: self.hessian.iter().zip(&other.hessian).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn add(&self, other: &Jet2) -> Jet2 {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet2) -> Jet2 {
        self.zip(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Jet2 {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        Jet2 {
            value: c * self.value,
            gradient: self.gradient.iter().map(|g| c * g).collect(),
            hessian: self.hessian.iter().map(|h| c * h).collect(),
        }
    }

    /// The jet with every coefficient replaced by its absolute value.
    pub(crate) fn abs_coefficients(&self) -> Jet2 {
        Jet2 {
            value: self.value.abs(),
            gradient: self.gradient.iter().map(|g| g.abs()).collect(),
            hessian: self.hessian.iter().map(|h| h.abs()).collect(),
        }
    }

    /// Leibniz rule up to second order.
    pub fn mul(&self, other: &Jet2) -> Jet2 {
        let m = self.dim();
        let (a, b) = (self, other);
        let mut hessian = vec![0.0; a.hessian.len()];
        for i in 0..m {
            for j in i..m {
                let k = upper(i, j, m);
                hessian[k] = a.hessian[k] * b.value
                    + a.gradient[i] * b.gradient[j]
                    + a.gradient[j] * b.gradient[i]
                    + a.value * b.hessian[k];
            }
        }
        Jet2 {
            value: a.value * b.value,
            gradient: (0..m).map(|i| a.gradient[i] * b.value + a.value * b.gradient[i]).collect(),
            hessian,
        }
    }

    /// Chain rule for `phi(u)` given `phi(u)`, `phi'(u)` and `phi''(u)`.
    pub fn compose(&self, v0: f64, v1: f64, v2: f64) -> Jet2 {
        let m = self.dim();
        let g = &self.gradient;
        let mut hessian = vec![0.0; self.hessian.len()];
        for i in 0..m {
            for j in i..m {
                let k = upper(i, j, m);
                hessian[k] = v1 * self.hessian[k] + v2 * g[i] * g[j];
            }
        }
        Jet2 {
            value: v0,
            gradient: g.iter().map(|x| v1 * x).collect(),
            hessian,
        }
    }
}

/// Values `xi^beta(p)` and first derivatives `d_alpha xi^beta(p)` of a field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldJet {
    pub value: Vec<f64>,
    /// Row-major `m x m`; entry `[beta * m + alpha]` is `d_alpha xi^beta`.
    pub jacobian: Vec<f64>,
}

impl FieldJet {
    pub fn derivative(&self, beta: usize, alpha: usize) -> f64 {
        self.jacobian[beta * self.value.len() + alpha]
    }
}

#[derive(Clone, Debug, PartialEq)]
enum FieldRepr {
    Components(Vec<Expr>),
    /// `sum_b coeffs[b] * fields[b]`
    Combination { coeffs: Vec<Expr>, fields: Vec<VectorField> },
    Hamiltonian { bracket: Box<RpBracketSpec>, hamiltonian: Expr },
}

/// A vector field `xi = xi^alpha d_alpha` on a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    chart: Chart,
    repr: FieldRepr,
}

impl VectorField {
    pub fn new(chart: &Chart, components: Vec<Expr>) -> Result<VectorField> {
        if components.len() != chart.dim() {
            return Err(Error::DimensionMismatch {
                what: "vector field components",
                expected: chart.dim(),
                found: components.len(),
            });
        }
        for c in &components {
            c.check_coordinates(chart)?;
        }
        Ok(VectorField {
            chart: chart.clone(),
            repr: FieldRepr::Components(components),
        })
    }

    pub fn parse(chart: &Chart, components: &[&str]) -> Result<VectorField> {
        let exprs = components.iter().map(|s| crate::expr::parse(s)).collect::<Result<Vec<_>>>()?;
        VectorField::new(chart, exprs)
    }

    /// `sum_b coeffs[b] * fields[b]`, evaluated pointwise through jets.
    pub fn combination(chart: &Chart, coeffs: Vec<Expr>, fields: Vec<VectorField>) -> Result<VectorField> {
        if coeffs.len() != fields.len() {
            return Err(Error::DimensionMismatch {
                what: "combination coefficients",
                expected: fields.len(),
                found: coeffs.len(),
            });
        }
        if fields.iter().any(|f| f.chart != *chart) {
            return Err(Error::ChartMismatch);
        }
        for c in &coeffs {
            c.check_coordinates(chart)?;
        }
        Ok(VectorField {
            chart: chart.clone(),
            repr: FieldRepr::Combination { coeffs, fields },
        })
    }

    /// Hamiltonian field `xi_h` of a Riemann-Poisson bracket, characterised by
    /// `L_{xi_h} g = {h, g}` for every `g`.
    pub fn hamiltonian(bracket: &RpBracketSpec, hamiltonian: Expr) -> Result<VectorField> {
        hamiltonian.check_coordinates(bracket.chart())?;
        Ok(VectorField {
            chart: bracket.chart().clone(),
            repr: FieldRepr::Hamiltonian {
                bracket: Box::new(bracket.clone()),
                hamiltonian,
            },
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Component expressions, when the field is given by them.
    pub fn components(&self) -> Option<&[Expr]> {
        match &self.repr {
            FieldRepr::Components(c) => Some(c),
            _ => None,
        }
    }

    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.chart.check_point(p)?;
        match &self.repr {
            FieldRepr::Components(c) => c.iter().map(|e| e.eval(&self.chart, p)).collect(),
            FieldRepr::Combination { coeffs, fields } => {
                let mut out = vec![0.0; self.chart.dim()];
                for (c, f) in coeffs.iter().zip(fields) {
                    let w = c.eval(&self.chart, p)?;
                    for (o, v) in out.iter_mut().zip(f.eval(p)?) {
                        *o += w * v;
                    }
                }
                Ok(out)
            }
            FieldRepr::Hamiltonian { .. } => Ok(self.eval_jacobian(p)?.value),
        }
    }

    pub fn eval_jacobian(&self, p: &[f64]) -> Result<FieldJet> {
        self.chart.check_point(p)?;
        let m = self.chart.dim();
        match &self.repr {
            FieldRepr::Components(c) => {
                let mut value = Vec::with_capacity(m);
                let mut jacobian = Vec::with_capacity(m * m);
                for e in c {
                    let j = e.eval_jet2(&self.chart, p)?;
                    value.push(j.value());
                    jacobian.extend_from_slice(j.gradient());
                }
                Ok(FieldJet { value, jacobian })
            }
            FieldRepr::Combination { coeffs, fields } => {
                let mut out = FieldJet {
                    value: vec![0.0; m],
                    jacobian: vec![0.0; m * m],
                };
                for (c, f) in coeffs.iter().zip(fields) {
                    let w = c.eval_jet2(&self.chart, p)?;
                    let fj = f.eval_jacobian(p)?;
                    for beta in 0..m {
                        out.value[beta] += w.value() * fj.value[beta];
                        for alpha in 0..m {
                            out.jacobian[beta * m + alpha] +=
                                w.gradient()[alpha] * fj.value[beta] + w.value() * fj.derivative(beta, alpha);
                        }
                    }
                }
                Ok(out)
            }
            FieldRepr::Hamiltonian { bracket, hamiltonian } => bracket.hamiltonian_field_jet(hamiltonian, p),
        }
    }
}

/// `L_xi f = xi^alpha d_alpha f` from precomputed values.
pub(crate) fn lie_from(xi: &[f64], f: &Jet2) -> f64 {
    xi.iter().zip(f.gradient()).map(|(x, g)| x * g).sum()
}

/// `L_xi L_eta f` from precomputed jets:
/// `sum_{alpha,beta} xi^alpha (d_alpha eta^beta d_beta f + eta^beta d_{alpha beta} f)`.
pub(crate) fn lie2_from(xi: &[f64], eta: &FieldJet, f: &Jet2) -> f64 {
    let m = xi.len();
    let grad = f.gradient();
    let mut total = 0.0;
    for alpha in 0..m {
        let mut inner = 0.0;
        for beta in 0..m {
            inner += eta.derivative(beta, alpha) * grad[beta] + eta.value[beta] * f.hessian(alpha, beta);
        }
        total += xi[alpha] * inner;
    }
    total
}

fn same_chart(a: &VectorField, b: &VectorField) -> Result<()> {
    if a.chart != b.chart {
        return Err(Error::ChartMismatch);
    }
    Ok(())
}

pub fn lie(xi: &VectorField, f: &Expr, p: &[f64]) -> Result<f64> {
    let fj = f.eval_jet2(&xi.chart, p)?;
    Ok(lie_from(&xi.eval(p)?, &fj))
}

pub fn lie2(xi: &VectorField, eta: &VectorField, f: &Expr, p: &[f64]) -> Result<f64> {
    same_chart(xi, eta)?;
    let fj = f.eval_jet2(&xi.chart, p)?;
    Ok(lie2_from(&xi.eval(p)?, &eta.eval_jacobian(p)?, &fj))
}

/// `{L_xi, L_eta} f = L_xi L_eta f + L_eta L_xi f`.
pub fn anticommutator(xi: &VectorField, eta: &VectorField, f: &Expr, p: &[f64]) -> Result<f64> {
    same_chart(xi, eta)?;
    let fj = f.eval_jet2(&xi.chart, p)?;
    let xj = xi.eval_jacobian(p)?;
    let ej = eta.eval_jacobian(p)?;
    Ok(lie2_from(&xj.value, &ej, &fj) + lie2_from(&ej.value, &xj, &fj))
}
