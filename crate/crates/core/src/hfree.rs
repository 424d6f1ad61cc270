//! The freeness matrix of a map along a distribution, the induced metric,
//! the linearized inducing system and the Wintergarten map.
//!
//! For a frame `xi_1, .., xi_k` and a map `F = (F^1, .., F^q)` the freeness
//! matrix has `k + s_k` rows and `q` columns:
//!
//! * rows `a = 1..k` hold `L_{xi_a} F`;
//! * one row per pair `a <= b` in lexicographic order holds
//!   `L_{xi_a}^2 F` on the diagonal (`a == b`) and the anticommutator
//!   `L_{xi_a} L_{xi_b} F + L_{xi_b} L_{xi_a} F` off the diagonal.
//!
//! `F` is H-free at a point when this matrix has rank `k + s_k`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{Chart, Expr};
use crate::geometry::{frame_rank, Distribution, DEFAULT_RANK_TOL};
use crate::jets::{lie2_from, lie_from, FieldJet, Jet2, VectorField};
use crate::linalg::{self, RankCertificate};
use crate::sym_dim;

/// A map `F: M -> R^q` given by component expressions, `q >= 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct MapSpec {
    chart: Chart,
    components: Vec<Expr>,
}

impl MapSpec {
    pub fn new(chart: &Chart, components: Vec<Expr>) -> Result<MapSpec> {
        if components.len() < 2 {
            return Err(Error::TooFewTargets {
                q: components.len(),
                required: 2,
            });
        }
        for c in &components {
            c.check_coordinates(chart)?;
        }
        Ok(MapSpec {
            chart: chart.clone(),
            components,
        })
    }

    pub fn parse(chart: &Chart, components: &[&str]) -> Result<MapSpec> {
        let exprs = components.iter().map(|s| crate::expr::parse(s)).collect::<Result<Vec<_>>>()?;
        MapSpec::new(chart, exprs)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval(&self.chart, p)).collect()
    }
}

/// Lexicographic pairs `(a, b)` with `a <= b < k`, the order of the
/// second-order rows.
pub fn pair_order(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|a| (a..k).map(move |b| (a, b))).collect()
}

/// How the diagonal second-order rows are scaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Diagonal {
    /// `L_{xi_a}^2 F`, the layout of the freeness matrix.
    #[default]
    Square,
    /// `{L_{xi_a}, L_{xi_a}} F = 2 L_{xi_a}^2 F`, the layout of the linearized system.
    Anticommutator,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankOptions {
    /// Relative tolerance; the absolute threshold is `tol * sigma_max * max(rows, cols)`.
    pub tol: f64,
    pub diagonal: Diagonal,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            tol: DEFAULT_RANK_TOL,
            diagonal: Diagonal::Square,
        }
    }
}

/// Jets of the frame and of the map components at one point.
struct PointJets {
    frame: Vec<FieldJet>,
    map: Vec<Jet2>,
}

impl PointJets {
    fn new(d: &Distribution, f: &MapSpec, p: &[f64]) -> Result<PointJets> {
        if d.chart() != f.chart() {
            return Err(Error::ChartMismatch);
        }
        let frame = d.frame().iter().map(|xi| xi.eval_jacobian(p)).collect::<Result<Vec<_>>>()?;
        let map = f
            .components
            .iter()
            .map(|c| c.eval_jet2(&f.chart, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(PointJets { frame, map })
    }

    fn k(&self) -> usize {
        self.frame.len()
    }

    fn q(&self) -> usize {
        self.map.len()
    }

    /// Row-major `k x q` block `L_{xi_a} F^i`.
    fn first_order(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.k() * self.q());
        for xi in &self.frame {
            out.extend(self.map.iter().map(|fi| lie_from(&xi.value, fi)));
        }
        out
    }

    /// The same entries computed from absolute values of every term, a
    /// bound on the magnitudes that rounding errors scale with.
    fn magnitudes(&self) -> (Vec<f64>, Vec<f64>) {
        let frame: Vec<FieldJet> = self
            .frame
            .iter()
            .map(|f| FieldJet {
                value: f.value.iter().map(|v| v.abs()).collect(),
                jacobian: f.jacobian.iter().map(|v| v.abs()).collect(),
            })
            .collect();
        let map: Vec<Jet2> = self.map.iter().map(Jet2::abs_coefficients).collect();
        let abs = PointJets { frame, map };
        (abs.first_order(), abs.second_order(Diagonal::Anticommutator))
    }

    /// Row-major `s_k x q` block of second-order rows.
    fn second_order(&self, diagonal: Diagonal) -> Vec<f64> {
        let mut out = Vec::with_capacity(sym_dim(self.k()) * self.q());
        for (a, b) in pair_order(self.k()) {
            let (xa, xb) = (&self.frame[a], &self.frame[b]);
            for fi in &self.map {
                let ab = lie2_from(&xa.value, xb, fi);
                let v = if a == b {
                    match diagonal {
                        Diagonal::Square => ab,
                        Diagonal::Anticommutator => ab + ab,
                    }
                } else {
                    ab + lie2_from(&xb.value, xa, fi)
                };
                out.push(v);
            }
        }
        out
    }
}

fn check_frame(d: &Distribution, p: &[f64], tol: f64) -> Result<()> {
    let rank = frame_rank(d, p, tol)?;
    if rank < d.rank() {
        return Err(Error::DegenerateFrame { rank, k: d.rank() });
    }
    Ok(())
}

/// Multiple of machine epsilon, times the largest term magnitude, below which
/// a singular value is indistinguishable from rounding.
const ROUNDOFF_FACTOR: f64 = 100.0;

fn roundoff_floor(rows: usize, cols: usize, magnitudes: &[f64]) -> f64 {
    let largest = magnitudes.iter().copied().fold(0.0, f64::max);
    ROUNDOFF_FACTOR * f64::EPSILON * largest * rows.max(cols) as f64
}

fn certify(rows: usize, cols: usize, data: &[f64], tol: f64, magnitudes: &[f64]) -> Result<RankCertificate> {
    let sv = linalg::singular_values(rows, cols, data)?;
    Ok(linalg::certify_with_floor(
        sv,
        tol * rows.max(cols) as f64,
        roundoff_floor(rows, cols, magnitudes),
    ))
}

/// The freeness matrix at a point with its singular values and certified rank.
#[derive(Clone, Debug, PartialEq)]
pub struct DMatrix {
    pub k: usize,
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub entries: Vec<f64>,
    pub certificate: RankCertificate,
    pub point: Vec<f64>,
}

impl DMatrix {
    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.certificate.singular_values
    }

    pub fn certified_rank(&self) -> usize {
        self.certificate.rank
    }

    pub fn required_rank(&self) -> usize {
        self.k + sym_dim(self.k)
    }

    pub fn is_full_rank(&self) -> bool {
        self.certified_rank() == self.required_rank()
    }

    /// Determinant, for square matrices.
    pub fn determinant(&self) -> Option<f64> {
        (self.rows == self.cols).then(|| linalg::determinant(self.rows, &self.entries))
    }
}

pub fn assemble_d(d: &Distribution, f: &MapSpec, p: &[f64]) -> Result<DMatrix> {
    assemble_d_with(d, f, p, RankOptions::default())
}

pub fn assemble_d_with(d: &Distribution, f: &MapSpec, p: &[f64], opts: RankOptions) -> Result<DMatrix> {
    check_frame(d, p, opts.tol)?;
    let jets = PointJets::new(d, f, p)?;
    let k = jets.k();
    let rows = k + sym_dim(k);
    let cols = jets.q();
    let mut entries = jets.first_order();
    entries.extend(jets.second_order(opts.diagonal));
    let (mut magnitudes, second) = jets.magnitudes();
    magnitudes.extend(second);
    let certificate = certify(rows, cols, &entries, opts.tol, &magnitudes)?;
    Ok(DMatrix {
        k,
        rows,
        cols,
        entries,
        certificate,
        point: p.to_vec(),
    })
}

/// Outcome of the freeness test, with the matrix as evidence.
#[derive(Clone, Debug, PartialEq)]
pub struct HFreeVerdict {
    pub hfree: bool,
    pub matrix: DMatrix,
}

pub fn is_hfree_at(d: &Distribution, f: &MapSpec, p: &[f64]) -> Result<HFreeVerdict> {
    is_hfree_at_with(d, f, p, RankOptions::default())
}

pub fn is_hfree_at_with(d: &Distribution, f: &MapSpec, p: &[f64], opts: RankOptions) -> Result<HFreeVerdict> {
    let required = d.rank() + sym_dim(d.rank());
    if f.target_dim() < required {
        return Err(Error::TooFewTargets {
            q: f.target_dim(),
            required,
        });
    }
    let matrix = assemble_d_with(d, f, p, opts)?;
    Ok(HFreeVerdict {
        hfree: matrix.is_full_rank(),
        matrix,
    })
}

/// True when the `k x q` block `L_{xi_a} F^i` has certified rank `k`.
pub fn is_h_immersion_at(d: &Distribution, f: &MapSpec, p: &[f64]) -> Result<bool> {
    is_h_immersion_at_with(d, f, p, DEFAULT_RANK_TOL)
}

pub fn is_h_immersion_at_with(d: &Distribution, f: &MapSpec, p: &[f64], tol: f64) -> Result<bool> {
    check_frame(d, p, tol)?;
    let jets = PointJets::new(d, f, p)?;
    let cert = certify(jets.k(), jets.q(), &jets.first_order(), tol, &jets.magnitudes().0)?;
    Ok(cert.rank == jets.k())
}

/// `g_ab = sum_i L_{xi_a} F^i L_{xi_b} F^i` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct InducedMetric {
    pub k: usize,
    /// Row-major `k x k`, symmetric.
    pub entries: Vec<f64>,
}

impl InducedMetric {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.k + b]
    }

    /// Cholesky test. A pivot that is negligible against the largest
    /// diagonal entry counts as a failure.
    pub fn is_positive_definite(&self) -> bool {
        let m = nalgebra::DMatrix::from_row_slice(self.k, self.k, &self.entries);
        let scale = (0..self.k).map(|a| self.get(a, a)).fold(0.0, f64::max);
        match nalgebra::Cholesky::new(m) {
            Some(chol) => {
                let l = chol.l();
                scale > 0.0 && (0..self.k).all(|a| l[(a, a)] * l[(a, a)] > 1e-14 * scale)
            }
            None => false,
        }
    }
}

pub fn induced_metric(d: &Distribution, f: &MapSpec, p: &[f64]) -> Result<InducedMetric> {
    let jets = PointJets::new(d, f, p)?;
    let (k, q) = (jets.k(), jets.q());
    let first = jets.first_order();
    let mut entries = vec![0.0; k * k];
    for a in 0..k {
        for b in a..k {
            let g: f64 = (0..q).map(|i| first[a * q + i] * first[b * q + i]).sum();
            entries[a * k + b] = g;
            entries[b * k + a] = g;
        }
    }
    Ok(InducedMetric { k, entries })
}

/// Pointwise solution of the linearized inducing system.
#[derive(Clone, Debug, PartialEq)]
pub struct Inversion {
    pub delta_f: Vec<f64>,
    pub residual: f64,
    pub bound: f64,
}

/// Minimum-norm `delta_f` solving
///
/// ```text
/// L_{xi_a} F . delta_f                 = psi_a
/// {L_{xi_a}, L_{xi_b}} F . delta_f     = L_{xi_a} psi_b + L_{xi_b} psi_a - delta_g_ab   (a <= b)
/// ```
///
/// at `p`. `delta_g` is a symmetric `k x k` matrix of expressions; only its
/// upper triangle is used after a symmetry check at `p`.
pub fn infinitesimal_invert(
    d: &Distribution,
    f: &MapSpec,
    p: &[f64],
    delta_g: &[Vec<Expr>],
    psi: &[Expr],
) -> Result<Inversion> {
    infinitesimal_invert_with(d, f, p, delta_g, psi, DEFAULT_RANK_TOL)
}

pub fn infinitesimal_invert_with(
    d: &Distribution,
    f: &MapSpec,
    p: &[f64],
    delta_g: &[Vec<Expr>],
    psi: &[Expr],
    tol: f64,
) -> Result<Inversion> {
    let k = d.rank();
    if psi.len() != k {
        return Err(Error::DimensionMismatch {
            what: "psi",
            expected: k,
            found: psi.len(),
        });
    }
    if delta_g.len() != k || delta_g.iter().any(|r| r.len() != k) {
        return Err(Error::DimensionMismatch {
            what: "delta_g",
            expected: k,
            found: delta_g.len(),
        });
    }
    let chart = d.chart();
    let mut dg = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            dg[a * k + b] = delta_g[a][b].eval(chart, p)?;
        }
    }
    for a in 0..k {
        for b in a + 1..k {
            let (u, v) = (dg[a * k + b], dg[b * k + a]);
            if (u - v).abs() > 1e-12 * (1.0 + u.abs().max(v.abs())) {
                return Err(Error::NotSymmetric);
            }
        }
    }

    let verdict = is_hfree_at_with(d, f, p, RankOptions { tol, ..RankOptions::default() })?;
    if !verdict.hfree {
        return Err(Error::NotHFree {
            rank: verdict.matrix.certified_rank(),
            required: verdict.matrix.required_rank(),
        });
    }

    let jets = PointJets::new(d, f, p)?;
    let mut system = jets.first_order();
    system.extend(jets.second_order(Diagonal::Anticommutator));

    let psi_jets = psi.iter().map(|e| e.eval_jet2(chart, p)).collect::<Result<Vec<_>>>()?;
    let mut rhs: Vec<f64> = psi_jets.iter().map(Jet2::value).collect();
    for (a, b) in pair_order(k) {
        let lie_a_psi_b = lie_from(&jets.frame[a].value, &psi_jets[b]);
        let lie_b_psi_a = lie_from(&jets.frame[b].value, &psi_jets[a]);
        rhs.push(lie_a_psi_b + lie_b_psi_a - dg[a * k + b]);
    }

    let rows = rhs.len();
    let q = jets.q();
    let delta_f = linalg::min_norm_solve(rows, q, &system, &rhs, tol * rows.max(q) as f64)?;
    let residual = (0..rows)
        .map(|r| {
            let lhs: f64 = (0..q).map(|c| system[r * q + c] * delta_f[c]).sum();
            (lhs - rhs[r]) * (lhs - rhs[r])
        })
        .sum::<f64>();
    let residual = crate::math::sqrt(residual);
    let rhs_norm = crate::math::sqrt(rhs.iter().map(|x| x * x).sum::<f64>());
    let bound = 1e-8 * (1.0 + rhs_norm);
    if residual > bound {
        return Err(Error::ResidualTooLarge { residual, bound });
    }
    Ok(Inversion {
        delta_f,
        residual,
        bound,
    })
}

/// Rank of the Wintergarten map `n -> [{L_{xi_a}, L_{xi_b}} F . n]_{a<=b}` on
/// the normal space `N = span{L_{xi_a} F}^perp`.
pub fn wintergarten_rank(d: &Distribution, f: &MapSpec, p: &[f64]) -> Result<usize> {
    wintergarten_rank_with(d, f, p, DEFAULT_RANK_TOL)
}

pub fn wintergarten_rank_with(d: &Distribution, f: &MapSpec, p: &[f64], tol: f64) -> Result<usize> {
    check_frame(d, p, tol)?;
    let jets = PointJets::new(d, f, p)?;
    let (k, q) = (jets.k(), jets.q());
    let s = sym_dim(k);
    let first = jets.first_order();
    let (first_magnitudes, second_magnitudes) = jets.magnitudes();
    let first_cert = certify(k, q, &first, tol, &first_magnitudes)?;
    if first_cert.rank < k {
        return Err(Error::NotImmersion);
    }
    let normal = linalg::row_space_complement(k, q, &first, tol * k.max(q) as f64)?;
    let second = jets.second_order(Diagonal::Anticommutator);
    if normal.is_empty() {
        return Ok(0);
    }
    // image of each normal vector as a point of the s_k-dimensional space
    let mut image = Vec::with_capacity(normal.len() * s);
    for n in &normal {
        for r in 0..s {
            image.push((0..q).map(|c| second[r * q + c] * n[c]).sum::<f64>());
        }
    }
    let sv = linalg::singular_values(normal.len(), s, &image)?;
    // relative to the scale of the whole jet so that a uniformly tiny image counts as zero
    let scale = sv
        .first()
        .copied()
        .unwrap_or(0.0)
        .max(first_cert.singular_values[0]);
    let threshold = (tol * normal.len().max(s) as f64 * scale).max(roundoff_floor(s, q, &second_magnitudes));
    Ok(sv.iter().filter(|x| **x > threshold).count())
}

/// Convenience: `L_{xi} F^i` for every component.
pub fn first_order_row(xi: &VectorField, f: &MapSpec, p: &[f64]) -> Result<Vec<f64>> {
    let v = xi.eval(p)?;
    f.components
        .iter()
        .map(|c| Ok(lie_from(&v, &c.eval_jet2(&f.chart, p)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn contact() -> (Distribution, MapSpec) {
        let c = Chart::new(["x", "y", "z"]).unwrap();
        let d = Distribution::parse(&c, &[&["0", "1", "0"], &["1", "0", "-y"]]).unwrap();
        let f = MapSpec::parse(&c, &["y", "x", "exp(y)", "exp(x)", "z"]).unwrap();
        (d, f)
    }

    fn line() -> (Chart, Distribution) {
        let c = Chart::new(["x", "y"]).unwrap();
        let d = Distribution::parse(&c, &[&["1", "0"]]).unwrap();
        (c, d)
    }

    #[test]
    fn contact_matrix_at_origin() {
        let (d, f) = contact();
        let m = assemble_d(&d, &f, &[0.0, 0.0, 0.0]).unwrap();
        let expected = [
            [1.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 0.0, 1.0, 0.0],
        ];
        for (r, row) in expected.iter().enumerate() {
            assert_eq!(m.row(r), row);
        }
        assert_eq!(m.determinant(), Some(1.0));
        assert_eq!(m.certified_rank(), 5);
        assert!(m.is_full_rank());
    }

    #[test]
    fn constant_map_has_rank_zero() {
        let (d, _) = contact();
        let f = MapSpec::parse(d.chart(), &["1", "2", "3", "4", "5"]).unwrap();
        let m = assemble_d(&d, &f, &[0.3, 0.2, 0.1]).unwrap();
        assert!(m.entries.iter().all(|e| *e == 0.0));
        assert_eq!(m.certified_rank(), 0);
        assert!(!is_h_immersion_at(&d, &f, &[0.3, 0.2, 0.1]).unwrap());
    }

    #[test]
    fn exp_curve_along_coordinate_field() {
        let (c, d) = line();
        let f = MapSpec::parse(&c, &["x", "exp(x)"]).unwrap();
        let m = assemble_d(&d, &f, &[0.0, 0.0]).unwrap();
        assert_eq!(m.entries, vec![1.0, 1.0, 0.0, 1.0]);
        assert_eq!(m.determinant(), Some(1.0));
        assert_eq!(m.certified_rank(), 2);
    }

    #[test]
    fn affine_map_is_not_free() {
        let (c, d) = line();
        let f = MapSpec::parse(&c, &["x", "x"]).unwrap();
        let v = is_hfree_at(&d, &f, &[0.0, 0.0]).unwrap();
        assert!(!v.hfree);
        assert_eq!(v.matrix.certified_rank(), 1);
    }

    #[test]
    fn too_few_targets() {
        let (c, d) = line();
        assert!(matches!(
            MapSpec::parse(&c, &["x"]),
            Err(Error::TooFewTargets { q: 1, required: 2 })
        ));
        let (d2, _) = contact();
        let f = MapSpec::parse(d2.chart(), &["x", "y", "z", "x*y"]).unwrap();
        assert!(matches!(
            is_hfree_at(&d2, &f, &[0.0, 0.0, 0.0]),
            Err(Error::TooFewTargets { q: 4, required: 5 })
        ));
        let _ = d;
    }

    #[test]
    fn degenerate_frame_is_rejected() {
        let c = Chart::new(["x", "y"]).unwrap();
        let d = Distribution::parse(&c, &[&["x", "0"]]).unwrap();
        let f = MapSpec::parse(&c, &["x", "exp(x)"]).unwrap();
        assert!(matches!(
            assemble_d(&d, &f, &[0.0, 1.0]),
            Err(Error::DegenerateFrame { rank: 0, k: 1 })
        ));
    }

    #[test]
    fn induced_metrics() {
        let (c, d) = line();
        let f = MapSpec::parse(&c, &["x", "y"]).unwrap();
        let g = induced_metric(&d, &f, &[0.4, -0.2]).unwrap();
        assert_eq!(g.entries, vec![1.0]);
        assert!(g.is_positive_definite());
        assert!(is_h_immersion_at(&d, &f, &[0.4, -0.2]).unwrap());

        let (d, f) = contact();
        let g = induced_metric(&d, &f, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.entries, vec![2.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn one_dimensional_metric_is_sum_of_squares() {
        let c = Chart::new(["x", "y"]).unwrap();
        let d = Distribution::parse(&c, &[&["2*y", "1-y^2"]]).unwrap();
        let f = MapSpec::parse(&c, &["y*exp(x)", "x^2 + y"]).unwrap();
        let p = [0.3, 0.7];
        let la = crate::jets::lie(&d.frame()[0], &f.components()[0], &p).unwrap();
        let lb = crate::jets::lie(&d.frame()[0], &f.components()[1], &p).unwrap();
        let g = induced_metric(&d, &f, &p).unwrap();
        assert!((g.get(0, 0) - (la * la + lb * lb)).abs() < 1e-14);
    }

    #[test]
    fn homogeneous_inversion_is_zero() {
        let (d, f) = contact();
        let zero = || parse("0").unwrap();
        let dg = vec![vec![zero(), zero()], vec![zero(), zero()]];
        let inv = infinitesimal_invert(&d, &f, &[0.5, -0.5, 1.0], &dg, &[zero(), zero()]).unwrap();
        assert!(inv.delta_f.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn identity_metric_perturbation_has_small_residual() {
        let (d, f) = contact();
        let c = |s: &str| parse(s).unwrap();
        let dg = vec![vec![c("1"), c("0")], vec![c("0"), c("1")]];
        for p in [[0.0, 0.0, 0.0], [1.2, -0.7, 0.3], [-1.9, 1.9, -1.0]] {
            let inv = infinitesimal_invert(&d, &f, &p, &dg, &[c("0"), c("0")]).unwrap();
            assert!(inv.residual <= inv.bound);
        }
    }

    #[test]
    fn inversion_checks_its_inputs() {
        let (d, f) = contact();
        let c = |s: &str| parse(s).unwrap();
        let asym = vec![vec![c("0"), c("1")], vec![c("0"), c("0")]];
        assert!(matches!(
            infinitesimal_invert(&d, &f, &[0.0; 3], &asym, &[c("0"), c("0")]),
            Err(Error::NotSymmetric)
        ));
        let g = MapSpec::parse(d.chart(), &["x", "y", "z", "x", "y"]).unwrap();
        let sym = vec![vec![c("0"), c("0")], vec![c("0"), c("0")]];
        assert!(matches!(
            infinitesimal_invert(&d, &g, &[0.0; 3], &sym, &[c("0"), c("0")]),
            Err(Error::NotHFree { .. })
        ));
    }

    #[test]
    fn wintergarten_of_contact_example_is_surjective() {
        let (d, f) = contact();
        assert_eq!(wintergarten_rank(&d, &f, &[0.0, 0.0, 0.0]).unwrap(), 3);
    }

    #[test]
    fn wintergarten_of_affine_map_vanishes() {
        // a coordinate frame, so that affine components have no second derivatives
        let c = Chart::new(["x", "y", "z"]).unwrap();
        let d = Distribution::parse(&c, &[&["1", "0", "0"], &["0", "1", "0"]]).unwrap();
        let f = MapSpec::parse(&c, &["x", "y", "z", "x + 2*y", "3*z - x"]).unwrap();
        assert_eq!(wintergarten_rank(&d, &f, &[0.1, 0.2, 0.3]).unwrap(), 0);
        let constant = MapSpec::parse(&c, &["1", "2"]).unwrap();
        assert!(matches!(
            wintergarten_rank(&d, &constant, &[0.0; 3]),
            Err(Error::NotImmersion)
        ));
    }

    #[test]
    fn doubling_the_diagonal_keeps_the_rank() {
        let (d, f) = contact();
        let p = [0.7, -1.1, 0.4];
        let a = assemble_d(&d, &f, &p).unwrap();
        let b = assemble_d_with(
            &d,
            &f,
            &p,
            RankOptions {
                diagonal: Diagonal::Anticommutator,
                ..RankOptions::default()
            },
        )
        .unwrap();
        assert_eq!(a.certified_rank(), b.certified_rank());
    }
}
