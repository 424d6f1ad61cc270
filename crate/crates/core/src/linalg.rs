//! Small dense linear algebra: singular values, rank certificates,
//! minimum-norm solves and null spaces.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ratio by which a singular value must clear the threshold before the rank
/// decision is considered robust.
pub const MARGIN_FACTOR: f64 = 10.0;

/// Numerical rank of a matrix together with the evidence for it.
#[derive(Clone, Debug, PartialEq)]
pub struct RankCertificate {
    pub rank: usize,
    pub threshold: f64,
    /// Non-increasing.
    pub singular_values: Vec<f64>,
}

impl RankCertificate {
    pub fn smallest_retained(&self) -> Option<f64> {
        self.rank.checked_sub(1).map(|i| self.singular_values[i])
    }

    pub fn largest_discarded(&self) -> Option<f64> {
        self.singular_values.get(self.rank).copied()
    }

    /// True when some singular value lies within `MARGIN_FACTOR` of the threshold.
    pub fn uncertain(&self) -> bool {
        if self.threshold == 0.0 {
            return false;
        }
        let close_above = self
            .smallest_retained()
            .is_some_and(|s| s < MARGIN_FACTOR * self.threshold);
        let close_below = self
            .largest_discarded()
            .is_some_and(|s| s > self.threshold / MARGIN_FACTOR);
        close_above || close_below
    }
}

fn matrix(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

fn svd(m: DMatrix<f64>, vectors: bool) -> Result<nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    nalgebra::SVD::try_new(m, vectors, vectors, f64::EPSILON, 0).ok_or(Error::Numerical("svd did not converge"))
}

/// Singular values of a row-major `rows x cols` matrix, non-increasing.
pub fn singular_values(rows: usize, cols: usize, data: &[f64]) -> Result<Vec<f64>> {
    if rows == 0 || cols == 0 {
        return Ok(Vec::new());
    }
    Ok(svd(matrix(rows, cols, data), false)?.singular_values.iter().copied().collect())
}

/// Counts singular values strictly above `rel_tol * sigma_max`.
pub fn certify(singular_values: Vec<f64>, rel_tol: f64) -> RankCertificate {
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let threshold = rel_tol * sigma_max;
    let rank = if sigma_max == 0.0 {
        0
    } else {
        singular_values.iter().filter(|s| **s > threshold).count()
    };
    RankCertificate {
        rank,
        threshold,
        singular_values,
    }
}

/// As `certify`, but values at or below `floor` never count. The floor
/// bounds the rounding error of the entries, so a matrix of pure rounding
/// noise gets rank 0 instead of a spurious full rank.
pub fn certify_with_floor(singular_values: Vec<f64>, rel_tol: f64, floor: f64) -> RankCertificate {
    let mut c = certify(singular_values, rel_tol);
    if floor > c.threshold {
        c.threshold = floor;
        c.rank = c.singular_values.iter().filter(|s| **s > floor).count();
    }
    c
}

pub fn numerical_rank(rows: usize, cols: usize, data: &[f64], rel_tol: f64) -> Result<RankCertificate> {
    Ok(certify(singular_values(rows, cols, data)?, rel_tol))
}

/// Minimum-norm least-squares solution of `A x = b`, discarding singular
/// values at or below `rel_tol * sigma_max`.
pub fn min_norm_solve(rows: usize, cols: usize, data: &[f64], rhs: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    let decomposition = svd(matrix(rows, cols, data), true)?;
    let u = decomposition.u.as_ref().ok_or(Error::Numerical("missing U"))?;
    let v_t = decomposition.v_t.as_ref().ok_or(Error::Numerical("missing V^T"))?;
    let sigma = &decomposition.singular_values;
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let b = DVector::from_column_slice(rhs);
    let mut x = DVector::zeros(cols);
    for (i, s) in sigma.iter().enumerate() {
        if *s > rel_tol * sigma_max && *s > 0.0 {
            let coeff = u.column(i).dot(&b) / s;
            x += v_t.row(i).transpose() * coeff;
        }
    }
    Ok(x.iter().copied().collect())
}

/// Orthonormal basis of the orthogonal complement of the row space of a
/// `rows x cols` matrix, where rows count as independent above `rel_tol * sigma_max`.
pub fn row_space_complement(rows: usize, cols: usize, data: &[f64], rel_tol: f64) -> Result<Vec<Vec<f64>>> {
    // pad to a square matrix so that V is complete
    let n = rows.max(cols);
    let mut padded = DMatrix::zeros(n, cols);
    for r in 0..rows {
        for c in 0..cols {
            padded[(r, c)] = data[r * cols + c];
        }
    }
    let decomposition = svd(padded, true)?;
    let v_t = decomposition.v_t.as_ref().ok_or(Error::Numerical("missing V^T"))?;
    let sigma = &decomposition.singular_values;
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    Ok((0..cols)
        .filter(|i| sigma_max == 0.0 || sigma[*i] <= rel_tol * sigma_max)
        .map(|i| v_t.row(i).iter().copied().collect())
        .collect())
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(n: usize, data: &[f64]) -> f64 {
    let mut a: Vec<f64> = data.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap_or(col);
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for r in col + 1..n {
            let factor = a[r * n + col] / d;
            if factor != 0.0 {
                for c in col..n {
                    a[r * n + c] -= factor * a[col * n + c];
                }
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rank_of_colinear_rows() {
        let c = numerical_rank(2, 2, &[1.0, 0.0, 2.0, 0.0], 1e-9).unwrap();
        assert_eq!(c.rank, 1);
        assert!(!c.uncertain());
        assert_eq!(numerical_rank(1, 2, &[0.0, 0.0], 1e-9).unwrap().rank, 0);
    }

    #[test]
    fn singular_values_are_sorted() {
        let s = singular_values(3, 3, &[1.0, 0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0, 3.0]).unwrap();
        assert_eq!(s, vec![5.0, 3.0, 1.0]);
    }

    #[test]
    fn minimum_norm_solution_of_underdetermined_system() {
        // x + y = 2 has minimum-norm solution (1, 1)
        let x = min_norm_solve(1, 2, &[1.0, 1.0], &[2.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complement_is_orthogonal() {
        let a = [1.0, 2.0, 0.0, 0.0, 1.0, 1.0];
        let basis = row_space_complement(2, 3, &a, 1e-12).unwrap();
        assert_eq!(basis.len(), 1);
        let n = &basis[0];
        assert!((n.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
        for r in 0..2 {
            let dot: f64 = (0..3).map(|c| a[r * 3 + c] * n[c]).sum();
            assert!(dot.abs() < 1e-14);
        }
    }

    #[test]
    fn determinant_with_pivoting() {
        assert_eq!(determinant(2, &[0.0, 1.0, 1.0, 0.0]), -1.0);
        assert_eq!(determinant(3, &[2.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 4.0]), 24.0);
        assert_eq!(determinant(2, &[1.0, 2.0, 2.0, 4.0]), 0.0);
    }
}
