//! Dense helpers on top of nalgebra: Cholesky with an explicit pivot floor,
//! spectral condition numbers, triangular solves.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Smallest pivot accepted by [`cholesky`], relative to the largest diagonal entry.
pub const PIVOT_FLOOR: f64 = 1e-14;

/// Lower Cholesky factor of a symmetric matrix, or the first failing pivot.
///
/// Unlike `nalgebra::Cholesky` this rejects pivots below
/// `PIVOT_FLOOR * max|diag|`, so numerically rank-deficient moment matrices
/// are reported instead of producing a garbage factor.
pub fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    let floor = PIVOT_FLOOR * scale.max(f64::MIN_POSITIVE);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// `λmax / λmin` of a symmetric matrix; infinite when not positive definite.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    let eig = a.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `L z = b` for lower-triangular `L`.
pub fn solve_lower(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut z = b.clone();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[(i, k)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    z
}

/// Solves `Lᵀ z = b` for lower-triangular `L`.
pub fn solve_lower_transpose(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut z = b.clone();
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[(k, i)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    z
}

/// Inverse of `L Lᵀ` from its lower factor.
pub fn inverse_from_cholesky(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut inv = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut e = DVector::<f64>::zeros(n);
        e[j] = 1.0;
        let col = solve_lower_transpose(l, &solve_lower(l, &e));
        inv.set_column(j, &col);
    }
    symmetrize(&mut inv);
    inv
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut inv = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut e = DVector::<f64>::zeros(n);
        e[j] = 1.0;
        inv.set_column(j, &solve_lower(l, &e));
    }
    // exact zeros above the diagonal
    for j in 0..n {
        for i in 0..j {
            inv[(i, j)] = 0.0;
        }
    }
    inv
}

pub fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
}

/// `log det` of `L Lᵀ`.
pub fn log_det_from_cholesky(l: &DMatrix<f64>) -> f64 {
    2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
}

/// Serializes a matrix as an array of rows.
pub fn serialize_rows<S: serde::Serializer>(
    m: &DMatrix<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for r in 0..m.nrows() {
        let row: Vec<f64> = m.row(r).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

/// Row-major nested vectors.
pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn factor_and_solve() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0]);
        let l = cholesky(&a).unwrap();
        assert_relative_eq!(&l * l.transpose(), a, epsilon = 1e-14);
        let inv = inverse_from_cholesky(&l);
        assert_relative_eq!(&inv * &a, DMatrix::identity(3, 3), epsilon = 1e-13);
        let li = lower_inverse(&l);
        assert_relative_eq!(&li * &l, DMatrix::identity(3, 3), epsilon = 1e-14);
        assert_relative_eq!(
            log_det_from_cholesky(&l),
            a.determinant().ln(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn rejects_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            cholesky(&a),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
        assert_eq!(condition_number(&a), f64::INFINITY);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0 / 3.0]));
        assert_relative_eq!(condition_number(&d), 3.0, epsilon = 1e-14);
    }
}
