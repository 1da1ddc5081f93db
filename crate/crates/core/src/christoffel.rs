//! Christoffel functions, the Christoffel–Darboux kernel and orthonormal
//! polynomial families built from a moment matrix.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::basis::OrderedBasis;
use crate::error::{Error, Result};
use crate::linalg;
use crate::moments::{moment_matrix, MomentMatrix, MomentSequence};
use crate::poly::Polynomial;
use crate::quadrature::{stieltjes, AtomicMeasure, Recurrence};

/// Moment matrices with a larger spectral condition number are refused.
pub const DEFAULT_CONDITION_THRESHOLD: f64 = 1e12;

/// Largest basis accepted by the determinant construction.
pub const MAX_DET_BASIS: usize = 50;

/// `Λ_t(x) = [v_t(x)ᵀ M_t⁻¹ v_t(x)]⁻¹`, evaluated through the Cholesky factor.
#[derive(Debug, Clone)]
pub struct CfEvaluator {
    matrix: MomentMatrix,
    factor: DMatrix<f64>,
}

impl CfEvaluator {
    pub fn basis(&self) -> &OrderedBasis {
        self.matrix.basis()
    }

    pub fn matrix(&self) -> &MomentMatrix {
        &self.matrix
    }

    pub fn degree(&self) -> usize {
        self.basis().degree()
    }

    pub fn dim(&self) -> usize {
        self.basis().dim()
    }

    pub fn condition(&self) -> f64 {
        self.matrix.condition()
    }

    /// Lower Cholesky factor `L` with `M = L Lᵀ`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// `L⁻¹ v_t(point)`: the orthonormal polynomials of the Cholesky family at `point`.
    pub fn whitened(&self, point: &[f64]) -> Result<DVector<f64>> {
        let v = self.basis().monomial_vector(point)?;
        Ok(linalg::solve_lower(&self.factor, &v))
    }

    /// `L⁻¹ u` for an arbitrary coefficient vector in the basis.
    pub fn whiten(&self, u: &DVector<f64>) -> DVector<f64> {
        linalg::solve_lower(&self.factor, u)
    }

    /// `v_t(x)ᵀ M⁻¹ v_t(x)`.
    pub fn inverse_value(&self, point: &[f64]) -> Result<f64> {
        Ok(self.whitened(point)?.norm_squared())
    }

    pub fn value(&self, point: &[f64]) -> Result<f64> {
        Ok(1.0 / self.inverse_value(point)?)
    }

    /// `K_t(a, b) = v_t(a)ᵀ M⁻¹ v_t(b)`.
    pub fn kernel(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        Ok(self.whitened(a)?.dot(&self.whitened(b)?))
    }

    /// Coefficients of `K_t(x0, ·)` in the basis, i.e. `M⁻¹ v_t(x0)`.
    pub fn kernel_coefficients(&self, x0: &[f64]) -> Result<DVector<f64>> {
        Ok(linalg::solve_lower_transpose(
            &self.factor,
            &self.whitened(x0)?,
        ))
    }

    /// `K_t(x0, ·)` as a polynomial.
    pub fn kernel_polynomial(&self, x0: &[f64]) -> Result<Polynomial> {
        Ok(basis_polynomial(
            self.basis(),
            self.kernel_coefficients(x0)?.as_slice(),
        ))
    }
}

/// Wraps a factorized moment matrix; refuses non-PD or badly conditioned input.
pub fn build_cf(m: &MomentMatrix) -> Result<CfEvaluator> {
    build_cf_with_threshold(m, DEFAULT_CONDITION_THRESHOLD)
}

pub fn build_cf_with_threshold(m: &MomentMatrix, threshold: f64) -> Result<CfEvaluator> {
    let factor = match m.factor() {
        Some(l) => l.clone(),
        None => {
            let err = linalg::cholesky(m.entries()).err();
            return Err(err.unwrap_or(Error::NotPositiveDefinite {
                index: 0,
                pivot: 0.0,
            }));
        }
    };
    if m.condition() > threshold {
        return Err(Error::IllConditioned {
            condition: m.condition(),
            threshold,
        });
    }
    Ok(CfEvaluator {
        matrix: m.clone(),
        factor,
    })
}

/// Moment matrix of `seq` over `basis` followed by [`build_cf`].
pub fn cf_from_sequence(seq: &MomentSequence, basis: &OrderedBasis) -> Result<CfEvaluator> {
    build_cf(&moment_matrix(seq, basis)?)
}

pub fn cf_value(e: &CfEvaluator, point: &[f64]) -> Result<f64> {
    e.value(point)
}

pub fn cd_kernel(e: &CfEvaluator, a: &[f64], b: &[f64]) -> Result<f64> {
    e.kernel(a, b)
}

/// Polynomial `Σ_r coeffs[r] · pair(r)`.
pub fn basis_polynomial(basis: &OrderedBasis, coeffs: &[f64]) -> Polynomial {
    Polynomial::from_terms(
        basis.dim(),
        basis.pairs().iter().cloned().zip(coeffs.iter().copied()),
    )
}

/// Orthonormal polynomials `P_r`, one per basis monomial, stored as a
/// lower-triangular coefficient table (row `r` = coefficients of `P_r`).
#[derive(Debug, Clone)]
pub struct OrthonormalFamily {
    basis: OrderedBasis,
    coeffs: DMatrix<f64>,
    normalizers: Vec<f64>,
}

impl OrthonormalFamily {
    pub fn basis(&self) -> &OrderedBasis {
        &self.basis
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    /// `τ_r` with `P_r = τ_r P̃_r`, where `P̃_r` is the determinant polynomial
    /// whose leading coefficient is the leading principal minor `det M_r`.
    pub fn normalizers(&self) -> &[f64] {
        &self.normalizers
    }

    pub fn len(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.nrows() == 0
    }

    /// Coefficients of the unnormalized `P̃_r`.
    pub fn raw_row(&self, r: usize) -> Vec<f64> {
        self.coeffs
            .row(r)
            .iter()
            .map(|c| c / self.normalizers[r])
            .collect()
    }

    pub fn polynomial(&self, r: usize) -> Polynomial {
        basis_polynomial(&self.basis, self.coeffs.row(r).transpose().as_slice())
    }

    /// `(P_0(x), ..., P_{s-1}(x))`.
    pub fn eval(&self, point: &[f64]) -> Result<DVector<f64>> {
        let v = self.basis.monomial_vector(point)?;
        Ok(&self.coeffs * v)
    }
}

/// Orthonormal family from determinants of bordered leading submatrices.
///
/// `P̃_r` is the determinant of the leading `(r+1) × (r+1)` block of the
/// moment matrix with its last row replaced by the monomials of rank `<= r`.
/// Its cofactors along that row are obtained from an LU solve with the
/// leading `r × r` block: they are `det(M_r) · (-M_r⁻¹ b, 1)` with `b` the
/// first `r` entries of column `r`.
pub fn orthonormal_det(seq: &MomentSequence, basis: &OrderedBasis) -> Result<OrthonormalFamily> {
    let m = moment_matrix(seq, basis)?;
    if !m.is_positive_definite() {
        return Err(linalg::cholesky(m.entries()).unwrap_err());
    }
    let s = basis.len();
    if s > MAX_DET_BASIS {
        return Err(Error::InvalidArgument(format!(
            "determinant construction limited to {MAX_DET_BASIS} monomials, got {s}"
        )));
    }
    let a = m.entries();
    let mut coeffs = DMatrix::<f64>::zeros(s, s);
    let mut normalizers = Vec::with_capacity(s);
    for r in 0..s {
        // cofactors up to the factor det(M_r)
        let mut u = DVector::<f64>::zeros(r + 1);
        u[r] = 1.0;
        let minor_det = if r == 0 {
            1.0
        } else {
            let lu = a.view((0, 0), (r, r)).clone_owned().lu();
            let z = lu.solve(&a.view((0, r), (r, 1)).clone_owned()).ok_or(
                Error::NotPositiveDefinite {
                    index: r,
                    pivot: 0.0,
                },
            )?;
            for c in 0..r {
                u[c] = -z[(c, 0)];
            }
            lu.determinant()
        };
        let block = a.view((0, 0), (r + 1, r + 1));
        let norm2 = (u.transpose() * block * &u)[(0, 0)];
        if !(norm2 > 0.0) || !(minor_det > 0.0) {
            return Err(Error::NotPositiveDefinite {
                index: r,
                pivot: norm2,
            });
        }
        let scale = 1.0 / norm2.sqrt();
        for c in 0..=r {
            coeffs[(r, c)] = u[c] * scale;
        }
        normalizers.push(scale / minor_det);
    }
    Ok(OrthonormalFamily {
        basis: basis.clone(),
        coeffs,
        normalizers,
    })
}

/// Orthonormal family from the Cholesky factor: rows of `L⁻¹`.
pub fn orthonormal_chol(m: &MomentMatrix) -> Result<OrthonormalFamily> {
    let l = match m.factor() {
        Some(l) => l,
        None => return Err(linalg::cholesky(m.entries()).unwrap_err()),
    };
    let coeffs = linalg::lower_inverse(l);
    let mut minor_det = 1.0;
    let mut normalizers = Vec::with_capacity(l.nrows());
    for r in 0..l.nrows() {
        normalizers.push(coeffs[(r, r)] / minor_det);
        minor_det *= l[(r, r)] * l[(r, r)];
    }
    Ok(OrthonormalFamily {
        basis: m.basis().clone(),
        coeffs,
        normalizers,
    })
}

/// `Σ_r P_r(x)²`, the reciprocal of the Christoffel function.
pub fn inverse_cf_sum(f: &OrthonormalFamily, point: &[f64]) -> Result<f64> {
    Ok(f.eval(point)?.norm_squared())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointScore {
    pub point: Vec<f64>,
    /// `s(t) · Λ_t(point)` with `s(t)` the basis size.
    pub score: f64,
    /// `score >= γ`: the point lies in the superlevel set.
    pub inside: bool,
}

/// Scaled Christoffel values and the superlevel indicator for threshold `gamma`.
pub fn score_points(e: &CfEvaluator, points: &[Vec<f64>], gamma: f64) -> Result<Vec<PointScore>> {
    let s = e.basis().len() as f64;
    points
        .iter()
        .map(|p| {
            let score = s * e.value(p)?;
            Ok(PointScore {
                point: p.clone(),
                score,
                inside: score >= gamma,
            })
        })
        .collect()
}

/// Univariate Christoffel function through the three-term recurrence of a
/// discretized measure. Stays accurate at degrees where the monomial
/// moment matrix is numerically singular.
#[derive(Debug, Clone)]
pub struct RecurrenceCf {
    recurrence: Recurrence,
    t: usize,
}

impl RecurrenceCf {
    /// `rule` must have more than `t` atoms and represent the measure
    /// exactly for polynomials of degree `2t`.
    pub fn new(rule: &AtomicMeasure, t: usize) -> Result<Self> {
        Ok(RecurrenceCf {
            recurrence: stieltjes(rule, t)?,
            t,
        })
    }

    pub fn degree(&self) -> usize {
        self.t
    }

    pub fn recurrence(&self) -> &Recurrence {
        &self.recurrence
    }

    pub fn inverse_value(&self, x: f64) -> f64 {
        self.recurrence
            .orthonormal_values(x, self.t)
            .iter()
            .map(|p| p * p)
            .sum()
    }

    pub fn value(&self, x: f64) -> f64 {
        1.0 / self.inverse_value(x)
    }
}
