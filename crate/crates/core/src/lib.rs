//! Christoffel functions from moment data and their factorization into a
//! marginal and a conditional part.
//!
//! For a measure `μ` on `R^n × R^p` with marginal `φ` on `R^n`, the
//! Christoffel function of degree `t` splits as
//! `Λ^μ_t(x, y) = Λ^φ_t(x) · Λ^ν_t(y)` where, for fixed `x`, `1/Λ^ν_t` is an
//! SOS polynomial in `y`. When `p = 1` the functional `ν` is recovered as a
//! positive definite Hankel matrix by a max-det Gram program and then as an
//! atomic measure.
//!
//! Modules, bottom up: [`basis`] (block monomial ordering), [`moments`],
//! [`quadrature`], [`christoffel`], [`maxdet`], [`disintegration`].

pub mod basis;
pub mod christoffel;
pub mod disintegration;
pub mod error;
pub mod linalg;
pub mod maxdet;
pub mod moments;
pub mod poly;
pub mod quadrature;

pub use basis::{basis_size, enumerate, MultiIndex, OrderedBasis};
pub use christoffel::{
    build_cf, cd_kernel, cf_value, inverse_cf_sum, orthonormal_chol, orthonormal_det, score_points,
    CfEvaluator, OrthonormalFamily, RecurrenceCf,
};
pub use disintegration::{
    asymptotic_sweep, conditional_sos, conjecture_probe, decay_sweep, disintegrate_at,
    factorization_residual, DisintegrationResult, Disintegrator,
};
pub use error::{Error, Result};
pub use maxdet::{maxdet_hankel, weighted_maxdet, MaxDetResult, UnivariateSos, WeightedCone};
pub use moments::{
    localize_sequence, marginal_sequence, moment_matrix, moments_from_samples, moments_uniform_box,
    riesz_eval, CurveRegion, MeasureSpec, MomentMatrix, MomentSequence,
};
pub use nalgebra::{DMatrix, DVector};
pub use poly::{Polynomial, UnivariatePoly};
pub use quadrature::{atoms_moments, gauss_legendre, hankel_to_atoms, AtomicMeasure};
