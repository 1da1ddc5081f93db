//! Splitting a joint Christoffel function into a marginal factor and a
//! conditional one, and recovering the conditional functional.
//!
//! For fixed `x`, `y ↦ Λ^φ_t(x) / Λ^μ_t(x, y)` is a polynomial `p_t(y; x)`
//! equal to one plus a sum of squares. Its coefficients come out of the
//! joint kernel by grouping the monomial vector into `y`-power blocks. When
//! `y` is scalar the max-det Gram program turns `p_t` into a Hankel moment
//! matrix whose Christoffel function is exactly `1/p_t`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::basis::{MultiIndex, OrderedBasis};
use crate::christoffel::{build_cf, CfEvaluator, RecurrenceCf};
use crate::error::{Error, Result};
use crate::linalg;
use crate::maxdet::{maxdet_hankel, MaxDetResult, UnivariateSos};
use crate::moments::{
    marginal_sequence, moment_matrix_with_jitter, moments_from_samples, MeasureSpec, MomentSequence,
};
use crate::poly::Polynomial;
use crate::quadrature::{hankel_to_atoms, AtomicMeasure};

/// Marginal CF values below this are flagged as far outside the support.
pub const EXTREME_MARGINAL_CF: f64 = 1e-14;

/// Joint and marginal evaluators sharing a degree.
#[derive(Debug, Clone)]
pub struct Disintegrator {
    joint: CfEvaluator,
    marginal: CfEvaluator,
}

impl Disintegrator {
    pub fn new(joint: CfEvaluator, marginal: CfEvaluator) -> Result<Self> {
        let (jb, mb) = (joint.basis(), marginal.basis());
        if jb.n() != mb.dim() || jb.degree() != mb.degree() || jb.p() == 0 {
            return Err(Error::DimensionMismatch {
                expected: jb.n(),
                got: mb.dim(),
            });
        }
        Ok(Disintegrator { joint, marginal })
    }

    /// Builds both evaluators from the joint moments; the first `n`
    /// coordinates are conditioned on.
    pub fn from_moments(seq: &MomentSequence, n: usize, t: usize) -> Result<Self> {
        Disintegrator::from_moments_with_jitter(seq, n, t, 0.0)
    }

    /// As [`Disintegrator::from_moments`] with `jitter · I` added to both
    /// matrices; the marginal stays the leading block of the joint.
    pub fn from_moments_with_jitter(
        seq: &MomentSequence,
        n: usize,
        t: usize,
        jitter: f64,
    ) -> Result<Self> {
        if n == 0 || n >= seq.dim() {
            return Err(Error::DimensionMismatch {
                expected: seq.dim() - 1,
                got: n,
            });
        }
        let joint = build_cf(&moment_matrix_with_jitter(
            seq,
            &OrderedBasis::new(n, seq.dim() - n, t),
            jitter,
        )?)?;
        let marg = marginal_sequence(seq, n)?;
        let marginal = build_cf(&moment_matrix_with_jitter(
            &marg,
            &OrderedBasis::new(n, 0, t),
            jitter,
        )?)?;
        Disintegrator::new(joint, marginal)
    }

    /// Conditions on the first coordinate of a closed-form measure.
    pub fn from_spec(spec: &MeasureSpec, t: usize, quad_order: usize) -> Result<Self> {
        let seq = spec.moments(t, quad_order)?;
        Disintegrator::from_moments(&seq, 1, t)
    }

    pub fn joint(&self) -> &CfEvaluator {
        &self.joint
    }

    pub fn marginal(&self) -> &CfEvaluator {
        &self.marginal
    }

    pub fn degree(&self) -> usize {
        self.joint.degree()
    }

    pub fn conditional_sos(&self, x: &[f64]) -> Result<Polynomial> {
        conditional_sos(&self.joint, &self.marginal, x)
    }

    pub fn disintegrate_at(&self, x: &[f64]) -> Result<DisintegrationResult> {
        disintegrate_at(&self.joint, &self.marginal, x)
    }
}

/// Coefficients in `y` of `Λ^φ_t(x) / Λ^μ_t(x, y)`.
///
/// Writing `v_t(x, y) = Σ_β y^β u_β(x)`, the coefficient of `y^γ` is
/// `Λ^φ_t(x) Σ_{β+β'=γ} (L⁻¹u_β)·(L⁻¹u_β')`.
pub fn conditional_sos(
    joint: &CfEvaluator,
    marginal: &CfEvaluator,
    x: &[f64],
) -> Result<Polynomial> {
    let basis = joint.basis();
    let (n, p) = (basis.n(), basis.p());
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "conditioning point is not finite".into(),
        ));
    }
    let lam_x = marginal.value(x)?;

    let mut blocks: BTreeMap<MultiIndex, DVector<f64>> = BTreeMap::new();
    for (r, pair) in basis.pairs().iter().enumerate() {
        let (alpha, beta) = pair.split(n);
        blocks
            .entry(beta)
            .or_insert_with(|| DVector::zeros(basis.len()))[r] = alpha.eval(x);
    }
    let whitened: Vec<(MultiIndex, DVector<f64>)> = blocks
        .into_iter()
        .map(|(b, u)| {
            let w = joint.whiten(&u);
            (b, w)
        })
        .collect();

    let mut out = Polynomial::zero(p);
    for (i, (b1, w1)) in whitened.iter().enumerate() {
        for (b2, w2) in &whitened[i..] {
            let mult = if b1 == b2 { 1.0 } else { 2.0 };
            out.add_term(b1.add(b2), mult * lam_x * w1.dot(w2));
        }
    }
    Ok(out)
}

/// Dense ascending coefficients of a univariate polynomial.
fn univariate_coeffs(poly: &Polynomial) -> Vec<f64> {
    let mut c = vec![0.0; poly.degree() + 1];
    for (m, v) in poly.terms() {
        c[m.exponents()[0] as usize] += v;
    }
    c
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub joint_condition: f64,
    pub marginal_condition: f64,
    pub hankel_condition: f64,
    pub newton_iterations: usize,
    pub gradient_norm: f64,
    /// Marginal CF below [`EXTREME_MARGINAL_CF`]: `x` is far outside `X`.
    pub extreme_conditioning: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DisintegrationResult {
    pub x: Vec<f64>,
    pub t: usize,
    pub marginal_cf: f64,
    /// `p_t(y; x)`, ascending coefficients of length `2t + 1`.
    pub sos: Vec<f64>,
    /// Conditional moment matrix `(Q*)⁻¹`.
    #[serde(serialize_with = "linalg::serialize_rows")]
    pub hankel: DMatrix<f64>,
    /// Max-det Gram matrix `Q*` of `p_t(·; x)`.
    #[serde(serialize_with = "linalg::serialize_rows")]
    pub gram: DMatrix<f64>,
    /// `λ*`, moments of the conditional functional up to degree `2t`.
    pub moments: Vec<f64>,
    pub measure: AtomicMeasure,
    pub mass: f64,
    pub mass_deviation: f64,
    pub diagnostics: Diagnostics,
}

impl DisintegrationResult {
    /// `Λ^ν_t(y) = [v_t(y)ᵀ H⁻¹ v_t(y)]⁻¹`.
    pub fn conditional_cf(&self, y: f64) -> f64 {
        let n = self.gram.nrows();
        let mut v = DVector::zeros(n);
        let mut acc = 1.0;
        for k in 0..n {
            v[k] = acc;
            acc *= y;
        }
        1.0 / (v.transpose() * &self.gram * &v)[(0, 0)]
    }

    pub fn sos_eval(&self, y: f64) -> f64 {
        self.sos.iter().rev().fold(0.0, |acc, &c| acc * y + c)
    }
}

/// Conditional SOS, max-det Hankel matrix and representing atoms at `x`.
pub fn disintegrate_at(
    joint: &CfEvaluator,
    marginal: &CfEvaluator,
    x: &[f64],
) -> Result<DisintegrationResult> {
    let basis = joint.basis();
    if basis.p() != 1 {
        return Err(Error::InvalidArgument(format!(
            "conditional Gram solve needs one conditioned variable, got {}",
            basis.p()
        )));
    }
    let t = basis.degree();
    let poly = conditional_sos(joint, marginal, x)?;
    let mut sos = univariate_coeffs(&poly);
    sos.resize(2 * t + 1, 0.0);
    let marginal_cf = marginal.value(x)?;
    let solved: MaxDetResult = maxdet_hankel(&UnivariateSos::new(sos.clone()))?;
    let measure = hankel_to_atoms(&solved.dual)?;
    let mass = solved.mass();
    Ok(DisintegrationResult {
        x: x.to_vec(),
        t,
        marginal_cf,
        sos,
        diagnostics: Diagnostics {
            joint_condition: joint.condition(),
            marginal_condition: marginal.condition(),
            hankel_condition: linalg::condition_number(&solved.hankel),
            newton_iterations: solved.iterations,
            gradient_norm: solved.gradient_norm,
            extreme_conditioning: marginal_cf < EXTREME_MARGINAL_CF,
        },
        hankel: solved.hankel,
        gram: solved.gram,
        moments: solved.dual,
        measure,
        mass,
        mass_deviation: (mass - 1.0).abs(),
    })
}

/// `max_y |Λ^μ(x,y) − Λ^φ(x)·Λ^ν(y)| / Λ^μ(x,y)` over the grid.
pub fn factorization_residual(
    joint: &CfEvaluator,
    result: &DisintegrationResult,
    y_grid: &[f64],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let mut point = result.x.clone();
    point.push(0.0);
    for &y in y_grid {
        *point.last_mut().unwrap() = y;
        let lhs = joint.value(&point)?;
        let rhs = result.marginal_cf * result.conditional_cf(y);
        worst = worst.max((lhs - rhs).abs() / lhs);
    }
    Ok(worst)
}

/// `count` equispaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySweep {
    pub x: Vec<f64>,
    pub y: f64,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `ln value` against `t`.
    pub slope: Option<f64>,
    pub r_squared: Option<f64>,
}

/// Slope and R² of the least-squares line through `(t, ln value)`.
pub fn log_linear_fit(rows: &[SweepRow]) -> (Option<f64>, Option<f64>) {
    if rows.len() < 2 || rows.iter().any(|r| !(r.value > 0.0)) {
        return (None, None);
    }
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| r.t as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.value.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (Some(slope), Some(r2))
}

/// Where sweeps get their moments: a closed-form spec (with its quadrature
/// order) or an empirical point cloud.
#[derive(Debug, Clone, Copy)]
pub enum MeasureSource<'a> {
    Spec {
        spec: &'a MeasureSpec,
        quad_order: usize,
    },
    Samples(&'a [Vec<f64>]),
}

impl MeasureSource<'_> {
    pub fn dim(&self) -> Result<usize> {
        match self {
            MeasureSource::Spec { spec, .. } => spec
                .dim()
                .ok_or_else(|| Error::InvalidArgument("sample specs must be loaded first".into())),
            MeasureSource::Samples(points) => Ok(points.first().ok_or(Error::EmptyInput)?.len()),
        }
    }

    /// Moments up to degree `2t`.
    pub fn moments(&self, t: usize) -> Result<MomentSequence> {
        match self {
            MeasureSource::Spec { spec, quad_order } => spec.moments(t, (*quad_order).max(t + 1)),
            MeasureSource::Samples(points) => moments_from_samples(points, t),
        }
    }

    /// First-coordinate marginal as atoms, exact for degree `2t`.
    pub fn marginal_rule(&self, t: usize) -> Result<AtomicMeasure> {
        match self {
            MeasureSource::Spec { spec, quad_order } => {
                spec.marginal_rule((*quad_order).max(t + 1))
            }
            MeasureSource::Samples(points) => {
                let w = 1.0 / points.len() as f64;
                Ok(AtomicMeasure::new(
                    points.iter().map(|p| p[0]).collect(),
                    vec![w; points.len()],
                ))
            }
        }
    }

    fn disintegrator(&self, t: usize) -> Result<Disintegrator> {
        let seq = self.moments(t)?;
        Disintegrator::from_moments(&seq, seq.dim() - 1, t)
    }
}

/// `Λ^{ν_{x,t}}_t(y)` for each degree in `t_list`.
pub fn decay_sweep(
    spec: &MeasureSpec,
    x: f64,
    y: f64,
    t_list: &[usize],
    quad_order: usize,
) -> Result<DecaySweep> {
    decay_sweep_from(&MeasureSource::Spec { spec, quad_order }, &[x], y, t_list)
}

pub fn decay_sweep_from(
    source: &MeasureSource,
    x: &[f64],
    y: f64,
    t_list: &[usize],
) -> Result<DecaySweep> {
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let r = source.disintegrator(t)?.disintegrate_at(x)?;
        rows.push(SweepRow {
            t,
            value: r.conditional_cf(y),
        });
    }
    let (slope, r_squared) = log_linear_fit(&rows);
    Ok(DecaySweep {
        x: x.to_vec(),
        y,
        rows,
        slope,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub t: usize,
    pub cf: f64,
    /// `t · cf`
    pub scaled: f64,
}

/// `t · Λ_t` along `t_list`.
///
/// A one-dimensional measure evaluates its own Christoffel function at `x`
/// through the three-term recurrence (usable at large degree); a joint
/// measure evaluates the conditional CF at `y` given `x`.
pub fn asymptotic_sweep(
    spec: &MeasureSpec,
    x: f64,
    y: Option<f64>,
    t_list: &[usize],
    quad_order: usize,
) -> Result<Vec<AsymptoticRow>> {
    asymptotic_sweep_from(&MeasureSource::Spec { spec, quad_order }, &[x], y, t_list)
}

pub fn asymptotic_sweep_from(
    source: &MeasureSource,
    x: &[f64],
    y: Option<f64>,
    t_list: &[usize],
) -> Result<Vec<AsymptoticRow>> {
    let dim = source.dim()?;
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let cf = if dim == 1 {
            let x = *x.first().ok_or(Error::EmptyInput)?;
            RecurrenceCf::new(&source.marginal_rule(t)?, t)?.value(x)
        } else {
            let y = y.ok_or_else(|| {
                Error::InvalidArgument("y is required for a joint measure".into())
            })?;
            source
                .disintegrator(t)?
                .disintegrate_at(x)?
                .conditional_cf(y)
        };
        rows.push(AsymptoticRow {
            t,
            cf,
            scaled: t as f64 * cf,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeBlock {
    pub t: usize,
    #[serde(serialize_with = "linalg::serialize_rows")]
    pub hankel: DMatrix<f64>,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeDistance {
    pub t: usize,
    pub t_next: usize,
    /// Max abs difference between the `(t+1)×(t+1)` leading blocks.
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjectureReport {
    pub x: Vec<f64>,
    pub blocks: Vec<ProbeBlock>,
    pub distances: Vec<ProbeDistance>,
}

/// Does the conditional moment matrix at degree `t` extend the one at a
/// lower degree? Reports leading-block distances between consecutive runs.
pub fn conjecture_probe(
    spec: &MeasureSpec,
    x: f64,
    t_list: &[usize],
    quad_order: usize,
) -> Result<ConjectureReport> {
    conjecture_probe_from(&MeasureSource::Spec { spec, quad_order }, &[x], t_list)
}

pub fn conjecture_probe_from(
    source: &MeasureSource,
    x: &[f64],
    t_list: &[usize],
) -> Result<ConjectureReport> {
    if t_list.len() < 2 {
        return Err(Error::InvalidArgument(
            "conjecture probe needs at least two degrees".into(),
        ));
    }
    let mut blocks = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let r = source.disintegrator(t)?.disintegrate_at(x)?;
        blocks.push(ProbeBlock {
            t,
            mass: r.mass,
            hankel: r.hankel,
        });
    }
    let distances = blocks
        .windows(2)
        .map(|w| {
            let k = w[0].hankel.nrows().min(w[1].hankel.nrows());
            let a = w[0].hankel.view((0, 0), (k, k));
            let b = w[1].hankel.view((0, 0), (k, k));
            ProbeDistance {
                t: w[0].t,
                t_next: w[1].t,
                max_abs_diff: (a - b).amax(),
            }
        })
        .collect();
    Ok(ConjectureReport {
        x: x.to_vec(),
        blocks,
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{moments_uniform_box, CurveRegion};

    fn square(t: usize) -> Disintegrator {
        Disintegrator::from_moments(
            &moments_uniform_box(&[[-1.0, 1.0], [-1.0, 1.0]], t, true).unwrap(),
            1,
            t,
        )
        .unwrap()
    }

    #[test]
    fn closed_form_sos() {
        let d = square(1);
        let p = univariate_coeffs(&d.conditional_sos(&[0.0]).unwrap());
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12 && (p[2] - 3.0).abs() < 1e-12);
        let p = univariate_coeffs(&d.conditional_sos(&[1.0]).unwrap());
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12 && (p[2] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn closed_form_chain() {
        let r = square(1).disintegrate_at(&[0.0]).unwrap();
        let h = [1.0, 0.0, 1.0 / 3.0];
        for (a, b) in r.moments.iter().zip(h) {
            assert!((a - b).abs() < 1e-10);
        }
        let s = 1.0 / 3f64.sqrt();
        assert!((r.measure.nodes[0] + s).abs() < 1e-10 && (r.measure.nodes[1] - s).abs() < 1e-10);
        assert!((r.measure.weights[0] - 0.5).abs() < 1e-10);
        assert!(r.mass_deviation < 1e-10);
    }

    #[test]
    fn identity_off_center() {
        let d = square(3);
        for x in [1.0, 0.3, -0.7] {
            let r = d.disintegrate_at(&[x]).unwrap();
            let res = factorization_residual(d.joint(), &r, &linspace(-2.0, 2.0, 101)).unwrap();
            assert!(res <= 1e-8, "{x}: {res}");
            for y in linspace(-2.0, 2.0, 41) {
                assert!(r.sos_eval(y) >= 1.0 - 1e-9);
            }
        }
        assert_eq!(
            factorization_residual(d.joint(), &d.disintegrate_at(&[0.0]).unwrap(), &[]).unwrap(),
            0.0
        );
    }

    #[test]
    fn far_point_flagged() {
        let r = square(2).disintegrate_at(&[1e4]).unwrap();
        assert!(r.diagnostics.extreme_conditioning);
    }

    #[test]
    fn bivariate_conditional_coefficients() {
        let seq = moments_uniform_box(&[[-1.0, 1.0], [-1.0, 1.0], [0.0, 2.0]], 2, true).unwrap();
        let d = Disintegrator::from_moments(&seq, 1, 2).unwrap();
        let poly = d.conditional_sos(&[0.4]).unwrap();
        let lam_x = d.marginal().value(&[0.4]).unwrap();
        for y in [[0.1, 0.5], [-1.2, 3.0]] {
            let lhs = poly.eval(&y) * d.joint().value(&[0.4, y[0], y[1]]).unwrap();
            assert!((lhs - lam_x).abs() < 1e-10);
        }
        assert!(d.disintegrate_at(&[0.4]).is_err());
    }

    #[test]
    fn curve_region_residual() {
        let spec = MeasureSpec::curve_region(CurveRegion::polynomial(
            [-1.0, 1.0],
            vec![-0.8, 0.0, 0.2],
            vec![0.9, -0.1],
        ));
        let d = Disintegrator::from_spec(&spec, 3, 64).unwrap();
        let r = d.disintegrate_at(&[0.5]).unwrap();
        assert!(factorization_residual(d.joint(), &r, &linspace(-1.5, 1.5, 101)).unwrap() <= 1e-8);
    }

    #[test]
    fn sweeps() {
        let spec = MeasureSpec::uniform_box(vec![[-1.0, 1.0], [-1.0, 1.0]]);
        let s = decay_sweep(&spec, 0.0, 1.5, &[3], 64).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert!(s.slope.is_none());
        assert!(asymptotic_sweep(&spec, 0.0, Some(0.0), &[], 64)
            .unwrap()
            .is_empty());
        assert!(conjecture_probe(&spec, 0.0, &[2], 64).is_err());
        let rep = conjecture_probe(&spec, 0.0, &[1, 2], 64).unwrap();
        assert!((rep.blocks[0].hankel[(1, 1)] - 1.0 / 3.0).abs() < 1e-10);
        assert_eq!(rep.distances.len(), 1);
    }
}
