//! Moment sequences, the Riesz functional, moment and localizing matrices.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{graded, MultiIndex, OrderedBasis};
use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::Polynomial;
use crate::quadrature::{gauss_legendre, AtomicMeasure};

/// Default Gauss–Legendre order for region moments.
pub const DEFAULT_QUAD_ORDER: usize = 64;

/// Moments `φ_γ` for every `|γ| <= degree` in `dim` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    dim: usize,
    degree: usize,
    values: BTreeMap<MultiIndex, f64>,
}

impl MomentSequence {
    /// Tabulates `f` on `N^dim_degree`.
    pub fn from_fn(dim: usize, degree: usize, mut f: impl FnMut(&MultiIndex) -> f64) -> Self {
        let values = graded(dim, degree)
            .into_iter()
            .map(|m| {
                let v = f(&m);
                (m, v)
            })
            .collect();
        MomentSequence {
            dim,
            degree,
            values,
        }
    }

    /// Univariate sequence `(m_0, m_1, ...)`.
    pub fn univariate(values: &[f64]) -> Self {
        assert!(!values.is_empty());
        Self::from_fn(1, values.len() - 1, |m| values[m.exponents()[0] as usize])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Largest `t` with `M_t` available, i.e. `degree / 2`.
    pub fn half_degree(&self) -> usize {
        self.degree / 2
    }

    pub fn mass(&self) -> f64 {
        self.get(&MultiIndex::zeros(self.dim))
    }

    /// Moment at `m`; panics if `|m|` exceeds the degree bound.
    pub fn get(&self, m: &MultiIndex) -> f64 {
        match self.values.get(m) {
            Some(&v) => v,
            None => panic!("moment {m:?} outside degree bound {}", self.degree),
        }
    }

    pub fn try_get(&self, m: &MultiIndex) -> Option<f64> {
        self.values.get(m).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.values.iter().map(|(m, &v)| (m, v))
    }

    /// Univariate values in degree order; `None` when `dim != 1`.
    pub fn as_univariate(&self) -> Option<Vec<f64>> {
        (self.dim == 1).then(|| {
            (0..=self.degree)
                .map(|k| self.get(&MultiIndex::new(vec![k as u32])))
                .collect()
        })
    }

    /// Same sequence restricted to a smaller degree bound.
    pub fn truncate(&self, degree: usize) -> Result<MomentSequence> {
        if degree > self.degree {
            return Err(Error::DegreeOverflow {
                requested: degree,
                available: self.degree,
            });
        }
        Ok(MomentSequence::from_fn(self.dim, degree, |m| self.get(m)))
    }

    /// Multiplies every moment by `s`.
    pub fn scaled(&self, s: f64) -> MomentSequence {
        MomentSequence {
            dim: self.dim,
            degree: self.degree,
            values: self
                .values
                .iter()
                .map(|(m, &v)| (m.clone(), v * s))
                .collect(),
        }
    }
}

/// Running sums of monomials over sample points. Shards merge exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentAccumulator {
    dim: usize,
    degree: usize,
    exponents: Vec<MultiIndex>,
    sums: Vec<f64>,
    count: usize,
}

impl MomentAccumulator {
    pub fn new(dim: usize, degree: usize) -> Self {
        let exponents = graded(dim, degree);
        let sums = vec![0.0; exponents.len()];
        MomentAccumulator {
            dim,
            degree,
            exponents,
            sums,
            count: 0,
        }
    }

    pub fn push(&mut self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        for (m, s) in self.exponents.iter().zip(self.sums.iter_mut()) {
            *s += m.eval(point);
        }
        self.count += 1;
        Ok(())
    }

    /// Adds the sums of `other`; merging in a fixed shard order is deterministic.
    pub fn merge(&mut self, other: &MomentAccumulator) -> Result<()> {
        if other.dim != self.dim || other.degree != self.degree {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        for (s, o) in self.sums.iter_mut().zip(&other.sums) {
            *s += o;
        }
        self.count += other.count;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Empirical (probability) moments.
    pub fn finish(&self) -> Result<MomentSequence> {
        if self.count == 0 {
            return Err(Error::EmptyInput);
        }
        let n = self.count as f64;
        let values = self
            .exponents
            .iter()
            .cloned()
            .zip(self.sums.iter().map(|s| s / n))
            .collect();
        Ok(MomentSequence {
            dim: self.dim,
            degree: self.degree,
            values,
        })
    }
}

/// Empirical moments `(1/N) Σ x_i^γ` up to degree `2t`.
pub fn moments_from_samples(points: &[Vec<f64>], t: usize) -> Result<MomentSequence> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let mut acc = MomentAccumulator::new(first.len(), 2 * t);
    for p in points {
        acc.push(p)?;
    }
    acc.finish()
}

fn interval_moments(lo: f64, hi: f64, degree: usize, normalize: bool) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || !(hi > lo) {
        return Err(Error::DegenerateInterval { lo, hi });
    }
    let len = hi - lo;
    Ok((0..=degree)
        .map(|k| {
            let k1 = (k + 1) as i32;
            let raw = (hi.powi(k1) - lo.powi(k1)) / k1 as f64;
            if normalize {
                raw / len
            } else {
                raw
            }
        })
        .collect())
}

/// Product moments of the uniform measure on a box, up to degree `2t`.
pub fn moments_uniform_box(
    bounds: &[[f64; 2]],
    t: usize,
    normalize: bool,
) -> Result<MomentSequence> {
    if bounds.is_empty() {
        return Err(Error::EmptyInput);
    }
    let factors = bounds
        .iter()
        .map(|[lo, hi]| interval_moments(*lo, *hi, 2 * t, normalize))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence::from_fn(bounds.len(), 2 * t, |m| {
        m.exponents()
            .iter()
            .zip(&factors)
            .map(|(&e, f)| f[e as usize])
            .product()
    }))
}

/// Boundary curve of a planar region, as a polynomial or a piecewise-linear table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// Ascending coefficients.
    Poly(Vec<f64>),
    /// Linear interpolation through `(x[i], values[i])`, constant beyond the ends.
    Table { x: Vec<f64>, values: Vec<f64> },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Poly(c) => c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci),
            Profile::Table { x: xs, values } => {
                if x <= xs[0] {
                    return values[0];
                }
                let last = xs.len() - 1;
                if x >= xs[last] {
                    return values[last];
                }
                let i = xs.partition_point(|&xi| xi <= x) - 1;
                let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Profile::Poly(c) if c.is_empty() => {
                Err(Error::InvalidRegion("empty profile polynomial".into()))
            }
            Profile::Poly(c) if c.iter().any(|v| !v.is_finite()) => Err(Error::InvalidRegion(
                "non-finite profile coefficient".into(),
            )),
            Profile::Table { x, values } => {
                if x.len() < 2 || x.len() != values.len() {
                    return Err(Error::InvalidRegion(
                        "profile table needs at least two (x, value) pairs".into(),
                    ));
                }
                if x.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidRegion(
                        "profile table abscissae must increase".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Planar region `{(x, y): x ∈ X, a(x) <= y <= b(x)}` with an optional
/// polynomial density (uniform otherwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRegion {
    pub x_interval: [f64; 2],
    pub lower: Profile,
    pub upper: Profile,
    /// Terms `[i, j, c]` of `Σ c x^i y^j`; must be positive on the region.
    #[serde(default)]
    pub density: Option<Vec<(u32, u32, f64)>>,
    #[serde(default = "default_true")]
    pub normalize: bool,
}

fn default_true() -> bool {
    true
}

impl CurveRegion {
    pub fn polynomial(x_interval: [f64; 2], lower: Vec<f64>, upper: Vec<f64>) -> Self {
        CurveRegion {
            x_interval,
            lower: Profile::Poly(lower),
            upper: Profile::Poly(upper),
            density: None,
            normalize: true,
        }
    }

    fn density_at(&self, x: f64, y: f64) -> f64 {
        match &self.density {
            None => 1.0,
            Some(terms) => terms
                .iter()
                .map(|&(i, j, c)| c * x.powi(i as i32) * y.powi(j as i32))
                .sum(),
        }
    }

    /// Gauss rule on `X`, checking `b - a > 0` at every node.
    fn x_rule(&self, quad_order: usize) -> Result<Vec<(f64, f64, f64, f64)>> {
        let [lo, hi] = self.x_interval;
        if !(lo.is_finite() && hi.is_finite()) || !(hi > lo) {
            return Err(Error::DegenerateInterval { lo, hi });
        }
        self.lower.validate()?;
        self.upper.validate()?;
        let rule = gauss_legendre(quad_order).mapped_to(lo, hi);
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| {
                let a = self.lower.eval(x);
                let b = self.upper.eval(x);
                if !(b - a > 0.0) {
                    Err(Error::InvalidRegion(format!(
                        "b(x) - a(x) = {} is not positive at x = {x}",
                        b - a
                    )))
                } else {
                    Ok((x, w, a, b))
                }
            })
            .collect()
    }

    /// Moments up to degree `2t`.
    pub fn moments(&self, t: usize, quad_order: usize) -> Result<MomentSequence> {
        if quad_order < t + 1 {
            return Err(Error::InvalidArgument(format!(
                "quadrature order {quad_order} below t + 1 = {}",
                t + 1
            )));
        }
        let degree = 2 * t;
        let xs = self.x_rule(quad_order)?;
        // table[i][j] = ∫_X x^i ∫_a^b y^j f dy dx
        let mut table = vec![vec![0.0; degree + 1]; degree + 1];
        let inner = gauss_legendre(quad_order);
        for &(x, wx, a, b) in &xs {
            let fiber: Vec<f64> = match self.density {
                None => (0..=degree)
                    .map(|j| {
                        let j1 = (j + 1) as i32;
                        (b.powi(j1) - a.powi(j1)) / j1 as f64
                    })
                    .collect(),
                Some(_) => {
                    let rule = inner.mapped_to(a, b);
                    let mut f = vec![0.0; degree + 1];
                    for (&y, &wy) in rule.nodes.iter().zip(&rule.weights) {
                        let d = self.density_at(x, y);
                        if !(d > 0.0) {
                            return Err(Error::InvalidRegion(format!(
                                "density {d} is not positive at ({x}, {y})"
                            )));
                        }
                        let mut pw = wy * d;
                        for fj in f.iter_mut() {
                            *fj += pw;
                            pw *= y;
                        }
                    }
                    f
                }
            };
            let mut xp = wx;
            for row in table.iter_mut() {
                for (j, cell) in row.iter_mut().enumerate() {
                    *cell += xp * fiber[j];
                }
                xp *= x;
            }
        }
        let mass = table[0][0];
        let norm = if self.normalize { 1.0 / mass } else { 1.0 };
        Ok(MomentSequence::from_fn(2, degree, |m| {
            let e = m.exponents();
            table[e[0] as usize][e[1] as usize] * norm
        }))
    }

    /// Quadrature rule for the marginal on `X` (weights carry the fiber mass).
    pub fn marginal_rule(&self, quad_order: usize) -> Result<AtomicMeasure> {
        let xs = self.x_rule(quad_order)?;
        let inner = gauss_legendre(quad_order);
        let mut nodes = Vec::with_capacity(xs.len());
        let mut weights = Vec::with_capacity(xs.len());
        for &(x, wx, a, b) in &xs {
            let fiber = match self.density {
                None => b - a,
                Some(_) => inner.mapped_to(a, b).integrate(|y| self.density_at(x, y)),
            };
            nodes.push(x);
            weights.push(wx * fiber);
        }
        let mut m = AtomicMeasure::new(nodes, weights);
        if self.normalize {
            let total = m.mass();
            m.weights.iter_mut().for_each(|w| *w /= total);
        }
        Ok(m)
    }
}

/// Where the moments of a run come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Empirical measure of a CSV point file.
    Samples {
        file: String,
    },
    /// Uniform measure on a box, one `[lo, hi]` per coordinate.
    UniformBox {
        bounds: Vec<[f64; 2]>,
        #[serde(default = "default_true")]
        normalize: bool,
    },
    CurveRegion(CurveRegion),
}

impl MeasureSpec {
    pub fn uniform_box(bounds: Vec<[f64; 2]>) -> Self {
        MeasureSpec::UniformBox {
            bounds,
            normalize: true,
        }
    }

    pub fn curve_region(region: CurveRegion) -> Self {
        MeasureSpec::CurveRegion(region)
    }

    /// Ambient dimension, when known without reading data.
    pub fn dim(&self) -> Option<usize> {
        match self {
            MeasureSpec::Samples { .. } => None,
            MeasureSpec::UniformBox { bounds, .. } => Some(bounds.len()),
            MeasureSpec::CurveRegion(_) => Some(2),
        }
    }

    /// Moments up to degree `2t` for the closed-form variants. Sample files
    /// are read by the caller and go through [`moments_from_samples`].
    pub fn moments(&self, t: usize, quad_order: usize) -> Result<MomentSequence> {
        match self {
            MeasureSpec::Samples { file } => Err(Error::InvalidArgument(format!(
                "sample file {file} must be loaded before computing moments"
            ))),
            MeasureSpec::UniformBox { bounds, normalize } => {
                moments_uniform_box(bounds, t, *normalize)
            }
            MeasureSpec::CurveRegion(region) => region.moments(t, quad_order),
        }
    }

    /// Discretization of the (first-coordinate) marginal as an atomic
    /// measure: the whole measure for a 1-D box, the X-marginal of a region.
    pub fn marginal_rule(&self, quad_order: usize) -> Result<AtomicMeasure> {
        match self {
            MeasureSpec::Samples { .. } => Err(Error::InvalidArgument(
                "marginal rule needs a closed-form measure".into(),
            )),
            MeasureSpec::UniformBox { bounds, normalize } => {
                let [lo, hi] = *bounds.first().ok_or(Error::EmptyInput)?;
                if !(hi > lo) {
                    return Err(Error::DegenerateInterval { lo, hi });
                }
                let mut rule = gauss_legendre(quad_order).mapped_to(lo, hi);
                let other: f64 = bounds[1..].iter().map(|[a, b]| b - a).product();
                let scale = if *normalize { 1.0 / (hi - lo) } else { other };
                rule.weights.iter_mut().for_each(|w| *w *= scale);
                Ok(rule)
            }
            MeasureSpec::CurveRegion(region) => region.marginal_rule(quad_order),
        }
    }
}

/// Affine map sending the bounding box of some data onto `[-1, 1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub center: Vec<f64>,
    pub half_width: Vec<f64>,
}

impl AffineMap {
    pub fn to_unit_box(points: &[Vec<f64>]) -> Result<AffineMap> {
        let first = points.first().ok_or(Error::EmptyInput)?;
        let d = first.len();
        let mut lo = first.clone();
        let mut hi = first.clone();
        for p in points {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.len(),
                });
            }
            for i in 0..d {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        Ok(AffineMap {
            center: (0..d).map(|i| 0.5 * (lo[i] + hi[i])).collect(),
            half_width: (0..d)
                .map(|i| {
                    let h = 0.5 * (hi[i] - lo[i]);
                    if h > 0.0 {
                        h
                    } else {
                        1.0
                    }
                })
                .collect(),
        })
    }

    pub fn apply(&self, point: &[f64]) -> Vec<f64> {
        point
            .iter()
            .zip(self.center.iter().zip(&self.half_width))
            .map(|(&x, (&c, &h))| (x - c) / h)
            .collect()
    }

    pub fn apply_all(&self, points: &[Vec<f64>]) -> Vec<Vec<f64>> {
        points.iter().map(|p| self.apply(p)).collect()
    }
}

/// `L_φ(p) = Σ p_γ φ_γ`.
pub fn riesz_eval(seq: &MomentSequence, poly: &Polynomial) -> Result<f64> {
    if poly.dim() != seq.dim() {
        return Err(Error::DimensionMismatch {
            expected: seq.dim(),
            got: poly.dim(),
        });
    }
    let mut acc = 0.0;
    for (m, c) in poly.terms() {
        if c == 0.0 {
            continue;
        }
        let v = seq.try_get(m).ok_or(Error::DegreeOverflow {
            requested: m.degree(),
            available: seq.degree(),
        })?;
        acc += c * v;
    }
    Ok(acc)
}

/// `M_t(φ)` over an ordered basis, with its Cholesky factor when positive definite.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    basis: OrderedBasis,
    entries: DMatrix<f64>,
    factor: Option<DMatrix<f64>>,
    condition: f64,
    jitter: f64,
}

impl MomentMatrix {
    pub fn basis(&self) -> &OrderedBasis {
        &self.basis
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Lower Cholesky factor, present iff the matrix is positive definite.
    pub fn factor(&self) -> Option<&DMatrix<f64>> {
        self.factor.as_ref()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.factor.is_some()
    }

    /// Spectral condition number `λmax/λmin` (infinite if not PD).
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }
}

/// Moment matrix without jitter.
pub fn moment_matrix(seq: &MomentSequence, basis: &OrderedBasis) -> Result<MomentMatrix> {
    moment_matrix_with_jitter(seq, basis, 0.0)
}

/// Moment matrix plus `jitter · I`.
pub fn moment_matrix_with_jitter(
    seq: &MomentSequence,
    basis: &OrderedBasis,
    jitter: f64,
) -> Result<MomentMatrix> {
    if seq.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: seq.dim(),
        });
    }
    if 2 * basis.degree() > seq.degree() {
        return Err(Error::DegreeOverflow {
            requested: 2 * basis.degree(),
            available: seq.degree(),
        });
    }
    let s = basis.len();
    let mut entries = DMatrix::<f64>::zeros(s, s);
    for r in 0..s {
        for c in r..s {
            let v = seq.get(&basis.pair(r).add(basis.pair(c)));
            entries[(r, c)] = v;
            entries[(c, r)] = v;
        }
        entries[(r, r)] += jitter;
    }
    let factor = linalg::cholesky(&entries).ok();
    let condition = if factor.is_some() {
        linalg::condition_number(&entries)
    } else {
        f64::INFINITY
    };
    Ok(MomentMatrix {
        basis: basis.clone(),
        entries,
        factor,
        condition,
        jitter,
    })
}

/// `g·φ`: moments of the functional `q ↦ L_φ(g q)`.
///
/// Every moment computable from the data is returned, i.e. the degree bound
/// is `deg φ - deg g`; for even `deg g = 2s` this is the `2(t - s)` needed by
/// the localizing matrix `M_{t-s}(g·φ)`.
pub fn localize_sequence(seq: &MomentSequence, g: &Polynomial) -> Result<MomentSequence> {
    if g.dim() != seq.dim() {
        return Err(Error::DimensionMismatch {
            expected: seq.dim(),
            got: g.dim(),
        });
    }
    let dg = g.degree();
    if dg > seq.degree() {
        return Err(Error::DegreeOverflow {
            requested: dg,
            available: seq.degree(),
        });
    }
    Ok(MomentSequence::from_fn(seq.dim(), seq.degree() - dg, |a| {
        g.terms().map(|(b, c)| c * seq.get(&a.add(b))).sum()
    }))
}

/// Moments of the marginal on the first `n` coordinates: `φ_α = μ_{α,0}`.
pub fn marginal_sequence(seq: &MomentSequence, n: usize) -> Result<MomentSequence> {
    if n == 0 || n > seq.dim() {
        return Err(Error::DimensionMismatch {
            expected: seq.dim(),
            got: n,
        });
    }
    let p = seq.dim() - n;
    Ok(MomentSequence::from_fn(n, seq.degree(), |a| {
        seq.get(&a.concat(&MultiIndex::zeros(p)))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::enumerate;
    use approx::assert_relative_eq;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn samples() {
        let s = moments_from_samples(&[vec![0.0], vec![1.0]], 1).unwrap();
        close(&s.as_univariate().unwrap(), &[1.0, 0.5, 0.5], 0.0);
        let s = moments_from_samples(&[vec![1.0, 1.0]], 2).unwrap();
        assert!(s.iter().all(|(_, v)| v == 1.0));
        let s = moments_from_samples(&[vec![-1.0], vec![1.0]], 1).unwrap();
        close(&s.as_univariate().unwrap(), &[1.0, 0.0, 1.0], 0.0);
        assert_eq!(moments_from_samples(&[], 1), Err(Error::EmptyInput));
        assert!(matches!(
            moments_from_samples(&[vec![1.0], vec![1.0, 2.0]], 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sharded_accumulation_matches() {
        let pts: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64 * 0.1, (i * i) as f64 * 0.01])
            .collect();
        let whole = moments_from_samples(&pts, 2).unwrap();
        let mut a = MomentAccumulator::new(2, 4);
        let mut b = MomentAccumulator::new(2, 4);
        pts[..7].iter().for_each(|p| a.push(p).unwrap());
        pts[7..].iter().for_each(|p| b.push(p).unwrap());
        a.merge(&b).unwrap();
        let merged = a.finish().unwrap();
        for (m, v) in whole.iter() {
            assert_relative_eq!(merged.get(m), v, max_relative = 1e-14);
        }
    }

    #[test]
    fn uniform_boxes() {
        let s = moments_uniform_box(&[[-1.0, 1.0]], 1, true).unwrap();
        close(&s.as_univariate().unwrap(), &[1.0, 0.0, 1.0 / 3.0], 1e-15);
        let s = moments_uniform_box(&[[0.0, 1.0]], 1, true).unwrap();
        close(&s.as_univariate().unwrap(), &[1.0, 0.5, 1.0 / 3.0], 1e-15);
        let s = moments_uniform_box(&[[-1.0, 1.0], [-1.0, 1.0]], 1, true).unwrap();
        assert_eq!(s.get(&mi(&[0, 0])), 1.0);
        assert_eq!(s.get(&mi(&[1, 0])), 0.0);
        assert_eq!(s.get(&mi(&[1, 1])), 0.0);
        assert_relative_eq!(s.get(&mi(&[2, 0])), 1.0 / 3.0);
        assert_relative_eq!(s.get(&mi(&[0, 2])), 1.0 / 3.0);
        let raw = moments_uniform_box(&[[-1.0, 1.0]], 1, false).unwrap();
        assert_eq!(raw.mass(), 2.0);
        assert!(matches!(
            moments_uniform_box(&[[1.0, 1.0]], 1, true),
            Err(Error::DegenerateInterval { .. })
        ));
    }

    #[test]
    fn curve_regions() {
        let unit = CurveRegion::polynomial([-1.0, 1.0], vec![0.0], vec![1.0]);
        let s = unit.moments(2, 16).unwrap();
        assert_relative_eq!(s.mass(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(s.get(&mi(&[0, 1])), 0.5, epsilon = 1e-14);
        assert!(s.get(&mi(&[1, 1])).abs() < 1e-15);
        assert_relative_eq!(s.get(&mi(&[0, 2])), 1.0 / 3.0, epsilon = 1e-14);

        let square = CurveRegion::polynomial([-1.0, 1.0], vec![-1.0], vec![1.0]);
        let s = square.moments(2, 16).unwrap();
        let b = moments_uniform_box(&[[-1.0, 1.0], [-1.0, 1.0]], 2, true).unwrap();
        for (m, v) in b.iter() {
            assert!((s.get(m) - v).abs() < 1e-14);
        }

        let bad = CurveRegion::polynomial([-1.0, 1.0], vec![0.0], vec![-0.5, 0.0, 1.0]);
        assert!(matches!(bad.moments(2, 16), Err(Error::InvalidRegion(_))));
        assert!(matches!(unit.moments(5, 3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn density_and_tables() {
        // density 1 given explicitly equals the uniform case
        let mut r = CurveRegion::polynomial([-1.0, 1.0], vec![-0.8, 0.0, 0.2], vec![0.9, -0.1]);
        let plain = r.moments(3, 32).unwrap();
        r.density = Some(vec![(0, 0, 1.0)]);
        let dens = r.moments(3, 32).unwrap();
        for (m, v) in plain.iter() {
            assert!((dens.get(m) - v).abs() < 1e-13);
        }
        let table = CurveRegion {
            x_interval: [0.0, 1.0],
            lower: Profile::Table {
                x: vec![0.0, 1.0],
                values: vec![0.0, 0.0],
            },
            upper: Profile::Table {
                x: vec![0.0, 1.0],
                values: vec![1.0, 1.0],
            },
            density: None,
            normalize: false,
        };
        let s = table.moments(1, 8).unwrap();
        assert_relative_eq!(s.mass(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(s.get(&mi(&[1, 1])), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn riesz() {
        let s = moments_uniform_box(&[[-1.0, 1.0]], 1, true).unwrap();
        let p = Polynomial::univariate(&[1.0, 0.0, 1.0]);
        assert_relative_eq!(riesz_eval(&s, &p).unwrap(), 4.0 / 3.0);
        assert_eq!(riesz_eval(&s, &Polynomial::zero(1)).unwrap(), 0.0);
        // (μ00 x - μ10)^2 = x^2
        let q = Polynomial::univariate(&[-s.get(&mi(&[1])), s.mass()]);
        assert_relative_eq!(riesz_eval(&s, &q.mul(&q)).unwrap(), 1.0 / 3.0);
        let too_high = Polynomial::univariate(&[0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            riesz_eval(&s, &too_high),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn matrices() {
        let s = moments_uniform_box(&[[-1.0, 1.0]], 1, true).unwrap();
        let m = moment_matrix(&s, &enumerate(1, 0, 1)).unwrap();
        assert_eq!(
            m.entries(),
            &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0 / 3.0])
        );
        assert!(m.is_positive_definite());
        assert_relative_eq!(m.condition(), 3.0, epsilon = 1e-12);

        let s = moments_from_samples(&[vec![0.0], vec![1.0]], 1).unwrap();
        let m = moment_matrix(&s, &enumerate(1, 0, 1)).unwrap();
        assert_eq!(
            m.entries(),
            &DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 0.5])
        );
        assert!(m.is_positive_definite());
        let l = m.factor().unwrap();
        assert_relative_eq!(l * l.transpose(), m.entries().clone(), epsilon = 1e-15);

        let single = moments_from_samples(&[vec![0.3]], 1).unwrap();
        let m = moment_matrix(&single, &enumerate(1, 0, 1)).unwrap();
        assert!(!m.is_positive_definite());
        let j = moment_matrix_with_jitter(&single, &enumerate(1, 0, 1), 1e-3).unwrap();
        assert!(j.is_positive_definite());
        assert_eq!(j.jitter(), 1e-3);

        assert!(matches!(
            moment_matrix(&s, &enumerate(1, 0, 2)),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn bivariate_layout() {
        // symbolic-ish check: give each moment a distinct value 10*i + j
        let s = MomentSequence::from_fn(2, 4, |m| {
            let e = m.exponents();
            (10 * e[0] + e[1]) as f64
        });
        let m = moment_matrix(&s, &enumerate(1, 1, 2)).unwrap();
        let mu = |i: u32, j: u32| (10 * i + j) as f64;
        let expect = [
            [mu(0, 0), mu(1, 0), mu(2, 0), mu(0, 1), mu(1, 1), mu(0, 2)],
            [mu(1, 0), mu(2, 0), mu(3, 0), mu(1, 1), mu(2, 1), mu(1, 2)],
            [mu(2, 0), mu(3, 0), mu(4, 0), mu(2, 1), mu(3, 1), mu(2, 2)],
            [mu(0, 1), mu(1, 1), mu(2, 1), mu(0, 2), mu(1, 2), mu(0, 3)],
            [mu(1, 1), mu(2, 1), mu(3, 1), mu(1, 2), mu(2, 2), mu(1, 3)],
            [mu(0, 2), mu(1, 2), mu(2, 2), mu(0, 3), mu(1, 3), mu(0, 4)],
        ];
        for r in 0..6 {
            for c in 0..6 {
                assert_eq!(m.entries()[(r, c)], expect[r][c]);
            }
        }
    }

    #[test]
    fn localizing() {
        let s = moments_uniform_box(&[[-1.0, 1.0]], 2, true).unwrap();
        let g = Polynomial::univariate(&[1.0, 0.0, -1.0]);
        let l = localize_sequence(&s, &g).unwrap();
        close(
            &l.as_univariate().unwrap(),
            &[2.0 / 3.0, 0.0, 2.0 / 15.0],
            1e-15,
        );
        let id = localize_sequence(&s, &Polynomial::constant(1, 1.0)).unwrap();
        assert_eq!(id, s);
        let s1 = MomentSequence::univariate(&[1.0, 0.0, 1.0 / 3.0]);
        let x = Polynomial::univariate(&[0.0, 1.0]);
        close(
            &localize_sequence(&s1, &x).unwrap().as_univariate().unwrap(),
            &[0.0, 1.0 / 3.0],
            0.0,
        );
    }

    #[test]
    fn marginals() {
        let joint = moments_uniform_box(&[[-1.0, 1.0], [-1.0, 1.0]], 2, true).unwrap();
        let single = moments_uniform_box(&[[-1.0, 1.0]], 2, true).unwrap();
        assert_eq!(marginal_sequence(&joint, 1).unwrap(), single);

        let unit = CurveRegion::polynomial([-1.0, 1.0], vec![0.0], vec![1.0]);
        let m = marginal_sequence(&unit.moments(2, 16).unwrap(), 1).unwrap();
        for (k, v) in single.iter() {
            assert!((m.get(k) - v).abs() < 1e-14);
        }

        let pts = moments_from_samples(&[vec![0.0, 5.0], vec![1.0, 7.0]], 1).unwrap();
        let m = marginal_sequence(&pts, 1).unwrap();
        assert_eq!(m, moments_from_samples(&[vec![0.0], vec![1.0]], 1).unwrap());
    }

    #[test]
    fn unit_box_map() {
        let pts = vec![vec![2.0, 10.0], vec![4.0, 30.0], vec![3.0, 20.0]];
        let map = AffineMap::to_unit_box(&pts).unwrap();
        assert_eq!(
            map.apply_all(&pts),
            vec![vec![-1.0, -1.0], vec![1.0, 1.0], vec![0.0, 0.0]]
        );
    }

    #[test]
    fn spec_json() {
        let spec: MeasureSpec = serde_json::from_str(
            r#"{"type": "curve_region", "x_interval": [-1, 1],
                "lower": {"poly": [-0.8, 0, 0.2]}, "upper": {"poly": [0.9, -0.1]}}"#,
        )
        .unwrap();
        assert_eq!(spec.dim(), Some(2));
        let s = spec.moments(2, 64).unwrap();
        assert_relative_eq!(s.mass(), 1.0, epsilon = 1e-14);
        let bad = serde_json::from_str::<MeasureSpec>(
            r#"{"type": "uniform_box", "bounds": [[0, 1]], "oops": 1}"#,
        );
        assert!(bad.is_err());
    }
}
