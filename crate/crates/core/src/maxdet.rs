//! Determinant maximization over Gram representations of univariate
//! polynomials.
//!
//! For `p(y) = v_t(y)ᵀ Q v_t(y)` the max-det Gram matrix `Q*` is recovered
//! from the dual problem
//!
//! ```text
//! minimize  cᵀλ - Σ_j log det B_j(λ)
//! ```
//!
//! over moment vectors `λ` (length `2t + 1`), where each `B_j` is a
//! localizing matrix linear in `λ`. With a single Hankel block, first-order
//! optimality reads `c_k = Σ_{a+b=k} (H(λ)⁻¹)_{ab}`: the inverse of the
//! optimal Hankel matrix is a Gram matrix of `p`, and `H(λ*)` is the moment
//! matrix of a functional whose Christoffel function is `1/p`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::UnivariatePoly;
use crate::quadrature::{gauss_legendre, AtomicMeasure};

/// Damped-Newton controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Divergence bound on `‖λ‖∞`.
    pub lambda_bound: f64,
    /// Stop when `‖∇‖∞ <= gradient_tol · (1 + |c_0|)`.
    pub gradient_tol: f64,
    /// Stop when the squared Newton decrement falls below this.
    pub decrement_tol: f64,
    pub armijo: f64,
    pub backtrack: f64,
    /// Extra full Newton steps after convergence, kept while the gradient shrinks.
    pub polish_steps: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iterations: 100,
            lambda_bound: 1e8,
            gradient_tol: 1e-10,
            decrement_tol: 1e-12,
            armijo: 1e-4,
            backtrack: 0.5,
            polish_steps: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// `p` is a positive constant; closed form, no iteration.
    Trivial,
}

/// Univariate polynomial of degree at most `2t` offered as an SOS.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnivariateSos {
    coeffs: Vec<f64>,
}

impl UnivariateSos {
    /// Pads the coefficient vector to odd length `2t + 1`.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        if coeffs.len() % 2 == 0 {
            coeffs.push(0.0);
        }
        UnivariateSos { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Half degree `t`.
    pub fn half_degree(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * y + c)
    }

    pub fn as_poly(&self) -> UnivariatePoly {
        UnivariatePoly::new(self.coeffs.clone())
    }
}

/// Optimal Gram matrix, its inverse Hankel moment matrix, and diagnostics.
#[derive(Debug, Clone)]
pub struct MaxDetResult {
    /// `Q*`
    pub gram: DMatrix<f64>,
    /// `H(λ*) = (Q*)⁻¹`
    pub hankel: DMatrix<f64>,
    /// `λ*`, length `2t + 1`.
    pub dual: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// Dual objective after each accepted damped step.
    pub objective_trace: Vec<f64>,
    pub status: SolveStatus,
}

impl MaxDetResult {
    pub fn log_det_gram(&self) -> f64 {
        linalg::cholesky(&self.gram)
            .map(|l| linalg::log_det_from_cholesky(&l))
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// `v_t(y)ᵀ Q* v_t(y)`.
    pub fn gram_eval(&self, y: f64) -> f64 {
        let v = powers(y, self.gram.nrows());
        (v.transpose() * &self.gram * &v)[(0, 0)]
    }

    /// `[v_t(y)ᵀ H⁻¹ v_t(y)]⁻¹`, the Christoffel function of `λ*`.
    pub fn christoffel(&self, y: f64) -> f64 {
        1.0 / self.gram_eval(y)
    }

    pub fn mass(&self) -> f64 {
        self.dual[0]
    }
}

fn powers(y: f64, n: usize) -> DVector<f64> {
    let mut acc = 1.0;
    DVector::from_iterator(
        n,
        (0..n).map(|_| {
            let v = acc;
            acc *= y;
            v
        }),
    )
}

/// Anti-diagonal sums `Σ_{a+b=k} Q_{ab}`: the coefficients of `v_tᵀ Q v_t`.
pub fn antidiagonal_sums(q: &DMatrix<f64>) -> Vec<f64> {
    let n = q.nrows();
    let mut out = vec![0.0; 2 * n - 1];
    for a in 0..n {
        for b in 0..n {
            out[a + b] += q[(a, b)];
        }
    }
    out
}

/// `H(λ)_{ab} = λ_{a+b}`.
pub fn hankel_matrix(lambda: &[f64]) -> DMatrix<f64> {
    let n = (lambda.len() + 1) / 2;
    DMatrix::from_fn(n, n, |a, b| lambda[a + b])
}

/// One barrier block `B(λ) = Σ_k λ_k A_k` with `A_k[a][b] = g_{k-a-b}`.
#[derive(Debug, Clone)]
struct Block {
    size: usize,
    /// generator coefficients (ascending)
    g: Vec<f64>,
}

impl Block {
    fn matrix(&self, lambda: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.size, self.size, |a, b| {
            self.g
                .iter()
                .enumerate()
                .map(|(i, gi)| gi * lambda[a + b + i])
                .sum()
        })
    }

    /// `A_k` for every `k`.
    fn generators(&self, dim: usize) -> Vec<DMatrix<f64>> {
        (0..dim)
            .map(|k| {
                DMatrix::from_fn(self.size, self.size, |a, b| {
                    k.checked_sub(a + b)
                        .and_then(|i| self.g.get(i).copied())
                        .unwrap_or(0.0)
                })
            })
            .collect()
    }

    /// Coefficients of `g · v_sᵀ W v_s` for a symmetric `W` of the block size.
    fn weighted_coeffs(&self, w: &DMatrix<f64>, dim: usize) -> Vec<f64> {
        let sigma = antidiagonal_sums(w);
        let mut out = vec![0.0; dim];
        for (i, gi) in self.g.iter().enumerate() {
            for (k, sk) in sigma.iter().enumerate() {
                if i + k < dim {
                    out[i + k] += gi * sk;
                }
            }
        }
        out
    }
}

struct DualProblem {
    c: Vec<f64>,
    blocks: Vec<Block>,
    generators: Vec<Vec<DMatrix<f64>>>,
}

struct Eval {
    value: f64,
    factors: Vec<DMatrix<f64>>,
}

struct Solution {
    lambda: Vec<f64>,
    iterations: usize,
    gradient_norm: f64,
    trace: Vec<f64>,
}

impl DualProblem {
    fn new(c: Vec<f64>, blocks: Vec<Block>) -> Self {
        let dim = c.len();
        let generators = blocks.iter().map(|b| b.generators(dim)).collect();
        DualProblem {
            c,
            blocks,
            generators,
        }
    }

    fn dim(&self) -> usize {
        self.c.len()
    }

    /// Objective and block factors, or `None` outside the PD domain.
    fn eval(&self, lambda: &[f64]) -> Option<Eval> {
        let mut value: f64 = self.c.iter().zip(lambda).map(|(c, l)| c * l).sum();
        let mut factors = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let l = linalg::cholesky(&b.matrix(lambda)).ok()?;
            value -= linalg::log_det_from_cholesky(&l);
            factors.push(l);
        }
        value.is_finite().then_some(Eval { value, factors })
    }

    fn gradient_hessian(&self, ev: &Eval) -> (DVector<f64>, DMatrix<f64>) {
        let dim = self.dim();
        let mut grad = DVector::from_column_slice(&self.c);
        let mut hess = DMatrix::<f64>::zeros(dim, dim);
        for ((block, l), gens) in self.blocks.iter().zip(&ev.factors).zip(&self.generators) {
            let inv = linalg::inverse_from_cholesky(l);
            let sums = block.weighted_coeffs(&inv, dim);
            for k in 0..dim {
                grad[k] -= sums[k];
            }
            let w: Vec<DMatrix<f64>> = gens.iter().map(|a| &inv * a).collect();
            for j in 0..dim {
                for k in j..dim {
                    // tr(W_j W_k)
                    let mut s = 0.0;
                    for a in 0..block.size {
                        for b in 0..block.size {
                            s += w[j][(a, b)] * w[k][(b, a)];
                        }
                    }
                    hess[(j, k)] += s;
                    if j != k {
                        hess[(k, j)] += s;
                    }
                }
            }
        }
        (grad, hess)
    }

    fn newton_direction(grad: &DVector<f64>, hess: &DMatrix<f64>) -> DVector<f64> {
        // diagonal scaling keeps the Hessian solve well conditioned
        let n = hess.nrows();
        let d: Vec<f64> = (0..n)
            .map(|i| 1.0 / hess[(i, i)].max(f64::MIN_POSITIVE).sqrt())
            .collect();
        let scaled = DMatrix::from_fn(n, n, |i, j| hess[(i, j)] * d[i] * d[j]);
        let rhs = DVector::from_fn(n, |i, _| -grad[i] * d[i]);
        let mut reg = 0.0;
        loop {
            let mut m = scaled.clone();
            for i in 0..n {
                m[(i, i)] += reg;
            }
            if let Ok(l) = linalg::cholesky(&m) {
                let y = linalg::solve_lower_transpose(&l, &linalg::solve_lower(&l, &rhs));
                return DVector::from_fn(n, |i, _| y[i] * d[i]);
            }
            reg = if reg == 0.0 { 1e-14 } else { reg * 100.0 };
        }
    }

    fn solve(&self, start: Vec<f64>, opts: &NewtonOptions) -> Result<Solution> {
        let c0 = self.c[0].abs();
        let mut lambda = start;
        let mut ev = self.eval(&lambda).ok_or_else(|| Error::NotInInterior {
            reason: "starting point outside the dual cone".into(),
            iterations: 0,
        })?;
        let mut trace = vec![ev.value];
        let mut gradient_norm = f64::INFINITY;
        for iter in 0..opts.max_iterations {
            let (grad, hess) = self.gradient_hessian(&ev);
            gradient_norm = grad.amax();
            let dir = Self::newton_direction(&grad, &hess);
            let slope = grad.dot(&dir);
            let decrement = -slope;
            if gradient_norm <= opts.gradient_tol * (1.0 + c0) || decrement <= opts.decrement_tol {
                let (lambda, gradient_norm) = self.polish(lambda, ev, gradient_norm, opts);
                return Ok(Solution {
                    lambda,
                    iterations: iter,
                    gradient_norm,
                    trace,
                });
            }
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let trial: Vec<f64> = lambda
                    .iter()
                    .zip(dir.iter())
                    .map(|(l, d)| l + step * d)
                    .collect();
                if let Some(tev) = self.eval(&trial) {
                    if tev.value <= ev.value + opts.armijo * step * slope {
                        accepted = Some((trial, tev));
                        break;
                    }
                }
                step *= opts.backtrack;
            }
            let Some((trial, tev)) = accepted else {
                if decrement <= 1e-8 * (1.0 + ev.value.abs()) {
                    // rounding floor reached before the tolerances
                    return Ok(Solution {
                        lambda,
                        iterations: iter,
                        gradient_norm,
                        trace,
                    });
                }
                return Err(Error::NotInInterior {
                    reason: format!("line search failed (Newton decrement {decrement:e})"),
                    iterations: iter,
                });
            };
            lambda = trial;
            ev = tev;
            trace.push(ev.value);
            let norm = lambda.iter().fold(0.0f64, |m, l| m.max(l.abs()));
            if !(norm <= opts.lambda_bound) {
                return Err(Error::NotInInterior {
                    reason: format!("dual iterates diverge (|λ| = {norm:e})"),
                    iterations: iter + 1,
                });
            }
        }
        Err(Error::MaxIterations {
            iterations: opts.max_iterations,
            gradient_norm,
        })
    }

    /// Full Newton steps while they keep reducing the gradient.
    fn polish(
        &self,
        mut lambda: Vec<f64>,
        mut ev: Eval,
        mut gnorm: f64,
        opts: &NewtonOptions,
    ) -> (Vec<f64>, f64) {
        for _ in 0..opts.polish_steps {
            let (grad, hess) = self.gradient_hessian(&ev);
            let dir = Self::newton_direction(&grad, &hess);
            let trial: Vec<f64> = lambda.iter().zip(dir.iter()).map(|(l, d)| l + d).collect();
            let Some(tev) = self.eval(&trial) else { break };
            let (tgrad, _) = self.gradient_hessian(&tev);
            let tnorm = tgrad.amax();
            if tnorm < gnorm {
                lambda = trial;
                ev = tev;
                gnorm = tnorm;
            } else {
                break;
            }
        }
        (lambda, gnorm)
    }
}

/// Max-det Gram matrix of `p` and the Hankel moment matrix `H = (Q*)⁻¹`.
pub fn maxdet_hankel(p: &UnivariateSos) -> Result<MaxDetResult> {
    maxdet_hankel_with(p, &NewtonOptions::default())
}

pub fn maxdet_hankel_with(p: &UnivariateSos, opts: &NewtonOptions) -> Result<MaxDetResult> {
    let c = p.coeffs().to_vec();
    let t = p.half_degree();
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite coefficient".into()));
    }
    if !(c[0] > 0.0) {
        return Err(Error::NotInInterior {
            reason: format!("p(0) = {} is not positive", c[0]),
            iterations: 0,
        });
    }
    if t == 0 {
        return Ok(MaxDetResult {
            gram: DMatrix::from_element(1, 1, c[0]),
            hankel: DMatrix::from_element(1, 1, 1.0 / c[0]),
            dual: vec![1.0 / c[0]],
            iterations: 0,
            gradient_norm: 0.0,
            objective_trace: Vec::new(),
            status: SolveStatus::Trivial,
        });
    }
    if !(c[2 * t] > 0.0) {
        return Err(Error::NotInInterior {
            reason: format!("leading coefficient {} is not positive", c[2 * t]),
            iterations: 0,
        });
    }
    // y -> s·y balances the end coefficients; the program is equivariant
    // under it (Q and H transform by the diagonal D = diag(s^k)).
    let s = (c[0] / c[2 * t]).powf(1.0 / (2 * t) as f64);
    let scaled: Vec<f64> = c
        .iter()
        .enumerate()
        .map(|(k, v)| v * s.powi(k as i32))
        .collect();
    let start: Vec<f64> = (0..=2 * t)
        .map(|k| {
            if k % 2 == 0 {
                scaled[0] / (k as f64 + 1.0)
            } else {
                0.0
            }
        })
        .collect();
    let problem = DualProblem::new(
        scaled,
        vec![Block {
            size: t + 1,
            g: vec![1.0],
        }],
    );
    let sol = problem.solve(start, opts)?;
    let d: Vec<f64> = (0..=t).map(|k| s.powi(k as i32)).collect();
    let l = linalg::cholesky(&hankel_matrix(&sol.lambda))?;
    let q = linalg::inverse_from_cholesky(&l);
    let gram = DMatrix::from_fn(t + 1, t + 1, |a, b| q[(a, b)] / (d[a] * d[b]));
    let dual: Vec<f64> = sol
        .lambda
        .iter()
        .enumerate()
        .map(|(k, v)| v * s.powi(k as i32))
        .collect();
    let offset = 2.0 * d.iter().map(|v| v.ln()).sum::<f64>();
    Ok(MaxDetResult {
        gram,
        hankel: hankel_matrix(&dual),
        dual,
        iterations: sol.iterations,
        gradient_norm: sol.gradient_norm,
        objective_trace: sol.trace.iter().map(|f| f - offset).collect(),
        status: SolveStatus::Converged,
    })
}

/// Cone `K_t = {Σ_j σ_j g_j : σ_j SOS of degree <= 2(t - s_j)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCone {
    generators: Vec<UnivariatePoly>,
    t: usize,
}

impl WeightedCone {
    pub fn new(generators: Vec<UnivariatePoly>, t: usize) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::EmptyInput);
        }
        let cone = WeightedCone { generators, t };
        let smax = cone.half_degrees().into_iter().max().unwrap_or(0);
        if t < smax {
            return Err(Error::DegreeOverflow {
                requested: 2 * smax,
                available: 2 * t,
            });
        }
        Ok(cone)
    }

    pub fn generators(&self) -> &[UnivariatePoly] {
        &self.generators
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// `s_j = ⌈deg g_j / 2⌉`.
    pub fn half_degrees(&self) -> Vec<usize> {
        self.generators
            .iter()
            .map(|g| g.degree().div_ceil(2))
            .collect()
    }

    fn positive_everywhere(&self, y: f64) -> bool {
        self.generators.iter().all(|g| g.eval(y) > 0.0)
    }

    /// An interval where every generator is positive, searched on growing windows.
    fn interior_interval(&self) -> Option<(f64, f64)> {
        for radius in [1.0, 10.0, 100.0, 1000.0] {
            let n = 4001;
            let mut best: Option<(f64, f64)> = None;
            let mut run_start: Option<f64> = None;
            let mut prev = -radius;
            for i in 0..n {
                let y = -radius + 2.0 * radius * i as f64 / (n - 1) as f64;
                if self.positive_everywhere(y) {
                    run_start.get_or_insert(y);
                } else if let Some(s) = run_start.take() {
                    if best.map_or(true, |(a, b)| prev - s > b - a) {
                        best = Some((s, prev));
                    }
                }
                prev = y;
            }
            if let Some(s) = run_start {
                if best.map_or(true, |(a, b)| prev - s > b - a) {
                    best = Some((s, prev));
                }
            }
            if let Some((a, b)) = best {
                if b > a {
                    return Some((a, b));
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone)]
pub struct WeightedMaxDetResult {
    /// `λ*`, length `2t + 1`.
    pub dual: Vec<f64>,
    /// `M_{t-s_j}(g_j · λ*)`, one per generator.
    pub blocks: Vec<DMatrix<f64>>,
    /// Gram matrices of the multipliers, `blocks[j]⁻¹`.
    pub grams: Vec<DMatrix<f64>>,
    /// Coefficients of each SOS multiplier `σ_j`.
    pub multipliers: Vec<UnivariatePoly>,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub objective_trace: Vec<f64>,
}

impl WeightedMaxDetResult {
    /// `‖Σ_j σ_j g_j − p‖∞` on coefficients.
    pub fn residual(&self, p: &UnivariatePoly, cone: &WeightedCone) -> f64 {
        let mut sum = UnivariatePoly::new(vec![0.0]);
        for (s, g) in self.multipliers.iter().zip(cone.generators()) {
            sum = sum.add(&s.mul(g));
        }
        let n = sum.coeffs().len().max(p.coeffs().len());
        (0..n)
            .map(|k| {
                (sum.coeffs().get(k).unwrap_or(&0.0) - p.coeffs().get(k).unwrap_or(&0.0)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Decomposes `p ∈ int K_t` as `Σ_j σ_j g_j` with each `σ_j` the reciprocal
/// Christoffel function of the localized functional `g_j · λ*`.
pub fn weighted_maxdet(p: &UnivariatePoly, cone: &WeightedCone) -> Result<WeightedMaxDetResult> {
    weighted_maxdet_with(p, cone, &NewtonOptions::default())
}

pub fn weighted_maxdet_with(
    p: &UnivariatePoly,
    cone: &WeightedCone,
    opts: &NewtonOptions,
) -> Result<WeightedMaxDetResult> {
    let t = cone.t();
    let dim = 2 * t + 1;
    if p.degree() > 2 * t {
        return Err(Error::DegreeOverflow {
            requested: p.degree(),
            available: 2 * t,
        });
    }
    let mut c = p.coeffs().to_vec();
    c.resize(dim, 0.0);
    let blocks: Vec<Block> = cone
        .generators()
        .iter()
        .zip(cone.half_degrees())
        .map(|(g, s)| Block {
            size: t - s + 1,
            g: g.coeffs()[..=g.degree()].to_vec(),
        })
        .collect();

    let (lo, hi) = cone
        .interior_interval()
        .ok_or_else(|| Error::NotInInterior {
            reason: "generators have no common positivity interval".into(),
            iterations: 0,
        })?;
    let rule: AtomicMeasure = gauss_legendre(t + 2).mapped_to(lo, hi);
    let scale = 1.0 / rule.mass();
    let start: Vec<f64> = crate::quadrature::atoms_moments(&rule, 2 * t)
        .into_iter()
        .map(|m| m * scale)
        .collect();

    let problem = DualProblem::new(c, blocks);
    let sol = problem.solve(start, opts)?;
    let mut mats = Vec::new();
    let mut grams = Vec::new();
    let mut multipliers = Vec::new();
    for b in &problem.blocks {
        let m = b.matrix(&sol.lambda);
        let l = linalg::cholesky(&m)?;
        let g = linalg::inverse_from_cholesky(&l);
        multipliers.push(UnivariatePoly::new(antidiagonal_sums(&g)));
        mats.push(m);
        grams.push(g);
    }
    Ok(WeightedMaxDetResult {
        dual: sol.lambda,
        blocks: mats,
        grams,
        multipliers,
        iterations: sol.iterations,
        gradient_norm: sol.gradient_norm,
        objective_trace: sol.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn close_mat(a: &DMatrix<f64>, b: &[f64], tol: f64) {
        let n = a.nrows();
        for r in 0..n {
            for c in 0..n {
                assert!((a[(r, c)] - b[r * n + c]).abs() < tol, "{a} vs {b:?}");
            }
        }
    }

    #[test]
    fn singleton_feasible_set() {
        let r = maxdet_hankel(&UnivariateSos::new(vec![1.0, 0.0, 1.0])).unwrap();
        close_mat(&r.gram, &[1.0, 0.0, 0.0, 1.0], 1e-12);
        close_mat(&r.hankel, &[1.0, 0.0, 0.0, 1.0], 1e-12);
        assert_relative_eq!(r.dual[0], 1.0, epsilon = 1e-12);
        assert!(r.dual[1].abs() < 1e-12);
        assert_relative_eq!(r.dual[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn quartic_oracles() {
        let s3 = 3f64.sqrt();
        let r = maxdet_hankel(&UnivariateSos::new(vec![1.0, 0.0, 0.0, 0.0, 1.0])).unwrap();
        close_mat(
            &r.gram,
            &[1.0, 0.0, -1.0 / s3, 0.0, 2.0 / s3, 0.0, -1.0 / s3, 0.0, 1.0],
            1e-10,
        );
        close_mat(
            &r.hankel,
            &[1.5, 0.0, s3 / 2.0, 0.0, s3 / 2.0, 0.0, s3 / 2.0, 0.0, 1.5],
            1e-10,
        );
        assert_relative_eq!(r.gram.determinant(), 4.0 / (3.0 * s3), epsilon = 1e-10);

        let r = maxdet_hankel(&UnivariateSos::new(vec![1.0, 0.0, 2.0, 0.0, 1.0])).unwrap();
        close_mat(
            &r.gram,
            &[
                1.0,
                0.0,
                -1.0 / 3.0,
                0.0,
                8.0 / 3.0,
                0.0,
                -1.0 / 3.0,
                0.0,
                1.0,
            ],
            1e-10,
        );
        close_mat(
            &r.hankel,
            &[
                9.0 / 8.0,
                0.0,
                3.0 / 8.0,
                0.0,
                3.0 / 8.0,
                0.0,
                3.0 / 8.0,
                0.0,
                9.0 / 8.0,
            ],
            1e-10,
        );
    }

    #[test]
    fn constant_and_rejections() {
        let r = maxdet_hankel(&UnivariateSos::new(vec![4.0])).unwrap();
        assert_eq!(r.status, SolveStatus::Trivial);
        assert_eq!(r.hankel[(0, 0)], 0.25);
        assert!(matches!(
            maxdet_hankel(&UnivariateSos::new(vec![0.0, 0.0, 1.0])),
            Err(Error::NotInInterior { .. })
        ));
        assert!(matches!(
            maxdet_hankel(&UnivariateSos::new(vec![1.0, 0.0, -1.0])),
            Err(Error::NotInInterior { .. })
        ));
        // (y^2 - 1)^2 touches zero: boundary of the cone
        assert!(matches!(
            maxdet_hankel(&UnivariateSos::new(vec![1.0, 0.0, -2.0, 0.0, 1.0])),
            Err(Error::NotInInterior { .. }) | Err(Error::MaxIterations { .. })
        ));
    }

    #[test]
    fn descent_is_monotone() {
        let r = maxdet_hankel(&UnivariateSos::new(vec![
            2.0, -1.0, 3.0, 0.5, 1.0, 0.0, 0.3,
        ]))
        .unwrap();
        for w in r.objective_trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
        let q = antidiagonal_sums(&r.gram);
        for (a, b) in q.iter().zip([2.0, -1.0, 3.0, 0.5, 1.0, 0.0, 0.3]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn weighted_examples() {
        let cone = WeightedCone::new(
            vec![
                UnivariatePoly::new(vec![1.0]),
                UnivariatePoly::new(vec![1.0, 0.0, -1.0]),
            ],
            1,
        )
        .unwrap();
        assert_eq!(cone.half_degrees(), vec![0, 1]);
        for p in [vec![2.0, 1.0], vec![1.0]] {
            let p = UnivariatePoly::new(p);
            let r = weighted_maxdet(&p, &cone).unwrap();
            assert!(r.residual(&p, &cone) <= 1e-7);
            for b in &r.blocks {
                assert!(linalg::cholesky(b).is_ok());
            }
        }
        assert!(matches!(
            weighted_maxdet(&UnivariatePoly::new(vec![0.0, 1.0]), &cone),
            Err(Error::NotInInterior { .. })
        ));
        assert!(WeightedCone::new(vec![UnivariatePoly::new(vec![1.0, 0.0, 0.0, 1.0])], 1).is_err());
    }
}
