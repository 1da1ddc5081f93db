//! Gauss–Legendre rules, three-term recurrences, and recovery of an atomic
//! representing measure from a positive definite Hankel moment vector.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::PIVOT_FLOOR;

/// Finitely supported measure `Σ w_i δ_{x_i}` on the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AtomicMeasure {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        assert_eq!(nodes.len(), weights.len());
        AtomicMeasure { nodes, weights }
    }

    pub fn empty() -> Self {
        AtomicMeasure::new(Vec::new(), Vec::new())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Pushes the rule for `[-1, 1]` forward to `[lo, hi]`.
    pub fn mapped_to(&self, lo: f64, hi: f64) -> AtomicMeasure {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        AtomicMeasure::new(
            self.nodes.iter().map(|&z| mid + half * z).collect(),
            self.weights.iter().map(|&w| w * half).collect(),
        )
    }
}

/// Gauss–Legendre rule with `order` nodes on `[-1, 1]`; total weight 2.
///
/// Nodes come from Newton iteration on the Legendre recurrence and are
/// returned in ascending order.
pub fn gauss_legendre(order: usize) -> AtomicMeasure {
    assert!(order >= 1, "Gauss-Legendre order must be at least 1");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        if n % 2 == 1 && i == n / 2 {
            z = 0.0;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    AtomicMeasure::new(nodes, weights)
}

/// Orthonormal three-term recurrence
/// `b_{k+1} p_{k+1}(x) = (x - a_k) p_k(x) - b_k p_{k-1}(x)`, `p_0 = 1/√mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recurrence {
    pub mass: f64,
    /// `a_0 .. a_{m-1}`
    pub a: Vec<f64>,
    /// `b_1 .. b_m`; `b[k]` links `p_k` and `p_{k+1}`.
    pub b: Vec<f64>,
}

impl Recurrence {
    /// Number of orthonormal polynomials the recurrence can produce beyond `p_0`.
    pub fn degree(&self) -> usize {
        self.b.len()
    }

    /// `(p_0(x), ..., p_t(x))`.
    pub fn orthonormal_values(&self, x: f64, t: usize) -> Vec<f64> {
        assert!(t <= self.degree(), "recurrence too short for degree {t}");
        let mut out = Vec::with_capacity(t + 1);
        let mut prev = 0.0;
        let mut cur = 1.0 / self.mass.sqrt();
        out.push(cur);
        for k in 0..t {
            let back = if k == 0 { 0.0 } else { self.b[k - 1] };
            let next = ((x - self.a[k]) * cur - back * prev) / self.b[k];
            prev = cur;
            cur = next;
            out.push(cur);
        }
        out
    }
}

/// Discretized Stieltjes procedure: recurrence coefficients of the
/// orthonormal polynomials of `measure` up to degree `t`.
///
/// The measure must have more than `t` atoms with positive weights.
pub fn stieltjes(measure: &AtomicMeasure, t: usize) -> Result<Recurrence> {
    if measure.len() <= t {
        return Err(Error::InvalidArgument(format!(
            "{} atoms cannot carry orthogonal polynomials of degree {t}",
            measure.len()
        )));
    }
    let mass = measure.mass();
    if !(mass > 0.0) {
        return Err(Error::EmptyInput);
    }
    let x = &measure.nodes;
    let w = &measure.weights;
    let m = x.len();
    let mut prev = vec![0.0; m];
    let mut cur = vec![1.0 / mass.sqrt(); m];
    let mut a = Vec::with_capacity(t);
    let mut b = Vec::with_capacity(t);
    for k in 0..t {
        let ak: f64 = (0..m).map(|i| w[i] * x[i] * cur[i] * cur[i]).sum();
        let back = if k == 0 { 0.0 } else { b[k - 1] };
        let mut next: Vec<f64> = (0..m)
            .map(|i| (x[i] - ak) * cur[i] - back * prev[i])
            .collect();
        let norm = (0..m).map(|i| w[i] * next[i] * next[i]).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::NotPositiveDefinite {
                index: k + 1,
                pivot: norm,
            });
        }
        next.iter_mut().for_each(|v| *v /= norm);
        a.push(ak);
        b.push(norm);
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(Recurrence { mass, a, b })
}

/// `Σ_i w_i x_i^k` for `k = 0..=up_to`.
pub fn atoms_moments(measure: &AtomicMeasure, up_to: usize) -> Vec<f64> {
    let mut out = vec![0.0; up_to + 1];
    for (&x, &w) in measure.nodes.iter().zip(&measure.weights) {
        let mut pw = w;
        for m in out.iter_mut() {
            *m += pw;
            pw *= x;
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Atomic measure with `t + 1` atoms whose moments `0..=2t` equal `lambda`.
///
/// `lambda` has length `2t + 1` and its Hankel matrix must be positive
/// definite. One moment beyond the data is free: the sequence is moved to
/// mean 0 and variance 1, the free odd moment is set to 0 there, and the
/// Gauss rule of the completed sequence is mapped back. For `t = 0` the
/// single atom sits at the origin.
pub fn hankel_to_atoms(lambda: &[f64]) -> Result<AtomicMeasure> {
    if lambda.len() % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "expected an odd number of moments, got {}",
            lambda.len()
        )));
    }
    let t = (lambda.len() - 1) / 2;
    let mass = lambda[0];
    if !(mass > 0.0) {
        return Err(Error::NotPositiveDefinite {
            index: 0,
            pivot: mass,
        });
    }
    if t == 0 {
        return Ok(AtomicMeasure::new(vec![0.0], vec![mass]));
    }
    let mean = lambda[1] / mass;
    let var = lambda[2] / mass - mean * mean;
    if !(var > PIVOT_FLOOR * (lambda[2] / mass).abs()) {
        return Err(Error::NotPositiveDefinite {
            index: 1,
            pivot: var,
        });
    }
    let sd = var.sqrt();

    // standardized probability moments, with the free moment 2t+1 set to 0
    let mut mu = vec![0.0; 2 * t + 2];
    for (k, slot) in mu.iter_mut().enumerate().take(2 * t + 1) {
        let s: f64 = (0..=k)
            .map(|i| binomial(k, i) * lambda[i] / mass * (-mean).powi((k - i) as i32))
            .sum();
        *slot = s / sd.powi(k as i32);
    }
    mu[1] = 0.0;
    mu[2] = 1.0;

    // upper Cholesky factor of the (t+1) x (t+2) Hankel block
    let rows = t + 1;
    let cols = t + 2;
    let mut r = DMatrix::<f64>::zeros(rows, cols);
    for i in 0..rows {
        let mut d = mu[2 * i];
        for k in 0..i {
            d -= r[(k, i)] * r[(k, i)];
        }
        if !(d > PIVOT_FLOOR * mu[2 * i].abs()) {
            return Err(Error::NotPositiveDefinite { index: i, pivot: d });
        }
        let rii = d.sqrt();
        r[(i, i)] = rii;
        for j in i + 1..cols {
            let mut s = mu[i + j];
            for k in 0..i {
                s -= r[(k, i)] * r[(k, j)];
            }
            r[(i, j)] = s / rii;
        }
    }

    let mut jacobi = DMatrix::<f64>::zeros(rows, rows);
    for j in 0..rows {
        let mut alpha = r[(j, j + 1)] / r[(j, j)];
        if j > 0 {
            alpha -= r[(j - 1, j)] / r[(j - 1, j - 1)];
        }
        jacobi[(j, j)] = alpha;
        if j + 1 < rows {
            let beta = r[(j + 1, j + 1)] / r[(j, j)];
            jacobi[(j, j + 1)] = beta;
            jacobi[(j + 1, j)] = beta;
        }
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut atoms: Vec<(f64, f64)> = (0..rows)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (mean + sd * eig.eigenvalues[i], mass * v0 * v0)
        })
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(AtomicMeasure::new(
        atoms.iter().map(|a| a.0).collect(),
        atoms.iter().map(|a| a.1).collect(),
    ))
}

/// Inverse map of [`hankel_to_atoms`]: moments `0..=2t` of a measure.
pub fn hankel_vector(measure: &AtomicMeasure, t: usize) -> Vec<f64> {
    atoms_moments(measure, 2 * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn low_order_rules() {
        let g1 = gauss_legendre(1);
        assert_eq!(g1.nodes, vec![0.0]);
        assert_relative_eq!(g1.weights[0], 2.0, epsilon = 1e-15);
        let g2 = gauss_legendre(2);
        let r = 1.0 / 3f64.sqrt();
        assert_relative_eq!(g2.nodes[0], -r, epsilon = 1e-15);
        assert_relative_eq!(g2.nodes[1], r, epsilon = 1e-15);
        assert_relative_eq!(g2.weights[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(g2.weights[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn exactness_and_symmetry() {
        for order in [1, 2, 3, 5, 8, 17, 64, 128] {
            let g = gauss_legendre(order);
            assert_relative_eq!(g.mass(), 2.0, epsilon = 1e-13);
            for i in 0..order {
                assert!(g.nodes[i] > -1.0 && g.nodes[i] < 1.0);
                assert_eq!(g.nodes[i], -g.nodes[order - 1 - i]);
                if i > 0 {
                    assert!(g.nodes[i] > g.nodes[i - 1]);
                }
            }
            for k in 0..2 * order {
                let exact = if k % 2 == 1 {
                    0.0
                } else {
                    2.0 / (k as f64 + 1.0)
                };
                assert!((g.integrate(|x| x.powi(k as i32)) - exact).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn atoms_from_hankel_by_hand() {
        let m = hankel_to_atoms(&[1.0, 0.0, 1.0 / 3.0]).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert_relative_eq!(m.nodes[0], -r, epsilon = 1e-14);
        assert_relative_eq!(m.nodes[1], r, epsilon = 1e-14);
        assert_relative_eq!(m.weights[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(m.weights[1], 0.5, epsilon = 1e-14);

        let m = hankel_to_atoms(&[1.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(m.nodes[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(m.nodes[1], 1.0, epsilon = 1e-14);

        let m = hankel_to_atoms(&[1.0]).unwrap();
        assert_eq!(m.nodes, vec![0.0]);
        assert_eq!(m.weights, vec![1.0]);

        assert!(matches!(
            hankel_to_atoms(&[1.0, 1.0, 1.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            hankel_to_atoms(&[-1.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn moments_of_atoms() {
        let r = 1.0 / 3f64.sqrt();
        let m = AtomicMeasure::new(vec![-r, r], vec![0.5, 0.5]);
        let mom = atoms_moments(&m, 3);
        assert_relative_eq!(mom[0], 1.0);
        assert!(mom[1].abs() < 1e-16);
        assert_relative_eq!(mom[2], 1.0 / 3.0, epsilon = 1e-15);
        assert!(mom[3].abs() < 1e-16);
        assert_eq!(atoms_moments(&AtomicMeasure::empty(), 3), vec![0.0; 4]);
        assert_eq!(
            atoms_moments(&AtomicMeasure::new(vec![2.0], vec![3.0]), 3),
            vec![3.0, 6.0, 12.0, 24.0]
        );
    }

    #[test]
    fn skewed_round_trip() {
        let m = AtomicMeasure::new(vec![0.3, 1.7, 2.2, 5.0], vec![0.1, 2.0, 0.4, 0.7]);
        let lam = atoms_moments(&m, 6);
        let back = hankel_to_atoms(&lam).unwrap();
        assert_eq!(back.len(), 4);
        let again = atoms_moments(&back, 6);
        for k in 0..=6 {
            assert_relative_eq!(again[k], lam[k], max_relative = 1e-10);
        }
    }

    #[test]
    fn legendre_recurrence() {
        // probability uniform on [-1, 1]: a_k = 0, b_k = k / sqrt(4k^2 - 1)
        let g = gauss_legendre(40);
        let g = AtomicMeasure::new(g.nodes, g.weights.iter().map(|w| w / 2.0).collect());
        let rec = stieltjes(&g, 30).unwrap();
        for k in 0..30 {
            assert!(rec.a[k].abs() < 1e-13);
            let kf = (k + 1) as f64;
            assert_relative_eq!(rec.b[k], kf / (4.0 * kf * kf - 1.0).sqrt(), epsilon = 1e-12);
        }
        let p = rec.orthonormal_values(0.5, 2);
        assert_relative_eq!(p[1], 3f64.sqrt() * 0.5, epsilon = 1e-13);
        assert_relative_eq!(
            p[2],
            5f64.sqrt() / 2.0 * (3.0 * 0.25 - 1.0),
            epsilon = 1e-13
        );
        assert!(stieltjes(&g, 40).is_err());
    }
}
