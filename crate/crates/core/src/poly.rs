//! Small dense/sparse polynomial containers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::basis::MultiIndex;

/// Sparse multivariate polynomial, coefficients keyed by exponent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(MultiIndex::zeros(dim), c);
        p
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Self {
        let mut p = Self::zero(dim);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// One-variable polynomial from ascending coefficients.
    pub fn univariate(coeffs: &[f64]) -> Self {
        Self::from_terms(
            1,
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| (MultiIndex::new(vec![k as u32]), c)),
        )
    }

    pub fn add_term(&mut self, m: MultiIndex, c: f64) {
        assert_eq!(m.dim(), self.dim, "monomial dimension");
        if c == 0.0 {
            return;
        }
        *self.terms.entry(m).or_insert(0.0) += c;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, m: &MultiIndex) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|&c| c == 0.0)
    }

    /// Total degree of the nonzero terms; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .filter(|(_, &c)| c != 0.0)
            .map(|(m, _)| m.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.terms.iter().map(|(m, &c)| c * m.eval(point)).sum()
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, other.dim);
        let mut out = Polynomial::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.add(b), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.clone(), c * s))
                .collect(),
        }
    }
}

/// Dense univariate polynomial `c0 + c1 y + ... + ck y^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnivariatePoly(pub Vec<f64>);

impl UnivariatePoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        UnivariatePoly(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    /// Index of the last stored coefficient (trailing zeros included).
    pub fn len_degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    /// Degree of the highest nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * y + c)
    }

    pub fn mul(&self, other: &UnivariatePoly) -> UnivariatePoly {
        if self.0.is_empty() || other.0.is_empty() {
            return UnivariatePoly(Vec::new());
        }
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UnivariatePoly(out)
    }

    pub fn add(&self, other: &UnivariatePoly) -> UnivariatePoly {
        let n = self.0.len().max(other.0.len());
        UnivariatePoly(
            (0..n)
                .map(|k| self.0.get(k).unwrap_or(&0.0) + other.0.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }

    pub fn to_polynomial(&self) -> Polynomial {
        Polynomial::univariate(&self.0)
    }
}
