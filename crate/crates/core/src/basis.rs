//! Multi-indices and the block monomial ordering used throughout the crate.
//!
//! Monomials in `(x, y)` with `x` in `R^n` and `y` in `R^p` are listed by
//! increasing `|β|` (the y-degree). Inside a block the y-part is ordered
//! graded-lexicographically, then the x-part. With `p = 0` this reduces to
//! the plain graded-lex basis of `R[x]_t`, so the x-only block of a joint
//! basis is always a copy of the marginal basis.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest degree accepted by the front ends. Monomial Hankel matrices are
/// unusable in double precision well before this.
pub const DEFAULT_MAX_DEGREE: usize = 12;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, var: usize) -> Self {
        let mut e = vec![0; dim];
        e[var] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|α|`.
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise `self - other`, or `None` if some entry would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// Splits into the leading `n` exponents and the rest.
    pub fn split(&self, n: usize) -> (MultiIndex, MultiIndex) {
        (
            MultiIndex(self.0[..n].to_vec()),
            MultiIndex(self.0[n..].to_vec()),
        )
    }

    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut e = self.0.clone();
        e.extend_from_slice(&other.0);
        MultiIndex(e)
    }

    /// `∏ point[i]^α_i`.
    pub fn eval(&self, point: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(point)
            .map(|(&e, &x)| x.powi(e as i32))
            .product()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// `binomial(n + t, n)`, the number of monomials of degree at most `t` in
/// `n` variables.
pub fn basis_size(n: usize, t: usize) -> Result<usize> {
    let overflow = || Error::SizeOverflow { n, t };
    let mut r: u128 = 1;
    for i in 1..=t as u128 {
        r = r.checked_mul(n as u128 + i).ok_or_else(overflow)? / i;
    }
    usize::try_from(r).map_err(|_| overflow())
}

/// All exponent vectors of `dim` variables with total degree exactly `deg`,
/// earlier variables taking precedence: `x1^2, x1 x2, x2^2`.
pub fn exact_degree(dim: usize, deg: usize) -> Vec<MultiIndex> {
    fn rec(dim: usize, deg: usize, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == dim {
            prefix.push(deg as u32);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=deg).rev() {
            prefix.push(e as u32);
            rec(dim, deg - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dim == 0 {
        if deg == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return out;
    }
    rec(dim, deg, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// `N^dim_deg` in graded-lex order.
pub fn graded(dim: usize, deg: usize) -> Vec<MultiIndex> {
    (0..=deg).flat_map(|k| exact_degree(dim, k)).collect()
}

/// Monomial basis of `R[x, y]_t` in the block ordering.
#[derive(Debug, Clone)]
pub struct OrderedBasis {
    n: usize,
    p: usize,
    t: usize,
    pairs: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
}

impl PartialEq for OrderedBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.p == other.p && self.t == other.t
    }
}

impl OrderedBasis {
    /// Builds the basis for `n` conditioning variables, `p` conditioned
    /// variables and degree `t`.
    pub fn new(n: usize, p: usize, t: usize) -> Self {
        let mut pairs = Vec::new();
        for bdeg in 0..=t {
            for beta in exact_degree(p, bdeg) {
                for alpha in graded(n, t - bdeg) {
                    pairs.push(alpha.concat(&beta));
                }
            }
        }
        let position = pairs
            .iter()
            .enumerate()
            .map(|(r, m)| (m.clone(), r))
            .collect();
        OrderedBasis {
            n,
            p,
            t,
            pairs,
            position,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n + self.p
    }

    pub fn degree(&self) -> usize {
        self.t
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[MultiIndex] {
        &self.pairs
    }

    pub fn pair(&self, rank: usize) -> &MultiIndex {
        &self.pairs[rank]
    }

    pub fn position(&self, m: &MultiIndex) -> Option<usize> {
        self.position.get(m).copied()
    }

    /// The y-part `β` of the monomial at `rank`.
    pub fn beta(&self, rank: usize) -> MultiIndex {
        self.pairs[rank].split(self.n).1
    }

    /// Number of leading entries with `|β| = 0`, i.e. `s_n(t)`.
    pub fn x_block_len(&self) -> usize {
        self.pairs
            .iter()
            .take_while(|m| m.exponents()[self.n..].iter().all(|&e| e == 0))
            .count()
    }

    /// Human-readable monomial label, e.g. `x*y^2` or `x1^2*x2`.
    pub fn label(&self, rank: usize) -> String {
        monomial_label(self.pair(rank), self.n, self.p)
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.len()).map(|r| self.label(r)).collect()
    }

    /// Entry `r` is the monomial `pair(r)` evaluated at `point`.
    pub fn monomial_vector(&self, point: &[f64]) -> Result<DVector<f64>> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        let powers: Vec<Vec<f64>> = point
            .iter()
            .map(|&c| {
                let mut pw = Vec::with_capacity(self.t + 1);
                let mut acc = 1.0;
                for _ in 0..=self.t {
                    pw.push(acc);
                    acc *= c;
                }
                pw
            })
            .collect();
        Ok(DVector::from_iterator(
            self.len(),
            self.pairs.iter().map(|m| {
                m.exponents()
                    .iter()
                    .zip(&powers)
                    .map(|(&e, pw)| pw[e as usize])
                    .product::<f64>()
            }),
        ))
    }
}

/// Convenience wrapper for [`OrderedBasis::new`].
pub fn enumerate(n: usize, p: usize, t: usize) -> OrderedBasis {
    OrderedBasis::new(n, p, t)
}

pub(crate) fn variable_names(n: usize, p: usize) -> Vec<String> {
    let block = |name: &str, k: usize| -> Vec<String> {
        if k == 1 {
            vec![name.to_string()]
        } else {
            (1..=k).map(|i| format!("{name}{i}")).collect()
        }
    };
    let mut names = block("x", n);
    names.extend(block("y", p));
    names
}

pub fn monomial_label(m: &MultiIndex, n: usize, p: usize) -> String {
    let names = variable_names(n, p);
    let factors: Vec<String> = m
        .exponents()
        .iter()
        .zip(&names)
        .filter(|(&e, _)| e > 0)
        .map(|(&e, v)| {
            if e == 1 {
                v.clone()
            } else {
                format!("{v}^{e}")
            }
        })
        .collect();
    if factors.is_empty() {
        "1".to_string()
    } else {
        factors.join("*")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    #[test]
    fn sizes() {
        assert_eq!(basis_size(2, 3).unwrap(), 10);
        assert_eq!(basis_size(1, 2).unwrap(), 3);
        assert_eq!(basis_size(2, 2).unwrap(), 6);
        assert_eq!(basis_size(3, 0).unwrap(), 1);
        assert!(matches!(
            basis_size(200, 200),
            Err(Error::SizeOverflow { .. })
        ));
    }

    #[test]
    fn block_order_bivariate() {
        let b = enumerate(1, 1, 2);
        let expect = [
            mi(&[0, 0]),
            mi(&[1, 0]),
            mi(&[2, 0]),
            mi(&[0, 1]),
            mi(&[1, 1]),
            mi(&[0, 2]),
        ];
        assert_eq!(b.pairs(), &expect);
        assert_eq!(b.labels(), vec!["1", "x", "x^2", "y", "x*y", "y^2"]);
        assert_eq!(b.x_block_len(), 3);
    }

    #[test]
    fn graded_lex_plain() {
        assert_eq!(enumerate(1, 0, 2).pairs(), &[mi(&[0]), mi(&[1]), mi(&[2])]);
        let b = enumerate(2, 0, 2);
        assert_eq!(
            b.pairs(),
            &[
                mi(&[0, 0]),
                mi(&[1, 0]),
                mi(&[0, 1]),
                mi(&[2, 0]),
                mi(&[1, 1]),
                mi(&[0, 2])
            ]
        );
        assert_eq!(b.labels()[4], "x1*x2");
    }

    #[test]
    fn two_conditioned_variables() {
        // |β| = 1 block: y1 with its x-multiples, then y2.
        let b = enumerate(1, 2, 2);
        let block1: Vec<_> = (0..b.len()).filter(|&r| b.beta(r).degree() == 1).collect();
        let got: Vec<_> = block1.iter().map(|&r| b.pair(r).clone()).collect();
        assert_eq!(
            got,
            vec![
                mi(&[0, 1, 0]),
                mi(&[1, 1, 0]),
                mi(&[0, 0, 1]),
                mi(&[1, 0, 1])
            ]
        );
        assert_eq!(b.len(), basis_size(3, 2).unwrap());
    }

    #[test]
    fn monomial_vectors() {
        let b = enumerate(1, 1, 2);
        let v = b.monomial_vector(&[2.0, 3.0]).unwrap();
        assert_eq!(v.as_slice(), &[1.0, 2.0, 4.0, 3.0, 6.0, 9.0]);
        let v = b.monomial_vector(&[0.0, 0.0]).unwrap();
        assert_eq!(v.as_slice(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let v = enumerate(1, 0, 2).monomial_vector(&[0.5]).unwrap();
        assert_eq!(v.as_slice(), &[1.0, 0.5, 0.25]);
        assert!(matches!(
            b.monomial_vector(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn rank_round_trip_and_prefix() {
        for (n, p, t) in [(1, 0, 5), (2, 0, 4), (1, 1, 4), (2, 1, 3), (1, 2, 3)] {
            let b = enumerate(n, p, t);
            assert_eq!(b.len(), basis_size(n + p, t).unwrap());
            for r in 0..b.len() {
                assert_eq!(b.position(b.pair(r)), Some(r));
            }
            for tp in 0..t {
                let small = enumerate(n, p, tp);
                let filtered: Vec<_> = b
                    .pairs()
                    .iter()
                    .filter(|m| m.degree() <= tp)
                    .cloned()
                    .collect();
                assert_eq!(small.pairs(), filtered.as_slice());
                // the x block of degree tp is the plain marginal basis
                let marginal = enumerate(n, 0, tp);
                for r in 0..marginal.len() {
                    assert_eq!(small.pair(r).split(n).0, *marginal.pair(r));
                }
            }
        }
    }
}
