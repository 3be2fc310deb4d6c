//! Sparse real polynomials in `N` variables on the unit cube `(0,1)^N`.
//!
//! Terms are kept in a [`BTreeMap`] keyed by [`MultiIndex`], whose ordering is
//! graded (total degree first), so iteration and serialization are
//! deterministic. Zero coefficients are never stored.

mod json;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

pub use json::{from_json_str, to_json_string, PolynomialFile, TermFile};

/// Exponent vector `α` of a monomial `x^α`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// Unit vector `e_j`.
    pub fn unit(dim: usize, j: usize) -> Self {
        let mut e = vec![0; dim];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Coordinates with a nonzero exponent.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(j, _)| j)
    }

    pub fn get(&self, j: usize) -> u32 {
        self.0[j]
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Applies a coordinate permutation: entry `j` moves to position `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> MultiIndex {
        let mut out = vec![0; self.0.len()];
        for (j, &a) in self.0.iter().enumerate() {
            out[perm[j]] = a;
        }
        MultiIndex(out)
    }

    /// All multi-indices of dimension `dim` and total degree exactly `degree`,
    /// in ascending [`Ord`] order.
    pub fn all_of_degree(dim: usize, degree: u32) -> Vec<MultiIndex> {
        fn fill(acc: &mut Vec<u32>, dim: usize, left: u32, out: &mut Vec<MultiIndex>) {
            if acc.len() + 1 == dim {
                acc.push(left);
                out.push(MultiIndex(acc.clone()));
                acc.pop();
                return;
            }
            for a in (0..=left).rev() {
                acc.push(a);
                fill(acc, dim, left - a, out);
                acc.pop();
            }
        }
        let mut out = Vec::new();
        if dim == 0 {
            return out;
        }
        fill(&mut Vec::with_capacity(dim), dim, degree, &mut out);
        out
    }

    /// All multi-indices with total degree in `lo..=hi`, graded order.
    pub fn all_in_degree_range(dim: usize, lo: u32, hi: u32) -> Vec<MultiIndex> {
        (lo..=hi)
            .flat_map(|d| MultiIndex::all_of_degree(dim, d))
            .collect()
    }
}

/// Graded order: total degree first, then earlier coordinates carrying the
/// larger exponent come first (`x` before `y`, `x²` before `xy` before `y²`).
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

/// Sign class of a polynomial's coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Zero,
    Positive,
    Negative,
    Mixed,
}

/// Sparse polynomial with real coefficients in a fixed dimension.
#[derive(Clone, Debug, PartialEq)]
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
        let mut p = Polynomial::zero(dim);
        p.add_term(MultiIndex::zero(dim), c);
        p
    }

    pub fn monomial(alpha: MultiIndex, coef: f64) -> Self {
        let mut p = Polynomial::zero(alpha.dim());
        p.add_term(alpha, coef);
        p
    }

    /// Builds a polynomial by summing the given terms; repeated multi-indices
    /// are merged and cancelled terms dropped.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut p = Polynomial::zero(dim);
        for (alpha, c) in terms {
            if alpha.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: alpha.dim(),
                });
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, alpha: MultiIndex, c: f64) {
        debug_assert_eq!(alpha.dim(), self.dim);
        if c == 0.0 {
            return;
        }
        match self.terms.get_mut(&alpha) {
            Some(v) => {
                *v += c;
                if *v == 0.0 {
                    self.terms.remove(&alpha);
                }
            }
            None => {
                self.terms.insert(alpha, c);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> + '_ {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn coef(&self, alpha: &MultiIndex) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    pub fn constant_term(&self) -> f64 {
        self.coef(&MultiIndex::zero(self.dim))
    }

    /// Returns the single term if this is a monomial `c x^α`.
    pub fn as_monomial(&self) -> Option<(&MultiIndex, f64)> {
        if self.terms.len() == 1 {
            self.terms().next()
        } else {
            None
        }
    }

    pub fn sign(&self) -> Sign {
        let pos = self.terms.values().any(|&c| c > 0.0);
        let neg = self.terms.values().any(|&c| c < 0.0);
        match (pos, neg) {
            (false, false) => Sign::Zero,
            (true, false) => Sign::Positive,
            (false, true) => Sign::Negative,
            (true, true) => Sign::Mixed,
        }
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (a, v) in self.terms() {
            out.add_term(a.clone(), c * v);
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(a, &c)| (a.clone(), -c)).collect(),
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_dim(other.dim)?;
        let mut out = self.clone();
        for (a, c) in other.terms() {
            out.add_term(a.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.neg())
    }

    /// Relabels coordinates: variable `j` becomes variable `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Polynomial> {
        if perm.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: perm.len(),
            });
        }
        let mut seen = vec![false; self.dim];
        for &j in perm {
            if j >= self.dim || std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidParameter(format!(
                    "{perm:?} is not a permutation"
                )));
            }
        }
        Ok(Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(a, &c)| (a.permuted(perm), c))
                .collect(),
        })
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got,
            });
        }
        Ok(())
    }

    /// Splits into constant term, positive-coefficient part and
    /// negative-coefficient part (the latter two without constant term).
    pub fn decompose(&self) -> Decomposition {
        let mut plus = Polynomial::zero(self.dim);
        let mut minus = Polynomial::zero(self.dim);
        let mut p0 = 0.0;
        for (a, c) in self.terms() {
            if a.is_zero() {
                p0 = c;
            } else if c > 0.0 {
                plus.terms.insert(a.clone(), c);
            } else {
                minus.terms.insert(a.clone(), c);
            }
        }
        Decomposition { p0, plus, minus }
    }

    /// Partial derivative with respect to coordinate `j` (0-based).
    pub fn differentiate(&self, j: usize) -> Result<Polynomial> {
        if j >= self.dim {
            return Err(Error::CoordinateOutOfRange {
                index: j,
                dim: self.dim,
            });
        }
        let mut out = Polynomial::zero(self.dim);
        for (a, c) in self.terms() {
            let aj = a.0[j];
            if aj == 0 {
                continue;
            }
            let mut b = a.0.clone();
            b[j] -= 1;
            out.add_term(MultiIndex(b), c * aj as f64);
        }
        Ok(out)
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.dim)
            .map(|j| self.differentiate(j).expect("j < dim"))
            .collect()
    }

    /// Applies `D^β = ∂^{β_1}_1 ⋯ ∂^{β_N}_N`.
    pub fn derivative(&self, beta: &MultiIndex) -> Result<Polynomial> {
        self.check_dim(beta.dim())?;
        let mut out = Polynomial::zero(self.dim);
        'terms: for (a, c) in self.terms() {
            let mut coef = c;
            let mut e = Vec::with_capacity(self.dim);
            for (&aj, &bj) in a.0.iter().zip(&beta.0) {
                if bj > aj {
                    continue 'terms;
                }
                // falling factorial a (a-1) ... (a-b+1)
                for k in 0..bj {
                    coef *= (aj - k) as f64;
                }
                e.push(aj - bj);
            }
            out.add_term(MultiIndex(e), coef);
        }
        Ok(out)
    }

    /// All order-`m` partial derivatives, one per unordered multi-index
    /// `|β| = m` without multinomial weights. Identically zero derivatives are
    /// kept so the key set depends only on `(dim, m)`.
    pub fn higher_gradient(&self, m: u32) -> Result<BTreeMap<MultiIndex, Polynomial>> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "derivative order must be at least 1".into(),
            ));
        }
        MultiIndex::all_of_degree(self.dim, m)
            .into_iter()
            .map(|beta| {
                let d = self.derivative(&beta)?;
                Ok((beta, d))
            })
            .collect()
    }

    /// Splits `P` into its part of degree `≤ m-1` and the remainder.
    pub fn truncate_degree(&self, m: u32) -> Result<(Polynomial, Polynomial)> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "truncation order must be at least 1".into(),
            ));
        }
        let mut low = Polynomial::zero(self.dim);
        let mut rest = Polynomial::zero(self.dim);
        for (a, c) in self.terms() {
            if a.degree() < m {
                low.terms.insert(a.clone(), c);
            } else {
                rest.terms.insert(a.clone(), c);
            }
        }
        Ok((low, rest))
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        let mut max_pow = vec![0u32; self.dim];
        for a in self.terms.keys() {
            for (m, &aj) in max_pow.iter_mut().zip(&a.0) {
                *m = (*m).max(aj);
            }
        }
        let powers: Vec<Vec<f64>> = x
            .iter()
            .zip(&max_pow)
            .map(|(&xj, &m)| {
                let mut row = Vec::with_capacity(m as usize + 1);
                let mut v = 1.0;
                row.push(v);
                for _ in 0..m {
                    v *= xj;
                    row.push(v);
                }
                row
            })
            .collect();
        Ok(self
            .terms()
            .map(|(a, c)| {
                a.0.iter()
                    .enumerate()
                    .fold(c, |acc, (j, &aj)| acc * powers[j][aj as usize])
            })
            .sum())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (a, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
                write!(f, "{}", c.abs())?;
            } else {
                write!(f, "{c}")?;
            }
            for (j, &aj) in a.0.iter().enumerate() {
                match aj {
                    0 => {}
                    1 => write!(f, "*x{}", j + 1)?,
                    _ => write!(f, "*x{}^{aj}", j + 1)?,
                }
            }
        }
        Ok(())
    }
}

/// `P = p0 + plus + minus` with `plus` holding the positive-coefficient terms of
/// positive degree and `minus` the negative ones.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub p0: f64,
    pub plus: Polynomial,
    pub minus: Polynomial,
}

impl Decomposition {
    pub fn reconstruct(&self) -> Polynomial {
        let dim = self.plus.dim;
        let mut terms = self.plus.terms.clone();
        terms.extend(self.minus.terms.iter().map(|(a, &c)| (a.clone(), c)));
        if self.p0 != 0.0 {
            terms.insert(MultiIndex::zero(dim), self.p0);
        }
        Polynomial { dim, terms }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    /// 3 - 2x + xy
    fn sample() -> Polynomial {
        Polynomial::from_terms(
            2,
            [(mi(&[0, 0]), 3.0), (mi(&[1, 0]), -2.0), (mi(&[1, 1]), 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn decompose_reads_signs_and_constant() {
        let d = sample().decompose();
        assert_eq!(d.p0, 3.0);
        assert_eq!(d.plus, Polynomial::monomial(mi(&[1, 1]), 1.0));
        assert_eq!(d.minus, Polynomial::monomial(mi(&[1, 0]), -2.0));
        assert_eq!(d.reconstruct(), sample());
    }

    #[test]
    fn decompose_zero_and_cancelled() {
        let d = Polynomial::zero(2).decompose();
        assert_eq!(d.p0, 0.0);
        assert!(d.plus.is_zero() && d.minus.is_zero());

        let x = Polynomial::monomial(mi(&[1]), 1.0);
        let p = x.add(&x).unwrap().add(&x.scale(-2.0)).unwrap();
        assert!(p.is_zero());
        let d = p.decompose();
        assert!(d.p0 == 0.0 && d.plus.is_zero() && d.minus.is_zero());
    }

    #[test]
    fn differentiate_power_rule() {
        let x2y = Polynomial::monomial(mi(&[2, 1]), 1.0);
        assert_eq!(
            x2y.differentiate(0).unwrap(),
            Polynomial::monomial(mi(&[1, 1]), 2.0)
        );
        let x2 = Polynomial::monomial(mi(&[2, 0]), 1.0);
        assert!(x2.differentiate(1).unwrap().is_zero());
        let d = sample().differentiate(0).unwrap();
        let expect =
            Polynomial::from_terms(2, [(mi(&[0, 0]), -2.0), (mi(&[0, 1]), 1.0)]).unwrap();
        assert_eq!(d, expect);
        assert!(matches!(
            sample().differentiate(2),
            Err(Error::CoordinateOutOfRange { index: 2, dim: 2 })
        ));
    }

    #[test]
    fn gradient_examples() {
        let xy = Polynomial::monomial(mi(&[1, 1]), 1.0);
        assert_eq!(
            xy.gradient(),
            vec![
                Polynomial::monomial(mi(&[0, 1]), 1.0),
                Polynomial::monomial(mi(&[1, 0]), 1.0)
            ]
        );
        assert!(Polynomial::constant(3, 5.0)
            .gradient()
            .iter()
            .all(Polynomial::is_zero));
        let sq = Polynomial::from_terms(2, [(mi(&[2, 0]), 1.0), (mi(&[0, 2]), 1.0)]).unwrap();
        assert_eq!(
            sq.gradient(),
            vec![
                Polynomial::monomial(mi(&[1, 0]), 2.0),
                Polynomial::monomial(mi(&[0, 1]), 2.0)
            ]
        );
    }

    #[test]
    fn higher_gradient_examples() {
        let x2y = Polynomial::monomial(mi(&[2, 1]), 1.0);
        let h = x2y.higher_gradient(2).unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(h[&mi(&[2, 0])], Polynomial::monomial(mi(&[0, 1]), 2.0));
        assert_eq!(h[&mi(&[1, 1])], Polynomial::monomial(mi(&[1, 0]), 2.0));
        assert!(h[&mi(&[0, 2])].is_zero());

        let h1 = sample().higher_gradient(1).unwrap();
        let g = sample().gradient();
        assert_eq!(h1.values().cloned().collect::<Vec<_>>(), g);

        let h3 = sample().higher_gradient(3).unwrap();
        assert_eq!(h3.len(), 4);
        assert!(h3.values().all(Polynomial::is_zero));
    }

    #[test]
    fn truncate_examples() {
        let (low, rest) = sample().truncate_degree(1).unwrap();
        assert_eq!(low, Polynomial::constant(2, 3.0));
        assert_eq!(
            rest,
            Polynomial::from_terms(2, [(mi(&[1, 0]), -2.0), (mi(&[1, 1]), 1.0)]).unwrap()
        );
        let (low, rest) = sample().truncate_degree(2).unwrap();
        assert_eq!(
            low,
            Polynomial::from_terms(2, [(mi(&[0, 0]), 3.0), (mi(&[1, 0]), -2.0)]).unwrap()
        );
        assert_eq!(rest, Polynomial::monomial(mi(&[1, 1]), 1.0));
        let (low, rest) = sample().truncate_degree(5).unwrap();
        assert_eq!(low, sample());
        assert!(rest.is_zero());
    }

    #[test]
    fn evaluate_examples() {
        let xy = Polynomial::monomial(mi(&[1, 1]), 1.0);
        assert_eq!(xy.evaluate(&[0.5, 0.5]).unwrap(), 0.25);
        assert_eq!(Polynomial::zero(3).evaluate(&[0.1, 0.2, 0.3]).unwrap(), 0.0);
        assert_eq!(sample().evaluate(&[1.0, 1.0]).unwrap(), 2.0);
        assert!(matches!(
            sample().evaluate(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn graded_order() {
        let all = MultiIndex::all_in_degree_range(2, 0, 2);
        let expect: Vec<_> = [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
            .iter()
            .map(|v| mi(v))
            .collect();
        assert_eq!(all, expect);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, all);
        // C(3+3, 3) multi-indices of degree <= 3 in three variables
        assert_eq!(MultiIndex::all_in_degree_range(3, 0, 3).len(), 20);
    }

    #[test]
    fn permuted_swaps_variables() {
        let p = sample().permuted(&[1, 0]).unwrap();
        assert_eq!(p.coef(&mi(&[0, 1])), -2.0);
        assert!(sample().permuted(&[0, 0]).is_err());
    }
}
