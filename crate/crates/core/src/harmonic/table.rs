use std::collections::BTreeMap;

use num_complex::Complex64;

use super::MultiIndex;

/// Finite map from multi-indices to complex Fourier coefficients.
///
/// This is the exact representation of a trigonometric polynomial. No
/// threshold is applied on insertion; [`LaurentTable::cleaned`] produces a
/// sparsified copy for reporting.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentTable {
    dim: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl LaurentTable {
    pub fn new(dim: usize) -> Self {
        LaurentTable { dim, coeffs: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut t = Self::new(dim);
        t.insert(MultiIndex::zero(dim), c);
        t
    }

    /// Builds a table from `(index, coefficient)` pairs, summing repeats.
    pub fn from_terms<I, K>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (K, Complex64)>,
        K: Into<MultiIndex>,
    {
        let mut t = Self::new(dim);
        for (k, c) in terms {
            t.add_term(k.into(), c);
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn insert(&mut self, k: MultiIndex, c: Complex64) {
        assert_eq!(k.dim(), self.dim, "multi-index dimension mismatch");
        self.coeffs.insert(k, c);
    }

    pub fn add_term(&mut self, k: MultiIndex, c: Complex64) {
        assert_eq!(k.dim(), self.dim, "multi-index dimension mismatch");
        *self.coeffs.entry(k).or_default() += c;
    }

    pub fn get(&self, k: &MultiIndex) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sum of squared coefficient magnitudes.
    pub fn energy(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    /// Largest `|k_i|` over the support, per axis.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.dim];
        for k in self.coeffs.keys() {
            for (d, &ki) in deg.iter_mut().zip(k.as_slice()) {
                *d = (*d).max(ki.unsigned_abs() as usize);
            }
        }
        deg
    }

    /// Copy without entries below `rel_tol * max_abs`.
    pub fn cleaned(&self, rel_tol: f64) -> Self {
        let cut = rel_tol * self.max_abs();
        LaurentTable {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(_, c)| c.norm() > cut)
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    /// Coefficients of the pointwise conjugate: `k ↦ conj(c_{-k})`.
    pub fn conj_reflect(&self) -> Self {
        LaurentTable {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|(k, c)| (-k, c.conj())).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        LaurentTable {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_term(k.clone(), *c);
        }
        out
    }

    /// Product of trigonometric polynomials (coefficient convolution).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::new(self.dim);
        for (ka, ca) in &self.coeffs {
            for (kb, cb) in &other.coeffs {
                out.add_term(ka + kb, ca * cb);
            }
        }
        out
    }

    /// Analytic-type test: every coefficient outside `H_N` is at most
    /// `tol` times the largest coefficient magnitude.
    pub fn is_analytic_type(&self, tol: f64) -> bool {
        let cut = tol * self.max_abs();
        self.coeffs
            .iter()
            .all(|(k, c)| k.in_halfplane() || c.norm() <= cut)
    }

    /// Energy of the coefficients outside `H_N`.
    pub fn energy_outside_halfplane(&self) -> f64 {
        self.coeffs
            .iter()
            .filter(|(k, _)| !k.in_halfplane())
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    /// Largest coefficient difference against another table.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut m = 0.0f64;
        for (k, c) in &self.coeffs {
            m = m.max((c - other.get(k)).norm());
        }
        for (k, c) in &other.coeffs {
            if !self.coeffs.contains_key(k) {
                m = m.max(c.norm());
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn analytic_type_examples() {
        let a = LaurentTable::from_terms(2, [([1, -5], c(1.0))]);
        assert!(a.is_analytic_type(0.0));
        let b = LaurentTable::from_terms(2, [([0, -1], c(1.0))]);
        assert!(!b.is_analytic_type(0.0));
        let small = LaurentTable::from_terms(2, [([0, 0], c(1.0)), ([0, -1], c(1e-12))]);
        assert!(small.is_analytic_type(1e-10));
        assert!(!small.is_analytic_type(1e-13));
    }

    #[test]
    fn product_and_reflection() {
        // (2 + t) * conj(2 + t) = 5 + 2t + 2/t
        let p = LaurentTable::from_terms(1, [([0], c(2.0)), ([1], c(1.0))]);
        let s = p.mul(&p.conj_reflect());
        assert_eq!(s.get(&MultiIndex::from([0])), c(5.0));
        assert_eq!(s.get(&MultiIndex::from([1])), c(2.0));
        assert_eq!(s.get(&MultiIndex::from([-1])), c(2.0));
        assert_eq!(s.degrees(), vec![1]);
    }
}
