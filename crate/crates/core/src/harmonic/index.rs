use std::fmt;
use std::ops::{Add, Neg};

/// A lattice point of `Z^N`, used to index Fourier coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    pub fn new(k: impl Into<Vec<i64>>) -> Self {
        MultiIndex(k.into())
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    /// Membership in the half-plane `H_N`: the first nonzero component is
    /// positive, or all components vanish.
    pub fn in_halfplane(&self) -> bool {
        halfplane_contains(&self.0)
    }
}

/// Recursive half-plane test on a raw index slice.
pub fn halfplane_contains(k: &[i64]) -> bool {
    match k.split_first() {
        None => true,
        Some((&first, rest)) => first > 0 || (first == 0 && halfplane_contains(rest)),
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;

    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), rhs.dim(), "multi-index dimension mismatch");
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Neg for &MultiIndex {
    type Output = MultiIndex;

    fn neg(self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|k| -k).collect())
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(k: Vec<i64>) -> Self {
        MultiIndex(k)
    }
}

impl<const N: usize> From<[i64; N]> for MultiIndex {
    fn from(k: [i64; N]) -> Self {
        MultiIndex(k.to_vec())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn origin_is_in_every_halfplane() {
        for n in 1..5 {
            assert!(MultiIndex::zero(n).in_halfplane());
        }
    }

    #[test]
    fn named_points() {
        assert!(MultiIndex::from([0, 0, 0]).in_halfplane());
        assert!(!MultiIndex::from([0, -3]).in_halfplane());
        assert!(MultiIndex::from([0, 3]).in_halfplane());
        assert!(MultiIndex::from([1, -7]).in_halfplane());
        assert!(!MultiIndex::from([-1, 7]).in_halfplane());
        assert!(MultiIndex::from([0, 0, 1, -4]).in_halfplane());
    }

    proptest! {
        #[test]
        fn antisymmetry(k in prop::collection::vec(-4i64..=4, 1..4)) {
            let k = MultiIndex::new(k);
            if !k.is_zero() {
                prop_assert!(k.in_halfplane() ^ (-&k).in_halfplane());
            }
        }

        #[test]
        fn closed_under_addition(
            a in prop::collection::vec(-4i64..=4, 3),
            b in prop::collection::vec(-4i64..=4, 3),
        ) {
            let a = MultiIndex::new(a);
            let b = MultiIndex::new(b);
            if a.in_halfplane() && b.in_halfplane() {
                prop_assert!((&a + &b).in_halfplane());
            }
        }
    }
}
