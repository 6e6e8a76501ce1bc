use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{GridFunction, LaurentTable};
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// A d×d matrix of grid functions sharing one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFunction {
    d: usize,
    sizes: Vec<usize>,
    entries: Vec<GridFunction>,
}

impl MatrixFunction {
    /// Builds from row-major entries.
    pub fn new(d: usize, entries: Vec<GridFunction>) -> Result<Self> {
        if d == 0 || entries.len() != d * d {
            return Err(Error::Shape(format!("{} entries for a {d}×{d} matrix", entries.len())));
        }
        let sizes = entries[0].sizes().to_vec();
        if entries.iter().any(|e| e.sizes() != sizes.as_slice()) {
            return Err(Error::Shape("matrix entries live on different grids".into()));
        }
        Ok(MatrixFunction { d, sizes, entries })
    }

    pub fn identity(d: usize, sizes: &[usize]) -> Self {
        Self::constant(&CMatrix::identity(d, d), sizes)
    }

    pub fn constant(c: &CMatrix, sizes: &[usize]) -> Self {
        let d = c.nrows();
        let entries = (0..d * d).map(|e| GridFunction::constant(sizes, c[(e / d, e % d)])).collect();
        MatrixFunction { d, sizes: sizes.to_vec(), entries }
    }

    /// Assembles a matrix function from one matrix per grid point.
    pub fn from_points(d: usize, sizes: &[usize], points: &[CMatrix]) -> Self {
        let total: usize = sizes.iter().product();
        assert_eq!(points.len(), total);
        let entries = (0..d * d)
            .map(|e| {
                let (i, j) = (e / d, e % d);
                GridFunction::from_parts(sizes.to_vec(), points.iter().map(|m| m[(i, j)]).collect())
            })
            .collect();
        MatrixFunction { d, sizes: sizes.to_vec(), entries }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entry(&self, i: usize, j: usize) -> &GridFunction {
        &self.entries[i * self.d + j]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut GridFunction {
        &mut self.entries[i * self.d + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, f: GridFunction) {
        assert_eq!(f.sizes(), self.sizes.as_slice());
        self.entries[i * self.d + j] = f;
    }

    pub fn entries(&self) -> &[GridFunction] {
        &self.entries
    }

    /// Value at the flat grid index `p`.
    pub fn at(&self, p: usize) -> CMatrix {
        CMatrix::from_fn(self.d, self.d, |i, j| self.entry(i, j).samples()[p])
    }

    pub fn to_points(&self) -> Vec<CMatrix> {
        (0..self.len()).into_par_iter().map(|p| self.at(p)).collect()
    }

    /// Applies a pointwise matrix map.
    pub fn map_points(&self, f: impl Fn(&CMatrix) -> CMatrix + Sync) -> Self {
        let pts: Vec<CMatrix> = (0..self.len()).into_par_iter().map(|p| f(&self.at(p))).collect();
        let d = pts.first().map_or(self.d, |m| m.nrows());
        Self::from_points(d, &self.sizes, &pts)
    }

    /// Applies a fallible pointwise map; the error carries the first failing
    /// flat index in grid order.
    pub fn try_map_points<E: Send>(
        &self,
        f: impl Fn(usize, &CMatrix) -> std::result::Result<CMatrix, E> + Sync,
    ) -> std::result::Result<Self, E> {
        let pts: std::result::Result<Vec<CMatrix>, E> =
            (0..self.len()).into_par_iter().map(|p| f(p, &self.at(p))).collect();
        let pts = pts?;
        let d = pts.first().map_or(self.d, |m| m.nrows());
        Ok(Self::from_points(d, &self.sizes, &pts))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.sizes, other.sizes, "grid shape mismatch");
        assert_eq!(self.d, other.d);
        let d = self.d;
        let entries = (0..d * d)
            .into_par_iter()
            .map(|e| {
                let (i, j) = (e / d, e % d);
                let mut acc = vec![Complex64::default(); self.len()];
                for k in 0..d {
                    let a = self.entry(i, k).samples();
                    let b = other.entry(k, j).samples();
                    for (o, (x, y)) in acc.iter_mut().zip(a.iter().zip(b)) {
                        *o += x * y;
                    }
                }
                GridFunction::from_parts(self.sizes.clone(), acc)
            })
            .collect();
        MatrixFunction { d, sizes: self.sizes.clone(), entries }
    }

    /// Pointwise product with a constant matrix on the right.
    pub fn mul_constant(&self, c: &CMatrix) -> Self {
        self.mul(&Self::constant(c, &self.sizes))
    }

    /// Pointwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.d;
        let entries = (0..d * d).map(|e| self.entry(e % d, e / d).conj()).collect();
        MatrixFunction { d, sizes: self.sizes.clone(), entries }
    }

    /// `F F*` pointwise.
    pub fn gram(&self) -> Self {
        self.mul(&self.adjoint())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect();
        MatrixFunction { d: self.d, sizes: self.sizes.clone(), entries }
    }

    /// Largest pointwise Frobenius norm.
    pub fn max_norm(&self) -> f64 {
        (0..self.len())
            .into_par_iter()
            .map(|p| self.entries.iter().map(|e| e.samples()[p].norm_sqr()).sum::<f64>().sqrt())
            .reduce(|| 0.0, f64::max)
    }

    /// Largest entrywise sample difference.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.max_diff(b))
            .fold(0.0, f64::max)
    }

    /// Grid mean over the first `k` axes.
    pub fn mean_leading(&self, k: usize) -> Self {
        let entries: Vec<_> = self.entries.iter().map(|e| e.mean_leading(k)).collect();
        MatrixFunction { d: self.d, sizes: self.sizes[k..].to_vec(), entries }
    }

    /// Grid mean over all axes, i.e. the zeroth Fourier coefficient.
    pub fn mean(&self) -> CMatrix {
        CMatrix::from_fn(self.d, self.d, |i, j| self.entry(i, j).mean())
    }

    pub fn broadcast_leading(&self, lead_sizes: &[usize]) -> Self {
        let entries: Vec<_> = self.entries.iter().map(|e| e.broadcast_leading(lead_sizes)).collect();
        let sizes = entries[0].sizes().to_vec();
        MatrixFunction { d: self.d, sizes, entries }
    }

    pub fn permute_axes(&self, perm: &[usize]) -> Self {
        let entries: Vec<_> = self.entries.iter().map(|e| e.permute_axes(perm)).collect();
        let sizes = entries[0].sizes().to_vec();
        MatrixFunction { d: self.d, sizes, entries }
    }

    /// Pointwise determinant.
    pub fn det(&self) -> GridFunction {
        let samples = (0..self.len()).into_par_iter().map(|p| self.at(p).determinant()).collect();
        GridFunction::from_parts(self.sizes.clone(), samples)
    }

    pub fn coefficients(&self) -> LaurentMatrix {
        LaurentMatrix {
            d: self.d,
            dim: self.dim(),
            entries: self.entries.par_iter().map(|e| e.coefficients()).collect(),
        }
    }

    pub fn evaluate(c: &LaurentMatrix, sizes: &[usize]) -> Result<Self> {
        let entries = c
            .entries
            .iter()
            .map(|e| GridFunction::evaluate(e, sizes))
            .collect::<Result<Vec<_>>>()?;
        MatrixFunction::new(c.d, entries)
    }

    /// Largest deviation from Hermitian symmetry over the grid.
    pub fn hermitian_defect(&self) -> f64 {
        let adj = self.adjoint();
        self.max_diff(&adj)
    }
}

/// A d×d matrix of Laurent tables: the exact form of a matrix
/// trigonometric polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentMatrix {
    d: usize,
    dim: usize,
    entries: Vec<LaurentTable>,
}

impl LaurentMatrix {
    pub fn new(d: usize, entries: Vec<LaurentTable>) -> Result<Self> {
        if d == 0 || entries.len() != d * d {
            return Err(Error::Shape(format!("{} entries for a {d}×{d} matrix", entries.len())));
        }
        let dim = entries[0].dim();
        if entries.iter().any(|e| e.dim() != dim) {
            return Err(Error::Shape("matrix entries have different dimensions".into()));
        }
        Ok(LaurentMatrix { d, dim, entries })
    }

    pub fn identity(d: usize, dim: usize) -> Self {
        let entries = (0..d * d)
            .map(|e| {
                if e / d == e % d {
                    LaurentTable::constant(dim, Complex64::new(1.0, 0.0))
                } else {
                    LaurentTable::new(dim)
                }
            })
            .collect();
        LaurentMatrix { d, dim, entries }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentTable {
        &self.entries[i * self.d + j]
    }

    pub fn entries(&self) -> &[LaurentTable] {
        &self.entries
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d);
        let d = self.d;
        let entries = (0..d * d)
            .map(|e| {
                let (i, j) = (e / d, e % d);
                (0..d).fold(LaurentTable::new(self.dim), |acc, k| {
                    acc.add(&self.entry(i, k).mul(other.entry(k, j)))
                })
            })
            .collect();
        LaurentMatrix { d, dim: self.dim, entries }
    }

    /// Coefficients of the pointwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.d;
        let entries = (0..d * d).map(|e| self.entry(e % d, e / d).conj_reflect()).collect();
        LaurentMatrix { d, dim: self.dim, entries }
    }

    /// Per-axis maximum degree over all entries.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.dim];
        for e in &self.entries {
            for (a, b) in deg.iter_mut().zip(e.degrees()) {
                *a = (*a).max(b);
            }
        }
        deg
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.max_abs()).fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.max_diff(b))
            .fold(0.0, f64::max)
    }

    /// Largest Hermitian-symmetry defect `|c_{ij}(k) − conj(c_{ji}(−k))|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.max_diff(&self.adjoint())
    }

    pub fn cleaned(&self, rel_tol: f64) -> Self {
        let cut = rel_tol * self.max_abs();
        let entries = self
            .entries
            .iter()
            .map(|e| {
                LaurentTable::from_terms(
                    self.dim,
                    e.iter().filter(|(_, c)| c.norm() > cut).map(|(k, c)| (k.clone(), *c)),
                )
            })
            .collect();
        LaurentMatrix { d: self.d, dim: self.dim, entries }
    }
}
