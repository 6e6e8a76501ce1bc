//! Factorization in the leading variable: `S = S₊,₁ S₊,₁*` with `S₊,₁`
//! analytic in `t₁` on every slice of the remaining variables.
//!
//! The factor is assembled as `M₁ U₂ U₃ ⋯ U_d`. `M₁` is a pointwise
//! Cholesky factor whose diagonal has been made outer in `t₁`. Each `U_m`
//! is a unitary of determinant one that removes the negative-frequency part
//! of row `m`; its first `m−1` rows are polynomials of degree `≤ n` in `t₁`
//! and its last row is the tilde of such polynomials.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{unravel, CMatrix, FirstVarSpectrum, GridFunction, MatrixFunction};
use crate::scalar::outer_factor_first_var;

type CVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Slices whose truncated `f_m(0)` falls below this fraction of `‖f_m‖`
/// are flagged as weak.
pub const WEAK_SLICE_RATIO: f64 = 1e-12;

/// Lower triangular `M` with `M M* = S` and diagonal entries outer in `t₁`.
#[derive(Clone, Debug)]
pub struct LowerTriangularFactor {
    pub m: MatrixFunction,
}

impl LowerTriangularFactor {
    pub fn diagonal(&self, j: usize) -> &GridFunction {
        self.m.entry(j, j)
    }
}

/// Identity rows above a last row `[ζ₁, …, ζ_{m−1}, f_m]`.
#[derive(Clone, Debug)]
pub struct RowMatrix {
    pub zetas: Vec<GridFunction>,
    pub f: GridFunction,
}

impl RowMatrix {
    pub fn m(&self) -> usize {
        self.zetas.len() + 1
    }

    pub fn to_matrix(&self) -> MatrixFunction {
        let m = self.m();
        let sizes = self.f.sizes();
        let mut out = MatrixFunction::identity(m, sizes);
        for (i, z) in self.zetas.iter().enumerate() {
            out.set_entry(m - 1, i, z.clone());
        }
        out.set_entry(m - 1, m - 1, self.f.clone());
        out
    }
}

/// The unitary built for one stage, stored as per-slice first-variable
/// coefficients.
///
/// For `i < m − 1`, `poly(p, i, c)[q]` is the coefficient of `t₁^q` in
/// `u_{ic}` on slice `p`. The last row is stored in tilde form: `u_{m−1,c}`
/// is the conjugate of the polynomial `poly(p, m−1, c)`, so its coefficients
/// live on degrees `−n…0`.
#[derive(Clone, Debug)]
pub struct StructuredUnitary {
    m: usize,
    n: usize,
    sizes: Vec<usize>,
    coeffs: Vec<Complex64>,
    /// Per-slice `|f_m^{n}(0)|`.
    pub origin_abs: Vec<f64>,
    /// Slices flagged by [`WEAK_SLICE_RATIO`].
    pub weak_slices: Vec<usize>,
    /// Largest ratio, over slices and entries of `F₋U`, of the energy on
    /// negative first-variable degrees to the entry's total energy.
    pub negative_energy: f64,
}

impl StructuredUnitary {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn slices(&self) -> usize {
        self.sizes[1..].iter().product()
    }

    pub fn poly(&self, p: usize, i: usize, c: usize) -> &[Complex64] {
        let len = self.n + 1;
        let base = ((p * self.m + i) * self.m + c) * len;
        &self.coeffs[base..base + len]
    }

    /// Samples of `U` on the full grid.
    pub fn to_matrix(&self) -> MatrixFunction {
        let m = self.m;
        let g1 = self.sizes[0];
        let slices = self.slices();
        let entries = (0..m * m)
            .into_par_iter()
            .map(|e| {
                let (i, c) = (e / m, e % m);
                let mut lines = vec![ZERO; g1 * slices];
                for p in 0..slices {
                    let line = &mut lines[p * g1..(p + 1) * g1];
                    for (q, v) in self.poly(p, i, c).iter().enumerate() {
                        if i + 1 < m {
                            line[q] = *v;
                        } else {
                            line[(g1 - q) % g1] = v.conj();
                        }
                    }
                }
                FirstVarSpectrum::from_lines(self.sizes.clone(), lines).into_grid()
            })
            .collect();
        MatrixFunction::new(m, entries).expect("consistent unitary entries")
    }

    /// `diag(U, I_{d−m})` on the full grid.
    pub fn embed(&self, d: usize) -> MatrixFunction {
        let u = self.to_matrix();
        let mut out = MatrixFunction::identity(d, &self.sizes);
        for i in 0..self.m {
            for j in 0..self.m {
                out.set_entry(i, j, u.entry(i, j).clone());
            }
        }
        out
    }
}

/// Diagnostics of one `U_m`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct UnitaryStageReport {
    pub m: usize,
    pub order: usize,
    pub unitarity_dev: f64,
    pub det_dev: f64,
    pub negative_energy: f64,
    pub min_origin_abs: f64,
    pub weak_slices: Vec<usize>,
}

/// Diagnostics of the leading-variable factorization.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct StageOneReport {
    pub order: usize,
    pub unitaries: Vec<UnitaryStageReport>,
    /// Relative deviation `|det S₊,₁ − det M₁| / |det M₁|`, maximized over the grid.
    pub det_dev: f64,
    /// Largest `‖S − S₊,₁ S₊,₁*‖_F` over the grid.
    pub residual: f64,
}

/// Pointwise Cholesky factor whose diagonal is replaced by the first-variable
/// outer factor of its squared modulus, with each column rescaled by the same
/// unimodular function so that `M M* = S` is unchanged.
pub fn lower_upper_factor(s: &MatrixFunction) -> Result<LowerTriangularFactor> {
    let sizes = s.sizes().to_vec();
    let d = s.d();
    let chol = s.try_map_points(|p, value| {
        let herm = (value + value.adjoint()) * Complex64::new(0.5, 0.0);
        // The complex Cholesky accepts negative pivots (with imaginary square
        // roots), so the diagonal is checked explicitly.
        match herm.cholesky().map(|c| c.l()) {
            Some(l) if (0..d).all(|j| l[(j, j)].re > 0.0 && l[(j, j)].im.abs() <= 1e-12 * l[(j, j)].re) => Ok(l),
            _ => Err(Error::NotPositiveDefinite { point: unravel(p, &sizes) }),
        }
    })?;
    let mut m = chol;
    for j in 0..d {
        let ljj = m.entry(j, j).clone();
        let outer = outer_factor_first_var(&ljj.map(|v| Complex64::new(v.norm_sqr(), 0.0)))?;
        let phase = outer.fplus.zip_map(&ljj, |a, b| a / b.re);
        for i in j..d {
            let scaled = m.entry(i, j).mul(&phase);
            m.set_entry(i, j, scaled);
        }
        // Keep the diagonal exactly equal to the outer factor.
        m.set_entry(j, j, outer.fplus);
    }
    Ok(LowerTriangularFactor { m })
}

/// Row `m` (1-based) of the leading `m×m` block of `Q`, as a row matrix.
pub fn build_row_matrix(q: &MatrixFunction, m: usize) -> Result<RowMatrix> {
    if m < 2 || m > q.d() {
        return Err(Error::InvalidOrder(format!("row-matrix size {m} outside 2..={}", q.d())));
    }
    Ok(RowMatrix {
        zetas: (0..m - 1).map(|i| q.entry(m - 1, i).clone()).collect(),
        f: q.entry(m - 1, m - 1).clone(),
    })
}

/// `F = F₊ F₋` with `F₊` carrying the analytic parts `ζ₊,ᵢ` (and `1` on the
/// diagonal) and `F₋` the parts `ζ₋,ᵢ` together with `f_m`.
pub fn split_row_matrix(f: &RowMatrix) -> (RowMatrix, RowMatrix) {
    let (plus, minus): (Vec<_>, Vec<_>) = f.zetas.iter().map(|z| z.split_first_var()).unzip();
    let one = GridFunction::constant(f.f.sizes(), ONE);
    (RowMatrix { zetas: plus, f: one }, RowMatrix { zetas: minus, f: f.f.clone() })
}

/// Keeps `ζ₋,ᵢ` on degrees `−n…−1` and `f_m` on `0…n`.
pub fn truncate_row_matrix(fminus: &RowMatrix, n: usize) -> Result<RowMatrix> {
    if n == 0 {
        return Err(Error::InvalidOrder("truncation order must be at least 1".into()));
    }
    let n = n as i64;
    Ok(RowMatrix {
        zetas: fminus.zetas.iter().map(|z| z.truncate_first_var(-n, -1)).collect(),
        f: fminus.f.truncate_first_var(0, n),
    })
}

/// Solution of the per-slice coefficient system.
struct SliceSolution {
    /// `m × m × (n+1)`: row `i`, column `c`, degree `q`.
    coeffs: Vec<Complex64>,
    negative_energy: f64,
}

/// Builds the unitary for one slice from the coefficients
/// `γ[i][q−1]` of `t₁^{−q}` in `ζ₋,ᵢ` (`q = 1…n`) and `φ[q]` of `t₁^q` in
/// `f_m` (`q = 0…n`).
///
/// Unknowns are polynomials `x₁ … x_m` of degree `≤ n` such that
/// `ζ_i x_m − f x̃_i` (`i < m`) and `Σ ζ_i x_i + f x̃_m` have no negative
/// frequencies. Eliminating the `x_i` leaves one positive definite system
/// for the tail of `x_m`. The `m` basis solutions are the columns of a
/// matrix `V` with constant Gram matrix `V*V`; a constant right factor turns
/// `V` into a unitary and makes `F₋U` lower triangular at `t₁ = 0`.
fn solve_slice(gamma: &[Vec<Complex64>], phi: &[Complex64], n: usize) -> std::result::Result<SliceSolution, String> {
    let m = gamma.len() + 1;
    let t = DMatrix::from_fn(n, n, |r, k| if k >= r { phi[k - r] } else { ZERO });
    let hankel: Vec<CMatrix> = gamma
        .iter()
        .map(|g| DMatrix::from_fn(n, n, |r, k| if r + k + 2 <= n { g[r + k + 1] } else { ZERO }))
        .collect();
    let h0: Vec<CVector> = gamma.iter().map(|g| DVector::from_fn(n, |r, _| g[r])).collect();

    let t_solve = |b: &CMatrix| -> std::result::Result<CMatrix, String> {
        t.solve_upper_triangular(b).ok_or_else(|| "leading coefficient of f_m vanishes".to_string())
    };
    let tinv_h: Vec<CMatrix> = hankel.iter().map(t_solve).collect::<std::result::Result<_, _>>()?;
    let tinv_h0: Vec<CMatrix> = h0
        .iter()
        .map(|v| t_solve(&CMatrix::from_column_slice(n, 1, v.as_slice())))
        .collect::<std::result::Result<_, _>>()?;

    let mut a = t.conjugate();
    for (h, th) in hankel.iter().zip(&tinv_h) {
        a += h.adjoint() * th;
    }
    let lu = a.lu();

    // Basis solutions: x_j(0) = 1 for j < m−1, then x_m(0) = 1.
    let mut xs: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(m);
    for j in 0..m {
        let am0 = if j == m - 1 { ONE } else { ZERO };
        let mut rhs = CVector::zeros(n);
        for (i, (h, th0)) in hankel.iter().zip(&tinv_h0).enumerate() {
            if i == j {
                rhs -= h0[i].conjugate();
            }
            rhs -= h.adjoint() * th0.column(0) * am0;
        }
        let w = lu.solve(&rhs).ok_or_else(|| "reduced system is singular".to_string())?;
        let mut x = Vec::with_capacity(m);
        for (i, h) in hankel.iter().enumerate() {
            let v = &h0[i] * am0 + h * &w;
            let tail = t_solve(&CMatrix::from_column_slice(n, 1, v.as_slice()))?;
            let mut xi = Vec::with_capacity(n + 1);
            xi.push(if i == j { ONE } else { ZERO });
            xi.extend(tail.iter().map(|c| c.conj()));
            x.push(xi);
        }
        let mut xm = Vec::with_capacity(n + 1);
        xm.push(am0);
        xm.extend(w.iter().copied());
        x.push(xm);
        xs.push(x);
    }

    // Constant Gram matrix of V = (x₁, …, x_{m−1}, x̃_m).
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 { a.iter().zip(b).map(|(u, v)| u.conj() * v).sum() };
    let gram = DMatrix::from_fn(m, m, |j, k| {
        let mut s: Complex64 = (0..m - 1).map(|i| dot(&xs[j][i], &xs[k][i])).sum();
        s += dot(&xs[k][m - 1], &xs[j][m - 1]);
        s
    });
    // Value of F₋V at t₁ = 0.
    let g0 = DMatrix::from_fn(m, m, |i, j| {
        if i + 1 < m {
            xs[j][i][0]
        } else {
            let mut s = ZERO;
            for (ii, g) in gamma.iter().enumerate() {
                for q in 1..=n {
                    s += g[q - 1] * xs[j][ii][q];
                }
            }
            for q in 0..=n {
                s += phi[q] * xs[j][m - 1][q].conj();
            }
            s
        }
    });
    let gram_inv = gram.try_inverse().ok_or_else(|| "Gram matrix of the basis is singular".to_string())?;
    let target = &g0 * gram_inv * g0.adjoint();
    let target = (&target + target.adjoint()) * Complex64::new(0.5, 0.0);
    let ll = target
        .cholesky()
        .ok_or_else(|| "normalization matrix is not positive definite".to_string())?
        .l();
    let g0_inv = g0.try_inverse().ok_or_else(|| "origin value of F₋V is singular".to_string())?;
    let k = g0_inv * ll;

    let len = n + 1;
    let mut coeffs = vec![ZERO; m * m * len];
    for i in 0..m {
        for c in 0..m {
            let out = &mut coeffs[(i * m + c) * len..(i * m + c + 1) * len];
            for (j, x) in xs.iter().enumerate() {
                let kj = if i + 1 < m { k[(j, c)] } else { k[(j, c)].conj() };
                for (o, v) in out.iter_mut().zip(&x[i]) {
                    *o += v * kj;
                }
            }
        }
    }

    // Negative-frequency energy of the last row of F₋U, computed exactly by
    // coefficient convolution.
    let mut negative_energy = 0.0f64;
    for c in 0..m {
        let mut neg = 0.0;
        let mut total = 0.0;
        for s in -(n as i64)..=(n as i64) {
            let mut v = ZERO;
            for (i, g) in gamma.iter().enumerate() {
                let u = &coeffs[(i * m + c) * len..(i * m + c + 1) * len];
                for q in 1..=n {
                    let r = q as i64 + s;
                    if (0..=n as i64).contains(&r) {
                        v += g[q - 1] * u[r as usize];
                    }
                }
            }
            let last = &coeffs[((m - 1) * m + c) * len..((m - 1) * m + c + 1) * len];
            for q in 0..=n {
                let r = q as i64 - s;
                if (0..=n as i64).contains(&r) {
                    v += phi[q] * last[r as usize].conj();
                }
            }
            total += v.norm_sqr();
            if s < 0 {
                neg += v.norm_sqr();
            }
        }
        if total > 0.0 {
            negative_energy = negative_energy.max(neg / total);
        }
    }

    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err("non-finite coefficients".into());
    }
    Ok(SliceSolution { coeffs, negative_energy })
}

/// Builds `U_m` slice by slice from a truncated `F₋`.
pub fn build_unitary(fminus: &RowMatrix, n: usize) -> Result<StructuredUnitary> {
    let sizes = fminus.f.sizes().to_vec();
    let g1 = sizes[0];
    if n == 0 || n + 1 > g1 / 2 {
        return Err(Error::InvalidOrder(format!(
            "order {n} does not fit a leading grid of size {g1} (need 1 ≤ n < G₁/2)"
        )));
    }
    let m = fminus.m();
    let zspec: Vec<FirstVarSpectrum> = fminus.zetas.iter().map(|z| z.first_var_spectrum()).collect();
    let fspec = fminus.f.first_var_spectrum();
    let slices = fspec.slices();

    let solved: Vec<(std::result::Result<SliceSolution, String>, f64, f64)> = (0..slices)
        .into_par_iter()
        .map(|p| {
            let gamma: Vec<Vec<Complex64>> = zspec
                .iter()
                .map(|z| (1..=n as i64).map(|q| z.coeff(p, -q)).collect())
                .collect();
            let phi: Vec<Complex64> = (0..=n as i64).map(|q| fspec.coeff(p, q)).collect();
            let fnorm = phi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            (solve_slice(&gamma, &phi, n), phi[0].norm(), fnorm)
        })
        .collect();

    let mut coeffs = Vec::with_capacity(slices * m * m * (n + 1));
    let mut origin_abs = Vec::with_capacity(slices);
    let mut weak_slices = Vec::new();
    let mut negative_energy = 0.0f64;
    for (p, (res, f0, fnorm)) in solved.into_iter().enumerate() {
        let sol = res.map_err(|reason| Error::SliceSingular { slice: p, reason })?;
        coeffs.extend_from_slice(&sol.coeffs);
        negative_energy = negative_energy.max(sol.negative_energy);
        if f0 < WEAK_SLICE_RATIO * fnorm {
            weak_slices.push(p);
        }
        origin_abs.push(f0);
    }
    Ok(StructuredUnitary { m, n, sizes, coeffs, origin_abs, weak_slices, negative_energy })
}

/// Largest `‖U U* − I‖_F` and `|det U − 1|` over the grid.
pub fn unitary_defects(u: &MatrixFunction) -> (f64, f64) {
    let d = u.d();
    let id = CMatrix::identity(d, d);
    (0..u.len())
        .into_par_iter()
        .map(|p| {
            let v = u.at(p);
            ((&v * v.adjoint() - &id).norm(), (v.determinant() - ONE).norm())
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)))
}

/// Truncates the strictly lower entries `ξ_ij` of `M₁` to first-variable
/// degrees `≥ −(i−j)n`.
pub fn truncate_lower(m1: &LowerTriangularFactor, n: usize) -> MatrixFunction {
    let d = m1.m.d();
    let mut out = m1.m.clone();
    for i in 0..d {
        for j in 0..i {
            let lo = -(((i - j) * n) as i64);
            let g1 = out.sizes()[0] as i64;
            let t = out.entry(i, j).truncate_first_var(lo, g1);
            out.set_entry(i, j, t);
        }
    }
    out
}

/// `S₊,₁^{n} = M₁^{n} U₂^{n} U₃^{2n} ⋯ U_d^{(d−1)n}`.
pub fn factor_plus_one(s: &MatrixFunction, n: usize) -> Result<(MatrixFunction, StageOneReport)> {
    let d = s.d();
    let g1 = s.sizes()[0];
    if n == 0 {
        return Err(Error::InvalidOrder("truncation order must be at least 1".into()));
    }
    if d > 1 && (d - 1) * n + 1 > g1 / 2 {
        return Err(Error::InvalidOrder(format!(
            "stage order {} exceeds the leading grid of size {g1}; enlarge the grid or lower n",
            (d - 1) * n
        )));
    }
    let m1 = lower_upper_factor(s)?;
    let det_m1 = m1.m.det();
    let mut q = truncate_lower(&m1, n);
    let mut report = StageOneReport { order: n, ..Default::default() };

    for m in 2..=d {
        let order = (m - 1) * n;
        let row = build_row_matrix(&q, m)?;
        let (_, fminus) = split_row_matrix(&row);
        let fminus_n = truncate_row_matrix(&fminus, order)?;
        let u = build_unitary(&fminus_n, order)?;
        let um = u.to_matrix();
        let (unitarity_dev, det_dev) = unitary_defects(&um);
        report.unitaries.push(UnitaryStageReport {
            m,
            order,
            unitarity_dev,
            det_dev,
            negative_energy: u.negative_energy,
            min_origin_abs: u.origin_abs.iter().copied().fold(f64::INFINITY, f64::min),
            weak_slices: u.weak_slices.clone(),
        });
        q = q.mul(&u.embed(d));
    }

    let det_q = q.det();
    report.det_dev = det_q
        .samples()
        .iter()
        .zip(det_m1.samples())
        .map(|(a, b)| (a - b).norm() / b.norm())
        .fold(0.0, f64::max);
    report.residual = s.sub(&q.gram()).max_norm();
    Ok((q, report))
}
