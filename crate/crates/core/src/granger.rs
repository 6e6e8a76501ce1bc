//! Granger causality `Y → X` from spectral factors.
//!
//! With `f₊` the outer factor of `S₁₁` and `S⁺` the normalized matrix factor
//! of `S`, the `L`-step prediction errors are
//! `σ_L² = Σ_{k<L} |C_k{f₊}|²` (past of `X` only) and
//! `Σ_L² = Σ_{k<L} |C_k{S⁺₁₁}|² + |C_k{S⁺₁₂}|²` (past of both), and
//! `F = ln(σ/Σ)`. In two variables the sums run over the indices that
//! precede `(L, M)` in the half-plane order.

use serde::{Deserialize, Serialize};

use crate::driver::{full_factor, FactorOptions};
use crate::error::{Error, Result};
use crate::harmonic::{halfplane_contains, LaurentTable, MatrixFunction, MultiIndex};
use crate::scalar::outer_factor_full;

/// Boundary terms above this fraction of a sum trigger a truncation warning.
pub const BOUNDARY_RATIO: f64 = 1e-10;
/// Coefficients below this fraction of the largest define the default box.
pub const SUPPORT_RATIO: f64 = 1e-14;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CausalityResult {
    /// `ln(σ/Σ)`.
    pub value: f64,
    /// Restricted prediction error `σ`.
    pub sigma: f64,
    /// Joint prediction error `Σ`.
    #[serde(rename = "Sigma")]
    pub big_sigma: f64,
    pub horizon: Vec<i64>,
    /// Box `(K₁, K₂)` used for two-variable sums.
    pub truncation: Option<(i64, i64)>,
    /// Largest ratio of box-boundary contributions to the corresponding sum.
    pub boundary_ratio: f64,
    pub warnings: Vec<String>,
}

struct Factors {
    fplus: LaurentTable,
    s11: LaurentTable,
    s12: LaurentTable,
}

fn factors(s: &MatrixFunction, opts: &FactorOptions) -> Result<Factors> {
    if s.d() != 2 {
        return Err(Error::Shape(format!("causality needs a 2×2 spectrum, got {}×{}", s.d(), s.d())));
    }
    let fplus = outer_factor_full(s.entry(0, 0)).map_err(|e| match e {
        Error::NotPositive { index } => Error::NotPositiveDefinite { point: crate::harmonic::unravel(index, s.sizes()) },
        other => other,
    })?;
    let (splus, _) = full_factor(s, opts).map_err(|f| f.error)?;
    Ok(Factors {
        fplus: fplus.fplus.coefficients(),
        s11: splus.entry(0, 0).coefficients(),
        s12: splus.entry(0, 1).coefficients(),
    })
}

fn finish(sigma2: f64, big2: f64, horizon: Vec<i64>, truncation: Option<(i64, i64)>, boundary_ratio: f64) -> CausalityResult {
    let sigma = sigma2.sqrt();
    let big_sigma = big2.sqrt();
    let mut warnings = Vec::new();
    if boundary_ratio > BOUNDARY_RATIO {
        warnings.push(format!(
            "truncation box boundary carries {boundary_ratio:.3e} of the sum; enlarge the box"
        ));
    }
    if sigma < big_sigma {
        warnings.push(format!("restricted error {sigma:.6e} is below the joint error {big_sigma:.6e}"));
    }
    CausalityResult {
        value: (sigma / big_sigma).ln(),
        sigma,
        big_sigma,
        horizon,
        truncation,
        boundary_ratio,
        warnings,
    }
}

/// `F^L_{Y→X}` for a 2×2 spectrum on `T`.
pub fn granger_1d(s: &MatrixFunction, l: usize, opts: &FactorOptions) -> Result<CausalityResult> {
    if s.dim() != 1 {
        return Err(Error::Shape(format!("expected a spectrum on T, got dimension {}", s.dim())));
    }
    if l == 0 {
        return Err(Error::InvalidOrder("horizon must be positive".into()));
    }
    let f = factors(s, opts)?;
    let g = s.sizes()[0] as i64;
    let mut warnings_extra = Vec::new();
    let top = (l as i64).min(g / 2 + 1);
    if top < l as i64 {
        warnings_extra.push(format!("horizon {l} exceeds the grid; sums stop at k = {}", top - 1));
    }
    let mut sigma2 = 0.0;
    let mut big2 = 0.0;
    for k in 0..top {
        let k = MultiIndex::from([k]);
        sigma2 += f.fplus.get(&k).norm_sqr();
        big2 += f.s11.get(&k).norm_sqr() + f.s12.get(&k).norm_sqr();
    }
    let mut out = finish(sigma2, big2, vec![l as i64], None, 0.0);
    out.warnings.extend(warnings_extra);
    Ok(out)
}

/// Indices `(k, l)` in `H₂` with `(L − k, M − l) ∈ H₂ \ {0}`, inside the box
/// `0 ≤ k ≤ K₁`, `|l| ≤ K₂`.
pub fn index_set_2d(horizon: (i64, i64), bx: (i64, i64)) -> Vec<(i64, i64)> {
    let (ll, mm) = horizon;
    let mut out = Vec::new();
    for k in 0..=bx.0 {
        for l in -bx.1..=bx.1 {
            let rest = [ll - k, mm - l];
            if halfplane_contains(&[k, l]) && halfplane_contains(&rest) && rest != [0, 0] {
                out.push((k, l));
            }
        }
    }
    out
}

/// Smallest box holding every coefficient above [`SUPPORT_RATIO`] of the
/// largest one.
fn significant_box(tables: &[&LaurentTable]) -> (i64, i64) {
    let max = tables.iter().map(|t| t.max_abs()).fold(0.0, f64::max);
    let mut k1 = 0;
    let mut k2 = 0;
    for t in tables {
        for (k, v) in t.iter() {
            if v.norm() >= SUPPORT_RATIO * max {
                let s = k.as_slice();
                k1 = k1.max(s[0]);
                k2 = k2.max(s[1].abs());
            }
        }
    }
    (k1, k2)
}

/// `F^{LM}_{Y→X}` for a 2×2 spectrum on `T²`.
pub fn granger_2d(
    s: &MatrixFunction,
    horizon: (i64, i64),
    bx: Option<(i64, i64)>,
    opts: &FactorOptions,
) -> Result<CausalityResult> {
    if s.dim() != 2 {
        return Err(Error::Shape(format!("expected a spectrum on T², got dimension {}", s.dim())));
    }
    let f = factors(s, opts)?;
    let bx = bx.unwrap_or_else(|| significant_box(&[&f.fplus, &f.s11, &f.s12]));
    let (g1, g2) = (s.sizes()[0] as i64, s.sizes()[1] as i64);
    if bx.0 > g1 / 2 || bx.1 > g2 / 2 - 1 {
        return Err(Error::Alias { axis: if bx.0 > g1 / 2 { 0 } else { 1 }, index: bx.0.max(bx.1), size: g1.max(g2) as usize });
    }
    let mut sigma2 = 0.0;
    let mut big2 = 0.0;
    let mut edge_sigma = 0.0;
    let mut edge_big = 0.0;
    for (k, l) in index_set_2d(horizon, bx) {
        let idx = MultiIndex::from([k, l]);
        let a = f.fplus.get(&idx).norm_sqr();
        let b = f.s11.get(&idx).norm_sqr() + f.s12.get(&idx).norm_sqr();
        sigma2 += a;
        big2 += b;
        if k == bx.0 || l.abs() == bx.1 {
            edge_sigma += a;
            edge_big += b;
        }
    }
    let ratio = |e: f64, t: f64| if t > 0.0 { e / t } else { 0.0 };
    let boundary = ratio(edge_sigma, sigma2).max(ratio(edge_big, big2));
    Ok(finish(sigma2, big2, vec![horizon.0, horizon.1], Some(bx), boundary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{CMatrix, GridFunction, LaurentMatrix};
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn diag(f: GridFunction, g: GridFunction) -> MatrixFunction {
        let z = GridFunction::zeros(f.sizes());
        MatrixFunction::new(2, vec![f, z.clone(), z, g]).unwrap()
    }

    #[test]
    fn independent_processes_have_zero_causality() {
        let f = GridFunction::from_angles(&[64], |a| c(2.0 + a[0].cos()));
        let g = GridFunction::from_angles(&[64], |a| c(3.0 + a[0].sin()));
        let s = diag(f, g);
        for l in [1, 2, 5] {
            let r = granger_1d(&s, l, &FactorOptions::with_orders(&[4])).unwrap();
            assert!(r.value.abs() < 1e-10, "{l} {r:?}");
        }
        let f = GridFunction::from_angles(&[32, 32], |a| c(2.0 + a[0].cos() * 0.5 + a[1].sin() * 0.3));
        let g = GridFunction::from_angles(&[32, 32], |a| c(3.0 + a[1].cos()));
        let s = diag(f, g);
        let r = granger_2d(&s, (1, 1), None, &FactorOptions::with_orders(&[4, 4])).unwrap();
        assert!(r.value.abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn constant_spectrum() {
        let cm = CMatrix::from_row_slice(2, 2, &[c(2.0), c(0.5), c(0.5), c(1.0)]);
        let s = MatrixFunction::constant(&cm, &[16, 16]);
        let r = granger_2d(&s, (1, 0), None, &FactorOptions::with_orders(&[2, 2])).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert!((r.sigma - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.truncation, Some((0, 0)));
    }

    #[test]
    fn index_set_examples() {
        let set = index_set_2d((1, 1), (1, 2));
        // k = 0: l ≥ 0 (any l works since L − k = 1 > 0); k = 1: l < 1.
        assert_eq!(set, vec![(0, 0), (0, 1), (0, 2), (1, -2), (1, -1), (1, 0)]);
        assert_eq!(index_set_2d((0, 2), (3, 3)), vec![(0, 0), (0, 1)]);
    }

    #[test]
    fn saturation_drives_value_to_zero() {
        let b = LaurentMatrix::new(
            2,
            vec![
                LaurentTable::from_terms(1, [([0], c(1.0)), ([1], c(0.5))]),
                LaurentTable::new(1),
                LaurentTable::from_terms(1, [([1], c(0.4))]),
                LaurentTable::constant(1, c(1.0)),
            ],
        )
        .unwrap();
        let s = MatrixFunction::evaluate(&b.mul(&b.adjoint()), &[256]).unwrap();
        let r = granger_1d(&s, 100, &FactorOptions::with_orders(&[60])).unwrap();
        let mean_s11 = s.entry(0, 0).mean().re;
        assert!((r.sigma * r.sigma - mean_s11).abs() < 1e-9);
        assert!((r.big_sigma * r.big_sigma - mean_s11).abs() < 1e-9);
        assert!(r.value.abs() < 1e-9);
    }
}
