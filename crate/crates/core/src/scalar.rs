//! Scalar outer factors on `T` and `T^N`.
//!
//! Everything is built from one Fourier multiplier: the conjugate-function
//! operator `𝒮₁` in the leading variable. For a positive `f`,
//! `√f · exp(i𝒮₁ log √f)` is the exponential of the one-sided projection of
//! `log √f`, hence outer in `t₁` and positive at `t₁ = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::GridFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorKind {
    FirstVariable,
    FullOuter,
}

#[derive(Clone, Debug)]
pub struct ScalarFactorization {
    pub fplus: GridFunction,
    pub kind: FactorKind,
    /// Grid mean of `log √f`; equals `log f₊(𝐨)` for the full outer factor.
    pub log_mean: f64,
    /// Smallest sample of `f` on each slice of the residual grid.
    pub slice_min: Vec<f64>,
}

/// Conjugate function in the leading variable: the multiplier `−i·sign(k)`
/// on first-variable coefficients.
///
/// Both `k = 0` and the Nyquist bin are annihilated. The Nyquist harmonic of
/// a grid is real (`cos(πj)`) and has no conjugate partner on that grid;
/// dropping it keeps `𝒮₁` real-to-real, so `|√f·exp(i𝒮₁ log √f)|² = f`
/// holds to rounding. The imaginary part of the result is discarded.
pub fn conjugate_first_var(h: &GridFunction) -> GridFunction {
    let g1 = h.sizes().first().copied().unwrap_or(1) as i64;
    let nyquist = if g1 % 2 == 0 { g1 / 2 } else { i64::MAX };
    let out = h.map_first_var(|k, c| {
        if k == 0 || k == nyquist {
            Complex64::default()
        } else {
            c * Complex64::new(0.0, -(k.signum() as f64))
        }
    });
    out.map(|v| Complex64::new(v.re, 0.0))
}

/// Rejects nonpositive or non-finite samples; the imaginary part of `f` is
/// ignored.
fn check_positive(f: &GridFunction) -> Result<()> {
    match f.samples().iter().position(|v| !(v.re > 0.0 && v.re.is_finite())) {
        Some(index) => Err(Error::NotPositive { index }),
        None => Ok(()),
    }
}

fn log_sqrt(f: &GridFunction) -> GridFunction {
    f.map(|v| Complex64::new(0.5 * v.re.ln(), 0.0))
}

fn slice_minima(f: &GridFunction) -> Vec<f64> {
    let g1 = f.sizes().first().copied().unwrap_or(1);
    let rest = f.len() / g1;
    (0..rest)
        .map(|p| (0..g1).map(|j| f.samples()[j * rest + p].re).fold(f64::INFINITY, f64::min))
        .collect()
}

/// Replaces samples below `eps` by `eps`. Opt-in regularization for
/// exploratory runs on spectra that touch zero; never applied implicitly.
pub fn apply_floor(f: &GridFunction, eps: f64) -> GridFunction {
    f.map(|v| Complex64::new(v.re.max(eps), 0.0))
}

/// `f₊,₁ = √f · exp(i𝒮₁ log √f)`, computed slice by slice in `t₁`.
pub fn outer_factor_first_var(f: &GridFunction) -> Result<ScalarFactorization> {
    check_positive(f)?;
    let h = log_sqrt(f);
    let phase = conjugate_first_var(&h);
    let fplus = h.zip_map(&phase, |a, b| Complex64::new(a.re, b.re).exp());
    Ok(ScalarFactorization {
        fplus,
        kind: FactorKind::FirstVariable,
        log_mean: h.mean().re,
        slice_min: slice_minima(f),
    })
}

/// One-dimensional outer factor, normalized positive at the origin.
pub fn outer_factor_1d(f: &GridFunction) -> Result<ScalarFactorization> {
    if f.dim() != 1 {
        return Err(Error::Shape(format!("expected a function on T, got dimension {}", f.dim())));
    }
    outer_factor_first_var(f)
}

/// Mean of `log √f` over the first `k` axes, a function of the remaining ones.
pub fn check_function(f: &GridFunction, k: usize) -> Result<GridFunction> {
    if k == 0 || k >= f.dim().max(1) {
        return Err(Error::Shape(format!("check function index {k} out of range for dimension {}", f.dim())));
    }
    check_positive(f)?;
    Ok(log_sqrt(f).mean_leading(k))
}

/// Full outer factor on `T^N`:
/// `f₊ = f₊,₁ · Π_{k=1}^{N−1} exp(i𝒮(f̌_k))`, where `𝒮` is the conjugate
/// operator in the leading variable of `f̌_k`, i.e. in `t_{k+1}`.
pub fn outer_factor_full(f: &GridFunction) -> Result<ScalarFactorization> {
    let first = outer_factor_first_var(f)?;
    let n = f.dim();
    let h = log_sqrt(f);
    let mut fplus = first.fplus;
    for k in 1..n {
        let check = h.mean_leading(k);
        let phase = conjugate_first_var(&check).map(|v| Complex64::new(0.0, v.re).exp());
        let phase = phase.broadcast_leading(&f.sizes()[..k]);
        fplus = fplus.mul(&phase);
    }
    Ok(ScalarFactorization {
        fplus,
        kind: FactorKind::FullOuter,
        log_mean: first.log_mean,
        slice_min: first.slice_min,
    })
}
