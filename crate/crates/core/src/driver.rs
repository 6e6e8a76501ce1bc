//! The N-variable recursion.
//!
//! Stage 1 factors `S` in `t₁`. Stage `l` takes the value `Ŝ` of the current
//! factor at `t₁ = … = t_{l−1} = 0` (the grid mean over those axes), factors
//! `Ŝ Ŝ*` in `t_l`, and multiplies the current factor by the unitary
//! `𝒰_l = Ŝ⁻¹ · 𝒮ℱ[Ŝ Ŝ*]`, which depends on `t_l, …, t_N` only. A final
//! constant unitary makes the value at the origin positive definite.

use std::fmt;
use std::time::Instant;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{unravel, CMatrix, LaurentMatrix, MatrixFunction};
use crate::jl_step::{factor_plus_one, unitary_defects, StageOneReport};

#[derive(Clone, Debug, Default)]
pub struct FactorOptions {
    /// Truncation order per variable, in the (possibly permuted) variable order.
    pub orders: Vec<usize>,
    /// `axis_order[i]` is the input axis used as the `i`-th variable.
    pub axis_order: Option<Vec<usize>>,
    /// Worker cap; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl FactorOptions {
    pub fn with_orders(orders: &[usize]) -> Self {
        FactorOptions { orders: orders.to_vec(), ..Default::default() }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct StageReport {
    /// Variable index, 1-based.
    pub l: usize,
    pub order: usize,
    pub leading: StageOneReport,
    /// `‖𝒰_l 𝒰_l* − I‖` over the reduced grid (stages `l ≥ 2`).
    pub correction_unitarity: Option<f64>,
    /// Relative deviation of `det(Ŝ_l Ŝ_l*)` from `exp` of the mean of
    /// `log det S` over the first `l` axes.
    pub det_drift: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Timings {
    pub stages_ms: Vec<f64>,
    pub total_ms: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FactorizationReport {
    /// Largest `‖S − S₊S₊*‖_F` over the grid.
    pub residual: f64,
    /// `residual` divided by the largest `‖S‖_F`.
    pub residual_rel: f64,
    /// Energy of the coefficients of `S₊` outside `H_N`, relative to the total.
    pub analytic_energy: f64,
    /// `|mean log|det S₊| − log|det S₊(𝐨)||`.
    pub outer_gap: f64,
    /// `|mean log det S − 2 mean log|det S₊||`.
    pub logdet_gap: f64,
    /// Largest unitarity defect among all `U_m` and `𝒰_l`.
    pub unitarity_dev: f64,
    /// Largest `|det U_m − 1|`.
    pub det_dev: f64,
    /// Largest stage determinant drift.
    pub det_drift: f64,
    pub stage_orders: Vec<usize>,
    pub grid: Vec<usize>,
    pub axis_order: Vec<usize>,
    pub weak_slices: usize,
    pub stages: Vec<StageReport>,
    pub timings: Timings,
    /// Set when the run aborted; the fields above are then partial.
    pub failure: Option<String>,
}

impl FactorizationReport {
    /// Residual and analytic-type checks against a tolerance.
    pub fn passes(&self, tol: f64) -> bool {
        self.failure.is_none() && self.residual_rel <= tol && self.analytic_energy <= tol
    }

    /// [`passes`](Self::passes) plus the outer gap, for checking a given factor.
    pub fn passes_verification(&self, tol: f64) -> bool {
        self.passes(tol) && self.outer_gap <= tol
    }
}

/// An aborted factorization with whatever diagnostics were collected.
#[derive(Debug)]
pub struct FactorFailure {
    pub error: Error,
    pub report: Box<FactorizationReport>,
}

impl fmt::Display for FactorFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for FactorFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Factorization in the leading variable.
pub fn sf_operator(s: &MatrixFunction, n: usize) -> Result<(MatrixFunction, StageOneReport)> {
    factor_plus_one(s, n)
}

/// Value at `t₁ = … = t_l = 0` of a factor analytic in those variables.
pub fn hat_at_origin(splus: &MatrixFunction, l: usize) -> MatrixFunction {
    splus.mean_leading(l)
}

/// `𝒰 = Ŝ⁻¹ 𝒮ℱ[Ŝ Ŝ*]` on the reduced torus of `hat`.
pub fn unitary_correction(hat: &MatrixFunction, n: usize) -> Result<(MatrixFunction, StageOneReport)> {
    let sizes = hat.sizes().to_vec();
    let (phi, rep) = sf_operator(&hat.gram(), n)?;
    let inv = hat.try_map_points(|p, h| {
        h.clone().try_inverse().ok_or_else(|| Error::HatSingular { point: unravel(p, &sizes) })
    })?;
    Ok((inv.mul(&phi), rep))
}

/// Principal square root of a Hermitian positive semidefinite matrix.
fn hermitian_sqrt(a: &CMatrix) -> CMatrix {
    let herm = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let roots = eig.eigenvalues.map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * CMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Constant unitary `W = O⁻¹ √(O O*)` for the origin value `O`.
pub fn origin_unitary(origin: &CMatrix) -> Result<CMatrix> {
    let inv = origin.clone().try_inverse().ok_or(Error::OriginSingular)?;
    Ok(inv * hermitian_sqrt(&(origin * origin.adjoint())))
}

/// Right-multiplies by the constant unitary that makes `S₊(𝐨)` Hermitian
/// positive definite.
pub fn normalize_at_origin(splus: &MatrixFunction) -> Result<MatrixFunction> {
    let w = origin_unitary(&splus.mean())?;
    Ok(splus.mul_constant(&w))
}

/// Default orders for an exact trigonometric-polynomial input: per-axis
/// degree plus a margin of two.
pub fn default_orders(c: &LaurentMatrix) -> Vec<usize> {
    c.degrees().into_iter().map(|k| k + 2).collect()
}

/// Smallest power-of-two grid that holds the input unaliased and leaves
/// room for the largest stage order on every axis.
pub fn default_grid(degrees: &[usize], orders: &[usize], d: usize) -> Vec<usize> {
    degrees
        .iter()
        .zip(orders)
        .map(|(&k, &n)| (2 * k + 2).max(2 * (d.max(2) - 1) * n + 4).max(8).next_power_of_two())
        .collect()
}

fn run_in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads.and_then(|t| rayon::ThreadPoolBuilder::new().num_threads(t).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Full factorization `S = S₊ S₊*` on `T^N`, normalized at the origin.
pub fn full_factor(
    s: &MatrixFunction,
    opts: &FactorOptions,
) -> std::result::Result<(MatrixFunction, FactorizationReport), FactorFailure> {
    run_in_pool(opts.threads, || full_factor_inner(s, opts))
}

fn full_factor_inner(
    s: &MatrixFunction,
    opts: &FactorOptions,
) -> std::result::Result<(MatrixFunction, FactorizationReport), FactorFailure> {
    let start = Instant::now();
    let n_vars = s.dim();
    let perm = opts.axis_order.clone().unwrap_or_else(|| (0..n_vars).collect());
    let mut report = FactorizationReport {
        stage_orders: opts.orders.clone(),
        axis_order: perm.clone(),
        ..Default::default()
    };
    let fail = |error: Error, mut report: FactorizationReport| {
        report.failure = Some(error.to_string());
        report.timings.total_ms = start.elapsed().as_secs_f64() * 1e3;
        FactorFailure { error, report: Box::new(report) }
    };

    let mut sorted = perm.clone();
    sorted.sort_unstable();
    if sorted != (0..n_vars).collect::<Vec<_>>() {
        return Err(fail(Error::InvalidOrder(format!("axis order {perm:?} is not a permutation of 0..{n_vars}")), report));
    }
    if opts.orders.len() != n_vars {
        return Err(fail(
            Error::InvalidOrder(format!("{} orders given for {n_vars} variables", opts.orders.len())),
            report,
        ));
    }

    let s = s.permute_axes(&perm);
    let sizes = s.sizes().to_vec();
    report.grid = sizes.clone();

    let logdet = match log_det(&s) {
        Ok(v) => v,
        Err(e) => return Err(fail(e, report)),
    };

    let mut splus: Option<MatrixFunction> = None;
    for l in 1..=n_vars {
        let t0 = Instant::now();
        let order = opts.orders[l - 1];
        let step = if l == 1 {
            sf_operator(&s, order).map(|(f, rep)| (f, rep, None))
        } else {
            let current = splus.as_ref().expect("stage 1 ran");
            let hat = hat_at_origin(current, l - 1);
            unitary_correction(&hat, order).map(|(u, rep)| {
                let (unit, _) = unitary_defects(&u);
                let next = current.mul(&u.broadcast_leading(&sizes[..l - 1]));
                (next, rep, Some(unit))
            })
        };
        let (next, leading, correction_unitarity) = match step {
            Ok(v) => v,
            Err(e) => return Err(fail(e, report)),
        };
        let det_drift = stage_det_drift(&next, &logdet, l);
        for u in &leading.unitaries {
            report.unitarity_dev = report.unitarity_dev.max(u.unitarity_dev);
            report.det_dev = report.det_dev.max(u.det_dev);
            report.weak_slices += u.weak_slices.len();
        }
        if let Some(u) = correction_unitarity {
            report.unitarity_dev = report.unitarity_dev.max(u);
        }
        report.det_drift = report.det_drift.max(det_drift);
        report.stages.push(StageReport { l, order, leading, correction_unitarity, det_drift });
        report.timings.stages_ms.push(t0.elapsed().as_secs_f64() * 1e3);
        splus = Some(next);
    }

    let splus = match normalize_at_origin(&splus.expect("at least one variable")) {
        Ok(v) => v,
        Err(e) => return Err(fail(e, report)),
    };
    fill_diagnostics(&mut report, &s, &splus, &logdet);

    let inverse: Vec<usize> = (0..n_vars).map(|i| perm.iter().position(|&p| p == i).unwrap()).collect();
    let splus = splus.permute_axes(&inverse);
    report.timings.total_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((splus, report))
}

/// `log det S` pointwise (real part), rejecting non-positive determinants.
fn log_det(s: &MatrixFunction) -> Result<crate::harmonic::GridFunction> {
    let det = s.det();
    let sizes = s.sizes().to_vec();
    if let Some(p) = det.samples().iter().position(|v| !(v.re > 0.0 && v.re.is_finite())) {
        return Err(Error::NotPositiveDefinite { point: unravel(p, &sizes) });
    }
    Ok(det.map(|v| Complex64::new(v.re.ln(), 0.0)))
}

/// Compares `det(Ŝ_l Ŝ_l*)`, with `Ŝ_l` the mean of the stage-`l` factor
/// over its first `l` axes, against the exact value
/// `exp(mean_{t₁…t_l} log det S)`.
fn stage_det_drift(splus: &MatrixFunction, logdet: &crate::harmonic::GridFunction, l: usize) -> f64 {
    let hat = splus.mean_leading(l);
    let exact = logdet.mean_leading(l);
    (0..hat.len())
        .into_par_iter()
        .map(|p| {
            let h = hat.at(p);
            let got = (&h * h.adjoint()).determinant().re;
            let want = exact.samples()[p].re.exp();
            (got - want).abs() / want
        })
        .reduce(|| 0.0, f64::max)
}

fn fill_diagnostics(
    report: &mut FactorizationReport,
    s: &MatrixFunction,
    splus: &MatrixFunction,
    logdet: &crate::harmonic::GridFunction,
) {
    report.residual = s.sub(&splus.gram()).max_norm();
    report.residual_rel = report.residual / s.max_norm();
    let coeffs = splus.coefficients();
    let (outside, total) = coeffs.entries().iter().fold((0.0, 0.0), |(o, t), e| {
        (o + e.energy_outside_halfplane(), t + e.energy())
    });
    report.analytic_energy = if total > 0.0 { outside / total } else { 0.0 };

    let det_plus = splus.det();
    let mean_log_abs = det_plus.samples().iter().map(|v| v.norm().max(f64::MIN_POSITIVE).ln()).sum::<f64>() / det_plus.len() as f64;
    // A vanishing origin determinant (e.g. an inner factor t₁) would give an
    // infinite gap; floor it so reports stay finite.
    let origin = splus.mean().determinant().norm().max(f64::MIN_POSITIVE).ln();
    report.outer_gap = (mean_log_abs - origin).abs();
    report.logdet_gap = (logdet.mean().re - 2.0 * mean_log_abs).abs();
}

/// Diagnostics of a candidate factor `S₊` of `S`.
pub fn verify(s: &MatrixFunction, splus: &MatrixFunction) -> Result<FactorizationReport> {
    if s.sizes() != splus.sizes() || s.d() != splus.d() {
        return Err(Error::Shape(format!(
            "spectrum is {}×{} on {:?}, factor is {}×{} on {:?}",
            s.d(),
            s.d(),
            s.sizes(),
            splus.d(),
            splus.d(),
            splus.sizes()
        )));
    }
    let mut report = FactorizationReport {
        grid: s.sizes().to_vec(),
        axis_order: (0..s.dim()).collect(),
        ..Default::default()
    };
    // A vanishing determinant makes the log-det gap large, not an error.
    let logdet = s.det().map(|v| Complex64::new(v.norm().max(f64::MIN_POSITIVE).ln(), 0.0));
    fill_diagnostics(&mut report, s, splus, &logdet);
    Ok(report)
}
