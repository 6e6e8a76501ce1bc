//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use ndspec::driver::{default_grid, full_factor, normalize_at_origin, FactorOptions, FactorizationReport};
use ndspec::harmonic::{LaurentMatrix, LaurentTable, MatrixFunction, MultiIndex};
use ndspec::io::{spectrum_from_document, SpectrumDocument};
use ndspec::random::{seeded_outer_factor, OuterSpec};
use num_complex::Complex64;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn benchmark_document() -> SpectrumDocument {
    let text = std::fs::read_to_string(fixture("s8.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// The factor `A` and spectrum `S = A A*` of the two-variable benchmark on
/// the given grid.
pub fn benchmark(sizes: &[usize]) -> (LaurentMatrix, MatrixFunction) {
    let doc = benchmark_document();
    let spec = spectrum_from_document(&doc, Some(sizes)).unwrap();
    (spec.factor.unwrap(), spec.grid)
}

/// Max coefficient error of a computed factor against an exact one, after
/// normalizing the exact one at the origin.
pub fn factor_error(computed: &MatrixFunction, exact: &LaurentMatrix) -> f64 {
    let exact = MatrixFunction::evaluate(exact, computed.sizes()).unwrap();
    let exact = normalize_at_origin(&exact).unwrap();
    computed.coefficients().max_diff(&exact.coefficients())
}

/// Own half-plane predicate: the first nonzero index is positive.
pub fn in_halfplane(k: &[i64]) -> bool {
    k.iter().find(|&&x| x != 0).is_none_or(|&x| x > 0)
}

// ---------------------------------------------------------------------------
// Fejér–Riesz by root reflection.

fn horner(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Roots of `Σ p_k z^k` by Durand–Kerner, polished with Newton steps.
pub fn poly_roots(p: &[Complex64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    let lead = p[n];
    let monic: Vec<Complex64> = p.iter().map(|&a| a / lead).collect();
    let radius = 1.0 + monic[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(radius * 0.9, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = horner(&monic, z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-16 {
            break;
        }
    }
    let deriv: Vec<Complex64> = (1..=n).map(|k| monic[k] * k as f64).collect();
    for r in &mut z {
        for _ in 0..3 {
            let d = horner(&deriv, *r);
            if d.norm() > 0.0 {
                *r -= horner(&monic, *r) / d;
            }
        }
    }
    z
}

/// Outer factor of a positive trigonometric polynomial on `T`, given its
/// coefficients `c_{−m}, …, c_m`: keep the roots of `z^m f(z)` outside the
/// unit disk and fix the constant so that `|f₊|² = f` and `f₊(0) > 0`.
pub fn fejer_riesz(coeffs: &[Complex64]) -> Vec<Complex64> {
    let m = (coeffs.len() - 1) / 2;
    let roots = poly_roots(coeffs);
    let outside: Vec<Complex64> = roots.into_iter().filter(|r| r.norm() > 1.0).collect();
    assert_eq!(outside.len(), m, "roots must pair across the circle");
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for r in &outside {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (k, &a) in poly.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= a * r;
        }
        poly = next;
    }
    // f(1) = |f₊(1)|², with f(1) = Σ c_k.
    let f1: f64 = coeffs.iter().map(|v| v.re).sum();
    let scale = (f1 / horner(&poly, c(1.0)).norm_sqr()).sqrt();
    let phase = poly[0].conj() / poly[0].norm();
    poly.iter().map(|&a| a * phase * scale).collect()
}

// ---------------------------------------------------------------------------
// Linear prediction by normal equations.

/// Autocovariance `Γ(h) = C_h{S}` of a 2×2 spectrum given by its factor.
fn autocov(s: &LaurentMatrix, h: i64) -> DMatrix<Complex64> {
    DMatrix::from_fn(2, 2, |i, j| s.entry(i, j).get(&MultiIndex::from([h])))
}

/// One-step prediction error variances of `X` from `K + 1` past values of
/// `X` alone (`σ²`) and of `(X, Y)` (`Σ²`).
pub fn prediction_errors(s: &LaurentMatrix, lags: usize) -> (f64, f64) {
    let solve = |channels: &[usize]| {
        let q = channels.len();
        let size = q * (lags + 1);
        // W = (Z_n, Z_{n−1}, …), E[Z_{n−i} Z_{n−j}*] = Γ(j − i).
        let r = DMatrix::from_fn(size, size, |a, b| {
            let (i, ci) = (a / q, channels[a % q]);
            let (j, cj) = (b / q, channels[b % q]);
            autocov(s, j as i64 - i as i64)[(ci, cj)]
        });
        // E[Z_{n−i} X_{n+1}*] = Γ(−i − 1)[·, 0].
        let rhs = DMatrix::from_fn(size, 1, |a, _| {
            let (i, ci) = (a / q, channels[a % q]);
            autocov(s, -(i as i64) - 1)[(ci, 0)]
        });
        let chol = r.cholesky().expect("positive definite covariance");
        let sol = chol.solve(&rhs);
        autocov(s, 0)[(0, 0)].re - (rhs.adjoint() * sol)[(0, 0)].re
    };
    (solve(&[0]), solve(&[0, 1]))
}

// ---------------------------------------------------------------------------
// Random factorization suite.

#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub spec: OuterSpec,
    pub orders: Vec<usize>,
}

impl Instance {
    pub fn label(&self) -> String {
        format!("seed {} d={} N={} deg={}", self.seed, self.spec.d, self.spec.dim, self.spec.degree)
    }
}

pub const MARGIN: f64 = 0.1;

/// 52 instances covering `d ∈ {1,…,4}`, `N ∈ {1,2,3}`, degree ≤ 4 (≤ 2 in
/// three variables, to bound the run time).
pub fn random_suite() -> Vec<Instance> {
    let mut out = Vec::new();
    let mut seed = 1000;
    for i in 0..20 {
        let d = 1 + i % 4;
        let degree = 1 + (i / 4) % 4;
        out.push(Instance { seed, spec: OuterSpec { d, dim: 1, degree, margin: MARGIN }, orders: vec![40] });
        seed += 1;
    }
    for i in 0..22 {
        let d = 1 + i % 4;
        let degree = 1 + (i / 3) % 4;
        let n = if d == 4 { 20 } else { 24 };
        out.push(Instance { seed, spec: OuterSpec { d, dim: 2, degree, margin: MARGIN }, orders: vec![n, n] });
        seed += 1;
    }
    for (i, d) in [1, 2, 2, 3, 1, 2, 3, 2, 1, 2].into_iter().enumerate() {
        let degree = 1 + i % 2;
        out.push(Instance { seed, spec: OuterSpec { d, dim: 3, degree, margin: MARGIN }, orders: vec![12; 3] });
        seed += 1;
    }
    out
}

pub struct Outcome {
    pub instance: Instance,
    pub report: FactorizationReport,
    pub error: f64,
    pub scale: f64,
}

pub fn run_instance(inst: &Instance) -> Outcome {
    let b = seeded_outer_factor(inst.seed, &inst.spec);
    let grid = default_grid(&b.degrees(), &inst.orders, inst.spec.d);
    let bg = MatrixFunction::evaluate(&b, &grid).unwrap();
    let s = bg.gram();
    let (splus, report) = full_factor(&s, &FactorOptions::with_orders(&inst.orders))
        .unwrap_or_else(|f| panic!("{}: {}", inst.label(), f.error));
    let error = factor_error(&splus, &b);
    Outcome { instance: inst.clone(), report, error, scale: s.max_norm() }
}

// ---------------------------------------------------------------------------
// Small Laurent helpers.

pub fn table1(terms: &[(i64, f64)]) -> LaurentTable {
    LaurentTable::from_terms(1, terms.iter().map(|&(k, v)| ([k], c(v))))
}

pub fn table2(terms: &[((i64, i64), f64)]) -> LaurentTable {
    LaurentTable::from_terms(2, terms.iter().map(|&((a, b), v)| ([a, b], c(v))))
}
