//! The two-variable 2×2 benchmark `S = A A*`.

mod common;

use common::*;
use ndspec::driver::{full_factor, normalize_at_origin, sf_operator, FactorOptions};
use ndspec::harmonic::{CMatrix, MatrixFunction, MultiIndex};
use ndspec::io::load_spectrum;
use ndspec::jl_step::{factor_plus_one, lower_upper_factor};

#[test]
fn fixture_loads_as_two_variable_two_by_two() {
    let spec = load_spectrum(fixture("s8.json"), None).unwrap();
    assert_eq!(spec.grid.d(), 2);
    assert_eq!(spec.grid.dim(), 2);
    let s = spec.laurent.unwrap();
    let c0 = |i, j| s.entry(i, j).get(&MultiIndex::zero(2)).re;
    assert_eq!((c0(0, 0), c0(0, 1), c0(1, 1)), (30.0, 16.0, 43.0));
    assert!(spec.factor.unwrap().entries().iter().all(|e| e.is_analytic_type(0.0)));
}

#[test]
fn lower_factor_reproduces_listed_entries() {
    let (_, s) = benchmark(&[16, 16]);
    let m1 = lower_upper_factor(&s).unwrap();
    let back = m1.m.gram().coefficients();
    assert!((back.entry(0, 0).get(&MultiIndex::zero(2)).re - 30.0).abs() < 1e-12);
    assert!((back.entry(1, 1).get(&MultiIndex::zero(2)).re - 43.0).abs() < 1e-12);
    assert!((back.entry(0, 1).get(&MultiIndex::from([-1, 2])).re - 4.0).abs() < 1e-12);
}

#[test]
fn stage_one_preserves_determinant() {
    let (_, s) = benchmark(&[256, 16]);
    let (out, report) = sf_operator(&s, 40).unwrap();
    let m1 = lower_upper_factor(&s).unwrap();
    let rel = out.det().sub(&m1.m.det()).max_abs() / m1.m.det().max_abs();
    assert!(rel < 1e-12, "{rel}");
    assert!(report.residual < 1e-10 * s.max_norm());
}

#[test]
fn stage_one_converges_in_n() {
    // ‖S₊,₁^{n} − S₊,₁^{2n}‖ shrinks and falls below 1e−8 for large n.
    let (_, s) = benchmark(&[512, 16]);
    let dist = |n: usize| {
        let (a, _) = factor_plus_one(&s, n).unwrap();
        let (b, _) = factor_plus_one(&s, 2 * n).unwrap();
        a.sub(&b).entries().iter().map(|e| e.mean_sqr()).sum::<f64>().sqrt()
    };
    let d: Vec<f64> = [4, 16, 64].iter().map(|&n| dist(n)).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    assert!(d[2] < 1e-8, "{d:?}");
}

#[test]
fn converged_factor_recovers_a() {
    let (a, s) = benchmark(&[512, 128]);
    let (splus, report) = full_factor(&s, &FactorOptions::with_orders(&[100, 50])).unwrap();
    assert!(factor_error(&splus, &a) < 1e-10);
    let origin = splus.mean();
    let want = CMatrix::from_row_slice(2, 2, &[c(4.0), c(1.0), c(1.0), c(5.0)]);
    assert!((origin - want).norm() < 1e-10);
    assert!(report.residual_rel < 1e-12 && report.outer_gap < 1e-10 && report.det_drift < 1e-10);
}

#[test]
fn grid_refinement_is_stable() {
    let run = |grid: &[usize]| {
        let (_, s) = benchmark(grid);
        full_factor(&s, &FactorOptions::with_orders(&[100, 50])).unwrap().0.coefficients()
    };
    let coarse = run(&[512, 128]);
    let fine = run(&[512, 256]);
    assert!(coarse.max_diff(&fine) < 1e-10, "{}", coarse.max_diff(&fine));
}

#[test]
fn small_orders_are_inexact() {
    let (a, s) = benchmark(&[32, 32]);
    let errs: Vec<f64> = (1..=3)
        .map(|n| factor_error(&full_factor(&s, &FactorOptions::with_orders(&[n, n])).unwrap().0, &a))
        .collect();
    assert!(errs[0] > errs[2] && errs[2] > 1e-3, "{errs:?}");
}

#[test]
fn exact_factor_is_its_own_normalization() {
    let (a, _) = benchmark(&[16, 16]);
    let grid = MatrixFunction::evaluate(&a, &[16, 16]).unwrap();
    let normalized = normalize_at_origin(&grid).unwrap();
    assert!(normalized.max_diff(&grid) < 1e-13);
}
