use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::fft::{self, bin_to_index, index_to_bin, Direction};
use super::{LaurentTable, MultiIndex};
use crate::error::{Error, Result};

/// Complex samples on a uniform grid of the N-torus.
///
/// Sample `(j_1, …, j_N)` sits at `t_i = exp(2πi j_i / G_i)` and is stored
/// row-major, so the first axis varies slowest. A grid with no axes holds a
/// single value and represents a function on the zero-dimensional torus.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    sizes: Vec<usize>,
    samples: Vec<Complex64>,
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    for (axis, &g) in sizes.iter().enumerate() {
        if g == 0 || !g.is_power_of_two() {
            return Err(Error::Shape(format!(
                "grid size {g} on axis {axis} is not a power of two"
            )));
        }
    }
    Ok(())
}

impl GridFunction {
    pub fn new(sizes: Vec<usize>, samples: Vec<Complex64>) -> Result<Self> {
        check_sizes(&sizes)?;
        let total: usize = sizes.iter().product();
        if samples.len() != total {
            return Err(Error::Shape(format!(
                "{} samples supplied for a grid of {total} points",
                samples.len()
            )));
        }
        Ok(GridFunction { sizes, samples })
    }

    pub(crate) fn from_parts(sizes: Vec<usize>, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(samples.len(), sizes.iter().product::<usize>());
        GridFunction { sizes, samples }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        Self::constant(sizes, Complex64::default())
    }

    pub fn constant(sizes: &[usize], c: Complex64) -> Self {
        let total: usize = sizes.iter().product();
        GridFunction { sizes: sizes.to_vec(), samples: vec![c; total] }
    }

    /// Samples `f(θ_1, …, θ_N)` with `θ_i = 2π j_i / G_i`.
    pub fn from_angles(sizes: &[usize], f: impl Fn(&[f64]) -> Complex64 + Sync) -> Self {
        let total: usize = sizes.iter().product();
        let samples = (0..total)
            .into_par_iter()
            .map(|flat| {
                let theta: Vec<f64> = unravel(flat, sizes)
                    .iter()
                    .zip(sizes)
                    .map(|(&j, &g)| 2.0 * PI * j as f64 / g as f64)
                    .collect();
                f(&theta)
            })
            .collect();
        GridFunction { sizes: sizes.to_vec(), samples }
    }

    /// Samples `f(t_1, …, t_N)` at the torus points `t_i = exp(iθ_i)`.
    pub fn from_points(sizes: &[usize], f: impl Fn(&[Complex64]) -> Complex64 + Sync) -> Self {
        Self::from_angles(sizes, |theta| {
            let t: Vec<Complex64> = theta.iter().map(|&a| Complex64::from_polar(1.0, a)).collect();
            f(&t)
        })
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn at(&self, point: &[usize]) -> Complex64 {
        self.samples[ravel(point, &self.sizes)]
    }

    // ---- Fourier side -------------------------------------------------

    /// Discrete Fourier coefficients on the FFT bin layout, normalized by the
    /// number of grid points.
    pub fn coefficient_array(&self) -> Vec<Complex64> {
        let mut data = self.samples.clone();
        fft::fftn(&mut data, &self.sizes, Direction::Forward);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        data
    }

    /// Inverse of [`GridFunction::coefficient_array`].
    pub fn from_coefficient_array(sizes: &[usize], coeffs: Vec<Complex64>) -> Result<Self> {
        let mut data = coeffs;
        check_sizes(sizes)?;
        fft::fftn(&mut data, sizes, Direction::Inverse);
        GridFunction::new(sizes.to_vec(), data)
    }

    /// Fourier coefficients indexed in the symmetric range `(-G_i/2, G_i/2]`.
    pub fn coefficients(&self) -> LaurentTable {
        let arr = self.coefficient_array();
        let mut table = LaurentTable::new(self.dim());
        for (flat, c) in arr.into_iter().enumerate() {
            let bins = unravel(flat, &self.sizes);
            let k: Vec<i64> = bins.iter().zip(&self.sizes).map(|(&b, &g)| bin_to_index(b, g)).collect();
            table.insert(MultiIndex::new(k), c);
        }
        table
    }

    /// Samples the trigonometric polynomial `c` on the grid.
    pub fn evaluate(c: &LaurentTable, sizes: &[usize]) -> Result<Self> {
        check_sizes(sizes)?;
        if c.dim() != sizes.len() {
            return Err(Error::Shape(format!(
                "table of dimension {} evaluated on a {}-dimensional grid",
                c.dim(),
                sizes.len()
            )));
        }
        let total: usize = sizes.iter().product();
        let mut arr = vec![Complex64::default(); total];
        let mut bins = vec![0usize; sizes.len()];
        for (k, v) in c.iter() {
            for (axis, (&ki, &g)) in k.as_slice().iter().zip(sizes).enumerate() {
                bins[axis] = index_to_bin(ki, g).ok_or(Error::Alias { axis, index: ki, size: g })?;
            }
            arr[ravel(&bins, sizes)] += *v;
        }
        Self::from_coefficient_array(sizes, arr)
    }

    /// Per-line first-variable spectrum: `C_{1k}` at every residual grid point.
    pub fn first_var_spectrum(&self) -> FirstVarSpectrum {
        let g1 = self.sizes[0];
        let rest: usize = self.sizes[1..].iter().product();
        let mut lines = fft::gather_lines(&self.samples, g1, rest, 1);
        let scale = 1.0 / g1 as f64;
        lines.par_chunks_mut(g1).for_each(|line| {
            fft::fft_line(line, Direction::Forward);
            line.iter_mut().for_each(|c| *c *= scale);
        });
        FirstVarSpectrum { sizes: self.sizes.clone(), lines }
    }

    /// Expansion in the first variable: `(k, C_{1k}{f})` for every `k` in the
    /// symmetric range, each coefficient a function on the residual grid.
    pub fn first_var_coefficients(&self) -> Vec<(i64, GridFunction)> {
        let spec = self.first_var_spectrum();
        let g1 = self.sizes[0];
        let rest_sizes = self.sizes[1..].to_vec();
        let mut order: Vec<usize> = (0..g1).collect();
        order.sort_by_key(|&b| bin_to_index(b, g1));
        order
            .into_iter()
            .map(|b| {
                let samples = (0..spec.slices()).map(|p| spec.line(p)[b]).collect();
                (bin_to_index(b, g1), GridFunction::from_parts(rest_sizes.clone(), samples))
            })
            .collect()
    }

    /// Applies `op(k, c)` to every first-variable coefficient.
    pub fn map_first_var(&self, op: impl Fn(i64, Complex64) -> Complex64 + Sync) -> Self {
        let mut spec = self.first_var_spectrum();
        let g1 = self.sizes[0];
        spec.lines.par_chunks_mut(g1).for_each(|line| {
            for (b, c) in line.iter_mut().enumerate() {
                *c = op(bin_to_index(b, g1), *c);
            }
        });
        spec.into_grid()
    }

    /// The function with first-variable coefficients `k ↦ conj(C_{1,-k})`.
    pub fn tilde(&self) -> Self {
        let mut spec = self.first_var_spectrum();
        let g1 = self.sizes[0];
        spec.lines.par_chunks_mut(g1).for_each(|line| {
            let old = line.to_vec();
            for (b, c) in line.iter_mut().enumerate() {
                *c = old[(g1 - b) % g1].conj();
            }
        });
        spec.into_grid()
    }

    /// `(f₊, f₋)` carrying the first-variable coefficients `k ≥ 0` and `k < 0`.
    pub fn split_first_var(&self) -> (Self, Self) {
        let plus = self.map_first_var(|k, c| if k >= 0 { c } else { Complex64::default() });
        let minus = self.map_first_var(|k, c| if k < 0 { c } else { Complex64::default() });
        (plus, minus)
    }

    /// Keeps the first-variable coefficients with `lo ≤ k ≤ hi`.
    pub fn truncate_first_var(&self, lo: i64, hi: i64) -> Self {
        self.map_first_var(|k, c| if (lo..=hi).contains(&k) { c } else { Complex64::default() })
    }

    // ---- axis reductions ----------------------------------------------

    /// Mean over the first `k` axes; a function on the remaining axes.
    pub fn mean_leading(&self, k: usize) -> Self {
        let lead: usize = self.sizes[..k].iter().product();
        let rest: usize = self.sizes[k..].iter().product();
        let mut out = vec![Complex64::default(); rest];
        for block in self.samples.chunks(rest) {
            for (o, v) in out.iter_mut().zip(block) {
                *o += *v;
            }
        }
        let scale = 1.0 / lead as f64;
        out.iter_mut().for_each(|v| *v *= scale);
        GridFunction::from_parts(self.sizes[k..].to_vec(), out)
    }

    /// Repeats the function over additional leading axes.
    pub fn broadcast_leading(&self, lead_sizes: &[usize]) -> Self {
        let lead: usize = lead_sizes.iter().product();
        let mut samples = Vec::with_capacity(lead * self.len());
        for _ in 0..lead {
            samples.extend_from_slice(&self.samples);
        }
        let mut sizes = lead_sizes.to_vec();
        sizes.extend_from_slice(&self.sizes);
        GridFunction::from_parts(sizes, samples)
    }

    /// Reorders axes so that new axis `i` is old axis `perm[i]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Self {
        let n = self.dim();
        assert_eq!(perm.len(), n);
        let new_sizes: Vec<usize> = perm.iter().map(|&p| self.sizes[p]).collect();
        let mut out = vec![Complex64::default(); self.len()];
        let mut old = vec![0usize; n];
        for (flat, o) in out.iter_mut().enumerate() {
            let new_pt = unravel(flat, &new_sizes);
            for (i, &p) in perm.iter().enumerate() {
                old[p] = new_pt[i];
            }
            *o = self.samples[ravel(&old, &self.sizes)];
        }
        GridFunction::from_parts(new_sizes, out)
    }

    // ---- pointwise arithmetic -----------------------------------------

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64 + Sync) -> Self {
        GridFunction {
            sizes: self.sizes.clone(),
            samples: self.samples.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64 + Sync) -> Self {
        assert_eq!(self.sizes, other.sizes, "grid shape mismatch");
        GridFunction {
            sizes: self.sizes.clone(),
            samples: self
                .samples
                .par_iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|v| v * s)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Grid mean of `|f|²`.
    pub fn mean_sqr(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.len() as f64
    }

    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.len() as f64
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.sizes, other.sizes, "grid shape mismatch");
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// First-variable spectrum of a grid function, stored one line per residual
/// grid point. `line(p)[b]` is `C_{1k}` at residual point `p` for bin `b`.
#[derive(Clone, Debug)]
pub struct FirstVarSpectrum {
    sizes: Vec<usize>,
    lines: Vec<Complex64>,
}

impl FirstVarSpectrum {
    /// Wraps raw coefficient lines (one line of `sizes[0]` bins per residual point).
    pub fn from_lines(sizes: Vec<usize>, lines: Vec<Complex64>) -> Self {
        assert_eq!(lines.len(), sizes.iter().product::<usize>());
        FirstVarSpectrum { sizes, lines }
    }

    pub fn len_first(&self) -> usize {
        self.sizes[0]
    }

    pub fn slices(&self) -> usize {
        self.sizes[1..].iter().product()
    }

    pub fn line(&self, p: usize) -> &[Complex64] {
        let g1 = self.sizes[0];
        &self.lines[p * g1..(p + 1) * g1]
    }

    /// Coefficient of `t_1^k` at residual point `p`; zero outside the grid range.
    pub fn coeff(&self, p: usize, k: i64) -> Complex64 {
        match index_to_bin(k, self.sizes[0]) {
            Some(b) => self.line(p)[b],
            None => Complex64::default(),
        }
    }

    /// Synthesizes samples back from the (possibly modified) spectrum.
    pub fn into_grid(mut self) -> GridFunction {
        let g1 = self.sizes[0];
        let rest = self.slices();
        self.lines
            .par_chunks_mut(g1)
            .for_each(|line| fft::fft_line(line, Direction::Inverse));
        let mut samples = vec![Complex64::default(); self.lines.len()];
        fft::scatter_lines(&self.lines, &mut samples, g1, rest, 1);
        GridFunction::from_parts(self.sizes, samples)
    }
}

pub(crate) fn ravel(point: &[usize], sizes: &[usize]) -> usize {
    point.iter().zip(sizes).fold(0, |acc, (&j, &g)| acc * g + j)
}

pub(crate) fn unravel(mut flat: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; sizes.len()];
    for (o, &g) in out.iter_mut().zip(sizes).rev() {
        *o = flat % g;
        flat /= g;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Direct exponential-sum evaluation, independent of the FFT path.
    fn direct_eval(table: &LaurentTable, sizes: &[usize]) -> Vec<Complex64> {
        let total: usize = sizes.iter().product();
        (0..total)
            .map(|flat| {
                let pt = unravel(flat, sizes);
                table
                    .iter()
                    .map(|(k, v)| {
                        let phase: f64 = k
                            .as_slice()
                            .iter()
                            .zip(&pt)
                            .zip(sizes)
                            .map(|((&ki, &j), &g)| 2.0 * PI * ki as f64 * j as f64 / g as f64)
                            .sum();
                        v * Complex64::from_polar(1.0, phase)
                    })
                    .sum()
            })
            .collect()
    }

    fn random_table(rng: &mut ChaCha8Rng, sizes: &[usize], terms: usize) -> LaurentTable {
        let mut t = LaurentTable::new(sizes.len());
        for _ in 0..terms {
            let k: Vec<i64> = sizes
                .iter()
                .map(|&g| rng.gen_range(-(g as i64) / 2 + 1..=(g as i64) / 2))
                .collect();
            t.add_term(MultiIndex::new(k), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        t
    }

    #[test]
    fn constant_has_only_dc() {
        let f = GridFunction::constant(&[4, 8], c(2.5, -1.0));
        let t = f.coefficients().cleaned(1e-14);
        assert_eq!(t.len(), 1);
        assert!((t.get(&MultiIndex::zero(2)) - c(2.5, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn pure_harmonic_and_linearity() {
        let f = GridFunction::from_points(&[8, 8], |t| t[0]);
        let t = f.coefficients().cleaned(1e-13);
        assert_eq!(t.len(), 1);
        assert!((t.get(&MultiIndex::from([1, 0])) - c(1.0, 0.0)).norm() < 1e-14);

        let g = GridFunction::from_points(&[8, 8], |t| c(2.0, 0.0) + t[0] + t[0].inv());
        let t = g.coefficients().cleaned(1e-13);
        assert_eq!(t.len(), 3);
        assert!((t.get(&MultiIndex::from([0, 0])) - c(2.0, 0.0)).norm() < 1e-14);
        assert!((t.get(&MultiIndex::from([1, 0])) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((t.get(&MultiIndex::from([-1, 0])) - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn evaluate_constant_and_alias_error() {
        let t = LaurentTable::constant(2, c(5.0, 0.0));
        let f = GridFunction::evaluate(&t, &[4, 4]).unwrap();
        assert!(f.samples().iter().all(|v| (v - c(5.0, 0.0)).norm() < 1e-14));

        let wide = LaurentTable::from_terms(2, [([3, 0], c(1.0, 0.0))]);
        assert!(matches!(
            GridFunction::evaluate(&wide, &[4, 4]),
            Err(Error::Alias { axis: 0, index: 3, size: 4 })
        ));
        // Nyquist index belongs to the positive side only.
        let nyq = LaurentTable::from_terms(1, [([-2], c(1.0, 0.0))]);
        assert!(GridFunction::evaluate(&nyq, &[4]).is_err());
        let nyq = LaurentTable::from_terms(1, [([2], c(1.0, 0.0))]);
        assert!(GridFunction::evaluate(&nyq, &[4]).is_ok());
    }

    #[test]
    fn evaluate_matches_direct_exponential_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for sizes in [vec![8usize], vec![8, 4], vec![4, 4, 8]] {
            let table = random_table(&mut rng, &sizes, 6);
            let f = GridFunction::evaluate(&table, &sizes).unwrap();
            let direct = direct_eval(&table, &sizes);
            for (a, b) in f.samples().iter().zip(&direct) {
                assert!((a - b).norm() < 1e-12);
            }
            let back = f.coefficients();
            assert!(back.max_diff(&table) < 1e-12);
        }
    }

    #[test]
    fn first_var_examples() {
        // f = t1 g(t2)
        let sizes = [8usize, 4];
        let f = GridFunction::from_points(&sizes, |t| t[0] * (c(1.0, 0.0) + t[1] * 0.5));
        for (k, ck) in f.first_var_coefficients() {
            if k == 1 {
                let g = GridFunction::from_points(&[4], |t| c(1.0, 0.0) + t[0] * 0.5);
                assert!(ck.max_diff(&g) < 1e-14);
            } else {
                assert!(ck.max_abs() < 1e-14);
            }
        }
        // f independent of t1
        let f = GridFunction::from_points(&sizes, |t| t[1] * 3.0);
        for (k, ck) in f.first_var_coefficients() {
            if k == 0 {
                let g = GridFunction::from_points(&[4], |t| t[0] * 3.0);
                assert!(ck.max_diff(&g) < 1e-14);
            } else {
                assert!(ck.max_abs() < 1e-14);
            }
        }
    }

    #[test]
    fn first_var_reconstruction_matches_slicewise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sizes = [8usize, 4, 2];
        let f = GridFunction::evaluate(&random_table(&mut rng, &sizes, 10), &sizes).unwrap();
        let coeffs = f.first_var_coefficients();
        // Oracle: direct DFT along the first axis of each slice.
        let rest = 8;
        for p in 0..rest {
            for (k, ck) in &coeffs {
                let mut acc = Complex64::default();
                for j in 0..8 {
                    let ang = -2.0 * PI * (*k as f64) * j as f64 / 8.0;
                    acc += f.samples()[j * rest + p] * Complex64::from_polar(1.0, ang);
                }
                assert!((acc / 8.0 - ck.samples()[p]).norm() < 1e-13);
            }
        }
        // Reconstruction Σ t1^k C_{1k}.
        for j in 0..8 {
            let t1 = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 8.0);
            for p in 0..rest {
                let v: Complex64 = coeffs.iter().map(|(k, ck)| t1.powi(*k as i32) * ck.samples()[p]).sum();
                assert!((v - f.samples()[j * rest + p]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn tilde_examples() {
        let f = GridFunction::from_points(&[8, 4], |t| t[0]);
        let g = GridFunction::from_points(&[8, 4], |t| t[0].inv());
        assert!(f.tilde().max_diff(&g) < 1e-14);
        let real = GridFunction::from_angles(&[8, 4], |a| c(a[0].cos() + 2.0 * a[1].sin(), 0.0));
        assert!(real.tilde().max_diff(&real) < 1e-14);
    }

    #[test]
    fn split_and_truncate_examples() {
        let f = GridFunction::from_points(&[8], |t| t[0] + t[0].inv());
        let (p, m) = f.split_first_var();
        assert!(p.max_diff(&GridFunction::from_points(&[8], |t| t[0])) < 1e-14);
        assert!(m.max_diff(&GridFunction::from_points(&[8], |t| t[0].inv())) < 1e-14);

        let k = GridFunction::constant(&[8, 2], c(1.5, 0.5));
        let (p, m) = k.split_first_var();
        assert!(p.max_diff(&k) < 1e-14);
        assert!(m.max_abs() < 1e-14);
    }

    #[test]
    fn mean_and_broadcast() {
        let f = GridFunction::from_points(&[4, 8], |t| t[0] * 2.0 + t[1] + 1.0);
        let m = f.mean_leading(1);
        let expect = GridFunction::from_points(&[8], |t| t[0] + 1.0);
        assert!(m.max_diff(&expect) < 1e-14);
        let b = m.broadcast_leading(&[4]);
        assert_eq!(b.sizes(), &[4, 8]);
        assert!(b.mean_leading(1).max_diff(&m) < 1e-14);
        assert!((f.mean_leading(2).samples()[0] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn permute_axes_swaps_variables() {
        let f = GridFunction::from_points(&[4, 8], |t| t[0] + t[1] * t[1]);
        let g = f.permute_axes(&[1, 0]);
        let expect = GridFunction::from_points(&[8, 4], |t| t[1] + t[0] * t[0]);
        assert!(g.max_diff(&expect) < 1e-14);
        assert!(g.permute_axes(&[1, 0]).max_diff(&f) < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn parseval_and_involution(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sizes = [8usize, 4];
            let samples: Vec<Complex64> = (0..32).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let f = GridFunction::new(sizes.to_vec(), samples).unwrap();
            let coeff_energy = f.coefficients().energy();
            prop_assert!((coeff_energy - f.mean_sqr()).abs() <= 1e-10 * f.mean_sqr());
            prop_assert!(f.tilde().max_diff(&f.conj()) < 1e-12);
            prop_assert!(f.tilde().tilde().max_diff(&f) < 1e-12);
            let (p, m) = f.split_first_var();
            prop_assert!(p.add(&m).max_diff(&f) <= 1e-12 * f.max_abs());
            let lo = f.truncate_first_var(-3, -1);
            let hi = f.truncate_first_var(0, 2);
            prop_assert!(lo.add(&hi).max_diff(&f.truncate_first_var(-3, 2)) < 1e-12);
            prop_assert!(f.truncate_first_var(-3, 4).max_diff(&f) < 1e-12);
        }
    }
}
