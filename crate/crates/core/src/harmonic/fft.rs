//! Axis-wise FFTs over row-major grids.
//!
//! Forward transforms use the kernel `exp(-2πi jk/G)` without scaling;
//! inverse transforms use `exp(+2πi jk/G)` without scaling. Callers apply
//! the `1/G` factor that turns a forward transform into Fourier
//! coefficients.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

/// Lines per parallel work item.
const BATCH: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

fn plan(len: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    let d = match dir {
        Direction::Forward => FftDirection::Forward,
        Direction::Inverse => FftDirection::Inverse,
    };
    planner.plan_fft(len, d)
}

/// Transforms a single contiguous line in place.
pub fn fft_line(line: &mut [Complex64], dir: Direction) {
    if line.len() <= 1 {
        return;
    }
    plan(line.len(), dir).process(line);
}

/// Transforms every line of `data` along `axis`, in place.
pub fn fft_axis(data: &mut [Complex64], sizes: &[usize], axis: usize, dir: Direction) {
    let len = sizes[axis];
    if len <= 1 {
        return;
    }
    let stride: usize = sizes[axis + 1..].iter().product();
    let outer: usize = sizes[..axis].iter().product();
    let fft = plan(len, dir);

    if stride == 1 {
        data.par_chunks_mut(len * BATCH).for_each(|chunk| fft.process(chunk));
        return;
    }

    let mut lines = gather_lines(data, len, stride, outer);
    lines
        .par_chunks_mut(len * BATCH)
        .for_each(|chunk| fft.process(chunk));
    scatter_lines(&lines, data, len, stride, outer);
}

/// Transforms along every axis.
pub fn fftn(data: &mut [Complex64], sizes: &[usize], dir: Direction) {
    for axis in 0..sizes.len() {
        fft_axis(data, sizes, axis, dir);
    }
}

/// Copies the lines along one axis into a contiguous line-major buffer.
/// Line `o * stride + s` holds the samples `o*len*stride + j*stride + s`.
pub fn gather_lines(data: &[Complex64], len: usize, stride: usize, outer: usize) -> Vec<Complex64> {
    let mut lines = vec![Complex64::default(); data.len()];
    for o in 0..outer {
        let base = o * len * stride;
        for j in 0..len {
            let row = &data[base + j * stride..base + (j + 1) * stride];
            for (s, v) in row.iter().enumerate() {
                lines[(o * stride + s) * len + j] = *v;
            }
        }
    }
    lines
}

/// Inverse of [`gather_lines`].
pub fn scatter_lines(lines: &[Complex64], data: &mut [Complex64], len: usize, stride: usize, outer: usize) {
    for o in 0..outer {
        let base = o * len * stride;
        for j in 0..len {
            let row = &mut data[base + j * stride..base + (j + 1) * stride];
            for (s, v) in row.iter_mut().enumerate() {
                *v = lines[(o * stride + s) * len + j];
            }
        }
    }
}

/// Maps an FFT bin to its index in the symmetric range `(-G/2, G/2]`.
pub fn bin_to_index(bin: usize, size: usize) -> i64 {
    if bin <= size / 2 {
        bin as i64
    } else {
        bin as i64 - size as i64
    }
}

/// Maps an index to its FFT bin, or `None` when it falls outside `(-G/2, G/2]`.
pub fn index_to_bin(k: i64, size: usize) -> Option<usize> {
    let half = (size / 2) as i64;
    let lo = if size % 2 == 0 { -half + 1 } else { -half };
    if k < lo || k > half {
        return None;
    }
    Some(k.rem_euclid(size as i64) as usize)
}
