//! Fourier analysis on the N-torus: grids, coefficient tables, the
//! half-plane order and first-variable coefficient surgery.

pub mod fft;
mod grid;
mod index;
mod matrix;
mod table;

pub use grid::{FirstVarSpectrum, GridFunction};
pub(crate) use grid::unravel;
pub use index::{halfplane_contains, MultiIndex};
pub use matrix::{CMatrix, LaurentMatrix, MatrixFunction};
pub use table::LaurentTable;
