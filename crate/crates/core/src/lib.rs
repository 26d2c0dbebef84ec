//! Numerical laboratory for bilinear Fourier multipliers modulated by wave
//! phases `e^{i(φ1(ξ) + φ2(η))} σ(ξ, η)`.
//!
//! The crate samples functions on periodic grids of `ℝ` or `ℝ²`, applies
//! linear and bilinear multipliers through a continuum-normalised FFT,
//! evaluates radial wave kernels by Bessel quadrature, and runs the
//! exponent experiments that probe when such operators are bounded from
//! `H^p × H^q` into `L^r` (or BMO).
//!
//! Module map:
//!
//! * [`lattice`]: grids, fields and the discrete Fourier calculus.
//! * [`symbols`]: dyadic partition, wave phases, symbol families, seminorm probes.
//! * [`operators`]: linear, bilinear and wave-bilinear multiplier application.
//! * [`norms`]: `L^p`, dyadic BMO, an `H¹` maximal surrogate, operator ratios.
//! * [`kernels`]: Bessel functions, quadrature, radial wave kernels.
//! * [`decomp`]: flag split, angular frame, Fourier-series symbol expansion.
//! * [`sharpness`]: test functions, the three lower-bound cases, upper-bound sweeps.
//! * [`harness`]: run configuration, record store and report emission.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomp;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod lattice;
pub mod norms;
pub mod operators;
pub mod sharpness;
pub mod symbols;

pub use error::{Error, Result};
pub use num_complex::Complex64;
