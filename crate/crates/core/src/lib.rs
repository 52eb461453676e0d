//! Spectral laboratory kernels for the Schrödinger group on `R^m x T^n`.
//!
//! The crate is `no_std` and only needs `alloc`. It contains the pure
//! numerical machinery: lattice/grid geometry, Fourier transforms and
//! frequency projectors, Strichartz-ratio maximization, the strip
//! decomposition used for bilinear almost-orthogonality, the mixed
//! Lebesgue/counting measure computations, variation norms of sampled
//! paths, and a split-step cubic NLS integrator. File formats, the command
//! line front end, and parallel orchestration live in the `speclab` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bilinear;
pub mod counting;
pub mod domain;
mod error;
pub mod fft;
pub mod field;
pub mod lp;
pub mod nls;
pub mod rect;
pub mod rng;
pub mod strichartz;
pub mod variation;

pub use domain::{AxisKind, DomainSpec, Geometry};
pub use error::{Error, Result};
pub use field::{FreqField, SpatialField};
pub use rect::FreqRect;

pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
