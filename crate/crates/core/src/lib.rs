//! Computational model of the stabilized infinite tensor product of `C0(R)`.
//!
//! * [`fnalg`]: scalar functions in normal form (bumps, modulations).
//! * [`measures`]: 1-D and product probability measures, quadrature, sampling.
//! * [`tensor`]: elementary tensors with stabilizing tails and their algebra.
//! * [`chars`]: characters, product states, positive-definiteness checks.
//! * [`rep`]: matrix elements of diagonal operators in product representations.
//! * [`bm`]: level selection, tail verification and Monte Carlo decomposition checks.

pub mod bm;
pub mod chars;
pub mod error;
pub mod fnalg;
pub mod infprod;
pub mod measures;
pub mod rep;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
