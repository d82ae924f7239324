//! Numerical core for hidden-variable polarizer models and extended-space
//! operator checks.
//!
//! Everything here is pure computation over immutable inputs and builds
//! without `std` (only `alloc` is required). File formats, parallel drivers
//! and the command-line front end live in the `hiddenvar` crate.
//!
//! Module map:
//!
//! - [`grid`]: sampled functions on the polarization-angle circle `[0, π)`.
//! - [`polarizer`]: generalized Malus law, transfer-profile recovery,
//!   polarizer chains and the Stokes/Müller baseline.
//! - [`epr`]: local hidden-variable coincidence Monte Carlo and CHSH scores.
//! - [`twobody`]: free two-body Gaussian wavepackets, the time operator and
//!   the doubled in/out representation.
//! - [`oscillator`]: truncated Fock-basis operators `C`, `S` and phase tracking.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
mod fft;
mod linalg;
pub use linalg::CMatrix;
mod quadrature;

pub mod epr;
pub mod grid;
pub mod oscillator;
pub mod polarizer;
pub mod rng;
pub mod twobody;

pub use error::{Error, Result};
pub use num_complex::Complex64;
