//! Periodic sampled functions on the polarization-angle circle.
//!
//! Polarization angles identify `λ` and `λ + π`, so every function here has
//! period `π`. Samples sit at `λ_j = j·π/n`. Off-node evaluation treats a
//! sampled function as constant on the cell `[λ_j − h/2, λ_j + h/2)`; with
//! that convention the integral of a product of shifted sampled functions is
//! exact and agrees with the Monte Carlo estimators in [`crate::epr`].
//!
//! All integrals use the normalized measure `dλ/π`, so the mean of a
//! constant is that constant.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::fft::{self, Direction};
use crate::{Error, Result};

pub const MIN_SAMPLES: usize = 8;

/// Uniform grid of `n` nodes on `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AngularGrid {
    n: usize,
}

impl AngularGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_SAMPLES {
            return Err(Error::InvalidGrid {
                n,
                min: MIN_SAMPLES,
            });
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self) -> f64 {
        PI
    }

    pub fn spacing(&self) -> f64 {
        PI / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * PI / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.node(j))
    }

    /// Index of the cell containing `angle`, after reduction mod π.
    #[inline]
    pub fn cell_of(&self, angle: f64) -> usize {
        let x = libm::floor(reduce(angle) / self.spacing() + 0.5) as usize;
        x % self.n
    }

    /// Harmonic order carried by DFT index `k` (negative above Nyquist).
    pub fn harmonic(&self, k: usize) -> i64 {
        if 2 * k <= self.n {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }
}

pub fn make_grid(n: usize) -> Result<AngularGrid> {
    AngularGrid::new(n)
}

/// Reduce an angle into `[0, π)`.
#[inline]
pub fn reduce(angle: f64) -> f64 {
    let r = angle - PI * libm::floor(angle / PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Real samples of a π-periodic function on an [`AngularGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledAngularFunction {
    grid: AngularGrid,
    values: Vec<f64>,
}

impl SampledAngularFunction {
    pub fn new(grid: AngularGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: AngularGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn constant(grid: AngularGrid, c: f64) -> Result<Self> {
        Self::new(grid, alloc::vec![c; grid.len()])
    }

    pub fn grid(&self) -> AngularGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Sample-and-hold evaluation at an arbitrary angle.
    #[inline]
    pub fn eval(&self, angle: f64) -> f64 {
        self.values[self.grid.cell_of(angle)]
    }

    /// Linear interpolation between nodes, periodic.
    pub fn interpolate(&self, angle: f64) -> f64 {
        let x = reduce(angle) / self.grid.spacing();
        let m = libm::floor(x);
        let s = x - m;
        let n = self.grid.len();
        let i = (m as usize) % n;
        let a = self.values[i];
        if s == 0.0 {
            return a;
        }
        (1.0 - s) * a + s * self.values[(i + 1) % n]
    }

    /// Quadrature under `dλ/π`: the rectangle rule `(1/n)·Σ f_j`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max))
    }

    /// Coefficients `c_k = (1/n)·Σ_j f_j·e^{−i2kλ_j}` in DFT order; index `k`
    /// carries harmonic [`AngularGrid::harmonic`]`(k)`.
    pub fn spectral(&self) -> Vec<Complex64> {
        let n = self.values.len() as f64;
        let mut buf: Vec<Complex64> = self
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft::transform(&mut buf, Direction::Forward);
        for c in &mut buf {
            *c /= n;
        }
        buf
    }

    /// Inverse of [`Self::spectral`]. The imaginary part of the synthesis is
    /// discarded, so coefficients should be Hermitian-symmetric.
    pub fn from_spectral(grid: AngularGrid, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        let mut buf = coeffs.to_vec();
        fft::transform(&mut buf, Direction::Inverse);
        Self::new(grid, buf.into_iter().map(|c| c.re).collect())
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.len(),
                right: other.grid.len(),
            });
        }
        Ok(())
    }
}

pub fn mean(f: &SampledAngularFunction) -> f64 {
    f.mean()
}

pub fn spectral(f: &SampledAngularFunction) -> Vec<Complex64> {
    f.spectral()
}

/// `C(α_m) = (1/n)·Σ_j f_j·g_{j−m}`, the discrete form of `∫ dλ/π f(λ)·g(λ−α)`.
///
/// Direct summation, so products of disjoint supports come out exactly zero.
/// [`autocorrelation`] is the `O(n log n)` route.
pub fn circular_correlate(
    f: &SampledAngularFunction,
    g: &SampledAngularFunction,
) -> Result<SampledAngularFunction> {
    f.check_same_grid(g)?;
    let n = f.grid.len();
    let values = (0..n)
        .map(|m| {
            (0..n)
                .map(|j| f.values[j] * g.values[(j + n - m) % n])
                .sum::<f64>()
                / n as f64
        })
        .collect();
    SampledAngularFunction::new(f.grid, values)
}

/// Autocorrelation computed from the power spectrum.
pub fn autocorrelation(f: &SampledAngularFunction) -> SampledAngularFunction {
    let power: Vec<Complex64> = f
        .spectral()
        .iter()
        .map(|c| Complex64::new(c.norm_sqr(), 0.0))
        .collect();
    SampledAngularFunction::from_spectral(f.grid, &power).expect("same grid")
}
