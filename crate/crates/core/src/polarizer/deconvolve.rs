//! Recovery of a symmetric transfer profile from its pair law.
//!
//! The autocorrelation of `p` has spectrum `|p̂_k|²`, so a target `M` fixes
//! the magnitudes of `p̂` and nothing else. Stage one takes the even
//! representative with nonnegative spectrum, `p̂_k = √M̂_k`, which peaks at
//! `λ = 0`. When that violates `0 ≤ p ≤ 1`, stage two runs projected
//! gradient descent on `mean((p ⋆ p − M)²)` inside the box, starting from the
//! clipped spectral solution, with a constant step.

use alloc::boxed::Box;
use alloc::vec::Vec;
use num_complex::Complex64;
use thiserror::Error;

use super::{MalusTarget, TransferProfile};
use crate::grid::{self, AngularGrid, SampledAngularFunction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Max-norm tolerance on `p ⋆ p − M`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Gradient step relative to `1/M̂₀`.
    pub step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 10_000,
            step: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Spectral,
    ProjectedGradient,
}

/// Outcome of a deconvolution run, converged or not.
#[derive(Debug, Clone, PartialEq)]
pub struct Deconvolution {
    pub profile: TransferProfile,
    /// `max |p ⋆ p − M|` of `profile`.
    pub residual: f64,
    pub iterations: usize,
    pub stage: Stage,
    pub converged: bool,
    /// How far the stage-one spectral solution left `[0, 1]` (0 if inside).
    pub spectral_box_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("target has imaginary spectral part {imag:e} at harmonic {harmonic}: not even")]
    NotEven { harmonic: i64, imag: f64 },
    #[error("target is not an autocorrelation: spectral coefficient {coefficient:e} at harmonic {harmonic} is negative")]
    Infeasible { harmonic: i64, coefficient: f64 },
    #[error("no profile within tolerance after {} iterations (best residual {:e})", best.iterations, best.residual)]
    Convergence { best: Box<Deconvolution> },
}

/// Solve `p ⋆ p = M` for `0 ≤ p ≤ 1`, failing unless the residual meets
/// `options.tolerance`.
pub fn solve_profile(
    target: &MalusTarget,
    options: &SolverOptions,
) -> Result<TransferProfile, SolveError> {
    let run = deconvolve(target, options)?;
    if run.converged {
        Ok(run.profile)
    } else {
        Err(SolveError::Convergence {
            best: Box::new(run),
        })
    }
}

/// Like [`solve_profile`] but returns the best iterate whether or not it met
/// the tolerance. Only spectral obstructions are errors.
pub fn deconvolve(
    target: &MalusTarget,
    options: &SolverOptions,
) -> Result<Deconvolution, SolveError> {
    let grid = target.grid();
    let m_curve = target.curve();
    let m_hat: Vec<f64> = checked_spectrum(grid, m_curve, options.tolerance)?;

    // rounding noise in M̂ would otherwise come back as √noise in every mode
    let floor = 64.0 * f64::EPSILON * m_hat[0].abs();
    let root: Vec<Complex64> = m_hat
        .iter()
        .map(|&c| Complex64::new(if c > floor { libm::sqrt(c) } else { 0.0 }, 0.0))
        .collect();
    let spectral = SampledAngularFunction::from_spectral(grid, &root).expect("same grid");
    let violation = spectral
        .values()
        .iter()
        .map(|&v| (-v).max(v - 1.0).max(0.0))
        .fold(0.0, f64::max);
    let start: Vec<f64> = spectral
        .values()
        .iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    let start_residual = residual_max(grid, &start, m_curve);

    if start_residual <= options.tolerance {
        return Ok(Deconvolution {
            profile: TransferProfile::from_values(grid, start).expect("clamped"),
            residual: start_residual,
            iterations: 0,
            stage: Stage::Spectral,
            converged: true,
            spectral_box_violation: violation,
        });
    }

    let step = options.step / m_hat[0].max(f64::MIN_POSITIVE);
    let mut p = start;
    let mut best = (start_residual, p.clone(), 0usize);
    let mut iterations = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        let p_hat = to_spectrum(&p);
        let r_hat: Vec<f64> = p_hat
            .iter()
            .zip(&m_hat)
            .map(|(c, m)| c.norm_sqr() - m)
            .collect();
        let dir: Vec<Complex64> = p_hat.iter().zip(&r_hat).map(|(c, r)| c * *r).collect();
        let dir = from_spectrum(&dir);
        for (x, d) in p.iter_mut().zip(&dir) {
            *x = (*x - step * d).clamp(0.0, 1.0);
        }
        let res = residual_max(grid, &p, m_curve);
        if res < best.0 {
            best = (res, p.clone(), iterations);
        }
        if res <= options.tolerance {
            break;
        }
    }
    let (residual, values, _) = best;
    Ok(Deconvolution {
        profile: TransferProfile::from_values(grid, values).expect("projected onto box"),
        residual,
        iterations,
        stage: Stage::ProjectedGradient,
        converged: residual <= options.tolerance,
        spectral_box_violation: violation,
    })
}

fn checked_spectrum(
    grid: AngularGrid,
    curve: &SampledAngularFunction,
    tolerance: f64,
) -> Result<Vec<f64>, SolveError> {
    let spec = curve.spectral();
    let mut out = Vec::with_capacity(spec.len());
    for (k, c) in spec.iter().enumerate() {
        if libm::fabs(c.im) > tolerance {
            return Err(SolveError::NotEven {
                harmonic: grid.harmonic(k),
                imag: c.im,
            });
        }
        if c.re < -tolerance {
            return Err(SolveError::Infeasible {
                harmonic: grid.harmonic(k),
                coefficient: c.re,
            });
        }
        out.push(c.re);
    }
    Ok(out)
}

fn to_spectrum(values: &[f64]) -> Vec<Complex64> {
    let grid = AngularGrid::new(values.len()).expect("grid already validated");
    SampledAngularFunction::new(grid, values.to_vec())
        .expect("finite")
        .spectral()
}

fn from_spectrum(coeffs: &[Complex64]) -> Vec<f64> {
    let grid = AngularGrid::new(coeffs.len()).expect("grid already validated");
    SampledAngularFunction::from_spectral(grid, coeffs)
        .expect("same grid")
        .into_values()
}

fn residual_max(grid: AngularGrid, p: &[f64], target: &SampledAngularFunction) -> f64 {
    let f = SampledAngularFunction::new(grid, p.to_vec()).expect("finite");
    grid::autocorrelation(&f)
        .max_abs_diff(target)
        .expect("same grid")
}
