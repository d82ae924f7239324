//! Linear harmonic oscillator in a truncated energy eigenbasis.
//!
//! `C = √(k/2)·½{H^{−1/2}, q}` and `S = −√(1/(2m))·½{H^{−1/2}, p}` are
//! tridiagonal with `S_{n,n+1} = i·C_{n,n+1}`. As a result `(⟨C⟩, ⟨S⟩)`
//! rotates rigidly at `ω` under evolution. The phase is taken at the
//! expectation level, `φ = atan2(⟨S⟩, ⟨C⟩)`, and unwrapped along the
//! evolution. Each `2π` interval of the unwrapped phase is one sheet.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::linalg::CMatrix;
use crate::{Error, Result};

pub const MIN_DIMENSION: usize = 4;
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-8;
pub const DEFAULT_MIN_RADIUS: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct FockOperatorSet {
    pub mass: f64,
    pub spring: f64,
    pub omega: f64,
    pub h: CMatrix,
    pub q: CMatrix,
    pub p: CMatrix,
    pub h_inv_sqrt: CMatrix,
    pub c: CMatrix,
    pub s: CMatrix,
    /// `½{p, q}` from the truncated `q`, `p`.
    pub r: CMatrix,
    /// Set when `N < 4`.
    pub low_dimension: bool,
}

impl FockOperatorSet {
    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn energy(&self, n: usize) -> f64 {
        (n as f64 + 0.5) * self.omega
    }
}

pub fn build_operators(mass: f64, spring: f64, dim: usize) -> Result<FockOperatorSet> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "mass",
            reason: "must be positive and finite",
        });
    }
    if !(spring > 0.0 && spring.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "spring",
            reason: "must be positive and finite",
        });
    }
    if dim < 2 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "need at least two basis states",
        });
    }
    let omega = libm::sqrt(spring / mass);
    let energies: Vec<f64> = (0..dim).map(|n| (n as f64 + 0.5) * omega).collect();
    let h = CMatrix::from_diagonal(&energies);
    let h_inv_sqrt = CMatrix::from_diagonal(
        &energies
            .iter()
            .map(|e| 1.0 / libm::sqrt(*e))
            .collect::<Vec<_>>(),
    );

    let x0 = 1.0 / libm::sqrt(2.0 * mass * omega);
    let p0 = libm::sqrt(mass * omega / 2.0);
    let mut q = CMatrix::zeros(dim);
    let mut p = CMatrix::zeros(dim);
    for n in 0..dim - 1 {
        let s = libm::sqrt(n as f64 + 1.0);
        q[(n, n + 1)] = Complex64::new(x0 * s, 0.0);
        q[(n + 1, n)] = Complex64::new(x0 * s, 0.0);
        // p = i·p0·(a† − a)
        p[(n, n + 1)] = Complex64::new(0.0, -p0 * s);
        p[(n + 1, n)] = Complex64::new(0.0, p0 * s);
    }
    let c = h_inv_sqrt
        .anticommutator(&q)
        .scale_re(0.5 * libm::sqrt(spring / 2.0));
    let s = h_inv_sqrt
        .anticommutator(&p)
        .scale_re(-0.5 * libm::sqrt(1.0 / (2.0 * mass)));
    let r = p.anticommutator(&q).scale_re(0.5);
    Ok(FockOperatorSet {
        mass,
        spring,
        omega,
        h,
        q,
        p,
        h_inv_sqrt,
        c,
        s,
        r,
        low_dimension: dim < MIN_DIMENSION,
    })
}

/// Max-norm residuals of `i[H,S] − ωC` and `i[H,C] + ωS`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub dim: usize,
    pub buffer: usize,
    pub omega: f64,
    /// Over rows and columns `0..dim − buffer`, with `H = p²/2m + kq²/2`
    /// assembled from the truncated `q`, `p`.
    pub interior_hs: f64,
    pub interior_hc: f64,
    /// Same, over the full matrix; the last rows carry the truncation error.
    pub full_hs: f64,
    pub full_hc: f64,
    /// Full-matrix residuals with the exact diagonal `H`.
    pub exact_h_hs: f64,
    pub exact_h_hc: f64,
}

pub fn commutator_residuals(ops: &FockOperatorSet) -> ResidualReport {
    commutator_residuals_with(ops, ops.dim() / 4)
}

pub fn commutator_residuals_with(ops: &FockOperatorSet, buffer: usize) -> ResidualReport {
    let i = Complex64::new(0.0, 1.0);
    let n = ops.dim();
    let rows = n.saturating_sub(buffer);
    let kinetic = (&ops.p * &ops.p).scale_re(0.5 / ops.mass);
    let potential = (&ops.q * &ops.q).scale_re(0.5 * ops.spring);
    let h_kin = &kinetic + &potential;
    let residuals = |h: &CMatrix| {
        let hs = &h.commutator(&ops.s).scale(i) - &ops.c.scale_re(ops.omega);
        let hc = &h.commutator(&ops.c).scale(i) + &ops.s.scale_re(ops.omega);
        (hs, hc)
    };
    let (hs, hc) = residuals(&h_kin);
    let (ehs, ehc) = residuals(&ops.h);
    ResidualReport {
        dim: n,
        buffer,
        omega: ops.omega,
        interior_hs: hs.max_abs_block(rows),
        interior_hc: hc.max_abs_block(rows),
        full_hs: hs.max_abs(),
        full_hc: hc.max_abs(),
        exact_h_hs: ehs.max_abs(),
        exact_h_hc: ehc.max_abs(),
    }
}

/// Oscillator state: amplitudes over the truncated basis plus a phase sheet.
#[derive(Debug, Clone, PartialEq)]
pub struct OscState {
    amplitudes: Vec<Complex64>,
    pub sheet: i64,
}

impl OscState {
    /// Normalizes `amplitudes`.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = libm::sqrt(amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>());
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: "zero or non-finite norm",
            });
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
            sheet: 0,
        })
    }

    /// Energy eigenstate `|n⟩`.
    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "level outside the basis",
            });
        }
        let mut a = alloc::vec![Complex64::new(0.0, 0.0); dim];
        a[n] = Complex64::new(1.0, 0.0);
        Self::new(a)
    }

    /// Truncated coherent state `|α⟩`, renormalized.
    pub fn coherent(alpha: Complex64, dim: usize) -> Result<Self> {
        let mut a = Vec::with_capacity(dim);
        let mut term = Complex64::new(libm::exp(-0.5 * alpha.norm_sqr()), 0.0);
        for n in 0..dim {
            a.push(term);
            term = term * alpha / libm::sqrt(n as f64 + 1.0);
        }
        Self::new(a)
    }

    /// Coherent state with mean excitation `n̄` and phase `φ₀ = atan2(⟨S⟩, ⟨C⟩)`.
    pub fn coherent_with_phase(mean_excitation: f64, phase: f64, dim: usize) -> Result<Self> {
        Self::coherent(
            Complex64::from_polar(libm::sqrt(mean_excitation), -phase),
            dim,
        )
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Probability on the top `fraction` of basis states.
    pub fn tail_weight(&self, fraction: f64) -> f64 {
        let n = self.dim();
        let k = libm::ceil(n as f64 * fraction) as usize;
        self.amplitudes[n - k.min(n)..]
            .iter()
            .map(|a| a.norm_sqr())
            .sum()
    }

    pub fn mean_excitation(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum()
    }

    pub fn expect(&self, op: &CMatrix) -> Complex64 {
        op.expect(&self.amplitudes)
    }
}

fn check_tail(state: &OscState, threshold: f64) -> Result<()> {
    let weight = state.tail_weight(0.1);
    if weight > threshold {
        return Err(Error::TruncationTail { weight, threshold });
    }
    Ok(())
}

/// `⟨C² + S²⟩`.
pub fn cs_norm(state: &OscState, ops: &FockOperatorSet) -> Result<f64> {
    cs_norm_with(state, ops, DEFAULT_TAIL_THRESHOLD)
}

pub fn cs_norm_with(state: &OscState, ops: &FockOperatorSet, tail_threshold: f64) -> Result<f64> {
    check_tail(state, tail_threshold)?;
    let c2 = &ops.c * &ops.c;
    let s2 = &ops.s * &ops.s;
    Ok(state.expect(&(&c2 + &s2)).re)
}

/// `(⟨C⟩, ⟨S⟩)`.
pub fn expect_cs(state: &OscState, ops: &FockOperatorSet) -> (f64, f64) {
    (state.expect(&ops.c).re, state.expect(&ops.s).re)
}

pub fn expect_r(state: &OscState, ops: &FockOperatorSet) -> f64 {
    state.expect(&ops.r).re
}

/// Phase on the current sheet together with the sheet index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    /// In `[0, 2π)`.
    pub angle: f64,
    pub sheet: i64,
    pub radius: f64,
}

impl Phase {
    pub fn unwrapped(&self) -> f64 {
        self.angle + 2.0 * PI * self.sheet as f64
    }

    /// `T = Φ/ω`.
    pub fn time(&self, omega: f64) -> f64 {
        self.unwrapped() / omega
    }
}

fn wrapped_phase(state: &OscState, ops: &FockOperatorSet, min_radius: f64) -> Result<(f64, f64)> {
    let (c, s) = expect_cs(state, ops);
    let radius = libm::sqrt(c * c + s * s);
    if radius < min_radius {
        return Err(Error::UndefinedPhase {
            radius,
            min: min_radius,
        });
    }
    let mut angle = libm::atan2(s, c);
    if angle < 0.0 {
        angle += 2.0 * PI;
    }
    if angle >= 2.0 * PI {
        angle = 0.0;
    }
    Ok((angle, radius))
}

pub fn phase(state: &OscState, ops: &FockOperatorSet) -> Result<Phase> {
    let (angle, radius) = wrapped_phase(state, ops, DEFAULT_MIN_RADIUS)?;
    Ok(Phase {
        angle,
        sheet: state.sheet,
        radius,
    })
}

/// `e^{−iHt}` applied in the eigenbasis. The sheet index follows the phase,
/// sampled at steps of at most `π/(4ω)`.
pub fn evolve_osc(state: &OscState, ops: &FockOperatorSet, t: f64) -> Result<OscState> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::BackwardEvolution { t });
    }
    let rotate = |dt: f64| OscState {
        amplitudes: state
            .amplitudes
            .iter()
            .enumerate()
            .map(|(n, a)| a * Complex64::from_polar(1.0, -ops.energy(n) * dt))
            .collect(),
        sheet: state.sheet,
    };
    let mut out = rotate(t);
    let Ok((start, _)) = wrapped_phase(state, ops, DEFAULT_MIN_RADIUS) else {
        return Ok(out);
    };
    let max_step = PI / (4.0 * ops.omega);
    let steps = libm::ceil(t / max_step).max(1.0) as usize;
    let mut unwrapped = start + 2.0 * PI * state.sheet as f64;
    let mut last = start;
    for k in 1..=steps {
        let dt = if k == steps {
            t
        } else {
            t * k as f64 / steps as f64
        };
        if let Ok((angle, _)) = wrapped_phase(&rotate(dt), ops, DEFAULT_MIN_RADIUS) {
            let mut d = angle - last;
            if d > PI {
                d -= 2.0 * PI;
            } else if d <= -PI {
                d += 2.0 * PI;
            }
            unwrapped += d;
            last = angle;
        }
    }
    out.sheet = libm::floor((unwrapped - last) / (2.0 * PI) + 0.5) as i64;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_and_hermiticity() {
        let ops = build_operators(2.0, 3.0, 16).unwrap();
        let w = (1.5f64).sqrt();
        for n in 0..16 {
            assert!((ops.h[(n, n)].re - (n as f64 + 0.5) * w).abs() < 1e-14);
        }
        for m in [&ops.h, &ops.q, &ops.p, &ops.c, &ops.s] {
            assert!(m.hermiticity_defect() < 1e-12);
        }
        assert!(!ops.low_dimension);
    }

    #[test]
    fn parameters_validated() {
        assert!(build_operators(0.0, 1.0, 8).is_err());
        assert!(build_operators(1.0, -1.0, 8).is_err());
        assert!(build_operators(1.0, 1.0, 1).is_err());
        let small = build_operators(1.0, 1.0, 2).unwrap();
        assert!(small.low_dimension);
        assert!(small.c.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn ground_state_has_no_mean_c_or_s() {
        let ops = build_operators(1.0, 1.0, 16).unwrap();
        let g = OscState::fock(0, 16).unwrap();
        let (c, s) = expect_cs(&g, &ops);
        assert_eq!((c, s), (0.0, 0.0));
        assert!(matches!(phase(&g, &ops), Err(Error::UndefinedPhase { .. })));
    }

    #[test]
    fn s_is_i_times_c_above_diagonal() {
        let ops = build_operators(1.3, 0.7, 12).unwrap();
        for n in 0..11 {
            let c = ops.c[(n, n + 1)];
            let s = ops.s[(n, n + 1)];
            assert!((s - Complex64::new(0.0, 1.0) * c).norm() < 1e-14);
        }
    }

    #[test]
    fn edge_state_rejected_by_cs_norm() {
        let ops = build_operators(1.0, 1.0, 32).unwrap();
        let edge = OscState::fock(31, 32).unwrap();
        assert!(matches!(
            cs_norm(&edge, &ops),
            Err(Error::TruncationTail { .. })
        ));
    }

    #[test]
    fn evolve_rejects_negative_time_and_keeps_identity() {
        let ops = build_operators(1.0, 1.0, 32).unwrap();
        let st = OscState::coherent_with_phase(4.0, 0.5, 32).unwrap();
        assert!(evolve_osc(&st, &ops, -0.1).is_err());
        assert_eq!(evolve_osc(&st, &ops, 0.0).unwrap(), st);
    }

    #[test]
    fn coherent_phase_convention() {
        let ops = build_operators(1.0, 1.0, 96).unwrap();
        let st = OscState::coherent_with_phase(10.0, 1.0, 96).unwrap();
        let ph = phase(&st, &ops).unwrap();
        assert!((ph.angle - 1.0).abs() < 1e-12);
        assert!((st.mean_excitation() - 10.0).abs() < 1e-9);
    }
}
