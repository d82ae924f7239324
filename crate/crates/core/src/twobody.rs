//! Free two-body relative motion with Gaussian wavepackets (`ħ = 1`).
//!
//! A packet has momentum amplitude
//! `g(k) ∝ exp(−|k − k₀|²/(2σ²))`. At epoch `τ` its state is
//! `ψ(k) = g(k)·e^{−ik·x_i}·e^{−ik²(τ−τ_i)/(2m)}`, so the position-space
//! packet is centered on `x_i` at `τ_i` with no chirp.
//! Momentum has per-axis variance `σ²/2`. Position has per-axis variance
//! `1/(2σ²) + (σ²/2)(t/m)²` with `t = τ − τ_i`.
//!
//! `R = ½{p, q}` and `T = ¼{H⁻¹, R}` give
//! `⟨R⟩ = x̄(t)·k₀ + 3σ²t/(2m)` and `⟨T⟩ = t + m·x_i·⟨k/k²⟩`. The second
//! term vanishes when `x_i ⊥ k₀`, so a packet built around its closest
//! approach has `⟨T⟩ = τ − τ_c` exactly.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::quadrature::gauss_hermite;
use crate::{Error, Result};

pub type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: Vec3) -> f64 {
    libm::sqrt(dot(a, a))
}

fn axpy(a: f64, x: Vec3, y: Vec3) -> Vec3 {
    [a * x[0] + y[0], a * x[1] + y[1], a * x[2] + y[2]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub mass: f64,
    /// Position-space center at `epoch_initial`.
    pub center_initial: Vec3,
    pub epoch_initial: f64,
    /// Mean wave vector `k₀`.
    pub wave_vector: Vec3,
    /// Width `σ` of the momentum amplitude, per axis.
    pub spectral_width: f64,
    /// Current epoch `τ`.
    pub epoch: f64,
}

impl GaussianPacket {
    pub fn new(
        mass: f64,
        center_initial: Vec3,
        epoch_initial: f64,
        wave_vector: Vec3,
        spectral_width: f64,
        epoch: f64,
    ) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "mass",
                reason: "must be positive and finite",
            });
        }
        if !(spectral_width > 0.0 && spectral_width.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "spectral_width",
                reason: "must be positive and finite",
            });
        }
        let finite = center_initial
            .iter()
            .chain(&wave_vector)
            .chain([&epoch_initial, &epoch])
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter {
                name: "packet",
                reason: "non-finite component",
            });
        }
        Ok(Self {
            mass,
            center_initial,
            epoch_initial,
            wave_vector,
            spectral_width,
            epoch,
        })
    }

    /// Packet whose center passes `impact` at epoch `epoch_closest`. The part
    /// of `impact` along `k₀` is dropped so that `⟨R⟩ = 0` there.
    pub fn through_closest_approach(
        mass: f64,
        impact: Vec3,
        wave_vector: Vec3,
        spectral_width: f64,
        epoch_closest: f64,
        epoch: f64,
    ) -> Result<Self> {
        let k2 = dot(wave_vector, wave_vector);
        let b = if k2 > 0.0 {
            axpy(-dot(impact, wave_vector) / k2, wave_vector, impact)
        } else {
            impact
        };
        Self::new(mass, b, epoch_closest, wave_vector, spectral_width, epoch)
    }

    pub fn elapsed(&self) -> f64 {
        self.epoch - self.epoch_initial
    }

    /// `⟨q̄⟩ = x_i + k₀·t/m`.
    pub fn center(&self) -> Vec3 {
        axpy(
            self.elapsed() / self.mass,
            self.wave_vector,
            self.center_initial,
        )
    }

    /// `⟨p̄⟩ = k₀`.
    pub fn momentum(&self) -> Vec3 {
        self.wave_vector
    }

    pub fn momentum_variance(&self) -> f64 {
        0.5 * self.spectral_width * self.spectral_width
    }

    pub fn position_variance(&self) -> f64 {
        let s2 = self.spectral_width * self.spectral_width;
        let t = self.elapsed() / self.mass;
        0.5 / s2 + 0.5 * s2 * t * t
    }

    /// Free evolution by `t ≥ 0`.
    pub fn evolve(&self, t: f64) -> Result<Self> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::BackwardEvolution { t });
        }
        Ok(Self {
            epoch: self.epoch + t,
            ..*self
        })
    }

    /// `⟨H⟩ = (|k₀|² + 3σ²/2)/(2m)`.
    pub fn expect_h(&self) -> f64 {
        (dot(self.wave_vector, self.wave_vector) + 3.0 * self.momentum_variance())
            / (2.0 * self.mass)
    }

    /// `⟨Q⟩ = ⟨q²⟩`.
    pub fn expect_q(&self) -> f64 {
        let c = self.center();
        dot(c, c) + 3.0 * self.position_variance()
    }

    /// `⟨R⟩ = ⟨½{p, q}⟩`.
    pub fn expect_r(&self) -> f64 {
        dot(self.center(), self.wave_vector)
            + 3.0 * self.momentum_variance() * self.elapsed() / self.mass
    }

    /// `⟨L̄⟩ = x_i × k₀`, constant in time.
    pub fn expect_l(&self) -> Vec3 {
        cross(self.center_initial, self.wave_vector)
    }

    /// `⟨L²⟩ = |x_i × k₀|² + σ²|x_i|² + |k₀|²/σ²`.
    pub fn expect_l2(&self) -> f64 {
        let l = self.expect_l();
        let s2 = self.spectral_width * self.spectral_width;
        dot(l, l)
            + s2 * dot(self.center_initial, self.center_initial)
            + dot(self.wave_vector, self.wave_vector) / s2
    }

    pub fn kappa(&self) -> KappaSet {
        KappaSet {
            energy: self.expect_h(),
            angular_momentum_sq: self.expect_l2(),
            angular_momentum_12: self.expect_l()[2],
        }
    }

    /// `⟨T⟩ = ¼⟨{H⁻¹, R}⟩` with default quadrature settings.
    pub fn expect_t(&self) -> Result<f64> {
        self.expect_t_with(&TimeOperatorOptions::default())
    }

    pub fn expect_t_with(&self, opts: &TimeOperatorOptions) -> Result<f64> {
        let energy = self.expect_h();
        let k_cut2 = 2.0 * self.mass * opts.cutoff_fraction * energy;
        let weight = self.weight_below(libm::sqrt(k_cut2));
        if weight > opts.max_weight {
            return Err(Error::SingularInverse { weight });
        }
        // ⟨k/k²⟩ by tensor Gauss–Hermite in u = (k − k₀)/σ
        let (x, w) = gauss_hermite(opts.order);
        let s = self.spectral_width;
        let k0 = self.wave_vector;
        let mut acc = [0.0; 3];
        for (xi, wi) in x.iter().zip(&w) {
            let kx = k0[0] + s * xi;
            for (yj, wj) in x.iter().zip(&w) {
                let ky = k0[1] + s * yj;
                let wij = wi * wj;
                for (zl, wl) in x.iter().zip(&w) {
                    let kz = k0[2] + s * zl;
                    let k2 = kx * kx + ky * ky + kz * kz;
                    if k2 < k_cut2 || k2 == 0.0 {
                        continue;
                    }
                    let f = wij * wl / k2;
                    acc[0] += f * kx;
                    acc[1] += f * ky;
                    acc[2] += f * kz;
                }
            }
        }
        let norm3 = libm::pow(PI, 1.5);
        let mean_k_over_k2 = acc.map(|a| a / norm3);
        Ok(self.elapsed() + self.mass * dot(self.center_initial, mean_k_over_k2))
    }

    /// Upper bound on `∫_{|k|<r} |g|²` for the normalized Gaussian.
    fn weight_below(&self, r: f64) -> f64 {
        let s2 = self.spectral_width * self.spectral_width;
        let gap = (norm(self.wave_vector) - r).max(0.0);
        let peak = libm::pow(PI * s2, -1.5) * libm::exp(-gap * gap / s2);
        (4.0 / 3.0) * PI * r * r * r * peak
    }

    /// `b = |⟨L̄⟩|/|k₀|`.
    pub fn impact_parameter(&self) -> Result<f64> {
        let k = norm(self.wave_vector);
        if k == 0.0 {
            return Err(Error::UndefinedImpactParameter);
        }
        Ok(norm(self.expect_l()) / k)
    }

    /// `(2π)⁻³∫ ψ̄₁ψ₂ d³k`, closed form for two Gaussians.
    pub fn overlap(&self, other: &Self) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        let (s1, s2) = (
            self.spectral_width * self.spectral_width,
            other.spectral_width * other.spectral_width,
        );
        let a = Complex64::new(0.5 / s1 + 0.5 / s2, 0.0) - i * (self.elapsed() / (2.0 * self.mass))
            + i * (other.elapsed() / (2.0 * other.mass));
        let b: Vec<Complex64> = (0..3)
            .map(|d| {
                Complex64::new(self.wave_vector[d] / s1 + other.wave_vector[d] / s2, 0.0)
                    + i * (self.center_initial[d] - other.center_initial[d])
            })
            .collect();
        let c = -dot(self.wave_vector, self.wave_vector) / (2.0 * s1)
            - dot(other.wave_vector, other.wave_vector) / (2.0 * s2);
        let bb: Complex64 = b.iter().map(|x| x * x).sum();
        let prefactor = (Complex64::new(PI, 0.0) / a).powf(1.5);
        let norms = libm::pow(PI * s1, -0.75) * libm::pow(PI * s2, -0.75);
        prefactor * (bb / (4.0 * a) + c).exp() * norms
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeOperatorOptions {
    /// Gauss–Hermite points per axis.
    pub order: usize,
    /// `H⁻¹` is cut off below `cutoff_fraction·⟨H⟩`.
    pub cutoff_fraction: f64,
    /// Largest spectral weight tolerated below the cutoff.
    pub max_weight: f64,
}

impl Default for TimeOperatorOptions {
    fn default() -> Self {
        Self {
            order: 64,
            cutoff_fraction: 1e-6,
            max_weight: 1e-8,
        }
    }
}

/// Conserved labels of a trajectory: `⟨H⟩`, `⟨M⟩ = ⟨L²⟩`, `⟨M₁₂⟩ = ⟨L_z⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaSet {
    pub energy: f64,
    pub angular_momentum_sq: f64,
    pub angular_momentum_12: f64,
}

/// A state of the doubled space: an incoming and an outgoing slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedState {
    pub in_component: Option<GaussianPacket>,
    pub out_component: Option<GaussianPacket>,
    pub epoch: f64,
}

impl ExtendedState {
    pub fn is_incoming(&self) -> bool {
        self.in_component.is_some()
    }
}

/// Place a packet in the in slot for `τ < 0`, the out slot for `τ ≥ 0`.
pub fn lift_to_extended(packet: &GaussianPacket) -> ExtendedState {
    let epoch = packet.epoch;
    if epoch < 0.0 {
        ExtendedState {
            in_component: Some(*packet),
            out_component: None,
            epoch,
        }
    } else {
        ExtendedState {
            in_component: None,
            out_component: Some(*packet),
            epoch,
        }
    }
}

/// Sum of slot-wise overlaps; in and out slots never mix.
pub fn extended_inner(s1: &ExtendedState, s2: &ExtendedState) -> Complex64 {
    let slot = |a: &Option<GaussianPacket>, b: &Option<GaussianPacket>| match (a, b) {
        (Some(x), Some(y)) => x.overlap(y),
        _ => Complex64::new(0.0, 0.0),
    };
    slot(&s1.in_component, &s2.in_component) + slot(&s1.out_component, &s2.out_component)
}
