//! Hidden-variable polarizer model.
//!
//! A polarizer is described by its transfer profile `p(λ)`: the probability
//! that a photon whose polarization is offset by `λ` from the polarizer axis
//! gets through. Photons keep their polarization when they pass, so a pair of
//! polarizers with relative angle `α` transmits
//! `M(α) = ∫ dλ/π · p₁(λ)·p₂(λ−α)` of an unpolarized beam.

mod deconvolve;
mod mueller;

pub use deconvolve::{deconvolve, solve_profile, Deconvolution, SolveError, SolverOptions, Stage};
pub use mueller::{mueller_chain, mueller_chain_leaky, MuellerMatrix, StokesVector};

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::grid::{self, reduce, AngularGrid, SampledAngularFunction};
use crate::{Error, Result};

/// Generalized Malus law `M(α) = (1−ε)·cos²α + ε`.
pub fn generalized_malus(alpha: f64, epsilon: f64) -> Result<f64> {
    check_leakage(epsilon)?;
    let c = libm::cos(alpha);
    Ok((1.0 - epsilon) * c * c + epsilon)
}

fn check_leakage(epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: "leakage must lie in [0, 1)",
        });
    }
    Ok(())
}

/// Sampled transmission probability `p(λ)`, valued in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferProfile {
    f: SampledAngularFunction,
}

impl TransferProfile {
    pub fn new(f: SampledAngularFunction) -> Result<Self> {
        if let Some((index, &value)) = f
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::ProbabilityOutOfRange { index, value });
        }
        Ok(Self { f })
    }

    pub fn from_values(grid: AngularGrid, values: Vec<f64>) -> Result<Self> {
        Self::new(SampledAngularFunction::new(grid, values)?)
    }

    pub fn from_fn(grid: AngularGrid, p: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(SampledAngularFunction::from_fn(grid, p)?)
    }

    pub fn constant(grid: AngularGrid, c: f64) -> Result<Self> {
        Self::new(SampledAngularFunction::constant(grid, c)?)
    }

    /// `cos²λ`, the profile whose pair law is the textbook Malus curve up to
    /// normalization.
    pub fn cos_squared(grid: AngularGrid) -> Self {
        Self::from_fn(grid, |l| {
            let c = libm::cos(l);
            (c * c).clamp(0.0, 1.0)
        })
        .expect("cos² lies in [0, 1]")
    }

    /// Indicator of `|λ| < half_width` (mod π).
    pub fn indicator(grid: AngularGrid, half_width: f64) -> Self {
        Self::from_fn(grid, |l| {
            let l = if l > PI / 2.0 { l - PI } else { l };
            if libm::fabs(l) < half_width {
                1.0
            } else {
                0.0
            }
        })
        .expect("indicator lies in [0, 1]")
    }

    pub fn function(&self) -> &SampledAngularFunction {
        &self.f
    }

    pub fn grid(&self) -> AngularGrid {
        self.f.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.f.values()
    }

    #[inline]
    pub fn eval(&self, angle: f64) -> f64 {
        self.f.eval(angle)
    }

    /// Single-polarizer transmission of unpolarized light.
    pub fn mean(&self) -> f64 {
        self.f.mean()
    }
}

/// Pair-law target curve `M(α)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MalusTarget {
    epsilon: Option<f64>,
    curve: SampledAngularFunction,
}

/// Slack allowed when validating sampled target curves.
const TARGET_SLACK: f64 = 1e-9;

impl MalusTarget {
    pub fn generalized(grid: AngularGrid, epsilon: f64) -> Result<Self> {
        check_leakage(epsilon)?;
        let curve = SampledAngularFunction::from_fn(grid, |a| {
            generalized_malus(a, epsilon).expect("leakage checked")
        })?;
        Ok(Self {
            epsilon: Some(epsilon),
            curve,
        })
    }

    /// Arbitrary target; must be valued in `[0, 1]` and even in `α`.
    pub fn from_curve(curve: SampledAngularFunction, epsilon: Option<f64>) -> Result<Self> {
        if let Some(e) = epsilon {
            check_leakage(e)?;
        }
        let v = curve.values();
        let n = v.len();
        if let Some((index, &value)) = v
            .iter()
            .enumerate()
            .find(|(_, x)| **x < -TARGET_SLACK || **x > 1.0 + TARGET_SLACK)
        {
            return Err(Error::ProbabilityOutOfRange { index, value });
        }
        if (1..n).any(|m| libm::fabs(v[m] - v[n - m]) > TARGET_SLACK) {
            return Err(Error::InvalidParameter {
                name: "target",
                reason: "curve is not even in alpha",
            });
        }
        Ok(Self { epsilon, curve })
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn curve(&self) -> &SampledAngularFunction {
        &self.curve
    }

    pub fn grid(&self) -> AngularGrid {
        self.curve.grid()
    }
}

/// `∫ dλ/π · p₁(λ)·p₂(λ−α)` with `α` reduced mod π.
///
/// Node values come from the discrete circular correlation; between nodes
/// the exact integral of two cell-constant profiles is linear in `α`.
pub fn pair_transmission(p1: &TransferProfile, p2: &TransferProfile, alpha: f64) -> Result<f64> {
    let c = grid::circular_correlate(&p1.f, &p2.f)?;
    Ok(c.interpolate(alpha).clamp(0.0, 1.0))
}

/// How a photon's polarization behaves after passing a polarizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChainMode {
    /// Polarization unchanged; one hidden `λ` is shared by every stage.
    #[default]
    NoRepolarization,
    /// Polarization reset to the axis after each transmission, so stages
    /// multiply as independent pair laws.
    Collapse,
}

/// Transmission of unpolarized light through polarizers at `angles`,
/// without repolarization: `∫ dλ/π · Π_k p(λ − α_k)`.
pub fn chain_transmission(p: &TransferProfile, angles: &[f64]) -> Result<f64> {
    chain_transmission_with(p, angles, ChainMode::NoRepolarization)
}

pub fn chain_transmission_with(
    p: &TransferProfile,
    angles: &[f64],
    mode: ChainMode,
) -> Result<f64> {
    if angles.is_empty() {
        return Err(Error::EmptyAngles);
    }
    if angles.len() == 1 {
        return Ok(p.mean());
    }
    match mode {
        ChainMode::NoRepolarization => Ok(product_integral(p, angles).clamp(0.0, 1.0)),
        ChainMode::Collapse => {
            let corr = grid::autocorrelation(&p.f);
            Ok(angles
                .windows(2)
                .map(|w| corr.interpolate(w[1] - w[0]).clamp(0.0, 1.0))
                .product())
        }
    }
}

/// Exact integral of a product of shifted cell-constant profiles, summed
/// over the intervals between all cell edges.
fn product_integral(p: &TransferProfile, angles: &[f64]) -> f64 {
    let grid = p.grid();
    let h = grid.spacing();
    let mut edges: Vec<f64> = angles
        .iter()
        .flat_map(|&a| (0..grid.len()).map(move |j| reduce(a + (j as f64 + 0.5) * h)))
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let m = edges.len();
    let mut acc = 0.0;
    for i in 0..m {
        let lo = edges[i];
        let hi = if i + 1 < m {
            edges[i + 1]
        } else {
            edges[0] + PI
        };
        let width = hi - lo;
        if width <= 0.0 {
            continue;
        }
        let mid = lo + 0.5 * width;
        let prod: f64 = angles.iter().map(|&a| p.eval(mid - a)).product();
        acc += prod * width;
    }
    acc / PI
}
