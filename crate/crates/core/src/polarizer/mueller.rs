//! Stokes vectors and Müller matrices for ideal and leaky linear polarizers.

use crate::{Error, Result};

const CONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector {
    pub i: f64,
    pub q: f64,
    pub u: f64,
    pub v: f64,
}

impl StokesVector {
    pub fn new(i: f64, q: f64, u: f64, v: f64) -> Result<Self> {
        let s = Self { i, q, u, v };
        s.check_physical()?;
        Ok(s)
    }

    pub fn unpolarized(intensity: f64) -> Result<Self> {
        Self::new(intensity, 0.0, 0.0, 0.0)
    }

    /// Fully linearly polarized light along `angle`.
    pub fn linear(intensity: f64, angle: f64) -> Result<Self> {
        Self::new(
            intensity,
            intensity * libm::cos(2.0 * angle),
            intensity * libm::sin(2.0 * angle),
            0.0,
        )
    }

    pub fn polarized_intensity(&self) -> f64 {
        libm::sqrt(self.q * self.q + self.u * self.u + self.v * self.v)
    }

    pub fn degree_of_polarization(&self) -> f64 {
        if self.i == 0.0 {
            0.0
        } else {
            self.polarized_intensity() / self.i
        }
    }

    fn check_physical(&self) -> Result<()> {
        let pol = self.polarized_intensity();
        let finite = [self.i, self.q, self.u, self.v]
            .iter()
            .all(|x| x.is_finite());
        if !finite || self.i < 0.0 || pol > self.i * (1.0 + CONE_SLACK) + CONE_SLACK {
            return Err(Error::UnphysicalStokes {
                intensity: self.i,
                polarized: pol,
            });
        }
        Ok(())
    }

    fn as_array(&self) -> [f64; 4] {
        [self.i, self.q, self.u, self.v]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuellerMatrix(pub [[f64; 4]; 4]);

impl MuellerMatrix {
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self(m)
    }

    /// Ideal linear polarizer with transmission axis at `theta`.
    pub fn linear_polarizer(theta: f64) -> Self {
        let c = libm::cos(2.0 * theta);
        let s = libm::sin(2.0 * theta);
        Self([
            [0.5, 0.5 * c, 0.5 * s, 0.0],
            [0.5 * c, 0.5 * c * c, 0.5 * c * s, 0.0],
            [0.5 * s, 0.5 * c * s, 0.5 * s * s, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ])
    }

    /// `(1−ε)·ideal + ε·a·identity`, with the attenuator level `a` chosen so
    /// a pair reproduces `(1−ε)cos²α + ε` relative to the parallel setting.
    pub fn leaky_polarizer(theta: f64, epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: "leakage must lie in [0, 1)",
            });
        }
        let ideal = Self::linear_polarizer(theta);
        if epsilon == 0.0 {
            return Ok(ideal);
        }
        // diattenuation d = (1−ε)/(1−ε+2εa) must equal √((1−ε)/(1+ε))
        let d = libm::sqrt((1.0 - epsilon) / (1.0 + epsilon));
        let a = (1.0 - epsilon) * (1.0 / d - 1.0) / (2.0 * epsilon);
        Ok(ideal
            .scaled(1.0 - epsilon)
            .plus(&Self::identity().scaled(epsilon * a)))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = self.0;
        m.iter_mut().flatten().for_each(|x| *x *= s);
        Self(m)
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut m = self.0;
        for (row, orow) in m.iter_mut().zip(&other.0) {
            for (x, y) in row.iter_mut().zip(orow) {
                *x += y;
            }
        }
        Self(m)
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..4).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Self(m)
    }

    pub fn apply(&self, s: &StokesVector) -> [f64; 4] {
        let x = s.as_array();
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row.iter().zip(&x).map(|(a, b)| a * b).sum();
        }
        out
    }
}

/// Pass `s_in` through ideal polarizers at `angles`, in order.
pub fn mueller_chain(s_in: &StokesVector, angles: &[f64]) -> Result<(StokesVector, f64)> {
    mueller_chain_leaky(s_in, angles, 0.0)
}

pub fn mueller_chain_leaky(
    s_in: &StokesVector,
    angles: &[f64],
    epsilon: f64,
) -> Result<(StokesVector, f64)> {
    s_in.check_physical()?;
    let mut total = MuellerMatrix::identity();
    for &a in angles {
        total = MuellerMatrix::leaky_polarizer(a, epsilon)?.compose(&total);
    }
    let [i, q, u, v] = total.apply(s_in);
    // rounding can push a fully polarized output a hair outside the cone
    let i = i.max(0.0);
    let pol = libm::sqrt(q * q + u * u + v * v);
    let k = if pol > i && pol > 0.0 { i / pol } else { 1.0 };
    let out = StokesVector::new(i, q * k, u * k, v * k)?;
    let fraction = if s_in.i > 0.0 { out.i / s_in.i } else { 0.0 };
    Ok((out, fraction))
}
