//! Discrete Fourier transform: iterative radix-2 for powers of two, direct
//! summation otherwise. Unnormalized in both directions.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

pub(crate) fn transform(data: &mut [Complex64], dir: Direction) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        radix2(data, dir);
    } else {
        let out = direct(data, dir);
        data.copy_from_slice(&out);
    }
}

fn twiddle(k: usize, len: usize, sign: f64) -> Complex64 {
    let theta = sign * 2.0 * PI * k as f64 / len as f64;
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

fn radix2(data: &mut [Complex64], dir: Direction) {
    let n = data.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    let sign = dir.sign();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let w: Vec<Complex64> = (0..half).map(|k| twiddle(k, len, sign)).collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = data[start + k];
                let b = data[start + k + half] * w[k];
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

fn direct(data: &[Complex64], dir: Direction) -> Vec<Complex64> {
    let n = data.len();
    let sign = dir.sign();
    (0..n)
        .map(|k| {
            data.iter()
                .enumerate()
                .map(|(j, &x)| x * twiddle((j * k) % n, n, sign))
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radix2_matches_direct() {
        let data: Vec<Complex64> = (0..32)
            .map(|j| Complex64::new(libm::sin(j as f64 * 0.7), libm::cos(j as f64 * 1.3)))
            .collect();
        let mut fast = data.clone();
        transform(&mut fast, Direction::Forward);
        let slow = direct(&data, Direction::Forward);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_round_trip_non_power_of_two() {
        let data: Vec<Complex64> = (0..12)
            .map(|j| Complex64::new(j as f64, -(j as f64)))
            .collect();
        let mut buf = data.clone();
        transform(&mut buf, Direction::Forward);
        transform(&mut buf, Direction::Inverse);
        for (a, b) in buf.iter().zip(&data) {
            assert!((a / 12.0 - b).norm() < 1e-12);
        }
    }
}
