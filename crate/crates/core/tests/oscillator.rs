use std::f64::consts::PI;

use hiddenvar_core::oscillator::*;
use hiddenvar_core::Complex64;
use proptest::prelude::*;

type Dense = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// Ladder operators built directly, independent of the library assembly.
fn ladder(n: usize) -> Dense {
    let mut a = vec![vec![c(0.0, 0.0); n]; n];
    for k in 1..n {
        a[k - 1][k] = c((k as f64).sqrt(), 0.0);
    }
    a
}

fn dag(m: &Dense) -> Dense {
    let n = m.len();
    (0..n)
        .map(|i| (0..n).map(|j| m[j][i].conj()).collect())
        .collect()
}

fn mul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn lin(x: Complex64, a: &Dense, y: Complex64, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(u, v)| x * u + y * v).collect())
        .collect()
}

fn oracle_cs(m: f64, k: f64, n: usize) -> (Dense, Dense, f64) {
    let w = (k / m).sqrt();
    let a = ladder(n);
    let ad = dag(&a);
    let one = c(1.0, 0.0);
    let q = lin(
        c(1.0 / (2.0 * m * w).sqrt(), 0.0),
        &a,
        c(1.0 / (2.0 * m * w).sqrt(), 0.0),
        &ad,
    );
    let p = lin(
        c(0.0, -(m * w / 2.0).sqrt()),
        &a,
        c(0.0, (m * w / 2.0).sqrt()),
        &ad,
    );
    let mut hi = vec![vec![c(0.0, 0.0); n]; n];
    for (j, row) in hi.iter_mut().enumerate() {
        row[j] = c(1.0 / ((j as f64 + 0.5) * w).sqrt(), 0.0);
    }
    let cq = lin(one, &mul(&hi, &q), one, &mul(&q, &hi));
    let sp = lin(one, &mul(&hi, &p), one, &mul(&p, &hi));
    let cm = lin(c(0.5 * (k / 2.0).sqrt(), 0.0), &cq, c(0.0, 0.0), &cq);
    let sm = lin(c(-0.5 / (2.0 * m).sqrt(), 0.0), &sp, c(0.0, 0.0), &sp);
    (cm, sm, w)
}

fn expect(m: &Dense, psi: &[Complex64]) -> Complex64 {
    let mut acc = c(0.0, 0.0);
    for i in 0..psi.len() {
        for j in 0..psi.len() {
            acc += psi[i].conj() * m[i][j] * psi[j];
        }
    }
    acc
}

#[test]
fn matrices_match_ladder_oracle() {
    let (m, k, n) = (1.7, 0.9, 24);
    let ops = build_operators(m, k, n).unwrap();
    let (cm, sm, w) = oracle_cs(m, k, n);
    assert!((ops.omega - w).abs() < 1e-15);
    for i in 0..n {
        for j in 0..n {
            assert!((ops.c[(i, j)] - cm[i][j]).norm() < 1e-13);
            assert!((ops.s[(i, j)] - sm[i][j]).norm() < 1e-13);
        }
    }
}

#[test]
fn interior_residuals_at_n64() {
    let ops = build_operators(1.0, 1.0, 64).unwrap();
    let r = commutator_residuals(&ops);
    assert_eq!(r.buffer, 16);
    assert!(r.interior_hs <= 1e-8, "{}", r.interior_hs);
    assert!(r.interior_hc <= 1e-8, "{}", r.interior_hc);
    // The kinematic H differs from the diagonal one in the last row only.
    assert!(r.full_hs > 1e-3 && r.full_hc > 1e-3);
}

#[test]
fn residual_pattern_survives_spring_doubling() {
    let a = build_operators(1.0, 1.0, 48).unwrap();
    let b = build_operators(1.0, 2.0, 48).unwrap();
    assert!((b.omega * b.omega - 2.0 * a.omega * a.omega).abs() < 1e-14);
    let ra = commutator_residuals(&a);
    let rb = commutator_residuals(&b);
    assert!(ra.interior_hs <= 1e-8 && rb.interior_hs <= 1e-8);
    // C and S do not depend on k at fixed mass; residuals scale with ω.
    let sa = a.omega;
    let sb = b.omega;
    assert!((ra.full_hc / sa - rb.full_hc / sb).abs() < 1e-10 * (ra.full_hc / sa));
}

#[test]
fn coherent_state_cs_norm_near_one() {
    let ops = build_operators(1.0, 1.0, 128).unwrap();
    let st = OscState::coherent_with_phase(10.0, 0.4, 128).unwrap();
    let v = cs_norm(&st, &ops).unwrap();
    let (cm, sm, _) = oracle_cs(1.0, 1.0, 128);
    let oracle = expect(
        &lin(c(1.0, 0.0), &mul(&cm, &cm), c(1.0, 0.0), &mul(&sm, &sm)),
        st.amplitudes(),
    )
    .re;
    assert!((v - oracle).abs() < 1e-12);
    assert!((v - 1.0).abs() < 0.02, "{v}");
}

#[test]
fn ground_state_cs_norm_reported() {
    let ops = build_operators(1.0, 1.0, 16).unwrap();
    let v = cs_norm(&OscState::fock(0, 16).unwrap(), &ops).unwrap();
    // Only the 0-1 matrix element contributes: 2·|C_01|².
    let c01 = 0.5 * (0.5f64).sqrt() * (1.0 / 0.5f64.sqrt() + 1.0 / 1.5f64.sqrt()) / 2.0f64.sqrt();
    assert!((v - 2.0 * c01 * c01).abs() < 1e-14, "{v}");
    assert!(v < 0.7);
}

#[test]
fn cs_norm_approaches_one_with_excitation() {
    let dev = |nbar: f64| {
        let n = (16.0 * nbar) as usize;
        let ops = build_operators(1.0, 1.0, n).unwrap();
        let st = OscState::coherent_with_phase(nbar, 0.3, n).unwrap();
        (cs_norm(&st, &ops).unwrap() - 1.0).abs()
    };
    let d: Vec<f64> = [2.0, 5.0, 10.0, 20.0].iter().map(|&x| dev(x)).collect();
    assert!(d[3] < d[0], "{d:?}");
}

#[test]
fn phase_advances_with_time() {
    let ops = build_operators(1.0, 1.0, 128).unwrap();
    let st = OscState::coherent_with_phase(10.0, 5.0 * PI / 3.0, 128).unwrap();
    let p0 = phase(&st, &ops).unwrap();
    for dt in [0.1, 0.7, 2.5] {
        let p1 = phase(&evolve_osc(&st, &ops, dt).unwrap(), &ops).unwrap();
        let adv = p1.unwrapped() - p0.unwrapped();
        assert!(
            (adv - ops.omega * dt).abs() <= 1e-3 * ops.omega * dt,
            "{adv} vs {dt}"
        );
    }
}

#[test]
fn three_periods_three_sheets() {
    let ops = build_operators(2.0, 0.5, 128).unwrap();
    let period = 2.0 * PI / ops.omega;
    let st = OscState::coherent_with_phase(10.0, 5.0 * PI / 3.0, 128).unwrap();
    let t = 3.0 * period;
    let out = evolve_osc(&st, &ops, t).unwrap();
    assert_eq!(out.sheet - st.sheet, 3);
    let p0 = phase(&st, &ops).unwrap();
    let p1 = phase(&out, &ops).unwrap();
    let adv = p1.unwrapped() - p0.unwrapped();
    assert!((adv - ops.omega * t).abs() <= 1e-3 * ops.omega * t);
    // Same, accumulated over many short steps.
    let mut s = st.clone();
    for _ in 0..37 {
        s = evolve_osc(&s, &ops, t / 37.0).unwrap();
    }
    assert_eq!(s.sheet, 3);
}

#[test]
fn time_operator_rate_is_one() {
    let ops = build_operators(1.0, 4.0, 128).unwrap();
    let mut st = OscState::coherent_with_phase(10.0, 1.0, 128).unwrap();
    let dt = 0.05;
    let mut last = phase(&st, &ops).unwrap().time(ops.omega);
    for _ in 0..200 {
        st = evolve_osc(&st, &ops, dt).unwrap();
        let now = phase(&st, &ops).unwrap().time(ops.omega);
        assert!(((now - last) / dt - 1.0).abs() < 1e-3);
        last = now;
    }
}

#[test]
fn full_period_restores_expectations() {
    let ops = build_operators(1.0, 1.0, 96).unwrap();
    let st = OscState::coherent_with_phase(6.0, 0.8, 96).unwrap();
    let (c0, s0) = expect_cs(&st, &ops);
    let full = evolve_osc(&st, &ops, 2.0 * PI / ops.omega).unwrap();
    for (a, b) in st.amplitudes().iter().zip(full.amplitudes()) {
        assert!((b - (-a)).norm() < 1e-12);
    }
    let (c1, s1) = expect_cs(&full, &ops);
    assert!((c1 - c0).abs() < 1e-12 && (s1 - s0).abs() < 1e-12);
    let half = evolve_osc(&st, &ops, PI / ops.omega).unwrap();
    let (c2, s2) = expect_cs(&half, &ops);
    assert!((c2 + c0).abs() < 1e-12 && (s2 + s0).abs() < 1e-12);
}

#[test]
fn r_is_periodic_at_half_period() {
    let ops = build_operators(1.3, 2.1, 96).unwrap();
    let st = OscState::coherent_with_phase(5.0, 0.2, 96).unwrap();
    let half = PI / ops.omega;
    for t in [0.0, 0.3, 1.1] {
        let a = expect_r(&evolve_osc(&st, &ops, t).unwrap(), &ops);
        let b = expect_r(&evolve_osc(&st, &ops, t + half).unwrap(), &ops);
        assert!((a - b).abs() < 1e-8, "{a} {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rotation_law(nbar in 1.0f64..12.0, phi in 0.0f64..std::f64::consts::TAU, t in 0.0f64..20.0, k in 0.2f64..5.0) {
        let ops = build_operators(1.0, k, 128).unwrap();
        let st = OscState::coherent_with_phase(nbar, phi, 128).unwrap();
        let (c0, s0) = expect_cs(&st, &ops);
        let (c1, s1) = expect_cs(&evolve_osc(&st, &ops, t).unwrap(), &ops);
        let want = Complex64::new(c0, s0) * Complex64::from_polar(1.0, ops.omega * t);
        prop_assert!((Complex64::new(c1, s1) - want).norm() < 1e-8);
    }

    #[test]
    fn evolution_preserves_norm(nbar in 0.5f64..10.0, t in 0.0f64..50.0) {
        let ops = build_operators(1.0, 1.0, 64).unwrap();
        let st = OscState::coherent(Complex64::from_polar(nbar.sqrt(), 0.7), 64).unwrap();
        let out = evolve_osc(&st, &ops, t).unwrap();
        let norm: f64 = out.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operators_hermitian(m in 0.1f64..10.0, k in 0.1f64..10.0, n in 2usize..40) {
        let ops = build_operators(m, k, n).unwrap();
        for x in [&ops.h, &ops.q, &ops.p, &ops.c, &ops.s] {
            prop_assert!(x.hermiticity_defect() <= 1e-12);
        }
    }
}
