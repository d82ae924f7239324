//! Acceptance gate. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line each, and exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use hiddenvar::parallel;
use hiddenvar_core::epr::{
    arrangement_equivalence, quantum_chsh, ChshSettings, LambdaDistribution, PairSource,
};
use hiddenvar_core::grid::{autocorrelation, AngularGrid};
use hiddenvar_core::oscillator::{self, OscState};
use hiddenvar_core::polarizer::{
    chain_transmission_with, solve_profile, ChainMode, MalusTarget, SolveError, SolverOptions,
    TransferProfile,
};
use hiddenvar_core::rng::Stream;
use hiddenvar_core::twobody::{extended_inner, lift_to_extended, GaussianPacket};
use hiddenvar_core::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Solve for ε and return the profile, converged or best effort.
fn recovered(eps: f64) -> (TransferProfile, f64, bool, f64) {
    let grid = AngularGrid::new(256).unwrap();
    let target = MalusTarget::generalized(grid, eps).unwrap();
    let start = Instant::now();
    let result = solve_profile(&target, &SolverOptions::default());
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(p) => {
            let r = autocorrelation(p.function())
                .max_abs_diff(target.curve())
                .unwrap();
            (p, r, true, secs)
        }
        Err(SolveError::Convergence { best }) => (best.profile.clone(), best.residual, false, secs),
        Err(e) => panic!("ε = {eps}: {e}"),
    }
}

fn criterion_1() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for eps in [0.01, 0.05] {
        let (_, residual, converged, secs) = recovered(eps);
        let ok = converged && residual <= 1e-6 && secs < 5.0;
        pass &= ok;
        parts.push(format!(
            "ε={eps}: residual {residual:.3e} (need ≤ 1e-6), {secs:.2} s"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_2() -> Outcome {
    let grid = AngularGrid::new(256).unwrap();
    let (p, residual, converged, _) = recovered(0.01);
    let d = p
        .function()
        .max_abs_diff(TransferProfile::cos_squared(grid).function())
        .unwrap();
    let note = if converged {
        ""
    } else {
        " (best iterate, not converged)"
    };
    outcome(
        d > 0.05,
        format!("max|p − cos²| = {d:.4} (need > 0.05), residual {residual:.3e}{note}"),
    )
}

fn random_profile(rng: &Stream, base: u64, grid: AngularGrid) -> TransferProfile {
    let kind = rng.u64_at(base) % 3;
    match kind {
        0 => TransferProfile::from_values(
            grid,
            (0..grid.len())
                .map(|j| rng.uniform_at(base + 1 + j as u64))
                .collect(),
        )
        .unwrap(),
        1 => {
            let a: Vec<f64> = (0..4).map(|k| rng.uniform_at(base + 1 + k)).collect();
            TransferProfile::from_fn(grid, |x| {
                let v =
                    a[0] + (a[1] - 0.5) * (2.0 * x).cos() + (a[2] - 0.5) * (4.0 * x + a[3]).sin();
                v.clamp(0.0, 1.0)
            })
            .unwrap()
        }
        _ => TransferProfile::indicator(grid, 0.05 + 1.4 * rng.uniform_at(base + 1)),
    }
}

fn criterion_3() -> Outcome {
    let rng = Stream::new(0x00AC_CE55, 3);
    let grid = AngularGrid::new(128).unwrap();
    let cases = 50;
    let n = 1_000_000;
    let start = Instant::now();
    let mut worst = f64::MIN;
    let mut violations = 0;
    for c in 0..cases {
        let base = 1000 * c as u64;
        let p = random_profile(&rng, base, grid);
        let s = ChshSettings {
            alpha: PI * rng.uniform_at(base + 900),
            alpha_prime: PI * rng.uniform_at(base + 901),
            beta: PI * rng.uniform_at(base + 902),
            beta_prime: PI * rng.uniform_at(base + 903),
        };
        let mut source = PairSource::uniform(rng.u64_at(base + 904));
        if c % 2 == 1 {
            let w: Vec<f64> = (0..8)
                .map(|k| 0.05 + rng.uniform_at(base + 910 + k))
                .collect();
            source = source.with_lambda(LambdaDistribution::histogram(&w).unwrap());
        }
        let (score, _) = parallel::simulate_chsh(&source, &p, &s, n).unwrap();
        let margin = (score.s - 2.0) / score.std_error;
        worst = worst.max(margin);
        if score.s > 2.0 + 5.0 * score.std_error {
            violations += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let q = quantum_chsh(&ChshSettings::canonical());
    let q_ok = (q - 2.0 * 2f64.sqrt()).abs() <= 1e-9;
    outcome(
        violations == 0 && secs < 60.0 && q_ok,
        format!(
            "{cases} cases × 4 × {n} events: {violations} above 2 + 5·SE, max (S−2)/SE = {worst:.2}, {secs:.1} s; quantum S = {q:.12}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let rng = Stream::new(0x00AC_CE55, 4);
    let grid = AngularGrid::new(256).unwrap();
    let mut worst = 0.0f64;
    for c in 0..20u64 {
        let p = random_profile(&rng, 1000 * c, grid);
        let alpha = 2.0 * PI * (rng.uniform_at(1000 * c + 999) - 0.5);
        worst = worst.max(arrangement_equivalence(&p, alpha).unwrap().difference);
    }
    outcome(
        worst <= 1e-12,
        format!("20 profiles: max |one-side − coincidence| = {worst:.3e} (need ≤ 1e-12)"),
    )
}

fn criterion_5() -> Outcome {
    let (p, _, converged, _) = recovered(0.01);
    let angles = [0.0, PI / 4.0, PI / 2.0];
    let paper = chain_transmission_with(&p, &angles, ChainMode::NoRepolarization).unwrap();
    let collapse = chain_transmission_with(&p, &angles, ChainMode::Collapse).unwrap();
    let gap = (paper - collapse).abs();
    let note = if converged {
        ""
    } else {
        " (best iterate, not converged)"
    };
    outcome(
        gap > 0.01,
        format!("paper {paper:.6}, collapse {collapse:.6}, gap {gap:.6} (need > 0.01){note}"),
    )
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for tau in [-5.0, 0.0, 5.0] {
        let p = GaussianPacket::through_closest_approach(
            1.0,
            [0.0, 2.0, 0.0],
            [5.0, 0.0, 0.0],
            0.1,
            0.0,
            tau,
        )
        .unwrap();
        let t = p.expect_t().unwrap();
        let err = (t - tau).abs();
        pass &= err <= 1e-4 * tau.abs() + 1e-6;
        parts.push(format!("τ={tau}: |⟨T⟩−τ| = {err:.1e}"));
    }
    let p = GaussianPacket::through_closest_approach(
        1.0,
        [0.0, 2.0, 0.0],
        [5.0, 0.0, 0.0],
        0.1,
        0.0,
        -1.0,
    )
    .unwrap();
    let dt = 1e-3;
    let rate = (p.evolve(2.0 * dt).unwrap().expect_r() - p.expect_r()) / (2.0 * dt);
    let rel = (rate - 2.0 * p.expect_h()).abs() / (2.0 * p.expect_h());
    pass &= rel <= 1e-9;
    parts.push(format!("d⟨R⟩/dt vs 2⟨H⟩ rel. {rel:.1e}"));
    outcome(pass, parts.join(", "))
}

fn criterion_7() -> Outcome {
    let rng = Stream::new(0x00AC_CE55, 7);
    let u = |k: u64| rng.uniform_at(k);
    let mut packets = Vec::new();
    for c in 0..100u64 {
        let b = 100 * c;
        let tau = if c == 0 { 0.0 } else { 20.0 * (u(b) - 0.5) };
        packets.push(
            GaussianPacket::new(
                0.2 + 3.0 * u(b + 1),
                [u(b + 2) - 0.5, u(b + 3) - 0.5, u(b + 4) - 0.5].map(|x| 8.0 * x),
                20.0 * (u(b + 5) - 0.5),
                [u(b + 6) - 0.5, u(b + 7) - 0.5, u(b + 8) - 0.5].map(|x| 6.0 * x),
                0.05 + u(b + 9),
                tau,
            )
            .unwrap(),
        );
    }
    let lifted: Vec<_> = packets.iter().map(lift_to_extended).collect();
    let mut misplaced = 0;
    for (p, s) in packets.iter().zip(&lifted) {
        let want_in = p.epoch < 0.0;
        if s.in_component.is_some() != want_in || s.out_component.is_some() == want_in {
            misplaced += 1;
        }
    }
    let mut cross = 0usize;
    let mut nonzero = 0usize;
    for a in &lifted {
        for b in &lifted {
            if a.is_incoming() != b.is_incoming() {
                cross += 1;
                if extended_inner(a, b) != Complex64::new(0.0, 0.0) {
                    nonzero += 1;
                }
            }
        }
    }
    outcome(
        misplaced == 0 && nonzero == 0 && cross > 0,
        format!("100 packets: {misplaced} misplaced, {nonzero} of {cross} in/out inner products nonzero"),
    )
}

fn criterion_8() -> Outcome {
    let ops = oscillator::build_operators(1.0, 1.0, 64).unwrap();
    let r = oscillator::commutator_residuals(&ops);
    let interior = r.interior_hs.max(r.interior_hc);

    let ops = oscillator::build_operators(1.0, 1.0, 128).unwrap();
    let st = OscState::coherent_with_phase(10.0, PI / 3.0, 128).unwrap();
    let t = 3.0 * 2.0 * PI / ops.omega;
    let p0 = oscillator::phase(&st, &ops).unwrap();
    let end = oscillator::evolve_osc(&st, &ops, t).unwrap();
    let p1 = oscillator::phase(&end, &ops).unwrap();
    let advance = p1.unwrapped() - p0.unwrapped();
    let rel = (advance - ops.omega * t).abs() / (ops.omega * t);

    let deviation = |nbar: f64| {
        let n = (16.0 * nbar) as usize;
        let ops = oscillator::build_operators(1.0, 1.0, n).unwrap();
        let st = OscState::coherent_with_phase(nbar, PI / 3.0, n).unwrap();
        (oscillator::cs_norm(&st, &ops).unwrap() - 1.0).abs()
    };
    let (d2, d20) = (deviation(2.0), deviation(20.0));
    outcome(
        interior <= 1e-8 && rel <= 1e-3 && d20 < d2,
        format!(
            "N=64 interior residual {interior:.1e}; phase advance rel. error {rel:.1e} over 3 periods ({} sheets); |⟨C²+S²⟩−1| n̄=2 {d2:.2e}, n̄=20 {d20:.2e}",
            end.sheet - st.sheet
        ),
    )
}

fn run_cli(args: &[&str]) -> std::process::ExitStatus {
    Command::new(env!("CARGO_BIN_EXE_hiddenvar"))
        .args(args)
        .output()
        .expect("spawn hiddenvar")
        .status
}

fn dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let profile_dir = root.join("profile");
    run_cli(&[
        "deconvolve",
        "--epsilon",
        "0.05",
        "--grid",
        "64",
        "--out",
        profile_dir.to_str().unwrap(),
    ]);
    let profile = profile_dir.join("profile.csv");
    let spec = root.join("packet.json");
    std::fs::write(
        &spec,
        r#"{"mass": 1.0, "wave_vector": [5.0, 0.0, 0.0], "spectral_width": 0.1, "impact": [0.0, 2.0, 0.0], "epoch": -5.0}"#,
    )
    .unwrap();
    let config = root.join("config.json");
    std::fs::write(
        &config,
        r#"{"command": "chsh", "events": 100000, "seed": 17}"#,
    )
    .unwrap();
    let p = profile.to_str().unwrap();
    let commands: Vec<(&str, Vec<&str>)> = vec![
        (
            "deconvolve",
            vec![
                "deconvolve",
                "--epsilon",
                "0.01",
                "--grid",
                "64",
                "--max-iterations",
                "500",
            ],
        ),
        (
            "chain",
            vec!["chain", "--profile", p, "--angles", "0,pi/4,pi/2"],
        ),
        (
            "chain-csv",
            vec![
                "chain",
                "--profile",
                p,
                "--angles",
                "0,pi/4,pi/2",
                "--format",
                "csv",
            ],
        ),
        (
            "chsh",
            vec!["chsh", "--profile", p, "--events", "200000", "--seed", "11"],
        ),
        (
            "chsh-config",
            vec!["chsh", "--profile", p, "--config", config.to_str().unwrap()],
        ),
        (
            "scan",
            vec!["scan", "--profile", p, "--events", "20000", "--points", "7"],
        ),
        (
            "packet",
            vec![
                "packet",
                "--spec",
                spec.to_str().unwrap(),
                "--t-end",
                "10",
                "--steps",
                "20",
            ],
        ),
        ("osc", vec!["osc", "--dim", "64", "--steps", "100"]),
    ];
    let mut differing = Vec::new();
    for (name, args) in &commands {
        let a = root.join(format!("{name}-a"));
        let b = root.join(format!("{name}-b"));
        let mut args_a = args.clone();
        args_a.extend(["--out", a.to_str().unwrap()]);
        let mut args_b = args.clone();
        args_b.extend(["--out", b.to_str().unwrap()]);
        let (sa, sb) = (run_cli(&args_a), run_cli(&args_b));
        let (fa, fb) = (dir_files(&a), dir_files(&b));
        if sa.code() != sb.code() || fa.is_empty() || fa != fb {
            differing.push(name.to_string());
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} command runs repeated, differing: {:?}",
            commands.len(),
            differing
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("deconvolution round-trip", criterion_1),
        ("contrast with cos² profile", criterion_2),
        ("local CHSH bound", criterion_3),
        ("arrangement equivalence", criterion_4),
        ("three-polarizer divergence", criterion_5),
        ("time operator, continuous case", criterion_6),
        ("in/out orthogonality", criterion_7),
        ("oscillator algebra", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    let mut out = std::io::stdout();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        let mark = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        writeln!(out, "criterion {} [{name}] {mark}: {}", i + 1, o.detail).unwrap();
        out.flush().unwrap();
    }
    writeln!(
        out,
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    )
    .unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
