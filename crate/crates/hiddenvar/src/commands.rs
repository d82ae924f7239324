//! Subcommand bodies. Each writes its artifacts under `cfg.out` and returns
//! a one-line summary, or an error whose kind sets the exit status.

use std::f64::consts::PI;
use std::path::Path;

use hiddenvar_core::epr::{
    quantum_chsh, ChshScore, ChshSettings, CoincidenceRun, ImpactWeight, LambdaDistribution,
    PairSource,
};
use hiddenvar_core::grid::AngularGrid;
use hiddenvar_core::oscillator::{self, OscState};
use hiddenvar_core::polarizer::{
    self, chain_transmission_with, mueller_chain_leaky, ChainMode, MalusTarget, SolveError,
    SolverOptions, StokesVector, TransferProfile,
};
use hiddenvar_core::twobody::{GaussianPacket, TimeOperatorOptions, Vec3};
use serde::{Deserialize, Serialize};

use crate::cli::{
    ChainArgs, ChainModeArg, ChshArgs, DeconvolveArgs, OscArgs, PacketArgs, ScanArgs, SourceArgs,
};
use crate::config::{ExperimentConfig, Format};
use crate::error::CliError;
use crate::io::{self, ProfileHeader};
use crate::parallel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeconvolveReport {
    pub epsilon: f64,
    pub grid: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub step: f64,
    /// `max |p ⋆ p − M|` of the written profile.
    pub residual: f64,
    pub iterations: usize,
    pub stage: String,
    pub converged: bool,
    /// All spectral coefficients of the target are nonnegative.
    pub bochner_feasible: bool,
    pub spectral_box_violation: f64,
    /// `max |p − cos²λ|`.
    pub distance_from_cos_squared: f64,
    pub mean: f64,
}

pub fn deconvolve(cfg: &ExperimentConfig, args: &DeconvolveArgs) -> Result<String, CliError> {
    let epsilon = cfg
        .epsilon
        .ok_or_else(|| CliError::Input("deconvolve needs --epsilon".into()))?;
    if !(args.step > 0.0 && args.step.is_finite()) {
        return Err(CliError::Input(format!(
            "step must be positive, got {}",
            args.step
        )));
    }
    let grid = AngularGrid::new(cfg.grid)?;
    let target = MalusTarget::generalized(grid, epsilon)?;
    let options = SolverOptions {
        tolerance: cfg.tolerance,
        max_iterations: cfg.max_iterations,
        step: args.step,
    };
    let run = match polarizer::deconvolve(&target, &options) {
        Ok(run) => run,
        Err(e @ (SolveError::Infeasible { .. } | SolveError::NotEven { .. })) => {
            return Err(CliError::Postcondition(format!(
                "target is not an autocorrelation: {e}"
            )));
        }
        Err(SolveError::Convergence { best }) => *best,
    };
    let header = ProfileHeader {
        grid: cfg.grid,
        epsilon: Some(epsilon),
        provenance: format!(
            "deconvolve epsilon={epsilon} grid={} tolerance={} max_iterations={} step={}",
            cfg.grid, cfg.tolerance, cfg.max_iterations, args.step
        ),
    };
    io::write_profile(&cfg.out.join("profile.csv"), &run.profile, &header)?;
    let cos2 = TransferProfile::cos_squared(grid);
    let report = DeconvolveReport {
        epsilon,
        grid: cfg.grid,
        tolerance: cfg.tolerance,
        max_iterations: cfg.max_iterations,
        step: args.step,
        residual: run.residual,
        iterations: run.iterations,
        stage: format!("{:?}", run.stage),
        converged: run.converged,
        bochner_feasible: true,
        spectral_box_violation: run.spectral_box_violation,
        distance_from_cos_squared: run.profile.function().max_abs_diff(cos2.function())?,
        mean: run.profile.mean(),
    };
    write_report(cfg, Format::Json, "report", &report)?;
    if run.converged {
        Ok(format!(
            "residual {:e} after {} iterations",
            run.residual, run.iterations
        ))
    } else {
        Err(CliError::Postcondition(format!(
            "residual {:e} exceeds tolerance {:e} after {} iterations; best profile written",
            run.residual, cfg.tolerance, run.iterations
        )))
    }
}

fn write_report<T: Serialize>(
    cfg: &ExperimentConfig,
    default: Format,
    stem: &str,
    value: &T,
) -> Result<(), CliError> {
    match cfg.format_or(default) {
        Format::Json => io::write_json(&cfg.out.join(format!("{stem}.json")), value),
        Format::Csv => io::write_csv(
            &cfg.out.join(format!("{stem}.csv")),
            std::slice::from_ref(value),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainValue {
    pub mode: String,
    pub transmission: f64,
    /// Transmission divided by that of the first polarizer alone.
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainDifference {
    pub first: String,
    pub second: String,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub angles: Vec<f64>,
    pub epsilon: f64,
    pub values: Vec<ChainValue>,
    pub differences: Vec<ChainDifference>,
}

fn mode_name(m: ChainModeArg) -> &'static str {
    match m {
        ChainModeArg::Paper => "paper",
        ChainModeArg::Collapse => "collapse",
        ChainModeArg::Mueller => "mueller",
    }
}

pub fn chain_report(
    profile: Option<&TransferProfile>,
    angles: &[f64],
    modes: &[ChainModeArg],
    epsilon: f64,
) -> Result<ChainReport, CliError> {
    if angles.is_empty() {
        return Err(CliError::Input("need at least one angle".into()));
    }
    let mut values = Vec::new();
    for &m in modes {
        let (t, first) = match m {
            ChainModeArg::Mueller => {
                let u = StokesVector::unpolarized(1.0)?;
                (
                    mueller_chain_leaky(&u, angles, epsilon)?.1,
                    mueller_chain_leaky(&u, &angles[..1], epsilon)?.1,
                )
            }
            ChainModeArg::Paper | ChainModeArg::Collapse => {
                let p = profile.ok_or_else(|| {
                    CliError::Input(format!("mode {} needs --profile", mode_name(m)))
                })?;
                let mode = if m == ChainModeArg::Paper {
                    ChainMode::NoRepolarization
                } else {
                    ChainMode::Collapse
                };
                (chain_transmission_with(p, angles, mode)?, p.mean())
            }
        };
        let relative = if first > 0.0 { t / first } else { 0.0 };
        values.push(ChainValue {
            mode: mode_name(m).into(),
            transmission: t,
            relative,
        });
    }
    let mut differences = Vec::new();
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            differences.push(ChainDifference {
                first: values[i].mode.clone(),
                second: values[j].mode.clone(),
                difference: values[i].transmission - values[j].transmission,
            });
        }
    }
    Ok(ChainReport {
        angles: angles.to_vec(),
        epsilon,
        values,
        differences,
    })
}

pub fn chain(cfg: &ExperimentConfig, args: &ChainArgs) -> Result<String, CliError> {
    let angles = io::parse_angles(&args.angles, args.degrees).map_err(CliError::Input)?;
    let modes = if args.mode.is_empty() {
        vec![
            ChainModeArg::Paper,
            ChainModeArg::Collapse,
            ChainModeArg::Mueller,
        ]
    } else {
        args.mode.clone()
    };
    let profile = args
        .profile
        .as_deref()
        .map(io::read_profile)
        .transpose()?
        .map(|(p, _)| p);
    let report = chain_report(
        profile.as_ref(),
        &angles,
        &modes,
        cfg.epsilon.unwrap_or(0.0),
    )?;
    match cfg.format_or(Format::Json) {
        Format::Json => io::write_json(&cfg.out.join("chain.json"), &report)?,
        Format::Csv => {
            io::write_csv(&cfg.out.join("chain.csv"), &report.values)?;
            io::write_csv(&cfg.out.join("chain_differences.csv"), &report.differences)?;
        }
    }
    Ok(report
        .values
        .iter()
        .map(|v| format!("{} {}", v.mode, v.transmission))
        .collect::<Vec<_>>()
        .join(", "))
}

fn parse_impact(s: &str) -> Result<ImpactWeight, CliError> {
    match s {
        "linear" => Ok(ImpactWeight::Linear),
        "quadratic" => Ok(ImpactWeight::Quadratic),
        _ => {
            let width = s
                .strip_prefix("gaussian:")
                .and_then(|w| w.parse::<f64>().ok())
                .filter(|w| *w > 0.0 && w.is_finite())
                .ok_or_else(|| CliError::Input(format!("bad impact weight `{s}`")))?;
            Ok(ImpactWeight::Gaussian { width })
        }
    }
}

fn build_source(
    cfg: &ExperimentConfig,
    args: &SourceArgs,
) -> Result<(PairSource, TransferProfile), CliError> {
    let (profile, _) = io::read_profile(&args.profile)?;
    let mut source = PairSource::uniform(cfg.seed);
    if let Some(w) = &args.lambda_weights {
        let weights = w
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| CliError::Input(format!("bad lambda weights `{w}`")))?;
        source = source.with_lambda(LambdaDistribution::histogram(&weights)?);
    }
    if let Some(i) = &args.impact {
        source = source.with_impact(parse_impact(i)?);
    }
    if cfg.events == 0 {
        return Err(CliError::Input("events must be positive".into()));
    }
    Ok((source, profile))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub alpha: f64,
    pub beta: f64,
    pub n_events: u64,
    pub pp: u64,
    pub pm: u64,
    pub mp: u64,
    pub mm: u64,
    pub correlation: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingsRecord {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub beta: f64,
    pub beta_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshReport {
    pub settings: SettingsRecord,
    pub seed: u64,
    pub events: u64,
    pub runs: Vec<RunRecord>,
    pub s: f64,
    pub std_error: f64,
    pub quantum_s: f64,
    /// `S ≤ 2 + 5·SE`
    pub within_local_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ChshRow {
    alpha: f64,
    alpha_prime: f64,
    beta: f64,
    beta_prime: f64,
    seed: u64,
    events: u64,
    e1: f64,
    e2: f64,
    e3: f64,
    e4: f64,
    s: f64,
    std_error: f64,
    quantum_s: f64,
    within_local_bound: bool,
}

fn within_bound(score: &ChshScore) -> bool {
    score.s <= 2.0 + 5.0 * score.std_error
}

pub fn chsh_report(
    source: &PairSource,
    p: &TransferProfile,
    settings: &ChshSettings,
    n: u64,
) -> Result<ChshReport, CliError> {
    let (score, runs) = parallel::simulate_chsh(source, p, settings, n)?;
    let records = runs
        .iter()
        .zip(&score.correlations)
        .map(|(r, e): (&CoincidenceRun, _)| RunRecord {
            alpha: r.alpha,
            beta: r.beta,
            n_events: r.counts.n_events,
            pp: r.counts.pp,
            pm: r.counts.pm,
            mp: r.counts.mp,
            mm: r.counts.mm,
            correlation: e.value,
            std_error: e.std_error,
        })
        .collect();
    Ok(ChshReport {
        settings: SettingsRecord {
            alpha: settings.alpha,
            alpha_prime: settings.alpha_prime,
            beta: settings.beta,
            beta_prime: settings.beta_prime,
        },
        seed: source.seed,
        events: n,
        runs: records,
        s: score.s,
        std_error: score.std_error,
        quantum_s: quantum_chsh(settings),
        within_local_bound: within_bound(&score),
    })
}

pub fn chsh(cfg: &ExperimentConfig, args: &ChshArgs) -> Result<String, CliError> {
    let (source, profile) = build_source(cfg, &args.source)?;
    let settings = match &args.settings {
        None => ChshSettings::canonical(),
        Some(s) => {
            let a = io::parse_angles(s, args.degrees).map_err(CliError::Input)?;
            let [alpha, alpha_prime, beta, beta_prime] = a[..] else {
                return Err(CliError::Input(format!(
                    "settings need four angles, got {}",
                    a.len()
                )));
            };
            ChshSettings {
                alpha,
                alpha_prime,
                beta,
                beta_prime,
            }
        }
    };
    let report = chsh_report(&source, &profile, &settings, cfg.events)?;
    match cfg.format_or(Format::Json) {
        Format::Json => io::write_json(&cfg.out.join("chsh.json"), &report)?,
        Format::Csv => {
            let e: Vec<f64> = report.runs.iter().map(|r| r.correlation).collect();
            let row = ChshRow {
                alpha: settings.alpha,
                alpha_prime: settings.alpha_prime,
                beta: settings.beta,
                beta_prime: settings.beta_prime,
                seed: report.seed,
                events: report.events,
                e1: e[0],
                e2: e[1],
                e3: e[2],
                e4: e[3],
                s: report.s,
                std_error: report.std_error,
                quantum_s: report.quantum_s,
                within_local_bound: report.within_local_bound,
            };
            io::write_csv(&cfg.out.join("chsh.csv"), &[row])?;
        }
    }
    let summary = format!(
        "S = {} ± {} (quantum {})",
        report.s, report.std_error, report.quantum_s
    );
    if report.within_local_bound {
        Ok(summary)
    } else {
        Err(CliError::Postcondition(format!(
            "local bound violated: {summary}"
        )))
    }
}

pub fn scan(cfg: &ExperimentConfig, args: &ScanArgs) -> Result<String, CliError> {
    let (source, profile) = build_source(cfg, &args.source)?;
    if args.points < 2 {
        return Err(CliError::Input("scan needs at least two points".into()));
    }
    let mut rows = Vec::with_capacity(args.points);
    for i in 0..args.points {
        let theta = 0.5 * PI * i as f64 / (args.points - 1) as f64;
        let settings = ChshSettings {
            alpha: 2.0 * theta,
            alpha_prime: 0.0,
            beta: theta,
            beta_prime: 3.0 * theta,
        };
        let src = source.substream(i as u64);
        let (score, _) = parallel::simulate_chsh(&src, &profile, &settings, cfg.events)?;
        let e = score.correlations.map(|c| c.value);
        rows.push(ChshRow {
            alpha: settings.alpha,
            alpha_prime: settings.alpha_prime,
            beta: settings.beta,
            beta_prime: settings.beta_prime,
            seed: src.seed,
            events: cfg.events,
            e1: e[0],
            e2: e[1],
            e3: e[2],
            e4: e[3],
            s: score.s,
            std_error: score.std_error,
            quantum_s: quantum_chsh(&settings),
            within_local_bound: within_bound(&score),
        });
    }
    io::write_csv(&cfg.out.join("scan.csv"), &rows)?;
    let max = rows.iter().map(|r| r.s).fold(f64::MIN, f64::max);
    let bad = rows.iter().filter(|r| !r.within_local_bound).count();
    if bad == 0 {
        Ok(format!("{} settings, max S = {max}", rows.len()))
    } else {
        Err(CliError::Postcondition(format!(
            "{bad} of {} settings exceed the local bound",
            rows.len()
        )))
    }
}

/// Packet specification file. Give either `impact` with `epoch_closest`, or
/// `center_initial` with `epoch_initial`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub mass: f64,
    pub wave_vector: Vec3,
    pub spectral_width: f64,
    /// Epoch of the first trajectory row.
    pub epoch: f64,
    #[serde(default)]
    pub impact: Option<Vec3>,
    #[serde(default)]
    pub epoch_closest: Option<f64>,
    #[serde(default)]
    pub center_initial: Option<Vec3>,
    #[serde(default)]
    pub epoch_initial: Option<f64>,
    #[serde(default)]
    pub quadrature_order: Option<usize>,
}

impl PacketSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        io::read_json(path)
    }

    pub fn build(&self, path: &Path) -> Result<GaussianPacket, CliError> {
        let at = |key: &str, msg: String| match io::line_of_key(path, key) {
            Some(line) => CliError::at_line(path, line, msg),
            None => CliError::Input(format!("{}: {msg}", path.display())),
        };
        let built = match (self.impact, self.center_initial) {
            (Some(b), None) => {
                if self.epoch_initial.is_some() {
                    return Err(at(
                        "epoch_initial",
                        "`epoch_initial` goes with `center_initial`, not `impact`".into(),
                    ));
                }
                GaussianPacket::through_closest_approach(
                    self.mass,
                    b,
                    self.wave_vector,
                    self.spectral_width,
                    self.epoch_closest.unwrap_or(0.0),
                    self.epoch,
                )
            }
            (None, Some(x)) => {
                if self.epoch_closest.is_some() {
                    return Err(at(
                        "epoch_closest",
                        "`epoch_closest` goes with `impact`, not `center_initial`".into(),
                    ));
                }
                GaussianPacket::new(
                    self.mass,
                    x,
                    self.epoch_initial.unwrap_or(0.0),
                    self.wave_vector,
                    self.spectral_width,
                    self.epoch,
                )
            }
            (Some(_), Some(_)) => {
                return Err(at(
                    "center_initial",
                    "give `impact` or `center_initial`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Input(format!(
                    "{}: missing `impact` or `center_initial`",
                    path.display()
                )))
            }
        };
        built.map_err(|e| match e {
            hiddenvar_core::Error::InvalidParameter { name, reason } => {
                at(name, format!("{name}: {reason}"))
            }
            other => at("mass", other.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub tau: f64,
    pub q_x: f64,
    pub q_y: f64,
    pub q_z: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub b: f64,
}

pub fn trajectory(
    start: &GaussianPacket,
    t_end: f64,
    steps: usize,
    opts: &TimeOperatorOptions,
) -> Result<Vec<TrajectoryRow>, CliError> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(CliError::Input(format!(
            "t-end must be nonnegative, got {t_end}"
        )));
    }
    if steps == 0 {
        return Err(CliError::Input("steps must be positive".into()));
    }
    let b = start.impact_parameter()?;
    (0..=steps)
        .map(|k| {
            let p = start.evolve(t_end * k as f64 / steps as f64)?;
            let c = p.center();
            let m = p.momentum();
            Ok(TrajectoryRow {
                tau: p.epoch,
                q_x: c[0],
                q_y: c[1],
                q_z: c[2],
                p_x: m[0],
                p_y: m[1],
                p_z: m[2],
                h: p.expect_h(),
                q: p.expect_q(),
                r: p.expect_r(),
                t: p.expect_t_with(opts)?,
                b,
            })
        })
        .collect::<Result<Vec<_>, hiddenvar_core::Error>>()
        .map_err(CliError::from)
}

pub fn packet(cfg: &ExperimentConfig, args: &PacketArgs) -> Result<String, CliError> {
    let spec = PacketSpec::load(&args.spec)?;
    let start = spec.build(&args.spec)?;
    let mut opts = TimeOperatorOptions::default();
    if let Some(order) = spec.quadrature_order {
        if order == 0 {
            return Err(CliError::Input("quadrature_order must be positive".into()));
        }
        opts.order = order;
    }
    let rows = trajectory(&start, args.t_end, args.steps, &opts)?;
    io::write_csv(&cfg.out.join("trajectory.csv"), &rows)?;
    Ok(format!("{} rows, b = {}", rows.len(), rows[0].b))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRow {
    pub t: f64,
    pub c: f64,
    pub s: f64,
    pub radius: f64,
    pub phase: f64,
    pub sheet: i64,
    pub unwrapped: f64,
    pub time_operator: f64,
    pub cs_norm: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    pub dim: usize,
    pub buffer: usize,
    pub mass: f64,
    pub spring: f64,
    pub omega: f64,
    pub low_dimension: bool,
    pub interior_hs: f64,
    pub interior_hc: f64,
    pub full_hs: f64,
    pub full_hc: f64,
    pub exact_h_hs: f64,
    pub exact_h_hc: f64,
}

pub const INTERIOR_RESIDUAL_LIMIT: f64 = 1e-8;

pub fn osc(cfg: &ExperimentConfig, args: &OscArgs) -> Result<String, CliError> {
    let ops = oscillator::build_operators(args.mass, args.spring, args.dim)?;
    let buffer = args.buffer.unwrap_or(args.dim / 4);
    let r = oscillator::commutator_residuals_with(&ops, buffer);
    let row = ResidualRow {
        dim: r.dim,
        buffer: r.buffer,
        mass: args.mass,
        spring: args.spring,
        omega: r.omega,
        low_dimension: ops.low_dimension,
        interior_hs: r.interior_hs,
        interior_hc: r.interior_hc,
        full_hs: r.full_hs,
        full_hc: r.full_hc,
        exact_h_hs: r.exact_h_hs,
        exact_h_hc: r.exact_h_hc,
    };
    write_report(cfg, Format::Csv, "residuals", &row)?;
    let interior = r.interior_hs.max(r.interior_hc);
    if args.dim >= 32 && interior > INTERIOR_RESIDUAL_LIMIT {
        return Err(CliError::Postcondition(format!(
            "interior residual {interior:e} above {INTERIOR_RESIDUAL_LIMIT:e}"
        )));
    }

    if !(args.nbar > 0.0 && args.nbar.is_finite()) {
        return Err(CliError::Input(format!(
            "nbar must be positive, got {}",
            args.nbar
        )));
    }
    if args.steps == 0 {
        return Err(CliError::Input("steps must be positive".into()));
    }
    let phase0 = io::parse_angle(&args.phase, false).map_err(CliError::Input)?;
    let t_end = args.t_end.unwrap_or(3.0 * 2.0 * PI / ops.omega);
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(CliError::Input(format!(
            "t-end must be nonnegative, got {t_end}"
        )));
    }
    let dt = t_end / args.steps as f64;
    let mut state = OscState::coherent_with_phase(args.nbar, phase0, args.dim)?;
    let mut rows = Vec::with_capacity(args.steps + 1);
    for k in 0..=args.steps {
        if k > 0 {
            state = oscillator::evolve_osc(&state, &ops, dt)?;
        }
        let (c, s) = oscillator::expect_cs(&state, &ops);
        let ph =
            oscillator::phase(&state, &ops).map_err(|e| CliError::Postcondition(e.to_string()))?;
        let cs = oscillator::cs_norm_with(&state, &ops, args.tail_threshold)
            .map_err(|e| CliError::Postcondition(format!("{e}; increase --dim")))?;
        rows.push(PhaseRow {
            t: dt * k as f64,
            c,
            s,
            radius: ph.radius,
            phase: ph.angle,
            sheet: ph.sheet,
            unwrapped: ph.unwrapped(),
            time_operator: ph.time(ops.omega),
            cs_norm: cs,
            r: oscillator::expect_r(&state, &ops),
        });
    }
    io::write_csv(&cfg.out.join("phase.csv"), &rows)?;
    let last = rows.last().expect("at least one row");
    Ok(format!(
        "interior residual {interior:e}, {} sheets, <C²+S²> = {}",
        last.sheet - rows[0].sheet,
        last.cs_norm
    ))
}
