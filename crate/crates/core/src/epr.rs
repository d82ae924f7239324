//! Local hidden-variable coincidence experiments and CHSH scores.
//!
//! Each event carries one polarization angle `λ` shared by both photons.
//! Each wing transmits on its own with probability `p(λ − setting)`, with an
//! optional extra per-photon weight `w(b)` from an impact parameter `b`.
//! Transmit maps to `+1` and absorb to `−1`.
//!
//! Every random number is a pure function of `(seed, stream, event index)`.
//! Because of that, any split of the event range gives identical merged counts.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

use crate::polarizer::{chain_transmission, pair_transmission, TransferProfile};
use crate::rng::{self, Stream};
use crate::{Error, Result};

mod streams {
    pub const LAMBDA: u64 = 0;
    pub const LAMBDA_CELL: u64 = 1;
    pub const WING_A: u64 = 2;
    pub const WING_B: u64 = 3;
    pub const IMPACT_A: u64 = 4;
    pub const IMPACT_B: u64 = 5;
}

/// Distribution of the shared polarization angle over `[0, π)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum LambdaDistribution {
    #[default]
    Uniform,
    /// Piecewise-constant density on equal bins; holds the normalized CDF.
    Histogram(Vec<f64>),
}

impl LambdaDistribution {
    pub fn histogram(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "need nonnegative finite bin weights",
            });
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "total weight is zero",
            });
        }
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        *cdf.last_mut().expect("non-empty") = 1.0;
        Ok(Self::Histogram(cdf))
    }

    #[inline]
    fn sample(&self, u: f64, v: f64) -> f64 {
        match self {
            Self::Uniform => u * PI,
            Self::Histogram(cdf) => {
                let bin = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                (bin as f64 + v) * PI / cdf.len() as f64
            }
        }
    }
}

/// Per-photon transmission weight as a function of the normalized impact
/// parameter `b ∈ [0, 1)`, drawn uniformly and independently per wing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImpactWeight {
    /// `1 − b`
    Linear,
    /// `1 − b²`
    Quadratic,
    /// `exp(−b²/(2·width²))`
    Gaussian { width: f64 },
}

impl ImpactWeight {
    #[inline]
    pub fn weight(&self, b: f64) -> f64 {
        match *self {
            Self::Linear => 1.0 - b,
            Self::Quadratic => 1.0 - b * b,
            Self::Gaussian { width } => libm::exp(-b * b / (2.0 * width * width)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSource {
    pub lambda: LambdaDistribution,
    pub impact: Option<ImpactWeight>,
    pub seed: u64,
}

impl PairSource {
    pub fn uniform(seed: u64) -> Self {
        Self {
            lambda: LambdaDistribution::Uniform,
            impact: None,
            seed,
        }
    }

    pub fn with_lambda(mut self, lambda: LambdaDistribution) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_impact(mut self, impact: ImpactWeight) -> Self {
        self.impact = Some(impact);
        self
    }

    /// Same source on an independent stream family, for a separate run.
    pub fn substream(&self, run: u64) -> Self {
        Self {
            seed: rng::derive(self.seed, run),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CoincidenceCounts {
    pub n_events: u64,
    pub pp: u64,
    pub pm: u64,
    pub mp: u64,
    pub mm: u64,
}

impl CoincidenceCounts {
    /// Sum of counts from disjoint event ranges.
    pub fn merge(self, other: Self) -> Self {
        Self {
            n_events: self.n_events + other.n_events,
            pp: self.pp + other.pp,
            pm: self.pm + other.pm,
            mp: self.mp + other.mp,
            mm: self.mm + other.mm,
        }
    }

    pub fn coincidence_rate(&self) -> f64 {
        if self.n_events == 0 {
            0.0
        } else {
            self.pp as f64 / self.n_events as f64
        }
    }
}

/// One simulated setting pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceRun {
    pub alpha: f64,
    pub beta: f64,
    pub counts: CoincidenceCounts,
}

pub fn simulate_coincidences(
    source: &PairSource,
    p: &TransferProfile,
    alpha: f64,
    beta: f64,
    n: u64,
) -> CoincidenceRun {
    CoincidenceRun {
        alpha,
        beta,
        counts: simulate_range(source, p, alpha, beta, 0..n),
    }
}

/// Events with indices in `range`. Results for disjoint ranges merge exactly.
pub fn simulate_range(
    source: &PairSource,
    p: &TransferProfile,
    alpha: f64,
    beta: f64,
    range: Range<u64>,
) -> CoincidenceCounts {
    let seed = source.seed;
    let lam = Stream::new(seed, streams::LAMBDA);
    let lam_cell = Stream::new(seed, streams::LAMBDA_CELL);
    let wing_a = Stream::new(seed, streams::WING_A);
    let wing_b = Stream::new(seed, streams::WING_B);
    let imp_a = Stream::new(seed, streams::IMPACT_A);
    let imp_b = Stream::new(seed, streams::IMPACT_B);

    let mut c = CoincidenceCounts::default();
    for i in range {
        let v = match source.lambda {
            LambdaDistribution::Uniform => 0.0,
            LambdaDistribution::Histogram(_) => lam_cell.uniform_at(i),
        };
        let lambda = source.lambda.sample(lam.uniform_at(i), v);
        let mut pa = p.eval(lambda - alpha);
        let mut pb = p.eval(lambda - beta);
        if let Some(w) = source.impact {
            pa *= w.weight(imp_a.uniform_at(i));
            pb *= w.weight(imp_b.uniform_at(i));
        }
        let a = wing_a.uniform_at(i) < pa;
        let b = wing_b.uniform_at(i) < pb;
        match (a, b) {
            (true, true) => c.pp += 1,
            (true, false) => c.pm += 1,
            (false, true) => c.mp += 1,
            (false, false) => c.mm += 1,
        }
        c.n_events += 1;
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    pub std_error: f64,
}

/// `E = (n₊₊ + n₋₋ − n₊₋ − n₋₊)/n` with binomial standard error `√((1−E²)/n)`.
pub fn correlation(counts: &CoincidenceCounts) -> Result<Correlation> {
    if counts.n_events == 0 {
        return Err(Error::NoEvents);
    }
    let n = counts.n_events as f64;
    let agree = (counts.pp + counts.mm) as f64;
    let disagree = (counts.pm + counts.mp) as f64;
    let value = (agree - disagree) / n;
    let std_error = libm::sqrt(((1.0 - value * value) / n).max(0.0));
    Ok(Correlation { value, std_error })
}

/// Settings `(α, α′; β, β′)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshSettings {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub beta: f64,
    pub beta_prime: f64,
}

impl ChshSettings {
    /// Wing A at `{π/4, 0}`, wing B at `{π/8, 3π/8}`. The minus term pairs
    /// `α′ = 0` with `β′ = 3π/8`, and the quantum comparator reaches `2√2`.
    pub fn canonical() -> Self {
        Self {
            alpha: PI / 4.0,
            alpha_prime: 0.0,
            beta: PI / 8.0,
            beta_prime: 3.0 * PI / 8.0,
        }
    }

    /// The four `(wing A, wing B)` pairs in score order:
    /// `(α,β), (α′,β), (α,β′), (α′,β′)`.
    pub fn pairs(&self) -> [(f64, f64); 4] {
        [
            (self.alpha, self.beta),
            (self.alpha_prime, self.beta),
            (self.alpha, self.beta_prime),
            (self.alpha_prime, self.beta_prime),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshScore {
    pub correlations: [Correlation; 4],
    /// `E₁ + E₂ + E₃ − E₄`
    pub s: f64,
    pub std_error: f64,
}

/// Combine four correlations; standard errors add in quadrature.
pub fn chsh(e: [Correlation; 4]) -> Result<ChshScore> {
    if let Some(bad) = e.iter().find(|c| !(-1.0..=1.0).contains(&c.value)) {
        return Err(Error::CorrelationOutOfRange { value: bad.value });
    }
    let s = e[0].value + e[1].value + e[2].value - e[3].value;
    let std_error = libm::sqrt(e.iter().map(|c| c.std_error * c.std_error).sum());
    Ok(ChshScore {
        correlations: e,
        s,
        std_error,
    })
}

/// Run all four setting pairs, each on its own substream of `source`.
pub fn simulate_chsh(
    source: &PairSource,
    p: &TransferProfile,
    settings: &ChshSettings,
    n: u64,
) -> Result<(ChshScore, [CoincidenceRun; 4])> {
    let runs = settings
        .pairs()
        .iter()
        .enumerate()
        .map(|(j, &(a, b))| simulate_coincidences(&source.substream(j as u64), p, a, b, n))
        .collect::<Vec<_>>();
    let runs: [CoincidenceRun; 4] = runs.try_into().expect("four pairs");
    let e = [
        correlation(&runs[0].counts)?,
        correlation(&runs[1].counts)?,
        correlation(&runs[2].counts)?,
        correlation(&runs[3].counts)?,
    ];
    Ok((chsh(e)?, runs))
}

/// `cos 2(α−β)` for equally polarized photon pairs.
pub fn quantum_correlation(alpha: f64, beta: f64) -> f64 {
    libm::cos(2.0 * (alpha - beta))
}

pub fn quantum_chsh(settings: &ChshSettings) -> f64 {
    let [a, b, c, d] = settings.pairs().map(|(x, y)| quantum_correlation(x, y));
    a + b + c - d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrangementCheck {
    /// One photon through polarizers at `0` then `α`.
    pub one_side: f64,
    /// Two photons sharing `λ`, one polarizer per wing.
    pub coincidence: f64,
    pub difference: f64,
}

/// Compare sequential and coincidence arrangements of two polarizers.
///
/// The two values come from independent routes: the exact product integral
/// over cell edges, and the discrete correlation with interpolation.
pub fn arrangement_equivalence(p: &TransferProfile, alpha: f64) -> Result<ArrangementCheck> {
    let one_side = chain_transmission(p, &[0.0, alpha])?;
    let coincidence = pair_transmission(p, p, alpha)?;
    Ok(ArrangementCheck {
        one_side,
        coincidence,
        difference: libm::fabs(one_side - coincidence),
    })
}
