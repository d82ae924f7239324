//! Monte Carlo over disjoint event ranges on the rayon pool. Counts from the
//! chunks are summed, so results do not depend on the number of threads.

use hiddenvar_core::epr::{
    chsh, correlation, simulate_range, ChshScore, ChshSettings, CoincidenceCounts, CoincidenceRun,
    PairSource,
};
use hiddenvar_core::polarizer::TransferProfile;
use rayon::prelude::*;

pub const CHUNK: u64 = 1 << 16;

pub fn simulate_coincidences(
    source: &PairSource,
    p: &TransferProfile,
    alpha: f64,
    beta: f64,
    n: u64,
) -> CoincidenceRun {
    let chunks = n.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| simulate_range(source, p, alpha, beta, c * CHUNK..((c + 1) * CHUNK).min(n)))
        .reduce(CoincidenceCounts::default, CoincidenceCounts::merge);
    CoincidenceRun {
        alpha,
        beta,
        counts,
    }
}

/// Parallel counterpart of [`hiddenvar_core::epr::simulate_chsh`] with
/// identical output.
pub fn simulate_chsh(
    source: &PairSource,
    p: &TransferProfile,
    settings: &ChshSettings,
    n: u64,
) -> hiddenvar_core::Result<(ChshScore, [CoincidenceRun; 4])> {
    let runs = settings
        .pairs()
        .into_iter()
        .enumerate()
        .map(|(j, (a, b))| simulate_coincidences(&source.substream(j as u64), p, a, b, n))
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
