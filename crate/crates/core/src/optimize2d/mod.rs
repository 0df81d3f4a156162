//! Optimal n-means on 2D supports.

mod anneal;
mod family;
mod lloyd;

pub use anneal::{anneal_search, sample_configuration, AnnealSettings};
pub use family::{solve_family, FamilyKind, Frame, FrameShape, SymmetricFamily};
pub use lloyd::{lloyd_run, lloyd_step, LloydSettings};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distortion::{evaluate, quadrature_check, Configuration};
use crate::error::{Error, Result};
use crate::measure::UniformMeasure2D;
use crate::reference::{lookup, SupportTag};
use crate::report::{Candidate, Method, SolveReport};

/// Candidates this close to the minimum count as tied.
pub const TIE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Families, multistart Lloyd and annealing together.
    #[default]
    Auto,
    LloydMultistart,
    Anneal,
    Families,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub seed: u64,
    pub starts: usize,
    pub anneal_restarts: usize,
    pub lloyd: LloydSettings,
    /// Overrides the support-scaled defaults; the seed is replaced per restart.
    pub anneal: Option<AnnealSettings>,
    /// Tolerance of the quadrature cross-check; `None` skips it.
    pub oracle_tol: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 64,
            anneal_restarts: 4,
            lloyd: LloydSettings::default(),
            anneal: None,
            oracle_tol: None,
        }
    }
}

/// Per-start seed derived from the run seed and the start index.
pub fn start_seed(seed: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(seed ^ mix(index))
}

const ANNEAL_STREAM: u64 = 1 << 32;

/// Best of `starts` Lloyd runs from configurations drawn from the measure.
/// Starts run in parallel; the reduction is by value, then start index.
pub fn lloyd_multistart(n: usize, m: &UniformMeasure2D, options: &SolveOptions) -> Result<SolveReport<Configuration>> {
    if options.starts == 0 {
        return Err(Error::InvalidInput("at least one start is required".into()));
    }
    let seeds: Vec<u64> = (0..options.starts as u64)
        .map(|k| start_seed(options.seed, k))
        .collect();
    let runs: Vec<Result<(Configuration, f64, usize)>> = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let start = sample_configuration(n, m, &mut rng)?;
            let settings = LloydSettings {
                seed: s,
                ..options.lloyd
            };
            match lloyd_run(&start, m, &settings) {
                Ok(r) => Ok((r.best, r.value, r.iterations)),
                Err(Error::NoConvergence { last, iterations }) => {
                    let v = evaluate(&last, m)?.total;
                    Ok((last, v, iterations))
                }
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut best: Option<(Configuration, f64)> = None;
    let mut iterations = 0;
    for run in runs {
        let (c, v, it) = run?;
        iterations += it;
        if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
            best = Some((c, v));
        }
    }
    let (c, v) = best.expect("at least one start");
    let mut report = SolveReport::new(c, v, Method::LloydMultistart);
    report.starts_used = options.starts;
    report.iterations = iterations;
    report.seeds = seeds;
    Ok(report)
}

fn anneal_restarts(n: usize, m: &UniformMeasure2D, options: &SolveOptions) -> Result<SolveReport<Configuration>> {
    let restarts = options.anneal_restarts.max(1);
    let seeds: Vec<u64> = (0..restarts as u64)
        .map(|k| start_seed(options.seed, ANNEAL_STREAM + k))
        .collect();
    let runs: Vec<Result<SolveReport<Configuration>>> = seeds
        .par_iter()
        .map(|&s| {
            let mut settings = options.anneal.unwrap_or_else(|| AnnealSettings::for_measure(m, s));
            settings.rng_seed = s;
            anneal_search(n, m, &settings)
        })
        .collect();
    let mut best: Option<SolveReport<Configuration>> = None;
    let mut iterations = 0;
    for run in runs {
        let r = run?;
        iterations += r.iterations;
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    let mut report = best.expect("at least one restart");
    report.starts_used = restarts;
    report.iterations = iterations;
    report.seeds = seeds;
    Ok(report)
}

/// Disc `n ∈ 2..=6` and square `n ∈ {3, 5}` rest on a symmetry assumption.
fn conjecture_conditional(shape: Option<FrameShape>, n: usize) -> bool {
    match shape {
        Some(FrameShape::Disc) => (2..=6).contains(&n),
        Some(FrameShape::Square) => n == 3 || n == 5,
        None => false,
    }
}

/// Runs the generators selected by `strategy` and returns the lowest
/// distortion found, listing every generator's value in `candidates`.
///
/// Values within [`TIE_TOL`] of the minimum are tied, and a family member wins
/// a tie. Sites of the result are sorted lexicographically.
pub fn solve(
    n: usize,
    m: &UniformMeasure2D,
    strategy: Strategy,
    options: &SolveOptions,
) -> Result<SolveReport<Configuration>> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let shape = Frame::of(m.support()).map(|f| f.shape());
    let mut found: Vec<SolveReport<Configuration>> = Vec::new();
    if matches!(strategy, Strategy::Auto | Strategy::Families) {
        if let Some(shape) = shape {
            for kind in FamilyKind::for_n(shape, n) {
                match solve_family(kind, m) {
                    Ok(r) => found.push(r),
                    Err(Error::NoRoot(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    if matches!(strategy, Strategy::Auto | Strategy::LloydMultistart)
        || (strategy == Strategy::Families && found.is_empty())
    {
        found.push(lloyd_multistart(n, m, options)?);
    }
    if matches!(strategy, Strategy::Auto | Strategy::Anneal) {
        found.push(anneal_restarts(n, m, options)?);
    }
    let candidates: Vec<Candidate> = found
        .iter()
        .map(|r| Candidate {
            label: r.method.to_string(),
            value: r.value,
        })
        .collect();
    let min = found.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    let pick = found
        .iter()
        .position(|r| matches!(r.method, Method::Family(_)) && r.value <= min + TIE_TOL)
        .or_else(|| found.iter().position(|r| r.value == min))
        .expect("at least one generator ran");
    let starts: usize = found.iter().map(|r| r.starts_used).sum();
    let iterations: usize = found.iter().map(|r| r.iterations).sum();
    let seeds: Vec<u64> = found.iter().flat_map(|r| r.seeds.iter().copied()).collect();
    let chosen = found.swap_remove(pick);
    let best = chosen.best.sorted();
    let value = evaluate(&best, m)?.total;
    let mut report = SolveReport::new(best, value, chosen.method);
    report.final_amplitude = chosen.final_amplitude;
    report.starts_used = starts;
    report.iterations = iterations;
    report.seeds = seeds;
    report.candidates = candidates;
    report.conjecture_conditional = conjecture_conditional(shape, n);
    report.unverified = SupportTag::of_uniform(m).and_then(|t| lookup(t, n)).is_none();
    if let Some(tol) = options.oracle_tol {
        report.oracle_delta = Some(quadrature_check(&report.best, m, tol) - value);
    }
    Ok(report)
}
