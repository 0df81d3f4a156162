use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lloyd::{lloyd_run, LloydSettings};
use crate::distortion::{evaluate, Configuration};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::measure::UniformMeasure2D;
use crate::report::{Method, SolveReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSettings {
    pub initial_amplitude: f64,
    pub decay: f64,
    /// Proposals per amplitude level.
    pub batch: usize,
    pub floor_amplitude: f64,
    pub rng_seed: u64,
    /// Hard cap on proposals, whatever the amplitude.
    pub max_proposals: usize,
}

impl AnnealSettings {
    /// Defaults scaled to the support: a quarter of its diameter to start.
    pub fn for_measure(m: &UniformMeasure2D, rng_seed: u64) -> Self {
        Self {
            initial_amplitude: m.support().diameter() / 4.0,
            decay: 0.95,
            batch: 50,
            floor_amplitude: 1e-9,
            rng_seed,
            max_proposals: 1_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_amplitude.is_finite()
            && self.floor_amplitude > 0.0
            && self.floor_amplitude < self.initial_amplitude
            && self.decay > 0.0
            && self.decay < 1.0
            && self.batch >= 1
            && self.max_proposals >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid anneal settings {self:?}")))
        }
    }
}

/// Draws `n` distinct sites from the measure.
pub fn sample_configuration<R: Rng + ?Sized>(n: usize, m: &UniformMeasure2D, rng: &mut R) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    for _ in 0..100 {
        let sites: Vec<Point2> = (0..n).map(|_| m.sample(rng)).collect();
        if let Ok(c) = Configuration::new(sites) {
            return Ok(c);
        }
    }
    Err(Error::InvalidInput("could not draw distinct sites".into()))
}

/// Random-shift descent: move one site by a uniform offset of the current
/// amplitude and keep the move only if distortion drops. The amplitude decays
/// after every batch with no accepted move; the result is polished by Lloyd.
///
/// Moves that leave the support or empty a cell are rejected.
pub fn anneal_search(n: usize, m: &UniformMeasure2D, settings: &AnnealSettings) -> Result<SolveReport<Configuration>> {
    settings.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.rng_seed);
    let mut sites = sample_configuration(n, m, &mut rng)?.into_sites();
    let mut value = evaluate(&Configuration::new(sites.clone())?, m)?.total;
    let mut amplitude = settings.initial_amplitude;
    let mut proposals = 0;
    while amplitude >= settings.floor_amplitude && proposals < settings.max_proposals {
        let mut improved = false;
        for _ in 0..settings.batch {
            proposals += 1;
            let i = rng.gen_range(0..n);
            let shift = Point2::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)) * amplitude;
            let old = sites[i];
            let moved = old + shift;
            if !m.support().contains(moved) {
                continue;
            }
            sites[i] = moved;
            let accepted = Configuration::new(sites.clone())
                .and_then(|c| evaluate(&c, m))
                .ok()
                .filter(|e| !e.has_empty_cell() && e.total < value);
            match accepted {
                Some(e) => {
                    value = e.total;
                    improved = true;
                }
                None => sites[i] = old,
            }
        }
        if !improved {
            amplitude *= settings.decay;
        }
    }
    let coarse = Configuration::new(sites)?;
    let lloyd = LloydSettings {
        seed: settings.rng_seed,
        ..Default::default()
    };
    let (best, iters) = match lloyd_run(&coarse, m, &lloyd) {
        Ok(r) => (r.best, r.iterations),
        Err(Error::NoConvergence { last, iterations }) => (last, iterations),
        Err(e) => return Err(e),
    };
    let value = evaluate(&best, m)?.total;
    let mut report = SolveReport::new(best, value, Method::Anneal);
    report.iterations = proposals + iters;
    report.final_amplitude = Some(amplitude);
    report.seeds = vec![settings.rng_seed];
    Ok(report)
}
