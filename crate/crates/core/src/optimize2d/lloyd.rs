use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distortion::{evaluate, Configuration, Evaluation};
use crate::error::{Error, Result};
use crate::measure::UniformMeasure2D;
use crate::report::{Method, SolveReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LloydSettings {
    pub max_iters: usize,
    /// Stop once no site moves farther than this.
    pub move_tol: f64,
    /// Stop once the step's guaranteed relative decrease in distortion,
    /// `Σ mass_i·‖move_i‖² / V`, falls below this.
    pub value_tol: f64,
    /// Abort on an empty cell instead of respawning the orphaned site.
    pub strict: bool,
    /// Seed for respawn draws.
    pub seed: u64,
}

impl Default for LloydSettings {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            move_tol: 1e-11,
            value_tol: 1e-26,
            strict: false,
            seed: 0,
        }
    }
}

impl LloydSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.move_tol > 0.0) || !(self.value_tol > 0.0) {
            return Err(Error::InvalidInput(format!("invalid Lloyd settings {self:?}")));
        }
        Ok(())
    }
}

fn centroids(config: &Configuration, eval: &Evaluation) -> Result<Configuration> {
    if let Some(i) = eval.empty_cells().first() {
        return Err(Error::EmptyCell(*i));
    }
    Configuration::new(eval.cells.iter().map(|c| c.centroid).collect()).map_err(|_| Error::EmptyCell(config.len() - 1))
}

/// Moves every site to the centroid of its Voronoi cell.
pub fn lloyd_step(config: &Configuration, m: &UniformMeasure2D) -> Result<Configuration> {
    let eval = evaluate(config, m)?;
    centroids(config, &eval)
}

/// Iterates [`lloyd_step`] until sites stop moving.
///
/// Empty cells are repaired by redrawing the orphaned site from the measure,
/// unless `settings.strict` is set. Hitting `max_iters` yields
/// `NoConvergence` carrying the last iterate.
pub fn lloyd_run(
    config: &Configuration,
    m: &UniformMeasure2D,
    settings: &LloydSettings,
) -> Result<SolveReport<Configuration>> {
    settings.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut current = config.clone();
    let mut eval = evaluate(&current, m)?;
    for iter in 1..=settings.max_iters {
        let next = match centroids(&current, &eval) {
            Ok(next) => next,
            Err(Error::EmptyCell(i)) if !settings.strict => {
                let mut sites = current.sites().to_vec();
                sites[i] = m.sample(&mut rng);
                current = match Configuration::new(sites) {
                    Ok(c) => c,
                    Err(_) => continue,
                };
                eval = evaluate(&current, m)?;
                continue;
            }
            Err(e) => return Err(e),
        };
        let moved = current
            .sites()
            .iter()
            .zip(next.sites())
            .map(|(a, b)| a.dist(*b))
            .fold(0.0, f64::max);
        let decrease: f64 = eval
            .cells
            .iter()
            .zip(current.sites().iter().zip(next.sites()))
            .map(|(c, (a, b))| c.mass * (*a - *b).norm_sq())
            .sum();
        let change = decrease / eval.total.max(f64::MIN_POSITIVE);
        let next_eval = evaluate(&next, m)?;
        current = next;
        eval = next_eval;
        if moved < settings.move_tol || change < settings.value_tol {
            let mut report = SolveReport::new(current, eval.total, Method::Lloyd);
            report.iterations = iter;
            report.seeds = vec![settings.seed];
            return Ok(report);
        }
    }
    Err(Error::NoConvergence {
        iterations: settings.max_iters,
        last: current,
    })
}
