//! Random belief rows.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a simulated worker's beliefs are drawn, one row per question.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BeliefGenerator {
    /// Random support of uniform size, flat Dirichlet on it, every entry above `rho`.
    CoarseSupport {
        rho: f64,
        #[serde(default)]
        max_support: Option<usize>,
    },
    /// Symmetric Dirichlet over all options.
    Dirichlet { concentration: f64 },
    /// Uniform over all options.
    Clueless,
    /// `accuracy` on one random option, the remainder spread evenly.
    Expert { accuracy: f64 },
    /// Uniform beliefs; the simulator also forces a random single selection.
    Spammer,
}

impl BeliefGenerator {
    pub fn validate(&self, num_options: usize) -> Result<()> {
        match *self {
            BeliefGenerator::CoarseSupport { rho, max_support } => {
                if !(rho > 0.0 && rho * (num_options as f64) < 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "coarse-support generator needs 0 < rho < 1/B, got rho = {rho}"
                    )));
                }
                if max_support == Some(0) {
                    return Err(Error::InvalidConfig("max_support must be at least 1".into()));
                }
            }
            BeliefGenerator::Dirichlet { concentration } => {
                if !(concentration > 0.0 && concentration.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "dirichlet concentration must be positive, got {concentration}"
                    )));
                }
            }
            BeliefGenerator::Expert { accuracy } => {
                if !(0.0..=1.0).contains(&accuracy) {
                    return Err(Error::InvalidConfig(format!("expert accuracy {accuracy} outside [0,1]")));
                }
            }
            BeliefGenerator::Clueless | BeliefGenerator::Spammer => {}
        }
        Ok(())
    }

    pub fn sample_row<R: Rng + ?Sized>(&self, rng: &mut R, num_options: usize) -> Vec<f64> {
        match *self {
            BeliefGenerator::CoarseSupport { rho, max_support } => {
                let cap = max_support.unwrap_or(num_options).min(num_options);
                sample_coarse_row(rng, num_options, rho, cap)
            }
            BeliefGenerator::Dirichlet { concentration } => sample_dirichlet_row(rng, num_options, concentration),
            BeliefGenerator::Clueless | BeliefGenerator::Spammer => vec![1.0 / num_options as f64; num_options],
            BeliefGenerator::Expert { accuracy } => {
                let mut row = if num_options > 1 {
                    vec![(1.0 - accuracy) / (num_options - 1) as f64; num_options]
                } else {
                    vec![0.0]
                };
                row[rng.random_range(0..num_options)] = if num_options > 1 { accuracy } else { 1.0 };
                row
            }
        }
    }
}

fn flat_weights<R: Rng + ?Sized>(rng: &mut R, k: usize, concentration: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    loop {
        let w: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            return w.into_iter().map(|x| x / total).collect();
        }
    }
}

/// Symmetric Dirichlet row.
pub fn sample_dirichlet_row<R: Rng + ?Sized>(rng: &mut R, num_options: usize, concentration: f64) -> Vec<f64> {
    flat_weights(rng, num_options, concentration)
}

/// Coarse-compliant row: support size uniform in `1..=max_support`, support
/// chosen uniformly, flat Dirichlet on the support, resampled until every
/// entry exceeds `rho`.
pub fn sample_coarse_row<R: Rng + ?Sized>(rng: &mut R, num_options: usize, rho: f64, max_support: usize) -> Vec<f64> {
    let k = rng.random_range(1..=max_support.clamp(1, num_options));
    let support = index::sample(rng, num_options, k);
    let weights = loop {
        let w = flat_weights(rng, k, 1.0);
        if w.iter().all(|&p| p > rho) {
            break w;
        }
    };
    let mut row = vec![0.0; num_options];
    for (option, p) in support.iter().zip(weights) {
        row[option] = p;
    }
    row
}

/// Dirichlet row with every entry at least `gap` away from `sigma`.
pub fn sample_row_away_from<R: Rng + ?Sized>(rng: &mut R, num_options: usize, sigma: f64, gap: f64) -> Vec<f64> {
    loop {
        let row = flat_weights(rng, num_options, 1.0);
        if row.iter().all(|&p| (p - sigma).abs() >= gap) {
            return row;
        }
    }
}

/// Dirichlet row whose entries are pairwise at least `gap` apart.
pub fn sample_distinct_row<R: Rng + ?Sized>(rng: &mut R, num_options: usize, gap: f64) -> Vec<f64> {
    loop {
        let row = flat_weights(rng, num_options, 1.0);
        let mut sorted = row.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).all(|w| w[1] - w[0] >= gap) {
            return row;
        }
    }
}
