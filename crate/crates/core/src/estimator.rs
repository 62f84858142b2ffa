//! Monte-Carlo estimate of the expected dispersion objective of a policy.
//!
//! Replicate `i` of an estimate seeded with `root` runs with seed
//! `seeds::derive(root, i)`. Replicate objectives are stored by index and
//! summed in index order, so parallel and sequential estimates are
//! bit-identical.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::economy::{EconomyMap, TaxPolicy};
use crate::error::{Error, Result};
use crate::evolution::{SimConfig, Simulator, StrategyState};
use crate::seeds;
use crate::stats;

/// Replications per policy evaluation for full-scale campaigns.
pub const PAPER_N_SIM: usize = 10_000;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveEstimate {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub half_width: f64,
    pub confidence: f64,
    #[serde(skip)]
    pub replicate_values: Option<Vec<f64>>,
}

impl ObjectiveEstimate {
    pub fn from_values(values: Vec<f64>, confidence: f64) -> Result<Self> {
        let summary = stats::summarize(&values)?;
        let z = stats::z_critical(confidence)?;
        Ok(Self {
            n: summary.n,
            mean: summary.mean,
            std: summary.std,
            half_width: z * summary.std / (summary.n as f64).sqrt(),
            confidence,
            replicate_values: Some(values),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Repeated independent simulations of one map under varying policies.
#[derive(Debug, Clone)]
pub struct Estimator {
    sim: Simulator,
    n_sim: usize,
    confidence: f64,
    parallel: bool,
    initial: Option<StrategyState>,
}

impl Estimator {
    pub fn new(map: &EconomyMap, config: SimConfig, n_sim: usize) -> Result<Self> {
        if n_sim == 0 {
            return Err(Error::InvalidArgument("n_sim must be at least 1".into()));
        }
        Ok(Self {
            sim: Simulator::new(map, config)?,
            n_sim,
            confidence: DEFAULT_CONFIDENCE,
            parallel: false,
            initial: None,
        })
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn with_confidence(mut self, confidence: f64) -> Result<Self> {
        stats::z_critical(confidence)?;
        self.confidence = confidence;
        Ok(self)
    }

    /// Starts every replicate from `state` instead of a random draw.
    pub fn with_initial_state(mut self, state: StrategyState) -> Self {
        self.initial = Some(state);
        self
    }

    pub fn n_sim(&self) -> usize {
        self.n_sim
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    fn replicate(&self, policy: &TaxPolicy, root_seed: u64, i: usize) -> Result<f64> {
        let seed = seeds::derive(root_seed, i as u64);
        match &self.initial {
            None => self.sim.objective(policy, seed),
            Some(state) => self
                .sim
                .run_from(policy, state.clone(), &mut seeds::rng(seed))
                .map(|r| r.objective),
        }
    }

    pub fn estimate(&self, policy: &TaxPolicy, root_seed: u64) -> Result<ObjectiveEstimate> {
        let values: Vec<f64> = if self.parallel {
            (0..self.n_sim)
                .into_par_iter()
                .map(|i| self.replicate(policy, root_seed, i))
                .collect::<Result<_>>()?
        } else {
            (0..self.n_sim)
                .map(|i| self.replicate(policy, root_seed, i))
                .collect::<Result<_>>()?
        };
        ObjectiveEstimate::from_values(values, self.confidence)
    }
}

/// Mean objective of `n_sim` independent runs of `policy`.
pub fn estimate_expected_objective(
    map: &EconomyMap,
    policy: &TaxPolicy,
    config: &SimConfig,
    n_sim: usize,
    root_seed: u64,
) -> Result<ObjectiveEstimate> {
    Estimator::new(map, config.clone(), n_sim)?.estimate(policy, root_seed)
}

/// Replications needed for a `confidence` interval of at most `half_width`
/// given a guessed standard deviation. Never less than 30, where the
/// normal approximation starts to hold.
pub fn required_sample_size(std_guess: f64, half_width: f64, confidence: f64) -> Result<usize> {
    if !(std_guess > 0.0) || !(half_width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "std guess ({std_guess}) and half width ({half_width}) must be positive"
        )));
    }
    let z = stats::z_critical(confidence)?;
    Ok(sample_size_for_z(std_guess, half_width, z))
}

/// `max(30, ceil((z * std / half_width)^2))` for an explicit critical value.
pub fn sample_size_for_z(std_guess: f64, half_width: f64, z: f64) -> usize {
    let n = ((z * std_guess / half_width).powi(2)).ceil();
    (n as usize).max(stats::NORMAL_APPROX_MIN_N)
}

/// Confidence level at which `n` replications give the stated half width.
pub fn implied_confidence(std_guess: f64, half_width: f64, n: usize) -> f64 {
    let z = half_width * (n as f64).sqrt() / std_guess;
    2.0 * stats::normal_cdf(z) - 1.0
}
