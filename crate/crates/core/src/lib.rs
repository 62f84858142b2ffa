//! Spatial market-selection economy with evolutionary firms, and search for
//! tax/subsidy policies that even out the quantities sold across markets.
//!
//! - [`economy`]: firm and market geography, demand, taxed profit
//! - [`evolution`]: mimic/mutate dynamics and the dispersion objective
//! - [`estimator`]: Monte-Carlo estimate of the expected objective
//! - [`metaheuristics`]: simulated annealing and stochastic local search
//! - [`stats`]: summaries, confidence intervals, two-sample z-test
//! - [`cli`]: the `polis` command-line tool

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod economy;
pub mod error;
pub mod estimator;
pub mod evolution;
pub mod metaheuristics;
pub mod seeds;
pub mod stats;

pub use economy::{EconomyMap, GridPoint, MarketParams, PolicyBounds, TaxPolicy};
pub use error::{Error, Result};
pub use estimator::{Estimator, ObjectiveEstimate};
pub use evolution::{SimConfig, SimResult, Simulator, StepRecord, StrategyState};
pub use metaheuristics::{
    AnnealerConfig, NeighborhoodSpec, Objective, OptimizerRun, OptimizerSpec, SearchConfig,
};
pub use stats::SampleSummary;
