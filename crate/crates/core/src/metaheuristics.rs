//! Search over tax policies with a noisy objective: simulated annealing with
//! geometric cooling and a strict-descent stochastic local search. Both use
//! the same box-clamped neighbourhood move.
//!
//! An optimizer run seeded with `seed` draws its moves from stream
//! `derive(seed, 0)` and its annealing acceptance draws from stream
//! `derive(seed, 1)`, so annealing and local search propose identical
//! candidates from identical states.

use std::io::{Read, Write};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::economy::{PolicyBounds, TaxPolicy};
use crate::error::{Error, Result};
use crate::estimator::{Estimator, ObjectiveEstimate};
use crate::seeds;

pub const DEFAULT_RATE_RADIUS: f64 = 0.02;
pub const DEFAULT_FIXED_RADIUS: f64 = 5.0;
pub const DEFAULT_T0: f64 = 10.0;
pub const DEFAULT_ALPHA: f64 = 0.8;
pub const DEFAULT_INNER_ITERS: usize = 10;
pub const DEFAULT_T_FINAL: f64 = 0.001;
pub const DEFAULT_MAX_EVALUATIONS: usize = 210;
pub const DEFAULT_SEARCH_ITERATIONS: usize = 200;

const MOVE_STREAM: u64 = 0;
const ACCEPT_STREAM: u64 = 1;

/// Something that scores a policy, lower is better. Calls may be noisy.
pub trait Objective {
    fn evaluate(&mut self, policy: &TaxPolicy) -> Result<f64>;
}

impl<F> Objective for F
where
    F: FnMut(&TaxPolicy) -> Result<f64>,
{
    fn evaluate(&mut self, policy: &TaxPolicy) -> Result<f64> {
        self(policy)
    }
}

/// Monte-Carlo objective: call `k` estimates with root seed
/// `derive(base_seed, k)`, so repeated evaluations of one policy draw fresh
/// replicates.
pub struct EstimatedObjective<'a> {
    estimator: &'a Estimator,
    base_seed: u64,
    calls: u64,
    last: Option<ObjectiveEstimate>,
}

impl<'a> EstimatedObjective<'a> {
    pub fn new(estimator: &'a Estimator, base_seed: u64) -> Self {
        Self {
            estimator,
            base_seed,
            calls: 0,
            last: None,
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn last_estimate(&self) -> Option<&ObjectiveEstimate> {
        self.last.as_ref()
    }
}

impl Objective for EstimatedObjective<'_> {
    fn evaluate(&mut self, policy: &TaxPolicy) -> Result<f64> {
        let seed = seeds::derive(self.base_seed, self.calls);
        self.calls += 1;
        let est = self.estimator.estimate(policy, seed)?;
        let mean = est.mean;
        self.last = Some(est);
        Ok(mean)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSpec {
    pub rate_radius: f64,
    pub fixed_radius: f64,
    pub bounds: PolicyBounds,
}

impl Default for NeighborhoodSpec {
    fn default() -> Self {
        Self {
            rate_radius: DEFAULT_RATE_RADIUS,
            fixed_radius: DEFAULT_FIXED_RADIUS,
            bounds: PolicyBounds::default(),
        }
    }
}

impl NeighborhoodSpec {
    pub fn validate(&self) -> Result<()> {
        // zero radii are allowed: they freeze the search
        if !(self.rate_radius >= 0.0 && self.fixed_radius >= 0.0)
            || !self.rate_radius.is_finite()
            || !self.fixed_radius.is_finite()
        {
            return Err(Error::InvalidConfig(format!(
                "neighbourhood radii must be finite and non-negative, got {} / {}",
                self.rate_radius, self.fixed_radius
            )));
        }
        self.bounds.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealerConfig {
    pub t0: f64,
    pub alpha: f64,
    pub inner_iters: usize,
    pub t_final: f64,
    /// Hard cap on objective evaluations, including the initial one.
    pub max_evaluations: Option<usize>,
    pub neighborhood: NeighborhoodSpec,
    /// Re-estimate the current solution before every comparison.
    pub reestimate_current: bool,
}

impl Default for AnnealerConfig {
    fn default() -> Self {
        Self {
            t0: DEFAULT_T0,
            alpha: DEFAULT_ALPHA,
            inner_iters: DEFAULT_INNER_ITERS,
            t_final: DEFAULT_T_FINAL,
            max_evaluations: Some(DEFAULT_MAX_EVALUATIONS),
            neighborhood: NeighborhoodSpec::default(),
            reestimate_current: false,
        }
    }
}

impl AnnealerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "cooling factor {} must lie strictly between 0 and 1",
                self.alpha
            )));
        }
        if !(self.t_final > 0.0 && self.t0 > self.t_final) || !self.t0.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "temperatures must satisfy t0 ({}) > t_final ({}) > 0",
                self.t0, self.t_final
            )));
        }
        if self.inner_iters == 0 {
            return Err(Error::InvalidConfig(
                "inner iterations must be at least 1".into(),
            ));
        }
        if self.max_evaluations == Some(0) {
            return Err(Error::InvalidConfig(
                "evaluation budget must be at least 1".into(),
            ));
        }
        self.neighborhood.validate()
    }

    /// Outer loops the temperature criterion alone allows.
    pub fn schedule_length(&self) -> usize {
        let mut t = self.t0;
        let mut k = 0;
        while t >= self.t_final {
            k += 1;
            t = cool(t, self.alpha);
        }
        k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub iterations: usize,
    pub neighborhood: NeighborhoodSpec,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_SEARCH_ITERATIONS,
            neighborhood: NeighborhoodSpec::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        self.neighborhood.validate()
    }
}

/// One objective evaluation. The first entry of a run is the initial
/// solution; it has no temperature and counts as accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub policy: TaxPolicy,
    pub value: f64,
    pub accepted: bool,
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerRun {
    pub best_policy: TaxPolicy,
    pub best_value: f64,
    pub final_policy: TaxPolicy,
    pub final_value: f64,
    pub history: Vec<HistoryEntry>,
    pub evaluations: usize,
    pub outer_loops: usize,
}

impl OptimizerRun {
    fn start(initial: TaxPolicy, value: f64) -> Self {
        Self {
            best_policy: initial.clone(),
            best_value: value,
            final_policy: initial.clone(),
            final_value: value,
            history: vec![HistoryEntry {
                policy: initial,
                value,
                accepted: true,
                temperature: None,
            }],
            evaluations: 1,
            outer_loops: 0,
        }
    }

    fn empty(initial: &TaxPolicy) -> Self {
        Self {
            best_policy: initial.clone(),
            best_value: f64::NAN,
            final_policy: initial.clone(),
            final_value: f64::NAN,
            history: Vec::new(),
            evaluations: 0,
            outer_loops: 0,
        }
    }

    /// Evaluations after the initial one.
    pub fn moves(&self) -> &[HistoryEntry] {
        self.history.get(1..).unwrap_or(&[])
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            best_policy: self.best_policy.clone(),
            best_value: self.best_value,
            final_policy: self.final_policy.clone(),
            final_value: self.final_value,
            evaluations: self.evaluations,
            outer_loops: self.outer_loops,
        }
    }
}

/// JSON summary of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub best_policy: TaxPolicy,
    pub best_value: f64,
    pub final_policy: TaxPolicy,
    pub final_value: f64,
    pub evaluations: usize,
    pub outer_loops: usize,
}

/// Objective failure partway through a run; `partial` holds everything
/// evaluated before it.
#[derive(Debug, thiserror::Error)]
#[error("{error}")]
pub struct SearchFailure {
    #[source]
    pub error: Error,
    pub partial: Box<OptimizerRun>,
}

/// Perturbs every coefficient uniformly within its radius and clamps it to
/// the feasible box. Rates are drawn before fixed amounts, market by market.
pub fn neighbor_policy<R: RngCore + ?Sized>(
    current: &TaxPolicy,
    spec: &NeighborhoodSpec,
    rng: &mut R,
) -> TaxPolicy {
    let step = |rng: &mut R, v: f64, radius: f64, (lo, hi): (f64, f64)| {
        seeds::uniform(rng, v - radius, v + radius).clamp(lo, hi)
    };
    let rate = current
        .rate
        .iter()
        .map(|&r| step(rng, r, spec.rate_radius, spec.bounds.rate))
        .collect();
    let fixed = current
        .fixed
        .iter()
        .map(|&f| step(rng, f, spec.fixed_radius, spec.bounds.fixed))
        .collect();
    TaxPolicy { rate, fixed }
}

/// Metropolis rule: downhill always, uphill with probability `exp(-delta / t)`.
pub fn sa_accept<R: RngCore + ?Sized>(delta: f64, temperature: f64, rng: &mut R) -> bool {
    if delta < 0.0 {
        return true;
    }
    seeds::unit(rng) < (-delta / temperature).exp()
}

pub fn cool(t: f64, alpha: f64) -> f64 {
    alpha * t
}

fn check_initial(initial: &TaxPolicy, spec: &NeighborhoodSpec) -> Result<()> {
    if initial.rate.len() != initial.fixed.len() || !initial.within(&spec.bounds) {
        return Err(Error::InvalidArgument(
            "initial policy lies outside the feasible box".into(),
        ));
    }
    Ok(())
}

/// Simulated annealing. The outer loop runs while the temperature is at
/// least `t_final` and the evaluation budget lasts; each outer loop makes
/// `inner_iters` moves at a fixed temperature and then cools.
pub fn simulated_annealing<O: Objective + ?Sized>(
    objective: &mut O,
    initial: &TaxPolicy,
    config: &AnnealerConfig,
    seed: u64,
) -> Result<OptimizerRun, SearchFailure> {
    let fail = |error, partial| SearchFailure {
        error,
        partial: Box::new(partial),
    };
    if let Err(e) = config
        .validate()
        .and_then(|_| check_initial(initial, &config.neighborhood))
    {
        return Err(fail(e, OptimizerRun::empty(initial)));
    }
    let mut move_rng = seeds::rng(seeds::derive(seed, MOVE_STREAM));
    let mut accept_rng = seeds::rng(seeds::derive(seed, ACCEPT_STREAM));
    let budget = config.max_evaluations.unwrap_or(usize::MAX);

    let v0 = match objective.evaluate(initial) {
        Ok(v) => v,
        Err(e) => return Err(fail(e, OptimizerRun::empty(initial))),
    };
    let mut run = OptimizerRun::start(initial.clone(), v0);
    let mut temperature = config.t0;

    'outer: while temperature >= config.t_final {
        if run.evaluations >= budget {
            break;
        }
        run.outer_loops += 1;
        for _ in 0..config.inner_iters {
            if run.evaluations >= budget {
                break 'outer;
            }
            let candidate = neighbor_policy(&run.final_policy, &config.neighborhood, &mut move_rng);
            if config.reestimate_current {
                match objective.evaluate(&run.final_policy) {
                    Ok(v) => run.final_value = v,
                    Err(e) => return Err(fail(e, run)),
                }
                run.evaluations += 1;
                if run.evaluations >= budget {
                    break 'outer;
                }
            }
            let value = match objective.evaluate(&candidate) {
                Ok(v) => v,
                Err(e) => return Err(fail(e, run)),
            };
            run.evaluations += 1;
            let accepted = sa_accept(value - run.final_value, temperature, &mut accept_rng);
            run.history.push(HistoryEntry {
                policy: candidate.clone(),
                value,
                accepted,
                temperature: Some(temperature),
            });
            if accepted {
                if value < run.best_value {
                    run.best_value = value;
                    run.best_policy = candidate.clone();
                }
                run.final_policy = candidate;
                run.final_value = value;
            }
        }
        temperature = cool(temperature, config.alpha);
    }
    Ok(run)
}

/// Strict-descent local search: `iterations` candidates after the initial
/// evaluation, each accepted only if strictly better than the current one.
pub fn stochastic_local_search<O: Objective + ?Sized>(
    objective: &mut O,
    initial: &TaxPolicy,
    config: &SearchConfig,
    seed: u64,
) -> Result<OptimizerRun, SearchFailure> {
    let fail = |error, partial| SearchFailure {
        error,
        partial: Box::new(partial),
    };
    if let Err(e) = config
        .validate()
        .and_then(|_| check_initial(initial, &config.neighborhood))
    {
        return Err(fail(e, OptimizerRun::empty(initial)));
    }
    let mut move_rng = seeds::rng(seeds::derive(seed, MOVE_STREAM));

    let v0 = match objective.evaluate(initial) {
        Ok(v) => v,
        Err(e) => return Err(fail(e, OptimizerRun::empty(initial))),
    };
    let mut run = OptimizerRun::start(initial.clone(), v0);
    for _ in 0..config.iterations {
        let candidate = neighbor_policy(&run.final_policy, &config.neighborhood, &mut move_rng);
        let value = match objective.evaluate(&candidate) {
            Ok(v) => v,
            Err(e) => return Err(fail(e, run)),
        };
        run.evaluations += 1;
        let accepted = value < run.final_value;
        run.history.push(HistoryEntry {
            policy: candidate.clone(),
            value,
            accepted,
            temperature: None,
        });
        if accepted {
            run.final_policy = candidate;
            run.final_value = value;
        }
    }
    run.best_policy = run.final_policy.clone();
    run.best_value = run.final_value;
    Ok(run)
}

/// Which optimizer a campaign runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerSpec {
    Annealing(AnnealerConfig),
    Search(SearchConfig),
}

impl OptimizerSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            OptimizerSpec::Annealing(c) => c.validate(),
            OptimizerSpec::Search(c) => c.validate(),
        }
    }

    pub fn run<O: Objective + ?Sized>(
        &self,
        objective: &mut O,
        initial: &TaxPolicy,
        seed: u64,
    ) -> Result<OptimizerRun, SearchFailure> {
        match self {
            OptimizerSpec::Annealing(c) => simulated_annealing(objective, initial, c, seed),
            OptimizerSpec::Search(c) => stochastic_local_search(objective, initial, c, seed),
        }
    }
}

/// `executions` independent optimizer runs against Monte-Carlo estimates.
/// Execution `k` uses seed `e = derive(root_seed, k)`: its moves come from
/// `derive(e, 0)` and its estimates from `derive(e, 1)`. Runs may execute
/// in parallel; results are returned in execution order.
pub fn run_executions(
    estimator: &Estimator,
    initial: &TaxPolicy,
    spec: &OptimizerSpec,
    executions: usize,
    root_seed: u64,
) -> Vec<Result<OptimizerRun, SearchFailure>> {
    use rayon::prelude::*;
    let one = |k: usize| {
        let exec_seed = seeds::derive(root_seed, k as u64);
        let mut objective = EstimatedObjective::new(estimator, seeds::derive(exec_seed, 1));
        spec.run(&mut objective, initial, seeds::derive(exec_seed, 0))
    };
    if executions > 1 {
        (0..executions).into_par_iter().map(one).collect()
    } else {
        (0..executions).map(one).collect()
    }
}

/// Writes `eval_index,temperature,rate_1..rate_m,fixed_1..fixed_m,estimate,accepted`.
/// The temperature cell is empty where no temperature applies.
pub fn write_history_csv<W: Write>(history: &[HistoryEntry], out: W) -> Result<()> {
    let m = history.first().map_or(0, |h| h.policy.n_markets());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["eval_index".to_string(), "temperature".to_string()];
    header.extend((1..=m).map(|j| format!("rate_{j}")));
    header.extend((1..=m).map(|j| format!("fixed_{j}")));
    header.push("estimate".into());
    header.push("accepted".into());
    w.write_record(&header)?;
    for (i, h) in history.iter().enumerate() {
        let mut row = Vec::with_capacity(2 * m + 4);
        row.push(i.to_string());
        row.push(h.temperature.map(|t| t.to_string()).unwrap_or_default());
        row.extend(h.policy.rate.iter().map(|v| v.to_string()));
        row.extend(h.policy.fixed.iter().map(|v| v.to_string()));
        row.push(h.value.to_string());
        row.push(h.accepted.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<history>", e))?;
    Ok(())
}

pub fn read_history_csv<R: Read>(input: R) -> Result<Vec<HistoryEntry>> {
    let mut rd = csv::Reader::from_reader(input);
    let width = rd.headers()?.len();
    if width < 6 || width % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "history header has {width} columns"
        )));
    }
    let m = (width - 4) / 2;
    let bad = |line: usize, what: &str| Error::Parse {
        path: "<history>".into(),
        line,
        message: format!("cannot parse {what}"),
    };
    let mut out = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let temperature = match &rec[1] {
            "" => None,
            s => Some(s.parse().map_err(|_| bad(line, "temperature"))?),
        };
        let col = |c: usize, what: &str| rec[c].parse::<f64>().map_err(|_| bad(line, what));
        let rate = (2..2 + m).map(|c| col(c, "rate")).collect::<Result<_>>()?;
        let fixed = (2 + m..2 + 2 * m)
            .map(|c| col(c, "fixed amount"))
            .collect::<Result<_>>()?;
        out.push(HistoryEntry {
            policy: TaxPolicy { rate, fixed },
            value: col(2 + 2 * m, "estimate")?,
            accepted: rec[3 + 2 * m]
                .parse()
                .map_err(|_| bad(line, "accepted flag"))?,
            temperature,
        });
    }
    Ok(out)
}
