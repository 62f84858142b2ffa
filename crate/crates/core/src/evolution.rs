//! Market-selection dynamics.
//!
//! Every round each firm sells its single unit in the market it currently
//! chooses. Prices follow from the resulting market totals, payoffs from the
//! taxed profit function. Then, reading the same snapshot of choices and
//! payoffs, every firm may imitate one of its nearest neighbours (weighted
//! by excess payoff over the worst neighbour) and may independently mutate
//! to a uniformly random market.
//!
//! Draw order per round is fixed: for firm `0..n`, a mimic coin, a mimic
//! pick if the coin came up, a mutate coin, a mutate pick if that coin came
//! up. See [`crate::seeds`] for how each draw is made.

use std::io::{Read, Write};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::economy::{self, EconomyMap, MarketParams, TaxPolicy};
use crate::error::{Error, Result};
use crate::seeds;

pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_WARMUP: usize = 100;
pub const DEFAULT_NEIGHBORS: usize = 4;
pub const DEFAULT_MIMIC_PROB: f64 = 0.5;
pub const DEFAULT_MUTATE_PROB: f64 = 0.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub steps: usize,
    /// First step of the objective window. Earlier steps stay in the trace.
    pub warmup: usize,
    pub neighbor_count: usize,
    pub mimic_prob: f64,
    pub mutate_prob: f64,
    pub market_params: MarketParams,
    pub seed: u64,
}

impl SimConfig {
    pub fn with_defaults(n_markets: usize) -> Self {
        Self {
            steps: DEFAULT_STEPS,
            warmup: DEFAULT_WARMUP,
            neighbor_count: DEFAULT_NEIGHBORS,
            mimic_prob: DEFAULT_MIMIC_PROB,
            mutate_prob: DEFAULT_MUTATE_PROB,
            market_params: MarketParams::with_defaults(n_markets),
            seed: 0,
        }
    }

    pub fn validate(&self, n_firms: usize, n_markets: usize) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.mimic_prob) || !prob(self.mutate_prob) {
            return Err(Error::InvalidConfig(format!(
                "mimic ({}) and mutate ({}) probabilities must lie in [0, 1]",
                self.mimic_prob, self.mutate_prob
            )));
        }
        if self.neighbor_count == 0 || self.neighbor_count > n_firms {
            return Err(Error::InvalidConfig(format!(
                "neighbour count {} must be between 1 and the number of firms ({n_firms})",
                self.neighbor_count
            )));
        }
        if self.warmup >= self.steps {
            return Err(Error::InvalidConfig(format!(
                "warmup ({}) must be smaller than steps ({})",
                self.warmup, self.steps
            )));
        }
        if n_markets < 2 {
            return Err(Error::InvalidConfig(
                "the dispersion objective needs at least two markets".into(),
            ));
        }
        self.market_params.validate(n_markets)
    }
}

/// Current market choice of every firm and the payoff it realized last round.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyState {
    pub choice: Vec<usize>,
    pub last_payoff: Vec<f64>,
}

impl StrategyState {
    pub fn from_choices(choice: Vec<usize>) -> Self {
        let last_payoff = vec![0.0; choice.len()];
        Self {
            choice,
            last_payoff,
        }
    }

    pub fn n_firms(&self) -> usize {
        self.choice.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub quantities: Vec<u32>,
    pub prices: Vec<f64>,
    pub mean_profit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub objective: f64,
    pub trace: Vec<StepRecord>,
}

/// Uniform, independent initial choices; payoffs start at zero.
pub fn init_strategies<R: RngCore + ?Sized>(
    rng: &mut R,
    n_firms: usize,
    n_markets: usize,
) -> StrategyState {
    let choice = (0..n_firms).map(|_| seeds::index(rng, n_markets)).collect();
    StrategyState::from_choices(choice)
}

/// The `n` firms closest to `firm` (itself first), ties broken by index.
pub fn neighbors(map: &EconomyMap, firm: usize, n: usize) -> Vec<usize> {
    let origin = map.firms()[firm];
    let mut order: Vec<(u64, usize)> = map
        .firms()
        .iter()
        .enumerate()
        .map(|(k, p)| (origin.distance_sq(*p), k))
        .collect();
    order.sort_unstable();
    // A coincident firm with a lower index would otherwise outrank self.
    let mut out = Vec::with_capacity(n);
    out.push(firm);
    out.extend(
        order
            .into_iter()
            .map(|(_, k)| k)
            .filter(|&k| k != firm)
            .take(n - 1),
    );
    out
}

/// Imitation probabilities over a neighbourhood:
/// `(r_k - r_min) / sum_k (r_k - r_min)`, uniform when every payoff is equal.
pub fn mimic_distribution(payoffs: &[f64]) -> Vec<f64> {
    assert!(
        !payoffs.is_empty(),
        "mimic_distribution needs at least one payoff"
    );
    let min = payoffs.iter().copied().fold(f64::INFINITY, f64::min);
    let excess: Vec<f64> = payoffs.iter().map(|r| r - min).collect();
    let total: f64 = excess.iter().sum();
    if total > 0.0 {
        excess.into_iter().map(|e| e / total).collect()
    } else {
        vec![1.0 / payoffs.len() as f64; payoffs.len()]
    }
}

/// Neighbour position picked by one uniform draw `u` under the imitation
/// weights. Never returns a zero-weight neighbour when weights are unequal.
fn mimic_pick(payoffs: impl Iterator<Item = f64> + Clone, len: usize, u: f64) -> usize {
    let min = payoffs.clone().fold(f64::INFINITY, f64::min);
    let total: f64 = payoffs.clone().map(|r| r - min).sum();
    if !(total > 0.0) {
        return ((u * len as f64) as usize).min(len - 1);
    }
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, r) in payoffs.enumerate() {
        let w = r - min;
        if w > 0.0 {
            acc += w;
            last_positive = k;
            if target < acc {
                return k;
            }
        }
    }
    last_positive
}

/// Dispersion of market quantities: the mean over steps `warmup..` of the
/// unbiased cross-market standard deviation around `n_firms / n_markets`.
pub fn objective_from_trace(
    trace: &[StepRecord],
    warmup: usize,
    n_firms: usize,
    n_markets: usize,
) -> Result<f64> {
    if n_markets < 2 {
        return Err(Error::InvalidArgument(
            "dispersion needs at least two markets".into(),
        ));
    }
    if trace.len() <= warmup {
        return Err(Error::InvalidArgument(format!(
            "objective window is empty: trace has {} steps, warmup is {warmup}",
            trace.len()
        )));
    }
    let target = n_firms as f64 / n_markets as f64;
    let window = &trace[warmup..];
    let total: f64 = window
        .iter()
        .map(|rec| {
            let ss: f64 = rec
                .quantities
                .iter()
                .map(|&q| {
                    let d = q as f64 - target;
                    d * d
                })
                .sum();
            (ss / (n_markets - 1) as f64).sqrt()
        })
        .sum();
    Ok(total / window.len() as f64)
}

/// A map compiled for repeated simulation: distances and neighbour lists
/// are computed once.
#[derive(Debug, Clone)]
pub struct Simulator {
    n_firms: usize,
    n_markets: usize,
    config: SimConfig,
    distances: Vec<f64>,
    neighbor_table: Vec<usize>,
}

impl Simulator {
    pub fn new(map: &EconomyMap, config: SimConfig) -> Result<Self> {
        config.validate(map.n_firms(), map.n_markets())?;
        let n = config.neighbor_count;
        let neighbor_table = (0..map.n_firms())
            .flat_map(|i| neighbors(map, i, n))
            .collect();
        Ok(Self {
            n_firms: map.n_firms(),
            n_markets: map.n_markets(),
            distances: map.distance_table(),
            neighbor_table,
            config,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn n_firms(&self) -> usize {
        self.n_firms
    }

    pub fn n_markets(&self) -> usize {
        self.n_markets
    }

    fn neighbors_of(&self, firm: usize) -> &[usize] {
        let n = self.config.neighbor_count;
        &self.neighbor_table[firm * n..(firm + 1) * n]
    }

    fn check_policy(&self, policy: &TaxPolicy) -> Result<()> {
        if policy.rate.len() != self.n_markets || policy.fixed.len() != self.n_markets {
            return Err(Error::InvalidConfig(format!(
                "policy covers {} markets but the map has {}",
                policy.rate.len(),
                self.n_markets
            )));
        }
        Ok(())
    }

    fn check_state(&self, state: &StrategyState) -> Result<()> {
        if state.choice.len() != self.n_firms || state.last_payoff.len() != self.n_firms {
            return Err(Error::InvalidConfig(format!(
                "strategy state covers {} firms but the map has {}",
                state.choice.len(),
                self.n_firms
            )));
        }
        if let Some(&c) = state.choice.iter().find(|&&c| c >= self.n_markets) {
            return Err(Error::InvalidConfig(format!(
                "market index {c} out of range"
            )));
        }
        Ok(())
    }

    /// Plays round `t` with the current choices, records it, and returns the
    /// choices for the next round.
    pub fn step<R: RngCore + ?Sized>(
        &self,
        t: usize,
        policy: &TaxPolicy,
        state: &StrategyState,
        rng: &mut R,
    ) -> (StrategyState, StepRecord) {
        let mut next = state.clone();
        let record = self.step_into(t, policy, state, &mut next, rng);
        (next, record)
    }

    fn step_into<R: RngCore + ?Sized>(
        &self,
        t: usize,
        policy: &TaxPolicy,
        current: &StrategyState,
        next: &mut StrategyState,
        rng: &mut R,
    ) -> StepRecord {
        let params = &self.config.market_params;
        let m = self.n_markets;

        let mut quantities = vec![0u32; m];
        for &c in &current.choice {
            quantities[c] += 1;
        }
        let prices: Vec<f64> = (0..m)
            .map(|j| economy::market_price(params, j, quantities[j] as f64))
            .collect();

        next.last_payoff.clear();
        next.last_payoff
            .extend(current.choice.iter().enumerate().map(|(i, &j)| {
                economy::profit(params, policy, j, prices[j], self.distances[i * m + j])
            }));
        let payoffs = &next.last_payoff;
        let mean_profit = payoffs.iter().sum::<f64>() / self.n_firms as f64;

        next.choice.clear();
        next.choice.extend_from_slice(&current.choice);
        for i in 0..self.n_firms {
            if seeds::unit(rng) < self.config.mimic_prob {
                let hood = self.neighbors_of(i);
                let k = mimic_pick(
                    hood.iter().map(|&f| payoffs[f]),
                    hood.len(),
                    seeds::unit(rng),
                );
                next.choice[i] = current.choice[hood[k]];
            }
            if seeds::unit(rng) < self.config.mutate_prob {
                next.choice[i] = seeds::index(rng, m);
            }
        }

        StepRecord {
            t,
            quantities,
            prices,
            mean_profit,
        }
    }

    /// Full run from a random initial state drawn from `seed`.
    pub fn run(&self, policy: &TaxPolicy, seed: u64) -> Result<SimResult> {
        let mut rng = seeds::rng(seed);
        let initial = init_strategies(&mut rng, self.n_firms, self.n_markets);
        self.run_from(policy, initial, &mut rng)
    }

    /// Full run from a given initial state.
    pub fn run_from<R: RngCore + ?Sized>(
        &self,
        policy: &TaxPolicy,
        initial: StrategyState,
        rng: &mut R,
    ) -> Result<SimResult> {
        self.check_policy(policy)?;
        self.check_state(&initial)?;
        let mut current = initial;
        let mut next = current.clone();
        let mut trace = Vec::with_capacity(self.config.steps);
        for t in 0..self.config.steps {
            trace.push(self.step_into(t, policy, &current, &mut next, rng));
            std::mem::swap(&mut current, &mut next);
        }
        let objective =
            objective_from_trace(&trace, self.config.warmup, self.n_firms, self.n_markets)?;
        Ok(SimResult { objective, trace })
    }

    /// Objective only, without keeping the trace.
    pub fn objective(&self, policy: &TaxPolicy, seed: u64) -> Result<f64> {
        self.run(policy, seed).map(|r| r.objective)
    }
}

/// One simulation of `policy` on `map`, seeded by `config.seed`.
pub fn run_simulation(
    map: &EconomyMap,
    policy: &TaxPolicy,
    config: &SimConfig,
) -> Result<SimResult> {
    Simulator::new(map, config.clone())?.run(policy, config.seed)
}

/// Writes the trace as CSV: `t,Q_1..Q_m,p_1..p_m,mean_profit`.
/// Floats use the shortest representation that parses back exactly.
pub fn write_trace_csv<W: Write>(trace: &[StepRecord], out: W) -> Result<()> {
    let m = trace.first().map_or(0, |r| r.quantities.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=m).map(|j| format!("Q_{j}")));
    header.extend((1..=m).map(|j| format!("p_{j}")));
    header.push("mean_profit".into());
    w.write_record(&header)?;
    for rec in trace {
        let mut row = Vec::with_capacity(2 * m + 2);
        row.push(rec.t.to_string());
        row.extend(rec.quantities.iter().map(|q| q.to_string()));
        row.extend(rec.prices.iter().map(|p| p.to_string()));
        row.push(rec.mean_profit.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<trace>", e))?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<StepRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let width = rd.headers()?.len();
    if width < 4 || width % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "trace header has {width} columns"
        )));
    }
    let m = (width - 2) / 2;
    let bad = |line: usize, what: &str| Error::Parse {
        path: "<trace>".into(),
        line,
        message: format!("cannot parse {what}"),
    };
    let mut out = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let t = rec[0].parse().map_err(|_| bad(line, "step index"))?;
        let quantities = (1..=m)
            .map(|c| rec[c].parse().map_err(|_| bad(line, "quantity")))
            .collect::<Result<_>>()?;
        let prices = (m + 1..=2 * m)
            .map(|c| rec[c].parse().map_err(|_| bad(line, "price")))
            .collect::<Result<_>>()?;
        let mean_profit = rec[2 * m + 1]
            .parse()
            .map_err(|_| bad(line, "mean profit"))?;
        out.push(StepRecord {
            t,
            quantities,
            prices,
            mean_profit,
        });
    }
    Ok(out)
}
