//! Static description of the economy: where firms and markets sit on the
//! grid, the linear inverse demand of each market, transport cost, and the
//! profit a firm earns under a tax/subsidy policy.

use std::path::Path;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

pub const DEFAULT_FIRMS: usize = 100;
pub const DEFAULT_MARKETS: usize = 5;
pub const DEFAULT_GRID_SIZE: u32 = 100;
pub const DEFAULT_INTERCEPT: f64 = 200.0;
pub const DEFAULT_SLOPE: f64 = 3.0;
pub const DEFAULT_TRANSPORT_RATE: f64 = 1.0;
pub const DEFAULT_RATE_BOUNDS: (f64, f64) = (-0.25, 0.25);
pub const DEFAULT_FIXED_BOUNDS: (f64, f64) = (-50.0, 50.0);

/// Integer tile on the square grid. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct GridPoint {
    pub x: u32,
    pub y: u32,
}

impl GridPoint {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    /// Squared Euclidean distance, exact in integers.
    pub fn distance_sq(self, other: GridPoint) -> u64 {
        let dx = self.x.abs_diff(other.x) as u64;
        let dy = self.y.abs_diff(other.y) as u64;
        dx * dx + dy * dy
    }
}

impl From<[u32; 2]> for GridPoint {
    fn from([x, y]: [u32; 2]) -> Self {
        Self { x, y }
    }
}

impl From<GridPoint> for [u32; 2] {
    fn from(p: GridPoint) -> Self {
        [p.x, p.y]
    }
}

/// Euclidean distance between two tiles.
pub fn distance(a: GridPoint, b: GridPoint) -> f64 {
    (a.distance_sq(b) as f64).sqrt()
}

#[derive(Deserialize)]
struct RawMap {
    grid_size: u32,
    firms: Vec<GridPoint>,
    markets: Vec<GridPoint>,
}

/// Positions of firms and markets. Order is significant: firm `i` and
/// market `j` are referred to by index everywhere downstream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMap")]
pub struct EconomyMap {
    grid_size: u32,
    firms: Vec<GridPoint>,
    markets: Vec<GridPoint>,
}

impl TryFrom<RawMap> for EconomyMap {
    type Error = Error;

    fn try_from(raw: RawMap) -> Result<Self> {
        EconomyMap::new(raw.grid_size, raw.firms, raw.markets)
    }
}

impl EconomyMap {
    pub fn new(grid_size: u32, firms: Vec<GridPoint>, markets: Vec<GridPoint>) -> Result<Self> {
        if grid_size == 0 {
            return Err(Error::InvalidConfig("grid size must be at least 1".into()));
        }
        if firms.is_empty() || markets.is_empty() {
            return Err(Error::InvalidConfig(
                "a map needs at least one firm and one market".into(),
            ));
        }
        if let Some(p) = firms
            .iter()
            .chain(markets.iter())
            .find(|p| p.x >= grid_size || p.y >= grid_size)
        {
            return Err(Error::InvalidConfig(format!(
                "point ({}, {}) lies outside the {grid_size}x{grid_size} grid",
                p.x, p.y
            )));
        }
        Ok(Self {
            grid_size,
            firms,
            markets,
        })
    }

    pub fn grid_size(&self) -> u32 {
        self.grid_size
    }

    pub fn firms(&self) -> &[GridPoint] {
        &self.firms
    }

    pub fn markets(&self) -> &[GridPoint] {
        &self.markets
    }

    pub fn n_firms(&self) -> usize {
        self.firms.len()
    }

    pub fn n_markets(&self) -> usize {
        self.markets.len()
    }

    /// Row-major `n_firms x n_markets` table of firm-to-market distances.
    pub fn distance_table(&self) -> Vec<f64> {
        self.firms
            .iter()
            .flat_map(|&f| self.markets.iter().map(move |&m| distance(f, m)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// Places firms and then markets uniformly and independently on integer
/// tiles. Points may share a tile.
pub fn generate_map(
    seed: u64,
    n_firms: usize,
    n_markets: usize,
    grid_size: u32,
) -> Result<EconomyMap> {
    if n_firms == 0 || n_markets == 0 || grid_size == 0 {
        return Err(Error::InvalidConfig(format!(
            "firms ({n_firms}), markets ({n_markets}) and grid size ({grid_size}) must all be at least 1"
        )));
    }
    let mut rng = seeds::rng(seed);
    let point = |rng: &mut seeds::StreamRng| {
        let x = seeds::index(rng, grid_size as usize) as u32;
        let y = seeds::index(rng, grid_size as usize) as u32;
        GridPoint::new(x, y)
    };
    let firms = (0..n_firms).map(|_| point(&mut rng)).collect();
    let markets = (0..n_markets).map(|_| point(&mut rng)).collect();
    EconomyMap::new(grid_size, firms, markets)
}

/// Linear inverse demand per market and the per-tile transport rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub intercept: Vec<f64>,
    pub slope: Vec<f64>,
    pub transport_rate: f64,
}

impl MarketParams {
    pub fn uniform(n_markets: usize, intercept: f64, slope: f64, transport_rate: f64) -> Self {
        Self {
            intercept: vec![intercept; n_markets],
            slope: vec![slope; n_markets],
            transport_rate,
        }
    }

    pub fn with_defaults(n_markets: usize) -> Self {
        Self::uniform(
            n_markets,
            DEFAULT_INTERCEPT,
            DEFAULT_SLOPE,
            DEFAULT_TRANSPORT_RATE,
        )
    }

    pub fn n_markets(&self) -> usize {
        self.intercept.len()
    }

    pub fn validate(&self, n_markets: usize) -> Result<()> {
        if self.intercept.len() != n_markets || self.slope.len() != n_markets {
            return Err(Error::InvalidConfig(format!(
                "market parameters cover {} intercepts and {} slopes but the map has {n_markets} markets",
                self.intercept.len(),
                self.slope.len()
            )));
        }
        if self.slope.iter().any(|&b| !(b > 0.0)) {
            return Err(Error::InvalidConfig(
                "demand slopes must be positive".into(),
            ));
        }
        if !(self.transport_rate >= 0.0) {
            return Err(Error::InvalidConfig(
                "transport rate must be non-negative".into(),
            ));
        }
        if self.intercept.iter().any(|a| !a.is_finite()) || !self.transport_rate.is_finite() {
            return Err(Error::InvalidConfig(
                "market parameters must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Price in market `market` when `total_quantity` units are sold there.
/// Not floored: a crowded market can have a negative price.
pub fn market_price(params: &MarketParams, market: usize, total_quantity: f64) -> f64 {
    params.intercept[market] - params.slope[market] * total_quantity
}

/// Profit of one unit sold in `market` at `price`, shipped `dist` tiles,
/// under `policy`: `(1 + rate) * price + fixed - transport_rate * dist`.
pub fn profit(
    params: &MarketParams,
    policy: &TaxPolicy,
    market: usize,
    price: f64,
    dist: f64,
) -> f64 {
    (1.0 + policy.rate[market]) * price + policy.fixed[market] - params.transport_rate * dist
}

/// Closed interval bounds for the two policy coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyBounds {
    pub rate: (f64, f64),
    pub fixed: (f64, f64),
}

impl Default for PolicyBounds {
    fn default() -> Self {
        Self {
            rate: DEFAULT_RATE_BOUNDS,
            fixed: DEFAULT_FIXED_BOUNDS,
        }
    }
}

impl PolicyBounds {
    pub fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if ok(self.rate) && ok(self.fixed) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "degenerate policy bounds {self:?}"
            )))
        }
    }
}

/// Per-market government intervention. Positive values are subsidies,
/// negative values are taxes. `rate` scales the market price, `fixed` is a
/// lump amount per unit sold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxPolicy {
    pub rate: Vec<f64>,
    pub fixed: Vec<f64>,
}

impl TaxPolicy {
    pub fn new(rate: Vec<f64>, fixed: Vec<f64>) -> Result<Self> {
        if rate.len() != fixed.len() {
            return Err(Error::InvalidConfig(format!(
                "policy has {} rates but {} fixed amounts",
                rate.len(),
                fixed.len()
            )));
        }
        Ok(Self { rate, fixed })
    }

    /// No taxes and no subsidies.
    pub fn zero(n_markets: usize) -> Self {
        Self {
            rate: vec![0.0; n_markets],
            fixed: vec![0.0; n_markets],
        }
    }

    pub fn n_markets(&self) -> usize {
        self.rate.len()
    }

    pub fn within(&self, bounds: &PolicyBounds) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        self.rate.iter().all(|&r| inside(r, bounds.rate))
            && self.fixed.iter().all(|&f| inside(f, bounds.fixed))
    }

    pub fn validate(&self, n_markets: usize, bounds: &PolicyBounds) -> Result<()> {
        if self.rate.len() != self.fixed.len() || self.rate.len() != n_markets {
            return Err(Error::InvalidConfig(format!(
                "policy covers {} markets but the map has {n_markets}",
                self.rate.len()
            )));
        }
        if !self.within(bounds) {
            return Err(Error::InvalidConfig(format!(
                "policy coefficients fall outside rate {:?} / fixed {:?}",
                bounds.rate, bounds.fixed
            )));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let policy: TaxPolicy = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        TaxPolicy::new(policy.rate, policy.fixed)
    }
}

/// Uniform random policy inside `bounds`, used by property tests and
/// random restarts of experiments.
pub fn random_policy<R: RngCore + ?Sized>(
    rng: &mut R,
    n_markets: usize,
    bounds: &PolicyBounds,
) -> TaxPolicy {
    let rate = (0..n_markets)
        .map(|_| seeds::uniform(rng, bounds.rate.0, bounds.rate.1))
        .collect();
    let fixed = (0..n_markets)
        .map(|_| seeds::uniform(rng, bounds.fixed.0, bounds.fixed.1))
        .collect();
    TaxPolicy { rate, fixed }
}
