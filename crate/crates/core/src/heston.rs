//! Heston Monte Carlo for the pool price.
//!
//! ```text
//! dP = μ P dt + √ν P dW^P
//! dν = κ(θ − ν) dt + ξ √ν dW^ν,   d⟨W^P, W^ν⟩ = ρ dt
//! ```
//!
//! Price is stepped in logs (so it stays positive) and variance by Euler
//! with full truncation: `ν⁺ = max(ν, 0)` in both drift and diffusion.
//!
//! Every path owns a ChaCha8 stream selected by its index, so the output
//! depends only on `(params, horizon, config)` and not on how rayon
//! schedules the work. Reductions run sequentially in path order.

use crate::amm::{PriceInterval, Side};
use crate::error::{domain, ensure_non_negative, ensure_positive, Error, Result};
use crate::il_payoff::{uil, VanillaKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams {
    pub mu: f64,
    pub kappa: f64,
    pub theta: f64,
    pub xi: f64,
    pub rho: f64,
    pub v0: f64,
    pub spot: f64,
}

impl HestonParams {
    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(domain(format!("drift must be finite, got {}", self.mu)));
        }
        ensure_non_negative("kappa", self.kappa)?;
        ensure_non_negative("theta", self.theta)?;
        ensure_non_negative("xi", self.xi)?;
        ensure_non_negative("v0", self.v0)?;
        ensure_positive("spot", self.spot)?;
        if self.rho.is_nan() || self.rho.abs() > 1.0 {
            return Err(domain(format!("correlation must lie in [-1, 1], got {}", self.rho)));
        }
        Ok(())
    }

    /// `2κθ ≥ ξ²`. Not required: full truncation copes with violations.
    pub fn feller_satisfied(&self) -> bool {
        2.0 * self.kappa * self.theta >= self.xi * self.xi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
}

impl McConfig {
    pub const DEFAULT_STEPS: usize = 256;

    pub fn new(n_paths: usize, n_steps: usize, seed: u64) -> Result<Self> {
        let cfg = Self { n_paths, n_steps, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(domain("number of paths must be at least 1"));
        }
        if self.n_steps == 0 {
            return Err(domain("number of time steps must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub terminal_prices: Vec<f64>,
    pub config: McConfig,
    pub params: HestonParams,
    pub horizon: f64,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.terminal_prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminal_prices.is_empty()
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

impl McEstimate {
    /// Mean and standard error of `samples`, accumulated in index order.
    pub fn from_samples<I: IntoIterator<Item = f64>>(samples: I) -> Result<Self> {
        // Welford keeps the variance stable for large sample counts
        let (mut n, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
        for x in samples {
            n += 1;
            let delta = x - mean;
            mean += delta / n as f64;
            m2 += delta * (x - mean);
        }
        if n == 0 {
            return Err(Error::EmptyPathSet);
        }
        let std_error = if n > 1 {
            (m2 / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self { value: mean, std_error })
    }
}

pub fn simulate(params: &HestonParams, horizon: f64, config: &McConfig) -> Result<PathSet> {
    params.validate()?;
    config.validate()?;
    ensure_positive("horizon", horizon)?;

    let p = *params;
    let cfg = *config;
    let dt = horizon / cfg.n_steps as f64;
    let sqrt_dt = dt.sqrt();
    let rho_perp = (1.0 - p.rho * p.rho).max(0.0).sqrt();
    let log_spot = p.spot.ln();

    let terminal_prices: Vec<f64> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|index| {
            let mut rng = path_rng(cfg.seed, index as u64);
            let (mut log_price, mut var) = (log_spot, p.v0);
            for _ in 0..cfg.n_steps {
                let z_price: f64 = StandardNormal.sample(&mut rng);
                let z_perp: f64 = StandardNormal.sample(&mut rng);
                let z_var = p.rho * z_price + rho_perp * z_perp;
                let v_pos = var.max(0.0);
                let vol_dt = (v_pos).sqrt() * sqrt_dt;
                log_price += (p.mu - 0.5 * v_pos) * dt + vol_dt * z_price;
                var += p.kappa * (p.theta - v_pos) * dt + p.xi * vol_dt * z_var;
            }
            log_price.exp()
        })
        .collect();

    Ok(PathSet {
        terminal_prices,
        config: cfg,
        params: p,
        horizon,
    })
}

/// Independent random stream for one path.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Undiscounted Monte Carlo price of a vanilla option.
pub fn mc_price(paths: &PathSet, kind: VanillaKind, strike: f64) -> Result<McEstimate> {
    ensure_positive("strike", strike)?;
    McEstimate::from_samples(paths.terminal_prices.iter().map(|&p| kind.intrinsic(p, strike)))
}

/// Monte Carlo `E[UIL]` on the given paths.
pub fn mc_expected_uil(paths: &PathSet, side: Side, interval: &PriceInterval) -> Result<McEstimate> {
    McEstimate::from_samples(paths.terminal_prices.iter().map(|&p| uil(side, interval, p)))
}

/// Prices many strikes against one path set in `O(log n)` each, using the
/// sorted terminal prices and compensated prefix sums.
#[derive(Debug, Clone)]
pub struct StrikeStrip {
    sorted: Vec<f64>,
    // prefix[i] = sum of sorted[..i]
    prefix: Vec<f64>,
}

impl StrikeStrip {
    pub fn new(paths: &PathSet) -> Result<Self> {
        Self::from_prices(&paths.terminal_prices)
    }

    pub fn from_prices(prices: &[f64]) -> Result<Self> {
        if prices.is_empty() {
            return Err(Error::EmptyPathSet);
        }
        let mut sorted = prices.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(sorted.len() + 1);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        prefix.push(0.0);
        for &x in &sorted {
            // Neumaier summation
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            prefix.push(sum + comp);
        }
        Ok(Self { sorted, prefix })
    }

    fn n(&self) -> f64 {
        self.sorted.len() as f64
    }

    pub fn call(&self, strike: f64) -> f64 {
        let idx = self.sorted.partition_point(|&p| p <= strike);
        let count = (self.sorted.len() - idx) as f64;
        let above = self.prefix[self.sorted.len()] - self.prefix[idx];
        ((above - strike * count) / self.n()).max(0.0)
    }

    pub fn put(&self, strike: f64) -> f64 {
        let idx = self.sorted.partition_point(|&p| p < strike);
        let below = self.prefix[idx];
        ((strike * idx as f64 - below) / self.n()).max(0.0)
    }

    pub fn price(&self, kind: VanillaKind, strike: f64) -> f64 {
        match kind {
            VanillaKind::Call => self.call(strike),
            VanillaKind::Put => self.put(strike),
        }
    }

    pub fn mean(&self) -> f64 {
        self.prefix[self.sorted.len()] / self.n()
    }
}
