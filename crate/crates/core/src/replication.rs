//! Static replication of expected impermanent loss with vanilla options.
//!
//! Per unit of liquidity the loss is a strip of options struck inside the
//! band, weighted by `−½·K^(−3/2)`:
//!
//! ```text
//! UIL_R(P) = −½ ∫_l^u K^(−3/2) (P − K)⁺ dK      (calls, right side)
//! UIL_L(P) = −½ ∫_l^u K^(−3/2) (K − P)⁺ dK      (puts, left side)
//! ```
//!
//! The identity holds path by path, so taking expectations under any model
//! turns it into an integral of option prices. In practice the integral is
//! a trapezoid sum over a strike grid, or over whatever strikes a chain
//! offers.

use crate::amm::{PriceInterval, Side};
use crate::error::{domain, ensure_positive, Error, Result};
use crate::il_payoff::VanillaKind;
use crate::quadrature::{self, Tolerance};

/// Strikes with trapezoid weights. `Σ weights` equals the covered width.
#[derive(Debug, Clone, PartialEq)]
pub struct StrikeGrid {
    strikes: Vec<f64>,
    weights: Vec<f64>,
}

impl StrikeGrid {
    pub const DEFAULT_POINTS: usize = 1001;

    /// `n` evenly spaced strikes from `lower` to `upper` inclusive.
    pub fn uniform(interval: &PriceInterval, n: usize) -> Result<Self> {
        if interval.is_degenerate() {
            return Ok(Self {
                strikes: vec![interval.lower()],
                weights: vec![0.0],
            });
        }
        if n < 2 {
            return Err(domain(format!("a strike grid needs at least 2 points, got {n}")));
        }
        let (l, u) = (interval.lower(), interval.upper());
        let h = (u - l) / (n - 1) as f64;
        let mut strikes: Vec<f64> = (0..n).map(|i| l + h * i as f64).collect();
        strikes[n - 1] = u;
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Ok(Self { strikes, weights })
    }

    /// Uniform grid with `kink` inserted as an extra node when it falls
    /// strictly inside the band, so each cell sees a smooth integrand.
    pub fn uniform_split_at(interval: &PriceInterval, n: usize, kink: f64) -> Result<Self> {
        let base = Self::uniform(interval, n)?;
        if !(kink > interval.lower() && kink < interval.upper()) {
            return Ok(base);
        }
        let mut strikes = base.strikes;
        let pos = strikes.partition_point(|&k| k < kink);
        if strikes[pos] != kink {
            strikes.insert(pos, kink);
        }
        Self::trapezoid(strikes)
    }

    /// Trapezoid weights for arbitrary strictly increasing strikes.
    pub fn trapezoid(strikes: Vec<f64>) -> Result<Self> {
        validate_strikes(&strikes)?;
        let n = strikes.len();
        let mut weights = vec![0.0; n];
        for i in 0..n.saturating_sub(1) {
            let h = strikes[i + 1] - strikes[i];
            weights[i] += 0.5 * h;
            weights[i + 1] += 0.5 * h;
        }
        Ok(Self { strikes, weights })
    }

    /// Midpoint (Voronoi) cells around each strike, clipped to the band.
    /// Strikes must already lie inside it.
    pub fn voronoi(strikes: Vec<f64>, interval: &PriceInterval) -> Result<Self> {
        validate_strikes(&strikes)?;
        let n = strikes.len();
        let mut bounds = Vec::with_capacity(n + 1);
        bounds.push(interval.lower());
        bounds.extend(strikes.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        bounds.push(interval.upper());
        let weights = bounds.windows(2).map(|b| (b[1] - b[0]).max(0.0)).collect();
        let grid = Self { strikes, weights };
        grid.check_within(interval)?;
        Ok(grid)
    }

    pub fn strikes(&self) -> &[f64] {
        &self.strikes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.strikes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strikes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn check_within(&self, interval: &PriceInterval) -> Result<()> {
        let (lo, hi) = (self.strikes[0], self.strikes[self.strikes.len() - 1]);
        let slack = 1e-12 * interval.upper();
        if lo < interval.lower() - slack || hi > interval.upper() + slack {
            return Err(Error::GridOutsideInterval {
                grid_lo: lo,
                grid_hi: hi,
                lower: interval.lower(),
                upper: interval.upper(),
            });
        }
        Ok(())
    }

    /// `Σ wᵢ·½·Kᵢ^(−3/2)·value(Kᵢ)`, summed in strike order.
    fn kernel_sum(&self, value: impl Fn(f64) -> f64) -> f64 {
        self.strikes
            .iter()
            .zip(&self.weights)
            .map(|(&k, &w)| 0.5 * w * k.powf(-1.5) * value(k))
            .sum()
    }
}

fn validate_strikes(strikes: &[f64]) -> Result<()> {
    if strikes.is_empty() {
        return Err(domain("strike grid is empty"));
    }
    for &k in strikes {
        ensure_positive("strike", k)?;
    }
    if strikes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("strikes must be strictly increasing"));
    }
    Ok(())
}

/// `E[UIL]` from option prices: `−½ Σ wᵢ Kᵢ^(−3/2) price(Kᵢ)`. The pricer
/// must quote calls for the right side and puts for the left.
pub fn replicate_expected_uil(
    _side: Side,
    interval: &PriceInterval,
    pricer: impl Fn(f64) -> f64,
    grid: &StrikeGrid,
) -> Result<f64> {
    grid.check_within(interval)?;
    Ok(-grid.kernel_sum(pricer))
}

/// Price sensitivity of `E[UIL]`: the same strip applied to option deltas.
pub fn uil_delta(
    _side: Side,
    interval: &PriceInterval,
    delta_pricer: impl Fn(f64) -> f64,
    grid: &StrikeGrid,
) -> Result<f64> {
    grid.check_within(interval)?;
    Ok(-grid.kernel_sum(delta_pricer))
}

/// The strip's payoff at a single terminal price; converges to
/// `uil(side, interval, price)` as the grid refines.
pub fn replicated_payoff(side: Side, grid: &StrikeGrid, price: f64) -> f64 {
    let kind = VanillaKind::hedging(side);
    -grid.kernel_sum(|k| kind.intrinsic(price, k))
}

/// Right-hand side of the square-root payoff identities:
///
/// ```text
/// call: ½K̂^(−½)(x − K̂)⁺ − ¼ ∫_K̂^∞ K^(−3/2)(x − K)⁺ dK  = (√x − √K̂)⁺
/// put:  ½K̂^(−½)(K̂ − x)⁺ + ¼ ∫_0^K̂  K^(−3/2)(K − x)⁺ dK  = (√K̂ − √x)⁺
/// ```
///
/// The inner integral is evaluated in closed form by
/// [`lemma1_inner_integral`].
pub fn lemma1_rhs(x: f64, k_hat: f64, kind: VanillaKind) -> f64 {
    let head = 0.5 * kind.intrinsic(x, k_hat) / k_hat.sqrt();
    let tail = 0.25 * lemma1_inner_integral(x, k_hat, kind);
    match kind {
        VanillaKind::Call => head - tail,
        VanillaKind::Put => head + tail,
    }
}

/// `∫_K̂^∞ K^(−3/2)(x − K)⁺ dK` (call) or `∫_0^K̂ K^(−3/2)(K − x)⁺ dK` (put).
/// Both equal `2(√x − √K̂)²/√K̂` on their support and vanish elsewhere.
pub fn lemma1_inner_integral(x: f64, k_hat: f64, kind: VanillaKind) -> f64 {
    let in_support = match kind {
        VanillaKind::Call => x > k_hat,
        VanillaKind::Put => x < k_hat,
    };
    if in_support {
        let gap = x.sqrt() - k_hat.sqrt();
        2.0 * gap * gap / k_hat.sqrt()
    } else {
        0.0
    }
}

/// Result of a Carr-Madan replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrMadan {
    pub value: f64,
    /// Magnitude of the last strike window integrated on each tail; an
    /// estimate of what truncating the strike range left out.
    pub tail_bound: f64,
    pub tail_within_tolerance: bool,
}

/// `E[f(x)]` for twice differentiable `f` from vanilla prices:
///
/// ```text
/// f(x*) + f′(x*)(E[x] − x*) + ∫_0^x* f″(K) P(K) dK + ∫_x*^∞ f″(K) C(K) dK
/// ```
///
/// `pricer(K)` returns `(call, put)`. The forward `E[x]` is read off the
/// pricer through put-call parity at the anchor. Both integrals run over
/// log-strike windows of doubling width until a window adds less than the
/// tolerance.
pub fn carr_madan_replicate(
    second_derivative: impl Fn(f64) -> f64,
    anchor: f64,
    value_and_slope_at_anchor: (f64, f64),
    pricer: impl Fn(f64) -> (f64, f64),
) -> Result<CarrMadan> {
    ensure_positive("anchor", anchor)?;
    let (f0, df0) = value_and_slope_at_anchor;
    let (c0, p0) = pricer(anchor);
    let forward = anchor + c0 - p0;

    const TOL: f64 = 1e-13;
    const MAX_LOG_SPAN: f64 = 64.0;
    let quad_tol = Tolerance { abs: 1e-300, rel: 1e-12, max_subdivisions: 5_000 };

    // K = anchor·e^(dir·u), dK = K du
    let tail = |dir: f64| -> Result<(f64, f64, bool)> {
        let integrand = |u: f64| {
            let k = anchor * (dir * u).exp();
            let price = if dir > 0.0 { pricer(k).0 } else { pricer(k).1 };
            second_derivative(k) * price * k
        };
        let (mut total, mut last, mut lo, mut width) = (0.0, f64::INFINITY, 0.0, 0.5);
        while lo < MAX_LOG_SPAN {
            let piece = quadrature::integrate(integrand, lo, lo + width, &[], quad_tol)?.value;
            total += piece;
            last = piece.abs();
            lo += width;
            if last <= TOL * total.abs().max(1.0) && lo >= 1.0 {
                return Ok((total, last, true));
            }
            width *= 2.0;
        }
        Ok((total, last, false))
    };

    let (puts, put_tail, put_ok) = tail(-1.0)?;
    let (calls, call_tail, call_ok) = tail(1.0)?;
    Ok(CarrMadan {
        value: f0 + df0 * (forward - anchor) + puts + calls,
        tail_bound: put_tail + call_tail,
        tail_within_tolerance: put_ok && call_ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionQuote {
    pub kind: VanillaKind,
    pub strike: f64,
    pub maturity: f64,
    pub price: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeLeg {
    pub quote: OptionQuote,
    pub quantity: f64,
}

impl HedgeLeg {
    pub fn cost(&self) -> f64 {
        self.quantity * self.quote.price
    }
}

/// A quote that was left out of a hedge, and why.
#[derive(Debug, Clone, PartialEq)]
pub struct QuoteIssue {
    pub quote: OptionQuote,
    pub reason: String,
}

/// Long strip of vanilla options offsetting `−UIL` per unit of liquidity.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgePortfolio {
    pub legs: Vec<HedgeLeg>,
    pub side: Side,
    pub interval: PriceInterval,
    pub residual_bound: f64,
    /// Quotes of the hedging kind and maturity that failed validation.
    pub rejected: Vec<QuoteIssue>,
}

impl HedgePortfolio {
    pub fn cost(&self) -> f64 {
        self.legs.iter().map(HedgeLeg::cost).sum()
    }

    /// Portfolio value at expiry if the price ends at `price`.
    pub fn payoff(&self, price: f64) -> f64 {
        self.legs
            .iter()
            .map(|leg| leg.quantity * leg.quote.kind.intrinsic(price, leg.quote.strike))
            .sum()
    }

    pub fn strikes(&self) -> Vec<f64> {
        self.legs.iter().map(|l| l.quote.strike).collect()
    }
}

/// Builds the long hedge from a chain: quotes of the hedging kind expiring
/// within `maturity_tol` of `maturity` and struck inside the band, each held
/// in quantity `½·K^(−3/2)·ΔK` over its Voronoi cell.
pub fn build_hedge_portfolio(
    side: Side,
    interval: &PriceInterval,
    chain: &[OptionQuote],
    maturity: f64,
    maturity_tol: f64,
) -> Result<HedgePortfolio> {
    let kind = VanillaKind::hedging(side);
    let mut rejected = Vec::new();
    let mut candidates: Vec<OptionQuote> = Vec::new();
    let mut outside: Vec<f64> = Vec::new();

    for q in chain.iter().filter(|q| q.kind == kind && (q.maturity - maturity).abs() <= maturity_tol) {
        if !(q.strike.is_finite() && q.strike > 0.0) {
            rejected.push(QuoteIssue { quote: *q, reason: format!("non-positive strike {}", q.strike) });
        } else if !(q.price.is_finite() && q.price >= 0.0) {
            rejected.push(QuoteIssue { quote: *q, reason: format!("negative or invalid price {}", q.price) });
        } else if interval.contains(q.strike) {
            candidates.push(*q);
        } else {
            outside.push(q.strike);
        }
    }

    candidates.sort_by(|a, b| a.strike.total_cmp(&b.strike));
    let mut quotes: Vec<OptionQuote> = Vec::with_capacity(candidates.len());
    for q in candidates {
        match quotes.last() {
            Some(prev) if prev.strike == q.strike => rejected.push(QuoteIssue {
                quote: q,
                reason: format!("duplicate strike {}", q.strike),
            }),
            _ => quotes.push(q),
        }
    }

    if quotes.is_empty() {
        let below = outside.iter().copied().filter(|&k| k < interval.lower()).fold(f64::NAN, f64::max);
        let above = outside.iter().copied().filter(|&k| k > interval.upper()).fold(f64::NAN, f64::min);
        let show = |v: f64| if v.is_nan() { "none".to_string() } else { v.to_string() };
        return Err(Error::Unhedgeable {
            lower: interval.lower(),
            upper: interval.upper(),
            kind: kind.as_str(),
            below: show(below),
            above: show(above),
        });
    }

    let grid = StrikeGrid::voronoi(quotes.iter().map(|q| q.strike).collect(), interval)?;
    let legs: Vec<HedgeLeg> = quotes
        .iter()
        .zip(grid.weights())
        .map(|(q, &w)| HedgeLeg { quote: *q, quantity: 0.5 * q.strike.powf(-1.5) * w })
        .collect();
    let residual_bound = coarseness_bound(&grid, &quotes, interval);

    Ok(HedgePortfolio { legs, side, interval: *interval, residual_bound, rejected })
}

/// Quadrature error estimate for the strip integrand `g(K) = ½K^(−3/2)·price(K)`:
/// second divided differences give `Σ h²/12·|g″|·ΔK` over interior cells, and
/// first differences give the one-sided error of the two edge cells. With
/// fewer than three strikes there is nothing to estimate from, so the bound
/// is the full integral scale `max g · width`.
fn coarseness_bound(grid: &StrikeGrid, quotes: &[OptionQuote], interval: &PriceInterval) -> f64 {
    let k = grid.strikes();
    let g: Vec<f64> = quotes.iter().map(|q| 0.5 * q.strike.powf(-1.5) * q.price).collect();
    let n = k.len();
    if n < 3 {
        return g.iter().copied().fold(0.0, f64::max) * interval.width();
    }
    let mut bound = 0.0;
    for i in 1..n - 1 {
        let (h0, h1) = (k[i] - k[i - 1], k[i + 1] - k[i]);
        let second = 2.0 * ((g[i + 1] - g[i]) / h1 - (g[i] - g[i - 1]) / h0) / (h0 + h1);
        let h = 0.5 * (h0 + h1);
        bound += h * h / 12.0 * second.abs() * grid.weights()[i];
    }
    let edge = |slope: f64, s: f64, a: f64, b: f64| (slope * ((b - s).powi(2) - (s - a).powi(2)) / 2.0).abs();
    let first_cell_hi = 0.5 * (k[0] + k[1]);
    let last_cell_lo = 0.5 * (k[n - 2] + k[n - 1]);
    bound += edge((g[1] - g[0]) / (k[1] - k[0]), k[0], interval.lower(), first_cell_hi);
    bound += edge((g[n - 1] - g[n - 2]) / (k[n - 1] - k[n - 2]), k[n - 1], last_cell_lo, interval.upper());
    bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbm::{bs_call, bs_put, expected_sqrt_price, GbmParams};
    use crate::il_payoff::uil;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iv(l: f64, u: f64) -> PriceInterval {
        PriceInterval::new(l, u).unwrap()
    }

    #[test]
    fn uniform_grid_weights() {
        let g = StrikeGrid::uniform(&iv(11.0, 14.0), 4).unwrap();
        assert_eq!(g.strikes(), &[11.0, 12.0, 13.0, 14.0]);
        assert_eq!(g.weights(), &[0.5, 1.0, 1.0, 0.5]);
        let g = StrikeGrid::uniform(&iv(11.0, 14.0), 1001).unwrap();
        assert_relative_eq!(g.total_weight(), 3.0, max_relative = 1e-13);
        assert!(StrikeGrid::uniform(&iv(11.0, 14.0), 1).is_err());
    }

    #[test]
    fn split_grid_inserts_kink() {
        let g = StrikeGrid::uniform_split_at(&iv(11.0, 14.0), 4, 12.5).unwrap();
        assert_eq!(g.strikes(), &[11.0, 12.0, 12.5, 13.0, 14.0]);
        assert_relative_eq!(g.total_weight(), 3.0, max_relative = 1e-15);
        let g = StrikeGrid::uniform_split_at(&iv(11.0, 14.0), 4, 20.0).unwrap();
        assert_eq!(g.len(), 4);
    }

    #[test]
    fn voronoi_cells() {
        let g = StrikeGrid::voronoi(vec![11.5, 12.0, 13.5], &iv(11.0, 14.0)).unwrap();
        assert_eq!(g.weights(), &[0.75, 1.0, 1.25]);
        assert!(StrikeGrid::voronoi(vec![10.0, 12.0], &iv(11.0, 14.0)).is_err());
        assert!(StrikeGrid::voronoi(vec![12.0, 12.0], &iv(11.0, 14.0)).is_err());
    }

    #[test]
    fn lemma1_examples() {
        assert_relative_eq!(lemma1_rhs(4.0, 1.0, VanillaKind::Call), 1.0, max_relative = 1e-15);
        assert_relative_eq!(lemma1_inner_integral(4.0, 1.0, VanillaKind::Call), 2.0, max_relative = 1e-15);
        assert_relative_eq!(lemma1_rhs(0.25, 1.0, VanillaKind::Put), 0.5, max_relative = 1e-15);
        assert_eq!(lemma1_rhs(3.0, 3.0, VanillaKind::Call), 0.0);
        assert_eq!(lemma1_rhs(3.0, 3.0, VanillaKind::Put), 0.0);
        assert_eq!(lemma1_rhs(2.0, 3.0, VanillaKind::Call), 0.0);
    }

    #[test]
    fn lemma1_inner_integral_matches_quadrature() {
        let tol = Tolerance::default();
        for (x, k) in [(4.0f64, 1.0f64), (0.3, 7.0), (55.0, 0.02), (9.0, 8.5)] {
            let call = quadrature::integrate(|kk: f64| kk.powf(-1.5) * (x - kk).max(0.0), k, x.max(k), &[], tol).unwrap();
            assert_relative_eq!(lemma1_inner_integral(x, k, VanillaKind::Call), call.value, max_relative = 1e-12, epsilon = 1e-300);
            let put = quadrature::integrate(|kk: f64| kk.powf(-1.5) * (kk - x).max(0.0), x.min(k), k, &[], tol).unwrap();
            assert_relative_eq!(lemma1_inner_integral(x, k, VanillaKind::Put), put.value, max_relative = 1e-12, epsilon = 1e-300);
        }
    }

    #[test]
    fn replicate_degenerate_interval() {
        let band = iv(12.0, 12.0);
        let g = StrikeGrid::uniform(&band, 11).unwrap();
        assert_eq!(replicate_expected_uil(Side::Right, &band, |_| 1.0, &g).unwrap(), 0.0);
    }

    #[test]
    fn replicate_rejects_grid_outside() {
        let g = StrikeGrid::uniform(&iv(10.0, 14.0), 11).unwrap();
        let err = replicate_expected_uil(Side::Right, &iv(11.0, 14.0), |_| 1.0, &g).unwrap_err();
        assert!(matches!(err, Error::GridOutsideInterval { .. }));
    }

    #[test]
    fn pathwise_strip_converges_to_payoff() {
        let band = iv(11.0, 14.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let p = rng.gen_range(5.0..25.0);
            for side in [Side::Right, Side::Left] {
                let band = if side == Side::Right { band } else { iv(6.0, 9.0) };
                let split = StrikeGrid::uniform_split_at(&band, 201, p).unwrap();
                assert!((replicated_payoff(side, &split, p) - uil(side, &band, p)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn carr_madan_identity_payoff() {
        let gbm = GbmParams::new(0.7, 30.0 / 365.0, 10.0).unwrap();
        let pricer = |k: f64| (bs_call(&gbm, k), bs_put(&gbm, k));
        let r = carr_madan_replicate(|_| 0.0, 7.0, (7.0, 1.0), pricer).unwrap();
        assert_relative_eq!(r.value, 10.0, max_relative = 1e-14);
        assert!(r.tail_within_tolerance);
    }

    #[test]
    fn carr_madan_sqrt_payoff() {
        let gbm = GbmParams::new(0.7, 30.0 / 365.0, 10.0).unwrap();
        let pricer = |k: f64| (bs_call(&gbm, k), bs_put(&gbm, k));
        for anchor in [10.0, 8.0, 13.0] {
            let r = carr_madan_replicate(
                |k| -0.25 * k.powf(-1.5),
                anchor,
                (anchor.sqrt(), 0.5 / anchor.sqrt()),
                pricer,
            )
            .unwrap();
            assert!(r.tail_within_tolerance);
            assert_relative_eq!(r.value, expected_sqrt_price(&gbm), max_relative = 1e-10);
        }
    }

    #[test]
    fn carr_madan_smoothed_call() {
        let gbm = GbmParams::new(0.5, 0.25, 10.0).unwrap();
        let pricer = |k: f64| (bs_call(&gbm, k), bs_put(&gbm, k));
        let strike = 11.0;
        let mut prev = f64::INFINITY;
        for eps in [1e-1, 1e-2, 1e-3] {
            // softplus: ε·ln(1 + e^((x−K)/ε)), f″ = s(1−s)/ε with s the logistic
            let f2 = |x: f64| {
                let s = 1.0 / (1.0 + (-(x - strike) / eps).exp());
                s * (1.0 - s) / eps
            };
            let r = carr_madan_replicate(f2, strike, (eps * 2f64.ln(), 0.5), pricer).unwrap();
            let err = (r.value - bs_call(&gbm, strike)).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-6);
    }

    fn chain_from(gbm: &GbmParams, strikes: &[f64], kind: VanillaKind) -> Vec<OptionQuote> {
        strikes
            .iter()
            .map(|&k| OptionQuote {
                kind,
                strike: k,
                maturity: gbm.horizon(),
                price: match kind {
                    VanillaKind::Call => bs_call(gbm, k),
                    VanillaKind::Put => bs_put(gbm, k),
                },
            })
            .collect()
    }

    #[test]
    fn hedge_from_dense_chain() {
        use crate::gbm::expected_uil_gbm;
        let gbm = GbmParams::new(0.7, 30.0 / 365.0, 10.0).unwrap();
        let band = iv(11.0, 14.0);
        let strikes: Vec<f64> = (0..31).map(|i| 11.0 + 0.1 * i as f64).collect();
        let mut chain = chain_from(&gbm, &strikes, VanillaKind::Call);
        chain.extend(chain_from(&gbm, &[9.0, 10.0, 15.0], VanillaKind::Call));
        chain.extend(chain_from(&gbm, &strikes, VanillaKind::Put));
        let hedge = build_hedge_portfolio(Side::Right, &band, &chain, gbm.horizon(), 1e-9).unwrap();
        assert_eq!(hedge.legs.len(), 31);
        assert!(hedge.legs.iter().all(|l| l.quantity >= 0.0 && l.quote.kind == VanillaKind::Call));
        let target = -expected_uil_gbm(Side::Right, &band, &gbm);
        assert!((hedge.cost() - target).abs() <= 1e-3 * target, "{} {}", hedge.cost(), target);
        let actual = (hedge.cost() - target).abs();
        assert!(hedge.residual_bound >= actual && hedge.residual_bound <= 10.0 * actual);
    }

    #[test]
    fn hedge_single_strike() {
        let gbm = GbmParams::new(0.7, 30.0 / 365.0, 10.0).unwrap();
        let band = iv(11.0, 14.0);
        let chain = chain_from(&gbm, &[12.0, 20.0], VanillaKind::Call);
        let hedge = build_hedge_portfolio(Side::Right, &band, &chain, gbm.horizon(), 1e-9).unwrap();
        assert_eq!(hedge.legs.len(), 1);
        assert_relative_eq!(hedge.legs[0].quantity, 0.5 * 12f64.powf(-1.5) * 3.0, max_relative = 1e-15);
        assert!(hedge.residual_bound >= hedge.cost());
    }

    #[test]
    fn hedge_errors_and_rejections() {
        let gbm = GbmParams::new(0.7, 30.0 / 365.0, 10.0).unwrap();
        let band = iv(11.0, 14.0);
        let err = build_hedge_portfolio(Side::Right, &band, &[], 0.1, 1e-9).unwrap_err();
        assert!(matches!(err, Error::Unhedgeable { .. }));

        let chain = chain_from(&gbm, &[9.0, 15.0], VanillaKind::Call);
        match build_hedge_portfolio(Side::Right, &band, &chain, gbm.horizon(), 1e-9).unwrap_err() {
            Error::Unhedgeable { below, above, .. } => {
                assert_eq!(below, "9");
                assert_eq!(above, "15");
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut chain = chain_from(&gbm, &[6.0, 7.0, 8.0, 9.0], VanillaKind::Put);
        chain[1].price = -0.01;
        chain.push(chain[2]);
        let hedge = build_hedge_portfolio(Side::Left, &iv(6.0, 9.0), &chain, gbm.horizon(), 1e-9).unwrap();
        assert_eq!(hedge.strikes(), vec![6.0, 8.0, 9.0]);
        assert_eq!(hedge.rejected.len(), 2);
        assert!(hedge.rejected[0].reason.contains("negative"));

        // wrong maturity is not hedging material
        let err = build_hedge_portfolio(Side::Right, &band, &chain_from(&gbm, &[12.0], VanillaKind::Call), 1.0, 1e-9);
        assert!(err.is_err());
    }
}
