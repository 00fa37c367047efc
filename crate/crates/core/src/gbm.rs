//! Zero-rate, zero-drift lognormal pricing: vanilla and square-root options,
//! the closed-form expected UIL, and a quadrature oracle over the lognormal
//! density.

use crate::amm::{PriceInterval, Side};
use crate::error::{ensure_positive, Result};
use crate::quadrature::{self, Tolerance};

/// Standard normal CDF, `erfc(−z/√2)/2`.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Lognormal terminal price with `E[P_t] = P₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams {
    sigma: f64,
    horizon: f64,
    spot: f64,
}

impl GbmParams {
    pub fn new(sigma: f64, horizon: f64, spot: f64) -> Result<Self> {
        ensure_positive("volatility", sigma)?;
        ensure_positive("horizon", horizon)?;
        ensure_positive("spot", spot)?;
        Ok(Self { sigma, horizon, spot })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn spot(&self) -> f64 {
        self.spot
    }

    pub fn with_spot(&self, spot: f64) -> Result<Self> {
        Self::new(self.sigma, self.horizon, spot)
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(sigma, self.horizon, self.spot)
    }

    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::new(self.sigma, horizon, self.spot)
    }

    /// Total standard deviation of log-price, `σ√t`.
    pub fn total_vol(&self) -> f64 {
        self.sigma * self.horizon.sqrt()
    }

    /// `d = [ln(P₀/K) − σ²t/2] / (σ√t)`.
    pub fn moneyness(&self, strike: f64) -> f64 {
        let s = self.total_vol();
        ((self.spot / strike).ln() - 0.5 * s * s) / s
    }
}

/// Moneyness of the four band edges: `d_l, d_u` for the right band and
/// `q_l, q_u` for the left band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoneynessTerms {
    pub d_l: f64,
    pub d_u: f64,
    pub q_l: f64,
    pub q_u: f64,
}

impl MoneynessTerms {
    pub fn new(params: &GbmParams, right: &PriceInterval, left: &PriceInterval) -> Self {
        Self {
            d_l: params.moneyness(right.lower()),
            d_u: params.moneyness(right.upper()),
            q_l: params.moneyness(left.lower()),
            q_u: params.moneyness(left.upper()),
        }
    }
}

pub fn bs_call(params: &GbmParams, strike: f64) -> f64 {
    let d = params.moneyness(strike);
    let s = params.total_vol();
    (params.spot * normal_cdf(d + s) - strike * normal_cdf(d)).max(0.0)
}

/// Zero-rate put; equal to `bs_call − P₀ + K` in exact arithmetic.
pub fn bs_put(params: &GbmParams, strike: f64) -> f64 {
    let d = params.moneyness(strike);
    let s = params.total_vol();
    (strike * normal_cdf(-d) - params.spot * normal_cdf(-d - s)).max(0.0)
}

pub fn bs_call_delta(params: &GbmParams, strike: f64) -> f64 {
    normal_cdf(params.moneyness(strike) + params.total_vol())
}

pub fn bs_put_delta(params: &GbmParams, strike: f64) -> f64 {
    -normal_cdf(-params.moneyness(strike) - params.total_vol())
}

/// `E[√P_t] = √P₀·exp(−σ²t/8)`.
pub fn expected_sqrt_price(params: &GbmParams) -> f64 {
    let s = params.total_vol();
    params.spot.sqrt() * (-s * s / 8.0).exp()
}

/// `E[(√P_t − √K)⁺]`.
pub fn sqrt_call(params: &GbmParams, strike: f64) -> f64 {
    let d = params.moneyness(strike);
    let s = params.total_vol();
    (expected_sqrt_price(params) * normal_cdf(d + 0.5 * s) - strike.sqrt() * normal_cdf(d)).max(0.0)
}

/// `E[(√K − √P_t)⁺]`.
pub fn sqrt_put(params: &GbmParams, strike: f64) -> f64 {
    let d = params.moneyness(strike);
    let s = params.total_vol();
    (strike.sqrt() * normal_cdf(-d) - expected_sqrt_price(params) * normal_cdf(-d - 0.5 * s)).max(0.0)
}

/// Closed-form `E[UIL]` under zero-drift GBM.
pub fn expected_uil_gbm(side: Side, interval: &PriceInterval, params: &GbmParams) -> f64 {
    let s = params.total_vol();
    let p0 = params.spot;
    let root = 2.0 * expected_sqrt_price(params);
    let (l, u) = (interval.lower(), interval.upper());
    let (dl, du) = (params.moneyness(l), params.moneyness(u));
    let n = normal_cdf;
    match side {
        Side::Right => {
            root * (n(dl + 0.5 * s) - n(du + 0.5 * s)) - l.sqrt() * n(dl) + u.sqrt() * n(du)
                - p0 / l.sqrt() * n(dl + s)
                + p0 / u.sqrt() * n(du + s)
        }
        Side::Left => {
            root * (-n(-dl - 0.5 * s) + n(-du - 0.5 * s)) + l.sqrt() * n(-dl) - u.sqrt() * n(-du)
                + p0 / l.sqrt() * n(-dl - s)
                - p0 / u.sqrt() * n(-du - s)
        }
    }
}

/// Log-price truncation, in standard deviations, for the quadrature oracle.
/// For payoffs of at most linear growth the neglected mass is below 1e-15
/// relative for σ√t up to about 3. The window also reaches this far past
/// every kink, so payoffs that vanish short of a far-out kink keep their
/// relative accuracy.
pub const QUADRATURE_SPAN: f64 = 10.0;

/// `E[payoff(P_t)]` by adaptive Gauss-Kronrod over standardized log-price.
pub fn lognormal_quadrature<F: Fn(f64) -> f64>(payoff: F, params: &GbmParams) -> Result<f64> {
    lognormal_quadrature_with_kinks(payoff, params, &[])
}

/// As [`lognormal_quadrature`], splitting the integral at the given kink
/// prices so every piece is smooth.
pub fn lognormal_quadrature_with_kinks<F: Fn(f64) -> f64>(
    payoff: F,
    params: &GbmParams,
    kinks: &[f64],
) -> Result<f64> {
    let s = params.total_vol();
    let mean_log = params.spot.ln() - 0.5 * s * s;
    let to_z = |x: f64| (x.ln() - mean_log) / s;
    let breaks: Vec<f64> = kinks.iter().filter(|k| **k > 0.0).map(|&k| to_z(k)).collect();
    let integrand = |z: f64| payoff((mean_log + s * z).exp()) * normal_pdf(z);
    let tol = Tolerance {
        abs: 1e-300,
        rel: 1e-13,
        max_subdivisions: 20_000,
    };
    let lo = breaks.iter().fold(0.0, |m: f64, &z| m.min(z)) - QUADRATURE_SPAN;
    let hi = breaks.iter().fold(0.0, |m: f64, &z| m.max(z)) + QUADRATURE_SPAN;
    quadrature::integrate(integrand, lo, hi, &breaks, tol).map(|e| e.value)
}
