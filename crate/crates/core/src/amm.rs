//! Constant-product pool mechanics and concentrated-liquidity positions.
//!
//! Prices are quoted in token Y per token X. A pool with liquidity `L` at
//! price `P` holds `X = L/√P` and `Y = L·√P`, so `X·Y = L²`. A position of
//! liquidity `ΔL` on `[lower, upper]` behaves like that pool restricted to the
//! band: below the band it holds only X, above it only Y.

use crate::error::{domain, ensure_non_negative, ensure_positive, Result};

/// A price band `[lower, upper]`, `0 < lower ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceInterval {
    lower: f64,
    upper: f64,
}

impl PriceInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        ensure_positive("interval lower bound", lower)?;
        ensure_positive("interval upper bound", upper)?;
        if lower > upper {
            return Err(domain(format!(
                "interval lower bound {lower} exceeds upper bound {upper}"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_degenerate(&self) -> bool {
        self.lower == self.upper
    }

    pub fn contains(&self, price: f64) -> bool {
        self.lower <= price && price <= self.upper
    }

    /// Same band with both bounds multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.lower * factor, self.upper * factor)
    }
}

/// Which side of the entry price the liquidity sits on.
///
/// `Right` liquidity is above the entry price and is deposited as token X
/// (ask-like); `Left` liquidity is below and is deposited as token Y
/// (bid-like).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Right,
    Left,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Right => "right",
            Side::Left => "left",
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Side {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "right" | "r" | "ask" => Ok(Side::Right),
            "left" | "l" | "bid" => Ok(Side::Left),
            other => Err(domain(format!("unknown side '{other}' (expected right|left)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TokenAmounts {
    pub x: f64,
    pub y: f64,
}

impl TokenAmounts {
    pub const ZERO: TokenAmounts = TokenAmounts { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        ensure_non_negative("token X amount", x)?;
        ensure_non_negative("token Y amount", y)?;
        Ok(Self { x, y })
    }

    /// Value in token Y at `price`.
    pub fn value_at(&self, price: f64) -> f64 {
        self.y + self.x * price
    }
}

impl std::ops::Add for TokenAmounts {
    type Output = TokenAmounts;

    fn add(self, rhs: Self) -> Self {
        TokenAmounts {
            x: self.x + rhs.x,
            y: self.y + rhs.y,
        }
    }
}

/// Full-range constant-product pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolState {
    liquidity: f64,
    price: f64,
    fee_rate: f64,
}

impl PoolState {
    pub fn new(liquidity: f64, price: f64, fee_rate: f64) -> Result<Self> {
        ensure_non_negative("liquidity", liquidity)?;
        ensure_positive("pool price", price)?;
        if !(0.0..1.0).contains(&fee_rate) {
            return Err(domain(format!("fee rate must lie in [0, 1), got {fee_rate}")));
        }
        Ok(Self {
            liquidity,
            price,
            fee_rate,
        })
    }

    /// Pool whose reserves are exactly `x` and `y` (price `y/x`, liquidity `√(xy)`).
    pub fn from_reserves(x: f64, y: f64, fee_rate: f64) -> Result<Self> {
        ensure_positive("reserve X", x)?;
        ensure_positive("reserve Y", y)?;
        Self::new((x * y).sqrt(), y / x, fee_rate)
    }

    pub fn liquidity(&self) -> f64 {
        self.liquidity
    }

    pub fn price(&self) -> f64 {
        self.price
    }

    pub fn fee_rate(&self) -> f64 {
        self.fee_rate
    }

    pub fn reserves(&self) -> TokenAmounts {
        let sp = self.price.sqrt();
        TokenAmounts {
            x: self.liquidity / sp,
            y: self.liquidity * sp,
        }
    }
}

pub fn reserves_from_state(pool: &PoolState) -> TokenAmounts {
    pool.reserves()
}

/// Token Y paid out for `dx_in` of token X. The fee is taken on the input
/// side, so only `(1 − γ)·dx_in` reaches the curve.
pub fn swap_out(pool: &PoolState, dx_in: f64) -> Result<f64> {
    ensure_positive("swap input", dx_in)?;
    let TokenAmounts { x, y } = pool.reserves();
    if x <= 0.0 || y <= 0.0 {
        return Err(domain("cannot swap against a pool with zero reserves"));
    }
    let dx_eff = (1.0 - pool.fee_rate) * dx_in;
    Ok(y * dx_eff / (x + dx_eff))
}

/// Tokens needed to add `delta_l` liquidity on `interval` at `current_price`.
///
/// The same expression gives the tokens withdrawable from such a position
/// when the price is `current_price`.
pub fn deposits_for_liquidity(
    delta_l: f64,
    interval: &PriceInterval,
    current_price: f64,
) -> Result<TokenAmounts> {
    ensure_non_negative("liquidity", delta_l)?;
    ensure_positive("current price", current_price)?;
    Ok(band_amounts(delta_l, interval, current_price))
}

fn band_amounts(delta_l: f64, interval: &PriceInterval, price: f64) -> TokenAmounts {
    let (sl, su) = (interval.lower.sqrt(), interval.upper.sqrt());
    if price < interval.lower {
        TokenAmounts {
            x: delta_l * (1.0 / sl - 1.0 / su),
            y: 0.0,
        }
    } else if price > interval.upper {
        TokenAmounts {
            x: 0.0,
            y: delta_l * (su - sl),
        }
    } else {
        let sp = price.sqrt();
        TokenAmounts {
            x: delta_l * (1.0 / sp - 1.0 / su),
            y: delta_l * (sp - sl),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    liquidity: f64,
    interval: PriceInterval,
    entry_price: f64,
    side: Side,
}

impl Position {
    pub fn new(liquidity: f64, interval: PriceInterval, entry_price: f64, side: Side) -> Result<Self> {
        ensure_non_negative("position liquidity", liquidity)?;
        ensure_positive("entry price", entry_price)?;
        match side {
            Side::Right if entry_price > interval.lower => Err(domain(format!(
                "right-side position needs entry price {entry_price} <= lower bound {}",
                interval.lower
            ))),
            Side::Left if entry_price < interval.upper => Err(domain(format!(
                "left-side position needs entry price {entry_price} >= upper bound {}",
                interval.upper
            ))),
            _ => Ok(Self {
                liquidity,
                interval,
                entry_price,
                side,
            }),
        }
    }

    pub fn liquidity(&self) -> f64 {
        self.liquidity
    }

    pub fn interval(&self) -> &PriceInterval {
        &self.interval
    }

    pub fn entry_price(&self) -> f64 {
        self.entry_price
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Tokens deposited at entry.
    pub fn initial_deposits(&self) -> TokenAmounts {
        band_amounts(self.liquidity, &self.interval, self.entry_price)
    }
}

/// Splits liquidity on a band straddling the current price into a `Left`
/// position on `[lower, P₀]` and a `Right` position on `[P₀, upper]`, both
/// with the full `delta_l`.
pub fn split_position(
    delta_l: f64,
    interval: &PriceInterval,
    current_price: f64,
) -> Result<(Position, Position)> {
    ensure_positive("current price", current_price)?;
    if !interval.contains(current_price) {
        return Err(domain(format!(
            "current price {current_price} outside [{}, {}]",
            interval.lower, interval.upper
        )));
    }
    let left = Position::new(
        delta_l,
        PriceInterval::new(interval.lower, current_price)?,
        current_price,
        Side::Left,
    )?;
    let right = Position::new(
        delta_l,
        PriceInterval::new(current_price, interval.upper)?,
        current_price,
        Side::Right,
    )?;
    Ok((left, right))
}

pub fn holdings_at_exit(position: &Position, exit_price: f64) -> TokenAmounts {
    band_amounts(position.liquidity, &position.interval, exit_price)
}

/// Realized impermanent loss in token Y: `Y_t − Y_0 + (X_t − X_0)·P_t`.
pub fn impermanent_loss(position: &Position, exit_price: f64) -> f64 {
    let start = position.initial_deposits();
    let end = holdings_at_exit(position, exit_price);
    (end.y - start.y) + (end.x - start.x) * exit_price
}

/// Average price at which a right-side position sells its X once the price
/// has crossed the whole band: `√(lower·upper)`.
pub fn average_sell_price(interval: &PriceInterval) -> f64 {
    (interval.lower * interval.upper).sqrt()
}
