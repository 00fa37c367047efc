//! Impermanent loss per unit of liquidity (UIL) as a function of the exit
//! price, and its decomposition into vanilla and square-root option payoffs.

use crate::amm::{PriceInterval, Side};

/// Vanilla European option type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VanillaKind {
    Call,
    Put,
}

impl VanillaKind {
    pub fn intrinsic(&self, price: f64, strike: f64) -> f64 {
        match self {
            VanillaKind::Call => (price - strike).max(0.0),
            VanillaKind::Put => (strike - price).max(0.0),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            VanillaKind::Call => "call",
            VanillaKind::Put => "put",
        }
    }

    /// The vanilla kind that replicates the loss on a given side.
    pub fn hedging(side: Side) -> Self {
        match side {
            Side::Right => VanillaKind::Call,
            Side::Left => VanillaKind::Put,
        }
    }
}

impl std::str::FromStr for VanillaKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "call" | "c" => Ok(VanillaKind::Call),
            "put" | "p" => Ok(VanillaKind::Put),
            other => Err(crate::Error::Domain(format!(
                "unknown option kind '{other}' (expected call|put)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptionKind {
    Call,
    Put,
    /// Pays `(√x − √K)⁺`.
    SqrtCall,
    /// Pays `(√K − √x)⁺`.
    SqrtPut,
}

impl OptionKind {
    pub fn intrinsic(&self, price: f64, strike: f64) -> f64 {
        match self {
            OptionKind::Call => (price - strike).max(0.0),
            OptionKind::Put => (strike - price).max(0.0),
            OptionKind::SqrtCall => (price.sqrt() - strike.sqrt()).max(0.0),
            OptionKind::SqrtPut => (strike.sqrt() - price.sqrt()).max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionLeg {
    pub kind: OptionKind,
    pub strike: f64,
    pub weight: f64,
}

impl OptionLeg {
    pub fn payoff(&self, price: f64) -> f64 {
        self.weight * self.kind.intrinsic(price, self.strike)
    }
}

/// UIL payoff of one side on one band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UilPayoff {
    pub side: Side,
    pub interval: PriceInterval,
}

impl UilPayoff {
    pub fn new(side: Side, interval: PriceInterval) -> Self {
        Self { side, interval }
    }

    pub fn value(&self, exit_price: f64) -> f64 {
        uil(self.side, &self.interval, exit_price)
    }

    pub fn legs(&self) -> Vec<OptionLeg> {
        decompose(self.side, &self.interval)
    }

    /// Prices where the payoff has a kink.
    pub fn kinks(&self) -> [f64; 2] {
        [self.interval.lower(), self.interval.upper()]
    }
}

/// Impermanent loss per unit liquidity at `exit_price`.
///
/// Right side on `[l, u]`: zero below `l`, `2√P − P/√l − √l` inside, and
/// `√u − √l − (1/√l − 1/√u)·P` above `u`. The left side mirrors it around the
/// upper bound. Adjacent branches agree at the band edges.
pub fn uil(side: Side, interval: &PriceInterval, exit_price: f64) -> f64 {
    let (l, u) = (interval.lower(), interval.upper());
    let (sl, su) = (l.sqrt(), u.sqrt());
    let p = exit_price;
    // Written as sums of non-positive terms: inside the band
    // 2√P − P/√K − √K = −(√P − √K)²/√K, and beyond it the payoff is linear
    // with slope ∓(1/√l − 1/√u) starting from the edge value.
    let slope = 1.0 / sl - 1.0 / su;
    match side {
        Side::Right => {
            if p <= l {
                0.0
            } else if p <= u {
                -(p.sqrt() - sl).powi(2) / sl
            } else {
                -(su - sl).powi(2) / sl - slope * (p - u)
            }
        }
        Side::Left => {
            if p >= u {
                0.0
            } else if p >= l {
                -(su - p.sqrt()).powi(2) / su
            } else {
                -(su - sl).powi(2) / su - slope * (l - p)
            }
        }
    }
}

/// Four-leg option portfolio paying exactly `uil(side, interval, ·)`.
pub fn decompose(side: Side, interval: &PriceInterval) -> Vec<OptionLeg> {
    let (l, u) = (interval.lower(), interval.upper());
    let (sqrt_kind, vanilla) = match side {
        Side::Right => (OptionKind::SqrtCall, OptionKind::Call),
        Side::Left => (OptionKind::SqrtPut, OptionKind::Put),
    };
    vec![
        OptionLeg { kind: sqrt_kind, strike: l, weight: 2.0 },
        OptionLeg { kind: sqrt_kind, strike: u, weight: -2.0 },
        OptionLeg { kind: vanilla, strike: l, weight: -1.0 / l.sqrt() },
        OptionLeg { kind: vanilla, strike: u, weight: 1.0 / u.sqrt() },
    ]
}

pub fn evaluate_legs(legs: &[OptionLeg], price: f64) -> f64 {
    legs.iter().map(|leg| leg.payoff(price)).sum()
}
