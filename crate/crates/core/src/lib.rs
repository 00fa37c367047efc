//! Impermanent loss of concentrated liquidity positions in constant-product
//! AMMs: payoffs, option decompositions, GBM and Heston pricing, and static
//! replication with strips of vanilla options.

pub mod amm;
mod error;
pub mod gbm;
pub mod heston;
pub mod il_payoff;
pub mod quadrature;
pub mod replication;

pub use amm::{PriceInterval, Position, Side, TokenAmounts};
pub use error::{Error, Result};
pub use il_payoff::{OptionKind, OptionLeg, UilPayoff, VanillaKind};
