//! Robust n-level posted-price mechanisms under distributional ambiguity.
//!
//! The seller picks a distribution over at most `n` prices; nature picks the
//! buyer's valuation distribution from an ambiguity set. [`lp_builder`]
//! synthesizes mechanisms through a finite LP, [`closed_form`] holds the
//! analytic optima, and [`adversary`] independently recomputes nature's best
//! response for any mechanism.

pub mod adversary;
pub mod ambiguity;
pub mod closed_form;
pub mod error;
pub mod eval;
pub mod grid;
pub mod json;
pub mod lp;
pub mod lp_builder;
pub mod mechanism;
pub mod root;
pub mod search;

pub use error::{Error, Result};
pub use grid::{DiscreteDistribution, GridPoint, Side};
pub use mechanism::{Mechanism, PaymentRule, RatioResult};
