//! Revenue-maximising mechanisms that stay good when the value distribution
//! is only known up to an earth mover's distance budget.
//!
//! * [`distkit`]: discrete distributions, EMD, transfer plans, virtual values,
//!   revenue curves and generators.
//! * [`lpcore`]: a dense simplex with dual multipliers.
//! * [`robust_single`]: max-min menus and posted prices for one buyer.
//! * [`robust_multi`]: second-price auctions with `m` i.i.d. buyers.
//! * [`oracles`]: brute-force references used by the tests and `ral verify`.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN. Index
// loops mirror the recurrences they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod distkit;
pub mod error;
pub mod lpcore;
pub mod oracles;
pub mod robust_multi;
pub mod robust_single;

pub use distkit::{DiscreteDistribution, RevenueCurve, TransferPlan};
pub use error::{Error, Result};
