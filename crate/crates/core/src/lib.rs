//! Downlink multi-cell MIMO simulator comparing co-located, distributed and
//! small-cell antenna layouts.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod interference;
pub mod precoding;
pub mod parallel;
pub mod quad;
pub mod rate_sim;
pub mod rng;
pub mod stats;
pub mod validation;

pub use channel::SystemParams;
pub use error::{Error, Result};
