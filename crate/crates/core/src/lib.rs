//! Branching random walks on Galton-Watson trees whose offspring law has
//! infinite mean.
//!
//! The crate is `no_std` (it needs `alloc`). It provides
//!
//! * [`distributions`]: the offspring and displacement laws,
//! * [`population`]: generation sizes, exact and in the double-exponential
//!   regime, plus the statistics built on them,
//! * [`brw`]: a streaming frontier simulator and the extremes extracted from it,
//! * [`theory`]: the limit constants and their finite-depth recursions,
//! * [`stats`]: goodness-of-fit tools used to compare runs with the limits.
//!
//! Randomness is always passed in; see [`rng`] for the stream construction.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod brw;
pub mod distributions;
pub mod error;
pub mod math;
pub mod population;
pub mod rng;
pub mod stats;
pub mod theory;

pub use distributions::{DisplacementLaw, ProgenyLaw};
pub use error::{Error, Result};
