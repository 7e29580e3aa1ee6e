//! Composable secret-key rates for Gaussian-modulated CV-QKD with homodyne
//! detection and for single-photon BB84, plus a continuous genetic algorithm
//! that splits a fixed total ε-security budget between its components so as
//! to maximize the key rate.
//!
//! The crate is organized bottom-up:
//!
//! * [`budget`]: the ε-decomposition constraints, gene mapping and the
//!   standard baseline splits.
//! * [`cv`] and [`dv`]: the two key-rate models.
//! * [`cga`]: the optimizer over normalized genes in `[-1, 1]²`.
//! * [`oracle`]: an exhaustive grid search used to validate the optimizer.
//! * [`harness`]: configuration files, ε-sweeps and CSV/JSON reporting.
//!
//! ```
//! use qkd_epsilon::budget::{baseline_budgets, Family};
//! use qkd_epsilon::dv::{dv_key_rate, DvParams};
//!
//! let params = DvParams::default();
//! let (_, symmetric) = &baseline_budgets(1e-12, Family::Dv).unwrap()[0];
//! let rate = dv_key_rate(&params, symmetric).unwrap();
//! assert!(rate.rate_bits_per_sec > 0.0);
//! ```

// negated comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod cga;
pub mod cv;
pub mod dv;
mod error;
pub mod harness;
pub mod oracle;

pub use error::{Error, Result};
