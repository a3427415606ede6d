//! Cover-letter signaling under partial AI access.
//!
//! The crate bundles four pieces that are meant to be used together:
//!
//! - [`model`]: closed-form posteriors and hiring probabilities of the
//!   signaling model, plus the integrated (ex-ante) curves.
//! - [`sim`]: a synthetic bid-level market drawn from the same model, with
//!   potential-outcome bookkeeping so estimators can be checked against truth.
//! - [`text`]: the TF-IDF / cosine tailoring measure.
//! - [`econ`]: two-way fixed-effects OLS, 2SLS, event studies and CR1
//!   clustered inference.
//!
//! [`validate`] wires them into the pass/fail suite exposed by [`cli`].

pub mod cli;
pub mod econ;
pub mod error;
pub mod fmt;
pub mod manifest;
pub mod model;
pub mod rng;
pub mod sim;
pub mod text;
pub mod validate;

pub use error::{Error, Result};
