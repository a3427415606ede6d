//! Synthetic bid-level panels with potential-outcome bookkeeping.
//!
//! Every bid carries its outcomes in four market states (tool available or
//! not, pre- or post-rollout employer beliefs), all computed from the same
//! shocks. Decomposition terms are contrasts between those states.

mod config;
mod io;
mod market;
mod summary;

pub use config::{AiEffect, Scenario, SimConfig};
pub use io::{read_bids, read_truth, write_bids, write_truth, BIDS_HEADER};
pub use market::{
    assign_outcomes, decompose_estimand, draw_workers, generate_market, generate_with_workers, BidRecord, Dataset,
    Decomposition, PotentialOutcomes, Regime, Truth, Worker, World,
};
pub use summary::{summarize, AdoptionBin, Summary};
