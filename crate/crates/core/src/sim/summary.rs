use std::collections::BTreeMap;

use serde::Serialize;

use super::market::BidRecord;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdoptionBin {
    pub lo: f64,
    pub hi: f64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    /// Per-worker share of post-rollout bids written with the tool, access workers only.
    pub adoption_histogram: Vec<AdoptionBin>,
    pub access_workers_with_post_bids: usize,
    /// Share of those workers who used the tool at least once.
    pub tried_share: f64,
    /// Share of AI-assisted bids among access workers' post-rollout bids.
    pub ai_bid_share: f64,
    pub eligible_bids: usize,
    pub bids_per_period: BTreeMap<u32, usize>,
}

pub fn summarize(bids: &[BidRecord], tool_period: u32) -> Summary {
    let mut per_worker: BTreeMap<u64, (usize, usize)> = BTreeMap::new();
    let mut bids_per_period = BTreeMap::new();
    let mut used = 0;
    for b in bids {
        *bids_per_period.entry(b.period).or_insert(0) += 1;
        if b.access && b.period >= tool_period {
            let e = per_worker.entry(b.worker_id).or_insert((0, 0));
            e.0 += b.used_ai as usize;
            e.1 += 1;
            used += b.used_ai as usize;
        }
    }
    let mut bins: Vec<AdoptionBin> =
        (0..10).map(|i| AdoptionBin { lo: i as f64 / 10.0, hi: (i + 1) as f64 / 10.0, workers: 0 }).collect();
    let mut tried = 0;
    for &(u, n) in per_worker.values() {
        // rate 1 falls into the last bin
        let idx = ((u * 10) / n).min(9);
        bins[idx].workers += 1;
        tried += (u > 0) as usize;
    }
    let eligible: usize = per_worker.values().map(|v| v.1).sum();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Summary {
        adoption_histogram: bins,
        access_workers_with_post_bids: per_worker.len(),
        tried_share: ratio(tried, per_worker.len()),
        ai_bid_share: ratio(used, eligible),
        eligible_bids: eligible,
        bids_per_period,
    }
}
