//! Panel regressions: fixed effects by alternating projections, pivoted-QR
//! least squares, CR1 clustered covariance, 2SLS and the applied specifications.

pub mod ols;
pub mod panel;
pub mod specs;
pub mod within;

pub use ols::{ols, ols_absorbed, tsls, tsls_absorbed, EstimateResult};
pub use panel::{build_panel, Atom, ClusterDim, FeDim, PanelMatrix, Term, Timing};
pub use specs::{
    access_gaps, dense_dummy_ols, did_itt, editing_regressions, event_study, fe_ols, heterogeneity, late,
    predicted_omitted_gpt_bias, signal_power, signal_power_event, DidOptions, EditingResults, EventOptions, EventRow,
    EventStudy, Outcome, Signal, SignalOptions,
};
pub use within::within_transform;

#[cfg(test)]
pub(crate) mod tests_support {
    use std::collections::HashMap;

    /// Relabels arbitrary ids as 0, 1, 2, ... in order of appearance.
    pub fn dense(ids: &[u32]) -> Vec<u32> {
        let mut map = HashMap::new();
        ids.iter()
            .map(|i| {
                let next = map.len() as u32;
                *map.entry(*i).or_insert(next)
            })
            .collect()
    }
}
