use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::sim::BidRecord;
use crate::{Error, Result};

/// Rollout dates needed to build the time indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub gpt_period: u32,
    pub tool_period: u32,
}

impl Timing {
    pub fn validate(&self) -> Result<()> {
        if self.gpt_period >= self.tool_period {
            return Err(Error::config("gpt_period must precede tool_period"));
        }
        Ok(())
    }

    /// Event time of a period: 0 at the rollout, -1 the period before.
    pub fn event_time(&self, period: u32) -> i64 {
        period as i64 - self.tool_period as i64
    }
}

/// A single bid-level variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    Const,
    PostAi,
    PostGpt,
    Access,
    UsedAi,
    Tailoring,
    WageNorm,
    RankPct,
    PreAbility,
    EditMinutes,
    Callback,
    Offer,
    /// Indicator of event time `k`.
    Event(i64),
}

impl Atom {
    pub fn value(&self, b: &BidRecord, t: &Timing) -> Option<f64> {
        let flag = |v: bool| Some(if v { 1.0 } else { 0.0 });
        match self {
            Atom::Const => Some(1.0),
            Atom::PostAi => flag(b.period >= t.tool_period),
            Atom::PostGpt => flag(b.period >= t.gpt_period),
            Atom::Access => flag(b.access),
            Atom::UsedAi => flag(b.used_ai),
            Atom::Tailoring => Some(b.tailoring),
            Atom::WageNorm => Some(b.wage_norm),
            Atom::RankPct => Some(b.rank_pct),
            Atom::PreAbility => b.pre_ability,
            Atom::EditMinutes => b.edit_minutes,
            Atom::Callback => flag(b.callback),
            Atom::Offer => flag(b.offer),
            Atom::Event(k) => flag(t.event_time(b.period) == *k),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Const => f.write_str("const"),
            Atom::PostAi => f.write_str("post_ai"),
            Atom::PostGpt => f.write_str("post_gpt"),
            Atom::Access => f.write_str("access"),
            Atom::UsedAi => f.write_str("used_ai"),
            Atom::Tailoring => f.write_str("tailoring"),
            Atom::WageNorm => f.write_str("wage_norm"),
            Atom::RankPct => f.write_str("rank_pct"),
            Atom::PreAbility => f.write_str("pre_ability"),
            Atom::EditMinutes => f.write_str("edit_minutes"),
            Atom::Callback => f.write_str("callback"),
            Atom::Offer => f.write_str("offer"),
            Atom::Event(k) => write!(f, "event[{k}]"),
        }
    }
}

impl FromStr for Atom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s {
            "const" => Atom::Const,
            "post_ai" => Atom::PostAi,
            "post_gpt" => Atom::PostGpt,
            "access" => Atom::Access,
            "used_ai" => Atom::UsedAi,
            "tailoring" => Atom::Tailoring,
            "wage_norm" => Atom::WageNorm,
            "rank_pct" => Atom::RankPct,
            "pre_ability" => Atom::PreAbility,
            "edit_minutes" => Atom::EditMinutes,
            "callback" => Atom::Callback,
            "offer" => Atom::Offer,
            _ => {
                let k = s
                    .strip_prefix("event[")
                    .and_then(|r| r.strip_suffix(']'))
                    .and_then(|k| k.trim().parse::<i64>().ok())
                    .ok_or_else(|| Error::input(format!("unknown variable '{s}'")))?;
                Atom::Event(k)
            }
        })
    }
}

/// A product of atoms, written `a*b*c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term(pub Vec<Atom>);

impl Term {
    pub fn new(atoms: &[Atom]) -> Self {
        Term(atoms.to_vec())
    }

    pub fn value(&self, b: &BidRecord, t: &Timing) -> Option<f64> {
        self.0.iter().try_fold(1.0, |acc, a| a.value(b, t).map(|v| acc * v))
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl From<Atom> for Term {
    fn from(a: Atom) -> Self {
        Term(vec![a])
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        f.write_str(&parts.join("*"))
    }
}

impl FromStr for Term {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let atoms = s.split('*').map(str::parse).collect::<Result<Vec<Atom>>>()?;
        if atoms.is_empty() {
            return Err(Error::input("empty term"));
        }
        Ok(Term(atoms))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeDim {
    Worker,
    Period,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterDim {
    Worker,
    Job,
}

impl FromStr for ClusterDim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "worker" => Ok(ClusterDim::Worker),
            "job" => Ok(ClusterDim::Job),
            _ => Err(Error::input(format!("unknown cluster dimension '{s}'"))),
        }
    }
}

/// Design matrix aligned to a subset of bids.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelMatrix {
    pub y: Vec<f64>,
    /// Column-major regressors.
    pub x: Vec<Vec<f64>>,
    pub names: Vec<String>,
    /// Dense group index of every row, one vector per fixed-effect dimension.
    pub fe: Vec<Vec<u32>>,
    pub clusters: Vec<u32>,
    /// Index of each row in the source bid slice.
    pub rows: Vec<usize>,
    /// Rows removed because a fixed-effect group had a single member.
    pub dropped_singletons: usize,
    /// Rows removed because a variable was missing.
    pub excluded: usize,
}

impl PanelMatrix {
    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.x[i].as_slice())
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.iter().map(|&c| c as usize + 1).max().unwrap_or(0)
    }

    /// Parameters soaked up by the fixed effects, as counted in the CR1 scale.
    /// A dimension nested within the clusters contributes nothing.
    pub fn absorbed_dof(&self) -> usize {
        if self.fe.is_empty() {
            return 0;
        }
        let mut total = 0usize;
        let mut nested = 0usize;
        for ids in &self.fe {
            let levels = ids.iter().map(|&i| i as usize + 1).max().unwrap_or(0);
            total += levels;
            if self.nested_in_clusters(ids) {
                nested += levels;
            }
        }
        (total + 1).saturating_sub(self.fe.len() + nested)
    }

    fn nested_in_clusters(&self, ids: &[u32]) -> bool {
        let mut owner: HashMap<u32, u32> = HashMap::new();
        ids.iter().zip(&self.clusters).all(|(&l, &c)| *owner.entry(l).or_insert(c) == c)
    }
}

fn densify(keys: impl Iterator<Item = u64>) -> Vec<u32> {
    let mut map: HashMap<u64, u32> = HashMap::new();
    keys.map(|k| {
        let next = map.len() as u32;
        *map.entry(k).or_insert(next)
    })
    .collect()
}

/// Builds the design for `outcome ~ terms` on the bids accepted by `keep`.
///
/// Rows with a missing variable are excluded; rows in singleton fixed-effect
/// groups are dropped repeatedly until none remain.
pub fn build_panel(
    bids: &[BidRecord],
    timing: &Timing,
    outcome: &Term,
    terms: &[Term],
    fe: &[FeDim],
    cluster: ClusterDim,
    keep: impl Fn(&BidRecord) -> bool,
) -> Result<PanelMatrix> {
    let mut rows = Vec::new();
    let mut excluded = 0;
    for (i, b) in bids.iter().enumerate() {
        if !keep(b) {
            continue;
        }
        let complete = outcome.value(b, timing).is_some() && terms.iter().all(|t| t.value(b, timing).is_some());
        if complete {
            rows.push(i);
        } else {
            excluded += 1;
        }
    }

    let key = |b: &BidRecord, d: FeDim| match d {
        FeDim::Worker => b.worker_id,
        FeDim::Period => b.period as u64,
    };
    let mut dropped = 0;
    loop {
        let mut singles = vec![false; rows.len()];
        for &d in fe {
            let mut counts: HashMap<u64, usize> = HashMap::new();
            for &r in &rows {
                *counts.entry(key(&bids[r], d)).or_default() += 1;
            }
            for (s, &r) in singles.iter_mut().zip(&rows) {
                *s |= counts[&key(&bids[r], d)] == 1;
            }
        }
        let n = singles.iter().filter(|&&s| s).count();
        if n == 0 {
            break;
        }
        dropped += n;
        rows = rows.into_iter().zip(singles).filter(|(_, s)| !s).map(|(r, _)| r).collect();
    }
    if rows.is_empty() {
        return Err(Error::input("no observations left in the estimation sample"));
    }

    let get = |t: &Term, r: usize| t.value(&bids[r], timing).expect("completeness checked");
    let y = rows.iter().map(|&r| get(outcome, r)).collect();
    let x = terms.iter().map(|t| rows.iter().map(|&r| get(t, r)).collect()).collect();
    let fe_ids = fe.iter().map(|&d| densify(rows.iter().map(|&r| key(&bids[r], d)))).collect();
    let clusters = densify(rows.iter().map(|&r| match cluster {
        ClusterDim::Worker => bids[r].worker_id,
        ClusterDim::Job => bids[r].job_id,
    }));
    Ok(PanelMatrix {
        y,
        x,
        names: terms.iter().map(Term::name).collect(),
        fe: fe_ids,
        clusters,
        rows,
        dropped_singletons: dropped,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn bid(worker: u64, job: u64, period: u32, access: bool) -> BidRecord {
        BidRecord {
            bid_id: job,
            worker_id: worker,
            job_id: job,
            period,
            access,
            used_ai: false,
            tailoring: 0.1 * job as f64,
            wage_norm: 1.0,
            rank_pct: 0.5,
            callback: false,
            offer: false,
            edit_minutes: None,
            pre_ability: Some(worker as f64),
        }
    }

    #[test]
    fn terms_parse_and_print() {
        let t: Term = "post_ai * access*event[-2]".parse().unwrap();
        assert_eq!(t.name(), "post_ai*access*event[-2]");
        assert!("post_ai*nonsense".parse::<Term>().is_err());
        assert!("event[x]".parse::<Term>().is_err());
    }

    #[test]
    fn interactions_are_products() {
        let timing = Timing { gpt_period: 1, tool_period: 2 };
        let b = bid(3, 4, 2, true);
        let t: Term = "post_ai*access*pre_ability".parse().unwrap();
        assert_eq!(t.value(&b, &timing), Some(3.0));
        assert_eq!("event[0]".parse::<Term>().unwrap().value(&b, &timing), Some(1.0));
        assert_eq!("edit_minutes".parse::<Term>().unwrap().value(&b, &timing), None);
    }

    #[test]
    fn singletons_are_dropped_iteratively() {
        let timing = Timing { gpt_period: 1, tool_period: 2 };
        // worker 2 has one bid; once removed, period 3 becomes a singleton too
        let bids =
            vec![bid(0, 0, 0, true), bid(0, 1, 1, true), bid(1, 2, 0, false), bid(1, 3, 1, false), bid(2, 4, 3, false)];
        let p = build_panel(
            &bids,
            &timing,
            &Atom::Tailoring.into(),
            &[Atom::WageNorm.into()],
            &[FeDim::Worker, FeDim::Period],
            ClusterDim::Worker,
            |_| true,
        )
        .unwrap();
        assert_eq!(p.rows, vec![0, 1, 2, 3]);
        assert_eq!(p.dropped_singletons, 1);
        assert_eq!(p.n_clusters(), 2);
    }

    #[test]
    fn missing_values_are_excluded() {
        let timing = Timing { gpt_period: 1, tool_period: 2 };
        let mut bids = vec![bid(0, 0, 0, true), bid(0, 1, 1, true), bid(1, 2, 0, false)];
        bids[2].pre_ability = None;
        let p = build_panel(
            &bids,
            &timing,
            &Atom::Tailoring.into(),
            &[Atom::PreAbility.into()],
            &[],
            ClusterDim::Job,
            |_| true,
        )
        .unwrap();
        assert_eq!(p.excluded, 1);
        assert_eq!(p.n_obs(), 2);
    }
}
