use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use super::ols::{ols, ols_absorbed, ols_dof, tsls_absorbed, EstimateResult};
use super::panel::{build_panel, Atom, ClusterDim, FeDim, PanelMatrix, Term, Timing};
use super::within::within_transform;
use crate::fmt::sig;
use crate::sim::BidRecord;
use crate::{Error, Result};

const TWO_WAY: [FeDim; 2] = [FeDim::Worker, FeDim::Period];

fn term(atoms: &[Atom]) -> Term {
    Term::new(atoms)
}

fn post_access() -> Term {
    term(&[Atom::PostAi, Atom::Access])
}

fn gpt_access() -> Term {
    term(&[Atom::PostGpt, Atom::Access])
}

pub fn default_controls() -> Vec<Term> {
    vec![Atom::WageNorm.into(), Atom::RankPct.into()]
}

/// Options shared by the difference-in-differences specifications.
#[derive(Debug, Clone, PartialEq)]
pub struct DidOptions {
    pub outcome: Term,
    pub controls: Vec<Term>,
    /// Include the PostGPT x Access level-shift control.
    pub gpt_control: bool,
    pub cluster: ClusterDim,
}

impl Default for DidOptions {
    fn default() -> Self {
        Self {
            outcome: Atom::Tailoring.into(),
            controls: default_controls(),
            gpt_control: true,
            cluster: ClusterDim::Worker,
        }
    }
}

/// Two-way fixed-effects OLS on the within-transformed panel.
pub fn fe_ols(
    bids: &[BidRecord],
    timing: &Timing,
    outcome: &Term,
    terms: &[Term],
    fe: &[FeDim],
    cluster: ClusterDim,
    keep: impl Fn(&BidRecord) -> bool,
) -> Result<EstimateResult> {
    timing.validate()?;
    let panel = build_panel(bids, timing, outcome, terms, fe, cluster, keep)?;
    let w = within_transform(&panel)?;
    let mut r = ols_absorbed(&w.y, &w.x, &w.names, &w.clusters, panel.absorbed_dof())?;
    r.dropped_singletons = panel.dropped_singletons;
    r.excluded_rows = panel.excluded;
    Ok(r)
}

/// Same regression with explicit dummy columns instead of demeaning. Only the
/// coefficients of `terms` are returned.
pub fn dense_dummy_ols(
    bids: &[BidRecord],
    timing: &Timing,
    outcome: &Term,
    terms: &[Term],
    fe: &[FeDim],
    cluster: ClusterDim,
    keep: impl Fn(&BidRecord) -> bool,
) -> Result<EstimateResult> {
    let panel = build_panel(bids, timing, outcome, terms, fe, cluster, keep)?;
    let (x, names) = with_dummies(&panel, fe);
    let k = panel.x.len();
    let full = ols_dof(&panel.y, &x, &names, &panel.clusters, k + panel.absorbed_dof())?;
    let mut r = full.clone();
    r.coef = full.coef.into_iter().take(k).collect();
    r.se = full.se.into_iter().take(k).collect();
    r.vcov = full.vcov.iter().take(k).map(|row| row[..k].to_vec()).collect();
    r.dropped_singletons = panel.dropped_singletons;
    r.excluded_rows = panel.excluded;
    Ok(r)
}

fn with_dummies(panel: &PanelMatrix, fe: &[FeDim]) -> (Vec<Vec<f64>>, Vec<String>) {
    let mut x = panel.x.clone();
    let mut names = panel.names.clone();
    for (d, (ids, dim)) in panel.fe.iter().zip(fe).enumerate() {
        let levels = ids.iter().map(|&i| i as usize + 1).max().unwrap_or(0);
        // the first dimension keeps every level and plays the intercept
        for l in (d > 0) as usize..levels {
            x.push(ids.iter().map(|&i| if i as usize == l { 1.0 } else { 0.0 }).collect());
            names.push(format!("fe:{dim:?}:{l}"));
        }
    }
    if fe.is_empty() {
        x.push(vec![1.0; panel.y.len()]);
        names.push("const".into());
    }
    (x, names)
}

fn check_cells(bids: &[BidRecord], keep: impl Fn(&BidRecord) -> bool) -> Result<()> {
    let mut cells: BTreeMap<u32, [usize; 2]> = BTreeMap::new();
    for b in bids.iter().filter(|b| keep(b)) {
        cells.entry(b.period).or_default()[b.access as usize] += 1;
    }
    if cells.is_empty() {
        return Err(Error::input("no bids in the estimation sample"));
    }
    for (period, c) in &cells {
        for (access, n) in c.iter().enumerate() {
            if *n == 0 {
                let group = if access == 1 { "access" } else { "non-access" };
                return Err(Error::input(format!("no {group} bids in period {period}")));
            }
        }
    }
    Ok(())
}

fn check_spans_rollout(bids: &[BidRecord], timing: &Timing) -> Result<()> {
    let pre = bids.iter().any(|b| b.period < timing.tool_period);
    let post = bids.iter().any(|b| b.period >= timing.tool_period);
    if !(pre && post) {
        return Err(Error::input("data must contain periods before and after the rollout"));
    }
    Ok(())
}

fn did_terms(opts: &DidOptions, extra: &[Term]) -> Vec<Term> {
    let mut t = vec![post_access()];
    t.extend_from_slice(extra);
    if opts.gpt_control {
        t.push(gpt_access());
    }
    t.extend(opts.controls.iter().cloned());
    t
}

/// Intention-to-treat: coefficient on `post_ai*access`.
pub fn did_itt(bids: &[BidRecord], timing: &Timing, opts: &DidOptions) -> Result<EstimateResult> {
    check_spans_rollout(bids, timing)?;
    check_cells(bids, |_| true)?;
    fe_ols(bids, timing, &opts.outcome, &did_terms(opts, &[]), &TWO_WAY, opts.cluster, |_| true)
}

/// Per-use effect: `used_ai` instrumented by `post_ai*access`.
pub fn late(bids: &[BidRecord], timing: &Timing, opts: &DidOptions) -> Result<EstimateResult> {
    check_spans_rollout(bids, timing)?;
    check_cells(bids, |_| true)?;
    let used: Term = Atom::UsedAi.into();
    let mut exog = Vec::new();
    if opts.gpt_control {
        exog.push(gpt_access());
    }
    exog.extend(opts.controls.iter().cloned());
    let mut all = vec![used, post_access()];
    all.extend(exog.iter().cloned());
    let panel = build_panel(bids, timing, &opts.outcome, &all, &TWO_WAY, opts.cluster, |_| true)?;
    let w = within_transform(&panel)?;
    let mut r = tsls_absorbed(
        &w.y,
        &w.x[..1],
        &w.names[..1],
        &w.x[1..2],
        &w.names[1..2],
        &w.x[2..],
        &w.names[2..],
        &w.clusters,
        panel.absorbed_dof(),
    )?;
    r.dropped_singletons = panel.dropped_singletons;
    r.excluded_rows = panel.excluded;
    Ok(r)
}

/// Average access gap in the outcome by period: `mean(y | access) - mean(y | no access)`.
pub fn access_gaps(bids: &[BidRecord], timing: &Timing, outcome: &Term) -> BTreeMap<u32, f64> {
    let mut cells: BTreeMap<u32, [(f64, usize); 2]> = BTreeMap::new();
    for b in bids {
        if let Some(y) = outcome.value(b, timing) {
            let c = &mut cells.entry(b.period).or_default()[b.access as usize];
            c.0 += y;
            c.1 += 1;
        }
    }
    cells
        .into_iter()
        .filter(|(_, c)| c[0].1 > 0 && c[1].1 > 0)
        .map(|(t, c)| (t, c[1].0 / c[1].1 as f64 - c[0].0 / c[0].1 as f64))
        .collect()
}

/// Bias of the ITT when the PostGPT x Access control is left out, predicted from
/// the sample access gaps: the gap just before the rollout minus the average
/// pre-rollout gap.
pub fn predicted_omitted_gpt_bias(bids: &[BidRecord], timing: &Timing, outcome: &Term) -> Result<f64> {
    let gaps = access_gaps(bids, timing, outcome);
    let base = timing.tool_period - 1;
    let at_base = *gaps.get(&base).ok_or_else(|| Error::input(format!("no access gap in period {base}")))?;
    let pre: Vec<f64> = gaps.range(..timing.tool_period).map(|(_, g)| *g).collect();
    Ok(at_base - pre.iter().sum::<f64>() / pre.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRow {
    pub k: i64,
    pub beta: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventStudy {
    #[serde(flatten)]
    pub result: EstimateResult,
    #[serde(skip)]
    pub rows: Vec<EventRow>,
    #[serde(skip)]
    pub reference: i64,
}

impl EventStudy {
    pub fn row(&self, k: i64) -> Option<&EventRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    /// Joint clustered Wald test that all estimated `beta_k` are zero.
    pub fn joint_test(&self) -> Result<(f64, f64)> {
        let names: Vec<String> = self.result.coef.keys().filter(|n| n.starts_with("event[")).cloned().collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        self.result.wald(&refs)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "beta", "se", "ci_lo", "ci_hi"])?;
        for r in &self.rows {
            w.write_record([r.k.to_string(), sig(r.beta, 10), sig(r.se, 10), sig(r.ci_lo, 10), sig(r.ci_hi, 10)])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventOptions {
    pub outcome: Term,
    pub controls: Vec<Term>,
    /// Omitted event time; -1 is the period just before the rollout.
    pub reference: i64,
    pub cluster: ClusterDim,
    pub level: f64,
}

impl Default for EventOptions {
    fn default() -> Self {
        Self {
            outcome: Atom::Tailoring.into(),
            controls: default_controls(),
            reference: -1,
            cluster: ClusterDim::Worker,
            level: 0.95,
        }
    }
}

fn event_times(bids: &[BidRecord], timing: &Timing, reference: i64) -> Result<Vec<i64>> {
    let times: BTreeSet<i64> = bids.iter().map(|b| timing.event_time(b.period)).collect();
    if !times.contains(&reference) {
        return Err(Error::input(format!("reference event time {reference} has no bids")));
    }
    let pre = times.iter().filter(|&&k| k < 0).count();
    let post = times.iter().filter(|&&k| k >= 0).count();
    if pre < 2 || post < 2 {
        return Err(Error::input(format!("event study needs >= 2 pre and >= 2 post periods, found {pre} and {post}")));
    }
    Ok(times.into_iter().collect())
}

fn event_rows(
    result: &EstimateResult,
    times: &[i64],
    reference: i64,
    name: impl Fn(i64) -> String,
    level: f64,
) -> Vec<EventRow> {
    let c = result.critical_value(level);
    times
        .iter()
        .map(|&k| {
            if k == reference {
                EventRow { k, beta: 0.0, se: 0.0, ci_lo: 0.0, ci_hi: 0.0 }
            } else {
                let n = name(k);
                let (b, s) = (result.coef_of(&n), result.se_of(&n));
                EventRow { k, beta: b, se: s, ci_lo: b - c * s, ci_hi: b + c * s }
            }
        })
        .collect()
}

/// Dynamic effects: `event[k]*access` for every event time except the reference.
///
/// The PostGPT x Access control is not included: together with the full set of
/// event dummies and worker effects it is collinear, and normalizing on the
/// period before the rollout already nets out the GPT-era level shift.
pub fn event_study(bids: &[BidRecord], timing: &Timing, opts: &EventOptions) -> Result<EventStudy> {
    check_cells(bids, |_| true)?;
    let times = event_times(bids, timing, opts.reference)?;
    let mut terms: Vec<Term> =
        times.iter().filter(|&&k| k != opts.reference).map(|&k| term(&[Atom::Event(k), Atom::Access])).collect();
    terms.extend(opts.controls.iter().cloned());
    let result = fe_ols(bids, timing, &opts.outcome, &terms, &TWO_WAY, opts.cluster, |_| true)?;
    let rows = event_rows(&result, &times, opts.reference, |k| format!("event[{k}]*access"), opts.level);
    Ok(EventStudy { result, rows, reference: opts.reference })
}

/// ITT with the `post_ai*access*pre_ability` triple interaction (and its
/// `post_ai*pre_ability` lower-order term). Workers without pre-rollout bids
/// are excluded; the count is in `excluded_rows`.
pub fn heterogeneity(bids: &[BidRecord], timing: &Timing, opts: &DidOptions) -> Result<EstimateResult> {
    check_spans_rollout(bids, timing)?;
    let extra = [term(&[Atom::PostAi, Atom::Access, Atom::PreAbility]), term(&[Atom::PostAi, Atom::PreAbility])];
    fe_ols(bids, timing, &opts.outcome, &did_terms(opts, &extra), &TWO_WAY, opts.cluster, |_| true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Tailoring,
    RankPct,
}

impl Signal {
    fn atom(self) -> Atom {
        match self {
            Signal::Tailoring => Atom::Tailoring,
            Signal::RankPct => Atom::RankPct,
        }
    }

    /// Controls beyond `wage_norm`: tailoring regressions hold the rank fixed.
    fn controls(self) -> Vec<Term> {
        match self {
            Signal::Tailoring => vec![Atom::RankPct.into(), Atom::WageNorm.into()],
            Signal::RankPct => vec![Atom::WageNorm.into()],
        }
    }
}

impl FromStr for Signal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tailoring" => Ok(Signal::Tailoring),
            "rank_pct" | "rank-pct" | "rank" => Ok(Signal::RankPct),
            _ => Err(Error::input(format!("unknown signal '{s}' (tailoring|rank_pct)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Callback,
    Offer,
}

impl Outcome {
    fn atom(self) -> Atom {
        match self {
            Outcome::Callback => Atom::Callback,
            Outcome::Offer => Atom::Offer,
        }
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "callback" => Ok(Outcome::Callback),
            "offer" => Ok(Outcome::Offer),
            _ => Err(Error::input(format!("unknown outcome '{s}' (callback|offer)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalOptions {
    pub signal: Signal,
    pub outcome: Outcome,
    pub cluster: ClusterDim,
    /// Adds `post_ai*pre_ability`, letting the post-rollout level shift vary
    /// with pre-rollout ability. Workers without pre-rollout bids drop out.
    pub quality_trend: bool,
}

impl SignalOptions {
    pub fn new(signal: Signal, outcome: Outcome) -> Self {
        Self { signal, outcome, cluster: ClusterDim::Worker, quality_trend: true }
    }

    fn controls(&self) -> Vec<Term> {
        let mut c = self.signal.controls();
        if self.quality_trend {
            c.push(term(&[Atom::PostAi, Atom::PreAbility]));
        }
        c
    }
}

/// Change in the outcome's sensitivity to a signal after the rollout:
/// coefficient on `post_ai*signal`, with worker and period effects.
pub fn signal_power(bids: &[BidRecord], timing: &Timing, opts: &SignalOptions) -> Result<EstimateResult> {
    check_spans_rollout(bids, timing)?;
    let s = opts.signal.atom();
    let mut terms = vec![Term::from(s), term(&[Atom::PostAi, s])];
    terms.extend(opts.controls());
    fe_ols(bids, timing, &opts.outcome.atom().into(), &terms, &TWO_WAY, opts.cluster, |_| true)
}

/// Period-by-period version of [`signal_power`]: `event[k]*signal` relative to `reference`.
pub fn signal_power_event(
    bids: &[BidRecord],
    timing: &Timing,
    opts: &SignalOptions,
    reference: i64,
) -> Result<EventStudy> {
    let times = event_times(bids, timing, reference)?;
    let s = opts.signal.atom();
    let mut terms: Vec<Term> = vec![s.into()];
    terms.extend(times.iter().filter(|&&k| k != reference).map(|&k| term(&[Atom::Event(k), s])));
    terms.extend(opts.controls());
    let result = fe_ols(bids, timing, &opts.outcome.atom().into(), &terms, &TWO_WAY, opts.cluster, |_| true)?;
    let rows = event_rows(&result, &times, reference, |k| format!("event[{k}]*{s}"), 0.95);
    Ok(EventStudy { result, rows, reference })
}

/// Results of the editing-time regressions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EditingResults {
    /// Worker-level mean editing time on mean pre-rollout tailoring.
    pub ability: EstimateResult,
    pub offer: EstimateResult,
    pub callback: EstimateResult,
}

pub const EDIT_CAP_MINUTES: f64 = 60.0;

fn edit_sample(b: &BidRecord) -> bool {
    b.used_ai && b.edit_minutes.is_some_and(|m| m < EDIT_CAP_MINUTES)
}

pub fn editing_regressions(bids: &[BidRecord], timing: &Timing, cluster: ClusterDim) -> Result<EditingResults> {
    if !bids.iter().any(edit_sample) {
        return Err(Error::input("no AI-assisted bids with editing time under 60 minutes"));
    }
    let mut pre: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    let mut edit: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for b in bids {
        if b.period < timing.tool_period {
            let e = pre.entry(b.worker_id).or_default();
            e.0 += b.tailoring;
            e.1 += 1;
        }
        if edit_sample(b) {
            let e = edit.entry(b.worker_id).or_default();
            e.0 += b.edit_minutes.expect("sample has minutes");
            e.1 += 1;
        }
    }
    let (mut y, mut x) = (Vec::new(), Vec::new());
    for (w, (s, n)) in &edit {
        if let Some((ps, pn)) = pre.get(w) {
            y.push(s / *n as f64);
            x.push(ps / *pn as f64);
        }
    }
    let ids: Vec<u32> = (0..y.len() as u32).collect();
    let ability = ols(&y, &[vec![1.0; y.len()], x], &["const".into(), "pre_tailoring_mean".into()], &ids)?;

    let terms: Vec<Term> =
        vec![Atom::EditMinutes.into(), Atom::Tailoring.into(), Atom::WageNorm.into(), Atom::RankPct.into()];
    let offer = fe_ols(bids, timing, &Atom::Offer.into(), &terms, &TWO_WAY, cluster, edit_sample)?;
    let callback = fe_ols(bids, timing, &Atom::Callback.into(), &terms, &TWO_WAY, cluster, edit_sample)?;
    Ok(EditingResults { ability, offer, callback })
}
