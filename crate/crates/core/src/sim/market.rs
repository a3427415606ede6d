use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{AiEffect, SimConfig};
use crate::model::{expected_productivity_with, logistic, logit_shares, Estimate};
use crate::rng::{substream, Stream};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Worker {
    pub worker_id: u64,
    pub q: f64,
    pub access: bool,
}

/// One application, as an analyst would see it.
#[derive(Debug, Clone, PartialEq)]
pub struct BidRecord {
    pub bid_id: u64,
    pub worker_id: u64,
    pub job_id: u64,
    pub period: u32,
    pub access: bool,
    pub used_ai: bool,
    pub tailoring: f64,
    pub wage_norm: f64,
    pub rank_pct: f64,
    pub callback: bool,
    pub offer: bool,
    /// Only present on AI-assisted bids.
    pub edit_minutes: Option<f64>,
    /// Standardized pre-rollout mean tailoring; absent for workers without pre-rollout bids.
    pub pre_ability: Option<f64>,
}

/// A counterfactual market state: whether the access group has the tool, and
/// whether employers hold post-rollout beliefs (market status).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct World {
    pub tool: bool,
    pub market: bool,
}

impl World {
    pub const NONE_PRE: World = World { tool: false, market: false };
    pub const NONE_POST: World = World { tool: false, market: true };
    pub const TOOL_POST: World = World { tool: true, market: true };
}

/// Potential outcomes of one bid, all drawn from the same underlying shocks.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialOutcomes {
    /// Experience signal behind `rank_pct`.
    pub signal: f64,
    /// Whether the bid uses the tool when it is available.
    pub uses_tool: bool,
    /// Tailoring without / with the tool available.
    pub tailoring: [f64; 2],
    /// Offer probability indexed `[tool][market]`.
    pub offer_prob: [[f64; 2]; 2],
    /// Callback probability indexed `[tool][market]`.
    pub callback_prob: [[f64; 2]; 2],
}

impl PotentialOutcomes {
    pub fn offer(&self, w: World) -> f64 {
        self.offer_prob[w.tool as usize][w.market as usize]
    }

    pub fn callback(&self, w: World) -> f64 {
        self.callback_prob[w.tool as usize][w.market as usize]
    }
}

/// Decomposition of the DiD on expected offer probabilities into additive parts.
///
/// `spillover` is the contribution of competition to the DiD, i.e. minus the
/// effect of the treated group's tool use on control workers, which is
/// reported separately as `control_competition_effect`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub total: f64,
    pub direct: f64,
    pub spillover: f64,
    pub market_shift: f64,
    pub control_competition_effect: f64,
    pub se_total: f64,
    pub se_direct: f64,
    pub se_spillover: f64,
    pub se_market_shift: f64,
    pub se_control_competition_effect: f64,
}

impl Decomposition {
    pub fn residual(&self) -> f64 {
        self.total - (self.direct + self.spillover + self.market_shift)
    }

    pub fn combined_se(&self) -> f64 {
        (self.se_total.powi(2) + self.se_direct.powi(2) + self.se_spillover.powi(2) + self.se_market_shift.powi(2))
            .sqrt()
    }
}

/// Realized effects of the simulated DGP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub seed: u64,
    pub n_periods: u32,
    pub gpt_period: u32,
    pub tool_period: u32,
    /// Mean tailoring gain over post-rollout bids of access workers.
    pub itt_tailoring: f64,
    /// Mean tailoring gain over AI-assisted bids.
    pub late_tailoring: Option<f64>,
    /// Share of eligible post-rollout bids that used the tool.
    pub realized_compliance: f64,
    pub gpt_gap: f64,
    /// Bias in the ITT from leaving out the PostGPT x Access control,
    /// `gpt_gap * (1 - (tool_period - gpt_period) / tool_period)` with equal period sizes.
    pub omitted_gpt_bias: f64,
    pub decomposition: Decomposition,
    pub n_bids: usize,
    pub n_workers_without_pre_bids: usize,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub workers: Vec<Worker>,
    pub bids: Vec<BidRecord>,
    /// Aligned with `bids`.
    pub ledger: Vec<PotentialOutcomes>,
    pub truth: Truth,
}

#[derive(Debug, Clone, Copy)]
struct Applicant {
    worker: usize,
    nu: f64,
    eta: f64,
    comply_u: f64,
    wage_z: f64,
    edit_z: f64,
    callback_u: f64,
}

#[derive(Debug, Clone)]
struct JobDraw {
    period: u32,
    applicants: Vec<Applicant>,
    offer_u: f64,
}

fn normal(rng: &mut Stream) -> f64 {
    rng.sample(StandardNormal)
}

pub fn draw_workers(cfg: &SimConfig) -> Vec<Worker> {
    let sd = cfg.model.tau2.sqrt();
    (0..cfg.n_workers as u64)
        .map(|i| {
            let mut rng = substream(cfg.seed, "worker", i);
            let q = cfg.model.mu0 + sd * normal(&mut rng);
            let access = rng.random::<f64>() < cfg.access_share;
            Worker { worker_id: i, q, access }
        })
        .collect()
}

fn job_period(cfg: &SimConfig, job: usize) -> u32 {
    ((job as u128 * cfg.n_periods as u128) / cfg.n_jobs as u128) as u32
}

fn draw_job(cfg: &SimConfig, job: usize) -> JobDraw {
    let mut rng = substream(cfg.seed, "job", job as u64);
    let picks = index::sample(&mut rng, cfg.n_workers, cfg.applicants_per_job).into_vec();
    let applicants = picks
        .into_iter()
        .map(|worker| Applicant {
            worker,
            nu: normal(&mut rng),
            eta: normal(&mut rng),
            comply_u: rng.random(),
            wage_z: normal(&mut rng),
            edit_z: normal(&mut rng),
            callback_u: rng.random(),
        })
        .collect();
    JobDraw { period: job_period(cfg, job), applicants, offer_u: rng.random() }
}

/// Letter quality of one application with the tool unavailable / available.
fn tailoring_pair(cfg: &SimConfig, w: &Worker, a: &Applicant, period: u32) -> ([f64; 2], bool) {
    let nu = cfg.model.sigma2.sqrt() * a.nu;
    let shift = cfg.gpt_shift(w.access, period);
    let plain = w.q + nu + shift;
    let uses = w.access && a.comply_u < cfg.compliance;
    let with_tool = if uses {
        match cfg.effect {
            AiEffect::Additive => plain + cfg.model.a * cfg.profile(period as i64 - cfg.tool_period as i64),
            AiEffect::Ceiling { level } => w.q.max(level) + nu + shift,
        }
    } else {
        plain
    };
    ([plain, with_tool], uses)
}

/// Employer valuations and outcome probabilities for one job in one market state.
///
/// Returns `(offer shares, callback probabilities)`. `bonus` is added to each
/// applicant's utility on top of the posterior mean productivity.
pub(crate) fn job_probabilities(
    cfg: &SimConfig,
    tailoring: &[f64],
    signals: &[f64],
    bonus: &[f64],
    market: bool,
) -> (Vec<f64>, Vec<f64>) {
    let a = if market { cfg.belief_a_post } else { cfg.belief_a_pre };
    let outside = if market { cfg.market_shift } else { 0.0 };
    let m = &cfg.model;
    let utilities: Vec<f64> = tailoring
        .iter()
        .zip(signals)
        .zip(bonus)
        .map(|((&h, &r), &b)| {
            let mut prior = m.prior();
            if cfg.employer_sees_experience {
                prior = prior.update(r, cfg.experience_var);
            }
            expected_productivity_with(h, prior, m.sigma2, m.p, a) + b
        })
        .collect();
    let callbacks = utilities.iter().map(|u| logistic(u - outside)).collect();
    (logit_shares(&utilities, outside), callbacks)
}

/// Index of the applicant picked by a single multinomial draw, or `None` for the outside option.
pub(crate) fn draw_offer(shares: &[f64], u: f64) -> Option<usize> {
    let mut acc = 0.0;
    for (i, s) in shares.iter().enumerate() {
        acc += s;
        if u < acc {
            return Some(i);
        }
    }
    None
}

/// Percentile of each value within its job, 1 for the highest and 0 for the lowest.
fn rank_percentiles(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut out = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = (n - 1 - rank) as f64 / (n - 1) as f64;
    }
    out
}

pub fn generate_market(cfg: &SimConfig) -> Result<Dataset> {
    cfg.validate()?;
    let workers = draw_workers(cfg);
    generate_with_workers(cfg, workers)
}

/// Generates the market for a fixed worker population. All job-level shocks
/// depend only on `(seed, job)`, so editing one worker leaves every other
/// draw untouched.
pub fn generate_with_workers(cfg: &SimConfig, workers: Vec<Worker>) -> Result<Dataset> {
    cfg.validate()?;
    if workers.len() != cfg.n_workers {
        return Err(crate::Error::config("worker list does not match n_workers"));
    }
    let jobs: Vec<JobDraw> = (0..cfg.n_jobs).into_par_iter().map(|j| draw_job(cfg, j)).collect();

    let pairs: Vec<Vec<([f64; 2], bool)>> = jobs
        .par_iter()
        .map(|job| job.applicants.iter().map(|a| tailoring_pair(cfg, &workers[a.worker], a, job.period)).collect())
        .collect();

    let (pre_ability, missing) = pre_ability(cfg, &workers, &jobs, &pairs);

    let per_job: Vec<Vec<(BidRecord, PotentialOutcomes)>> = jobs
        .par_iter()
        .zip(pairs.par_iter())
        .enumerate()
        .map(|(j, (job, pairs))| assemble_job(cfg, &workers, &pre_ability, j, job, pairs))
        .collect();

    let mut bids = Vec::with_capacity(cfg.n_jobs * cfg.applicants_per_job);
    let mut ledger = Vec::with_capacity(bids.capacity());
    for (bid, po) in per_job.into_iter().flatten() {
        bids.push(bid);
        ledger.push(po);
    }
    for (i, b) in bids.iter_mut().enumerate() {
        b.bid_id = i as u64;
    }
    let truth = truth(cfg, &bids, &ledger, missing);
    Ok(Dataset { workers, bids, ledger, truth })
}

fn pre_ability(
    cfg: &SimConfig,
    workers: &[Worker],
    jobs: &[JobDraw],
    pairs: &[Vec<([f64; 2], bool)>],
) -> (Vec<Option<f64>>, usize) {
    let mut sum = vec![0.0; workers.len()];
    let mut count = vec![0usize; workers.len()];
    for (job, pairs) in jobs.iter().zip(pairs) {
        if job.period >= cfg.tool_period {
            continue;
        }
        for (a, (h, _)) in job.applicants.iter().zip(pairs) {
            sum[a.worker] += h[0];
            count[a.worker] += 1;
        }
    }
    let means: Vec<Option<f64>> = sum.iter().zip(&count).map(|(&s, &c)| (c > 0).then(|| s / c as f64)).collect();
    let present: Vec<f64> = means.iter().flatten().copied().collect();
    let missing = workers.len() - present.len();
    let n = present.len() as f64;
    let mean = present.iter().sum::<f64>() / n;
    let sd = if present.len() > 1 {
        (present.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let standardized = means.into_iter().map(|m| m.map(|m| if sd > 0.0 { (m - mean) / sd } else { 0.0 })).collect();
    (standardized, missing)
}

fn assemble_job(
    cfg: &SimConfig,
    workers: &[Worker],
    pre_ability: &[Option<f64>],
    job_id: usize,
    job: &JobDraw,
    pairs: &[([f64; 2], bool)],
) -> Vec<(BidRecord, PotentialOutcomes)> {
    let n = job.applicants.len();
    let signals: Vec<f64> =
        job.applicants.iter().map(|a| workers[a.worker].q + cfg.experience_var.sqrt() * a.eta).collect();
    let ranks = rank_percentiles(&signals);
    let edits: Vec<Option<f64>> = job
        .applicants
        .iter()
        .zip(pairs)
        .map(|(a, (_, uses))| {
            uses.then(|| {
                let ability = pre_ability[a.worker].unwrap_or(0.0);
                (cfg.edit_alpha + cfg.edit_beta * ability + cfg.edit_sd * a.edit_z).max(0.0)
            })
        })
        .collect();

    let mut offer_prob = vec![[[0.0; 2]; 2]; n];
    let mut callback_prob = vec![[[0.0; 2]; 2]; n];
    for tool in [false, true] {
        let h: Vec<f64> = pairs.iter().map(|(h, _)| h[tool as usize]).collect();
        let bonus: Vec<f64> = edits
            .iter()
            .map(|e| match (tool, e) {
                (true, Some(m)) => cfg.edit_effect * m,
                _ => 0.0,
            })
            .collect();
        for market in [false, true] {
            let (offers, callbacks) = job_probabilities(cfg, &h, &signals, &bonus, market);
            for i in 0..n {
                offer_prob[i][tool as usize][market as usize] = offers[i];
                callback_prob[i][tool as usize][market as usize] = callbacks[i];
            }
        }
    }

    let post = job.period >= cfg.tool_period;
    let observed = World { tool: post, market: post };
    let observed_offers: Vec<f64> = offer_prob.iter().map(|p| p[post as usize][post as usize]).collect();
    let winner = draw_offer(&observed_offers, job.offer_u);

    job.applicants
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let w = &workers[a.worker];
            let (h, uses) = pairs[i];
            let used_ai = post && uses;
            let po = PotentialOutcomes {
                signal: signals[i],
                uses_tool: uses,
                tailoring: h,
                offer_prob: offer_prob[i],
                callback_prob: callback_prob[i],
            };
            let bid = BidRecord {
                bid_id: 0,
                worker_id: w.worker_id,
                job_id: job_id as u64,
                period: job.period,
                access: w.access,
                used_ai,
                tailoring: h[post as usize],
                wage_norm: (cfg.wage_sd * a.wage_z).exp(),
                rank_pct: ranks[i],
                callback: a.callback_u < po.callback(observed),
                offer: winner == Some(i),
                edit_minutes: if used_ai { edits[i] } else { None },
                pre_ability: pre_ability[a.worker],
            };
            (bid, po)
        })
        .collect()
}

/// Difference in group means `mean_{access}(f) - mean_{control}(g)` over the
/// selected bids, with a job-clustered linearization standard error.
pub(crate) fn group_contrast(
    bids: &[BidRecord],
    ledger: &[PotentialOutcomes],
    select: impl Fn(&BidRecord) -> bool,
    treated: impl Fn(&PotentialOutcomes) -> f64,
    control: impl Fn(&PotentialOutcomes) -> f64,
) -> Estimate {
    let rows: Vec<usize> = (0..bids.len()).filter(|&i| select(&bids[i])).collect();
    let (mut s1, mut n1, mut s0, mut n0) = (0.0, 0usize, 0.0, 0usize);
    for &i in &rows {
        if bids[i].access {
            s1 += treated(&ledger[i]);
            n1 += 1;
        } else {
            s0 += control(&ledger[i]);
            n0 += 1;
        }
    }
    if n1 == 0 || n0 == 0 {
        return Estimate { value: f64::NAN, se: f64::NAN };
    }
    let (m1, m0) = (s1 / n1 as f64, s0 / n0 as f64);
    // Bids are stored job by job, so clusters are contiguous runs of job_id.
    let mut z_sq = 0.0;
    let mut clusters = 0usize;
    let mut k = 0;
    while k < rows.len() {
        let job = bids[rows[k]].job_id;
        let mut z = 0.0;
        while k < rows.len() && bids[rows[k]].job_id == job {
            let i = rows[k];
            z += if bids[i].access {
                (treated(&ledger[i]) - m1) / n1 as f64
            } else {
                -(control(&ledger[i]) - m0) / n0 as f64
            };
            k += 1;
        }
        z_sq += z * z;
        clusters += 1;
    }
    let adj = if clusters > 1 { clusters as f64 / (clusters as f64 - 1.0) } else { 1.0 };
    Estimate { value: m1 - m0, se: (adj * z_sq).sqrt() }
}

pub(crate) fn decomposition(cfg: &SimConfig, bids: &[BidRecord], ledger: &[PotentialOutcomes]) -> Decomposition {
    let post = |b: &BidRecord| b.period >= cfg.tool_period;
    let (obs, none_pre, none_post) = (World::TOOL_POST, World::NONE_PRE, World::NONE_POST);
    let diff = |a: World, b: World| move |p: &PotentialOutcomes| p.offer(a) - p.offer(b);
    let total = group_contrast(bids, ledger, post, diff(obs, none_pre), diff(obs, none_pre));
    // For control workers the post-rollout world and the "treated use the tool"
    // baseline coincide, so their direct component is identically zero.
    let direct = group_contrast(bids, ledger, post, diff(obs, none_post), |_| 0.0);
    let neg = group_contrast(bids, ledger, post, |_| 0.0, diff(obs, none_post));
    let competition = Estimate { value: -neg.value, se: neg.se };
    let market = group_contrast(bids, ledger, post, diff(none_post, none_pre), diff(none_post, none_pre));
    Decomposition {
        total: total.value,
        direct: direct.value,
        spillover: -competition.value,
        market_shift: market.value,
        control_competition_effect: competition.value,
        se_total: total.se,
        se_direct: direct.se,
        se_spillover: competition.se,
        se_market_shift: market.se,
        se_control_competition_effect: competition.se,
    }
}

fn truth(cfg: &SimConfig, bids: &[BidRecord], ledger: &[PotentialOutcomes], missing: usize) -> Truth {
    let mut itt = (0.0, 0usize);
    let mut late = (0.0, 0usize);
    for (b, p) in bids.iter().zip(ledger) {
        if b.access && b.period >= cfg.tool_period {
            let gain = p.tailoring[1] - p.tailoring[0];
            itt.0 += gain;
            itt.1 += 1;
            if b.used_ai {
                late.0 += gain;
                late.1 += 1;
            }
        }
    }
    let gpt_gap = cfg.gpt_shift_treated - cfg.gpt_shift_control;
    let affected = (cfg.tool_period - cfg.gpt_period) as f64 / cfg.pre_periods() as f64;
    Truth {
        seed: cfg.seed,
        n_periods: cfg.n_periods,
        gpt_period: cfg.gpt_period,
        tool_period: cfg.tool_period,
        itt_tailoring: if itt.1 > 0 { itt.0 / itt.1 as f64 } else { 0.0 },
        late_tailoring: (late.1 > 0).then(|| late.0 / late.1 as f64),
        realized_compliance: if itt.1 > 0 { late.1 as f64 / itt.1 as f64 } else { 0.0 },
        gpt_gap,
        omitted_gpt_bias: gpt_gap * (1.0 - affected),
        decomposition: decomposition(cfg, bids, ledger),
        n_bids: bids.len(),
        n_workers_without_pre_bids: missing,
    }
}

/// Which beliefs employers use when outcomes are (re)assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    PreBeliefs,
    PostBeliefs,
}

/// Redraws callbacks and offers for the observed letters under one belief regime.
pub fn assign_outcomes(dataset: &mut Dataset, cfg: &SimConfig, regime: Regime) -> Result<()> {
    cfg.validate()?;
    let market = regime == Regime::PostBeliefs;
    let tag = if market { "assign_post" } else { "assign_pre" };
    let mut start = 0;
    while start < dataset.bids.len() {
        let job = dataset.bids[start].job_id;
        let mut end = start;
        while end < dataset.bids.len() && dataset.bids[end].job_id == job {
            end += 1;
        }
        let bids = &mut dataset.bids[start..end];
        let ledger = &dataset.ledger[start..end];
        let h: Vec<f64> = bids.iter().map(|b| b.tailoring).collect();
        let r: Vec<f64> = ledger.iter().map(|p| p.signal).collect();
        let bonus: Vec<f64> = bids.iter().map(|b| b.edit_minutes.map_or(0.0, |m| cfg.edit_effect * m)).collect();
        let (offers, callbacks) = job_probabilities(cfg, &h, &r, &bonus, market);
        let mut rng = substream(cfg.seed, tag, job);
        for (b, p) in bids.iter_mut().zip(&callbacks) {
            b.callback = rng.random::<f64>() < *p;
        }
        let winner = draw_offer(&offers, rng.random());
        for (i, b) in bids.iter_mut().enumerate() {
            b.offer = winner == Some(i);
        }
        start = end;
    }
    Ok(())
}

pub fn decompose_estimand(cfg: &SimConfig) -> Result<Decomposition> {
    Ok(generate_market(cfg)?.truth.decomposition)
}
