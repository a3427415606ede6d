//! Acceptance suite: twelve checks across the model, simulator, text
//! measure, estimators and CLI.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::econ::{
    dense_dummy_ols, did_itt, fe_ols, heterogeneity, late, Atom, ClusterDim, DidOptions, FeDim, Outcome, Signal,
    SignalOptions, Term, Timing,
};
use crate::model::integrate::{ex_ante_given_q_change, ex_ante_slope_gap, given_q_change, hire_prob_ex_ante_estimate};
use crate::model::{
    access_posterior, expected_productivity, expected_productivity_slope, Grid, IntegrationConfig, ModelParams,
};
use crate::rng::substream;
use crate::sim::{decompose_estimand, generate_market, BidRecord, Scenario, SimConfig};
use crate::text::{
    cosine_similarity, read_jobs, read_letters, score_dataset, write_scores, Document, ModelScope, Stopwords,
    TfidfModel,
};
use crate::{Error, Result};

pub const DEMO_JOBS: &str = include_str!("../data/demo/jobs.tsv");
pub const DEMO_LETTERS: &str = include_str!("../data/demo/letters.tsv");
pub const DEMO_GOLDEN: &str = include_str!("../data/demo/scores.golden.csv");
const RANKING_BRIEF: &str = include_str!("../data/ranking/brief.txt");
const RANKING_PROPOSALS: [&str; 4] = [
    include_str!("../data/ranking/proposal_1.txt"),
    include_str!("../data/ranking/proposal_2.txt"),
    include_str!("../data/ranking/proposal_3.txt"),
    include_str!("../data/ranking/proposal_4.txt"),
];

pub const MODULES: [&str; 5] = ["model-core", "market-sim", "textsim", "econometrics", "cli"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub module: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
}

impl CheckResult {
    /// One-line report: status, id, module, name, timing, detail.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<12} {:<28} {:>7.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.module,
            self.name,
            self.elapsed_secs,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    All,
    Ids(BTreeSet<u8>),
}

impl Selection {
    /// Comma-separated module names and/or check numbers.
    pub fn parse(s: &str) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if let Ok(id) = tok.parse::<u8>() {
                if !CHECKS.iter().any(|c| c.id == id) {
                    return Err(Error::Config(format!("no check number {id} (1-{})", CHECKS.len())));
                }
                ids.insert(id);
            } else if MODULES.contains(&tok) {
                ids.extend(CHECKS.iter().filter(|c| c.module == tok).map(|c| c.id));
            } else {
                return Err(Error::Config(format!("unknown check selector '{tok}' (modules: {})", MODULES.join(", "))));
            }
        }
        if ids.is_empty() {
            return Err(Error::Config("empty check selection".into()));
        }
        Ok(Selection::Ids(ids))
    }

    fn contains(&self, id: u8) -> bool {
        match self {
            Selection::All => true,
            Selection::Ids(ids) => ids.contains(&id),
        }
    }
}

type Outcome_ = Result<(bool, String)>;

struct Check {
    id: u8,
    name: &'static str,
    module: &'static str,
    run: fn(u64) -> Outcome_,
}

const CHECKS: [Check; 12] = [
    Check { id: 1, name: "figure curves", module: "model-core", run: figure_claims },
    Check { id: 2, name: "analytic identities", module: "model-core", run: analytic_identities },
    Check { id: 3, name: "quadrature vs monte carlo", module: "model-core", run: quadrature_vs_mc },
    Check { id: 4, name: "treated gain decreasing", module: "model-core", run: claim_one },
    Check { id: 5, name: "estimator recovery", module: "econometrics", run: recovery },
    Check { id: 6, name: "size control", module: "econometrics", run: size_control },
    Check { id: 7, name: "within vs dummy OLS", module: "econometrics", run: fwl_equivalence },
    Check { id: 8, name: "signal-power direction", module: "econometrics", run: signal_direction },
    Check { id: 9, name: "heterogeneity direction", module: "econometrics", run: heterogeneity_direction },
    Check { id: 10, name: "tf-idf correctness", module: "textsim", run: text_checks },
    Check { id: 11, name: "decomposition identity", module: "market-sim", run: decomposition_identity },
    Check { id: 12, name: "determinism", module: "cli", run: determinism },
];

/// Runs the selected checks in order.
pub fn run(selection: &Selection, seed: u64) -> Vec<CheckResult> {
    CHECKS.iter().filter(|c| selection.contains(c.id)).map(|c| run_one(c, seed)).collect()
}

/// Runs a single check by number.
pub fn run_check(id: u8, seed: u64) -> Result<CheckResult> {
    let c = CHECKS.iter().find(|c| c.id == id).ok_or_else(|| Error::Config(format!("no check number {id}")))?;
    Ok(run_one(c, seed))
}

fn run_one(c: &Check, seed: u64) -> CheckResult {
    let t = Instant::now();
    let (passed, detail) = match (c.run)(seed) {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult { id: c.id, name: c.name, module: c.module, passed, detail, elapsed_secs: t.elapsed().as_secs_f64() }
}

fn timing_of(cfg: &SimConfig) -> Timing {
    Timing { gpt_period: cfg.gpt_period, tool_period: cfg.tool_period }
}

fn figure_claims(seed: u64) -> Outcome_ {
    let started = Instant::now();
    let params = ModelParams::figure_note();
    let mc = IntegrationConfig::monte_carlo(200_000, seed);
    let grid = Grid::new(-3.0, 3.0, 0.05)?.points();
    let z = |f: &(dyn Fn(usize, f64) -> Result<f64> + Sync)| -> Result<f64> {
        let zs = grid.par_iter().enumerate().map(|(i, &x)| f(i, x)).collect::<Result<Vec<f64>>>()?;
        Ok(zs.into_iter().fold(f64::INFINITY, f64::min))
    };
    let flatter = z(&|i, h| Ok(ex_ante_slope_gap(h, 0.01, &params, &mc.at(i as u64))?.z()))?;
    let gain = z(&|i, q| Ok(given_q_change(q, true, &params, &mc.at(i as u64))?.z()))?;
    let loss = z(&|i, q| Ok(-given_q_change(q, false, &params, &mc.at(i as u64))?.z()))?;
    let low = ex_ante_given_q_change(-2.0, &params, &mc.at(10_000))?.z();
    let high = ex_ante_given_q_change(2.0, &params, &mc.at(10_001))?.z();
    let gh = IntegrationConfig::gauss_hermite(64);
    let diffs =
        grid.iter().map(|&q| ex_ante_given_q_change(q, &params, &gh).map(|e| e.value)).collect::<Result<Vec<f64>>>()?;
    let signs: Vec<f64> = diffs.iter().filter(|d| **d != 0.0).map(|d| d.signum()).collect();
    let crossings = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let secs = started.elapsed().as_secs_f64();
    let passed =
        flatter > 3.0 && gain > 3.0 && loss > 3.0 && low > 3.0 && high < -3.0 && crossings == 1 && secs <= 120.0;
    Ok((
        passed,
        format!(
            "min z: flatter {flatter:.1}, treated gain {gain:.1}, control loss {loss:.1}; ex-ante diff z at q=-2 {low:.1}, q=+2 {high:.1}; {crossings} sign change(s); {secs:.1}s"
        ),
    ))
}

fn random_params(rng: &mut impl Rng) -> ModelParams {
    ModelParams {
        mu0: rng.random_range(-2.0..2.0),
        tau2: rng.random_range(0.2..3.0),
        sigma2: rng.random_range(0.2..3.0),
        p: rng.random_range(0.05..0.95),
        a: rng.random_range(0.0..3.0),
        n: rng.random_range(1..6),
    }
}

fn analytic_identities(seed: u64) -> Outcome_ {
    let mut rng = substream(seed, "identities", 0);
    let mut sets = vec![ModelParams::figure_note()];
    sets.extend((0..20).map(|_| random_params(&mut rng)));
    let (mut eq_err, mut bound_viol, mut fd_err) = (0.0f64, 0.0f64, 0.0f64);
    let step = 1e-5;
    for pr in &sets {
        pr.validate()?;
        let kappa = pr.shrinkage();
        let pre = pr.with_a(0.0);
        for i in 0..1000 {
            let h = pr.mu0 - 5.0 + 10.0 * i as f64 / 999.0;
            let closed = -kappa * pr.a * access_posterior(h, pr);
            eq_err = eq_err.max((expected_productivity(h, pr) - expected_productivity(h, &pre) - closed).abs());
            let slope = expected_productivity_slope(h, pr);
            bound_viol = bound_viol.max(slope - kappa);
            let fd = (expected_productivity(h + step, pr) - expected_productivity(h - step, pr)) / (2.0 * step);
            fd_err = fd_err.max((fd - slope).abs());
        }
    }
    let passed = eq_err <= 1e-12 && bound_viol <= 0.0 && fd_err <= 1e-6;
    Ok((
        passed,
        format!(
            "{} parameter sets x 1000 points: |(i) error| {eq_err:.1e}, max slope - kappa {bound_viol:.1e}, |slope - finite diff| {fd_err:.1e}",
            sets.len()
        ),
    ))
}

fn quadrature_vs_mc(seed: u64) -> Outcome_ {
    let params = ModelParams::figure_note();
    let gh = IntegrationConfig::gauss_hermite(64);
    let mc = IntegrationConfig::monte_carlo(1_000_000, seed);
    let grid = Grid::h_default().points();
    let mut worst = 0.0f64;
    for pr in [params.with_a(0.0), params] {
        let errs = grid
            .par_iter()
            .enumerate()
            .map(|(i, &h)| {
                let a = hire_prob_ex_ante_estimate(h, &pr, &gh)?.value;
                let b = hire_prob_ex_ante_estimate(h, &pr, &mc.at(i as u64))?.value;
                Ok((a - b).abs())
            })
            .collect::<Result<Vec<f64>>>()?;
        worst = errs.into_iter().fold(worst, f64::max);
    }
    Ok((worst <= 2e-3, format!("max |GH64 - MC 1e6| = {worst:.2e} over {} points x 2 regimes", grid.len())))
}

fn claim_one(_seed: u64) -> Outcome_ {
    let params = ModelParams::figure_note();
    let gh = IntegrationConfig::gauss_hermite(64);
    let grid = Grid::new(-3.0, 3.0, 0.01)?.points();
    let delta = grid
        .par_iter()
        .map(|&q| given_q_change(q, true, &params, &gh).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()?;
    // first index from which every step is a strict decrease
    let mut start = delta.len() - 1;
    while start > 0 && delta[start - 1] > delta[start] {
        start -= 1;
    }
    let tail = delta.len() - start;
    let q_hat = grid[start];
    let passed = tail >= 3;
    Ok((
        passed,
        format!(
            "q_hat = {q_hat:.2}; treated gain strictly decreasing on [{q_hat:.2}, 3] ({tail} grid points); gain at q_hat {:.4}",
            delta[start]
        ),
    ))
}

fn recovery(seed: u64) -> Outcome_ {
    let started = Instant::now();
    let cfg = SimConfig {
        n_workers: 5000,
        n_jobs: 20000,
        compliance: 0.2,
        gpt_shift_treated: 0.3,
        gpt_shift_control: 0.1,
        seed,
        ..SimConfig::default()
    };
    let ds = generate_market(&cfg)?;
    let t = timing_of(&cfg);
    let opts = DidOptions::default();
    let l = late(&ds.bids, &t, &opts)?;
    let itt = did_itt(&ds.bids, &t, &opts)?;
    let no_gpt = did_itt(&ds.bids, &t, &DidOptions { gpt_control: false, ..DidOptions::default() })?;
    let (beta_l, se_l) = (l.coef_of("used_ai"), l.se_of("used_ai"));
    let (beta_i, se_i) = (itt.coef_of("post_ai*access"), itt.se_of("post_ai*access"));
    let (beta_n, se_n) = (no_gpt.coef_of("post_ai*access"), no_gpt.se_of("post_ai*access"));
    let late_ok = (beta_l - cfg.model.a).abs() <= 2.0 * se_l;
    let itt_ok = (beta_i - cfg.compliance * beta_l).abs() <= 2.0 * se_i;
    let bias = beta_n - beta_i;
    let predicted = ds.truth.omitted_gpt_bias;
    let bias_ok = (bias - predicted).abs() <= 2.0 * se_n;
    let secs = started.elapsed().as_secs_f64();
    Ok((
        late_ok && itt_ok && bias_ok && secs <= 300.0,
        format!(
            "LATE {beta_l:.3} ({se_l:.3}) vs A={}; ITT {beta_i:.3} ({se_i:.3}) vs {}xLATE={:.3}; omitted-GPT bias {bias:.3} vs predicted {predicted:.3} (se {se_n:.3}); first-stage F {:.0}; {secs:.1}s",
            cfg.model.a,
            cfg.compliance,
            cfg.compliance * beta_l,
            l.first_stage_f.unwrap_or(f64::NAN),
        ),
    ))
}

pub const NULL_REPLICATIONS: u64 = 200;

fn size_control(seed: u64) -> Outcome_ {
    let base = seed * 1000;
    let covered = (0..NULL_REPLICATIONS)
        .into_par_iter()
        .map(|r| {
            let cfg =
                SimConfig { n_workers: 200, n_jobs: 800, seed: base + r, ..SimConfig::default().apply(Scenario::Null) };
            let ds = generate_market(&cfg)?;
            let est = did_itt(&ds.bids, &timing_of(&cfg), &DidOptions::default())?;
            let (lo, hi) = est.confidence_interval("post_ai*access", 0.95);
            Ok((lo <= 0.0 && 0.0 <= hi) as usize)
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    let rate = 100.0 * covered as f64 / NULL_REPLICATIONS as f64;
    Ok((
        (93.0..=97.0).contains(&rate),
        format!(
            "95% CI covers 0 in {covered}/{NULL_REPLICATIONS} null replications ({rate:.1}%), seeds {base}..{}",
            base + NULL_REPLICATIONS - 1
        ),
    ))
}

fn fwl_equivalence(seed: u64) -> Outcome_ {
    let terms: Vec<Term> = ["post_ai*access", "post_gpt*access", "wage_norm", "rank_pct"]
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    let outcome: Term = Atom::Tailoring.into();
    let fe = [FeDim::Worker, FeDim::Period];
    let mut worst = 0.0f64;
    let mut max_rows = 0;
    for i in 0..50u64 {
        let mut rng = substream(seed, "fwl_panel", i);
        let n_workers = rng.random_range(20..80);
        let n_jobs = rng.random_range(60..300);
        let cfg = SimConfig { n_workers, n_jobs, applicants_per_job: 5, seed: seed * 100 + i, ..SimConfig::default() };
        let ds = generate_market(&cfg)?;
        let drop = rng.random_range(0.05..0.4);
        let bids: Vec<BidRecord> = ds.bids.into_iter().filter(|_| rng.random::<f64>() >= drop).take(2000).collect();
        max_rows = max_rows.max(bids.len());
        let t = timing_of(&cfg);
        let cluster = if i % 2 == 0 { ClusterDim::Worker } else { ClusterDim::Job };
        let a = fe_ols(&bids, &t, &outcome, &terms, &fe, cluster, |_| true)?;
        let b = dense_dummy_ols(&bids, &t, &outcome, &terms, &fe, cluster, |_| true)?;
        for name in a.coef.keys() {
            worst = worst.max((a.coef_of(name) - b.coef_of(name)).abs());
            worst = worst.max((a.se_of(name) - b.se_of(name)).abs());
        }
    }
    Ok((worst <= 1e-8, format!("50 unbalanced panels (<= {max_rows} rows): max |coef or se difference| {worst:.1e}")))
}

fn signal_direction(seed: u64) -> Outcome_ {
    let cfg = SimConfig { n_workers: 5000, n_jobs: 20000, seed, ..SimConfig::default().apply(Scenario::BeliefSwitch) };
    let ds = generate_market(&cfg)?;
    let t = timing_of(&cfg);
    let tail = crate::econ::signal_power(&ds.bids, &t, &SignalOptions::new(Signal::Tailoring, Outcome::Callback))?;
    let rank = crate::econ::signal_power(&ds.bids, &t, &SignalOptions::new(Signal::RankPct, Outcome::Callback))?;
    let (tt, tr) = (tail.t("post_ai*tailoring"), rank.t("post_ai*rank_pct"));
    Ok((
        tt <= -2.0 && tr >= 2.0,
        format!(
            "callbacks: post_ai*tailoring {:.4} (t {tt:.1}), post_ai*rank_pct {:.4} (t {tr:.1})",
            tail.coef_of("post_ai*tailoring"),
            rank.coef_of("post_ai*rank_pct")
        ),
    ))
}

fn heterogeneity_direction(seed: u64) -> Outcome_ {
    let cfg = SimConfig { n_workers: 2000, n_jobs: 8000, seed, ..SimConfig::default().apply(Scenario::Ceiling) };
    let ds = generate_market(&cfg)?;
    let r = heterogeneity(&ds.bids, &timing_of(&cfg), &DidOptions::default())?;
    let name = "post_ai*access*pre_ability";
    let t = r.t(name);
    Ok((t <= -2.0, format!("ceiling DGP: {name} {:.4} (t {t:.1})", r.coef_of(name))))
}

fn text_checks(_seed: u64) -> Outcome_ {
    let sw = Stopwords::english();
    let jobs = read_jobs(DEMO_JOBS.as_bytes(), "jobs.tsv")?;
    let letters = read_letters(DEMO_LETTERS.as_bytes(), "letters.tsv")?;
    let rows = score_dataset(&jobs, &letters, ModelScope::Global, &sw)?;
    let mut out = Vec::new();
    write_scores(&rows, &mut out)?;
    let golden = out == DEMO_GOLDEN.as_bytes();

    let mut corpus = vec![Document::new("brief", RANKING_BRIEF, &sw)];
    corpus.extend(RANKING_PROPOSALS.iter().enumerate().map(|(i, p)| Document::new(format!("p{}", i + 1), *p, &sw)));
    let model = TfidfModel::fit(&corpus)?;
    let job = model.vectorize(&corpus[0]);
    let scores: Vec<f64> = corpus[1..].iter().map(|d| cosine_similarity(&job, &model.vectorize(d))).collect();
    let ranked = scores.windows(2).all(|w| w[0] > w[1]);

    let mut shuffled = corpus.clone();
    shuffled.shuffle(&mut substream(0, "text_shuffle", 0));
    let m2 = TfidfModel::fit(&shuffled)?;
    let job2 = m2.vectorize(&corpus[0]);
    let shuffle_ok =
        corpus[1..].iter().zip(&scores).all(|(d, s)| (cosine_similarity(&job2, &m2.vectorize(d)) - s).abs() <= 1e-12);
    let concat_ok = corpus[1..].iter().zip(&scores).all(|(d, s)| {
        let doubled = Document::new("x", format!("{} {}", d.raw_text, d.raw_text), &sw);
        (cosine_similarity(&job, &model.vectorize(&doubled)) - s).abs() <= 1e-12
    });
    let demo_scores: Vec<f64> = rows.iter().filter_map(|r| r.tailoring).collect();
    let range_ok = scores.iter().chain(&demo_scores).all(|s| (0.0..=1.0).contains(s));
    Ok((
        golden && ranked && shuffle_ok && concat_ok && range_ok,
        format!(
            "golden {}; proposal scores [{}] ranked {}; shuffle {}; self-concatenation {}; range {}",
            ok(golden),
            scores.iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>().join(", "),
            ok(ranked),
            ok(shuffle_ok),
            ok(concat_ok),
            ok(range_ok)
        ),
    ))
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

fn decomposition_identity(seed: u64) -> Outcome_ {
    let configs = [
        ("default", SimConfig { seed, ..SimConfig::default() }),
        ("belief-switch", SimConfig { seed, ..SimConfig::default().apply(Scenario::BeliefSwitch) }),
        ("market-shift", SimConfig { seed, market_shift: 0.3, ..SimConfig::default() }),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, cfg) in configs {
        let d = decompose_estimand(&cfg)?;
        let id_ok = d.residual().abs() <= 3.0 * d.combined_se();
        let sign_ok = d.control_competition_effect <= 0.0;
        passed &= id_ok && sign_ok;
        parts.push(format!(
            "{name}: total {:.4} = {:.4} + {:.4} + {:.4} (residual {:.1e}), control competition effect {:.4}",
            d.total,
            d.direct,
            d.spillover,
            d.market_shift,
            d.residual(),
            d.control_competition_effect
        ));
    }
    Ok((passed, parts.join("; ")))
}

/// Runs `args` twice into fresh directories and compares every file.
fn twice(root: &Path, label: &str, args: &[String]) -> Result<Option<String>> {
    let mut outputs = Vec::new();
    for k in 0..2 {
        let dir = root.join(format!("{label}_{k}"));
        let mut full = vec!["signalmarket".to_string()];
        full.extend(args.iter().cloned());
        full.extend(["--out".to_string(), dir.display().to_string()]);
        let code = crate::cli::main_with_args(&full);
        if code != 0 {
            return Ok(Some(format!("{label}: exit code {code}")));
        }
        let mut files = Vec::new();
        let mut names: Vec<_> = fs::read_dir(&dir)?.collect::<std::io::Result<Vec<_>>>()?;
        names.sort_by_key(|e| e.file_name());
        for e in names {
            let name = e.file_name().to_string_lossy().into_owned();
            let mut bytes = fs::read(e.path())?;
            if name == crate::manifest::MANIFEST_FILE {
                let mut m = crate::manifest::RunManifest::read(&e.path())?;
                m.duration_secs = 0.0;
                let d = dir.display().to_string();
                for s in m.args.iter_mut().chain(m.outputs.iter_mut()) {
                    *s = s.replace(&d, "OUT");
                }
                bytes = serde_json::to_vec(&m)?;
            }
            files.push((name, bytes));
        }
        outputs.push(files);
    }
    if outputs[0] != outputs[1] {
        let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
        return Ok(Some(format!("{label}: outputs differ ({})", names.join(", "))));
    }
    Ok(None)
}

fn determinism(seed: u64) -> Outcome_ {
    let root = tempfile::tempdir()?;
    let r = root.path();
    fs::write(r.join("jobs.tsv"), DEMO_JOBS)?;
    fs::write(r.join("letters.tsv"), DEMO_LETTERS)?;
    let s = seed.to_string();
    let data = r.join("data");
    let edit = r.join("edit");
    let path = |p: &Path| p.display().to_string();
    let setup = vec![
        vec!["simulate", "--workers", "300", "--jobs", "1200", "--seed", &s, "--out"],
        vec!["simulate", "--workers", "300", "--jobs", "1200", "--scenario", "editing", "--seed", &s, "--out"],
    ]
    .into_iter()
    .zip([path(&data), path(&edit)]);
    for (args, out) in setup {
        let mut full: Vec<String> = std::iter::once("signalmarket").chain(args).map(String::from).collect();
        full.push(out);
        if crate::cli::main_with_args(&full) != 0 {
            return Ok((false, "could not generate the input panel".into()));
        }
    }
    let bids = path(&data.join("bids.csv"));
    let edit_bids = path(&edit.join("bids.csv"));
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("curves", vec!["curves", "--h-grid", "-2:2:0.5", "--q-grid", "-2:2:0.5", "--draws", "5000"]),
        ("simulate", vec!["simulate", "--workers", "200", "--jobs", "600"]),
        ("score", vec!["score", "--jobs", &path(&r.join("jobs.tsv")), "--letters", &path(&r.join("letters.tsv"))]),
        ("estimate-itt", vec!["estimate", "itt", "--bids", &bids]),
        ("estimate-late", vec!["estimate", "late", "--bids", &bids]),
        ("estimate-event", vec!["estimate", "event", "--bids", &bids]),
        ("estimate-heterogeneity", vec!["estimate", "heterogeneity", "--bids", &bids]),
        ("estimate-signal-power", vec!["estimate", "signal-power", "--bids", &bids, "--by-period"]),
        ("estimate-editing", vec!["estimate", "editing", "--bids", &edit_bids]),
        ("decompose", vec!["decompose", "--workers", "200", "--jobs", "600"]),
        ("summarize", vec!["summarize", "--bids", &bids]),
    ]
    .into_iter()
    .map(|(l, a)| (l, a.into_iter().map(String::from).chain(["--seed".into(), s.clone()]).collect()))
    .collect();
    let mut failures = Vec::new();
    for (label, args) in &runs {
        if let Some(f) = twice(r, label, args)? {
            failures.push(f);
        }
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} subcommand runs byte-identical across two executions", runs.len())
        } else {
            failures.join("; ")
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_parsing() {
        assert_eq!(Selection::parse("model-core").unwrap(), Selection::Ids([1, 2, 3, 4].into()));
        assert_eq!(Selection::parse("textsim, 7").unwrap(), Selection::Ids([7, 10].into()));
        assert!(Selection::parse("13").is_err());
        assert!(Selection::parse("plotting").is_err());
        assert!(Selection::parse(" , ").is_err());
    }

    #[test]
    fn cheap_checks_pass() {
        for id in [2, 4, 10] {
            let r = run_check(id, 1).unwrap();
            assert!(r.passed, "{}", r.line());
        }
    }

    #[test]
    fn report_line_has_status() {
        let r = CheckResult {
            id: 3,
            name: "x",
            module: "model-core",
            passed: false,
            detail: "d".into(),
            elapsed_secs: 0.5,
        };
        assert!(r.line().starts_with("[FAIL]  3 model-core"));
    }
}
