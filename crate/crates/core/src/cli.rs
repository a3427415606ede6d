//! Command-line front end. `main` only forwards to [`main_with_args`] so the
//! validation suite can run subcommands in-process.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::econ::{
    did_itt, editing_regressions, event_study, heterogeneity, late, signal_power, signal_power_event, ClusterDim,
    DidOptions, EventOptions, Outcome, Signal, SignalOptions, Term, Timing,
};
use crate::manifest::RunManifest;
use crate::model::curves::write_csv as write_curves;
use crate::model::{figure_curves, Grid, IntegrationConfig, ModelParams};
use crate::sim::{
    decompose_estimand, generate_market, read_bids, read_truth, summarize, write_bids, write_truth, BidRecord,
    Scenario, SimConfig,
};
use crate::text::{read_jobs, read_letters, score_dataset, write_scores, ModelScope, Stopwords};
use crate::validate::{self, Selection};
use crate::{Error, Result};

pub const THREADS_ENV: &str = "SIGNALMARKET_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "signalmarket",
    version,
    about = "Cover-letter signaling: model curves, synthetic markets, tailoring scores and panel estimation"
)]
pub struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Output directory, or `-` to write the primary output to stdout.
    #[arg(long, global = true, default_value = "out")]
    pub out: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hiring curves before and after the tool (fig5.csv, fig6.csv, fig7.csv).
    Curves(CurvesArgs),
    /// Synthetic bid panel (bids.csv, truth.json).
    Simulate(SimArgs),
    /// TF-IDF tailoring scores of letters against job posts (scores.csv).
    Score(ScoreArgs),
    /// Panel regressions on a bids file (estimate.json).
    Estimate(EstimateArgs),
    /// Potential-outcome decomposition of the DiD estimand (decomposition.json).
    Decompose(SimArgs),
    /// Adoption and panel summary of a bids file (summary.json).
    Summarize(SummarizeArgs),
    /// Acceptance suite; exit code 0 iff every selected check passes.
    Validate(ValidateArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Curves(_) => "curves",
            Command::Simulate(_) => "simulate",
            Command::Score(_) => "score",
            Command::Estimate(_) => "estimate",
            Command::Decompose(_) => "decompose",
            Command::Summarize(_) => "summarize",
            Command::Validate(_) => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Mc,
    Gh,
}

#[derive(Debug, Args, Serialize)]
pub struct CurvesArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long = "N", default_value_t = 3)]
    pub n: usize,
    #[arg(long = "A", default_value_t = 1.0, allow_hyphen_values = true)]
    pub a: f64,
    /// Letter-quality grid `min:max:step`.
    #[arg(long, default_value = "-4:4:0.05", allow_hyphen_values = true)]
    pub h_grid: String,
    /// Productivity grid `min:max:step`.
    #[arg(long, default_value = "-3:3:0.05", allow_hyphen_values = true)]
    pub q_grid: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Mc)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 200_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
}

#[derive(Debug, Args, Serialize, Default)]
pub struct SimArgs {
    /// Named starting configuration.
    #[arg(long, default_value = "default")]
    pub scenario: String,
    /// JSON file with a full configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub applicants: Option<usize>,
    #[arg(long)]
    pub periods: Option<u32>,
    #[arg(long)]
    pub gpt_period: Option<u32>,
    #[arg(long)]
    pub tool_period: Option<u32>,
    #[arg(long)]
    pub access_share: Option<f64>,
    #[arg(long)]
    pub compliance: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gpt_shift_treated: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gpt_shift_control: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub market_shift: Option<f64>,
    /// True tool effect; also the post-rollout belief unless `--belief-post` is given.
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long)]
    pub belief_pre: Option<f64>,
    #[arg(long)]
    pub belief_post: Option<f64>,
    #[arg(long)]
    pub experience_var: Option<f64>,
}

impl SimArgs {
    pub fn resolve(&self, seed: u64) -> Result<SimConfig> {
        let base = match &self.config {
            Some(path) => serde_json::from_reader(BufReader::new(open(path)?))?,
            None => SimConfig::default(),
        };
        let mut cfg = base.apply(self.scenario.parse::<Scenario>()?);
        cfg.seed = seed;
        macro_rules! set {
            ($($flag:ident => $field:expr),* $(,)?) => {$(
                if let Some(v) = self.$flag { $field = v; }
            )*};
        }
        set!(
            workers => cfg.n_workers,
            jobs => cfg.n_jobs,
            applicants => cfg.applicants_per_job,
            periods => cfg.n_periods,
            gpt_period => cfg.gpt_period,
            tool_period => cfg.tool_period,
            access_share => cfg.access_share,
            compliance => cfg.compliance,
            gpt_shift_treated => cfg.gpt_shift_treated,
            gpt_shift_control => cfg.gpt_shift_control,
            market_shift => cfg.market_shift,
            belief_pre => cfg.belief_a_pre,
            experience_var => cfg.experience_var,
        );
        if let Some(a) = self.a {
            cfg.model.a = a;
            cfg.belief_a_post = a;
        }
        if let Some(b) = self.belief_post {
            cfg.belief_a_post = b;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopeArg {
    Global,
    PerSkill,
}

#[derive(Debug, Args, Serialize)]
pub struct ScoreArgs {
    /// Job posts: `doc_id<TAB>text` or `doc_id<TAB>skill<TAB>text`.
    #[arg(long)]
    pub jobs: PathBuf,
    /// Letters: `bid_id<TAB>job_id<TAB>text`.
    #[arg(long)]
    pub letters: PathBuf,
    #[arg(long, value_enum, default_value_t = ScopeArg::Global)]
    pub scope: ScopeArg,
    /// Stopword list, one word per line; defaults to the bundled English list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PanelInput {
    #[arg(long)]
    pub bids: PathBuf,
    /// truth.json carrying the period layout; defaults to the one next to the bids file.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, requires = "tool_period")]
    pub gpt_period: Option<u32>,
    #[arg(long, requires = "gpt_period")]
    pub tool_period: Option<u32>,
}

impl PanelInput {
    fn timing(&self) -> Result<Timing> {
        if let (Some(g), Some(t)) = (self.gpt_period, self.tool_period) {
            let timing = Timing { gpt_period: g, tool_period: t };
            timing.validate()?;
            return Ok(timing);
        }
        let path = match &self.truth {
            Some(p) => p.clone(),
            None => self.bids.with_file_name("truth.json"),
        };
        if !path.exists() {
            return Err(Error::Input(format!(
                "no period layout: pass --gpt-period and --tool-period or a truth file ({} not found)",
                path.display()
            )));
        }
        let truth = read_truth(BufReader::new(open(&path)?))?;
        let timing = Timing { gpt_period: truth.gpt_period, tool_period: truth.tool_period };
        timing.validate()?;
        Ok(timing)
    }

    fn load(&self) -> Result<(Vec<BidRecord>, Timing)> {
        let timing = self.timing()?;
        let name = self.bids.display().to_string();
        let bids = read_bids(BufReader::new(open(&self.bids)?), &name)?;
        Ok((bids, timing))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecArg {
    Itt,
    Late,
    Event,
    Heterogeneity,
    SignalPower,
    Editing,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterArg {
    Worker,
    Job,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalArg {
    Tailoring,
    RankPct,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(value_enum)]
    pub spec: SpecArg,
    #[command(flatten)]
    pub input: PanelInput,
    #[arg(long, value_enum, default_value_t = ClusterArg::Worker)]
    pub cluster: ClusterArg,
    /// Outcome term, e.g. `tailoring` or `callback`. Defaults to `tailoring`,
    /// or `callback` for signal-power, which accepts only `callback` and `offer`.
    #[arg(long)]
    pub outcome: Option<String>,
    /// Comma-separated control terms; an empty string means none.
    #[arg(long, default_value = "wage_norm,rank_pct")]
    pub controls: String,
    /// Leave out the PostGPT x Access control.
    #[arg(long)]
    pub no_gpt_control: bool,
    /// Omitted event time of the event-study forms.
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    pub reference: i64,
    /// Signal of the signal-power regression.
    #[arg(long, value_enum, default_value_t = SignalArg::Tailoring)]
    pub regressor: SignalArg,
    /// Drop the post_ai*pre_ability control from signal-power.
    #[arg(long)]
    pub no_quality_trend: bool,
    /// Period-by-period signal-power interactions (also writes signal_event.csv).
    #[arg(long)]
    pub by_period: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SummarizeArgs {
    #[command(flatten)]
    pub input: PanelInput,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    /// Comma-separated module names (model-core, market-sim, textsim,
    /// econometrics, cli) or criterion numbers.
    #[arg(long)]
    pub only: Option<String>,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))
}

/// Where a command's files go.
enum Sink {
    Dir(PathBuf),
    Stdout,
}

impl Sink {
    fn new(out: &str) -> Self {
        if out == "-" {
            Sink::Stdout
        } else {
            Sink::Dir(PathBuf::from(out))
        }
    }

    /// Writes `bytes` as `name`. On stdout only the primary output is emitted.
    fn emit(&self, name: &str, bytes: &[u8], primary: bool, manifest: &mut RunManifest) -> Result<()> {
        match self {
            Sink::Dir(dir) => {
                fs::create_dir_all(dir)?;
                let path = dir.join(name);
                fs::write(&path, bytes)?;
                manifest.outputs.push(path.display().to_string());
            }
            Sink::Stdout if primary => {
                let mut s = std::io::stdout().lock();
                s.write_all(bytes)?;
                s.flush()?;
            }
            Sink::Stdout => {}
        }
        Ok(())
    }
}

fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn terms(list: &str) -> Result<Vec<Term>> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

fn init_threads(n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::Config("--threads must be >= 1".into()));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code; errors map to 2 (input/config) or 3 (numerical).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let replay = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match run(cli, replay) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, replay: Vec<String>) -> Result<i32> {
    init_threads(cli.threads)?;
    let started = Instant::now();
    let sink = Sink::new(&cli.out);
    let mut manifest = RunManifest::new(cli.command.name(), replay, serde_json::Value::Null, cli.seed);
    let mut code = 0;
    match &cli.command {
        Command::Curves(a) => curves(a, cli.seed, &sink, &mut manifest)?,
        Command::Simulate(a) => {
            let cfg = a.resolve(cli.seed)?;
            manifest.config = serde_json::to_value(&cfg)?;
            let ds = generate_market(&cfg)?;
            let mut bids = Vec::new();
            write_bids(&ds.bids, &mut bids)?;
            sink.emit("bids.csv", &bids, true, &mut manifest)?;
            let mut truth = Vec::new();
            write_truth(&ds.truth, &mut truth)?;
            sink.emit("truth.json", &truth, false, &mut manifest)?;
        }
        Command::Score(a) => score(a, &sink, &mut manifest)?,
        Command::Estimate(a) => estimate(a, &sink, &mut manifest)?,
        Command::Decompose(a) => {
            let cfg = a.resolve(cli.seed)?;
            manifest.config = serde_json::to_value(&cfg)?;
            let d = decompose_estimand(&cfg)?;
            #[derive(Serialize)]
            struct Out {
                #[serde(flatten)]
                terms: crate::sim::Decomposition,
                residual: f64,
                combined_se: f64,
            }
            let out = Out { terms: d, residual: d.residual(), combined_se: d.combined_se() };
            sink.emit("decomposition.json", &json_bytes(&out)?, true, &mut manifest)?;
        }
        Command::Summarize(a) => {
            manifest.config = serde_json::to_value(a)?;
            manifest.inputs.push(a.input.bids.display().to_string());
            let (bids, timing) = a.input.load()?;
            let s = summarize(&bids, timing.tool_period);
            sink.emit("summary.json", &json_bytes(&s)?, true, &mut manifest)?;
        }
        Command::Validate(a) => {
            manifest.config = serde_json::to_value(a)?;
            let selection = match &a.only {
                Some(s) => Selection::parse(s)?,
                None => Selection::All,
            };
            let report = validate::run(&selection, cli.seed);
            for r in &report {
                eprintln!("{}", r.line());
            }
            let passed = report.iter().filter(|r| r.passed).count();
            eprintln!("{passed}/{} checks passed", report.len());
            sink.emit("validation.json", &json_bytes(&report)?, true, &mut manifest)?;
            if passed != report.len() {
                code = 1;
            }
        }
    }
    manifest.duration_secs = started.elapsed().as_secs_f64();
    if let Sink::Dir(dir) = &sink {
        fs::create_dir_all(dir)?;
        manifest.write(dir)?;
    }
    Ok(code)
}

fn curves(a: &CurvesArgs, seed: u64, sink: &Sink, manifest: &mut RunManifest) -> Result<()> {
    let params = ModelParams { mu0: a.mu0, tau2: a.tau2, sigma2: a.sigma2, p: a.p, a: a.a, n: a.n };
    params.validate()?;
    let cfg = match a.method {
        MethodArg::Mc => IntegrationConfig::monte_carlo(a.draws, seed),
        MethodArg::Gh => IntegrationConfig::gauss_hermite(a.nodes),
    };
    let h_grid = Grid::parse(&a.h_grid)?;
    let q_grid = Grid::parse(&a.q_grid)?;
    manifest.config = serde_json::json!({ "params": params, "integration": cfg, "h_grid": h_grid, "q_grid": q_grid });
    let f = figure_curves(&params, &h_grid, &q_grid, &cfg)?;
    let mut all = Vec::new();
    let files = [
        ("fig5.csv", vec![&f.fig5]),
        ("fig6.csv", vec![&f.fig6_treated, &f.fig6_control]),
        ("fig7.csv", vec![&f.fig7]),
    ];
    if let Sink::Stdout = sink {
        all.extend(files.iter().flat_map(|(_, t)| t.iter().copied()));
        let mut buf = Vec::new();
        write_curves(&all, &mut buf)?;
        return sink.emit("curves.csv", &buf, true, manifest);
    }
    for (name, tables) in files {
        let mut buf = Vec::new();
        write_curves(&tables, &mut buf)?;
        sink.emit(name, &buf, true, manifest)?;
    }
    Ok(())
}

fn score(a: &ScoreArgs, sink: &Sink, manifest: &mut RunManifest) -> Result<()> {
    manifest.config = serde_json::to_value(a)?;
    manifest.inputs = vec![a.jobs.display().to_string(), a.letters.display().to_string()];
    let stopwords = match &a.stopwords {
        Some(p) => {
            manifest.inputs.push(p.display().to_string());
            Stopwords::from_file(p)?
        }
        None => Stopwords::english(),
    };
    let jobs = read_jobs(BufReader::new(open(&a.jobs)?), &a.jobs.display().to_string())?;
    let letters = read_letters(BufReader::new(open(&a.letters)?), &a.letters.display().to_string())?;
    let scope = match a.scope {
        ScopeArg::Global => ModelScope::Global,
        ScopeArg::PerSkill => ModelScope::PerSkill,
    };
    let rows = score_dataset(&jobs, &letters, scope, &stopwords)?;
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("skipped {}: {}", r.bid_id, r.error.as_deref().unwrap_or_default());
    }
    let mut buf = Vec::new();
    write_scores(&rows, &mut buf)?;
    sink.emit("scores.csv", &buf, true, manifest)
}

fn estimate(a: &EstimateArgs, sink: &Sink, manifest: &mut RunManifest) -> Result<()> {
    manifest.config = serde_json::to_value(a)?;
    manifest.inputs.push(a.input.bids.display().to_string());
    let (bids, timing) = a.input.load()?;
    let cluster = match a.cluster {
        ClusterArg::Worker => ClusterDim::Worker,
        ClusterArg::Job => ClusterDim::Job,
    };
    let did = DidOptions {
        outcome: a.outcome.as_deref().unwrap_or("tailoring").parse()?,
        controls: terms(&a.controls)?,
        gpt_control: !a.no_gpt_control,
        cluster,
    };
    let signal_opts = || -> Result<SignalOptions> {
        let outcome = match a.outcome.as_deref() {
            None | Some("callback") => Outcome::Callback,
            Some("offer") => Outcome::Offer,
            Some(other) => {
                return Err(Error::Input(format!("signal-power outcome must be callback or offer, got '{other}'")))
            }
        };
        Ok(SignalOptions {
            quality_trend: !a.no_quality_trend,
            cluster,
            ..SignalOptions::new(
                match a.regressor {
                    SignalArg::Tailoring => Signal::Tailoring,
                    SignalArg::RankPct => Signal::RankPct,
                },
                outcome,
            )
        })
    };
    let write_event = |name: &str, ev: &crate::econ::EventStudy, manifest: &mut RunManifest| -> Result<()> {
        let mut csv = Vec::new();
        ev.write_csv(&mut csv)?;
        sink.emit(name, &csv, false, manifest)?;
        sink.emit("estimate.json", &json_bytes(ev)?, true, manifest)
    };
    match a.spec {
        SpecArg::Itt => sink.emit("estimate.json", &json_bytes(&did_itt(&bids, &timing, &did)?)?, true, manifest),
        SpecArg::Late => sink.emit("estimate.json", &json_bytes(&late(&bids, &timing, &did)?)?, true, manifest),
        SpecArg::Heterogeneity => {
            sink.emit("estimate.json", &json_bytes(&heterogeneity(&bids, &timing, &did)?)?, true, manifest)
        }
        SpecArg::Event => {
            let opts = EventOptions {
                outcome: did.outcome.clone(),
                controls: did.controls.clone(),
                reference: a.reference,
                cluster,
                ..EventOptions::default()
            };
            write_event("event.csv", &event_study(&bids, &timing, &opts)?, manifest)
        }
        SpecArg::SignalPower if a.by_period => write_event(
            "signal_event.csv",
            &signal_power_event(&bids, &timing, &signal_opts()?, a.reference)?,
            manifest,
        ),
        SpecArg::SignalPower => {
            sink.emit("estimate.json", &json_bytes(&signal_power(&bids, &timing, &signal_opts()?)?)?, true, manifest)
        }
        SpecArg::Editing => {
            sink.emit("estimate.json", &json_bytes(&editing_regressions(&bids, &timing, cluster)?)?, true, manifest)
        }
    }
}
