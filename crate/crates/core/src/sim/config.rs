use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::ModelParams;
use crate::{Error, Result};

/// How using the tool changes a letter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AiEffect {
    /// `h = q + A * profile(k) + nu`.
    Additive,
    /// Every user is lifted to at least `level`: `h = max(q, level) + nu`.
    Ceiling { level: f64 },
}

/// Synthetic market configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: ModelParams,
    pub n_workers: usize,
    pub n_jobs: usize,
    pub applicants_per_job: usize,
    pub n_periods: u32,
    pub gpt_period: u32,
    pub tool_period: u32,
    pub access_share: f64,
    /// Per-bid probability that an access worker uses the tool once it exists.
    pub compliance: f64,
    pub gpt_shift_treated: f64,
    pub gpt_shift_control: f64,
    /// Post-tool increase of the outside option's utility.
    pub market_shift: f64,
    pub seed: u64,
    /// Tool effect the employer assumes before the rollout.
    pub belief_a_pre: f64,
    /// Tool effect the employer assumes after the rollout.
    pub belief_a_post: f64,
    pub effect: AiEffect,
    /// Multiplier of the tool effect by periods since rollout; the last entry
    /// carries forward. Empty means a constant effect.
    pub effect_profile: Vec<f64>,
    /// Noise variance of the experience signal behind `rank_pct`.
    pub experience_var: f64,
    /// Whether employers condition on the experience signal before reading letters.
    pub employer_sees_experience: bool,
    pub edit_alpha: f64,
    pub edit_beta: f64,
    pub edit_sd: f64,
    /// Utility per minute of editing on AI-assisted bids.
    pub edit_effect: f64,
    /// Log-sd of `wage_norm`.
    pub wage_sd: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let model = ModelParams::figure_note();
        Self {
            model,
            n_workers: 2000,
            n_jobs: 8000,
            applicants_per_job: 5,
            n_periods: 8,
            gpt_period: 3,
            tool_period: 4,
            access_share: 0.5,
            compliance: 0.6,
            gpt_shift_treated: 0.2,
            gpt_shift_control: 0.1,
            market_shift: 0.0,
            seed: 1,
            belief_a_pre: 0.0,
            belief_a_post: model.a,
            effect: AiEffect::Additive,
            effect_profile: Vec::new(),
            experience_var: 1.0,
            employer_sees_experience: true,
            edit_alpha: 20.0,
            edit_beta: 0.0,
            edit_sd: 5.0,
            edit_effect: 0.0,
            wage_sd: 0.3,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.n_workers == 0 || self.n_jobs == 0 {
            return Err(Error::config("n_workers and n_jobs must be positive"));
        }
        if self.applicants_per_job < 2 {
            return Err(Error::config("applicants_per_job must be >= 2"));
        }
        if self.applicants_per_job > self.n_workers {
            return Err(Error::config(format!(
                "cannot sample {} applicants per job from {} workers",
                self.applicants_per_job, self.n_workers
            )));
        }
        if self.n_periods < 4 {
            return Err(Error::config("n_periods must be >= 4"));
        }
        if !(self.gpt_period < self.tool_period && self.tool_period < self.n_periods) {
            return Err(Error::config(format!(
                "need gpt_period < tool_period < n_periods, got {} / {} / {}",
                self.gpt_period, self.tool_period, self.n_periods
            )));
        }
        if !(self.access_share > 0.0 && self.access_share < 1.0) {
            return Err(Error::config("access_share must lie in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.compliance) {
            return Err(Error::config("compliance must lie in [0, 1]"));
        }
        let reals = [
            self.gpt_shift_treated,
            self.gpt_shift_control,
            self.market_shift,
            self.belief_a_pre,
            self.belief_a_post,
            self.edit_alpha,
            self.edit_beta,
            self.edit_sd,
            self.edit_effect,
            self.wage_sd,
        ];
        if reals.iter().any(|v| !v.is_finite()) || self.effect_profile.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("simulation parameters must be finite"));
        }
        if self.belief_a_pre < 0.0 || self.belief_a_post < 0.0 {
            return Err(Error::config("believed tool effects must be >= 0"));
        }
        if !(self.experience_var > 0.0 && self.experience_var.is_finite()) {
            return Err(Error::config("experience_var must be > 0"));
        }
        if self.edit_sd < 0.0 || self.wage_sd < 0.0 {
            return Err(Error::config("edit_sd and wage_sd must be >= 0"));
        }
        if let AiEffect::Ceiling { level } = self.effect {
            if !level.is_finite() {
                return Err(Error::config("ceiling level must be finite"));
            }
        }
        Ok(())
    }

    /// Tool effect multiplier `k` periods after the rollout.
    pub(crate) fn profile(&self, k: i64) -> f64 {
        match self.effect_profile.len() {
            0 => 1.0,
            len => self.effect_profile[(k.max(0) as usize).min(len - 1)],
        }
    }

    pub(crate) fn gpt_shift(&self, access: bool, period: u32) -> f64 {
        if period < self.gpt_period {
            0.0
        } else if access {
            self.gpt_shift_treated
        } else {
            self.gpt_shift_control
        }
    }

    /// Periods assigned to pre-tool bids, used by the omitted-trend bias formula.
    pub fn pre_periods(&self) -> u32 {
        self.tool_period
    }

    pub fn apply(mut self, scenario: Scenario) -> Self {
        match scenario {
            Scenario::Default => {}
            Scenario::BeliefSwitch => {
                self.model.a = 2.0;
                self.belief_a_pre = 0.0;
                self.belief_a_post = 2.0;
            }
            Scenario::Null => {
                self.model.a = 0.0;
                self.gpt_shift_treated = 0.0;
                self.gpt_shift_control = 0.0;
                self.belief_a_post = 0.0;
            }
            Scenario::NeverUpdate => self.belief_a_post = self.belief_a_pre,
            Scenario::GptOnly => {
                self.model.a = 0.0;
                self.belief_a_post = 0.0;
                self.gpt_shift_treated = 0.4;
                self.gpt_shift_control = 0.0;
            }
            Scenario::Ceiling => {
                self.effect = AiEffect::Ceiling { level: self.model.mu0 + self.model.a };
                self.compliance = 1.0;
            }
            Scenario::Uniform => {
                self.effect = AiEffect::Additive;
                self.compliance = 1.0;
            }
            Scenario::Taper => {
                self.effect_profile = vec![1.0, 0.5, 0.0];
            }
            Scenario::Editing => {
                self.edit_beta = 4.0;
                self.edit_effect = 0.02;
            }
        }
        self
    }
}

/// Named starting points for [`SimConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Default,
    Null,
    BeliefSwitch,
    NeverUpdate,
    GptOnly,
    Ceiling,
    Uniform,
    Taper,
    Editing,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Default,
        Scenario::Null,
        Scenario::BeliefSwitch,
        Scenario::NeverUpdate,
        Scenario::GptOnly,
        Scenario::Ceiling,
        Scenario::Uniform,
        Scenario::Taper,
        Scenario::Editing,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Default => "default",
            Scenario::Null => "null",
            Scenario::BeliefSwitch => "belief-switch",
            Scenario::NeverUpdate => "never-update",
            Scenario::GptOnly => "gpt-only",
            Scenario::Ceiling => "ceiling",
            Scenario::Uniform => "uniform",
            Scenario::Taper => "taper",
            Scenario::Editing => "editing",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .iter()
            .copied()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown scenario '{s}'")))
    }
}
