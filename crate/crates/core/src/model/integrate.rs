//! Hiring probabilities that integrate over rivals' letters and own shocks.
//!
//! Two routes are offered for every integral: Monte Carlo on a seeded
//! substream, and tensor-product Gauss-Hermite over the rival mixture. They
//! are independent implementations and are cross-checked in the tests.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::quadrature::gauss_hermite;
use super::{expected_productivity, ModelParams};
use crate::rng::substream;
use crate::{Error, Result};

/// Largest tensor grid the quadrature route will build.
const MAX_TENSOR_POINTS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    GaussHermite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub method: Method,
    /// Monte Carlo samples per integral.
    pub draws: usize,
    /// Quadrature nodes per dimension.
    pub nodes: usize,
    pub seed: u64,
    /// Substream index, normally the grid index of the point being evaluated.
    #[serde(default)]
    pub stream: u64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self { method: Method::MonteCarlo, draws: 200_000, nodes: 64, seed: 1, stream: 0 }
    }
}

impl IntegrationConfig {
    pub fn monte_carlo(draws: usize, seed: u64) -> Self {
        Self { method: Method::MonteCarlo, draws, seed, ..Self::default() }
    }

    pub fn gauss_hermite(nodes: usize) -> Self {
        Self { method: Method::GaussHermite, nodes, ..Self::default() }
    }

    /// Same configuration on substream `index`.
    pub fn at(self, index: u64) -> Self {
        Self { stream: index, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::MonteCarlo if self.draws < 1000 => {
                Err(Error::config(format!("monte carlo needs at least 1000 draws, got {}", self.draws)))
            }
            Method::GaussHermite if self.nodes < 16 => {
                Err(Error::config(format!("gauss-hermite needs at least 16 nodes, got {}", self.nodes)))
            }
            _ => Ok(()),
        }
    }
}

/// A numerical integral with its Monte Carlo standard error (zero for quadrature).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, se: 0.0 }
    }

    /// Number of standard errors separating the value from zero.
    pub fn z(&self) -> f64 {
        if self.se == 0.0 {
            if self.value == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(self.value)
            }
        } else {
            self.value / self.se
        }
    }
}

#[derive(Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn estimate(&self) -> Estimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        Estimate { value: self.mean, se: (var / self.n as f64).sqrt() }
    }
}

/// `exp(e) / (1 + exp(e) + exp(l))`, the choice probability of an applicant
/// with utility `e` against rivals whose exp-utilities sum to `exp(l)`.
fn choice_prob(e: f64, log_rivals: f64) -> f64 {
    let m = e.max(log_rivals).max(0.0);
    let denom = (-m).exp() + (e - m).exp() + (log_rivals - m).exp();
    (e - m).exp() / denom
}

/// One Monte Carlo rival: `u` picks the access component, `z` the Gaussian draw.
#[derive(Debug, Clone, Copy)]
struct RivalDraw {
    u: f64,
    z: f64,
}

fn rival_log_sum(params: &ModelParams, rivals: &[RivalDraw]) -> f64 {
    let sd = params.signal_var().sqrt();
    let mut acc = f64::NEG_INFINITY;
    for r in rivals {
        let mean = if r.u < params.p { params.mu0 + params.a } else { params.mu0 };
        let e = expected_productivity(mean + sd * r.z, params);
        acc = super::log_add_exp(acc, e);
    }
    acc
}

/// Runs `draws` Monte Carlo samples on substream `(seed, tag, stream)`. Each
/// sample hands the closure a fresh own-shock normal and `n_rivals` rival draws.
fn monte_carlo<F>(cfg: &IntegrationConfig, tag: &str, n_rivals: usize, mut f: F) -> Estimate
where
    F: FnMut(f64, &[RivalDraw]) -> f64,
{
    let mut rng = substream(cfg.seed, tag, cfg.stream);
    let mut rivals = vec![RivalDraw { u: 0.0, z: 0.0 }; n_rivals];
    let mut acc = Welford::default();
    for _ in 0..cfg.draws {
        let z_nu: f64 = rng.sample(StandardNormal);
        for r in rivals.iter_mut() {
            r.u = rng.random::<f64>();
            r.z = rng.sample(StandardNormal);
        }
        acc.push(f(z_nu, &rivals));
    }
    acc.estimate()
}

/// Tensor-product quadrature over the rivals: each point carries the log of
/// the rivals' summed exp-utilities and its probability weight.
pub(crate) struct RivalSupport {
    log_sums: Vec<f64>,
    weights: Vec<f64>,
}

impl RivalSupport {
    pub(crate) fn new(params: &ModelParams, nodes: usize) -> Result<Self> {
        let n_rivals = params.n - 1;
        let (x, w) = gauss_hermite(nodes)?;
        let sd = params.signal_var().sqrt();
        let mut line: Vec<(f64, f64)> = Vec::with_capacity(2 * nodes);
        for (xi, wi) in x.iter().zip(&w) {
            let h0 = params.mu0 + sd * xi;
            if params.a == 0.0 {
                line.push((expected_productivity(h0, params), *wi));
            } else {
                line.push((expected_productivity(h0, params), (1.0 - params.p) * wi));
                line.push((expected_productivity(h0 + params.a, params), params.p * wi));
            }
        }
        let size = line.len().checked_pow(n_rivals as u32).filter(|s| *s <= MAX_TENSOR_POINTS);
        if size.is_none() {
            return Err(Error::config(format!(
                "quadrature over {n_rivals} rivals with {nodes} nodes is too large; use monte carlo"
            )));
        }
        let mut log_sums = vec![f64::NEG_INFINITY];
        let mut weights = vec![1.0];
        for _ in 0..n_rivals {
            let mut ls = Vec::with_capacity(log_sums.len() * line.len());
            let mut ws = Vec::with_capacity(log_sums.len() * line.len());
            for (l, wt) in log_sums.iter().zip(&weights) {
                for (e, we) in &line {
                    ls.push(super::log_add_exp(*l, *e));
                    ws.push(wt * we);
                }
            }
            log_sums = ls;
            weights = ws;
        }
        Ok(Self { log_sums, weights })
    }

    fn expect(&self, own_utility: f64) -> f64 {
        self.log_sums.iter().zip(&self.weights).map(|(l, w)| w * choice_prob(own_utility, *l)).sum()
    }
}

fn check_regime(regime_a: f64, params: &ModelParams) -> Result<()> {
    if regime_a == 0.0 || regime_a == params.a {
        Ok(())
    } else {
        Err(Error::input(format!("regime A must be 0 (pre) or {} (post), got {regime_a}", params.a)))
    }
}

/// Ex-ante hiring probability of an applicant with letter `h`, integrating
/// over `N - 1` rivals drawn from the access mixture.
///
/// The applicant's own exp-utility enters the denominator, as in the
/// conditional multinomial logit.
pub fn hire_prob_ex_ante_estimate(h: f64, params: &ModelParams, cfg: &IntegrationConfig) -> Result<Estimate> {
    params.validate()?;
    cfg.validate()?;
    let own = expected_productivity(h, params);
    if params.n == 1 {
        return Ok(Estimate::exact(choice_prob(own, f64::NEG_INFINITY)));
    }
    Ok(match cfg.method {
        Method::GaussHermite => Estimate::exact(RivalSupport::new(params, cfg.nodes)?.expect(own)),
        Method::MonteCarlo => {
            monte_carlo(cfg, "ex_ante", params.n - 1, |_, rivals| choice_prob(own, rival_log_sum(params, rivals)))
        }
    })
}

pub fn hire_prob_ex_ante(h: f64, params: &ModelParams, cfg: &IntegrationConfig) -> Result<f64> {
    hire_prob_ex_ante_estimate(h, params, cfg).map(|e| e.value)
}

/// Hiring probability of a worker with productivity `q` and access `rho`
/// under the employer-belief regime `regime_a` (0 before the tool, `params.a`
/// after). The worker's letter is `q + rho * regime_a + nu`.
pub fn hire_prob_given_q_estimate(
    q: f64,
    rho: bool,
    regime_a: f64,
    params: &ModelParams,
    cfg: &IntegrationConfig,
) -> Result<Estimate> {
    params.validate()?;
    cfg.validate()?;
    check_regime(regime_a, params)?;
    let pr = params.with_a(regime_a);
    let shift = if rho { regime_a } else { 0.0 };
    let sd_nu = pr.sigma2.sqrt();
    match cfg.method {
        Method::GaussHermite => {
            let support = RivalSupport::new(&pr, cfg.nodes)?;
            let (x, w) = gauss_hermite(cfg.nodes)?;
            let v = x
                .iter()
                .zip(&w)
                .map(|(xi, wi)| wi * support.expect(expected_productivity(q + shift + sd_nu * xi, &pr)))
                .sum();
            Ok(Estimate::exact(v))
        }
        Method::MonteCarlo => Ok(monte_carlo(cfg, "given_q", pr.n - 1, |z_nu, rivals| {
            let own = expected_productivity(q + shift + sd_nu * z_nu, &pr);
            choice_prob(own, rival_log_sum(&pr, rivals))
        })),
    }
}

pub fn hire_prob_given_q(
    q: f64,
    rho: bool,
    regime_a: f64,
    params: &ModelParams,
    cfg: &IntegrationConfig,
) -> Result<f64> {
    hire_prob_given_q_estimate(q, rho, regime_a, params, cfg).map(|e| e.value)
}

/// Hiring probability given `q` before access is known: the `p`-weighted
/// average of the access and no-access curves under regime `params.a`.
pub fn hire_prob_ex_ante_given_q_estimate(q: f64, params: &ModelParams, cfg: &IntegrationConfig) -> Result<Estimate> {
    params.validate()?;
    cfg.validate()?;
    let pr = *params;
    let sd_nu = pr.sigma2.sqrt();
    let p = pr.p;
    match cfg.method {
        Method::GaussHermite => {
            let with = hire_prob_given_q(q, true, pr.a, &pr, cfg)?;
            let without = hire_prob_given_q(q, false, pr.a, &pr, cfg)?;
            Ok(Estimate::exact(p * with + (1.0 - p) * without))
        }
        Method::MonteCarlo => Ok(monte_carlo(cfg, "ex_ante_given_q", pr.n - 1, |z_nu, rivals| {
            let l = rival_log_sum(&pr, rivals);
            let h = q + sd_nu * z_nu;
            let with = choice_prob(expected_productivity(h + pr.a, &pr), l);
            let without = choice_prob(expected_productivity(h, &pr), l);
            p * with + (1.0 - p) * without
        })),
    }
}

pub fn hire_prob_ex_ante_given_q(q: f64, params: &ModelParams, cfg: &IntegrationConfig) -> Result<f64> {
    hire_prob_ex_ante_given_q_estimate(q, params, cfg).map(|e| e.value)
}

/// Pre-AI minus post-AI slope of the ex-ante hiring curve at `h`, by central
/// differences of half-width `step` on shared draws.
pub fn ex_ante_slope_gap(h: f64, step: f64, params: &ModelParams, cfg: &IntegrationConfig) -> Result<Estimate> {
    params.validate()?;
    cfg.validate()?;
    let pre = params.with_a(0.0);
    let post = *params;
    let slope = |lo: f64, hi: f64| (hi - lo) / (2.0 * step);
    if params.n == 1 {
        let p = |h: f64, pr: &ModelParams| choice_prob(expected_productivity(h, pr), f64::NEG_INFINITY);
        let gap = slope(p(h - step, &pre), p(h + step, &pre)) - slope(p(h - step, &post), p(h + step, &post));
        return Ok(Estimate::exact(gap));
    }
    Ok(match cfg.method {
        Method::GaussHermite => {
            let s_pre = RivalSupport::new(&pre, cfg.nodes)?;
            let s_post = RivalSupport::new(&post, cfg.nodes)?;
            let e = |h: f64, pr: &ModelParams| expected_productivity(h, pr);
            let gap = slope(s_pre.expect(e(h - step, &pre)), s_pre.expect(e(h + step, &pre)))
                - slope(s_post.expect(e(h - step, &post)), s_post.expect(e(h + step, &post)));
            Estimate::exact(gap)
        }
        Method::MonteCarlo => monte_carlo(cfg, "fig5", params.n - 1, |_, rivals| {
            let l_pre = rival_log_sum(&pre, rivals);
            let l_post = rival_log_sum(&post, rivals);
            let at = |h: f64, pr: &ModelParams, l: f64| choice_prob(expected_productivity(h, pr), l);
            slope(at(h - step, &pre, l_pre), at(h + step, &pre, l_pre))
                - slope(at(h - step, &post, l_post), at(h + step, &post, l_post))
        }),
    })
}

/// Post-AI minus pre-AI hiring probability for a worker with productivity `q`
/// and access `rho`, on shared draws (same substream as [`hire_prob_given_q`]).
pub fn given_q_change(q: f64, rho: bool, params: &ModelParams, cfg: &IntegrationConfig) -> Result<Estimate> {
    params.validate()?;
    cfg.validate()?;
    match cfg.method {
        Method::GaussHermite => {
            let post = hire_prob_given_q(q, rho, params.a, params, cfg)?;
            let pre = hire_prob_given_q(q, rho, 0.0, params, cfg)?;
            Ok(Estimate::exact(post - pre))
        }
        Method::MonteCarlo => {
            let pre = params.with_a(0.0);
            let post = *params;
            let sd_nu = params.sigma2.sqrt();
            let shift = if rho { post.a } else { 0.0 };
            Ok(monte_carlo(cfg, "given_q", params.n - 1, |z_nu, rivals| {
                let nu = sd_nu * z_nu;
                let after = choice_prob(expected_productivity(q + shift + nu, &post), rival_log_sum(&post, rivals));
                let before = choice_prob(expected_productivity(q + nu, &pre), rival_log_sum(&pre, rivals));
                after - before
            }))
        }
    }
}

/// Post-AI minus pre-AI ex-ante hiring probability at productivity `q`, on
/// shared draws (same substream as [`hire_prob_ex_ante_given_q`]).
pub fn ex_ante_given_q_change(q: f64, params: &ModelParams, cfg: &IntegrationConfig) -> Result<Estimate> {
    params.validate()?;
    cfg.validate()?;
    match cfg.method {
        Method::GaussHermite => {
            let post = hire_prob_ex_ante_given_q(q, params, cfg)?;
            let pre = hire_prob_ex_ante_given_q(q, &params.with_a(0.0), cfg)?;
            Ok(Estimate::exact(post - pre))
        }
        Method::MonteCarlo => {
            let pre = params.with_a(0.0);
            let post = *params;
            let sd_nu = params.sigma2.sqrt();
            let p = params.p;
            Ok(monte_carlo(cfg, "ex_ante_given_q", params.n - 1, |z_nu, rivals| {
                let h = q + sd_nu * z_nu;
                let l_post = rival_log_sum(&post, rivals);
                let with = choice_prob(expected_productivity(h + post.a, &post), l_post);
                let without = choice_prob(expected_productivity(h, &post), l_post);
                let before = choice_prob(expected_productivity(h, &pre), rival_log_sum(&pre, rivals));
                p * with + (1.0 - p) * without - before
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hire_prob_binary;
    use approx::assert_abs_diff_eq;

    fn fig() -> ModelParams {
        ModelParams::figure_note()
    }

    fn mc(draws: usize) -> IntegrationConfig {
        IntegrationConfig::monte_carlo(draws, 11)
    }

    #[test]
    fn single_applicant_is_binary_logit() {
        let one = ModelParams { n: 1, ..fig() };
        for h in [-2.0, 0.0, 0.5, 3.0] {
            for cfg in [mc(1000), IntegrationConfig::gauss_hermite(16)] {
                assert_abs_diff_eq!(
                    hire_prob_ex_ante(h, &one, &cfg).unwrap(),
                    hire_prob_binary(h, &one),
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(mc(999).validate().is_err());
        assert!(IntegrationConfig::gauss_hermite(15).validate().is_err());
        assert!(hire_prob_ex_ante(0.0, &fig(), &mc(10)).is_err());
    }

    #[test]
    fn quadrature_agrees_with_monte_carlo() {
        let gh = IntegrationConfig::gauss_hermite(64);
        for (i, h) in [-2.0, 0.0, 1.5].into_iter().enumerate() {
            let exact = hire_prob_ex_ante(h, &fig(), &gh).unwrap();
            let est = hire_prob_ex_ante_estimate(h, &fig(), &mc(50_000).at(i as u64)).unwrap();
            assert!((est.value - exact).abs() < 4.0 * est.se, "h={h}: {est:?} vs {exact}");
        }
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let a = hire_prob_ex_ante(0.3, &fig(), &mc(2000).at(5)).unwrap();
        let b = hire_prob_ex_ante(0.3, &fig(), &mc(2000).at(5)).unwrap();
        let c = hire_prob_ex_ante(0.3, &fig(), &mc(2000).at(6)).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_ne!(a, c);
    }

    #[test]
    fn ex_ante_increasing_in_h() {
        let gh = IntegrationConfig::gauss_hermite(32);
        for pr in [fig(), fig().with_a(0.0)] {
            let mut last = 0.0;
            for i in 0..=40 {
                let h = -4.0 + 0.2 * i as f64;
                let v = hire_prob_ex_ante(h, &pr, &gh).unwrap();
                assert!(v > last && v < 1.0);
                last = v;
            }
        }
    }

    #[test]
    fn access_irrelevant_before_the_tool() {
        let gh = IntegrationConfig::gauss_hermite(16);
        for q in [-2.0, 0.0, 2.0] {
            let a = hire_prob_given_q(q, true, 0.0, &fig(), &gh).unwrap();
            let b = hire_prob_given_q(q, false, 0.0, &fig(), &gh).unwrap();
            assert_eq!(a, b);
            let pooled = hire_prob_ex_ante_given_q(q, &fig().with_a(0.0), &gh).unwrap();
            assert_abs_diff_eq!(pooled, a, epsilon = 1e-15);
        }
        let x = hire_prob_given_q(0.4, true, 0.0, &fig(), &mc(1000)).unwrap();
        let y = hire_prob_given_q(0.4, false, 0.0, &fig(), &mc(1000)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn bad_regime_rejected() {
        let r = hire_prob_given_q(0.0, true, 0.5, &fig(), &mc(1000));
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn ex_ante_given_q_is_access_mixture() {
        let cfg = mc(100_000).at(3);
        for q in [-1.0, 1.0] {
            let pooled = hire_prob_ex_ante_given_q_estimate(q, &fig(), &cfg).unwrap();
            let with = hire_prob_given_q_estimate(q, true, 1.0, &fig(), &cfg).unwrap();
            let without = hire_prob_given_q_estimate(q, false, 1.0, &fig(), &cfg).unwrap();
            let mix = 0.5 * with.value + 0.5 * without.value;
            let se = (pooled.se.powi(2) + 0.25 * with.se.powi(2) + 0.25 * without.se.powi(2)).sqrt();
            assert!((pooled.value - mix).abs() < 4.0 * se, "{pooled:?} vs {mix}");
        }
    }

    #[test]
    fn paired_contrasts_match_curve_differences() {
        let gh = IntegrationConfig::gauss_hermite(24);
        let q = 0.7;
        let d = given_q_change(q, true, &fig(), &gh).unwrap().value;
        let want = hire_prob_given_q(q, true, 1.0, &fig(), &gh).unwrap()
            - hire_prob_given_q(q, true, 0.0, &fig(), &gh).unwrap();
        assert_abs_diff_eq!(d, want, epsilon = 1e-15);

        let cfg = mc(5000).at(2);
        let d = given_q_change(q, false, &fig(), &cfg).unwrap().value;
        let want = hire_prob_given_q(q, false, 1.0, &fig(), &cfg).unwrap()
            - hire_prob_given_q(q, false, 0.0, &fig(), &cfg).unwrap();
        assert_abs_diff_eq!(d, want, epsilon = 1e-12);
    }

    #[test]
    fn standard_error_shrinks_with_root_draws() {
        // Spread of the estimate across 30 seeds at fixed h.
        let spread = |draws: usize| {
            let vals: Vec<f64> = (0..30)
                .map(|s| hire_prob_ex_ante(0.0, &fig(), &IntegrationConfig::monte_carlo(draws, 100 + s)).unwrap())
                .collect();
            let m = vals.iter().sum::<f64>() / 30.0;
            (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 29.0).sqrt()
        };
        let ratio = spread(4000) / spread(16_000);
        assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn no_nan_in_log_domain_extremes() {
        let gh = IntegrationConfig::gauss_hermite(16);
        for x in [-12.0, -6.0, 0.0, 6.0, 12.0] {
            for v in [
                hire_prob_ex_ante(x, &fig(), &gh).unwrap(),
                hire_prob_given_q(x, true, 1.0, &fig(), &gh).unwrap(),
                hire_prob_given_q(x, false, 1.0, &fig(), &gh).unwrap(),
                hire_prob_ex_ante_given_q(x, &fig(), &gh).unwrap(),
                hire_prob_ex_ante(x, &fig(), &mc(1000)).unwrap(),
            ] {
                assert!(v.is_finite() && (0.0..=1.0).contains(&v), "{x}: {v}");
            }
        }
    }
}
