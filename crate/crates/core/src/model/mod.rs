//! The cover-letter signaling model.
//!
//! A worker's letter quality is `h = q + rho * A + nu` with productivity
//! `q ~ N(mu0, tau2)`, shock `nu ~ N(0, sigma2)` and AI access
//! `rho ~ Bernoulli(p)`. Employers see `h` only and value `E[q | h]`.
//! Everything in this file is closed form; integrated quantities live in
//! [`integrate`] and figure tables in [`curves`].

pub mod curves;
pub mod integrate;
pub mod quadrature;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use curves::{figure_curves, Axis, CurveRow, CurveTable, Figures, Grid, Group};
pub use integrate::{
    hire_prob_ex_ante, hire_prob_ex_ante_given_q, hire_prob_given_q, Estimate, IntegrationConfig, Method,
};

/// Model primitives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Prior mean of productivity.
    pub mu0: f64,
    /// Prior variance of productivity.
    pub tau2: f64,
    /// Variance of the per-application shock.
    pub sigma2: f64,
    /// Probability that a worker has AI access.
    pub p: f64,
    /// Additive shift of letter quality from using the tool.
    pub a: f64,
    /// Applicants per job.
    pub n: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::figure_note()
    }
}

impl ModelParams {
    /// The parameterization used for the published simulation figures.
    pub fn figure_note() -> Self {
        Self { mu0: 0.0, tau2: 1.0, sigma2: 1.0, p: 0.5, a: 1.0, n: 3 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.mu0, self.tau2, self.sigma2, self.p, self.a].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::config("model parameters must be finite"));
        }
        if self.tau2 <= 0.0 {
            return Err(Error::config(format!("tau2 must be > 0, got {}", self.tau2)));
        }
        if self.sigma2 <= 0.0 {
            return Err(Error::config(format!("sigma2 must be > 0, got {}", self.sigma2)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::config(format!("p must lie in (0, 1), got {}", self.p)));
        }
        if self.a < 0.0 {
            return Err(Error::config(format!("A must be >= 0, got {}", self.a)));
        }
        if self.n < 1 {
            return Err(Error::config("N must be >= 1"));
        }
        Ok(())
    }

    /// Same primitives with a different tool effect (A = 0 gives the pre-AI regime).
    pub fn with_a(self, a: f64) -> Self {
        Self { a, ..self }
    }

    /// Unconditional variance of `h` within an access group, `tau2 + sigma2`.
    pub fn signal_var(&self) -> f64 {
        self.tau2 + self.sigma2
    }

    /// `tau2 / (tau2 + sigma2)`, the slope of `E[q | h]` before AI.
    pub fn shrinkage(&self) -> f64 {
        self.tau2 / self.signal_var()
    }

    pub(crate) fn prior(&self) -> Prior {
        Prior { mean: self.mu0, var: self.tau2 }
    }
}

/// One worker-application draw; `h` is always `q + rho * A + nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkerDraw {
    pub q: f64,
    pub rho: bool,
    pub nu: f64,
    pub h: f64,
}

impl WorkerDraw {
    pub fn new(q: f64, rho: bool, nu: f64, params: &ModelParams) -> Self {
        Self { q, rho, nu, h: cover_letter_quality(q, rho, nu, params) }
    }
}

/// Gaussian prior over productivity as seen by the employer.
///
/// The base model uses `N(mu0, tau2)`. The market simulator conditions this
/// on a second, AI-proof signal before applying the letter update, which is
/// why the posterior formulas below are written against a generic prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prior {
    pub mean: f64,
    pub var: f64,
}

impl Prior {
    /// Conditions `N(mean, var)` on an observation `x = q + eta`, `eta ~ N(0, noise_var)`.
    pub fn update(self, x: f64, noise_var: f64) -> Self {
        let k = self.var / (self.var + noise_var);
        Prior { mean: self.mean + k * (x - self.mean), var: self.var * (1.0 - k) }
    }
}

/// Numerically stable logistic function.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(exp(a) + exp(b))`.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln(sum exp(xs))` over a slice.
pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn cover_letter_quality(q: f64, rho: bool, nu: f64, params: &ModelParams) -> f64 {
    let shift = if rho { params.a } else { 0.0 };
    q + shift + nu
}

/// Log-odds that a letter of quality `h` was written with the tool.
fn access_log_odds(h: f64, prior: Prior, sigma2: f64, p: f64, a: f64) -> f64 {
    let v = prior.var + sigma2;
    (p / (1.0 - p)).ln() + (2.0 * a * (h - prior.mean) - a * a) / (2.0 * v)
}

pub(crate) fn access_posterior_with(h: f64, prior: Prior, sigma2: f64, p: f64, a: f64) -> f64 {
    if a == 0.0 {
        return p;
    }
    logistic(access_log_odds(h, prior, sigma2, p, a))
}

pub(crate) fn expected_productivity_with(h: f64, prior: Prior, sigma2: f64, p: f64, a: f64) -> f64 {
    let k = prior.var / (prior.var + sigma2);
    let g = access_posterior_with(h, prior, sigma2, p, a);
    prior.mean + k * (h - prior.mean - a * g)
}

/// Posterior probability `g(h)` that the letter was AI-assisted.
pub fn access_posterior(h: f64, params: &ModelParams) -> f64 {
    access_posterior_with(h, params.prior(), params.sigma2, params.p, params.a)
}

/// `E[q | h]`.
pub fn expected_productivity(h: f64, params: &ModelParams) -> f64 {
    expected_productivity_with(h, params.prior(), params.sigma2, params.p, params.a)
}

/// Analytic derivative of [`expected_productivity`] with respect to `h`.
pub fn expected_productivity_slope(h: f64, params: &ModelParams) -> f64 {
    let v = params.signal_var();
    let g = access_posterior(h, params);
    params.shrinkage() * (1.0 - params.a * params.a / v * g * (1.0 - g))
}

/// Hiring probability against the outside option only.
pub fn hire_prob_binary(h: f64, params: &ModelParams) -> f64 {
    logistic(expected_productivity(h, params))
}

/// Multinomial-logit hiring probabilities given every applicant's letter.
///
/// The outside option has utility zero, so the returned entries sum to less
/// than one and the remainder is the probability that nobody is hired.
pub fn hire_prob_conditional(h_vec: &[f64], params: &ModelParams) -> Result<Vec<f64>> {
    if h_vec.len() != params.n {
        return Err(Error::input(format!("expected {} letter qualities, got {}", params.n, h_vec.len())));
    }
    let utilities: Vec<f64> = h_vec.iter().map(|&h| expected_productivity(h, params)).collect();
    Ok(logit_shares(&utilities, 0.0))
}

/// Choice shares of `utilities` against an outside option of utility `outside`.
pub fn logit_shares(utilities: &[f64], outside: f64) -> Vec<f64> {
    let mut all = Vec::with_capacity(utilities.len() + 1);
    all.push(outside);
    all.extend_from_slice(utilities);
    let lse = log_sum_exp(&all);
    utilities.iter().map(|u| (u - lse).exp()).collect()
}

fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-0.5 * d * d / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Unconditional density of a rival's letter quality: the access mixture
/// `(1 - p) N(mu0, tau2 + sigma2) + p N(mu0 + A, tau2 + sigma2)`.
pub fn rival_quality_density(h: f64, params: &ModelParams) -> f64 {
    let v = params.signal_var();
    (1.0 - params.p) * normal_pdf(h, params.mu0, v) + params.p * normal_pdf(h, params.mu0 + params.a, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit() -> ModelParams {
        ModelParams::figure_note()
    }

    /// Bayes rule with the two access-conditional densities, written out directly.
    fn bayes_oracle(h: f64, pr: &ModelParams) -> f64 {
        let v = pr.tau2 + pr.sigma2;
        let f1 = (-(h - pr.mu0 - pr.a).powi(2) / (2.0 * v)).exp();
        let f0 = (-(h - pr.mu0).powi(2) / (2.0 * v)).exp();
        pr.p * f1 / (pr.p * f1 + (1.0 - pr.p) * f0)
    }

    #[test]
    fn cover_letter_quality_examples() {
        let pr = unit();
        assert_eq!(cover_letter_quality(0.0, false, 0.0, &pr), 0.0);
        assert_abs_diff_eq!(cover_letter_quality(1.0, true, -0.3, &pr), 1.7, epsilon = 1e-15);
        assert_eq!(cover_letter_quality(0.5, true, 0.0, &pr.with_a(0.0)), 0.5);
        let d = WorkerDraw::new(0.2, true, 0.1, &pr);
        assert_eq!(d.h, 0.2 + 1.0 + 0.1);
    }

    #[test]
    fn access_posterior_examples() {
        let pr = ModelParams { mu0: 0.3, tau2: 2.0, sigma2: 0.5, p: 0.3, a: 1.4, n: 3 };
        assert_abs_diff_eq!(access_posterior(pr.mu0 + pr.a / 2.0, &pr), pr.p, epsilon = 1e-15);
        assert_eq!(access_posterior(17.0, &pr.with_a(0.0)), pr.p);
        let g = access_posterior(2.0, &unit());
        assert_abs_diff_eq!(g, 1.0 / (1.0 + (-0.75f64).exp()), epsilon = 1e-15);
        assert_abs_diff_eq!(g, 0.679_178_699_175_393_1, epsilon = 1e-12);
        assert_abs_diff_eq!(g, bayes_oracle(2.0, &unit()), epsilon = 1e-14);
    }

    #[test]
    fn expected_productivity_examples() {
        assert_abs_diff_eq!(expected_productivity(1.0, &unit().with_a(0.0)), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(expected_productivity(0.5, &unit()), 0.0, epsilon = 1e-15);
        let g = bayes_oracle(2.0, &unit());
        assert_abs_diff_eq!(expected_productivity(2.0, &unit()), 0.5 * (2.0 - g), epsilon = 1e-14);
        assert_abs_diff_eq!(expected_productivity(2.0, &unit()), 0.660_410_650_412_303_5, epsilon = 1e-12);
    }

    #[test]
    fn slope_examples() {
        let pr = unit();
        assert_eq!(expected_productivity_slope(3.0, &pr.with_a(0.0)), 0.5);
        // g = p = 1/2 at the midpoint and A^2 / (tau2 + sigma2) = 1/2.
        assert_abs_diff_eq!(expected_productivity_slope(0.5, &pr), 0.5 * (1.0 - 0.5 * 0.25), epsilon = 1e-15);
        assert_abs_diff_eq!(expected_productivity_slope(0.5, &pr), 0.4375, epsilon = 1e-15);
    }

    #[test]
    fn binary_hiring_examples() {
        assert_abs_diff_eq!(hire_prob_binary(0.5, &unit()), 0.5, epsilon = 1e-15);
        assert_eq!(hire_prob_binary(0.0, &unit().with_a(0.0)), 0.5);
        let e = 0.5 * (2.0 - bayes_oracle(2.0, &unit()));
        assert_abs_diff_eq!(hire_prob_binary(2.0, &unit()), e.exp() / (1.0 + e.exp()), epsilon = 1e-14);
        assert_abs_diff_eq!(hire_prob_binary(2.0, &unit()), 0.659_352_629_336_360_3, epsilon = 1e-12);
    }

    #[test]
    fn conditional_hiring_examples() {
        let pr = unit();
        let shares = hire_prob_conditional(&[0.5, 0.5, 0.5], &pr).unwrap();
        for s in &shares {
            assert_abs_diff_eq!(*s, 0.25, epsilon = 1e-15);
        }
        let one = ModelParams { n: 1, ..pr };
        assert_abs_diff_eq!(
            hire_prob_conditional(&[1.3], &one).unwrap()[0],
            hire_prob_binary(1.3, &one),
            epsilon = 1e-15
        );
        assert!(hire_prob_conditional(&[0.0, 1.0], &pr).is_err());

        let hs = [2.0, 0.0, 0.0];
        let got = hire_prob_conditional(&hs, &pr).unwrap();
        let e: Vec<f64> = hs
            .iter()
            .map(|&h| {
                let g = bayes_oracle(h, &pr);
                (0.5 * (h - g)).exp()
            })
            .collect();
        let denom = 1.0 + e.iter().sum::<f64>();
        for (g, e) in got.iter().zip(&e) {
            assert_abs_diff_eq!(*g, e / denom, epsilon = 1e-12);
        }
    }

    #[test]
    fn rival_density_examples() {
        let pr = unit();
        let d = rival_quality_density(0.7, &pr.with_a(0.0));
        assert_abs_diff_eq!(d, normal_pdf(0.7, 0.0, 2.0), epsilon = 1e-15);
        let d = rival_quality_density(0.0, &pr);
        let want = 0.5 * normal_pdf(0.0, 0.0, 2.0) + 0.5 * normal_pdf(-1.0, 0.0, 2.0);
        assert_abs_diff_eq!(d, want, epsilon = 1e-15);

        // Trapezoid over +-10 sd of the wider component.
        let sd = pr.signal_var().sqrt();
        let (lo, hi) = (pr.mu0 - 10.0 * sd, pr.mu0 + pr.a + 10.0 * sd);
        let n = 20_000;
        let step = (hi - lo) / n as f64;
        let mut total = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            total += w * rival_quality_density(lo + i as f64 * step, &pr);
        }
        assert_abs_diff_eq!(total * step, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn stable_far_in_the_tails() {
        let pr = unit();
        for h in [-1e4, -50.0, 50.0, 1e4] {
            let g = access_posterior(h, &pr);
            assert!(g.is_finite() && (0.0..=1.0).contains(&g));
            assert!(expected_productivity(h, &pr).is_finite());
            assert!(hire_prob_binary(h, &pr).is_finite());
        }
        let shares = hire_prob_conditional(&[800.0, 0.0, -800.0], &pr).unwrap();
        assert!(shares.iter().all(|s| s.is_finite()));
        assert!(shares[0] > 0.999_999);
    }

    #[test]
    fn invalid_params_rejected() {
        let base = unit();
        for bad in [
            ModelParams { tau2: 0.0, ..base },
            ModelParams { sigma2: -1.0, ..base },
            ModelParams { p: 1.0, ..base },
            ModelParams { p: 0.0, ..base },
            ModelParams { a: -0.1, ..base },
            ModelParams { n: 0, ..base },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
        assert!(base.validate().is_ok());
    }

    fn params_strategy() -> impl Strategy<Value = ModelParams> {
        (-2.0..2.0f64, 0.1..4.0f64, 0.1..4.0f64, 0.02..0.98f64, 0.05..3.0f64, 1usize..6)
            .prop_map(|(mu0, tau2, sigma2, p, a, n)| ModelParams { mu0, tau2, sigma2, p, a, n })
    }

    proptest! {
        #[test]
        fn posterior_matches_bayes_rule(pr in params_strategy(), h in -8.0..8.0f64) {
            prop_assert!((access_posterior(h, &pr) - bayes_oracle(h, &pr)).abs() < 1e-12);
        }

        #[test]
        fn implication_one_identity(pr in params_strategy(), h in -10.0..10.0f64) {
            let diff = expected_productivity(h, &pr) - expected_productivity(h, &pr.with_a(0.0));
            let closed = -pr.shrinkage() * pr.a * access_posterior(h, &pr);
            prop_assert!((diff - closed).abs() < 1e-12);
            prop_assert!(closed < 0.0 && diff <= 0.0);
        }

        #[test]
        fn implication_two_slope_bound(pr in params_strategy(), h in -10.0..10.0f64) {
            let slope = expected_productivity_slope(h, &pr);
            let g = access_posterior(h, &pr);
            prop_assert!(slope <= pr.shrinkage());
            // far in the tails g(1-g) is below the resolution of the shrinkage factor
            if pr.a * pr.a / pr.signal_var() * g * (1.0 - g) > 1e-15 {
                prop_assert!(slope < pr.shrinkage());
            }
            prop_assert_eq!(expected_productivity_slope(h, &pr.with_a(0.0)), pr.shrinkage());
        }

        #[test]
        fn slope_matches_central_difference(pr in params_strategy(), h in -6.0..6.0f64) {
            let step = 1e-5;
            let fd = (expected_productivity(h + step, &pr) - expected_productivity(h - step, &pr)) / (2.0 * step);
            prop_assert!((fd - expected_productivity_slope(h, &pr)).abs() < 1e-6);
        }

        #[test]
        fn posterior_monotone_in_h(pr in params_strategy(), h in -8.0..8.0f64) {
            let g0 = access_posterior(h, &pr);
            let g1 = access_posterior(h + 0.01, &pr);
            prop_assert!(g0 > 0.0 && g0 < 1.0);
            prop_assert!(g1 > g0);
        }

        #[test]
        fn conditional_shares_close_to_one(pr in params_strategy(), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let hs: Vec<f64> = (0..pr.n).map(|_| rng.random_range(-6.0..6.0)).collect();
            let shares = hire_prob_conditional(&hs, &pr).unwrap();
            let sum: f64 = shares.iter().sum();
            let outside = 1.0 / (1.0 + hs.iter().map(|&h| expected_productivity(h, &pr).exp()).sum::<f64>());
            prop_assert!(sum < 1.0);
            prop_assert!((sum + outside - 1.0).abs() < 1e-12);
        }
    }
}
