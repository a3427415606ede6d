use indexmap::IndexMap;
use nalgebra::DMatrix;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::{Error, Result};

/// Relative rank threshold against the leading singular value.
pub const RANK_TOL: f64 = 1e-10;

/// Householder QR with column pivoting on the largest remaining column norm.
struct PivotedQr {
    /// Reflected columns in pivoted order; the upper triangle holds `R`.
    a: Vec<Vec<f64>>,
    /// Householder vectors, each acting on rows `j..`.
    v: Vec<Vec<f64>>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    fn new(cols: &[Vec<f64>]) -> Result<Self> {
        let k = cols.len();
        let n = cols.first().map_or(0, Vec::len);
        if k > n {
            return Err(Error::numerical(format!("{k} regressors but only {n} observations")));
        }
        let mut a: Vec<Vec<f64>> = cols.to_vec();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut v = Vec::with_capacity(k);
        for j in 0..k {
            let norm2 = |c: &Vec<f64>| c[j..].iter().map(|x| x * x).sum::<f64>();
            let best =
                (j..k).max_by(|&p, &q| norm2(&a[p]).total_cmp(&norm2(&a[q])).then(q.cmp(&p))).expect("non-empty range");
            a.swap(j, best);
            perm.swap(j, best);
            let norm = norm2(&a[j]).sqrt();
            let mut h = a[j][j..].to_vec();
            if norm > 0.0 {
                let alpha = if h[0] >= 0.0 { -norm } else { norm };
                h[0] -= alpha;
                let hh: f64 = h.iter().map(|x| x * x).sum();
                if hh > 0.0 {
                    for c in a.iter_mut().skip(j + 1) {
                        let dot: f64 = h.iter().zip(&c[j..]).map(|(p, q)| p * q).sum();
                        let f = 2.0 * dot / hh;
                        for (x, hv) in c[j..].iter_mut().zip(&h) {
                            *x -= f * hv;
                        }
                    }
                }
                a[j][j] = alpha;
                for x in a[j][j + 1..].iter_mut() {
                    *x = 0.0;
                }
            }
            v.push(h);
        }
        let r = DMatrix::from_fn(k, k, |i, c| if i <= c { a[c][i] } else { 0.0 });
        let leading = if k == 0 { 0.0 } else { r.clone().svd(false, false).singular_values.max() };
        let tol = RANK_TOL * leading;
        let rank = (0..k).take_while(|&j| a[j][j].abs() > tol).count();
        Ok(Self { a, v, perm, rank })
    }

    fn qt(&self, y: &[f64]) -> Vec<f64> {
        let mut y = y.to_vec();
        for (j, h) in self.v.iter().enumerate() {
            let hh: f64 = h.iter().map(|x| x * x).sum();
            if hh == 0.0 {
                continue;
            }
            let dot: f64 = h.iter().zip(&y[j..]).map(|(p, q)| p * q).sum();
            let f = 2.0 * dot / hh;
            for (x, hv) in y[j..].iter_mut().zip(h) {
                *x -= f * hv;
            }
        }
        y
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        self.a[j][i]
    }

    /// Inverse of the leading `rank x rank` block of `R`.
    #[allow(clippy::needless_range_loop)]
    fn r_inverse(&self) -> Vec<Vec<f64>> {
        let k = self.rank;
        let mut inv = vec![vec![0.0; k]; k];
        for c in 0..k {
            for i in (0..=c).rev() {
                let mut s = if i == c { 1.0 } else { 0.0 };
                for m in i + 1..=c {
                    s -= self.r(i, m) * inv[m][c];
                }
                inv[i][c] = s / self.r(i, i);
            }
        }
        inv
    }
}

/// Least-squares fit of a full-rank design: coefficients and `(X'X)^-1`.
pub(crate) struct Fit {
    pub beta: Vec<f64>,
    pub xtx_inv: Vec<Vec<f64>>,
}

pub(crate) fn least_squares(y: &[f64], x: &[Vec<f64>], names: &[String]) -> Result<Fit> {
    let k = x.len();
    let qr = PivotedQr::new(x)?;
    if qr.rank < k {
        let mut dropped: Vec<String> = qr.perm[qr.rank..].iter().map(|&i| names[i].clone()).collect();
        dropped.sort();
        return Err(Error::Collinear(dropped));
    }
    let qty = qr.qt(y);
    let inv = qr.r_inverse();
    let mut beta_p = vec![0.0; k];
    for i in 0..k {
        beta_p[i] = (i..k).map(|m| inv[i][m] * qty[m]).sum();
    }
    let mut beta = vec![0.0; k];
    let mut xtx_inv = vec![vec![0.0; k]; k];
    for i in 0..k {
        beta[qr.perm[i]] = beta_p[i];
        for j in 0..k {
            let v: f64 = (i.max(j)..k).map(|m| inv[i][m] * inv[j][m]).sum();
            xtx_inv[qr.perm[i]][qr.perm[j]] = v;
        }
    }
    Ok(Fit { beta, xtx_inv })
}

/// Residuals of the projection of `y` on `x`, rank-deficient designs allowed.
pub fn qr_residuals(y: &[f64], x: &[Vec<f64>]) -> Result<Vec<f64>> {
    let qr = PivotedQr::new(x)?;
    let mut qty = qr.qt(y);
    qty[..qr.rank].iter_mut().for_each(|v| *v = 0.0);
    // Apply Q to the zeroed vector: reflections in reverse order.
    for (j, h) in qr.v.iter().enumerate().rev() {
        let hh: f64 = h.iter().map(|x| x * x).sum();
        if hh == 0.0 {
            continue;
        }
        let dot: f64 = h.iter().zip(&qty[j..]).map(|(p, q)| p * q).sum();
        let f = 2.0 * dot / hh;
        for (x, hv) in qty[j..].iter_mut().zip(h) {
            *x -= f * hv;
        }
    }
    Ok(qty)
}

fn residuals(y: &[f64], x: &[Vec<f64>], beta: &[f64]) -> Vec<f64> {
    let mut e = y.to_vec();
    for (col, b) in x.iter().zip(beta) {
        for (ei, xi) in e.iter_mut().zip(col) {
            *ei -= b * xi;
        }
    }
    e
}

/// CR1 covariance `c (X'X)^-1 (sum_g X_g' e_g e_g' X_g) (X'X)^-1` with
/// `c = G/(G-1) * (n-1)/(n-dof)`. Clusters are summed in index order.
fn cluster_vcov(
    x: &[Vec<f64>],
    e: &[f64],
    clusters: &[u32],
    xtx_inv: &[Vec<f64>],
    dof: usize,
) -> Result<(Vec<Vec<f64>>, usize)> {
    let k = x.len();
    let n = e.len();
    let g = clusters.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    if g < 2 {
        return Err(Error::input(format!("clustered covariance needs at least 2 clusters, got {g}")));
    }
    if n <= dof {
        return Err(Error::numerical("no residual degrees of freedom"));
    }
    let mut scores = vec![vec![0.0; k]; g];
    for (i, &c) in clusters.iter().enumerate() {
        let s = &mut scores[c as usize];
        for (j, col) in x.iter().enumerate() {
            s[j] += col[i] * e[i];
        }
    }
    let mut meat = vec![vec![0.0; k]; k];
    for s in &scores {
        for a in 0..k {
            for b in 0..k {
                meat[a][b] += s[a] * s[b];
            }
        }
    }
    let scale = (g as f64 / (g as f64 - 1.0)) * ((n as f64 - 1.0) / (n as f64 - dof as f64));
    let bm = matmul(xtx_inv, &meat);
    let mut v = matmul(&bm, xtx_inv);
    for row in v.iter_mut() {
        for x in row.iter_mut() {
            *x *= scale;
        }
    }
    Ok((v, g))
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = b.first().map_or(0, Vec::len);
    a.iter().map(|row| (0..k).map(|j| row.iter().zip(b).map(|(x, brow)| x * brow[j]).sum()).collect()).collect()
}

/// Coefficients with cluster-robust standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub coef: IndexMap<String, f64>,
    pub se: IndexMap<String, f64>,
    pub n_obs: usize,
    pub n_clusters: usize,
    #[serde(rename = "first_stage_F")]
    pub first_stage_f: Option<f64>,
    #[serde(skip)]
    pub vcov: Vec<Vec<f64>>,
    #[serde(skip)]
    pub dropped_singletons: usize,
    #[serde(skip)]
    pub excluded_rows: usize,
}

impl EstimateResult {
    fn from_fit(names: &[String], beta: &[f64], vcov: Vec<Vec<f64>>, n: usize, g: usize) -> Self {
        let coef = names.iter().cloned().zip(beta.iter().copied()).collect();
        let se = names.iter().cloned().zip((0..names.len()).map(|i| vcov[i][i].max(0.0).sqrt())).collect();
        Self { coef, se, n_obs: n, n_clusters: g, first_stage_f: None, vcov, dropped_singletons: 0, excluded_rows: 0 }
    }

    pub fn get(&self, name: &str) -> Result<(f64, f64)> {
        match (self.coef.get(name), self.se.get(name)) {
            (Some(&b), Some(&s)) => Ok((b, s)),
            _ => Err(Error::input(format!("no coefficient named '{name}'"))),
        }
    }

    pub fn coef_of(&self, name: &str) -> f64 {
        self.coef[name]
    }

    pub fn se_of(&self, name: &str) -> f64 {
        self.se[name]
    }

    /// `t` statistic of a coefficient.
    pub fn t(&self, name: &str) -> f64 {
        self.coef_of(name) / self.se_of(name)
    }

    /// Two-sided critical value from `t(G - 1)`.
    pub fn critical_value(&self, level: f64) -> f64 {
        let df = (self.n_clusters.saturating_sub(1)).max(1) as f64;
        let t = StudentsT::new(0.0, 1.0, df).expect("valid t distribution");
        t.inverse_cdf(0.5 + level / 2.0)
    }

    pub fn confidence_interval(&self, name: &str, level: f64) -> (f64, f64) {
        let (b, s) = (self.coef_of(name), self.se_of(name));
        let c = self.critical_value(level);
        (b - c * s, b + c * s)
    }

    /// Clustered Wald test that the named coefficients are jointly zero.
    /// Returns `(F statistic, p-value)` against `F(q, G - 1)`.
    pub fn wald(&self, names: &[&str]) -> Result<(f64, f64)> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.coef.get_index_of(*n).ok_or_else(|| Error::input(format!("no coefficient named '{n}'"))))
            .collect::<Result<_>>()?;
        let q = idx.len();
        let v = DMatrix::from_fn(q, q, |i, j| self.vcov[idx[i]][idx[j]]);
        let b = nalgebra::DVector::from_iterator(q, idx.iter().map(|&i| self.coef[i]));
        let inv = v.try_inverse().ok_or_else(|| Error::numerical("singular covariance in Wald test"))?;
        let w = (b.transpose() * inv * &b)[(0, 0)];
        let f = w / q as f64;
        let df2 = (self.n_clusters.saturating_sub(1)).max(1) as f64;
        let dist = FisherSnedecor::new(q as f64, df2).map_err(|e| Error::numerical(e.to_string()))?;
        Ok((f, 1.0 - dist.cdf(f)))
    }
}

fn check_lengths(n: usize, x: &[Vec<f64>], names: &[String], clusters: &[u32]) -> Result<()> {
    if x.len() != names.len() {
        return Err(Error::input("one name per regressor required"));
    }
    if x.iter().any(|c| c.len() != n) || clusters.len() != n {
        return Err(Error::input("regressors, outcome and clusters must have equal length"));
    }
    if x.is_empty() {
        return Err(Error::input("at least one regressor required"));
    }
    Ok(())
}

/// OLS with CR1 clustered standard errors.
pub fn ols(y: &[f64], x: &[Vec<f64>], names: &[String], clusters: &[u32]) -> Result<EstimateResult> {
    ols_absorbed(y, x, names, clusters, 0)
}

/// [`ols`] on data from which `absorbed` further parameters were partialled
/// out; they count toward `k` in the CR1 scale.
pub fn ols_absorbed(
    y: &[f64],
    x: &[Vec<f64>],
    names: &[String],
    clusters: &[u32],
    absorbed: usize,
) -> Result<EstimateResult> {
    ols_dof(y, x, names, clusters, x.len() + absorbed)
}

/// [`ols`] with the CR1 `k` given directly.
pub(crate) fn ols_dof(
    y: &[f64],
    x: &[Vec<f64>],
    names: &[String],
    clusters: &[u32],
    dof: usize,
) -> Result<EstimateResult> {
    check_lengths(y.len(), x, names, clusters)?;
    let fit = least_squares(y, x, names)?;
    let e = residuals(y, x, &fit.beta);
    let (vcov, g) = cluster_vcov(x, &e, clusters, &fit.xtx_inv, dof)?;
    Ok(EstimateResult::from_fit(names, &fit.beta, vcov, y.len(), g))
}

/// Two-stage least squares. Coefficients are reported in the order
/// `endogenous`, then `exog`. The covariance uses residuals computed with the
/// actual endogenous columns.
#[allow(clippy::too_many_arguments)]
pub fn tsls(
    y: &[f64],
    endogenous: &[Vec<f64>],
    endogenous_names: &[String],
    instruments: &[Vec<f64>],
    instrument_names: &[String],
    exog: &[Vec<f64>],
    exog_names: &[String],
    clusters: &[u32],
) -> Result<EstimateResult> {
    tsls_absorbed(y, endogenous, endogenous_names, instruments, instrument_names, exog, exog_names, clusters, 0)
}

/// [`tsls`] counting `absorbed` partialled-out parameters in the CR1 scale.
#[allow(clippy::too_many_arguments)]
pub fn tsls_absorbed(
    y: &[f64],
    endogenous: &[Vec<f64>],
    endogenous_names: &[String],
    instruments: &[Vec<f64>],
    instrument_names: &[String],
    exog: &[Vec<f64>],
    exog_names: &[String],
    clusters: &[u32],
    absorbed: usize,
) -> Result<EstimateResult> {
    let n = y.len();
    if instruments.len() < endogenous.len() {
        return Err(Error::input("need at least as many instruments as endogenous regressors"));
    }
    if endogenous.is_empty() {
        return Err(Error::input("no endogenous regressor"));
    }
    let first_x: Vec<Vec<f64>> = instruments.iter().chain(exog).cloned().collect();
    let first_names: Vec<String> = instrument_names.iter().chain(exog_names).cloned().collect();
    check_lengths(n, &first_x, &first_names, clusters)?;

    let mut fitted = Vec::with_capacity(endogenous.len());
    let mut first_f = f64::INFINITY;
    let inst: Vec<&str> = instrument_names.iter().map(String::as_str).collect();
    for d in endogenous {
        let first = ols_absorbed(d, &first_x, &first_names, clusters, absorbed)?;
        let (f, _) = first.wald(&inst).unwrap_or((0.0, 1.0));
        first_f = first_f.min(f);
        let beta: Vec<f64> = first.coef.values().copied().collect();
        let mut dhat = vec![0.0; n];
        for (col, b) in first_x.iter().zip(&beta) {
            for (v, x) in dhat.iter_mut().zip(col) {
                *v += b * x;
            }
        }
        fitted.push(dhat);
    }
    if first_f.is_nan() || first_f < 1e-6 {
        return Err(Error::numerical(format!("weak or degenerate instrument: first-stage F = {first_f:e}")));
    }

    let names: Vec<String> = endogenous_names.iter().chain(exog_names).cloned().collect();
    let xhat: Vec<Vec<f64>> = fitted.into_iter().chain(exog.iter().cloned()).collect();
    let xact: Vec<Vec<f64>> = endogenous.iter().chain(exog).cloned().collect();
    let fit = least_squares(y, &xhat, &names)?;
    let e = residuals(y, &xact, &fit.beta);
    let (vcov, g) = cluster_vcov(&xhat, &e, clusters, &fit.xtx_inv, xhat.len() + absorbed)?;
    let mut out = EstimateResult::from_fit(&names, &fit.beta, vcov, n, g);
    out.first_stage_f = Some(first_f);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn exact_linear_fit() {
        let x1: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let x2: Vec<f64> = (0..20).map(|i| ((i * 7) % 5) as f64).collect();
        let c = vec![1.0; 20];
        let y: Vec<f64> = (0..20).map(|i| 2.0 + 0.5 * x1[i] - 3.0 * x2[i]).collect();
        let cl: Vec<u32> = (0..20).map(|i| i % 4).collect();
        let r = ols(&y, &[c, x1, x2], &names(&["c", "x1", "x2"]), &cl).unwrap();
        assert_abs_diff_eq!(r.coef_of("c"), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.coef_of("x1"), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.coef_of("x2"), -3.0, epsilon = 1e-12);
        assert!(r.se_of("x1") < 1e-10);
    }

    #[test]
    fn collinear_columns_are_named() {
        let a: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
        let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - y).collect();
        let y = vec![1.0; 10];
        let cl: Vec<u32> = (0..10).map(|i| i % 3).collect();
        match ols(&y, &[a, b, c], &names(&["a", "b", "c"]), &cl) {
            Err(Error::Collinear(cols)) => assert_eq!(cols.len(), 1),
            other => panic!("expected collinearity error, got {other:?}"),
        }
    }

    fn random_design(seed: u64, n: usize, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut rng = substream(seed, "ols_test", 0);
        let x: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let y = (0..n)
            .map(|i| {
                x.iter().enumerate().map(|(j, c)| (j as f64 + 1.0) * c[i]).sum::<f64>()
                    + rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        (y, x)
    }

    /// Textbook HC1 via explicit normal equations.
    fn hc1_oracle(y: &[f64], x: &[Vec<f64>]) -> Vec<f64> {
        let n = y.len();
        let k = x.len();
        let xm = DMatrix::from_fn(n, k, |i, j| x[j][i]);
        let yv = nalgebra::DVector::from_column_slice(y);
        let xtx_inv = (xm.transpose() * &xm).try_inverse().unwrap();
        let b = &xtx_inv * xm.transpose() * &yv;
        let e = &yv - &xm * &b;
        let mut meat = DMatrix::zeros(k, k);
        for i in 0..n {
            let xi = xm.row(i).transpose();
            meat += &xi * xi.transpose() * e[i] * e[i];
        }
        let v = &xtx_inv * meat * &xtx_inv * (n as f64 / (n - k) as f64);
        (0..k).map(|j| v[(j, j)].sqrt()).collect()
    }

    #[test]
    fn singleton_clusters_reduce_to_hc1() {
        let (y, x) = random_design(1, 60, 3);
        let cl: Vec<u32> = (0..60).collect();
        let r = ols(&y, &x, &names(&["a", "b", "c"]), &cl).unwrap();
        let hc1 = hc1_oracle(&y, &x);
        // with G = n the CR1 scale G/(G-1) * (n-1)/(n-k) collapses to the HC1 scale n/(n-k)
        for (j, name) in ["a", "b", "c"].iter().enumerate() {
            assert_abs_diff_eq!(r.se_of(name), hc1[j], epsilon = 1e-12);
        }
    }

    #[test]
    fn two_by_two_did_is_difference_of_means() {
        let mut rng = substream(2, "ols_test", 1);
        let (mut y, mut g, mut t) = (vec![], vec![], vec![]);
        for i in 0..200 {
            let gi = (i % 2) as f64;
            let ti = ((i / 2) % 2) as f64;
            y.push(1.0 + 0.5 * gi + 0.3 * ti + 0.7 * gi * ti + rng.random::<f64>());
            g.push(gi);
            t.push(ti);
        }
        let gt: Vec<f64> = g.iter().zip(&t).map(|(a, b)| a * b).collect();
        let c = vec![1.0; y.len()];
        let cl: Vec<u32> = (0..y.len() as u32).collect();
        let r = ols(&y, &[c, g.clone(), t.clone(), gt], &names(&["c", "g", "t", "gt"]), &cl).unwrap();
        let mean = |gg: f64, tt: f64| {
            let v: Vec<f64> = (0..y.len()).filter(|&i| g[i] == gg && t[i] == tt).map(|i| y[i]).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let did = (mean(1.0, 1.0) - mean(1.0, 0.0)) - (mean(0.0, 1.0) - mean(0.0, 0.0));
        assert_abs_diff_eq!(r.coef_of("gt"), did, epsilon = 1e-10);
    }

    #[test]
    fn wald_estimand_for_binary_instrument() {
        let mut rng = substream(4, "ols_test", 2);
        let n = 400;
        let z: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
        let d: Vec<f64> = z.iter().map(|&zi| if rng.random::<f64>() < 0.2 + 0.5 * zi { 1.0 } else { 0.0 }).collect();
        let y: Vec<f64> = d.iter().map(|&di| 1.0 + 2.0 * di + rng.sample::<f64, _>(StandardNormal)).collect();
        let c = vec![1.0; n];
        let cl: Vec<u32> = (0..n as u32).map(|i| i / 2).collect();
        let r = tsls(
            &y,
            std::slice::from_ref(&d),
            &names(&["d"]),
            std::slice::from_ref(&z),
            &names(&["z"]),
            &[c],
            &names(&["c"]),
            &cl,
        )
        .unwrap();
        let m = |v: &[f64], zz: f64| {
            let s: Vec<f64> = (0..n).filter(|&i| z[i] == zz).map(|i| v[i]).collect();
            s.iter().sum::<f64>() / s.len() as f64
        };
        let wald = (m(&y, 1.0) - m(&y, 0.0)) / (m(&d, 1.0) - m(&d, 0.0));
        assert_abs_diff_eq!(r.coef_of("d"), wald, epsilon = 1e-10);
        assert!(r.first_stage_f.unwrap() > 10.0);
    }

    #[test]
    fn perfect_compliance_iv_equals_ols() {
        let (y, x) = random_design(5, 80, 2);
        let cl: Vec<u32> = (0..80).map(|i| i / 4).collect();
        let o = ols(&y, &x, &names(&["d", "w"]), &cl).unwrap();
        let iv = tsls(
            &y,
            &[x[0].clone()],
            &names(&["d"]),
            &[x[0].clone()],
            &names(&["z"]),
            &[x[1].clone()],
            &names(&["w"]),
            &cl,
        )
        .unwrap();
        assert_abs_diff_eq!(o.coef_of("d"), iv.coef_of("d"), epsilon = 1e-10);
        assert_abs_diff_eq!(o.se_of("d"), iv.se_of("d"), epsilon = 1e-10);
    }

    #[test]
    fn degenerate_instrument_is_rejected() {
        let (y, x) = random_design(6, 50, 2);
        let cl: Vec<u32> = (0..50).map(|i| i / 5).collect();
        let z = vec![0.0; 50];
        let err = tsls(&y, &[x[0].clone()], &names(&["d"]), &[z], &names(&["z"]), &[x[1].clone()], &names(&["w"]), &cl);
        assert!(err.is_err());
    }

    #[test]
    fn one_cluster_is_an_error() {
        let (y, x) = random_design(7, 20, 1);
        assert!(ols(&y, &x, &names(&["a"]), &[0; 20]).is_err());
    }

    proptest! {
        #[test]
        fn qr_matches_normal_equations(seed in 0u64..500, k in 1usize..6) {
            let (y, x) = random_design(seed, 40, k);
            let nm: Vec<String> = (0..k).map(|j| format!("x{j}")).collect();
            let cl: Vec<u32> = (0..40).map(|i| i / 4).collect();
            let r = ols(&y, &x, &nm, &cl).unwrap();
            let xm = DMatrix::from_fn(40, k, |i, j| x[j][i]);
            let b = (xm.transpose() * &xm).try_inverse().unwrap() * xm.transpose() * nalgebra::DVector::from_column_slice(&y);
            for j in 0..k {
                prop_assert!((r.coef_of(&nm[j]) - b[j]).abs() < 1e-9);
            }
        }
    }
}
