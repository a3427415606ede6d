use rayon::prelude::*;

use super::panel::PanelMatrix;
use crate::{Error, Result};

pub const TOLERANCE: f64 = 1e-10;
pub const MAX_SWEEPS: usize = 200;

/// Removes group means of every dimension from `col` by alternating projections.
/// Returns the number of sweeps used.
pub fn demean_column(col: &mut [f64], groups: &[Vec<u32>]) -> Result<usize> {
    let sizes: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let n = g.iter().map(|&i| i as usize + 1).max().unwrap_or(0);
            let mut c = vec![0.0; n];
            for &i in g {
                c[i as usize] += 1.0;
            }
            c
        })
        .collect();
    let mut sums: Vec<Vec<f64>> = sizes.iter().map(|s| vec![0.0; s.len()]).collect();
    for sweep in 1..=MAX_SWEEPS {
        let mut change: f64 = 0.0;
        for ((g, size), sum) in groups.iter().zip(&sizes).zip(sums.iter_mut()) {
            sum.iter_mut().for_each(|s| *s = 0.0);
            for (&i, v) in g.iter().zip(col.iter()) {
                sum[i as usize] += v;
            }
            for (s, n) in sum.iter_mut().zip(size) {
                *s /= n;
                change = change.max(s.abs());
            }
            for (&i, v) in g.iter().zip(col.iter_mut()) {
                *v -= sum[i as usize];
            }
        }
        if change < TOLERANCE || groups.len() == 1 {
            return Ok(sweep);
        }
    }
    Err(Error::numerical(format!(
        "fixed-effect demeaning did not converge in {MAX_SWEEPS} sweeps (tolerance {TOLERANCE:e})"
    )))
}

/// Partials the fixed effects out of the outcome and every regressor.
pub fn within_transform(panel: &PanelMatrix) -> Result<PanelMatrix> {
    if panel.fe.is_empty() {
        return Err(Error::input("within transform needs at least one fixed-effect dimension"));
    }
    let mut out = panel.clone();
    demean_column(&mut out.y, &panel.fe)?;
    out.x.par_iter_mut().map(|c| demean_column(c, &panel.fe).map(|_| ())).collect::<Result<Vec<()>>>()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::ols::qr_residuals;
    use crate::rng::substream;
    use proptest::prelude::*;
    use rand::Rng;

    fn panel(y: Vec<f64>, fe: Vec<Vec<u32>>) -> PanelMatrix {
        let n = y.len();
        PanelMatrix {
            y,
            x: vec![],
            names: vec![],
            fe,
            clusters: vec![0; n],
            rows: (0..n).collect(),
            dropped_singletons: 0,
            excluded: 0,
        }
    }

    #[test]
    fn one_dimension_is_one_pass() {
        let y = vec![1.0, 2.0, 3.0, 10.0, 20.0];
        let g = vec![vec![0, 0, 0, 1, 1]];
        let mut c = y.clone();
        assert_eq!(demean_column(&mut c, &g).unwrap(), 1);
        assert_eq!(c, vec![-1.0, 0.0, 1.0, -5.0, 5.0]);
        let again = within_transform(&panel(c.clone(), g)).unwrap();
        assert_eq!(again.y, c);
    }

    #[test]
    fn balanced_two_way_matches_double_demeaning() {
        let (n_i, n_t) = (6, 5);
        let mut rng = substream(3, "within_test", 0);
        let y: Vec<f64> = (0..n_i * n_t).map(|_| rng.random::<f64>() * 4.0).collect();
        let wi: Vec<u32> = (0..n_i * n_t).map(|r| (r / n_t) as u32).collect();
        let ti: Vec<u32> = (0..n_i * n_t).map(|r| (r % n_t) as u32).collect();
        let out = within_transform(&panel(y.clone(), vec![wi, ti])).unwrap();
        let grand = y.iter().sum::<f64>() / y.len() as f64;
        for i in 0..n_i {
            let row_mean = (0..n_t).map(|t| y[i * n_t + t]).sum::<f64>() / n_t as f64;
            for t in 0..n_t {
                let col_mean = (0..n_i).map(|j| y[j * n_t + t]).sum::<f64>() / n_i as f64;
                let expected = y[i * n_t + t] - row_mean - col_mean + grand;
                assert!((out.y[i * n_t + t] - expected).abs() < 1e-10);
            }
        }
    }

    fn dummy_projection_residuals(y: &[f64], fe: &[Vec<u32>]) -> Vec<f64> {
        let n = y.len();
        let mut cols = Vec::new();
        for (d, g) in fe.iter().enumerate() {
            let levels = g.iter().max().map_or(0, |&m| m as usize + 1);
            // drop one level of every dimension after the first to avoid the dummy trap
            for l in (d > 0) as usize..levels {
                cols.push(g.iter().map(|&i| if i as usize == l { 1.0 } else { 0.0 }).collect::<Vec<f64>>());
            }
        }
        let r = qr_residuals(y, &cols).unwrap();
        assert_eq!(r.len(), n);
        r
    }

    #[test]
    fn unbalanced_panel_matches_dummy_projection() {
        let mut rng = substream(5, "within_test", 1);
        let (mut wi, mut ti, mut y) = (vec![], vec![], vec![]);
        for i in 0..50u32 {
            for t in 0..8u32 {
                if rng.random::<f64>() < 0.7 || t == i % 8 {
                    wi.push(i);
                    ti.push(t);
                    y.push(i as f64 * 0.1 + t as f64 * 0.3 + rng.random::<f64>());
                }
            }
        }
        let fe = vec![wi, ti];
        let out = within_transform(&panel(y.clone(), fe.clone())).unwrap();
        let oracle = dummy_projection_residuals(&y, &fe);
        for (a, b) in out.y.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    proptest! {
        #[test]
        fn output_is_orthogonal_to_groups(seed in 0u64..1000) {
            let mut rng = substream(seed, "within_prop", 0);
            let n = 120;
            let wi: Vec<u32> = (0..n).map(|_| rng.random_range(0..15)).collect();
            let ti: Vec<u32> = (0..n).map(|_| rng.random_range(0..6)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let fe: Vec<Vec<u32>> = vec![super::super::tests_support::dense(&wi), super::super::tests_support::dense(&ti)];
            let out = within_transform(&panel(y, fe.clone())).unwrap();
            for g in &fe {
                let mut sums = std::collections::HashMap::<u32, f64>::new();
                for (&i, v) in g.iter().zip(&out.y) {
                    *sums.entry(i).or_default() += v;
                }
                for s in sums.values() {
                    prop_assert!(s.abs() < 1e-8);
                }
            }
        }
    }
}
