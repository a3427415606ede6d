//! Pre/post curve tables behind the three simulation figures.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrate::{hire_prob_ex_ante, hire_prob_ex_ante_given_q, hire_prob_given_q, IntegrationConfig};
use super::ModelParams;
use crate::fmt::sig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    CoverLetterH,
    ProductivityQ,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::CoverLetterH => "cover_letter_h",
            Axis::ProductivityQ => "productivity_q",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Pooled,
    Treated,
    Control,
    ExAnte,
}

impl Group {
    pub fn as_str(&self) -> &'static str {
        match self {
            Group::Pooled => "pooled",
            Group::Treated => "treated",
            Group::Control => "control",
            Group::ExAnte => "ex_ante",
        }
    }
}

/// Evenly spaced grid `min, min + step, ...` up to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        let g = Self { min, max, step };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.step.is_finite()) {
            return Err(Error::input("grid bounds must be finite"));
        }
        if self.min >= self.max || self.step <= 0.0 {
            return Err(Error::input(format!(
                "empty grid {}:{}:{} (need min < max and step > 0)",
                self.min, self.max, self.step
            )));
        }
        Ok(())
    }

    /// Parses `min:max:step`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::input(format!("grid must be min:max:step, got {s:?}")));
        }
        let num =
            |t: &str| t.trim().parse::<f64>().map_err(|_| Error::input(format!("bad grid number {t:?} in {s:?}")));
        Self::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.min + i as f64 * self.step).collect()
    }

    /// Default letter-quality grid.
    pub fn h_default() -> Self {
        Self { min: -4.0, max: 4.0, step: 0.05 }
    }

    /// Default productivity grid.
    pub fn q_default() -> Self {
        Self { min: -3.0, max: 3.0, step: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub x: f64,
    pub pre_value: f64,
    pub post_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub axis: Axis,
    pub group: Group,
    pub rows: Vec<CurveRow>,
}

impl CurveTable {
    pub fn write_rows<W: Write>(&self, out: &mut csv::Writer<W>) -> Result<()> {
        for row in &self.rows {
            for (regime, value) in [("pre", row.pre_value), ("post", row.post_value)] {
                out.write_record([self.axis.as_str(), &sig(row.x, 10), self.group.as_str(), regime, &sig(value, 10)])?;
            }
        }
        Ok(())
    }

    /// `post - pre` at every grid point.
    pub fn differences(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.x, r.post_value - r.pre_value)).collect()
    }
}

pub const CSV_HEADER: [&str; 5] = ["axis", "x", "group", "regime", "value"];

/// Writes one or more tables to a single CSV with the `axis,x,group,regime,value` header.
pub fn write_csv<W: Write>(tables: &[&CurveTable], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for t in tables {
        t.write_rows(&mut w)?;
    }
    w.flush()?;
    Ok(())
}

/// Everything needed to draw the three figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figures {
    /// Ex-ante hiring probability against letter quality.
    pub fig5: CurveTable,
    /// Hiring probability against productivity, workers with access.
    pub fig6_treated: CurveTable,
    /// Hiring probability against productivity, workers without access.
    pub fig6_control: CurveTable,
    /// Hiring probability against productivity before access is known.
    pub fig7: CurveTable,
}

/// Evaluates every figure quantity before (A = 0) and after (A = `params.a`)
/// the tool on the given grids. Grid point `i` of each figure uses substream
/// `i`, shared by its pre and post evaluations.
pub fn figure_curves(params: &ModelParams, h_grid: &Grid, q_grid: &Grid, cfg: &IntegrationConfig) -> Result<Figures> {
    params.validate()?;
    cfg.validate()?;
    h_grid.validate()?;
    q_grid.validate()?;
    let pre = params.with_a(0.0);
    let a = params.a;

    let hs = h_grid.points();
    let fig5 = hs
        .par_iter()
        .enumerate()
        .map(|(i, &h)| {
            let c = cfg.at(i as u64);
            Ok(CurveRow {
                x: h,
                pre_value: hire_prob_ex_ante(h, &pre, &c)?,
                post_value: hire_prob_ex_ante(h, params, &c)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let qs = q_grid.points();
    let q_rows = qs
        .par_iter()
        .enumerate()
        .map(|(i, &q)| {
            let c = cfg.at(i as u64);
            let before = hire_prob_given_q(q, false, 0.0, params, &c)?;
            let treated = CurveRow { x: q, pre_value: before, post_value: hire_prob_given_q(q, true, a, params, &c)? };
            let control = CurveRow { x: q, pre_value: before, post_value: hire_prob_given_q(q, false, a, params, &c)? };
            let ex_ante = CurveRow {
                x: q,
                pre_value: hire_prob_ex_ante_given_q(q, &pre, &c)?,
                post_value: hire_prob_ex_ante_given_q(q, params, &c)?,
            };
            Ok((treated, control, ex_ante))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut treated = Vec::with_capacity(q_rows.len());
    let mut control = Vec::with_capacity(q_rows.len());
    let mut ex_ante = Vec::with_capacity(q_rows.len());
    for (t, c, e) in q_rows {
        treated.push(t);
        control.push(c);
        ex_ante.push(e);
    }
    Ok(Figures {
        fig5: CurveTable { axis: Axis::CoverLetterH, group: Group::Pooled, rows: fig5 },
        fig6_treated: CurveTable { axis: Axis::ProductivityQ, group: Group::Treated, rows: treated },
        fig6_control: CurveTable { axis: Axis::ProductivityQ, group: Group::Control, rows: control },
        fig7: CurveTable { axis: Axis::ProductivityQ, group: Group::ExAnte, rows: ex_ante },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> IntegrationConfig {
        IntegrationConfig::monte_carlo(2000, 3)
    }

    #[test]
    fn grid_parsing_and_points() {
        let g = Grid::parse("-1:1:0.5").unwrap();
        assert_eq!(g.points(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(Grid::q_default().points().len(), 121);
        assert_eq!(Grid::h_default().points().len(), 161);
        assert!(Grid::parse("1:1:0.1").is_err());
        assert!(Grid::parse("0:1:0").is_err());
        assert!(Grid::parse("0:1").is_err());
        assert!(Grid::parse("a:1:0.1").is_err());
    }

    #[test]
    fn one_point_grid_gives_one_row() {
        let g = Grid::new(0.0, 0.01, 1.0).unwrap();
        let f = figure_curves(&ModelParams::figure_note(), &g, &g, &small_cfg()).unwrap();
        assert_eq!(f.fig5.rows.len(), 1);
        assert_eq!(f.fig7.rows.len(), 1);
    }

    #[test]
    fn tables_are_bit_reproducible() {
        let g = Grid::new(-1.0, 1.0, 0.5).unwrap();
        let a = figure_curves(&ModelParams::figure_note(), &g, &g, &small_cfg()).unwrap();
        let b = figure_curves(&ModelParams::figure_note(), &g, &g, &small_cfg()).unwrap();
        let mut ca = Vec::new();
        let mut cb = Vec::new();
        write_csv(&[&a.fig5, &a.fig6_treated], &mut ca).unwrap();
        write_csv(&[&b.fig5, &b.fig6_treated], &mut cb).unwrap();
        assert_eq!(ca, cb);
        let text = String::from_utf8(ca).unwrap();
        assert!(text.starts_with("axis,x,group,regime,value\n"));
        assert!(text.contains("cover_letter_h,-1.000000000,pooled,pre,"));
    }

    #[test]
    fn null_tool_gives_identical_curves() {
        let g = Grid::new(-1.0, 1.0, 1.0).unwrap();
        let pr = ModelParams::figure_note().with_a(0.0);
        let f = figure_curves(&pr, &g, &g, &small_cfg()).unwrap();
        for t in [&f.fig5, &f.fig6_treated, &f.fig6_control, &f.fig7] {
            for r in &t.rows {
                assert_eq!(r.pre_value, r.post_value);
            }
        }
    }

    #[test]
    fn empty_grid_rejected() {
        let bad = Grid { min: 1.0, max: 0.0, step: 0.1 };
        let ok = Grid::q_default();
        assert!(figure_curves(&ModelParams::figure_note(), &bad, &ok, &small_cfg()).is_err());
    }
}
