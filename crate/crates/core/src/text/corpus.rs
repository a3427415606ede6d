//! Tab-separated job and letter files and batch scoring.
//!
//! Jobs: `doc_id<TAB>text` with an optional third `skill` column before the
//! text (`doc_id<TAB>skill<TAB>text`) when per-skill fitting is wanted.
//! Letters: `bid_id<TAB>job_id<TAB>text`. One record per line, UTF-8; a
//! first line starting with `doc_id` / `bid_id` is treated as a header and
//! lines starting with `#` are ignored.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cosine_similarity, Document, Stopwords, TfidfModel};
use crate::fmt::sig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobRecord {
    pub doc_id: String,
    pub skill: Option<String>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LetterRecord {
    pub bid_id: String,
    pub job_id: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelScope {
    /// One IDF fitted over every job and letter.
    Global,
    /// A separate IDF per job skill category.
    PerSkill,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRow {
    pub bid_id: String,
    pub job_id: String,
    pub tailoring: Option<f64>,
    pub error: Option<String>,
}

fn records<R: BufRead>(input: R, header_key: &str) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line).to_string();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if i == 0 && line.split('\t').next() == Some(header_key) {
            continue;
        }
        out.push((i + 1, line));
    }
    Ok(out)
}

pub fn read_jobs<R: BufRead>(input: R, file: &str) -> Result<Vec<JobRecord>> {
    records(input, "doc_id")?
        .into_iter()
        .map(|(line_no, line)| {
            let parts: Vec<&str> = line.splitn(3, '\t').collect();
            match parts.as_slice() {
                [id, text] => Ok(JobRecord { doc_id: id.to_string(), skill: None, text: text.to_string() }),
                [id, skill, text] => {
                    Ok(JobRecord { doc_id: id.to_string(), skill: Some(skill.to_string()), text: text.to_string() })
                }
                _ => Err(Error::Schema {
                    file: file.to_string(),
                    message: format!("line {line_no}: expected doc_id<TAB>text"),
                }),
            }
        })
        .collect()
}

pub fn read_letters<R: BufRead>(input: R, file: &str) -> Result<Vec<LetterRecord>> {
    records(input, "bid_id")?
        .into_iter()
        .map(|(line_no, line)| {
            let parts: Vec<&str> = line.splitn(3, '\t').collect();
            match parts.as_slice() {
                [bid, job, text] => {
                    Ok(LetterRecord { bid_id: bid.to_string(), job_id: job.to_string(), text: text.to_string() })
                }
                _ => Err(Error::Schema {
                    file: file.to_string(),
                    message: format!("line {line_no}: expected bid_id<TAB>job_id<TAB>text"),
                }),
            }
        })
        .collect()
}

/// Scores every letter against its job. Letters that reference an unknown
/// job produce a row with `error` set and no score; the rest are unaffected.
pub fn score_dataset(
    jobs: &[JobRecord],
    letters: &[LetterRecord],
    scope: ModelScope,
    stopwords: &Stopwords,
) -> Result<Vec<ScoredRow>> {
    let job_docs: Vec<Document> =
        jobs.iter().map(|j| Document::new(j.doc_id.clone(), j.text.clone(), stopwords)).collect();
    let letter_docs: Vec<Document> =
        letters.iter().map(|l| Document::new(l.bid_id.clone(), l.text.clone(), stopwords)).collect();
    let mut job_index: HashMap<&str, usize> = HashMap::new();
    for (i, j) in jobs.iter().enumerate() {
        if job_index.insert(j.doc_id.as_str(), i).is_some() {
            return Err(Error::input(format!("duplicate job id {:?}", j.doc_id)));
        }
    }
    if letters.is_empty() {
        return Ok(Vec::new());
    }

    let group_of = |job: usize| -> String {
        match scope {
            ModelScope::Global => String::new(),
            ModelScope::PerSkill => jobs[job].skill.clone().unwrap_or_default(),
        }
    };
    let mut groups: BTreeMap<String, Vec<Document>> = BTreeMap::new();
    for (i, d) in job_docs.iter().enumerate() {
        groups.entry(group_of(i)).or_default().push(d.clone());
    }
    for (l, d) in letters.iter().zip(&letter_docs) {
        if let Some(&j) = job_index.get(l.job_id.as_str()) {
            groups.entry(group_of(j)).or_default().push(d.clone());
        }
    }
    let models: BTreeMap<String, TfidfModel> =
        groups.into_iter().map(|(k, corpus)| Ok((k, TfidfModel::fit(&corpus)?))).collect::<Result<_>>()?;

    Ok(letters
        .par_iter()
        .zip(letter_docs.par_iter())
        .map(|(l, doc)| match job_index.get(l.job_id.as_str()) {
            None => ScoredRow {
                bid_id: l.bid_id.clone(),
                job_id: l.job_id.clone(),
                tailoring: None,
                error: Some(format!("unknown job id {:?}", l.job_id)),
            },
            Some(&j) => {
                let model = &models[&group_of(j)];
                let score = cosine_similarity(&model.vectorize(&job_docs[j]), &model.vectorize(doc));
                ScoredRow { bid_id: l.bid_id.clone(), job_id: l.job_id.clone(), tailoring: Some(score), error: None }
            }
        })
        .collect())
}

/// Writes the scored rows that have a score as `bid_id,job_id,tailoring`.
pub fn write_scores<W: Write>(rows: &[ScoredRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bid_id", "job_id", "tailoring"])?;
    for r in rows {
        if let Some(s) = r.tailoring {
            w.write_record([r.bid_id.as_str(), r.job_id.as_str(), &sig(s, 10)])?;
        }
    }
    w.flush()?;
    Ok(())
}
