//! Cover-letter tailoring: TF-IDF vectors and their cosine similarity.
//!
//! Documents are lowercased, split on runs of non-alphanumeric characters,
//! stripped of stopwords and of tokens shorter than two characters. Term
//! frequency is the raw count; IDF is `ln(N / (1 + n_w))` clamped at zero so
//! that every weight, and therefore every similarity, is nonnegative.

mod corpus;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use corpus::{
    read_jobs, read_letters, score_dataset, write_scores, JobRecord, LetterRecord, ModelScope, ScoredRow,
};

const ENGLISH: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// The bundled English list.
    pub fn english() -> Self {
        Self::parse(ENGLISH)
    }

    /// One word per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn empty() -> Self {
        Self(HashSet::new())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub raw_text: String,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, raw_text: impl Into<String>, stopwords: &Stopwords) -> Self {
        let raw_text = raw_text.into();
        let tokens = tokenize(&raw_text, stopwords);
        Self { doc_id: doc_id.into(), raw_text, tokens }
    }
}

fn tokenize(text: &str, stopwords: &Stopwords) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2 && !stopwords.contains(t))
        .map(str::to_string)
        .collect()
}

/// Normalizes `raw_text` into a token list.
pub fn preprocess(raw_text: &str, stopwords: &Stopwords) -> Document {
    Document::new("", raw_text, stopwords)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    /// Term to column index; indices follow lexicographic term order.
    pub vocab: BTreeMap<String, usize>,
    /// Documents containing each term, by column index.
    pub doc_freq: Vec<usize>,
    pub n_docs: usize,
    /// `ln(N / (1 + n_w))` before clamping.
    pub raw_idf: Vec<f64>,
    /// Clamped weights actually used, `max(raw_idf, 0)`.
    pub idf: Vec<f64>,
}

impl TfidfModel {
    pub fn fit(corpus: &[Document]) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::input("cannot fit TF-IDF on an empty corpus"));
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in corpus {
            let distinct: BTreeSet<&str> = doc.tokens.iter().map(String::as_str).collect();
            for t in distinct {
                *counts.entry(t).or_default() += 1;
            }
        }
        let n = corpus.len() as f64;
        let mut vocab = BTreeMap::new();
        let mut doc_freq = Vec::with_capacity(counts.len());
        let mut raw_idf = Vec::with_capacity(counts.len());
        for (i, (term, df)) in counts.into_iter().enumerate() {
            vocab.insert(term.to_string(), i);
            doc_freq.push(df);
            raw_idf.push((n / (1.0 + df as f64)).ln());
        }
        let idf = raw_idf.iter().map(|v| v.max(0.0)).collect();
        Ok(Self { vocab, doc_freq, n_docs: corpus.len(), raw_idf, idf })
    }

    pub fn idf_of(&self, term: &str) -> Option<f64> {
        self.vocab.get(term).map(|&i| self.idf[i])
    }

    pub fn vectorize(&self, doc: &Document) -> WeightVector {
        let mut tf: BTreeMap<usize, u32> = BTreeMap::new();
        for t in &doc.tokens {
            if let Some(&i) = self.vocab.get(t) {
                *tf.entry(i).or_default() += 1;
            }
        }
        WeightVector(tf.into_iter().map(|(i, c)| (i, c as f64 * self.idf[i])).collect())
    }
}

pub fn fit_tfidf(corpus: &[Document]) -> Result<TfidfModel> {
    TfidfModel::fit(corpus)
}

pub fn vectorize(model: &TfidfModel, doc: &Document) -> WeightVector {
    model.vectorize(doc)
}

/// Sparse TF-IDF weights sorted by column index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WeightVector(pub Vec<(usize, f64)>);

impl WeightVector {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &WeightVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        let (a, b) = (&self.0, &other.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

/// Cosine of the angle between two weight vectors; 0 when either is zero.
pub fn cosine_similarity(a: &WeightVector, b: &WeightVector) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).clamp(0.0, 1.0)
}

pub fn tailoring_score(model: &TfidfModel, job_text: &str, letter_text: &str, stopwords: &Stopwords) -> f64 {
    let job = preprocess(job_text, stopwords);
    let letter = preprocess(letter_text, stopwords);
    cosine_similarity(&model.vectorize(&job), &model.vectorize(&letter))
}
