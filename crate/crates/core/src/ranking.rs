//! Query-likelihood ranking with Jelinek-Mercer or Dirichlet smoothing.
//!
//! A document's score is the log of the product, over query token
//! positions, of the smoothed probability of that token under the
//! document's language model. |C| is the total number of token occurrences
//! in the collection, so each document model is a proper distribution over
//! the vocabulary.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, TAG_RARE};
use crate::error::{Error, Result};
use crate::index::{DocNum, Index};

/// Score assigned when some query factor is exactly zero. Sorts below every
/// finite score.
pub const UNMATCHABLE: f64 = f64::NEG_INFINITY;

pub const DEFAULT_LAMBDA: f64 = 0.9;
pub const DEFAULT_MU: f64 = 2500.0;
pub const DEFAULT_TOP_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingModel {
    JelinekMercer,
    Dirichlet,
}

impl FromStr for SmoothingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jm" | "jelinek_mercer" | "jelinek-mercer" => Ok(SmoothingModel::JelinekMercer),
            "dirichlet" | "dir" => Ok(SmoothingModel::Dirichlet),
            other => Err(Error::InvalidParams(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFilter {
    #[default]
    All,
    /// Only documents tagged `rare`.
    RareOnly,
}

impl FromStr for CorpusFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(CorpusFilter::All),
            "rare" | "rare_only" => Ok(CorpusFilter::RareOnly),
            other => Err(Error::InvalidParams(format!(
                "unknown corpus filter {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingParams {
    pub model: SmoothingModel,
    pub lambda: f64,
    pub mu: f64,
    pub top_n: usize,
    pub corpus_filter: CorpusFilter,
}

impl Default for RankingParams {
    fn default() -> Self {
        RankingParams {
            model: SmoothingModel::Dirichlet,
            lambda: DEFAULT_LAMBDA,
            mu: DEFAULT_MU,
            top_n: DEFAULT_TOP_N,
            corpus_filter: CorpusFilter::All,
        }
    }
}

impl RankingParams {
    pub fn jelinek_mercer(lambda: f64) -> Self {
        RankingParams {
            model: SmoothingModel::JelinekMercer,
            lambda,
            ..Default::default()
        }
    }

    pub fn dirichlet(mu: f64) -> Self {
        RankingParams {
            model: SmoothingModel::Dirichlet,
            mu,
            ..Default::default()
        }
    }

    pub fn with_top_n(mut self, top_n: usize) -> Self {
        self.top_n = top_n;
        self
    }

    pub fn with_filter(mut self, filter: CorpusFilter) -> Self {
        self.corpus_filter = filter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidParams(format!(
                "lambda must be in [0, 1], got {}",
                self.lambda
            )));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        if self.top_n == 0 {
            return Err(Error::InvalidParams("top_n must be at least 1".into()));
        }
        Ok(())
    }

    fn admits(&self, index: &Index, doc: DocNum) -> bool {
        match self.corpus_filter {
            CorpusFilter::All => true,
            CorpusFilter::RareOnly => index.doc(doc).has_tag(TAG_RARE),
        }
    }
}

/// Provenance of a query.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceTag {
    Hlj,
    Ojrd,
    Bmj,
    Other(String),
}

impl FromStr for SourceTag {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "HLJ" => SourceTag::Hlj,
            "OJRD" => SourceTag::Ojrd,
            "BMJ" => SourceTag::Bmj,
            other => SourceTag::Other(other.to_string()),
        })
    }
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceTag::Hlj => f.write_str("HLJ"),
            SourceTag::Ojrd => f.write_str("OJRD"),
            SourceTag::Bmj => f.write_str("BMJ"),
            SourceTag::Other(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub query_id: Option<String>,
    pub text: String,
    pub source_tag: Option<SourceTag>,
}

impl Query {
    pub fn new(text: impl Into<String>) -> Self {
        Query {
            query_id: None,
            text: text.into(),
            source_tag: None,
        }
    }

    pub fn with_id(id: impl Into<String>, text: impl Into<String>) -> Self {
        Query {
            query_id: Some(id.into()),
            text: text.into(),
            source_tag: None,
        }
    }

    pub fn terms(&self) -> Vec<String> {
        tokenize(&self.text)
            .into_iter()
            .map(|t| t.into_string())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub doc_id: String,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub query_id: Option<String>,
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.doc_id.as_str())
    }

    /// Keeps the first `k` entries.
    pub fn truncated(&self, k: usize) -> RankedList {
        RankedList {
            query_id: self.query_id.clone(),
            entries: self.entries.iter().take(k).cloned().collect(),
        }
    }

    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut seen = std::collections::HashSet::new();
        for (i, e) in self.entries.iter().enumerate() {
            if e.rank != i + 1 {
                return Err(format!("entry {i} has rank {}", e.rank));
            }
            if !seen.insert(e.doc_id.as_str()) {
                return Err(format!("duplicate doc {:?}", e.doc_id));
            }
            if i > 0 && self.entries[i - 1].score < e.score {
                return Err(format!("score increases at rank {}", e.rank));
            }
        }
        Ok(())
    }
}

/// Jelinek-Mercer smoothed term probability from raw statistics:
/// `(1 - lambda) * tf / doc_len + lambda * cq / collection_len`.
///
/// An empty document contributes no document-model mass.
pub fn jelinek_mercer_prob(
    tf: u32,
    doc_len: u32,
    cq: u64,
    collection_len: u64,
    lambda: f64,
) -> f64 {
    let doc_part = if doc_len == 0 {
        0.0
    } else {
        tf as f64 / doc_len as f64
    };
    let coll_part = if collection_len == 0 {
        0.0
    } else {
        cq as f64 / collection_len as f64
    };
    (1.0 - lambda) * doc_part + lambda * coll_part
}

/// Dirichlet smoothed term probability from raw statistics:
/// `(tf + mu * cq / collection_len) / (doc_len + mu)`.
pub fn dirichlet_prob(tf: u32, doc_len: u32, cq: u64, collection_len: u64, mu: f64) -> f64 {
    let coll_part = if collection_len == 0 {
        0.0
    } else {
        cq as f64 / collection_len as f64
    };
    (tf as f64 + mu * coll_part) / (doc_len as f64 + mu)
}

fn smoothed(params: &RankingParams, tf: u32, doc_len: u32, cq: u64, collection_len: u64) -> f64 {
    match params.model {
        SmoothingModel::JelinekMercer => {
            jelinek_mercer_prob(tf, doc_len, cq, collection_len, params.lambda)
        }
        SmoothingModel::Dirichlet => dirichlet_prob(tf, doc_len, cq, collection_len, params.mu),
    }
}

fn resolve_doc(index: &Index, doc_id: &str) -> Result<DocNum> {
    index
        .doc_num(doc_id)
        .ok_or_else(|| Error::UnknownDoc(doc_id.to_string()))
}

/// p(term | doc) under Jelinek-Mercer smoothing.
pub fn term_prob_jm(term: &str, doc_id: &str, index: &Index, lambda: f64) -> Result<f64> {
    let n = resolve_doc(index, doc_id)?;
    Ok(jelinek_mercer_prob(
        index.term_frequency(term, n),
        index.doc_length(n),
        index.collection_tf(term),
        index.collection_term_count(),
        lambda,
    ))
}

/// p(term | doc) under Dirichlet smoothing.
pub fn term_prob_dirichlet(term: &str, doc_id: &str, index: &Index, mu: f64) -> Result<f64> {
    let n = resolve_doc(index, doc_id)?;
    Ok(dirichlet_prob(
        index.term_frequency(term, n),
        index.doc_length(n),
        index.collection_tf(term),
        index.collection_term_count(),
        mu,
    ))
}

/// Sums log factors over query positions; any zero factor makes the
/// document unmatchable.
fn log_likelihood(factors: impl Iterator<Item = f64>) -> f64 {
    let mut total = 0.0;
    for p in factors {
        if p <= 0.0 {
            return UNMATCHABLE;
        }
        total += p.ln();
    }
    total
}

/// Log query likelihood of one document.
pub fn score_document(
    query: &Query,
    doc_id: &str,
    index: &Index,
    params: &RankingParams,
) -> Result<f64> {
    let terms = query.terms();
    if terms.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let n = resolve_doc(index, doc_id)?;
    let doc_len = index.doc_length(n);
    let coll = index.collection_term_count();
    Ok(log_likelihood(terms.iter().map(|t| {
        smoothed(
            params,
            index.term_frequency(t, n),
            doc_len,
            index.collection_tf(t),
            coll,
        )
    })))
}

/// Orders by score descending, then doc_id ascending.
pub fn compare_hits(a: (f64, &str), b: (f64, &str)) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
}

/// Ranks documents containing at least one query term.
pub fn search(index: &Index, query: &Query, params: &RankingParams) -> Result<RankedList> {
    params.validate()?;
    let terms = query.terms();
    if terms.is_empty() {
        return Err(Error::EmptyQuery);
    }

    // Distinct terms in first-seen order; `positions` maps each query
    // position to its distinct slot.
    let mut distinct: Vec<&str> = Vec::new();
    let mut positions = Vec::with_capacity(terms.len());
    for t in &terms {
        let slot = match distinct.iter().position(|d| *d == t) {
            Some(s) => s,
            None => {
                distinct.push(t);
                distinct.len() - 1
            }
        };
        positions.push(slot);
    }
    let width = distinct.len();
    let collection_tfs: Vec<u64> = distinct.iter().map(|t| index.collection_tf(t)).collect();

    const NONE: u32 = u32::MAX;
    let mut slot_of_doc = vec![NONE; index.doc_count()];
    let mut candidates: Vec<DocNum> = Vec::new();
    let mut tfs: Vec<u32> = Vec::new();
    for (j, term) in distinct.iter().enumerate() {
        for p in index.postings(term) {
            let mut c = slot_of_doc[p.doc as usize];
            if c == NONE {
                if !params.admits(index, p.doc) {
                    continue;
                }
                c = candidates.len() as u32;
                slot_of_doc[p.doc as usize] = c;
                candidates.push(p.doc);
                tfs.extend(std::iter::repeat_n(0, width));
            }
            tfs[c as usize * width + j] = p.tf;
        }
    }

    let coll = index.collection_term_count();
    let mut scored: Vec<(f64, DocNum)> = candidates
        .iter()
        .enumerate()
        .map(|(c, &doc)| {
            let row = &tfs[c * width..(c + 1) * width];
            let doc_len = index.doc_length(doc);
            let score = log_likelihood(
                positions
                    .iter()
                    .map(|&j| smoothed(params, row[j], doc_len, collection_tfs[j], coll)),
            );
            (score, doc)
        })
        .collect();

    let by_rank = |a: &(f64, DocNum), b: &(f64, DocNum)| {
        compare_hits((a.0, &index.doc(a.1).doc_id), (b.0, &index.doc(b.1).doc_id))
    };
    if scored.len() > params.top_n {
        scored.select_nth_unstable_by(params.top_n - 1, by_rank);
        scored.truncate(params.top_n);
    }
    scored.sort_unstable_by(by_rank);

    Ok(RankedList {
        query_id: query.query_id.clone(),
        entries: scored
            .into_iter()
            .enumerate()
            .map(|(i, (score, doc))| RankedEntry {
                doc_id: index.doc(doc).doc_id.clone(),
                score,
                rank: i + 1,
            })
            .collect(),
    })
}

/// Documents carrying `concept_id`, in doc_id order, as a ranked list with
/// uniform score 0.
pub fn search_concept(
    index: &Index,
    concept_id: &str,
    params: &RankingParams,
) -> Result<RankedList> {
    params.validate()?;
    let concept_id = concept_id.trim();
    if concept_id.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let entries = index
        .concept_doc_nums(concept_id)
        .iter()
        .filter(|&&n| params.admits(index, n))
        .take(params.top_n)
        .enumerate()
        .map(|(i, &n)| RankedEntry {
            doc_id: index.doc(n).doc_id.clone(),
            score: 0.0,
            rank: i + 1,
        })
        .collect();
    Ok(RankedList {
        query_id: None,
        entries,
    })
}
