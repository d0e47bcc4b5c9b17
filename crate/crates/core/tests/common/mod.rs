//! Synthetic corpora and brute-force oracles shared by the integration
//! tests. The oracles recount statistics from raw document text and never
//! call into the index or ranking code.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use zebra_search::eval::{Judgment, RunEntry};
use zebra_search::{tokenize, Document};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn word(i: usize) -> String {
    format!("w{i}")
}

/// Zipf-distributed synthetic corpus.
pub struct SyntheticCorpus {
    pub vocab_size: usize,
    sampler: WeightedIndex<f64>,
}

impl SyntheticCorpus {
    pub fn new(vocab_size: usize) -> Self {
        let weights: Vec<f64> = (0..vocab_size).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        SyntheticCorpus {
            vocab_size,
            sampler: WeightedIndex::new(weights).unwrap(),
        }
    }

    pub fn sample_word(&self, rng: &mut impl Rng) -> usize {
        self.sampler.sample(rng)
    }

    pub fn text(&self, rng: &mut impl Rng, len: usize) -> String {
        (0..len)
            .map(|_| word(self.sample_word(rng)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// `n` documents with 3-word titles and bodies of `min_len..max_len`
    /// words. Roughly half are tagged rare.
    pub fn documents(
        &self,
        rng: &mut impl Rng,
        n: usize,
        min_len: usize,
        max_len: usize,
    ) -> Vec<Document> {
        (0..n)
            .map(|i| {
                let title = self.text(rng, 3);
                let len = rng.gen_range(min_len..max_len);
                let mut doc = Document::new(format!("doc{i:05}"), title, self.text(rng, len));
                doc.source = ["OMIM", "Orphanet", "GARD", "GeneReviews"][i % 4].to_string();
                doc.tags = if rng.gen_bool(0.5) {
                    vec!["rare".into()]
                } else {
                    vec!["genetic".into()]
                };
                doc
            })
            .collect()
    }
}

/// Term statistics recounted from raw document text.
pub struct OracleStats {
    pub doc_tf: HashMap<String, HashMap<String, u64>>,
    pub doc_len: HashMap<String, u64>,
    pub coll_tf: HashMap<String, u64>,
    pub coll_len: u64,
}

impl OracleStats {
    pub fn new(docs: &[Document]) -> Self {
        let mut doc_tf = HashMap::new();
        let mut doc_len = HashMap::new();
        let mut coll_tf: HashMap<String, u64> = HashMap::new();
        let mut coll_len = 0;
        for d in docs {
            let text = format!("{}\n{}", d.title, d.body);
            let tokens = tokenize(&text);
            let mut tf: HashMap<String, u64> = HashMap::new();
            for t in &tokens {
                *tf.entry(t.to_string()).or_default() += 1;
                *coll_tf.entry(t.to_string()).or_default() += 1;
            }
            coll_len += tokens.len() as u64;
            doc_len.insert(d.doc_id.clone(), tokens.len() as u64);
            doc_tf.insert(d.doc_id.clone(), tf);
        }
        OracleStats {
            doc_tf,
            doc_len,
            coll_tf,
            coll_len,
        }
    }

    pub fn tf(&self, doc: &str, term: &str) -> u64 {
        self.doc_tf[doc].get(term).copied().unwrap_or(0)
    }

    pub fn prob_jm(&self, doc: &str, term: &str, lambda: f64) -> f64 {
        let d = self.doc_len[doc] as f64;
        let c = self.coll_tf.get(term).copied().unwrap_or(0) as f64;
        (1.0 - lambda) * (self.tf(doc, term) as f64 / d) + lambda * (c / self.coll_len as f64)
    }

    pub fn prob_dirichlet(&self, doc: &str, term: &str, mu: f64) -> f64 {
        let d = self.doc_len[doc] as f64;
        let c = self.coll_tf.get(term).copied().unwrap_or(0) as f64;
        (self.tf(doc, term) as f64 + mu * c / self.coll_len as f64) / (d + mu)
    }

    /// Direct log product over query positions; `None` when a factor is 0.
    pub fn log_score(&self, doc: &str, terms: &[String], jm: Option<f64>, mu: f64) -> Option<f64> {
        let mut product_log = 0.0;
        for t in terms {
            let p = match jm {
                Some(lambda) => self.prob_jm(doc, t, lambda),
                None => self.prob_dirichlet(doc, t, mu),
            };
            if p == 0.0 {
                return None;
            }
            product_log += p.ln();
        }
        Some(product_log)
    }

    pub fn contains_any(&self, doc: &str, terms: &[String]) -> bool {
        terms.iter().any(|t| self.tf(doc, t) > 0)
    }
}

/// Literal re-implementation of P@k: walk k slots, empty slots count as
/// misses.
pub fn oracle_precision(ranked: &[String], relevant: &HashSet<String>, k: usize) -> f64 {
    let mut hits = 0u32;
    for slot in 0..k {
        if let Some(d) = ranked.get(slot) {
            if relevant.contains(d) {
                hits += 1;
            }
        }
    }
    f64::from(hits) / k as f64
}

pub fn oracle_rr(ranked: &[String], relevant: &HashSet<String>) -> f64 {
    for (i, d) in ranked.iter().enumerate() {
        if relevant.contains(d) {
            return 1.0 / (i + 1) as f64;
        }
    }
    0.0
}

/// Random valid run and judgments: up to `max_q` queries, depth up to
/// `max_depth`, documents drawn from a pool of 40.
pub fn random_instance(
    rng: &mut impl Rng,
    max_q: usize,
    max_depth: usize,
) -> (Vec<String>, Vec<RunEntry>, Vec<Judgment>) {
    let n_q = rng.gen_range(1..=max_q);
    let queries: Vec<String> = (0..n_q).map(|i| format!("q{i}")).collect();
    let pool: Vec<String> = (0..40).map(|i| format!("d{i}")).collect();
    let mut run = Vec::new();
    let mut judgments = Vec::new();
    for q in &queries {
        let depth = rng.gen_range(0..=max_depth);
        let docs: Vec<&String> = pool.choose_multiple(rng, depth).collect();
        let mut score = 0.0;
        for (i, d) in docs.iter().enumerate() {
            score -= rng.gen_range(0.0..1.0);
            run.push(RunEntry {
                query_id: q.clone(),
                doc_id: (*d).clone(),
                rank: i + 1,
                score,
                system_name: "sys".into(),
            });
        }
        let judged = rng.gen_range(0..15);
        for d in pool.choose_multiple(rng, judged) {
            judgments.push(Judgment {
                query_id: q.clone(),
                doc_id: d.clone(),
                relevant: rng.gen_bool(0.4),
            });
        }
    }
    run.shuffle(rng);
    (queries, run, judgments)
}
