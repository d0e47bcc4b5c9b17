//! Inverted index and the collection statistics consumed by the ranking
//! formulas.
//!
//! Documents are addressed internally by their position in the input corpus
//! ([`DocNum`]). Terms are stored in sorted order so that the in-memory
//! layout, and therefore the saved file, is a pure function of the corpus.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Document};
use crate::error::{Error, Result};

/// Position of a document in the indexed corpus.
pub type DocNum = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: DocNum,
    /// Occurrences of the term in the document; never zero.
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermEntry {
    pub term: String,
    /// Total occurrences of the term across the collection.
    pub collection_tf: u64,
    /// Sorted by document number.
    pub postings: Vec<Posting>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexStats {
    pub doc_count: usize,
    pub collection_term_count: u64,
    pub vocabulary_size: usize,
}

#[derive(Debug, Clone)]
pub struct Index {
    docs: Vec<Document>,
    doc_lengths: Vec<u32>,
    /// Sorted by term.
    terms: Vec<TermEntry>,
    collection_term_count: u64,
    /// Concept id -> documents carrying it, sorted by doc_id.
    concept_index: BTreeMap<String, Vec<DocNum>>,
    term_lookup: HashMap<String, u32>,
    doc_lookup: HashMap<String, DocNum>,
}

impl PartialEq for Index {
    fn eq(&self, other: &Self) -> bool {
        self.docs == other.docs
            && self.doc_lengths == other.doc_lengths
            && self.terms == other.terms
            && self.collection_term_count == other.collection_term_count
            && self.concept_index == other.concept_index
    }
}

/// Tokens of a document as indexed: title followed by body, one field.
pub fn document_tokens(doc: &Document) -> Vec<String> {
    tokenize(&doc.title)
        .into_iter()
        .chain(tokenize(&doc.body))
        .map(|t| t.into_string())
        .collect()
}

/// Builds the index. Fails on an empty corpus or duplicate doc ids.
pub fn build_index(docs: Vec<Document>) -> Result<Index> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if docs.len() > DocNum::MAX as usize {
        return Err(Error::InvalidParams(format!(
            "corpus too large: {} documents",
            docs.len()
        )));
    }

    let mut doc_lookup = HashMap::with_capacity(docs.len());
    for (n, doc) in docs.iter().enumerate() {
        if doc_lookup.insert(doc.doc_id.clone(), n as DocNum).is_some() {
            return Err(Error::DuplicateDocId(doc.doc_id.clone()));
        }
    }

    // Term ids are assigned in first-seen order here and remapped to sorted
    // order below.
    let mut provisional: HashMap<String, usize> = HashMap::new();
    let mut postings: Vec<Vec<Posting>> = Vec::new();
    let mut doc_lengths = Vec::with_capacity(docs.len());
    let mut collection_term_count = 0u64;
    let mut doc_tf: HashMap<usize, u32> = HashMap::new();

    for (n, doc) in docs.iter().enumerate() {
        let tokens = document_tokens(doc);
        doc_lengths.push(tokens.len() as u32);
        collection_term_count += tokens.len() as u64;
        doc_tf.clear();
        for token in tokens {
            let next = provisional.len();
            let id = *provisional.entry(token).or_insert_with(|| {
                postings.push(Vec::new());
                next
            });
            *doc_tf.entry(id).or_insert(0) += 1;
        }
        for (&id, &tf) in &doc_tf {
            postings[id].push(Posting {
                doc: n as DocNum,
                tf,
            });
        }
    }

    let mut by_term: Vec<(String, usize)> = provisional.into_iter().collect();
    by_term.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let mut terms = Vec::with_capacity(by_term.len());
    for (term, id) in by_term {
        let list = std::mem::take(&mut postings[id]);
        let collection_tf = list.iter().map(|p| p.tf as u64).sum();
        terms.push(TermEntry {
            term,
            collection_tf,
            postings: list,
        });
    }

    let mut concept_index: BTreeMap<String, Vec<DocNum>> = BTreeMap::new();
    for (n, doc) in docs.iter().enumerate() {
        for c in &doc.concept_ids {
            concept_index
                .entry(c.clone())
                .or_default()
                .push(n as DocNum);
        }
    }
    for list in concept_index.values_mut() {
        list.sort_by(|&a, &b| docs[a as usize].doc_id.cmp(&docs[b as usize].doc_id));
        list.dedup();
    }

    let mut index = Index {
        docs,
        doc_lengths,
        terms,
        collection_term_count,
        concept_index,
        term_lookup: HashMap::new(),
        doc_lookup,
    };
    index.rebuild_term_lookup();
    Ok(index)
}

impl Index {
    fn rebuild_term_lookup(&mut self) {
        self.term_lookup = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, e)| (e.term.clone(), i as u32))
            .collect();
    }

    fn rebuild_lookups(&mut self) {
        self.rebuild_term_lookup();
        self.doc_lookup = self
            .docs
            .iter()
            .enumerate()
            .map(|(n, d)| (d.doc_id.clone(), n as DocNum))
            .collect();
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    /// |C|: total token occurrences in the collection.
    pub fn collection_term_count(&self) -> u64 {
        self.collection_term_count
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            doc_count: self.docs.len(),
            collection_term_count: self.collection_term_count,
            vocabulary_size: self.terms.len(),
        }
    }

    pub fn doc_num(&self, doc_id: &str) -> Option<DocNum> {
        self.doc_lookup.get(doc_id).copied()
    }

    pub fn doc(&self, n: DocNum) -> &Document {
        &self.docs[n as usize]
    }

    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.doc_num(doc_id).map(|n| self.doc(n))
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    /// |D|: token count of title plus body.
    pub fn doc_length(&self, n: DocNum) -> u32 {
        self.doc_lengths[n as usize]
    }

    pub fn term(&self, term: &str) -> Option<&TermEntry> {
        self.term_lookup.get(term).map(|&i| &self.terms[i as usize])
    }

    /// All indexed terms in sorted order.
    pub fn terms(&self) -> impl Iterator<Item = &TermEntry> {
        self.terms.iter()
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.term(term).map_or(&[], |e| e.postings.as_slice())
    }

    /// cq: occurrences of `term` in the whole collection.
    pub fn collection_tf(&self, term: &str) -> u64 {
        self.term(term).map_or(0, |e| e.collection_tf)
    }

    /// Occurrences of `term` in document `n`.
    pub fn term_frequency(&self, term: &str, n: DocNum) -> u32 {
        let list = self.postings(term);
        list.binary_search_by_key(&n, |p| p.doc)
            .map_or(0, |i| list[i].tf)
    }

    /// Documents carrying `concept_id`, ordered by doc_id. Unknown ids yield
    /// an empty list.
    pub fn docs_for_concept(&self, concept_id: &str) -> Vec<&str> {
        self.concept_index
            .get(concept_id)
            .map(|list| list.iter().map(|&n| self.doc(n).doc_id.as_str()).collect())
            .unwrap_or_default()
    }

    pub(crate) fn concept_doc_nums(&self, concept_id: &str) -> &[DocNum] {
        self.concept_index
            .get(concept_id)
            .map_or(&[], |v| v.as_slice())
    }

    /// Verifies the consistency of postings, collection frequencies, and
    /// document lengths.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n_docs = self.docs.len();
        if self.doc_lengths.len() != n_docs {
            return Err("doc_lengths does not match document count".into());
        }
        let mut total = 0u64;
        let mut per_doc = vec![0u64; n_docs];
        for (i, entry) in self.terms.iter().enumerate() {
            if i > 0 && self.terms[i - 1].term >= entry.term {
                return Err(format!("terms not strictly sorted at {:?}", entry.term));
            }
            let mut sum = 0u64;
            let mut prev: Option<DocNum> = None;
            for p in &entry.postings {
                if p.tf == 0 {
                    return Err(format!("zero tf posting for {:?}", entry.term));
                }
                if (p.doc as usize) >= n_docs {
                    return Err(format!(
                        "posting for {:?} names unknown doc {}",
                        entry.term, p.doc
                    ));
                }
                if prev.is_some_and(|q| q >= p.doc) {
                    return Err(format!("postings for {:?} not sorted", entry.term));
                }
                prev = Some(p.doc);
                sum += p.tf as u64;
                per_doc[p.doc as usize] += p.tf as u64;
            }
            if sum != entry.collection_tf {
                return Err(format!(
                    "collection_tf[{:?}] = {} but postings sum to {}",
                    entry.term, entry.collection_tf, sum
                ));
            }
            total += sum;
        }
        if total != self.collection_term_count {
            return Err(format!(
                "collection_tf sums to {} but collection_term_count is {}",
                total, self.collection_term_count
            ));
        }
        for (n, (&len, &counted)) in self.doc_lengths.iter().zip(&per_doc).enumerate() {
            if len as u64 != counted {
                return Err(format!(
                    "doc {n} has length {len} but postings count {counted}"
                ));
            }
        }
        for (concept, list) in &self.concept_index {
            if list.iter().any(|&n| (n as usize) >= n_docs) {
                return Err(format!("concept {concept:?} names an unknown document"));
            }
        }
        Ok(())
    }
}

/// Serialized form of a document. Unlike the corpus format, every field is
/// always present, as the binary encoding is not self-describing.
#[derive(Serialize, Deserialize)]
struct StoredDocument {
    doc_id: String,
    title: String,
    body: String,
    source: String,
    url: Option<String>,
    concept_ids: Vec<String>,
    tags: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct Payload {
    docs: Vec<StoredDocument>,
    doc_lengths: Vec<u32>,
    terms: Vec<TermEntry>,
    collection_term_count: u64,
    concept_index: BTreeMap<String, Vec<DocNum>>,
}

impl Payload {
    fn from_index(index: &Index) -> Self {
        Payload {
            docs: index
                .docs
                .iter()
                .map(|d| StoredDocument {
                    doc_id: d.doc_id.clone(),
                    title: d.title.clone(),
                    body: d.body.clone(),
                    source: d.source.clone(),
                    url: d.url.clone(),
                    concept_ids: d.concept_ids.clone(),
                    tags: d.tags.clone(),
                })
                .collect(),
            doc_lengths: index.doc_lengths.clone(),
            terms: index.terms.clone(),
            collection_term_count: index.collection_term_count,
            concept_index: index.concept_index.clone(),
        }
    }

    fn into_index(self) -> Index {
        let mut index = Index {
            docs: self
                .docs
                .into_iter()
                .map(|d| Document {
                    doc_id: d.doc_id,
                    title: d.title,
                    body: d.body,
                    source: d.source,
                    url: d.url,
                    concept_ids: d.concept_ids,
                    tags: d.tags,
                })
                .collect(),
            doc_lengths: self.doc_lengths,
            terms: self.terms,
            collection_term_count: self.collection_term_count,
            concept_index: self.concept_index,
            term_lookup: HashMap::new(),
            doc_lookup: HashMap::new(),
        };
        index.rebuild_lookups();
        index
    }
}

const MAGIC: &[u8; 8] = b"ZEBRAIDX";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 8;

/// Metadata stored alongside the index payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexMeta {
    pub version: u32,
    /// Seconds since the Unix epoch at which the file was written.
    pub built_at: u64,
}

/// Writes `index` to `path`.
///
/// Layout: 8-byte magic, little-endian `u32` version, `u64` build timestamp,
/// `u64` payload length, then the payload.
pub fn save_index(index: &Index, path: impl AsRef<Path>) -> Result<()> {
    let built_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    save_index_with_timestamp(index, path, built_at)
}

pub fn save_index_with_timestamp(
    index: &Index,
    path: impl AsRef<Path>,
    built_at: u64,
) -> Result<()> {
    let path = path.as_ref();
    let payload =
        bincode::serialize(&Payload::from_index(index)).map_err(|e| Error::CorruptIndex {
            path: path.to_path_buf(),
            message: format!("serialization failed: {e}"),
        })?;
    let mut buf = Vec::with_capacity(HEADER_LEN + payload.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&built_at.to_le_bytes());
    buf.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    buf.extend_from_slice(&payload);
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buf).map_err(|e| Error::io(path, e))?;
    file.sync_all().map_err(|e| Error::io(path, e))
}

pub fn load_index(path: impl AsRef<Path>) -> Result<Index> {
    load_index_with_meta(path).map(|(index, _)| index)
}

pub fn load_index_with_meta(path: impl AsRef<Path>) -> Result<(Index, IndexMeta)> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_index(&bytes, path)
}

fn decode_index(bytes: &[u8], path: &Path) -> Result<(Index, IndexMeta)> {
    let corrupt = |message: String| Error::CorruptIndex {
        path: path.to_path_buf(),
        message,
    };
    if bytes.len() < HEADER_LEN {
        return Err(corrupt(format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[..8] != MAGIC {
        return Err(corrupt("bad magic; not an index file".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::IndexVersion {
            path: path.to_path_buf(),
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let built_at = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let payload_len = u64::from_le_bytes(bytes[20..28].try_into().unwrap());
    let payload = &bytes[HEADER_LEN..];
    if payload.len() as u64 != payload_len {
        return Err(corrupt(format!(
            "payload is {} bytes, header declares {}",
            payload.len(),
            payload_len
        )));
    }
    let index = bincode::deserialize::<Payload>(payload)
        .map_err(|e| corrupt(format!("payload decode failed: {e}")))?
        .into_index();
    if index.doc_lookup.len() != index.docs.len() {
        return Err(corrupt("duplicate doc_id in payload".into()));
    }
    index.check_invariants().map_err(corrupt)?;
    Ok((index, IndexMeta { version, built_at }))
}
