//! Document model, corpus file I/O, and the text analysis chain shared by
//! indexing and query processing.
//!
//! A corpus file holds one JSON object per line:
//!
//! ```text
//! {"doc_id":"omim-1","title":"Loeys-Dietz syndrome","body":"...","source":"OMIM","concept_ids":["C1334489"],"tags":["rare","genetic"]}
//! ```
//!
//! Blank lines are ignored. `doc_id` and `title` are required, everything
//! else defaults to empty.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Tag marking membership of the rare-disease collection.
pub const TAG_RARE: &str = "rare";
/// Tag marking membership of the genetic-disease collection.
pub const TAG_GENETIC: &str = "genetic";

/// One curated disease article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default)]
    pub concept_ids: Vec<String>,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl Document {
    pub fn new(
        doc_id: impl Into<String>,
        title: impl Into<String>,
        body: impl Into<String>,
    ) -> Self {
        Document {
            doc_id: doc_id.into(),
            title: title.into(),
            body: body.into(),
            source: String::new(),
            url: None,
            concept_ids: Vec::new(),
            tags: Vec::new(),
        }
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }

    /// Checks the per-document invariants. Uniqueness of `doc_id` is a
    /// corpus-level property and is checked by [`load_corpus`].
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.doc_id.is_empty() {
            return Err("doc_id is empty".into());
        }
        if self.title.trim().is_empty() {
            return Err(format!("document {:?} has an empty title", self.doc_id));
        }
        let mut seen = HashSet::new();
        for c in &self.concept_ids {
            if c.is_empty() {
                return Err(format!(
                    "document {:?} has an empty concept id",
                    self.doc_id
                ));
            }
            if !seen.insert(c.as_str()) {
                return Err(format!(
                    "document {:?} lists concept {:?} twice",
                    self.doc_id, c
                ));
            }
        }
        Ok(())
    }
}

/// A normalized index term: lowercase, non-empty, letters and digits only.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Splits `text` into lowercase alphanumeric tokens.
///
/// The text is NFC-normalized first; every character that is not a letter or
/// digit is a split point. No stemming and no stopword removal.
pub fn tokenize(text: &str) -> Vec<Token> {
    let normalized: String = text.nfc().collect();
    token_spans(&normalized)
        .into_iter()
        .map(|(_, token)| token)
        .collect()
}

/// Tokens of an already NFC-normalized string, with the byte range each one
/// occupies. Used for snippet extraction.
pub fn token_spans(normalized: &str) -> Vec<(Range<usize>, Token)> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    for (pos, ch) in normalized.char_indices() {
        if ch.is_alphanumeric() {
            if current.is_empty() {
                start = pos;
            }
            // Lowercasing can expand to combining marks (e.g. U+0130); only
            // alphanumeric output is kept so tokens stay stable under
            // re-tokenization.
            current.extend(ch.to_lowercase().filter(|c| c.is_alphanumeric()));
        } else if !current.is_empty() {
            out.push((start..pos, Token(std::mem::take(&mut current))));
        }
    }
    if !current.is_empty() {
        out.push((start..normalized.len(), Token(current)));
    }
    out
}

/// Loads a newline-delimited corpus file. Order is preserved; duplicate
/// `doc_id`s are rejected.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), &path.display().to_string())
}

/// Parses corpus records from any reader. `origin` names the source in
/// error messages.
pub fn read_corpus<R: BufRead>(reader: R, origin: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::malformed(origin, line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line)
            .map_err(|e| Error::malformed(origin, line_no, format!("record {line_no}: {e}")))?;
        doc.validate()
            .map_err(|m| Error::malformed(origin, line_no, format!("record {line_no}: {m}")))?;
        if !seen.insert(doc.doc_id.clone()) {
            return Err(Error::DuplicateDocId(doc.doc_id));
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// Writes documents in the corpus file format, one record per line.
pub fn write_corpus<W: Write>(mut writer: W, docs: &[Document]) -> std::io::Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut writer, doc)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn save_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus(BufWriter::new(file), docs).map_err(|e| Error::io(path, e))
}
