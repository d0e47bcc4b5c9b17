//! Vertical search for rare-disease diagnosis.
//!
//! The crate covers the full path from a curated corpus to ranked answers:
//!
//! - [`corpus`]: document model, corpus files, tokenization.
//! - [`index`]: inverted index, collection statistics, on-disk snapshots.
//! - [`ranking`]: query likelihood with Jelinek-Mercer or Dirichlet smoothing.
//! - [`concepts`]: clustering and ranking of results by medical concept.
//! - [`eval`]: P@k, MRR and answered@k over query, judgment and run files.
//! - [`service`]: JSON HTTP API over a hot-swappable index snapshot.
//!
//! ```
//! use zebra_search::{build_index, search, Document, Query, RankingParams};
//!
//! let index = build_index(vec![
//!     Document::new("d1", "Zebra stripes", ""),
//!     Document::new("d2", "Horse mane", ""),
//! ])
//! .unwrap();
//! let ranked = search(&index, &Query::new("zebra"), &RankingParams::default()).unwrap();
//! assert_eq!(ranked.entries[0].doc_id, "d1");
//! ```

pub mod concepts;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod index;
pub mod ranking;
pub mod service;
pub mod snippet;

pub use concepts::{
    cluster_by_concept, load_mapping, rank_concepts, ConceptCluster, ConceptMapping, ConceptScore,
    DEFAULT_TOP_J,
};
pub use corpus::{load_corpus, tokenize, Document, Token};
pub use error::{Error, Result};
pub use eval::{evaluate, run_queries, EvalReport, Judgment, RunEntry};
pub use index::{build_index, load_index, save_index, Index};
pub use ranking::{
    score_document, search, term_prob_dirichlet, term_prob_jm, CorpusFilter, Query, RankedList,
    RankingParams, SmoothingModel,
};
pub use service::{Mode, QueryRoute, SearchRequest, SearchResponse, Snapshot, SnapshotStore};
