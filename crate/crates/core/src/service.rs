//! HTTP search service over an immutable index snapshot.
//!
//! Endpoints:
//!
//! - `GET /api/search` runs a query in `documents`, `clusters` or
//!   `concepts` mode and returns a [`SearchResponse`].
//! - `GET /api/doc/{doc_id}` returns the full stored document.
//! - `GET /api/health` reports status and index statistics.
//!
//! Handlers read the current [`Snapshot`] through an [`ArcSwap`]; a reload
//! (SIGHUP when running [`serve`]) publishes a new snapshot with one atomic
//! store, so an in-flight request keeps the snapshot it started with.

use std::collections::{HashMap, HashSet};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use arc_swap::ArcSwap;
use axum::extract::{Path as UrlPath, Query as UrlQuery, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::concepts::{
    cluster_by_concept, load_mapping, rank_concepts, ConceptMapping, DEFAULT_TOP_J,
};
use crate::error::{Error, Result};
use crate::index::{load_index_with_meta, Index, IndexMeta};
use crate::ranking::{
    search, search_concept, CorpusFilter, Query, RankedList, RankingParams, SmoothingModel,
};
use crate::snippet::snippet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Documents,
    Clusters,
    Concepts,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "documents" => Ok(Mode::Documents),
            "clusters" => Ok(Mode::Clusters),
            "concepts" => Ok(Mode::Concepts),
            other => Err(Error::InvalidParams(format!("unknown mode {other:?}"))),
        }
    }
}

/// How `q` is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryRoute {
    #[default]
    Text,
    /// `q` is a concept identifier matched exactly against document concepts.
    Concept,
}

impl FromStr for QueryRoute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(QueryRoute::Text),
            "concept" => Ok(QueryRoute::Concept),
            other => Err(Error::InvalidParams(format!("unknown route {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchRequest {
    pub q: String,
    pub mode: Mode,
    pub by: QueryRoute,
    /// `top_n` is the document-mode cutoff n.
    pub params: RankingParams,
    /// Documents considered by the cluster and concept views.
    pub top_j: usize,
}

impl SearchRequest {
    pub fn new(q: impl Into<String>) -> Self {
        SearchRequest {
            q: q.into(),
            mode: Mode::Documents,
            by: QueryRoute::Text,
            params: RankingParams::default(),
            top_j: DEFAULT_TOP_J,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    /// Parses the `/api/search` query-string parameters.
    pub fn from_params(params: &HashMap<String, String>) -> Result<Self> {
        fn parse_num<T: FromStr>(params: &HashMap<String, String>, key: &str) -> Result<Option<T>> {
            params
                .get(key)
                .map(|v| {
                    v.parse::<T>()
                        .map_err(|_| Error::InvalidParams(format!("{key}: cannot parse {v:?}")))
                })
                .transpose()
        }
        let q = params
            .get("q")
            .cloned()
            .ok_or_else(|| Error::InvalidParams("missing parameter q".into()))?;
        let mut req = SearchRequest::new(q);
        if let Some(m) = params.get("mode") {
            req.mode = m.parse()?;
        }
        if let Some(b) = params.get("by") {
            req.by = b.parse()?;
        }
        if let Some(m) = params.get("model") {
            req.params.model = m.parse::<SmoothingModel>()?;
        }
        if let Some(c) = params.get("corpus") {
            req.params.corpus_filter = c.parse::<CorpusFilter>()?;
        }
        if let Some(l) = parse_num(params, "lambda")? {
            req.params.lambda = l;
        }
        if let Some(mu) = parse_num(params, "mu")? {
            req.params.mu = mu;
        }
        if let Some(n) = parse_num(params, "n")? {
            req.params.top_n = n;
        }
        if let Some(j) = parse_num(params, "j")? {
            req.top_j = j;
        }
        req.params.validate()?;
        if req.top_j == 0 {
            return Err(Error::InvalidParams("j must be at least 1".into()));
        }
        Ok(req)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentHit {
    pub rank: usize,
    pub doc_id: String,
    pub title: String,
    pub source: String,
    pub url: Option<String>,
    /// Log query likelihood; `null` for unmatchable documents and concept-id
    /// lookups.
    pub score: Option<f64>,
    pub snippet: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterView {
    pub concept_id: String,
    pub concept_name: String,
    pub representative: DocumentHit,
    pub members: Vec<DocumentHit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptView {
    pub concept_id: String,
    pub concept_name: String,
    pub score: f64,
    pub documents: Vec<DocumentHit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SearchResults {
    Documents(Vec<DocumentHit>),
    Clusters(Vec<ClusterView>),
    Concepts(Vec<ConceptView>),
}

impl SearchResults {
    pub fn len(&self) -> usize {
        match self {
            SearchResults::Documents(v) => v.len(),
            SearchResults::Clusters(v) => v.len(),
            SearchResults::Concepts(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub query_echo: String,
    pub mode: Mode,
    pub elapsed_ms: f64,
    pub results: SearchResults,
}

fn fmt_score(score: Option<f64>) -> String {
    score.map_or_else(|| "-".to_string(), |s| format!("{s:.4}"))
}

/// Plain-text rendering of a response, one result per line.
pub fn render_table(resp: &SearchResponse) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    match &resp.results {
        SearchResults::Documents(hits) => {
            for h in hits {
                let _ = writeln!(
                    out,
                    "{:>3}  {:>10}  {:<16} {}",
                    h.rank,
                    fmt_score(h.score),
                    h.doc_id,
                    h.title
                );
            }
        }
        SearchResults::Clusters(clusters) => {
            for (i, c) in clusters.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{:>3}. {} [{}] ({} docs)",
                    i + 1,
                    c.concept_name,
                    c.concept_id,
                    c.members.len()
                );
                for m in &c.members {
                    let _ = writeln!(out, "       #{:<3} {:<16} {}", m.rank, m.doc_id, m.title);
                }
            }
        }
        SearchResults::Concepts(concepts) => {
            for (i, c) in concepts.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{:>3}. {:>8.4}  {} [{}]",
                    i + 1,
                    c.score,
                    c.concept_name,
                    c.concept_id
                );
                for m in &c.documents {
                    let _ = writeln!(out, "       #{:<3} {:<16} {}", m.rank, m.doc_id, m.title);
                }
            }
        }
    }
    if resp.results.is_empty() {
        out.push_str("no matches\n");
    }
    out
}

/// An index and concept mapping served together.
#[derive(Debug)]
pub struct Snapshot {
    pub index: Index,
    pub mapping: ConceptMapping,
    pub meta: Option<IndexMeta>,
}

impl Snapshot {
    /// Uses the concept ids stored on the documents when no mapping is given.
    pub fn new(index: Index, mapping: Option<ConceptMapping>) -> Self {
        let mapping = mapping.unwrap_or_else(|| ConceptMapping::from_index(&index));
        Snapshot {
            index,
            mapping,
            meta: None,
        }
    }

    pub fn load(index_path: &Path, mapping_path: Option<&Path>) -> Result<Self> {
        let (index, meta) = load_index_with_meta(index_path)?;
        let mapping = mapping_path.map(load_mapping).transpose()?;
        let mut snap = Snapshot::new(index, mapping);
        snap.meta = Some(meta);
        Ok(snap)
    }

    fn hit(
        &self,
        rank: usize,
        doc_id: &str,
        score: Option<f64>,
        terms: &HashSet<&str>,
    ) -> DocumentHit {
        let doc = self
            .index
            .document(doc_id)
            .expect("ranked documents come from this index");
        DocumentHit {
            rank,
            doc_id: doc.doc_id.clone(),
            title: doc.title.clone(),
            source: doc.source.clone(),
            url: doc.url.clone(),
            score: score.filter(|s| s.is_finite()),
            snippet: snippet(&doc.body, terms),
        }
    }

    /// Runs a request against this snapshot. This is the payload both the
    /// HTTP endpoint and the CLI emit.
    pub fn execute(&self, req: &SearchRequest) -> Result<SearchResponse> {
        let started = Instant::now();
        let depth = match req.mode {
            Mode::Documents => req.params.top_n,
            Mode::Clusters | Mode::Concepts => req.top_j,
        };
        let params = req.params.with_top_n(depth);
        let (ranked, terms): (RankedList, Vec<String>) = match req.by {
            QueryRoute::Text => {
                let query = Query::new(req.q.clone());
                (search(&self.index, &query, &params)?, query.terms())
            }
            QueryRoute::Concept => (search_concept(&self.index, &req.q, &params)?, Vec::new()),
        };
        let term_set: HashSet<&str> = terms.iter().map(String::as_str).collect();
        let score_of = |score: f64| match req.by {
            QueryRoute::Text => Some(score),
            QueryRoute::Concept => None,
        };
        let scores: HashMap<&str, f64> = ranked
            .entries
            .iter()
            .map(|e| (e.doc_id.as_str(), e.score))
            .collect();
        let member_hit =
            |doc_id: &str, rank: usize| self.hit(rank, doc_id, score_of(scores[doc_id]), &term_set);

        let results = match req.mode {
            Mode::Documents => SearchResults::Documents(
                ranked
                    .entries
                    .iter()
                    .map(|e| self.hit(e.rank, &e.doc_id, score_of(e.score), &term_set))
                    .collect(),
            ),
            Mode::Clusters => SearchResults::Clusters(
                cluster_by_concept(&ranked, &self.mapping)
                    .into_iter()
                    .map(|c| ClusterView {
                        representative: member_hit(
                            &c.representative.doc_id,
                            c.representative.original_rank,
                        ),
                        members: c
                            .members
                            .iter()
                            .map(|m| member_hit(&m.doc_id, m.original_rank))
                            .collect(),
                        concept_id: c.concept_id,
                        concept_name: c.concept_name,
                    })
                    .collect(),
            ),
            Mode::Concepts => SearchResults::Concepts(
                rank_concepts(&ranked, &self.mapping)
                    .into_iter()
                    .map(|c| ConceptView {
                        documents: c
                            .contributing_docs
                            .iter()
                            .map(|m| member_hit(&m.doc_id, m.original_rank))
                            .collect(),
                        concept_id: c.concept_id,
                        concept_name: c.concept_name,
                        score: c.score,
                    })
                    .collect(),
            ),
        };
        Ok(SearchResponse {
            query_echo: req.q.clone(),
            mode: req.mode,
            elapsed_ms: started.elapsed().as_secs_f64() * 1000.0,
            results,
        })
    }
}

/// Where a snapshot is reloaded from.
#[derive(Debug, Clone)]
pub struct SnapshotSource {
    pub index_path: PathBuf,
    pub mapping_path: Option<PathBuf>,
}

impl SnapshotSource {
    pub fn load(&self) -> Result<Snapshot> {
        Snapshot::load(&self.index_path, self.mapping_path.as_deref())
    }
}

/// Atomically replaceable handle to the served snapshot.
#[derive(Debug)]
pub struct SnapshotStore {
    current: ArcSwap<Snapshot>,
    source: Option<SnapshotSource>,
}

impl SnapshotStore {
    pub fn new(snapshot: Snapshot) -> Self {
        SnapshotStore {
            current: ArcSwap::from_pointee(snapshot),
            source: None,
        }
    }

    pub fn open(source: SnapshotSource) -> Result<Self> {
        let snapshot = source.load()?;
        Ok(SnapshotStore {
            current: ArcSwap::from_pointee(snapshot),
            source: Some(source),
        })
    }

    pub fn current(&self) -> Arc<Snapshot> {
        self.current.load_full()
    }

    pub fn replace(&self, snapshot: Snapshot) {
        self.current.store(Arc::new(snapshot));
    }

    /// Reloads from the configured source. On failure the current snapshot
    /// stays in place.
    pub fn reload(&self) -> Result<()> {
        let Some(source) = &self.source else {
            return Err(Error::InvalidParams(
                "snapshot has no source to reload from".into(),
            ));
        };
        let fresh = source.load()?;
        self.replace(fresh);
        Ok(())
    }
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::EmptyQuery | Error::InvalidParams(_) => StatusCode::BAD_REQUEST,
            Error::UnknownDoc(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

async fn search_handler(
    State(store): State<Arc<SnapshotStore>>,
    UrlQuery(params): UrlQuery<HashMap<String, String>>,
) -> std::result::Result<Json<SearchResponse>, ApiError> {
    let req = SearchRequest::from_params(&params)?;
    let snapshot = store.current();
    let response = tokio::task::spawn_blocking(move || snapshot.execute(&req))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(response))
}

async fn doc_handler(
    State(store): State<Arc<SnapshotStore>>,
    UrlPath(doc_id): UrlPath<String>,
) -> std::result::Result<Response, ApiError> {
    let snapshot = store.current();
    match snapshot.index.document(&doc_id) {
        Some(doc) => Ok(Json(doc).into_response()),
        None => Err(Error::UnknownDoc(doc_id).into()),
    }
}

async fn health_handler(State(store): State<Arc<SnapshotStore>>) -> Json<serde_json::Value> {
    let snapshot = store.current();
    let stats = snapshot.index.stats();
    Json(json!({
        "status": "ok",
        "doc_count": stats.doc_count,
        "collection_term_count": stats.collection_term_count,
        "vocabulary_size": stats.vocabulary_size,
        "built_at": snapshot.meta.map(|m| m.built_at),
    }))
}

pub fn router(store: Arc<SnapshotStore>) -> Router {
    Router::new()
        .route("/api/search", get(search_handler))
        .route("/api/doc/{doc_id}", get(doc_handler))
        .route("/api/health", get(health_handler))
        .with_state(store)
}

/// Serves `store` on an already bound listener until the future is dropped.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    store: Arc<SnapshotStore>,
) -> std::io::Result<()> {
    axum::serve(listener, router(store)).await
}

/// Loads the snapshot, binds `addr`, and serves until shutdown. SIGHUP
/// reloads the snapshot from disk.
pub async fn serve(source: SnapshotSource, addr: SocketAddr) -> anyhow::Result<()> {
    let store = Arc::new(SnapshotStore::open(source)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, docs = store.current().index.doc_count(), "serving");

    #[cfg(unix)]
    {
        let store = Arc::clone(&store);
        let mut hangup = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::hangup())?;
        tokio::spawn(async move {
            while hangup.recv().await.is_some() {
                let store = Arc::clone(&store);
                match tokio::task::spawn_blocking(move || store.reload()).await {
                    Ok(Ok(())) => tracing::info!("snapshot reloaded"),
                    Ok(Err(e)) => {
                        tracing::error!(error = %e, "reload failed, keeping current snapshot")
                    }
                    Err(e) => tracing::error!(error = %e, "reload task panicked"),
                }
            }
        });
    }

    serve_on(listener, store).await?;
    Ok(())
}
