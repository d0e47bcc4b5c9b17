//! Retrieval evaluation: precision at k, reciprocal rank, answered@k, and
//! the file formats used to exchange queries, judgments, and runs.
//!
//! All files are UTF-8, one record per line, tab separated:
//!
//! | file    | fields                                         |
//! |---------|------------------------------------------------|
//! | queries | `query_id  source_tag  text`                   |
//! | qrels   | `query_id  doc_id  0\|1`                       |
//! | run     | `query_id  doc_id  rank  score  system_name`   |
//!
//! Conventions: P@k always divides by k, so short result lists are
//! penalized; a query with no relevant document retrieved has reciprocal
//! rank 0 and still counts towards N; unjudged documents are non-relevant.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::index::Index;
use crate::ranking::{search, Query, RankingParams, SourceTag};

pub const DEFAULT_KS: [usize; 2] = [10, 20];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub query_id: String,
    pub doc_id: String,
    pub relevant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub query_id: String,
    pub doc_id: String,
    pub rank: usize,
    pub score: f64,
    pub system_name: String,
}

/// Fraction of the top `k` retrieved documents that are relevant. The
/// denominator is always `k`.
pub fn precision_at_k<S: AsRef<str>>(ranked: &[S], relevant: &HashSet<&str>, k: usize) -> f64 {
    assert!(k >= 1, "precision_at_k needs k >= 1");
    let hits = ranked
        .iter()
        .take(k)
        .filter(|d| relevant.contains(d.as_ref()))
        .count();
    hits as f64 / k as f64
}

/// 1-based rank of the first relevant document.
pub fn first_relevant_rank<S: AsRef<str>>(ranked: &[S], relevant: &HashSet<&str>) -> Option<usize> {
    ranked
        .iter()
        .position(|d| relevant.contains(d.as_ref()))
        .map(|i| i + 1)
}

/// `1 / r` for the first relevant rank `r`, or 0 when nothing relevant was
/// retrieved.
pub fn reciprocal_rank<S: AsRef<str>>(ranked: &[S], relevant: &HashSet<&str>) -> f64 {
    first_relevant_rank(ranked, relevant).map_or(0.0, |r| 1.0 / r as f64)
}

/// Per-query breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryEval {
    pub query_id: String,
    pub first_relevant_rank: Option<usize>,
    pub precision: BTreeMap<usize, f64>,
    pub retrieved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub system_name: String,
    /// N: every query in the evaluated universe, answered or not.
    pub n_queries: usize,
    pub ks: Vec<usize>,
    /// Macro-averaged P@k.
    pub precision: BTreeMap<usize, f64>,
    pub mrr: f64,
    /// Queries with at least one relevant document in the top k.
    pub answered: BTreeMap<usize, usize>,
    /// Retrieved documents within the deepest cutoff that have no judgment.
    pub unjudged: usize,
    pub per_query: Vec<QueryEval>,
}

impl EvalReport {
    pub fn p_at(&self, k: usize) -> Option<f64> {
        self.precision.get(&k).copied()
    }

    pub fn answered_at(&self, k: usize) -> Option<usize> {
        self.answered.get(&k).copied()
    }

    /// Answered@k as a percentage of N.
    pub fn answered_pct(&self, k: usize) -> Option<f64> {
        let n = self.n_queries;
        self.answered_at(k).map(|a| {
            if n == 0 {
                0.0
            } else {
                100.0 * a as f64 / n as f64
            }
        })
    }

    /// Flat JSON object: `p_at_<k>`, `answered_at_<k>`,
    /// `answered_at_<k>_pct` for every cutoff, plus per-query rows.
    pub fn to_flat_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("system_name".into(), json!(self.system_name));
        obj.insert("n_queries".into(), json!(self.n_queries));
        obj.insert("mrr".into(), json!(self.mrr));
        for &k in &self.ks {
            obj.insert(format!("p_at_{k}"), json!(self.precision[&k]));
            obj.insert(format!("answered_at_{k}"), json!(self.answered[&k]));
            obj.insert(format!("answered_at_{k}_pct"), json!(self.answered_pct(k)));
        }
        obj.insert("unjudged".into(), json!(self.unjudged));
        let rows: Vec<Value> = self
            .per_query
            .iter()
            .map(|q| {
                let mut row = Map::new();
                row.insert("query_id".into(), json!(q.query_id));
                row.insert("first_relevant_rank".into(), json!(q.first_relevant_rank));
                for (k, p) in &q.precision {
                    row.insert(format!("p_at_{k}"), json!(p));
                }
                row.insert("retrieved".into(), json!(q.retrieved));
                Value::Object(row)
            })
            .collect();
        obj.insert("per_query".into(), Value::Array(rows));
        Value::Object(obj)
    }
}

/// Relevant documents per query, rejecting duplicate judgments.
#[derive(Debug, Clone, Default)]
pub struct Qrels {
    judged: HashMap<String, HashMap<String, bool>>,
}

impl Qrels {
    pub fn new(judgments: &[Judgment]) -> Result<Self> {
        let mut judged: HashMap<String, HashMap<String, bool>> = HashMap::new();
        for j in judgments {
            let per_query = judged.entry(j.query_id.clone()).or_default();
            if per_query.insert(j.doc_id.clone(), j.relevant).is_some() {
                return Err(Error::DuplicateJudgment {
                    query_id: j.query_id.clone(),
                    doc_id: j.doc_id.clone(),
                });
            }
        }
        Ok(Qrels { judged })
    }

    pub fn relevant(&self, query_id: &str) -> HashSet<&str> {
        self.judged
            .get(query_id)
            .map(|m| {
                m.iter()
                    .filter(|(_, &r)| r)
                    .map(|(d, _)| d.as_str())
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn is_judged(&self, query_id: &str, doc_id: &str) -> bool {
        self.judged
            .get(query_id)
            .is_some_and(|m| m.contains_key(doc_id))
    }

    /// Query ids with at least one judgment, sorted.
    pub fn query_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.judged.keys().map(String::as_str).collect();
        ids.sort_unstable();
        ids
    }
}

/// Groups a run by system then query, validating rank and score order.
/// Returns doc ids in rank order.
fn group_run(run: &[RunEntry]) -> Result<BTreeMap<&str, HashMap<&str, Vec<&str>>>> {
    let mut grouped: BTreeMap<&str, HashMap<&str, Vec<&RunEntry>>> = BTreeMap::new();
    for e in run {
        grouped
            .entry(e.system_name.as_str())
            .or_default()
            .entry(e.query_id.as_str())
            .or_default()
            .push(e);
    }
    let mut out = BTreeMap::new();
    for (system, queries) in grouped {
        let mut per_system = HashMap::new();
        for (query_id, mut entries) in queries {
            entries.sort_by_key(|e| e.rank);
            let invalid = |message: String| Error::InvalidRun {
                system: system.to_string(),
                query_id: query_id.to_string(),
                message,
            };
            let mut docs = HashSet::new();
            for (i, e) in entries.iter().enumerate() {
                if e.rank != i + 1 {
                    return Err(invalid(format!(
                        "ranks are not 1..{} without gaps",
                        entries.len()
                    )));
                }
                if e.score.is_nan() {
                    return Err(invalid(format!("NaN score at rank {}", e.rank)));
                }
                if !docs.insert(e.doc_id.as_str()) {
                    return Err(invalid(format!("doc {:?} listed twice", e.doc_id)));
                }
                if i > 0 && entries[i - 1].score < e.score {
                    return Err(invalid(format!("score increases at rank {}", e.rank)));
                }
            }
            per_system.insert(
                query_id,
                entries.iter().map(|e| e.doc_id.as_str()).collect(),
            );
        }
        out.insert(system, per_system);
    }
    Ok(out)
}

fn validate_ks(ks: &[usize]) -> Result<Vec<usize>> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::InvalidParams(
            "cutoffs must be non-empty and >= 1".into(),
        ));
    }
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    Ok(ks)
}

fn evaluate_one(
    system_name: &str,
    ranked_by_query: &HashMap<&str, Vec<&str>>,
    qrels: &Qrels,
    queries: &[String],
    ks: &[usize],
) -> EvalReport {
    let depth = *ks.last().expect("validated non-empty");
    let n = queries.len();
    let mut precision_sum: BTreeMap<usize, f64> = ks.iter().map(|&k| (k, 0.0)).collect();
    let mut answered: BTreeMap<usize, usize> = ks.iter().map(|&k| (k, 0)).collect();
    let mut rr_sum = 0.0;
    let mut unjudged = 0;
    let mut per_query = Vec::with_capacity(n);
    let empty = Vec::new();

    for qid in queries {
        let ranked = ranked_by_query.get(qid.as_str()).unwrap_or(&empty);
        let relevant = qrels.relevant(qid);
        let first = first_relevant_rank(ranked, &relevant);
        rr_sum += reciprocal_rank(ranked, &relevant);
        let mut precision = BTreeMap::new();
        for &k in ks {
            let p = precision_at_k(ranked, &relevant, k);
            *precision_sum.get_mut(&k).unwrap() += p;
            precision.insert(k, p);
            if first.is_some_and(|r| r <= k) {
                *answered.get_mut(&k).unwrap() += 1;
            }
        }
        unjudged += ranked
            .iter()
            .take(depth)
            .filter(|d| !qrels.is_judged(qid, d))
            .count();
        per_query.push(QueryEval {
            query_id: qid.clone(),
            first_relevant_rank: first,
            precision,
            retrieved: ranked.len(),
        });
    }

    let mean = |sum: f64| if n == 0 { 0.0 } else { sum / n as f64 };
    EvalReport {
        system_name: system_name.to_string(),
        n_queries: n,
        ks: ks.to_vec(),
        precision: precision_sum
            .into_iter()
            .map(|(k, s)| (k, mean(s)))
            .collect(),
        mrr: mean(rr_sum),
        answered,
        unjudged,
        per_query,
    }
}

fn check_universe(
    grouped: &BTreeMap<&str, HashMap<&str, Vec<&str>>>,
    queries: &[String],
) -> Result<()> {
    let universe: HashSet<&str> = queries.iter().map(String::as_str).collect();
    for (system, per_query) in grouped {
        if let Some(q) = per_query.keys().find(|q| !universe.contains(*q)) {
            return Err(Error::InvalidRun {
                system: system.to_string(),
                query_id: q.to_string(),
                message: "query is not in the evaluated query set".into(),
            });
        }
    }
    Ok(())
}

/// Evaluates every system in `run` over the query universe `queries`.
/// Queries absent from the run score zero but still count towards N.
pub fn evaluate_systems(
    run: &[RunEntry],
    judgments: &[Judgment],
    queries: &[String],
    ks: &[usize],
) -> Result<Vec<EvalReport>> {
    let ks = validate_ks(ks)?;
    let qrels = Qrels::new(judgments)?;
    let grouped = group_run(run)?;
    check_universe(&grouped, queries)?;
    Ok(grouped
        .iter()
        .map(|(system, per_query)| evaluate_one(system, per_query, &qrels, queries, &ks))
        .collect())
}

/// Evaluates a single-system run. The query universe is every query that
/// appears in the run or the judgments, sorted by id.
pub fn evaluate(run: &[RunEntry], judgments: &[Judgment], ks: &[usize]) -> Result<EvalReport> {
    let mut ids: Vec<String> = run
        .iter()
        .map(|e| e.query_id.clone())
        .chain(judgments.iter().map(|j| j.query_id.clone()))
        .collect();
    ids.sort_unstable();
    ids.dedup();
    evaluate_with_queries(run, judgments, &ids, ks)
}

/// Single-system evaluation over an explicit query universe.
pub fn evaluate_with_queries(
    run: &[RunEntry],
    judgments: &[Judgment],
    queries: &[String],
    ks: &[usize],
) -> Result<EvalReport> {
    let ks = validate_ks(ks)?;
    let qrels = Qrels::new(judgments)?;
    let grouped = group_run(run)?;
    if grouped.len() > 1 {
        return Err(Error::InvalidParams(format!(
            "run holds {} systems; use evaluate_systems",
            grouped.len()
        )));
    }
    check_universe(&grouped, queries)?;
    let (system, per_query) = grouped.into_iter().next().unwrap_or_default();
    Ok(evaluate_one(system, &per_query, &qrels, queries, &ks))
}

/// Runs every query through [`search`] and serializes the results.
pub fn run_queries(
    index: &Index,
    queries: &[Query],
    params: &RankingParams,
    system_name: &str,
) -> Result<Vec<RunEntry>> {
    let mut out = Vec::new();
    for (i, query) in queries.iter().enumerate() {
        let query_id = query
            .query_id
            .clone()
            .unwrap_or_else(|| (i + 1).to_string());
        let ranked = search(index, query, params)?;
        out.extend(ranked.entries.into_iter().map(|e| RunEntry {
            query_id: query_id.clone(),
            doc_id: e.doc_id,
            rank: e.rank,
            score: e.score,
            system_name: system_name.to_string(),
        }));
    }
    Ok(out)
}

/// Query ids -> answered flag for each system, at cutoff `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsweredMatrix {
    pub k: usize,
    pub systems: Vec<String>,
    pub query_ids: Vec<String>,
    /// `rows[q][s]` is 1 when system `s` answered query `q` within `k`.
    pub rows: Vec<Vec<u8>>,
}

pub fn answered_matrix(reports: &[EvalReport], k: usize) -> AnsweredMatrix {
    let query_ids: Vec<String> = reports
        .first()
        .map(|r| r.per_query.iter().map(|q| q.query_id.clone()).collect())
        .unwrap_or_default();
    let lookup: Vec<HashMap<&str, Option<usize>>> = reports
        .iter()
        .map(|r| {
            r.per_query
                .iter()
                .map(|q| (q.query_id.as_str(), q.first_relevant_rank))
                .collect()
        })
        .collect();
    let rows = query_ids
        .iter()
        .map(|q| {
            lookup
                .iter()
                .map(|m| u8::from(m.get(q.as_str()).copied().flatten().is_some_and(|r| r <= k)))
                .collect()
        })
        .collect();
    AnsweredMatrix {
        k,
        systems: reports.iter().map(|r| r.system_name.clone()).collect(),
        query_ids,
        rows,
    }
}

/// Human-readable comparison table.
pub fn format_table(reports: &[EvalReport]) -> String {
    let ks: Vec<usize> = reports.first().map(|r| r.ks.clone()).unwrap_or_default();
    let name_width = reports
        .iter()
        .map(|r| r.system_name.len())
        .chain([6])
        .max()
        .unwrap();
    let mut out = String::new();
    let _ = write!(out, "{:<name_width$}  {:>4}  {:>6}", "system", "N", "MRR");
    for k in &ks {
        let _ = write!(out, "  {:>6}", format!("P@{k}"));
    }
    for k in &ks {
        let _ = write!(out, "  {:>14}", format!("answered@{k}"));
    }
    out.push('\n');
    for r in reports {
        let _ = write!(
            out,
            "{:<name_width$}  {:>4}  {:>6.4}",
            r.system_name, r.n_queries, r.mrr
        );
        for k in &ks {
            let _ = write!(out, "  {:>6.4}", r.precision[k]);
        }
        for k in &ks {
            let cell = format!("{} ({:.1}%)", r.answered[k], r.answered_pct(*k).unwrap());
            let _ = write!(out, "  {cell:>14}");
        }
        out.push('\n');
    }
    out
}

/// JSON document holding every report and the answered matrix per cutoff.
pub fn reports_json(reports: &[EvalReport]) -> Value {
    let ks: Vec<usize> = reports.first().map(|r| r.ks.clone()).unwrap_or_default();
    json!({
        "reports": reports.iter().map(EvalReport::to_flat_json).collect::<Vec<_>>(),
        "answered_matrix": ks.iter().map(|&k| answered_matrix(reports, k)).collect::<Vec<_>>(),
    })
}

/// Writes `report.txt` and `report.json` into `dir`.
pub fn write_reports(dir: impl AsRef<Path>, reports: &[EvalReport]) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let txt = dir.join("report.txt");
    fs::write(&txt, format_table(reports)).map_err(|e| Error::io(&txt, e))?;
    let js = dir.join("report.json");
    let body = serde_json::to_string_pretty(&reports_json(reports)).expect("report is valid JSON");
    fs::write(&js, body + "\n").map_err(|e| Error::io(&js, e))
}

fn read_tsv<R: BufRead, T>(
    reader: R,
    origin: &str,
    n_fields: usize,
    mut parse: impl FnMut(&[&str]) -> std::result::Result<T, String>,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::malformed(origin, line_no, e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(n_fields, '\t').collect();
        if fields.len() != n_fields {
            return Err(Error::malformed(
                origin,
                line_no,
                format!(
                    "expected {n_fields} tab-separated fields, found {}",
                    fields.len()
                ),
            ));
        }
        out.push(parse(&fields).map_err(|m| Error::malformed(origin, line_no, m))?);
    }
    Ok(out)
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub fn read_queries<R: BufRead>(reader: R, origin: &str) -> Result<Vec<Query>> {
    let queries = read_tsv(reader, origin, 3, |f| {
        if f[0].is_empty() {
            return Err("empty query_id".into());
        }
        Ok(Query {
            query_id: Some(f[0].to_string()),
            source_tag: (!f[1].is_empty()).then(|| f[1].parse::<SourceTag>().unwrap()),
            text: f[2].to_string(),
        })
    })?;
    let mut seen = HashSet::new();
    for q in &queries {
        let id = q.query_id.as_deref().unwrap();
        if !seen.insert(id) {
            return Err(Error::InvalidParams(format!("duplicate query_id {id:?}")));
        }
    }
    Ok(queries)
}

pub fn load_queries(path: impl AsRef<Path>) -> Result<Vec<Query>> {
    let path = path.as_ref();
    read_queries(open(path)?, &path.display().to_string())
}

pub fn read_qrels<R: BufRead>(reader: R, origin: &str) -> Result<Vec<Judgment>> {
    let judgments = read_tsv(reader, origin, 3, |f| {
        let relevant = match f[2].trim() {
            "0" => false,
            "1" => true,
            other => return Err(format!("relevance must be 0 or 1, found {other:?}")),
        };
        Ok(Judgment {
            query_id: f[0].to_string(),
            doc_id: f[1].to_string(),
            relevant,
        })
    })?;
    Qrels::new(&judgments)?;
    Ok(judgments)
}

pub fn load_qrels(path: impl AsRef<Path>) -> Result<Vec<Judgment>> {
    let path = path.as_ref();
    read_qrels(open(path)?, &path.display().to_string())
}

pub fn read_run<R: BufRead>(reader: R, origin: &str) -> Result<Vec<RunEntry>> {
    read_tsv(reader, origin, 5, |f| {
        Ok(RunEntry {
            query_id: f[0].to_string(),
            doc_id: f[1].to_string(),
            rank: f[2]
                .parse()
                .map_err(|e| format!("bad rank {:?}: {e}", f[2]))?,
            score: f[3]
                .parse()
                .map_err(|e| format!("bad score {:?}: {e}", f[3]))?,
            system_name: f[4].to_string(),
        })
    })
}

pub fn load_run(path: impl AsRef<Path>) -> Result<Vec<RunEntry>> {
    let path = path.as_ref();
    read_run(open(path)?, &path.display().to_string())
}

/// Scores use Rust's shortest round-trip formatting, so a written run
/// reloads to identical values.
pub fn write_run<W: Write>(mut writer: W, run: &[RunEntry]) -> std::io::Result<()> {
    for e in run {
        writeln!(
            writer,
            "{}\t{}\t{}\t{}\t{}",
            e.query_id, e.doc_id, e.rank, e.score, e.system_name
        )?;
    }
    writer.flush()
}

pub fn save_run(path: impl AsRef<Path>, run: &[RunEntry]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_run(BufWriter::new(file), run).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::index::build_index;

    fn set<'a>(ids: &[&'a str]) -> HashSet<&'a str> {
        ids.iter().copied().collect()
    }

    fn entries(system: &str, query: &str, docs: &[&str]) -> Vec<RunEntry> {
        docs.iter()
            .enumerate()
            .map(|(i, d)| RunEntry {
                query_id: query.into(),
                doc_id: d.to_string(),
                rank: i + 1,
                score: -(i as f64),
                system_name: system.into(),
            })
            .collect()
    }

    fn rel(query: &str, doc: &str) -> Judgment {
        Judgment {
            query_id: query.into(),
            doc_id: doc.into(),
            relevant: true,
        }
    }

    #[test]
    fn precision_examples() {
        let ranked: Vec<String> = (1..=20).map(|i| format!("d{i}")).collect();
        assert_eq!(precision_at_k(&ranked, &set(&["d1", "d3"]), 10), 0.2);
        assert_eq!(precision_at_k(&ranked, &set(&["x"]), 20), 0.0);
        let short = ["a", "b", "c", "d", "e", "f", "g"];
        assert_eq!(precision_at_k(&short, &set(&["b", "g"]), 10), 0.2);
    }

    #[test]
    fn reciprocal_rank_examples() {
        let ranked = ["a", "b", "c", "d"];
        assert_eq!(reciprocal_rank(&ranked, &set(&["d"])), 0.25);
        assert_eq!(reciprocal_rank(&ranked, &set(&["a", "d"])), 1.0);
        assert_eq!(reciprocal_rank(&ranked, &set(&["z"])), 0.0);
    }

    #[test]
    fn mrr_over_three_queries() {
        let mut run = entries("sys", "q1", &["a", "b", "c", "r1"]);
        run.extend(entries("sys", "q2", &["r2", "b"]));
        run.extend(entries("sys", "q3", &["a", "b"]));
        let qrels = vec![rel("q1", "r1"), rel("q2", "r2"), rel("q3", "r3")];
        let report = evaluate(&run, &qrels, &DEFAULT_KS).unwrap();
        assert_eq!(report.n_queries, 3);
        assert!((report.mrr - 1.25 / 3.0).abs() < 1e-12);
        assert_eq!(report.answered_at(10), Some(2));
        let firsts: Vec<_> = report
            .per_query
            .iter()
            .map(|q| q.first_relevant_rank)
            .collect();
        assert_eq!(firsts, [Some(4), Some(1), None]);
    }

    #[test]
    fn saturated_run() {
        let docs: Vec<String> = (0..10).map(|i| format!("d{i}")).collect();
        let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
        let run = entries("s", "q", &refs);
        let qrels: Vec<_> = docs.iter().map(|d| rel("q", d)).collect();
        let report = evaluate(&run, &qrels, &[10]).unwrap();
        assert_eq!(report.p_at(10), Some(1.0));
        assert_eq!(report.mrr, 1.0);
    }

    #[test]
    fn unretrieved_query_counts_in_n() {
        let run = entries("s", "q1", &["a"]);
        let qrels = vec![rel("q1", "a")];
        let universe = vec!["q1".to_string(), "q2".to_string()];
        let report = evaluate_with_queries(&run, &qrels, &universe, &DEFAULT_KS).unwrap();
        assert_eq!(report.n_queries, 2);
        assert_eq!(report.mrr, 0.5);
        assert_eq!(report.p_at(10), Some(0.05));
    }

    #[test]
    fn unjudged_documents_are_counted() {
        let run = entries("s", "q1", &["a", "b", "c"]);
        let qrels = vec![
            rel("q1", "a"),
            Judgment {
                query_id: "q1".into(),
                doc_id: "b".into(),
                relevant: false,
            },
        ];
        let report = evaluate(&run, &qrels, &DEFAULT_KS).unwrap();
        assert_eq!(report.unjudged, 1);
    }

    #[test]
    fn invalid_runs_are_rejected() {
        let mut run = entries("s", "q", &["a", "b"]);
        run[1].rank = 3;
        assert!(matches!(
            evaluate(&run, &[], &[10]),
            Err(Error::InvalidRun { .. })
        ));
        let mut run = entries("s", "q", &["a", "b"]);
        run[1].doc_id = "a".into();
        assert!(evaluate(&run, &[], &[10]).is_err());
        let mut run = entries("s", "q", &["a", "b"]);
        run[1].score = 10.0;
        assert!(evaluate(&run, &[], &[10]).is_err());
        let run = entries("s", "q9", &["a"]);
        assert!(evaluate_systems(&run, &[], &["q1".into()], &[10]).is_err());
    }

    #[test]
    fn duplicate_judgment_is_rejected() {
        let qrels = vec![rel("q", "a"), rel("q", "a")];
        assert!(matches!(
            Qrels::new(&qrels),
            Err(Error::DuplicateJudgment { .. })
        ));
    }

    #[test]
    fn matrix_and_table() {
        let mut run = entries("alpha", "q1", &["a"]);
        run.extend(entries("beta", "q2", &["x", "b"]));
        let qrels = vec![rel("q1", "a"), rel("q2", "b")];
        let universe = vec!["q1".to_string(), "q2".to_string()];
        let reports = evaluate_systems(&run, &qrels, &universe, &DEFAULT_KS).unwrap();
        let m = answered_matrix(&reports, 20);
        assert_eq!(m.systems, ["alpha", "beta"]);
        assert_eq!(m.rows, [[1, 0], [0, 1]]);
        let table = format_table(&reports);
        assert!(table.contains("1 (50.0%)"), "{table}");
        let js = reports_json(&reports);
        assert_eq!(js["reports"][0]["answered_at_20"], 1);
        assert_eq!(js["answered_matrix"][1]["rows"][0][0], 1);
    }

    #[test]
    fn file_formats_parse() {
        let qs = read_queries(
            "q1\tHLJ\tfever and rash\nq2\tBMJ\tseizures\n".as_bytes(),
            "q",
        )
        .unwrap();
        assert_eq!(qs[0].source_tag, Some(SourceTag::Hlj));
        assert_eq!(qs[1].text, "seizures");
        assert!(read_queries("q1\tHLJ\n".as_bytes(), "q").is_err());

        let js = read_qrels("q1\td1\t1\nq1\td2\t0\n".as_bytes(), "qr").unwrap();
        assert!(js[0].relevant && !js[1].relevant);
        assert!(read_qrels("q1\td1\t2\n".as_bytes(), "qr").is_err());

        let run = entries("sys", "q1", &["a", "b"]);
        let mut bytes = Vec::new();
        write_run(&mut bytes, &run).unwrap();
        assert_eq!(read_run(bytes.as_slice(), "r").unwrap(), run);
        assert!(read_run("q1\ta\tone\t0.5\tsys\n".as_bytes(), "r").is_err());
    }

    #[test]
    fn run_queries_blocks() {
        let index = build_index(vec![
            Document::new("d1", "zebra stripes", ""),
            Document::new("d2", "zebra horse", "horse"),
        ])
        .unwrap();
        let queries = vec![Query::with_id("q1", "zebra"), Query::with_id("q2", "okapi")];
        let run = run_queries(&index, &queries, &RankingParams::default(), "lm").unwrap();
        assert_eq!(run.len(), 2);
        assert_eq!(run[0].rank, 1);
        assert_eq!(run[1].rank, 2);
        let universe = vec!["q1".to_string(), "q2".to_string()];
        let report =
            evaluate_with_queries(&run, &[rel("q1", "d1")], &universe, &DEFAULT_KS).unwrap();
        assert_eq!(report.n_queries, 2);
    }
}
