//! Concept views of a ranked list: clustering the top documents by medical
//! concept, and ranking concepts directly.
//!
//! A concept's score over the top `j` results is the number of its member
//! documents plus the sum of their reciprocal ranks, so a concept backed by
//! several mid-ranked documents can outrank one backed by a single top hit.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::index::Index;
use crate::ranking::RankedList;

/// Number of top documents considered by the concept views.
pub const DEFAULT_TOP_J: usize = 50;

/// Label of the trailing cluster that collects documents without concepts.
pub const UNMAPPED: &str = "unmapped";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptRef {
    pub concept_id: String,
    pub concept_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptDocs {
    pub concept_name: String,
    pub doc_ids: Vec<String>,
}

/// Document to concept assignment, held in both directions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptMapping {
    by_doc: BTreeMap<String, Vec<ConceptRef>>,
    by_concept: BTreeMap<String, ConceptDocs>,
}

impl ConceptMapping {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `doc_id -> concept_id`. Repeating a pair is a no-op; giving a
    /// concept a second, different name is an error.
    pub fn insert(&mut self, doc_id: &str, concept_id: &str, concept_name: &str) -> Result<()> {
        match self.by_concept.entry(concept_id.to_string()) {
            Entry::Occupied(mut e) => {
                let entry = e.get_mut();
                if entry.concept_name != concept_name {
                    return Err(Error::ConflictingConceptName {
                        concept_id: concept_id.to_string(),
                        first: entry.concept_name.clone(),
                        second: concept_name.to_string(),
                    });
                }
                if entry.doc_ids.iter().any(|d| d == doc_id) {
                    return Ok(());
                }
                entry.doc_ids.push(doc_id.to_string());
            }
            Entry::Vacant(e) => {
                e.insert(ConceptDocs {
                    concept_name: concept_name.to_string(),
                    doc_ids: vec![doc_id.to_string()],
                });
            }
        }
        self.by_doc
            .entry(doc_id.to_string())
            .or_default()
            .push(ConceptRef {
                concept_id: concept_id.to_string(),
                concept_name: concept_name.to_string(),
            });
        Ok(())
    }

    /// Mapping implied by the concept ids stored on indexed documents. Names
    /// default to the concept id.
    pub fn from_index(index: &Index) -> Self {
        let mut mapping = Self::new();
        for doc in index.documents() {
            for c in &doc.concept_ids {
                // Names equal ids here, so insertion cannot conflict.
                mapping
                    .insert(&doc.doc_id, c, c)
                    .expect("id-named concepts never conflict");
            }
        }
        mapping
    }

    pub fn concepts_of(&self, doc_id: &str) -> &[ConceptRef] {
        self.by_doc.get(doc_id).map_or(&[], |v| v.as_slice())
    }

    pub fn concept(&self, concept_id: &str) -> Option<&ConceptDocs> {
        self.by_concept.get(concept_id)
    }

    pub fn name_of(&self, concept_id: &str) -> Option<&str> {
        self.by_concept
            .get(concept_id)
            .map(|c| c.concept_name.as_str())
    }

    pub fn by_doc(&self) -> &BTreeMap<String, Vec<ConceptRef>> {
        &self.by_doc
    }

    pub fn by_concept(&self) -> &BTreeMap<String, ConceptDocs> {
        &self.by_concept
    }

    pub fn is_empty(&self) -> bool {
        self.by_doc.is_empty()
    }

    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (doc, refs) in &self.by_doc {
            for r in refs {
                let entry = self
                    .by_concept
                    .get(&r.concept_id)
                    .ok_or_else(|| format!("{doc} -> {} missing inverse", r.concept_id))?;
                if !entry.doc_ids.contains(doc) {
                    return Err(format!("{} does not list {doc}", r.concept_id));
                }
                if entry.concept_name != r.concept_name {
                    return Err(format!("name mismatch for {}", r.concept_id));
                }
            }
        }
        for (concept, entry) in &self.by_concept {
            if concept.is_empty() {
                return Err("empty concept id".into());
            }
            for doc in &entry.doc_ids {
                if !self
                    .concepts_of(doc)
                    .iter()
                    .any(|r| &r.concept_id == concept)
                {
                    return Err(format!("{doc} does not list {concept}"));
                }
            }
        }
        Ok(())
    }
}

/// Adds every mapped concept to its document's `concept_ids`, so concept-id
/// queries see the mapping. Returns how many mapped doc ids were not found
/// in `docs`.
pub fn attach_mapping(docs: &mut [Document], mapping: &ConceptMapping) -> usize {
    let mut found = 0;
    for doc in docs.iter_mut() {
        let refs = mapping.concepts_of(&doc.doc_id);
        if !refs.is_empty() {
            found += 1;
        }
        for r in refs {
            if !doc.concept_ids.contains(&r.concept_id) {
                doc.concept_ids.push(r.concept_id.clone());
            }
        }
    }
    mapping.by_doc().len() - found
}

/// Loads a mapping file of `doc_id<TAB>concept_id<TAB>concept_name` lines.
pub fn load_mapping(path: impl AsRef<Path>) -> Result<ConceptMapping> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_mapping(BufReader::new(file), &path.display().to_string())
}

pub fn read_mapping<R: BufRead>(reader: R, origin: &str) -> Result<ConceptMapping> {
    let mut mapping = ConceptMapping::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::malformed(origin, line_no, e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [doc_id, concept_id, concept_name] = fields[..] else {
            return Err(Error::malformed(
                origin,
                line_no,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        };
        if doc_id.is_empty() || concept_id.is_empty() {
            return Err(Error::malformed(
                origin,
                line_no,
                "empty doc_id or concept_id",
            ));
        }
        mapping.insert(doc_id, concept_id, concept_name)?;
    }
    Ok(mapping)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterMember {
    pub doc_id: String,
    /// Rank in the underlying document list.
    pub original_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptCluster {
    pub concept_id: String,
    pub concept_name: String,
    /// Highest ranked member.
    pub representative: ClusterMember,
    /// Sorted by original rank.
    pub members: Vec<ClusterMember>,
}

impl ConceptCluster {
    pub fn is_unmapped(&self) -> bool {
        self.concept_id == UNMAPPED
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptScore {
    pub concept_id: String,
    pub concept_name: String,
    pub score: f64,
    /// Sorted by original rank.
    pub contributing_docs: Vec<ClusterMember>,
}

/// Groups members by concept, preserving rank order within each group.
fn group_by_concept<'a>(
    ranked: &RankedList,
    mapping: &'a ConceptMapping,
) -> (BTreeMap<&'a str, Vec<ClusterMember>>, Vec<ClusterMember>) {
    let mut entries: Vec<_> = ranked.entries.iter().collect();
    entries.sort_by_key(|e| e.rank);
    let mut groups: BTreeMap<&str, Vec<ClusterMember>> = BTreeMap::new();
    let mut unmapped = Vec::new();
    for e in entries {
        let member = ClusterMember {
            doc_id: e.doc_id.clone(),
            original_rank: e.rank,
        };
        let concepts = mapping.concepts_of(&e.doc_id);
        if concepts.is_empty() {
            unmapped.push(member);
            continue;
        }
        for c in concepts {
            groups
                .entry(c.concept_id.as_str())
                .or_default()
                .push(member.clone());
        }
    }
    (groups, unmapped)
}

/// Clusters a (top-j) ranked list by concept.
///
/// Clusters are ordered by their representative's rank, ties by concept id.
/// Documents without concepts go to a trailing [`UNMAPPED`] cluster.
pub fn cluster_by_concept(ranked: &RankedList, mapping: &ConceptMapping) -> Vec<ConceptCluster> {
    let (groups, unmapped) = group_by_concept(ranked, mapping);
    let mut clusters: Vec<ConceptCluster> = groups
        .into_iter()
        .map(|(concept_id, members)| ConceptCluster {
            concept_id: concept_id.to_string(),
            concept_name: mapping
                .name_of(concept_id)
                .unwrap_or(concept_id)
                .to_string(),
            representative: members[0].clone(),
            members,
        })
        .collect();
    clusters.sort_by(|a, b| {
        a.representative
            .original_rank
            .cmp(&b.representative.original_rank)
            .then_with(|| a.concept_id.cmp(&b.concept_id))
    });
    if !unmapped.is_empty() {
        clusters.push(ConceptCluster {
            concept_id: UNMAPPED.to_string(),
            concept_name: UNMAPPED.to_string(),
            representative: unmapped[0].clone(),
            members: unmapped,
        });
    }
    clusters
}

/// Concept score: member count plus the sum of reciprocal member ranks.
pub fn concept_score(ranks: impl IntoIterator<Item = usize>) -> f64 {
    let mut count = 0usize;
    let mut reciprocal = 0.0;
    for r in ranks {
        count += 1;
        reciprocal += 1.0 / r as f64;
    }
    count as f64 + reciprocal
}

/// Ranks concepts over a (top-j) ranked list. Ordered by score descending,
/// then best member rank, then concept id. Unmapped documents are ignored.
pub fn rank_concepts(ranked: &RankedList, mapping: &ConceptMapping) -> Vec<ConceptScore> {
    let (groups, _) = group_by_concept(ranked, mapping);
    let mut scores: Vec<ConceptScore> = groups
        .into_iter()
        .map(|(concept_id, members)| ConceptScore {
            concept_id: concept_id.to_string(),
            concept_name: mapping
                .name_of(concept_id)
                .unwrap_or(concept_id)
                .to_string(),
            score: concept_score(members.iter().map(|m| m.original_rank)),
            contributing_docs: members,
        })
        .collect();
    scores.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| {
                a.contributing_docs[0]
                    .original_rank
                    .cmp(&b.contributing_docs[0].original_rank)
            })
            .then_with(|| a.concept_id.cmp(&b.concept_id))
    });
    scores
}

/// Count of clusters each document appears in; used by tests and callers
/// checking membership conservation.
pub fn membership_counts(clusters: &[ConceptCluster]) -> HashMap<&str, usize> {
    let mut counts = HashMap::new();
    for c in clusters {
        for m in &c.members {
            *counts.entry(m.doc_id.as_str()).or_insert(0) += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::RankedEntry;
    use proptest::prelude::*;

    fn ranked(ids: &[&str]) -> RankedList {
        RankedList {
            query_id: None,
            entries: ids
                .iter()
                .enumerate()
                .map(|(i, id)| RankedEntry {
                    doc_id: id.to_string(),
                    score: -(i as f64),
                    rank: i + 1,
                })
                .collect(),
        }
    }

    fn docs(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("d{i}")).collect()
    }

    #[test]
    fn mapping_file_builds_both_directions() {
        let m = read_mapping("d1\tC1\tZebra fever\nd2\tC1\tZebra fever\n".as_bytes(), "m").unwrap();
        assert_eq!(m.concept("C1").unwrap().doc_ids, ["d1", "d2"]);
        m.check_invariants().unwrap();

        let m = read_mapping("d1\tC1\tOne\nd1\tC2\tTwo\n".as_bytes(), "m").unwrap();
        let ids: Vec<_> = m
            .concepts_of("d1")
            .iter()
            .map(|c| c.concept_id.as_str())
            .collect();
        assert_eq!(ids, ["C1", "C2"]);
        assert_eq!(m.concept("C1").unwrap().doc_ids, ["d1"]);
        assert_eq!(m.concept("C2").unwrap().doc_ids, ["d1"]);
        m.check_invariants().unwrap();

        assert!(read_mapping("".as_bytes(), "m").unwrap().is_empty());
    }

    #[test]
    fn attaching_mapping_extends_concept_ids() {
        let m = read_mapping(
            "d1\tC1\tOne\nd1\tC2\tTwo\nghost\tC3\tThree\n".as_bytes(),
            "m",
        )
        .unwrap();
        let mut docs = vec![Document::new("d1", "t", ""), Document::new("d2", "u", "")];
        docs[0].concept_ids = vec!["C2".into()];
        assert_eq!(attach_mapping(&mut docs, &m), 1);
        assert_eq!(docs[0].concept_ids, ["C2", "C1"]);
        assert!(docs[1].concept_ids.is_empty());
    }

    #[test]
    fn mapping_errors() {
        let err = read_mapping("d1\tC1\tA\nd2\tC1\tB\n".as_bytes(), "m").unwrap_err();
        assert!(matches!(err, Error::ConflictingConceptName { .. }));
        let err = read_mapping("d1\tC1\tA\nd2 C1 B\n".as_bytes(), "m").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }));
        let err = read_mapping("\tC1\tA\n".as_bytes(), "m").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 1, .. }));
    }

    /// Singletons at ranks 1-3, the target concept on ranks 4, 10 and 27,
    /// everything else unmapped.
    fn case_25() -> (RankedList, ConceptMapping) {
        let ids = docs(50);
        let mut m = ConceptMapping::new();
        m.insert("d1", "C01", "Singleton one").unwrap();
        m.insert("d2", "C02", "Singleton two").unwrap();
        m.insert("d3", "C03", "Singleton three").unwrap();
        for d in ["d4", "d10", "d27"] {
            m.insert(d, "C0268579", "Ketotic Hyperglycinemia").unwrap();
        }
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        (ranked(&refs), m)
    }

    #[test]
    fn mid_ranked_concept_becomes_fourth_cluster_and_top_concept() {
        let (list, m) = case_25();
        let clusters = cluster_by_concept(&list, &m);
        let target = &clusters[3];
        assert_eq!(target.concept_id, "C0268579");
        assert_eq!(target.representative.original_rank, 4);
        let ranks: Vec<_> = target.members.iter().map(|x| x.original_rank).collect();
        assert_eq!(ranks, [4, 10, 27]);
        assert!(clusters.last().unwrap().is_unmapped());

        let concepts = rank_concepts(&list, &m);
        assert_eq!(concepts[0].concept_id, "C0268579");
        assert!((concepts[0].score - 3.387_037_037_037_037).abs() < 1e-9);
        assert_eq!(concepts[1].score, 2.0);
    }

    #[test]
    fn target_is_third_cluster_when_top_two_share_a_concept() {
        let (list, mut m) = case_25();
        m = {
            let mut fresh = ConceptMapping::new();
            for (doc, refs) in m.by_doc() {
                for r in refs {
                    let id = if r.concept_id == "C02" {
                        "C01"
                    } else {
                        r.concept_id.as_str()
                    };
                    let name = m.name_of(id).unwrap();
                    fresh.insert(doc, id, name).unwrap();
                }
            }
            fresh
        };
        let clusters = cluster_by_concept(&list, &m);
        assert_eq!(clusters[2].concept_name, "Ketotic Hyperglycinemia");
        assert_eq!(clusters[2].members.len(), 3);
        assert_eq!(clusters[0].members.len(), 2);
    }

    #[test]
    fn distinct_concepts_replicate_ranking() {
        let ids = docs(5);
        let mut m = ConceptMapping::new();
        for (i, d) in ids.iter().enumerate() {
            // Concept ids deliberately sort opposite to rank.
            m.insert(d, &format!("C{}", 9 - i), "x").unwrap();
        }
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let clusters = cluster_by_concept(&ranked(&refs), &m);
        let reps: Vec<_> = clusters
            .iter()
            .map(|c| c.representative.doc_id.as_str())
            .collect();
        assert_eq!(reps, refs);
    }

    #[test]
    fn nothing_mapped_gives_one_unmapped_cluster() {
        let ids = docs(50);
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let clusters = cluster_by_concept(&ranked(&refs), &ConceptMapping::new());
        assert_eq!(clusters.len(), 1);
        assert!(clusters[0].is_unmapped());
        let members: Vec<_> = clusters[0]
            .members
            .iter()
            .map(|m| m.doc_id.as_str())
            .collect();
        assert_eq!(members, refs);
        assert!(rank_concepts(&ranked(&refs), &ConceptMapping::new()).is_empty());
    }

    #[test]
    fn single_top_member_scores_two() {
        let mut m = ConceptMapping::new();
        m.insert("d1", "C1", "x").unwrap();
        assert_eq!(rank_concepts(&ranked(&["d1"]), &m)[0].score, 2.0);
    }

    #[test]
    fn concept_score_ties_break_on_best_rank_then_id() {
        let mut m = ConceptMapping::new();
        // Identical member sets, so identical scores and best ranks.
        m.insert("d2", "CB", "b").unwrap();
        m.insert("d3", "CB", "b").unwrap();
        m.insert("d2", "CA", "a").unwrap();
        m.insert("d3", "CA", "a").unwrap();
        let scores = rank_concepts(&ranked(&["d1", "d2", "d3"]), &m);
        let ids: Vec<_> = scores.iter().map(|s| s.concept_id.as_str()).collect();
        assert_eq!(ids, ["CA", "CB"]);
    }

    fn mapping_strategy(n_docs: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
        proptest::collection::vec(proptest::collection::btree_set(0u8..8, 0..3), n_docs)
            .prop_map(|v| v.into_iter().map(|s| s.into_iter().collect()).collect())
    }

    proptest! {
        #[test]
        fn membership_is_conserved(assign in mapping_strategy(30)) {
            let ids = docs(30);
            let mut m = ConceptMapping::new();
            for (d, concepts) in ids.iter().zip(&assign) {
                for c in concepts {
                    m.insert(d, &format!("C{c}"), &format!("name {c}")).unwrap();
                }
            }
            let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
            let clusters = cluster_by_concept(&ranked(&refs), &m);
            let counts = membership_counts(&clusters);
            for (d, concepts) in ids.iter().zip(&assign) {
                let expected = concepts.len().max(1);
                prop_assert_eq!(counts.get(d.as_str()).copied().unwrap_or(0), expected);
            }
            for c in &clusters {
                prop_assert_eq!(&c.representative, &c.members[0]);
                prop_assert!(c.members.windows(2).all(|w| w[0].original_rank < w[1].original_rank));
            }
            for s in rank_concepts(&ranked(&refs), &m) {
                prop_assert!(s.score >= s.contributing_docs.len() as f64);
            }
        }

        #[test]
        fn extra_member_adds_one_plus_reciprocal(
            ranks in proptest::collection::btree_set(1usize..50, 0..10),
            extra in 1usize..60,
        ) {
            prop_assume!(!ranks.contains(&extra));
            let before = concept_score(ranks.iter().copied());
            let after = concept_score(ranks.iter().copied().chain([extra]));
            prop_assert!(after > before);
            prop_assert!((after - before - (1.0 + 1.0 / extra as f64)).abs() < 1e-12);
        }
    }
}
