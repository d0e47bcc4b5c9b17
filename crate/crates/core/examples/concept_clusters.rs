// Group a ranked list by disease concept, then rank the concepts.

use std::path::Path;

use zebra_search::concepts::attach_mapping;
use zebra_search::{
    build_index, cluster_by_concept, load_corpus, load_mapping, rank_concepts, search, Query,
    RankingParams,
};

pub fn run_example() -> zebra_search::Result<String> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let mut docs = load_corpus(data.join("corpus.jsonl"))?;
    let mapping = load_mapping(data.join("mapping.tsv"))?;
    attach_mapping(&mut docs, &mapping);
    let index = build_index(docs)?;

    let query = Query::new("vomiting lethargy ketoacidosis pain");
    let ranked = search(&index, &query, &RankingParams::default().with_top_n(10))?;

    println!("clusters (ordered by representative rank):");
    for c in cluster_by_concept(&ranked, &mapping) {
        let members: Vec<String> = c
            .members
            .iter()
            .map(|m| format!("{}@{}", m.doc_id, m.original_rank))
            .collect();
        println!(
            "  {:<10} {:<30} {}",
            c.concept_id,
            c.concept_name,
            members.join(", ")
        );
    }

    // Each concept scores |docs| + sum of 1/rank over its documents.
    let concepts = rank_concepts(&ranked, &mapping);
    println!("concepts:");
    for c in &concepts {
        println!(
            "  {:<10} {:<30} {:.4}",
            c.concept_id, c.concept_name, c.score
        );
    }
    Ok(concepts
        .first()
        .map(|c| c.concept_id.clone())
        .unwrap_or_default())
}

fn main() -> zebra_search::Result<()> {
    run_example()?;
    Ok(())
}
