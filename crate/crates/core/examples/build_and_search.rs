// Build an index from the bundled corpus and run a free-text query.
//
//     cargo run --example build_and_search -- "vomiting lethargy ketoacidosis"

use std::path::Path;

use zebra_search::concepts::attach_mapping;
use zebra_search::service::{render_table, SearchRequest};
use zebra_search::{build_index, load_corpus, load_mapping, Snapshot};

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

pub fn run_example(query: &str) -> zebra_search::Result<Vec<String>> {
    let mut docs = load_corpus(data("corpus.jsonl"))?;
    let mapping = load_mapping(data("mapping.tsv"))?;
    attach_mapping(&mut docs, &mapping);
    let index = build_index(docs)?;
    let stats = index.stats();
    println!(
        "{} documents, {} tokens, {} distinct terms",
        stats.doc_count, stats.collection_term_count, stats.vocabulary_size
    );

    let snapshot = Snapshot::new(index, Some(mapping));
    let mut req = SearchRequest::new(query);
    req.params = req.params.with_top_n(5);
    let resp = snapshot.execute(&req)?;
    print!("{}", render_table(&resp));

    let zebra_search::service::SearchResults::Documents(hits) = resp.results else {
        unreachable!("documents mode")
    };
    Ok(hits.into_iter().map(|h| h.doc_id).collect())
}

fn main() -> zebra_search::Result<()> {
    let query = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "vomiting lethargy ketoacidosis".into());
    run_example(&query)?;
    Ok(())
}
