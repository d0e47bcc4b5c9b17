// Jelinek-Mercer against Dirichlet smoothing on the same query.
//
// Short documents gain under Dirichlet since their estimate leans on the
// collection model; JM mixes with a fixed weight whatever the length.

use std::path::Path;

use zebra_search::ranking::{DEFAULT_LAMBDA, DEFAULT_MU};
use zebra_search::{
    build_index, load_corpus, score_document, search, term_prob_dirichlet, term_prob_jm, Document,
    Query, RankingParams,
};

pub fn run_example() -> zebra_search::Result<()> {
    // A two-document toy collection; values are easy to check by hand.
    let toy = build_index(vec![
        Document::new("d1", "zebra stripes", ""),
        Document::new("d2", "horse mane", ""),
    ])?;
    for doc in ["d1", "d2"] {
        println!(
            "P(zebra | {doc}): JM(0.5) = {:.3}, Dirichlet(2) = {:.3}",
            term_prob_jm("zebra", doc, &toy, 0.5)?,
            term_prob_dirichlet("zebra", doc, &toy, 2.0)?
        );
    }

    let corpus = load_corpus(Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus.jsonl"))?;
    let index = build_index(corpus)?;
    let query = Query::new("lysosomal pain angiokeratoma");
    for (name, params) in [
        ("JM", RankingParams::jelinek_mercer(DEFAULT_LAMBDA)),
        ("Dirichlet", RankingParams::dirichlet(DEFAULT_MU)),
    ] {
        let ranked = search(&index, &query, &params.with_top_n(4))?;
        println!("\n{name}");
        for e in &ranked.entries {
            // search() and score_document() agree to the bit.
            debug_assert_eq!(e.score, score_document(&query, &e.doc_id, &index, &params)?);
            println!("  {:>2}. {:<12} {:>9.4}", e.rank, e.doc_id, e.score);
        }
    }
    Ok(())
}

fn main() -> zebra_search::Result<()> {
    run_example()
}
