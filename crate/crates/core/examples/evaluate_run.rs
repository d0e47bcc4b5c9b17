// Run the bundled queries under both smoothing models and compare them
// against the relevance judgments.

use std::path::Path;

use zebra_search::eval::{
    answered_matrix, evaluate_systems, format_table, load_qrels, load_queries,
};
use zebra_search::{build_index, load_corpus, run_queries, EvalReport, RankingParams};

pub fn run_example() -> zebra_search::Result<Vec<EvalReport>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let index = build_index(load_corpus(data.join("corpus.jsonl"))?)?;
    let queries = load_queries(data.join("queries.tsv"))?;
    let judgments = load_qrels(data.join("qrels.tsv"))?;

    let mut run = run_queries(&index, &queries, &RankingParams::jelinek_mercer(0.9), "jm")?;
    run.extend(run_queries(
        &index,
        &queries,
        &RankingParams::dirichlet(2500.0),
        "dirichlet",
    )?);

    let universe: Vec<String> = queries.iter().filter_map(|q| q.query_id.clone()).collect();
    let reports = evaluate_systems(&run, &judgments, &universe, &[10, 20])?;
    print!("{}", format_table(&reports));

    let matrix = answered_matrix(&reports, 10);
    println!("\nanswered within top {}:", matrix.k);
    println!("{:<6} {}", "query", matrix.systems.join(" "));
    for (q, row) in matrix.query_ids.iter().zip(&matrix.rows) {
        let cells: Vec<String> = row.iter().map(u8::to_string).collect();
        println!("{q:<6} {}", cells.join(" "));
    }
    Ok(reports)
}

fn main() -> zebra_search::Result<()> {
    run_example()?;
    Ok(())
}
