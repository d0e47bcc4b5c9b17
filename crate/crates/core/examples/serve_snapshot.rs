// Serve the HTTP API on an ephemeral port, query it, then swap in a new
// snapshot without restarting.
//
// `zebra serve` does the same from a saved index and reloads on SIGHUP.

use std::path::Path;
use std::sync::Arc;

use zebra_search::service::serve_on;
use zebra_search::{build_index, load_corpus, Document, Snapshot, SnapshotStore};

async fn fetch(url: &str) -> serde_json::Value {
    reqwest::get(url)
        .await
        .expect("server reachable")
        .json()
        .await
        .expect("JSON body")
}

type BoxResult<T> = Result<T, Box<dyn std::error::Error>>;

pub fn run_example() -> BoxResult<(u64, u64)> {
    let corpus = load_corpus(Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus.jsonl"))?;
    let store = Arc::new(SnapshotStore::new(Snapshot::new(
        build_index(corpus)?,
        None,
    )));

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
        let base = format!("http://{}", listener.local_addr()?);
        tokio::spawn(serve_on(listener, Arc::clone(&store)));

        let body = fetch(&format!("{base}/api/search?q=copper%20tremor&n=2")).await;
        println!("{}", serde_json::to_string_pretty(&body).unwrap());
        let before = fetch(&format!("{base}/api/health")).await["doc_count"]
            .as_u64()
            .unwrap();

        let bad = reqwest::get(format!("{base}/api/search?q=")).await.unwrap();
        println!(
            "empty query -> {} {}",
            bad.status(),
            bad.text().await.unwrap()
        );

        store.replace(Snapshot::new(
            build_index(vec![Document::new(
                "new-1",
                "Hereditary angioedema",
                "swelling attacks",
            )])?,
            None,
        ));
        let after = fetch(&format!("{base}/api/health")).await["doc_count"]
            .as_u64()
            .unwrap();
        println!("doc_count {before} -> {after} after swap");
        Ok::<_, Box<dyn std::error::Error>>((before, after))
    })
}

fn main() -> BoxResult<()> {
    run_example()?;
    Ok(())
}
