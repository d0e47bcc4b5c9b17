use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use zebra_search::concepts::{attach_mapping, load_mapping};
use zebra_search::eval::{self, evaluate_systems, load_qrels, load_queries, load_run, run_queries};
use zebra_search::index::{build_index, load_index, save_index};
use zebra_search::ranking::{CorpusFilter, RankingParams, SmoothingModel};
use zebra_search::service::{
    self, render_table, Mode, QueryRoute, SearchRequest, Snapshot, SnapshotSource,
};
use zebra_search::{load_corpus, DEFAULT_TOP_J};

#[derive(Parser)]
#[command(
    name = "zebra",
    version,
    about = "Rare-disease vertical search: index, search, serve, evaluate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from a corpus file.
    Index {
        #[arg(long)]
        corpus: PathBuf,
        /// doc_id<TAB>concept_id<TAB>concept_name lines merged into the documents.
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one query against a saved index.
    Search {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long, short)]
        query: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Documents)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = ByArg::Text)]
        by: ByArg,
        #[command(flatten)]
        ranking: RankingArgs,
        #[arg(long = "top-j", default_value_t = DEFAULT_TOP_J)]
        top_j: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Serve the HTTP API. SIGHUP reloads the index and mapping from disk.
    Serve {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
    /// Evaluate a run file, or run the queries against an index first.
    Eval {
        #[arg(long, conflicts_with = "index", required_unless_present = "index")]
        run: Option<PathBuf>,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [10, 20])]
        ks: Vec<usize>,
        /// System name recorded in a generated run.
        #[arg(long, default_value = "zebra")]
        system: String,
        #[command(flatten)]
        ranking: RankingArgs,
        /// Directory receiving report.txt, report.json (and run.tsv).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Args)]
struct RankingArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Dirichlet)]
    model: ModelArg,
    #[arg(long, default_value_t = zebra_search::ranking::DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, default_value_t = zebra_search::ranking::DEFAULT_MU)]
    mu: f64,
    #[arg(short = 'n', long = "n", default_value_t = zebra_search::ranking::DEFAULT_TOP_N)]
    n: usize,
    #[arg(long, value_enum, default_value_t = CorpusArg::All)]
    corpus: CorpusArg,
}

impl RankingArgs {
    fn params(&self) -> anyhow::Result<RankingParams> {
        let params = RankingParams {
            model: match self.model {
                ModelArg::Jm => SmoothingModel::JelinekMercer,
                ModelArg::Dirichlet => SmoothingModel::Dirichlet,
            },
            lambda: self.lambda,
            mu: self.mu,
            top_n: self.n,
            corpus_filter: match self.corpus {
                CorpusArg::All => CorpusFilter::All,
                CorpusArg::Rare => CorpusFilter::RareOnly,
            },
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Jm,
    Dirichlet,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusArg {
    All,
    Rare,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Documents,
    Clusters,
    Concepts,
}

#[derive(Clone, Copy, ValueEnum)]
enum ByArg {
    Text,
    Concept,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Index {
            corpus,
            mapping,
            out,
        } => {
            let mut docs = load_corpus(&corpus)?;
            if let Some(path) = mapping {
                let mapping = load_mapping(&path)?;
                let missing = attach_mapping(&mut docs, &mapping);
                if missing > 0 {
                    tracing::warn!(missing, "mapping names documents absent from the corpus");
                }
            }
            let index = build_index(docs)?;
            save_index(&index, &out)?;
            let stats = index.stats();
            println!(
                "indexed {} documents, {} tokens, {} terms -> {}",
                stats.doc_count,
                stats.collection_term_count,
                stats.vocabulary_size,
                out.display()
            );
        }
        Command::Search {
            index,
            mapping,
            query,
            mode,
            by,
            ranking,
            top_j,
            format,
        } => {
            let snapshot = Snapshot::load(&index, mapping.as_deref())?;
            let req = SearchRequest {
                q: query,
                mode: match mode {
                    ModeArg::Documents => Mode::Documents,
                    ModeArg::Clusters => Mode::Clusters,
                    ModeArg::Concepts => Mode::Concepts,
                },
                by: match by {
                    ByArg::Text => QueryRoute::Text,
                    ByArg::Concept => QueryRoute::Concept,
                },
                params: ranking.params()?,
                top_j,
            };
            if top_j == 0 {
                bail!("--top-j must be at least 1");
            }
            let resp = snapshot.execute(&req)?;
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&resp)?),
                Format::Table => print!("{}", render_table(&resp)),
            }
        }
        Command::Serve {
            index,
            mapping,
            port,
            host,
        } => {
            let source = SnapshotSource {
                index_path: index,
                mapping_path: mapping,
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(service::serve(source, SocketAddr::new(host, port)))?;
        }
        Command::Eval {
            run,
            index,
            queries,
            qrels,
            ks,
            system,
            ranking,
            out,
            format,
        } => {
            let queries = load_queries(&queries)?;
            let judgments = load_qrels(&qrels)?;
            let entries = match (run, index) {
                (Some(path), None) => load_run(&path)?,
                (None, Some(path)) => {
                    let index = load_index(&path)?;
                    let entries = run_queries(&index, &queries, &ranking.params()?, &system)?;
                    if let Some(dir) = &out {
                        std::fs::create_dir_all(dir)
                            .with_context(|| format!("creating {}", dir.display()))?;
                        eval::save_run(dir.join("run.tsv"), &entries)?;
                    }
                    entries
                }
                _ => bail!("pass exactly one of --run or --index"),
            };
            let universe: Vec<String> = queries.iter().filter_map(|q| q.query_id.clone()).collect();
            let reports = evaluate_systems(&entries, &judgments, &universe, &ks)?;
            if let Some(dir) = &out {
                eval::write_reports(dir, &reports)?;
            }
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&eval::reports_json(&reports))?
                ),
                Format::Table => print!("{}", eval::format_table(&reports)),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
