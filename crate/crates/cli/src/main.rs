//! `scholarsum`: ingest a corpus, search it, summarize the top results, or
//! run the HTTP service.
//!
//! Exit codes: 0 success, 1 pipeline or validation failure, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::Datelike;
use clap::{Args, CommandFactory, Parser, Subcommand};
use scholarsum::corpus::{ingest, CorpusSnapshot, DocType};
use scholarsum::llm::{Backend, LlmClient};
use scholarsum::ranking::{search, Ordering, SearchRequest};
use scholarsum::service::{self, ServiceConfig};
use scholarsum::summarizer::{PromptTemplates, SourceArticle, SummaryRequest, MAX_ARTICLES};
use scholarsum::SummaryPipeline;

#[derive(Debug, Parser)]
#[command(
    name = "scholarsum",
    version,
    about = "Impact-ranked search and cited multi-document summaries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ingest a corpus file and print the ingest report.
    Ingest {
        #[arg(long, env = "CORPUS_PATH")]
        corpus: PathBuf,
        /// Only print the report; exit 1 if any record was rejected.
        #[arg(long)]
        validate_only: bool,
    },
    /// Search the corpus and print rank, score, id and title per line.
    Search(SearchArgs),
    /// Summarize the top results of a search.
    Summarize(SummarizeArgs),
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "PORT")]
        port: Option<u16>,
        #[arg(long, env = "CORPUS_PATH")]
        corpus: Option<PathBuf>,
        /// Use the built-in deterministic generator instead of a remote model.
        #[arg(long)]
        mock_llm: bool,
        #[arg(long, env = "ALLOWED_ORIGIN")]
        allowed_origin: Option<String>,
    },
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, env = "CORPUS_PATH")]
    corpus: PathBuf,
    #[arg(long, short, default_value = "")]
    query: String,
    /// popularity, influence, citation_count, year or relevance.
    #[arg(long, default_value = "popularity", value_parser = parse_ordering)]
    order: Ordering,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    limit: u64,
    #[arg(long, default_value_t = 0)]
    offset: usize,
    #[command(flatten)]
    filters: FilterArgs,
}

#[derive(Debug, Args)]
struct SummarizeArgs {
    #[arg(long, env = "CORPUS_PATH")]
    corpus: PathBuf,
    #[arg(long, short, default_value = "")]
    query: String,
    /// Number of top results to summarize (1-20).
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..=MAX_ARTICLES as u64))]
    top: u64,
    #[arg(long, default_value = "popularity", value_parser = parse_ordering)]
    order: Ordering,
    #[command(flatten)]
    filters: FilterArgs,
    /// Use the built-in deterministic generator instead of a remote model.
    #[arg(long)]
    mock_llm: bool,
    /// Emit the response as JSON, in the same form as the HTTP API.
    #[arg(long)]
    json: bool,
    #[arg(long, env = "BUDGET_TOKENS")]
    budget_tokens: Option<usize>,
    /// Prompt template file (defaults to the bundled templates).
    #[arg(long, env = "PROMPT_TEMPLATES")]
    prompts: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FilterArgs {
    #[arg(long)]
    year_from: Option<i32>,
    #[arg(long)]
    year_to: Option<i32>,
    /// Repeatable: publication, dataset, software, other.
    #[arg(long = "doc-type", value_parser = parse_doc_type)]
    doc_types: Vec<DocType>,
    /// Repeatable; an article matches if it has any of the given topics.
    #[arg(long = "topic")]
    topics: Vec<String>,
    /// Reference year for popularity decay (defaults to the current year).
    #[arg(long, env = "NOW_YEAR")]
    now_year: Option<i32>,
}

fn parse_ordering(s: &str) -> Result<Ordering, String> {
    s.parse()
        .map_err(|e: scholarsum::ranking::RankingError| e.to_string())
}

fn parse_doc_type(s: &str) -> Result<DocType, String> {
    s.parse()
}

impl FilterArgs {
    fn request(
        &self,
        query: &str,
        ordering: Ordering,
        limit: usize,
        offset: usize,
    ) -> SearchRequest {
        SearchRequest {
            query: query.to_string(),
            year_from: self.year_from,
            year_to: self.year_to,
            doc_types: (!self.doc_types.is_empty())
                .then(|| self.doc_types.iter().copied().collect()),
            topics: (!self.topics.is_empty()).then(|| self.topics.iter().cloned().collect()),
            ordering,
            limit,
            offset,
        }
    }

    fn now_year(&self) -> i32 {
        self.now_year.unwrap_or_else(|| chrono::Utc::now().year())
    }
}

/// A failure that has already been described and maps to an exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn pipeline(message: impl ToString) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }

    fn usage(message: impl ToString) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }
}

fn load(path: &PathBuf) -> Result<CorpusSnapshot, Failure> {
    ingest(path).map_err(|e| Failure::pipeline(format!("error: {e}")))
}

fn run_ingest(corpus: &PathBuf, validate_only: bool) -> Result<(), Failure> {
    let snapshot = load(corpus)?;
    print!("{}", snapshot.report());
    if validate_only {
        if snapshot.report().rejected_count() > 0 {
            return Err(Failure::pipeline("error: corpus has rejected records"));
        }
        return Ok(());
    }
    for a in snapshot.articles() {
        println!("{}\t{}\t{}\t{}", a.id, a.year, a.doc_type, a.title);
    }
    Ok(())
}

fn run_search(args: &SearchArgs) -> Result<(), Failure> {
    let snapshot = load(&args.corpus)?;
    let request = args
        .filters
        .request(&args.query, args.order, args.limit as usize, args.offset);
    let page = search(&snapshot, &request, args.filters.now_year()).map_err(Failure::usage)?;
    for r in &page.results {
        println!("{}\t{:.4}\t{}\t{}", r.rank, r.score, r.article_id, r.title);
    }
    eprintln!("{} of {} results", page.results.len(), page.total);
    Ok(())
}

fn run_summarize(args: &SummarizeArgs) -> Result<(), Failure> {
    let mut config = ServiceConfig::parse(|k| std::env::var(k).ok()).map_err(Failure::usage)?;
    if args.mock_llm {
        config.llm.backend = Backend::Mock;
    }
    if let Some(b) = args.budget_tokens {
        config.budget_tokens = b;
    }
    config.validate().map_err(Failure::usage)?;

    let templates = match &args.prompts {
        Some(p) => PromptTemplates::load(p).map_err(|e| Failure::usage(format!("error: {e}")))?,
        None => PromptTemplates::default(),
    };
    let llm = LlmClient::new(config.llm.clone()).map_err(Failure::usage)?;
    let pipeline = SummaryPipeline {
        templates,
        budget_tokens: config.budget_tokens,
        thresholds: config.thresholds,
        llm,
    };

    let snapshot = load(&args.corpus)?;
    let request = args
        .filters
        .request(&args.query, args.order, args.top as usize, 0);
    let page = search(&snapshot, &request, args.filters.now_year()).map_err(Failure::usage)?;
    if page.results.is_empty() {
        return Err(Failure::pipeline(
            "error: the search returned no results to summarize",
        ));
    }
    if page.results.len() < args.top as usize {
        eprintln!(
            "note: only {} results available; summarizing all of them",
            page.results.len()
        );
    }

    let articles = page
        .results
        .iter()
        .map(|r| {
            let a = snapshot
                .get(&r.article_id)
                .expect("search returns corpus ids");
            SourceArticle::new(a.id.clone(), a.title.clone(), a.abstract_text.clone())
        })
        .collect();
    let summary_request = SummaryRequest {
        query: args.query.clone(),
        articles,
    };

    let runtime = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .map_err(Failure::pipeline)?;
    let response = runtime
        .block_on(pipeline.run(&summary_request))
        .map_err(|e| Failure::pipeline(format!("error: {e}")))?;

    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&response).expect("response serializes")
        );
    } else {
        print!("{}", response.render_text());
    }

    let v = &response.validation;
    if !v.structure_ok {
        eprintln!(
            "warning: {} paragraph(s) do not match {} mode",
            v.paragraph_count, response.mode
        );
    }
    if !v.unused_sources.is_empty() {
        eprintln!("warning: uncited sources {:?}", v.unused_sources);
    }
    for w in &v.grounding_warnings {
        eprintln!(
            "warning: sentence {} has low overlap with its sources ({:.2})",
            w.sentence_ordinal + 1,
            w.overlap_score
        );
    }
    if !v.hard_pass {
        return Err(Failure::pipeline(format!(
            "error: validation failed (coverage {:.2}, out-of-range citations {:?})",
            v.coverage, v.out_of_range
        )));
    }
    Ok(())
}

fn run_serve(
    port: Option<u16>,
    corpus: Option<PathBuf>,
    mock_llm: bool,
    allowed_origin: Option<String>,
) -> Result<(), Failure> {
    let mut config = ServiceConfig::parse(|k| std::env::var(k).ok()).map_err(Failure::usage)?;
    if let Some(p) = port {
        config.port = p;
    }
    if corpus.is_some() {
        config.corpus_path = corpus;
    }
    if mock_llm {
        config.llm.backend = Backend::Mock;
    }
    if allowed_origin.is_some() {
        config.allowed_origin = allowed_origin;
    }
    config.validate().map_err(Failure::usage)?;

    let runtime = tokio::runtime::Runtime::new().map_err(Failure::pipeline)?;
    runtime
        .block_on(service::serve(config))
        .map_err(|e| Failure::pipeline(format!("error: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve { .. }) {
        "info"
    } else {
        "warn"
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default_level)),
        )
        .init();

    let result = match &cli.command {
        Command::Ingest {
            corpus,
            validate_only,
        } => run_ingest(corpus, *validate_only),
        Command::Search(args) => run_search(args),
        Command::Summarize(args) => run_summarize(args),
        Command::Serve {
            port,
            corpus,
            mock_llm,
            allowed_origin,
        } => run_serve(*port, corpus.clone(), *mock_llm, allowed_origin.clone()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            if f.code == 2 {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            ExitCode::from(f.code)
        }
    }
}
