//! Command-line surface. Exit codes: 0 success, 1 runtime error, 2 usage.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use rca_core::cleanse::{clean_incident, CleanReport};
use rca_core::embed::{EmbedderConfig, EmbedderMode};
use rca_core::experiment::{
    build_retrieval_index, render_csv, run_experiment, significance, Design, ExperimentConfig,
    ExperimentProviders, RunResult, SignificanceMethod,
};
use rca_core::incident::{filter_incidents, split_corpus, FilterSpec, Incident, SplitSizes};
use rca_core::index::{quantize, IndexKind};
use rca_core::metrics::NATIVE_METRICS;
use rca_core::prompt::{OrderingMode, TokenBudget, TokenCounter};
use rca_core::retrieve::SelectionMode;
use rca_core::summarize::{MemoryCache, SummaryCache};
use rca_core::synth::{generate_synthetic_corpus, SynthConfig};

use crate::config::AppConfig;
use crate::http::AppState;
use crate::io::{
    load_eval_pairs, load_incidents, load_index, load_single_incident, save_index,
    write_incidents, FileSummaryCache,
};
use crate::pipeline::{run_rca, summarize_batch, RcaParams};
use crate::providers::{embedder_from_config, ProviderConfig, RequestStyle};

#[derive(Parser)]
#[command(
    name = "rca",
    version,
    about = "Retrieval-augmented root-cause analysis for incident tickets"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load, filter, and chronologically split raw incident records.
    Ingest(IngestArgs),
    /// Strip stack traces and embedded images from incident text.
    Clean(CleanArgs),
    /// Summarize incident summaries and root causes with caching.
    Summarize(SummarizeArgs),
    /// Embed a summarized corpus and write the binary index.
    IndexBuild(IndexBuildArgs),
    /// Find the most similar historical incidents for one ticket.
    Query(QueryArgs),
    /// Generate a root-cause suggestion for one ticket.
    Generate(GenerateArgs),
    /// Score candidate/reference pairs with the lexical metrics.
    Evaluate(EvaluateArgs),
    /// Run a study design over a corpus and write its results.
    ExperimentRun(ExperimentArgs),
    /// Convert a stored run result into a report file.
    Report(ReportArgs),
    /// Emit a seeded synthetic corpus for offline work.
    SynthCorpus(SynthArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Newline-delimited JSON incident records.
    #[arg(long)]
    input: PathBuf,
    /// Directory for filtered output and split files.
    #[arg(long)]
    out_dir: PathBuf,
    /// Retrieval split size; omit to skip splitting.
    #[arg(long)]
    retrieval: Option<usize>,
    #[arg(long, default_value_t = 0)]
    validation: usize,
    #[arg(long, default_value_t = 0)]
    test: usize,
    #[arg(long, default_value_t = 4)]
    max_severity: u8,
}

#[derive(Args)]
struct CleanArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ProviderArgs {
    /// Summarization/generation backend: extractive, mock, or remote.
    #[arg(long, default_value = "extractive")]
    provider: String,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, default_value = "default-model")]
    model: String,
    /// Remote body shape: completion or chat.
    #[arg(long, default_value = "completion")]
    style: String,
}

impl ProviderArgs {
    fn build(&self, sentences: usize) -> anyhow::Result<ProviderConfig> {
        let style = match self.style.as_str() {
            "completion" => RequestStyle::Completion,
            "chat" => RequestStyle::Chat,
            other => bail!("unknown request style {other:?} (completion|chat)"),
        };
        Ok(match self.provider.as_str() {
            "extractive" => ProviderConfig::Extractive { sentences },
            "mock" => ProviderConfig::Mock,
            "remote" => ProviderConfig::Remote {
                endpoint: self
                    .endpoint
                    .clone()
                    .context("--endpoint is required with --provider remote")?,
                model_id: self.model.clone(),
                style,
            },
            other => bail!("unknown provider {other:?} (extractive|mock|remote)"),
        })
    }
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Summary cache file (created if missing).
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    sentences: usize,
    #[arg(long, default_value_t = 4)]
    concurrency: usize,
    #[command(flatten)]
    provider: ProviderArgs,
}

#[derive(Args)]
struct EmbedderArgs {
    /// localhash or remote.
    #[arg(long, default_value = "localhash")]
    embedder: String,
    #[arg(long, default_value_t = rca_core::embed::DEFAULT_DIMENSION)]
    dimension: usize,
    #[arg(long, default_value_t = 0)]
    embed_seed: u64,
    #[arg(long)]
    embed_endpoint: Option<String>,
}

impl EmbedderArgs {
    fn config(&self) -> anyhow::Result<EmbedderConfig> {
        let mode = match self.embedder.as_str() {
            "localhash" => EmbedderMode::LocalHash,
            "remote" => EmbedderMode::Remote,
            other => bail!("unknown embedder {other:?} (localhash|remote)"),
        };
        Ok(EmbedderConfig {
            mode,
            dimension: self.dimension,
            endpoint: self.embed_endpoint.clone(),
            seed: self.embed_seed,
        })
    }
}

#[derive(Args)]
struct IndexBuildArgs {
    /// Summarized corpus to index.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Store 8-bit quantized codes instead of raw vectors.
    #[arg(long)]
    quantized: bool,
    #[command(flatten)]
    embedder: EmbedderArgs,
}

#[derive(Args)]
struct QueryArgs {
    /// Single-incident JSON file.
    #[arg(long)]
    incident: PathBuf,
    #[arg(long)]
    index: PathBuf,
    #[arg(short, default_value_t = 20)]
    k: usize,
    #[command(flatten)]
    embedder: EmbedderArgs,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = rca_core::prompt::PROMPT_LIMIT_8K)]
    limit: usize,
    #[arg(long, default_value_t = rca_core::prompt::DEFAULT_COMPLETION_RESERVE)]
    reserve: usize,
    #[arg(long, default_value = "whitespace")]
    counter: String,
}

impl BudgetArgs {
    fn budget(&self) -> anyhow::Result<TokenBudget> {
        let counter = TokenCounter::from_id(&self.counter)?;
        Ok(TokenBudget::new(self.limit, self.reserve, counter)?)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    incident: PathBuf,
    #[arg(long)]
    index: PathBuf,
    /// Summarized corpus backing the index.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(short, default_value_t = 20)]
    k: usize,
    /// relevant or random.
    #[arg(long, default_value = "relevant")]
    mode: String,
    /// descending, ascending, or shuffled:SEED.
    #[arg(long, default_value = "descending")]
    ordering: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    embedder: EmbedderArgs,
    #[command(flatten)]
    provider: ProviderArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Newline-delimited {"candidate", "reference"} pairs.
    #[arg(long)]
    pairs: PathBuf,
    /// csv or json.
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// kshot, fullprompt, selection, ordering, or chunked.
    #[arg(long)]
    design: String,
    /// Retrieval-split records (summarized if possible; summarized on the
    /// fly with the extractive provider otherwise).
    #[arg(long)]
    retrieval: PathBuf,
    /// Test-split records.
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0,5,10,20,30,40")]
    k_values: Vec<usize>,
    #[arg(short, default_value_t = 20)]
    k: usize,
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40")]
    chunk_counts: Vec<usize>,
    #[arg(long, default_value_t = 128)]
    chunk_tokens: usize,
    /// Prompt limit for the full-prompt condition.
    #[arg(long, default_value_t = rca_core::prompt::PROMPT_LIMIT_32K)]
    full_limit: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    embedder: EmbedderArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// A run.json produced by experiment-run.
    #[arg(long)]
    input: PathBuf,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 200)]
    incidents: usize,
    #[arg(long, default_value_t = 20)]
    families: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
}

pub fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Ingest(args) => ingest(args),
        Command::Clean(args) => clean(args),
        Command::Summarize(args) => summarize(args),
        Command::IndexBuild(args) => index_build(args),
        Command::Query(args) => query(args),
        Command::Generate(args) => generate(args),
        Command::Evaluate(args) => evaluate(args),
        Command::ExperimentRun(args) => experiment_run(args),
        Command::Report(args) => report(args),
        Command::SynthCorpus(args) => synth_corpus(args),
        Command::Serve(args) => serve(args),
    }
}

fn ingest(args: IngestArgs) -> anyhow::Result<()> {
    let (incidents, rejected) = load_incidents(&args.input)?;
    let spec = FilterSpec {
        max_severity: args.max_severity,
        ..FilterSpec::default()
    };
    spec.validate()?;
    let filtered = filter_incidents(&incidents, &spec);
    std::fs::create_dir_all(&args.out_dir)?;
    println!(
        "loaded {} records ({} rejected), {} retained after filtering",
        incidents.len(),
        rejected,
        filtered.len()
    );
    match args.retrieval {
        None => {
            let path = args.out_dir.join("filtered.ndjson");
            write_incidents(&path, &filtered)?;
            println!("wrote {}", path.display());
        }
        Some(retrieval) => {
            let splits = split_corpus(
                &filtered,
                SplitSizes {
                    retrieval,
                    validation: args.validation,
                    test: args.test,
                },
            )?;
            for (name, block) in [
                ("retrieval.ndjson", &splits.retrieval),
                ("validation.ndjson", &splits.validation),
                ("test.ndjson", &splits.test),
            ] {
                let path = args.out_dir.join(name);
                write_incidents(&path, block)?;
                println!("wrote {} ({} incidents)", path.display(), block.len());
            }
        }
    }
    Ok(())
}

fn clean(args: CleanArgs) -> anyhow::Result<()> {
    let (incidents, rejected) = load_incidents(&args.input)?;
    let mut total = CleanReport::default();
    let cleaned: Vec<Incident> = incidents
        .iter()
        .map(|incident| {
            let (cleaned, report) = clean_incident(incident);
            total.stack_lines_removed += report.stack_lines_removed;
            total.images_removed += report.images_removed;
            total.chars_before += report.chars_before;
            total.chars_after += report.chars_after;
            cleaned
        })
        .collect();
    write_incidents(&args.output, &cleaned)?;
    println!(
        "cleaned {} incidents ({rejected} rejected at load): {} stack lines and {} images removed, {} -> {} chars",
        cleaned.len(),
        total.stack_lines_removed,
        total.images_removed,
        total.chars_before,
        total.chars_after
    );
    Ok(())
}

fn open_cache(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn SummaryCache + Sync>> {
    Ok(match path {
        Some(path) => Box::new(FileSummaryCache::open(path)?),
        None => Box::new(SyncMemoryCache::default()),
    })
}

/// Lock-guarded in-memory cache for cacheless CLI runs.
#[derive(Default)]
struct SyncMemoryCache {
    inner: std::sync::Mutex<std::collections::BTreeMap<String, String>>,
}

impl SummaryCache for SyncMemoryCache {
    fn get(&self, key: &str) -> Option<String> {
        self.inner.lock().expect("cache lock").get(key).cloned()
    }
    fn put(&self, key: &str, _kind: rca_core::summarize::SummaryKind, value: &str) {
        self.inner
            .lock()
            .expect("cache lock")
            .entry(key.to_string())
            .or_insert_with(|| value.to_string());
    }
}

fn summarize(args: SummarizeArgs) -> anyhow::Result<()> {
    let (incidents, rejected) = load_incidents(&args.input)?;
    let provider = args.provider.build(args.sentences)?.build();
    let cache = open_cache(&args.cache)?;
    let summarized = summarize_batch(
        provider.as_ref(),
        cache.as_ref(),
        &incidents,
        args.concurrency,
    )?;
    write_incidents(&args.output, &summarized)?;
    println!(
        "summarized {} incidents ({rejected} rejected at load) with provider {}",
        summarized.len(),
        provider.id()
    );
    Ok(())
}

fn index_build(args: IndexBuildArgs) -> anyhow::Result<()> {
    let (incidents, _) = load_incidents(&args.input)?;
    let embedder = embedder_from_config(&args.embedder.config()?)?;
    let index = build_retrieval_index(&incidents, embedder.as_ref())?;
    let index = if args.quantized {
        match index {
            IndexKind::Flat(flat) => IndexKind::Quantized(quantize(&flat)),
            other => other,
        }
    } else {
        index
    };
    save_index(&args.output, &index)?;
    println!(
        "indexed {} vectors of dimension {} ({}) -> {}",
        index.len(),
        index.dimension(),
        if args.quantized { "quantized" } else { "flat" },
        args.output.display()
    );
    Ok(())
}

fn query(args: QueryArgs) -> anyhow::Result<()> {
    let index = load_index(&args.index)?;
    let mut embedder_config = args.embedder.config()?;
    embedder_config.dimension = index.dimension();
    let embedder = embedder_from_config(&embedder_config)?;
    let incident = load_single_incident(&args.incident)?;
    let summarizer = rca_core::summarize::ExtractiveSummaryProvider::new(2);
    let cache = MemoryCache::new();
    let prepared = crate::pipeline::prepare_query(&incident, &summarizer, &cache)?;
    let text = rca_core::embed::build_query_text(&prepared)?;
    let vector = rca_core::embed::embed_text(embedder.as_ref(), &text)?;
    let hits: Vec<_> = index
        .search(vector.values(), args.k + 1)?
        .into_iter()
        .filter(|hit| hit.id != incident.id)
        .take(args.k)
        .collect();
    println!("{:<24} {:>10} {:>10}", "id", "distance", "relevance");
    for hit in hits {
        println!("{:<24} {:>10.4} {:>10.4}", hit.id, hit.distance, hit.relevance);
    }
    Ok(())
}

fn parse_ordering(raw: &str) -> anyhow::Result<OrderingMode> {
    match raw {
        "descending" => Ok(OrderingMode::DescendingRelevance),
        "ascending" => Ok(OrderingMode::AscendingRelevance),
        other => match other.strip_prefix("shuffled:") {
            Some(seed) => Ok(OrderingMode::ShuffledSeeded(seed.parse()?)),
            None => bail!("unknown ordering {other:?} (descending|ascending|shuffled:SEED)"),
        },
    }
}

fn parse_mode(raw: &str) -> anyhow::Result<SelectionMode> {
    match raw {
        "relevant" => Ok(SelectionMode::Relevant),
        "random" => Ok(SelectionMode::Random),
        other => bail!("unknown selection mode {other:?} (relevant|random)"),
    }
}

fn generate(args: GenerateArgs) -> anyhow::Result<()> {
    let index = load_index(&args.index)?;
    let (corpus_list, _) = load_incidents(&args.corpus)?;
    let corpus: BTreeMap<String, Incident> = corpus_list
        .into_iter()
        .map(|incident| (incident.id.clone(), incident))
        .collect();
    let mut embedder_config = args.embedder.config()?;
    embedder_config.dimension = index.dimension();
    let embedder = embedder_from_config(&embedder_config)?;
    let incident = load_single_incident(&args.incident)?;
    let generator_config = ProviderArgs {
        provider: if args.provider.provider == "extractive" {
            // Extractive is a summarizer; the generation default is the mock.
            "mock".to_string()
        } else {
            args.provider.provider.clone()
        },
        endpoint: args.provider.endpoint.clone(),
        model: args.provider.model.clone(),
        style: args.provider.style.clone(),
    }
    .build(2)?;
    let generator = generator_config.build();
    let summarizer = rca_core::summarize::ExtractiveSummaryProvider::new(2);
    let cache = open_cache(&args.cache)?;
    let params = RcaParams {
        k: args.k,
        mode: parse_mode(&args.mode)?,
        ordering: parse_ordering(&args.ordering)?,
        seed: args.seed,
    };
    let outcome = run_rca(
        &incident,
        &corpus,
        &index,
        embedder.as_ref(),
        &summarizer,
        generator.as_ref(),
        cache.as_ref(),
        &args.budget.budget()?,
        &params,
    )?;
    println!("Suggested root cause:\n{}\n", outcome.suggestion.text);
    println!(
        "provider={} prompt_tokens={} truncated={}",
        outcome.suggestion.provider_id, outcome.suggestion.prompt_token_count,
        outcome.prompt.truncated
    );
    println!("examples used:");
    for example in &outcome.examples {
        println!("  {:<24} relevance {:.4}", example.incident_id, example.relevance);
    }
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> anyhow::Result<()> {
    let pairs = load_eval_pairs(&args.pairs)?;
    let report = rca_core::metrics::evaluate_corpus(&pairs)?;
    let rendered = match args.format.as_str() {
        "json" => serde_json::to_string_pretty(&report)?,
        "csv" => {
            let mut out = String::from("metric,mean\n");
            for metric in NATIVE_METRICS {
                out.push_str(&format!("{metric},{:.2}\n", report.means[metric]));
            }
            out
        }
        other => bail!("unknown report format {other:?} (csv|json)"),
    };
    for metric in NATIVE_METRICS {
        println!("{metric:<8} {:>7.2}", report.means[metric]);
    }
    if let Some(path) = args.output {
        std::fs::write(&path, rendered)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Summarize retrieval/test records in place when their short fields are
/// missing, so experiments accept raw corpora.
fn ensure_summarized(
    incidents: Vec<Incident>,
    cache: &(dyn SummaryCache + Sync),
) -> anyhow::Result<Vec<Incident>> {
    if incidents.iter().all(|i| i.summary_short.is_some()) {
        return Ok(incidents);
    }
    let summarizer = rca_core::summarize::ExtractiveSummaryProvider::new(2);
    Ok(summarize_batch(&summarizer, cache, &incidents, 4)?)
}

fn experiment_run(args: ExperimentArgs) -> anyhow::Result<()> {
    let design = match args.design.as_str() {
        "kshot" => Design::KShotSweep {
            shots: args.k_values.clone(),
        },
        "fullprompt" => Design::FullPrompt {
            limit: args.full_limit,
        },
        "selection" => Design::SelectionStudy { k: args.k },
        "ordering" => Design::OrderingStudy { k: args.k },
        "chunked" => Design::ChunkedBaseline {
            chunk_counts: args.chunk_counts.clone(),
            chunk_tokens: args.chunk_tokens,
        },
        other => bail!("unknown design {other:?} (kshot|fullprompt|selection|ordering|chunked)"),
    };
    let cache = open_cache(&args.cache)?;
    let (retrieval, _) = load_incidents(&args.retrieval)?;
    let retrieval = ensure_summarized(retrieval, cache.as_ref())?;
    let (test, _) = load_incidents(&args.test)?;
    let splits = rca_core::incident::CorpusSplits {
        retrieval,
        validation: Vec::new(),
        test,
    };
    let embedder = embedder_from_config(&args.embedder.config()?)?;
    let index = build_retrieval_index(&splits.retrieval, embedder.as_ref())?;
    let summarizer = rca_core::summarize::ExtractiveSummaryProvider::new(2);
    let providers = ExperimentProviders {
        summarizer: &summarizer,
        generator: &rca_core::generate::MockRcaProvider,
        cache: cache.as_ref(),
        embedder: embedder.as_ref(),
    };
    let config = ExperimentConfig {
        design,
        prompt_limit: args.budget.limit,
        completion_reserve: args.budget.reserve,
        counter_id: args.budget.counter.clone(),
        seed: args.seed,
    };
    let result = run_experiment(&config, &splits, &index, &providers)?;

    std::fs::create_dir_all(&args.out_dir)?;
    let run_path = args.out_dir.join("run.json");
    std::fs::write(&run_path, serde_json::to_string_pretty(&result)?)?;
    let csv_path = args.out_dir.join("run.csv");
    std::fs::write(&csv_path, render_csv(&result))?;
    let manifest_path = args.out_dir.join("manifest.json");
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&RunManifest::of(&result))?,
    )?;

    print!("{}", render_csv(&result));
    if args.design == "selection" {
        print_selection_significance(&result, args.k);
    }
    if args.design == "ordering" {
        let spread = result.mean_stddev_across_rows("ROUGE-L")?;
        println!("ROUGE-L standard deviation of condition means: {spread:.4}");
    }
    println!(
        "wrote {}, {}, {}",
        run_path.display(),
        csv_path.display(),
        manifest_path.display()
    );
    Ok(())
}

fn print_selection_significance(result: &RunResult, k: usize) {
    for (a, b) in [
        (format!("relevant-{k}"), format!("random-{k}")),
        (format!("relevant-{k}"), "zero-shot".to_string()),
    ] {
        match significance(result, &a, &b, "ROUGE-L", SignificanceMethod::Wilcoxon) {
            Ok(p) => println!("Wilcoxon p ({a} vs {b}, ROUGE-L): {p:.3e}"),
            Err(e) => println!("Wilcoxon p ({a} vs {b}, ROUGE-L): unavailable ({e})"),
        }
    }
}

/// Slim provenance record written beside each run.
#[derive(serde::Serialize)]
struct RunManifest<'a> {
    config: &'a ExperimentConfig,
    corpus_hash: &'a str,
    summarizer_id: &'a str,
    generator_id: &'a str,
    embedder_id: &'a str,
}

impl<'a> RunManifest<'a> {
    fn of(result: &'a RunResult) -> Self {
        RunManifest {
            config: &result.config,
            corpus_hash: &result.corpus_hash,
            summarizer_id: &result.summarizer_id,
            generator_id: &result.generator_id,
            embedder_id: &result.embedder_id,
        }
    }
}

fn report(args: ReportArgs) -> anyhow::Result<()> {
    let raw = std::fs::read_to_string(&args.input)?;
    let result: RunResult = serde_json::from_str(&raw)?;
    let rendered = match args.format.as_str() {
        "csv" => render_csv(&result),
        "json" => serde_json::to_string_pretty(&result)?,
        other => bail!("unknown report format {other:?} (csv|json)"),
    };
    std::fs::write(&args.output, rendered)?;
    println!("wrote {}", args.output.display());
    Ok(())
}

fn synth_corpus(args: SynthArgs) -> anyhow::Result<()> {
    let corpus = generate_synthetic_corpus(&SynthConfig {
        incidents: args.incidents,
        families: args.families,
        seed: args.seed,
    })?;
    write_incidents(&args.output, &corpus)?;
    println!(
        "wrote {} incidents in {} families -> {}",
        args.incidents,
        args.families,
        args.output.display()
    );
    Ok(())
}

fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let config = match &args.config {
        Some(path) => AppConfig::load(path)?,
        None => AppConfig::default(),
    };
    let state = AppState::from_config(config)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(crate::http::serve(state, &args.addr))?;
    Ok(())
}
