use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use factsim::benchmark::{
    evaluate_benchmark, load_dataset, BenchOptions, BenchmarkSample, FactSimScorer, RougeScorer,
    RougeVariant, SummaryScorer, TauVariant,
};
use factsim::config::{EncoderKind, PartialSettings, Settings, DEFAULT_CONFIG_FILE};
use factsim::embedding::{
    embed_with, CachedEncoder, EmbedOptions, Encoder, RemoteEncoder, TestEncoder, TupleRendering,
};
use factsim::explain::{cluster_claims, coverage_findings, export_matrix, ExportFormat};
use factsim::extraction::{
    format_review_list, ChatProvider, DiskCache, ExtractionConfig, ExtractionRequest, Extractor,
    FactSet, NoProvider, OpenAiChatClient, ReplayProvider, SUMMARIZATION_TEMPLATE,
};
use factsim::rouge::rouge_all;
use factsim::scoring::score_embedded;
use factsim::{Error, Result, Side, TOOL_VERSION};

const EXIT_GENERIC: u8 = 1;
const EXIT_INPUT: u8 = 3;
const EXIT_PROVIDER: u8 = 4;
const EXIT_PARSE: u8 = 5;
const EXIT_EMPTY: u8 = 6;

/// Reference-free fact-tuple evaluation of opinion summaries.
///
/// Exit codes: 0 success, 1 I/O or other failure, 2 usage error,
/// 3 invalid input or schema, 4 provider failure or offline cache miss,
/// 5 unparseable model output, 6 no tuples extracted.
#[derive(Parser)]
#[command(name = "factsim", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Settings file (TOML). Defaults to ./factsim.toml when present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// OpenAI-compatible API base URL [env: FACTSIM_API_BASE]
    #[arg(long, global = true)]
    api_base: Option<String>,
    /// API key [env: FACTSIM_API_KEY]
    #[arg(long, global = true)]
    api_key: Option<String>,
    /// Completion and embedding cache directory [env: FACTSIM_CACHE_DIR]
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Chat model used for extraction and summaries
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    temperature: Option<f64>,
    /// Sentence encoder: "test" (offline trigram hashing) or "remote"
    #[arg(long, global = true, value_parser = ["test", "remote"])]
    encoder: Option<String>,
    /// Model id sent to the remote embeddings endpoint [env: FACTSIM_ENCODER_MODEL]
    #[arg(long, global = true)]
    encoder_model: Option<String>,
    /// Base URL of the embeddings endpoint, if different from --api-base
    /// [env: FACTSIM_ENCODER_API_BASE]
    #[arg(long, global = true)]
    encoder_api_base: Option<String>,
    /// Tuple text sent to the encoder: "joined" or a template such as
    /// "{subject} is {description}"
    #[arg(long, global = true)]
    rendering: Option<String>,
    /// Upper bound on concurrent provider requests
    #[arg(long, global = true)]
    max_inflight: Option<usize>,
    /// Never touch the network; every cache miss is an error
    #[arg(long, global = true)]
    offline: bool,
    /// Serve completions from a JSON object mapping input text to completion
    /// instead of calling a provider
    #[arg(long, global = true)]
    replay: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract fact tuples from texts (JSONL or one document per line)
    Extract {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Where to write the manifest of failed texts (default: stderr)
        #[arg(long)]
        failures: Option<PathBuf>,
    },
    /// Score a summary against reviews
    Score {
        /// Fact set JSON, JSONL texts, or plain text with one review per line
        reviews: PathBuf,
        /// Fact set JSON, JSONL texts, or a plain-text summary
        summary: PathBuf,
        /// Also write the labeled similarity matrix (.csv or .json)
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// ROUGE-1/2/L F1 between two text files
    Rouge {
        reference: PathBuf,
        candidate: PathBuf,
    },
    /// Correlate a metric with human ratings over a JSONL dataset
    Bench {
        dataset: PathBuf,
        #[arg(long, default_value = "factsim", value_parser = ["factsim", "rouge-1", "rouge-2", "rouge-l"])]
        metric: String,
        #[arg(long, default_value = "b", value_parser = ["a", "b"])]
        tau: String,
        /// Score assigned to summaries with no extractable tuples (default: skip them)
        #[arg(long)]
        empty_floor: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write a one-row CSV table of the correlations
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generate a summary of reviews with the chat model
    Summarize {
        reviews: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Claim clusters, uncovered and unsupported claims
    Report {
        reviews: PathBuf,
        summary: PathBuf,
        /// Similarity below which a claim counts as unmatched
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::InvalidInput(_)
        | Error::InvalidVector(_)
        | Error::Schema { .. }
        | Error::Json(_) => EXIT_INPUT,
        Error::Provider { .. } | Error::CacheMiss { .. } => EXIT_PROVIDER,
        Error::Parse { .. } => EXIT_PARSE,
        Error::EmptyExtraction(_) => EXIT_EMPTY,
        _ => EXIT_GENERIC,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn settings(g: &GlobalArgs) -> Result<Settings> {
    let file = match &g.config {
        Some(path) => PartialSettings::from_toml_file(path)?,
        None if Path::new(DEFAULT_CONFIG_FILE).is_file() => {
            PartialSettings::from_toml_file(Path::new(DEFAULT_CONFIG_FILE))?
        }
        None => PartialSettings::default(),
    };
    let flags = PartialSettings {
        api_base: g.api_base.clone(),
        api_key: g.api_key.clone(),
        model: g.model.clone(),
        temperature: g.temperature,
        cache_dir: g.cache_dir.clone(),
        encoder: g.encoder.as_deref().map(str::parse).transpose()?,
        encoder_model: g.encoder_model.clone(),
        encoder_api_base: g.encoder_api_base.clone(),
        rendering: g.rendering.clone(),
        max_inflight: g.max_inflight,
        threshold: None,
    };
    let env = PartialSettings::from_env(|k| std::env::var(k).ok());
    Settings::resolve(flags, env, file)
}

/// Everything a command needs, built from resolved settings.
struct Context {
    settings: Settings,
    offline: bool,
    replay: Option<PathBuf>,
}

impl Context {
    fn cache(&self) -> Result<Option<DiskCache>> {
        self.settings
            .cache_dir
            .as_ref()
            .map(DiskCache::open)
            .transpose()
    }

    fn provider(&self) -> Result<Box<dyn ChatProvider>> {
        if let Some(path) = &self.replay {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let map: BTreeMap<String, String> =
                serde_json::from_str(&text).map_err(|e| Error::Schema {
                    path: path.clone(),
                    line: e.line(),
                    message: format!("replay file must map input text to completion: {e}"),
                })?;
            return Ok(Box::new(ReplayProvider::new(map)));
        }
        if self.offline {
            return Ok(Box::new(NoProvider));
        }
        Ok(Box::new(OpenAiChatClient::new(
            &self.settings.api_base,
            self.settings.api_key.clone(),
        )))
    }

    fn extraction_config(&self, template: Option<&str>) -> ExtractionConfig {
        let mut config = ExtractionConfig {
            model_id: self.settings.model.clone(),
            temperature: self.settings.temperature,
            max_inflight: self.settings.max_inflight,
            offline: self.offline && self.replay.is_none(),
            ..Default::default()
        };
        if let Some(t) = template {
            config.prompt_template = t.to_string();
        }
        config
    }

    fn extractor(&self) -> Result<Extractor<Box<dyn ChatProvider>>> {
        let mut extractor = Extractor::new(self.provider()?, self.extraction_config(None));
        if let Some(cache) = self.cache()? {
            extractor = extractor.with_cache(cache);
        }
        Ok(extractor)
    }

    fn encoder(&self) -> Result<Box<dyn Encoder>> {
        match self.settings.encoder {
            EncoderKind::Test => Ok(Box::new(TestEncoder)),
            EncoderKind::Remote => {
                let remote = RemoteEncoder::new(
                    &self.settings.encoder_api_base,
                    self.settings.api_key.clone(),
                    &self.settings.encoder_model,
                );
                match self.cache()? {
                    Some(cache) => Ok(Box::new(CachedEncoder::new(remote, cache, self.offline))),
                    None if self.offline => Err(Error::Provider {
                        message: "offline mode with the remote encoder needs a cache directory"
                            .into(),
                        retryable: false,
                    }),
                    None => Ok(Box::new(remote)),
                }
            }
        }
    }

    fn embed_options(&self) -> Result<EmbedOptions> {
        Ok(EmbedOptions {
            rendering: self.settings.rendering.parse::<TupleRendering>()?,
            max_inflight: self.settings.max_inflight,
            ..Default::default()
        })
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn is_ext(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Reads documents from JSONL (each line a string or an object with a
/// "text" field) or plain text. Plain text is one document per non-blank
/// line, or the whole file when `whole_file` is set.
fn read_texts(path: &Path, whole_file: bool) -> Result<Vec<String>> {
    let raw = read_file(path)?;
    let texts: Vec<String> = if is_ext(path, "jsonl") {
        let mut texts = Vec::new();
        for (i, line) in raw.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let schema = |message: String| Error::Schema {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let text =
                match serde_json::from_str::<Value>(line).map_err(|e| schema(e.to_string()))? {
                    Value::String(s) => s,
                    Value::Object(mut o) => match o.remove("text") {
                        Some(Value::String(s)) => s,
                        _ => {
                            return Err(schema(
                                "expected an object with a string \"text\" field".into(),
                            ))
                        }
                    },
                    _ => {
                        return Err(schema(
                            "expected a JSON string or an object with \"text\"".into(),
                        ))
                    }
                };
            texts.push(text);
        }
        texts
    } else if whole_file {
        vec![raw.trim().to_string()]
    } else {
        raw.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect()
    };
    if texts.iter().all(|t| t.trim().is_empty()) {
        return Err(Error::invalid(format!(
            "{} contains no text",
            path.display()
        )));
    }
    Ok(texts)
}

fn read_fact_set(path: &Path) -> Result<FactSet> {
    serde_json::from_str(&read_file(path)?).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// A `.json` path is a saved fact set; anything else is text to extract from.
fn load_facts(
    path: &Path,
    side: Side,
    extractor: &Extractor<Box<dyn ChatProvider>>,
) -> Result<FactSet> {
    let facts = if is_ext(path, "json") {
        read_fact_set(path)?
    } else {
        let texts = read_texts(path, side == Side::Summary)?;
        extractor.extract_facts(&texts)?.facts
    };
    if facts.is_empty() {
        return Err(Error::EmptyExtraction(side));
    }
    Ok(facts)
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn emit(value: &impl Serialize, output: Option<&Path>) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    match output {
        Some(path) => write_atomic(path, &bytes),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

/// Serializes `value` as an object and adds the given fields in front.
fn stamped(value: &impl Serialize, fields: &[(&str, Value)]) -> Result<Value> {
    let mut out = serde_json::Map::new();
    out.insert("tool_version".into(), json!(TOOL_VERSION));
    for (k, v) in fields {
        out.insert((*k).into(), v.clone());
    }
    match serde_json::to_value(value)? {
        Value::Object(o) => out.extend(o),
        other => {
            out.insert("value".into(), other);
        }
    }
    Ok(Value::Object(out))
}

fn run(cli: Cli) -> Result<u8> {
    let ctx = Context {
        settings: settings(&cli.global)?,
        offline: cli.global.offline,
        replay: cli.global.replay.clone(),
    };
    match cli.command {
        Command::Extract {
            input,
            output,
            failures,
        } => cmd_extract(&ctx, &input, output.as_deref(), failures.as_deref()),
        Command::Score {
            reviews,
            summary,
            matrix,
        } => cmd_score(&ctx, &reviews, &summary, matrix.as_deref()),
        Command::Rouge {
            reference,
            candidate,
        } => cmd_rouge(&reference, &candidate),
        Command::Bench {
            dataset,
            metric,
            tau,
            empty_floor,
            output,
            csv,
        } => cmd_bench(
            &ctx,
            &dataset,
            &metric,
            tau.parse()?,
            empty_floor,
            output.as_deref(),
            csv.as_deref(),
        ),
        Command::Summarize { reviews, output } => cmd_summarize(&ctx, &reviews, output.as_deref()),
        Command::Report {
            reviews,
            summary,
            threshold,
            matrix,
            output,
        } => cmd_report(
            &ctx,
            &reviews,
            &summary,
            threshold.unwrap_or(ctx.settings.threshold),
            matrix.as_deref(),
            output.as_deref(),
        ),
    }
}

#[derive(Serialize)]
struct Failure {
    index: usize,
    exit_code: u8,
    error: String,
}

fn cmd_extract(
    ctx: &Context,
    input: &Path,
    output: Option<&Path>,
    failures: Option<&Path>,
) -> Result<u8> {
    let texts = read_texts(input, false)?;
    let extractor = ctx.extractor()?;
    let mut facts = FactSet::new(texts.len());
    let mut warnings = Vec::new();
    let mut failed = Vec::new();
    for (index, result) in extractor.extract_each(&texts).into_iter().enumerate() {
        match result {
            Ok(parsed) => {
                facts.extend_from_document(index, parsed.tuples)?;
                warnings.extend(
                    parsed
                        .warnings
                        .into_iter()
                        .map(|w| json!({"document": index, "warning": w})),
                );
            }
            Err(e) => {
                log::error!("text {index}: {e}");
                failed.push(Failure {
                    index,
                    exit_code: exit_code(&e),
                    error: e.to_string(),
                });
            }
        }
    }
    let out = stamped(
        &facts,
        &[
            ("model_id", json!(extractor.config().model_id)),
            ("complete", json!(failed.is_empty())),
        ],
    )?;
    let mut out = out;
    out["warnings"] = Value::Array(warnings);
    emit(&out, output)?;
    if failed.is_empty() {
        return Ok(0);
    }
    let manifest = json!({
        "tool_version": TOOL_VERSION,
        "input": input,
        "failed": failed.len(),
        "total": texts.len(),
        "failures": failed,
    });
    match failures {
        Some(path) => emit(&manifest, Some(path))?,
        None => eprintln!("{}", serde_json::to_string_pretty(&manifest)?),
    }
    eprintln!(
        "error: extraction failed for {} of {} texts; partial output written",
        failed.len(),
        texts.len()
    );
    Ok(failed[0].exit_code)
}

fn cmd_score(ctx: &Context, reviews: &Path, summary: &Path, matrix: Option<&Path>) -> Result<u8> {
    let extractor = ctx.extractor()?;
    let encoder = ctx.encoder()?;
    let options = ctx.embed_options()?;
    let r = embed_with(
        &load_facts(reviews, Side::Reviews, &extractor)?,
        &encoder,
        &options,
    )?;
    let s = embed_with(
        &load_facts(summary, Side::Summary, &extractor)?,
        &encoder,
        &options,
    )?;
    let report = score_embedded(&r, &s)?;
    if let Some(path) = matrix {
        write_atomic(
            path,
            &export_matrix(&report, ExportFormat::from_path(path)?)?,
        )?;
    }
    emit(
        &stamped(&report, &[("model_id", json!(ctx.settings.model))])?,
        None,
    )?;
    Ok(0)
}

fn cmd_rouge(reference: &Path, candidate: &Path) -> Result<u8> {
    let scores = rouge_all(&read_file(reference)?, &read_file(candidate)?);
    emit(&stamped(&scores, &[])?, None)?;
    Ok(0)
}

/// Remembers the exit code of every failed cell so a run where nothing could
/// be scored fails with the right class.
struct Recording<'a> {
    inner: &'a dyn SummaryScorer,
    codes: Mutex<Vec<u8>>,
}

impl SummaryScorer for Recording<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn score(&self, sample: &BenchmarkSample, system: &str, summary: &str) -> Result<f64> {
        self.inner.score(sample, system, summary).inspect_err(|e| {
            self.codes.lock().expect("poisoned").push(exit_code(e));
        })
    }
}

fn cmd_bench(
    ctx: &Context,
    dataset: &Path,
    metric: &str,
    tau: TauVariant,
    empty_floor: Option<f64>,
    output: Option<&Path>,
    csv: Option<&Path>,
) -> Result<u8> {
    let samples = load_dataset(dataset)?;
    let rouge = |v| -> Box<dyn SummaryScorer> { Box::new(RougeScorer(v)) };
    let (scorer, ids): (Box<dyn SummaryScorer>, Vec<(&str, Value)>) = match metric {
        "rouge-1" => (rouge(RougeVariant::Rouge1), vec![]),
        "rouge-2" => (rouge(RougeVariant::Rouge2), vec![]),
        "rouge-l" => (rouge(RougeVariant::RougeL), vec![]),
        _ => {
            let encoder = ctx.encoder()?;
            let ids = vec![
                ("model_id", json!(ctx.settings.model)),
                ("encoder_id", json!(encoder.id())),
            ];
            (
                Box::new(FactSimScorer::new(
                    ctx.extractor()?,
                    encoder,
                    ctx.embed_options()?,
                )),
                ids,
            )
        }
    };
    if let Some(floor) = empty_floor {
        if !floor.is_finite() {
            return Err(Error::invalid("--empty-floor must be finite"));
        }
    }
    let recording = Recording {
        inner: scorer.as_ref(),
        codes: Mutex::new(Vec::new()),
    };
    let report = evaluate_benchmark(&samples, &recording, &BenchOptions { tau, empty_floor })?;
    if let Some(path) = csv {
        write_atomic(path, &report.to_csv()?)?;
    }
    emit(&stamped(&report, &ids)?, output)?;
    if report.cells_scored == 0 {
        let codes = recording.codes.into_inner().expect("poisoned");
        eprintln!("error: no (sample, system) cell could be scored");
        return Ok(codes.first().copied().unwrap_or(EXIT_INPUT));
    }
    Ok(0)
}

fn cmd_summarize(ctx: &Context, reviews: &Path, output: Option<&Path>) -> Result<u8> {
    let texts = read_texts(reviews, false)?;
    let config = ctx.extraction_config(Some(SUMMARIZATION_TEMPLATE));
    let request = ExtractionRequest {
        model_id: config.model_id.clone(),
        temperature: config.temperature,
        prompt_template: config.prompt_template.clone(),
        input_text: format_review_list(&texts)?,
    };
    let mut runner = Extractor::new(ctx.provider()?, config);
    if let Some(cache) = ctx.cache()? {
        runner = runner.with_cache(cache);
    }
    let summary = runner.complete(&request)?;
    emit(
        &json!({
            "tool_version": TOOL_VERSION,
            "model_id": request.model_id,
            "reviews": texts.len(),
            "summary": summary.trim(),
        }),
        output,
    )?;
    Ok(0)
}

fn cmd_report(
    ctx: &Context,
    reviews: &Path,
    summary: &Path,
    threshold: f64,
    matrix: Option<&Path>,
    output: Option<&Path>,
) -> Result<u8> {
    let extractor = ctx.extractor()?;
    let encoder = ctx.encoder()?;
    let options = ctx.embed_options()?;
    let r = embed_with(
        &load_facts(reviews, Side::Reviews, &extractor)?,
        &encoder,
        &options,
    )?;
    let s = embed_with(
        &load_facts(summary, Side::Summary, &extractor)?,
        &encoder,
        &options,
    )?;
    let report = score_embedded(&r, &s)?;
    let clusters = cluster_claims(&r, threshold)?;
    let findings = coverage_findings(&report, &clusters, threshold)?;
    if let Some(path) = matrix {
        write_atomic(
            path,
            &export_matrix(&report, ExportFormat::from_path(path)?)?,
        )?;
    }
    emit(
        &json!({
            "tool_version": TOOL_VERSION,
            "model_id": ctx.settings.model,
            "encoder_id": report.encoder_id,
            "coverage": report.coverage,
            "consistency": report.consistency,
            "factsim": report.factsim,
            "review_tuples": report.review_tuples.len(),
            "summary_tuples": report.summary_tuples.len(),
            "clusters": clusters,
            "findings": findings,
        }),
        output,
    )?;
    Ok(0)
}
