//! `qttrag` command-line driver.
//!
//! Exit status: 0 on success (including runs where some queries failed),
//! 2 for configuration, data or I/O errors, 3 when a model backend is
//! exhausted. Failures print one JSON object on stderr.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qttrag::data::{load_kb, load_qa, load_report, save_report, DataError};
use qttrag::index::{IndexError, DEFAULT_EMBED_BATCH};
use qttrag::metrics::render_table;
use qttrag::quality::{render_tag, score_translation, Verdict};
use qttrag::{
    BackendError, FilterRule, Index, LanguageCode, Pipeline, PipelineConfig, PipelineError,
    PipelineMode, PipelineTrace, Query,
};

use config::FileConfig;

#[derive(Debug, Serialize)]
pub struct Failure {
    #[serde(rename = "error")]
    kind: &'static str,
    message: String,
    #[serde(skip)]
    code: u8,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            kind: "config",
            message: message.into(),
            code: 2,
        }
    }

    pub fn backend(message: impl Into<String>) -> Self {
        Failure {
            kind: "backend",
            message: message.into(),
            code: 3,
        }
    }

    pub fn from_backend(e: BackendError) -> Self {
        match e {
            BackendError::Config(_) => Failure::config(e.to_string()),
            _ => Failure::backend(e.to_string()),
        }
    }

    fn from_index(e: IndexError) -> Self {
        match e {
            IndexError::Backend(b) | IndexError::Embedding { source: b, .. } => Failure::from_backend(b),
            other => Failure::config(other.to_string()),
        }
    }

    fn from_pipeline(e: PipelineError) -> Self {
        match e {
            PipelineError::Index(i) => Failure::from_index(i),
            other => Failure::config(other.to_string()),
        }
    }
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        Failure::config(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "qttrag", version, about = "Multilingual RAG with quality-tagged translations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Knowledge-base index management.
    Index {
        #[command(subcommand)]
        action: IndexAction,
    },
    /// Answer one question and print the trace.
    Run(RunArgs),
    /// Run a QA benchmark in one or more modes and print recall.
    Eval(EvalArgs),
    /// Score one translation with the judge.
    Score(ScoreArgs),
    /// Render saved reports as a comparison table.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum IndexAction {
    /// Embed a passage JSONL file into an index directory.
    Build {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EMBED_BATCH)]
        batch_size: usize,
        #[command(flatten)]
        backends: BackendArgs,
    },
}

#[derive(Args)]
struct BackendArgs {
    /// JSON config with backend endpoints per role.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use deterministic mock backends.
    #[arg(long)]
    mock: bool,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    topk: Option<usize>,
    #[arg(long)]
    topn: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_parser = clap::builder::ValueParser::new(parse_filter_rule))]
    filter_rule: Option<FilterRule>,
    #[arg(long)]
    parallelism: Option<usize>,
}

fn parse_filter_rule(s: &str) -> Result<FilterRule, String> {
    s.parse()
}

impl PipelineArgs {
    fn apply(&self, mut config: PipelineConfig) -> PipelineConfig {
        if let Some(v) = self.topk {
            config.top_k = v;
        }
        if let Some(v) = self.topn {
            config.top_n = v;
        }
        if let Some(v) = self.threshold {
            config.threshold = v;
        }
        if let Some(v) = self.filter_rule {
            config.filter_rule = v;
        }
        if let Some(v) = self.parallelism {
            config.parallelism = v;
        }
        config
    }
}

#[derive(Args)]
struct RunArgs {
    question: String,
    #[arg(long)]
    lang: LanguageCode,
    #[arg(long, default_value = "qtt")]
    mode: PipelineMode,
    #[arg(long)]
    index: PathBuf,
    /// Write the full trace as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    backends: BackendArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    qa: PathBuf,
    /// Language of records without a `lang` field.
    #[arg(long)]
    lang: Option<LanguageCode>,
    /// Comma-separated modes.
    #[arg(long, value_delimiter = ',', default_value = "base,cross,dkm,qtt,hard")]
    mode: Vec<PipelineMode>,
    #[arg(long)]
    index: PathBuf,
    /// Directory for `report-<mode>.json` files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Row label in the table; defaults to the generator model name.
    #[arg(long)]
    label: Option<String>,
    #[command(flatten)]
    backends: BackendArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    original: String,
    #[arg(long)]
    translated: String,
    #[arg(long)]
    lang: LanguageCode,
    #[command(flatten)]
    backends: BackendArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(required = true)]
    reports: Vec<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Index {
            action:
                IndexAction::Build {
                    kb,
                    out,
                    batch_size,
                    backends,
                },
        } => cmd_index(&kb, &out, batch_size, &backends),
        Command::Run(args) => cmd_run(&args),
        Command::Eval(args) => cmd_eval(&args),
        Command::Score(args) => cmd_score(&args),
        Command::Report(args) => cmd_report(&args.reports),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("{}", serde_json::to_string(&failure).expect("failure serializes"));
            ExitCode::from(failure.code)
        }
    }
}

fn cmd_index(kb: &Path, out: &Path, batch_size: usize, args: &BackendArgs) -> Result<String, Failure> {
    let file = FileConfig::load(args.config.as_deref())?;
    let embedder = file.embedder(args.mock)?;
    let loaded = load_kb(kb)?;
    for w in &loaded.warnings {
        log::warn!("{w}");
    }
    let index = Index::build(loaded.passages, embedder.as_ref(), batch_size).map_err(Failure::from_index)?;
    index.save(out).map_err(Failure::from_index)?;
    Ok(format!(
        "indexed {} passages (dimension {}, {} skipped) into {}\n",
        index.len(),
        index.dimension(),
        loaded.warnings.len(),
        out.display()
    ))
}

fn open_pipeline(
    index_dir: &Path,
    backends: &BackendArgs,
    flags: &PipelineArgs,
) -> Result<(Pipeline<f32>, FileConfig), Failure> {
    let file = FileConfig::load(backends.config.as_deref())?;
    let config = flags.apply(file.pipeline.clone());
    config.validate().map_err(|e| Failure::config(e.to_string()))?;
    let prompts = Arc::new(file.prompts()?);
    let wired = file.backends(backends.mock, &prompts)?;
    let index = Index::load(index_dir).map_err(Failure::from_index)?;
    let expected = wired.embedder.fingerprint();
    if index.embedder_fingerprint() != expected {
        return Err(Failure::config(format!(
            "index {} was built with embedder {:?}, but the configured embedder is {:?}",
            index_dir.display(),
            index.embedder_fingerprint(),
            expected
        )));
    }
    let pipeline =
        Pipeline::new(Arc::new(index), wired, prompts, config).map_err(Failure::from_pipeline)?;
    Ok((pipeline, file))
}

fn render_trace(trace: &PipelineTrace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mode: {}", trace.mode);
    let _ = writeln!(out, "query [{}]: {}", trace.query.lang, trace.query.text);
    let _ = writeln!(out, "context:");
    for (i, (cp, r)) in trace.context.iter().zip(&trace.reranked).enumerate() {
        let rerank = r.rerank_score.map_or("-".to_string(), |s| format!("{s:.4}"));
        let _ = writeln!(
            out,
            "  [{}] {} {} retrieval={:.4} rerank={}",
            i + 1,
            cp.source().id,
            serde_json::to_value(cp.status()).expect("status serializes").as_str().unwrap_or_default(),
            r.retrieval_score,
            rerank
        );
        if cp.is_visible() {
            let _ = writeln!(out, "      {}", cp.display_text().replace('\n', "\n      "));
        } else if let Some(note) = cp.note() {
            let _ = writeln!(out, "      ({note})");
        }
    }
    let _ = writeln!(out, "answer: {}", trace.answer);
    let (translated, input) = trace.share_counts();
    let _ = writeln!(out, "translated: {translated}/{input}");
    let _ = writeln!(out, "warnings: {}", trace.warnings.len());
    for w in &trace.warnings {
        let _ = writeln!(out, "  - {w}");
    }
    out
}

fn cmd_run(args: &RunArgs) -> Result<String, Failure> {
    let (pipeline, _) = open_pipeline(&args.index, &args.backends, &args.pipeline)?;
    let query = Query::new("cli", args.question.clone(), args.lang).map_err(|e| Failure::config(e.to_string()))?;
    let trace = pipeline.run_query(&query, args.mode).map_err(Failure::from_pipeline)?;
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&trace).expect("trace serializes");
        std::fs::write(path, json + "\n").map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    }
    if let Some(e) = &trace.generation_error {
        return Err(Failure::backend(format!("generation failed: {e}")));
    }
    Ok(render_trace(&trace))
}

fn cmd_eval(args: &EvalArgs) -> Result<String, Failure> {
    let (pipeline, file) = open_pipeline(&args.index, &args.backends, &args.pipeline)?;
    let records = load_qa(&args.qa, args.lang)?;
    let label = args.label.clone().unwrap_or_else(|| {
        if args.backends.mock {
            "mock".to_string()
        } else {
            file.generator.as_ref().map_or("run".to_string(), |g| g.model_name.clone())
        }
    });
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::config(format!("{}: {e}", dir.display())))?;
    }

    let mut modes = args.mode.clone();
    modes.dedup();
    let mut reports = Vec::new();
    let mut summary = String::new();
    let mut failed = 0;
    for mode in modes {
        let run = pipeline
            .run_benchmark(&records, mode, &label)
            .map_err(Failure::from_pipeline)?;
        if run.report.n_failed == run.report.n_queries {
            let first = run.outcomes.iter().find_map(|o| match o {
                Err(f) => Some(f.error.clone()),
                Ok(t) => t.generation_error.clone(),
            });
            return Err(Failure::backend(format!(
                "every query failed in {mode} mode: {}",
                first.unwrap_or_default()
            )));
        }
        failed += run.report.n_failed;
        if let Some(dir) = &args.out {
            save_report(&run.report, &dir.join(format!("report-{}.json", mode.as_str())))?;
        }
        let _ = writeln!(summary, "{}", run.report.summary_line());
        reports.push(run.report);
    }
    let mut out = render_table(&reports);
    out.push('\n');
    out.push_str(&summary);
    let _ = writeln!(out, "warnings: {failed} failed queries");
    Ok(out)
}

fn cmd_score(args: &ScoreArgs) -> Result<String, Failure> {
    let file = FileConfig::load(args.backends.config.as_deref())?;
    let config = args.pipeline.apply(file.pipeline.clone());
    let prompts = file.prompts()?;
    let judge = file.judge(args.backends.mock, &prompts)?;
    let outcome = score_translation(
        &args.original,
        &args.translated,
        args.lang,
        &prompts,
        judge.as_ref(),
        config.judge_retries,
    )
    .map_err(|e| Failure::config(e.to_string()))?;
    match outcome.verdict {
        Verdict::Scored { scores } => {
            let tag = render_tag(&scores, args.lang, &prompts).map_err(|e| Failure::config(e.to_string()))?;
            let mut out = serde_json::to_string(&serde_json::json!({
                "scores": scores,
                "attempts": outcome.attempts,
            }))
            .expect("scores serialize");
            out.push('\n');
            let _ = writeln!(out, "{}{tag}", args.translated);
            Ok(out)
        }
        Verdict::Unscored { reason } => Err(Failure::backend(format!(
            "judge gave no usable scores after {} attempt(s): {reason}",
            outcome.attempts
        ))),
    }
}

fn cmd_report(paths: &[PathBuf]) -> Result<String, Failure> {
    let reports = paths
        .iter()
        .map(|p| load_report(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = render_table(&reports);
    out.push('\n');
    for r in &reports {
        let _ = writeln!(out, "{}", r.summary_line());
    }
    Ok(out)
}
