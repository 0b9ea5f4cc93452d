use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mabed::corpus::{load_corpus, InputFormat, LoadOptions, LoadReport, SliceIndex, StopWords};
use mabed::dedup::DuplicateRule;
use mabed::eval::{compute_metrics, AnnotationSet};
use mabed::export::{self, ExportKind, EVENTS_FILE, RUN_FILE};
use mabed::pipeline::{self, Params, RunMeta, Variant, THREADS_ENV};
use mabed::testkit::{generate, SyntheticSpec};

#[derive(Parser)]
#[command(name = "mabed", version, about = "Detect impactful events in a tweet corpus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect events and write events.json, run.json and the visualization files.
    Detect(DetectArgs),
    /// Rebuild visualization files from an existing events.json.
    Export(ExportArgs),
    /// Compute precision, recall, F-measure and DERate from annotations.
    Eval(EvalArgs),
    /// Generate a synthetic corpus with planted events.
    Synth(SynthArgs),
    /// Rank n-grams per window by Trending Score.
    Trending(TrendingArgs),
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus file (CSV with `time` and `text` columns, or JSON lines).
    #[arg(long)]
    input: PathBuf,
    /// Input format; guessed from the extension when absent.
    #[arg(long)]
    format: Option<InputFormat>,
    /// File with one stop-word per line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Drop words occurring in fewer tweets than this.
    #[arg(long, default_value_t = 0)]
    min_count: u32,
}

impl CorpusArgs {
    fn load(&self, slice_minutes: u32) -> Result<(SliceIndex, LoadReport)> {
        if slice_minutes == 0 {
            return Err(mabed::Error::InvalidParams("slice length must be positive".into()).into());
        }
        let stopwords = match &self.stopwords {
            Some(path) => StopWords::from_file(path)?,
            None => StopWords::default(),
        };
        let options = LoadOptions {
            format: self.format.unwrap_or_else(|| InputFormat::from_path(&self.input)),
            slice_length: i64::from(slice_minutes) * 60,
            stopwords,
            min_count: self.min_count,
        };
        let (index, report) = load_corpus(&self.input, &options)?;
        if report.rejected > 0 {
            eprintln!("warning: skipped {} malformed records", report.rejected);
        }
        log::info!(
            "{} tweets in {} slices, {} words",
            index.total_tweets(),
            index.n(),
            index.vocabulary_len()
        );
        Ok((index, report))
    }
}

#[derive(Args)]
struct ParamArgs {
    /// Number of events to detect.
    #[arg(long, default_value_t = Params::default().k)]
    k: usize,
    /// Maximum related words per event.
    #[arg(long, default_value_t = Params::default().p)]
    p: usize,
    /// Minimum related-word weight.
    #[arg(long, default_value_t = Params::default().theta)]
    theta: f64,
    /// Minimum interval overlap for duplicate events.
    #[arg(long, default_value_t = Params::default().sigma)]
    sigma: f64,
    /// Time slice length in minutes.
    #[arg(long, default_value_t = Params::default().slice_minutes)]
    slice_minutes: u32,
    /// `mabed` or `alpha` (ignores mentions).
    #[arg(long, default_value = "mabed")]
    variant: Variant,
    /// Worker threads for the anomaly scan.
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
    /// How the main/related word tests combine: `disjunction` or `conjunction`.
    #[arg(long, default_value = "disjunction")]
    duplicate_rule: DuplicateRule,
}

impl ParamArgs {
    fn params(&self) -> Params {
        Params {
            k: self.k,
            p: self.p,
            theta: self.theta,
            sigma: self.sigma,
            slice_minutes: self.slice_minutes,
            variant: self.variant,
            threads: self.threads.unwrap_or(1),
            duplicate_rule: self.duplicate_rule,
        }
    }
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Visualization files to write.
    #[arg(long, value_delimiter = ',', default_value = "timeline,impact,graph")]
    exports: Vec<ExportKind>,
    /// Write only events.json and run.json.
    #[arg(long, conflicts_with = "exports")]
    no_exports: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Slice length the events were detected with.
    #[arg(long, default_value_t = Params::default().slice_minutes)]
    slice_minutes: u32,
    /// Signal plotted in impact.json.
    #[arg(long, default_value = "mabed")]
    variant: Variant,
    /// events.json to read; defaults to the one in --out.
    #[arg(long)]
    events: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "timeline,impact,graph")]
    only: Vec<ExportKind>,
}

#[derive(Args)]
struct EvalArgs {
    /// CSV with columns event_rank,judge1,judge2,duplicate_of.
    #[arg(long)]
    annotations: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Generator spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Directory receiving corpus.csv and truth.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrendingArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Window length in minutes.
    #[arg(long, default_value_t = 1440)]
    window_minutes: u32,
    /// N-gram length.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// N-grams kept per window.
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunRecord<'a> {
    input: &'a Path,
    load: &'a LoadReport,
    #[serde(flatten)]
    meta: &'a RunMeta,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn detect(args: &DetectArgs) -> Result<()> {
    let params = args.params.params();
    params.validate()?;
    let (index, load) = args.corpus.load(params.slice_minutes)?;
    let list = pipeline::run(&index, &params)?;

    create_dir(&args.out)?;
    let records = export::event_records(&list.events, &index);
    export::write_json(&args.out.join(EVENTS_FILE), &records)?;
    let run = RunRecord {
        input: &args.corpus.input,
        load: &load,
        meta: &list.meta,
    };
    export::write_json(&args.out.join(RUN_FILE), &run)?;
    if !args.no_exports {
        export::write_exports(&args.out, &args.exports, &records, &index, params.variant.signal())?;
    }
    eprintln!("{} events written to {}", records.len(), args.out.display());
    Ok(())
}

fn export_cmd(args: &ExportArgs) -> Result<()> {
    let events = args.events.clone().unwrap_or_else(|| args.out.join(EVENTS_FILE));
    let records = export::read_events(&events)?;
    let (index, _) = args.corpus.load(args.slice_minutes)?;
    create_dir(&args.out)?;
    export::write_exports(&args.out, &args.only, &records, &index, args.variant.signal())?;
    Ok(())
}

fn write_or_print<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(path) => export::write_json(path, value)?,
        None => println!("{}", serde_json::to_string_pretty(value)?),
    }
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<()> {
    let set = AnnotationSet::from_csv(&args.annotations)?;
    write_or_print(args.out.as_deref(), &compute_metrics(&set))
}

fn synth(args: &SynthArgs) -> Result<()> {
    let spec = SyntheticSpec::from_file(&args.spec)?;
    let corpus = generate(&spec)?;
    create_dir(&args.out)?;
    corpus.write_csv(&args.out.join("corpus.csv"))?;
    corpus.write_truth(&args.out.join("truth.json"))?;
    eprintln!(
        "{} tweets, {} planted events",
        corpus.tweets.len(),
        corpus.truth.events.len()
    );
    Ok(())
}

fn trending(args: &TrendingArgs) -> Result<()> {
    let (index, _) = args.corpus.load(args.window_minutes)?;
    let ranking = mabed::baselines::trending_score(&index, args.n, args.top)?;
    write_or_print(args.out.as_deref(), &ranking)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<mabed::Error>() {
        Some(mabed::Error::InvalidParams(_)) => 2,
        _ => 1,
    }
}

fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Detect(args) => detect(args),
        Command::Export(args) => export_cmd(args),
        Command::Eval(args) => eval(args),
        Command::Synth(args) => synth(args),
        Command::Trending(args) => trending(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
