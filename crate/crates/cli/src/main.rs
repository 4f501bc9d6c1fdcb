mod config;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eventsem_core::scaling::{run_scaling, ScalingParams};
use eventsem_core::synth::{EventWorld, WorldConfig};
use eventsem_core::{
    evaluate, load_corpus, load_definitions, load_queries, rank_by, read_ranked_tsv, score_matching_baseline,
    write_pooled_csv, write_ranked_tsv, ConceptRepository, EmbeddingFormat, EmbeddingSpace, Error, GroundTruth, Kernel,
    PoolMode, Result, Retriever, ScoreSource, StopWordList, TextScoring,
};

use crate::config::{ConfigFile, Overrides, Resolved};

#[derive(Debug, Parser)]
#[command(
    name = "eventsem",
    version,
    about = "Zero-shot event retrieval over concept scores and transcripts"
)]
struct Cli {
    /// `key = value` settings file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Log info-level progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pool per-chunk concept score tracks into one CSV row per video.
    Pool(PoolArgs),
    /// Rank concepts by similarity to a free-text query.
    Relevance(RelevanceArgs),
    /// Rank a video corpus for every event query.
    Rank(RankArgs),
    /// Compute AP and ROC AUC of a ranked run against ground truth.
    Eval(EvalArgs),
    /// Time ranking on synthetic corpora of increasing size.
    Bench(BenchArgs),
    /// Write a seeded synthetic world as input files.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct EmbeddingArgs {
    /// Word vector table.
    #[arg(long)]
    embeddings: PathBuf,

    #[arg(long, default_value = "text")]
    format: EmbeddingFormat,

    /// Stop-word file, one word per line. Replaces the built-in English list.
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

impl EmbeddingArgs {
    fn load(&self) -> Result<(EmbeddingSpace, StopWordList)> {
        let space = EmbeddingSpace::load(&self.embeddings, self.format)?;
        log::info!("loaded {} vectors of dimension {}", space.len(), space.dimension());
        let stops = match &self.stopwords {
            Some(p) => StopWordList::from_file(p)?,
            None => StopWordList::english(),
        };
        Ok((space, stops))
    }
}

#[derive(Debug, Args)]
struct PoolArgs {
    /// JSON Lines score tracks.
    #[arg(long)]
    tracks: PathBuf,

    /// Concept definitions; fixes the column order.
    #[arg(long)]
    concepts: PathBuf,

    #[arg(long)]
    mode: Option<PoolMode>,

    /// Output CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RelevanceArgs {
    #[command(flatten)]
    embedding: EmbeddingArgs,

    #[arg(long)]
    concepts: PathBuf,

    #[arg(long)]
    query: String,

    #[arg(long)]
    kernel: Option<Kernel>,

    #[arg(long)]
    percentile: Option<f64>,

    /// Number of concepts to list.
    #[arg(long, default_value_t = 20)]
    top: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Concept, OCR and ASR channels fused.
    Fused,
    /// Exact title-word matches in the ASR transcript.
    Matching,
}

#[derive(Debug, Args)]
struct RankArgs {
    #[command(flatten)]
    embedding: EmbeddingArgs,

    #[arg(long)]
    concepts: PathBuf,

    /// JSON Lines score tracks, pooled on load.
    #[arg(long, conflicts_with = "pooled", required_unless_present = "pooled")]
    tracks: Option<PathBuf>,

    /// Pre-pooled CSV from `eventsem pool`.
    #[arg(long)]
    pooled: Option<PathBuf>,

    /// JSON Lines `{video, ocr, asr}`.
    #[arg(long)]
    transcripts: Option<PathBuf>,

    #[arg(long)]
    queries: PathBuf,

    #[arg(long, value_enum, default_value_t = Method::Fused)]
    method: Method,

    /// Output TSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    #[command(flatten)]
    settings: SettingArgs,
}

#[derive(Debug, Args)]
struct SettingArgs {
    #[arg(long)]
    kernel: Option<Kernel>,
    #[arg(long)]
    percentile: Option<f64>,
    #[arg(long)]
    mode: Option<PoolMode>,
    /// Concepts kept per query.
    #[arg(short = 'r', long = "top-r")]
    r: Option<usize>,
    /// Weight of the concept channel in fusion.
    #[arg(short = 'w', long = "fusion-weight")]
    w: Option<f64>,
    /// Nearest words added to text queries.
    #[arg(short = 'k', long = "augment")]
    k: Option<usize>,
    #[arg(long)]
    text_scoring: Option<TextScoring>,
}

impl SettingArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            kernel: self.kernel,
            percentile: self.percentile,
            mode: self.mode,
            r: self.r,
            w: self.w,
            k: self.k,
            text_scoring: self.text_scoring,
        }
    }
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Ranked TSV from `eventsem rank`.
    #[arg(long)]
    ranked: PathBuf,

    /// CSV `event_id,video_id,label`.
    #[arg(long)]
    truth: PathBuf,

    /// Per-event report TSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Corpus sizes, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    videos: Vec<usize>,

    #[arg(long, default_value_t = 600)]
    concepts: usize,

    #[arg(long, default_value_t = 300)]
    dim: usize,

    #[arg(long, default_value_t = 3)]
    repeat: usize,

    #[arg(long, default_value_t = 2016)]
    seed: u64,

    #[command(flatten)]
    settings: SettingArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Directory to write into.
    #[arg(long)]
    out: PathBuf,

    #[arg(long, default_value_t = 2016)]
    seed: u64,

    #[arg(long, default_value_t = 300)]
    videos: usize,

    #[arg(long, default_value_t = 5)]
    events: usize,

    #[arg(long, default_value_t = 30)]
    positives: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.verbose {
        "info"
    } else {
        "warn"
    }))
    .format_timestamp(None)
    .init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Invariant(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let file = cli.config.as_deref().map(ConfigFile::load).transpose()?;
    match &cli.command {
        Command::Pool(a) => pool(a, file.as_ref()),
        Command::Relevance(a) => relevance(a, file.as_ref()),
        Command::Rank(a) => rank(a, file.as_ref()),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench(a, file.as_ref()),
        Command::Synth(a) => synth(a),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finish(mut w: Box<dyn Write>, path: Option<&Path>) -> Result<()> {
    w.flush()
        .map_err(|e| Error::io(path.unwrap_or(Path::new("<stdout>")), e))
}

fn write_err(path: Option<&Path>) -> impl FnOnce(io::Error) -> Error + '_ {
    move |e| Error::io(path.unwrap_or(Path::new("<stdout>")), e)
}

fn pool(a: &PoolArgs, file: Option<&ConfigFile>) -> Result<()> {
    let settings = Overrides {
        mode: a.mode,
        ..Overrides::default()
    }
    .resolve(file)?;
    let repo = ConceptRepository::ids_only(load_definitions(&a.concepts)?)?;
    let corpus = load_corpus(&ScoreSource::Tracks(a.tracks.clone()), None, &repo, settings.mode)?;
    log::info!("pooled {} videos with {} pooling", corpus.len(), settings.mode);

    let out = a.out.as_deref();
    let mut w = output(out)?;
    write_pooled_csv(&mut w, &corpus.records, &repo).map_err(write_err(out))?;
    finish(w, out)
}

fn relevance(a: &RelevanceArgs, file: Option<&ConfigFile>) -> Result<()> {
    let Resolved { retrieval, .. } = Overrides {
        kernel: a.kernel,
        percentile: a.percentile,
        ..Overrides::default()
    }
    .resolve(file)?;
    let (space, stops) = a.embedding.load()?;
    let repo = ConceptRepository::load(&a.concepts, &space, &stops)?;
    let (query, report) = space.embed_text(&a.query, &stops)?;
    if !report.oov.is_empty() {
        eprintln!("out of vocabulary: {}", report.oov.join(" "));
    }
    let ranked = repo.rank_concepts(&query, retrieval.kernel)?;

    let mut w = output(None)?;
    let mut table = || -> io::Result<()> {
        writeln!(w, "rank\tconcept\tweight")?;
        for (i, c) in ranked.iter().take(a.top).enumerate() {
            writeln!(w, "{}\t{}\t{:.6}", i + 1, c.id, c.weight)?;
        }
        Ok(())
    };
    table().map_err(write_err(None))?;
    finish(w, None)
}

fn rank(a: &RankArgs, file: Option<&ConfigFile>) -> Result<()> {
    let Resolved { retrieval, mode } = a.settings.overrides().resolve(file)?;
    let (space, stops) = a.embedding.load()?;
    let repo = ConceptRepository::load(&a.concepts, &space, &stops)?;
    let source = match (&a.tracks, &a.pooled) {
        (Some(t), _) => ScoreSource::Tracks(t.clone()),
        (None, Some(p)) => ScoreSource::Pooled(p.clone()),
        (None, None) => return Err(Error::InvalidArgument("one of --tracks or --pooled is required".into())),
    };
    let corpus = load_corpus(&source, a.transcripts.as_deref(), &repo, mode)?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    log::info!(
        "{} videos ({} without scores, {} without transcripts)",
        corpus.len(),
        corpus.without_scores,
        corpus.without_transcript
    );
    let queries = load_queries(&a.queries, &stops, retrieval.augmentation_k)?;
    let retriever = Retriever::new(&space, &stops, &repo, retrieval)?;

    let mut lists = Vec::with_capacity(queries.len());
    for q in &queries {
        let list = match a.method {
            Method::Fused => retriever.rank_event(q, &corpus.records)?,
            Method::Matching => {
                let terms = q.asr_query_terms();
                rank_by(&q.event, &corpus.records, |v| {
                    Ok(score_matching_baseline(&terms, &v.asr_text, &stops))
                })
            }
        };
        log::info!("ranked event {}", q.event);
        lists.push(list);
    }

    let out = a.out.as_deref();
    let mut w = output(out)?;
    write_ranked_tsv(&mut w, &lists).map_err(write_err(out))?;
    finish(w, out)
}

fn eval(a: &EvalArgs) -> Result<()> {
    let f = File::open(&a.ranked).map_err(|e| Error::io(&a.ranked, e))?;
    let run = read_ranked_tsv(BufReader::new(f), &a.ranked)?;
    let truth = GroundTruth::load_csv(&a.truth)?;
    let report = evaluate(&run, &truth)?;
    if let Some(p) = &a.out {
        let mut w = output(Some(p))?;
        report.write_tsv(&mut w).map_err(write_err(Some(p)))?;
        finish(w, Some(p))?;
    }
    println!("{report}");
    Ok(())
}

fn bench(a: &BenchArgs, file: Option<&ConfigFile>) -> Result<()> {
    let Resolved { retrieval, .. } = a.settings.overrides().resolve(file)?;
    let report = run_scaling(ScalingParams {
        videos: a.videos.clone(),
        concepts: a.concepts,
        dimension: a.dim,
        repeat: a.repeat,
        seed: a.seed,
        config: retrieval,
    })?;
    println!("{report}");
    Ok(())
}

fn synth(a: &SynthArgs) -> Result<()> {
    let cfg = WorldConfig {
        seed: a.seed,
        videos: a.videos,
        events: a.events,
        positives_per_event: a.positives,
        ..WorldConfig::default()
    };
    if cfg.events == 0 || cfg.events * cfg.positives_per_event > cfg.videos {
        return Err(Error::InvalidArgument(format!(
            "{} events x {} positives do not fit in {} videos",
            cfg.events, cfg.positives_per_event, cfg.videos
        )));
    }
    let world = EventWorld::generate(&cfg)?;
    let paths = world.write_fixtures(&a.out)?;
    println!("wrote synthetic world (seed {}) to {}", a.seed, a.out.display());
    log::info!("{paths:?}");
    Ok(())
}
