use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spanprobe::attributes::profile_sentence;
use spanprobe::diagnostics::{agreement, parse_dimensions, slice_scores};
use spanprobe::perturb::{apply_casing, apply_quotes, build_suite, load_seeds, split_by_configuration};
use spanprobe::prediction::{correlate, parse_two_columns, per_type_recall, predict_recall};
use spanprobe::report::{full_report, score_datasets, Averaging, Versioned, TYPE_DIMS};
use spanprobe::{
    serialize_bio, AttributeConfig, AttributeProfile, CasingTransform, Dataset, Dimension, FallbackPolicy,
    KappaAlphabet, ParseMode, QuoteMode, TargetTypeCounts,
};

const THREADS_ENV: &str = "SPANPROBE_THREADS";

#[derive(Parser)]
#[command(name = "spanprobe", version, about = "Diagnostic evaluation for span identification")]
struct Cli {
    /// Reject orphan I- tags instead of repairing them.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the attribute profile of every span.
    Tag(TagArgs),
    /// Apply one casing/quotation configuration to every sentence.
    Perturb(PerturbArgs),
    /// Expand seed sentences into the 12 configurations.
    BuildSuite(BuildSuiteArgs),
    /// Span, token/separator and error-typology scores.
    Score(ScoreArgs),
    /// Scores sliced by span attributes.
    Slice(SliceArgs),
    /// Extrapolate benchmark recall per type onto a target dataset.
    Predict(PredictArgs),
    /// Pearson and Spearman correlation of two numeric columns.
    Correlate(CorrelateArgs),
    /// Inter-annotator agreement: token kappa and pairwise span F1.
    Agree(AgreeArgs),
    /// Overall, per-configuration and per-type scores in one document.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct ConfigArg {
    /// TOML file with compliance rules and an optional lexicon path.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TagArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    input: PathBuf,
    /// standard, text_lower, text_upper, text_title, span_upper, span_title
    #[arg(long, default_value = "standard")]
    casing: String,
    /// quoted or unquoted
    #[arg(long, default_value = "unquoted")]
    quotes: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildSuiteArgs {
    /// Seed sentences in BIO format.
    #[arg(long)]
    seeds: PathBuf,
    /// Tab-separated sidecar: index, type, length, position.
    #[arg(long)]
    meta: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Average span scores over labels instead of pooling counts.
    #[arg(long = "macro")]
    macro_avg: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SliceArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
    /// Comma-separated dimensions.
    #[arg(long, default_value = "type,length,position,quoted")]
    dims: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Directory receiving slice.json and slice.txt.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    benchmark_gold: PathBuf,
    #[arg(long)]
    benchmark_pred: PathBuf,
    #[arg(long)]
    target_gold: PathBuf,
    /// Comma-separated dimensions defining a span type.
    #[arg(long)]
    dims: String,
    /// backoff, strict or overall-only
    #[arg(long, default_value = "backoff")]
    policy: String,
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Two numeric columns: predicted, true.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AgreeArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// binary (inside/outside) or full (BIO tags)
    #[arg(long, default_value = "binary")]
    alphabet: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
    /// Dimensions of the per-type section.
    #[arg(long, default_value = "type,length,position,quoted")]
    dims: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Directory receiving report.json and report.txt.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<spanprobe::Error> for Failure {
    fn from(e: spanprobe::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn parse_value<T: std::str::FromStr<Err = spanprobe::Error>>(s: &str) -> CliResult<T> {
    s.parse().map_err(|e: spanprobe::Error| Failure::Usage(e.to_string()))
}

fn dims_arg(s: &str) -> CliResult<Vec<Dimension>> {
    parse_dimensions(s).map_err(|e| Failure::Usage(e.to_string()))
}

fn read_bio(path: &Path, strict: bool) -> CliResult<Dataset> {
    let file = fs::File::open(path).map_err(|e| spanprobe::Error::io(path, e))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    let mode = if strict { ParseMode::Strict } else { ParseMode::Lenient };
    let parsed = spanprobe::parse_bio(name, BufReader::new(file), mode)?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(parsed.dataset)
}

fn load_config(arg: &ConfigArg) -> CliResult<AttributeConfig> {
    match &arg.config {
        Some(p) => Ok(AttributeConfig::load(p)?),
        None => Ok(AttributeConfig::default()),
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| spanprobe::Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| spanprobe::Error::io(path, e).into())
}

fn emit(out: Option<&Path>, contents: &str) -> CliResult {
    match out {
        Some(p) => write_file(p, contents),
        None => io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|e| Failure::Data(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn pct(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}

fn tag(args: &TagArgs, strict: bool) -> CliResult {
    let data = read_bio(&args.input, strict)?;
    let cfg = load_config(&args.config)?;
    #[derive(Serialize)]
    struct Row<'a> {
        sentence: usize,
        start: usize,
        end: usize,
        label: &'a str,
        text: String,
        #[serde(flatten)]
        profile: AttributeProfile,
        span_type: &'static str,
    }
    let mut rows = Vec::new();
    for (i, s) in data.sentences.iter().enumerate() {
        for (sp, p) in s.spans().iter().zip(profile_sentence(s, &cfg.rules, &cfg.lexicon)) {
            let text = s.span_tokens(sp).iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ");
            rows.push(Row { sentence: i, start: sp.start, end: sp.end, label: &sp.label, text, profile: p, span_type: p.span_type().as_str() });
        }
    }
    let body = match args.format {
        Format::Json => to_json(&Versioned::new("profiles", BTreeMap::from([("spans", &rows)]))),
        Format::Text => {
            let mut out = String::from(
                "sentence\tstart\tend\ttext\ttype\tlength\tshape\tposition\tquoted\ttext_casing\tspan_casing\tadjacent\tambiguity\n",
            );
            for r in &rows {
                let p = &r.profile;
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    r.sentence, r.start, r.end, r.text, r.span_type, p.length_class, p.shape_class, p.position,
                    p.quoted, p.text_casing, p.span_casing, p.adjacent, p.ambiguity_class
                ));
            }
            out
        }
    };
    emit(args.out.as_deref(), &body)
}

fn perturb(args: &PerturbArgs, strict: bool) -> CliResult {
    let casing: CasingTransform = parse_value(&args.casing)?;
    let quotes: QuoteMode = parse_value(&args.quotes)?;
    let data = read_bio(&args.input, strict)?;
    let sentences = data
        .sentences
        .iter()
        .map(|s| apply_quotes(&apply_casing(s, casing), quotes))
        .collect::<spanprobe::Result<Vec<_>>>()?;
    emit(args.out.as_deref(), &serialize_bio(&Dataset::new(data.name, sentences)))
}

fn build_suite_cmd(args: &BuildSuiteArgs, strict: bool) -> CliResult {
    let seeds_bio = read_bio(&args.seeds, strict)?;
    let meta = fs::read_to_string(&args.meta).map_err(|e| spanprobe::Error::io(&args.meta, e))?;
    let cfg = load_config(&args.config)?;
    let seeds = load_seeds(&seeds_bio, &meta)?;
    let suite = build_suite(&seeds, &cfg.rules, &cfg.lexicon)?;

    #[derive(Serialize)]
    struct ConfigEntry {
        id: String,
        file: String,
        sentences: usize,
        spans: usize,
    }
    #[derive(Serialize)]
    struct SentenceEntry<'a> {
        file: String,
        index: usize,
        meta: &'a BTreeMap<String, String>,
    }
    #[derive(Serialize)]
    struct Manifest<'a> {
        seeds: usize,
        sentences: usize,
        spans: usize,
        tokens: usize,
        configurations: Vec<ConfigEntry>,
        sentence_meta: Vec<SentenceEntry<'a>>,
    }

    fs::create_dir_all(&args.out).map_err(|e| spanprobe::Error::io(&args.out, e))?;
    let groups = split_by_configuration(&suite)?;
    let mut configurations = Vec::new();
    let mut sentence_meta = Vec::new();
    for (cfg, d) in &groups {
        let file = format!("{}.bio", cfg.id());
        write_file(&args.out.join(&file), &serialize_bio(d))?;
        configurations.push(ConfigEntry { id: cfg.id(), file: file.clone(), sentences: d.len(), spans: d.span_count() });
        sentence_meta.extend(d.sentences.iter().enumerate().map(|(index, s)| SentenceEntry {
            file: file.clone(),
            index,
            meta: s.meta(),
        }));
    }
    let manifest = Manifest {
        seeds: seeds.len(),
        sentences: suite.len(),
        spans: suite.span_count(),
        tokens: suite.token_count(),
        configurations,
        sentence_meta,
    };
    write_file(&args.out.join("manifest.json"), &to_json(&Versioned::new("suite-manifest", manifest)))?;
    eprintln!("{} seeds -> {} sentences, {} spans", seeds.len(), suite.len(), suite.span_count());
    Ok(())
}

fn score(args: &ScoreArgs, strict: bool) -> CliResult {
    let gold = read_bio(&args.gold, strict)?;
    let pred = read_bio(&args.pred, strict)?;
    let averaging = if args.macro_avg { Averaging::Macro } else { Averaging::Micro };
    let r = score_datasets::<f64>(&gold, &pred, averaging)?;
    let body = match args.format {
        Format::Json => to_json(&Versioned::new("score", &r)),
        Format::Text => {
            let t = &r.typology;
            format!(
                "span ({})  P {}  R {}  F1 {}  support {}\ntoken+separator  P {}  R {}  F1 {}  support {}\n\
                 typology  correct {}  missed {}  boundary {}  fused {}  split {}  spurious {}\n",
                r.averaging,
                pct(r.span.precision),
                pct(r.span.recall),
                pct(r.span.f1),
                r.span.support,
                pct(r.token_separator.precision),
                pct(r.token_separator.recall),
                pct(r.token_separator.f1),
                r.token_separator.support,
                t.correct,
                t.missed,
                t.boundary,
                t.fused,
                t.split,
                t.spurious
            )
        }
    };
    emit(args.out.as_deref(), &body)
}

fn slice(args: &SliceArgs, strict: bool) -> CliResult {
    let dims = dims_arg(&args.dims)?;
    let gold = read_bio(&args.gold, strict)?;
    let pred = read_bio(&args.pred, strict)?;
    let cfg = load_config(&args.config)?;
    let r = slice_scores::<f64>(&gold, &pred, &dims, &cfg.rules, &cfg.lexicon)?;
    let json = to_json(&Versioned::new("slice", &r));
    let table = r.render_table();
    if let Some(dir) = &args.out {
        write_file(&dir.join("slice.json"), &json)?;
        write_file(&dir.join("slice.txt"), &table)?;
        return Ok(());
    }
    emit(None, if args.format == Format::Json { &json } else { &table })
}

fn predict(args: &PredictArgs, strict: bool) -> CliResult {
    let dims = dims_arg(&args.dims)?;
    let policy: FallbackPolicy = parse_value(&args.policy)?;
    let cfg = load_config(&args.config)?;
    let bench_gold = read_bio(&args.benchmark_gold, strict)?;
    let bench_pred = read_bio(&args.benchmark_pred, strict)?;
    let target = read_bio(&args.target_gold, strict)?;
    let table = per_type_recall::<f64>(&bench_gold, &bench_pred, &dims, &cfg.rules, &cfg.lexicon)?;
    let counts = TargetTypeCounts::from_dataset(&target, &dims, &cfg.rules, &cfg.lexicon);
    let prediction = predict_recall(&table, &counts, policy)?;
    for f in &prediction.fallback_log {
        eprintln!("fallback: {} resolved by {}", f.key, f.level);
    }
    #[derive(Serialize)]
    struct Output {
        #[serde(flatten)]
        prediction: spanprobe::PredictionReport,
        benchmark: spanprobe::TypeRecallTable,
        target: TargetTypeCounts,
    }
    let body = to_json(&Versioned::new("prediction", Output { prediction, benchmark: table, target: counts }));
    emit(args.out.as_deref(), &body)
}

fn correlate_cmd(args: &CorrelateArgs) -> CliResult {
    let text = fs::read_to_string(&args.input).map_err(|e| spanprobe::Error::io(&args.input, e))?;
    let (xs, ys) = parse_two_columns::<f64>(&text)?;
    let r = correlate(&xs, &ys)?;
    emit(args.out.as_deref(), &to_json(&Versioned::new("correlation", r)))
}

fn agree(args: &AgreeArgs, strict: bool) -> CliResult {
    let alphabet: KappaAlphabet = parse_value(&args.alphabet)?;
    let a = read_bio(&args.a, strict)?;
    let b = read_bio(&args.b, strict)?;
    let r = agreement::<f64>(&a, &b, alphabet)?;
    emit(args.out.as_deref(), &to_json(&Versioned::new("agreement", r)))
}

fn report(args: &ReportArgs, strict: bool) -> CliResult {
    let dims = if args.dims.trim().is_empty() { TYPE_DIMS.to_vec() } else { dims_arg(&args.dims)? };
    let gold = read_bio(&args.gold, strict)?;
    let pred = read_bio(&args.pred, strict)?;
    let cfg = load_config(&args.config)?;
    let r = full_report::<f64>(&gold, &pred, &dims, &cfg.rules, &cfg.lexicon)?;
    let json = to_json(&Versioned::new("report", &r));
    let o = &r.overall;
    let text = format!(
        "== overall ==\nspan R {}  P {}  F1 {}  ({} gold spans)\ntoken+separator R {}  P {}  F1 {}\n\
         typology: correct {}  missed {}  boundary {}  fused {}  split {}  spurious {}\n\n\
         == per configuration ==\n{}\n== per type ==\n{}",
        pct(o.span.recall),
        pct(o.span.precision),
        pct(o.span.f1),
        o.span.support,
        pct(o.token_separator.recall),
        pct(o.token_separator.precision),
        pct(o.token_separator.f1),
        o.typology.correct,
        o.typology.missed,
        o.typology.boundary,
        o.typology.fused,
        o.typology.split,
        o.typology.spurious,
        r.per_configuration.render_table(),
        r.per_type.render_table(),
    );
    if let Some(dir) = &args.out {
        write_file(&dir.join("report.json"), &json)?;
        write_file(&dir.join("report.txt"), &text)?;
        return Ok(());
    }
    emit(None, if args.format == Format::Json { &json } else { &text })
}

fn configure_threads() -> CliResult {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("{THREADS_ENV}: {e}")))
}

fn run(cli: Cli) -> CliResult {
    configure_threads()?;
    let strict = cli.strict;
    match &cli.command {
        Command::Tag(a) => tag(a, strict),
        Command::Perturb(a) => perturb(a, strict),
        Command::BuildSuite(a) => build_suite_cmd(a, strict),
        Command::Score(a) => score(a, strict),
        Command::Slice(a) => slice(a, strict),
        Command::Predict(a) => predict(a, strict),
        Command::Correlate(a) => correlate_cmd(a),
        Command::Agree(a) => agree(a, strict),
        Command::Report(a) => report(a, strict),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
