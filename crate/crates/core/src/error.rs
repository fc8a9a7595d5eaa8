use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: expected `token<TAB>tag`, found {fields} field(s)")]
    MalformedLine { line: usize, fields: usize },

    #[error("line {line}: invalid tag `{tag}`")]
    InvalidTag { line: usize, tag: String },

    #[error("line {line}: `{tag}` does not continue a span (strict mode)")]
    OrphanInside { line: usize, tag: String },

    #[error("invalid token `{0}`: tokens must be non-empty and contain no whitespace")]
    InvalidToken(String),

    #[error("span [{start}, {end}) is out of bounds for a sentence of {len} tokens")]
    SpanOutOfBounds { start: usize, end: usize, len: usize },

    #[error("spans [{0}, {1}) and [{2}, {3}) overlap or are out of order")]
    SpanOverlap(usize, usize, usize, usize),

    #[error("empty sentence")]
    EmptySentence,

    #[error("span [{start}, {end}) {label} is not annotated in this sentence")]
    SpanNotInSentence { start: usize, end: usize, label: String },

    #[error("invalid rule pattern `{0}`: patterns must be non-empty and letters only")]
    InvalidPattern(String),

    #[error("invalid foreign character entry `{0}`: expected a single letter")]
    InvalidForeignChar(String),

    #[error("lexicon line {line}: entry `{entry}` must be lowercase and non-empty")]
    InvalidLexiconEntry { line: usize, entry: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("span [{start}, {end}) is already surrounded by quotation marks")]
    AlreadyQuoted { start: usize, end: usize },

    #[error("seed {seed}: declared {attribute} `{declared}` but span [{start}, {end}) is `{computed}`")]
    SeedValidation {
        seed: String,
        attribute: &'static str,
        declared: String,
        computed: String,
        start: usize,
        end: usize,
    },

    #[error("seed {0} has no spans")]
    SeedWithoutSpans(String),

    #[error("seed metadata: {0}")]
    SeedMeta(String),

    #[error("sentence {index}: token sequences differ between the two annotations")]
    Misaligned { index: usize },

    #[error("datasets have different sentence counts ({0} vs {1})")]
    SentenceCountMismatch(usize, usize),

    #[error("no tokens to compare")]
    NoTokens,

    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),

    #[error("unknown value `{value}` for {what}")]
    UnknownValue { what: &'static str, value: String },

    #[error("benchmark has no observations for type(s): {}", .0.join("; "))]
    UnseenTypes(Vec<String>),

    #[error("recall table is empty")]
    EmptyTable,

    #[error("dimension lists differ between recall table and target counts")]
    DimensionMismatch,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("at least two observations are required, got {0}")]
    TooFewObservations(usize),

    #[error("input has zero variance; correlation is undefined")]
    ZeroVariance,

    #[error("line {line}: expected two numeric columns, found `{text}`")]
    BadNumericLine { line: usize, text: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
