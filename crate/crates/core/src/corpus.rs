//! Tokenized, span-annotated text and the tab-separated BIO file format.
//!
//! Spans are half-open token ranges `[start, end)`. A file holds one
//! `token<TAB>tag` pair per line with a blank line after every sentence;
//! tags are `O`, `B-<label>` or `I-<label>` (BIO2).

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_LABEL: &str = "ENG";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub index: usize,
}

/// A labeled half-open token range.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl Span {
    pub fn new(start: usize, end: usize, label: impl Into<String>) -> Self {
        Span { start, end, label: label.into() }
    }

    /// Span with the default `ENG` label.
    pub fn eng(start: usize, end: usize) -> Self {
        Span::new(start, end, DEFAULT_LABEL)
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn same_range(&self, other: &Span) -> bool {
        self.start == other.start && self.end == other.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}) {}", self.start, self.end, self.label)
    }
}

/// Checks bounds, non-emptiness, ordering and non-overlap of `spans` in a
/// sentence of `len` tokens.
pub fn validate_spans(len: usize, spans: &[Span]) -> Result<()> {
    for s in spans {
        if s.start >= s.end || s.end > len {
            return Err(Error::SpanOutOfBounds { start: s.start, end: s.end, len });
        }
    }
    for w in spans.windows(2) {
        if w[1].start < w[0].end {
            return Err(Error::SpanOverlap(w[0].start, w[0].end, w[1].start, w[1].end));
        }
    }
    Ok(())
}

fn valid_token(text: &str) -> bool {
    !text.is_empty() && !text.chars().any(char::is_whitespace)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    tokens: Vec<Token>,
    spans: Vec<Span>,
    meta: BTreeMap<String, String>,
}

impl Sentence {
    pub fn new<S: Into<String>>(tokens: impl IntoIterator<Item = S>, spans: Vec<Span>) -> Result<Self> {
        let tokens = tokens
            .into_iter()
            .enumerate()
            .map(|(index, t)| {
                let text = t.into();
                if valid_token(&text) {
                    Ok(Token { text, index })
                } else {
                    Err(Error::InvalidToken(text))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if tokens.is_empty() {
            return Err(Error::EmptySentence);
        }
        validate_spans(tokens.len(), &spans)?;
        Ok(Sentence { tokens, spans, meta: BTreeMap::new() })
    }

    /// Builds a sentence from whitespace-separated text. Test and fixture helper.
    pub fn from_text(text: &str, spans: Vec<Span>) -> Result<Self> {
        Sentence::new(text.split_whitespace(), spans)
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.meta.insert(key.into(), value.into());
        self
    }

    pub fn without_meta(mut self, key: &str) -> Self {
        self.meta.remove(key);
        self
    }

    pub fn with_meta_map(mut self, meta: BTreeMap<String, String>) -> Self {
        self.meta = meta;
        self
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i].text
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> + '_ {
        self.tokens.iter().map(|t| t.text.as_str())
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn span_tokens(&self, span: &Span) -> &[Token] {
        &self.tokens[span.start..span.end]
    }

    /// Same token texts in the same order.
    pub fn aligned_with(&self, other: &Sentence) -> bool {
        self.len() == other.len() && self.texts().eq(other.texts())
    }

    pub fn text(&self) -> String {
        self.texts().collect::<Vec<_>>().join(" ")
    }

    pub fn tags(&self) -> Vec<Tag> {
        tags_from_spans(self.len(), &self.spans).expect("sentence spans are validated on construction")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub sentences: Vec<Sentence>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        Dataset { name: name.into(), sentences }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn span_count(&self) -> usize {
        self.sentences.iter().map(|s| s.spans().len()).sum()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// Fails with the first sentence index whose tokens differ.
    pub fn check_aligned(&self, other: &Dataset) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::SentenceCountMismatch(self.len(), other.len()));
        }
        for (index, (a, b)) in self.sentences.iter().zip(&other.sentences).enumerate() {
            if !a.aligned_with(b) {
                return Err(Error::Misaligned { index });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tag {
    Outside,
    Begin(String),
    Inside(String),
}

impl Tag {
    pub fn parse(s: &str) -> Option<Tag> {
        if s == "O" {
            return Some(Tag::Outside);
        }
        let (prefix, label) = s.split_once('-')?;
        if label.is_empty() || label.chars().any(char::is_whitespace) {
            return None;
        }
        match prefix {
            "B" => Some(Tag::Begin(label.to_string())),
            "I" => Some(Tag::Inside(label.to_string())),
            _ => None,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Tag::Outside => None,
            Tag::Begin(l) | Tag::Inside(l) => Some(l),
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Outside => f.write_str("O"),
            Tag::Begin(l) => write!(f, "B-{l}"),
            Tag::Inside(l) => write!(f, "I-{l}"),
        }
    }
}

/// How an `I-X` that does not continue an `X` span is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Repair to `B-X` and record a warning.
    #[default]
    Lenient,
    /// Reject.
    Strict,
}

/// Decodes a tag sequence, returning the spans and the positions of orphan
/// `I-` tags. In strict mode the first orphan is returned as `Err(position)`.
pub fn decode_tags(tags: &[Tag], mode: ParseMode) -> std::result::Result<(Vec<Span>, Vec<usize>), usize> {
    let mut spans = Vec::new();
    let mut repaired = Vec::new();
    let mut open: Option<(usize, &str)> = None;
    for (i, tag) in tags.iter().enumerate() {
        match tag {
            Tag::Outside => {
                if let Some((start, label)) = open.take() {
                    spans.push(Span::new(start, i, label));
                }
            }
            Tag::Begin(label) => {
                if let Some((start, prev)) = open.take() {
                    spans.push(Span::new(start, i, prev));
                }
                open = Some((i, label));
            }
            Tag::Inside(label) => match open {
                Some((_, prev)) if prev == label => {}
                _ => {
                    if mode == ParseMode::Strict {
                        return Err(i);
                    }
                    repaired.push(i);
                    if let Some((start, prev)) = open.take() {
                        spans.push(Span::new(start, i, prev));
                    }
                    open = Some((i, label));
                }
            },
        }
    }
    if let Some((start, label)) = open {
        spans.push(Span::new(start, tags.len(), label));
    }
    Ok((spans, repaired))
}

/// Spans of a tag sequence, repairing orphan `I-` tags.
pub fn spans_from_tags(tags: &[Tag]) -> Vec<Span> {
    decode_tags(tags, ParseMode::Lenient).map(|(s, _)| s).unwrap_or_default()
}

pub fn tags_from_spans(n: usize, spans: &[Span]) -> Result<Vec<Tag>> {
    validate_spans(n, spans)?;
    let mut tags = vec![Tag::Outside; n];
    for s in spans {
        tags[s.start] = Tag::Begin(s.label.clone());
        for t in &mut tags[s.start + 1..s.end] {
            *t = Tag::Inside(s.label.clone());
        }
    }
    Ok(tags)
}

/// An orphan `I-` tag repaired while parsing in lenient mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BioWarning {
    pub line: usize,
    pub sentence: usize,
    pub token: usize,
    pub tag: String,
}

impl fmt::Display for BioWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}: orphan `{}` (sentence {}, token {}) repaired to a span start",
            self.line, self.tag, self.sentence, self.token
        )
    }
}

#[derive(Debug, Clone)]
pub struct Parsed {
    pub dataset: Dataset,
    pub warnings: Vec<BioWarning>,
}

struct PendingSentence {
    tokens: Vec<String>,
    tags: Vec<Tag>,
    lines: Vec<usize>,
}

impl PendingSentence {
    fn new() -> Self {
        PendingSentence { tokens: Vec::new(), tags: Vec::new(), lines: Vec::new() }
    }

    fn finish(
        &mut self,
        mode: ParseMode,
        sentences: &mut Vec<Sentence>,
        warnings: &mut Vec<BioWarning>,
    ) -> Result<()> {
        if self.tokens.is_empty() {
            return Ok(());
        }
        let index = sentences.len();
        let (spans, repaired) = decode_tags(&self.tags, mode).map_err(|i| Error::OrphanInside {
            line: self.lines[i],
            tag: self.tags[i].to_string(),
        })?;
        warnings.extend(repaired.into_iter().map(|i| BioWarning {
            line: self.lines[i],
            sentence: index,
            token: i,
            tag: self.tags[i].to_string(),
        }));
        sentences.push(Sentence::new(self.tokens.drain(..), spans)?);
        self.tags.clear();
        self.lines.clear();
        Ok(())
    }
}

/// Parses BIO text. LF and CRLF line endings are accepted.
pub fn parse_bio_str(name: &str, text: &str, mode: ParseMode) -> Result<Parsed> {
    parse_lines(name, text.lines().map(|l| Ok(l.to_string())), mode)
}

pub fn parse_bio<R: BufRead>(name: &str, reader: R, mode: ParseMode) -> Result<Parsed> {
    parse_lines(
        name,
        reader.lines().map(|l| l.map_err(|e| Error::io(name, e))),
        mode,
    )
}

fn parse_lines(name: &str, lines: impl Iterator<Item = Result<String>>, mode: ParseMode) -> Result<Parsed> {
    let mut sentences = Vec::new();
    let mut warnings = Vec::new();
    let mut pending = PendingSentence::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            pending.finish(mode, &mut sentences, &mut warnings)?;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::MalformedLine { line: lineno, fields: fields.len() });
        }
        let tag = Tag::parse(fields[1]).ok_or_else(|| Error::InvalidTag {
            line: lineno,
            tag: fields[1].to_string(),
        })?;
        if !valid_token(fields[0]) {
            return Err(Error::InvalidToken(fields[0].to_string()));
        }
        pending.tokens.push(fields[0].to_string());
        pending.tags.push(tag);
        pending.lines.push(lineno);
    }
    pending.finish(mode, &mut sentences, &mut warnings)?;
    Ok(Parsed { dataset: Dataset::new(name, sentences), warnings })
}

/// Canonical BIO text: every sentence is followed by exactly one blank line.
pub fn serialize_bio(d: &Dataset) -> String {
    let mut out = String::new();
    for s in &d.sentences {
        for (tok, tag) in s.tokens().iter().zip(s.tags()) {
            out.push_str(&tok.text);
            out.push('\t');
            out.push_str(&tag.to_string());
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
