//! Casing and quotation perturbations and suite assembly.
//!
//! A seed sentence is authored in standard casing with unquoted spans and is
//! expanded into 6 casing transforms x 2 quotation modes. Casing is applied
//! first, so inserted quotation marks are never case-mapped.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attributes::{is_quoted, profile_span, ComplianceRules, LengthClass, Lexicon, Position, SpanType};
use crate::corpus::{Dataset, Sentence, Span};
use crate::error::{Error, Result};

pub const QUOTE: &str = "\"";

pub const META_SEED_ID: &str = "seed_id";
pub const META_CONFIG: &str = "config";
pub const META_TYPE: &str = "type";
pub const META_LENGTH: &str = "length";
pub const META_POSITION: &str = "position";
/// Set when quoting produced back-to-back quotation marks between adjacent spans.
pub const META_ADJACENT_QUOTES: &str = "adjacent_quotes";

named_enum! {
    pub enum CasingTransform {
        Standard => "standard",
        TextLower => "text_lower",
        TextUpper => "text_upper",
        TextTitle => "text_title",
        SpanUpper => "span_upper",
        SpanTitle => "span_title",
    }
}

named_enum! {
    pub enum QuoteMode {
        Unquoted => "unquoted",
        Quoted => "quoted",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    pub casing: CasingTransform,
    pub quotes: QuoteMode,
}

impl Configuration {
    pub const COUNT: usize = 12;

    /// All configurations, casing-major.
    pub fn all() -> impl Iterator<Item = Configuration> {
        CasingTransform::ALL
            .iter()
            .flat_map(|&casing| QuoteMode::ALL.iter().map(move |&quotes| Configuration { casing, quotes }))
    }

    pub fn index(&self) -> usize {
        let c = CasingTransform::ALL.iter().position(|&c| c == self.casing).unwrap_or(0);
        let q = QuoteMode::ALL.iter().position(|&q| q == self.quotes).unwrap_or(0);
        c * QuoteMode::ALL.len() + q
    }

    /// `<casing>.<quotes>`, e.g. `text_upper.quoted`.
    pub fn id(&self) -> String {
        format!("{}.{}", self.casing, self.quotes)
    }

    pub fn parse_id(id: &str) -> Result<Self> {
        let (c, q) = id
            .split_once('.')
            .ok_or_else(|| Error::UnknownValue { what: "configuration", value: id.to_string() })?;
        Ok(Configuration { casing: c.parse()?, quotes: q.parse()? })
    }
}

fn title_token(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut seen_letter = false;
    for c in text.chars() {
        if !c.is_alphabetic() {
            out.push(c);
        } else if seen_letter {
            out.extend(c.to_lowercase());
        } else {
            out.extend(c.to_uppercase());
            seen_letter = true;
        }
    }
    out
}

fn map_tokens(s: &Sentence, f: impl Fn(usize, &str) -> String) -> Sentence {
    let texts: Vec<String> = s.tokens().iter().map(|t| f(t.index, &t.text)).collect();
    Sentence::new(texts, s.spans().to_vec())
        .expect("case mapping keeps tokens non-empty and whitespace-free")
        .with_meta_map(s.meta().clone())
}

/// Applies a casing transform. Token count, spans and meta are unchanged.
pub fn apply_casing(s: &Sentence, t: CasingTransform) -> Sentence {
    let in_span = |i: usize| s.spans().iter().any(|sp| sp.start <= i && i < sp.end);
    match t {
        CasingTransform::Standard => s.clone(),
        CasingTransform::TextLower => map_tokens(s, |_, w| w.to_lowercase()),
        CasingTransform::TextUpper => map_tokens(s, |_, w| w.to_uppercase()),
        CasingTransform::TextTitle => map_tokens(s, |_, w| title_token(w)),
        CasingTransform::SpanUpper => {
            map_tokens(s, |i, w| if in_span(i) { w.to_uppercase() } else { w.to_string() })
        }
        CasingTransform::SpanTitle => map_tokens(s, |i, w| if in_span(i) { title_token(w) } else { w.to_string() }),
    }
}

/// Adds or removes quotation-mark tokens around every span.
pub fn apply_quotes(s: &Sentence, mode: QuoteMode) -> Result<Sentence> {
    match mode {
        QuoteMode::Quoted => add_quotes(s),
        QuoteMode::Unquoted => Ok(remove_quotes(s)),
    }
}

fn add_quotes(s: &Sentence) -> Result<Sentence> {
    if let Some(sp) = s.spans().iter().find(|sp| is_quoted(s, sp)) {
        return Err(Error::AlreadyQuoted { start: sp.start, end: sp.end });
    }
    let mut tokens: Vec<&str> = Vec::with_capacity(s.len() + 2 * s.spans().len());
    let mut spans = Vec::with_capacity(s.spans().len());
    let mut next = 0;
    for sp in s.spans() {
        tokens.extend(s.texts().skip(next).take(sp.start - next));
        tokens.push(QUOTE);
        let start = tokens.len();
        tokens.extend(s.texts().skip(sp.start).take(sp.len()));
        spans.push(Span::new(start, tokens.len(), sp.label.clone()));
        tokens.push(QUOTE);
        next = sp.end;
    }
    tokens.extend(s.texts().skip(next));
    let back_to_back = s.spans().windows(2).any(|w| w[0].end == w[1].start);
    let out = Sentence::new(tokens, spans)?.with_meta_map(s.meta().clone());
    Ok(if back_to_back { out.with_meta(META_ADJACENT_QUOTES, "true") } else { out })
}

fn remove_quotes(s: &Sentence) -> Sentence {
    let drop: BTreeSet<usize> = s
        .spans()
        .iter()
        .filter(|sp| is_quoted(s, sp))
        .flat_map(|sp| [sp.start - 1, sp.end])
        .collect();
    if drop.is_empty() {
        return s.clone().without_meta(META_ADJACENT_QUOTES);
    }
    let shift = |i: usize| i - drop.range(..i).count();
    let tokens = s.tokens().iter().filter(|t| !drop.contains(&t.index)).map(|t| t.text.as_str());
    let spans = s
        .spans()
        .iter()
        .map(|sp| Span::new(shift(sp.start), shift(sp.end), sp.label.clone()))
        .collect();
    Sentence::new(tokens, spans)
        .expect("removing quotation marks around spans keeps spans valid")
        .with_meta_map(s.meta().clone())
        .without_meta(META_ADJACENT_QUOTES)
}

/// Declared attributes of a seed, checked against its computed profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeTags {
    pub span_type: SpanType,
    pub length: LengthClass,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSentence {
    pub id: String,
    pub sentence: Sentence,
    pub tags: TypeTags,
}

impl SeedSentence {
    pub fn new(id: impl Into<String>, sentence: Sentence, tags: TypeTags) -> Self {
        SeedSentence { id: id.into(), sentence, tags }
    }

    /// Every span must be unquoted and agree with the declared type, length
    /// and position.
    pub fn validate(&self, rules: &ComplianceRules, lex: &Lexicon) -> Result<()> {
        let s = &self.sentence;
        if s.spans().is_empty() {
            return Err(Error::SeedWithoutSpans(self.id.clone()));
        }
        for sp in s.spans() {
            let p = profile_span(s, sp, rules, lex)?;
            let mismatch = |attribute: &'static str, declared: String, computed: String| Error::SeedValidation {
                seed: self.id.clone(),
                attribute,
                declared,
                computed,
                start: sp.start,
                end: sp.end,
            };
            if p.quoted {
                return Err(mismatch("quotation", "unquoted".into(), "quoted".into()));
            }
            if p.span_type() != self.tags.span_type {
                return Err(mismatch("type", self.tags.span_type.to_string(), p.span_type().to_string()));
            }
            if p.length_class != self.tags.length {
                return Err(mismatch("length", self.tags.length.to_string(), p.length_class.to_string()));
            }
            if p.position != self.tags.position {
                return Err(mismatch("position", self.tags.position.to_string(), p.position.to_string()));
            }
        }
        Ok(())
    }
}

/// The 12 configuration variants of a seed, in configuration order.
pub fn expand(seed: &SeedSentence) -> Result<Vec<(Configuration, Sentence)>> {
    Configuration::all()
        .map(|cfg| {
            let cased = apply_casing(&seed.sentence, cfg.casing);
            let s = apply_quotes(&cased, cfg.quotes)?
                .with_meta(META_SEED_ID, seed.id.as_str())
                .with_meta(META_CONFIG, cfg.id())
                .with_meta(META_TYPE, seed.tags.span_type.as_str())
                .with_meta(META_LENGTH, seed.tags.length.as_str())
                .with_meta(META_POSITION, seed.tags.position.as_str());
            Ok((cfg, s))
        })
        .collect()
}

/// Validates every seed, then expands them. Output is ordered by
/// (seed index, configuration index).
pub fn build_suite(seeds: &[SeedSentence], rules: &ComplianceRules, lex: &Lexicon) -> Result<Dataset> {
    seeds.par_iter().try_for_each(|s| s.validate(rules, lex))?;
    let expanded: Vec<Vec<(Configuration, Sentence)>> = seeds.par_iter().map(expand).collect::<Result<_>>()?;
    let sentences = expanded.into_iter().flatten().map(|(_, s)| s).collect();
    Ok(Dataset::new("suite", sentences))
}

/// Groups suite sentences by their `config` meta entry, in configuration order.
pub fn split_by_configuration(suite: &Dataset) -> Result<Vec<(Configuration, Dataset)>> {
    let mut groups: BTreeMap<usize, (Configuration, Vec<Sentence>)> = BTreeMap::new();
    for s in &suite.sentences {
        let id = s
            .meta()
            .get(META_CONFIG)
            .ok_or_else(|| Error::SeedMeta("suite sentence without a configuration".into()))?;
        let cfg = Configuration::parse_id(id)?;
        groups.entry(cfg.index()).or_insert_with(|| (cfg, Vec::new())).1.push(s.clone());
    }
    Ok(groups
        .into_values()
        .map(|(cfg, sents)| (cfg, Dataset::new(format!("{}-{}", suite.name, cfg.id()), sents)))
        .collect())
}

/// Reads the seed sidecar: a tab-separated table with header
/// `index type length position`, one row per sentence of `seeds`.
pub fn load_seeds(seeds: &Dataset, sidecar: &str) -> Result<Vec<SeedSentence>> {
    let mut lines = sidecar.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::SeedMeta("empty metadata file".into()))?;
    let cols: Vec<&str> = header.trim_end_matches('\r').split('\t').map(str::trim).collect();
    let col = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::SeedMeta(format!("missing `{name}` column")))
    };
    let (ci, ct, cl, cp) = (col("index")?, col("type")?, col("length")?, col("position")?);
    let mut tags: BTreeMap<usize, TypeTags> = BTreeMap::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').map(str::trim).collect();
        let field = |i: usize| {
            fields
                .get(i)
                .copied()
                .ok_or_else(|| Error::SeedMeta(format!("line {}: expected {} columns", lineno + 1, cols.len())))
        };
        let index: usize = field(ci)?
            .parse()
            .map_err(|_| Error::SeedMeta(format!("line {}: bad index `{}`", lineno + 1, fields[ci])))?;
        if index >= seeds.len() {
            return Err(Error::SeedMeta(format!(
                "line {}: index {index} out of range ({} seed sentences)",
                lineno + 1,
                seeds.len()
            )));
        }
        let t = TypeTags { span_type: field(ct)?.parse()?, length: field(cl)?.parse()?, position: field(cp)?.parse()? };
        if tags.insert(index, t).is_some() {
            return Err(Error::SeedMeta(format!("line {}: duplicate index {index}", lineno + 1)));
        }
    }
    seeds
        .sentences
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let t = tags.get(&i).ok_or_else(|| Error::SeedMeta(format!("no metadata for sentence {i}")))?;
            Ok(SeedSentence::new(format!("seed-{i:04}"), s.clone(), *t))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::classify_casing;
    use crate::attributes::Casing;

    fn sent(text: &str, spans: &[(usize, usize)]) -> Sentence {
        Sentence::from_text(text, spans.iter().map(|&(s, e)| Span::eng(s, e)).collect()).unwrap()
    }

    fn burpees() -> Sentence {
        sent("Los burpees son efectivos para perder peso .", &[(1, 2)])
    }

    #[test]
    fn casing_transforms() {
        let s = burpees();
        let low = apply_casing(&s, CasingTransform::TextLower);
        assert_eq!(low.text(), "los burpees son efectivos para perder peso .");
        assert_eq!(low.spans(), s.spans());
        assert_eq!(apply_casing(&s, CasingTransform::Standard), s);
        assert_eq!(apply_casing(&s, CasingTransform::SpanUpper).text(), "Los BURPEES son efectivos para perder peso .");
        assert_eq!(apply_casing(&s, CasingTransform::TextTitle).text(), "Los Burpees Son Efectivos Para Perder Peso .");
        assert_eq!(apply_casing(&s, CasingTransform::SpanTitle).text(), "Los Burpees son efectivos para perder peso .");
        let d = sent("¿Qué pasó con el ñandú ?", &[(4, 5)]);
        assert_eq!(apply_casing(&d, CasingTransform::TextTitle).text(), "¿Qué Pasó Con El Ñandú ?");
        assert_eq!(apply_casing(&d, CasingTransform::TextUpper).text(), "¿QUÉ PASÓ CON EL ÑANDÚ ?");
    }

    #[test]
    fn transforms_classify_as_expected() {
        let s = burpees();
        let expect = [
            (CasingTransform::Standard, Casing::Standard, Casing::Standard),
            (CasingTransform::TextLower, Casing::Lower, Casing::Lower),
            (CasingTransform::TextUpper, Casing::Upper, Casing::Upper),
            (CasingTransform::TextTitle, Casing::Title, Casing::Title),
            (CasingTransform::SpanUpper, Casing::Standard, Casing::Upper),
            (CasingTransform::SpanTitle, Casing::Standard, Casing::Title),
        ];
        for (t, text, span) in expect {
            let c = apply_casing(&s, t);
            assert_eq!(classify_casing(&c, &c.spans()[0]), (text, span), "{t}");
        }
    }

    #[test]
    fn quote_index_arithmetic() {
        let s = sent("Receta de pie de limón", &[(2, 3)]);
        let q = apply_quotes(&s, QuoteMode::Quoted).unwrap();
        assert_eq!(q.len(), 7);
        assert_eq!(q.spans(), &[Span::eng(3, 4)]);
        assert_eq!(q.token(2), QUOTE);
        assert_eq!(q.token(4), QUOTE);
        assert_eq!(apply_quotes(&q, QuoteMode::Unquoted).unwrap(), s);
        assert_eq!(apply_quotes(&s, QuoteMode::Unquoted).unwrap(), s);
        assert!(matches!(apply_quotes(&q, QuoteMode::Quoted), Err(Error::AlreadyQuoted { .. })));
    }

    #[test]
    fn adjacent_spans_quoted_independently() {
        let s = sent("campañas de marketing online .", &[(2, 3), (3, 4)]);
        let q = apply_quotes(&s, QuoteMode::Quoted).unwrap();
        assert_eq!(q.text(), "campañas de \" marketing \" \" online \" .");
        assert_eq!(q.spans(), &[Span::eng(3, 4), Span::eng(6, 7)]);
        assert_eq!(q.meta().get(META_ADJACENT_QUOTES).map(String::as_str), Some("true"));
        assert_eq!(apply_quotes(&q, QuoteMode::Unquoted).unwrap(), s);
    }

    fn seed(text: &str, spans: &[(usize, usize)], t: SpanType, l: LengthClass, p: Position) -> SeedSentence {
        SeedSentence::new("s", sent(text, spans), TypeTags { span_type: t, length: l, position: p })
    }

    #[test]
    fn expand_twelve_variants() {
        let sd = seed("Los burpees son efectivos .", &[(1, 2)], SpanType::Compliant, LengthClass::Single, Position::Mid);
        let out = expand(&sd).unwrap();
        assert_eq!(out.len(), 12);
        let ids: BTreeSet<String> = out.iter().map(|(c, _)| c.id()).collect();
        assert_eq!(ids.len(), 12);
        let (_, up) = out
            .iter()
            .find(|(c, _)| c.casing == CasingTransform::TextUpper && c.quotes == QuoteMode::Quoted)
            .unwrap();
        assert_eq!(up.text(), "LOS \" BURPEES \" SON EFECTIVOS .");
        for (i, (c, s)) in out.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(s.meta()[META_CONFIG], c.id());
            assert_eq!(Configuration::parse_id(&c.id()).unwrap(), *c);
        }
    }

    #[test]
    fn expand_keeps_adjacent_span_count() {
        let sd = seed("campañas de marketing online .", &[(2, 3), (3, 4)], SpanType::Adjacent, LengthClass::Single, Position::Mid);
        for (_, s) in expand(&sd).unwrap() {
            assert_eq!(s.spans().len(), 2);
        }
    }

    #[test]
    fn build_suite_counts_and_validation() {
        let rules = ComplianceRules::default();
        let lex = Lexicon::default();
        assert!(build_suite(&[], &rules, &lex).unwrap().is_empty());
        let ok = seed("Los burpees son efectivos .", &[(1, 2)], SpanType::Compliant, LengthClass::Single, Position::Mid);
        let d = build_suite(std::slice::from_ref(&ok), &rules, &lex).unwrap();
        assert_eq!((d.len(), d.span_count()), (12, 12));
        let bad = SeedSentence { tags: TypeTags { position: Position::Initial, ..ok.tags }, id: "bad".into(), ..ok };
        match build_suite(&[bad], &rules, &lex) {
            Err(Error::SeedValidation { seed, attribute, .. }) => assert_eq!((seed.as_str(), attribute), ("bad", "position")),
            other => panic!("{other:?}"),
        }
        let split = split_by_configuration(&d).unwrap();
        assert_eq!(split.len(), 12);
        assert!(split.iter().all(|(_, d)| d.len() == 1));
    }

    #[test]
    fn sidecar_parsing() {
        let seeds = Dataset::new("x", vec![burpees(), sent("Burpees para todos .", &[(0, 1)])]);
        let meta = "index\ttype\tlength\tposition\n1\tcompliant\tsingle\tinitial\n0\tcompliant\tsingle\tmid\n";
        let out = load_seeds(&seeds, meta).unwrap();
        assert_eq!(out[1].tags.position, Position::Initial);
        assert_eq!(out[0].id, "seed-0000");
        assert!(load_seeds(&seeds, "index\ttype\tlength\tposition\n0\tcompliant\tsingle\tmid\n").is_err());
        assert!(load_seeds(&seeds, "index\ttype\tlength\tposition\n0\tweird\tsingle\tmid\n1\tcompliant\tsingle\tmid\n").is_err());
        assert!(load_seeds(&seeds, "index\ttype\tlength\n").is_err());
    }
}
