//! Per-span attribute profiles: length, graphotactic shape, sentence
//! position, quotation, casing, adjacency and lexical ambiguity.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{Sentence, Span, Token};
use crate::error::{Error, Result};

/// Spelling patterns that mark a word as foreign to the recipient language.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ComplianceRules {
    forbidden_onsets: Vec<String>,
    forbidden_codas: Vec<String>,
    forbidden_infixes: Vec<String>,
    foreign_chars: BTreeSet<char>,
}

fn normalize_pattern(p: &str) -> Result<String> {
    if p.is_empty() || !p.chars().all(char::is_alphabetic) {
        return Err(Error::InvalidPattern(p.to_string()));
    }
    Ok(p.to_lowercase())
}

impl ComplianceRules {
    pub fn new<S: AsRef<str>>(
        onsets: &[S],
        codas: &[S],
        infixes: &[S],
        foreign_chars: impl IntoIterator<Item = char>,
    ) -> Result<Self> {
        let norm = |ps: &[S]| ps.iter().map(|p| normalize_pattern(p.as_ref())).collect::<Result<Vec<_>>>();
        let foreign_chars = foreign_chars
            .into_iter()
            .map(|c| {
                if c.is_alphabetic() {
                    Ok(c.to_lowercase().next().unwrap_or(c))
                } else {
                    Err(Error::InvalidForeignChar(c.to_string()))
                }
            })
            .collect::<Result<_>>()?;
        Ok(ComplianceRules {
            forbidden_onsets: norm(onsets)?,
            forbidden_codas: norm(codas)?,
            forbidden_infixes: norm(infixes)?,
            foreign_chars,
        })
    }

    /// True when some rule matches `word` after stripping non-letters.
    pub fn violated_by(&self, word: &str) -> bool {
        let w: String = word.chars().filter(|c| c.is_alphabetic()).flat_map(char::to_lowercase).collect();
        if w.is_empty() {
            return false;
        }
        self.forbidden_onsets.iter().any(|p| w.starts_with(p.as_str()))
            || self.forbidden_codas.iter().any(|p| w.ends_with(p.as_str()))
            || self.forbidden_infixes.iter().any(|p| w.contains(p.as_str()))
            || w.chars().any(|c| self.foreign_chars.contains(&c))
    }
}

/// Native wordforms; a span token found here is lexically ambiguous.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Lexicon {
    entries: BTreeSet<String>,
}

impl Lexicon {
    pub fn from_words<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut entries = BTreeSet::new();
        for (i, w) in words.into_iter().enumerate() {
            let w = w.as_ref();
            if w.is_empty() || w.to_lowercase() != w {
                return Err(Error::InvalidLexiconEntry { line: i + 1, entry: w.to_string() });
            }
            entries.insert(w.to_string());
        }
        Ok(Lexicon { entries })
    }

    /// One wordform per line; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let w = line.trim();
            if w.is_empty() {
                continue;
            }
            if w.to_lowercase() != w {
                return Err(Error::InvalidLexiconEntry { line: i + 1, entry: w.to_string() });
            }
            entries.insert(w.to_string());
        }
        Ok(Lexicon { entries })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    forbidden_onsets: Vec<String>,
    #[serde(default)]
    forbidden_codas: Vec<String>,
    #[serde(default)]
    forbidden_infixes: Vec<String>,
    #[serde(default)]
    foreign_chars: Vec<String>,
    lexicon_path: Option<PathBuf>,
}

/// Rules plus lexicon, as loaded from a TOML config file.
#[derive(Debug, Clone, Default)]
pub struct AttributeConfig {
    pub rules: ComplianceRules,
    pub lexicon: Lexicon,
}

impl AttributeConfig {
    /// Loads a config; `lexicon_path` is resolved against the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let foreign = raw
            .foreign_chars
            .iter()
            .map(|s| {
                let mut cs = s.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(Error::InvalidForeignChar(s.clone())),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let rules = ComplianceRules::new(&raw.forbidden_onsets, &raw.forbidden_codas, &raw.forbidden_infixes, foreign)?;
        let lexicon = match raw.lexicon_path {
            Some(p) => {
                let p = base_dir.join(p);
                Lexicon::parse(&std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?)?
            }
            None => Lexicon::default(),
        };
        Ok(AttributeConfig { rules, lexicon })
    }
}

named_enum! {
    pub enum Compliance {
        Compliant => "compliant",
        NonCompliant => "non_compliant",
    }
}

named_enum! {
    pub enum LengthClass {
        Single => "single",
        Multi => "multi",
    }
}

named_enum! {
    pub enum ShapeClass {
        Compliant => "compliant",
        NonCompliant => "non_compliant",
        MixedCompliant => "mixed_compliant",
    }
}

named_enum! {
    pub enum Position {
        Initial => "initial",
        Mid => "mid",
    }
}

named_enum! {
    pub enum Casing {
        Standard => "standard",
        Lower => "lower",
        Upper => "upper",
        Title => "title",
    }
}

named_enum! {
    pub enum AmbiguityClass {
        Unambiguous => "unambiguous",
        Ambiguous => "ambiguous",
        MixedAmbiguous => "mixed_ambiguous",
    }
}

named_enum! {
    /// Span type as used to organise a suite: adjacency first, then
    /// ambiguity, then graphotactic shape.
    pub enum SpanType {
        Compliant => "compliant",
        NonCompliant => "non_compliant",
        MixedCompliant => "mixed_compliant",
        Ambiguous => "ambiguous",
        MixedAmbiguous => "mixed_ambiguous",
        Adjacent => "adjacent",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttributeProfile {
    pub length_class: LengthClass,
    pub shape_class: ShapeClass,
    pub position: Position,
    pub quoted: bool,
    pub text_casing: Casing,
    pub span_casing: Casing,
    pub adjacent: bool,
    pub ambiguity_class: AmbiguityClass,
}

impl AttributeProfile {
    pub fn span_type(&self) -> SpanType {
        if self.adjacent {
            return SpanType::Adjacent;
        }
        match self.ambiguity_class {
            AmbiguityClass::Ambiguous => SpanType::Ambiguous,
            AmbiguityClass::MixedAmbiguous => SpanType::MixedAmbiguous,
            AmbiguityClass::Unambiguous => match self.shape_class {
                ShapeClass::Compliant => SpanType::Compliant,
                ShapeClass::NonCompliant => SpanType::NonCompliant,
                ShapeClass::MixedCompliant => SpanType::MixedCompliant,
            },
        }
    }
}

pub fn check_compliance(word: &str, rules: &ComplianceRules) -> Compliance {
    if rules.violated_by(word) {
        Compliance::NonCompliant
    } else {
        Compliance::Compliant
    }
}

pub fn shape_class<'a>(span_tokens: impl IntoIterator<Item = &'a str>, rules: &ComplianceRules) -> ShapeClass {
    let (mut ok, mut bad) = (0, 0);
    for w in span_tokens {
        match check_compliance(w, rules) {
            Compliance::Compliant => ok += 1,
            Compliance::NonCompliant => bad += 1,
        }
    }
    match (ok, bad) {
        (_, 0) => ShapeClass::Compliant,
        (0, _) => ShapeClass::NonCompliant,
        _ => ShapeClass::MixedCompliant,
    }
}

pub fn ambiguity_class<'a>(span_tokens: impl IntoIterator<Item = &'a str>, lex: &Lexicon) -> AmbiguityClass {
    let (mut hit, mut total) = (0, 0);
    for w in span_tokens {
        total += 1;
        if lex.contains(w) {
            hit += 1;
        }
    }
    if hit == 0 {
        AmbiguityClass::Unambiguous
    } else if hit == total {
        AmbiguityClass::Ambiguous
    } else {
        AmbiguityClass::MixedAmbiguous
    }
}

const QUOTE_PAIRS: [(char, char); 5] = [('"', '"'), ('\'', '\''), ('“', '”'), ('‘', '’'), ('«', '»')];

fn single_char(text: &str) -> Option<char> {
    let mut cs = text.chars();
    match (cs.next(), cs.next()) {
        (Some(c), None) => Some(c),
        _ => None,
    }
}

pub fn is_quote_token(text: &str) -> bool {
    single_char(text).is_some_and(|c| QUOTE_PAIRS.iter().any(|&(o, cl)| c == o || c == cl))
}

/// Whether `open` and `close` form an opening/closing quotation pair.
pub fn quotes_pair(open: &str, close: &str) -> bool {
    match (single_char(open), single_char(close)) {
        (Some(o), Some(c)) => QUOTE_PAIRS.contains(&(o, c)),
        _ => false,
    }
}

/// Index of the first token that is not a quotation mark.
pub fn first_content_token(s: &Sentence) -> Option<usize> {
    s.tokens().iter().position(|t| !is_quote_token(&t.text))
}

pub fn is_quoted(s: &Sentence, span: &Span) -> bool {
    span.start > 0 && span.end < s.len() && quotes_pair(s.token(span.start - 1), s.token(span.end))
}

/// Another span touches this one with nothing but quotation marks between.
pub fn is_adjacent(s: &Sentence, span: &Span) -> bool {
    let only_quotes = |from: usize, to: usize| s.tokens()[from..to].iter().all(|t| is_quote_token(&t.text));
    s.spans().iter().filter(|o| !o.same_range(span)).any(|o| {
        (o.end <= span.start && only_quotes(o.end, span.start))
            || (o.start >= span.end && only_quotes(span.end, o.start))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TokenCase {
    Uncased,
    Lower,
    Upper,
    Title,
    /// A lone uppercase letter: reads as either upper or title.
    SingleUpper,
    Mixed,
}

fn token_case(text: &str) -> TokenCase {
    let mut letters = text.chars().filter(|c| c.is_lowercase() || c.is_uppercase());
    let Some(first) = letters.next() else {
        return TokenCase::Uncased;
    };
    let rest: Vec<char> = letters.collect();
    let rest_lower = rest.iter().all(|c| c.is_lowercase());
    let rest_upper = rest.iter().all(|c| c.is_uppercase());
    match (first.is_uppercase(), rest.is_empty()) {
        (true, true) => TokenCase::SingleUpper,
        (false, true) => TokenCase::Lower,
        (true, false) if rest_upper => TokenCase::Upper,
        (true, false) if rest_lower => TokenCase::Title,
        (false, false) if rest_lower => TokenCase::Lower,
        _ => TokenCase::Mixed,
    }
}

enum GroupCase {
    None,
    Resolved(Casing),
    /// Only lone uppercase letters: upper or title.
    UpperOrTitle,
}

fn group_case<'a>(tokens: impl IntoIterator<Item = &'a Token>) -> GroupCase {
    let (mut lower, mut upper, mut title) = (true, true, true);
    let mut any = false;
    for t in tokens {
        match token_case(&t.text) {
            TokenCase::Uncased => continue,
            TokenCase::Lower => (upper, title) = (false, false),
            TokenCase::Upper => (lower, title) = (false, false),
            TokenCase::Title => (lower, upper) = (false, false),
            TokenCase::SingleUpper => lower = false,
            TokenCase::Mixed => (lower, upper, title) = (false, false, false),
        }
        any = true;
    }
    if !any {
        GroupCase::None
    } else if lower {
        GroupCase::Resolved(Casing::Lower)
    } else if upper && title {
        GroupCase::UpperOrTitle
    } else if upper {
        GroupCase::Resolved(Casing::Upper)
    } else if title {
        GroupCase::Resolved(Casing::Title)
    } else {
        GroupCase::Resolved(Casing::Standard)
    }
}

fn starts_uppercase(text: &str) -> bool {
    text.chars().find(|c| c.is_lowercase() || c.is_uppercase()).is_some_and(char::is_uppercase)
}

/// Casing of the context and of the span.
///
/// Context casing is read from tokens outside every annotated span (the
/// whole sentence when those carry no letters). A lowercase context whose
/// sentence-initial word is a capitalised span is standard casing. Under
/// standard context, lowercase spans and a capitalised single-word span in
/// sentence-initial position are reported as standard.
pub fn classify_casing(sentence: &Sentence, span: &Span) -> (Casing, Casing) {
    let in_any_span = |i: usize| sentence.spans().iter().any(|s| s.start <= i && i < s.end);
    let outside = sentence.tokens().iter().filter(|t| !in_any_span(t.index));
    let initial = first_content_token(sentence);
    let text = match group_case(outside) {
        GroupCase::None => match group_case(sentence.tokens()) {
            GroupCase::None => return (Casing::Standard, Casing::Standard),
            g => g,
        },
        g => g,
    };
    let mut text = match text {
        GroupCase::Resolved(c) => c,
        _ => Casing::Upper,
    };
    if text == Casing::Lower {
        if let Some(i) = initial {
            if in_any_span(i) && starts_uppercase(sentence.token(i)) {
                text = Casing::Standard;
            }
        }
    }

    let mut span_casing = match group_case(sentence.span_tokens(span)) {
        GroupCase::None => Casing::Standard,
        GroupCase::Resolved(c) => c,
        GroupCase::UpperOrTitle if text == Casing::Upper => Casing::Upper,
        GroupCase::UpperOrTitle => Casing::Title,
    };
    if text == Casing::Standard {
        let sentence_initial_capital =
            span.len() == 1 && span_casing == Casing::Title && initial == Some(span.start);
        if span_casing == Casing::Lower || sentence_initial_capital {
            span_casing = Casing::Standard;
        }
    }
    (text, span_casing)
}

/// Full attribute profile of `span`, which must be one of the sentence's spans.
pub fn profile_span(sentence: &Sentence, span: &Span, rules: &ComplianceRules, lex: &Lexicon) -> Result<AttributeProfile> {
    if !sentence.spans().contains(span) {
        return Err(Error::SpanNotInSentence { start: span.start, end: span.end, label: span.label.clone() });
    }
    let words = || sentence.span_tokens(span).iter().map(|t| t.text.as_str());
    let (text_casing, span_casing) = classify_casing(sentence, span);
    Ok(AttributeProfile {
        length_class: if span.len() == 1 { LengthClass::Single } else { LengthClass::Multi },
        shape_class: shape_class(words(), rules),
        position: if first_content_token(sentence) == Some(span.start) { Position::Initial } else { Position::Mid },
        quoted: is_quoted(sentence, span),
        text_casing,
        span_casing,
        adjacent: is_adjacent(sentence, span),
        ambiguity_class: ambiguity_class(words(), lex),
    })
}

/// Profiles of every span in the sentence, in span order.
pub fn profile_sentence(sentence: &Sentence, rules: &ComplianceRules, lex: &Lexicon) -> Vec<AttributeProfile> {
    sentence
        .spans()
        .iter()
        .map(|sp| profile_span(sentence, sp, rules, lex).expect("span taken from the sentence"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn es_rules() -> ComplianceRules {
        ComplianceRules::new(&["str", "sp", "sh"], &["ing", "nt", "ct", "rs"], &["ck", "oo"], ['k', 'w']).unwrap()
    }

    fn sent(text: &str, spans: &[(usize, usize)]) -> Sentence {
        Sentence::from_text(text, spans.iter().map(|&(s, e)| Span::eng(s, e)).collect()).unwrap()
    }

    #[test]
    fn compliance_examples() {
        let rules = ComplianceRules::new(&["str"], &["ing"], &[], []).unwrap();
        assert_eq!(check_compliance("streaming", &rules), Compliance::NonCompliant);
        assert_eq!(check_compliance("online", &rules), Compliance::Compliant);
        assert_eq!(check_compliance("", &rules), Compliance::Compliant);
        assert_eq!(check_compliance("¡¿--", &rules), Compliance::Compliant);
        assert_eq!(check_compliance("STREAMING,", &rules), Compliance::NonCompliant);
        assert_eq!(check_compliance("Walk", &es_rules()), Compliance::NonCompliant);
    }

    #[test]
    fn invalid_patterns_rejected() {
        assert!(ComplianceRules::new(&[""], &[], &[], []).is_err());
        assert!(ComplianceRules::new(&["s-t"], &[], &[], []).is_err());
        assert!(ComplianceRules::new::<&str>(&[], &[], &[], ['1']).is_err());
        assert_eq!(ComplianceRules::new(&["STR"], &[], &[], []).unwrap(), ComplianceRules::new(&["str"], &[], &[], []).unwrap());
    }

    #[test]
    fn shape_examples() {
        let r = es_rules();
        assert_eq!(shape_class(["fact", "checkers"], &r), ShapeClass::NonCompliant);
        assert_eq!(shape_class(["medal", "race"], &r), ShapeClass::Compliant);
        // joint: coda -nt; ventures: no rule.
        assert_eq!(shape_class(["joint", "ventures"], &r), ShapeClass::MixedCompliant);
    }

    #[test]
    fn ambiguity_examples() {
        let lex = Lexicon::from_words(["pie", "casual"]).unwrap();
        assert_eq!(ambiguity_class(["pie"], &lex), AmbiguityClass::Ambiguous);
        assert_eq!(ambiguity_class(["Casual", "looks"], &lex), AmbiguityClass::MixedAmbiguous);
        assert_eq!(ambiguity_class(["burpees"], &Lexicon::default()), AmbiguityClass::Unambiguous);
    }

    #[test]
    fn lexicon_rejects_uppercase() {
        assert!(matches!(Lexicon::parse("pie\nRed\n"), Err(Error::InvalidLexiconEntry { line: 2, .. })));
        assert_eq!(Lexicon::parse("pie\n\n red \n").unwrap().len(), 2);
    }

    #[test]
    fn casing_examples() {
        let s = sent("Los burpees son efectivos para perder peso .", &[(1, 2)]);
        assert_eq!(classify_casing(&s, &s.spans()[0]), (Casing::Standard, Casing::Standard));
        let s = sent("LOS BURPEES SON EFECTIVOS", &[(1, 2)]);
        assert_eq!(classify_casing(&s, &s.spans()[0]), (Casing::Upper, Casing::Upper));
        // Outside tokens: Los (title), son, efectivos (lower) -> standard.
        // Span: BURPEES, all uppercase -> upper.
        let s = sent("Los BURPEES son efectivos", &[(1, 2)]);
        assert_eq!(classify_casing(&s, &s.spans()[0]), (Casing::Standard, Casing::Upper));
    }

    #[test]
    fn casing_with_initial_span() {
        let s = sent("Spoilers del episodio siete a continuación .", &[(0, 1)]);
        assert_eq!(classify_casing(&s, &s.spans()[0]), (Casing::Standard, Casing::Standard));
        let s = sent("SPOILERS del episodio siete a continuación .", &[(0, 1)]);
        assert_eq!(classify_casing(&s, &s.spans()[0]), (Casing::Standard, Casing::Upper));
        let s = sent("spoilers del episodio siete a continuación .", &[(0, 1)]);
        assert_eq!(classify_casing(&s, &s.spans()[0]), (Casing::Lower, Casing::Lower));
        let s = sent("Medal Race entre Nigeria y Polonia .", &[(0, 2)]);
        assert_eq!(classify_casing(&s, &s.spans()[0]), (Casing::Standard, Casing::Title));
        let s = sent("Medal race entre Nigeria y Polonia .", &[(0, 2)]);
        assert_eq!(classify_casing(&s, &s.spans()[0]), (Casing::Standard, Casing::Standard));
    }

    #[test]
    fn casing_single_letters_and_diacritics() {
        let s = sent("RECETA DE PIE A LA ÑOÑA", &[(2, 3)]);
        assert_eq!(classify_casing(&s, &s.spans()[0]), (Casing::Upper, Casing::Upper));
        let s = sent("Receta De Pie A La Ñoña", &[(2, 3)]);
        assert_eq!(classify_casing(&s, &s.spans()[0]), (Casing::Title, Casing::Title));
        let s = sent("Esto es A y más", &[(2, 3)]);
        assert_eq!(classify_casing(&s, &s.spans()[0]), (Casing::Standard, Casing::Title));
        let s = sent("á é ñ", &[(1, 2)]);
        assert_eq!(classify_casing(&s, &s.spans()[0]), (Casing::Lower, Casing::Lower));
        let s = sent("1 2 3", &[(1, 2)]);
        assert_eq!(classify_casing(&s, &s.spans()[0]), (Casing::Standard, Casing::Standard));
    }

    #[test]
    fn profile_adjacent_mid() {
        let s = sent("La agencia se especializa en campañas de marketing online .", &[(7, 8), (8, 9)]);
        let lex = Lexicon::default();
        for sp in s.spans() {
            let p = profile_span(&s, sp, &es_rules(), &lex).unwrap();
            assert!(p.adjacent);
            assert_eq!(p.position, Position::Mid);
            assert_eq!(p.span_type(), SpanType::Adjacent);
        }
    }

    #[test]
    fn profile_initial_single() {
        let s = sent("Burpees para perder kilos sin salir de casa .", &[(0, 1)]);
        let p = profile_span(&s, &s.spans()[0], &es_rules(), &Lexicon::default()).unwrap();
        assert_eq!(p.position, Position::Initial);
        assert_eq!(p.length_class, LengthClass::Single);
        assert_eq!(p.shape_class, ShapeClass::Compliant);
        assert!(!p.quoted && !p.adjacent);
        assert_eq!((p.text_casing, p.span_casing), (Casing::Standard, Casing::Standard));
    }

    #[test]
    fn quoted_and_position_ignores_quotes() {
        let s = sent("« Fake news » en campaña", &[(1, 3)]);
        let p = profile_span(&s, &s.spans()[0], &es_rules(), &Lexicon::default()).unwrap();
        assert!(p.quoted);
        assert_eq!(p.position, Position::Initial);
        let s = sent("« Fake news « en campaña", &[(1, 3)]);
        assert!(!is_quoted(&s, &s.spans()[0]));
        let s = sent("Las \" fake news \" y los \" bulos \"", &[(2, 4)]);
        assert!(is_quoted(&s, &s.spans()[0]));
        let s = sent("\" a \" \" b \"", &[(1, 2), (4, 5)]);
        assert!(is_adjacent(&s, &s.spans()[0]));
    }

    #[test]
    fn span_must_belong_to_sentence() {
        let s = sent("a b c", &[(0, 1)]);
        assert!(matches!(
            profile_span(&s, &Span::eng(1, 2), &es_rules(), &Lexicon::default()),
            Err(Error::SpanNotInSentence { .. })
        ));
    }

    #[test]
    fn config_from_toml() {
        let cfg = AttributeConfig::from_toml_str(
            "forbidden_onsets = [\"str\"]\nforbidden_codas = [\"ing\"]\nforeign_chars = [\"k\"]\n",
            Path::new("."),
        )
        .unwrap();
        assert_eq!(check_compliance("streaming", &cfg.rules), Compliance::NonCompliant);
        assert_eq!(check_compliance("kilo", &cfg.rules), Compliance::NonCompliant);
        assert!(cfg.lexicon.is_empty());
        assert!(AttributeConfig::from_toml_str("foreign_chars = [\"kw\"]", Path::new(".")).is_err());
        assert!(AttributeConfig::from_toml_str("bogus = 1", Path::new(".")).is_err());
    }
}
