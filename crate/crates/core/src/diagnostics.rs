//! Attribute-sliced scoring and inter-annotator agreement.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attributes::{profile_sentence, AttributeProfile, Casing, ComplianceRules, Lexicon};
use crate::corpus::{Dataset, Sentence, Span};
use crate::error::{Error, Result};
use crate::metrics::{classify_spans, ConfusionCounts, ErrorTypology, ScoreSummary};
use crate::perturb::CasingTransform;
use crate::scalar::Scalar;

named_enum! {
    /// A projection axis of [`AttributeProfile`]. `type` is the composite
    /// suite type and `casing` the casing configuration recovered from the
    /// text and span casing pair.
    pub enum Dimension {
        Type => "type",
        Length => "length",
        Shape => "shape",
        Position => "position",
        Quoted => "quoted",
        Casing => "casing",
        TextCasing => "text_casing",
        SpanCasing => "span_casing",
        Adjacent => "adjacent",
        Ambiguity => "ambiguity",
    }
}

/// Parses a comma-separated dimension list, e.g. `type,length,position`.
pub fn parse_dimensions(s: &str) -> Result<Vec<Dimension>> {
    let mut dims = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let d: Dimension = part.parse().map_err(|_| Error::UnknownDimension(part.to_string()))?;
        if !dims.contains(&d) {
            dims.push(d);
        }
    }
    Ok(dims)
}

/// Inverse of the casing transforms on classified casing.
pub fn casing_configuration(p: &AttributeProfile) -> CasingTransform {
    match (p.text_casing, p.span_casing) {
        (Casing::Lower, _) => CasingTransform::TextLower,
        (Casing::Upper, _) => CasingTransform::TextUpper,
        (Casing::Title, _) => CasingTransform::TextTitle,
        (Casing::Standard, Casing::Upper) => CasingTransform::SpanUpper,
        (Casing::Standard, Casing::Title) => CasingTransform::SpanTitle,
        (Casing::Standard, _) => CasingTransform::Standard,
    }
}

pub fn dimension_value(d: Dimension, p: &AttributeProfile) -> &'static str {
    match d {
        Dimension::Type => p.span_type().as_str(),
        Dimension::Length => p.length_class.as_str(),
        Dimension::Shape => p.shape_class.as_str(),
        Dimension::Position => p.position.as_str(),
        Dimension::Quoted => {
            if p.quoted {
                "quoted"
            } else {
                "unquoted"
            }
        }
        Dimension::Casing => casing_configuration(p).as_str(),
        Dimension::TextCasing => p.text_casing.as_str(),
        Dimension::SpanCasing => p.span_casing.as_str(),
        Dimension::Adjacent => {
            if p.adjacent {
                "adjacent"
            } else {
                "non_adjacent"
            }
        }
        Dimension::Ambiguity => p.ambiguity_class.as_str(),
    }
}

/// Partial assignment over profile dimensions, e.g. `type=compliant,position=mid`.
/// Dimensions not present are wildcards.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct SliceKey(Vec<(Dimension, String)>);

impl SliceKey {
    pub fn project(p: &AttributeProfile, dims: &[Dimension]) -> Self {
        SliceKey(dims.iter().map(|&d| (d, dimension_value(d, p).to_string())).collect())
    }

    pub fn parts(&self) -> &[(Dimension, String)] {
        &self.0
    }

    pub fn get(&self, d: Dimension) -> Option<&str> {
        self.0.iter().find(|(k, _)| *k == d).map(|(_, v)| v.as_str())
    }

    pub fn dims(&self) -> Vec<Dimension> {
        self.0.iter().map(|(d, _)| *d).collect()
    }

    /// Keeps only the listed dimensions, in the key's own order.
    pub fn restrict(&self, keep: &[Dimension]) -> SliceKey {
        SliceKey(self.0.iter().filter(|(d, _)| keep.contains(d)).cloned().collect())
    }

    pub fn without(&self, drop: &[Dimension]) -> SliceKey {
        SliceKey(self.0.iter().filter(|(d, _)| !drop.contains(d)).cloned().collect())
    }
}

impl fmt::Display for SliceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("*");
        }
        for (i, (d, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for SliceKey {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "*" || s.is_empty() {
            return Ok(SliceKey::default());
        }
        s.split(',')
            .map(|part| {
                let (d, v) = part
                    .split_once('=')
                    .ok_or_else(|| Error::UnknownValue { what: "slice key", value: s.to_string() })?;
                let d: Dimension = d.trim().parse().map_err(|_| Error::UnknownDimension(d.to_string()))?;
                Ok((d, v.trim().to_string()))
            })
            .collect::<Result<_>>()
            .map(SliceKey)
    }
}

impl From<SliceKey> for String {
    fn from(k: SliceKey) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for SliceKey {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SliceCell<T> {
    pub counts: ConfusionCounts,
    pub summary: ScoreSummary<T>,
    pub typology: ErrorTypology,
}

impl<T: Scalar> SliceCell<T> {
    fn new(counts: ConfusionCounts, typology: ErrorTypology) -> Self {
        SliceCell { counts, summary: counts.summary(), typology }
    }
}

/// Scores bucketed by gold-span profile. Predictions that overlap no gold
/// span are kept apart in `spurious`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SliceReport<T> {
    pub dims: Vec<Dimension>,
    pub rows: BTreeMap<SliceKey, SliceCell<T>>,
    pub spurious: SliceCell<T>,
    pub overall: SliceCell<T>,
}

type Partial = (BTreeMap<SliceKey, (ConfusionCounts, ErrorTypology)>, ConfusionCounts, ErrorTypology);

fn merge(mut a: Partial, b: Partial) -> Partial {
    for (k, (c, t)) in b.0 {
        let e = a.0.entry(k).or_default();
        e.0 += c;
        e.1 += t;
    }
    (a.0, a.1 + b.1, a.2 + b.2)
}

fn slice_sentence(
    gold: &Sentence,
    pred: &[Span],
    dims: &[Dimension],
    rules: &ComplianceRules,
    lex: &Lexicon,
) -> Partial {
    let keys: Vec<SliceKey> =
        profile_sentence(gold, rules, lex).iter().map(|p| SliceKey::project(p, dims)).collect();
    let spans = gold.spans();
    let errors = classify_spans(spans, pred);
    let mut rows: BTreeMap<SliceKey, (ConfusionCounts, ErrorTypology)> = BTreeMap::new();
    for ((g, key), cat) in spans.iter().zip(&keys).zip(&errors.gold) {
        let e = rows.entry(key.clone()).or_default();
        if pred.contains(g) {
            e.0.tp += 1;
        } else {
            e.0.fn_ += 1;
        }
        e.1.record(*cat);
    }
    let mut spurious = ConfusionCounts::default();
    let mut spurious_t = ErrorTypology::default();
    for p in pred.iter().filter(|p| !spans.contains(p)) {
        match spans.iter().position(|g| g.overlaps(p)) {
            Some(i) => rows.entry(keys[i].clone()).or_default().0.fp += 1,
            None => {
                spurious.fp += 1;
                spurious_t.spurious += 1;
            }
        }
    }
    (rows, spurious, spurious_t)
}

/// Buckets gold spans by their projection onto `dims` and scores each
/// bucket. A non-exact prediction counts as a false positive in the bucket
/// of the first gold span it overlaps.
pub fn slice_scores<T: Scalar>(
    gold: &Dataset,
    pred: &Dataset,
    dims: &[Dimension],
    rules: &ComplianceRules,
    lex: &Lexicon,
) -> Result<SliceReport<T>> {
    gold.check_aligned(pred)?;
    let (rows, spurious, spurious_t) = gold
        .sentences
        .par_iter()
        .zip(pred.sentences.par_iter())
        .map(|(g, p)| slice_sentence(g, p.spans(), dims, rules, lex))
        .reduce(|| (BTreeMap::new(), ConfusionCounts::default(), ErrorTypology::default()), merge);
    Ok(finish(dims.to_vec(), rows, spurious, spurious_t))
}

fn finish<T: Scalar>(
    dims: Vec<Dimension>,
    rows: BTreeMap<SliceKey, (ConfusionCounts, ErrorTypology)>,
    spurious: ConfusionCounts,
    spurious_t: ErrorTypology,
) -> SliceReport<T> {
    let total_c = rows.values().map(|r| r.0).sum::<ConfusionCounts>() + spurious;
    let total_t = rows.values().map(|r| r.1).sum::<ErrorTypology>() + spurious_t;
    SliceReport {
        dims,
        rows: rows.into_iter().map(|(k, (c, t))| (k, SliceCell::new(c, t))).collect(),
        spurious: SliceCell::new(spurious, spurious_t),
        overall: SliceCell::new(total_c, total_t),
    }
}

impl<T: Scalar> SliceReport<T> {
    /// Re-aggregates the rows onto a subset of the dimensions.
    pub fn coarsen(&self, keep: &[Dimension]) -> SliceReport<T> {
        let dims: Vec<Dimension> = self.dims.iter().copied().filter(|d| keep.contains(d)).collect();
        let mut rows: BTreeMap<SliceKey, (ConfusionCounts, ErrorTypology)> = BTreeMap::new();
        for (k, cell) in &self.rows {
            let e = rows.entry(k.restrict(&dims)).or_default();
            e.0 += cell.counts;
            e.1 += cell.typology;
        }
        finish(dims, rows, self.spurious.counts, self.spurious.typology)
    }

    /// Plain-text recall table (percent, support in parentheses). When the
    /// report is sliced by `quoted`, quoted and unquoted become columns.
    pub fn render_table(&self) -> String {
        let pivot = self.dims.contains(&Dimension::Quoted);
        let row_dims: Vec<Dimension> = self.dims.iter().copied().filter(|d| *d != Dimension::Quoted).collect();
        let columns: Vec<Option<&str>> = if pivot { vec![Some("quoted"), Some("unquoted")] } else { vec![None] };

        let mut grid: BTreeMap<SliceKey, Vec<Option<&SliceCell<T>>>> = BTreeMap::new();
        for (k, cell) in &self.rows {
            let slot = grid.entry(k.without(&[Dimension::Quoted])).or_insert_with(|| vec![None; columns.len()]);
            let col = columns.iter().position(|c| c.is_none() || *c == k.get(Dimension::Quoted)).unwrap_or(0);
            slot[col] = Some(cell);
        }

        let fmt_cell = |c: Option<&SliceCell<T>>| match c {
            Some(c) => format!("{:.2} ({})", c.summary.recall.to_f64().unwrap_or(f64::NAN) * 100.0, c.summary.support),
            None => "-".to_string(),
        };
        let mut header: Vec<String> = row_dims.iter().map(|d| d.to_string()).collect();
        header.extend(columns.iter().map(|c| match c {
            Some(q) => format!("R {q}"),
            None => "R".to_string(),
        }));
        let mut lines: Vec<Vec<String>> = vec![header];
        for (k, cells) in &grid {
            let mut line: Vec<String> = row_dims.iter().map(|d| k.get(*d).unwrap_or("").to_string()).collect();
            line.extend(cells.iter().map(|c| fmt_cell(*c)));
            lines.push(line);
        }
        let width = lines[0].len();
        let widths: Vec<usize> =
            (0..width).map(|i| lines.iter().map(|l| l[i].chars().count()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for (n, l) in lines.iter().enumerate() {
            let cells: Vec<String> = l.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
            if n == 0 {
                out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (width - 1)));
                out.push('\n');
            }
        }
        out.push_str(&format!(
            "overall R {:.2} P {:.2} F1 {:.2} ({} gold spans, {} spurious predictions)\n",
            self.overall.summary.recall.to_f64().unwrap_or(f64::NAN) * 100.0,
            self.overall.summary.precision.to_f64().unwrap_or(f64::NAN) * 100.0,
            self.overall.summary.f1.to_f64().unwrap_or(f64::NAN) * 100.0,
            self.overall.summary.support,
            self.spurious.counts.fp,
        ));
        out
    }
}

named_enum! {
    /// Token categories compared by Cohen's kappa.
    pub enum KappaAlphabet {
        /// Inside any span vs outside.
        Binary => "binary",
        /// The full BIO tag string.
        Full => "full",
    }
}

fn token_categories(s: &Sentence, alphabet: KappaAlphabet) -> Vec<String> {
    match alphabet {
        KappaAlphabet::Binary => {
            let mut inside = vec!["O".to_string(); s.len()];
            for sp in s.spans() {
                for c in &mut inside[sp.start..sp.end] {
                    *c = "I".to_string();
                }
            }
            inside
        }
        KappaAlphabet::Full => s.tags().iter().map(ToString::to_string).collect(),
    }
}

/// Cohen's kappa over the pooled token sequence. When chance agreement is 1
/// (both annotators use one identical category) kappa is defined as 1.
pub fn cohen_kappa_tokens<T: Scalar>(a: &Dataset, b: &Dataset, alphabet: KappaAlphabet) -> Result<T> {
    a.check_aligned(b)?;
    let mut n: u64 = 0;
    let mut agree: u64 = 0;
    let mut ma: BTreeMap<String, u64> = BTreeMap::new();
    let mut mb: BTreeMap<String, u64> = BTreeMap::new();
    for (sa, sb) in a.sentences.iter().zip(&b.sentences) {
        for (x, y) in token_categories(sa, alphabet).into_iter().zip(token_categories(sb, alphabet)) {
            n += 1;
            if x == y {
                agree += 1;
            }
            *ma.entry(x).or_default() += 1;
            *mb.entry(y).or_default() += 1;
        }
    }
    if n == 0 {
        return Err(Error::NoTokens);
    }
    // kappa = (n*agree - sum_k a_k b_k) / (n^2 - sum_k a_k b_k), exact in integers.
    let chance: u128 = ma.iter().map(|(k, &x)| x as u128 * *mb.get(k).unwrap_or(&0) as u128).sum();
    let n2 = n as u128 * n as u128;
    if chance == n2 {
        return Ok(T::one());
    }
    let num = (n as u128 * agree as u128) as f64 - chance as f64;
    let den = (n2 - chance) as f64;
    Ok(T::lit(num / den))
}

/// Span-level F1 of one annotation against the other; symmetric.
pub fn pairwise_span_f1<T: Scalar>(a: &Dataset, b: &Dataset) -> Result<T> {
    a.check_aligned(b)?;
    let (mut tp, mut total) = (0u64, 0u64);
    for (sa, sb) in a.sentences.iter().zip(&b.sentences) {
        tp += sa.spans().iter().filter(|s| sb.spans().contains(s)).count() as u64;
        total += (sa.spans().len() + sb.spans().len()) as u64;
    }
    Ok(T::ratio(2 * tp, total))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AgreementReport<T> {
    pub kappa_token: T,
    pub pairwise_f1_span: T,
    pub alphabet: KappaAlphabet,
    pub tokens: u64,
    pub spans_a: u64,
    pub spans_b: u64,
}

pub fn agreement<T: Scalar>(a: &Dataset, b: &Dataset, alphabet: KappaAlphabet) -> Result<AgreementReport<T>> {
    Ok(AgreementReport {
        kappa_token: cohen_kappa_tokens(a, b, alphabet)?,
        pairwise_f1_span: pairwise_span_f1(a, b)?,
        alphabet,
        tokens: a.token_count() as u64,
        spans_a: a.span_count() as u64,
        spans_b: b.span_count() as u64,
    })
}
