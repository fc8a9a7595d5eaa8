//! Versioned report documents shared by the command-line tools.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::attributes::{ComplianceRules, Lexicon};
use crate::corpus::Dataset;
use crate::diagnostics::{slice_scores, Dimension, SliceReport};
use crate::error::Result;
use crate::metrics::{
    classify_errors, macro_average, span_counts, span_counts_by_label, token_separator_counts, ConfusionCounts,
    ErrorTypology, ScoreSummary,
};
use crate::scalar::Scalar;

pub const SCHEMA_VERSION: u32 = 1;

/// Wraps a payload with `schema_version` and `kind` fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versioned<R> {
    pub schema_version: u32,
    pub kind: String,
    #[serde(flatten)]
    pub payload: R,
}

impl<R> Versioned<R> {
    pub fn new(kind: &str, payload: R) -> Self {
        Versioned { schema_version: SCHEMA_VERSION, kind: kind.to_string(), payload }
    }
}

named_enum! {
    pub enum Averaging {
        Micro => "micro",
        Macro => "macro",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ScoreReport<T> {
    pub sentences: usize,
    pub averaging: Averaging,
    pub span_counts: ConfusionCounts,
    pub span: ScoreSummary<T>,
    pub token_separator_counts: ConfusionCounts,
    pub token_separator: ScoreSummary<T>,
    pub typology: ErrorTypology,
}

/// Corpus-level span, token/separator and typology scores.
pub fn score_datasets<T: Scalar>(gold: &Dataset, pred: &Dataset, averaging: Averaging) -> Result<ScoreReport<T>> {
    gold.check_aligned(pred)?;
    let mut spans = ConfusionCounts::default();
    let mut slots = ConfusionCounts::default();
    let mut typology = ErrorTypology::default();
    let mut by_label: BTreeMap<String, ConfusionCounts> = BTreeMap::new();
    for (g, p) in gold.sentences.iter().zip(&pred.sentences) {
        spans += span_counts(g.spans(), p.spans());
        slots += token_separator_counts(g.spans(), p.spans(), g.len());
        typology += classify_errors(g.spans(), p.spans());
        for (label, c) in span_counts_by_label(g.spans(), p.spans()) {
            *by_label.entry(label).or_default() += c;
        }
    }
    let span = match averaging {
        Averaging::Micro => spans.summary(),
        Averaging::Macro => macro_average(&by_label),
    };
    Ok(ScoreReport {
        sentences: gold.len(),
        averaging,
        span_counts: spans,
        span,
        token_separator_counts: slots,
        token_separator: slots.summary(),
        typology,
    })
}

/// Overall scores, then per casing/quotation configuration, then per type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FullReport<T> {
    pub overall: ScoreReport<T>,
    pub per_configuration: SliceReport<T>,
    pub per_type: SliceReport<T>,
}

pub const CONFIGURATION_DIMS: [Dimension; 2] = [Dimension::Casing, Dimension::Quoted];
pub const TYPE_DIMS: [Dimension; 3] = [Dimension::Type, Dimension::Length, Dimension::Position];

pub fn full_report<T: Scalar>(
    gold: &Dataset,
    pred: &Dataset,
    type_dims: &[Dimension],
    rules: &ComplianceRules,
    lex: &Lexicon,
) -> Result<FullReport<T>> {
    Ok(FullReport {
        overall: score_datasets(gold, pred, Averaging::Micro)?,
        per_configuration: slice_scores(gold, pred, &CONFIGURATION_DIMS, rules, lex)?,
        per_type: slice_scores(gold, pred, type_dims, rules, lex)?,
    })
}
