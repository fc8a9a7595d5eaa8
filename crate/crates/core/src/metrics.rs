//! Span-level and token/separator-level scoring, plus an error typology.

use std::collections::BTreeMap;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::corpus::Span;
use crate::scalar::{harmonic_mean, Scalar};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, fp, fn_ }
    }

    /// Gold-side total, `tp + fn`.
    pub fn support(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn summary<T: Scalar>(&self) -> ScoreSummary<T> {
        ScoreSummary::from_counts(*self)
    }
}

impl Add for ConfusionCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ConfusionCounts { tp: self.tp + o.tp, fp: self.fp + o.fp, fn_: self.fn_ + o.fn_ }
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ScoreSummary<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
    pub support: u64,
}

impl<T: Scalar> ScoreSummary<T> {
    pub fn from_counts(c: ConfusionCounts) -> Self {
        let precision = T::ratio(c.tp, c.tp + c.fp);
        let recall = T::ratio(c.tp, c.tp + c.fn_);
        ScoreSummary { precision, recall, f1: harmonic_mean(precision, recall), support: c.support() }
    }

    pub fn zero() -> Self {
        ScoreSummary { precision: T::zero(), recall: T::zero(), f1: T::zero(), support: 0 }
    }
}

/// Exact `(start, end, label)` matching within one sentence.
pub fn span_counts(gold: &[Span], pred: &[Span]) -> ConfusionCounts {
    let tp = gold.iter().filter(|g| pred.contains(g)).count() as u64;
    ConfusionCounts { tp, fp: pred.len() as u64 - tp, fn_: gold.len() as u64 - tp }
}

pub fn span_scores<T: Scalar>(gold: &[Span], pred: &[Span]) -> (ConfusionCounts, ScoreSummary<T>) {
    let c = span_counts(gold, pred);
    (c, c.summary())
}

fn slot_labels(spans: &[Span], n: usize) -> (Vec<Option<&str>>, Vec<Option<&str>>) {
    let mut tokens = vec![None; n];
    let mut seps = vec![None; n.saturating_sub(1)];
    for s in spans {
        let label = Some(s.label.as_str());
        let end = s.end.min(n);
        tokens[s.start.min(end)..end].fill(label);
        seps[s.start.min(end.saturating_sub(1))..end.saturating_sub(1)].fill(label);
    }
    (tokens, seps)
}

/// Counts over `n` token slots and `n - 1` separator slots. A separator is
/// positive when both neighbours lie in the same span. Slots carry the span
/// label, so a label mismatch is both a false positive and a false negative.
pub fn token_separator_counts(gold: &[Span], pred: &[Span], n: usize) -> ConfusionCounts {
    if n == 0 {
        return ConfusionCounts::default();
    }
    let (gt, gs) = slot_labels(gold, n);
    let (pt, ps) = slot_labels(pred, n);
    gt.iter().chain(&gs).zip(pt.iter().chain(&ps)).fold(ConfusionCounts::default(), |mut c, (g, p)| {
        match (g, p) {
            (Some(a), Some(b)) if a == b => c.tp += 1,
            (Some(_), Some(_)) => {
                c.fp += 1;
                c.fn_ += 1;
            }
            (Some(_), None) => c.fn_ += 1,
            (None, Some(_)) => c.fp += 1,
            (None, None) => {}
        }
        c
    })
}

/// Support is the number of positive gold slots.
pub fn token_separator_scores<T: Scalar>(gold: &[Span], pred: &[Span], n: usize) -> ScoreSummary<T> {
    token_separator_counts(gold, pred, n).summary()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    Correct,
    Fused,
    Split,
    Boundary,
    Missed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorTypology {
    pub correct: u64,
    pub missed: u64,
    pub spurious: u64,
    pub boundary: u64,
    pub fused: u64,
    pub split: u64,
}

impl ErrorTypology {
    /// Number of gold spans categorised (everything except `spurious`).
    pub fn gold_total(&self) -> u64 {
        self.correct + self.missed + self.boundary + self.fused + self.split
    }

    pub fn record(&mut self, c: ErrorCategory) {
        match c {
            ErrorCategory::Correct => self.correct += 1,
            ErrorCategory::Fused => self.fused += 1,
            ErrorCategory::Split => self.split += 1,
            ErrorCategory::Boundary => self.boundary += 1,
            ErrorCategory::Missed => self.missed += 1,
        }
    }
}

impl Add for ErrorTypology {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ErrorTypology {
            correct: self.correct + o.correct,
            missed: self.missed + o.missed,
            spurious: self.spurious + o.spurious,
            boundary: self.boundary + o.boundary,
            fused: self.fused + o.fused,
            split: self.split + o.split,
        }
    }
}

impl AddAssign for ErrorTypology {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sum for ErrorTypology {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

/// Per-span outcome of [`classify_spans`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanErrors {
    /// One category per gold span, in gold order.
    pub gold: Vec<ErrorCategory>,
    /// For each prediction, whether it overlaps no gold span.
    pub spurious: Vec<bool>,
}

/// Assigns every gold span one category, by priority
/// correct > fused > split > boundary > missed. Overlap ignores labels;
/// correctness does not.
pub fn classify_spans(gold: &[Span], pred: &[Span]) -> SpanErrors {
    let categories = gold
        .iter()
        .map(|g| {
            if pred.contains(g) {
                return ErrorCategory::Correct;
            }
            let hits: Vec<&Span> = pred.iter().filter(|p| p.overlaps(g)).collect();
            match hits.as_slice() {
                [] => ErrorCategory::Missed,
                [p] if gold.iter().any(|o| o != g && o.overlaps(p)) => ErrorCategory::Fused,
                [_] => ErrorCategory::Boundary,
                _ => ErrorCategory::Split,
            }
        })
        .collect();
    let spurious = pred.iter().map(|p| !gold.iter().any(|g| g.overlaps(p))).collect();
    SpanErrors { gold: categories, spurious }
}

pub fn classify_errors(gold: &[Span], pred: &[Span]) -> ErrorTypology {
    let e = classify_spans(gold, pred);
    let mut t = ErrorTypology { spurious: e.spurious.iter().filter(|&&s| s).count() as u64, ..Default::default() };
    e.gold.into_iter().for_each(|c| t.record(c));
    t
}

/// Micro average: counts are summed, then scored.
pub fn aggregate<T: Scalar>(per_sentence: &[ConfusionCounts]) -> ScoreSummary<T> {
    per_sentence.iter().copied().sum::<ConfusionCounts>().summary()
}

/// Unweighted mean of per-label precision, recall and F1. Support is the
/// summed gold count.
pub fn macro_average<T: Scalar>(per_label: &BTreeMap<String, ConfusionCounts>) -> ScoreSummary<T> {
    if per_label.is_empty() {
        return ScoreSummary::zero();
    }
    let n = T::from_count(per_label.len() as u64);
    let mut acc = ScoreSummary::<T>::zero();
    for c in per_label.values() {
        let s = c.summary::<T>();
        acc.precision = acc.precision + s.precision;
        acc.recall = acc.recall + s.recall;
        acc.f1 = acc.f1 + s.f1;
        acc.support += s.support;
    }
    ScoreSummary { precision: acc.precision / n, recall: acc.recall / n, f1: acc.f1 / n, support: acc.support }
}

/// Per-label exact-match counts for one sentence.
pub fn span_counts_by_label(gold: &[Span], pred: &[Span]) -> BTreeMap<String, ConfusionCounts> {
    let mut out: BTreeMap<String, ConfusionCounts> = BTreeMap::new();
    for g in gold {
        let c = out.entry(g.label.clone()).or_default();
        if pred.contains(g) {
            c.tp += 1;
        } else {
            c.fn_ += 1;
        }
    }
    for p in pred.iter().filter(|p| !gold.contains(p)) {
        out.entry(p.label.clone()).or_default().fp += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(v: &[(usize, usize)]) -> Vec<Span> {
        v.iter().map(|&(s, e)| Span::eng(s, e)).collect()
    }

    #[test]
    fn exact_match() {
        let (c, s) = span_scores::<f64>(&sp(&[(2, 3)]), &sp(&[(2, 3)]));
        assert_eq!(c, ConfusionCounts::new(1, 0, 0));
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let (c, s) = span_scores::<f64>(&sp(&[(2, 3)]), &sp(&[(2, 4)]));
        assert_eq!(c.tp, 0);
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn label_sensitive() {
        let (c, _) = span_scores::<f64>(&[Span::new(0, 1, "A")], &[Span::new(0, 1, "B")]);
        assert_eq!(c, ConfusionCounts::new(0, 1, 1));
    }

    // Brute force: try every gold/pred pair for an exact match.
    fn brute_tp(gold: &[Span], pred: &[Span]) -> u64 {
        let mut used = vec![false; pred.len()];
        let mut tp = 0;
        for g in gold {
            for (j, p) in pred.iter().enumerate() {
                if !used[j] && g.start == p.start && g.end == p.end && g.label == p.label {
                    used[j] = true;
                    tp += 1;
                    break;
                }
            }
        }
        tp
    }

    #[test]
    fn nine_of_ten() {
        let gold: Vec<Span> = (0..10).map(|i| Span::eng(3 * i, 3 * i + 2)).collect();
        let mut pred = gold.clone();
        pred[4] = Span::eng(12, 13);
        assert_eq!(brute_tp(&gold, &pred), 9);
        let (c, s) = span_scores::<f64>(&gold, &pred);
        assert_eq!(c.tp, 9);
        assert_eq!(s.recall, 0.9);
    }

    #[test]
    fn token_separator_examples() {
        let s = token_separator_scores::<f64>(&sp(&[(1, 3)]), &sp(&[(1, 3)]), 4);
        assert_eq!((s.precision, s.recall, s.support), (1.0, 1.0, 3));
        // Slots tok0..tok3, sep01, sep12, sep23. Gold positive: tok1, tok2, sep12.
        // Pred positive: tok1. tp=1, fn=2.
        let c = token_separator_counts(&sp(&[(1, 3)]), &sp(&[(1, 2)]), 4);
        assert_eq!(c, ConfusionCounts::new(1, 0, 2));
        assert!((c.summary::<f64>().recall - 1.0 / 3.0).abs() < 1e-15);
        let s = token_separator_scores::<f64>(&[], &[], 4);
        assert_eq!((s.precision, s.recall, s.f1, s.support), (0.0, 0.0, 0.0, 0));
        assert_eq!(token_separator_scores::<f64>(&sp(&[(0, 1)]), &[], 0), ScoreSummary::zero());
    }

    #[test]
    fn adjacent_spans_do_not_share_separator() {
        // Gold: [0,1) [1,2); pred [0,2) adds the separator between them.
        let c = token_separator_counts(&sp(&[(0, 1), (1, 2)]), &sp(&[(0, 2)]), 2);
        assert_eq!(c, ConfusionCounts::new(2, 1, 0));
    }

    #[test]
    fn typology_examples() {
        let t = classify_errors(&sp(&[(0, 1), (1, 2)]), &sp(&[(0, 2)]));
        assert_eq!((t.fused, t.spurious, t.gold_total()), (2, 0, 2));
        let t = classify_errors(&sp(&[(0, 3)]), &sp(&[(0, 1), (2, 3)]));
        assert_eq!((t.split, t.gold_total()), (1, 1));
        let t = classify_errors(&sp(&[(0, 1)]), &[]);
        assert_eq!(t.missed, 1);
        let t = classify_errors(&sp(&[(0, 2), (5, 6)]), &sp(&[(1, 3), (5, 6), (8, 9)]));
        assert_eq!((t.boundary, t.correct, t.spurious), (1, 1, 1));
    }

    #[test]
    fn aggregate_micro() {
        let r = aggregate::<f64>(&[ConfusionCounts::new(1, 0, 0), ConfusionCounts::new(0, 0, 1)]);
        assert_eq!(r.recall, 0.5);
        assert_eq!(aggregate::<f64>(&[]), ScoreSummary::zero());
        let r32 = aggregate::<f32>(&[ConfusionCounts::new(1, 0, 3)]);
        assert_eq!(r32.recall, 0.25f32);
    }

    #[test]
    fn macro_vs_micro() {
        let gold = vec![Span::new(0, 1, "A"), Span::new(1, 2, "A"), Span::new(2, 3, "B")];
        let pred = vec![Span::new(0, 1, "A"), Span::new(1, 2, "A")];
        let by = span_counts_by_label(&gold, &pred);
        let m = macro_average::<f64>(&by);
        assert_eq!(m.recall, 0.5);
        assert!((aggregate::<f64>(&[span_counts(&gold, &pred)]).recall - 2.0 / 3.0).abs() < 1e-15);
    }
}
