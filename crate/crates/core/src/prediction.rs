//! Recall extrapolation onto an unseen dataset, system ranking and
//! correlation between predicted and observed scores.
//!
//! The expected number of retrieved spans on a target dataset is
//! `sum_t m_t * r_t`, where `m_t` counts target spans of type `t` and `r_t`
//! is the benchmark recall on that type. Predicted recall is that sum over
//! the target's span total.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::attributes::{profile_sentence, ComplianceRules, Lexicon};
use crate::corpus::Dataset;
use crate::diagnostics::{slice_scores, Dimension, SliceKey, SliceReport};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TypeRecall<T> {
    pub recall: T,
    pub support: u64,
}

/// Benchmark recall per attribute type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TypeRecallTable<T> {
    pub dims: Vec<Dimension>,
    pub rows: BTreeMap<SliceKey, TypeRecall<T>>,
}

impl<T: Scalar> TypeRecallTable<T> {
    pub fn new(dims: Vec<Dimension>, rows: BTreeMap<SliceKey, TypeRecall<T>>) -> Result<Self> {
        for (k, r) in &rows {
            if k.dims() != dims {
                return Err(Error::DimensionMismatch);
            }
            if r.support == 0 || !(r.recall >= T::zero() && r.recall <= T::one()) {
                return Err(Error::UnknownValue { what: "recall row", value: format!("{k}: {} / {}", r.recall, r.support) });
            }
        }
        Ok(TypeRecallTable { dims, rows })
    }

    pub fn from_slice_report(report: &SliceReport<T>) -> Self {
        let rows = report
            .rows
            .iter()
            .map(|(k, c)| (k.clone(), TypeRecall { recall: c.summary.recall, support: c.counts.support() }))
            .collect();
        TypeRecallTable { dims: report.dims.clone(), rows }
    }

    /// Support-weighted recall over rows accepted by `filter`.
    fn pooled(&self, filter: impl Fn(&SliceKey) -> bool) -> Option<T> {
        let (mut hits, mut n) = (T::zero(), 0u64);
        for (_, r) in self.rows.iter().filter(|(k, _)| filter(k)) {
            hits = hits + r.recall * T::from_count(r.support);
            n += r.support;
        }
        (n > 0).then(|| hits / T::from_count(n))
    }

    /// Micro recall of the benchmark.
    pub fn overall_recall(&self) -> Option<T> {
        self.pooled(|_| true)
    }

    pub fn total_support(&self) -> u64 {
        self.rows.values().map(|r| r.support).sum()
    }
}

/// Exact-match recall of `pred` within each profile bucket of `gold`.
pub fn per_type_recall<T: Scalar>(
    gold: &Dataset,
    pred: &Dataset,
    dims: &[Dimension],
    rules: &ComplianceRules,
    lex: &Lexicon,
) -> Result<TypeRecallTable<T>> {
    let report: SliceReport<T> = slice_scores(gold, pred, dims, rules, lex)?;
    Ok(TypeRecallTable::from_slice_report(&report))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetTypeCounts {
    pub dims: Vec<Dimension>,
    pub rows: BTreeMap<SliceKey, u64>,
    pub total: u64,
}

impl TargetTypeCounts {
    pub fn new(dims: Vec<Dimension>, rows: BTreeMap<SliceKey, u64>) -> Self {
        let total = rows.values().sum();
        TargetTypeCounts { dims, rows, total }
    }

    /// Counts the gold spans of `gold` per profile projection.
    pub fn from_dataset(gold: &Dataset, dims: &[Dimension], rules: &ComplianceRules, lex: &Lexicon) -> Self {
        let mut rows: BTreeMap<SliceKey, u64> = BTreeMap::new();
        for s in &gold.sentences {
            for p in profile_sentence(s, rules, lex) {
                *rows.entry(SliceKey::project(&p, dims)).or_default() += 1;
            }
        }
        TargetTypeCounts::new(dims.to_vec(), rows)
    }
}

named_enum! {
    /// What to do with target types the benchmark has no recall for.
    pub enum FallbackPolicy {
        /// Drop dimensions in a fixed order until observed rows match.
        Backoff => "backoff",
        /// Fail, listing the unseen types.
        Strict => "strict",
        /// Use the benchmark's overall recall.
        OverallOnly => "overall-only",
    }
}

named_enum! {
    pub enum FallbackLevel {
        Exact => "exact",
        DropQuoted => "drop-quoted",
        DropCasing => "drop-casing",
        DropPosition => "drop-position",
        DropAmbiguity => "drop-ambiguity",
        DropAdjacency => "drop-adjacency",
        DropShape => "drop-shape",
        Overall => "overall",
    }
}

/// Dimension groups removed, cumulatively, by the backoff policy.
pub const BACKOFF_ORDER: [(FallbackLevel, &[Dimension]); 6] = [
    (FallbackLevel::DropQuoted, &[Dimension::Quoted]),
    (FallbackLevel::DropCasing, &[Dimension::Casing, Dimension::TextCasing, Dimension::SpanCasing]),
    (FallbackLevel::DropPosition, &[Dimension::Position]),
    (FallbackLevel::DropAmbiguity, &[Dimension::Ambiguity]),
    (FallbackLevel::DropAdjacency, &[Dimension::Adjacent]),
    (FallbackLevel::DropShape, &[Dimension::Shape, Dimension::Type]),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PredictedType<T> {
    pub key: SliceKey,
    pub count: u64,
    pub recall: T,
    pub fallback: FallbackLevel,
    pub expected_tp: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallbackEntry {
    pub key: SliceKey,
    pub level: FallbackLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PredictionReport<T> {
    pub expected_tp: T,
    pub expected_fn: T,
    pub predicted_recall: T,
    pub total: u64,
    pub policy: FallbackPolicy,
    pub per_type: Vec<PredictedType<T>>,
    pub fallback_log: Vec<FallbackEntry>,
}

fn resolve<T: Scalar>(table: &TypeRecallTable<T>, key: &SliceKey, policy: FallbackPolicy) -> Option<(T, FallbackLevel)> {
    if let Some(r) = table.rows.get(key) {
        return Some((r.recall, FallbackLevel::Exact));
    }
    match policy {
        FallbackPolicy::Strict => return None,
        FallbackPolicy::OverallOnly => {}
        FallbackPolicy::Backoff => {
            let mut dropped: Vec<Dimension> = Vec::new();
            for (level, group) in BACKOFF_ORDER {
                if !group.iter().any(|d| table.dims.contains(d)) {
                    continue;
                }
                dropped.extend_from_slice(group);
                let target = key.without(&dropped);
                if let Some(r) = table.pooled(|k| k.without(&dropped) == target) {
                    return Some((r, level));
                }
            }
        }
    }
    table.overall_recall().map(|r| (r, FallbackLevel::Overall))
}

/// Extrapolates benchmark recall onto the target's type distribution.
/// Expected counts stay real-valued.
pub fn predict_recall<T: Scalar>(
    table: &TypeRecallTable<T>,
    counts: &TargetTypeCounts,
    policy: FallbackPolicy,
) -> Result<PredictionReport<T>> {
    if table.dims != counts.dims {
        return Err(Error::DimensionMismatch);
    }
    let mut per_type = Vec::new();
    let mut fallback_log = Vec::new();
    let mut unseen = Vec::new();
    let mut expected_tp = T::zero();
    for (key, &m) in counts.rows.iter().filter(|(_, &m)| m > 0) {
        let Some((recall, fallback)) = resolve(table, key, policy) else {
            if policy == FallbackPolicy::Strict {
                unseen.push(key.to_string());
                continue;
            }
            return Err(Error::EmptyTable);
        };
        if fallback != FallbackLevel::Exact {
            fallback_log.push(FallbackEntry { key: key.clone(), level: fallback });
        }
        let tp = T::from_count(m) * recall;
        expected_tp = expected_tp + tp;
        per_type.push(PredictedType { key: key.clone(), count: m, recall, fallback, expected_tp: tp });
    }
    if !unseen.is_empty() {
        return Err(Error::UnseenTypes(unseen));
    }
    let total = T::from_count(counts.total);
    let predicted_recall = if counts.total == 0 { T::zero() } else { expected_tp / total };
    Ok(PredictionReport {
        expected_tp,
        expected_fn: total - expected_tp,
        predicted_recall,
        total: counts.total,
        policy,
        per_type,
        fallback_log,
    })
}

fn cmp_nan_low<T: Scalar>(a: &T, b: &T) -> Ordering {
    match (a.is_nan(), b.is_nan()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        _ => a.partial_cmp(b).unwrap_or(Ordering::Equal),
    }
}

/// 1-based ranks with ties sharing the mean of their positions. Ascending
/// ranks the smallest value first; NaN sorts below every number.
pub fn average_ranks<T: Scalar>(values: &[T], descending: bool) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        let o = cmp_nan_low(&values[i], &values[j]);
        if descending {
            o.reverse()
        } else {
            o
        }
    });
    let mut ranks = vec![T::zero(); values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && cmp_nan_low(&values[order[i]], &values[order[j]]) == Ordering::Equal {
            j += 1;
        }
        let rank = T::from_count((i + 1 + j) as u64) / T::lit(2.0);
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Rank 1 is the highest score; tied systems share the average position.
pub fn rank_systems<T: Scalar>(scores: &BTreeMap<String, T>) -> BTreeMap<String, T> {
    let values: Vec<T> = scores.values().copied().collect();
    scores.keys().cloned().zip(average_ranks(&values, true)).collect()
}

pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(Error::TooFewObservations(xs.len()));
    }
    let n = T::from_count(xs.len() as u64);
    let mx = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let my = ys.iter().fold(T::zero(), |a, &y| a + y) / n;
    let (mut sxx, mut syy, mut sxy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
        sxy = sxy + dx * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one()))
}

/// Pearson correlation of average ranks.
pub fn spearman<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    pearson(&average_ranks(xs, false), &average_ranks(ys, false))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CorrelationReport<T> {
    pub pearson: T,
    pub spearman: T,
    pub n: usize,
}

pub fn correlate<T: Scalar>(xs: &[T], ys: &[T]) -> Result<CorrelationReport<T>> {
    Ok(CorrelationReport { pearson: pearson(xs, ys)?, spearman: spearman(xs, ys)?, n: xs.len() })
}

/// Reads `(predicted, true)` pairs: two numeric columns separated by tabs,
/// commas or spaces. `#` starts a comment; a non-numeric first row is a header.
pub fn parse_two_columns<T: Scalar>(text: &str) -> Result<(Vec<T>, Vec<T>)> {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut first = true;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse::<f64>().ok()).collect();
        match parsed {
            Some(v) if v.len() == 2 && v.iter().all(|x| x.is_finite()) => {
                xs.push(T::lit(v[0]));
                ys.push(T::lit(v[1]));
            }
            None if first => {}
            _ => return Err(Error::BadNumericLine { line: i + 1, text: raw.to_string() }),
        }
        first = false;
    }
    Ok((xs, ys))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(s: &str) -> SliceKey {
        s.parse().unwrap()
    }

    fn table(dims: &[Dimension], rows: &[(&str, f64, u64)]) -> TypeRecallTable<f64> {
        TypeRecallTable::new(
            dims.to_vec(),
            rows.iter().map(|&(k, r, n)| (key(k), TypeRecall { recall: r, support: n })).collect(),
        )
        .unwrap()
    }

    fn counts(dims: &[Dimension], rows: &[(&str, u64)]) -> TargetTypeCounts {
        TargetTypeCounts::new(dims.to_vec(), rows.iter().map(|&(k, m)| (key(k), m)).collect())
    }

    #[test]
    fn single_type_worked_example() {
        let d = [Dimension::Type];
        let t = table(&d, &[("type=non_compliant", 0.9, 10)]);
        let r = predict_recall(&t, &counts(&d, &[("type=non_compliant", 20)]), FallbackPolicy::Strict).unwrap();
        assert_eq!(r.expected_tp, 18.0);
        assert_eq!(r.expected_fn, 2.0);
        assert_eq!(r.predicted_recall, 0.9);
    }

    #[test]
    fn two_types_half() {
        let d = [Dimension::Type];
        let t = table(&d, &[("type=compliant", 1.0, 5), ("type=adjacent", 0.0, 5)]);
        let c = counts(&d, &[("type=compliant", 10), ("type=adjacent", 10)]);
        assert_eq!(predict_recall(&t, &c, FallbackPolicy::Backoff).unwrap().predicted_recall, 0.5);
    }

    #[test]
    fn empty_target() {
        let d = [Dimension::Type];
        let t = table(&d, &[("type=compliant", 1.0, 5)]);
        let r = predict_recall(&t, &counts(&d, &[]), FallbackPolicy::Strict).unwrap();
        assert_eq!((r.predicted_recall, r.expected_tp, r.total), (0.0, 0.0, 0));
    }

    #[test]
    fn fallback_policies() {
        let d = [Dimension::Type, Dimension::Position, Dimension::Quoted];
        let t = table(
            &d,
            &[
                ("type=compliant,position=mid,quoted=quoted", 1.0, 10),
                ("type=compliant,position=mid,quoted=unquoted", 0.5, 10),
                ("type=compliant,position=initial,quoted=quoted", 0.0, 20),
            ],
        );
        let c = counts(&d, &[("type=compliant,position=initial,quoted=unquoted", 4)]);
        assert!(matches!(predict_recall(&t, &c, FallbackPolicy::Strict), Err(Error::UnseenTypes(v)) if v.len() == 1));

        // Dropping `quoted` leaves only the initial/quoted row.
        let r = predict_recall(&t, &c, FallbackPolicy::Backoff).unwrap();
        assert_eq!(r.per_type[0].fallback, FallbackLevel::DropQuoted);
        assert_eq!(r.expected_tp, 0.0);
        assert_eq!(r.fallback_log.len(), 1);

        // Overall recall: (10 + 5 + 0) / 40.
        let r = predict_recall(&t, &c, FallbackPolicy::OverallOnly).unwrap();
        assert_eq!(r.per_type[0].fallback, FallbackLevel::Overall);
        assert_eq!(r.predicted_recall, 0.375);

        let c = counts(&d, &[("type=adjacent,position=initial,quoted=unquoted", 4)]);
        let r = predict_recall(&t, &c, FallbackPolicy::Backoff).unwrap();
        assert_eq!(r.per_type[0].fallback, FallbackLevel::DropShape);
        assert_eq!(r.predicted_recall, 0.375);
    }

    #[test]
    fn dims_must_agree() {
        let t = table(&[Dimension::Type], &[("type=compliant", 1.0, 5)]);
        let c = counts(&[Dimension::Length], &[("length=single", 1)]);
        assert!(matches!(predict_recall(&t, &c, FallbackPolicy::Backoff), Err(Error::DimensionMismatch)));
        assert!(TypeRecallTable::new(vec![Dimension::Type], [(key("type=compliant"), TypeRecall { recall: 1.5, support: 1 })].into()).is_err());
        assert!(TypeRecallTable::new(vec![Dimension::Type], [(key("type=compliant"), TypeRecall { recall: 1.0, support: 0 })].into()).is_err());
    }

    #[test]
    fn ranking() {
        let s: BTreeMap<String, f64> = [("A".to_string(), 0.9), ("B".to_string(), 0.5)].into();
        let r = rank_systems(&s);
        assert_eq!((r["A"], r["B"]), (1.0, 2.0));
        let s: BTreeMap<String, f64> = [("A".into(), 0.5), ("B".into(), 0.5), ("C".into(), 0.1)].into();
        let r = rank_systems(&s);
        assert_eq!((r["A"], r["B"], r["C"]), (1.5, 1.5, 3.0));
    }

    #[test]
    fn benchmark_column_ranks() {
        let s: BTreeMap<String, f64> = [
            ("Llama3", 36.37),
            ("mBERT", 23.80),
            ("BiLSTM-cs", 23.75),
            ("BETO", 23.55),
            ("BiLSTM-unad", 23.55),
            ("CRF", 6.50),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let r = rank_systems(&s);
        assert_eq!(r["Llama3"], 1.0);
        assert_eq!(r["mBERT"], 2.0);
        assert_eq!(r["BiLSTM-cs"], 3.0);
        assert_eq!(r["BETO"], 4.5);
        assert_eq!(r["BiLSTM-unad"], 4.5);
        assert_eq!(r["CRF"], 6.0);
    }

    #[test]
    fn correlation_examples() {
        let pred = [26.58, 86.87, 86.86, 87.86, 92.96, 42.93];
        let truth = [44.31, 77.99, 78.85, 80.88, 85.76, 33.33];
        let c = correlate::<f64>(&pred, &truth).unwrap();
        assert!((c.pearson - 0.94).abs() <= 0.005, "{}", c.pearson);
        assert!((c.spearman - 0.89).abs() <= 0.005, "{}", c.spearman);
        let xs = [1.0, 2.0, 5.0, 7.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::ZeroVariance)));
        assert!(matches!(pearson(&[1.0], &[1.0]), Err(Error::TooFewObservations(1))));
        assert!(matches!(spearman(&[1.0, 2.0], &[1.0]), Err(Error::LengthMismatch(2, 1))));
        let c32 = correlate::<f32>(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(c32.spearman, -1.0f32);
    }

    #[test]
    fn two_column_input() {
        let (x, y) = parse_two_columns::<f64>("predicted\ttrue\n26.58\t44.31\n# note\n86.87, 77.99\n").unwrap();
        assert_eq!((x, y), (vec![26.58, 86.87], vec![44.31, 77.99]));
        assert!(matches!(parse_two_columns::<f64>("1 2\n3\n"), Err(Error::BadNumericLine { line: 2, .. })));
        assert!(parse_two_columns::<f64>("1 2\nx y\n").is_err());
    }
}
