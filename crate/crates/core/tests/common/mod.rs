#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use spanprobe::corpus::spans_from_tags;
use spanprobe::{AttributeConfig, Dataset, Sentence, Span, Tag};

pub const WORDS: &[&str] = &[
    "la", "agencia", "presentó", "los", "más", "esperados", "de", "esta", "temporada", "en", "una", "gran",
    "empresa", "online", "selfie", "influencer", "burpees", "streaming", "fake", "news", "smartwatch", "casual",
    "top", "total", "bar", "fan", "Madrid", "OK", "A", "x", ",", ".", "2024",
];

pub const LABELS: &[&str] = &["ENG", "OTHER"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture_config() -> AttributeConfig {
    AttributeConfig::load(&fixtures().join("rules.toml")).expect("fixture config loads")
}

pub fn random_tokens(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| WORDS.choose(rng).unwrap().to_string()).collect()
}

/// Random well-formed tag sequence with spans of at most 4 tokens.
pub fn random_tags(rng: &mut ChaCha8Rng, n: usize, labels: &[&str]) -> Vec<Tag> {
    let mut tags = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if rng.gen_bool(0.3) {
            let label = labels.choose(rng).unwrap().to_string();
            let len = rng.gen_range(1..=4).min(n - i);
            tags.push(Tag::Begin(label.clone()));
            tags.extend((1..len).map(|_| Tag::Inside(label.clone())));
            i += len;
        } else {
            tags.push(Tag::Outside);
            i += 1;
        }
    }
    tags
}

pub fn random_sentence(rng: &mut ChaCha8Rng, labels: &[&str]) -> Sentence {
    let n = rng.gen_range(1..=14);
    let tokens = random_tokens(rng, n);
    let spans = spans_from_tags(&random_tags(rng, n, labels));
    Sentence::new(tokens, spans).unwrap()
}

pub fn random_dataset(rng: &mut ChaCha8Rng, labels: &[&str]) -> Dataset {
    let n = rng.gen_range(1..=12);
    Dataset::new("random", (0..n).map(|_| random_sentence(rng, labels)).collect())
}

/// Noisy copy of `gold`'s spans: kept, dropped, shifted, widened or joined
/// by spurious ones, all on the same tokens.
pub fn noisy_spans(rng: &mut ChaCha8Rng, s: &Sentence) -> Vec<Span> {
    let n = s.len();
    let mut out: Vec<Span> = Vec::new();
    for g in s.spans() {
        match rng.gen_range(0..5) {
            0 | 1 => out.push(g.clone()),
            2 => {}
            3 => {
                let end = (g.end + 1).min(n);
                out.push(Span::new(g.start, end, g.label.clone()));
            }
            _ if g.len() > 1 => {
                let cut = rng.gen_range(g.start + 1..g.end);
                out.push(Span::new(g.start, cut, g.label.clone()));
                out.push(Span::new(cut, g.end, g.label.clone()));
            }
            _ => out.push(Span::new(g.start, g.end, "OTHER")),
        }
    }
    if n > 0 && rng.gen_bool(0.3) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(a + 1..=n.min(a + 3));
        out.push(Span::new(a, b, "ENG"));
    }
    let mut kept: Vec<Span> = Vec::new();
    out.sort();
    for sp in out {
        if kept.iter().all(|k| !k.overlaps(&sp)) {
            kept.push(sp);
        }
    }
    kept
}

pub fn noisy_prediction(rng: &mut ChaCha8Rng, gold: &Dataset) -> Dataset {
    let sentences = gold
        .sentences
        .iter()
        .map(|s| {
            let spans = noisy_spans(rng, s);
            Sentence::new(s.texts().map(str::to_string).collect::<Vec<_>>(), spans).unwrap()
        })
        .collect();
    Dataset::new("pred", sentences)
}
