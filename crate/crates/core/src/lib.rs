//! Diagnostic evaluation for span identification.
//!
//! * [`corpus`]: tokens, spans, sentences and the BIO file format.
//! * [`attributes`]: per-span attribute profiles (length, graphotactic shape,
//!   position, quotation, casing, adjacency, ambiguity).
//! * [`perturb`]: casing and quotation perturbations and suite building.
//! * [`metrics`]: span and token/separator scores, error typology.
//! * [`diagnostics`]: attribute-sliced scores and annotator agreement.
//! * [`prediction`]: recall extrapolation, ranking and correlation.
//!
//! Numeric results are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix them to `f64`.

macro_rules! named_enum {
    (
        $(#[$meta:meta])*
        $vis:vis enum $name:ident {
            $($(#[$vmeta:meta])* $variant:ident => $text:literal),+ $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
        $vis enum $name {
            $($(#[$vmeta])* #[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl std::str::FromStr for $name {
            type Err = $crate::error::Error;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err($crate::error::Error::UnknownValue { what: stringify!($name), value: s.to_string() }),
                }
            }
        }
    };
}

pub mod attributes;
pub mod corpus;
pub mod diagnostics;
pub mod error;
pub mod metrics;
pub mod perturb;
pub mod prediction;
pub mod report;
pub mod scalar;

pub use attributes::{AttributeConfig, AttributeProfile, ComplianceRules, Lexicon};
pub use corpus::{parse_bio, parse_bio_str, serialize_bio, Dataset, ParseMode, Sentence, Span, Tag, Token};
pub use diagnostics::{Dimension, KappaAlphabet, SliceKey};
pub use error::{Error, Result};
pub use metrics::{ConfusionCounts, ErrorTypology};
pub use perturb::{CasingTransform, Configuration, QuoteMode, SeedSentence, TypeTags};
pub use prediction::{FallbackPolicy, TargetTypeCounts};
pub use scalar::Scalar;

pub type ScoreSummary = metrics::ScoreSummary<f64>;
pub type SliceReport = diagnostics::SliceReport<f64>;
pub type AgreementReport = diagnostics::AgreementReport<f64>;
pub type TypeRecallTable = prediction::TypeRecallTable<f64>;
pub type PredictionReport = prediction::PredictionReport<f64>;
pub type CorrelationReport = prediction::CorrelationReport<f64>;
pub type ScoreReport = report::ScoreReport<f64>;
pub type FullReport = report::FullReport<f64>;

pub type ScoreSummaryF32 = metrics::ScoreSummary<f32>;
pub type TypeRecallTableF32 = prediction::TypeRecallTable<f32>;
pub type PredictionReportF32 = prediction::PredictionReport<f32>;
pub type CorrelationReportF32 = prediction::CorrelationReport<f32>;
