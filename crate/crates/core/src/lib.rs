//! Document-level machine translation evaluation.
//!
//! The crate scores candidate translations against one or more annotated
//! references by tracking discourse checkpoints (named entities, tense-bearing
//! verb tags, pronoun groups, and optionally human-annotated ambiguous terms)
//! alongside 1–4-gram recall. Both recall-based and distance-based scores are
//! provided, together with the meta-evaluation statistics used to compare
//! systems and validate metrics (paired t-tests, Pearson correlation with
//! Fisher confidence intervals).
//!
//! All metric arithmetic is generic over a [`Scalar`] (`f32` or `f64`). The
//! aliases defined at the crate root fix the scalar to `f64`, which is what
//! the command-line tool uses.
//!
//! ```
//! use blond::{corpus, profile::LanguageProfile, scoring::{self, Variant}};
//!
//! let line = r#"{"doc_id":"d1","sentences":[[{"t":"She","p":"PRP"},{"t":"left","p":"VBD"}]],"entities":[]}"#;
//! let docs = corpus::parse_corpus(line.as_bytes(), &LanguageProfile::english(), &Default::default()).unwrap();
//! let report: blond::ScoreReport =
//!     scoring::score_document(&docs[0], &docs, &LanguageProfile::english(), Variant::Blond).unwrap();
//! assert!((report.total - 100.0).abs() < 1e-9);
//! ```

pub mod checkpoint;
pub mod cli;
pub mod corpus;
pub mod profile;
pub mod scalar;
pub mod scoring;
pub mod stats;

pub use scalar::Scalar;

pub type WeightedCounts = checkpoint::WeightedCounts<f64>;
pub type ComponentScore = scoring::ComponentScore<f64>;
pub type ScoreReport = scoring::ScoreReport<f64>;
pub type CorpusScores = scoring::CorpusScores<f64>;
pub type CorpusSummary = scoring::CorpusSummary<f64>;
pub type ScoreVector = stats::ScoreVector<f64>;
pub type PairedTResult = stats::PairedTResult<f64>;
pub type CorrelationResult = stats::CorrelationResult<f64>;

pub type WeightedCountsF32 = checkpoint::WeightedCounts<f32>;
pub type ScoreReportF32 = scoring::ScoreReport<f32>;
pub type ScoreVectorF32 = stats::ScoreVector<f32>;
